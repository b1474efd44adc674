#ifndef OJACC_LOCAL_JACOBIAN_HPP_
#define OJACC_LOCAL_JACOBIAN_HPP_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ojacc/expr.hpp"
#include "ojacc/graph.hpp"

namespace ojacc {

// Sparse Jacobian between two vertex sets; missing entries are structural zeros.
struct LocalJacobian {
   std::vector<VertexId> rows;
   std::vector<VertexId> cols;
   std::map<std::pair<VertexId, VertexId>, ExprPtr> entries;

   auto at(const VertexId& r, const VertexId& c) const -> ExprPtr;  //!< nullptr for a zero
   auto nnz() const -> std::size_t { return entries.size(); }
};

//! Entry (r, c) collects the paths from r to c that do not pass through another row or column.
auto extract_local_jacobian(const DiffGraph& g, const std::vector<VertexId>& rows,
                            const std::vector<VertexId>& cols) -> LocalJacobian;
//! One factor per pair of adjacent depth levels, after cross-level segmentation.
auto level_chain(const DiffGraph& g) -> std::vector<LocalJacobian>;

auto format_local_jacobian(const LocalJacobian& j) -> std::string;

// Binary association tree over chain positions.
struct Assoc {
   int leaf = -1;
   std::vector<Assoc> kids;  //!< empty for a leaf, otherwise exactly two
};

//! "((AB)C)D" style; letters name chain positions in order, juxtaposition groups to the left.
auto parse_assoc(const std::string& text, std::size_t n) -> Assoc;
auto format_assoc(const Assoc& a) -> std::string;
auto left_to_right(std::size_t n) -> Assoc;
auto right_to_left(std::size_t n) -> Assoc;
auto all_assocs(int lo, int hi) -> std::vector<Assoc>;

struct Accumulation {
   ExprSet set;  //!< entries J[row, col] of the full product
   int cost = 0;
};
//! Composite intermediate entries used more than once become references.
auto accumulate(const std::vector<LocalJacobian>& chain, const Assoc& order) -> Accumulation;

constexpr std::size_t kDefaultChainBound = 12;

struct BestOrder {
   Assoc order;
   int cost = 0;
};
//! Interval dynamic program over sparsity patterns; entries on no end-to-end path are dropped first.
auto best_accumulation_order(const std::vector<LocalJacobian>& chain, std::size_t bound = kDefaultChainBound)
    -> BestOrder;

}  // namespace ojacc

#endif  // OJACC_LOCAL_JACOBIAN_HPP_
