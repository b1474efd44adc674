#ifndef OJACC_LINE_GRAPH_HPP_
#define OJACC_LINE_GRAPH_HPP_

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ojacc/expr.hpp"
#include "ojacc/graph.hpp"

namespace ojacc {

using LGId = std::string;

struct LGVertex {
   LGId id;
   ExprPtr label;  //!< null on meta vertices
   std::set<LGId> pred;
   std::set<LGId> succ;
   bool meta = false;
   int order = 0;  //!< creation rank; merges keep the older vertex
};

// Directed line graph with meta sources "y:<root>" and sinks "x:<terminal>".
class LineGraph {
 public:
   auto vertices() const -> const std::map<LGId, LGVertex>& { return vs_; }
   auto has(const LGId& v) const -> bool { return vs_.count(v) != 0; }
   auto at(const LGId& v) const -> const LGVertex&;
   auto has_face(const LGId& i, const LGId& j) const -> bool;
   //! edges between two non-meta vertices, ordered by creation rank
   auto faces() const -> std::vector<std::pair<LGId, LGId>>;
   auto labeled_count() const -> std::size_t;
   auto edge_count() const -> std::size_t;

   // raw mutation, used by the elimination engine
   auto add(const LGId& id, ExprPtr label, bool meta = false) -> LGVertex&;
   auto fresh_id() -> LGId;
   void link(const LGId& i, const LGId& j);
   void unlink(const LGId& i, const LGId& j);
   void remove(const LGId& v);
   auto mut(const LGId& v) -> LGVertex&;

 private:
   std::map<LGId, LGVertex> vs_;
   int next_order_ = 0;
   int next_fill_ = 1;
};

auto build_line_graph(const DiffGraph& g) -> LineGraph;

struct EliminationStep {
   std::string kind;  //!< absorb, fillin, fillin-reuse-i, ..., merge, remove-isolated, extended-*
   LGId i;
   LGId j;
   std::vector<LGId> created;
   std::vector<LGId> updated;
   std::vector<LGId> removed;
   int mults = 0;
   std::string detail;  //!< variant note for extended rules
};

//! Naumann's steps on face (i, j) plus cascaded removals and merges.
auto eliminate_face(LineGraph& lg, const LGId& i, const LGId& j) -> std::vector<EliminationStep>;

enum class ExtendedRule {
   AbsorbSubsetSucc,   //!< P_k = P_i, S_k strict subset of S_j
   AbsorbSubsetPred,   //!< P_k strict subset of P_i, S_k = S_j
   FillinSupersetSucc, //!< P_k = P_i, S_k strict superset of S_j
   FillinSupersetPred, //!< P_k strict superset of P_i, S_k = S_j
   MergeSupersetPred,  //!< P_k contains P_i, S_k = S_i  (k plays i')
   MergeSupersetSucc,  //!< P_k = P_i, S_k contains S_i
};
auto rule_name(ExtendedRule r) -> std::string;

//! For merge rules `j` is ignored and `k` is the vertex i' merged into i.
auto extended_rewrite(LineGraph& lg, ExtendedRule rule, const LGId& i, const LGId& j, const LGId& k)
    -> std::vector<EliminationStep>;

//! A face given by vertex ids, or by the labels of its two ends.
struct FaceRef {
   LGId i;
   LGId j;
   ExprPtr left;   //!< used when ids are empty
   ExprPtr right;
};
auto find_face(const LineGraph& lg, const FaceRef& f) -> std::pair<LGId, LGId>;

struct Trace {
   std::vector<EliminationStep> steps;
   auto mults() const -> int;
};
//! Faces are eliminated in order; with `allow_extended` a superset fillin replaces fillin-then-merge.
auto run_elimination(LineGraph& lg, const std::vector<FaceRef>& order, bool allow_extended = false) -> Trace;
//! Eliminates the first remaining face until none are left.
void eliminate_rest(LineGraph& lg, Trace& t);

auto readout_jacobian(const LineGraph& lg) -> ExprSet;

auto parse_face_order(const std::string& text) -> std::vector<FaceRef>;
auto trace_to_jsonl(const Trace& t) -> std::string;
//! Meta vertices are left out unless asked for.
auto line_graph_to_dot(const LineGraph& lg, bool with_meta = false) -> std::string;

}  // namespace ojacc

#endif  // OJACC_LINE_GRAPH_HPP_
