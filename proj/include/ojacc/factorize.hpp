#ifndef OJACC_FACTORIZE_HPP_
#define OJACC_FACTORIZE_HPP_

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ojacc/expr.hpp"
#include "ojacc/graph.hpp"

namespace ojacc {

// Allocates reference names s1, s2, ... skipping anything already used as a label or id.
class RefBook {
 public:
   void reserve(const std::string& name) { taken_.insert(name); }
   void reserve(const DiffGraph& g);
   auto add(ExprPtr def) -> std::string;
   auto defs() const -> const std::vector<RefDef>& { return defs_; }

 private:
   std::vector<RefDef> defs_;
   std::set<std::string> taken_;
   int next_ = 1;
};

// Fresh copy names: v7 -> v7.1, v7.2, ...
class Namer {
 public:
   void reserve(const DiffGraph& g);
   auto vertex(const VertexId& base) -> VertexId;
   auto edge(const EdgeId& base) -> EdgeId;
   void reserve_edge(const EdgeId& id) { edges_.insert(id); }

 private:
   std::set<VertexId> vertices_;
   std::set<EdgeId> edges_;
};

//! Split in-degree>1 vertices bottom-up until the block is series-parallel.
auto factorize_backward(const DiffGraph& g) -> DiffGraph;
//! Mirror image: split out-degree>1 vertices top-down.
auto factorize_forward(const DiffGraph& g) -> DiffGraph;

struct RefFactorization {
   DiffGraph graph;
   ExprSet defs;  //!< definitions only, no entries
};
//! Backward factorization that turns every composite sub-block about to be duplicated into a reference edge.
auto factorize_with_refs(const DiffGraph& g) -> RefFactorization;

//! Shared engine; `book` may be null (no references).
auto split_factorize(const DiffGraph& g, bool backward, RefBook* book, Namer& namer) -> DiffGraph;

struct TranscriptRecord {
   int step = 0;
   std::string op;
   std::string args_json;  //!< serialized JSON object
   std::string page;
};

struct Page {
   std::string id;
   DiffGraph graph;
   std::map<VertexId, VertexId> provenance;  //!< local vertex -> original vertex
   std::vector<Entry> entries;                //!< filled for leaf pages
};

struct PagePlan {
   std::vector<Page> pages;  //!< leaf pages in creation order
   std::vector<RefDef> refs;
   std::vector<TranscriptRecord> transcript;
};

auto plan_pages(const DiffGraph& g) -> PagePlan;
auto merge_pages(const PagePlan& plan) -> ExprSet;

auto format_page(const Page& p) -> std::string;
auto transcript_to_jsonl(const std::vector<TranscriptRecord>& t) -> std::string;

}  // namespace ojacc

#endif  // OJACC_FACTORIZE_HPP_
