#ifndef OJACC_RELATIONS_HPP_
#define OJACC_RELATIONS_HPP_

#include <string>
#include <utility>
#include <vector>

#include "ojacc/expr.hpp"
#include "ojacc/line_graph.hpp"

namespace ojacc {

// bare-*: the factor meets a Sum term with nothing after (or before) it.
// distant: more than one parenthesis level apart; recorded, never a dependency.
enum class RelKind { Direct, IndirectRight, IndirectLeft, BareRight, BareLeft, Distant };
auto rel_kind_name(RelKind k) -> std::string;

struct Occurrence {
   std::string expr;  //!< "J[r,t]" or a definition name
   RelKind kind;
   std::string witness;  //!< the adjoining factor for indirect kinds
};

using SymbolPair = std::pair<std::string, std::string>;

// Composite factors are keyed by their parenthesized text.
struct Relation {
   SymbolPair pair;
   std::vector<Occurrence> occurrences;
};
using RelationTable = std::vector<Relation>;  //!< in order of first appearance

auto classify_relations(const ExprSet& s) -> RelationTable;
auto relations_to_json(const RelationTable& t) -> std::string;

struct Violation {
   SymbolPair pair;
   std::string direct_in;
   std::string bare_in;
};
//! Pairs multiplied directly somewhere and also as s1(s2+...) or (...+s1)s2 elsewhere.
auto lemma1_audit(const RelationTable& t) -> std::vector<Violation>;

struct DepEdge {
   SymbolPair from;  //!< needs `to` eliminated first
   SymbolPair to;
   bool mirrored = false;  //!< derived from an indirect-left occurrence
};

struct DepGraph {
   std::vector<SymbolPair> nodes;
   std::vector<DepEdge> edges;
};

auto build_dep_graph(const RelationTable& t) -> DepGraph;
auto dep_graph_to_json(const DepGraph& d) -> std::string;
auto dep_graph_to_dot(const DepGraph& d) -> std::string;

constexpr std::size_t kDefaultCycleBound = 1000;

using Cycle = std::vector<SymbolPair>;
//! Elementary cycles, each starting at its smallest node.
auto detect_cycles(const DepGraph& d, std::size_t bound = kDefaultCycleBound) -> std::vector<Cycle>;
auto format_cycle(const Cycle& c) -> std::string;

struct OrderedFace {
   FaceRef face;  //!< by operand labels, refs expanded
   std::string expr;
   SymbolPair junction;
};
//! Throws a cycle error listing detect_cycles output when dependencies are circular.
auto safe_elimination_order(const ExprSet& s) -> std::vector<OrderedFace>;
auto faces_of(const std::vector<OrderedFace>& order) -> std::vector<FaceRef>;

}  // namespace ojacc

#endif  // OJACC_RELATIONS_HPP_
