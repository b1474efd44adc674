#ifndef OJACC_EXPR_HPP_
#define OJACC_EXPR_HPP_

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "ojacc/graph.hpp"

namespace ojacc {

enum class ExprKind { Sym, Unit, Prod, Sum, Ref };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Noncommutative expression tree. Prod factors run root to terminal.
// Build through the helpers below; they keep the flattened form.
struct Expr {
   ExprKind kind;
   std::string name;  //!< Sym / Ref only
   std::vector<ExprPtr> kids;
};

auto sym(const std::string& name) -> ExprPtr;
auto unit() -> ExprPtr;
auto ref(const std::string& name) -> ExprPtr;
auto prod(const std::vector<ExprPtr>& factors) -> ExprPtr;
auto sum(const std::vector<ExprPtr>& terms) -> ExprPtr;
//! sym() for ordinary labels, unit() for "1"
auto label_expr(const std::string& label) -> ExprPtr;

auto parse_expr(const std::string& text) -> ExprPtr;
auto format_expr(const ExprPtr& e) -> std::string;

//! Key that ignores Sum term order; Prod order is kept.
auto canonical_key(const ExprPtr& e) -> std::string;
auto structurally_equal(const ExprPtr& a, const ExprPtr& b) -> bool;

//! multiplications in this tree alone; Ref leaves cost nothing
auto expr_cost(const ExprPtr& e) -> int;
auto symbols(const ExprPtr& e) -> std::set<std::string>;
auto ref_names(const ExprPtr& e) -> std::set<std::string>;
//! replace Sym/Ref leaves named in `m`
auto substitute(const ExprPtr& e, const std::map<std::string, ExprPtr>& m) -> ExprPtr;

struct RefDef {
   std::string name;
   ExprPtr def;
};

struct Entry {
   VertexId root;
   VertexId terminal;
   ExprPtr expr;
};

struct ExprSet {
   std::vector<RefDef> defs;
   std::vector<Entry> entries;

   auto find_def(const std::string& name) const -> const RefDef*;
   auto find_entry(const VertexId& root, const VertexId& terminal) const -> const Entry*;
};

auto parse_exprset(const std::string& text) -> ExprSet;
auto format_exprset(const ExprSet& s) -> std::string;
//! turn Sym leaves naming a definition into Ref nodes
void bind_refs(ExprSet& s);

auto fma_cost(const ExprSet& s) -> int;
auto expand(const ExprPtr& e, const ExprSet& s) -> ExprPtr;
auto expand_refs(const ExprSet& s) -> ExprSet;

}  // namespace ojacc

#endif  // OJACC_EXPR_HPP_
