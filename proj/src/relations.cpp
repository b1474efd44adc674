#include "ojacc/relations.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ojacc/error.hpp"

namespace ojacc {

auto rel_kind_name(RelKind k) -> std::string {
   switch (k) {
      case RelKind::Direct: return "direct";
      case RelKind::IndirectRight: return "indirect-right";
      case RelKind::IndirectLeft: return "indirect-left";
      case RelKind::BareRight: return "bare-right";
      case RelKind::BareLeft: return "bare-left";
      case RelKind::Distant: return "distant";
   }
   return "?";
}

namespace {

auto key(const ExprPtr& e) -> std::string {
   switch (e->kind) {
      case ExprKind::Sym:
      case ExprKind::Ref: return e->name;
      case ExprKind::Unit: return "1";
      default: return "(" + format_expr(e) + ")";
   }
}

auto entry_name(const Entry& e) -> std::string { return "J[" + e.root + "," + e.terminal + "]"; }

// Sum terms seen through a factor: a Sum itself, or a reference to one.
auto sum_terms(const ExprPtr& f, const ExprSet& s) -> const std::vector<ExprPtr>* {
   if (f->kind == ExprKind::Sum) return &f->kids;
   if (f->kind == ExprKind::Ref)
      if (const auto* d = s.find_def(f->name); d && d->def->kind == ExprKind::Sum) return &d->def->kids;
   return nullptr;
}

auto atom(const ExprPtr& e) -> bool { return e->kids.empty(); }

// Calls `junction(expr, factors, k)` for every adjacent factor pair, innermost first.
void walk_junctions(const ExprSet& s,
                    const std::function<void(const std::string&, const std::vector<ExprPtr>&, std::size_t)>& junction) {
   std::function<void(const std::string&, const ExprPtr&)> go = [&](const std::string& where, const ExprPtr& e) {
      for (const auto& k : e->kids) go(where, k);
      if (e->kind == ExprKind::Prod)
         for (std::size_t k = 0; k + 1 < e->kids.size(); ++k) junction(where, e->kids, k);
   };
   for (const auto& d : s.defs) go(d.name, d.def);
   for (const auto& e : s.entries) go(entry_name(e), e.expr);
}

}  // namespace

auto classify_relations(const ExprSet& s) -> RelationTable {
   RelationTable out;
   std::map<SymbolPair, std::size_t> index;
   auto note = [&](SymbolPair p, Occurrence o) {
      auto [it, fresh] = index.try_emplace(p, out.size());
      if (fresh) out.push_back({p, {}});
      out[it->second].occurrences.push_back(std::move(o));
   };
   walk_junctions(s, [&](const std::string& where, const std::vector<ExprPtr>& fs, std::size_t k) {
      const auto& a = fs[k];
      const auto& b = fs[k + 1];
      note({key(a), key(b)}, {where, RelKind::Direct, ""});
      const auto* right = sum_terms(b, s);
      const auto* left = sum_terms(a, s);
      if (right && left) {
         note({key(a), key(b)}, {where, RelKind::Distant, ""});
         return;
      }
      if (right)
         for (const auto& t : *right) {
            if (atom(t))
               note({key(a), key(t)}, {where, RelKind::BareRight, ""});
            else if (t->kind == ExprKind::Prod && atom(t->kids[0]))
               note({key(a), key(t->kids[0])}, {where, RelKind::IndirectRight, key(t->kids[1])});
            else
               note({key(a), key(t)}, {where, RelKind::Distant, ""});
         }
      if (left)
         for (const auto& t : *left) {
            if (atom(t))
               note({key(t), key(b)}, {where, RelKind::BareLeft, ""});
            else if (t->kind == ExprKind::Prod && atom(t->kids.back()))
               note({key(t->kids.back()), key(b)}, {where, RelKind::IndirectLeft, key(t->kids[t->kids.size() - 2])});
            else
               note({key(t), key(b)}, {where, RelKind::Distant, ""});
         }
   });
   return out;
}

auto relations_to_json(const RelationTable& t) -> std::string {
   nlohmann::ordered_json j = nlohmann::ordered_json::array();
   for (const auto& r : t) {
      nlohmann::ordered_json occ = nlohmann::ordered_json::array();
      for (const auto& o : r.occurrences) {
         nlohmann::ordered_json x{{"expr", o.expr}, {"kind", rel_kind_name(o.kind)}};
         if (!o.witness.empty()) x["witness"] = o.witness;
         occ.push_back(x);
      }
      j.push_back({{"left", r.pair.first}, {"right", r.pair.second}, {"occurrences", occ}});
   }
   return j.dump(2);
}

auto lemma1_audit(const RelationTable& t) -> std::vector<Violation> {
   std::vector<Violation> out;
   for (const auto& r : t) {
      auto direct = std::find_if(r.occurrences.begin(), r.occurrences.end(),
                                 [](const auto& o) { return o.kind == RelKind::Direct; });
      auto bare = std::find_if(r.occurrences.begin(), r.occurrences.end(), [](const auto& o) {
         return o.kind == RelKind::BareLeft || o.kind == RelKind::BareRight;
      });
      if (direct != r.occurrences.end() && bare != r.occurrences.end())
         out.push_back({r.pair, direct->expr, bare->expr});
   }
   return out;
}

auto build_dep_graph(const RelationTable& t) -> DepGraph {
   DepGraph d;
   std::set<SymbolPair> seen;
   for (const auto& r : t) {
      bool direct = std::any_of(r.occurrences.begin(), r.occurrences.end(),
                                [](const auto& o) { return o.kind == RelKind::Direct; });
      if (direct) d.nodes.push_back(r.pair);
   }
   std::set<SymbolPair> nodes(d.nodes.begin(), d.nodes.end());
   for (const auto& r : t) {
      if (!nodes.count(r.pair)) continue;
      for (const auto& o : r.occurrences) {
         DepEdge e;
         if (o.kind == RelKind::IndirectRight)
            e = {r.pair, {r.pair.second, o.witness}, false};
         else if (o.kind == RelKind::IndirectLeft)
            e = {r.pair, {o.witness, r.pair.first}, true};
         else
            continue;
         if (!nodes.count(e.to)) continue;
         auto sig = std::make_pair(e.from.first + "\x1f" + e.from.second, e.to.first + "\x1f" + e.to.second);
         if (!seen.insert(sig).second) continue;
         d.edges.push_back(e);
      }
   }
   return d;
}

auto dep_graph_to_json(const DepGraph& d) -> std::string {
   nlohmann::ordered_json j;
   j["nodes"] = nlohmann::ordered_json::array();
   for (const auto& n : d.nodes) j["nodes"].push_back({n.first, n.second});
   j["edges"] = nlohmann::ordered_json::array();
   for (const auto& e : d.edges)
      j["edges"].push_back({{"from", {e.from.first, e.from.second}},
                            {"to", {e.to.first, e.to.second}},
                            {"mirrored", e.mirrored}});
   return j.dump(2);
}

namespace {
auto face_text(const SymbolPair& p) -> std::string { return "<" + p.first + "," + p.second + ">"; }
}  // namespace

auto dep_graph_to_dot(const DepGraph& d) -> std::string {
   std::ostringstream out;
   out << "digraph deps {\n";
   for (const auto& n : d.nodes) out << "  \"" << face_text(n) << "\";\n";
   for (const auto& e : d.edges) {
      out << "  \"" << face_text(e.from) << "\" -> \"" << face_text(e.to) << "\"";
      if (e.mirrored) out << " [style=dashed]";
      out << ";\n";
   }
   out << "}\n";
   return out.str();
}

auto detect_cycles(const DepGraph& d, std::size_t bound) -> std::vector<Cycle> {
   std::map<SymbolPair, std::size_t> id;
   for (const auto& n : d.nodes) id.try_emplace(n, id.size());
   std::vector<SymbolPair> name(id.size());
   for (const auto& [n, i] : id) name[i] = n;
   std::vector<std::vector<std::size_t>> adj(id.size());
   for (const auto& e : d.edges) adj[id.at(e.from)].push_back(id.at(e.to));
   for (auto& a : adj) std::sort(a.begin(), a.end());

   // cycles are reported from their smallest node, visiting only larger ones
   std::vector<Cycle> out;
   std::vector<std::size_t> stack;
   std::vector<bool> on(id.size(), false);
   std::function<void(std::size_t, std::size_t)> dfs = [&](std::size_t start, std::size_t v) {
      for (auto w : adj[v]) {
         if (out.size() >= bound) return;
         if (w == start) {
            Cycle c;
            for (auto x : stack) c.push_back(name[x]);
            out.push_back(c);
         } else if (w > start && !on[w]) {
            on[w] = true;
            stack.push_back(w);
            dfs(start, w);
            stack.pop_back();
            on[w] = false;
         }
      }
   };
   for (std::size_t s = 0; s < id.size() && out.size() < bound; ++s) {
      stack = {s};
      on[s] = true;
      dfs(s, s);
      on[s] = false;
   }
   return out;
}

auto format_cycle(const Cycle& c) -> std::string {
   std::string out;
   for (const auto& p : c) out += face_text(p) + " -> ";
   return c.empty() ? out : out + face_text(c.front());
}

namespace {

struct Task {
   std::string expr;
   const std::vector<ExprPtr>* factors;
   std::size_t k;
   SymbolPair pair;
   std::set<std::size_t> deps;
};

}  // namespace

namespace {

// Fresh node for every position, so subtrees can be told apart by address.
auto unshare(const ExprPtr& e) -> ExprPtr {
   if (e->kids.empty()) return std::make_shared<const Expr>(*e);
   Expr copy{e->kind, e->name, {}};
   for (const auto& k : e->kids) copy.kids.push_back(unshare(k));
   return std::make_shared<const Expr>(std::move(copy));
}

}  // namespace

auto safe_elimination_order(const ExprSet& shared) -> std::vector<OrderedFace> {
   ExprSet s = shared;
   for (auto& d : s.defs) d.def = unshare(d.def);
   for (auto& e : s.entries) e.expr = unshare(e.expr);
   auto table = classify_relations(s);
   auto deps = build_dep_graph(table);
   if (auto cycles = detect_cycles(deps); !cycles.empty()) {
      std::string msg = std::to_string(cycles.size()) + " circular elimination dependenc" +
                        (cycles.size() == 1 ? "y" : "ies");
      for (const auto& c : cycles) msg += "\n  " + format_cycle(c);
      throw cycle_error(msg);
   }

   std::vector<Task> tasks;
   std::map<const Expr*, std::vector<std::size_t>> inside;  // every task within a subtree
   std::map<std::string, const Expr*> def_root;
   for (const auto& d : s.defs) def_root[d.name] = d.def.get();
   std::function<void(const std::string&, const ExprPtr&)> collect = [&](const std::string& where, const ExprPtr& e) {
      auto& mine = inside[e.get()];
      for (const auto& c : e->kids) {
         if (!inside.count(c.get())) collect(where, c);
         const auto& sub = inside[c.get()];
         mine.insert(mine.end(), sub.begin(), sub.end());
      }
      if (e->kind != ExprKind::Prod) return;
      for (std::size_t k = 0; k + 1 < e->kids.size(); ++k) {
         mine.push_back(tasks.size());
         tasks.push_back({where, &e->kids, k, {key(e->kids[k]), key(e->kids[k + 1])}, {}});
      }
   };
   for (const auto& d : s.defs) collect(d.name, d.def);
   for (const auto& e : s.entries) collect(entry_name(e), e.expr);

   // an operand must exist as a single vertex before it takes part in a face
   for (std::size_t t = 0; t < tasks.size(); ++t)
      for (auto f : {tasks[t].k, tasks[t].k + 1}) {
         const auto& fac = (*tasks[t].factors)[f];
         const Expr* root = fac.get();
         if (fac->kind == ExprKind::Ref) {
            auto it = def_root.find(fac->name);
            if (it == def_root.end()) throw usage_error("unresolved reference '" + fac->name + "'");
            root = it->second;
         }
         for (auto u : inside[root]) tasks[t].deps.insert(u);
      }
   std::map<SymbolPair, std::vector<std::size_t>> by_pair;
   for (std::size_t t = 0; t < tasks.size(); ++t) by_pair[tasks[t].pair].push_back(t);
   std::set<std::size_t> targets;
   for (const auto& e : deps.edges)
      for (auto a : by_pair[e.from])
         for (auto b : by_pair[e.to]) {
            tasks[a].deps.insert(b);
            targets.insert(b);
         }

   std::vector<std::size_t> order;
   std::vector<bool> done(tasks.size(), false);
   while (order.size() < tasks.size()) {
      std::optional<std::size_t> pick;
      for (std::size_t t = 0; t < tasks.size(); ++t) {
         if (done[t]) continue;
         if (!std::all_of(tasks[t].deps.begin(), tasks[t].deps.end(), [&](auto u) { return done[u]; })) continue;
         if (!pick || (targets.count(t) && !targets.count(*pick))) pick = t;
      }
      if (!pick) throw cycle_error("junction dependencies are circular");
      done[*pick] = true;
      order.push_back(*pick);
   }

   // operands are the factor runs already fused inside the same product
   std::map<const std::vector<ExprPtr>*, std::vector<std::size_t>> run_of;
   std::vector<OrderedFace> out;
   for (auto t : order) {
      const auto& fs = *tasks[t].factors;
      auto& runs = run_of[&fs];
      if (runs.empty())
         for (std::size_t i = 0; i < fs.size(); ++i) runs.push_back(i);
      auto span = [&](std::size_t id) {
         std::vector<ExprPtr> parts;
         for (std::size_t i = 0; i < fs.size(); ++i)
            if (runs[i] == id) parts.push_back(expand(fs[i], s));
         return prod(parts);
      };
      auto l = runs[tasks[t].k], r = runs[tasks[t].k + 1];
      out.push_back({FaceRef{"", "", span(l), span(r)}, tasks[t].expr, tasks[t].pair});
      for (auto& x : runs)
         if (x == r) x = l;
   }
   return out;
}

auto faces_of(const std::vector<OrderedFace>& order) -> std::vector<FaceRef> {
   std::vector<FaceRef> out;
   for (const auto& f : order) out.push_back(f.face);
   return out;
}

}  // namespace ojacc
