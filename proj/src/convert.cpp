#include "ojacc/convert.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "ojacc/error.hpp"

namespace ojacc {

namespace {

struct WorkEdge {
   VertexId src;
   VertexId dst;
   ExprPtr expr;
   std::size_t order;
};

}  // namespace

auto graph_to_expr(const DiffGraph& g, const VertexId& src, const VertexId& sink) -> ExprPtr {
   if (!g.has_vertex(src) || !g.has_vertex(sink)) throw usage_error("unknown vertex in pair");
   std::vector<WorkEdge> work;
   for (auto i : edges_between(g, {src}, {sink})) {
      const auto& e = g.edges()[i];
      work.push_back({e.src, e.dst, label_expr(e.label), i});
   }
   if (work.empty()) throw usage_error("no path from '" + src + "' to '" + sink + "'");

   for (bool changed = true; changed;) {
      changed = false;
      // parallel bundles
      std::map<std::pair<VertexId, VertexId>, std::vector<std::size_t>> groups;
      for (std::size_t i = 0; i < work.size(); ++i) groups[{work[i].src, work[i].dst}].push_back(i);
      std::vector<WorkEdge> next;
      std::set<std::size_t> used;
      for (std::size_t i = 0; i < work.size(); ++i) {
         if (used.count(i)) continue;
         const auto& grp = groups[{work[i].src, work[i].dst}];
         if (grp.size() == 1) {
            next.push_back(work[i]);
            continue;
         }
         std::vector<WorkEdge> members;
         for (auto k : grp) {
            used.insert(k);
            members.push_back(work[k]);
         }
         std::sort(members.begin(), members.end(), [](auto& a, auto& b) { return a.order < b.order; });
         std::vector<ExprPtr> terms;
         for (const auto& m : members) terms.push_back(m.expr);
         next.push_back({work[i].src, work[i].dst, sum(terms), members.front().order});
         changed = true;
      }
      work = std::move(next);
      // series: first vertex with in = out = 1
      std::map<VertexId, int> indeg, outdeg;
      for (const auto& w : work) {
         ++outdeg[w.src];
         ++indeg[w.dst];
      }
      for (const auto& [v, d] : indeg) {
         if (v == src || v == sink || d != 1 || outdeg[v] != 1) continue;
         auto a = std::find_if(work.begin(), work.end(), [&](auto& w) { return w.dst == v; });
         auto b = std::find_if(work.begin(), work.end(), [&](auto& w) { return w.src == v; });
         WorkEdge merged{a->src, b->dst, prod({a->expr, b->expr}), std::min(a->order, b->order)};
         auto ia = a - work.begin(), ib = b - work.begin();
         work.erase(work.begin() + std::max(ia, ib));
         work.erase(work.begin() + std::min(ia, ib));
         work.push_back(merged);
         changed = true;
         break;
      }
   }
   if (work.size() != 1) throw usage_error("complex block b<" + src + "," + sink + "> has no direct expression");
   return work.front().expr;
}

auto graph_to_expr(const DiffGraph& g) -> ExprPtr {
   auto r = g.roots();
   auto t = g.terminals();
   if (r.size() != 1 || t.size() != 1) throw usage_error("expected a single root and a single terminal");
   return graph_to_expr(g, r.front(), t.front());
}

auto expr_to_graph(const ExprPtr& e) -> DiffGraph {
   std::vector<Edge> edges;
   std::set<EdgeId> ids;
   int vcount = 2;
   int ucount = 0;
   auto fresh_id = [&](const std::string& base) {
      if (ids.insert(base).second) return base;
      for (int k = 1;; ++k)
         if (auto id = base + "." + std::to_string(k); ids.insert(id).second) return id;
   };
   auto build = [&](auto&& self, const ExprPtr& x, const VertexId& s, const VertexId& d) -> void {
      switch (x->kind) {
         case ExprKind::Sym:
         case ExprKind::Ref:
            edges.push_back({fresh_id(x->name), s, d, x->name});
            break;
         case ExprKind::Unit:
            edges.push_back({fresh_id("u" + std::to_string(++ucount)), s, d, "1"});
            break;
         case ExprKind::Sum:
            for (const auto& k : x->kids) self(self, k, s, d);
            break;
         case ExprKind::Prod: {
            auto cur = s;
            for (std::size_t i = 0; i < x->kids.size(); ++i) {
               auto nxt = i + 1 == x->kids.size() ? d : "v" + std::to_string(vcount++);
               self(self, x->kids[i], cur, nxt);
               cur = nxt;
            }
            break;
         }
      }
   };
   build(build, e, "v0", "v1");
   return DiffGraph(std::move(edges));
}

}  // namespace ojacc
