#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>

#include <json.hpp>

#include "ojacc/convert.hpp"
#include "ojacc/error.hpp"
#include "ojacc/factorize.hpp"

namespace ojacc {

namespace {

using json = nlohmann::ordered_json;

constexpr int kMaxPasses = 64;
constexpr int kMaxDepth = 256;

class Planner {
 public:
   explicit Planner(const DiffGraph& g) {
      namer_.reserve(g);
      book_.reserve(g);
   }

   auto run(const DiffGraph& g) -> PagePlan {
      Page p{"p0", g, {}, {}};
      for (const auto& v : g.vertices()) p.provenance[v] = v;
      process(std::move(p), 0);
      plan_.refs = book_.defs();
      return std::move(plan_);
   }

 private:
   void log(const std::string& op, const json& args, const std::string& page) {
      plan_.transcript.push_back({static_cast<int>(plan_.transcript.size()) + 1, op, args.dump(), page});
   }

   auto edge_for(const VertexId& s, const VertexId& d, const ExprPtr& def, const std::string& base) -> Edge {
      if (def->kind == ExprKind::Sym || def->kind == ExprKind::Unit) return {namer_.edge(base), s, d, def->name};
      auto name = book_.add(def);
      namer_.reserve_edge(name);
      return {name, s, d, name};
   }

   // Step 1: every simple chain and parallel bundle becomes one reference edge.
   auto contract_simple(DiffGraph g, const std::string& pid) -> DiffGraph {
      for (;;) {
         const auto& es = g.edges();
         auto pass = [&](const VertexId& v) { return g.in_degree(v) == 1 && g.out_degree(v) == 1; };
         std::optional<std::vector<std::size_t>> chain;
         for (std::size_t i = 0; i < es.size() && !chain; ++i) {
            if (pass(es[i].src) || !pass(es[i].dst)) continue;
            chain = std::vector<std::size_t>{i};
            while (pass(es[chain->back()].dst)) chain->push_back(g.out_edges(es[chain->back()].dst).front());
         }
         std::vector<std::size_t> group;
         ExprPtr def;
         std::string op;
         if (chain) {
            group = *chain;
            std::vector<ExprPtr> fs;
            for (auto i : group) fs.push_back(label_expr(es[i].label));
            def = prod(fs);
            op = "replace-chain";
         } else {
            std::map<std::pair<VertexId, VertexId>, std::vector<std::size_t>> bundles;
            for (std::size_t i = 0; i < es.size(); ++i) bundles[{es[i].src, es[i].dst}].push_back(i);
            for (const auto& [k, idx] : bundles)
               if (idx.size() > 1 && group.empty()) group = idx;
            if (group.empty()) return g;
            std::vector<ExprPtr> ts;
            for (auto i : group) ts.push_back(label_expr(es[i].label));
            def = sum(ts);
            op = "replace-block";
         }
         auto src = es[group.front()].src, dst = es[group.back()].dst;
         auto ne = edge_for(src, dst, def, es[group.front()].id);
         json members = json::array();
         for (auto i : group) members.push_back(es[i].id);
         log(op, {{"ref", ne.label}, {"src", src}, {"sink", dst}, {"edges", members}, {"def", format_expr(def)}},
             pid);
         std::vector<Edge> next;
         std::set<std::size_t> drop(group.begin(), group.end());
         for (std::size_t i = 0; i < es.size(); ++i)
            if (!drop.count(i)) next.push_back(es[i]);
         next.push_back(ne);
         g = DiffGraph(std::move(next));
      }
   }

   auto pivots(const DiffGraph& g) -> std::optional<std::pair<VertexId, VertexId>> {
      auto rt = rt_degrees(g);
      auto lv = depth_levels(g).level;
      std::map<int, std::vector<VertexId>> by_level;
      for (const auto& v : g.vertices())
         if (!g.is_root(v) && !g.is_terminal(v)) by_level[lv[v]].push_back(v);
      if (by_level.empty()) return std::nullopt;
      int max_r = 0;
      for (const auto& [l, vs] : by_level)
         for (const auto& v : vs) max_r = std::max(max_r, rt[v].r);
      std::optional<VertexId> vi;
      for (const auto& [l, vs] : by_level) {
         auto n = std::count_if(vs.begin(), vs.end(), [&](auto& v) { return rt[v].r == max_r; });
         if (n == 1) {
            vi = *std::find_if(vs.begin(), vs.end(), [&](auto& v) { return rt[v].r == max_r; });
            break;
         }
      }
      if (!vi) return std::nullopt;
      auto cand = descendants(g, *vi);
      cand.insert(*vi);
      int max_t = 0;
      for (const auto& v : cand)
         if (!g.is_terminal(v)) max_t = std::max(max_t, rt[v].t);
      for (auto it = by_level.rbegin(); it != by_level.rend(); ++it) {
         const auto& vs = it->second;
         auto n = std::count_if(vs.begin(), vs.end(), [&](auto& v) { return rt[v].t >= max_t; });
         auto hit = std::find_if(vs.begin(), vs.end(), [&](auto& v) { return cand.count(v) && rt[v].t == max_t; });
         if (n == 1 && hit != vs.end()) return std::make_pair(*vi, *hit);
      }
      return std::make_pair(*vi, *vi);
   }

   auto child(const Page& parent, int k, std::vector<Edge> edges) -> Page {
      Page c{parent.id + "." + std::to_string(k), DiffGraph(std::move(edges)), {}, {}};
      for (const auto& v : c.graph.vertices()) c.provenance[v] = parent.provenance.at(v);
      return c;
   }

   // Pages holding the paths whose first (or last) edge is in `chosen`, and the rest.
   void separate(Page page, const std::set<std::size_t>& chosen, bool by_first, const std::string& op, int depth) {
      const auto& g = page.graph;
      auto closure = [&](const std::set<std::size_t>& boundary) {
         std::set<VertexId> reach;
         for (auto i : boundary) {
            auto v = by_first ? g.edges()[i].dst : g.edges()[i].src;
            reach.insert(v);
            auto more = by_first ? descendants(g, v) : ancestors(g, v);
            reach.insert(more.begin(), more.end());
         }
         std::vector<Edge> out;
         for (std::size_t i = 0; i < g.edges().size(); ++i) {
            const auto& e = g.edges()[i];
            if (boundary.count(i) || reach.count(by_first ? e.src : e.dst)) out.push_back(e);
         }
         return out;
      };
      std::set<std::size_t> rest;
      for (std::size_t i = 0; i < g.edges().size(); ++i) {
         const auto& e = g.edges()[i];
         bool boundary = by_first ? g.is_root(e.src) : g.is_terminal(e.dst);
         if (boundary && !chosen.count(i)) rest.insert(i);
      }
      json ids = json::array();
      for (auto i : chosen) ids.push_back(g.edges()[i].id);
      auto a = child(page, 1, closure(chosen));
      auto b = child(page, 2, closure(rest));
      log(op, {{"edges", ids}, {"pages", {a.id, b.id}}}, page.id);
      process(std::move(a), depth + 1);
      process(std::move(b), depth + 1);
   }

   auto boundary_edges(const DiffGraph& g, const std::set<VertexId>& vs, bool roots) -> std::set<std::size_t> {
      std::set<std::size_t> out;
      for (const auto& v : vs)
         for (auto i : roots ? g.out_edges(v) : g.in_edges(v)) out.insert(i);
      return out;
   }

   // Step 4. Returns false when no separation makes progress.
   auto separate_pairs(Page& page, const VertexId& vi, const VertexId& vj, int depth) -> bool {
      const auto& g = page.graph;
      auto li = depth_levels(g);
      auto span = [&](std::size_t i) { return li.level[g.edges()[i].dst] - li.level[g.edges()[i].src]; };
      auto ys = g.roots();
      auto xs = g.terminals();
      for (bool roots : {true, false}) {
         auto all = boundary_edges(g, roots ? std::set<VertexId>(ys.begin(), ys.end())
                                            : std::set<VertexId>(xs.begin(), xs.end()),
                                   roots);
         int widest = 1;
         for (auto i : all) widest = std::max(widest, span(i));
         if (widest <= 1) continue;
         std::set<std::size_t> chosen;
         for (auto i : all)
            if (span(i) == widest) chosen.insert(i);
         if (chosen.size() == all.size()) continue;
         separate(std::move(page), chosen, roots,
                  roots ? "separate-cross-level-roots" : "separate-cross-level-terminals", depth);
         return true;
      }
      bool root_side = li.level[vi] >= li.depth - li.level[vj];
      bool term_side = li.level[vi] <= li.depth - li.level[vj];
      if (ys.size() < 2) root_side = false;
      if (xs.size() < 2) term_side = false;
      if (!root_side && !term_side) {
         root_side = ys.size() > 1;
         term_side = xs.size() > 1;
      }
      if (root_side) {
         separate(std::move(page), boundary_edges(g, {ys.front()}, true), true, "separate-roots", depth);
         return true;
      }
      if (term_side) {
         separate(std::move(page), boundary_edges(g, {xs.front()}, false), false, "separate-terminals", depth);
         return true;
      }
      return false;
   }

   // Step 5: isolate the paths between two level sets by splitting interior vertices
   // that touch the outside, then replace every connected pair by one reference edge.
   void contract_region(Page& page, const std::set<VertexId>& from, const std::set<VertexId>& to) {
      auto es = page.graph.edges();
      std::set<VertexId> interior;
      for (auto i : edges_between(page.graph, from, to))
         for (const auto& v : {es[i].src, es[i].dst})
            if (!from.count(v) && !to.count(v)) interior.insert(v);
      std::vector<VertexId> topo;
      for (const auto& v : page.graph.topo_order())
         if (interior.count(v)) topo.push_back(v);
      auto split_off = [&](const VertexId& w, bool incoming) {
         const auto& keep = incoming ? from : to;
         std::vector<std::size_t> outside, other;
         for (std::size_t i = 0; i < es.size(); ++i) {
            auto far = incoming ? es[i].src : es[i].dst;
            bool near = incoming ? es[i].dst == w : es[i].src == w;
            if (near && !interior.count(far) && !keep.count(far)) outside.push_back(i);
            bool opp = incoming ? es[i].src == w : es[i].dst == w;
            if (opp) other.push_back(i);
         }
         if (outside.empty()) return;
         auto c = namer_.vertex(w);
         page.provenance[c] = page.provenance.at(w);
         json moved = json::array();
         for (auto i : outside) {
            (incoming ? es[i].dst : es[i].src) = c;
            moved.push_back(es[i].id);
         }
         for (auto i : other) {
            auto e = es[i];
            e.id = namer_.edge(e.id);
            (incoming ? e.src : e.dst) = c;
            es.push_back(e);
         }
         log("split-vertex", {{"vertex", w}, {"copy", c}, {"moved", moved}}, page.id);
      };
      for (const auto& w : topo) split_off(w, true);
      for (auto it = topo.rbegin(); it != topo.rend(); ++it) split_off(*it, false);

      DiffGraph g(es);
      std::set<std::size_t> region;
      for (auto i : edges_between(g, from, to)) region.insert(i);
      std::vector<Edge> next;
      json made = json::array();
      for (const auto& a : from)
         for (const auto& b : to) {
            auto sub = edges_between(g, {a}, {b});
            if (sub.empty()) continue;
            if (sub.size() == 1) {
               region.erase(sub.front());
               continue;
            }
            auto e = edge_for(a, b, pair_expr(subgraph(g, sub), a, b), g.edges()[sub.front()].id);
            made.push_back(e.label);
            next.push_back(e);
         }
      for (std::size_t i = 0; i < g.edges().size(); ++i)
         if (!region.count(i)) next.push_back(g.edges()[i]);
      log("contract-region",
          {{"from", std::vector<VertexId>(from.begin(), from.end())},
           {"to", std::vector<VertexId>(to.begin(), to.end())},
           {"refs", made}},
          page.id);
      page.graph = DiffGraph(std::move(next));
   }

   auto pair_expr(const DiffGraph& sub, const VertexId& y, const VertexId& x) -> ExprPtr {
      try {
         return graph_to_expr(sub, y, x);
      } catch (const Error&) {
         auto f = split_factorize(sub, true, &book_, namer_);
         return graph_to_expr(f, y, x);
      }
   }

   void emit(Page& page, const std::string& why) {
      const auto& g = page.graph;
      for (const auto& y : g.roots())
         for (const auto& x : g.terminals()) {
            auto sub = edges_between(g, {y}, {x});
            if (sub.empty()) continue;
            auto e = pair_expr(subgraph(g, sub), y, x);
            page.entries.push_back({page.provenance.at(y), page.provenance.at(x), e});
            log("emit", {{"root", y}, {"terminal", x}, {"expr", format_expr(e)}, {"reason", why}}, page.id);
         }
      plan_.pages.push_back(std::move(page));
   }

   void process(Page page, int depth) {
      for (int pass = 0; pass < kMaxPasses; ++pass) {
         page.graph = contract_simple(page.graph, page.id);
         auto& g = page.graph;
         auto ys = g.roots();
         auto xs = g.terminals();
         if (ys.size() == 1 && xs.size() == 1) return emit(page, "single-pair");
         if (depth > kMaxDepth) return emit(page, "depth-guard");
         auto pv = pivots(g);
         if (!pv) return emit(page, "no-pivot");
         auto [vi, vj] = *pv;
         log("pivot", {{"vi", vi}, {"vj", vj}}, page.id);
         auto yi = roots_reaching(g, vi);
         auto xj = terminals_reached(g, vj);
         if (yi.size() != ys.size())
            return separate(std::move(page), boundary_edges(g, yi, true), true, "split-page", depth);
         if (xj.size() != xs.size())
            return separate(std::move(page), boundary_edges(g, xj, false), false, "split-page", depth);
         auto lv = depth_levels(g).level;
         bool single = vi == vj;
         if (!single) {
            auto ps = enumerate_paths(g, vi, vj);
            single = ps.size() == 1 && ps.front().size() == 1;
         }
         if (lv[vi] == lv[vj] || single) {
            if (!separate_pairs(page, vi, vj, depth)) emit(page, "no-separation");
            return;
         }
         std::set<VertexId> to, from;
         auto below = descendants(g, vi);
         for (const auto& v : g.vertices())
            if (lv[v] == lv[vj] && (v == vj || below.count(v)) && !g.is_terminal(v)) to.insert(v);
         for (const auto& v : g.vertices()) {
            if (lv[v] != lv[vi] || g.is_root(v)) continue;
            auto d = descendants(g, v);
            if (std::any_of(to.begin(), to.end(), [&](auto& b) { return d.count(b); })) from.insert(v);
         }
         contract_region(page, from, to);
      }
      emit(page, "pass-guard");
   }

   Namer namer_;
   RefBook book_;
   PagePlan plan_;
};

}  // namespace

auto plan_pages(const DiffGraph& g) -> PagePlan { return Planner(g).run(g); }

auto merge_pages(const PagePlan& plan) -> ExprSet {
   ExprSet s;
   std::set<std::string> names;
   for (const auto& d : plan.refs) {
      if (!names.insert(d.name).second) {
         for (const auto& o : plan.refs)
            if (o.name == d.name && !structurally_equal(o.def, d.def))
               throw usage_error("conflicting definitions for '" + d.name + "'");
         continue;
      }
      s.defs.push_back(d);
   }
   std::map<std::pair<VertexId, VertexId>, std::vector<ExprPtr>> acc;
   std::vector<std::pair<VertexId, VertexId>> order;
   for (const auto& p : plan.pages)
      for (const auto& e : p.entries) {
         std::pair<VertexId, VertexId> k{e.root, e.terminal};
         if (!acc.count(k)) order.push_back(k);
         acc[k].push_back(e.expr);
      }
   std::sort(order.begin(), order.end());
   for (const auto& k : order) s.entries.push_back({k.first, k.second, sum(acc[k])});
   bind_refs(s);

   auto apply = [&](const std::map<std::string, ExprPtr>& m) {
      for (auto& d : s.defs) d.def = substitute(d.def, m);
      for (auto& e : s.entries) e.expr = substitute(e.expr, m);
   };
   // identical definitions collapse onto the first one
   std::map<std::string, std::string> by_key;
   for (std::size_t i = 0; i < s.defs.size(); ++i) {
      auto key = canonical_key(s.defs[i].def);
      if (auto it = by_key.find(key); it != by_key.end()) {
         apply(std::map<std::string, ExprPtr>{{s.defs[i].name, ojacc::ref(it->second)}});
         s.defs.erase(s.defs.begin() + static_cast<std::ptrdiff_t>(i--));
      } else {
         by_key[key] = s.defs[i].name;
      }
   }
   // composite subexpressions spelled out elsewhere become references too
   for (std::size_t i = 0; i < s.defs.size(); ++i) {
      auto key = canonical_key(s.defs[i].def);
      auto name = s.defs[i].name;
      std::function<ExprPtr(const ExprPtr&)> walk = [&](const ExprPtr& x) -> ExprPtr {
         if (x->kids.empty()) return x;
         if (canonical_key(x) == key) return ojacc::ref(name);
         std::vector<ExprPtr> kids;
         for (const auto& k : x->kids) kids.push_back(walk(k));
         return x->kind == ExprKind::Sum ? sum(kids) : prod(kids);
      };
      for (std::size_t j = 0; j < s.defs.size(); ++j)
         if (j != i) s.defs[j].def = walk(s.defs[j].def);
      for (auto& e : s.entries) e.expr = walk(e.expr);
   }
   // drop unused definitions and inline those used exactly once
   for (bool changed = true; changed;) {
      changed = false;
      std::map<std::string, int> uses;
      auto count = [&](const ExprPtr& e) {
         std::function<void(const ExprPtr&)> walk = [&](const ExprPtr& x) {
            if (x->kind == ExprKind::Ref) ++uses[x->name];
            for (const auto& k : x->kids) walk(k);
         };
         walk(e);
      };
      for (const auto& d : s.defs) count(d.def);
      for (const auto& e : s.entries) count(e.expr);
      for (std::size_t i = 0; i < s.defs.size(); ++i) {
         int n = uses[s.defs[i].name];
         if (n > 1) continue;
         auto d = s.defs[i];
         s.defs.erase(s.defs.begin() + static_cast<std::ptrdiff_t>(i));
         if (n == 1) apply(std::map<std::string, ExprPtr>{{d.name, d.def}});
         changed = true;
         break;
      }
   }
   // renumber in definition order, clear of any edge symbol
   std::set<std::string> taken;
   for (const auto& d : s.defs) {
      auto x = symbols(d.def);
      taken.insert(x.begin(), x.end());
   }
   for (const auto& e : s.entries) {
      auto x = symbols(e.expr);
      taken.insert(x.begin(), x.end());
   }
   std::map<std::string, ExprPtr> rename;
   std::vector<std::string> fresh;
   int k = 1;
   for (const auto& d : s.defs) {
      std::string n;
      do {
         n = "s" + std::to_string(k++);
      } while (taken.count(n));
      rename[d.name] = ojacc::ref(n);
      fresh.push_back(n);
   }
   apply(rename);
   for (std::size_t i = 0; i < s.defs.size(); ++i) s.defs[i].name = fresh[i];
   return s;
}

auto format_page(const Page& p) -> std::string { return "# page " + p.id + "\n" + format_graph(p.graph); }

auto transcript_to_jsonl(const std::vector<TranscriptRecord>& t) -> std::string {
   std::string out;
   for (const auto& r : t) {
      json j;
      j["step"] = r.step;
      j["op"] = r.op;
      j["args"] = json::parse(r.args_json);
      j["page"] = r.page;
      out += j.dump() + "\n";
   }
   return out;
}

}  // namespace ojacc
