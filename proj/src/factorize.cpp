#include "ojacc/factorize.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include "ojacc/convert.hpp"
#include "ojacc/error.hpp"

namespace ojacc {

void RefBook::reserve(const DiffGraph& g) {
   for (const auto& e : g.edges()) {
      taken_.insert(e.label);
      taken_.insert(e.id);
   }
}

auto RefBook::add(ExprPtr def) -> std::string {
   auto key = canonical_key(def);
   for (const auto& d : defs_)
      if (canonical_key(d.def) == key) return d.name;
   std::string name;
   do {
      name = "s" + std::to_string(next_++);
   } while (taken_.count(name));
   taken_.insert(name);
   defs_.push_back({name, std::move(def)});
   return name;
}

void Namer::reserve(const DiffGraph& g) {
   vertices_.insert(g.vertices().begin(), g.vertices().end());
   for (const auto& e : g.edges()) edges_.insert(e.id);
}

auto Namer::vertex(const VertexId& base) -> VertexId {
   for (int k = 1;; ++k)
      if (auto n = base + "." + std::to_string(k); vertices_.insert(n).second) return n;
}

auto Namer::edge(const EdgeId& base) -> EdgeId {
   for (int k = 1;; ++k)
      if (auto n = base + "." + std::to_string(k); edges_.insert(n).second) return n;
}

namespace {

// A work edge standing for a series-parallel fragment of real edges.
struct Frag {
   VertexId src;
   VertexId dst;
   std::vector<Edge> edges;
   std::size_t order;
};

class SplitFactorizer {
 public:
   SplitFactorizer(const DiffGraph& g, bool backward, RefBook* book, Namer& namer)
       : backward_(backward), book_(book), namer_(namer) {
      auto r = g.roots();
      auto t = g.terminals();
      if (r.size() != 1 || t.size() != 1)
         throw usage_error("factorization needs a single root and a single terminal; use pages");
      root_ = r.front();
      term_ = t.front();
      for (std::size_t i = 0; i < g.edges().size(); ++i) {
         const auto& e = g.edges()[i];
         frags_.push_back({e.src, e.dst, {e}, i});
      }
      next_order_ = g.edges().size();
   }

   auto run() -> DiffGraph {
      for (reduce(); frags_.size() > 1; reduce()) split(pick());
      return DiffGraph(frags_.front().edges);
   }

 private:
   void reduce() {
      for (bool changed = true; changed;) {
         changed = false;
         std::map<std::pair<VertexId, VertexId>, std::vector<std::size_t>> groups;
         for (std::size_t i = 0; i < frags_.size(); ++i) groups[{frags_[i].src, frags_[i].dst}].push_back(i);
         for (const auto& [key, idx] : groups) {
            if (idx.size() < 2) continue;
            Frag merged{key.first, key.second, {}, frags_[idx.front()].order};
            for (auto i : idx) {
               merged.edges.insert(merged.edges.end(), frags_[i].edges.begin(), frags_[i].edges.end());
               merged.order = std::min(merged.order, frags_[i].order);
            }
            erase(idx);
            frags_.push_back(std::move(merged));
            changed = true;
            break;
         }
         if (changed) continue;
         std::map<VertexId, std::vector<std::size_t>> in, out;
         for (std::size_t i = 0; i < frags_.size(); ++i) {
            out[frags_[i].src].push_back(i);
            in[frags_[i].dst].push_back(i);
         }
         for (const auto& [v, ins] : in) {
            if (v == term_ || ins.size() != 1 || out[v].size() != 1) continue;
            auto a = ins.front(), b = out[v].front();
            Frag merged{frags_[a].src, frags_[b].dst, frags_[a].edges, std::min(frags_[a].order, frags_[b].order)};
            merged.edges.insert(merged.edges.end(), frags_[b].edges.begin(), frags_[b].edges.end());
            erase({a, b});
            frags_.push_back(std::move(merged));
            changed = true;
            break;
         }
      }
   }

   void erase(std::vector<std::size_t> idx) {
      std::sort(idx.rbegin(), idx.rend());
      for (auto i : idx) frags_.erase(frags_.begin() + static_cast<std::ptrdiff_t>(i));
   }

   auto pick() const -> VertexId {
      std::vector<Edge> proxy;
      for (std::size_t i = 0; i < frags_.size(); ++i)
         proxy.push_back({"f" + std::to_string(i), frags_[i].src, frags_[i].dst, "f"});
      DiffGraph wg(proxy);
      auto lv = depth_levels(wg).level;
      std::optional<VertexId> best;
      for (const auto& v : wg.vertices()) {
         if (v == root_ || v == term_) continue;
         auto deg = backward_ ? wg.in_degree(v) : wg.out_degree(v);
         if (deg < 2) continue;
         if (!best) {
            best = v;
            continue;
         }
         bool better = backward_ ? lv[v] > lv[*best] : lv[v] < lv[*best];
         if (better) best = v;
      }
      if (!best) throw usage_error("factorization stalled");  // unreachable for a single-root DAG
      return *best;
   }

   auto duplicate(const Frag& f, const VertexId& from, const VertexId& to) -> Frag {
      std::map<VertexId, VertexId> rename{{from, to}};
      Frag c{f.src == from ? to : f.src, f.dst == from ? to : f.dst, {}, next_order_++};
      for (const auto& e : f.edges)
         for (const auto& v : {e.src, e.dst})
            if (v != f.src && v != f.dst && !rename.count(v)) rename[v] = namer_.vertex(v);
      for (const auto& e : f.edges) {
         auto map = [&](const VertexId& v) { return rename.count(v) ? rename[v] : v; };
         c.edges.push_back({namer_.edge(e.id), map(e.src), map(e.dst), e.label});
      }
      return c;
   }

   void to_ref(Frag& f) {
      if (!book_ || f.edges.size() < 2) return;
      auto def = graph_to_expr(DiffGraph(f.edges), f.src, f.dst);
      auto name = book_->add(def);
      namer_.reserve_edge(name);
      f.edges = {Edge{name, f.src, f.dst, name}};
   }

   // Each incoming (backward) or outgoing (forward) fragment gets its own copy of v,
   // and the fragments on the other side are duplicated for every copy.
   void split(const VertexId& v) {
      std::vector<std::size_t> keep_side, dup_side;
      for (std::size_t i = 0; i < frags_.size(); ++i) {
         bool in = frags_[i].dst == v, out = frags_[i].src == v;
         if (backward_ ? in : out) keep_side.push_back(i);
         if (backward_ ? out : in) dup_side.push_back(i);
      }
      std::sort(keep_side.begin(), keep_side.end(), [&](auto a, auto b) { return frags_[a].order < frags_[b].order; });
      for (auto i : dup_side) to_ref(frags_[i]);
      std::vector<Frag> added;
      for (auto i : keep_side) {
         auto copy = namer_.vertex(v);
         Frag moved = frags_[i];
         for (auto& e : moved.edges) {
            if (e.dst == v) e.dst = copy;
            if (e.src == v) e.src = copy;
         }
         (backward_ ? moved.dst : moved.src) = copy;
         added.push_back(std::move(moved));
         for (auto j : dup_side) added.push_back(duplicate(frags_[j], v, copy));
      }
      auto gone = keep_side;
      gone.insert(gone.end(), dup_side.begin(), dup_side.end());
      erase(gone);
      frags_.insert(frags_.end(), added.begin(), added.end());
   }

   bool backward_;
   RefBook* book_;
   Namer& namer_;
   VertexId root_;
   VertexId term_;
   std::vector<Frag> frags_;
   std::size_t next_order_ = 0;
};

}  // namespace

// Graphs with several roots or terminals are factorized one (root, terminal) pair at a time;
// interior vertices of later pairs are renamed so the pair subgraphs stay disjoint.
auto split_factorize(const DiffGraph& g, bool backward, RefBook* book, Namer& namer) -> DiffGraph {
   auto roots = g.roots();
   auto terms = g.terminals();
   if (roots.size() == 1 && terms.size() == 1) return SplitFactorizer(g, backward, book, namer).run();
   std::vector<Edge> out;
   std::set<VertexId> used;
   std::set<EdgeId> used_ids;
   for (const auto& r : roots)
      for (const auto& t : terms) {
         auto idx = edges_between(g, {r}, {t});
         if (idx.empty()) continue;
         auto part = SplitFactorizer(subgraph(g, idx), backward, book, namer).run();
         std::map<VertexId, VertexId> rename;
         for (const auto& v : part.vertices())
            if (v != r && v != t && used.count(v)) rename[v] = namer.vertex(v);
         for (auto e : part.edges()) {
            if (rename.count(e.src)) e.src = rename[e.src];
            if (rename.count(e.dst)) e.dst = rename[e.dst];
            if (used_ids.count(e.id)) e.id = namer.edge(e.id);
            used_ids.insert(e.id);
            out.push_back(e);
         }
         for (const auto& v : part.vertices()) used.insert(rename.count(v) ? rename[v] : v);
      }
   return DiffGraph(std::move(out));
}

auto factorize_backward(const DiffGraph& g) -> DiffGraph {
   Namer n;
   n.reserve(g);
   return split_factorize(g, true, nullptr, n);
}

auto factorize_forward(const DiffGraph& g) -> DiffGraph {
   Namer n;
   n.reserve(g);
   return split_factorize(g, false, nullptr, n);
}

auto factorize_with_refs(const DiffGraph& g) -> RefFactorization {
   Namer n;
   n.reserve(g);
   RefBook book;
   book.reserve(g);
   auto out = split_factorize(g, true, &book, n);
   ExprSet defs;
   defs.defs = book.defs();
   bind_refs(defs);
   return {out, defs};
}

}  // namespace ojacc
