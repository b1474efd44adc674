#include "ojacc/structure.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

#include "ojacc/error.hpp"

namespace ojacc {

auto tag_name(StructureTag t) -> std::string {
   switch (t) {
      case StructureTag::DirectSimpleChain: return "direct-simple-chain";
      case StructureTag::IndirectSimpleChain: return "indirect-simple-chain";
      case StructureTag::ComplexChain: return "complex-chain";
      case StructureTag::DirectSimpleBlock: return "direct-simple-block";
      case StructureTag::IndirectSimpleBlock: return "indirect-simple-block";
      case StructureTag::ComplexBlock: return "complex-block";
      case StructureTag::Block: return "block";
      case StructureTag::Edge: return "edge";
   }
   return "?";
}

auto is_simple(StructureTag t) -> bool {
   return t == StructureTag::DirectSimpleChain || t == StructureTag::IndirectSimpleChain ||
          t == StructureTag::DirectSimpleBlock || t == StructureTag::IndirectSimpleBlock ||
          t == StructureTag::Edge;
}

auto segment_cross_level(const DiffGraph& g) -> DiffGraph {
   auto li = depth_levels(g);
   std::set<VertexId> names = g.vertices();
   std::set<EdgeId> ids;
   for (const auto& e : g.edges()) ids.insert(e.id);
   auto fresh = [](std::set<std::string>& used, const std::string& base) {
      for (int k = 1;; ++k)
         if (auto n = base + "." + std::to_string(k); used.insert(n).second) return n;
   };
   std::vector<Edge> out;
   for (const auto& e : g.edges()) {
      int span = li.level.at(e.dst) - li.level.at(e.src);
      if (span <= 1) {
         out.push_back(e);
         continue;
      }
      auto cur = e.src;
      for (int k = 1; k < span; ++k) {
         auto nxt = fresh(names, e.src);
         out.push_back({fresh(ids, e.id), cur, nxt, "1"});
         cur = nxt;
      }
      out.push_back({e.id, cur, e.dst, e.label});
   }
   return DiffGraph(std::move(out));
}

namespace {

struct SubEdge {
   VertexId src;
   VertexId dst;
   bool original = true;
   StructureTag tag = StructureTag::Edge;
   std::set<VertexId> vertices;
   std::set<EdgeId> edges;
};

auto is_direct_part(const SubEdge& s) -> bool {
   return s.original || s.tag == StructureTag::DirectSimpleChain;
}

auto make_structure(StructureTag tag, const VertexId& src, const VertexId& sink, const std::vector<SubEdge>& parts)
    -> std::pair<Structure, SubEdge> {
   SubEdge merged{src, sink, false, tag, {}, {}};
   for (const auto& p : parts) {
      merged.vertices.insert(p.vertices.begin(), p.vertices.end());
      merged.edges.insert(p.edges.begin(), p.edges.end());
   }
   Structure s{tag, src, sink, {merged.vertices.begin(), merged.vertices.end()},
               {merged.edges.begin(), merged.edges.end()}};
   return {s, merged};
}

class Recognizer {
 public:
   explicit Recognizer(const DiffGraph& g) {
      for (const auto& e : g.edges()) work_.push_back({e.src, e.dst, true, StructureTag::Edge, {e.src, e.dst}, {e.id}});
   }

   auto run() -> std::vector<Structure> {
      while (contract_chains() || contract_bundles() || contract_complex_block()) {
      }
      return found_;
   }

 private:
   auto degrees() const {
      std::map<VertexId, std::pair<int, int>> d;
      for (const auto& w : work_) {
         ++d[w.src].second;
         ++d[w.dst].first;
      }
      return d;
   }

   auto contract_chains() -> bool {
      auto deg = degrees();
      auto pass = [&](const VertexId& v) { return deg[v].first == 1 && deg[v].second == 1; };
      std::vector<std::size_t> order(work_.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](auto a, auto b) {
         return std::tie(work_[a].src, work_[a].dst) < std::tie(work_[b].src, work_[b].dst);
      });
      for (auto start : order) {
         if (pass(work_[start].src) || !pass(work_[start].dst)) continue;
         std::vector<std::size_t> chain{start};
         while (pass(work_[chain.back()].dst)) {
            const auto& v = work_[chain.back()].dst;
            for (std::size_t i = 0; i < work_.size(); ++i)
               if (work_[i].src == v) {
                  chain.push_back(i);
                  break;
               }
         }
         std::vector<SubEdge> parts;
         for (auto i : chain) parts.push_back(work_[i]);
         bool all_orig = std::all_of(parts.begin(), parts.end(), [](auto& p) { return p.original; });
         bool all_simple = std::all_of(parts.begin(), parts.end(), [](auto& p) { return is_simple(p.tag); });
         auto tag = all_orig     ? StructureTag::DirectSimpleChain
                    : all_simple ? StructureTag::IndirectSimpleChain
                                 : StructureTag::ComplexChain;
         replace(chain, make_structure(tag, parts.front().src, parts.back().dst, parts));
         return true;
      }
      return false;
   }

   auto contract_bundles() -> bool {
      std::map<std::pair<VertexId, VertexId>, std::vector<std::size_t>> groups;
      for (std::size_t i = 0; i < work_.size(); ++i) groups[{work_[i].src, work_[i].dst}].push_back(i);
      for (const auto& [key, idx] : groups) {
         if (idx.size() < 2) continue;
         std::vector<SubEdge> parts;
         for (auto i : idx) parts.push_back(work_[i]);
         bool all_simple = std::all_of(parts.begin(), parts.end(), [](auto& p) { return is_simple(p.tag); });
         bool direct = std::all_of(parts.begin(), parts.end(), is_direct_part);
         auto tag = !all_simple ? StructureTag::ComplexBlock
                    : direct    ? StructureTag::DirectSimpleBlock
                                : StructureTag::IndirectSimpleBlock;
         replace(idx, make_structure(tag, key.first, key.second, parts));
         return true;
      }
      return false;
   }

   // Smallest closed region with two internally disjoint paths; only reached once
   // no chain or bundle is left, so whatever it finds is complex.
   auto contract_complex_block() -> bool {
      std::set<VertexId> verts;
      for (const auto& w : work_) {
         verts.insert(w.src);
         verts.insert(w.dst);
      }
      auto succ = [&](const VertexId& v) {
         std::set<VertexId> s;
         for (const auto& w : work_)
            if (w.src == v) s.insert(w.dst);
         return s;
      };
      auto reach = [&](const VertexId& from, const std::set<VertexId>& banned) {
         std::set<VertexId> seen;
         std::vector<VertexId> st{from};
         while (!st.empty()) {
            auto u = st.back();
            st.pop_back();
            for (const auto& x : succ(u))
               if (!banned.count(x) && seen.insert(x).second) st.push_back(x);
         }
         return seen;
      };
      std::map<VertexId, std::set<VertexId>> desc;
      for (const auto& v : verts) desc[v] = reach(v, {});
      struct Cand {
         std::size_t size;
         VertexId u, v;
         std::set<VertexId> interior;
      };
      std::vector<Cand> cands;
      for (const auto& u : verts)
         for (const auto& v : desc[u]) {
            std::set<VertexId> interior;
            for (const auto& x : desc[u])
               if (x != v && desc[x].count(v)) interior.insert(x);
            if (interior.empty()) continue;
            bool closed = true;
            for (const auto& w : work_) {
               bool si = interior.count(w.src), di = interior.count(w.dst);
               if (si && !(di || w.dst == v)) closed = false;
               if (di && !(si || w.src == u)) closed = false;
            }
            if (!closed) continue;
            bool cut = false;  // a single interior vertex separating u from v rules out two disjoint paths
            for (const auto& x : interior)
               if (!reach(u, {x}).count(v)) cut = true;
            if (cut) continue;
            cands.push_back({interior.size(), u, v, interior});
         }
      if (cands.empty()) return false;
      auto best = *std::min_element(cands.begin(), cands.end(), [](auto& a, auto& b) {
         return std::tie(a.size, a.u, a.v) < std::tie(b.size, b.u, b.v);
      });
      std::vector<std::size_t> idx;
      std::vector<SubEdge> parts;
      for (std::size_t i = 0; i < work_.size(); ++i) {
         const auto& w = work_[i];
         bool in_src = w.src == best.u || best.interior.count(w.src);
         bool in_dst = w.dst == best.v || best.interior.count(w.dst);
         if (in_src && in_dst) {
            idx.push_back(i);
            parts.push_back(w);
         }
      }
      replace(idx, make_structure(StructureTag::ComplexBlock, best.u, best.v, parts));
      return true;
   }

   void replace(std::vector<std::size_t> idx, std::pair<Structure, SubEdge> made) {
      found_.push_back(std::move(made.first));
      std::sort(idx.rbegin(), idx.rend());
      for (auto i : idx) work_.erase(work_.begin() + static_cast<std::ptrdiff_t>(i));
      work_.push_back(std::move(made.second));
   }

   std::vector<SubEdge> work_;
   std::vector<Structure> found_;
};

}  // namespace

auto find_structures(const DiffGraph& g) -> std::vector<Structure> { return Recognizer(g).run(); }

auto classify_block(const DiffGraph& g, const VertexId& src, const VertexId& sink) -> Structure {
   if (!g.has_vertex(src) || !g.has_vertex(sink)) throw usage_error("unknown vertex in pair");
   auto all = find_structures(g);
   for (auto it = all.rbegin(); it != all.rend(); ++it)
      if (it->src == src && it->sink == sink) return *it;
   for (auto i : g.out_edges(src)) {
      const auto& e = g.edges()[i];
      if (e.dst == sink) return {StructureTag::Edge, src, sink, {src, sink}, {e.id}};
   }
   throw usage_error("no block or chain between '" + src + "' and '" + sink + "'");
}

auto structures_to_jsonl(const std::vector<Structure>& s) -> std::string {
   std::string out;
   for (const auto& x : s) {
      nlohmann::ordered_json j;
      j["kind"] = tag_name(x.tag);
      j["src"] = x.src;
      j["sink"] = x.sink;
      j["vertices"] = x.vertices;
      j["edges"] = x.edges;
      out += j.dump() + "\n";
   }
   return out;
}

}  // namespace ojacc
