#include "ojacc/graph.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

#include "ojacc/error.hpp"

namespace ojacc {

namespace {
const std::vector<std::size_t> kNoEdges;
}

DiffGraph::DiffGraph(std::vector<Edge> edges) : edges_(std::move(edges)) {
   for (std::size_t i = 0; i < edges_.size(); ++i) {
      const auto& e = edges_[i];
      if (e.id.empty() || e.src.empty() || e.dst.empty())
         throw parse_error("edge with empty id or endpoint");
      if (!index_.emplace(e.id, i).second) throw parse_error("duplicate edge id '" + e.id + "'");
      if (e.src == e.dst) throw cycle_error("cycle detected at vertex '" + e.src + "'");
      vertices_.insert(e.src);
      vertices_.insert(e.dst);
      out_[e.src].push_back(i);
      in_[e.dst].push_back(i);
   }
   std::map<VertexId, std::size_t> indeg;
   std::priority_queue<VertexId, std::vector<VertexId>, std::greater<>> ready;
   for (const auto& v : vertices_) {
      indeg[v] = in_degree(v);
      if (indeg[v] == 0) ready.push(v);
   }
   while (!ready.empty()) {
      auto v = ready.top();
      ready.pop();
      topo_.push_back(v);
      for (auto i : out_edges(v))
         if (--indeg[edges_[i].dst] == 0) ready.push(edges_[i].dst);
   }
   if (topo_.size() != vertices_.size()) {
      for (const auto& [v, d] : indeg)
         if (d > 0) throw cycle_error("cycle detected through vertex '" + v + "'");
   }
}

auto DiffGraph::edge(const EdgeId& e) const -> const Edge& {
   auto it = index_.find(e);
   if (it == index_.end()) throw usage_error("unknown edge '" + e + "'");
   return edges_[it->second];
}

auto DiffGraph::out_edges(const VertexId& v) const -> const std::vector<std::size_t>& {
   auto it = out_.find(v);
   return it == out_.end() ? kNoEdges : it->second;
}

auto DiffGraph::in_edges(const VertexId& v) const -> const std::vector<std::size_t>& {
   auto it = in_.find(v);
   return it == in_.end() ? kNoEdges : it->second;
}

auto DiffGraph::roots() const -> std::vector<VertexId> {
   std::vector<VertexId> r;
   for (const auto& v : vertices_)
      if (is_root(v)) r.push_back(v);
   return r;
}

auto DiffGraph::terminals() const -> std::vector<VertexId> {
   std::vector<VertexId> r;
   for (const auto& v : vertices_)
      if (is_terminal(v)) r.push_back(v);
   return r;
}

auto parse_graph(const std::string& text) -> DiffGraph {
   std::vector<Edge> edges;
   std::istringstream in(text);
   std::string line;
   int lineno = 0;
   while (std::getline(in, line)) {
      ++lineno;
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      std::istringstream ls(line);
      std::vector<std::string> tok;
      for (std::string t; ls >> t;) tok.push_back(t);
      if (tok.empty()) continue;
      auto where = "line " + std::to_string(lineno) + ": ";
      if (tok[0] != "e") throw parse_error(where + "expected 'e', got '" + tok[0] + "'");
      if (tok.size() < 4) throw parse_error(where + "dangling reference: edge needs <id> <src> <dst>");
      if (tok.size() > 5) throw parse_error(where + "trailing tokens after label");
      Edge e{tok[1], tok[2], tok[3], tok.size() == 5 ? tok[4] : tok[1]};
      for (const auto& prev : edges)
         if (prev.id == e.id) throw parse_error(where + "duplicate edge id '" + e.id + "'");
      edges.push_back(std::move(e));
   }
   if (edges.empty()) throw parse_error("empty edge list");
   try {
      return DiffGraph(std::move(edges));
   } catch (const Error& err) {
      if (err.kind() == ErrorKind::Cycle) throw;
      throw parse_error(err.what());
   }
}

auto format_graph(const DiffGraph& g) -> std::string {
   std::ostringstream out;
   for (const auto& e : g.edges()) {
      out << "e " << e.id << ' ' << e.src << ' ' << e.dst;
      if (e.label != e.id) out << ' ' << e.label;
      out << '\n';
   }
   return out.str();
}

auto graph_to_dot(const DiffGraph& g) -> std::string {
   std::ostringstream out;
   out << "digraph G {\n";
   for (const auto& v : g.topo_order()) out << "  \"" << v << "\";\n";
   for (const auto& e : g.edges())
      out << "  \"" << e.src << "\" -> \"" << e.dst << "\" [label=\"" << e.label << "\"];\n";
   out << "}\n";
   return out.str();
}

auto classify_vertices(const DiffGraph& g) -> Partition {
   Partition p;
   for (const auto& v : g.vertices()) {
      if (g.is_root(v))
         p.roots.push_back(v);
      else if (g.is_terminal(v))
         p.terminals.push_back(v);
      else
         p.intermediates.push_back(v);
   }
   return p;
}

auto descendants(const DiffGraph& g, const VertexId& v) -> std::set<VertexId> {
   std::set<VertexId> seen;
   std::vector<VertexId> stack{v};
   while (!stack.empty()) {
      auto u = stack.back();
      stack.pop_back();
      for (auto i : g.out_edges(u))
         if (seen.insert(g.edges()[i].dst).second) stack.push_back(g.edges()[i].dst);
   }
   return seen;
}

auto ancestors(const DiffGraph& g, const VertexId& v) -> std::set<VertexId> {
   std::set<VertexId> seen;
   std::vector<VertexId> stack{v};
   while (!stack.empty()) {
      auto u = stack.back();
      stack.pop_back();
      for (auto i : g.in_edges(u))
         if (seen.insert(g.edges()[i].src).second) stack.push_back(g.edges()[i].src);
   }
   return seen;
}

auto enumerate_paths(const DiffGraph& g, const VertexId& from, const VertexId& to, std::size_t guard)
    -> std::vector<Path> {
   if (!g.has_vertex(from)) throw usage_error("unknown vertex '" + from + "'");
   if (!g.has_vertex(to)) throw usage_error("unknown vertex '" + to + "'");
   std::vector<Path> paths;
   auto reach = ancestors(g, to);
   if (from == to || !reach.count(from)) return paths;
   Path cur;
   auto dfs = [&](auto&& self, const VertexId& v) -> void {
      for (auto i : g.out_edges(v)) {
         const auto& e = g.edges()[i];
         if (e.dst != to && !reach.count(e.dst)) continue;
         cur.push_back(e.id);
         if (e.dst == to) {
            if (paths.size() >= guard)
               throw guard_error("path count exceeds guard of " + std::to_string(guard));
            paths.push_back(cur);
         } else {
            self(self, e.dst);
         }
         cur.pop_back();
      }
   };
   dfs(dfs, from);
   std::sort(paths.begin(), paths.end());
   return paths;
}

auto all_paths(const DiffGraph& g, std::size_t guard) -> std::vector<Path> {
   std::vector<Path> all;
   for (const auto& y : g.roots())
      for (const auto& x : g.terminals()) {
         auto p = enumerate_paths(g, y, x, guard - std::min(guard, all.size()));
         all.insert(all.end(), p.begin(), p.end());
      }
   return all;
}

auto local_paths(const DiffGraph& g, const VertexId& v) -> std::vector<Path> {
   std::vector<Path> p;
   for (auto a : g.in_edges(v))
      for (auto b : g.out_edges(v)) p.push_back({g.edges()[a].id, g.edges()[b].id});
   return p;
}

auto depth_levels(const DiffGraph& g) -> LevelInfo {
   LevelInfo li;
   for (const auto& v : g.topo_order()) {
      int l = 0;
      for (auto i : g.in_edges(v)) l = std::max(l, li.level[g.edges()[i].src] + 1);
      li.level[v] = l;
      li.depth = std::max(li.depth, l);
   }
   for (const auto& v : g.vertices())
      if (g.is_terminal(v)) li.level[v] = li.depth;
   for (const auto& e : g.edges())
      if (li.level[e.dst] - li.level[e.src] > 1) li.cross_level.push_back(e.id);
   return li;
}

auto roots_reaching(const DiffGraph& g, const VertexId& v) -> std::set<VertexId> {
   std::set<VertexId> r;
   for (const auto& a : ancestors(g, v))
      if (g.is_root(a)) r.insert(a);
   return r;
}

auto terminals_reached(const DiffGraph& g, const VertexId& v) -> std::set<VertexId> {
   std::set<VertexId> r;
   for (const auto& d : descendants(g, v))
      if (g.is_terminal(d)) r.insert(d);
   return r;
}

auto rt_degrees(const DiffGraph& g) -> std::map<VertexId, RtDegree> {
   std::map<VertexId, std::set<VertexId>> up, down;
   const auto& topo = g.topo_order();
   for (const auto& v : topo)
      for (auto i : g.in_edges(v)) {
         const auto& s = g.edges()[i].src;
         if (g.is_root(s)) up[v].insert(s);
         up[v].insert(up[s].begin(), up[s].end());
      }
   for (auto it = topo.rbegin(); it != topo.rend(); ++it)
      for (auto i : g.out_edges(*it)) {
         const auto& d = g.edges()[i].dst;
         if (g.is_terminal(d)) down[*it].insert(d);
         down[*it].insert(down[d].begin(), down[d].end());
      }
   std::map<VertexId, RtDegree> deg;
   for (const auto& v : g.vertices())
      deg[v] = RtDegree{static_cast<int>(up[v].size()), static_cast<int>(down[v].size())};
   return deg;
}

auto overlap_degree(const DiffGraph& g, const std::vector<Path>& paths, const EdgeId& e) -> std::size_t {
   if (!g.has_edge(e)) throw usage_error("unknown edge '" + e + "'");
   std::size_t n = 0;
   for (const auto& p : paths)
      if (std::find(p.begin(), p.end(), e) != p.end()) ++n;
   return n;
}

auto edges_between(const DiffGraph& g, const std::set<VertexId>& from, const std::set<VertexId>& to)
    -> std::vector<std::size_t> {
   std::set<VertexId> fwd(from.begin(), from.end()), bwd(to.begin(), to.end());
   for (const auto& v : from) {
      auto d = descendants(g, v);
      fwd.insert(d.begin(), d.end());
   }
   for (const auto& v : to) {
      auto a = ancestors(g, v);
      bwd.insert(a.begin(), a.end());
   }
   std::vector<std::size_t> out;
   for (std::size_t i = 0; i < g.edges().size(); ++i) {
      const auto& e = g.edges()[i];
      if (!fwd.count(e.src) || !bwd.count(e.dst)) continue;
      // a path must not re-enter the boundary sets from the wrong side
      if (to.count(e.src) || from.count(e.dst)) continue;
      out.push_back(i);
   }
   return out;
}

auto subgraph(const DiffGraph& g, const std::vector<std::size_t>& edge_indices) -> DiffGraph {
   std::vector<Edge> es;
   for (auto i : edge_indices) es.push_back(g.edges()[i]);
   return DiffGraph(std::move(es));
}

}  // namespace ojacc
