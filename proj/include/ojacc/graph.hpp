#ifndef OJACC_GRAPH_HPP_
#define OJACC_GRAPH_HPP_

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace ojacc {

using VertexId = std::string;
using EdgeId = std::string;

struct Edge {
   EdgeId id;
   VertexId src;
   VertexId dst;
   std::string label;  //!< edge symbol, reference name, or "1"

   auto unit() const -> bool { return label == "1"; }
   auto operator==(const Edge&) const -> bool = default;
};

using Path = std::vector<EdgeId>;

// Directed acyclic differentiation graph, edges point from root to terminal.
// Parallel edges are allowed; every vertex is an endpoint of some edge.
class DiffGraph {
 public:
   DiffGraph() = default;
   explicit DiffGraph(std::vector<Edge> edges);

   auto edges() const -> const std::vector<Edge>& { return edges_; }
   auto vertices() const -> const std::set<VertexId>& { return vertices_; }
   auto empty() const -> bool { return edges_.empty(); }

   auto has_vertex(const VertexId& v) const -> bool { return vertices_.count(v) != 0; }
   auto has_edge(const EdgeId& e) const -> bool { return index_.count(e) != 0; }
   auto edge(const EdgeId& e) const -> const Edge&;

   //! indices into edges(), in edge order
   auto out_edges(const VertexId& v) const -> const std::vector<std::size_t>&;
   auto in_edges(const VertexId& v) const -> const std::vector<std::size_t>&;
   auto out_degree(const VertexId& v) const -> std::size_t { return out_edges(v).size(); }
   auto in_degree(const VertexId& v) const -> std::size_t { return in_edges(v).size(); }

   auto roots() const -> std::vector<VertexId>;
   auto terminals() const -> std::vector<VertexId>;
   auto is_root(const VertexId& v) const -> bool { return in_degree(v) == 0; }
   auto is_terminal(const VertexId& v) const -> bool { return out_degree(v) == 0; }

   //! Kahn order, ties broken by vertex id
   auto topo_order() const -> const std::vector<VertexId>& { return topo_; }

 private:
   std::vector<Edge> edges_;
   std::set<VertexId> vertices_;
   std::map<EdgeId, std::size_t> index_;
   std::map<VertexId, std::vector<std::size_t>> out_;
   std::map<VertexId, std::vector<std::size_t>> in_;
   std::vector<VertexId> topo_;
};

auto parse_graph(const std::string& text) -> DiffGraph;
auto format_graph(const DiffGraph& g) -> std::string;
auto graph_to_dot(const DiffGraph& g) -> std::string;

struct Partition {
   std::vector<VertexId> roots;          // Y
   std::vector<VertexId> intermediates;  // Z
   std::vector<VertexId> terminals;      // X
};
auto classify_vertices(const DiffGraph& g) -> Partition;

constexpr std::size_t kDefaultPathGuard = 1000000;

auto enumerate_paths(const DiffGraph& g, const VertexId& from, const VertexId& to,
                     std::size_t guard = kDefaultPathGuard) -> std::vector<Path>;
//! every root-to-terminal path
auto all_paths(const DiffGraph& g, std::size_t guard = kDefaultPathGuard) -> std::vector<Path>;
//! in-edge/out-edge pairs through v (paths of length 2)
auto local_paths(const DiffGraph& g, const VertexId& v) -> std::vector<Path>;

struct LevelInfo {
   std::map<VertexId, int> level;
   std::vector<EdgeId> cross_level;
   int depth = 0;  //!< L(G); terminals sit on this level
};
auto depth_levels(const DiffGraph& g) -> LevelInfo;

struct RtDegree {
   int r = 0;
   int t = 0;
   auto operator==(const RtDegree&) const -> bool = default;
};
auto rt_degrees(const DiffGraph& g) -> std::map<VertexId, RtDegree>;
auto roots_reaching(const DiffGraph& g, const VertexId& v) -> std::set<VertexId>;
auto terminals_reached(const DiffGraph& g, const VertexId& v) -> std::set<VertexId>;

auto overlap_degree(const DiffGraph& g, const std::vector<Path>& paths, const EdgeId& e) -> std::size_t;

auto descendants(const DiffGraph& g, const VertexId& v) -> std::set<VertexId>;  // excludes v
auto ancestors(const DiffGraph& g, const VertexId& v) -> std::set<VertexId>;    // excludes v

//! Indices of edges lying on some path from a vertex in `from` to a vertex in `to`.
auto edges_between(const DiffGraph& g, const std::set<VertexId>& from, const std::set<VertexId>& to)
    -> std::vector<std::size_t>;
auto subgraph(const DiffGraph& g, const std::vector<std::size_t>& edge_indices) -> DiffGraph;

}  // namespace ojacc

#endif  // OJACC_GRAPH_HPP_
