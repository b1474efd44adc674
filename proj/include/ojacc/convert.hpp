#ifndef OJACC_CONVERT_HPP_
#define OJACC_CONVERT_HPP_

#include "ojacc/expr.hpp"
#include "ojacc/graph.hpp"

namespace ojacc {

//! Series-parallel reduction of the paths src -> sink. Throws on a complex block.
auto graph_to_expr(const DiffGraph& g, const VertexId& src, const VertexId& sink) -> ExprPtr;
//! single-root single-terminal shorthand
auto graph_to_expr(const DiffGraph& g) -> ExprPtr;

//! Vertices are named v0 (source), v1 (sink), v2...; refs become edges labelled with their name.
auto expr_to_graph(const ExprPtr& e) -> DiffGraph;

}  // namespace ojacc

#endif  // OJACC_CONVERT_HPP_
