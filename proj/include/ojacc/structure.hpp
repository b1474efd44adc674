#ifndef OJACC_STRUCTURE_HPP_
#define OJACC_STRUCTURE_HPP_

#include <string>
#include <vector>

#include "ojacc/graph.hpp"

namespace ojacc {

enum class StructureTag {
   DirectSimpleChain,
   IndirectSimpleChain,
   ComplexChain,
   DirectSimpleBlock,
   IndirectSimpleBlock,
   ComplexBlock,
   Block,
   Edge,
};

auto tag_name(StructureTag t) -> std::string;
auto is_simple(StructureTag t) -> bool;

struct Structure {
   StructureTag tag;
   VertexId src;
   VertexId sink;
   std::vector<VertexId> vertices;  //!< sorted, includes src and sink
   std::vector<EdgeId> edges;       //!< sorted
};

//! Unit-labelled filler chains hang off the source vertex: v1 -> v1.1 -> ... -> dst.
auto segment_cross_level(const DiffGraph& g) -> DiffGraph;

//! Innermost-first, by repeated substitute-edge contraction.
auto find_structures(const DiffGraph& g) -> std::vector<Structure>;
auto classify_block(const DiffGraph& g, const VertexId& src, const VertexId& sink) -> Structure;

auto structures_to_jsonl(const std::vector<Structure>& s) -> std::string;

}  // namespace ojacc

#endif  // OJACC_STRUCTURE_HPP_
