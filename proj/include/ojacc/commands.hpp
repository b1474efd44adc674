#ifndef OJACC_COMMANDS_HPP_
#define OJACC_COMMANDS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ojacc/expr.hpp"
#include "ojacc/factorize.hpp"
#include "ojacc/graph.hpp"
#include "ojacc/line_graph.hpp"
#include "ojacc/oracle.hpp"

namespace ojacc {

enum class OutputFormat { Text, Json, Dot };

struct RunConfig {
   std::uint64_t seed = 0;
   int trials = 100;
   std::size_t path_guard = kDefaultPathGuard;
   OracleMode mode = OracleMode::Field;
   OutputFormat format = OutputFormat::Text;
};

// A file is a graph when its first content line is an edge record, otherwise an expression set.
struct Artifact {
   std::optional<DiffGraph> graph;
   std::optional<ExprSet> exprs;
};
auto load_artifact(const std::string& text) -> Artifact;
auto as_evaluatable(const Artifact& a, const std::string& name, std::size_t guard = kDefaultPathGuard) -> Evaluatable;

auto cmd_inspect(const DiffGraph& g, const RunConfig& cfg) -> std::string;

struct FactorizeResult {
   std::string direction;
   DiffGraph graph;  //!< factorized graph; empty for pages
   ExprSet exprs;
   int cost = 0;
   std::optional<PagePlan> plan;
   EquivReport report;
};
//! Throws a verification error carrying the oracle report when the result is not equivalent.
auto cmd_factorize(const DiffGraph& g, const std::string& direction, const RunConfig& cfg) -> FactorizeResult;
auto render_factorize(const FactorizeResult& r, const RunConfig& cfg) -> std::string;

struct EliminateResult {
   Trace trace;
   ExprSet jacobian;
   std::size_t ordered_steps = 0;  //!< steps taken for the given order, before completing leftovers
   std::optional<int> exprset_cost;
   EquivReport report;
};
auto cmd_eliminate(const DiffGraph& g, const std::vector<FaceRef>* order, const ExprSet* from, bool extended,
                   const RunConfig& cfg) -> EliminateResult;
auto render_eliminate(const EliminateResult& r, const RunConfig& cfg) -> std::string;

auto cmd_verify(const Artifact& a, const Artifact& b, const RunConfig& cfg) -> EquivReport;

//! view: graph, linegraph, deps
auto cmd_dot(const Artifact& a, const std::string& view) -> std::string;

}  // namespace ojacc

#endif  // OJACC_COMMANDS_HPP_
