#include "ojacc/commands.hpp"

#include <sstream>

#include <json.hpp>

#include "ojacc/convert.hpp"
#include "ojacc/error.hpp"
#include "ojacc/relations.hpp"
#include "ojacc/structure.hpp"

namespace ojacc {

using json = nlohmann::ordered_json;

auto load_artifact(const std::string& text) -> Artifact {
   std::istringstream in(text);
   std::string line;
   while (std::getline(in, line)) {
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      std::istringstream ls(line);
      std::string first;
      if (!(ls >> first)) continue;
      if (first == "e") return {parse_graph(text), std::nullopt};
      break;
   }
   return {std::nullopt, parse_exprset(text)};
}

auto as_evaluatable(const Artifact& a, const std::string& name, std::size_t guard) -> Evaluatable {
   return a.graph ? evaluatable(*a.graph, name, guard) : evaluatable(*a.exprs, name);
}

auto cmd_inspect(const DiffGraph& g, const RunConfig& cfg) -> std::string {
   auto part = classify_vertices(g);
   auto li = depth_levels(g);
   auto rt = rt_degrees(g);
   auto structures = find_structures(g);
   if (cfg.format == OutputFormat::Json) {
      json j;
      j["roots"] = part.roots;
      j["intermediates"] = part.intermediates;
      j["terminals"] = part.terminals;
      j["depth"] = li.depth;
      j["vertices"] = json::array();
      for (const auto& v : g.topo_order())
         j["vertices"].push_back({{"id", v}, {"level", li.level.at(v)}, {"r", rt.at(v).r}, {"t", rt.at(v).t}});
      j["cross_level"] = li.cross_level;
      j["structures"] = json::array();
      std::istringstream lines(structures_to_jsonl(structures));
      for (std::string l; std::getline(lines, l);) j["structures"].push_back(json::parse(l));
      return j.dump(2) + "\n";
   }
   std::ostringstream out;
   auto list = [&](const char* what, const std::vector<VertexId>& vs) {
      out << what;
      for (const auto& v : vs) out << ' ' << v;
      out << '\n';
   };
   out << "vertices " << g.vertices().size() << " edges " << g.edges().size() << " depth " << li.depth << '\n';
   list("roots", part.roots);
   list("intermediates", part.intermediates);
   list("terminals", part.terminals);
   for (const auto& v : g.topo_order())
      out << "vertex " << v << " level " << li.level.at(v) << " (" << rt.at(v).r << "," << rt.at(v).t << ")\n";
   out << "cross-level";
   for (const auto& e : li.cross_level) out << ' ' << e;
   out << '\n';
   for (const auto& s : structures) out << "structure " << tag_name(s.tag) << ' ' << s.src << ' ' << s.sink << '\n';
   return out.str();
}

namespace {

// One entry per connected (root, terminal) pair of an already factorized graph.
auto entries_of(const DiffGraph& g) -> std::vector<Entry> {
   std::vector<Entry> out;
   for (const auto& r : g.roots())
      for (const auto& t : g.terminals()) {
         auto idx = edges_between(g, {r}, {t});
         if (!idx.empty()) out.push_back({r, t, graph_to_expr(subgraph(g, idx), r, t)});
      }
   return out;
}

void require_ok(const EquivReport& r, const std::string& what) {
   if (!r.ok()) throw verify_error(what + " is not equivalent to its input\n" + r.to_json());
}

}  // namespace

auto cmd_factorize(const DiffGraph& g, const std::string& direction, const RunConfig& cfg) -> FactorizeResult {
   FactorizeResult r;
   r.direction = direction;
   if (direction == "backward" || direction == "forward") {
      r.graph = direction == "backward" ? factorize_backward(g) : factorize_forward(g);
      r.exprs.entries = entries_of(r.graph);
   } else if (direction == "refs") {
      auto f = factorize_with_refs(g);
      r.graph = f.graph;
      r.exprs.defs = f.defs.defs;
      r.exprs.entries = entries_of(r.graph);
      bind_refs(r.exprs);
   } else if (direction == "pages") {
      r.plan = plan_pages(g);
      r.exprs = merge_pages(*r.plan);
   } else {
      throw usage_error("unknown direction '" + direction + "'");
   }
   r.cost = fma_cost(r.exprs);
   auto original = evaluatable(g, "input", cfg.path_guard);
   if (!r.graph.empty()) {
      auto as_graph = r.exprs.defs.empty() ? evaluatable(r.graph, "factorized", cfg.path_guard)
                                            : evaluatable(r.graph, r.exprs, "factorized", cfg.path_guard);
      require_ok(check_equiv(original, as_graph, cfg.trials, cfg.seed, cfg.mode), "factorized graph");
   }
   r.report = check_equiv(original, evaluatable(r.exprs, "expressions"), cfg.trials, cfg.seed, cfg.mode);
   require_ok(r.report, "expression set");
   return r;
}

auto render_factorize(const FactorizeResult& r, const RunConfig& cfg) -> std::string {
   if (cfg.format == OutputFormat::Json) {
      json j;
      j["direction"] = r.direction;
      if (!r.graph.empty()) j["graph"] = format_graph(r.graph);
      j["exprset"] = format_exprset(r.exprs);
      j["fma"] = r.cost;
      j["verify"] = json::parse(r.report.to_json());
      if (r.plan) {
         j["pages"] = json::array();
         for (const auto& p : r.plan->pages) j["pages"].push_back({{"id", p.id}, {"graph", format_graph(p.graph)}});
      }
      return j.dump(2) + "\n";
   }
   if (cfg.format == OutputFormat::Dot) {
      if (r.graph.empty()) throw usage_error("pages have no single graph to draw");
      return graph_to_dot(r.graph);
   }
   return format_exprset(r.exprs) + "# fma " + std::to_string(r.cost) + "\n";
}

auto cmd_eliminate(const DiffGraph& g, const std::vector<FaceRef>* order, const ExprSet* from, bool extended,
                   const RunConfig& cfg) -> EliminateResult {
   EliminateResult r;
   std::vector<FaceRef> faces;
   if (from) {
      faces = faces_of(safe_elimination_order(*from));
      r.exprset_cost = fma_cost(*from);
   } else if (order) {
      faces = *order;
   }
   auto lg = build_line_graph(g);
   r.trace = run_elimination(lg, faces, extended);
   r.ordered_steps = r.trace.steps.size();
   eliminate_rest(lg, r.trace);
   r.jacobian = readout_jacobian(lg);
   r.report = check_equiv(evaluatable(g, "input", cfg.path_guard), evaluatable(r.jacobian, "readout"), cfg.trials, cfg.seed, cfg.mode);
   require_ok(r.report, "eliminated line graph");
   if (from)
      require_ok(check_equiv(evaluatable(*from, "exprset"), evaluatable(r.jacobian, "readout"), cfg.trials, cfg.seed,
                             cfg.mode),
                 "eliminated line graph");
   return r;
}

auto render_eliminate(const EliminateResult& r, const RunConfig& cfg) -> std::string {
   std::size_t extra = r.trace.steps.size() - r.ordered_steps;
   if (cfg.format == OutputFormat::Json) {
      json j;
      j["jacobian"] = format_exprset(r.jacobian);
      j["mults"] = r.trace.mults();
      if (r.exprset_cost) j["fma"] = *r.exprset_cost;
      j["completion_steps"] = extra;
      j["verify"] = json::parse(r.report.to_json());
      return j.dump(2) + "\n";
   }
   std::ostringstream out;
   out << format_exprset(r.jacobian) << "# mults " << r.trace.mults() << '\n';
   if (r.exprset_cost) out << "# fma " << *r.exprset_cost << '\n';
   if (extra) out << "# completion steps " << extra << '\n';
   return out.str();
}

auto cmd_verify(const Artifact& a, const Artifact& b, const RunConfig& cfg) -> EquivReport {
   return check_equiv(as_evaluatable(a, "lhs", cfg.path_guard), as_evaluatable(b, "rhs", cfg.path_guard), cfg.trials, cfg.seed, cfg.mode);
}

auto cmd_dot(const Artifact& a, const std::string& view) -> std::string {
   if (view == "deps") {
      if (!a.exprs) throw usage_error("deps view needs an expression set");
      return dep_graph_to_dot(build_dep_graph(classify_relations(*a.exprs)));
   }
   if (!a.graph) throw usage_error("view '" + view + "' needs a graph");
   if (view == "graph") return graph_to_dot(*a.graph);
   if (view == "linegraph") return line_graph_to_dot(build_line_graph(*a.graph));
   if (view == "linegraph-meta") return line_graph_to_dot(build_line_graph(*a.graph), true);
   throw usage_error("unknown view '" + view + "'");
}

}  // namespace ojacc
