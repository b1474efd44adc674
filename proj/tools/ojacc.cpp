#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ojacc/commands.hpp"
#include "ojacc/error.hpp"
#include "ojacc/local_jacobian.hpp"
#include "ojacc/relations.hpp"

using namespace ojacc;

namespace {

auto slurp(const std::string& path) -> std::string {
   std::ifstream in(path);
   if (!in) throw usage_error("cannot read '" + path + "'");
   std::stringstream ss;
   ss << in.rdbuf();
   return ss.str();
}

void spill(const std::string& path, const std::string& text) {
   std::ofstream out(path);
   if (!out) throw usage_error("cannot write '" + path + "'");
   out << text;
}

auto load_graph(const std::string& path) -> DiffGraph {
   try {
      return parse_graph(slurp(path));
   } catch (const Error& e) {
      if (e.kind() == ErrorKind::Usage) throw;
      throw Error(e.kind(), path + ": " + e.what());
   }
}

auto load_exprs(const std::string& path) -> ExprSet {
   try {
      return parse_exprset(slurp(path));
   } catch (const Error& e) {
      if (e.kind() == ErrorKind::Usage) throw;
      throw Error(e.kind(), path + ": " + e.what());
   }
}

}  // namespace

int main(int argc, char** argv) {
   CLI::App app{"Jacobian accumulation by graph factorization and face elimination"};
   app.require_subcommand(1);
   RunConfig cfg;
   std::string format = "text";
   bool use_float = false;
   app.add_option("--seed", cfg.seed, "oracle seed")->capture_default_str();
   app.add_option("--trials", cfg.trials, "oracle trials")->check(CLI::PositiveNumber)->capture_default_str();
   app.add_option("--guard", cfg.path_guard, "path enumeration limit")->check(CLI::PositiveNumber)->capture_default_str();
   app.add_option("--format", format, "output format")->check(CLI::IsMember({"text", "json", "dot"}))->capture_default_str();
   app.add_flag("--float", use_float, "compare in double precision instead of the prime field");

   std::string input, second, direction = "backward", transcript, pages_dir, order_file, exprset_file, trace_file,
                                  view = "graph", assoc;
   bool extended = false, best = false, safe_order = false;

   auto* inspect = app.add_subcommand("inspect", "partition, levels, degrees and structures of a graph");
   inspect->add_option("graph", input)->required();

   auto* factorize = app.add_subcommand("factorize", "factorize a graph into expressions");
   factorize->add_option("graph", input)->required();
   factorize->add_option("--direction", direction)
       ->check(CLI::IsMember({"forward", "backward", "refs", "pages"}))
       ->capture_default_str();
   factorize->add_option("--transcript", transcript, "write the page transcript (JSON lines)");
   factorize->add_option("--pages-dir", pages_dir, "write every leaf page as a graph file");

   auto* eliminate = app.add_subcommand("eliminate", "face elimination on the line graph");
   eliminate->add_option("graph", input)->required();
   auto* by_order = eliminate->add_option("--order", order_file, "faces, one per line: '<i> <j>' or '<expr> | <expr>'");
   eliminate->add_option("--from-exprset", exprset_file, "derive a safe order from an expression set")->excludes(by_order);
   eliminate->add_option("--trace", trace_file, "write the elimination trace (JSON lines)");
   eliminate->add_flag("--extended", extended, "allow superset fillins");

   auto* verify = app.add_subcommand("verify", "compare two graphs or expression sets with the oracle");
   verify->add_option("lhs", input)->required();
   verify->add_option("rhs", second)->required();

   auto* dot = app.add_subcommand("dot", "DOT rendering");
   dot->add_option("artifact", input)->required();
   dot->add_option("--view", view)->check(CLI::IsMember({"graph", "linegraph", "linegraph-meta", "deps"}))->capture_default_str();

   auto* relations = app.add_subcommand("relations", "multiplication relations of an expression set");
   relations->add_option("exprset", input)->required();
   relations->add_flag("--order", safe_order, "also print the safe elimination order");

   auto* chain = app.add_subcommand("chain", "local Jacobians per depth level and their accumulation");
   chain->add_option("graph", input)->required();
   chain->add_option("--assoc", assoc, "association such as '((AB)C)D'; default left to right");
   chain->add_flag("--best", best, "use the cheapest association");

   try {
      app.parse(argc, argv);
   } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) return app.exit(e);
      std::cerr << "error: " << e.what() << '\n';
      return 1;
   }
   cfg.format = format == "json" ? OutputFormat::Json : format == "dot" ? OutputFormat::Dot : OutputFormat::Text;
   cfg.mode = use_float ? OracleMode::Float : OracleMode::Field;

   try {
      if (*inspect) {
         std::cout << cmd_inspect(load_graph(input), cfg);
      } else if (*factorize) {
         auto r = cmd_factorize(load_graph(input), direction, cfg);
         if (!transcript.empty() && r.plan) spill(transcript, transcript_to_jsonl(r.plan->transcript));
         if (!pages_dir.empty() && r.plan) {
            std::filesystem::create_directories(pages_dir);
            for (const auto& p : r.plan->pages) spill(pages_dir + "/" + p.id + ".graph", format_page(p));
         }
         std::cout << render_factorize(r, cfg);
      } else if (*eliminate) {
         auto g = load_graph(input);
         std::optional<std::vector<FaceRef>> order;
         std::optional<ExprSet> from;
         if (!order_file.empty()) order = parse_face_order(slurp(order_file));
         if (!exprset_file.empty()) from = load_exprs(exprset_file);
         auto r = cmd_eliminate(g, order ? &*order : nullptr, from ? &*from : nullptr, extended, cfg);
         if (!trace_file.empty()) spill(trace_file, trace_to_jsonl(r.trace));
         std::cout << render_eliminate(r, cfg);
      } else if (*verify) {
         auto rep = cmd_verify(load_artifact(slurp(input)), load_artifact(slurp(second)), cfg);
         if (cfg.format == OutputFormat::Json)
            std::cout << rep.to_json() << '\n';
         else
            std::cout << (rep.ok() ? "PASS" : "FAIL") << ' ' << rep.trials << " trials\n";
         if (!rep.ok()) {
            if (cfg.format != OutputFormat::Json) std::cerr << rep.to_json() << '\n';
            return static_cast<int>(ErrorKind::Verify);
         }
      } else if (*dot) {
         std::cout << cmd_dot(load_artifact(slurp(input)), view);
      } else if (*relations) {
         auto s = load_exprs(input);
         auto table = classify_relations(s);
         auto deps = build_dep_graph(table);
         auto cycles = detect_cycles(deps);
         auto violations = lemma1_audit(table);
         nlohmann::ordered_json j;
         j["relations"] = nlohmann::ordered_json::parse(relations_to_json(table));
         j["violations"] = nlohmann::ordered_json::array();
         for (const auto& v : violations)
            j["violations"].push_back({{"pair", {v.pair.first, v.pair.second}}, {"direct", v.direct_in}, {"bare", v.bare_in}});
         j["deps"] = nlohmann::ordered_json::parse(dep_graph_to_json(deps));
         j["cycles"] = nlohmann::ordered_json::array();
         for (const auto& c : cycles) j["cycles"].push_back(format_cycle(c));
         if (safe_order) {
            j["order"] = nlohmann::ordered_json::array();
            for (const auto& f : safe_elimination_order(s))
               j["order"].push_back(format_expr(f.face.left) + " | " + format_expr(f.face.right));
         }
         std::cout << j.dump(2) << '\n';
      } else if (*chain) {
         auto g = load_graph(input);
         auto factors = level_chain(g);
         auto order = best ? best_accumulation_order(factors).order
                           : assoc.empty() ? left_to_right(factors.size()) : parse_assoc(assoc, factors.size());
         auto acc = accumulate(factors, order);
         auto rep = check_equiv(evaluatable(g, "input", cfg.path_guard), evaluatable(acc.set, "chain"), cfg.trials,
                                cfg.seed, cfg.mode);
         if (!rep.ok()) throw verify_error("accumulated chain is not equivalent to its input\n" + rep.to_json());
         for (const auto& f : factors) std::cout << format_local_jacobian(f);
         std::cout << "# order " << format_assoc(order) << '\n' << format_exprset(acc.set) << "# fma " << acc.cost << '\n';
      }
   } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return e.exit_code();
   } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
   }
   return 0;
}
