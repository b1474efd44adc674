#include <gtest/gtest.h>

#include "ojacc/error.hpp"
#include "support.hpp"

using namespace ojacc;
using namespace testing_support;

namespace {

auto ids(std::vector<VertexId> v) -> std::vector<VertexId> { return v; }

TEST(GraphParse, LineGraphExampleInputs) {
   auto g = fixture_graph("fig1a");
   auto p = classify_vertices(g);
   EXPECT_EQ(p.roots, ids({"v4", "v5", "v6"}));
   EXPECT_EQ(p.terminals, ids({"v1", "v2"}));
   EXPECT_EQ(p.intermediates, ids({"v3"}));
}

TEST(GraphParse, SingleEdge) {
   auto g = parse_graph("e e1 a b\n");
   auto p = classify_vertices(g);
   EXPECT_EQ(p.roots, ids({"a"}));
   EXPECT_EQ(p.terminals, ids({"b"}));
   EXPECT_TRUE(p.intermediates.empty());
}

TEST(GraphParse, CycleRejected) {
   try {
      parse_graph("e e1 a b\ne e2 b a\n");
      FAIL() << "expected a cycle error";
   } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Cycle);
   }
}

TEST(GraphParse, ErrorsCarryLineNumbers) {
   try {
      parse_graph("e e1 a b\n\nx e2 b c\n");
      FAIL() << "expected a parse error";
   } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Parse);
      EXPECT_NE(std::string(e.what()).find("3"), std::string::npos) << e.what();
   }
   EXPECT_THROW(parse_graph("e e1 a\n"), Error);
   EXPECT_THROW(parse_graph("e e1 a b\ne e1 b c\n"), Error);
   EXPECT_THROW(parse_graph("# nothing\n"), Error);
}

TEST(GraphParse, FormatRoundTrip) {
   auto g = fixture_graph("fig6a");
   auto h = parse_graph(format_graph(g));
   EXPECT_EQ(g.edges(), h.edges());
}

TEST(GraphCore, Partition) {
   auto p = classify_vertices(fixture_graph("fig4a"));
   EXPECT_EQ(p.roots, ids({"v1"}));
   EXPECT_EQ(p.terminals, ids({"v7"}));
   EXPECT_EQ(p.intermediates, ids({"v2", "v3", "v4", "v5", "v6"}));

   auto q = classify_vertices(fixture_graph("fig9a"));
   EXPECT_EQ(std::set<VertexId>(q.roots.begin(), q.roots.end()), (std::set<VertexId>{"v0", "v-1", "v-2", "v-3"}));
   EXPECT_EQ(std::set<VertexId>(q.terminals.begin(), q.terminals.end()),
             (std::set<VertexId>{"v10", "v11", "v12", "v13"}));
}

TEST(GraphCore, EnumeratePaths) {
   EXPECT_EQ(enumerate_paths(fixture_graph("fig4a"), "v1", "v7").size(), 4u);
   EXPECT_EQ(enumerate_paths(fixture_graph("fig4b"), "v1", "v9").size(), 6u);
   EXPECT_TRUE(enumerate_paths(fixture_graph("fig4a"), "v1", "v1").empty());
}

// Path count by dynamic programming over the topological order.
TEST(GraphCore, PathCountMatchesDynamicProgram) {
   for (const auto* name : {"fig4a", "fig4b", "fig9a", "fig10a"}) {
      auto g = fixture_graph(name);
      std::size_t total = 0;
      for (const auto& r : g.roots()) {
         std::map<VertexId, std::size_t> n{{r, 1}};
         for (const auto& v : g.topo_order())
            for (auto k : g.out_edges(v)) n[g.edges()[k].dst] += n[v];
         for (const auto& t : g.terminals()) total += n[t];
      }
      EXPECT_EQ(all_paths(g).size(), total) << name;
   }
}

TEST(GraphCore, PathGuard) {
   try {
      all_paths(fixture_graph("fig9a"), 3);
      FAIL() << "expected the guard to trip";
   } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Guard);
   }
}

TEST(GraphCore, DepthLevels) {
   auto l = depth_levels(fixture_graph("fig5a"));
   EXPECT_EQ(l.level.at("v1"), 0);
   EXPECT_EQ(l.level.at("v2"), 1);
   EXPECT_EQ(l.level.at("v3"), 1);
   EXPECT_EQ(l.level.at("v4"), 2);
   EXPECT_EQ(l.cross_level, std::vector<EdgeId>{"e5"});

   auto c = depth_levels(parse_graph("e e1 a b\ne e2 b c\n"));
   EXPECT_EQ(c.level.at("a"), 0);
   EXPECT_EQ(c.level.at("c"), 2);
   EXPECT_TRUE(c.cross_level.empty());

   EXPECT_EQ(depth_levels(fixture_graph("fig9a")).depth, 6);
}

TEST(GraphCore, TerminalsShareTheLastLevel) {
   auto g = fixture_graph("fig9a");
   auto l = depth_levels(g);
   for (const auto& t : g.terminals()) EXPECT_EQ(l.level.at(t), l.depth) << t;
   for (const auto& e : g.edges()) EXPECT_LT(l.level.at(e.src), l.level.at(e.dst));
}

TEST(GraphCore, RtDegrees) {
   auto g = fixture_graph("fig9a");
   auto d = rt_degrees(g);
   EXPECT_EQ(d.at("v1"), (RtDegree{2, 4}));
   EXPECT_EQ(d.at("v9"), (RtDegree{4, 2}));
   for (const auto& r : g.roots()) EXPECT_EQ(d.at(r).r, 0);
   for (const auto& t : g.terminals()) EXPECT_EQ(d.at(t).t, 0);
}

TEST(GraphCore, OverlapDegree) {
   auto b = fixture_graph("fig4b");
   EXPECT_EQ(overlap_degree(b, local_paths(b, "v7"), "e11"), 2u);
   EXPECT_EQ(overlap_degree(b, local_paths(b, "v8"), "e12"), 2u);
   EXPECT_EQ(overlap_degree(b, local_paths(b, "v7"), "e1"), 0u);

   auto a = fixture_graph("fig4a");
   EXPECT_EQ(overlap_degree(a, all_paths(a), "e3"), 2u);
   EXPECT_EQ(overlap_degree(a, enumerate_paths(a, "v4", "v7"), "e1"), 0u);
}

TEST(Oracle, InstantiateIsDeterministic) {
   std::set<std::string> labels;
   for (int k = 1; k <= 8; ++k) labels.insert("e" + std::to_string(k));
   auto a = instantiate(labels, 42), b = instantiate(labels, 42);
   std::set<std::uint64_t> distinct;
   for (const auto& l : labels) {
      EXPECT_EQ(a.value(l).f, b.value(l).f);
      EXPECT_NE(a.value(l).f, 0u);
      distinct.insert(a.value(l).f);
   }
   EXPECT_EQ(distinct.size(), 8u);
   EXPECT_EQ(a.value("1").f, 1u);
   EXPECT_EQ(a.value("1").d, 1.0);
}

TEST(Oracle, UnitLabelsCountPaths) {
   for (const auto& [name, paths] : std::vector<std::pair<std::string, std::uint64_t>>{{"fig4a", 4}, {"fig4b", 6}}) {
      auto g = fixture_graph(name);
      std::vector<Edge> ones;
      for (auto e : g.edges()) {
         e.label = "1";
         ones.push_back(e);
      }
      auto v = bauer_eval(DiffGraph(ones), instantiate({}, 0));
      ASSERT_EQ(v.size(), 1u);
      EXPECT_EQ(v.begin()->second.f, paths) << name;
   }
   auto s = fixture_graph("single");
   auto inst = instantiate({"e1"}, 7);
   EXPECT_EQ(bauer_eval(s, inst).at({"v1", "v2"}).f, inst.value("e1").f);
}

TEST(Oracle, BauerAgreesWithNeumannSeries) {
   for (const auto* name : {"fig4a", "fig4b", "fig5a", "fig9a", "fig10a"}) {
      auto g = fixture_graph(name);
      std::set<std::string> labels;
      for (const auto& e : g.edges()) labels.insert(e.label);
      auto inst = instantiate(labels, 3);
      // keep float magnitudes moderate for the matrix inverse
      for (auto& [l, v] : inst.values) v.d = 0.5 + static_cast<double>(v.f % 1000) / 1000.0;
      auto bauer = bauer_eval(g, inst);
      auto dense = neumann_jacobian(g, inst);
      ASSERT_EQ(bauer.size(), dense.size()) << name;
      for (const auto& [k, v] : dense) EXPECT_NEAR(bauer.at(k).d, v, 1e-9 * std::max(1.0, std::abs(v))) << name;
   }
}

TEST(Oracle, EquivalentForms) {
   auto r = check_equiv(evaluatable(fixture_exprs("fig4a_product")), evaluatable(fixture_exprs("fig4a_expanded")));
   EXPECT_TRUE(r.ok());
   EXPECT_EQ(r.trials, 100);
   EXPECT_TRUE(check_equiv(evaluatable(fixture_graph("fig4b")), evaluatable(fixture_exprs("fig4b_backward"))).ok());
   EXPECT_TRUE(check_equiv(evaluatable(fixture_graph("fig4b")), evaluatable(fixture_exprs("fig4b_shared"))).ok());
}

TEST(Oracle, PerturbationCaught) {
   auto r = check_equiv(evaluatable(fixture_exprs("fig4a_product")), evaluatable(fixture_exprs("fig4a_product_corrupt")));
   ASSERT_FALSE(r.ok());
   EXPECT_EQ(r.mismatches.size(), 1u);
   EXPECT_EQ(r.mismatches[0].pair, (VertexPair{"v1", "v7"}));
   EXPECT_NE(r.to_json().find("mismatches"), std::string::npos);
   auto f = check_equiv(evaluatable(fixture_exprs("fig4a_product")), evaluatable(fixture_exprs("fig4a_product_corrupt")), 20, 0,
                        OracleMode::Float);
   EXPECT_FALSE(f.ok());
}

TEST(Oracle, SupportMismatchIsAnError) {
   EXPECT_THROW(check_equiv(evaluatable(fixture_graph("fig4a")), evaluatable(fixture_graph("fig4b"))), Error);
}

}  // namespace
