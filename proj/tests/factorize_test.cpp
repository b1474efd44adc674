#include <gtest/gtest.h>

#include "ojacc/commands.hpp"
#include "ojacc/convert.hpp"
#include "ojacc/factorize.hpp"
#include "ojacc/structure.hpp"
#include "support.hpp"

using namespace ojacc;
using namespace testing_support;

namespace {

auto entry(const ExprSet& s) -> ExprPtr { return s.entries.at(0).expr; }

TEST(Factorize, BackwardGivesNestedSums) {
   auto g = factorize_backward(fixture_graph("fig4b"));
   EXPECT_TRUE(structurally_equal(graph_to_expr(g), entry(fixture_exprs("fig4b_backward"))))
       << format_expr(graph_to_expr(g));
   EXPECT_TRUE(check_equiv(evaluatable(g), evaluatable(fixture_graph("fig4b"))).ok());
   // splitting duplicates v7 and v8 below v5
   EXPECT_EQ(g.vertices().size(), 14u);
}

TEST(Factorize, AlreadySimpleUnchanged) {
   auto a = fixture_graph("fig4a");
   EXPECT_TRUE(isomorphic_by_labels(factorize_backward(a), a));
   auto d = parse_graph("e e1 a b\ne e2 a c\ne e3 b d\ne e4 c d\n");
   EXPECT_TRUE(isomorphic_by_labels(factorize_backward(d), d));
}

TEST(Factorize, ForwardGivesSharedPrefixes) {
   auto g = factorize_forward(fixture_graph("fig4b"));
   auto e = graph_to_expr(g);
   EXPECT_TRUE(structurally_equal(e, entry(fixture_exprs("fig4b_forward")))) << format_expr(e);
   EXPECT_EQ(expr_cost(e), 12);
   auto chain = parse_graph("e e1 a b\ne e2 b c\n");
   EXPECT_TRUE(isomorphic_by_labels(factorize_forward(chain), chain));
}

TEST(Factorize, RefsShareTheSubBlock) {
   auto r = factorize_with_refs(fixture_graph("fig4b"));
   ASSERT_EQ(r.defs.defs.size(), 1u);
   EXPECT_EQ(r.defs.defs[0].name, "s1");
   EXPECT_TRUE(structurally_equal(r.defs.defs[0].def, parse_expr("e8*e11+e9*e12")));
   auto set = r.defs;
   set.entries.push_back({"v1", "v9", graph_to_expr(r.graph)});
   bind_refs(set);
   EXPECT_EQ(fma_cost(set), 10);
   EXPECT_TRUE(check_equiv(evaluatable(set), evaluatable(fixture_graph("fig4b"))).ok());
}

TEST(Factorize, NoSharingNoRefs) {
   EXPECT_TRUE(factorize_with_refs(fixture_graph("fig4a")).defs.defs.empty());
}

TEST(Factorize, RefNamesAvoidLabels) {
   auto g = parse_graph(
       "e e1 v1 v2\ne e2 v1 v3\ne e3 v2 v4\ne s1 v2 v5\ne e5 v3 v5\ne e6 v3 v6\ne e7 v4 v7\n"
       "e e8 v5 v7\ne e9 v5 v8\ne e10 v6 v8\ne e11 v7 v9\ne e12 v8 v9\n");
   auto r = factorize_with_refs(g);
   ASSERT_FALSE(r.defs.defs.empty());
   EXPECT_NE(r.defs.defs[0].name, "s1");
}

TEST(Factorize, MultiRootPerPair) {
   RunConfig cfg;
   for (const auto* dir : {"backward", "forward", "refs"}) {
      auto r = cmd_factorize(fixture_graph("fig9a"), dir, cfg);
      EXPECT_TRUE(r.report.ok()) << dir;
      EXPECT_EQ(r.exprs.entries.size(), 16u) << dir;
   }
}

TEST(Pages, FirstStepReplacesSimpleChains) {
   auto plan = plan_pages(fixture_graph("fig10a"));
   std::vector<std::string> defs;
   for (const auto& t : plan.transcript) {
      if (t.op != "replace-chain") break;
      defs.push_back(t.args_json);
   }
   ASSERT_EQ(defs.size(), 3u);
   EXPECT_NE(defs[0].find("\"e3*e7\""), std::string::npos);
   EXPECT_NE(defs[1].find("\"e6*e10\""), std::string::npos);
   EXPECT_NE(defs[2].find("\"e21*e22\""), std::string::npos);
}

TEST(Pages, PivotOnMultiRootExample) {
   auto plan = plan_pages(fixture_graph("fig9a"));
   const TranscriptRecord* pivot = nullptr;
   for (const auto& t : plan.transcript)
      if (t.op == "pivot" && !pivot) pivot = &t;
   ASSERT_NE(pivot, nullptr);
   EXPECT_EQ(pivot->args_json, R"({"vi":"v5","vj":"v5"})");
}

TEST(Pages, SplitKeepsTheIsolatedPair) {
   auto plan = plan_pages(fixture_graph("fig10a"));
   EXPECT_GE(plan.pages.size(), 2u);
   int holders = 0;
   for (const auto& p : plan.pages)
      for (const auto& e : p.entries) holders += e.root == "v-4" && e.terminal == "v13";
   EXPECT_EQ(holders, 1);
}

TEST(Pages, MergedSetMatchesGraph) {
   for (const auto* name : {"fig9a", "fig10a", "fig10e", "fig4b", "single"}) {
      auto g = fixture_graph(name);
      auto s = merge_pages(plan_pages(g));
      EXPECT_TRUE(check_equiv(evaluatable(s), evaluatable(g)).ok()) << name;
   }
   auto one = merge_pages(plan_pages(fixture_graph("single")));
   ASSERT_EQ(one.entries.size(), 1u);
   EXPECT_EQ(format_expr(one.entries[0].expr), "e1");
}

TEST(Pages, DisplayedSetReproduced) {
   auto got = merge_pages(plan_pages(fixture_graph("fig10e")));
   auto want = fixture_exprs("fig10e");
   ASSERT_EQ(got.entries.size(), want.entries.size());
   for (const auto& w : want.entries) {
      const auto* e = got.find_entry(w.root, w.terminal);
      ASSERT_NE(e, nullptr) << w.root << " " << w.terminal;
      EXPECT_EQ(ref_shape_key(e->expr, got), ref_shape_key(w.expr, want)) << w.root << " " << w.terminal;
   }
   EXPECT_EQ(fma_cost(got), fma_cost(want));
}

TEST(Pages, TranscriptIsJsonLines) {
   auto plan = plan_pages(fixture_graph("fig9a"));
   auto text = transcript_to_jsonl(plan.transcript);
   EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), plan.transcript.size());
   EXPECT_EQ(text.rfind("{\"step\":1,", 0), 0u);
}

}  // namespace
