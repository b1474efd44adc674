#include <gtest/gtest.h>

#include "ojacc/convert.hpp"
#include "ojacc/error.hpp"
#include "ojacc/factorize.hpp"
#include "support.hpp"

using namespace ojacc;
using namespace testing_support;

namespace {

auto entry(const ExprSet& s) -> ExprPtr { return s.entries.at(0).expr; }

TEST(Expr, ParseBlockProduct) {
   auto e = parse_expr("(e1*e3+e2*e4)*(e5*e7+e6*e8)");
   ASSERT_EQ(e->kind, ExprKind::Prod);
   ASSERT_EQ(e->kids.size(), 2u);
   EXPECT_EQ(e->kids[0]->kind, ExprKind::Sum);
   EXPECT_EQ(format_expr(e), "(e1*e3+e2*e4)*(e5*e7+e6*e8)");
   EXPECT_TRUE(structurally_equal(e, entry(fixture_exprs("fig4a_product"))));
}

TEST(Expr, UnitFactorsVanish) {
   EXPECT_EQ(format_expr(parse_expr("1*e5")), "e5");
   EXPECT_EQ(format_expr(parse_expr("e5*1*e6")), "e5*e6");
   EXPECT_EQ(parse_expr("1*1")->kind, ExprKind::Unit);
}

TEST(Expr, NestingFlattens) {
   EXPECT_EQ(format_expr(parse_expr("a*(b*c)")), "a*b*c");
   EXPECT_EQ(format_expr(parse_expr("a+(b+c)")), "a+b+c");
   EXPECT_EQ(format_expr(parse_expr("a*(b+c)")), "a*(b+c)");
}

TEST(Expr, SyntaxErrors) {
   for (const auto* bad : {"e1*(e2+", "e1**e2", "", "e1 e2", ")"}) {
      try {
         parse_expr(bad);
         ADD_FAILURE() << "accepted '" << bad << "'";
      } catch (const Error& e) {
         EXPECT_EQ(e.kind(), ErrorKind::Parse) << bad;
      }
   }
}

TEST(Expr, CanonicalKeyIgnoresSumOrderOnly) {
   EXPECT_EQ(canonical_key(parse_expr("a*b+c*d")), canonical_key(parse_expr("c*d+a*b")));
   EXPECT_NE(canonical_key(parse_expr("a*b")), canonical_key(parse_expr("b*a")));
}

TEST(Expr, FmaCost) {
   EXPECT_EQ(fma_cost(fixture_exprs("fig4a_product")), 5);
   EXPECT_EQ(fma_cost(fixture_exprs("fig4a_expanded")), 12);
   EXPECT_EQ(fma_cost(fixture_exprs("fig4b_shared")), 10);
   EXPECT_EQ(fma_cost(fixture_exprs("fig4b_backward")), 12);
   EXPECT_EQ(fma_cost(fixture_exprs("fig4b_forward")), 12);
   EXPECT_EQ(fma_cost(parse_exprset("J[a,b] = 1*e5\n")), 0);
}

TEST(Expr, ExpandRefs) {
   auto s5 = fixture_exprs("fig4b_shared");
   EXPECT_TRUE(structurally_equal(expand(entry(s5), s5), entry(fixture_exprs("fig4b_backward"))));
   auto plain = fixture_exprs("fig4a_product");
   EXPECT_TRUE(structurally_equal(expand(entry(plain), plain), entry(plain)));

   auto loop = parse_exprset("s1 = a*s2\ns2 = b+s1\nJ[y,x] = s1\n");
   try {
      expand(entry(loop), loop);
      FAIL() << "expected a cycle error";
   } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Cycle);
   }
}

TEST(Expr, ExprSetRoundTrip) {
   for (const auto* name : {"fig4b_shared", "fig10e", "cycle"}) {
      auto s = fixture_exprs(name);
      auto t = parse_exprset(format_exprset(s));
      ASSERT_EQ(s.entries.size(), t.entries.size()) << name;
      for (std::size_t k = 0; k < s.entries.size(); ++k)
         EXPECT_TRUE(structurally_equal(s.entries[k].expr, t.entries[k].expr)) << name;
      EXPECT_EQ(fma_cost(s), fma_cost(t)) << name;
   }
}

TEST(Convert, SimpleGraphToExpr) {
   auto e = graph_to_expr(fixture_graph("fig4a"));
   EXPECT_TRUE(structurally_equal(e, entry(fixture_exprs("fig4a_product"))));
   EXPECT_EQ(expr_cost(e), 5);
   EXPECT_EQ(format_expr(graph_to_expr(parse_graph("e ea a b\ne eb b c\n"))), "ea*eb");
}

TEST(Convert, ComplexBlockHasNoExpression) {
   EXPECT_THROW(graph_to_expr(fixture_graph("fig4b")), Error);
}

TEST(Convert, ExprToGraph) {
   auto g = expr_to_graph(entry(fixture_exprs("fig4a_product")));
   EXPECT_TRUE(isomorphic_by_labels(g, fixture_graph("fig4a")));

   auto c = expr_to_graph(parse_expr("ea*eb"));
   EXPECT_EQ(c.vertices().size(), 3u);
   EXPECT_EQ(c.edges().size(), 2u);
}

TEST(Convert, NestedSumsDuplicateSharedVertices) {
   auto nested = entry(fixture_exprs("fig4b_backward"));
   auto g = expr_to_graph(nested);
   auto back = factorize_backward(fixture_graph("fig4b"));
   EXPECT_EQ(g.vertices().size(), back.vertices().size());
   EXPECT_EQ(g.edges().size(), back.edges().size());
   EXPECT_TRUE(structurally_equal(graph_to_expr(g), nested));
}

}  // namespace
