#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

struct Run {
   int code = -1;
   std::string out;
   std::string err;
};

auto slurp(const std::filesystem::path& p) -> std::string {
   std::ifstream in(p);
   std::stringstream ss;
   ss << in.rdbuf();
   return ss.str();
}

auto fx(const std::string& name) -> std::string { return std::string(OJACC_FIXTURE_DIR) + "/" + name; }

auto run(const std::string& args) -> Run {
   auto dir = std::filesystem::temp_directory_path();
   auto tag = std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
              ::testing::UnitTest::GetInstance()->current_test_info()->name();
   auto out = dir / ("ojacc_" + tag + ".out"), err = dir / ("ojacc_" + tag + ".err");
   auto cmd = std::string(OJACC_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
   int status = std::system(cmd.c_str());
   Run r;
   r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
   r.out = slurp(out);
   r.err = slurp(err);
   std::filesystem::remove(out);
   std::filesystem::remove(err);
   return r;
}

auto lines_with(const std::string& text, const std::string& needle) -> int {
   std::istringstream in(text);
   int n = 0;
   for (std::string l; std::getline(in, l);) n += l.find(needle) != std::string::npos;
   return n;
}

TEST(Cli, InspectAnnotations) {
   auto r = run("inspect " + fx("fig9a.graph"));
   EXPECT_EQ(r.code, 0) << r.err;
   EXPECT_NE(r.out.find("vertex v1 level 1 (2,4)"), std::string::npos) << r.out;
   EXPECT_NE(r.out.find("depth 6"), std::string::npos);
}

TEST(Cli, InspectTrivial) {
   auto r = run("inspect " + fx("single.graph"));
   EXPECT_EQ(r.code, 0);
   EXPECT_NE(r.out.find("vertices 2 edges 1 depth 1"), std::string::npos) << r.out;
   auto j = run("--format json inspect " + fx("single.graph"));
   EXPECT_EQ(j.code, 0);
   EXPECT_EQ(j.out.front(), '{');
}

TEST(Cli, MalformedInput) {
   auto tmp = std::filesystem::temp_directory_path() / "ojacc_bad.graph";
   std::ofstream(tmp) << "e e1 a b\nbogus line\n";
   auto r = run("inspect " + tmp.string());
   EXPECT_EQ(r.code, 2);
   EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
   std::filesystem::remove(tmp);
   EXPECT_EQ(run("inspect /nonexistent/file.graph").code, 1);
   EXPECT_EQ(run("frobnicate").code, 1);
}

TEST(Cli, FactorizeBackward) {
   auto r = run("factorize --direction backward " + fx("fig4b.graph"));
   EXPECT_EQ(r.code, 0) << r.err;
   EXPECT_NE(r.out.find("# fma 12"), std::string::npos) << r.out;
   auto tmp = std::filesystem::temp_directory_path() / "ojacc_back.exprs";
   std::ofstream(tmp) << r.out;
   EXPECT_EQ(run("verify " + tmp.string() + " " + fx("fig4b_backward.exprs")).code, 0);
   std::filesystem::remove(tmp);
}

TEST(Cli, FactorizeRefs) {
   auto r = run("factorize --direction refs " + fx("fig4b.graph"));
   EXPECT_EQ(r.code, 0) << r.err;
   EXPECT_NE(r.out.find("s1 = e8*e11+e9*e12"), std::string::npos) << r.out;
   EXPECT_NE(r.out.find("# fma 10"), std::string::npos);
}

TEST(Cli, FactorizePages) {
   auto dir = std::filesystem::temp_directory_path() / "ojacc_pages";
   std::filesystem::remove_all(dir);
   auto tr = std::filesystem::temp_directory_path() / "ojacc_pages.jsonl";
   auto r = run("factorize --direction pages --transcript " + tr.string() + " --pages-dir " + dir.string() + " " +
                fx("fig9a.graph"));
   EXPECT_EQ(r.code, 0) << r.err;
   EXPECT_EQ(lines_with(r.out, "J["), 16);
   EXPECT_NE(r.out.find("J[v-2,v13] = e18*e4*e9*e16"), std::string::npos) << r.out;
   EXPECT_GT(lines_with(slurp(tr), "\"op\""), 0);
   EXPECT_FALSE(std::filesystem::is_empty(dir));
   std::filesystem::remove_all(dir);
   std::filesystem::remove(tr);
}

TEST(Cli, EliminateWithOrder) {
   auto r = run("eliminate --order " + fx("fig4a.order") + " " + fx("fig4a.graph"));
   EXPECT_EQ(r.code, 0) << r.err;
   EXPECT_NE(r.out.find("# mults 5"), std::string::npos) << r.out;
}

TEST(Cli, EliminateFromExprset) {
   auto r = run("eliminate --from-exprset " + fx("fig10e.exprs") + " " + fx("fig10e.graph"));
   EXPECT_EQ(r.code, 0) << r.err;
   EXPECT_NE(r.out.find("# mults 26"), std::string::npos) << r.out;
}

TEST(Cli, EliminateCycle) {
   auto r = run("eliminate --from-exprset " + fx("cycle.exprs") + " " + fx("fig4a.graph"));
   EXPECT_EQ(r.code, 4);
   EXPECT_NE(r.err.find("circular"), std::string::npos) << r.err;
}

TEST(Cli, EliminateTrivial) {
   auto tmp = std::filesystem::temp_directory_path() / "ojacc_empty.order";
   std::ofstream(tmp) << "# nothing\n";
   auto r = run("eliminate --order " + tmp.string() + " " + fx("single.graph"));
   EXPECT_EQ(r.code, 0) << r.err;
   EXPECT_NE(r.out.find("J[v1,v2] = e1"), std::string::npos) << r.out;
   std::filesystem::remove(tmp);
}

TEST(Cli, Verify) {
   auto ok = run("verify " + fx("fig4b.graph") + " " + fx("fig4b_forward.exprs"));
   EXPECT_EQ(ok.code, 0);
   EXPECT_NE(ok.out.find("PASS"), std::string::npos);
   auto bad = run("verify " + fx("fig4a_product.exprs") + " " + fx("fig4a_product_corrupt.exprs"));
   EXPECT_EQ(bad.code, 3);
   EXPECT_NE(bad.out.find("FAIL"), std::string::npos);
   EXPECT_NE(bad.err.find("mismatches"), std::string::npos);
   EXPECT_EQ(run("--float verify " + fx("fig4a_product.exprs") + " " + fx("fig4a_expanded.exprs")).code, 0);
}

TEST(Cli, DotLineGraph) {
   auto r = run("dot --view linegraph " + fx("fig1a.graph"));
   EXPECT_EQ(r.code, 0) << r.err;
   EXPECT_EQ(lines_with(r.out, "->"), 6);
   EXPECT_EQ(lines_with(r.out, "label="), 5);
   EXPECT_EQ(run("dot --view deps " + fx("fig10e.exprs")).code, 0);
}

TEST(Cli, Chain) {
   auto r = run("chain --best " + fx("fig4a.graph"));
   EXPECT_EQ(r.code, 0) << r.err;
   EXPECT_NE(r.out.find("(AB)(CD)"), std::string::npos) << r.out;
   auto a = run("chain --assoc \"A(B(CD))\" " + fx("fig4b.graph"));
   EXPECT_EQ(a.code, 0) << a.err;
   EXPECT_NE(a.out.find("# fma 10"), std::string::npos) << a.out;
}

TEST(Cli, Relations) {
   auto r = run("relations " + fx("split_violation.exprs"));
   EXPECT_EQ(r.code, 0) << r.err;
   EXPECT_NE(r.out.find("\"violations\""), std::string::npos);
}

}  // namespace
