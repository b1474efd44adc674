#ifndef OJACC_TESTS_SUPPORT_HPP_
#define OJACC_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <climits>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "ojacc/expr.hpp"
#include "ojacc/graph.hpp"
#include "ojacc/local_jacobian.hpp"
#include "ojacc/oracle.hpp"

namespace ojacc {
inline void PrintTo(const Edge& e, std::ostream* os) { *os << e.id << " " << e.src << "->" << e.dst << " " << e.label; }
}  // namespace ojacc

namespace testing_support {

using namespace ojacc;

inline auto fixture_text(const std::string& name) -> std::string {
   std::ifstream in(std::string(OJACC_FIXTURE_DIR) + "/" + name);
   if (!in) throw std::runtime_error("missing fixture " + name);
   std::stringstream ss;
   ss << in.rdbuf();
   return ss.str();
}

inline auto fixture_graph(const std::string& name) -> DiffGraph { return parse_graph(fixture_text(name + ".graph")); }
inline auto fixture_exprs(const std::string& name) -> ExprSet { return parse_exprset(fixture_text(name + ".exprs")); }

// Random layered DAG: vertices spread over layers, edges only point to later layers
// (sometimes skipping layers). Labels equal edge ids.
inline auto random_dag(std::mt19937_64& rng, int max_vertices = 10, int max_edges = 16) -> DiffGraph {
   std::uniform_int_distribution<int> nv(3, max_vertices);
   int n = nv(rng);
   std::uniform_int_distribution<int> nl(2, std::min(n, 5));
   int layers = nl(rng);
   std::vector<int> layer(static_cast<std::size_t>(n));
   for (int v = 0; v < n; ++v) layer[static_cast<std::size_t>(v)] = v < layers ? v : std::uniform_int_distribution<int>(0, layers - 1)(rng);
   std::vector<Edge> edges;
   std::set<std::pair<int, int>> used;
   auto add = [&](int a, int b) {
      if (static_cast<int>(edges.size()) >= max_edges || !used.insert({a, b}).second) return;
      auto id = "e" + std::to_string(edges.size() + 1);
      edges.push_back({id, "v" + std::to_string(a), "v" + std::to_string(b), id});
   };
   // every vertex gets at least one edge towards a later layer or from an earlier one
   for (int v = 0; v < n; ++v) {
      std::vector<int> later, earlier;
      for (int w = 0; w < n; ++w) {
         if (layer[static_cast<std::size_t>(w)] > layer[static_cast<std::size_t>(v)]) later.push_back(w);
         if (layer[static_cast<std::size_t>(w)] < layer[static_cast<std::size_t>(v)]) earlier.push_back(w);
      }
      if (!later.empty() && (earlier.empty() || rng() % 2))
         add(v, later[rng() % later.size()]);
      else if (!earlier.empty())
         add(earlier[rng() % earlier.size()], v);
   }
   std::uniform_int_distribution<int> extra(0, max_edges);
   for (int k = extra(rng); k > 0; --k) {
      int a = static_cast<int>(rng() % static_cast<unsigned>(n)), b = static_cast<int>(rng() % static_cast<unsigned>(n));
      if (layer[static_cast<std::size_t>(a)] < layer[static_cast<std::size_t>(b)]) add(a, b);
   }
   return DiffGraph(edges);
}

// Independent reference: sum over all paths equals (I - W)^{-1} for the nilpotent weighted adjacency W.
inline auto neumann_jacobian(const DiffGraph& g, const Instantiation& inst)
    -> std::map<std::pair<VertexId, VertexId>, double> {
   std::map<VertexId, Eigen::Index> at;
   for (const auto& v : g.vertices()) at.emplace(v, static_cast<Eigen::Index>(at.size()));
   auto n = static_cast<Eigen::Index>(at.size());
   Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
   for (const auto& e : g.edges()) w(at[e.src], at[e.dst]) += inst.value(e.label).d;
   Eigen::MatrixXd p = (Eigen::MatrixXd::Identity(n, n) - w).inverse();
   std::map<std::pair<VertexId, VertexId>, double> out;
   for (const auto& r : g.roots())
      for (const auto& t : g.terminals())
         if (!edges_between(g, {r}, {t}).empty()) out[{r, t}] = p(at[r], at[t]);
   return out;
}

// Vertex bijection induced by uniquely labelled edges.
inline auto isomorphic_by_labels(const DiffGraph& a, const DiffGraph& b) -> bool {
   if (a.edges().size() != b.edges().size() || a.vertices().size() != b.vertices().size()) return false;
   std::map<std::string, const Edge*> by_label;
   for (const auto& e : b.edges())
      if (!by_label.emplace(e.label, &e).second) return false;
   std::map<VertexId, VertexId> fwd, back;
   auto bind = [&](const VertexId& x, const VertexId& y) {
      auto [i, fresh] = fwd.emplace(x, y);
      auto [j, fresh2] = back.emplace(y, x);
      return i->second == y && j->second == x;
   };
   for (const auto& e : a.edges()) {
      auto it = by_label.find(e.label);
      if (it == by_label.end()) return false;
      if (!bind(e.src, it->second->src) || !bind(e.dst, it->second->dst)) return false;
   }
   return true;
}

// Normal form for structural comparison: Sum terms sorted, reference names ignored after expansion.
inline auto normal_key(const ExprPtr& e, const ExprSet& s) -> std::string { return canonical_key(expand(e, s)); }


// Like canonical_key, but a reference is replaced by the key of its definition in brackets,
// so two sets compare equal when they differ only in reference names.
inline auto ref_shape_key(const ExprPtr& e, const ExprSet& s) -> std::string {
   switch (e->kind) {
      case ExprKind::Sym:
         if (const auto* d = s.find_def(e->name)) return "<" + ref_shape_key(d->def, s) + ">";
         return e->name;
      case ExprKind::Unit: return "1";
      case ExprKind::Ref: {
         const auto* d = s.find_def(e->name);
         if (!d) throw std::runtime_error("undefined reference " + e->name);
         return "<" + ref_shape_key(d->def, s) + ">";
      }
      case ExprKind::Prod: {
         std::string out = "P(";
         for (const auto& k : e->kids) out += ref_shape_key(k, s) + ",";
         return out + ")";
      }
      case ExprKind::Sum: {
         std::vector<std::string> terms;
         for (const auto& k : e->kids) terms.push_back(ref_shape_key(k, s));
         std::sort(terms.begin(), terms.end());
         std::string out = "S(";
         for (const auto& t : terms) out += t + ",";
         return out + ")";
      }
   }
   return {};
}

inline auto same_prime_values(const Evaluatable& a, const Evaluatable& b, int trials = 100, std::uint64_t seed = 0) -> bool {
   return check_equiv(a, b, trials, seed).ok();
}

// Sparsity-only view of a chain factor: path counts and unit flags per entry.
struct PatternMatrix {
   std::vector<VertexId> rows, cols;
   Eigen::MatrixXi count;  // number of products summed into the entry, 0 for a zero
   Eigen::MatrixXi unit;   // 1 where the entry is exactly the constant 1
};

inline auto pattern_of(const LocalJacobian& j) -> PatternMatrix {
   PatternMatrix m{j.rows, j.cols, Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(j.rows.size()), static_cast<Eigen::Index>(j.cols.size())), {}};
   m.unit = m.count;
   for (std::size_t r = 0; r < j.rows.size(); ++r)
      for (std::size_t c = 0; c < j.cols.size(); ++c)
         if (auto e = j.at(j.rows[r], j.cols[c])) {
            m.count(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = 1;
            m.unit(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = e->kind == ExprKind::Unit ? 1 : 0;
         }
   return m;
}

inline auto nonzero(const Eigen::MatrixXi& m) -> Eigen::MatrixXi { return (m.array() != 0).cast<int>().matrix(); }

// Counts every scalar product a_il * b_lj with both factors nonzero and neither equal to 1.
inline auto pattern_product(const PatternMatrix& a, const PatternMatrix& b, int& mults) -> PatternMatrix {
   Eigen::MatrixXi an = nonzero(a.count) - a.unit, bn = nonzero(b.count) - b.unit;
   mults += (an * bn).sum();
   PatternMatrix out{a.rows, b.cols, nonzero(a.count) * nonzero(b.count), {}};
   Eigen::MatrixXi both = a.unit * b.unit;
   out.unit = ((out.count.array() == 1) && (both.array() == 1)).cast<int>().matrix();
   return out;
}

inline auto assoc_cost(const std::vector<PatternMatrix>& chain, const Assoc& a, int& mults) -> PatternMatrix {
   if (a.kids.empty()) return chain[static_cast<std::size_t>(a.leaf)];
   auto l = assoc_cost(chain, a.kids[0], mults);
   auto r = assoc_cost(chain, a.kids[1], mults);
   return pattern_product(l, r, mults);
}

// Entries that lie on no path from the first rows to the last columns are masked out:
// f_k marks vertices reachable from the start, b_k those reaching the end.
inline auto live_chain(const std::vector<LocalJacobian>& chain) -> std::vector<PatternMatrix> {
   std::vector<PatternMatrix> p;
   for (const auto& j : chain) p.push_back(pattern_of(j));
   auto n = p.size();
   std::vector<Eigen::VectorXi> f(n + 1), b(n + 1);
   f[0] = Eigen::VectorXi::Ones(p[0].count.rows());
   for (std::size_t k = 0; k < n; ++k) f[k + 1] = ((p[k].count.transpose() * f[k]).array() > 0).cast<int>().matrix();
   b[n] = Eigen::VectorXi::Ones(p[n - 1].count.cols());
   for (auto k = n; k-- > 0;) b[k] = ((p[k].count * b[k + 1]).array() > 0).cast<int>().matrix();
   for (std::size_t k = 0; k < n; ++k) {
      Eigen::MatrixXi mask = f[k] * b[k + 1].transpose();
      p[k].count = p[k].count.cwiseProduct(mask);
      p[k].unit = p[k].unit.cwiseProduct(mask);
   }
   return p;
}

//! brute-force count of nonzero products for one parenthesization
inline auto brute_force_cost(const std::vector<LocalJacobian>& chain, const Assoc& a) -> int {
   auto p = live_chain(chain);
   int mults = 0;
   assoc_cost(p, a, mults);
   int base = 0;
   for (std::size_t k = 0; k < chain.size(); ++k)
      for (Eigen::Index r = 0; r < p[k].count.rows(); ++r)
         for (Eigen::Index c = 0; c < p[k].count.cols(); ++c)
            if (p[k].count(r, c)) base += expr_cost(chain[k].at(p[k].rows[static_cast<std::size_t>(r)], p[k].cols[static_cast<std::size_t>(c)]));
   return mults + base;
}

inline auto every_parenthesization(int lo, int hi) -> std::vector<Assoc> {
   if (lo == hi) return {Assoc{lo, {}}};
   std::vector<Assoc> out;
   for (int k = lo; k < hi; ++k)
      for (const auto& l : every_parenthesization(lo, k))
         for (const auto& r : every_parenthesization(k + 1, hi)) out.push_back(Assoc{-1, {l, r}});
   return out;
}

inline auto exhaustive_min_cost(const std::vector<LocalJacobian>& chain) -> int {
   int best = INT_MAX;
   for (const auto& a : every_parenthesization(0, static_cast<int>(chain.size()) - 1))
      best = std::min(best, brute_force_cost(chain, a));
   return best;
}

inline auto random_chain(std::mt19937_64& rng, std::size_t length) -> std::vector<LocalJacobian> {
   std::vector<std::vector<VertexId>> dims;
   int next = 0;
   for (std::size_t k = 0; k <= length; ++k) {
      std::vector<VertexId> layer;
      for (int n = 1 + static_cast<int>(rng() % 3); n > 0; --n) layer.push_back("u" + std::to_string(next++));
      dims.push_back(layer);
   }
   std::vector<LocalJacobian> chain;
   int label = 0;
   for (std::size_t k = 0; k < length; ++k) {
      LocalJacobian j{dims[k], dims[k + 1], {}};
      for (const auto& r : j.rows)
         for (const auto& c : j.cols) {
            auto roll = rng() % 6;
            if (roll < 2) continue;
            j.entries[{r, c}] = roll == 2 ? unit() : sym("a" + std::to_string(++label));
         }
      chain.push_back(j);
   }
   return chain;
}

}  // namespace testing_support

#endif  // OJACC_TESTS_SUPPORT_HPP_
