#include "ojacc/local_jacobian.hpp"

#include <algorithm>
#include <climits>
#include <functional>
#include <set>
#include <sstream>

#include "ojacc/convert.hpp"
#include "ojacc/error.hpp"
#include "ojacc/structure.hpp"

namespace ojacc {

auto LocalJacobian::at(const VertexId& r, const VertexId& c) const -> ExprPtr {
   auto it = entries.find({r, c});
   return it == entries.end() ? nullptr : it->second;
}

namespace {

// Vertices reachable from `start` without walking through a blocked vertex.
auto sweep(const DiffGraph& g, const VertexId& start, const std::set<VertexId>& blocked, bool forward)
    -> std::set<VertexId> {
   std::set<VertexId> seen{start};
   std::vector<VertexId> todo{start};
   while (!todo.empty()) {
      auto v = todo.back();
      todo.pop_back();
      if (v != start && blocked.count(v)) continue;
      for (auto i : forward ? g.out_edges(v) : g.in_edges(v)) {
         const auto& e = g.edges()[i];
         const auto& w = forward ? e.dst : e.src;
         if (seen.insert(w).second) todo.push_back(w);
      }
   }
   return seen;
}

}  // namespace

auto extract_local_jacobian(const DiffGraph& g, const std::vector<VertexId>& rows,
                            const std::vector<VertexId>& cols) -> LocalJacobian {
   std::set<VertexId> border(rows.begin(), rows.end());
   for (const auto& c : cols)
      if (!border.insert(c).second) throw usage_error("vertex '" + c + "' is both a row and a column");
   for (const auto& v : border)
      if (!g.has_vertex(v)) throw usage_error("unknown vertex '" + v + "'");
   for (const auto& c : cols) {
      auto d = descendants(g, c);
      for (const auto& r : rows)
         if (d.count(r)) throw usage_error("column '" + c + "' precedes row '" + r + "'");
   }
   LocalJacobian j{rows, cols, {}};
   for (const auto& r : rows) {
      auto fwd = sweep(g, r, border, true);
      for (const auto& c : cols) {
         if (!fwd.count(c)) continue;
         auto bwd = sweep(g, c, border, false);
         std::vector<std::size_t> idx;
         for (std::size_t i = 0; i < g.edges().size(); ++i) {
            const auto& e = g.edges()[i];
            bool from_ok = fwd.count(e.src) && (e.src == r || !border.count(e.src));
            bool to_ok = bwd.count(e.dst) && (e.dst == c || !border.count(e.dst));
            if (from_ok && to_ok) idx.push_back(i);
         }
         if (idx.empty()) continue;
         j.entries[{r, c}] = graph_to_expr(subgraph(g, idx), r, c);
      }
   }
   return j;
}

auto level_chain(const DiffGraph& g) -> std::vector<LocalJacobian> {
   auto s = segment_cross_level(g);
   auto li = depth_levels(s);
   std::vector<std::vector<VertexId>> by_level(static_cast<std::size_t>(li.depth) + 1);
   for (const auto& [v, l] : li.level) by_level[static_cast<std::size_t>(l)].push_back(v);
   std::vector<LocalJacobian> chain;
   for (std::size_t k = 0; k + 1 < by_level.size(); ++k)
      chain.push_back(extract_local_jacobian(s, by_level[k], by_level[k + 1]));
   return chain;
}

auto format_local_jacobian(const LocalJacobian& j) -> std::string {
   std::ostringstream out;
   out << "J";
   for (const auto& r : j.rows) out << ' ' << r;
   out << " |";
   for (const auto& c : j.cols) out << ' ' << c;
   out << '\n';
   for (const auto& r : j.rows)
      for (const auto& c : j.cols)
         if (auto e = j.at(r, c)) out << "entry " << r << ' ' << c << " = " << format_expr(e) << '\n';
   return out.str();
}

auto parse_assoc(const std::string& text, std::size_t n) -> Assoc {
   std::size_t pos = 0;
   int next = 0;
   std::function<Assoc()> seq;
   auto item = [&]() -> Assoc {
      while (pos < text.size() && text[pos] == ' ') ++pos;
      if (pos >= text.size()) throw parse_error("association ends early");
      if (text[pos] == '(') {
         ++pos;
         auto a = seq();
         if (pos >= text.size() || text[pos] != ')') throw parse_error("missing ')' at position " + std::to_string(pos));
         ++pos;
         return a;
      }
      char ch = text[pos];
      if (ch < 'A' || ch > 'Z') throw parse_error("unexpected '" + std::string(1, ch) + "' at position " + std::to_string(pos));
      if (ch - 'A' != next) throw usage_error("association must name factors in chain order");
      ++pos;
      return Assoc{next++, {}};
   };
   seq = [&]() -> Assoc {
      auto acc = item();
      for (;;) {
         while (pos < text.size() && text[pos] == ' ') ++pos;
         if (pos >= text.size() || text[pos] == ')') return acc;
         acc = Assoc{-1, {acc, item()}};
      }
   };
   auto a = seq();
   if (pos != text.size()) throw parse_error("unexpected ')' at position " + std::to_string(pos));
   if (static_cast<std::size_t>(next) != n)
      throw usage_error("association covers " + std::to_string(next) + " factors, chain has " + std::to_string(n));
   return a;
}

auto format_assoc(const Assoc& a) -> std::string {
   if (a.kids.empty()) return std::string(1, static_cast<char>('A' + a.leaf));
   auto part = [](const Assoc& k) { return k.kids.empty() ? format_assoc(k) : "(" + format_assoc(k) + ")"; };
   return part(a.kids[0]) + part(a.kids[1]);
}

auto left_to_right(std::size_t n) -> Assoc {
   Assoc a{0, {}};
   for (std::size_t i = 1; i < n; ++i) a = Assoc{-1, {a, Assoc{static_cast<int>(i), {}}}};
   return a;
}

auto right_to_left(std::size_t n) -> Assoc {
   Assoc a{static_cast<int>(n) - 1, {}};
   for (auto i = static_cast<int>(n) - 2; i >= 0; --i) a = Assoc{-1, {Assoc{i, {}}, a}};
   return a;
}

auto all_assocs(int lo, int hi) -> std::vector<Assoc> {
   if (lo == hi) return {Assoc{lo, {}}};
   std::vector<Assoc> out;
   for (int k = lo; k < hi; ++k)
      for (const auto& l : all_assocs(lo, k))
         for (const auto& r : all_assocs(k + 1, hi)) out.push_back(Assoc{-1, {l, r}});
   return out;
}

namespace {

void check_chain(const std::vector<LocalJacobian>& chain) {
   if (chain.empty()) throw usage_error("empty chain");
   for (std::size_t k = 0; k + 1 < chain.size(); ++k)
      if (chain[k].cols != chain[k + 1].rows)
         throw usage_error("factors " + std::to_string(k) + " and " + std::to_string(k + 1) + " are not conformable");
}

auto atomic(const ExprPtr& e) -> bool { return e->kids.empty(); }

// Entry matrices carrying temporaries "%k" for composite intermediate values.
struct Symbolic {
   std::vector<VertexId> rows;
   std::vector<VertexId> cols;
   std::map<std::pair<VertexId, VertexId>, ExprPtr> entries;
};

}  // namespace

auto accumulate(const std::vector<LocalJacobian>& chain, const Assoc& order) -> Accumulation {
   check_chain(chain);
   std::vector<RefDef> temps;
   auto hold = [&](const ExprPtr& e) -> ExprPtr {
      if (atomic(e)) return e;
      auto name = "%" + std::to_string(temps.size());
      temps.push_back({name, e});
      return ojacc::ref(name);
   };
   std::function<Symbolic(const Assoc&, bool)> eval = [&](const Assoc& a, bool top) -> Symbolic {
      if (a.kids.empty()) {
         if (a.leaf < 0 || static_cast<std::size_t>(a.leaf) >= chain.size()) throw usage_error("association names a missing factor");
         const auto& j = chain[static_cast<std::size_t>(a.leaf)];
         Symbolic s{j.rows, j.cols, {}};
         for (const auto& [k, e] : j.entries) s.entries[k] = top ? e : hold(e);
         return s;
      }
      auto x = eval(a.kids[0], false);
      auto y = eval(a.kids[1], false);
      Symbolic z{x.rows, y.cols, {}};
      for (const auto& r : x.rows)
         for (const auto& c : y.cols) {
            std::vector<ExprPtr> terms;
            for (const auto& m : x.cols) {
               auto xi = x.entries.find({r, m});
               auto yi = y.entries.find({m, c});
               if (xi == x.entries.end() || yi == y.entries.end()) continue;
               terms.push_back(prod({xi->second, yi->second}));
            }
            if (terms.empty()) continue;
            auto e = sum(terms);
            z.entries[{r, c}] = top ? e : hold(e);
         }
      return z;
   };
   auto full = eval(order, true);

   ExprSet out;
   out.defs = temps;
   for (const auto& r : full.rows)
      for (const auto& c : full.cols)
         if (auto it = full.entries.find({r, c}); it != full.entries.end()) out.entries.push_back({r, c, it->second});

   // drop temporaries no entry depends on, inline those used once, keep the rest as references
   std::map<std::string, const RefDef*> by_name;
   for (const auto& d : out.defs) by_name[d.name] = &d;
   std::set<std::string> live;
   std::function<void(const ExprPtr&)> mark = [&](const ExprPtr& e) {
      if (e->kind == ExprKind::Ref && live.insert(e->name).second) mark(by_name.at(e->name)->def);
      for (const auto& k : e->kids) mark(k);
   };
   for (const auto& e : out.entries) mark(e.expr);
   std::map<std::string, int> uses;
   std::function<void(const ExprPtr&)> count = [&](const ExprPtr& e) {
      if (e->kind == ExprKind::Ref) ++uses[e->name];
      for (const auto& k : e->kids) count(k);
   };
   for (const auto& d : out.defs)
      if (live.count(d.name)) count(d.def);
   for (const auto& e : out.entries) count(e.expr);
   std::map<std::string, ExprPtr> inline_map;
   std::vector<RefDef> kept;
   for (const auto& d : out.defs) {
      if (!live.count(d.name)) continue;
      auto def = substitute(d.def, inline_map);
      if (uses[d.name] <= 1)
         inline_map[d.name] = def;
      else
         kept.push_back({d.name, def});
   }
   for (auto& e : out.entries) e.expr = substitute(e.expr, inline_map);
   out.defs = kept;

   std::set<std::string> taken;
   for (const auto& j : chain)
      for (const auto& [k, e] : j.entries) {
         auto s = symbols(e);
         taken.insert(s.begin(), s.end());
         auto r = ref_names(e);
         taken.insert(r.begin(), r.end());
      }
   std::map<std::string, ExprPtr> rename;
   int n = 1;
   for (auto& d : out.defs) {
      std::string name;
      do {
         name = "s" + std::to_string(n++);
      } while (taken.count(name));
      rename[d.name] = ojacc::ref(name);
      d.name = name;
   }
   for (auto& d : out.defs) d.def = substitute(d.def, rename);
   for (auto& e : out.entries) e.expr = substitute(e.expr, rename);
   return {out, fma_cost(out)};
}

namespace {

// Structural pattern of an interval product: nonzero entries, and whether each is a bare unit.
using Pattern = std::map<std::pair<VertexId, VertexId>, bool>;

struct PatternProduct {
   Pattern pattern;
   int mults = 0;
};

auto multiply(const Pattern& x, const Pattern& y) -> PatternProduct {
   std::map<VertexId, std::vector<std::pair<VertexId, bool>>> y_rows;
   for (const auto& [k, u] : y) y_rows[k.first].push_back({k.second, u});
   std::map<std::pair<VertexId, VertexId>, std::pair<int, bool>> acc;
   PatternProduct out;
   for (const auto& [k, xu] : x) {
      auto it = y_rows.find(k.second);
      if (it == y_rows.end()) continue;
      for (const auto& [c, yu] : it->second) {
         auto& slot = acc[{k.first, c}];
         ++slot.first;
         slot.second = xu && yu;
         if (!xu && !yu) ++out.mults;
      }
   }
   for (const auto& [k, v] : acc) out.pattern[k] = v.first == 1 && v.second;
   return out;
}

// Entries that no path from the first rows to the last columns uses never get computed.
auto live_patterns(const std::vector<LocalJacobian>& chain) -> std::vector<Pattern> {
   auto n = chain.size();
   std::vector<std::set<VertexId>> fwd(n + 1), bwd(n + 1);
   fwd[0] = {chain[0].rows.begin(), chain[0].rows.end()};
   for (std::size_t k = 0; k < n; ++k)
      for (const auto& [rc, e] : chain[k].entries)
         if (fwd[k].count(rc.first)) fwd[k + 1].insert(rc.second);
   bwd[n] = {chain[n - 1].cols.begin(), chain[n - 1].cols.end()};
   for (auto k = n; k-- > 0;)
      for (const auto& [rc, e] : chain[k].entries)
         if (bwd[k + 1].count(rc.second)) bwd[k].insert(rc.first);
   std::vector<Pattern> out(n);
   for (std::size_t k = 0; k < n; ++k)
      for (const auto& [rc, e] : chain[k].entries)
         if (fwd[k].count(rc.first) && bwd[k + 1].count(rc.second)) out[k][rc] = e->kind == ExprKind::Unit;
   return out;
}

}  // namespace

auto best_accumulation_order(const std::vector<LocalJacobian>& chain, std::size_t bound) -> BestOrder {
   check_chain(chain);
   if (chain.size() > bound)
      throw guard_error("chain of " + std::to_string(chain.size()) + " factors exceeds the bound " + std::to_string(bound));
   auto n = chain.size();
   int base = 0;
   std::vector<std::vector<Pattern>> pat(n, std::vector<Pattern>(n));
   auto live = live_patterns(chain);
   for (std::size_t i = 0; i < n; ++i) {
      pat[i][i] = live[i];
      for (const auto& [k, u] : live[i]) base += expr_cost(chain[i].entries.at(k));
   }
   for (std::size_t len = 2; len <= n; ++len)
      for (std::size_t i = 0; i + len <= n; ++i) pat[i][i + len - 1] = multiply(pat[i][i], pat[i + 1][i + len - 1]).pattern;

   std::vector<std::vector<int>> cost(n, std::vector<int>(n, 0));
   std::vector<std::vector<std::size_t>> split(n, std::vector<std::size_t>(n, 0));
   for (std::size_t len = 2; len <= n; ++len)
      for (std::size_t i = 0; i + len <= n; ++i) {
         auto j = i + len - 1;
         cost[i][j] = INT_MAX;
         for (auto k = i; k < j; ++k) {
            auto c = cost[i][k] + cost[k + 1][j] + multiply(pat[i][k], pat[k + 1][j]).mults;
            if (c < cost[i][j]) {
               cost[i][j] = c;
               split[i][j] = k;
            }
         }
      }
   std::function<Assoc(std::size_t, std::size_t)> build = [&](std::size_t i, std::size_t j) -> Assoc {
      if (i == j) return Assoc{static_cast<int>(i), {}};
      auto k = split[i][j];
      return Assoc{-1, {build(i, k), build(k + 1, j)}};
   };
   return {build(0, n - 1), base + cost[0][n - 1]};
}

}  // namespace ojacc
