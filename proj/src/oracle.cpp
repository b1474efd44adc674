#include "ojacc/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include <json.hpp>

#include "ojacc/error.hpp"

namespace ojacc {

auto field_add(std::uint64_t a, std::uint64_t b) -> std::uint64_t {
   auto s = a + b;  // both < 2^61, no overflow
   return s >= kPrime ? s - kPrime : s;
}

auto field_mul(std::uint64_t a, std::uint64_t b) -> std::uint64_t {
   auto p = static_cast<unsigned __int128>(a) * b;
   auto lo = static_cast<std::uint64_t>(p & kPrime);
   auto hi = static_cast<std::uint64_t>(p >> 61);
   return field_add(lo, hi);
}

auto Instantiation::value(const std::string& label) const -> Scalar {
   if (label == "1") return Scalar::one();
   auto it = values.find(label);
   if (it == values.end()) throw usage_error("label '" + label + "' has no value");
   return it->second;
}

auto instantiate(const std::set<std::string>& labels, std::uint64_t seed) -> Instantiation {
   Instantiation inst;
   inst.seed = seed;
   std::mt19937_64 rng(seed);
   std::uniform_int_distribution<std::uint64_t> fd(2, kPrime - 2);
   std::uniform_real_distribution<double> dd(0.5, 2.0);
   for (const auto& l : labels) {
      if (l == "1") continue;
      auto f = fd(rng);
      auto d = dd(rng);
      inst.values[l] = Scalar{f, d};
   }
   return inst;
}

auto eval_expr(const ExprPtr& e, const Instantiation& inst, const ExprSet* defs) -> Scalar {
   std::map<std::string, Scalar> memo;
   std::set<std::string> active;
   auto go = [&](auto&& self, const ExprPtr& x) -> Scalar {
      switch (x->kind) {
         case ExprKind::Unit:
            return Scalar::one();
         case ExprKind::Sym:
            if (defs && !inst.values.count(x->name) && defs->find_def(x->name)) break;
            return inst.value(x->name);
         case ExprKind::Prod: {
            auto v = Scalar::one();
            for (const auto& k : x->kids) v = v * self(self, k);
            return v;
         }
         case ExprKind::Sum: {
            auto v = Scalar::zero();
            for (const auto& k : x->kids) v = v + self(self, k);
            return v;
         }
         case ExprKind::Ref:
            break;
      }
      if (auto it = memo.find(x->name); it != memo.end()) return it->second;
      const RefDef* d = defs ? defs->find_def(x->name) : nullptr;
      if (!d) throw usage_error("unresolved reference '" + x->name + "'");
      if (!active.insert(x->name).second) throw cycle_error("cyclic reference through '" + x->name + "'");
      auto v = self(self, d->def);
      active.erase(x->name);
      return memo[x->name] = v;
   };
   return go(go, e);
}

auto eval_exprset(const ExprSet& s, const Instantiation& inst) -> PairValues {
   PairValues out;
   for (const auto& e : s.entries) {
      auto v = eval_expr(e.expr, inst, &s);
      auto [it, fresh] = out.emplace(VertexPair{e.root, e.terminal}, v);
      if (!fresh) it->second = it->second + v;
   }
   return out;
}

auto bauer_eval(const DiffGraph& g, const Instantiation& inst, const ExprSet* defs, std::size_t guard)
    -> PairValues {
   std::map<std::string, Scalar> label_value;
   for (const auto& e : g.edges())
      if (!label_value.count(e.label)) label_value[e.label] = eval_expr(sym(e.label), inst, defs);
   PairValues out;
   std::size_t budget = guard;
   for (const auto& y : g.roots())
      for (const auto& x : g.terminals()) {
         auto paths = enumerate_paths(g, y, x, budget);
         budget -= paths.size();
         if (paths.empty()) continue;
         auto total = Scalar::zero();
         for (const auto& p : paths) {
            auto v = Scalar::one();
            for (const auto& id : p) v = v * label_value.at(g.edge(id).label);
            total = total + v;
         }
         out[{y, x}] = total;
      }
   return out;
}

namespace {

auto graph_labels(const DiffGraph& g, const ExprSet* defs) -> std::set<std::string> {
   std::set<std::string> out;
   for (const auto& e : g.edges()) {
      if (e.unit()) continue;
      if (defs && defs->find_def(e.label)) {
         auto s = symbols(expand(ref(e.label), *defs));
         out.insert(s.begin(), s.end());
      } else {
         out.insert(e.label);
      }
   }
   return out;
}

auto render(const Scalar& v, OracleMode mode) -> std::string {
   if (mode == OracleMode::Field) return std::to_string(v.f);
   char buf[64];
   std::snprintf(buf, sizeof buf, "%.17g", v.d);
   return buf;
}

auto same(const Scalar& a, const Scalar& b, OracleMode mode) -> bool {
   if (mode == OracleMode::Field) return a.f == b.f;
   return std::fabs(a.d - b.d) <= kFloatRelTol * std::max(std::fabs(a.d), std::fabs(b.d));
}

}  // namespace

auto evaluatable(const DiffGraph& g, const std::string& name, std::size_t guard) -> Evaluatable {
   return {name, graph_labels(g, nullptr), [g, guard](const Instantiation& i) { return bauer_eval(g, i, nullptr, guard); }};
}

auto evaluatable(const DiffGraph& g, const ExprSet& defs, const std::string& name, std::size_t guard) -> Evaluatable {
   return {name, graph_labels(g, &defs),
           [g, defs, guard](const Instantiation& i) { return bauer_eval(g, i, &defs, guard); }};
}

auto evaluatable(const ExprSet& s, const std::string& name) -> Evaluatable {
   std::set<std::string> labels;
   for (const auto& e : s.entries) {
      auto x = symbols(expand(e.expr, s));
      labels.insert(x.begin(), x.end());
   }
   return {name, labels, [s](const Instantiation& i) { return eval_exprset(s, i); }};
}

auto EquivReport::to_json() const -> std::string {
   nlohmann::ordered_json j;
   j["trials"] = trials;
   j["mode"] = mode == OracleMode::Field ? "field" : "float";
   j["mismatches"] = nlohmann::json::array();
   for (const auto& m : mismatches)
      j["mismatches"].push_back(nlohmann::ordered_json{{"pair", {m.pair.first, m.pair.second}},
                                                       {"seed", m.seed},
                                                       {"lhs", m.lhs},
                                                       {"rhs", m.rhs}});
   return j.dump();
}

auto check_equiv(const Evaluatable& a, const Evaluatable& b, int trials, std::uint64_t seed, OracleMode mode)
    -> EquivReport {
   EquivReport rep;
   rep.trials = trials;
   rep.mode = mode;
   std::set<std::string> labels = a.labels;
   labels.insert(b.labels.begin(), b.labels.end());
   std::set<VertexPair> reported;  // first failing trial per pair is enough to reproduce it
   for (int t = 0; t < trials; ++t) {
      auto inst = instantiate(labels, seed + static_cast<std::uint64_t>(t));
      auto va = a.eval(inst);
      auto vb = b.eval(inst);
      for (const auto& [pair, _] : va)
         if (!vb.count(pair))
            throw verify_error("support mismatch: " + a.name + " has J[" + pair.first + "," + pair.second +
                               "] but " + b.name + " does not");
      for (const auto& [pair, _] : vb)
         if (!va.count(pair))
            throw verify_error("support mismatch: " + b.name + " has J[" + pair.first + "," + pair.second +
                               "] but " + a.name + " does not");
      for (const auto& [pair, x] : va) {
         const auto& y = vb.at(pair);
         if (!same(x, y, mode) && reported.insert(pair).second) rep.mismatches.push_back({pair, inst.seed, render(x, mode), render(y, mode)});
      }
   }
   return rep;
}

}  // namespace ojacc
