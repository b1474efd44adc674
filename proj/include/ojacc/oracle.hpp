#ifndef OJACC_ORACLE_HPP_
#define OJACC_ORACLE_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ojacc/expr.hpp"
#include "ojacc/graph.hpp"

namespace ojacc {

constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61) - 1;
constexpr double kFloatRelTol = 1e-9;

enum class OracleMode { Field, Float };

auto field_add(std::uint64_t a, std::uint64_t b) -> std::uint64_t;
auto field_mul(std::uint64_t a, std::uint64_t b) -> std::uint64_t;

// Both arithmetics are carried side by side; the mode only picks which one is compared.
struct Scalar {
   std::uint64_t f = 0;
   double d = 0.0;

   static auto one() -> Scalar { return {1, 1.0}; }
   static auto zero() -> Scalar { return {0, 0.0}; }
   auto operator+(const Scalar& o) const -> Scalar { return {field_add(f, o.f), d + o.d}; }
   auto operator*(const Scalar& o) const -> Scalar { return {field_mul(f, o.f), d * o.d}; }
};

struct Instantiation {
   std::uint64_t seed = 0;
   std::map<std::string, Scalar> values;

   auto value(const std::string& label) const -> Scalar;
};

auto instantiate(const std::set<std::string>& labels, std::uint64_t seed) -> Instantiation;

using VertexPair = std::pair<VertexId, VertexId>;
using PairValues = std::map<VertexPair, Scalar>;

auto eval_expr(const ExprPtr& e, const Instantiation& inst, const ExprSet* defs = nullptr) -> Scalar;
auto eval_exprset(const ExprSet& s, const Instantiation& inst) -> PairValues;
//! Bauer's formula by explicit path enumeration. Labels naming a definition in `defs` evaluate through it.
auto bauer_eval(const DiffGraph& g, const Instantiation& inst, const ExprSet* defs = nullptr,
                std::size_t guard = kDefaultPathGuard) -> PairValues;

struct Evaluatable {
   std::string name;
   std::set<std::string> labels;
   std::function<PairValues(const Instantiation&)> eval;
};

auto evaluatable(const DiffGraph& g, const std::string& name = "graph", std::size_t guard = kDefaultPathGuard)
    -> Evaluatable;
//! graph whose ref-labelled edges are defined in `defs`
auto evaluatable(const DiffGraph& g, const ExprSet& defs, const std::string& name = "graph",
                std::size_t guard = kDefaultPathGuard) -> Evaluatable;
auto evaluatable(const ExprSet& s, const std::string& name = "exprset") -> Evaluatable;

struct Mismatch {
   VertexPair pair;
   std::uint64_t seed = 0;
   std::string lhs;
   std::string rhs;
};

struct EquivReport {
   int trials = 0;
   OracleMode mode = OracleMode::Field;
   std::vector<Mismatch> mismatches;  //!< first failing trial of each pair

   auto ok() const -> bool { return mismatches.empty(); }
   auto to_json() const -> std::string;
};

//! Trial t uses seed + t. Throws a verification error when the two supports differ.
auto check_equiv(const Evaluatable& a, const Evaluatable& b, int trials = 100, std::uint64_t seed = 0,
                 OracleMode mode = OracleMode::Field) -> EquivReport;

}  // namespace ojacc

#endif  // OJACC_ORACLE_HPP_
