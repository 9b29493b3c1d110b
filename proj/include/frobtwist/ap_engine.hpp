#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "frobtwist/arith.hpp"
#include "frobtwist/curve.hpp"

namespace frobtwist {

enum class ReductionType { Good, SplitMultiplicative, NonsplitMultiplicative, Additive };

inline std::string_view to_string(ReductionType t) {
  switch (t) {
    case ReductionType::Good: return "good";
    case ReductionType::SplitMultiplicative: return "split_multiplicative";
    case ReductionType::NonsplitMultiplicative: return "nonsplit_multiplicative";
    case ReductionType::Additive: return "additive";
  }
  return "unknown";
}

namespace detail {

/// Weierstrass coefficients reduced into [0, p).
struct ReducedModel {
  std::int64_t p, a1, a2, a3, a4, a6;

  ReducedModel(const WeierstrassCoeffs& c, std::int64_t prime)
      : p(prime),
        a1(reduce_mod(c.a1, prime)),
        a2(reduce_mod(c.a2, prime)),
        a3(reduce_mod(c.a3, prime)),
        a4(reduce_mod(c.a4, prime)),
        a6(reduce_mod(c.a6, prime)) {}

  std::int64_t m(std::int64_t v) const { return reduce_mod(v, p); }

  std::int64_t b2() const { return m(a1 * a1 + 4 * a2); }
  std::int64_t b4() const { return m(a1 * a3 + 2 * a4); }
  std::int64_t b6() const { return m(a3 * a3 + 4 * a6); }
  std::int64_t b8() const {
    return m(m(a1 * a1 % p * a6) + 4 * a2 * a6 - m(a1 * a3 % p * a4) + m(a2 * a3 % p * a3) - a4 * a4);
  }
  std::int64_t discriminant() const {
    std::int64_t B2 = b2(), B4 = b4(), B6 = b6(), B8 = b8();
    std::int64_t t1 = m(m(B2 * B2) * B8);
    std::int64_t t2 = m(8 * m(m(B4 * B4) * B4));
    std::int64_t t3 = m(27 * m(B6 * B6));
    std::int64_t t4 = m(9 * m(m(B2 * B4) * B6));
    return m(-t1 - t2 - t3 + t4);
  }

  /// F(x, y) = y^2 + a1 xy + a3 y - x^3 - a2 x^2 - a4 x - a6 (mod p).
  std::int64_t eval(std::int64_t x, std::int64_t y) const {
    std::int64_t lhs = m(y * y + m(a1 * x) * y + a3 * y);
    std::int64_t rhs = m(m(m(x * x) * x) + m(a2 * m(x * x)) + a4 * x + a6);
    return m(lhs - rhs);
  }
  std::int64_t partial_x(std::int64_t x, std::int64_t y) const {
    return m(a1 * y - 3 * m(x * x) - 2 * a2 * x - a4);
  }
  std::int64_t partial_y(std::int64_t x, std::int64_t y) const { return m(2 * y + a1 * x + a3); }
};

inline std::int64_t enumerate_affine_points(const ReducedModel& e) {
  std::int64_t count = 0;
  for (std::int64_t x = 0; x < e.p; ++x)
    for (std::int64_t y = 0; y < e.p; ++y)
      if (e.eval(x, y) == 0) ++count;
  return count;
}

/// chi[v] = (v|p) for every residue v.
inline std::vector<std::int8_t> quadratic_character_table(std::int64_t p) {
  std::vector<std::int8_t> chi(static_cast<std::size_t>(p), -1);
  chi[0] = 0;
  for (std::int64_t y = 1; y <= p / 2; ++y) chi[static_cast<std::size_t>(y * y % p)] = 1;
  return chi;
}

struct SingularPoint {
  std::int64_t x, y;
};

inline SingularPoint find_singular_point(const ReducedModel& e) {
  if (e.p == 2) {
    for (std::int64_t x = 0; x < 2; ++x)
      for (std::int64_t y = 0; y < 2; ++y)
        if (e.eval(x, y) == 0 && e.partial_x(x, y) == 0 && e.partial_y(x, y) == 0) return {x, y};
  } else {
    const std::int64_t inv2 = (e.p + 1) / 2;
    for (std::int64_t x = 0; x < e.p; ++x) {
      std::int64_t y = e.m(-(e.a1 * x + e.a3) % e.p * inv2);
      if (e.eval(x, y) == 0 && e.partial_x(x, y) == 0) return {x, y};
    }
  }
  throw BadReduction("no singular point found mod " + std::to_string(e.p));
}

}  // namespace detail

/// Reduction type read off the supplied equation at p.
inline ReductionType classify_reduction(const WeierstrassCoeffs& coeffs, std::uint32_t p) {
  detail::ReducedModel e(coeffs, p);
  if (e.discriminant() != 0) return ReductionType::Good;
  auto [x0, y0] = detail::find_singular_point(e);
  // Tangent cone at the singular point: Y^2 + a1 XY - (3 x0 + a2) X^2.
  const std::int64_t c = e.m(-(3 * x0 + e.a2));
  int roots = 0;
  for (std::int64_t t = 0; t < e.p; ++t)
    if (e.m(t * t + e.a1 * t + c) == 0) ++roots;
  if (roots == 1) return ReductionType::Additive;
  return roots == 2 ? ReductionType::SplitMultiplicative : ReductionType::NonsplitMultiplicative;
}

/// |E(F_p)| including the point at infinity.
inline std::uint64_t count_points(const WeierstrassCoeffs& coeffs, std::uint32_t p) {
  detail::ReducedModel e(coeffs, p);
  if (e.discriminant() == 0)
    throw BadReduction("equation is singular mod " + std::to_string(p));
  if (p <= 3) return static_cast<std::uint64_t>(detail::enumerate_affine_points(e) + 1);

  // (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6
  const std::int64_t ip = p;
  const std::int64_t b2 = e.b2(), b4x2 = e.m(2 * e.b4()), b6 = e.b6();
  const auto chi = detail::quadratic_character_table(ip);
  std::int64_t sum = 0;
  for (std::int64_t x = 0; x < ip; ++x) {
    std::int64_t f = (4 * x + b2) % ip;
    f = (f * x + b4x2) % ip;
    f = (f * x + b6) % ip;
    sum += chi[static_cast<std::size_t>(f)];
  }
  return static_cast<std::uint64_t>(ip + 1 + sum);
}

inline std::uint64_t count_points(const CurveRecord& curve, std::uint32_t p) {
  if (!curve.ainvs) throw MissingData("count_points: " + curve.display_name() + " has no ainvs");
  return count_points(*curve.ainvs, p);
}

struct LocalTrace {
  std::uint32_t p;
  std::int32_t ap;
  ReductionType type;
};

/// a_p together with the reduction type. When the record carries a conductor
/// it decides good versus bad; the equation decides the kind of bad reduction.
inline LocalTrace local_trace(const CurveRecord& curve, std::uint32_t p) {
  if (!curve.ainvs) throw MissingData("trace_of_frobenius: " + curve.display_name() + " has no ainvs");
  const ReductionType model_type = classify_reduction(*curve.ainvs, p);
  if (curve.conductor) {
    const bool bad = *curve.conductor % p == 0;
    if (!bad && model_type != ReductionType::Good)
      throw ModelMismatch(curve.display_name() + ": equation is not minimal at good prime " + std::to_string(p));
    if (bad && model_type == ReductionType::Good)
      throw ModelMismatch(curve.display_name() + ": conductor divisible by " + std::to_string(p) +
                          " but the equation is nonsingular there");
  }
  switch (model_type) {
    case ReductionType::Good: {
      auto n = static_cast<std::int64_t>(count_points(*curve.ainvs, p));
      return {p, static_cast<std::int32_t>(static_cast<std::int64_t>(p) + 1 - n), model_type};
    }
    case ReductionType::SplitMultiplicative: return {p, 1, model_type};
    case ReductionType::NonsplitMultiplicative: return {p, -1, model_type};
    case ReductionType::Additive: return {p, 0, model_type};
  }
  return {p, 0, model_type};
}

inline std::int32_t trace_of_frobenius(const CurveRecord& curve, std::uint32_t p) {
  return local_trace(curve, p).ap;
}

inline std::vector<LocalTrace> local_traces(const CurveRecord& curve, std::uint32_t bound) {
  if (bound < 2) throw std::invalid_argument("bound must be >= 2");
  std::vector<LocalTrace> out;
  for (std::uint32_t p : prime_list(bound)) out.push_back(local_trace(curve, p));
  return out;
}

inline TraceTable build_trace_table(const CurveRecord& curve, std::uint32_t bound) {
  if (bound < 2) throw std::invalid_argument("bound must be >= 2");
  std::vector<std::int32_t> values;
  values.reserve(prime_list(bound).size());
  for (std::uint32_t p : prime_list(bound)) values.push_back(trace_of_frobenius(curve, p));
  return TraceTable(bound, std::move(values));
}

/// The twist y^2 = x^3 + A d^2 x + B d^3 of a short model y^2 = x^3 + A x + B.
/// Curves not already in short form are first moved to y^2 = x^3 - 27 c4 x - 54 c6,
/// which is integral and isomorphic away from 2 and 3. The conductor of the
/// result is left unknown.
inline CurveRecord quadratic_twist(const CurveRecord& curve, std::int64_t d) {
  if (!curve.ainvs) throw MissingData("quadratic_twist: " + curve.display_name() + " has no ainvs");
  if (!is_squarefree(d)) throw NonSquarefree("twist parameter " + std::to_string(d) + " is not squarefree");
  if (d == 1) return curve;

  const auto& c = *curve.ainvs;
  BigInt A, B;
  if (c.a1 == 0 && c.a2 == 0 && c.a3 == 0) {
    A = c.a4;
    B = c.a6;
  } else {
    A = -27 * c.c4();
    B = -54 * c.c6();
  }
  const BigInt dd = d;
  CurveRecord out;
  if (curve.label) out.label = *curve.label + "^(" + std::to_string(d) + ")";
  out.ainvs = WeierstrassCoeffs{0, 0, 0, A * dd * dd, B * dd * dd * dd};
  return out;
}

}  // namespace frobtwist
