#pragma once

#include "rieszlab/gauge.hpp"

namespace rieszlab {

// Query for the critical content scale M solving
//   kappa^2 int_{1/N}^1 [t / h^{-1}(Mt)^s]^2 dt/t = 1,
// with lower limit 0 when N is infinite (allowed only for gauges whose
// finiteness test converges).  N is treated as a positive real >= 2.
struct MhQuery {
  GaugeFunction h;
  double s;
  double kappa;
  double N;  // >= 2 or kInf
};

namespace detail {

inline void validate_mh(const MhQuery& q) {
  if (!(q.s > 0.0) || q.s >= double(q.h.dim()))
    throw std::invalid_argument("mh: need 0 < s < d");
  if (!(q.kappa > 0.0)) throw std::invalid_argument("mh: kappa must be positive");
  if (!(q.N >= 2.0)) throw std::invalid_argument("mh: N must be >= 2 (or infinite)");
}

inline double mh_integral(const MhQuery& q, double M, double quad_tol) {
  auto f = [&](double t) {
    double y = q.h.inverse(M * t);
    return sqr(t * inv_rpow(y, q.s)) / t;
  };
  if (std::isinf(q.N)) {
    auto r = integrate_down_to_zero(f, 1.0, quad_tol);
    if (!r.converged)
      throw std::runtime_error("solve_mh: integral divergent at the origin (condition (4.5) fails)");
    return r.value;
  }
  return integrate(f, 1.0 / q.N, 1.0, quad_tol);
}

}  // namespace detail

// Solves the defining equation to |F(M)-1| <= tol by bisection on log M and
// verifies that F is decreasing through the solution.
inline double solve_mh(const MhQuery& q, double tol = 1e-10) {
  detail::validate_mh(q);
  if (!(tol > 0.0) || tol > 1e-3) throw std::invalid_argument("solve_mh: tol must be in (0, 1e-3]");
  if (std::isinf(q.N) && !finiteness_test(q.h, q.s, 1.0).finite)
    throw std::runtime_error("solve_mh: gauge fails the finiteness condition for N = infinity");
  const double quad_tol = std::clamp(tol * 1e-2, 1e-14, 1e-10);
  auto F = [&](double M) { return sqr(q.kappa) * detail::mh_integral(q, M, quad_tol); };
  double M;
  try {
    M = bisect_log_decreasing(F, 1.0, 1.0, 1e-15, tol * 0.5);
  } catch (const std::runtime_error&) {
    throw std::runtime_error("solve_mh: root not bracketable (check the gauge inverse)");
  }
  double up = F(M * (1.0 + 1e-3)), dn = F(M * (1.0 - 1e-3)), mid = F(M);
  if (!(up < mid && mid < dn))
    throw std::runtime_error("solve_mh: F is not decreasing at the solution");
  return M;
}

// Closed form for h(t) = t^beta:
//   M = [kappa^2 (1 - N^{-a}) / a]^{beta/(2s)},  a = 2 - 2 s/beta,
// with the a -> 0 limit kappa^{beta/s} (ln N)^{beta/(2s)}.
inline double power_gauge_mh(double beta, double s, double kappa, double N) {
  if (!(beta > 0.0) || !(s > 0.0) || !(kappa > 0.0))
    throw std::invalid_argument("power_gauge_mh: beta, s, kappa must be positive");
  if (!(N >= 2.0)) throw std::invalid_argument("power_gauge_mh: N must be >= 2 (or infinite)");
  const double a = 2.0 - 2.0 * s / beta;
  double X;
  if (std::isinf(N)) {
    if (!(beta > s)) throw std::runtime_error("power_gauge_mh: divergent for beta <= s with N infinite");
    X = 1.0 / a;
  } else if (a == 0.0) {
    X = std::log(N);
  } else {
    X = -std::expm1(-a * std::log(N)) / a;
  }
  return std::pow(sqr(kappa) * X, beta / (2.0 * s));
}

// Empirical doubling quotient  M_h(2 kappa, 2N) / M_h(kappa, N); bounded by a
// constant depending only on (s, d) and reported for constant fitting.
inline double doubling_ratio(const GaugeFunction& h, double s, double kappa, double N,
                             double tol = 1e-10) {
  if (!(N >= 2.0) || std::isinf(N)) throw std::invalid_argument("doubling_ratio: need finite N >= 2");
  double num = solve_mh(MhQuery{h, s, 2.0 * kappa, 2.0 * N}, tol);
  double den = solve_mh(MhQuery{h, s, kappa, N}, tol);
  return num / den;
}

}  // namespace rieszlab
