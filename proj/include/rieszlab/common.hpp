#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace rieszlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Compensated (Neumaier) summation.  Cancellation is the object of study in
// most of this library, so naive accumulation is never used for kernel sums.
// ---------------------------------------------------------------------------
class NeumaierSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double neumaier_total(std::span<const double> xs) {
  NeumaierSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

// ---------------------------------------------------------------------------
// r^{-a} for the handful of exponents the Riesz kernels use in hot loops.
// ---------------------------------------------------------------------------
inline double inv_rpow(double r, double a) {
  if (a == 1.0) return 1.0 / r;
  if (a == 2.0) return 1.0 / (r * r);
  if (a == 1.5) return 1.0 / (r * std::sqrt(r));
  if (a == 3.0) return 1.0 / (r * r * r);
  if (a == 2.5) return 1.0 / (r * r * std::sqrt(r));
  if (a == 0.5) return 1.0 / std::sqrt(r);
  return std::pow(r, -a);
}

inline double sqr(double x) { return x * x; }

inline double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += sqr(a[i] - b[i]);
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Counter-based random streams: splitmix64 over a hashed (seed, stream) key.
// Every consumer derives its own stream, so parallel evaluation order cannot
// change the draws.
// ---------------------------------------------------------------------------
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) : state_(seed) { (void)next_u64(); }
  RandomStream(uint64_t seed, uint64_t stream) {
    uint64_t s = seed;
    state_ = splitmix64(s) ^ (stream * 0xda942042e4dd58b5ull + 0x2545f4914f6cdd1dull);
    (void)next_u64();
  }

  uint64_t next_u64() { return splitmix64(state_); }
  // uniform in [0,1) with 53 random bits
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }
  uint64_t next_below(uint64_t n) { return next_u64() % n; }
  RandomStream fork(uint64_t stream) { return RandomStream(next_u64() ^ 0x6a09e667f3bcc909ull, stream); }

 private:
  uint64_t state_;
};

inline uint64_t hash_combine(uint64_t a, uint64_t b) {
  uint64_t s = a + 0x9e3779b97f4a7c15ull * (b + 1);
  return splitmix64(s);
}

// ---------------------------------------------------------------------------
// Gauss-Kronrod 7-15 adaptive quadrature.
// ---------------------------------------------------------------------------
namespace detail {
// abscissa, Gauss-7 weight, Kronrod-15 weight
inline constexpr double kGK[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0, 0.204432940075298},
    {0.586087235467691, 0.0, 0.169004726639267},
    {0.864864423359769, 0.0, 0.104790010322250},
    {0.991455371120813, 0.0, 0.022935322010529}};

template <class F>
inline double gk15(const F& f, double a, double b, double& err) {
  const double c = 0.5 * (a + b);
  const double hw = 0.5 * (b - a);
  double y0 = f(c);
  double g7 = kGK[0][1] * y0;
  double k15 = kGK[0][2] * y0;
  for (int i = 1; i < 8; ++i) {
    double dx = hw * kGK[i][0];
    double y = f(c + dx) + f(c - dx);
    g7 += kGK[i][1] * y;
    k15 += kGK[i][2] * y;
  }
  g7 *= hw;
  k15 *= hw;
  err = std::abs(g7 - k15);
  return k15;
}
}  // namespace detail

// Adaptive GK15 on [a,b].  Smoothness between caller-supplied breakpoints is
// assumed; interior kinks just cost extra subdivisions.  Segments whose error
// no longer improves under subdivision are frozen, so tolerances below the
// rounding floor terminate instead of exhausting the interval budget.
template <class F>
double integrate(const F& f, double a, double b, double rel_tol = 1e-12,
                 double abs_tol = 1e-300, int max_intervals = 4000) {
  if (!(a < b)) return 0.0;
  rel_tol = std::max(rel_tol, 5e-15);
  struct Seg {
    double a, b, val, err;
    bool frozen;
  };
  std::vector<Seg> segs;
  double err0;
  double v0 = detail::gk15(f, a, b, err0);
  segs.push_back({a, b, v0, err0, false});
  NeumaierSum total;
  total.add(v0);
  int n = 1;
  while (true) {
    size_t worst = segs.size();
    for (size_t i = 0; i < segs.size(); ++i)
      if (!segs[i].frozen && (worst == segs.size() || segs[i].err > segs[worst].err)) worst = i;
    if (worst == segs.size()) break;  // everything frozen
    double tot = total.value();
    double errsum = 0.0;
    for (auto& sg : segs) errsum += sg.err;
    if (errsum <= std::max(abs_tol, rel_tol * std::abs(tot))) break;
    if (n >= max_intervals) break;
    Seg sg = segs[worst];
    segs.erase(segs.begin() + long(worst));
    double mid = 0.5 * (sg.a + sg.b);
    double e1, e2;
    double v1 = detail::gk15(f, sg.a, mid, e1);
    double v2 = detail::gk15(f, mid, sg.b, e2);
    total.add(v1 + v2 - sg.val);
    // stalling on a microscopic segment, or at the rounding floor: freeze
    bool stall = (e1 + e2 >= 0.99 * sg.err) && (mid - sg.a) < 1e-7 * (b - a);
    auto floor_hit = [&](double e, double v) { return e <= 64.0 * 2.2e-16 * std::abs(v); };
    segs.push_back({sg.a, mid, v1, e1, stall || floor_hit(e1, v1)});
    segs.push_back({mid, sg.b, v2, e2, stall || floor_hit(e2, v2)});
    n += 1;
  }
  return total.value();
}

// Integrate with known interior breakpoints (integrand smooth between them).
template <class F>
double integrate_piecewise(const F& f, std::vector<double> brk, double rel_tol = 1e-12) {
  std::sort(brk.begin(), brk.end());
  brk.erase(std::unique(brk.begin(), brk.end()), brk.end());
  NeumaierSum total;
  for (size_t i = 0; i + 1 < brk.size(); ++i)
    if (brk[i + 1] > brk[i]) total.add(integrate(f, brk[i], brk[i + 1], rel_tol));
  return total.value();
}

struct TailSumResult {
  double value = 0.0;
  bool converged = false;
  int blocks = 0;
};

// Sum of integral f over (0, b]:  dyadic blocks [b 2^{-k-1}, b 2^{-k}] walked
// downward until the running tail is negligible.  Divergence (blocks failing
// to decay) is a reportable outcome, not an error.
template <class F>
TailSumResult integrate_down_to_zero(const F& f, double b, double rel_tol = 1e-12,
                                     int max_blocks = 4096) {
  TailSumResult out;
  NeumaierSum total;
  double hi = b;
  double prev = kInf;
  int stall = 0;
  for (int k = 0; k < max_blocks; ++k) {
    double lo = 0.5 * hi;
    // deep blocks only need absolute accuracy relative to the running total
    double abs_tol = rel_tol * 0.05 * (std::abs(total.value()) + 1e-300);
    double blk = integrate(f, lo, hi, rel_tol * 0.1, abs_tol, 240);
    total.add(blk);
    out.blocks = k + 1;
    double tot = std::abs(total.value());
    double ablk = std::abs(blk);
    if (ablk <= rel_tol * std::max(tot, 1e-300)) {
      // geometric tail correction from the observed decay ratio
      double rho = (prev > 0 && std::isfinite(prev)) ? ablk / prev : 0.0;
      if (rho > 0.0 && rho < 0.95) total.add(blk * rho / (1.0 - rho));
      out.value = total.value();
      out.converged = true;
      return out;
    }
    // decay watch: a non-decaying block sequence over many octaves diverges
    if (std::isfinite(prev) && ablk > 0.9 * prev && ablk > rel_tol * tot)
      ++stall;
    else
      stall = 0;
    if (stall > 80 || !std::isfinite(tot)) {
      out.value = total.value();
      out.converged = false;
      return out;
    }
    prev = ablk;
    hi = lo;
  }
  out.value = total.value();
  out.converged = false;
  return out;
}

// ---------------------------------------------------------------------------
// Bisection for monotone equations, on a log abscissa.
// ---------------------------------------------------------------------------
template <class F>
double bisect_log_decreasing(const F& f, double target, double x0, double rel_tol,
                             double value_tol, int max_expand = 420) {
  double lo = x0, hi = x0;
  double flo = f(lo);
  if (flo == target) return lo;
  if (flo > target) {
    // walk up until f < target
    double fhi = flo;
    for (int i = 0; i < max_expand && fhi > target; ++i) {
      hi *= 4.0;
      fhi = f(hi);
    }
    if (fhi > target) throw std::runtime_error("bisect: root not bracketable from above");
  } else {
    double f2 = flo;
    for (int i = 0; i < max_expand && f2 < target; ++i) {
      lo *= 0.25;
      f2 = f(lo);
    }
    if (f2 < target) throw std::runtime_error("bisect: root not bracketable from below");
  }
  double mid = std::sqrt(lo * hi);
  for (int it = 0; it < 400; ++it) {
    mid = std::sqrt(lo * hi);
    double fm = f(mid);
    if (std::abs(fm - target) <= value_tol) return mid;
    if (fm > target)
      lo = mid;
    else
      hi = mid;
    if (hi / lo - 1.0 < rel_tol) return std::sqrt(lo * hi);
  }
  return mid;
}

// ---------------------------------------------------------------------------
// Fixed Gauss-Legendre rules for per-cube quadratures.
// ---------------------------------------------------------------------------
inline const std::vector<std::pair<double, double>>& gauss_legendre_8() {
  // nodes/weights on [-1,1]
  static const std::vector<std::pair<double, double>> nw = {
      {-0.9602898564975362, 0.1012285362903763}, {-0.7966664774136267, 0.2223810344533745},
      {-0.5255324099163290, 0.3137066458778873}, {-0.1834346424956498, 0.3626837833783620},
      {0.1834346424956498, 0.3626837833783620},  {0.5255324099163290, 0.3137066458778873},
      {0.7966664774136267, 0.2223810344533745},  {0.9602898564975362, 0.1012285362903763}};
  return nw;
}

// ---------------------------------------------------------------------------
// Deterministic parallel map: thread t owns indices t, t+T, ... and writes
// only its own slots, so results do not depend on scheduling.
// ---------------------------------------------------------------------------
template <class Fn>
void parallel_for(size_t n, const Fn& fn, unsigned max_threads = 0) {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  unsigned T = max_threads ? std::min(max_threads, hw) : hw;
  if (T <= 1 || n < 2 * T) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(T);
  for (unsigned t = 0; t < T; ++t)
    pool.emplace_back([&, t] {
      for (size_t i = t; i < n; i += T) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace rieszlab
