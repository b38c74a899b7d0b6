#pragma once

#include <memory>
#include <optional>

#include "rieszlab/common.hpp"

namespace rieszlab {

enum class GaugeKind { power, table, composite };

// A measuring function h: continuous, strictly increasing, h(0)=0, h(r)->inf,
// with h(r)/r^d non-increasing.  Instances are immutable; evaluation and
// inversion are pure, so gauges can be shared freely across threads.
//
// Representations: closed-form power laws t^beta (beta <= d), monotone tables
// interpolated piecewise-linearly in log-log coordinates (segments are exact
// power laws, so inversion is analytic), and the piecewise composite produced
// by truncation.
class GaugeFunction {
 public:
  double operator()(double t) const { return eval_impl(*impl_, t); }
  double inverse(double u) const { return inv_impl(*impl_, u); }
  int dim() const { return impl_->d; }
  GaugeKind kind() const { return impl_->kind; }
  const std::string& id() const { return impl_->id; }
  // Regularization floor t_min when this gauge came out of regularize_gauge;
  // 0 otherwise.  Flagged in run metadata because the behaviour of the
  // running-infimum construction below t_min is a library choice.
  double regularization_floor() const { return impl_->reg_floor; }
  double power_exponent() const {
    if (impl_->kind != GaugeKind::power) throw std::logic_error("gauge: not a power gauge");
    return impl_->beta;
  }

  static GaugeFunction power(double beta, int d) {
    if (d < 1) throw std::invalid_argument("gauge: dimension must be positive");
    if (!(beta > 0.0) || beta > double(d) + 1e-12)
      throw std::invalid_argument("gauge: power exponent must satisfy 0 < beta <= d");
    auto impl = std::make_shared<Impl>();
    impl->kind = GaugeKind::power;
    impl->d = d;
    impl->beta = beta;
    impl->id = "power:" + format_num(beta);
    return GaugeFunction(std::move(impl));
  }

  // points: {t_i, h_i}, strictly increasing in both coordinates, all positive.
  static GaugeFunction table(std::vector<std::pair<double, double>> pts, int d,
                             double reg_floor = 0.0, std::string id = "") {
    if (d < 1) throw std::invalid_argument("gauge: dimension must be positive");
    if (pts.size() < 2) throw std::invalid_argument("gauge: table needs at least two points");
    std::sort(pts.begin(), pts.end());
    auto impl = std::make_shared<Impl>();
    impl->kind = GaugeKind::table;
    impl->d = d;
    impl->reg_floor = reg_floor;
    double prev_ratio = kInf;
    for (auto& [t, h] : pts) {
      if (!(t > 0.0) || !(h > 0.0))
        throw std::invalid_argument("gauge: table points must be positive");
      if (!impl->log_t.empty()) {
        if (t <= std::exp(impl->log_t.back()))
          throw std::invalid_argument("gauge: table abscissae must be strictly increasing");
        if (h <= std::exp(impl->log_h.back())) continue;  // drop flat knots
      }
      double ratio = h / std::pow(t, double(d));
      if (ratio > prev_ratio * (1.0 + 1e-9))
        throw std::invalid_argument("gauge: h(t)/t^d must be non-increasing");
      prev_ratio = std::min(prev_ratio, ratio);
      impl->log_t.push_back(std::log(t));
      impl->log_h.push_back(std::log(h));
    }
    if (impl->log_t.size() < 2) throw std::invalid_argument("gauge: degenerate table");
    impl->id = id.empty() ? ("table:" + std::to_string(impl->log_t.size())) : std::move(id);
    return GaugeFunction(std::move(impl));
  }

  static GaugeFunction truncated(const GaugeFunction& base, double t1) {
    if (!(t1 > 0.0)) throw std::invalid_argument("gauge: truncation scale must be positive");
    auto impl = std::make_shared<Impl>();
    impl->kind = GaugeKind::composite;
    impl->d = base.dim();
    impl->base = base.impl_;
    impl->t1 = t1;
    impl->head_value = base(t1);
    impl->id = "trunc(" + base.id() + ";" + format_num(t1) + ")";
    return GaugeFunction(std::move(impl));
  }

 private:
  struct Impl {
    GaugeKind kind = GaugeKind::power;
    int d = 1;
    double beta = 1.0;                      // power
    std::vector<double> log_t, log_h;       // table knots
    std::shared_ptr<const Impl> base;       // composite
    double t1 = 0.0, head_value = 0.0;      // composite: h(t1)
    double reg_floor = 0.0;
    std::string id;
  };

  explicit GaugeFunction(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  static std::string format_num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", x);
    return buf;
  }

  static double eval_impl(const Impl& im, double t) {
    if (!(t > 0.0)) return 0.0;
    switch (im.kind) {
      case GaugeKind::power:
        return std::pow(t, im.beta);
      case GaugeKind::table: {
        double lt = std::log(t);
        return std::exp(table_interp(im.log_t, im.log_h, lt));
      }
      case GaugeKind::composite: {
        if (t >= im.t1) return eval_impl(*im.base, t);
        return std::pow(t / im.t1, double(im.d)) * im.head_value;
      }
    }
    return 0.0;
  }

  static double inv_impl(const Impl& im, double u) {
    if (!(u > 0.0)) return 0.0;
    switch (im.kind) {
      case GaugeKind::power:
        return std::pow(u, 1.0 / im.beta);
      case GaugeKind::table: {
        double lh = std::log(u);
        return std::exp(table_interp(im.log_h, im.log_t, lh));
      }
      case GaugeKind::composite: {
        if (u >= im.head_value) return inv_impl(*im.base, u);
        return im.t1 * std::pow(u / im.head_value, 1.0 / double(im.d));
      }
    }
    return 0.0;
  }

  // piecewise-linear interpolation with end-segment extrapolation
  static double table_interp(const std::vector<double>& xs, const std::vector<double>& ys,
                             double x) {
    size_t n = xs.size();
    size_t i;
    if (x <= xs.front())
      i = 0;
    else if (x >= xs[n - 2])
      i = n - 2;
    else
      i = size_t(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1;
    double slope = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
    return ys[i] + slope * (x - xs[i]);
  }

  std::shared_ptr<const Impl> impl_;
};

// Truncation at scale t1: t^d h(t1)/t1^d below t1, h itself above.
struct TruncatedGauge {
  GaugeFunction base;
  double t1;
  GaugeFunction gauge;  // the piecewise function, itself a valid gauge
};

inline TruncatedGauge truncate_gauge(const GaugeFunction& h, double t1) {
  if (!(t1 > 0.0)) throw std::invalid_argument("truncate_gauge: t1 must be positive");
  return TruncatedGauge{h, t1, GaugeFunction::truncated(h, t1)};
}

// Running-infimum regularization  h~(r) = r^d inf_{t_min<=t<=r} h(t)/t^d,
// sampled on a log grid and returned as a table gauge.  The floor t_min keeps
// the construction usable for inputs whose density ratio vanishes at 0; below
// t_min the first log-log segment is continued.
inline GaugeFunction regularize_gauge(const std::function<double(double)>& h_raw, int d,
                                      double t_min, double r_max, size_t grid = 1025) {
  if (!(t_min > 0.0)) throw std::invalid_argument("regularize_gauge: t_min must be positive");
  if (!(r_max > t_min)) throw std::invalid_argument("regularize_gauge: r_max must exceed t_min");
  std::vector<std::pair<double, double>> pts;
  pts.reserve(grid);
  double running = kInf;
  double prev_h = -kInf;
  const double llo = std::log(t_min), lhi = std::log(r_max);
  for (size_t k = 0; k < grid; ++k) {
    double t = std::exp(llo + (lhi - llo) * double(k) / double(grid - 1));
    double h = h_raw(t);
    if (!(h > 0.0) || !std::isfinite(h))
      throw std::invalid_argument("regularize_gauge: input must be positive on [t_min, r_max]");
    if (h < prev_h * (1.0 - 1e-12))
      throw std::invalid_argument("regularize_gauge: input must be increasing");
    prev_h = std::max(prev_h, h);
    running = std::min(running, h / std::pow(t, double(d)));
    pts.emplace_back(t, std::pow(t, double(d)) * running);
  }
  return GaugeFunction::table(std::move(pts), d, t_min, "regularized");
}

inline GaugeFunction regularize_gauge(const GaugeFunction& h, double t_min, double r_max) {
  if (h.kind() == GaugeKind::power) return h;  // ratio already non-increasing
  return regularize_gauge([&](double t) { return h(t); }, h.dim(), t_min, r_max);
}

struct FinitenessReport {
  bool finite = false;
  double value = 0.0;  // converged integral when finite
};

// Convergence test for  int_0^upper [h(t)/t^s]^2 dt/t  (condition for the
// N -> infinity content bound; for h=t^beta it holds iff beta > s).
inline FinitenessReport finiteness_test(const GaugeFunction& h, double s, double upper,
                                        double tol = 1e-10) {
  if (!(s > 0.0) || s >= double(h.dim()))
    throw std::invalid_argument("finiteness_test: need 0 < s < d");
  if (!(upper > 0.0)) throw std::invalid_argument("finiteness_test: upper must be positive");
  auto f = [&](double t) { return sqr(h(t) / std::pow(t, s)) / t; };
  auto r = integrate_down_to_zero(f, upper, std::max(tol, 1e-13));
  return FinitenessReport{r.converged, r.converged ? r.value : kInf};
}

}  // namespace rieszlab
