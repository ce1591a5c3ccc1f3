#pragma once

// Mollification of one-variable Lipschitz graphs, Clarke intervals, and
// smoothing of the lower boundary of an epigraph-shaped trapping domain.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "conefield/conley.hpp"

namespace conefield {

/// g sampled on a uniform grid of [lo, hi] (endpoints included). Between
/// samples g is read from `exact` when present, else linearly interpolated;
/// outside [lo, hi] it is extended linearly.
class LipschitzGraph {
 public:
  LipschitzGraph() = default;
  LipschitzGraph(double lo, double hi, std::vector<double> values,
                 std::function<double(double)> exact = nullptr)
      : lo_(lo), hi_(hi), values_(std::move(values)), exact_(std::move(exact)) {
    if (!(lo < hi) || values_.size() < 2) throw Error(ErrorCode::InvalidArgument, "need lo < hi and two samples");
    for (double v : values_)
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteSample, "graph sample is not finite");
    lip_ = 0.0;
    for (std::size_t i = 0; i + 1 < values_.size(); ++i)
      lip_ = std::max(lip_, std::abs(values_[i + 1] - values_[i]) / spacing());
  }

  static LipschitzGraph sample(const std::function<double(double)>& g, std::size_t n, double lo = -2.0,
                               double hi = 2.0) {
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "need two samples");
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = g(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    return LipschitzGraph(lo, hi, std::move(v), g);
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::size_t size() const { return values_.size(); }
  double spacing() const { return (hi_ - lo_) / static_cast<double>(values_.size() - 1); }
  double y(std::size_t i) const { return lo_ + spacing() * static_cast<double>(i); }
  const std::vector<double>& values() const { return values_; }
  double lip_bound() const { return lip_; }
  bool has_exact() const { return static_cast<bool>(exact_); }

  double operator()(double t) const {
    if (exact_ && t >= lo_ && t <= hi_) return exact_(t);
    const double h = spacing();
    const double u = (t - lo_) / h;
    const auto last = static_cast<double>(values_.size() - 1);
    const std::size_t i = static_cast<std::size_t>(std::clamp(std::floor(u), 0.0, last - 1.0));
    const double f = u - static_cast<double>(i);
    return values_[i] + f * (values_[i + 1] - values_[i]);
  }

 private:
  double lo_ = 0.0, hi_ = 1.0;
  std::vector<double> values_;
  std::function<double(double)> exact_;
  double lip_ = 0.0;
};

struct ClarkeInterval {
  double lo = 0.0, hi = 0.0;
};

/// Range of difference quotients over sample pairs within `window` of y.
/// In one variable the extremes are attained on consecutive samples.
inline ClarkeInterval clarke_interval(const LipschitzGraph& g, double y, double window) {
  const double h = g.spacing();
  if (!(window > 2.0 * h)) throw Error(ErrorCode::WindowTooSmall, "window must exceed two sample spacings");
  const auto last = static_cast<long>(g.size()) - 1;
  const long i0 = std::clamp(static_cast<long>(std::ceil((y - window - g.lo()) / h - 1e-9)), 0L, last);
  const long i1 = std::clamp(static_cast<long>(std::floor((y + window - g.lo()) / h + 1e-9)), 0L, last);
  ClarkeInterval c{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  const auto& v = g.values();
  for (long i = i0; i < i1; ++i) {
    const double q = (v[static_cast<std::size_t>(i + 1)] - v[static_cast<std::size_t>(i)]) / h;
    c.lo = std::min(c.lo, q);
    c.hi = std::max(c.hi, q);
  }
  if (c.lo > c.hi) c = {0.0, 0.0};
  return c;
}

/// Compactly supported smooth kernel on [-1, 1].
struct KernelSpec {
  std::function<double(double)> shape = [](double u) { return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0; };
  int intervals = 128;  // composite Simpson panels across [-1, 1], even
};

struct Quadrature {
  std::vector<double> nodes, weights;  // weights sum to 1
};

inline Quadrature kernel_quadrature(const KernelSpec& k) {
  const int m = std::max(64, k.intervals + (k.intervals % 2));
  Quadrature q;
  double total = 0.0;
  for (int i = 0; i <= m; ++i) {
    const double u = -1.0 + 2.0 * i / m;
    const double simpson = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double w = simpson * k.shape(u);
    if (w <= 0.0) continue;
    q.nodes.push_back(u);
    q.weights.push_back(w);
    total += w;
  }
  for (double& w : q.weights) w /= total;
  return q;
}

/// Integral of |rho'| for the normalized kernel; bounds |g_s''| by Lip(g) * C / s.
inline double kernel_derivative_mass(const KernelSpec& k) {
  const int m = 4096;
  double mass = 0.0, prev = k.shape(-1.0), area = 0.0;
  for (int i = 1; i <= m; ++i) {
    const double cur = k.shape(-1.0 + 2.0 * i / m);
    mass += std::abs(cur - prev);
    area += 0.5 * (cur + prev) * 2.0 / m;
    prev = cur;
  }
  return mass / area;
}

struct MollifyResult {
  LipschitzGraph graph;
  double sup_error = 0.0;  // max |g_s - g| over the samples
  double lip = 0.0;        // measured Lipschitz constant of the result
  std::vector<double> pins;
};

/// g_s = g * rho_s by quadrature, then the pinned values are restored with
/// disjoint smooth bumps of radius `pin_radius` centred on the pins.
inline MollifyResult mollify(const LipschitzGraph& g, double s, const KernelSpec& kernel = {},
                             const std::vector<double>& pins = {}, double pin_radius = 0.5) {
  if (!(s > 0.0)) throw Error(ErrorCode::NonPositiveS, "s must be positive");
  if (!(pin_radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "pin radius must be positive");
  std::vector<double> sorted = pins;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
    if (sorted[i + 1] - sorted[i] < 2.0 * pin_radius)
      throw Error(ErrorCode::PinsTooClose, "pin bumps would overlap");

  auto q = std::make_shared<const Quadrature>(kernel_quadrature(kernel));
  auto src = std::make_shared<const LipschitzGraph>(g);
  auto smooth = [q, src, s](double y) {
    double acc = 0.0;
    for (std::size_t k = 0; k < q->nodes.size(); ++k) acc += q->weights[k] * (*src)(y - s * q->nodes[k]);
    return acc;
  };
  std::vector<std::pair<double, double>> corrections;  // (pin, g(pin) - g_s(pin))
  for (double p : sorted) corrections.emplace_back(p, (*src)(p) - smooth(p));
  auto bump = [pin_radius](double d) {
    const double u = d / pin_radius;
    return std::abs(u) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0;
  };
  auto value = [smooth, corrections, bump](double y) {
    double v = smooth(y);
    for (const auto& [p, c] : corrections) {
      if (y == p) return v + c;
      v += c * bump(y - p);
    }
    return v;
  };
  std::vector<double> out(g.size());
  MollifyResult r;
  for (std::size_t i = 0; i < g.size(); ++i) {
    out[i] = value(g.y(i));
    r.sup_error = std::max(r.sup_error, std::abs(out[i] - g.values()[i]));
  }
  r.graph = LipschitzGraph(g.lo(), g.hi(), std::move(out), value);
  r.lip = r.graph.lip_bound();
  r.pins = sorted;
  return r;
}

/// Open interval per abscissa.
using IntervalField = std::function<std::pair<double, double>(double)>;

/// Clarke interval at every sample strictly inside V(y).
inline bool check_containment(const LipschitzGraph& gs, const IntervalField& v, double window = 0.0,
                              double margin = 1e-9) {
  if (window <= 0.0) window = 2.5 * gs.spacing();
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const ClarkeInterval c = clarke_interval(gs, gs.y(i), window);
    const auto [lo, hi] = v(gs.y(i));
    if (!(c.lo > lo + margin && c.hi < hi - margin)) return false;
  }
  return true;
}

struct RegularizedBoundary {
  LipschitzGraph boundary;   // raw lower boundary of A, one sample per column
  LipschitzGraph smoothed;
  double s = 0.0;
  CellSet epigraph;          // cells whose centre lies strictly above the smoothed graph
  TrapResult input_trap, output_trap;
};

/// Smooths the lower boundary of a column-monotone set A on a 2D chart
/// (axis 0 horizontal, axis 1 vertical). Tries s, s/2, ..., s/128 and keeps
/// the largest s whose Clarke intervals stay in the polar band of the cones
/// along the boundary.
inline RegularizedBoundary regularize_trapping_boundary(const EnlargementSchedule& sched, const CellSet& a, double s) {
  const ConeField& f = sched.field();
  const GridChart& chart = f.chart();
  if (chart.dim() != 2) throw Error(ErrorCode::DimensionMismatch, "epigraph smoothing needs a 2D chart");
  if (!(s > 0.0)) throw Error(ErrorCode::NonPositiveS, "s must be positive");
  const int nx = chart.axis(0).cells, nz = chart.axis(1).cells;
  const double hz = chart.spacing(1);
  std::vector<double> g(static_cast<std::size_t>(nx));
  std::vector<std::pair<double, double>> band(static_cast<std::size_t>(nx));
  for (int i = 0; i < nx; ++i) {
    int first = -1;
    for (int j = 0; j < nz; ++j) {
      const bool in = a.contains(chart.id({i, j, 0}));
      if (in && first < 0) first = j;
      if (!in && first >= 0) throw Error(ErrorCode::NotAnEpigraph, "column " + std::to_string(i) + " has a gap");
    }
    if (first < 0) throw Error(ErrorCode::NotAnEpigraph, "column " + std::to_string(i) + " is empty");
    g[static_cast<std::size_t>(i)] = chart.axis(1).lo + hz * first;
    double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
    const Cone& c = f.cone(chart.id({i, first, 0}));
    if (c.kind() != ConeKind::Polyhedral) {
      lo = hi = 0.0;
    } else {
      for (const Vec& v : c.generators()) {
        if (v[1] <= 0.0) {
          lo = hi = 0.0;
          break;
        }
        if (v[0] > 0.0) hi = std::min(hi, v[1] / v[0]);
        if (v[0] < 0.0) lo = std::max(lo, v[1] / v[0]);
      }
    }
    band[static_cast<std::size_t>(i)] = {lo, hi};
  }
  const double x0 = chart.center(chart.id({0, 0, 0}))[0];
  const double x1 = chart.center(chart.id({nx - 1, 0, 0}))[0];
  RegularizedBoundary r;
  r.boundary = LipschitzGraph(x0, x1, g);
  r.input_trap = trapping_domain_check(sched, a);
  const double hx = chart.spacing(0);
  IntervalField polar = [&](double y) {
    const int i = std::clamp(static_cast<int>(std::lround((y - x0) / hx)), 0, nx - 1);
    return band[static_cast<std::size_t>(i)];
  };
  double trial = s;
  for (int k = 0; k < 8; ++k, trial *= 0.5) {
    MollifyResult m = mollify(r.boundary, trial);
    if (!check_containment(m.graph, polar)) continue;
    r.smoothed = std::move(m.graph);
    r.s = trial;
    r.epigraph = CellSet(chart.cell_count());
    for (CellId c = 0; c < chart.cell_count(); ++c) {
      const Vec p = chart.center(c);
      if (p[1] > r.smoothed(p[0])) r.epigraph.insert(c);
    }
    r.output_trap = trapping_domain_check(sched, r.epigraph);
    return r;
  }
  throw Error(ErrorCode::NoValidS, "Clarke containment fails at every scheduled s");
}

}  // namespace conefield
