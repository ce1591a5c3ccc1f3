#pragma once

// Convex cones in R^2 / R^3 represented by their extreme rays plus a cached
// half-space description. A cone that contains a line is always normalized to
// ConeKind::Full, so every Polyhedral cone is pointed and carries a witness
// covector that is strictly positive on its generators.

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "conefield/error.hpp"
#include "conefield/vec.hpp"

namespace conefield {

enum class ConeKind { Empty, Full, Polyhedral };
enum class Regularity { Degenerate, Regular, Singular };

namespace tol {
inline constexpr double kUnitNorm = 1e-12;
inline constexpr double kStrict = 1e-10;
inline constexpr double kClosed = 1e-12;
inline constexpr double kWitness = 1e-9;
/// Sectors whose width is within this of pi are treated as containing a line.
inline constexpr double kHalfTurn = 1e-12;
}  // namespace tol

struct HalfspaceWitness {
  Vec p;
  double margin = 0.0;
};

struct Classification {
  Regularity regularity = Regularity::Degenerate;
  std::optional<HalfspaceWitness> witness;
};

/// Number of rays used around each generator when fattening a 3D cone.
inline constexpr int kCapPolygon = 8;

class Cone {
 public:
  Cone() = default;

  static Cone empty(int dim) {
    check_dim(dim);
    Cone c;
    c.dim_ = dim;
    return c;
  }

  static Cone full(int dim, bool overflow = false) {
    check_dim(dim);
    Cone c;
    c.dim_ = dim;
    c.kind_ = ConeKind::Full;
    c.open_ = true;
    c.overflow_ = overflow;
    c.rank_ = dim;
    return c;
  }

  /// Closed convex hull of the given directions (each must be nonzero).
  static Cone hull(int dim, std::span<const Vec> directions, bool open = false) {
    check_dim(dim);
    std::vector<Vec> units;
    units.reserve(directions.size());
    for (const Vec& v : directions) {
      if (v.dim != dim) throw Error(ErrorCode::DimensionMismatch, "generator dimension");
      if (!is_finite(v)) throw Error(ErrorCode::NonFiniteSample, "non-finite generator");
      const double n = norm(v);
      if (!(n > 0.0)) throw Error(ErrorCode::ZeroVector, "zero generator");
      units.push_back(v / n);
    }
    if (units.empty()) return empty(dim);
    return dim == 2 ? hull2(std::move(units), open) : hull3(std::move(units), open);
  }

  static Cone ray(const Vec& v, bool open = false) { return hull(v.dim, std::span(&v, 1), open); }

  /// Q_s = {(y, z) : z > s |y|}. In 3D the round cone is replaced by a
  /// circumscribed 16-gon so the polyhedral cone contains the exact one.
  static Cone standard(double s, int dim = 2) {
    check_dim(dim);
    if (dim == 2) {
      const std::array<Vec, 2> g{Vec(-1.0, s), Vec(1.0, s)};
      return hull(2, g, true);
    }
    constexpr int m = 16;
    const double r = 1.0 / std::cos(std::numbers::pi / m);
    std::vector<Vec> g;
    for (int k = 0; k < m; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / m;
      g.emplace_back(r * std::cos(phi), r * std::sin(phi), s);
    }
    return hull(3, g, true);
  }

  int dim() const { return dim_; }
  ConeKind kind() const { return kind_; }
  bool is_empty() const { return kind_ == ConeKind::Empty; }
  bool is_full() const { return kind_ == ConeKind::Full; }
  bool is_open() const { return open_; }
  /// Set when an enlargement reached a half-space and had to become Full.
  bool overflowed() const { return overflow_; }
  /// Dimension of the linear span (0 for Empty).
  int rank() const { return rank_; }
  const std::vector<Vec>& generators() const { return gens_; }
  /// Inward normals n with n.v >= 0 on the cone.
  const std::vector<Vec>& facets() const { return facets_; }
  /// Covector strictly positive on every generator (Polyhedral only).
  const Vec& axis() const { return axis_; }

  bool operator==(const Cone& o) const {
    if (dim_ != o.dim_ || kind_ != o.kind_ || open_ != o.open_) return false;
    if (gens_.size() != o.gens_.size()) return false;
    for (std::size_t i = 0; i < gens_.size(); ++i)
      if (norm(gens_[i] - o.gens_[i]) > tol::kUnitNorm) return false;
    return true;
  }

 private:
  static void check_dim(int dim) {
    if (dim != 2 && dim != 3) throw Error(ErrorCode::DimensionMismatch, "cones live in dimension 2 or 3");
  }

  static Cone polyhedral(int dim, std::vector<Vec> gens, const Vec& axis, int rank, bool open) {
    Cone c;
    c.dim_ = dim;
    c.kind_ = ConeKind::Polyhedral;
    c.gens_ = std::move(gens);
    c.axis_ = axis;
    c.rank_ = rank;
    c.open_ = open;
    c.build_facets();
    return c;
  }

  static Cone hull2(std::vector<Vec> units, bool open) {
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<std::pair<double, std::size_t>> ang;
    ang.reserve(units.size());
    for (std::size_t i = 0; i < units.size(); ++i) {
      double a = std::atan2(units[i][1], units[i][0]);
      if (a < 0.0) a += two_pi;
      ang.emplace_back(a, i);
    }
    std::sort(ang.begin(), ang.end());
    // The hull is the arc complementary to the largest angular gap.
    std::size_t gap_end = 0;
    double max_gap = -1.0;
    for (std::size_t k = 0; k < ang.size(); ++k) {
      const std::size_t nxt = (k + 1) % ang.size();
      double gap = ang[nxt].first - ang[k].first;
      if (nxt == 0) gap += two_pi;
      if (gap > max_gap) {
        max_gap = gap;
        gap_end = nxt;
      }
    }
    const double width = two_pi - max_gap;
    if (width >= std::numbers::pi - tol::kHalfTurn) return full(2);
    const std::size_t first = ang[gap_end].second;
    const std::size_t last = ang[(gap_end + ang.size() - 1) % ang.size()].second;
    const Vec a = units[first];
    const Vec b = units[last];
    if (width < 1e-13 || first == last) return polyhedral(2, {a}, a, 1, open);
    return polyhedral(2, {a, b}, normalized(a + b), 2, open);
  }

  static double margin_of(const Vec& p, const std::vector<Vec>& g) {
    double m = std::numeric_limits<double>::infinity();
    for (const Vec& v : g) m = std::min(m, dot(p, v));
    return m;
  }

  /// Search for a unit covector positive on every generator: bisector-style
  /// candidates, 64 Fibonacci sphere samples, then Gilbert's min-norm-point
  /// iteration on the convex hull of the generators.
  static std::optional<HalfspaceWitness> witness3(const std::vector<Vec>& g) {
    std::vector<Vec> cand;
    Vec mean = Vec::zero(3);
    for (const Vec& v : g) mean += v;
    if (norm(mean) > 0.0) cand.push_back(normalized(mean));
    for (std::size_t i = 0; i < g.size(); ++i) {
      cand.push_back(g[i]);
      if (g.size() > 24) continue;
      for (std::size_t j = i + 1; j < g.size(); ++j) {
        const Vec s = g[i] + g[j];
        if (norm(s) > 1e-12) cand.push_back(normalized(s));
      }
    }
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < 64; ++k) {
      const double z = 1.0 - (2.0 * k + 1.0) / 64.0;
      const double r = std::sqrt(1.0 - z * z);
      cand.emplace_back(r * std::cos(golden * k), r * std::sin(golden * k), z);
    }
    HalfspaceWitness best{Vec::zero(3), -std::numeric_limits<double>::infinity()};
    for (const Vec& p : cand) {
      const double m = margin_of(p, g);
      if (m > best.margin) best = {p, m};
    }
    Vec x = g.front();
    for (int it = 0; it < 2000; ++it) {
      std::size_t arg = 0;
      double lo = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double d = dot(x, g[i]);
        if (d < lo) {
          lo = d;
          arg = i;
        }
      }
      const double xx = dot(x, x);
      if (xx < 1e-30) break;
      const Vec p = x / std::sqrt(xx);
      const double m = margin_of(p, g);
      if (m > best.margin) best = {p, m};
      const Vec d = g[arg] - x;
      const double dd = dot(d, d);
      if (xx - lo <= 1e-15 || dd < 1e-30) break;
      const double t = std::clamp(-dot(x, d) / dd, 0.0, 1.0);
      x = x + d * t;
    }
    if (best.margin > tol::kWitness) return best;
    return std::nullopt;
  }

  static Cone hull3(std::vector<Vec> units, bool open) {
    const auto w = witness3(units);
    if (!w) return full(3);
    const Vec p = w->p;
    // Orthonormal frame (e1, e2) of the plane p.v = 1.
    const Vec helper = std::abs(p[0]) < 0.9 ? Vec(1.0, 0.0, 0.0) : Vec(0.0, 1.0, 0.0);
    const Vec e1 = normalized(cross3(p, helper));
    const Vec e2 = cross3(p, e1);
    struct Pt {
      double u, v;
      std::size_t idx;
    };
    std::vector<Pt> pts;
    pts.reserve(units.size());
    for (std::size_t i = 0; i < units.size(); ++i) {
      const Vec q = units[i] / dot(p, units[i]);
      pts.push_back({dot(q, e1), dot(q, e2), i});
    }
    std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) {
      return a.u < b.u || (a.u == b.u && a.v < b.v);
    });
    auto turn = [](const Pt& o, const Pt& a, const Pt& b) {
      return (a.u - o.u) * (b.v - o.v) - (a.v - o.v) * (b.u - o.u);
    };
    auto same = [](const Pt& a, const Pt& b) { return std::hypot(a.u - b.u, a.v - b.v) < 1e-13; };
    std::vector<Pt> uniq;
    for (const Pt& q : pts)
      if (uniq.empty() || !same(uniq.back(), q)) uniq.push_back(q);
    std::vector<Pt> h;
    if (uniq.size() >= 3) {
      // Andrew's monotone chain, dropping collinear points.
      std::vector<Pt> lower, upper;
      for (const Pt& q : uniq) {
        while (lower.size() >= 2 && turn(lower[lower.size() - 2], lower.back(), q) <= 1e-14) lower.pop_back();
        lower.push_back(q);
      }
      for (auto it = uniq.rbegin(); it != uniq.rend(); ++it) {
        while (upper.size() >= 2 && turn(upper[upper.size() - 2], upper.back(), *it) <= 1e-14) upper.pop_back();
        upper.push_back(*it);
      }
      lower.pop_back();
      upper.pop_back();
      h = lower;
      h.insert(h.end(), upper.begin(), upper.end());
    } else {
      h = uniq;
    }
    std::vector<Vec> gens;
    for (const Pt& q : h) gens.push_back(units[q.idx]);
    if (gens.size() == 1) return polyhedral(3, gens, p, 1, open);
    if (gens.size() == 2) return polyhedral(3, gens, p, 2, open);
    if (h.size() < 3) {
      // Collinear after projection: keep the two extremes.
      return polyhedral(3, {gens.front(), gens.back()}, p, 2, open);
    }
    return polyhedral(3, gens, p, 3, open);
  }

  void build_facets() {
    facets_.clear();
    if (dim_ == 2) {
      const Vec& a = gens_.front();
      const Vec& b = gens_.back();
      if (rank_ == 1) {
        const Vec n(-a[1], a[0]);
        facets_ = {n, -n, a};
      } else {
        facets_ = {Vec(-a[1], a[0]), Vec(b[1], -b[0]), axis_};
      }
      return;
    }
    if (rank_ == 1) {
      const Vec& g = gens_.front();
      const Vec helper = std::abs(g[0]) < 0.9 ? Vec(1.0, 0.0, 0.0) : Vec(0.0, 1.0, 0.0);
      const Vec u1 = normalized(cross3(g, helper));
      const Vec u2 = cross3(g, u1);
      facets_ = {u1, -u1, u2, -u2, g};
      return;
    }
    if (rank_ == 2) {
      const Vec& a = gens_.front();
      const Vec& b = gens_.back();
      const Vec n = normalized(cross3(a, b));
      Vec c1 = normalized(cross3(n, a));
      if (dot(c1, b) < 0.0) c1 = -c1;
      Vec c2 = normalized(cross3(n, b));
      if (dot(c2, a) < 0.0) c2 = -c2;
      facets_ = {n, -n, c1, c2, axis_};
      return;
    }
    Vec centre = Vec::zero(3);
    for (const Vec& g : gens_) centre += g;
    for (std::size_t i = 0; i < gens_.size(); ++i) {
      Vec n = normalized(cross3(gens_[i], gens_[(i + 1) % gens_.size()]));
      if (dot(n, centre) < 0.0) n = -n;
      facets_.push_back(n);
    }
  }

  int dim_ = 2;
  ConeKind kind_ = ConeKind::Empty;
  bool open_ = false;
  bool overflow_ = false;
  int rank_ = 0;
  std::vector<Vec> gens_;
  std::vector<Vec> facets_;
  Vec axis_;
};

/// Membership test; `strict` asks for the interior (empty for lower-rank cones).
inline bool contains(const Cone& c, const Vec& v, bool strict) {
  if (v.dim != c.dim()) throw Error(ErrorCode::DimensionMismatch, "vector vs cone dimension");
  const double n = norm(v);
  if (!(n > 0.0)) throw Error(ErrorCode::ZeroVector, "membership of the zero vector");
  switch (c.kind()) {
    case ConeKind::Empty: return false;
    case ConeKind::Full: return true;
    case ConeKind::Polyhedral: break;
  }
  if (strict) {
    if (c.rank() < c.dim()) return false;
    for (const Vec& f : c.facets())
      if (!(dot(f, v) > tol::kStrict * n)) return false;
    return true;
  }
  for (const Vec& f : c.facets())
    if (dot(f, v) < -tol::kClosed * n) return false;
  return true;
}

/// True iff `narrow` is contained in `wide` (narrow ≺ wide).
inline bool is_wider(const Cone& wide, const Cone& narrow) {
  if (wide.dim() != narrow.dim()) throw Error(ErrorCode::DimensionMismatch, "is_wider");
  if (narrow.is_empty() || wide.is_full()) return true;
  if (narrow.is_full() || wide.is_empty()) return false;
  for (const Vec& g : narrow.generators())
    if (!contains(wide, g, false)) return false;
  return true;
}

/// Open angular eps-fattening of `c` followed by the convex hull.
inline Cone enlarge(const Cone& c, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::NonPositiveEps, "enlarge needs eps > 0");
  if (c.is_empty()) return c;
  if (c.is_full()) return Cone::full(c.dim(), c.overflowed());
  if (c.dim() == 2) {
    const Vec& a = c.generators().front();
    const Vec& b = c.generators().back();
    const double width = std::atan2(cross2(a, b), dot(a, b));
    if (width + 2.0 * eps >= std::numbers::pi - tol::kHalfTurn) return Cone::full(2, true);
    const std::array<Vec, 2> g{rotate2(a, -eps), rotate2(b, eps)};
    return Cone::hull(2, g, true);
  }
  if (eps >= std::numbers::pi / 2.0 - 1e-9) return Cone::full(3, true);
  const double spread = std::tan(eps) / std::cos(std::numbers::pi / kCapPolygon);
  std::vector<Vec> rays;
  for (const Vec& g : c.generators()) {
    const Vec helper = std::abs(g[0]) < 0.9 ? Vec(1.0, 0.0, 0.0) : Vec(0.0, 1.0, 0.0);
    const Vec u1 = normalized(cross3(g, helper));
    const Vec u2 = cross3(g, u1);
    for (int k = 0; k < kCapPolygon; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / kCapPolygon;
      rays.push_back(g + (u1 * std::cos(phi) + u2 * std::sin(phi)) * spread);
    }
  }
  Cone out = Cone::hull(3, rays, true);
  if (out.is_full()) return Cone::full(3, true);
  return out;
}

/// Convex hull of the union.
inline Cone sum(const Cone& a, const Cone& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimensionMismatch, "sum");
  if (a.is_empty()) return b;
  if (b.is_empty()) return a;
  if (a.is_full() || b.is_full()) return Cone::full(a.dim());
  std::vector<Vec> g = a.generators();
  g.insert(g.end(), b.generators().begin(), b.generators().end());
  return Cone::hull(a.dim(), g, a.is_open() && b.is_open());
}

inline Classification classify(const Cone& c) {
  switch (c.kind()) {
    case ConeKind::Empty: return {Regularity::Degenerate, std::nullopt};
    case ConeKind::Full: return {Regularity::Singular, std::nullopt};
    case ConeKind::Polyhedral: break;
  }
  double m = std::numeric_limits<double>::infinity();
  for (const Vec& g : c.generators()) m = std::min(m, dot(c.axis(), g));
  return {Regularity::Regular, HalfspaceWitness{c.axis(), m}};
}

inline Cone reverse(const Cone& c) {
  if (c.kind() != ConeKind::Polyhedral) return c;
  std::vector<Vec> g;
  for (const Vec& v : c.generators()) g.push_back(-v);
  return Cone::hull(c.dim(), g, c.is_open());
}

}  // namespace conefield
