#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "conefield/error.hpp"
#include "conefield/vec.hpp"

namespace conefield {

using CellId = std::size_t;
using CellIndex = std::array<int, 3>;

/// Dense membership mask over the cells of one chart.
class CellSet {
 public:
  CellSet() = default;
  explicit CellSet(std::size_t universe) : bits_(universe, 0) {}

  static CellSet all(std::size_t universe) {
    CellSet s(universe);
    std::fill(s.bits_.begin(), s.bits_.end(), 1);
    return s;
  }
  static CellSet of(std::size_t universe, std::initializer_list<CellId> ids) {
    CellSet s(universe);
    for (CellId c : ids) s.insert(c);
    return s;
  }

  std::size_t universe() const { return bits_.size(); }
  bool contains(CellId c) const { return c < bits_.size() && bits_[c] != 0; }
  void insert(CellId c) { bits_.at(c) = 1; }
  void erase(CellId c) { bits_.at(c) = 0; }
  std::size_t count() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1)); }
  bool empty() const { return std::find(bits_.begin(), bits_.end(), 1) == bits_.end(); }

  std::vector<CellId> cells() const {
    std::vector<CellId> out;
    for (CellId c = 0; c < bits_.size(); ++c)
      if (bits_[c]) out.push_back(c);
    return out;
  }

  bool is_subset_of(const CellSet& o) const {
    for (CellId c = 0; c < bits_.size(); ++c)
      if (bits_[c] && !o.contains(c)) return false;
    return true;
  }

  CellSet operator|(const CellSet& o) const { return zip(o, [](auto a, auto b) { return a || b; }); }
  CellSet operator&(const CellSet& o) const { return zip(o, [](auto a, auto b) { return a && b; }); }
  CellSet operator-(const CellSet& o) const { return zip(o, [](auto a, auto b) { return a && !b; }); }
  CellSet operator^(const CellSet& o) const { return zip(o, [](auto a, auto b) { return a != b; }); }
  CellSet complement() const {
    CellSet s(bits_.size());
    for (std::size_t i = 0; i < bits_.size(); ++i) s.bits_[i] = bits_[i] ? 0 : 1;
    return s;
  }

  bool operator==(const CellSet& o) const = default;

 private:
  template <class Op>
  CellSet zip(const CellSet& o, Op op) const {
    if (o.bits_.size() != bits_.size()) throw Error(ErrorCode::InvalidArgument, "cell sets from different charts");
    CellSet s(bits_.size());
    for (std::size_t i = 0; i < bits_.size(); ++i) s.bits_[i] = op(bits_[i] != 0, o.bits_[i] != 0) ? 1 : 0;
    return s;
  }

  std::vector<std::uint8_t> bits_;
};

struct Axis {
  double lo = -1.0;
  double hi = 1.0;
  int cells = 2;
  bool wrap = false;
};

/// Symmetric matrix, row-major, always stored as 3x3.
using SymMatrix = std::array<double, 9>;

inline SymMatrix identity_metric() { return {1, 0, 0, 0, 1, 0, 0, 0, 1}; }

struct SymEigen {
  std::vector<double> values;  // ascending
  std::vector<Vec> vectors;    // unit, matching values
};

/// Eigen-decomposition of the leading dim x dim block (cyclic Jacobi).
inline SymEigen eigen_sym(const SymMatrix& m, int dim) {
  double a[3][3], v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a[i][j] = m[3 * i + j];
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < dim; ++i)
      for (int j = i + 1; j < dim; ++j) off += a[i][j] * a[i][j];
    if (off < 1e-30) break;
    for (int p = 0; p < dim; ++p)
      for (int q = p + 1; q < dim; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < dim; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < dim; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < dim; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
  }
  std::vector<int> order(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a[i][i] < a[j][j]; });
  SymEigen out;
  for (int i : order) {
    out.values.push_back(a[i][i]);
    Vec e = Vec::zero(dim);
    for (int k = 0; k < dim; ++k) e[k] = v[k][i];
    out.vectors.push_back(e);
  }
  return out;
}

/// Uniform box grid over one chart, optionally periodic along some axes,
/// with a per-cell Riemannian metric (identity unless set).
class GridChart {
 public:
  GridChart() = default;

  explicit GridChart(std::vector<Axis> axes) : axes_(std::move(axes)) {
    if (axes_.size() != 2 && axes_.size() != 3)
      throw Error(ErrorCode::InvalidChart, "chart dimension must be 2 or 3");
    count_ = 1;
    for (const Axis& a : axes_) {
      if (!(a.lo < a.hi)) throw Error(ErrorCode::InvalidChart, "axis bounds need lo < hi");
      if (a.cells < 2) throw Error(ErrorCode::InvalidChart, "resolution must be >= 2 per axis");
      count_ *= static_cast<std::size_t>(a.cells);
    }
  }

  /// Square chart [lo, hi]^dim with n cells per axis.
  static GridChart uniform(int dim, double lo, double hi, int n) {
    return GridChart(std::vector<Axis>(static_cast<std::size_t>(dim), Axis{lo, hi, n, false}));
  }

  int dim() const { return static_cast<int>(axes_.size()); }
  std::size_t cell_count() const { return count_; }
  const Axis& axis(int i) const { return axes_.at(static_cast<std::size_t>(i)); }
  double spacing(int i) const { return (axis(i).hi - axis(i).lo) / axis(i).cells; }

  double cell_diameter() const {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) s += spacing(i) * spacing(i);
    return std::sqrt(s);
  }

  /// Largest axis extent; used to scale absolute tolerances.
  double scale() const {
    double s = 0.0;
    for (const Axis& a : axes_) s = std::max(s, a.hi - a.lo);
    return s;
  }

  CellIndex index(CellId c) const {
    CellIndex idx{0, 0, 0};
    for (int i = 0; i < dim(); ++i) {
      idx[i] = static_cast<int>(c % static_cast<std::size_t>(axes_[i].cells));
      c /= static_cast<std::size_t>(axes_[i].cells);
    }
    return idx;
  }

  /// Flat id: axis 0 varies fastest.
  CellId id(const CellIndex& idx) const {
    CellId c = 0;
    for (int i = dim() - 1; i >= 0; --i) {
      if (idx[i] < 0 || idx[i] >= axes_[i].cells) throw Error(ErrorCode::UnknownCell, "cell index out of range");
      c = c * static_cast<std::size_t>(axes_[i].cells) + static_cast<std::size_t>(idx[i]);
    }
    return c;
  }

  void check(CellId c) const {
    if (c >= count_) throw Error(ErrorCode::UnknownCell, "cell id " + std::to_string(c));
  }

  Vec center(CellId c) const {
    const CellIndex idx = index(c);
    Vec v = Vec::zero(dim());
    for (int i = 0; i < dim(); ++i) v[i] = axes_[i].lo + (idx[i] + 0.5) * spacing(i);
    return v;
  }

  /// Corner `mask` (bit i selects the upper face along axis i).
  Vec corner(CellId c, unsigned mask) const {
    const CellIndex idx = index(c);
    Vec v = Vec::zero(dim());
    for (int i = 0; i < dim(); ++i) v[i] = axes_[i].lo + (idx[i] + ((mask >> i) & 1u)) * spacing(i);
    return v;
  }

  /// Cell containing `p`; wrapped axes are reduced modulo the period.
  std::optional<CellId> locate(const Vec& p) const {
    if (p.dim != dim()) throw Error(ErrorCode::DimensionMismatch, "point vs chart dimension");
    CellIndex idx{0, 0, 0};
    for (int i = 0; i < dim(); ++i) {
      const Axis& a = axes_[i];
      double x = p[i];
      if (a.wrap) {
        const double period = a.hi - a.lo;
        x = a.lo + std::fmod(std::fmod(x - a.lo, period) + period, period);
      }
      if (!(x >= a.lo && x <= a.hi)) return std::nullopt;
      idx[i] = std::min(a.cells - 1, static_cast<int>(std::floor((x - a.lo) / spacing(i))));
    }
    return id(idx);
  }

  /// Neighbour reached by a lattice offset, honouring wrap.
  std::optional<CellId> shifted(CellId c, const CellIndex& off) const {
    CellIndex idx = index(c);
    for (int i = 0; i < dim(); ++i) {
      int k = idx[i] + off[i];
      const int n = axes_[i].cells;
      if (axes_[i].wrap) {
        k = ((k % n) + n) % n;
      } else if (k < 0 || k >= n) {
        return std::nullopt;
      }
      idx[i] = k;
    }
    return id(idx);
  }

  /// Physical displacement of a lattice offset.
  Vec displacement(const CellIndex& off) const {
    Vec v = Vec::zero(dim());
    for (int i = 0; i < dim(); ++i) v[i] = off[i] * spacing(i);
    return v;
  }

  /// Distance (in cells) from `c` to the nearest non-wrapped chart face.
  int boundary_distance(CellId c) const {
    const CellIndex idx = index(c);
    int d = std::numeric_limits<int>::max();
    for (int i = 0; i < dim(); ++i) {
      if (axes_[i].wrap) continue;
      d = std::min({d, idx[i], axes_[i].cells - 1 - idx[i]});
    }
    return d;
  }

  void set_metric(std::vector<SymMatrix> per_cell) {
    if (per_cell.size() != count_) throw Error(ErrorCode::InvalidChart, "metric needs one matrix per cell");
    for (const SymMatrix& m : per_cell) {
      for (int i = 0; i < dim(); ++i)
        for (int j = 0; j < dim(); ++j)
          if (!std::isfinite(m[3 * i + j]) || m[3 * i + j] != m[3 * j + i])
            throw Error(ErrorCode::InvalidChart, "metric must be finite and symmetric");
      if (eigen_sym(m, dim()).values.front() <= 1e-12)
        throw Error(ErrorCode::InvalidChart, "metric must be positive definite");
    }
    metric_ = std::move(per_cell);
  }

  bool has_metric() const { return !metric_.empty(); }
  SymMatrix metric(CellId c) const { return metric_.empty() ? identity_metric() : metric_.at(c); }

  /// Length of the displacement `d` under the average of the two cell metrics.
  double edge_length(CellId a, CellId b, const Vec& d) const {
    if (metric_.empty()) return norm(d);
    const SymMatrix& ma = metric_[a];
    const SymMatrix& mb = metric_[b];
    double q = 0.0;
    for (int i = 0; i < dim(); ++i)
      for (int j = 0; j < dim(); ++j) q += 0.5 * (ma[3 * i + j] + mb[3 * i + j]) * d[i] * d[j];
    return std::sqrt(q);
  }

  bool operator==(const GridChart& o) const {
    if (axes_.size() != o.axes_.size() || metric_ != o.metric_) return false;
    for (std::size_t i = 0; i < axes_.size(); ++i) {
      const Axis &a = axes_[i], &b = o.axes_[i];
      if (a.lo != b.lo || a.hi != b.hi || a.cells != b.cells || a.wrap != b.wrap) return false;
    }
    return true;
  }

 private:
  std::vector<Axis> axes_;
  std::size_t count_ = 0;
  std::vector<SymMatrix> metric_;
};

}  // namespace conefield
