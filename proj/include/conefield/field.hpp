#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "conefield/chart.hpp"
#include "conefield/cone.hpp"
#include "conefield/error.hpp"
#include "conefield/expr.hpp"
#include "conefield/vec.hpp"

namespace conefield {

struct FieldSpec;

/// C_V(x) = R+ V(x), or the whole tangent space where V vanishes.
struct VectorFieldSpec {
  std::vector<std::string> components;
};

/// Planar sector of directions (cos t, sin t), t in [center - w, center + w].
/// A negative half-width yields an Empty cone.
struct AngularSpec {
  std::string center;
  std::string half_width;
};

/// Future cone {g(v, v) <= 0} of a Lorentzian metric with exactly one negative
/// eigenvalue, time-oriented towards increasing last coordinate.
struct LorentzSpec {
  std::vector<std::vector<std::string>> metric;
};

/// Explicit per-cell cones; cells not listed are Empty.
struct TableSpec {
  std::vector<std::pair<CellIndex, Cone>> entries;
};

/// Programmatic cone field, sampled like the formula specs.
struct FunctionSpec {
  std::function<Cone(const Vec&)> cone_at;
  std::string name = "function";
};

/// Equal to the inner field on {region <= 0} (tested at cell centres) and
/// degenerate elsewhere.
struct RestrictionSpec {
  std::shared_ptr<const FieldSpec> inner;
  std::string region;
};

struct FieldSpec {
  std::variant<VectorFieldSpec, AngularSpec, LorentzSpec, TableSpec, FunctionSpec, RestrictionSpec> kind;

  std::string describe() const {
    struct Visitor {
      std::string operator()(const VectorFieldSpec& s) const {
        std::string out = "vector(";
        for (std::size_t i = 0; i < s.components.size(); ++i) out += (i ? ", " : "") + s.components[i];
        return out + ")";
      }
      std::string operator()(const AngularSpec& s) const {
        return "angular(center=" + s.center + ", half_width=" + s.half_width + ")";
      }
      std::string operator()(const LorentzSpec&) const { return "lorentz"; }
      std::string operator()(const TableSpec& s) const {
        return "table(" + std::to_string(s.entries.size()) + " cells)";
      }
      std::string operator()(const FunctionSpec& s) const { return s.name; }
      std::string operator()(const RestrictionSpec& s) const {
        return "restrict(" + s.inner->describe() + ", " + s.region + " <= 0)";
      }
    };
    return std::visit(Visitor{}, kind);
  }
};

inline FieldSpec vector_field(std::vector<std::string> components) {
  return {VectorFieldSpec{std::move(components)}};
}
inline FieldSpec angular_field(std::string center, std::string half_width) {
  return {AngularSpec{std::move(center), std::move(half_width)}};
}
inline FieldSpec lorentz_field(std::vector<std::vector<std::string>> metric) {
  return {LorentzSpec{std::move(metric)}};
}
inline FieldSpec function_field(std::function<Cone(const Vec&)> f, std::string name = "function") {
  return {FunctionSpec{std::move(f), std::move(name)}};
}
inline FieldSpec restrict_field(FieldSpec inner, std::string region) {
  return {RestrictionSpec{std::make_shared<const FieldSpec>(std::move(inner)), std::move(region)}};
}

/// A closed cone field sampled on a grid: one outer-hull cone per cell.
class ConeField {
 public:
  ConeField() = default;
  ConeField(std::shared_ptr<const GridChart> chart, std::vector<Cone> cones, int samples_per_cell,
            std::string provenance)
      : chart_(std::move(chart)), cones_(std::move(cones)), samples_(samples_per_cell),
        provenance_(std::move(provenance)) {
    if (!chart_ || cones_.size() != chart_->cell_count())
      throw Error(ErrorCode::InvalidArgument, "cone field needs exactly one cone per cell");
    for (const Cone& c : cones_)
      if (c.dim() != chart_->dim()) throw Error(ErrorCode::DimensionMismatch, "cone vs chart dimension");
  }

  const GridChart& chart() const { return *chart_; }
  const std::shared_ptr<const GridChart>& chart_ptr() const { return chart_; }
  std::size_t size() const { return cones_.size(); }
  const Cone& cone(CellId c) const {
    chart_->check(c);
    return cones_[c];
  }
  const std::vector<Cone>& cones() const { return cones_; }
  int samples_per_cell() const { return samples_; }
  const std::string& provenance() const { return provenance_; }

  CellSet domain() const {
    CellSet s(cones_.size());
    for (CellId c = 0; c < cones_.size(); ++c)
      if (!cones_[c].is_empty()) s.insert(c);
    return s;
  }

  CellSet singular_set() const {
    CellSet s(cones_.size());
    for (CellId c = 0; c < cones_.size(); ++c)
      if (cones_[c].is_full()) s.insert(c);
    return s;
  }

 private:
  std::shared_ptr<const GridChart> chart_;
  std::vector<Cone> cones_;
  int samples_ = 1;
  std::string provenance_;
};

namespace detail {

/// Sample points of a cell: refinement 0 is the centre only, 1 adds the 2^d
/// corners, k >= 2 uses the (k+1)^d lattice plus the centre.
inline std::vector<Vec> cell_samples(const GridChart& chart, CellId c, int refinement) {
  std::vector<Vec> pts{chart.center(c)};
  if (refinement <= 0) return pts;
  if (refinement == 1) {
    for (unsigned mask = 0; mask < (1u << chart.dim()); ++mask) pts.push_back(chart.corner(c, mask));
    return pts;
  }
  const Vec lo = chart.corner(c, 0);
  const int k = refinement;
  const int per = k + 1;
  int total = 1;
  for (int i = 0; i < chart.dim(); ++i) total *= per;
  for (int t = 0; t < total; ++t) {
    Vec p = lo;
    int rem = t;
    for (int i = 0; i < chart.dim(); ++i) {
      p[i] += chart.spacing(i) * (rem % per) / k;
      rem /= per;
    }
    pts.push_back(p);
  }
  return pts;
}

struct Compiled {
  std::vector<Expr> exprs;

  static Compiled of(std::span<const std::string> texts, int dim) {
    const auto names = coordinate_names(dim);
    Compiled c;
    for (const std::string& t : texts) c.exprs.push_back(Expr::compile(t, names));
    return c;
  }

  double eval(std::size_t i, const Vec& p) const {
    const auto vals = coordinate_values(std::span<const double>(p.x.data(), static_cast<std::size_t>(p.dim)));
    const double v = exprs[i](vals);
    if (!std::isfinite(v))
      throw Error(ErrorCode::NonFiniteSample, "formula '" + exprs[i].text() + "' is not finite at " + to_string(p));
    return v;
  }
};

inline Cone lorentz_cone(const SymMatrix& g, int dim) {
  const SymEigen eig = eigen_sym(g, dim);
  const double scale = std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
  if (!(eig.values[0] < -1e-12 * scale) || !(eig.values[1] > 1e-12 * scale))
    throw Error(ErrorCode::SpecParseError, "metric is not Lorentzian (need exactly one negative eigenvalue)");
  Vec time = eig.vectors[0];
  const int last = dim - 1;
  if (time[last] < 0.0 || (time[last] == 0.0 && time[0] < 0.0)) time = -time;
  const double lam0 = -eig.values[0];
  if (dim == 2) {
    const double t = std::sqrt(lam0 / eig.values[1]);
    const std::array<Vec, 2> g2{time + eig.vectors[1] * t, time - eig.vectors[1] * t};
    return Cone::hull(2, g2);
  }
  constexpr int m = 16;
  const double r = 1.0 / std::cos(std::numbers::pi / m);
  const double a1 = std::sqrt(lam0 / eig.values[1]);
  const double a2 = std::sqrt(lam0 / eig.values[2]);
  std::vector<Vec> gens;
  for (int k = 0; k < m; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / m;
    gens.push_back(time + eig.vectors[1] * (r * a1 * std::cos(phi)) + eig.vectors[2] * (r * a2 * std::sin(phi)));
  }
  return Cone::hull(3, gens);
}

inline Cone sector(double center, double half_width) {
  if (half_width < 0.0) return Cone::empty(2);
  if (2.0 * half_width >= std::numbers::pi) return Cone::full(2);
  const std::array<Vec, 2> g{Vec(std::cos(center - half_width), std::sin(center - half_width)),
                             Vec(std::cos(center + half_width), std::sin(center + half_width))};
  return Cone::hull(2, g);
}

/// Hull of the cones sampled inside one cell.
inline Cone hull_of(int dim, const std::vector<Cone>& samples) {
  std::vector<Vec> gens;
  for (const Cone& c : samples) {
    if (c.is_full()) return Cone::full(dim);
    gens.insert(gens.end(), c.generators().begin(), c.generators().end());
  }
  return Cone::hull(dim, gens);
}

inline std::vector<Cone> sample_cells(const FieldSpec& spec, const GridChart& chart, int refinement);

struct SampleVisitor {
  const GridChart& chart;
  int refinement;

  std::vector<Cone> operator()(const VectorFieldSpec& s) const {
    const int d = chart.dim();
    if (static_cast<int>(s.components.size()) != d)
      throw Error(ErrorCode::SpecParseError, "vector field needs one component per axis");
    const Compiled f = Compiled::of(s.components, d);
    std::vector<std::vector<Vec>> values(chart.cell_count());
    double field_scale = 0.0;
    for (CellId c = 0; c < chart.cell_count(); ++c)
      for (const Vec& p : cell_samples(chart, c, refinement)) {
        Vec v = Vec::zero(d);
        for (int i = 0; i < d; ++i) v[i] = f.eval(static_cast<std::size_t>(i), p);
        field_scale = std::max(field_scale, norm(v));
        values[c].push_back(v);
      }
    const double zero = 1e-8 * field_scale;
    std::vector<Cone> out;
    out.reserve(chart.cell_count());
    for (CellId c = 0; c < chart.cell_count(); ++c) {
      std::vector<Vec> gens;
      bool singular = false;
      for (const Vec& v : values[c]) {
        if (norm(v) <= zero) singular = true;
        else gens.push_back(v);
      }
      out.push_back(singular ? Cone::full(d) : Cone::hull(d, gens));
    }
    return out;
  }

  std::vector<Cone> operator()(const AngularSpec& s) const {
    if (chart.dim() != 2) throw Error(ErrorCode::SpecParseError, "angular specs are planar");
    const std::array<std::string, 2> texts{s.center, s.half_width};
    const Compiled f = Compiled::of(texts, 2);
    return per_sample([&](const Vec& p) { return sector(f.eval(0, p), f.eval(1, p)); });
  }

  std::vector<Cone> operator()(const LorentzSpec& s) const {
    const int d = chart.dim();
    if (static_cast<int>(s.metric.size()) != d)
      throw Error(ErrorCode::SpecParseError, "metric needs dim x dim entries");
    std::vector<std::string> flat;
    for (const auto& row : s.metric) {
      if (static_cast<int>(row.size()) != d) throw Error(ErrorCode::SpecParseError, "metric needs dim x dim entries");
      flat.insert(flat.end(), row.begin(), row.end());
    }
    const Compiled f = Compiled::of(flat, d);
    return per_sample([&](const Vec& p) {
      SymMatrix g{};
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g[3 * i + j] = f.eval(static_cast<std::size_t>(d * i + j), p);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < i; ++j) g[3 * i + j] = g[3 * j + i] = 0.5 * (g[3 * i + j] + g[3 * j + i]);
      return lorentz_cone(g, d);
    });
  }

  std::vector<Cone> operator()(const TableSpec& s) const {
    std::vector<Cone> out(chart.cell_count(), Cone::empty(chart.dim()));
    for (const auto& [idx, cone] : s.entries) {
      if (cone.dim() != chart.dim()) throw Error(ErrorCode::DimensionMismatch, "table cone dimension");
      out[chart.id(idx)] = cone;
    }
    return out;
  }

  std::vector<Cone> operator()(const FunctionSpec& s) const { return per_sample(s.cone_at); }

  std::vector<Cone> operator()(const RestrictionSpec& s) const {
    std::vector<Cone> out = sample_cells(*s.inner, chart, refinement);
    const std::array<std::string, 1> texts{s.region};
    const Compiled f = Compiled::of(texts, chart.dim());
    for (CellId c = 0; c < chart.cell_count(); ++c)
      if (f.eval(0, chart.center(c)) > 0.0) out[c] = Cone::empty(chart.dim());
    return out;
  }

  template <class F>
  std::vector<Cone> per_sample(F&& cone_at) const {
    std::vector<Cone> out;
    out.reserve(chart.cell_count());
    for (CellId c = 0; c < chart.cell_count(); ++c) {
      std::vector<Cone> cones;
      for (const Vec& p : cell_samples(chart, c, refinement)) cones.push_back(cone_at(p));
      out.push_back(hull_of(chart.dim(), cones));
    }
    return out;
  }
};

inline std::vector<Cone> sample_cells(const FieldSpec& spec, const GridChart& chart, int refinement) {
  return std::visit(SampleVisitor{chart, refinement}, spec.kind);
}

}  // namespace detail

/// Samples `spec` in every cell (centre plus corners by default) and stores
/// the hull of the sampled cones.
inline ConeField build_field(const FieldSpec& spec, std::shared_ptr<const GridChart> chart, int refinement = 1) {
  if (!chart) throw Error(ErrorCode::InvalidArgument, "null chart");
  std::vector<Cone> cones = detail::sample_cells(spec, *chart, refinement);
  const int samples = static_cast<int>(detail::cell_samples(*chart, 0, refinement).size());
  return ConeField(chart, std::move(cones), samples, spec.describe());
}

inline ConeField build_field(const FieldSpec& spec, const GridChart& chart, int refinement = 1) {
  return build_field(spec, std::make_shared<const GridChart>(chart), refinement);
}

inline Cone enlarged_cell_cone(const ConeField& f, CellId cell, double eps) {
  return enlarge(f.cone(cell), eps);
}

inline ConeField reverse_field(const ConeField& f) {
  std::vector<Cone> cones;
  cones.reserve(f.size());
  for (const Cone& c : f.cones()) cones.push_back(reverse(c));
  std::string prov = f.provenance();
  const std::string tag = "reverse(";
  if (prov.rfind(tag, 0) == 0 && prov.back() == ')') prov = prov.substr(tag.size(), prov.size() - tag.size() - 1);
  else prov = tag + prov + ")";
  return ConeField(f.chart_ptr(), std::move(cones), f.samples_per_cell(), prov);
}

/// Unit vector inside an open (enlarged) cone: the normalized generator mean,
/// or the first basis vector for Full.
inline Vec interior_direction(const Cone& open_cone) {
  if (open_cone.is_empty()) throw Error(ErrorCode::DegenerateCell, "no direction in an empty cone");
  if (open_cone.is_full()) return Vec::basis(open_cone.dim(), 0);
  Vec m = Vec::zero(open_cone.dim());
  for (const Vec& g : open_cone.generators()) m += g;
  return normalized(m);
}

inline Vec select_vector(const ConeField& f, CellId cell, double eps) {
  const Cone e = enlarged_cell_cone(f, cell, eps);
  if (e.is_empty()) throw Error(ErrorCode::DegenerateCell, "cell " + std::to_string(cell) + " is outside the domain");
  return interior_direction(e);
}

}  // namespace conefield
