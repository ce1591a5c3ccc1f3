#include <gtest/gtest.h>

#include <cmath>

#include "conefield/smoothing.hpp"

using namespace conefield;

namespace {

double abs_fn(double y) { return std::abs(y); }

IntervalField constant_band(double lo, double hi) {
  return [=](double) { return std::pair{lo, hi}; };
}

// g_s(0) for g = |y|: s times the first absolute moment of the kernel, by
// a fine midpoint rule independent of the library quadrature.
double abs_moment(double s) {
  const int m = 200000;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < m; ++i) {
    const double u = -1.0 + (i + 0.5) * 2.0 / m;
    const double w = std::exp(-1.0 / (1.0 - u * u));
    num += std::abs(u) * w;
    den += w;
  }
  return s * num / den;
}

EnlargementSchedule minkowski() {
  const GridChart chart = GridChart::uniform(2, -1, 1, 64);
  return make_schedule(build_field(function_field([](const Vec&) { return Cone::standard(1.0); }), chart), 5,
                       2.0 * chart.cell_diameter(), 0.5);
}

CellSet region(const GridChart& chart, const std::function<bool(const Vec&)>& pred) {
  CellSet s(chart.cell_count());
  for (CellId c = 0; c < chart.cell_count(); ++c)
    if (pred(chart.center(c))) s.insert(c);
  return s;
}

}  // namespace

TEST(Clarke, Examples) {
  const LipschitzGraph a = LipschitzGraph::sample(abs_fn, 4001);
  const ClarkeInterval c = clarke_interval(a, 0.0, 0.01);
  EXPECT_NEAR(c.lo, -1.0, 1e-6);
  EXPECT_NEAR(c.hi, 1.0, 1e-6);

  // quotients of y^2 over [y1, y2] are y1 + y2
  const LipschitzGraph q = LipschitzGraph::sample([](double y) { return y * y; }, 4001);
  const double w = 0.01;
  const ClarkeInterval d = clarke_interval(q, 0.5, w);
  EXPECT_LE(d.lo, 1.0);
  EXPECT_GE(d.hi, 1.0);
  EXPECT_GE(d.lo, 1.0 - 2.0 * w - 1e-9);
  EXPECT_LE(d.hi, 1.0 + 2.0 * w + 1e-9);

  const LipschitzGraph l = LipschitzGraph::sample([](double y) { return 0.3 * y - 0.2; }, 401);
  const ClarkeInterval e = clarke_interval(l, -0.7, 0.1);
  EXPECT_NEAR(e.lo, 0.3, 1e-9);
  EXPECT_NEAR(e.hi, 0.3, 1e-9);

  try {
    clarke_interval(l, 0.0, 2.0 * l.spacing());
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::WindowTooSmall);
  }
}

TEST(Mollify, AbsoluteValue) {
  const LipschitzGraph g = LipschitzGraph::sample(abs_fn, 4096);
  const MollifyResult r = mollify(g, 0.1);
  EXPECT_LE(r.sup_error, 0.1);
  EXPECT_LE(r.lip, 1.0 + 1e-6);
  EXPECT_NEAR(r.graph(0.0), abs_moment(0.1), 1e-6);
  EXPECT_LE(r.sup_error, abs_moment(0.1) + 1e-9);
  EXPECT_GE(r.sup_error, abs_moment(0.1) - g.spacing());
  // far from the kink the kernel sees only one branch
  EXPECT_NEAR(r.graph(0.7), 0.7, 1e-9);
}

TEST(Mollify, AffineIsFixed) {
  const auto f = [](double y) { return -0.8 * y + 0.25; };
  const MollifyResult r = mollify(LipschitzGraph::sample(f, 801), 0.3);
  for (double y = -2.0; y <= 2.0; y += 0.01) EXPECT_NEAR(r.graph(y), f(y), 1e-9);
  EXPECT_LE(r.sup_error, 1e-9);
}

TEST(Mollify, PinnedAbsoluteValue) {
  const LipschitzGraph g = LipschitzGraph::sample(abs_fn, 4096);
  const MollifyResult plain = mollify(g, 0.1);
  const MollifyResult pinned = mollify(g, 0.1, {}, {0.0});
  EXPECT_NEAR(pinned.graph(0.0), 0.0, 1e-12);
  // the correction is -g_s(0) times a bump of radius 0.5 peaking at 1
  double bump_slope = 0.0;
  for (int i = 1; i < 20000; ++i) {
    const double u0 = -1.0 + (i - 1) * 1e-4, u1 = u0 + 1e-4;
    const auto bump = [](double u) { return std::abs(u) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0; };
    bump_slope = std::max(bump_slope, std::abs(bump(u1) - bump(u0)) / 1e-4 / 0.5);
  }
  EXPECT_LE(pinned.lip, plain.lip + plain.graph(0.0) * bump_slope * 1.001);
  EXPECT_GT(pinned.lip, plain.lip);
  EXPECT_NEAR(pinned.graph(0.6), plain.graph(0.6), 1e-12);
}

TEST(Mollify, Errors) {
  const LipschitzGraph g = LipschitzGraph::sample(abs_fn, 101);
  for (double s : {0.0, -0.1}) {
    try {
      mollify(g, s);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::NonPositiveS);
    }
  }
  try {
    mollify(g, 0.1, {}, {0.0, 0.6});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PinsTooClose);
  }
  EXPECT_NO_THROW(mollify(g, 0.1, {}, {-0.6, 0.6}));
}

TEST(Mollify, ConvergenceLipschitzAndCurvature) {
  const std::vector<std::function<double(double)>> fs{
      abs_fn,
      [](double y) { return std::sin(3.0 * y); },
      [](double y) { return std::max(0.0, y - 0.3); },
      [](double y) { return 0.5 * std::abs(y + 0.4) - std::abs(y - 0.9); },
  };
  const double c = kernel_derivative_mass({});
  for (std::size_t k = 0; k < fs.size(); ++k) {
    const LipschitzGraph g = LipschitzGraph::sample(fs[k], 2001);
    for (double s : {0.4, 0.2, 0.1, 0.05}) {
      const MollifyResult r = mollify(g, s);
      EXPECT_LE(r.sup_error, 1.01 * g.lip_bound() * s) << k << " " << s;
      EXPECT_LE(r.lip, g.lip_bound() + 1e-6) << k << " " << s;
      // the quadrature sum has a kink at every kernel node, so differences
      // are taken over at least four node spacings
      const std::size_t step = static_cast<std::size_t>(std::ceil(4.0 * 2.0 * s / 128 / g.spacing()));
      const double h = g.spacing() * static_cast<double>(step);
      const auto& v = r.graph.values();
      for (std::size_t i = step; i + step < g.size(); ++i) {
        const double d2 = std::abs(v[i + step] - 2.0 * v[i] + v[i - step]) / (h * h);
        EXPECT_LE(d2, g.lip_bound() * c / s * 1.01 + 1e-6) << k << " " << s << " " << i;
      }
    }
  }
}

TEST(Containment, Examples) {
  const MollifyResult r = mollify(LipschitzGraph::sample(abs_fn, 4096), 0.1);
  EXPECT_TRUE(check_containment(r.graph, constant_band(-1.1, 1.1)));
  // slope at y = 2s is already 1
  EXPECT_GT(clarke_interval(r.graph, 0.2, 0.01).hi, 0.999);
  for (double s : {0.4, 0.1, 0.02}) {
    const MollifyResult m = mollify(LipschitzGraph::sample(abs_fn, 4096), s);
    EXPECT_FALSE(check_containment(m.graph, constant_band(-0.5, 0.5))) << s;
  }
  const LipschitzGraph flat = LipschitzGraph::sample([](double) { return 0.4; }, 101);
  EXPECT_TRUE(check_containment(mollify(flat, 0.2).graph, constant_band(-0.01, 0.01)));
}

TEST(Epigraph, WedgeUnderMinkowski) {
  const EnlargementSchedule s = minkowski();
  const GridChart& chart = *s.finest().chart;
  const CellSet wedge = region(chart, [](const Vec& p) { return std::abs(p[0]) / 2 - p[1] < 0.0; });
  const RegularizedBoundary r = regularize_trapping_boundary(s, wedge, 0.5);
  EXPECT_TRUE(r.input_trap.trapping);
  EXPECT_TRUE(r.output_trap.trapping);
  EXPECT_GT(r.s, 0.0);
  EXPECT_LE(r.s, 0.5);
  EXPECT_TRUE(check_containment(r.smoothed, constant_band(-1.0, 1.0)));
  for (std::size_t i = 0; i < r.boundary.size(); ++i) EXPECT_LE(std::abs(r.boundary.values()[i] - std::abs(r.boundary.y(i)) / 2), chart.spacing(1));
}

TEST(Epigraph, HalfPlaneIsFixed) {
  const EnlargementSchedule s = minkowski();
  const GridChart& chart = *s.finest().chart;
  const CellSet upper = region(chart, [](const Vec& p) { return p[1] > 0.0; });
  const RegularizedBoundary r = regularize_trapping_boundary(s, upper, 0.5);
  EXPECT_DOUBLE_EQ(r.s, 0.5);
  for (std::size_t i = 0; i < r.smoothed.size(); ++i) EXPECT_NEAR(r.smoothed.values()[i], 0.0, 1e-9);
  EXPECT_EQ(r.epigraph, upper);
  EXPECT_TRUE(r.input_trap.trapping);
  EXPECT_TRUE(r.output_trap.trapping);
}

TEST(Epigraph, Errors) {
  const EnlargementSchedule s = minkowski();
  const GridChart& chart = *s.finest().chart;
  const CellSet gap = region(chart, [](const Vec& p) { return p[1] > 0.0 && std::abs(p[1] - 0.5) > 0.1; });
  try {
    regularize_trapping_boundary(s, gap, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotAnEpigraph);
  }
  const CellSet missing = region(chart, [](const Vec& p) { return p[1] > 0.0 && p[0] < 0.5; });
  EXPECT_THROW(regularize_trapping_boundary(s, missing, 0.5), Error);
  EXPECT_THROW(regularize_trapping_boundary(s, region(chart, [](const Vec& p) { return p[1] > 0.0; }), 0.0), Error);
}

TEST(Epigraph, TrappingPreservedOnSuite) {
  const EnlargementSchedule s = minkowski();
  const GridChart& chart = *s.finest().chart;
  const std::vector<std::function<double(double)>> gs{
      [](double y) { return 0.3 * y; },
      [](double y) { return 0.4 * std::sin(2.0 * y); },
      [](double y) { return -0.6 * std::abs(y - 0.2) + 0.3; },
      [](double y) { return 0.5 * std::abs(y) - 0.4; },
  };
  for (std::size_t k = 0; k < gs.size(); ++k) {
    const CellSet a = region(chart, [&](const Vec& p) { return p[1] > gs[k](p[0]); });
    const RegularizedBoundary r = regularize_trapping_boundary(s, a, 0.5);
    if (r.input_trap.trapping) EXPECT_TRUE(r.output_trap.trapping) << k;
  }
}
