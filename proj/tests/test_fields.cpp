#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "conefield/causal.hpp"

using namespace conefield;

namespace {

constexpr double kPi = std::numbers::pi;

FieldSpec minkowski() {
  return function_field([](const Vec&) { return Cone::standard(1.0); }, "Q1");
}

FieldSpec random_sector_field(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double a = 2.0 * kPi * u(rng), b = 2.0 * kPi * u(rng), w = 0.05 + 0.6 * u(rng);
  return function_field(
      [=](const Vec& p) {
        const double t = a + std::sin(b + 3.0 * p[0]) + p[1];
        const std::array<Vec, 2> g{Vec(std::cos(t - w), std::sin(t - w)), Vec(std::cos(t + w), std::sin(t + w))};
        return Cone::hull(2, g);
      },
      "random");
}

bool same_set(const Cone& a, const Cone& b) { return is_wider(a, b) && is_wider(b, a); }

}  // namespace

TEST(Chart, Construction) {
  EXPECT_THROW(GridChart({Axis{0, 1, 4}}), Error);
  EXPECT_THROW(GridChart({Axis{1, 0, 4}, Axis{0, 1, 4}}), Error);
  EXPECT_THROW(GridChart({Axis{0, 1, 1}, Axis{0, 1, 4}}), Error);
  const GridChart c = GridChart::uniform(2, -1, 1, 4);
  EXPECT_EQ(c.cell_count(), 16u);
  EXPECT_NEAR(c.cell_diameter(), std::sqrt(0.5), 1e-15);
  const auto id = c.locate(Vec(0.1, -0.9));
  ASSERT_TRUE(id);
  EXPECT_EQ(c.index(*id)[0], 2);
  EXPECT_EQ(c.index(*id)[1], 0);
  EXPECT_FALSE(c.locate(Vec(1.5, 0.0)));
  EXPECT_EQ(c.center(*id), Vec(0.25, -0.75));
}

TEST(Chart, WrapShift) {
  const GridChart c({Axis{0, 1, 4, true}, Axis{0, 1, 4, false}});
  const CellId a = c.id({3, 0, 0});
  const auto b = c.shifted(a, {1, 0, 0});
  ASSERT_TRUE(b);
  EXPECT_EQ(c.index(*b)[0], 0);
  EXPECT_FALSE(c.shifted(a, {0, -1, 0}));
}

TEST(Chart, MetricMustBeSpd) {
  GridChart c = GridChart::uniform(2, -1, 1, 2);
  std::vector<SymMatrix> bad(4, SymMatrix{1, 0, 0, 0, -1, 0, 0, 0, 1});
  EXPECT_THROW(c.set_metric(bad), Error);
  std::vector<SymMatrix> good(4, SymMatrix{4, 0, 0, 0, 1, 0, 0, 0, 1});
  c.set_metric(good);
  EXPECT_NEAR(c.edge_length(0, 1, Vec(1.0, 0.0)), 2.0, 1e-12);
}

TEST(BuildField, ConstantMinkowski) {
  const ConeField f = build_field(minkowski(), GridChart::uniform(2, -1, 1, 16));
  for (CellId c = 0; c < f.size(); ++c) {
    EXPECT_TRUE(same_set(f.cone(c), Cone::standard(1.0)));
    EXPECT_FALSE(f.cone(c).is_open());
  }
  EXPECT_EQ(f.domain().count(), 256u);
  EXPECT_TRUE(f.singular_set().empty());
  EXPECT_EQ(f.samples_per_cell(), 5);
}

TEST(BuildField, AngularAndLorentzGiveQ1) {
  const GridChart chart = GridChart::uniform(2, -1, 1, 8);
  const ConeField a = build_field(angular_field("pi/2", "pi/4"), chart);
  const ConeField l = build_field(lorentz_field({{"1", "0"}, {"0", "-1"}}), chart);
  const Cone q1 = Cone::standard(1.0);
  for (CellId c = 0; c < chart.cell_count(); ++c) {
    EXPECT_TRUE(same_set(a.cone(c), q1));
    EXPECT_TRUE(same_set(l.cone(c), q1));
  }
}

TEST(BuildField, RotationFieldZeroIsFull) {
  const GridChart chart = GridChart::uniform(2, -1, 1, 16);
  const ConeField f = build_field(vector_field({"-z", "y"}), chart);
  CellSet around(chart.cell_count());
  for (int i : {7, 8})
    for (int j : {7, 8}) around.insert(chart.id({i, j, 0}));
  EXPECT_EQ(f.singular_set(), around);
  for (CellId c = 0; c < f.size(); ++c) {
    if (around.contains(c)) continue;
    ASSERT_EQ(f.cone(c).kind(), ConeKind::Polyhedral);
    // every sampled vector lies in the hull
    for (unsigned m = 0; m < 4; ++m) {
      const Vec p = chart.corner(c, m);
      EXPECT_TRUE(contains(f.cone(c), Vec(-p[1], p[0]), false));
    }
    const Vec p = chart.center(c);
    EXPECT_TRUE(contains(f.cone(c), Vec(-p[1], p[0]), false));
  }
  // odd resolution: only the centre cell holds the zero
  const ConeField g = build_field(vector_field({"-z", "y"}), GridChart::uniform(2, -1, 1, 15));
  EXPECT_EQ(g.singular_set().cells(), std::vector<CellId>{g.chart().id({7, 7, 0})});
}

TEST(BuildField, ZeroThresholdIsRelative) {
  const GridChart chart = GridChart::uniform(2, -1, 1, 15);
  const ConeField a = build_field(vector_field({"-z", "y"}), chart);
  const ConeField b = build_field(vector_field({"-1e-9*z", "1e-9*y"}), chart);
  EXPECT_EQ(a.singular_set(), b.singular_set());
}

TEST(BuildField, Restriction) {
  const GridChart chart = GridChart::uniform(2, -1, 1, 16);
  const ConeField f = build_field(restrict_field(minkowski(), "z"), chart);
  CellSet region(chart.cell_count());
  for (CellId c = 0; c < chart.cell_count(); ++c) {
    if (chart.center(c)[1] <= 0.0) region.insert(c);
    else EXPECT_TRUE(f.cone(c).is_empty());
  }
  EXPECT_TRUE(f.domain().is_subset_of(region));
  EXPECT_EQ(f.domain(), region);
}

TEST(BuildField, Errors) {
  const GridChart chart = GridChart::uniform(2, -1, 1, 4);
  try {
    build_field(vector_field({"y +", "z"}), chart);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SpecParseError);
  }
  try {
    build_field(vector_field({"sqrt(y)", "1"}), chart);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteSample);
  }
  EXPECT_THROW(build_field(vector_field({"y"}), chart), Error);
  EXPECT_THROW(build_field(vector_field({"w", "z"}), chart), Error);
}

TEST(BuildField, ThreeDimensional) {
  const GridChart chart = GridChart::uniform(3, -1, 1, 4);
  const ConeField f = build_field(vector_field({"0", "0", "1"}), chart);
  for (CellId c = 0; c < f.size(); ++c) {
    EXPECT_TRUE(contains(f.cone(c), Vec(0, 0, 1), false));
    EXPECT_FALSE(contains(f.cone(c), Vec(0, 0, -1), false));
  }
}

TEST(EnlargedCellCone, Examples) {
  const ConeField f = build_field(minkowski(), GridChart::uniform(2, -1, 1, 8));
  for (CellId c = 0; c < f.size(); ++c) EXPECT_EQ(enlarged_cell_cone(f, c, 0.1), enlarge(Cone::standard(1.0), 0.1));
  const ConeField r = build_field(vector_field({"-z", "y"}), GridChart::uniform(2, -1, 1, 15));
  EXPECT_TRUE(enlarged_cell_cone(r, r.chart().id({7, 7, 0}), 0.1).is_full());
  try {
    enlarged_cell_cone(f, 64, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownCell);
  }
}

TEST(EnlargedCellCone, CoarserGridIsWider) {
  const GridChart coarse = GridChart::uniform(2, -1, 1, 8), fine = GridChart::uniform(2, -1, 1, 32);
  const ConeField fc = build_field(vector_field({"-z", "y"}), coarse);
  const ConeField ff = build_field(vector_field({"-z", "y"}), fine);
  for (CellId c = 0; c < fine.cell_count(); ++c) {
    const CellId parent = *coarse.locate(fine.center(c));
    const Cone wide = enlarged_cell_cone(fc, parent, 2.0 * coarse.cell_diameter());
    const Cone narrow = enlarged_cell_cone(ff, c, 2.0 * fine.cell_diameter());
    EXPECT_TRUE(is_wider(wide, narrow)) << c;
  }
}

TEST(Schedule, Geometric) {
  const ConeField f = build_field(minkowski(), GridChart::uniform(2, -1, 1, 8));
  const EnlargementSchedule s = make_schedule(f, 3, 0.4, 0.5);
  ASSERT_EQ(s.eps_list.size(), 3u);
  EXPECT_DOUBLE_EQ(s.eps_list[0], 0.4);
  EXPECT_DOUBLE_EQ(s.eps_list[1], 0.2);
  EXPECT_DOUBLE_EQ(s.eps_list[2], 0.1);
  for (std::size_t k = 0; k + 1 < s.size(); ++k)
    for (CellId c = 0; c < f.size(); ++c) EXPECT_TRUE(is_wider(s.levels[k].cones[c], s.levels[k + 1].cones[c]));
  const EnlargementSchedule d = default_schedule(f);
  EXPECT_EQ(d.size(), 6u);
  EXPECT_DOUBLE_EQ(d.eps_list[0], 2.0 * f.chart().cell_diameter());
}

TEST(Schedule, BadParams) {
  const ConeField f = build_field(minkowski(), GridChart::uniform(2, -1, 1, 4));
  for (auto [n, e, r] : {std::tuple{1, 0.4, 0.5}, {3, 0.0, 0.5}, {3, -1.0, 0.5}, {3, 0.4, 1.0}, {3, 0.4, 0.0}}) {
    try {
      make_schedule(f, n, e, r);
      FAIL();
    } catch (const Error& err) {
      EXPECT_EQ(err.code(), ErrorCode::BadScheduleParams);
    }
  }
}

TEST(Schedule, IntersectionShrinksToQ1) {
  // (y, z) = (1.0001, 1) sits delta radians outside Q_1; it leaves the enlarged cone once eps < delta
  const Vec v(1.0001, 1.0);
  const double delta = kPi / 4.0 - std::atan2(1.0, 1.0001);
  const ConeField f = build_field(minkowski(), GridChart::uniform(2, -1, 1, 4));
  const EnlargementSchedule s = make_schedule(f, 20, 0.4, 0.5);
  int first_out = -1;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const bool in = contains(s.levels[k].cones[0], v, true);
    if (std::abs(s.eps_list[k] - delta) > 1e-9) EXPECT_EQ(in, s.eps_list[k] > delta) << k;
    if (!in && first_out < 0) first_out = static_cast<int>(k);
  }
  EXPECT_EQ(first_out, 13);
  EXPECT_FALSE(contains(Cone::standard(1.0), v, false));
}

TEST(ReverseField, InvolutionAndDomain) {
  std::mt19937 rng(41);
  const GridChart chart = GridChart::uniform(2, -1, 1, 8);
  for (int i = 0; i < 5; ++i) {
    const ConeField f = build_field(restrict_field(random_sector_field(rng), "y*z - 0.2"), chart);
    const ConeField rr = reverse_field(reverse_field(f));
    for (CellId c = 0; c < f.size(); ++c) EXPECT_TRUE(rr.cone(c) == f.cone(c));
    EXPECT_EQ(reverse_field(f).domain(), f.domain());
    EXPECT_EQ(rr.provenance(), f.provenance());
  }
}

TEST(SelectVector, Examples) {
  const ConeField f = build_field(minkowski(), GridChart::uniform(2, -1, 1, 4));
  const Vec v = select_vector(f, 0, 0.1);
  EXPECT_NEAR(v[0], 0.0, 1e-12);
  EXPECT_NEAR(v[1], 1.0, 1e-12);
  const ConeField r = build_field(vector_field({"-z", "y"}), GridChart::uniform(2, -1, 1, 3));
  EXPECT_EQ(select_vector(r, 4, 0.1), Vec(1.0, 0.0));
  const ConeField e = build_field(restrict_field(minkowski(), "1"), GridChart::uniform(2, -1, 1, 4));
  try {
    select_vector(e, 0, 0.1);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::DegenerateCell);
  }
}

TEST(SelectVector, InsideEnlargedCone) {
  std::mt19937 rng(43);
  const GridChart chart = GridChart::uniform(2, -1, 1, 6);
  for (int i = 0; i < 100; ++i) {
    const ConeField f = build_field(random_sector_field(rng), chart);
    for (CellId c = 0; c < f.size(); ++c) {
      const Vec v = select_vector(f, c, 0.05);
      EXPECT_NEAR(norm(v), 1.0, 1e-12);
      EXPECT_TRUE(contains(enlarged_cell_cone(f, c, 0.05), v, true));
    }
  }
}

TEST(OuterHull, MinkowskiAndRotation) {
  std::mt19937 rng(47);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const GridChart chart = GridChart::uniform(2, -1, 1, 16);
  const double h = chart.spacing(0), diam = chart.cell_diameter();
  const ConeField mk = build_field(minkowski(), chart);
  const ConeField rot = build_field(vector_field({"-z", "y"}), chart);
  for (CellId c = 0; c < chart.cell_count(); ++c) {
    const Vec lo = chart.corner(c, 0);
    // direction of (-z, y) turns at rate 1/r; use the smallest radius in the cell
    double rmin = std::hypot(std::max({0.0, lo[0], -(lo[0] + h)}), std::max({0.0, lo[1], -(lo[1] + h)}));
    for (int k = 0; k < 20; ++k) {
      const Vec p(lo[0] + h * u(rng), lo[1] + h * u(rng));
      EXPECT_TRUE(is_wider(mk.cone(c), Cone::standard(1.0)));
      if (rmin <= 0.0) {
        EXPECT_TRUE(rot.cone(c).is_full());
        continue;
      }
      const Cone wide = enlarge(rot.cone(c), 2.0 * diam / rmin);
      EXPECT_TRUE(is_wider(wide, Cone::ray(Vec(-p[1], p[0])))) << c;
    }
  }
}
