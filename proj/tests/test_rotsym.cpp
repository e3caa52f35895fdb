#include "test_util.hpp"

using namespace ssg;
using namespace ssg::testing;

TEST(RotsymRhs, SpecExamples) {
  const Vec c = vec({1.5, -0.6});
  const Vec at0 = rotsym_rhs(RotState{0.0, c, Vec::Zero(2)}, 3);
  EXPECT_EQ(at0(0), -0.5);
  EXPECT_NEAR(at0(1), 0.2, 1e-16);
  EXPECT_EQ(rotsym_rhs(RotState{2.0, Vec::Zero(1), Vec::Zero(1)}, 2)(0), 0.0);
  EXPECT_EQ(rotsym_rhs(RotState{1.0, vec({0.0}), vec({1.0})}, 2)(0), 0.0);
}

TEST(RotsymRhs, ErrorsOnBadRadius) {
  EXPECT_EQ(error_kind_of([] { rotsym_rhs(RotState{-0.1, vec({0.0}), vec({0.0})}, 2); }), ErrorKind::invalid_radius);
  EXPECT_EQ(error_kind_of([] { rotsym_rhs(RotState{NAN, vec({0.0}), vec({0.0})}, 2); }), ErrorKind::invalid_radius);
}

TEST(Shoot, ZeroDataIsGlobalAndFlat) {
  const ShootResult s = shoot(Vec::Zero(2), 2, 50.0);
  EXPECT_EQ(s.outcome, ShootOutcome::global_to_rmax);
  EXPECT_EQ(s.end_radius, 50.0);
  EXPECT_EQ(s.max_abs_u, 0.0);
  EXPECT_EQ(s.max_abs_ur, 0.0);
  EXPECT_GE(s.trajectory.size(), 200u);
  EXPECT_EQ(s.trajectory.back().r, 50.0);
}

TEST(Shoot, UnitDataIsNotGlobal) {
  const ShootResult s = shoot(vec({1.0}), 2, 50.0);
  EXPECT_NE(s.outcome, ShootOutcome::global_to_rmax);
  EXPECT_LT(s.end_radius, 50.0);
  if (s.outcome == ShootOutcome::diverged) {
    EXPECT_FALSE(s.exceeded.empty());
  }
}

TEST(Shoot, AntipodalComponentsStayMirrored) {
  const ShootResult s = shoot(vec({1.0, -1.0}), 3, 50.0);
  for (const auto& st : s.trajectory) {
    EXPECT_EQ(st.u(0), -st.u(1));
    EXPECT_EQ(st.ur(0), -st.ur(1));
  }
}

TEST(Shoot, OddSymmetry) {
  const ShootResult a = shoot(vec({0.5}), 2, 50.0), b = shoot(vec({-0.5}), 2, 50.0);
  ASSERT_EQ(a.trajectory.size(), b.trajectory.size());
  EXPECT_EQ(a.outcome, b.outcome);
  for (std::size_t k = 0; k < a.trajectory.size(); ++k) {
    EXPECT_EQ(a.trajectory[k].r, b.trajectory[k].r);
    EXPECT_EQ(a.trajectory[k].u(0), -b.trajectory[k].u(0));
  }
}

TEST(Shoot, FirstStepMatchesSeriesModel) {
  for (int n : {1, 2, 3, 5}) {
    const double c = 0.8;
    const ShootResult s = shoot(vec({c}), n, 10.0);
    ASSERT_GE(s.trajectory.size(), 3u);
    const RotState& st = s.trajectory[2];
    const double r = st.r;
    const double model = c - (c / n) * r * r / 2.0;
    EXPECT_LE(std::abs(st.u(0) - model), 10.0 * r * r * r * r + 1e-11) << n;
  }
}

TEST(Shoot, ArgumentValidation) {
  EXPECT_EQ(error_kind_of([] { shoot(vec({1.0}), 2, 0.0); }), ErrorKind::invalid_radius);
  EXPECT_EQ(error_kind_of([] { shoot(vec({1.0}), 0, 5.0); }), ErrorKind::invalid_argument);
  EXPECT_EQ(error_kind_of([] { shoot(vec({1.0}), 2, 5.0, ShootThresholds{-1, 1, 1}); }), ErrorKind::invalid_argument);
}

TEST(Shoot, TinyThresholdsClassifyOutcome) {
  // c = 0.1 swings below -0.5 before the slope blows up.
  const ShootResult s = shoot(vec({0.1}), 2, 5.0, ShootThresholds{0.5, 1e6, 1e-14});
  EXPECT_EQ(s.outcome, ShootOutcome::diverged);
  EXPECT_EQ(s.exceeded, "u");
  EXPECT_GT(s.trajectory.back().u.cwiseAbs().maxCoeff(), 0.5);
  const ShootResult d = shoot(vec({1.0}), 2, 5.0, ShootThresholds{1e6, 10.0, 1e-14});
  EXPECT_EQ(d.outcome, ShootOutcome::diverged);
  EXPECT_EQ(d.exceeded, "ur");
  EXPECT_GT(d.trajectory.back().ur.cwiseAbs().maxCoeff(), 10.0);
}

TEST(Scan, ZeroRow) {
  const auto rows = scan({Vec::Zero(1)}, 2, 50.0);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].outcome, ShootOutcome::global_to_rmax);
  EXPECT_EQ(error_kind_of([] { scan({}, 2, 50.0); }), ErrorKind::invalid_argument);
}

// Observation only: no global trajectory found for the standard scan set.
TEST(Scan, StandardSetFindsNoGlobalTrajectory) {
  std::vector<Vec> cs;
  for (double c : {0.1, 0.5, 1.0, 2.0}) {
    cs.push_back(vec({c}));
    cs.push_back(vec({-c}));
  }
  for (const auto& row : scan(cs, 2, 50.0)) EXPECT_NE(row.outcome, ShootOutcome::global_to_rmax) << row.c(0);
}
