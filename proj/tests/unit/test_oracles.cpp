#include <gtest/gtest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <cmath>

#include "ucmlab/oracles.hpp"

using namespace ucmlab;

TEST(Bessel, MatchesBoost) {
  for (double x : {0.0, 1e-8, 0.3, 1.0, 5.0, 12.5, 29.9}) {
    const double ref = boost::math::cyl_bessel_i(1, x);
    EXPECT_NEAR(bessel_i1(x), ref, 1e-14 * (1.0 + ref)) << x;
  }
  EXPECT_DOUBLE_EQ(bessel_i1_over_x(0.0), 0.5);
  EXPECT_NEAR(bessel_i1_over_x(2.0), boost::math::cyl_bessel_i(1, 2.0) / 2.0, 1e-15);
}

TEST(Bessel, DomainErrors) {
  EXPECT_THROW(bessel_i1(-1.0), DomainError);
  EXPECT_THROW(bessel_i1(31.0), DomainError);
  EXPECT_THROW(bessel_i1(std::nan("")), DomainError);
  EXPECT_THROW(bessel_i1_over_x(40.0), DomainError);
}

TEST(Stokes, ProfileEdges) {
  EXPECT_EQ(stokes_profile(0.5, 0.4), 0.0);
  EXPECT_NEAR(stokes_profile(0.0, 0.7), 1.0, 1e-12);
  EXPECT_NEAR(stokes_profile(0.0, 0.0), 1.0, 1e-12);
  // Jump at the front equals exp(-y).
  EXPECT_NEAR(stokes_profile(0.3, 0.3), std::exp(-0.3), 1e-12);
  EXPECT_THROW(stokes_profile(-0.1, 1.0), DomainError);
  EXPECT_THROW(stokes_profile(0.1, -1.0), DomainError);
  EXPECT_THROW(stokes_profile_simpson(0.1, 1.0, 7), std::invalid_argument);
}

TEST(Stokes, QuadraturesAgree) {
  for (double r : {0.05, 0.5, 2.0, 10.0})
    for (double f : {0.0, 0.25, 0.5, 0.9, 0.999}) {
      const double y = f * r;
      EXPECT_NEAR(stokes_profile(y, r), stokes_profile_simpson(y, r, 20000), 1e-10) << y << " " << r;
    }
}

TEST(Stokes, MonotoneInDepth) {
  double prev = 2.0;
  for (double y = 0.0; y < 0.7; y += 0.01) {
    const double v = stokes_profile(y, 0.7);
    EXPECT_LE(v, prev + 1e-14);
    prev = v;
  }
}

TEST(Stokes, Scalings) {
  StokesSolution s;
  s.G_eps = 4.0;
  s.lambda = 0.5;
  EXPECT_DOUBLE_EQ(s.y_of(1.0), 1.0 / (2 * 0.5 * 2.0));
  EXPECT_DOUBLE_EQ(s.r_of(1.0), 1.0);
  EXPECT_DOUBLE_EQ(s.front(1.0), 2.0);
  s.scaling = StokesScaling::literal;
  EXPECT_DOUBLE_EQ(s.y_of(1.0), 1.0);
  EXPECT_DOUBLE_EQ(s.r_of(1.0), 2.0);
  s.lambda = 0.0;
  EXPECT_THROW(s.validate(), DomainError);
}

TEST(Stokes, DisplacementVanishesAheadOfFront) {
  StokesSolution s;
  s.DeltaX = 0.01;
  EXPECT_EQ(stokes_displacement(0.5, 0.6, s), 0.0);
  EXPECT_NEAR(stokes_displacement(0.5, 0.0, s), 0.01, 1e-14);
  EXPECT_NEAR(stokes_displacement(0.5, 0.2, s), stokes_displacement_simpson(0.5, 0.2, s), 1e-12);
  EXPECT_THROW(stokes_displacement(-1.0, 0.0, s), DomainError);
}

TEST(Stokes, Fig1TableCsv) {
  const Fig1Table t = fig1_curves({0.0, 0.05, 0.5}, {0.1, 0.7});
  ASSERT_EQ(t.values.size(), 2u);
  EXPECT_NEAR(t.values[0][0], 1.0, 1e-12);
  EXPECT_EQ(t.values[0][2], 0.0);
  EXPECT_GT(t.values[1][2], 0.0);
  const std::string csv = t.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "y,t/lambda=0.10000000000000001,t/lambda=0.69999999999999996");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_EQ(fig1_default_taus().size(), 7u);
}

TEST(Stoker, StarStateSatisfiesJumpConditions) {
  const double g = 9.81, HL = 2.0, HR = 0.5;
  const StokerStar s = stoker_star(HL, HR, g);
  EXPECT_LT(s.residual, 1e-12);
  EXPECT_GT(s.h_star, HR);
  EXPECT_LT(s.h_star, HL);
  // Rankine-Hugoniot for mass and momentum across the shock.
  const double S = s.shock_speed;
  EXPECT_NEAR(S * (s.h_star - HR), s.h_star * s.u_star, 1e-10);
  const double mom_l = s.h_star * s.u_star * s.u_star + 0.5 * g * s.h_star * s.h_star;
  const double mom_r = 0.5 * g * HR * HR;
  EXPECT_NEAR(S * s.h_star * s.u_star, mom_l - mom_r, 1e-9);
}

TEST(Stoker, Profiles) {
  const double g = 1.0;
  auto far_left = stoker_dambreak(2.0, 1.0, g, 0.4, -5.0);
  EXPECT_DOUBLE_EQ(far_left.first, 2.0);
  EXPECT_DOUBLE_EQ(far_left.second, 0.0);
  auto far_right = stoker_dambreak(2.0, 1.0, g, 0.4, 5.0);
  EXPECT_DOUBLE_EQ(far_right.first, 1.0);
  // Reflection symmetry for HL < HR.
  auto a = stoker_dambreak(2.0, 1.0, g, 0.3, 0.1);
  auto b = stoker_dambreak(1.0, 2.0, g, 0.3, -0.1);
  EXPECT_NEAR(a.first, b.first, 1e-14);
  EXPECT_NEAR(a.second, -b.second, 1e-14);
  // Dry bed: front at 2 sqrt(g HL) t.
  EXPECT_TRUE(stoker_star(1.0, 0.0, g).dry);
  EXPECT_EQ(stoker_dambreak(1.0, 0.0, g, 1.0, 2.01).first, 0.0);
  EXPECT_GT(stoker_dambreak(1.0, 0.0, g, 1.0, 1.9).first, 0.0);
}

TEST(Stoker, Errors) {
  EXPECT_THROW(stoker_star(1.0, 2.0, 1.0), DomainError);
  EXPECT_THROW(stoker_star(0.0, 0.0, 1.0), DomainError);
  EXPECT_THROW(stoker_star(2.0, 1.0, 0.0), DomainError);
  EXPECT_THROW(stoker_dambreak(2.0, 1.0, 1.0, -1.0, 0.0), DomainError);
}

TEST(Manufactured, SamplerIsConsistentWithTransport) {
  const UcmParams p;
  const ManufacturedMotion m = manufactured_motion(3, p);
  const MaxwellResidual r = maxwell_residual(m, 0.3, {0.2, 0.4, 0.1}, 0.005, p, 1e-2);
  EXPECT_LT(r.f_transport, 1e-3);
  EXPECT_LT(r.a_transport, 1e-3);
  const MotionSample s0 = m(0.0, {0.1, 0.2, 0.3});
  for (int k = 0; k < 9; ++k) EXPECT_NEAR(s0.F.a[k], Matrix3::identity().a[k], 1e-15);
}

TEST(Manufactured, MaxwellResidualIsSecondOrder) {
  const UcmParams p;
  const ManufacturedMotion m = manufactured_motion(7, p);
  const Vec3 x{0.3, 0.2, 0.1};
  const double r1 = maxwell_residual(m, 0.5, x, 0.02, p, 0.1).norm;
  const double r2 = maxwell_residual(m, 0.5, x, 0.01, p, 0.1).norm;
  EXPECT_NEAR(std::log2(r1 / r2), 2.0, 0.3);
}

TEST(ShearWave, DecayingRootAndState) {
  ShearWave w;
  w.G_eps = 2.0;
  w.lambda = 0.3;
  const auto s = w.sigma();
  EXPECT_NEAR(std::abs(w.lambda * s * s + s + w.G_eps * w.k * w.k * w.lambda), 0.0, 1e-10);
  EXPECT_LT(s.real(), 0.0);
  EXPECT_NEAR(w.displacement(0.0, 0.25), w.amp, 1e-15);
  const SvmState q = w.state(0.1, 0.3);
  EXPECT_TRUE(is_admissible(q));
  EXPECT_DOUBLE_EQ(q.H, w.H);
}
