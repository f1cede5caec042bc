#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ucmlab/svm2d.hpp"
#include "ucmlab/systems.hpp"

using namespace ucmlab;

namespace {

SvmState sample(std::uint64_t seed, const SvmParams& p = {}) {
  std::mt19937_64 rng(seed);
  return sample_svm_state(rng, p);
}

// Relaxed state: A = (F^T F)^-1, Acc = H^-2, so c = I and c_zz = 1.
SvmState relaxed(double H, const Vec2& U, const Matrix2& F) {
  return SvmState::from_primitive(H, U, F, svm_a_equilibrium(F), 1.0 / (H * H));
}

Matrix2 shear(double s) {
  Matrix2 F = Matrix2::identity();
  F(0, 1) = s;
  return F;
}

}  // namespace

TEST(Svm2d, ParamsValidation) {
  SvmParams p;
  EXPECT_NO_THROW(p.validate());
  p.g = 0.0;
  EXPECT_THROW(p.validate(), DomainError);
  p = SvmParams{};
  p.G_eps = -1.0;
  EXPECT_THROW(p.validate(), DomainError);
  p = SvmParams{};
  p.lambda = 0.0;
  EXPECT_THROW(p.validate(), DomainError);
  p = SvmParams{};
  p.G_eps = 0.0;  // shallow water limit is allowed
  EXPECT_NO_THROW(p.validate());
  EXPECT_DOUBLE_EQ(SvmParams{}.nu_eps(), 1.0);
}

TEST(Svm2d, PackRoundTrip) {
  const SvmState q = sample(1);
  const SvmVector v = pack(q);
  const SvmVector w = pack(unpack_svm(v.data()));
  for (int k = 0; k < kSvmDim; ++k) EXPECT_EQ(v[k], w[k]);
  const SvmVector y = pack_y(q);
  const SvmState b = unpack_svm_y(y.data());
  EXPECT_LT(frobenius(b.A() - q.A()), 1e-12 * frobenius(q.A()));
  EXPECT_NEAR(b.Acc(), q.Acc(), 1e-12 * q.Acc());
}

TEST(Svm2d, Admissibility) {
  SvmState q = sample(2);
  EXPECT_TRUE(is_admissible(q));
  SvmState dry = q;
  dry.H = 0.0;
  EXPECT_FALSE(is_admissible(dry));
  EXPECT_THROW(require_admissible(dry), DomainError);
  SvmState bad = q;
  bad.HAcc = -1.0;
  EXPECT_FALSE(is_admissible(bad));
  SvmState ind = q;
  ind.HA(0, 1) = 10.0 * (ind.HA(0, 0) + ind.HA(1, 1));
  EXPECT_FALSE(is_admissible(ind));
  EXPECT_THROW(flux_svm(ind, 0, SvmParams{}), DomainError);
}

TEST(Svm2d, FluxAtRelaxedStateIsHydrostatic) {
  SvmParams p;
  p.g = 2.0;
  p.G_eps = 3.0;
  const SvmState q = relaxed(1.5, {0.0, 0.0}, shear(0.3));
  const SvmVector f = flux_svm(q, 0, p);
  EXPECT_NEAR(f[0], 0.0, 1e-15);
  EXPECT_NEAR(f[1], 0.5 * p.g * 1.5 * 1.5, 1e-12);
  EXPECT_NEAR(f[2], 0.0, 1e-12);
}

TEST(Svm2d, NormalFluxIsLinearCombination) {
  const SvmParams p;
  const SvmState q = sample(3);
  const Vec2 n{0.6, -0.8};
  const SvmVector fn = flux_svm_normal(q, n, p);
  const SvmVector fx = flux_svm(q, 0, p), fy = flux_svm(q, 1, p);
  for (int k = 0; k < kSvmDim; ++k)
    EXPECT_NEAR(fn[k], n[0] * fx[k] + n[1] * fy[k], 1e-12 * (1.0 + std::abs(fn[k])));
}

TEST(Svm2d, SourceTerms) {
  SvmParams p;
  p.k = 0.5;
  const SvmState q = relaxed(2.0, {1.0, -1.0}, Matrix2::identity());
  const SvmVector s = source_svm(q, p, {0.1, 0.0});
  EXPECT_NEAR(s[1], -p.g * 2.0 * 0.1 - 0.5 * 2.0, 1e-14);
  EXPECT_NEAR(s[2], 0.5 * 2.0, 1e-14);
  for (int k = 7; k < kSvmDim; ++k) EXPECT_NEAR(s[k], 0.0, 1e-14);  // already relaxed
}

TEST(Svm2d, ExactRelaxation) {
  const SvmParams p;
  const SvmState q = sample(4);
  const SvmState a = relax_exact_svm(relax_exact_svm(q, 0.2, p), 0.3, p);
  const SvmState b = relax_exact_svm(q, 0.5, p);
  EXPECT_LT(frobenius(a.HA - b.HA), 1e-13 * frobenius(b.HA));
  EXPECT_NEAR(a.HAcc, b.HAcc, 1e-13 * b.HAcc);
  const SvmState inf = relax_exact_svm(q, 1e3, p);
  EXPECT_LT(frobenius(inf.A() - svm_a_equilibrium(q.F())), 1e-12 * frobenius(inf.A()));
  EXPECT_NEAR(inf.Acc(), 1.0 / (q.H * q.H), 1e-12 / (q.H * q.H));
  EXPECT_THROW(relax_exact_svm(q, -0.1, p), DomainError);
}

TEST(Svm2d, RelaxationKeepsKinematics) {
  const SvmState q = sample(5);
  const SvmState r = relax_exact_svm(q, 0.7, SvmParams{});
  EXPECT_EQ(r.H, q.H);
  EXPECT_EQ(r.HU, q.HU);
  EXPECT_EQ(r.HF.a, q.HF.a);
}

TEST(Svm2d, YRateChainRule) {
  const SvmParams p;
  const SvmState q = sample(6);
  const double h = 1e-5;
  auto y_at = [&](double t) { return svm_a_to_y(relax_exact_svm(q, t, p).A()); };
  const SpdMatrix2 fd = (1.0 / (2.0 * h)) * (-3.0 * y_at(0.0) + 4.0 * y_at(h) - y_at(2.0 * h));
  const SpdMatrix2 rate = svm_y_relaxation_rate(y_at(0.0), q.F(), p);
  EXPECT_LT(frobenius(fd - rate), 1e-4 * frobenius(rate));

  auto ycc_at = [&](double t) { return svm_acc_to_ycc(relax_exact_svm(q, t, p).Acc()); };
  const double rc = svm_ycc_relaxation_rate(ycc_at(0.0), q.H, p);
  const double hc = 1e-5 * std::min(p.lambda, ycc_at(0.0) / std::abs(rc));
  const double fdc = (-3.0 * ycc_at(0.0) + 4.0 * ycc_at(hc) - ycc_at(2.0 * hc)) / (2.0 * hc);
  EXPECT_NEAR(fdc, rc, 1e-5 * std::abs(rc));
}

TEST(Svm2d, YccRateMatchesAtRest) {
  const SvmParams p;
  EXPECT_NEAR(svm_ycc_relaxation_rate(std::pow(2.0, -0.5), 2.0, p), 0.0, 1e-15);
}

TEST(Svm2d, PrintedYRateDisagrees) {
  const SvmState q = sample(7);
  const SpdMatrix2 y = svm_a_to_y(q.A());
  const SpdMatrix2 a = svm_y_relaxation_rate(y, q.F(), SvmParams{});
  const SpdMatrix2 b = svm_y_relaxation_rate_published(y, q.F(), SvmParams{});
  EXPECT_GT(frobenius(a - b), 1e-3 * frobenius(a));
}

TEST(Svm2d, YMapsInvert) {
  const SpdMatrix2 A = sample(8).A();
  EXPECT_LT(frobenius(svm_y_to_a(svm_a_to_y(A)) - A), 1e-12 * frobenius(A));
  EXPECT_NEAR(svm_ycc_to_acc(svm_acc_to_ycc(0.37)), 0.37, 1e-15);
}

TEST(Svm2d, EnergyAtRelaxedState) {
  SvmParams p;
  p.G_eps = 2.0;
  const SvmState q = relaxed(1.5, {0.4, 0.0}, shear(0.5));
  // c = I, c_zz = 1: E = H/2 (|U|^2 + g H + 3 G)
  EXPECT_NEAR(energy_svm(q, p), 0.75 * (0.16 + 1.5 + 6.0), 1e-12);
  EXPECT_NEAR(dissipation_svm(q, p), 0.0, 1e-12);
}

TEST(Svm2d, DissipationNonnegativeUnderBothConventions) {
  const SvmParams p;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const SvmState q = sample(20 + s, p);
    EXPECT_GE(dissipation_svm(q, p, EnergyConvention::conformation), -1e-12);
    EXPECT_GE(dissipation_svm(q, p, EnergyConvention::literal_stress), -1e-12);
  }
}

TEST(Svm2d, StressConventionsRoundTrip) {
  SvmParams p;
  p.G_eps = 1.7;
  p.lambda = 0.3;
  const Conformation c = conformation(sample(9));
  for (auto conv : {StressConvention::direct, StressConvention::shifted}) {
    const Conformation back = conformation_from_stress(stress_from_conformation(c, p, conv), p, conv);
    EXPECT_LT(frobenius(back.c_H - c.c_H), 1e-12 * frobenius(c.c_H));
    EXPECT_NEAR(back.c_zz, c.c_zz, 1e-12 * c.c_zz);
  }
  const Stresses s = stress_from_conformation(c, p, StressConvention::shifted);
  EXPECT_NEAR(s.Sigma_H(0, 0), p.G_eps * (c.c_H(0, 0) - 1.0), 1e-12);
}

TEST(Svm2d, MomentumFluxIndependentOfIdentification) {
  const SvmParams p;
  const SvmState q = sample(10);
  const Conformation c = conformation(q);
  const SpdMatrix2 a =
      momentum_stress_flux(q.H, stress_from_conformation(c, p, StressConvention::direct), p, StressConvention::direct);
  const SpdMatrix2 b = momentum_stress_flux(q.H, stress_from_conformation(c, p, StressConvention::shifted), p,
                                            StressConvention::shifted);
  EXPECT_LT(frobenius(a - b), 1e-12 * frobenius(a));
}

TEST(Svm2d, ConstraintResidual) {
  SvmParams p;
  p.H_hat = 2.0;
  const Matrix2 F = shear(0.4);
  const SvmState q = relaxed(2.0 / det(F), {0.0, 0.0}, F);
  EXPECT_NEAR(constraint_residual(q, p), 0.0, 1e-14);
  const SvmState r = relaxed(3.0, {0.0, 0.0}, F);
  EXPECT_GT(std::abs(constraint_residual(r, p)), 0.1);
}

TEST(Svm2d, HessianBlockMatchesFiniteDifferences) {
  const double H = 1.3, Acc = 0.8, g = 1.5, mu = 0.7;
  // phi(tau, y) = g / tau + mu y^4 / tau^2 with tau = 1 / H and Acc = y^4.
  auto phi = [&](double tau, double y) { return g / tau + mu * std::pow(y, 4) / (tau * tau); };
  const double t0 = 1.0 / H, y0 = std::pow(Acc, 0.25), h = 1e-4;
  const double ptt = (phi(t0 + h, y0) - 2 * phi(t0, y0) + phi(t0 - h, y0)) / (h * h);
  const double pyy = (phi(t0, y0 + h) - 2 * phi(t0, y0) + phi(t0, y0 - h)) / (h * h);
  const double pty =
      (phi(t0 + h, y0 + h) - phi(t0 + h, y0 - h) - phi(t0 - h, y0 + h) + phi(t0 - h, y0 - h)) / (4 * h * h);
  const auto b = hessian_block(H, Acc, g, mu);
  EXPECT_NEAR(b[0], ptt, 1e-5 * std::abs(ptt));
  EXPECT_NEAR(b[1], pty, 1e-5 * std::abs(pty));
  EXPECT_NEAR(b[2], pty, 1e-5 * std::abs(pty));
  EXPECT_NEAR(b[3], pyy, 1e-5 * std::abs(pyy));
  const auto pub = hessian_block_published(H, Acc, g, mu);
  EXPECT_GT(std::abs(pub[1] - b[1]), 1e-3);
}

TEST(Svm2d, PiolaResidual) {
  const int nx = 8, ny = 6;
  std::vector<Matrix2> uniform(nx * ny, shear(0.3));
  for (double r : piola_residual(uniform, nx, ny, 0.1, 0.1, 1, 1)) EXPECT_EQ(r, 0.0);
  EXPECT_EQ(piola_residual(uniform, nx, ny, 0.1, 0.1, 1, 1).size(), std::size_t((nx - 2) * (ny - 2)));
  // HF(0, 0) = x has divergence 1 in the first column.
  std::vector<Matrix2> lin(nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) lin[j * nx + i](0, 0) = 0.1 * i;
  for (double r : piola_residual(lin, nx, ny, 0.1, 0.1, 1, 1)) EXPECT_NEAR(r, 1.0, 1e-12);
  EXPECT_TRUE(piola_residual(lin, 2, 2, 0.1, 0.1, 1, 1).empty());
}
