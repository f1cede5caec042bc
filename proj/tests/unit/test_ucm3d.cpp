#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ucmlab/systems.hpp"
#include "ucmlab/ucm3d.hpp"

using namespace ucmlab;

namespace {

Ucm3dState sample(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_ucm_state(rng, UcmParams{});
}

double max_diff(const UcmVector& a, const UcmVector& b) {
  double m = 0.0;
  for (int k = 0; k < kUcmDim; ++k) m = std::max(m, std::abs(a[k] - b[k]) / (1.0 + std::abs(b[k])));
  return m;
}

}  // namespace

TEST(Ucm3d, ParamsValidation) {
  UcmParams p;
  EXPECT_NO_THROW(p.validate());
  p.xi = 0.0;
  EXPECT_THROW(p.validate(), DomainError);
  p = UcmParams{};
  p.gamma = 1.0;
  EXPECT_THROW(p.validate(), DomainError);
  p = UcmParams{};
  p.kB_theta = -1.0;
  EXPECT_THROW(p.validate(), DomainError);
  p = UcmParams{};
  p.rho_hat = std::nan("");
  EXPECT_THROW(p.validate(), DomainError);
}

TEST(Ucm3d, RelaxationTimeFromKernel) {
  UcmParams p;
  p.xi = 6.0;
  p.K_H_prime = 0.5;
  EXPECT_DOUBLE_EQ(p.lambda(), 3.0);
}

TEST(Ucm3d, PackRoundTrip) {
  const Ucm3dState q = sample(1);
  const UcmVector v = pack(q);
  EXPECT_LT(max_diff(pack(unpack_ucm(v.data())), v), 1e-15);
  const UcmVector y = pack_y(q);
  const Ucm3dState back = unpack_ucm_y(y.data());
  EXPECT_LT(max_diff(pack(back), v), 1e-12);
}

TEST(Ucm3d, Admissibility) {
  Ucm3dState q = sample(2);
  EXPECT_TRUE(is_admissible(q));
  Ucm3dState neg = q;
  neg.rho = -1.0;
  EXPECT_FALSE(is_admissible(neg));
  EXPECT_THROW(require_admissible(neg), DomainError);
  Ucm3dState bad = q;
  bad.rhoA(0, 0) = -bad.rhoA(0, 0);
  EXPECT_FALSE(is_admissible(bad));
  Ucm3dState nan = q;
  nan.mom[1] = std::nan("");
  EXPECT_FALSE(is_admissible(nan));
  EXPECT_THROW(require_admissible(nan), DomainError);
}

TEST(Ucm3d, FluxAlongAxesMatchesNormalFlux) {
  const UcmParams p;
  const Ucm3dState q = sample(3);
  const UcmVector fx = flux_3d(q, 0, p), fy = flux_3d(q, 1, p), fz = flux_3d(q, 2, p);
  const Vec3 n{0.48, -0.6, 0.64};
  const UcmVector fn = flux_3d_normal(q, n, p);
  for (int k = 0; k < kUcmDim; ++k)
    EXPECT_NEAR(fn[k], n[0] * fx[k] + n[1] * fy[k] + n[2] * fz[k], 1e-12 * (1.0 + std::abs(fn[k])));
  // Mass flux is the momentum component.
  EXPECT_DOUBLE_EQ(fx[0], q.mom[0]);
  EXPECT_DOUBLE_EQ(fy[0], q.mom[1]);
}

TEST(Ucm3d, EquilibriumHasNoExtraStress) {
  const UcmParams p;
  Matrix3 F = Matrix3::identity();
  F(0, 1) = 0.4;
  F(2, 0) = -0.2;
  const Ucm3dState q = Ucm3dState::from_primitive(1.3, {0.1, 0.2, 0.3}, F, a_equilibrium(F, p));
  EXPECT_LT(frobenius(extra_stress(q, p)), 1e-13);
  EXPECT_NEAR(dissipation_3d(q, p), 0.0, 1e-12);
  const SpdMatrix3 sigma = cauchy_stress(q, p);
  EXPECT_NEAR(sigma(0, 0), -pressure(q.rho, p), 1e-12);
}

TEST(Ucm3d, DissipationNonnegative) {
  const UcmParams p;
  for (std::uint64_t s = 0; s < 50; ++s) EXPECT_GE(dissipation_3d(sample(100 + s), p), -1e-12);
}

TEST(Ucm3d, ExactRelaxationSemigroupAndRate) {
  const UcmParams p;
  const Ucm3dState q = sample(4);
  const Matrix3 F = q.F();
  const SpdMatrix3 A0 = q.A();
  const SpdMatrix3 two = relax_exact_3d(relax_exact_3d(A0, F, 0.3, p), F, 0.5, p);
  EXPECT_LT(frobenius(two - relax_exact_3d(A0, F, 0.8, p)), 1e-13 * frobenius(A0));
  const double h = 1e-6;
  const SpdMatrix3 fd = (1.0 / (2.0 * h)) * (relax_exact_3d(A0, F, 2.0 * h, p) - A0);
  const SpdMatrix3 rate = a_relaxation_rate(A0, F, p);
  EXPECT_LT(frobenius(fd - rate), 1e-5 * (1.0 + frobenius(rate)));
  EXPECT_THROW(relax_exact_3d(A0, F, -1.0, p), DomainError);
  EXPECT_LT(frobenius(relax_exact_3d(A0, F, 0.0, p) - A0), 1e-15 * frobenius(A0));
}

TEST(Ucm3d, ChainRuleYRateMatchesARate) {
  const UcmParams p;
  const Ucm3dState q = sample(5);
  const Matrix3 F = q.F();
  const SpdMatrix3 A0 = q.A();
  const double h = 1e-5;
  const SpdMatrix3 yp = a_to_y(relax_exact_3d(A0, F, h, p));
  const SpdMatrix3 y0 = a_to_y(A0);
  const SpdMatrix3 y2 = a_to_y(relax_exact_3d(A0, F, 2.0 * h, p));
  const SpdMatrix3 fd = (1.0 / (2.0 * h)) * (-3.0 * y0 + 4.0 * yp - y2);  // one-sided, O(h^2)
  const SpdMatrix3 rate = y_relaxation_rate(y0, F, p);
  EXPECT_LT(frobenius(fd - rate), 1e-4 * frobenius(rate));
}

TEST(Ucm3d, PrintedYRateDisagreesWithChainRule) {
  const UcmParams p;
  const Ucm3dState q = sample(6);
  const SpdMatrix3 y = a_to_y(q.A());
  const SpdMatrix3 a = y_relaxation_rate(y, q.F(), p);
  const SpdMatrix3 b = y_relaxation_rate_published(y, q.F(), p);
  EXPECT_GT(frobenius(a - b), 1e-3 * frobenius(a));
}

TEST(Ucm3d, AYMapsInvert) {
  const SpdMatrix3 A = sample(7).A();
  EXPECT_LT(frobenius(y_to_a(a_to_y(A)) - A), 1e-12 * frobenius(A));
  SpdMatrix3 bad;
  EXPECT_THROW(a_to_y(bad), DomainError);
}

TEST(Ucm3d, EntropyFormsDifferByDensityTerm) {
  const UcmParams p;
  const Ucm3dState q = sample(8);
  const double d = entropy_tilde_3d(q, p, EntropyForm::pressure_compatible) -
                   entropy_tilde_3d(q, p, EntropyForm::published);
  EXPECT_NEAR(d, 2.0 * p.kB_theta * q.rho * std::log(q.rho / p.rho_hat), 1e-10 * (1.0 + std::abs(d)));
}

TEST(Ucm3d, FreeEnergiesAgreeUpToConstantOnConstrainedStates) {
  const UcmParams p;
  std::mt19937_64 rng(9);
  double first = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Matrix3 F = random_deformation3(rng, 0.5, 2.0);
    const SpdMatrix3 A = random_spd3(rng, 0.2, 5.0);
    const double rho = p.rho_hat / det(F);
    if (!(rho > 0.0)) continue;
    const Ucm3dState q = Ucm3dState::from_primitive(rho, {0, 0, 0}, F, A);
    const double gap = free_energy_psi1(q, p) - free_energy_psi2(q, p);
    if (k == 0 || first == 0.0) first = gap;
    EXPECT_NEAR(gap, first, 1e-10);
  }
}

TEST(Ucm3d, KernelSolutionMatchesRelaxationForFrozenDeformation) {
  const UcmParams p;
  const Ucm3dState q = sample(10);
  const Matrix3 F = q.F();
  std::vector<PathSample> path;
  const int n = 4000;
  for (int k = 0; k <= n; ++k) path.push_back({2.0 * k / n, F});
  const SpdMatrix3 c = kernel_solution_c(path, congruence(F, q.A()), p);
  const SpdMatrix3 ref = congruence(F, relax_exact_3d(q.A(), F, 2.0, p));
  EXPECT_LT(frobenius(c - ref), 1e-6 * frobenius(ref));
}

TEST(Ucm3d, KernelSolutionRejectsBadHistory) {
  const UcmParams p;
  EXPECT_THROW(kernel_solution_c({}, SpdMatrix3::identity(), p), DomainError);
  std::vector<PathSample> back = {{1.0, Matrix3::identity()}, {0.5, Matrix3::identity()}};
  EXPECT_THROW(kernel_solution_c(back, SpdMatrix3::identity(), p), DomainError);
}

TEST(Ucm3d, LiebTrace) {
  EXPECT_NEAR(lieb_trace(Matrix3::identity(), SpdMatrix3::identity()), 3.0, 1e-15);
  SpdMatrix3 y = SpdMatrix3::identity();
  y(0, 0) = 4.0;
  EXPECT_NEAR(lieb_trace(Matrix3::identity(), y), 2.5, 1e-14);
  EXPECT_NEAR(lieb_trace(2.0 * Matrix3::identity(), y, 1.0), 4.0 * 6.0, 1e-13);
  SpdMatrix3 bad;
  EXPECT_THROW(lieb_trace(Matrix3::identity(), bad), DomainError);
}

TEST(Ucm3d, SourceCarriesBodyForceAndRelaxation) {
  UcmParams p;
  p.body_force = {0.0, 0.0, -9.81};
  const Ucm3dState q = sample(11);
  const UcmVector s = source_3d(q, p);
  EXPECT_EQ(s[0], 0.0);
  EXPECT_NEAR(s[3], -9.81 * q.rho, 1e-12 * q.rho);
  for (int k = 4; k < 13; ++k) EXPECT_EQ(s[k], 0.0);
  const SpdMatrix3 rate = q.rho * a_relaxation_rate(q.A(), q.F(), p);
  for (int k = 0; k < 6; ++k) EXPECT_DOUBLE_EQ(s[13 + k], rate.e[k]);
}
