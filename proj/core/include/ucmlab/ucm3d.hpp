#pragma once

#include <array>
#include <functional>
#include <vector>

#include "ucmlab/linalg.hpp"

namespace ucmlab {

struct UcmParams {
  double K_H_prime = 1.0;
  double kB_theta = 1.0;
  double xi = 4.0;
  double C0 = 1.0;
  double gamma = 2.0;
  double rho_hat = 1.0;
  Vec3 body_force{0.0, 0.0, 0.0};

  double lambda() const { return xi / (4.0 * K_H_prime); }
  // Throws DomainError on an invalid parameter set.
  void validate() const;
};

// Conserved variables. rhoA is the canonical dynamic metric.
struct Ucm3dState {
  double rho = 1.0;
  Vec3 mom{0.0, 0.0, 0.0};
  Matrix3 rhoF = Matrix3::identity();
  SpdMatrix3 rhoA = SpdMatrix3::identity();

  Vec3 velocity() const { return {mom[0] / rho, mom[1] / rho, mom[2] / rho}; }
  Matrix3 F() const { return (1.0 / rho) * rhoF; }
  SpdMatrix3 A() const { return (1.0 / rho) * rhoA; }

  static Ucm3dState from_primitive(double rho, const Vec3& u, const Matrix3& F, const SpdMatrix3& A);
};

// Flat layout: rho, mom(3), rhoF(9, row-major), rhoA or rhoY (6, upper triangle).
constexpr int kUcmDim = 19;
using UcmVector = std::array<double, kUcmDim>;

UcmVector pack(const Ucm3dState& q);
Ucm3dState unpack_ucm(const double* v);

// Same layout with rhoY = rho A^-2 in the metric slots.
UcmVector pack_y(const Ucm3dState& q);
Ucm3dState unpack_ucm_y(const double* v);

bool is_admissible(const Ucm3dState& q);
void require_admissible(const Ucm3dState& q);

double pressure(double rho, const UcmParams& p);
double internal_energy(double rho, const UcmParams& p);  // e0 per unit mass

// tau = 2 rho (KH' c - kT I), sigma = -p I + tau.
SpdMatrix3 extra_stress(const Ucm3dState& q, const UcmParams& p);
SpdMatrix3 cauchy_stress(const Ucm3dState& q, const UcmParams& p);
SpdMatrix3 conformation(const Ucm3dState& q);

UcmVector flux_3d(const Ucm3dState& q, int dir, const UcmParams& p);
// Flux along an arbitrary direction n (sum_j n_j flux_j).
UcmVector flux_3d_normal(const Ucm3dState& q, const Vec3& n, const UcmParams& p);
UcmVector source_3d(const Ucm3dState& q, const UcmParams& p);

SpdMatrix3 a_to_y(const SpdMatrix3& A);
SpdMatrix3 y_to_a(const SpdMatrix3& Y);

enum class EntropyForm {
  published,           // rho(|u|^2/2 + e0 + KH' tr(FAF^T) + tr(Y^2))
  pressure_compatible  // published + 2 kT rho log(rho / rho_hat)
};

double entropy_tilde_3d(const Ucm3dState& q, const UcmParams& p,
                        EntropyForm form = EntropyForm::published);
double energy_E_3d(const Ucm3dState& q, const UcmParams& p);
// psi1 = e0 + KH' tr c - kT log|c|
double free_energy_psi1(const Ucm3dState& q, const UcmParams& p);
// psi2 = e0 + KH' tr c + 2 kT log(rho/rho_hat) - kT log|A|
double free_energy_psi2(const Ucm3dState& q, const UcmParams& p);
// D = tr((KH' c - kT I) c^-1 (KH' c - kT I)); energy is dissipated at rate (4 rho / xi) D.
double dissipation_3d(const Ucm3dState& q, const UcmParams& p);

// dA/dt = (4/xi)(kT F^-1 F^-T - KH' A)
SpdMatrix3 a_relaxation_rate(const SpdMatrix3& A, const Matrix3& F, const UcmParams& p);
SpdMatrix3 a_equilibrium(const Matrix3& F, const UcmParams& p);
SpdMatrix3 relax_exact_3d(const SpdMatrix3& A0, const Matrix3& F, double dt, const UcmParams& p);

// dY/dt obtained from the A-rate by the chain rule:
// -(4/xi) [kT Y (B A + A B) Y - 2 KH' Y], B = F^-1 F^-T.
SpdMatrix3 y_relaxation_rate(const SpdMatrix3& Y, const Matrix3& F, const UcmParams& p);
// The printed form -(4/xi) Y (kT Z - 2 KH' I) Y, Z = F^-T F^-1 A^-1 + A^-1 F^-1 F^-T.
SpdMatrix3 y_relaxation_rate_published(const SpdMatrix3& Y, const Matrix3& F, const UcmParams& p);

// tr(F Y^power F^T). Jointly convex in (F, Y) for power in [-1, 0]; DomainError if Y is not SPD.
double lieb_trace(const Matrix3& F, const SpdMatrix3& Y, double power = -0.5);

struct PathSample {
  double s;
  Matrix3 F;
};

// c(t) from the history of F along one particle, trapezoidal quadrature.
// The samples must be sorted in s, start at t0 and end at t.
SpdMatrix3 kernel_solution_c(const std::vector<PathSample>& path, const SpdMatrix3& c0,
                             const UcmParams& p);

struct MotionSample {
  Vec3 u{};
  Matrix3 F = Matrix3::identity();
  SpdMatrix3 A = SpdMatrix3::identity();
};

using MotionField = std::function<MotionSample(double t, const Vec3& x)>;

struct MaxwellResidual {
  Matrix3 residual;         // lambda tau^ + lambda div(u) tau + tau - 2 mu D
  double norm = 0.0;        // Frobenius norm of residual
  double f_transport = 0.0; // |dF/dt + u.grad F - grad(u) F|, sampler consistency
  double a_transport = 0.0; // |dA/dt + u.grad A - A-relaxation rate|
};

// Centered differences of spacing h in t and x. rho = rho_hat / det F.
// Throws DomainError naming the failed constraint when the sampler's F or A
// transport residual exceeds consistency_tol.
MaxwellResidual maxwell_residual(const MotionField& field, double t, const Vec3& x, double h,
                                 const UcmParams& p, double consistency_tol = 1e-3);

}  // namespace ucmlab
