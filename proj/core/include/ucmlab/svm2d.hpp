#pragma once

#include <array>
#include <vector>

#include "ucmlab/linalg.hpp"

namespace ucmlab {

struct SvmParams {
  double g = 1.0;
  double G_eps = 1.0;
  double lambda = 1.0;
  double k = 0.0;
  double H_hat = 1.0;

  double nu_eps() const { return G_eps * lambda; }
  void validate() const;
};

struct SvmState {
  double H = 1.0;
  Vec2 HU{0.0, 0.0};
  Matrix2 HF = Matrix2::identity();
  SpdMatrix2 HA = SpdMatrix2::identity();
  double HAcc = 1.0;

  Vec2 U() const { return {HU[0] / H, HU[1] / H}; }
  Matrix2 F() const { return (1.0 / H) * HF; }
  SpdMatrix2 A() const { return (1.0 / H) * HA; }
  double Acc() const { return HAcc / H; }

  static SvmState from_primitive(double H, const Vec2& U, const Matrix2& F, const SpdMatrix2& A,
                                 double Acc);
};

// Flat layout: H, HU(2), HF(4, row-major: xa xb ya yb), HA(3: aa ab bb), HAcc.
constexpr int kSvmDim = 11;
using SvmVector = std::array<double, kSvmDim>;

SvmVector pack(const SvmState& q);
SvmState unpack_svm(const double* v);

// Y-representation: HY^H in the HA slots and H Y^cc in the HAcc slot.
SvmVector pack_y(const SvmState& q);
SvmState unpack_svm_y(const double* v);

bool is_admissible(const SvmState& q);
void require_admissible(const SvmState& q);

SvmVector flux_svm(const SvmState& q, int dir, const SvmParams& p);
SvmVector flux_svm_normal(const SvmState& q, const Vec2& n, const SvmParams& p);
SvmVector source_svm(const SvmState& q, const SvmParams& p, const Vec2& grad_zb);

// Relaxation part of the source only (metric slots), per unit depth.
SpdMatrix2 svm_a_equilibrium(const Matrix2& F);
SpdMatrix2 svm_a_relaxation_rate(const SpdMatrix2& A, const Matrix2& F, const SvmParams& p);
double svm_acc_relaxation_rate(double Acc, double H, const SvmParams& p);
// Exact exponential step with F, H frozen; returns the relaxed state.
SvmState relax_exact_svm(const SvmState& q, double dt, const SvmParams& p);

struct Stresses {
  SpdMatrix2 Sigma_H;
  double Sigma_zz;
};
Stresses stresses(const SvmState& q, const SvmParams& p);

struct Conformation {
  SpdMatrix2 c_H;
  double c_zz;
};
Conformation conformation(const SvmState& q);

// Energy conventions. `conformation` writes the log and dissipation terms in
// c = Sigma / G; `literal_stress` evaluates the printed formulas with Sigma itself.
enum class EnergyConvention { conformation, literal_stress };

// E = H/2 (|U|^2 + gH + G (tr c_H + c_zz - log(c_zz |c_H|)))
double energy_svm(const SvmState& q, const SvmParams& p,
                  EnergyConvention conv = EnergyConvention::conformation);
// Same with log(A^cc |A^H|) in place of log(c_zz |c_H|).
double energy_svm_material(const SvmState& q, const SvmParams& p,
                           EnergyConvention conv = EnergyConvention::conformation);
// E~ = H/2 (|U|^2 + gH + tr Sigma^H + Sigma^zz + tr(Y^H Y^H))
double energy_tilde_svm(const SvmState& q, const SvmParams& p);
// conformation: D = G/(2 lambda) (tr c + tr c^-1 + c_zz + 1/c_zz - 6)
// literal_stress: D = (tr S + tr S^-1 + S_zz + 1/S_zz - 6) / (G lambda)
double dissipation_svm(const SvmState& q, const SvmParams& p,
                       EnergyConvention conv = EnergyConvention::conformation);
// U (E + g H^2 / 2) + G H (c_zz I - c_H) U, or with Sigma for literal_stress.
Vec2 energy_flux_svm(const SvmState& q, const SvmParams& p,
                     EnergyConvention conv = EnergyConvention::conformation);

// Stress identification used by the bridge to the quasilinear Sigma formulation.
enum class StressConvention {
  direct,  // Sigma = G c
  shifted  // Sigma = G (c - I), i.e. c = lambda Sigma / nu + I
};
Stresses stress_from_conformation(const Conformation& c, const SvmParams& p, StressConvention conv);
Conformation conformation_from_stress(const Stresses& s, const SvmParams& p, StressConvention conv);
// Momentum flux stress part (g H^2/2 + G H c_zz) I - G H c_H written through Sigma.
SpdMatrix2 momentum_stress_flux(double H, const Stresses& s, const SvmParams& p,
                                StressConvention conv);

double constraint_residual(const SvmState& q, const SvmParams& p);

SpdMatrix2 svm_a_to_y(const SpdMatrix2& A);
SpdMatrix2 svm_y_to_a(const SpdMatrix2& Y);
double svm_acc_to_ycc(double Acc);
double svm_ycc_to_acc(double Ycc);

// dY/dt from the chain rule: -Y (B A + A B - 2 A^2) Y / lambda, B = (F^T F)^-1.
SpdMatrix2 svm_y_relaxation_rate(const SpdMatrix2& Y, const Matrix2& F, const SvmParams& p);
// Printed form: -Y (Z - Y) Y / lambda, Z = (A F F^T)^-1 + (F F^T A)^-1.
SpdMatrix2 svm_y_relaxation_rate_published(const SpdMatrix2& Y, const Matrix2& F,
                                           const SvmParams& p);
// (H^-2 Ycc^-3 - Ycc) / (4 lambda)
double svm_ycc_relaxation_rate(double Ycc, double H, const SvmParams& p);

// Hessian in (1/H, Ycc) of g H + mu H^2 Ycc^4 (A_cc = Ycc^4).
std::array<double, 4> hessian_block(double H, double Acc, double g, double mu);
// The block as printed, off-diagonal -2 mu H^3 A^(3/4) and corner 2 mu H^2 A^(1/2).
std::array<double, 4> hessian_block_published(double H, double Acc, double g, double mu);

// Centered-difference divergence of the material columns of HF. hf holds
// nx*ny blocks, x fastest, including gx / gy ghost layers on each side (gy = 0
// for a slab varying in x only). Returns the per-cell max over both columns for
// the (nx - 2 gx) * (ny - 2 gy) interior cells.
std::vector<double> piola_residual(const std::vector<Matrix2>& hf, int nx, int ny, double dx,
                                   double dy, int gx, int gy);

}  // namespace ucmlab
