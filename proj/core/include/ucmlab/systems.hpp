#pragma once

#include <random>

#include "ucmlab/entropycheck.hpp"
#include "ucmlab/svm2d.hpp"
#include "ucmlab/ucm3d.hpp"

namespace ucmlab {

// ---- random admissible data ---------------------------------------------

double log_uniform(std::mt19937_64& rng, double lo, double hi);
Matrix2 random_rotation2(std::mt19937_64& rng);
Matrix3 random_rotation3(std::mt19937_64& rng);
// R diag(eigenvalues log-uniform in [lo, hi]) R^T.
SpdMatrix2 random_spd2(std::mt19937_64& rng, double lo, double hi);
SpdMatrix3 random_spd3(std::mt19937_64& rng, double lo, double hi);
// U diag(s) V^T with singular values log-uniform in [lo, hi] and det > 0.
Matrix2 random_deformation2(std::mt19937_64& rng, double lo, double hi);
Matrix3 random_deformation3(std::mt19937_64& rng, double lo, double hi);

// Depth log-uniform in [0.1, 10], U uniform in [-2, 2] sqrt(gH), F singular
// values log-uniform in [0.1, 10], A = Y^-1/2 with Y eigenvalues log-uniform in
// [1e-2, 1e2], Ycc log-uniform in [1e-2, 1e2].
SvmState sample_svm_state(std::mt19937_64& rng, const SvmParams& p);
// Same ranges with rho for H; velocity scale sqrt(gamma C0 rho^(gamma-1)).
Ucm3dState sample_ucm_state(std::mt19937_64& rng, const UcmParams& p);

// ---- systems for the checker --------------------------------------------

// SVM in Y variables (H, HU, HF, HY^H, HYcc) with entropy E~.
SystemInterface svm_y_system(const SvmParams& p);
// 3D UCM in Y variables (rho, rho u, rho F, rho Y).
SystemInterface ucm_y_system(const UcmParams& p, EntropyForm form = EntropyForm::pressure_compatible);

// Controls.
SystemInterface burgers_system();
SystemInterface shallow_water_1d_system(double g);
SystemInterface transport_system(int n, double u);
// Pressureless gas (rho, rho u): Jordan block at every state; must fail.
SystemInterface pressureless_gas_system();

}  // namespace ucmlab
