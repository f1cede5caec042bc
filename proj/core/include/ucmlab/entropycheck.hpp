#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ucmlab/linalg.hpp"

namespace ucmlab {

using StateVec = Eigen::VectorXd;
using DenseMat = Eigen::MatrixXd;

// A conservation-law system as seen by the checker.
struct SystemInterface {
  std::string name;
  int n = 0;
  int space_dim = 1;
  // Flux along a unit direction (components beyond space_dim are ignored).
  std::function<StateVec(const StateVec& q, const Vec3& dir)> flux;
  std::function<double(const StateVec& q)> entropy;
  // Optional additive split of the entropy. When present the FD Hessian is
  // summed term by term, so round-off scales with each term instead of the total.
  std::vector<std::function<double(const StateVec& q)>> entropy_terms;
  std::function<bool(const StateVec& q)> admissible;
  std::function<StateVec(std::mt19937_64& rng)> sampler;
  // Optional: rows are involution covectors L with L dq = 0 preserved by the flux along dir.
  std::function<DenseMat(const StateVec& q, const Vec3& dir)> involution;
  // Optional: columns span the finite-difference frame at q (dq = T dz).
  std::function<DenseMat(const StateVec& q)> frame;
};

enum class FdFrame {
  uniform,  // T = (1 + |q|inf) I
  adapted   // the system's frame, falling back to uniform
};

struct FdOptions {
  double step = 3e-2;  // in frame coordinates
  FdFrame frame = FdFrame::adapted;
  int max_shrink = 4;  // shrink by 4 when the stencil leaves the admissible set
  int richardson = 2;  // extrapolation levels over steps h, h/2, ..., h/2^levels
};

// Step 1e-5 (1 + |q|inf) in the uniform frame with a single halving.
FdOptions uniform_fd();

DenseMat fd_frame(const SystemInterface& sys, const StateVec& q, FdFrame frame);

struct FdResult {
  DenseMat value;     // Richardson-extrapolated, O(h^(2 levels + 2))
  DenseMat coarse;    // M(h)
  double step = 0.0;  // h actually used after shrinking
};

// Hessian of the entropy in frame coordinates z (q = q0 + T z).
FdResult fd_hessian(const SystemInterface& sys, const StateVec& q, const DenseMat& T, double h,
                    int max_shrink = 4, int levels = 2);
// Plain Hessian in the original coordinates with uniform step h, no Richardson.
DenseMat fd_hessian(const SystemInterface& sys, const StateVec& q, double h);

// Jacobian of T^-1 F(q0 + T z) along dir.
FdResult fd_jacobian(const SystemInterface& sys, const StateVec& q, const Vec3& dir,
                     const DenseMat& T, double h, int max_shrink = 4, int levels = 2);
DenseMat fd_jacobian(const SystemInterface& sys, const StateVec& q, const Vec3& dir, double h);

struct DefectResult {
  double defect = 0.0;      // projected on the involution kernel when covectors exist
  double raw = 0.0;         // ||S - S^T|| / ||S|| without projection
  double coarse = 0.0;      // projected defect at step h without extrapolation
  double min_hessian_eig = 0.0;
  double step = 0.0;
};

double antisymmetry_ratio(const DenseMat& S);

// ||P (S - S^T) P||_F / ||P S P||_F, S = Hess(entropy) J_dir.
DefectResult symmetrization_defect(const SystemInterface& sys, const StateVec& q, const Vec3& dir,
                                   const FdOptions& opt = {});
double symmetrization_defect(const SystemInterface& sys, const StateVec& q, const Vec3& dir,
                             double h);

// Orthogonal projector onto ker L (rows of L are covectors).
DenseMat kernel_projector(const DenseMat& L);

// Eigenvalues of a real matrix by Hessenberg reduction and shifted QR.
std::vector<std::complex<double>> real_spectrum(const DenseMat& M);

std::vector<std::complex<double>> characteristic_speeds(const SystemInterface& sys,
                                                        const StateVec& q, const Vec3& dir,
                                                        const FdOptions& opt = {});
double max_imag(const std::vector<std::complex<double>>& speeds);
double spectral_radius(const std::vector<std::complex<double>>& speeds);

struct ConvexityResult {
  double worst = 0.0;           // max f(mid) - (f(a) + f(b)) / 2
  double worst_relative = 0.0;  // the same divided by max(|f(a)|, |f(b)|, tiny)
  long trials = 0;
};

ConvexityResult convexity_sample(const std::function<double(const StateVec&)>& f,
                                 const std::function<StateVec(std::mt19937_64&)>& sampler,
                                 long trials, std::uint64_t seed);

// ---- reporting ----------------------------------------------------------

struct CheckResult {
  std::string name;
  std::string system;
  long samples = 0;
  std::uint64_t seed = 0;
  double fd_step = 0.0;
  std::string fd_frame;
  double min_hessian_eig = 0.0;
  double max_defect = 0.0;
  double max_raw_defect = 0.0;
  double max_imag = 0.0;
  double tol_defect = 0.0;
  double tol_imag = 0.0;
  bool pass = false;
  std::vector<std::pair<std::string, std::string>> extra;
};

struct VerificationReport {
  std::vector<CheckResult> checks;

  bool passed() const;
  std::string to_text() const;
  // Throws std::runtime_error on malformed input.
  static VerificationReport parse(const std::string& text);
};

bool operator==(const CheckResult& a, const CheckResult& b);
bool operator==(const VerificationReport& a, const VerificationReport& b);

struct SuiteOptions {
  long samples = 10000;
  std::uint64_t seed = 20240607;
  int random_directions = 2;
  FdOptions fd;
  double tol_defect = 1e-6;
  double tol_imag = 1e-8;  // relative to max |Re|
  int threads = 1;
};

// Samples the system, checks convexity, symmetrization along the axes and
// random directions, and realness of the speeds.
CheckResult run_suite(const SystemInterface& sys, const SuiteOptions& opt);

}  // namespace ucmlab
