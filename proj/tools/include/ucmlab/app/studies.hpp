#pragma once

#include <string>
#include <vector>

#include "ucmlab/fvsolver.hpp"
#include "ucmlab/oracles.hpp"

namespace ucmlab::app {

// Least-squares slope of log(error) against log(h).
double loglog_slope(const std::vector<double>& h, const std::vector<double>& error);

struct Ladder {
  std::string name;
  std::vector<double> h;
  std::vector<double> error;

  double slope() const { return loglog_slope(h, error); }
  // Header "h,error,local_slope".
  std::string to_csv() const;
};

// ---- Stokes first problem ------------------------------------------------------------

struct StokesSetup {
  SvmParams params = defaults();
  double length = 1.0;
  int cells = 2000;
  double cfl = 0.45;
  double delta_x = 0.01;
  std::vector<double> taus = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};  // t / lambda
  StokesScaling scaling = StokesScaling::relaxation;
  double exclusion = 0.1;  // half-width of the front zone left out of the smooth error, in lambda sqrt(G)
  int threads = 1;

  static SvmParams defaults();
};

struct StokesTime {
  double tau = 0.0;
  double t = 0.0;
  double front_exact = 0.0;
  double front_measured = 0.0;
  double linf = 0.0;         // all cells, relative to Delta X
  double linf_band = 0.0;    // outside the smear band of the front
  double linf_smooth = 0.0;  // outside the fixed exclusion zone
  double l1 = 0.0;
  double l2 = 0.0;
  double linf_literal = 0.0;  // against the literal scaling of the closed form
};

struct StokesResult {
  int cells = 0;
  double dx = 0.0;
  long steps = 0;
  std::vector<double> b;
  std::vector<std::vector<double>> solver;  // X per tau per cell
  std::vector<std::vector<double>> oracle;
  std::vector<StokesTime> times;

  double max_linf_band() const;
  double max_linf_smooth() const;
  double max_front_offset() const;  // |measured - exact| / dx
  double total_l1() const;
  // tau,t,b,solver,oracle,error
  std::string comparison_csv() const;
  // key: value lines
  std::string summary() const;
};

StokesResult run_stokes(const StokesSetup& s);

// ---- Stoker dam break ---------------------------------------------------------------

struct StokerSetup {
  double HL = 2.0;
  double HR = 1.0;
  double g = 1.0;
  double t_end = 0.4;
  double half_width = 1.0;
  double cfl = 0.45;
  int threads = 1;
};

// L1 error of H at t_end on `cells` cells.
double stoker_l1_error(const StokerSetup& s, int cells);

// ---- smooth periodic runs -----------------------------------------------------------

struct SmoothSetup {
  SvmParams params = defaults();
  double amplitude = 0.03;  // of the Lagrangian map x = X + a (sin 2 pi Y, sin 2 pi X)
  double velocity = 0.1;
  double t_end = 0.05;
  double cfl = 0.45;
  int threads = 1;

  static SvmParams defaults();
  InitialState initial() const;
};

struct SmoothResult {
  double constraint = 0.0;  // max over cells at t_end
  double piola = 0.0;
  double piola_initial = 0.0;
  double energy_c = 0.0;    // max |E_{n+1} - E_n + dt (D_n + D_{n+1}) / 2| / dx
  double energy_growth = 0.0;  // max (E_{n+1} - E_n)^+ / dx
  double mass_drift = 0.0;  // relative
  double momentum_drift = 0.0;  // |delta (mom)| / (|mom| + sum |HU| dx^2)
  long steps = 0;
};

SmoothResult run_smooth(const SmoothSetup& s, int cells, long max_steps = 100000000);

// ---- Newtonian limit -----------------------------------------------------------------

struct CouetteSetup {
  double nu = 0.01;
  double shear = 1.0;
  double g = 1.0;
  int cells = 32;
  double horizon = 20.0;       // in units of lambda
  double dt_over_lambda = 0.02;
};

// max over interior cells of |Sigma - nu (grad U + grad U^T)| (Frobenius) with Sigma = G (c - I).
double couette_deviation(const CouetteSetup& s, double lambda);

// ---- elastic limit -------------------------------------------------------------------

// Largest per-step difference (max norm relative to the max norm of the state)
// between a lambda = lambda_big Strang run and a relaxation-free run.
double elastic_limit_gap(int cells, int steps, double lambda_big = 1e12);

// ---- energy balance on the relaxing shear wave ----------------------------------------

struct BalanceStudy {
  std::vector<double> h;
  std::vector<double> conformation;    // residual per h
  std::vector<double> literal_stress;
  double slope_conformation = 0.0;
  double slope_literal = 0.0;
  std::string closing;  // "conformation", "literal_stress", "none" or "both"
};

// Residual of dE/dt + div(energy flux) + H D on the exact shear wave, centred differences of step h.
double energy_balance_residual(const ShearWave& w, EnergyConvention conv, double h);
BalanceStudy energy_balance_study(const ShearWave& w, const std::vector<double>& h);

}  // namespace ucmlab::app
