#include "ucmlab/app/studies.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ucmlab/format.hpp"

namespace ucmlab::app {

double loglog_slope(const std::vector<double>& h, const std::vector<double>& error) {
  if (h.size() != error.size() || h.size() < 2)
    throw std::invalid_argument("loglog_slope: need at least two matching points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0) || !(error[i] > 0.0)) return std::nan("");
    const double x = std::log(h[i]), y = std::log(error[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string Ladder::to_csv() const {
  std::ostringstream os;
  os << "h,error,local_slope\n";
  for (std::size_t i = 0; i < h.size(); ++i) {
    os << format_double(h[i]) << "," << format_double(error[i]) << ",";
    if (i > 0) os << format_double(std::log(error[i] / error[i - 1]) / std::log(h[i] / h[i - 1]));
    os << "\n";
  }
  return os.str();
}

// ---- Stokes ------------------------------------------------------------------------

SvmParams StokesSetup::defaults() {
  SvmParams p;
  p.g = 0.01;
  p.G_eps = 1.0;
  p.lambda = 1.0;
  p.k = 0.0;
  return p;
}

double StokesResult::max_linf_band() const {
  double m = 0.0;
  for (const auto& t : times) m = std::max(m, t.linf_band);
  return m;
}

double StokesResult::max_linf_smooth() const {
  double m = 0.0;
  for (const auto& t : times) m = std::max(m, t.linf_smooth);
  return m;
}

double StokesResult::max_front_offset() const {
  double m = 0.0;
  for (const auto& t : times) m = std::max(m, std::abs(t.front_measured - t.front_exact) / dx);
  return m;
}

double StokesResult::total_l1() const {
  double m = 0.0;
  for (const auto& t : times) m += t.l1;
  return m;
}

std::string StokesResult::comparison_csv() const {
  std::ostringstream os;
  os << "tau,t,b,solver,oracle,error\n";
  for (std::size_t k = 0; k < times.size(); ++k)
    for (std::size_t i = 0; i < b.size(); ++i)
      os << format_double(times[k].tau) << "," << format_double(times[k].t) << "," << format_double(b[i])
         << "," << format_double(solver[k][i]) << "," << format_double(oracle[k][i]) << ","
         << format_double(solver[k][i] - oracle[k][i]) << "\n";
  return os.str();
}

std::string StokesResult::summary() const {
  std::ostringstream os;
  os << "cells: " << cells << "\n";
  os << "dx: " << format_double(dx) << "\n";
  os << "steps: " << steps << "\n";
  for (const auto& t : times) {
    const std::string p = "tau_" + format_double(t.tau) + ".";
    os << p << "front_exact: " << format_double(t.front_exact) << "\n";
    os << p << "front_measured: " << format_double(t.front_measured) << "\n";
    os << p << "linf: " << format_double(t.linf) << "\n";
    os << p << "linf_band: " << format_double(t.linf_band) << "\n";
    os << p << "linf_smooth: " << format_double(t.linf_smooth) << "\n";
    os << p << "l1: " << format_double(t.l1) << "\n";
    os << p << "l2: " << format_double(t.l2) << "\n";
    os << p << "linf_literal: " << format_double(t.linf_literal) << "\n";
  }
  os << "max_linf_band: " << format_double(max_linf_band()) << "\n";
  os << "max_linf_smooth: " << format_double(max_linf_smooth()) << "\n";
  os << "max_front_offset_dx: " << format_double(max_front_offset()) << "\n";
  return os.str();
}

StokesResult run_stokes(const StokesSetup& s) {
  if (s.cells < 4) throw std::invalid_argument("stokes: need at least 4 cells");
  if (!(s.length > 0.0)) throw std::invalid_argument("stokes: length must be > 0");
  if (!(s.delta_x != 0.0)) throw std::invalid_argument("stokes: delta_x must be nonzero");
  std::vector<double> taus = s.taus;
  if (!std::is_sorted(taus.begin(), taus.end()) || taus.empty() || taus.front() < 0.0)
    throw std::invalid_argument("stokes: taus must be non-negative and ascending");

  const SvmParams& p = s.params;
  auto sys = std::make_shared<SvmSystem>(p);
  Grid g;
  g.nx = s.cells;
  g.ny = 1;
  g.dx = s.length / s.cells;
  g.bc[kXLo].type = BcType::moving_wall;
  g.bc[kXLo].impulse = s.delta_x;
  g.bc[kXHi].type = BcType::outflow;
  const SvmVector rest =
      pack(SvmState::from_primitive(1.0, {0.0, 0.0}, Matrix2::identity(), SpdMatrix2::identity(), 1.0));
  FvField f = make_field(g, *sys, [&](double, double, double* q) { std::copy(rest.begin(), rest.end(), q); });
  SolverOptions opt;
  opt.cfl = s.cfl;
  opt.threads = s.threads;

  const StokesSolution sol{p.G_eps, p.lambda, s.delta_x, s.scaling};
  sol.validate();
  StokesSolution literal = sol;
  literal.scaling = s.scaling == StokesScaling::relaxation ? StokesScaling::literal : StokesScaling::relaxation;

  StokesResult r;
  r.cells = s.cells;
  r.dx = g.dx;
  for (int i = 0; i < g.nx; ++i) r.b.push_back(g.xc(i + g.gx()));
  std::vector<double> X(g.nx, 0.0);
  const double speed = sys->max_speed(rest.data(), 0);
  const double sqrtG = std::sqrt(p.G_eps);

  auto record = [&](double tau) {
    StokesTime st;
    st.tau = tau;
    st.t = tau * p.lambda;
    st.front_exact = sol.front(st.t);
    const double dnum = speed * g.dx * (1.0 - s.cfl) / 2.0;
    const double band = 3.0 * std::sqrt(2.0 * dnum * st.t) + 2.0 * g.dx;
    const double zone = s.exclusion * p.lambda * sqrtG;
    std::vector<double> ex(g.nx);
    double l2 = 0.0;
    for (int i = 0; i < g.nx; ++i) {
      ex[i] = stokes_displacement(st.t, r.b[i], sol);
      const double e = std::abs(X[i] - ex[i]) / std::abs(s.delta_x);
      const double el = std::abs(X[i] - stokes_displacement(st.t, r.b[i], literal)) / std::abs(s.delta_x);
      st.linf = std::max(st.linf, e);
      st.linf_literal = std::max(st.linf_literal, el);
      const double dist = std::abs(r.b[i] - st.front_exact);
      if (dist > band) st.linf_band = std::max(st.linf_band, e);
      if (dist >= zone) st.linf_smooth = std::max(st.linf_smooth, e);
      st.l1 += e * g.dx;
      l2 += e * e * g.dx;
    }
    st.l2 = std::sqrt(l2);
    // Front: last face behind which X exceeds half the arriving jump.
    const double y = sol.y_of(st.front_exact);
    const double half = 0.5 * std::abs(s.delta_x) * std::exp(-y);
    st.front_measured = 0.0;
    for (int i = g.nx - 1; i >= 0; --i)
      if (std::abs(X[i]) > half) {
        st.front_measured = r.b[i] + 0.5 * g.dx;
        break;
      }
    r.times.push_back(st);
    r.solver.push_back(X);
    r.oracle.push_back(ex);
  };

  std::size_t next = 0;
  while (next < taus.size() && taus[next] * p.lambda <= 0.0) record(taus[next++]);
  while (next < taus.size()) {
    const double target = taus[next] * p.lambda;
    double dt = cfl_dt(f, *sys, opt);
    const bool land = f.time + dt >= target - 1e-12 * target;
    if (land) dt = target - f.time;
    strang_step(f, *sys, dt, opt);
    if (land) f.time = target;
    for (int i = 0; i < g.nx; ++i) {
      const double* q = f.cell(i + g.gx(), 0);
      X[i] += dt * q[2] / q[0];
    }
    while (next < taus.size() && taus[next] * p.lambda <= f.time + 1e-12 * target) record(taus[next++]);
  }
  r.steps = f.step;
  return r;
}

// ---- Stoker ------------------------------------------------------------------------

double stoker_l1_error(const StokerSetup& s, int cells) {
  SvmParams p;
  p.g = s.g;
  p.G_eps = 0.0;
  Grid g;
  g.nx = cells;
  g.ny = 1;
  g.dx = 2.0 * s.half_width / cells;
  g.x0 = -s.half_width;
  g.bc[kXLo].type = BcType::outflow;
  g.bc[kXHi].type = BcType::outflow;
  RunConfig c;
  c.system = std::make_shared<SvmSystem>(p);
  c.grid = g;
  c.t_end = s.t_end;
  c.solver.cfl = s.cfl;
  c.solver.threads = s.threads;
  c.init = [&](double x, double, double* q) {
    const SvmVector v = pack(SvmState::from_primitive(x < 0.0 ? s.HL : s.HR, {0.0, 0.0}, Matrix2::identity(),
                                                      SpdMatrix2::identity(), 1.0));
    std::copy(v.begin(), v.end(), q);
  };
  const RunResult r = run(c);
  double l1 = 0.0;
  for (int i = 0; i < cells; ++i) {
    const double x = g.xc(i + g.gx());
    l1 += std::abs(r.field.cell(i + g.gx(), 0)[0] - stoker_dambreak(s.HL, s.HR, s.g, s.t_end, x).first) * g.dx;
  }
  return l1;
}

// ---- smooth periodic ---------------------------------------------------------------

SvmParams SmoothSetup::defaults() {
  SvmParams p;
  p.g = 1.0;
  p.G_eps = 1.0;
  p.lambda = 0.5;
  p.k = 0.0;
  return p;
}

InitialState SmoothSetup::initial() const {
  const double a = amplitude, v = velocity, Hhat = params.H_hat;
  return [a, v, Hhat](double x, double y, double* q) {
    const double w = 2.0 * M_PI;
    // invert x = X + a (sin wY, sin wX) by fixed point (contraction for a w < 1)
    double X = x, Y = y;
    for (int it = 0; it < 60; ++it) {
      X = x - a * std::sin(w * Y);
      Y = y - a * std::sin(w * X);
    }
    Matrix2 F = Matrix2::identity();
    F(0, 1) = a * w * std::cos(w * Y);
    F(1, 0) = a * w * std::cos(w * X);
    const double H = Hhat / det(F);
    const Vec2 U{v * std::sin(w * y), v * std::cos(w * x)};
    const SvmVector s = pack(SvmState::from_primitive(H, U, F, inv(gram(F)), 1.0 / (H * H)));
    std::copy(s.begin(), s.end(), q);
  };
}

SmoothResult run_smooth(const SmoothSetup& s, int cells, long max_steps) {
  Grid g;
  g.nx = cells;
  g.ny = cells;
  g.dx = 1.0 / cells;
  RunConfig c;
  c.system = std::make_shared<SvmSystem>(s.params);
  c.grid = g;
  c.t_end = s.t_end;
  c.max_steps = max_steps;
  c.solver.cfl = s.cfl;
  c.solver.threads = s.threads;
  c.init = s.initial();
  const RunResult r = run(c);
  const auto names = monitor_names(*c.system);
  auto col = [&](const std::string& n) {
    return static_cast<std::size_t>(std::find(names.begin(), names.end(), n) - names.begin());
  };
  const std::size_t kE = col("energy"), kD = col("dissipation"), kC = col("max_constraint"),
                    kP = col("max_piola"), kM = col("mass"), kX = col("mom_x"), kY = col("mom_y");
  SmoothResult out;
  const auto& m0 = r.monitors.front();
  const auto& m1 = r.monitors.back();
  out.constraint = m1.values[kC];
  out.piola = m1.values[kP];
  out.piola_initial = m0.values[kP];
  out.steps = m1.step;
  out.mass_drift = std::abs(m1.values[kM] - m0.values[kM]) / m0.values[kM];
  double habs = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double* q = r.field.cell(i + g.gx(), j + g.gy());
      habs += (std::abs(q[1]) + std::abs(q[2])) * g.dx * g.dx;
    }
  const double dmom = std::hypot(m1.values[kX] - m0.values[kX], m1.values[kY] - m0.values[kY]);
  out.momentum_drift = dmom / (std::hypot(m0.values[kX], m0.values[kY]) + habs);
  for (std::size_t n = 1; n < r.monitors.size(); ++n) {
    const auto& a = r.monitors[n - 1];
    const auto& b = r.monitors[n];
    const double inc = b.values[kE] - a.values[kE];
    out.energy_c = std::max(out.energy_c, std::abs(inc + 0.5 * b.dt * (a.values[kD] + b.values[kD])) / g.dx);
    out.energy_growth = std::max(out.energy_growth, std::max(inc, 0.0) / g.dx);
  }
  return out;
}

// ---- Couette -----------------------------------------------------------------------

double couette_deviation(const CouetteSetup& s, double lambda) {
  SvmParams p;
  p.g = s.g;
  p.lambda = lambda;
  p.G_eps = s.nu / lambda;
  Grid g;
  g.nx = s.cells;
  g.ny = 1;
  g.dx = 1.0 / s.cells;
  g.bc[kXLo].type = BcType::moving_wall;
  g.bc[kXHi].type = BcType::moving_wall;
  g.bc[kXHi].tangential_velocity = s.shear;
  auto sys = std::make_shared<SvmSystem>(p);
  FvField f = make_field(g, *sys, [&](double x, double, double* q) {
    const SvmVector v = pack(SvmState::from_primitive(1.0, {0.0, s.shear * x}, Matrix2::identity(),
                                                      SpdMatrix2::identity(), 1.0));
    std::copy(v.begin(), v.end(), q);
  });
  SolverOptions opt;
  const double t_end = s.horizon * lambda;
  const double dt_target = s.dt_over_lambda * lambda;
  while (f.time < t_end * (1.0 - 1e-12)) {
    opt.cfl = 1.0;
    const double dt = std::min({dt_target, cfl_dt(f, *sys, opt) * 0.45, t_end - f.time});
    strang_step(f, *sys, dt, opt);
  }
  double dev = 0.0;
  for (int i = 1; i < g.nx - 1; ++i) {
    const int ic = i + g.gx();
    const SvmState st = unpack_svm(f.cell(ic, 0));
    const Conformation c = conformation(st);
    const double dudx =
        (unpack_svm(f.cell(ic + 1, 0)).U()[1] - unpack_svm(f.cell(ic - 1, 0)).U()[1]) / (2.0 * g.dx);
    const Stresses sig = stress_from_conformation(c, p, StressConvention::shifted);
    const double exx = sig.Sigma_H(0, 0);
    const double exy = sig.Sigma_H(0, 1) - s.nu * dudx;
    const double eyy = sig.Sigma_H(1, 1);
    dev = std::max(dev, std::sqrt(exx * exx + 2.0 * exy * exy + eyy * eyy));
  }
  return dev;
}

// ---- elastic limit -----------------------------------------------------------------

double elastic_limit_gap(int cells, int steps, double lambda_big) {
  SvmParams pa;
  pa.g = 1.0;
  pa.G_eps = 1.0;
  pa.lambda = lambda_big;
  SmoothSetup smooth;
  smooth.params = pa;
  Grid g;
  g.nx = cells;
  g.ny = cells;
  g.dx = 1.0 / cells;
  SvmSystem relaxing(pa);
  FvField a = make_field(g, relaxing, smooth.initial());
  FvField b = a;
  SolverOptions strang, frozen;
  frozen.splitting = Splitting::hyperbolic_only;
  double gap = 0.0;
  for (int n = 0; n < steps; ++n) {
    const double dt = cfl_dt(a, relaxing, strang);
    strang_step(a, relaxing, dt, strang);
    strang_step(b, relaxing, dt, frozen);
    double diff = 0.0, scale = 0.0;
    for (int j = g.gy(); j < g.gy() + g.ny; ++j)
      for (int i = g.gx(); i < g.gx() + g.nx; ++i) {
        const double* qa = a.cell(i, j);
        const double* qb = b.cell(i, j);
        for (int k = 0; k < a.dim; ++k) {
          diff = std::max(diff, std::abs(qa[k] - qb[k]));
          scale = std::max(scale, std::abs(qb[k]));
        }
      }
    gap = std::max(gap, diff / scale);
  }
  return gap;
}

// ---- energy balance ----------------------------------------------------------------

double energy_balance_residual(const ShearWave& w, EnergyConvention conv, double h) {
  const SvmParams p = w.params();
  double worst = 0.0, scale = 0.0;
  for (double t : {0.05, 0.2}) {
    for (double x : {0.13, 0.37, 0.71}) {
      const double dEdt =
          (energy_svm(w.state(t + h, x), p, conv) - energy_svm(w.state(t - h, x), p, conv)) / (2.0 * h);
      const double dFdx = (energy_flux_svm(w.state(t, x + h), p, conv)[0] -
                           energy_flux_svm(w.state(t, x - h), p, conv)[0]) /
                          (2.0 * h);
      const SvmState q = w.state(t, x);
      const double HD = q.H * dissipation_svm(q, p, conv);
      worst = std::max(worst, std::abs(dEdt + dFdx + HD));
      scale = std::max({scale, std::abs(dEdt), std::abs(HD)});
    }
  }
  return worst / scale;
}

BalanceStudy energy_balance_study(const ShearWave& w, const std::vector<double>& h) {
  BalanceStudy b;
  b.h = h;
  for (double hh : h) {
    b.conformation.push_back(energy_balance_residual(w, EnergyConvention::conformation, hh));
    b.literal_stress.push_back(energy_balance_residual(w, EnergyConvention::literal_stress, hh));
  }
  b.slope_conformation = loglog_slope(b.h, b.conformation);
  b.slope_literal = loglog_slope(b.h, b.literal_stress);
  auto closes = [](double slope, double last) { return slope > 1.5 && last < 1e-3; };
  const bool c = closes(b.slope_conformation, b.conformation.back());
  const bool l = closes(b.slope_literal, b.literal_stress.back());
  b.closing = c && l ? "both" : c ? "conformation" : l ? "literal_stress" : "none";
  return b;
}

}  // namespace ucmlab::app
