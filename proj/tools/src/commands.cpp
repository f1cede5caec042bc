#include "ucmlab/app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "ucmlab/app/config.hpp"
#include "ucmlab/app/studies.hpp"
#include "ucmlab/entropycheck.hpp"
#include "ucmlab/format.hpp"
#include "ucmlab/fvsolver.hpp"
#include "ucmlab/oracles.hpp"
#include "ucmlab/systems.hpp"

namespace ucmlab::app {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kDefaultSeed = 20240607;

struct Context {
  Config cfg;
  fs::path out;
  std::uint64_t seed = kDefaultSeed;
  int threads = 1;
  bool bit_exact = false;
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream o(p, std::ios::binary);
  if (!o) throw std::runtime_error("cannot write " + p.string());
  o << text;
}

std::string read_file(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Resolves the keys shared by every subcommand.
Context make_context(const CliOptions& opt) {
  Context c{Config::from_file(opt.config_path), {}, kDefaultSeed, 1, false};
  if (opt.seed) c.cfg.set("system", "seed", std::to_string(*opt.seed));
  if (opt.threads) c.cfg.set("solver", "threads", std::to_string(*opt.threads));
  if (opt.bit_exact) c.cfg.set("solver", "bit_exact", "true");
  if (opt.out_dir) c.cfg.set("output", "dir", *opt.out_dir);
  const long long seed = c.cfg.get_int("system", "seed", static_cast<long long>(kDefaultSeed));
  if (seed < 0) throw ConfigError("config: [system] seed must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);
  c.bit_exact = c.cfg.get_bool("solver", "bit_exact", false);
  const long long threads = c.cfg.get_int("solver", "threads", 1);
  if (threads < 1) throw ConfigError("config: [solver] threads must be >= 1");
  c.threads = c.bit_exact ? 1 : static_cast<int>(threads);
  c.out = c.cfg.get_string("output", "dir", "out");
  return c;
}

void finish_config(Context& c) {
  c.cfg.finish();
  fs::create_directories(c.out);
  write_file(c.out / "effective.ini", c.cfg.effective());
}

SvmParams svm_params(Config& cfg, SvmParams p = {}) {
  p.g = cfg.get_double("params", "g", p.g);
  p.G_eps = cfg.get_double("params", "G_eps", p.G_eps);
  p.lambda = cfg.get_double("params", "lambda", p.lambda);
  p.k = cfg.get_double("params", "k", p.k);
  p.H_hat = cfg.get_double("params", "H_hat", p.H_hat);
  p.validate();
  return p;
}

UcmParams ucm_params(Config& cfg) {
  UcmParams p;
  p.K_H_prime = cfg.get_double("params", "K_H_prime", p.K_H_prime);
  p.kB_theta = cfg.get_double("params", "kB_theta", p.kB_theta);
  p.xi = cfg.get_double("params", "xi", p.xi);
  p.C0 = cfg.get_double("params", "C0", p.C0);
  p.gamma = cfg.get_double("params", "gamma", p.gamma);
  p.rho_hat = cfg.get_double("params", "rho_hat", p.rho_hat);
  const auto bf = cfg.get_list("params", "body_force", {0.0, 0.0, 0.0});
  if (bf.size() != 3) throw ConfigError("config: [params] body_force needs three entries");
  p.body_force = {bf[0], bf[1], bf[2]};
  p.validate();
  return p;
}

EnergyConvention energy_convention(Config& cfg) {
  return cfg.get_choice("params", "energy", "conformation", {"conformation", "literal_stress"}) ==
                 "conformation"
             ? EnergyConvention::conformation
             : EnergyConvention::literal_stress;
}

double positive(Config& cfg, const std::string& s, const std::string& k, double def) {
  const double v = cfg.get_double(s, k, def);
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("config: [" + s + "] " + k + " must be > 0");
  return v;
}

int positive_int(Config& cfg, const std::string& s, const std::string& k, long long def) {
  const long long v = cfg.get_int(s, k, def);
  if (v < 1 || v > 100000000) throw ConfigError("config: [" + s + "] " + k + " must be >= 1");
  return static_cast<int>(v);
}

std::vector<int> int_list(Config& cfg, const std::string& s, const std::string& k,
                          const std::vector<double>& def) {
  std::vector<int> out;
  for (double v : cfg.get_list(s, k, def)) {
    if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("config: [" + s + "] " + k + " needs positive integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::string status(bool ok) { return ok ? "PASS" : "FAIL"; }

// ---- check -------------------------------------------------------------------------

int cmd_check(Context& c, std::ostream& out) {
  std::vector<std::string> types;
  {
    std::string s = c.cfg.get_string("system", "type", "svm2d");
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream is(s);
    for (std::string t; is >> t;) types.push_back(t);
    if (types.empty()) throw ConfigError("config: [system] type is empty");
  }
  const bool any_svm = std::count(types.begin(), types.end(), "svm2d") > 0;
  const bool any_ucm = std::count(types.begin(), types.end(), "ucm3d") + std::count(types.begin(), types.end(), "ucm3d_published") > 0;
  SvmParams sp;
  UcmParams up;
  if (any_svm) sp = svm_params(c.cfg);
  if (any_ucm) up = ucm_params(c.cfg);
  double sw_g = 1.0;
  if (std::count(types.begin(), types.end(), "shallow_water")) sw_g = positive(c.cfg, "params", "g", 1.0);

  SuiteOptions so;
  so.seed = c.seed;
  so.threads = c.threads;
  so.samples = positive_int(c.cfg, "check", "samples", 10000);
  so.random_directions = static_cast<int>(c.cfg.get_int("check", "directions", 2));
  if (so.random_directions < 0) throw ConfigError("config: [check] directions must be >= 0");
  so.fd.step = positive(c.cfg, "check", "fd_step", so.fd.step);
  so.fd.richardson = static_cast<int>(c.cfg.get_int("check", "richardson", so.fd.richardson));
  if (so.fd.richardson < 0 || so.fd.richardson > 6) throw ConfigError("config: [check] richardson must be in 0..6");
  so.fd.frame = c.cfg.get_choice("check", "frame", "adapted", {"adapted", "uniform"}) == "adapted"
                    ? FdFrame::adapted
                    : FdFrame::uniform;
  so.tol_defect = positive(c.cfg, "check", "tol_defect", so.tol_defect);
  so.tol_imag = positive(c.cfg, "check", "tol_imag", so.tol_imag);

  std::vector<SystemInterface> systems;
  for (const auto& t : types) {
    if (t == "svm2d")
      systems.push_back(svm_y_system(sp));
    else if (t == "ucm3d")
      systems.push_back(ucm_y_system(up, EntropyForm::pressure_compatible));
    else if (t == "ucm3d_published")
      systems.push_back(ucm_y_system(up, EntropyForm::published));
    else if (t == "shallow_water")
      systems.push_back(shallow_water_1d_system(sw_g));
    else if (t == "pressureless_gas")
      systems.push_back(pressureless_gas_system());
    else
      throw ConfigError("config: [system] type must be svm2d, ucm3d, ucm3d_published, shallow_water or "
                        "pressureless_gas, got " + t);
  }
  finish_config(c);

  VerificationReport report;
  for (std::size_t k = 0; k < systems.size(); ++k) {
    CheckResult r = run_suite(systems[k], so);
    r.name = types[k];
    out << types[k] << ": " << status(r.pass) << " max_defect " << format_double(r.max_defect)
        << " max_imag " << format_double(r.max_imag) << " min_hessian_eig " << format_double(r.min_hessian_eig)
        << "\n";
    report.checks.push_back(std::move(r));
  }
  write_file(c.out / "report.txt", report.to_text());
  return report.passed() ? kExitPass : kExitVerificationFailure;
}

// ---- run ---------------------------------------------------------------------------

BcType bc_type(Config& cfg, const std::string& side, BcType def) {
  static const std::vector<std::string> names = {"periodic", "wall", "moving_wall", "outflow"};
  const std::string v = cfg.get_choice("bc", side, names[static_cast<int>(def)], names);
  return static_cast<BcType>(std::find(names.begin(), names.end(), v) - names.begin());
}

Grid read_grid(Config& cfg) {
  Grid g;
  g.nx = positive_int(cfg, "grid", "nx", 64);
  g.ny = positive_int(cfg, "grid", "ny", 1);
  g.dx = positive(cfg, "grid", "lx", 1.0) / g.nx;
  g.x0 = cfg.get_double("grid", "x0", 0.0);
  g.y0 = cfg.get_double("grid", "y0", 0.0);
  const char* sides[4] = {"x_lo", "x_hi", "y_lo", "y_hi"};
  for (int s = 0; s < (g.slab() ? 2 : 4); ++s) {
    g.bc[s].type = bc_type(cfg, sides[s], BcType::periodic);
    if (g.bc[s].type == BcType::moving_wall) {
      g.bc[s].tangential_velocity = cfg.get_double("bc", std::string(sides[s]) + "_velocity", 0.0);
      g.bc[s].impulse = cfg.get_double("bc", std::string(sides[s]) + "_impulse", 0.0);
    }
  }
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return g;
}

Bathymetry read_bathymetry(Config& cfg) {
  const std::string kind = cfg.get_choice("params", "bathymetry", "flat", {"flat", "linear", "bump"});
  if (kind == "flat") return {};
  if (kind == "linear") {
    const double sx = cfg.get_double("params", "slope_x", 0.0);
    const double sy = cfg.get_double("params", "slope_y", 0.0);
    return [sx, sy](double x, double y) { return sx * x + sy * y; };
  }
  const double h = cfg.get_double("params", "bump_height", 0.2);
  const double w = positive(cfg, "params", "bump_width", 0.1);
  const double bx = cfg.get_double("params", "bump_x", 0.5);
  const double by = cfg.get_double("params", "bump_y", 0.0);
  return [h, w, bx, by](double x, double y) {
    const double r2 = (x - bx) * (x - bx) + (y - by) * (y - by);
    return h * std::exp(-r2 / (w * w));
  };
}

// SVM initial states. Depth profiles are free-surface levels minus bathymetry.
InitialState svm_initial(Config& cfg, const SvmSystem& sys, const std::string& profile, const Bathymetry& zb) {
  auto store = [&sys](const SvmState& s, double* q) { sys.store(s, q); };
  auto bottom = [zb](double x, double y) { return zb ? zb(x, y) : 0.0; };
  const Matrix2 I = Matrix2::identity();
  const SpdMatrix2 Ia = SpdMatrix2::identity();
  if (profile == "rest") {
    const double level = cfg.get_double("initial", "level", 1.0);
    return [=](double x, double y, double* q) {
      const double H = level - bottom(x, y);
      store(SvmState::from_primitive(H, {0.0, 0.0}, I, Ia, 1.0 / (H * H)), q);
    };
  }
  if (profile == "dam_break") {
    const double hl = positive(cfg, "initial", "h_left", 2.0);
    const double hr = positive(cfg, "initial", "h_right", 1.0);
    const double xd = cfg.get_double("initial", "x_dam", 0.5);
    return [=](double x, double y, double* q) {
      const double H = (x < xd ? hl : hr) - bottom(x, y);
      store(SvmState::from_primitive(H, {0.0, 0.0}, I, Ia, 1.0), q);
    };
  }
  if (profile == "couette") {
    const double S = cfg.get_double("initial", "shear", 1.0);
    return [=](double x, double, double* q) { store(SvmState::from_primitive(1.0, {0.0, S * x}, I, Ia, 1.0), q); };
  }
  if (profile == "shear_wave") {
    ShearWave w;
    const SvmParams& p = sys.params();
    w.G_eps = p.G_eps;
    w.lambda = p.lambda;
    w.g = p.g;
    w.amp = cfg.get_double("initial", "amplitude", w.amp);
    w.k = cfg.get_double("initial", "wavenumber", w.k);
    w.Acc0 = positive(cfg, "initial", "acc", w.Acc0);
    return [=](double x, double, double* q) { store(w.state(0.0, x), q); };
  }
  if (profile == "smooth_periodic") {
    SmoothSetup s;
    s.params = sys.params();
    s.amplitude = cfg.get_double("initial", "amplitude", s.amplitude);
    s.velocity = cfg.get_double("initial", "velocity", s.velocity);
    if (!(std::abs(s.amplitude) * 2.0 * M_PI < 0.9))
      throw ConfigError("config: [initial] amplitude must satisfy 2 pi |a| < 0.9");
    const InitialState base = s.initial();
    return [=, &sys](double x, double y, double* q) {
      SvmVector v;
      base(x, y, v.data());
      sys.store(unpack_svm(v.data()), q);
    };
  }
  throw ConfigError("config: [initial] profile " + profile + " is not available for SVM systems");
}

InitialState ucm_initial(Config& cfg, const std::string& profile) {
  const Matrix3 I = Matrix3::identity();
  const SpdMatrix3 Ia = SpdMatrix3::identity();
  auto put = [](const Ucm3dState& s, double* q) {
    const UcmVector v = pack(s);
    std::copy(v.begin(), v.end(), q);
  };
  if (profile == "rest") {
    const double rho = positive(cfg, "initial", "rho", 1.0);
    return [=](double, double, double* q) { put(Ucm3dState::from_primitive(rho, {0, 0, 0}, I, Ia), q); };
  }
  if (profile == "dam_break") {
    const double rl = positive(cfg, "initial", "rho_left", 2.0);
    const double rr = positive(cfg, "initial", "rho_right", 1.0);
    const double xd = cfg.get_double("initial", "x_dam", 0.5);
    return [=](double x, double, double* q) {
      put(Ucm3dState::from_primitive(x < xd ? rl : rr, {0, 0, 0}, I, Ia), q);
    };
  }
  if (profile == "couette") {
    const double S = cfg.get_double("initial", "shear", 1.0);
    return [=](double x, double, double* q) { put(Ucm3dState::from_primitive(1.0, {0, S * x, 0}, I, Ia), q); };
  }
  throw ConfigError("config: [initial] profile " + profile + " is not available for ucm_slab");
}

// snapshot_<step>.txt, so a resumed run continues the numbering.
std::string snapshot_name(const std::string& text) {
  const std::size_t at = text.find("\nstep: ");
  const std::size_t from = at + 7;
  const long long step =
      at == std::string::npos ? 0 : parse_int(trim(text.substr(from, text.find('\n', from) - from)));
  char name[40];
  std::snprintf(name, sizeof name, "snapshot_%06lld.txt", step);
  return name;
}

int cmd_run(Context& c, std::ostream& out, std::ostream& err) {
  const std::string type = c.cfg.get_choice("system", "type", "svm2d", {"svm2d", "svm2d_y", "ucm_slab"});
  std::shared_ptr<const FvSystem> sys;
  std::shared_ptr<const SvmSystem> svm;
  if (type == "ucm_slab") {
    sys = std::make_shared<UcmSlabSystem>(ucm_params(c.cfg));
  } else {
    const SvmParams p = svm_params(c.cfg);
    const EnergyConvention conv = energy_convention(c.cfg);
    svm = type == "svm2d" ? std::make_shared<SvmSystem>(p, conv) : std::make_shared<SvmYSystem>(p, conv);
    sys = svm;
  }
  const Bathymetry zb = type == "ucm_slab" ? Bathymetry{} : read_bathymetry(c.cfg);
  Grid grid = read_grid(c.cfg);
  if (type == "ucm_slab" && !grid.slab()) throw ConfigError("config: ucm_slab needs [grid] ny = 1");

  const std::string profile = c.cfg.get_choice(
      "initial", "profile", "rest",
      {"rest", "dam_break", "couette", "shear_wave", "smooth_periodic", "snapshot"});
  std::string snapshot_file;
  InitialState init;
  if (profile == "snapshot") {
    snapshot_file = c.cfg.require_string("initial", "file");
    init = svm ? svm_initial(c.cfg, *svm, "rest", zb) : ucm_initial(c.cfg, "rest");
  } else {
    init = svm ? svm_initial(c.cfg, *svm, profile, zb) : ucm_initial(c.cfg, profile);
  }
  const double noise = profile == "snapshot" ? 0.0 : c.cfg.get_double("initial", "perturbation", 0.0);
  if (!(std::abs(noise) < 0.5)) throw ConfigError("config: [initial] perturbation must be below 0.5");

  RunConfig rc;
  rc.system = sys;
  rc.grid = grid;
  rc.bathymetry = zb;
  rc.solver.threads = c.threads;
  rc.solver.cfl = positive(c.cfg, "solver", "cfl", 0.45);
  if (rc.solver.cfl > 1.0) throw ConfigError("config: [solver] cfl must be <= 1");
  rc.t_end = c.cfg.get_double("solver", "t_end", 0.1);
  if (!(rc.t_end >= 0.0)) throw ConfigError("config: [solver] t_end must be >= 0");
  const std::string split = c.cfg.get_choice("solver", "splitting", "strang", {"strang", "lie", "hyperbolic_only"});
  rc.solver.splitting = split == "strang" ? Splitting::strang : split == "lie" ? Splitting::lie : Splitting::hyperbolic_only;
  rc.solver.speeds = c.cfg.get_choice("solver", "speeds", "analytic", {"analytic", "fd_spectrum"}) == "analytic"
                         ? SpeedMode::analytic
                         : SpeedMode::fd_spectrum;
  rc.max_steps = c.cfg.get_int("solver", "max_steps", 100000000);
  if (rc.max_steps < 0) throw ConfigError("config: [solver] max_steps must be >= 0");
  rc.output_interval = c.cfg.get_double("output", "interval", 0.0);
  if (!(rc.output_interval >= 0.0)) throw ConfigError("config: [output] interval must be >= 0");

  // Seeded multiplicative perturbation of the first component (depth or density).
  if (noise != 0.0) {
    const InitialState base = init;
    const std::uint64_t seed = c.seed;
    const double x0 = grid.x0, y0 = grid.y0, dx = grid.dx;
    const int nx = grid.nx;
    const int dim = sys->dim();
    init = [=](double x, double y, double* q) {
      base(x, y, q);
      const long i = std::lround((x - x0) / dx - 0.5), j = std::lround((y - y0) / dx - 0.5);
      std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(j * nx + i + 1)));
      const double f = 1.0 + noise * std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
      for (int k = 0; k < dim; ++k) q[k] *= f;
    };
  }
  rc.init = init;

  FvField resume;
  if (!snapshot_file.empty()) {
    resume = make_field(grid, *sys, init, zb);
    const std::string text = read_file(snapshot_file);
    try {
      load_snapshot(text, resume, *sys);
    } catch (const InvariantViolation& e) {
      // Well-formed but inadmissible: reported like a violation met during the run.
      finish_config(c);
      write_file(c.out / "diagnostic_snapshot.txt", text);
      err << "snapshot rejected: " << e.what() << "\n";
      return kExitInvariantViolation;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("snapshot: ") + e.what());
    }
  } else {
    // Surface inadmissible initial data as a configuration problem.
    try {
      const FvField f0 = make_field(grid, *sys, init, zb);
      check_field(f0, *sys);
    } catch (const InvariantViolation& e) {
      throw ConfigError(std::string("config: initial state is not admissible: ") + e.what());
    }
  }
  finish_config(c);

  std::string diagnostic;
  RunResult r;
  try {
    r = run(rc, {}, &diagnostic, snapshot_file.empty() ? nullptr : &resume);
  } catch (const InvariantViolation& e) {
    write_file(c.out / "diagnostic_snapshot.txt", diagnostic);
    err << "invariant violation at cell (" << e.i() << ", " << e.j() << "), t = " << format_double(e.time())
        << ": " << e.what() << "\n";
    return kExitInvariantViolation;
  }
  for (const auto& text : r.snapshots) write_file(c.out / snapshot_name(text), text);
  std::string mon = monitors_csv_header(*sys) + "\n";
  for (const auto& row : r.monitors) mon += monitors_csv_row(row) + "\n";
  write_file(c.out / "monitors.csv", mon);
  out << "steps: " << r.field.step << "\n"
      << "time: " << format_double(r.field.time) << "\n"
      << "snapshots: " << r.snapshots.size() << "\n";
  return kExitPass;
}

// ---- stokes ------------------------------------------------------------------------

StokesScaling read_scaling(Config& cfg) {
  return cfg.get_choice("stokes", "scaling", "relaxation", {"relaxation", "literal"}) == "relaxation"
             ? StokesScaling::relaxation
             : StokesScaling::literal;
}

StokesSetup read_stokes(Config& cfg, int threads, const std::string& section = "stokes") {
  StokesSetup s;
  s.params = svm_params(cfg, StokesSetup::defaults());
  s.length = positive(cfg, section, "length", s.length);
  s.cells = positive_int(cfg, section, "cells", s.cells);
  s.cfl = positive(cfg, section, "cfl", s.cfl);
  s.delta_x = cfg.get_double(section, "delta_x", s.delta_x);
  if (s.delta_x == 0.0) throw ConfigError("config: [" + section + "] delta_x must be nonzero");
  s.taus = cfg.get_list(section, "taus", s.taus);
  if (!std::is_sorted(s.taus.begin(), s.taus.end()) || s.taus.front() < 0.0)
    throw ConfigError("config: [" + section + "] taus must be ascending and >= 0");
  s.exclusion = positive(cfg, section, "exclusion", s.exclusion);
  s.threads = threads;
  return s;
}

int cmd_stokes(Context& c, std::ostream& out) {
  StokesSetup s = read_stokes(c.cfg, c.threads);
  s.scaling = read_scaling(c.cfg);
  const double tol_linf = positive(c.cfg, "stokes", "tol_linf", 0.05);
  const double tol_front = positive(c.cfg, "stokes", "tol_front", 2.0);
  const double y_max = positive(c.cfg, "stokes", "fig1_y_max", 1.0);
  const int y_points = positive_int(c.cfg, "stokes", "fig1_points", 201);
  const std::vector<double> fig_taus = c.cfg.get_list("stokes", "fig1_taus", fig1_default_taus());
  const double tol_fig = positive(c.cfg, "stokes", "tol_quadrature", 1e-8);
  finish_config(c);

  const StokesResult r = run_stokes(s);
  write_file(c.out / "stokes_comparison.csv", r.comparison_csv());

  std::vector<double> y(y_points);
  for (int i = 0; i < y_points; ++i) y[i] = y_max * i / std::max(1, y_points - 1);
  const Fig1Table gk = fig1_curves(y, fig_taus, Quadrature::gauss_kronrod);
  const Fig1Table simpson = fig1_curves(y, fig_taus, Quadrature::simpson);
  double quad_gap = 0.0;
  for (std::size_t j = 0; j < gk.values.size(); ++j)
    for (std::size_t i = 0; i < y.size(); ++i) quad_gap = std::max(quad_gap, std::abs(gk.values[j][i] - simpson.values[j][i]));
  write_file(c.out / "fig1.csv", gk.to_csv());

  const bool ok_linf = r.max_linf_band() <= tol_linf;
  const bool ok_front = r.max_front_offset() <= tol_front;
  const bool ok_fig = quad_gap <= tol_fig;
  std::string summary = r.summary();
  summary += "fig1_quadrature_gap: " + format_double(quad_gap) + "\n";
  summary += "linf_check: " + status(ok_linf) + "\n";
  summary += "front_check: " + status(ok_front) + "\n";
  summary += "quadrature_check: " + status(ok_fig) + "\n";
  write_file(c.out / "stokes_summary.txt", summary);
  out << "stokes: linf_band " << format_double(r.max_linf_band()) << " front_offset_dx "
      << format_double(r.max_front_offset()) << " quadrature_gap " << format_double(quad_gap) << "\n";
  return ok_linf && ok_front && ok_fig ? kExitPass : kExitVerificationFailure;
}

// ---- convergence -------------------------------------------------------------------

int cmd_convergence(Context& c, std::ostream& out) {
  const std::string kind = c.cfg.get_choice("study", "kind", "stoker",
                                            {"stokes", "stoker", "constraint", "piola", "energy", "newtonian"});
  Ladder ladder;
  ladder.name = kind;
  double min_slope = 0.0, max_slope = 1e300;
  std::function<void()> compute;

  if (kind == "stokes") {
    StokesSetup s = read_stokes(c.cfg, c.threads, "study");
    s.scaling = read_scaling(c.cfg);
    const auto cells = int_list(c.cfg, "study", "cells", {250, 500, 1000, 2000});
    min_slope = c.cfg.get_double("study", "min_slope", 0.8);
    compute = [&, s, cells]() mutable {
      for (int n : cells) {
        s.cells = n;
        const StokesResult r = run_stokes(s);
        ladder.h.push_back(r.dx);
        ladder.error.push_back(r.max_linf_smooth());
      }
    };
  } else if (kind == "stoker") {
    StokerSetup s;
    s.HL = positive(c.cfg, "study", "h_left", s.HL);
    s.HR = positive(c.cfg, "study", "h_right", s.HR);
    s.g = positive(c.cfg, "params", "g", s.g);
    s.t_end = positive(c.cfg, "study", "t_end", s.t_end);
    s.cfl = positive(c.cfg, "study", "cfl", s.cfl);
    s.threads = c.threads;
    const auto cells = int_list(c.cfg, "study", "cells", {200, 400, 800, 1600});
    min_slope = c.cfg.get_double("study", "min_slope", 0.7);
    compute = [&, s, cells] {
      for (int n : cells) {
        ladder.h.push_back(2.0 * s.half_width / n);
        ladder.error.push_back(stoker_l1_error(s, n));
      }
    };
  } else if (kind == "constraint" || kind == "piola" || kind == "energy") {
    SmoothSetup s;
    s.params = svm_params(c.cfg, SmoothSetup::defaults());
    s.amplitude = c.cfg.get_double("study", "amplitude", s.amplitude);
    s.velocity = c.cfg.get_double("study", "velocity", s.velocity);
    s.t_end = positive(c.cfg, "study", "t_end", s.t_end);
    s.cfl = positive(c.cfg, "study", "cfl", s.cfl);
    s.threads = c.threads;
    const auto cells = int_list(c.cfg, "study", "cells", {32, 64, 128, 256});
    min_slope = c.cfg.get_double("study", "min_slope", kind == "energy" ? 0.0 : 0.8);
    compute = [&, s, cells, kind] {
      for (int n : cells) {
        const SmoothResult r = run_smooth(s, n);
        ladder.h.push_back(1.0 / n);
        ladder.error.push_back(kind == "constraint" ? r.constraint : kind == "piola" ? r.piola : r.energy_c);
      }
    };
  } else {
    CouetteSetup s;
    s.nu = positive(c.cfg, "study", "nu", s.nu);
    s.shear = c.cfg.get_double("study", "shear", s.shear);
    s.g = positive(c.cfg, "params", "g", s.g);
    s.cells = positive_int(c.cfg, "study", "cells", s.cells);
    s.horizon = positive(c.cfg, "study", "horizon", s.horizon);
    s.dt_over_lambda = positive(c.cfg, "study", "dt_over_lambda", s.dt_over_lambda);
    const auto lambdas = c.cfg.get_list("study", "lambdas", {0.04, 0.02, 0.01, 0.005});
    for (double l : lambdas)
      if (!(l > 0.0)) throw ConfigError("config: [study] lambdas must be > 0");
    min_slope = c.cfg.get_double("study", "min_slope", 0.8);
    max_slope = c.cfg.get_double("study", "max_slope", 1.2);
    compute = [&, s, lambdas] {
      for (double l : lambdas) {
        ladder.h.push_back(l);
        ladder.error.push_back(couette_deviation(s, l));
      }
    };
  }
  finish_config(c);
  compute();
  if (ladder.h.size() < 2) {
    out << kind << ": need at least two levels\n";
    return kExitVerificationFailure;
  }
  const double slope = ladder.slope();
  write_file(c.out / "convergence.csv", ladder.to_csv());
  const bool ok = slope >= min_slope && slope <= max_slope;
  write_file(c.out / "convergence_summary.txt", "study: " + kind + "\nslope: " + format_double(slope) +
                                                    "\nmin_slope: " + format_double(min_slope) +
                                                    "\nresult: " + status(ok) + "\n");
  out << kind << ": slope " << format_double(slope) << " " << status(ok) << "\n";
  return ok ? kExitPass : kExitVerificationFailure;
}

// ---- spectrum ----------------------------------------------------------------------

int cmd_spectrum(Context& c, std::ostream& out) {
  const std::string type = c.cfg.get_choice("system", "type", "svm2d", {"svm2d", "ucm3d", "pressureless_gas"});
  SystemInterface sys = type == "svm2d"   ? svm_y_system(svm_params(c.cfg))
                        : type == "ucm3d" ? ucm_y_system(ucm_params(c.cfg))
                                          : pressureless_gas_system();
  const int points = positive_int(c.cfg, "spectrum", "points", 101);
  const double angle = c.cfg.get_double("spectrum", "angle", 0.0);
  const double tol = positive(c.cfg, "spectrum", "tol_imag", 1e-8);
  finish_config(c);

  std::mt19937_64 rng(c.seed);
  const StateVec qa = sys.sampler(rng);
  const StateVec qb = sys.sampler(rng);
  const Vec3 dir{std::cos(angle), std::sin(angle), 0.0};
  std::ostringstream csv;
  csv << "s,admissible,radius,max_imag";
  for (int k = 0; k < sys.n; ++k) csv << ",re_" << k;
  csv << "\n";
  double worst = 0.0;
  int skipped = 0;
  for (int i = 0; i < points; ++i) {
    const double s = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    const StateVec q = (1.0 - s) * qa + s * qb;
    csv << format_double(s);
    if (!sys.admissible(q)) {
      ++skipped;
      csv << ",0,,";
      for (int k = 0; k < sys.n; ++k) csv << ",";
      csv << "\n";
      continue;
    }
    const auto sp = characteristic_speeds(sys, q, dir);
    const double rad = spectral_radius(sp);
    const double im = max_imag(sp) / std::max(1e-300, rad);
    worst = std::max(worst, im);
    std::vector<double> re;
    for (const auto& z : sp) re.push_back(z.real());
    std::sort(re.begin(), re.end());
    csv << ",1," << format_double(rad) << "," << format_double(im);
    for (double v : re) csv << "," << format_double(v);
    csv << "\n";
  }
  write_file(c.out / "spectrum.csv", csv.str());
  const bool ok = worst <= tol;
  out << "spectrum: max_rel_imag " << format_double(worst) << " inadmissible_points " << skipped << " "
      << status(ok) << "\n";
  return ok ? kExitPass : kExitVerificationFailure;
}

}  // namespace

int run_command(const CliOptions& opt, std::ostream& out, std::ostream& err) {
  Context ctx;
  try {
    ctx = make_context(opt);
    if (opt.command == "check") return cmd_check(ctx, out);
    if (opt.command == "run") return cmd_run(ctx, out, err);
    if (opt.command == "stokes") return cmd_stokes(ctx, out);
    if (opt.command == "convergence") return cmd_convergence(ctx, out);
    if (opt.command == "spectrum") return cmd_spectrum(ctx, out);
    err << "unknown command: " << opt.command << "\n";
    return kExitConfigError;
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kExitConfigError;
  } catch (const InvariantViolation& e) {
    err << "invariant violation: " << e.what() << "\n";
    return kExitInvariantViolation;
  } catch (const DomainError& e) {
    // Parameter validation and inadmissible derived data.
    err << "invalid parameters: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const fs::filesystem_error& e) {
    err << e.what() << "\n";
    return kExitConfigError;
  }
}

}  // namespace ucmlab::app
