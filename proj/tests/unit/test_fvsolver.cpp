#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "ucmlab/fvsolver.hpp"

using namespace ucmlab;

namespace {

Grid periodic_grid(int nx, int ny) {
  Grid g;
  g.nx = nx;
  g.ny = ny;
  g.dx = 1.0 / nx;
  return g;
}

InitialState wavy(const SvmSystem& sys, double amp = 0.05) {
  return [&sys, amp](double x, double y, double* q) {
    SvmState s;
    const double H = 1.0 + amp * std::sin(2 * M_PI * x) * std::cos(2 * M_PI * y);
    s = SvmState::from_primitive(H, {0.1 + amp * std::cos(2 * M_PI * y), -0.05},
                                 Matrix2::identity(), SpdMatrix2::identity(), 1.0 / (H * H));
    sys.store(s, q);
  };
}

double total(const FvField& f, int comp) {
  double s = 0.0;
  const Grid& g = f.grid;
  for (int j = g.gy(); j < g.gy() + g.ny; ++j)
    for (int i = g.gx(); i < g.gx() + g.nx; ++i) s += f.cell(i, j)[comp];
  return s * g.cell_area();
}

}  // namespace

TEST(Grid, ValidateErrors) {
  Grid g = periodic_grid(8, 8);
  EXPECT_NO_THROW(g.validate());
  g.nx = 0;
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g = periodic_grid(8, 8);
  g.dx = -1;
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g = periodic_grid(1, 8);
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g = periodic_grid(8, 8);
  g.bc[kXLo].type = BcType::wall;
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g = periodic_grid(8, 1);
  EXPECT_TRUE(g.slab());
  EXPECT_EQ(g.NY(), 1);
  EXPECT_DOUBLE_EQ(g.cell_area(), g.dx);
}

TEST(Speeds, ClosedFormSvm) {
  const SvmParams p;
  const SvmState q = SvmState::from_primitive(2.0, {0.5, 0.0}, Matrix2::identity(), SpdMatrix2::identity(), 0.25);
  const auto s = svm_speeds(q, {1.0, 0.0}, p);
  double mx = 0.0;
  for (double c : s) mx = std::max(mx, std::abs(c));
  EXPECT_NEAR(mx, 0.5 + std::sqrt(p.g * 2.0 + 3 * p.G_eps * 0.25 * 4.0 + p.G_eps * 1.0), 1e-12);
  SvmSystem sys(p);
  double v[kSvmDim];
  sys.store(q, v);
  EXPECT_NEAR(sys.max_speed(v, 0), mx, 1e-12);
}

TEST(Rusanov, ConsistencyAndDissipation) {
  SvmSystem sys(SvmParams{});
  double q[kSvmDim], f[kSvmDim], out[kSvmDim];
  sys.store(SvmState::from_primitive(1.3, {0.2, -0.1}, Matrix2::identity(), SpdMatrix2::identity(), 0.5), q);
  sys.flux(q, 1, f);
  rusanov_flux(sys, q, q, 1, 2.0, 3.0, out);
  for (int k = 0; k < kSvmDim; ++k) EXPECT_DOUBLE_EQ(out[k], f[k]);
  double r[kSvmDim];
  std::copy(q, q + kSvmDim, r);
  r[0] += 0.1;
  rusanov_flux(sys, q, r, 0, 2.0, 3.0, out);
  double fl[kSvmDim], fr[kSvmDim];
  sys.flux(q, 0, fl);
  sys.flux(r, 0, fr);
  EXPECT_NEAR(out[0], 0.5 * (fl[0] + fr[0]) - 1.5 * 0.1, 1e-14);
  // Surface jump offset by bathymetry: no dissipation on a flat free surface.
  rusanov_flux(sys, q, r, 0, 2.0, 3.0, out, -0.1);
  EXPECT_NEAR(out[0], 0.5 * (fl[0] + fr[0]), 1e-14);
}

TEST(Cfl, SlabExample) {
  SvmSystem sys(SvmParams{});
  Grid g = periodic_grid(10, 1);
  const FvField f = make_field(g, sys, [&](double, double, double* q) {
    sys.store(SvmState::from_primitive(1.0, {0.0, 0.0}, Matrix2::identity(), SpdMatrix2::identity(), 1.0), q);
  });
  SolverOptions opt;
  opt.cfl = 0.5;
  // s = sqrt(g H + 3 G Acc H^2 + G c_xx) = sqrt(5).
  EXPECT_NEAR(cfl_dt(f, sys, opt), 0.5 * 0.1 / std::sqrt(5.0), 1e-15);
  opt.cfl = 1.5;
  EXPECT_THROW(cfl_dt(f, sys, opt), std::invalid_argument);
  opt.cfl = 0.0;
  EXPECT_THROW(cfl_dt(f, sys, opt), std::invalid_argument);
}

TEST(Solver, PeriodicConservation) {
  SvmSystem sys(SvmParams{});
  FvField f = make_field(periodic_grid(16, 12), sys, wavy(sys));
  const double m0 = total(f, 0), px0 = total(f, 1), py0 = total(f, 2);
  SolverOptions opt;
  for (int n = 0; n < 40; ++n) strang_step(f, sys, cfl_dt(f, sys, opt), opt);
  EXPECT_NEAR(total(f, 0), m0, 1e-14);
  EXPECT_NEAR(total(f, 1), px0, 1e-14);
  EXPECT_NEAR(total(f, 2), py0, 1e-14);
  EXPECT_EQ(f.step, 40);
  EXPECT_GT(f.time, 0.0);
}

TEST(Solver, YSystemAgreesWithASystemToFirstOrder) {
  const SvmParams p;
  SvmSystem a(p);
  SvmYSystem y(p);
  auto diff = [&](int n) {
    auto init = [](const SvmSystem& sys) {
      return [&sys](double x, double yy, double* q) {
        const double s = std::sin(2 * M_PI * x), c = std::cos(2 * M_PI * yy);
        SpdMatrix2 A;
        A(0, 0) = 1.0 + 0.5 * s;
        A(0, 1) = 0.3 * c;
        A(1, 1) = 1.0 - 0.3 * s * c;
        const double H = 1.0 + 0.1 * s * c;
        sys.store(SvmState::from_primitive(H, {0.2 * c, 0.1 * s}, Matrix2::identity(), A, 1.5), q);
      };
    };
    FvField fa = make_field(periodic_grid(n, n), a, init(a));
    FvField fy = make_field(periodic_grid(n, n), y, init(y));
    SolverOptions opt;
    const double dt = 0.5 * cfl_dt(fa, a, opt);
    const int steps = static_cast<int>(std::lround(0.05 / dt));
    for (int k = 0; k < steps; ++k) {
      strang_step(fa, a, 0.05 / steps, opt);
      strang_step(fy, y, 0.05 / steps, opt);
    }
    double d = 0.0;
    const Grid& g = fa.grid;
    for (int j = g.gy(); j < g.gy() + g.ny; ++j)
      for (int i = g.gx(); i < g.gx() + g.nx; ++i) {
        const SvmState sa = a.state(fa.cell(i, j));
        const SvmState sy = y.state(fy.cell(i, j));
        d = std::max(d, std::abs(sa.HA.e[0] - sy.HA.e[0]));
        d = std::max(d, std::abs(sa.HU[0] - sy.HU[0]));
      }
    return d;
  };
  // Different conserved variables give different O(dx) truncation errors.
  const double d16 = diff(16), d32 = diff(32), d64 = diff(64);
  EXPECT_LT(d32, 0.7 * d16);
  EXPECT_LT(d64, 0.7 * d32);
}

TEST(Solver, ThreadIndependence) {
  SvmSystem sys(SvmParams{});
  FvField a = make_field(periodic_grid(16, 16), sys, wavy(sys));
  FvField b = a;
  SolverOptions o1, o3;
  o3.threads = 3;
  for (int n = 0; n < 10; ++n) {
    const double dt = cfl_dt(a, sys, o1);
    strang_step(a, sys, dt, o1);
    strang_step(b, sys, dt, o3);
  }
  EXPECT_EQ(a.q, b.q);
  EXPECT_EQ(compute_monitors(a, sys, 0.1, 1).values, compute_monitors(b, sys, 0.1, 3).values);
}

TEST(Solver, LakeAtRestOnLinearBathymetry) {
  SvmParams p;
  p.G_eps = 0.0;
  SvmSystem sys(p);
  Grid g;
  g.nx = 20;
  g.ny = 15;
  g.dx = 0.05;
  for (auto& b : g.bc) b.type = BcType::wall;
  auto zb = [](double x, double y) { return 0.1 * x + 0.05 * y; };
  FvField f = make_field(g, sys, [&](double x, double y, double* q) {
    const double H = 1.0 - zb(x, y);
    sys.store(SvmState::from_primitive(H, {0, 0}, Matrix2::identity(), SpdMatrix2::identity(), 1.0 / (H * H)), q);
  }, zb);
  SolverOptions opt;
  for (int n = 0; n < 50; ++n) strang_step(f, sys, cfl_dt(f, sys, opt), opt);
  double mom = 0.0;
  for (int j = g.gy(); j < g.gy() + g.ny; ++j)
    for (int i = g.gx(); i < g.gx() + g.nx; ++i)
      mom = std::max({mom, std::abs(f.cell(i, j)[1]), std::abs(f.cell(i, j)[2])});
  EXPECT_LT(mom, 1e-13);
}

TEST(Solver, WallGhostMirrorsNormalVelocity) {
  SvmSystem sys(SvmParams{});
  double in[kSvmDim], gh[kSvmDim];
  Matrix2 F = Matrix2::identity();
  F(0, 1) = 0.2;
  sys.store(SvmState::from_primitive(1.0, {0.3, 0.4}, F, SpdMatrix2::identity(), 1.0), in);
  sys.wall_ghost(in, gh, 0, false, 0.0, 0.0);
  const SvmState g = sys.state(gh);
  EXPECT_DOUBLE_EQ(g.U()[0], -0.3);
  EXPECT_DOUBLE_EQ(g.U()[1], 0.4);
  EXPECT_DOUBLE_EQ(g.F()(0, 1), -0.2);
  sys.wall_ghost(in, gh, 0, true, 1.0, 0.0);
  const SvmState m = sys.state(gh);
  EXPECT_DOUBLE_EQ(m.U()[0], -0.3);
  EXPECT_NEAR(m.U()[1], 2.0 - 0.4, 1e-15);
  EXPECT_DOUBLE_EQ(m.F()(0, 1), 0.2);
}

TEST(Solver, InvariantViolationNamesCell) {
  SvmSystem sys(SvmParams{});
  FvField f = make_field(periodic_grid(8, 8), sys, wavy(sys));
  f.cell(f.grid.gx() + 3, f.grid.gy() + 5)[0] = -1.0;
  try {
    check_field(f, sys);
    FAIL() << "expected InvariantViolation";
  } catch (const InvariantViolation& e) {
    EXPECT_EQ(e.i(), 3);
    EXPECT_EQ(e.j(), 5);
    EXPECT_NE(std::string(e.what()).find("(3, 5)"), std::string::npos);
  }
}

// Relaxation that corrupts one cell during the second step of an 8 x 8 run.
class PoisonedSystem : public SvmSystem {
 public:
  using SvmSystem::SvmSystem;
  void relax(double* q, double dt) const override {
    SvmSystem::relax(q, dt);
    if (++calls_ == 64 * 3 + 5) q[0] = -q[0];
  }

 private:
  mutable int calls_ = 0;
};

TEST(Solver, InitialViolationIsRejected) {
  SvmSystem sys(SvmParams{});
  EXPECT_THROW(make_field(periodic_grid(8, 8), sys,
                          [&](double x, double y, double* q) {
                            wavy(sys)(x, y, q);
                            q[0] = -1.0;
                          }),
               InvariantViolation);
}

TEST(Solver, RunCapturesDiagnosticOnViolation) {
  auto sys = std::make_shared<PoisonedSystem>(SvmParams{});
  RunConfig cfg;
  cfg.system = sys;
  cfg.grid = periodic_grid(8, 8);
  cfg.init = wavy(*sys);
  cfg.t_end = 0.1;
  std::string diag;
  try {
    run(cfg, {}, &diag);
    FAIL() << "expected InvariantViolation";
  } catch (const InvariantViolation& e) {
    EXPECT_GT(e.time(), 0.0);
  }
  EXPECT_NE(diag.find("step:"), std::string::npos);
  EXPECT_NE(diag.find(",-"), std::string::npos);
}

TEST(Snapshot, RoundTripAndResume) {
  auto sys = std::make_shared<SvmSystem>(SvmParams{});
  RunConfig cfg;
  cfg.system = sys;
  cfg.grid = periodic_grid(12, 10);
  cfg.init = wavy(*sys);
  cfg.t_end = 0.2;
  cfg.output_interval = 0.1;
  const RunResult full = run(cfg);
  ASSERT_EQ(full.snapshots.size(), 3u);
  EXPECT_NEAR(full.snapshot_times[1], 0.1, 1e-15);
  EXPECT_NEAR(full.field.time, 0.2, 1e-15);

  FvField mid(cfg.grid, sys->dim());
  mid = make_field(cfg.grid, *sys, cfg.init);
  load_snapshot(full.snapshots[1], mid, *sys);
  EXPECT_NEAR(mid.time, 0.1, 1e-15);
  FvField again = make_field(cfg.grid, *sys, cfg.init);
  load_snapshot(snapshot_text(mid, *sys), again, *sys);
  for (std::size_t k = 0; k < mid.q.size(); ++k)
    EXPECT_NEAR(again.q[k], mid.q[k], 1e-15 * (1.0 + std::abs(mid.q[k])));

  const RunResult resumed = run(cfg, {}, nullptr, &mid);
  double d = 0.0;
  for (std::size_t k = 0; k < full.field.q.size(); ++k)
    d = std::max(d, std::abs(full.field.q[k] - resumed.field.q[k]));
  EXPECT_LT(d, 1e-13);
  EXPECT_EQ(resumed.field.step, full.field.step);
}

TEST(Snapshot, FormatHeader) {
  SvmSystem sys(SvmParams{});
  const FvField f = make_field(periodic_grid(4, 3), sys, wavy(sys));
  const std::string text = snapshot_text(f, sys);
  EXPECT_NE(text.find("x,y,H,Ux,Uy,Fxx,Fxy,Fyx,Fyy,Axx,Axy,Ayy,Acc"), std::string::npos);
  EXPECT_NE(text.find("step: 0"), std::string::npos);
  const std::string body = text.substr(text.find("x,y,"));
  EXPECT_EQ(std::count(body.begin(), body.end(), '\n'), 1 + 4 * 3);
}

TEST(Snapshot, LoaderRejections) {
  SvmSystem sys(SvmParams{});
  FvField f = make_field(periodic_grid(4, 3), sys, wavy(sys));
  const std::string text = snapshot_text(f, sys);
  FvField other = make_field(periodic_grid(5, 3), sys, wavy(sys));
  EXPECT_THROW(load_snapshot(text, other, sys), std::runtime_error);
  SvmParams p2;
  p2.lambda = 2.0;
  SvmSystem sys2(p2);
  EXPECT_THROW(load_snapshot(text, f, sys2), std::runtime_error);
  EXPECT_THROW(load_snapshot("bogus: 1\n", f, sys), std::runtime_error);
  EXPECT_THROW(load_snapshot("no colon here\n", f, sys), std::runtime_error);
  EXPECT_THROW(load_snapshot(text.substr(0, text.size() - 40), f, sys), std::exception);
  std::string bad = text;
  const auto cols = bad.find("x,y,");
  const auto row = bad.find('\n', cols) + 1;
  const auto c3 = bad.find(',', bad.find(',', row) + 1) + 1;  // start of H
  bad.replace(c3, bad.find(',', c3) - c3, "-1");
  EXPECT_THROW(load_snapshot(bad, f, sys), InvariantViolation);
}

TEST(Monitors, CsvShape) {
  SvmSystem sys(SvmParams{});
  const FvField f = make_field(periodic_grid(4, 4), sys, wavy(sys));
  const auto names = monitor_names(sys);
  ASSERT_GE(names.size(), 10u);
  EXPECT_EQ(names[0], "mass");
  const std::string header = monitors_csv_header(sys);
  const std::string row = monitors_csv_row(compute_monitors(f, sys, 0.01));
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), std::count(row.begin(), row.end(), ','));
  EXPECT_EQ(header.find('\n'), std::string::npos);
}

TEST(Ucm, SlabRelaxationKeepsSpd) {
  UcmSlabSystem sys(UcmParams{});
  Grid g = periodic_grid(8, 1);
  FvField f = make_field(g, sys, [&](double x, double, double* q) {
    const double rho = 1.0 + 0.1 * std::sin(2 * M_PI * x);
    const UcmVector v = pack(Ucm3dState::from_primitive(rho, {0.05, 0.0, 0.0}, Matrix3::identity(),
                                                        SpdMatrix3::identity()));
    std::copy(v.begin(), v.end(), q);
  });
  SolverOptions opt;
  for (int n = 0; n < 20; ++n) strang_step(f, sys, cfl_dt(f, sys, opt), opt);
  EXPECT_NO_THROW(check_field(f, sys));
}
