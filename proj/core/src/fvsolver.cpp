#include "ucmlab/fvsolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ucmlab/format.hpp"
#include "ucmlab/parallel.hpp"

namespace ucmlab {

// ---- grid --------------------------------------------------------------------------

void Grid::validate() const {
  if (nx < 1 || ny < 1) throw std::invalid_argument("grid: cell counts must be >= 1");
  if (!(dx > 0.0) || !std::isfinite(dx)) throw std::invalid_argument("grid: dx must be > 0");
  if (ghost < 1) throw std::invalid_argument("grid: ghost width must be >= 1");
  if (nx < ghost || (!slab() && ny < ghost))
    throw std::invalid_argument("grid: fewer interior cells than ghost layers");
  auto paired = [&](int a, int b) {
    return (bc[a].type == BcType::periodic) == (bc[b].type == BcType::periodic);
  };
  if (!paired(kXLo, kXHi) || (!slab() && !paired(kYLo, kYHi)))
    throw std::invalid_argument("grid: periodic boundaries must be paired on opposite sides");
}

FvField::FvField(const Grid& g, int d)
    : grid(g), dim(d), q(g.cells_total() * d, 0.0), zb(g.cells_total(), 0.0) {}

// ---- speeds ------------------------------------------------------------------------

std::vector<double> svm_speeds(const SvmState& q, const Vec2& n, const SvmParams& p) {
  require_admissible(q);
  const Vec2 U = q.U();
  const double un = U[0] * n[0] + U[1] * n[1];
  const SpdMatrix2 c = congruence(q.F(), q.A());
  double cnn = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) cnn += n[i] * c(i, j) * n[j];
  const double H = q.H;
  const double a = std::sqrt(p.g * H + 3.0 * p.G_eps * q.Acc() * H * H + p.G_eps * cnn);
  const double b = std::sqrt(p.G_eps * cnn);
  return {un - a, un - b, un, un + b, un + a};
}

std::vector<double> ucm_speeds(const Ucm3dState& q, const Vec3& n, const UcmParams& p) {
  require_admissible(q);
  const Vec3 u = q.velocity();
  const double un = u[0] * n[0] + u[1] * n[1] + u[2] * n[2];
  const SpdMatrix3 c = conformation(q);
  double cnn = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) cnn += n[i] * c(i, j) * n[j];
  const double dp = p.gamma * p.C0 * std::pow(q.rho, p.gamma - 1.0);
  const double a = std::sqrt(dp + 2.0 * p.kB_theta + 2.0 * p.K_H_prime * cnn);
  const double b = std::sqrt(2.0 * p.K_H_prime * cnn);
  return {un - a, un - b, un, un + b, un + a};
}

// ---- FvSystem ----------------------------------------------------------------------

SystemInterface FvSystem::as_interface() const {
  SystemInterface s;
  s.name = name();
  s.n = dim();
  s.space_dim = space_dim();
  const int n = dim();
  const int sd = space_dim();
  s.flux = [this, n, sd](const StateVec& q, const Vec3& dir) {
    StateVec out = StateVec::Zero(n);
    std::vector<double> f(n);
    for (int j = 0; j < sd; ++j) {
      if (dir[j] == 0.0) continue;
      flux(q.data(), j, f.data());
      for (int k = 0; k < n; ++k) out[k] += dir[j] * f[k];
    }
    return out;
  };
  s.admissible = [this](const StateVec& q) { return violation(q.data()).empty(); };
  return s;
}

// SVM, A variables.

SvmSystem::SvmSystem(const SvmParams& p, EnergyConvention conv) : p_(p), conv_(conv) {
  p_.validate();
}

SvmState SvmSystem::state(const double* q) const { return unpack_svm(q); }

void SvmSystem::store(const SvmState& s, double* q) const {
  const SvmVector v = pack(s);
  std::copy(v.begin(), v.end(), q);
}

void SvmSystem::flux(const double* q, int dir, double* f) const {
  const SvmVector v = flux_svm(state(q), dir, p_);
  std::copy(v.begin(), v.end(), f);
}

double SvmSystem::max_speed(const double* q, int dir) const {
  Vec2 n{0.0, 0.0};
  n[dir] = 1.0;
  const auto s = svm_speeds(state(q), n, p_);
  return std::max(std::abs(s.front()), std::abs(s.back()));
}

void SvmSystem::nonstiff_source(const double* q, const Vec2& grad_zb, double* s) const {
  std::fill(s, s + kSvmDim, 0.0);
  for (int i = 0; i < 2; ++i) s[1 + i] = -p_.g * q[0] * grad_zb[i] - p_.k * q[1 + i];
}

void SvmSystem::relax(double* q, double dt) const { store(relax_exact_svm(state(q), dt, p_), q); }

namespace {

bool finite_all(const double* q, int n) {
  for (int k = 0; k < n; ++k)
    if (!std::isfinite(q[k])) return false;
  return true;
}

}  // namespace

std::string SvmSystem::violation(const double* q) const {
  if (!finite_all(q, kSvmDim)) return "non-finite component";
  if (!(q[0] > 0.0)) return "depth H must be positive";
  if (!(q[10] > 0.0)) return "A^cc must be positive";
  SpdMatrix2 A;
  for (int k = 0; k < 3; ++k) A.e[k] = q[7 + k] / q[0];
  if (!is_spd(A)) return "A^H is not SPD";
  return {};
}

void SvmSystem::wall_ghost(const double* interior, double* ghost, int dir, bool moving,
                           double wall_velocity, double dz) const {
  const SvmState s = state(interior);
  const double H = s.H + dz;
  Vec2 U = s.U();
  Matrix2 F = s.F();
  SpdMatrix2 A = s.A();
  const int t = 1 - dir;
  U[dir] = -U[dir];
  if (moving) {
    U[t] = 2.0 * wall_velocity - U[t];
  } else {
    F(0, 1) = -F(0, 1);
    F(1, 0) = -F(1, 0);
    A(0, 1) = -A(0, 1);
  }
  store(SvmState::from_primitive(H, U, F, A, s.Acc()), ghost);
}

std::vector<std::string> SvmSystem::columns() const {
  return {"H", "Ux", "Uy", "Fxx", "Fxy", "Fyx", "Fyy", "Axx", "Axy", "Ayy", "Acc"};
}

void SvmSystem::to_row(const double* q, double* row) const {
  const SvmState s = state(q);
  const Vec2 U = s.U();
  const Matrix2 F = s.F();
  const SpdMatrix2 A = s.A();
  row[0] = s.H;
  row[1] = U[0];
  row[2] = U[1];
  for (int k = 0; k < 4; ++k) row[3 + k] = F.a[k];
  for (int k = 0; k < 3; ++k) row[7 + k] = A.e[k];
  row[10] = s.Acc();
}

void SvmSystem::from_row(const double* row, double* q) const {
  Matrix2 F;
  SpdMatrix2 A;
  for (int k = 0; k < 4; ++k) F.a[k] = row[3 + k];
  for (int k = 0; k < 3; ++k) A.e[k] = row[7 + k];
  store(SvmState::from_primitive(row[0], {row[1], row[2]}, F, A, row[10]), q);
}

std::string SvmSystem::params_text() const {
  return "g=" + format_double(p_.g) + ";G_eps=" + format_double(p_.G_eps) +
         ";lambda=" + format_double(p_.lambda) + ";k=" + format_double(p_.k) +
         ";H_hat=" + format_double(p_.H_hat) +
         ";energy=" + (conv_ == EnergyConvention::conformation ? "conformation" : "literal_stress");
}

std::vector<MonitorSpec> SvmSystem::monitors() const {
  return {{"mass", Reduction::sum},           {"mom_x", Reduction::sum},
          {"mom_y", Reduction::sum},          {"energy", Reduction::sum},
          {"energy_tilde", Reduction::sum},   {"dissipation", Reduction::sum},
          {"max_constraint", Reduction::max}, {"min_H", Reduction::min},
          {"min_eig_A", Reduction::min}};
}

void SvmSystem::cell_monitors(const double* q, double* out) const {
  const SvmState s = state(q);
  out[0] = s.H;
  out[1] = s.HU[0];
  out[2] = s.HU[1];
  out[3] = energy_svm(s, p_, conv_);
  out[4] = energy_tilde_svm(s, p_);
  out[5] = s.H * dissipation_svm(s, p_, conv_);
  out[6] = constraint_residual(s, p_);
  out[7] = s.H;
  out[8] = sym_eig(s.A()).values[0];
}

Matrix2 SvmSystem::piola_field(const double* q) const {
  Matrix2 hf;
  for (int k = 0; k < 4; ++k) hf.a[k] = q[3 + k];
  return hf;
}

// SVM, Y variables.

SvmState SvmYSystem::state(const double* q) const { return unpack_svm_y(q); }

void SvmYSystem::store(const SvmState& s, double* q) const {
  const SvmVector v = pack_y(s);
  std::copy(v.begin(), v.end(), q);
}

void SvmYSystem::flux(const double* q, int dir, double* f) const {
  const SvmVector v = flux_svm(state(q), dir, p_);
  std::copy(v.begin(), v.begin() + 7, f);
  const double un = q[1 + dir] / q[0];
  for (int k = 7; k < kSvmDim; ++k) f[k] = q[k] * un;
}

std::string SvmYSystem::violation(const double* q) const {
  if (!finite_all(q, kSvmDim)) return "non-finite component";
  if (!(q[0] > 0.0)) return "depth H must be positive";
  if (!(q[10] > 0.0)) return "Y^cc must be positive";
  SpdMatrix2 Y;
  for (int k = 0; k < 3; ++k) Y.e[k] = q[7 + k] / q[0];
  if (!is_spd(Y)) return "Y^H is not SPD";
  return {};
}

// UCM slab.

UcmSlabSystem::UcmSlabSystem(const UcmParams& p) : p_(p) { p_.validate(); }

void UcmSlabSystem::flux(const double* q, int dir, double* f) const {
  const UcmVector v = flux_3d(unpack_ucm(q), dir, p_);
  std::copy(v.begin(), v.end(), f);
}

double UcmSlabSystem::max_speed(const double* q, int dir) const {
  Vec3 n{0.0, 0.0, 0.0};
  n[dir] = 1.0;
  const auto s = ucm_speeds(unpack_ucm(q), n, p_);
  return std::max(std::abs(s.front()), std::abs(s.back()));
}

void UcmSlabSystem::nonstiff_source(const double* q, const Vec2& grad_zb, double* s) const {
  (void)grad_zb;
  std::fill(s, s + kUcmDim, 0.0);
  for (int i = 0; i < 3; ++i) s[1 + i] = q[0] * p_.body_force[i];
}

void UcmSlabSystem::relax(double* q, double dt) const {
  Ucm3dState s = unpack_ucm(q);
  s.rhoA = s.rho * relax_exact_3d(s.A(), s.F(), dt, p_);
  const UcmVector v = pack(s);
  std::copy(v.begin(), v.end(), q);
}

std::string UcmSlabSystem::violation(const double* q) const {
  if (!finite_all(q, kUcmDim)) return "non-finite component";
  if (!(q[0] > 0.0)) return "density must be positive";
  SpdMatrix3 A;
  for (int k = 0; k < 6; ++k) A.e[k] = q[13 + k] / q[0];
  if (!is_spd(A)) return "A is not SPD";
  return {};
}

void UcmSlabSystem::wall_ghost(const double* interior, double* ghost, int dir, bool moving,
                               double wall_velocity, double dz) const {
  (void)dz;
  const Ucm3dState s = unpack_ucm(interior);
  Vec3 u = s.velocity();
  Matrix3 F = s.F();
  SpdMatrix3 A = s.A();
  u[dir] = -u[dir];
  if (moving) {
    // tangential wall velocity along the next axis
    const int t = (dir + 1) % 3;
    const int z = (dir + 2) % 3;
    u[t] = 2.0 * wall_velocity - u[t];
    u[z] = -u[z];
  } else {
    for (int k = 0; k < 3; ++k) {
      if (k == dir) continue;
      F(dir, k) = -F(dir, k);
      F(k, dir) = -F(k, dir);
      A(dir, k) = -A(dir, k);
    }
  }
  const UcmVector v = pack(Ucm3dState::from_primitive(s.rho, u, F, A));
  std::copy(v.begin(), v.end(), ghost);
}

std::vector<std::string> UcmSlabSystem::columns() const {
  return {"rho", "ux",  "uy",  "uz",  "Fxx", "Fxy", "Fxz", "Fyx", "Fyy", "Fyz",
          "Fzx", "Fzy", "Fzz", "Axx", "Axy", "Axz", "Ayy", "Ayz", "Azz"};
}

void UcmSlabSystem::to_row(const double* q, double* row) const {
  const Ucm3dState s = unpack_ucm(q);
  const Vec3 u = s.velocity();
  const Matrix3 F = s.F();
  const SpdMatrix3 A = s.A();
  row[0] = s.rho;
  for (int i = 0; i < 3; ++i) row[1 + i] = u[i];
  for (int k = 0; k < 9; ++k) row[4 + k] = F.a[k];
  for (int k = 0; k < 6; ++k) row[13 + k] = A.e[k];
}

void UcmSlabSystem::from_row(const double* row, double* q) const {
  Matrix3 F;
  SpdMatrix3 A;
  for (int k = 0; k < 9; ++k) F.a[k] = row[4 + k];
  for (int k = 0; k < 6; ++k) A.e[k] = row[13 + k];
  const UcmVector v = pack(Ucm3dState::from_primitive(row[0], {row[1], row[2], row[3]}, F, A));
  std::copy(v.begin(), v.end(), q);
}

std::string UcmSlabSystem::params_text() const {
  return "K_H_prime=" + format_double(p_.K_H_prime) + ";kB_theta=" + format_double(p_.kB_theta) +
         ";xi=" + format_double(p_.xi) + ";C0=" + format_double(p_.C0) +
         ";gamma=" + format_double(p_.gamma) + ";rho_hat=" + format_double(p_.rho_hat) +
         ";body_force=" + format_double(p_.body_force[0]) + "," + format_double(p_.body_force[1]) +
         "," + format_double(p_.body_force[2]);
}

std::vector<MonitorSpec> UcmSlabSystem::monitors() const {
  return {{"mass", Reduction::sum},           {"mom_x", Reduction::sum},
          {"mom_y", Reduction::sum},          {"mom_z", Reduction::sum},
          {"energy", Reduction::sum},         {"energy_tilde", Reduction::sum},
          {"dissipation", Reduction::sum},    {"max_constraint", Reduction::max},
          {"min_rho", Reduction::min},        {"min_eig_A", Reduction::min}};
}

void UcmSlabSystem::cell_monitors(const double* q, double* out) const {
  const Ucm3dState s = unpack_ucm(q);
  out[0] = s.rho;
  for (int i = 0; i < 3; ++i) out[1 + i] = s.mom[i];
  out[4] = energy_E_3d(s, p_);
  out[5] = entropy_tilde_3d(s, p_, EntropyForm::pressure_compatible);
  out[6] = 4.0 * s.rho / p_.xi * dissipation_3d(s, p_);
  out[7] = std::abs(s.rho * det(s.F()) / p_.rho_hat - 1.0);
  out[8] = s.rho;
  out[9] = sym_eig(s.A()).values[0];
}

// ---- field -------------------------------------------------------------------------

FvField make_field(const Grid& grid, const FvSystem& sys, const InitialState& init,
                   const Bathymetry& zb) {
  grid.validate();
  FvField f(grid, sys.dim());
  for (int j = 0; j < grid.NY(); ++j)
    for (int i = 0; i < grid.NX(); ++i)
      f.zb[grid.index(i, j)] = zb ? zb(grid.xc(i), grid.yc(j)) : 0.0;
  for (int j = grid.gy(); j < grid.gy() + grid.ny; ++j)
    for (int i = grid.gx(); i < grid.gx() + grid.nx; ++i) init(grid.xc(i), grid.yc(j), f.cell(i, j));
  check_field(f, sys);
  return f;
}

double wall_velocity(const BoundaryCondition& bc, const FvField& f, double dt) {
  if (bc.type != BcType::moving_wall) return 0.0;
  double v = bc.tangential_velocity;
  if (f.step == 0 && bc.impulse != 0.0) {
    if (!(dt > 0.0)) throw std::invalid_argument("wall impulse needs a positive first step");
    v += bc.impulse / dt;
  }
  return v;
}

namespace {

// Ghost cell (ig, jg) from source cell (is, js) for side `side`.
void ghost_from(FvField& f, const FvSystem& sys, const BoundaryCondition& bc, int dir, int ig,
                int jg, int is, int js, double vwall) {
  const Grid& g = f.grid;
  double* dst = f.cell(ig, jg);
  const double* src = f.cell(is, js);
  switch (bc.type) {
    case BcType::periodic:
    case BcType::outflow:
      std::copy(src, src + f.dim, dst);
      break;
    case BcType::wall:
    case BcType::moving_wall: {
      const double dz = f.zb[g.index(is, js)] - f.zb[g.index(ig, jg)];
      sys.wall_ghost(src, dst, dir, bc.type == BcType::moving_wall, vwall, dz);
      break;
    }
  }
}

}  // namespace

void fill_ghosts(FvField& f, const FvSystem& sys, double dt) {
  const Grid& g = f.grid;
  const int gx = g.gx(), gy = g.gy(), nx = g.nx, ny = g.ny;
  const double vl = wall_velocity(g.bc[kXLo], f, dt);
  const double vr = wall_velocity(g.bc[kXHi], f, dt);
  for (int j = gy; j < gy + ny; ++j)
    for (int k = 0; k < gx; ++k) {
      const BoundaryCondition& lo = g.bc[kXLo];
      const BoundaryCondition& hi = g.bc[kXHi];
      const int il = gx - 1 - k, ir = gx + nx + k;
      const int sl = lo.type == BcType::periodic ? gx + nx - 1 - k
                     : lo.type == BcType::outflow ? gx
                                                   : gx + k;
      const int sr = hi.type == BcType::periodic ? gx + k
                     : hi.type == BcType::outflow ? gx + nx - 1
                                                   : gx + nx - 1 - k;
      ghost_from(f, sys, lo, 0, il, j, sl, j, vl);
      ghost_from(f, sys, hi, 0, ir, j, sr, j, vr);
    }
  if (g.slab()) return;
  const double vb = wall_velocity(g.bc[kYLo], f, dt);
  const double vt = wall_velocity(g.bc[kYHi], f, dt);
  for (int i = 0; i < g.NX(); ++i)
    for (int k = 0; k < gy; ++k) {
      const BoundaryCondition& lo = g.bc[kYLo];
      const BoundaryCondition& hi = g.bc[kYHi];
      const int jl = gy - 1 - k, jr = gy + ny + k;
      const int sl = lo.type == BcType::periodic ? gy + ny - 1 - k
                     : lo.type == BcType::outflow ? gy
                                                   : gy + k;
      const int sr = hi.type == BcType::periodic ? gy + k
                     : hi.type == BcType::outflow ? gy + ny - 1
                                                   : gy + ny - 1 - k;
      ghost_from(f, sys, lo, 1, i, jl, i, sl, vb);
      ghost_from(f, sys, hi, 1, i, jr, i, sr, vt);
    }
}

// ---- fluxes and substeps --------------------------------------------------------------

void rusanov_flux(const FvSystem& sys, const double* qL, const double* qR, int dir, double sL,
                  double sR, double* out, double dzb) {
  const int n = sys.dim();
  std::vector<double> fL(n), fR(n);
  sys.flux(qL, dir, fL.data());
  sys.flux(qR, dir, fR.data());
  const double s = std::max(sL, sR);
  const int surf = sys.surface_component();
  for (int k = 0; k < n; ++k) {
    double jump = qR[k] - qL[k];
    if (k == surf) jump += dzb;
    out[k] = 0.5 * (fL[k] + fR[k]) - 0.5 * s * jump;
  }
}

namespace {

double fd_radius(const FvSystem& sys, const double* q, int dir) {
  SystemInterface si = sys.as_interface();
  // componentwise relative frame
  si.frame = [](const StateVec& v) {
    const double floor = 1e-6 * (1.0 + v.cwiseAbs().maxCoeff());
    StateVec d(v.size());
    for (Eigen::Index k = 0; k < v.size(); ++k) d[k] = std::max(std::abs(v[k]), floor);
    return DenseMat(d.asDiagonal());
  };
  const StateVec v = Eigen::Map<const StateVec>(q, sys.dim());
  Vec3 n{0.0, 0.0, 0.0};
  n[dir] = 1.0;
  FdOptions opt;
  opt.step = 1e-5;
  return spectral_radius(characteristic_speeds(si, v, n, opt));
}

double speed_of(const FvSystem& sys, const double* q, int dir, SpeedMode mode) {
  return mode == SpeedMode::analytic ? sys.max_speed(q, dir) : fd_radius(sys, q, dir);
}

[[noreturn]] void rethrow_at(const std::exception& e, int i, int j, const FvField& f) {
  throw InvariantViolation(std::string(e.what()) + " at cell (" + std::to_string(i) + ", " +
                               std::to_string(j) + ")",
                           i, j, f.time);
}

}  // namespace

std::vector<double> cell_speeds(const FvField& f, const FvSystem& sys, const SolverOptions& opt) {
  const Grid& g = f.grid;
  const int nd = g.slab() ? 1 : 2;
  std::vector<double> s(g.cells_total() * 2, 0.0);
  parallel_for(g.cells_total(), opt.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) {
      const int i = static_cast<int>(c % g.NX()), j = static_cast<int>(c / g.NX());
      try {
        for (int d = 0; d < nd; ++d) s[2 * c + d] = speed_of(sys, f.q.data() + c * f.dim, d, opt.speeds);
      } catch (const DomainError& err) {
        rethrow_at(err, i, j, f);
      }
    }
  });
  return s;
}

double cfl_dt(const FvField& f, const FvSystem& sys, const SolverOptions& opt) {
  if (!(opt.cfl > 0.0 && opt.cfl <= 1.0)) throw std::invalid_argument("cfl must lie in (0, 1]");
  const Grid& g = f.grid;
  const int nd = g.slab() ? 1 : 2;
  const std::size_t n = static_cast<std::size_t>(g.nx) * g.ny;
  std::vector<double> s(n, 0.0);
  parallel_for(n, opt.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) {
      const int i = g.gx() + static_cast<int>(c % g.nx), j = g.gy() + static_cast<int>(c / g.nx);
      try {
        for (int d = 0; d < nd; ++d) s[c] += speed_of(sys, f.cell(i, j), d, opt.speeds);
      } catch (const DomainError& err) {
        rethrow_at(err, i, j, f);
      }
    }
  });
  const double smax = *std::max_element(s.begin(), s.end());
  if (!(smax > 0.0)) throw std::invalid_argument("cfl_dt: all characteristic speeds vanish");
  return opt.cfl * g.dx / smax;
}

void hyperbolic_substep(FvField& f, const FvSystem& sys, double dt, const SolverOptions& opt) {
  const Grid& g = f.grid;
  const int n = f.dim;
  fill_ghosts(f, sys, dt);
  const std::vector<double> s = cell_speeds(f, sys, opt);
  const int gx = g.gx(), gy = g.gy(), nx = g.nx, ny = g.ny, NX = g.NX();

  // x faces: (nx + 1) per interior row; face k sits between cells gx + k - 1 and gx + k.
  std::vector<double> fx(static_cast<std::size_t>(nx + 1) * ny * n);
  parallel_for(static_cast<std::size_t>(nx + 1) * ny, opt.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) {
      const int k = static_cast<int>(c % (nx + 1)), j = gy + static_cast<int>(c / (nx + 1));
      const int il = gx + k - 1, ir = gx + k;
      const std::size_t cl = g.index(il, j), cr = g.index(ir, j);
      try {
        rusanov_flux(sys, f.cell(il, j), f.cell(ir, j), 0, s[2 * cl], s[2 * cr], fx.data() + c * n,
                     f.zb[cr] - f.zb[cl]);
      } catch (const DomainError& err) {
        rethrow_at(err, ir, j, f);
      }
    }
  });
  std::vector<double> fy;
  if (!g.slab()) {
    fy.resize(static_cast<std::size_t>(ny + 1) * nx * n);
    parallel_for(static_cast<std::size_t>(ny + 1) * nx, opt.threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t c = b; c < e; ++c) {
        const int i = gx + static_cast<int>(c % nx), k = static_cast<int>(c / nx);
        const int jl = gy + k - 1, jr = gy + k;
        const std::size_t cl = g.index(i, jl), cr = g.index(i, jr);
        try {
          rusanov_flux(sys, f.cell(i, jl), f.cell(i, jr), 1, s[2 * cl + 1], s[2 * cr + 1],
                       fy.data() + c * n, f.zb[cr] - f.zb[cl]);
        } catch (const DomainError& err) {
          rethrow_at(err, i, jr, f);
        }
      }
    });
  }

  const double r = dt / g.dx;
  const double inv2dx = 0.5 / g.dx;
  parallel_for(static_cast<std::size_t>(nx) * ny, opt.threads, [&](std::size_t b, std::size_t e) {
    std::vector<double> src(n);
    for (std::size_t c = b; c < e; ++c) {
      const int ii = static_cast<int>(c % nx), jj = static_cast<int>(c / nx);
      const int i = gx + ii, j = gy + jj;
      double* q = f.cell(i, j);
      const std::size_t id = g.index(i, j);
      Vec2 grad{(f.zb[id + 1] - f.zb[id - 1]) * inv2dx, 0.0};
      if (!g.slab()) grad[1] = (f.zb[id + NX] - f.zb[id - NX]) * inv2dx;
      sys.nonstiff_source(q, grad, src.data());
      const double* a = fx.data() + (static_cast<std::size_t>(jj) * (nx + 1) + ii) * n;
      const double* bflux = a + n;
      for (int k = 0; k < n; ++k) q[k] += dt * src[k] - r * (bflux[k] - a[k]);
      if (!g.slab()) {
        const double* lo = fy.data() + (static_cast<std::size_t>(jj) * nx + ii) * n;
        const double* hi = fy.data() + (static_cast<std::size_t>(jj + 1) * nx + ii) * n;
        for (int k = 0; k < n; ++k) q[k] -= r * (hi[k] - lo[k]);
      }
    }
  });
  check_field(f, sys);
}

void relaxation_substep(FvField& f, const FvSystem& sys, double dt, const SolverOptions& opt) {
  const Grid& g = f.grid;
  parallel_for(static_cast<std::size_t>(g.nx) * g.ny, opt.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) {
      const int i = g.gx() + static_cast<int>(c % g.nx), j = g.gy() + static_cast<int>(c / g.nx);
      try {
        sys.relax(f.cell(i, j), dt);
      } catch (const DomainError& err) {
        rethrow_at(err, i, j, f);
      }
    }
  });
  check_field(f, sys);
}

void strang_step(FvField& f, const FvSystem& sys, double dt, const SolverOptions& opt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("time step must be positive");
  switch (opt.splitting) {
    case Splitting::strang:
      relaxation_substep(f, sys, 0.5 * dt, opt);
      hyperbolic_substep(f, sys, dt, opt);
      relaxation_substep(f, sys, 0.5 * dt, opt);
      break;
    case Splitting::lie:
      hyperbolic_substep(f, sys, dt, opt);
      relaxation_substep(f, sys, dt, opt);
      break;
    case Splitting::hyperbolic_only:
      hyperbolic_substep(f, sys, dt, opt);
      break;
  }
  f.time += dt;
  ++f.step;
}

void check_field(const FvField& f, const FvSystem& sys) {
  const Grid& g = f.grid;
  for (int j = g.gy(); j < g.gy() + g.ny; ++j)
    for (int i = g.gx(); i < g.gx() + g.nx; ++i) {
      const std::string v = sys.violation(f.cell(i, j));
      if (!v.empty())
        throw InvariantViolation("invariant violation: " + v + " at cell (" + std::to_string(i - g.gx()) +
                                     ", " + std::to_string(j - g.gy()) + ")",
                                 i - g.gx(), j - g.gy(), f.time);
    }
}

// ---- monitors ----------------------------------------------------------------------

std::vector<std::string> monitor_names(const FvSystem& sys) {
  std::vector<std::string> names;
  for (const auto& m : sys.monitors()) names.push_back(m.name);
  if (sys.has_piola()) names.push_back("max_piola");
  return names;
}

MonitorRow compute_monitors(const FvField& f, const FvSystem& sys, double dt, int threads) {
  const Grid& g = f.grid;
  const auto specs = sys.monitors();
  const int m = static_cast<int>(specs.size());
  const std::size_t n = static_cast<std::size_t>(g.nx) * g.ny;
  std::vector<double> per(n * m);
  parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) {
      const int i = g.gx() + static_cast<int>(c % g.nx), j = g.gy() + static_cast<int>(c / g.nx);
      sys.cell_monitors(f.cell(i, j), per.data() + c * m);
    }
  });
  MonitorRow row;
  row.step = f.step;
  row.time = f.time;
  row.dt = dt;
  row.values.resize(m);
  for (int k = 0; k < m; ++k) {
    double acc = specs[k].reduction == Reduction::sum   ? 0.0
                 : specs[k].reduction == Reduction::max ? -std::numeric_limits<double>::infinity()
                                                        : std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n; ++c) {
      const double v = per[c * m + k];
      switch (specs[k].reduction) {
        case Reduction::sum: acc += v; break;
        case Reduction::max: acc = std::max(acc, v); break;
        case Reduction::min: acc = std::min(acc, v); break;
      }
    }
    row.values[k] = specs[k].reduction == Reduction::sum ? acc * g.cell_area() : acc;
  }
  if (sys.has_piola()) {
    FvField tmp = f;
    fill_ghosts(tmp, sys, dt > 0.0 ? dt : 1.0);
    std::vector<Matrix2> hf(g.cells_total());
    for (std::size_t c = 0; c < hf.size(); ++c) hf[c] = sys.piola_field(tmp.q.data() + c * f.dim);
    const auto res = piola_residual(hf, g.NX(), g.NY(), g.dx, g.dx, g.gx(), g.gy());
    row.values.push_back(res.empty() ? 0.0 : *std::max_element(res.begin(), res.end()));
  }
  return row;
}

std::string monitors_csv_header(const FvSystem& sys) {
  std::string h = "step,time,dt";
  for (const auto& n : monitor_names(sys)) h += "," + n;
  return h;
}

std::string monitors_csv_row(const MonitorRow& r) {
  std::string s = std::to_string(r.step) + "," + format_double(r.time) + "," + format_double(r.dt);
  for (double v : r.values) s += "," + format_double(v);
  return s;
}

// ---- snapshots -----------------------------------------------------------------------

std::uint64_t params_hash(const FvSystem& sys) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : sys.name() + "|" + sys.params_text()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int k = 15; k >= 0; --k, v >>= 4) s[k] = digits[v & 0xf];
  return s;
}

std::string column_line(const FvSystem& sys) {
  std::string s = "x,y";
  for (const auto& c : sys.columns()) s += "," + c;
  return s;
}

}  // namespace

std::string snapshot_text(const FvField& f, const FvSystem& sys) {
  const Grid& g = f.grid;
  std::ostringstream os;
  os << "time: " << format_double(f.time) << "\n";
  os << "step: " << f.step << "\n";
  os << "dims: " << g.nx << " " << g.ny << "\n";
  os << "dx: " << format_double(g.dx) << "\n";
  os << "origin: " << format_double(g.x0) << " " << format_double(g.y0) << "\n";
  os << "system: " << sys.name() << "\n";
  os << "params: " << sys.params_text() << "\n";
  os << "params_hash: " << hex64(params_hash(sys)) << "\n";
  os << column_line(sys) << "\n";
  std::vector<double> row(f.dim);
  for (int j = g.gy(); j < g.gy() + g.ny; ++j)
    for (int i = g.gx(); i < g.gx() + g.nx; ++i) {
      sys.to_row(f.cell(i, j), row.data());
      os << format_double(g.xc(i)) << "," << format_double(g.yc(j));
      for (double v : row) os << "," << format_double(v);
      os << "\n";
    }
  return os.str();
}

void load_snapshot(const std::string& text, FvField& f, const FvSystem& sys) {
  const Grid& g = f.grid;
  std::istringstream is(text);
  std::string line;
  bool have_cols = false;
  double time = 0.0;
  long step = 0;
  while (!have_cols && std::getline(is, line)) {
    if (line == column_line(sys)) {
      have_cols = true;
      break;
    }
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw std::runtime_error("snapshot: malformed header line: " + line);
    const std::string key(trim(std::string_view(line).substr(0, colon)));
    const std::string val(trim(std::string_view(line).substr(colon + 1)));
    if (key == "time") {
      time = parse_double(val);
    } else if (key == "step") {
      step = static_cast<long>(parse_int(val));
    } else if (key == "dims") {
      std::istringstream d(val);
      int nx = 0, ny = 0;
      d >> nx >> ny;
      if (nx != g.nx || ny != g.ny) throw std::runtime_error("snapshot: grid dimensions differ");
    } else if (key == "system") {
      if (val != sys.name()) throw std::runtime_error("snapshot: system differs: " + val);
    } else if (key == "params_hash") {
      if (val != hex64(params_hash(sys))) throw std::runtime_error("snapshot: parameter hash differs");
    } else if (key != "dx" && key != "origin" && key != "params") {
      throw std::runtime_error("snapshot: unknown header key: " + key);
    }
  }
  if (!have_cols) throw std::runtime_error("snapshot: missing column line");
  std::vector<double> row(f.dim);
  for (int j = g.gy(); j < g.gy() + g.ny; ++j)
    for (int i = g.gx(); i < g.gx() + g.nx; ++i) {
      if (!std::getline(is, line)) throw std::runtime_error("snapshot: too few rows");
      std::string_view rest(line);
      std::vector<double> vals;
      while (true) {
        const auto comma = rest.find(',');
        vals.push_back(parse_double(rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
      }
      if (static_cast<int>(vals.size()) != f.dim + 2)
        throw std::runtime_error("snapshot: wrong column count");
      sys.from_row(vals.data() + 2, f.cell(i, j));
    }
  f.time = time;
  f.step = step;
  check_field(f, sys);
}

// ---- driver ----------------------------------------------------------------------------

RunResult run(const RunConfig& cfg, const StepCallback& on_step, std::string* diagnostic,
              const FvField* resume_from) {
  if (!cfg.system) throw std::invalid_argument("run: no system");
  if (!(cfg.t_end >= 0.0)) throw std::invalid_argument("run: end time must be >= 0");
  if (!(cfg.output_interval >= 0.0)) throw std::invalid_argument("run: output interval must be >= 0");
  const FvSystem& sys = *cfg.system;
  RunResult res;
  res.field = resume_from ? *resume_from : make_field(cfg.grid, sys, cfg.init, cfg.bathymetry);
  FvField& f = res.field;
  try {
    check_field(f, sys);
  } catch (const InvariantViolation&) {
    if (diagnostic) *diagnostic = snapshot_text(f, sys);
    throw;
  }
  res.monitors.push_back(compute_monitors(f, sys, 0.0, cfg.solver.threads));
  auto emit = [&] {
    res.snapshots.push_back(snapshot_text(f, sys));
    res.snapshot_times.push_back(f.time);
  };
  if (!resume_from) emit();

  const double eps = 1e-12 * std::max(1.0, cfg.t_end);
  double next_out = cfg.t_end;
  if (cfg.output_interval > 0.0) {
    next_out = (std::floor(f.time / cfg.output_interval + 1e-9) + 1.0) * cfg.output_interval;
    next_out = std::min(next_out, cfg.t_end);
  }
  while (f.time < cfg.t_end - eps && f.step < cfg.max_steps) {
    double dt;
    try {
      dt = cfl_dt(f, sys, cfg.solver);
    } catch (const InvariantViolation&) {
      if (diagnostic) *diagnostic = snapshot_text(f, sys);
      throw;
    }
    bool landing = false;
    if (f.time + dt >= next_out - eps) {
      dt = next_out - f.time;
      landing = true;
    }
    try {
      strang_step(f, sys, dt, cfg.solver);
    } catch (const InvariantViolation&) {
      if (diagnostic) *diagnostic = snapshot_text(f, sys);
      throw;
    }
    if (landing) f.time = next_out;
    res.monitors.push_back(compute_monitors(f, sys, dt, cfg.solver.threads));
    if (on_step) on_step(f, dt);
    if (landing) {
      if (cfg.output_interval > 0.0 || f.time >= cfg.t_end - eps) emit();
      next_out = std::min(cfg.t_end, next_out + (cfg.output_interval > 0.0 ? cfg.output_interval : cfg.t_end));
    }
  }
  if (res.snapshot_times.empty() || res.snapshot_times.back() < f.time) emit();
  return res;
}

}  // namespace ucmlab
