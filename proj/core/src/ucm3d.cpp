#include "ucmlab/ucm3d.hpp"

#include <cmath>
#include <string>

namespace ucmlab {

void UcmParams::validate() const {
  if (!(K_H_prime > 0.0)) throw DomainError("UcmParams: K_H_prime must be > 0", K_H_prime);
  if (!(kB_theta > 0.0)) throw DomainError("UcmParams: kB_theta must be > 0", kB_theta);
  if (!(xi > 0.0)) throw DomainError("UcmParams: xi must be > 0", xi);
  if (!(gamma > 1.0)) throw DomainError("UcmParams: gamma must be > 1", gamma);
  if (!(C0 >= 0.0)) throw DomainError("UcmParams: C0 must be >= 0", C0);
  if (!(rho_hat > 0.0)) throw DomainError("UcmParams: rho_hat must be > 0", rho_hat);
}

Ucm3dState Ucm3dState::from_primitive(double rho, const Vec3& u, const Matrix3& F,
                                      const SpdMatrix3& A) {
  Ucm3dState q;
  q.rho = rho;
  q.mom = {rho * u[0], rho * u[1], rho * u[2]};
  q.rhoF = rho * F;
  q.rhoA = rho * A;
  return q;
}

UcmVector pack(const Ucm3dState& q) {
  UcmVector v{};
  v[0] = q.rho;
  for (int i = 0; i < 3; ++i) v[1 + i] = q.mom[i];
  for (int k = 0; k < 9; ++k) v[4 + k] = q.rhoF.a[k];
  for (int k = 0; k < 6; ++k) v[13 + k] = q.rhoA.e[k];
  return v;
}

Ucm3dState unpack_ucm(const double* v) {
  Ucm3dState q;
  q.rho = v[0];
  for (int i = 0; i < 3; ++i) q.mom[i] = v[1 + i];
  for (int k = 0; k < 9; ++k) q.rhoF.a[k] = v[4 + k];
  for (int k = 0; k < 6; ++k) q.rhoA.e[k] = v[13 + k];
  return q;
}

UcmVector pack_y(const Ucm3dState& q) {
  UcmVector v = pack(q);
  const SpdMatrix3 rhoY = q.rho * a_to_y(q.A());
  for (int k = 0; k < 6; ++k) v[13 + k] = rhoY.e[k];
  return v;
}

Ucm3dState unpack_ucm_y(const double* v) {
  Ucm3dState q = unpack_ucm(v);
  if (!(q.rho > 0.0)) throw DomainError("unpack_ucm_y: density must be positive", q.rho);
  q.rhoA = q.rho * y_to_a((1.0 / q.rho) * q.rhoA);
  return q;
}

bool is_admissible(const Ucm3dState& q) {
  if (!(q.rho > 0.0) || !std::isfinite(q.rho)) return false;
  if (!all_finite(q.rhoF)) return false;
  for (double m : q.mom)
    if (!std::isfinite(m)) return false;
  return is_spd(q.A());
}

void require_admissible(const Ucm3dState& q) {
  if (!(q.rho > 0.0) || !std::isfinite(q.rho))
    throw DomainError("state outside admissible set: density must be positive", q.rho);
  if (!all_finite(q.rhoF) || !std::isfinite(q.mom[0]) || !std::isfinite(q.mom[1]) || !std::isfinite(q.mom[2]))
    throw DomainError("state outside admissible set: momentum and deformation must be finite");
  if (!is_spd(q.A())) throw DomainError("state outside admissible set: A is not SPD");
}

double pressure(double rho, const UcmParams& p) { return p.C0 * std::pow(rho, p.gamma); }

double internal_energy(double rho, const UcmParams& p) {
  return p.C0 / (p.gamma - 1.0) * std::pow(rho, p.gamma - 1.0);
}

SpdMatrix3 conformation(const Ucm3dState& q) { return congruence(q.F(), q.A()); }

SpdMatrix3 extra_stress(const Ucm3dState& q, const UcmParams& p) {
  SpdMatrix3 t = p.K_H_prime * conformation(q);
  for (int i = 0; i < 3; ++i) t(i, i) -= p.kB_theta;
  return (2.0 * q.rho) * t;
}

SpdMatrix3 cauchy_stress(const Ucm3dState& q, const UcmParams& p) {
  SpdMatrix3 s = extra_stress(q, p);
  const double pr = pressure(q.rho, p);
  for (int i = 0; i < 3; ++i) s(i, i) -= pr;
  return s;
}

UcmVector flux_3d_normal(const Ucm3dState& q, const Vec3& n, const UcmParams& p) {
  require_admissible(q);
  const Vec3 u = q.velocity();
  const double un = u[0] * n[0] + u[1] * n[1] + u[2] * n[2];
  const SpdMatrix3 sigma = cauchy_stress(q, p);
  UcmVector f{};
  f[0] = q.rho * un;
  for (int i = 0; i < 3; ++i) {
    double sn = 0.0;
    for (int j = 0; j < 3; ++j) sn += sigma(i, j) * n[j];
    f[1 + i] = q.mom[i] * un - sn;
  }
  // rho u^j F^i_a - rho u^i F^j_a contracted with n_j
  for (int i = 0; i < 3; ++i)
    for (int a = 0; a < 3; ++a) {
      double fn = 0.0;
      for (int j = 0; j < 3; ++j) fn += q.rhoF(j, a) * n[j];
      f[4 + 3 * i + a] = q.rhoF(i, a) * un - u[i] * fn;
    }
  for (int k = 0; k < 6; ++k) f[13 + k] = q.rhoA.e[k] * un;
  return f;
}

UcmVector flux_3d(const Ucm3dState& q, int dir, const UcmParams& p) {
  if (dir < 0 || dir > 2) throw DomainError("flux_3d: axis index must be 0, 1 or 2", dir);
  Vec3 n{0.0, 0.0, 0.0};
  n[dir] = 1.0;
  return flux_3d_normal(q, n, p);
}

SpdMatrix3 a_equilibrium(const Matrix3& F, const UcmParams& p) {
  return (p.kB_theta / p.K_H_prime) * inv(gram(F));
}

SpdMatrix3 a_relaxation_rate(const SpdMatrix3& A, const Matrix3& F, const UcmParams& p) {
  const Matrix3 Fi = inv(F);
  SpdMatrix3 B;  // F^-1 F^-T
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) {
      double v = 0.0;
      for (int i = 0; i < 3; ++i) v += Fi(a, i) * Fi(b, i);
      B(a, b) = v;
    }
  return (4.0 / p.xi) * (p.kB_theta * B - p.K_H_prime * A);
}

UcmVector source_3d(const Ucm3dState& q, const UcmParams& p) {
  require_admissible(q);
  UcmVector s{};
  for (int i = 0; i < 3; ++i) s[1 + i] = q.rho * p.body_force[i];
  const SpdMatrix3 rate = q.rho * a_relaxation_rate(q.A(), q.F(), p);
  for (int k = 0; k < 6; ++k) s[13 + k] = rate.e[k];
  return s;
}

SpdMatrix3 a_to_y(const SpdMatrix3& A) {
  if (!is_spd(A)) throw DomainError("a_to_y: A is not SPD");
  return square(inv(A));
}

SpdMatrix3 y_to_a(const SpdMatrix3& Y) { return spd_inv_sqrt(Y); }

double entropy_tilde_3d(const Ucm3dState& q, const UcmParams& p, EntropyForm form) {
  require_admissible(q);
  const Vec3 u = q.velocity();
  const double ke = 0.5 * (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
  const SpdMatrix3 A = q.A();
  const SpdMatrix3 Y = a_to_y(A);
  double e = ke + internal_energy(q.rho, p) + p.K_H_prime * trace(congruence(q.F(), A)) +
             trace_sq(Y);
  if (form == EntropyForm::pressure_compatible)
    e += 2.0 * p.kB_theta * std::log(q.rho / p.rho_hat);
  return q.rho * e;
}

double free_energy_psi1(const Ucm3dState& q, const UcmParams& p) {
  const SpdMatrix3 c = conformation(q);
  const double dc = det(c);
  if (!(dc > 0.0)) throw DomainError("free_energy_psi1: conformation is not SPD", dc);
  return internal_energy(q.rho, p) + p.K_H_prime * trace(c) - p.kB_theta * std::log(dc);
}

double free_energy_psi2(const Ucm3dState& q, const UcmParams& p) {
  const SpdMatrix3 A = q.A();
  const double da = det(A);
  if (!(da > 0.0)) throw DomainError("free_energy_psi2: A is not SPD", da);
  return internal_energy(q.rho, p) + p.K_H_prime * trace(conformation(q)) +
         2.0 * p.kB_theta * std::log(q.rho / p.rho_hat) - p.kB_theta * std::log(da);
}

double energy_E_3d(const Ucm3dState& q, const UcmParams& p) {
  require_admissible(q);
  const Vec3 u = q.velocity();
  const double ke = 0.5 * (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
  return q.rho * (ke + free_energy_psi1(q, p));
}

double dissipation_3d(const Ucm3dState& q, const UcmParams& p) {
  const SpdMatrix3 c = conformation(q);
  if (!is_spd(c)) throw DomainError("dissipation_3d: conformation is not SPD");
  // tr((K c - k I) c^-1 (K c - k I)) = K^2 tr c - 6 K k + k^2 tr c^-1
  const double K = p.K_H_prime, k = p.kB_theta;
  return K * K * trace(c) - 6.0 * K * k + k * k * trace(inv(c));
}

SpdMatrix3 relax_exact_3d(const SpdMatrix3& A0, const Matrix3& F, double dt, const UcmParams& p) {
  if (!(dt >= 0.0)) throw DomainError("relax_exact_3d: dt must be >= 0", dt);
  const double w = std::exp(-dt / p.lambda());
  return w * A0 + (1.0 - w) * a_equilibrium(F, p);
}

SpdMatrix3 y_relaxation_rate(const SpdMatrix3& Y, const Matrix3& F, const UcmParams& p) {
  const SpdMatrix3 A = y_to_a(Y);
  const Matrix3 Fi = inv(F);
  const Matrix3 B = Fi * transpose(Fi);
  const Matrix3 Af = to_full(A), Yf = to_full(Y);
  const Matrix3 inner = B * Af + Af * B;
  const SpdMatrix3 t = sym_part(Yf * inner * Yf);
  return (-4.0 / p.xi) * (p.kB_theta * t - 2.0 * p.K_H_prime * Y);
}

SpdMatrix3 y_relaxation_rate_published(const SpdMatrix3& Y, const Matrix3& F,
                                       const UcmParams& p) {
  const Matrix3 Ai = to_full(inv(y_to_a(Y)));
  const Matrix3 Fi = inv(F);
  const Matrix3 FtFi = transpose(Fi) * Fi;  // F^-T F^-1
  const Matrix3 FiFt = Fi * transpose(Fi);  // F^-1 F^-T
  const Matrix3 Z = FtFi * Ai + Ai * FiFt;
  Matrix3 inner = p.kB_theta * Z;
  for (int i = 0; i < 3; ++i) inner(i, i) -= 2.0 * p.K_H_prime;
  const Matrix3 Yf = to_full(Y);
  return (-4.0 / p.xi) * sym_part(Yf * inner * Yf);
}

SpdMatrix3 kernel_solution_c(const std::vector<PathSample>& path, const SpdMatrix3& c0,
                             const UcmParams& p) {
  if (path.empty()) throw DomainError("kernel_solution_c: empty history");
  const double lam = p.lambda();
  const double t0 = path.front().s;
  const double t = path.back().s;
  const Matrix3& Ft = path.back().F;
  const Matrix3 M0 = Ft * inv(path.front().F);
  SpdMatrix3 c = std::exp((t0 - t) / lam) * congruence(M0, c0);
  const double ratio = p.kB_theta / p.K_H_prime;
  auto integrand = [&](const PathSample& ps) {
    const Matrix3 M = Ft * inv(ps.F);
    return (ratio / lam * std::exp((ps.s - t) / lam)) * gram(transpose(M));
  };
  for (std::size_t k = 1; k < path.size(); ++k) {
    const double ds = path[k].s - path[k - 1].s;
    if (ds < 0.0) throw DomainError("kernel_solution_c: samples must be sorted in time", ds);
    c = c + (0.5 * ds) * (integrand(path[k - 1]) + integrand(path[k]));
  }
  return c;
}

namespace {

struct LocalFields {
  SpdMatrix3 tau;
  Matrix3 F;
  SpdMatrix3 A;
  Vec3 u;
};

LocalFields eval_fields(const MotionField& field, double t, const Vec3& x, const UcmParams& p) {
  const MotionSample m = field(t, x);
  const double J = det(m.F);
  if (!(J > 0.0)) throw DomainError("maxwell_residual: sampler returned det F <= 0", J);
  const double rho = p.rho_hat / J;
  const Ucm3dState q = Ucm3dState::from_primitive(rho, m.u, m.F, m.A);
  return {extra_stress(q, p), m.F, m.A, m.u};
}

}  // namespace

MaxwellResidual maxwell_residual(const MotionField& field, double t, const Vec3& x, double h,
                                 const UcmParams& p, double consistency_tol) {
  if (!(h > 0.0)) throw DomainError("maxwell_residual: spacing must be > 0", h);
  const LocalFields c = eval_fields(field, t, x, p);
  const LocalFields tp = eval_fields(field, t + h, x, p);
  const LocalFields tm = eval_fields(field, t - h, x, p);
  std::array<LocalFields, 3> xp{c, c, c}, xm{c, c, c};
  for (int j = 0; j < 3; ++j) {
    Vec3 a = x, b = x;
    a[j] += h;
    b[j] -= h;
    xp[j] = eval_fields(field, t, a, p);
    xm[j] = eval_fields(field, t, b, p);
  }
  const double inv2h = 1.0 / (2.0 * h);

  Matrix3 gu;  // gu(i, j) = d u^i / d x^j
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) gu(i, j) = (xp[j].u[i] - xm[j].u[i]) * inv2h;
  const double divu = trace(gu);

  auto material_rate = [&](auto get) {
    auto d = (get(tp) - get(tm));
    auto r = inv2h * d;
    for (int j = 0; j < 3; ++j) r = r + (c.u[j] * inv2h) * (get(xp[j]) - get(xm[j]));
    return r;
  };

  const SpdMatrix3 dtau = material_rate([](const LocalFields& f) { return f.tau; });
  const Matrix3 tauf = to_full(c.tau);
  const Matrix3 conv = to_full(dtau) - gu * tauf - tauf * transpose(gu);

  const double lam = p.lambda();
  const double rho = p.rho_hat / det(c.F);
  const double mu_dot = 2.0 * rho * p.kB_theta * lam;
  const Matrix3 D = 0.5 * (gu + transpose(gu));

  MaxwellResidual out;
  out.residual = lam * conv + (lam * divu) * tauf + tauf - (2.0 * mu_dot) * D;
  out.norm = frobenius(out.residual);

  const Matrix3 dF = material_rate([](const LocalFields& f) { return f.F; });
  out.f_transport = frobenius(dF - gu * c.F);
  const SpdMatrix3 dA = material_rate([](const LocalFields& f) { return f.A; });
  out.a_transport = frobenius(dA - a_relaxation_rate(c.A, c.F, p));

  if (out.f_transport > consistency_tol)
    throw DomainError("maxwell_residual: sampler inconsistent, F transport residual " +
                          std::to_string(out.f_transport) + " exceeds tolerance",
                      out.f_transport);
  if (out.a_transport > consistency_tol)
    throw DomainError("maxwell_residual: sampler inconsistent, A relaxation residual " +
                          std::to_string(out.a_transport) + " exceeds tolerance",
                      out.a_transport);
  return out;
}

}  // namespace ucmlab

namespace ucmlab {

double lieb_trace(const Matrix3& F, const SpdMatrix3& Y, double power) {
  if (!is_spd(Y)) throw DomainError("lieb_trace: Y is not SPD");
  const SpdMatrix3 Yp = spectral_map(sym_eig(Y), [power](double l) { return std::pow(l, power); });
  return trace(congruence(F, Yp));
}

}  // namespace ucmlab
