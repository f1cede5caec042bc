#include "ucmlab/svm2d.hpp"

#include <algorithm>
#include <cmath>

namespace ucmlab {

void SvmParams::validate() const {
  if (!(g > 0.0)) throw DomainError("SvmParams: g must be > 0", g);
  if (!(G_eps >= 0.0)) throw DomainError("SvmParams: G_eps must be >= 0", G_eps);
  if (!(lambda > 0.0)) throw DomainError("SvmParams: lambda must be > 0", lambda);
  if (!(k >= 0.0)) throw DomainError("SvmParams: k must be >= 0", k);
  if (!(H_hat > 0.0)) throw DomainError("SvmParams: H_hat must be > 0", H_hat);
}

SvmState SvmState::from_primitive(double H, const Vec2& U, const Matrix2& F, const SpdMatrix2& A,
                                  double Acc) {
  SvmState q;
  q.H = H;
  q.HU = {H * U[0], H * U[1]};
  q.HF = H * F;
  q.HA = H * A;
  q.HAcc = H * Acc;
  return q;
}

SvmVector pack(const SvmState& q) {
  SvmVector v{};
  v[0] = q.H;
  v[1] = q.HU[0];
  v[2] = q.HU[1];
  for (int k = 0; k < 4; ++k) v[3 + k] = q.HF.a[k];
  for (int k = 0; k < 3; ++k) v[7 + k] = q.HA.e[k];
  v[10] = q.HAcc;
  return v;
}

SvmState unpack_svm(const double* v) {
  SvmState q;
  q.H = v[0];
  q.HU = {v[1], v[2]};
  for (int k = 0; k < 4; ++k) q.HF.a[k] = v[3 + k];
  for (int k = 0; k < 3; ++k) q.HA.e[k] = v[7 + k];
  q.HAcc = v[10];
  return q;
}

SvmVector pack_y(const SvmState& q) {
  SvmVector v = pack(q);
  const SpdMatrix2 HY = q.H * svm_a_to_y(q.A());
  for (int k = 0; k < 3; ++k) v[7 + k] = HY.e[k];
  v[10] = q.H * svm_acc_to_ycc(q.Acc());
  return v;
}

SvmState unpack_svm_y(const double* v) {
  SvmState q = unpack_svm(v);
  if (!(q.H > 0.0)) throw DomainError("unpack_svm_y: depth must be positive", q.H);
  q.HA = q.H * svm_y_to_a((1.0 / q.H) * q.HA);
  q.HAcc = q.H * svm_ycc_to_acc(q.HAcc / q.H);
  return q;
}

bool is_admissible(const SvmState& q) {
  if (!(q.H > 0.0) || !std::isfinite(q.H)) return false;
  if (!std::isfinite(q.HU[0]) || !std::isfinite(q.HU[1]) || !all_finite(q.HF)) return false;
  if (!(q.HAcc > 0.0) || !std::isfinite(q.HAcc)) return false;
  return is_spd(q.A());
}

void require_admissible(const SvmState& q) {
  if (!(q.H > 0.0) || !std::isfinite(q.H))
    throw DomainError("state outside admissible set: depth H must be positive", q.H);
  if (!(q.HAcc > 0.0) || !std::isfinite(q.HAcc))
    throw DomainError("state outside admissible set: A^cc must be positive", q.HAcc);
  if (!all_finite(q.HF) || !std::isfinite(q.HU[0]) || !std::isfinite(q.HU[1]))
    throw DomainError("state outside admissible set: momentum and deformation must be finite");
  if (!is_spd(q.A())) throw DomainError("state outside admissible set: A^H is not SPD");
}

SvmVector flux_svm_normal(const SvmState& q, const Vec2& n, const SvmParams& p) {
  require_admissible(q);
  const Vec2 U = q.U();
  const double un = U[0] * n[0] + U[1] * n[1];
  const double H = q.H;
  const SpdMatrix2 c = congruence(q.F(), q.A());
  const double ptot = 0.5 * p.g * H * H + p.G_eps * q.Acc() * H * H * H;
  SvmVector f{};
  f[0] = q.HU[0] * n[0] + q.HU[1] * n[1];
  for (int i = 0; i < 2; ++i) {
    const double cn = c(i, 0) * n[0] + c(i, 1) * n[1];
    f[1 + i] = q.HU[i] * un + ptot * n[i] - p.G_eps * H * cn;
  }
  for (int i = 0; i < 2; ++i)
    for (int a = 0; a < 2; ++a) {
      const double fn = q.HF(0, a) * n[0] + q.HF(1, a) * n[1];
      f[3 + 2 * i + a] = q.HF(i, a) * un - U[i] * fn;
    }
  for (int k = 0; k < 3; ++k) f[7 + k] = q.HA.e[k] * un;
  f[10] = q.HAcc * un;
  return f;
}

SvmVector flux_svm(const SvmState& q, int dir, const SvmParams& p) {
  if (dir < 0 || dir > 1) throw DomainError("flux_svm: axis index must be 0 or 1", dir);
  Vec2 n{0.0, 0.0};
  n[dir] = 1.0;
  return flux_svm_normal(q, n, p);
}

SpdMatrix2 svm_a_equilibrium(const Matrix2& F) { return inv(gram(F)); }

SpdMatrix2 svm_a_relaxation_rate(const SpdMatrix2& A, const Matrix2& F, const SvmParams& p) {
  return (1.0 / p.lambda) * (svm_a_equilibrium(F) - A);
}

double svm_acc_relaxation_rate(double Acc, double H, const SvmParams& p) {
  return (1.0 / (H * H) - Acc) / p.lambda;
}

SvmVector source_svm(const SvmState& q, const SvmParams& p, const Vec2& grad_zb) {
  require_admissible(q);
  SvmVector s{};
  for (int i = 0; i < 2; ++i) s[1 + i] = -p.g * q.H * grad_zb[i] - p.k * q.HU[i];
  const SpdMatrix2 ra = q.H * svm_a_relaxation_rate(q.A(), q.F(), p);
  for (int k = 0; k < 3; ++k) s[7 + k] = ra.e[k];
  s[10] = q.H * svm_acc_relaxation_rate(q.Acc(), q.H, p);
  return s;
}

SvmState relax_exact_svm(const SvmState& q, double dt, const SvmParams& p) {
  if (!(dt >= 0.0)) throw DomainError("relax_exact_svm: dt must be >= 0", dt);
  const double w = std::exp(-dt / p.lambda);
  SvmState r = q;
  const SpdMatrix2 A = w * q.A() + (1.0 - w) * svm_a_equilibrium(q.F());
  r.HA = q.H * A;
  r.HAcc = q.H * (w * q.Acc() + (1.0 - w) / (q.H * q.H));
  return r;
}

Conformation conformation(const SvmState& q) {
  require_admissible(q);
  return {congruence(q.F(), q.A()), q.H * q.H * q.Acc()};
}

Stresses stresses(const SvmState& q, const SvmParams& p) {
  const Conformation c = conformation(q);
  return {p.G_eps * c.c_H, p.G_eps * c.c_zz};
}

double energy_svm(const SvmState& q, const SvmParams& p, EnergyConvention conv) {
  const Conformation c = conformation(q);
  const Vec2 U = q.U();
  const double ke = U[0] * U[0] + U[1] * U[1];
  double el;
  if (conv == EnergyConvention::conformation) {
    el = p.G_eps * (trace(c.c_H) + c.c_zz - std::log(c.c_zz * det(c.c_H)));
  } else {
    const double G = p.G_eps;
    el = G * trace(c.c_H) + G * c.c_zz - std::log(G * c.c_zz * G * G * det(c.c_H));
  }
  return 0.5 * q.H * (ke + p.g * q.H + el);
}

double energy_svm_material(const SvmState& q, const SvmParams& p, EnergyConvention conv) {
  const Conformation c = conformation(q);
  const Vec2 U = q.U();
  const double ke = U[0] * U[0] + U[1] * U[1];
  const double logA = std::log(q.Acc() * det(q.A()));
  double el;
  if (conv == EnergyConvention::conformation)
    el = p.G_eps * (trace(c.c_H) + c.c_zz - logA);
  else
    el = p.G_eps * (trace(c.c_H) + c.c_zz) - logA;
  return 0.5 * q.H * (ke + p.g * q.H + el);
}

double energy_tilde_svm(const SvmState& q, const SvmParams& p) {
  const Conformation c = conformation(q);
  const Vec2 U = q.U();
  const SpdMatrix2 Y = svm_a_to_y(q.A());
  return 0.5 * q.H *
         (U[0] * U[0] + U[1] * U[1] + p.g * q.H + p.G_eps * (trace(c.c_H) + c.c_zz) +
          trace_sq(Y));
}

double dissipation_svm(const SvmState& q, const SvmParams& p, EnergyConvention conv) {
  const Conformation c = conformation(q);
  if (conv == EnergyConvention::conformation) {
    const double s = trace(c.c_H) + trace(inv(c.c_H)) + c.c_zz + 1.0 / c.c_zz - 6.0;
    return p.G_eps / (2.0 * p.lambda) * s;
  }
  const SpdMatrix2 S = p.G_eps * c.c_H;
  const double Szz = p.G_eps * c.c_zz;
  const double s = trace(S) + trace(inv(S)) + Szz + 1.0 / Szz - 6.0;
  return s / (p.G_eps * p.lambda);
}

Vec2 energy_flux_svm(const SvmState& q, const SvmParams& p, EnergyConvention conv) {
  const Conformation c = conformation(q);
  const Vec2 U = q.U();
  const double E = energy_svm(q, p, conv);
  const double scale = conv == EnergyConvention::conformation ? p.G_eps : p.G_eps * p.G_eps;
  Vec2 f;
  for (int i = 0; i < 2; ++i) {
    double m = c.c_zz * U[i];
    for (int j = 0; j < 2; ++j) m -= c.c_H(i, j) * U[j];
    f[i] = U[i] * (E + 0.5 * p.g * q.H * q.H) + scale * q.H * m;
  }
  return f;
}

Stresses stress_from_conformation(const Conformation& c, const SvmParams& p,
                                  StressConvention conv) {
  if (conv == StressConvention::direct) return {p.G_eps * c.c_H, p.G_eps * c.c_zz};
  return {p.G_eps * (c.c_H - SpdMatrix2::identity()), p.G_eps * (c.c_zz - 1.0)};
}

Conformation conformation_from_stress(const Stresses& s, const SvmParams& p,
                                      StressConvention conv) {
  if (!(p.G_eps > 0.0))
    throw DomainError("conformation_from_stress: requires G_eps > 0", p.G_eps);
  const double ig = 1.0 / p.G_eps;
  if (conv == StressConvention::direct) return {ig * s.Sigma_H, ig * s.Sigma_zz};
  return {ig * s.Sigma_H + SpdMatrix2::identity(), ig * s.Sigma_zz + 1.0};
}

SpdMatrix2 momentum_stress_flux(double H, const Stresses& s, const SvmParams& p,
                                StressConvention conv) {
  const Conformation c = conformation_from_stress(s, p, conv);
  SpdMatrix2 m = (-p.G_eps * H) * c.c_H;
  const double iso = 0.5 * p.g * H * H + p.G_eps * H * c.c_zz;
  m(0, 0) += iso;
  m(1, 1) += iso;
  return m;
}

double constraint_residual(const SvmState& q, const SvmParams& p) {
  return std::abs(q.H * det(q.F()) - p.H_hat) / p.H_hat;
}

SpdMatrix2 svm_a_to_y(const SpdMatrix2& A) {
  if (!is_spd(A)) throw DomainError("svm_a_to_y: A is not SPD");
  return square(inv(A));
}

SpdMatrix2 svm_y_to_a(const SpdMatrix2& Y) { return spd_inv_sqrt(Y); }

double svm_acc_to_ycc(double Acc) {
  if (!(Acc > 0.0)) throw DomainError("svm_acc_to_ycc: A^cc must be positive", Acc);
  return std::sqrt(std::sqrt(Acc));
}

double svm_ycc_to_acc(double Ycc) {
  if (!(Ycc > 0.0)) throw DomainError("svm_ycc_to_acc: Y^cc must be positive", Ycc);
  const double y2 = Ycc * Ycc;
  return y2 * y2;
}

SpdMatrix2 svm_y_relaxation_rate(const SpdMatrix2& Y, const Matrix2& F, const SvmParams& p) {
  const Matrix2 A = to_full(svm_y_to_a(Y));
  const Matrix2 B = to_full(svm_a_equilibrium(F));
  const Matrix2 Yf = to_full(Y);
  const Matrix2 inner = B * A + A * B - 2.0 * (A * A);
  return (-1.0 / p.lambda) * sym_part(Yf * inner * Yf);
}

SpdMatrix2 svm_y_relaxation_rate_published(const SpdMatrix2& Y, const Matrix2& F,
                                           const SvmParams& p) {
  const Matrix2 A = to_full(svm_y_to_a(Y));
  const Matrix2 FFt = F * transpose(F);
  const Matrix2 Z = inv(A * FFt) + inv(FFt * A);
  const Matrix2 Yf = to_full(Y);
  return (-1.0 / p.lambda) * sym_part(Yf * (Z - Yf) * Yf);
}

double svm_ycc_relaxation_rate(double Ycc, double H, const SvmParams& p) {
  return (1.0 / (H * H * Ycc * Ycc * Ycc) - Ycc) / (4.0 * p.lambda);
}

std::array<double, 4> hessian_block(double H, double Acc, double g, double mu) {
  const double h11 = 2.0 * g * H * H * H + 6.0 * mu * H * H * H * H * Acc;
  const double h12 = -8.0 * mu * H * H * H * std::pow(Acc, 0.75);
  const double h22 = 12.0 * mu * H * H * std::sqrt(Acc);
  return {h11, h12, h12, h22};
}

std::array<double, 4> hessian_block_published(double H, double Acc, double g, double mu) {
  const double h11 = 2.0 * g * H * H * H + 6.0 * mu * H * H * H * H * Acc;
  const double h12 = -2.0 * mu * H * H * H * std::pow(Acc, 0.75);
  const double h22 = 2.0 * mu * H * H * std::sqrt(Acc);
  return {h11, h12, h12, h22};
}

std::vector<double> piola_residual(const std::vector<Matrix2>& hf, int nx, int ny, double dx,
                                   double dy, int gx, int gy) {
  std::vector<double> out;
  if (nx <= 2 * gx || ny <= 2 * gy) return out;
  out.reserve(static_cast<std::size_t>(nx - 2 * gx) * (ny - 2 * gy));
  auto at = [&](int i, int j) -> const Matrix2& { return hf[static_cast<std::size_t>(j) * nx + i]; };
  for (int j = gy; j < ny - gy; ++j)
    for (int i = gx; i < nx - gx; ++i) {
      double worst = 0.0;
      for (int a = 0; a < 2; ++a) {
        double d = 0.0;
        if (gx > 0) d += (at(i + 1, j)(0, a) - at(i - 1, j)(0, a)) / (2.0 * dx);
        if (gy > 0) d += (at(i, j + 1)(1, a) - at(i, j - 1)(1, a)) / (2.0 * dy);
        worst = std::max(worst, std::abs(d));
      }
      out.push_back(worst);
    }
  return out;
}

}  // namespace ucmlab
