#include "ucmlab/systems.hpp"

#include <cmath>

namespace ucmlab {

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

Matrix2 random_rotation2(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  const double t = u(rng);
  Matrix2 r;
  r(0, 0) = std::cos(t);
  r(0, 1) = -std::sin(t);
  r(1, 0) = std::sin(t);
  r(1, 1) = std::cos(t);
  return r;
}

Matrix3 random_rotation3(std::mt19937_64& rng) {
  // Uniform unit quaternion.
  std::normal_distribution<double> nd(0.0, 1.0);
  double w, x, y, z, n;
  do {
    w = nd(rng);
    x = nd(rng);
    y = nd(rng);
    z = nd(rng);
    n = std::sqrt(w * w + x * x + y * y + z * z);
  } while (n < 1e-8);
  w /= n;
  x /= n;
  y /= n;
  z /= n;
  Matrix3 r;
  r(0, 0) = 1 - 2 * (y * y + z * z);
  r(0, 1) = 2 * (x * y - z * w);
  r(0, 2) = 2 * (x * z + y * w);
  r(1, 0) = 2 * (x * y + z * w);
  r(1, 1) = 1 - 2 * (x * x + z * z);
  r(1, 2) = 2 * (y * z - x * w);
  r(2, 0) = 2 * (x * z - y * w);
  r(2, 1) = 2 * (y * z + x * w);
  r(2, 2) = 1 - 2 * (x * x + y * y);
  return r;
}

namespace {

template <int N>
SpdMatrix<N> rotate_diag(const Matrix<N>& r, const Vec<N>& d) {
  SymEig<N> eg;
  eg.values = d;
  eg.vectors = r;
  return spectral_map(eg, [](double v) { return v; });
}

template <int N>
Matrix<N> scale_columns(Matrix<N> m, const Vec<N>& s) {
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) m(i, j) *= s[j];
  return m;
}

}  // namespace

SpdMatrix2 random_spd2(std::mt19937_64& rng, double lo, double hi) {
  const Matrix2 r = random_rotation2(rng);
  return rotate_diag<2>(r, {log_uniform(rng, lo, hi), log_uniform(rng, lo, hi)});
}

SpdMatrix3 random_spd3(std::mt19937_64& rng, double lo, double hi) {
  const Matrix3 r = random_rotation3(rng);
  return rotate_diag<3>(
      r, {log_uniform(rng, lo, hi), log_uniform(rng, lo, hi), log_uniform(rng, lo, hi)});
}

Matrix2 random_deformation2(std::mt19937_64& rng, double lo, double hi) {
  const Matrix2 u = random_rotation2(rng);
  const Matrix2 v = random_rotation2(rng);
  const Vec2 s{log_uniform(rng, lo, hi), log_uniform(rng, lo, hi)};
  return scale_columns<2>(u, s) * transpose(v);
}

Matrix3 random_deformation3(std::mt19937_64& rng, double lo, double hi) {
  const Matrix3 u = random_rotation3(rng);
  const Matrix3 v = random_rotation3(rng);
  const Vec3 s{log_uniform(rng, lo, hi), log_uniform(rng, lo, hi), log_uniform(rng, lo, hi)};
  return scale_columns<3>(u, s) * transpose(v);
}

SvmState sample_svm_state(std::mt19937_64& rng, const SvmParams& p) {
  const double H = log_uniform(rng, 0.1, 10.0);
  const double c = std::sqrt(p.g * H);
  std::uniform_real_distribution<double> uu(-2.0 * c, 2.0 * c);
  const Vec2 U{uu(rng), uu(rng)};
  const Matrix2 F = random_deformation2(rng, 0.1, 10.0);
  const SpdMatrix2 Y = random_spd2(rng, 1e-2, 1e2);
  const double Ycc = log_uniform(rng, 1e-2, 1e2);
  return SvmState::from_primitive(H, U, F, svm_y_to_a(Y), svm_ycc_to_acc(Ycc));
}

Ucm3dState sample_ucm_state(std::mt19937_64& rng, const UcmParams& p) {
  const double rho = log_uniform(rng, 0.1, 10.0);
  double c = std::sqrt(p.gamma * p.C0 * std::pow(rho, p.gamma - 1.0));
  if (!(c > 0.0)) c = 1.0;
  std::uniform_real_distribution<double> uu(-2.0 * c, 2.0 * c);
  const Vec3 u{uu(rng), uu(rng), uu(rng)};
  const Matrix3 F = random_deformation3(rng, 0.1, 10.0);
  const SpdMatrix3 Y = random_spd3(rng, 1e-2, 1e2);
  return Ucm3dState::from_primitive(rho, u, F, y_to_a(Y));
}

namespace {

StateVec to_eigen(const double* v, int n) { return Eigen::Map<const StateVec>(v, n); }

template <int N>
double max_abs_entry(const Matrix<N>& m) {
  double r = 0.0;
  for (double v : m.a) r = std::max(r, std::abs(v));
  return r;
}

// Frame columns for the symmetric block of `scale * Y`: scale * upper(Y^1/2 E_k Y^1/2).
template <int N>
void spd_frame_block(DenseMat& T, int offset, const SpdMatrix<N>& Y, double scale) {
  const Matrix<N> r = to_full(spd_sqrt(Y));
  int k = 0;
  for (int a = 0; a < N; ++a)
    for (int b = a; b < N; ++b, ++k) {
      Matrix<N> E;
      E(a, b) = 1.0;
      E(b, a) = 1.0;
      const Matrix<N> M = r * E * r;
      for (int i = 0; i < N; ++i)
        for (int j = i; j < N; ++j)
          T(offset + SpdMatrix<N>::index(i, j), offset + k) = scale * M(i, j);
    }
}

// Frame columns for scale * F: scale * F e_a e_b^T, i.e. relative material-side perturbations.
template <int N>
void deformation_frame_block(DenseMat& T, int offset, const Matrix<N>& F, double scale) {
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b)
      for (int i = 0; i < N; ++i) T(offset + i * N + b, offset + a * N + b) = scale * F(i, a);
}

}  // namespace

SystemInterface svm_y_system(const SvmParams& p) {
  p.validate();
  SystemInterface s;
  s.name = "svm2d";
  s.n = kSvmDim;
  s.space_dim = 2;
  s.admissible = [](const StateVec& q) {
    if (!q.allFinite() || !(q[0] > 0.0) || !(q[10] > 0.0)) return false;
    SpdMatrix2 Y;
    for (int k = 0; k < 3; ++k) Y.e[k] = q[7 + k] / q[0];
    return is_spd(Y);
  };
  s.entropy = [p](const StateVec& q) { return energy_tilde_svm(unpack_svm_y(q.data()), p); };
  s.entropy_terms = {
      [](const StateVec& q) { return 0.5 * (q[1] * q[1] + q[2] * q[2]) / q[0]; },
      [p](const StateVec& q) { return 0.5 * p.g * q[0] * q[0]; },
      [p](const StateVec& q) {
        const double H = q[0];
        Matrix2 F;
        for (int k = 0; k < 4; ++k) F.a[k] = q[3 + k] / H;
        SpdMatrix2 Y;
        for (int k = 0; k < 3; ++k) Y.e[k] = q[7 + k] / H;
        return 0.5 * p.G_eps * H * trace(congruence(F, svm_y_to_a(Y)));
      },
      [p](const StateVec& q) {
        const double H = q[0];
        return 0.5 * p.G_eps * H * H * H * svm_ycc_to_acc(q[10] / H);
      },
      [](const StateVec& q) {
        SpdMatrix2 Y;
        for (int k = 0; k < 3; ++k) Y.e[k] = q[7 + k] / q[0];
        return 0.5 * q[0] * trace_sq(Y);
      }};
  s.flux = [p](const StateVec& q, const Vec3& dir) {
    const SvmState st = unpack_svm_y(q.data());
    const Vec2 n{dir[0], dir[1]};
    SvmVector f = flux_svm_normal(st, n, p);
    const double un = (st.HU[0] * n[0] + st.HU[1] * n[1]) / st.H;
    for (int k = 7; k < kSvmDim; ++k) f[k] = un * q[k];
    return to_eigen(f.data(), kSvmDim);
  };
  s.sampler = [p](std::mt19937_64& rng) {
    const SvmVector v = pack_y(sample_svm_state(rng, p));
    return to_eigen(v.data(), kSvmDim);
  };
  s.involution = [](const StateVec&, const Vec3& dir) {
    DenseMat L = DenseMat::Zero(2, kSvmDim);
    for (int a = 0; a < 2; ++a)
      for (int j = 0; j < 2; ++j) L(a, 3 + 2 * j + a) = dir[j];
    return L;
  };
  s.frame = [p](const StateVec& q) {
    const double H = q[0];
    const Vec2 U{q[1] / H, q[2] / H};
    DenseMat T = DenseMat::Zero(kSvmDim, kSvmDim);
    T(0, 0) = H;
    const double us = H * std::max({std::abs(U[0]), std::abs(U[1]), std::sqrt(p.g * H)});
    T(1, 1) = T(2, 2) = us;
    Matrix2 F;
    for (int k = 0; k < 4; ++k) F.a[k] = q[3 + k] / H;
    deformation_frame_block<2>(T, 3, F, H);
    SpdMatrix2 Y;
    for (int k = 0; k < 3; ++k) Y.e[k] = q[7 + k] / H;
    spd_frame_block<2>(T, 7, Y, H);
    T(10, 10) = q[10];
    return T;
  };
  return s;
}

SystemInterface ucm_y_system(const UcmParams& p, EntropyForm form) {
  p.validate();
  SystemInterface s;
  s.name = form == EntropyForm::published ? "ucm3d_published" : "ucm3d";
  s.n = kUcmDim;
  s.space_dim = 3;
  s.admissible = [](const StateVec& q) {
    if (!q.allFinite() || !(q[0] > 0.0)) return false;
    SpdMatrix3 Y;
    for (int k = 0; k < 6; ++k) Y.e[k] = q[13 + k] / q[0];
    return is_spd(Y);
  };
  s.entropy = [p, form](const StateVec& q) {
    return entropy_tilde_3d(unpack_ucm_y(q.data()), p, form);
  };
  s.entropy_terms = {
      [](const StateVec& q) { return 0.5 * (q[1] * q[1] + q[2] * q[2] + q[3] * q[3]) / q[0]; },
      [p](const StateVec& q) { return q[0] * internal_energy(q[0], p); },
      [p](const StateVec& q) {
        const double rho = q[0];
        Matrix3 F;
        for (int k = 0; k < 9; ++k) F.a[k] = q[4 + k] / rho;
        SpdMatrix3 Y;
        for (int k = 0; k < 6; ++k) Y.e[k] = q[13 + k] / rho;
        return p.K_H_prime * rho * trace(congruence(F, y_to_a(Y)));
      },
      [](const StateVec& q) {
        SpdMatrix3 Y;
        for (int k = 0; k < 6; ++k) Y.e[k] = q[13 + k] / q[0];
        return q[0] * trace_sq(Y);
      }};
  if (form == EntropyForm::pressure_compatible)
    s.entropy_terms.push_back([p](const StateVec& q) {
      return 2.0 * p.kB_theta * q[0] * std::log(q[0] / p.rho_hat);
    });
  s.flux = [p](const StateVec& q, const Vec3& dir) {
    const Ucm3dState st = unpack_ucm_y(q.data());
    UcmVector f = flux_3d_normal(st, dir, p);
    const double un = (st.mom[0] * dir[0] + st.mom[1] * dir[1] + st.mom[2] * dir[2]) / st.rho;
    for (int k = 13; k < kUcmDim; ++k) f[k] = un * q[k];
    return to_eigen(f.data(), kUcmDim);
  };
  s.sampler = [p](std::mt19937_64& rng) {
    const UcmVector v = pack_y(sample_ucm_state(rng, p));
    return to_eigen(v.data(), kUcmDim);
  };
  s.involution = [](const StateVec&, const Vec3& dir) {
    DenseMat L = DenseMat::Zero(3, kUcmDim);
    for (int a = 0; a < 3; ++a)
      for (int j = 0; j < 3; ++j) L(a, 4 + 3 * j + a) = dir[j];
    return L;
  };
  s.frame = [p](const StateVec& q) {
    const double rho = q[0];
    DenseMat T = DenseMat::Zero(kUcmDim, kUcmDim);
    T(0, 0) = rho;
    double us = std::sqrt(p.gamma * p.C0 * std::pow(rho, p.gamma - 1.0) + 2.0 * p.kB_theta);
    for (int i = 0; i < 3; ++i) us = std::max(us, std::abs(q[1 + i] / rho));
    for (int i = 1; i < 4; ++i) T(i, i) = rho * us;
    Matrix3 F;
    for (int k = 0; k < 9; ++k) F.a[k] = q[4 + k] / rho;
    deformation_frame_block<3>(T, 4, F, rho);
    SpdMatrix3 Y;
    for (int k = 0; k < 6; ++k) Y.e[k] = q[13 + k] / rho;
    spd_frame_block<3>(T, 13, Y, rho);
    return T;
  };
  return s;
}

SystemInterface burgers_system() {
  SystemInterface s;
  s.name = "burgers";
  s.n = 1;
  s.space_dim = 1;
  s.admissible = [](const StateVec& q) { return q.allFinite(); };
  s.entropy = [](const StateVec& q) { return 0.5 * q[0] * q[0]; };
  s.flux = [](const StateVec& q, const Vec3& dir) {
    StateVec f(1);
    f[0] = dir[0] * 0.5 * q[0] * q[0];
    return f;
  };
  s.sampler = [](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    StateVec q(1);
    q[0] = u(rng);
    return q;
  };
  return s;
}

SystemInterface shallow_water_1d_system(double g) {
  SystemInterface s;
  s.name = "shallow_water_1d";
  s.n = 2;
  s.space_dim = 1;
  s.admissible = [](const StateVec& q) { return q.allFinite() && q[0] > 0.0; };
  s.entropy = [g](const StateVec& q) { return 0.5 * q[1] * q[1] / q[0] + 0.5 * g * q[0] * q[0]; };
  s.flux = [g](const StateVec& q, const Vec3& dir) {
    StateVec f(2);
    f[0] = dir[0] * q[1];
    f[1] = dir[0] * (q[1] * q[1] / q[0] + 0.5 * g * q[0] * q[0]);
    return f;
  };
  s.sampler = [g](std::mt19937_64& rng) {
    const double H = log_uniform(rng, 0.1, 10.0);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    StateVec q(2);
    q[0] = H;
    q[1] = H * u(rng) * std::sqrt(g * H);
    return q;
  };
  return s;
}

SystemInterface transport_system(int n, double u) {
  SystemInterface s;
  s.name = "transport";
  s.n = n;
  s.space_dim = 1;
  s.admissible = [](const StateVec& q) { return q.allFinite(); };
  s.entropy = [](const StateVec& q) { return 0.5 * q.squaredNorm(); };
  s.flux = [u](const StateVec& q, const Vec3& dir) -> StateVec { return (dir[0] * u) * q; };
  s.sampler = [n](std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    StateVec q(n);
    for (int k = 0; k < n; ++k) q[k] = nd(rng);
    return q;
  };
  return s;
}

SystemInterface pressureless_gas_system() {
  SystemInterface s;
  s.name = "pressureless_gas";
  s.n = 2;
  s.space_dim = 1;
  s.admissible = [](const StateVec& q) { return q.allFinite() && q[0] > 0.0; };
  s.entropy = [](const StateVec& q) { return 0.5 * q[1] * q[1] / q[0] + q[0] * std::log(q[0]); };
  s.flux = [](const StateVec& q, const Vec3& dir) {
    StateVec f(2);
    f[0] = dir[0] * q[1];
    f[1] = dir[0] * q[1] * q[1] / q[0];
    return f;
  };
  s.sampler = [](std::mt19937_64& rng) {
    StateVec q(2);
    q[0] = log_uniform(rng, 1e-3, 1e-1);  // near vacuum
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    q[1] = q[0] * u(rng);
    return q;
  };
  return s;
}

}  // namespace ucmlab
