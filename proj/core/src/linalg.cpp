#include "ucmlab/linalg.hpp"

#include <algorithm>
#include <limits>
#include <utility>

namespace ucmlab {

namespace {

void require_finite(const SpdMatrix2& s, const char* op) {
  if (!all_finite(s)) throw DomainError(std::string(op) + ": non-finite entry");
}
void require_finite(const SpdMatrix3& s, const char* op) {
  if (!all_finite(s)) throw DomainError(std::string(op) + ": non-finite entry");
}

template <int N>
void require_spd(const SymEig<N>& eg, const char* op) {
  const double lmax = eg.values[N - 1];
  const double lmin = eg.values[0];
  if (!(lmin > kSpdThreshold * std::max(1.0, lmax)))
    throw DomainError(std::string(op) + ": matrix is not positive definite (min eigenvalue " +
                          std::to_string(lmin) + ")",
                      lmin);
}

}  // namespace

double det(const Matrix2& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

double det(const Matrix3& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
         m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

double det(const SpdMatrix2& s) { return s(0, 0) * s(1, 1) - s(0, 1) * s(0, 1); }
double det(const SpdMatrix3& s) { return det(to_full(s)); }

Matrix2 cofactor(const Matrix2& m) {
  Matrix2 c;
  c(0, 0) = m(1, 1);
  c(0, 1) = -m(1, 0);
  c(1, 0) = -m(0, 1);
  c(1, 1) = m(0, 0);
  return c;
}

Matrix3 cofactor(const Matrix3& m) {
  Matrix3 c;
  for (int i = 0; i < 3; ++i) {
    const int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
    for (int j = 0; j < 3; ++j) {
      const int j1 = (j + 1) % 3, j2 = (j + 2) % 3;
      c(i, j) = m(i1, j1) * m(i2, j2) - m(i1, j2) * m(i2, j1);
    }
  }
  return c;
}

Matrix2 inv(const Matrix2& m) {
  const double d = det(m);
  if (d == 0.0 || !std::isfinite(d)) throw DomainError("inv: singular 2x2 matrix", d);
  return (1.0 / d) * transpose(cofactor(m));
}

Matrix3 inv(const Matrix3& m) {
  const double d = det(m);
  if (d == 0.0 || !std::isfinite(d)) throw DomainError("inv: singular 3x3 matrix", d);
  return (1.0 / d) * transpose(cofactor(m));
}

SpdMatrix2 inv(const SpdMatrix2& s) {
  const double d = det(s);
  if (d == 0.0 || !std::isfinite(d)) throw DomainError("inv: singular symmetric matrix", d);
  SpdMatrix2 r;
  r(0, 0) = s(1, 1) / d;
  r(0, 1) = -s(0, 1) / d;
  r(1, 1) = s(0, 0) / d;
  return r;
}

SpdMatrix3 inv(const SpdMatrix3& s) { return sym_part(inv(to_full(s))); }

SymEig<2> sym_eig(const SpdMatrix2& s) {
  require_finite(s, "sym_eig");
  const double a = s(0, 0), b = s(0, 1), d = s(1, 1);
  SymEig<2> r;
  const double half_tr = 0.5 * (a + d);
  const double half_diff = 0.5 * (a - d);
  const double disc = std::hypot(half_diff, b);
  // Larger-magnitude root first, smaller one via the product to avoid cancellation.
  double l0, l1;
  if (half_tr >= 0.0) {
    l1 = half_tr + disc;
    l0 = (l1 != 0.0) ? (a * d - b * b) / l1 : half_tr - disc;
  } else {
    l0 = half_tr - disc;
    l1 = (a * d - b * b) / l0;
  }
  if (l0 > l1) std::swap(l0, l1);
  r.values = {l0, l1};
  if (b == 0.0) {
    if (a <= d) {
      r.vectors = Matrix2::identity();
    } else {
      r.vectors(0, 0) = 0.0; r.vectors(1, 0) = 1.0;
      r.vectors(0, 1) = 1.0; r.vectors(1, 1) = 0.0;
    }
    return r;
  }
  // Eigenvector of l1 is (b, l1 - a) or (l1 - d, b); pick the better conditioned one.
  double vx, vy;
  if (std::abs(l1 - a) > std::abs(l1 - d)) {
    vx = b; vy = l1 - a;
  } else {
    vx = l1 - d; vy = b;
  }
  const double nrm = std::hypot(vx, vy);
  vx /= nrm; vy /= nrm;
  r.vectors(0, 1) = vx; r.vectors(1, 1) = vy;
  r.vectors(0, 0) = -vy; r.vectors(1, 0) = vx;
  return r;
}

SymEig<3> sym_eig(const SpdMatrix3& s) {
  require_finite(s, "sym_eig");
  Matrix3 a = to_full(s);
  Matrix3 v = Matrix3::identity();
  const double scale = frobenius(a);
  constexpr int kMaxSweeps = 60;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    const double off = std::sqrt(2.0 * (a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2)));
    if (off == 0.0) break;
    // One polishing sweep after reaching the tolerance brings the off-diagonal
    // part to round-off (quadratic convergence).
    const bool polish = off <= kJacobiTol * scale;
    for (int p = 0; p < 2; ++p)
      for (int q = p + 1; q < 3; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p), aqq = a(q, q);
        if (std::abs(app) + std::abs(apq) * 1e3 == std::abs(app) &&
            std::abs(aqq) + std::abs(apq) * 1e3 == std::abs(aqq)) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (int k = 0; k < 3; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (int k = 0; k < 3; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    if (polish) break;
  }
  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) < a(y, y); });
  SymEig<3> r;
  for (int k = 0; k < 3; ++k) {
    r.values[k] = a(order[k], order[k]);
    for (int i = 0; i < 3; ++i) r.vectors(i, k) = v(i, order[k]);
  }
  return r;
}

bool is_spd(const SpdMatrix2& s) {
  if (!all_finite(s)) return false;
  const auto eg = sym_eig(s);
  return eg.values[0] > kSpdThreshold * std::max(1.0, eg.values[1]);
}

bool is_spd(const SpdMatrix3& s) {
  if (!all_finite(s)) return false;
  const auto eg = sym_eig(s);
  return eg.values[0] > kSpdThreshold * std::max(1.0, eg.values[2]);
}

SpdMatrix2 spd_sqrt(const SpdMatrix2& s) {
  const auto eg = sym_eig(s);
  require_spd(eg, "spd_sqrt");
  // sqrt(M) = (M + sqrt(det) I) / sqrt(tr M + 2 sqrt(det))
  const double rd = std::sqrt(eg.values[0] * eg.values[1]);
  const double denom = std::sqrt(trace(s) + 2.0 * rd);
  SpdMatrix2 r = s;
  r(0, 0) += rd;
  r(1, 1) += rd;
  return (1.0 / denom) * r;
}

SpdMatrix3 spd_sqrt(const SpdMatrix3& s) {
  const auto eg = sym_eig(s);
  require_spd(eg, "spd_sqrt");
  return spectral_map(eg, [](double l) { return std::sqrt(l); });
}

SpdMatrix2 spd_inv_sqrt(const SpdMatrix2& s) {
  const SpdMatrix2 r = spd_sqrt(s);
  return inv(r);
}

SpdMatrix3 spd_inv_sqrt(const SpdMatrix3& s) {
  const auto eg = sym_eig(s);
  require_spd(eg, "spd_inv_sqrt");
  return spectral_map(eg, [](double l) { return 1.0 / std::sqrt(l); });
}

}  // namespace ucmlab
