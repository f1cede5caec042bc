#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace ucmlab {

// Raised when an input leaves the domain of an operation (non-SPD, singular,
// non-finite). `value` carries the offending scalar (min eigenvalue, det, ...).
class DomainError : public std::domain_error {
 public:
  DomainError(const std::string& what, double value = 0.0)
      : std::domain_error(what), value_(value) {}
  double value() const noexcept { return value_; }

 private:
  double value_;
};

template <int N>
using Vec = std::array<double, N>;
using Vec2 = Vec<2>;
using Vec3 = Vec<3>;

// Dense N x N, row-major. Rows are spatial indices, columns material ones.
template <int N>
struct Matrix {
  std::array<double, N * N> a{};

  double& operator()(int i, int j) { return a[i * N + j]; }
  double operator()(int i, int j) const { return a[i * N + j]; }

  static Matrix identity() {
    Matrix m;
    for (int i = 0; i < N; ++i) m(i, i) = 1.0;
    return m;
  }
};
using Matrix2 = Matrix<2>;
using Matrix3 = Matrix<3>;

// Symmetric N x N holding only the upper triangle, row by row:
// N=2: xx xy yy; N=3: xx xy xz yy yz zz.
template <int N>
struct SpdMatrix {
  static constexpr int kSize = N * (N + 1) / 2;
  std::array<double, kSize> e{};

  static constexpr int index(int i, int j) {
    if (i > j) { int t = i; i = j; j = t; }
    return i * N - i * (i - 1) / 2 + (j - i);
  }
  double& operator()(int i, int j) { return e[index(i, j)]; }
  double operator()(int i, int j) const { return e[index(i, j)]; }

  static SpdMatrix identity() {
    SpdMatrix m;
    for (int i = 0; i < N; ++i) m(i, i) = 1.0;
    return m;
  }
};
using SpdMatrix2 = SpdMatrix<2>;
using SpdMatrix3 = SpdMatrix<3>;

template <int N>
struct SymEig {
  Vec<N> values;      // ascending
  Matrix<N> vectors;  // column k is the eigenvector of values[k]
};

// ---- elementwise / structural helpers -----------------------------------

template <int N>
Matrix<N> to_full(const SpdMatrix<N>& s) {
  Matrix<N> m;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) m(i, j) = s(i, j);
  return m;
}

// Symmetric part of a dense matrix.
template <int N>
SpdMatrix<N> sym_part(const Matrix<N>& m) {
  SpdMatrix<N> s;
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
  return s;
}

template <int N>
Matrix<N> transpose(const Matrix<N>& m) {
  Matrix<N> t;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) t(i, j) = m(j, i);
  return t;
}

template <int N>
Matrix<N> operator*(const Matrix<N>& x, const Matrix<N>& y) {
  Matrix<N> r;
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < N; ++k) {
      const double xik = x(i, k);
      for (int j = 0; j < N; ++j) r(i, j) += xik * y(k, j);
    }
  return r;
}

template <int N>
Vec<N> operator*(const Matrix<N>& m, const Vec<N>& v) {
  Vec<N> r{};
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) r[i] += m(i, j) * v[j];
  return r;
}

template <int N>
Matrix<N> operator+(Matrix<N> x, const Matrix<N>& y) {
  for (int k = 0; k < N * N; ++k) x.a[k] += y.a[k];
  return x;
}

template <int N>
Matrix<N> operator-(Matrix<N> x, const Matrix<N>& y) {
  for (int k = 0; k < N * N; ++k) x.a[k] -= y.a[k];
  return x;
}

template <int N>
Matrix<N> operator*(double s, Matrix<N> x) {
  for (double& v : x.a) v *= s;
  return x;
}

template <int N>
SpdMatrix<N> operator+(SpdMatrix<N> x, const SpdMatrix<N>& y) {
  for (int k = 0; k < SpdMatrix<N>::kSize; ++k) x.e[k] += y.e[k];
  return x;
}

template <int N>
SpdMatrix<N> operator-(SpdMatrix<N> x, const SpdMatrix<N>& y) {
  for (int k = 0; k < SpdMatrix<N>::kSize; ++k) x.e[k] -= y.e[k];
  return x;
}

template <int N>
SpdMatrix<N> operator*(double s, SpdMatrix<N> x) {
  for (double& v : x.e) v *= s;
  return x;
}

template <int N>
double trace(const Matrix<N>& m) {
  double t = 0.0;
  for (int i = 0; i < N; ++i) t += m(i, i);
  return t;
}

template <int N>
double trace(const SpdMatrix<N>& s) {
  double t = 0.0;
  for (int i = 0; i < N; ++i) t += s(i, i);
  return t;
}

// tr(S S) = sum_ij S_ij^2.
template <int N>
double trace_sq(const SpdMatrix<N>& s) {
  double t = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) t += s(i, j) * s(i, j);
  return t;
}

template <int N>
double frobenius(const Matrix<N>& m) {
  double t = 0.0;
  for (double v : m.a) t += v * v;
  return std::sqrt(t);
}

template <int N>
double frobenius(const SpdMatrix<N>& s) {
  return std::sqrt(trace_sq(s));
}

template <int N>
bool all_finite(const SpdMatrix<N>& s) {
  for (double v : s.e)
    if (!std::isfinite(v)) return false;
  return true;
}

template <int N>
bool all_finite(const Matrix<N>& m) {
  for (double v : m.a)
    if (!std::isfinite(v)) return false;
  return true;
}

// Products that stay symmetric.
template <int N>
SpdMatrix<N> congruence(const Matrix<N>& f, const SpdMatrix<N>& s) {  // F S F^T
  Matrix<N> fs = f * to_full(s);
  SpdMatrix<N> r;
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) {
      double v = 0.0;
      for (int k = 0; k < N; ++k) v += fs(i, k) * f(j, k);
      r(i, j) = v;
    }
  return r;
}

template <int N>
SpdMatrix<N> gram(const Matrix<N>& f) {  // F^T F
  SpdMatrix<N> r;
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) {
      double v = 0.0;
      for (int k = 0; k < N; ++k) v += f(k, i) * f(k, j);
      r(i, j) = v;
    }
  return r;
}

template <int N>
SpdMatrix<N> square(const SpdMatrix<N>& s) {
  return sym_part(to_full(s) * to_full(s));
}

// ---- determinants, inverses, cofactors ----------------------------------

double det(const Matrix2& m);
double det(const Matrix3& m);
double det(const SpdMatrix2& s);
double det(const SpdMatrix3& s);

// Cofactor matrix: M cof(M)^T = det(M) I.
Matrix2 cofactor(const Matrix2& m);
Matrix3 cofactor(const Matrix3& m);

Matrix2 inv(const Matrix2& m);
Matrix3 inv(const Matrix3& m);
SpdMatrix2 inv(const SpdMatrix2& s);
SpdMatrix3 inv(const SpdMatrix3& s);

// Levi-Civita symbol on {0,1,2}.
constexpr int levi_civita(int i, int j, int k) {
  return (i - j) * (j - k) * (k - i) / 2;
}

// ---- symmetric eigenproblems --------------------------------------------

constexpr double kJacobiTol = 1e-14;
constexpr double kSpdThreshold = 1e-13;

SymEig<2> sym_eig(const SpdMatrix2& s);
SymEig<3> sym_eig(const SpdMatrix3& s);

// min eigenvalue > kSpdThreshold * max(1, max eigenvalue)
bool is_spd(const SpdMatrix2& s);
bool is_spd(const SpdMatrix3& s);

// N with N N M = I. Throws DomainError if M is not SPD.
SpdMatrix2 spd_inv_sqrt(const SpdMatrix2& s);
SpdMatrix3 spd_inv_sqrt(const SpdMatrix3& s);

SpdMatrix2 spd_sqrt(const SpdMatrix2& s);
SpdMatrix3 spd_sqrt(const SpdMatrix3& s);

// Reassemble V diag(f(lambda)) V^T.
template <int N, class Fn>
SpdMatrix<N> spectral_map(const SymEig<N>& eg, Fn fn) {
  SpdMatrix<N> r;
  Vec<N> fl;
  for (int k = 0; k < N; ++k) fl[k] = fn(eg.values[k]);
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j) {
      double v = 0.0;
      for (int k = 0; k < N; ++k) v += eg.vectors(i, k) * fl[k] * eg.vectors(j, k);
      r(i, j) = v;
    }
  return r;
}

}  // namespace ucmlab
