#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ucmlab/linalg.hpp"
#include "ucmlab/systems.hpp"

using namespace ucmlab;

namespace {

Matrix3 sample3() {
  Matrix3 m;
  const double v[9] = {2.0, -1.0, 0.5, 0.3, 1.5, -0.2, 0.1, 0.4, 3.0};
  for (int k = 0; k < 9; ++k) m.a[k] = v[k];
  return m;
}

SpdMatrix3 spd3() {
  SpdMatrix3 s;
  s(0, 0) = 4.0;
  s(0, 1) = 1.0;
  s(0, 2) = 0.5;
  s(1, 1) = 3.0;
  s(1, 2) = -0.7;
  s(2, 2) = 2.0;
  return s;
}

template <int N>
double max_abs(const Matrix<N>& m) {
  double r = 0.0;
  for (double v : m.a) r = std::max(r, std::abs(v));
  return r;
}

}  // namespace

TEST(Linalg, PackedIndexIsSymmetric) {
  SpdMatrix3 s = spd3();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_EQ(s(i, j), s(j, i));
  s(2, 1) = 9.0;
  EXPECT_EQ(s(1, 2), 9.0);
}

TEST(Linalg, DeterminantAndInverse3) {
  const Matrix3 m = sample3();
  const Matrix3 id = m * inv(m) - Matrix3::identity();
  EXPECT_LT(max_abs(id), 1e-14);
  EXPECT_NEAR(det(m * m), det(m) * det(m), 1e-12 * std::abs(det(m * m)));
}

TEST(Linalg, CofactorIdentity) {
  const Matrix3 m = sample3();
  const Matrix3 r = m * transpose(cofactor(m)) - det(m) * Matrix3::identity();
  EXPECT_LT(max_abs(r), 1e-13);
  Matrix2 a;
  a(0, 0) = 1.0;
  a(0, 1) = 2.0;
  a(1, 0) = -3.0;
  a(1, 1) = 0.5;
  EXPECT_LT(max_abs(a * transpose(cofactor(a)) - det(a) * Matrix2::identity()), 1e-15);
}

TEST(Linalg, SingularInverseThrows) {
  Matrix2 z;
  EXPECT_THROW(inv(z), DomainError);
  Matrix3 r = Matrix3::identity();
  r(2, 2) = 0.0;
  EXPECT_THROW(inv(r), DomainError);
  SpdMatrix2 s;
  EXPECT_THROW(inv(s), DomainError);
}

TEST(Linalg, SymEigReconstructs) {
  const SpdMatrix3 s = spd3();
  const auto eg = sym_eig(s);
  EXPECT_LE(eg.values[0], eg.values[1]);
  EXPECT_LE(eg.values[1], eg.values[2]);
  const SpdMatrix3 back = spectral_map(eg, [](double l) { return l; });
  EXPECT_LT(frobenius(back - s), 1e-13);
  EXPECT_NEAR(eg.values[0] * eg.values[1] * eg.values[2], det(s), 1e-12);
}

TEST(Linalg, SymEigClosedForm2) {
  SpdMatrix2 s;
  s(0, 0) = 2.0;
  s(0, 1) = 1.0;
  s(1, 1) = 2.0;
  const auto eg = sym_eig(s);
  EXPECT_NEAR(eg.values[0], 1.0, 1e-15);
  EXPECT_NEAR(eg.values[1], 3.0, 1e-15);
}

TEST(Linalg, SymEigRepeatedAndDiagonal) {
  const auto eg = sym_eig(SpdMatrix3::identity());
  for (double v : eg.values) EXPECT_DOUBLE_EQ(v, 1.0);
  SpdMatrix2 d;
  d(0, 0) = 5.0;
  d(1, 1) = -1.0;
  const auto e2 = sym_eig(d);
  EXPECT_DOUBLE_EQ(e2.values[0], -1.0);
  EXPECT_DOUBLE_EQ(e2.values[1], 5.0);
}

TEST(Linalg, SpdTest) {
  EXPECT_TRUE(is_spd(spd3()));
  SpdMatrix2 s;
  s(0, 0) = 1.0;
  s(0, 1) = 2.0;
  s(1, 1) = 1.0;
  EXPECT_FALSE(is_spd(s));
  SpdMatrix3 n = spd3();
  n(0, 0) = std::nan("");
  EXPECT_FALSE(is_spd(n));
}

TEST(Linalg, InverseSquareRoot) {
  const SpdMatrix3 s = spd3();
  const SpdMatrix3 n = spd_inv_sqrt(s);
  const Matrix3 r = to_full(n) * to_full(n) * to_full(s) - Matrix3::identity();
  EXPECT_LT(max_abs(r), 1e-14);
  const SpdMatrix3 q = spd_sqrt(s);
  EXPECT_LT(frobenius(square(q) - s), 1e-13);
}

TEST(Linalg, InverseSquareRootRejectsIndefinite) {
  SpdMatrix2 s;
  s(0, 0) = 1.0;
  s(1, 1) = -1.0;
  EXPECT_THROW(spd_inv_sqrt(s), DomainError);
  SpdMatrix3 t = spd3();
  t(1, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(spd_inv_sqrt(t), DomainError);
}

TEST(Linalg, CongruenceAndGram) {
  const Matrix3 f = sample3();
  const SpdMatrix3 s = spd3();
  const Matrix3 full = f * to_full(s) * transpose(f);
  const SpdMatrix3 c = congruence(f, s);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(c(i, j), full(i, j), 1e-13);
  const SpdMatrix3 g = gram(f);
  const Matrix3 ftf = transpose(f) * f;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(g(i, j), ftf(i, j), 1e-13);
}

TEST(Linalg, LeviCivita) {
  EXPECT_EQ(levi_civita(0, 1, 2), 1);
  EXPECT_EQ(levi_civita(1, 0, 2), -1);
  EXPECT_EQ(levi_civita(2, 0, 1), 1);
  EXPECT_EQ(levi_civita(0, 0, 1), 0);
}

TEST(Linalg, RandomSpdRespectsRange) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 200; ++k) {
    const auto eg = sym_eig(random_spd3(rng, 0.1, 10.0));
    EXPECT_GE(eg.values[0], 0.1 * (1 - 1e-12));
    EXPECT_LE(eg.values[2], 10.0 * (1 + 1e-12));
  }
}

TEST(Linalg, TraceHelpers) {
  const SpdMatrix3 s = spd3();
  EXPECT_DOUBLE_EQ(trace(s), 9.0);
  EXPECT_NEAR(trace_sq(s), trace(to_full(s) * to_full(s)), 1e-13);
  EXPECT_NEAR(frobenius(s), std::sqrt(trace_sq(s)), 1e-15);
}
