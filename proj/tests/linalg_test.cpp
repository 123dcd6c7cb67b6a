#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "rankscope/linalg.hpp"

using namespace rankscope;

TEST(Svd, IdentityHasUnitSpectrum) {
  const auto s = svd(Matrix::Identity(3, 3)).s;
  ASSERT_EQ(s.values.size(), 3u);
  for (double v : s.values) EXPECT_NEAR(v, 1.0, 1e-14);
}

TEST(Svd, DiagonalAbsorbsSign) {
  Matrix m(2, 2);
  m << 3, 0, 0, -2;
  const auto s = svd(m).s;
  EXPECT_NEAR(s.values[0], 3.0, 1e-14);
  EXPECT_NEAR(s.values[1], 2.0, 1e-14);
}

TEST(Svd, RecoversPrescribedSpectrum) {
  std::mt19937_64 rng(1);
  const Matrix m = oracle::with_spectrum(5, 4, {4, 3, 2, 1}, rng);
  const auto s = svd(m).s;
  ASSERT_EQ(s.values.size(), 4u);
  EXPECT_NEAR(s.values[0], 4, 1e-9);
  EXPECT_NEAR(s.values[1], 3, 1e-9);
  EXPECT_NEAR(s.values[2], 2, 1e-9);
  EXPECT_NEAR(s.values[3], 1, 1e-9);
  EXPECT_NEAR(schatten_norm(m, 2.0 / 3.0),
              std::pow(4, 2.0 / 3) + std::pow(3, 2.0 / 3) + std::pow(2, 2.0 / 3) + 1.0, 1e-8);
}

TEST(Svd, ReconstructionAndOrthonormalityOnRandomShapes) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> dim(1, 64);
  for (int trial = 0; trial < 1000; ++trial) {
    const Matrix m = oracle::gaussian(dim(rng), dim(rng), rng);
    const auto r = svd(m);
    const double tol = 1e-10 * (1.0 + m.norm());
    Matrix d = Matrix::Zero(static_cast<Index>(r.s.values.size()), static_cast<Index>(r.s.values.size()));
    for (std::size_t i = 0; i < r.s.values.size(); ++i) d(static_cast<Index>(i), static_cast<Index>(i)) = r.s.values[i];
    ASSERT_LE((r.u * d * r.v.transpose() - m).norm(), tol);
    ASSERT_LE((r.u.transpose() * r.u - Matrix::Identity(r.u.cols(), r.u.cols())).norm(), tol);
    ASSERT_LE((r.v.transpose() * r.v - Matrix::Identity(r.v.cols(), r.v.cols())).norm(), tol);
    ASSERT_EQ(r.s.values.size(), static_cast<std::size_t>(std::min(m.rows(), m.cols())));
    ASSERT_TRUE(std::is_sorted(r.s.values.rbegin(), r.s.values.rend()));
  }
}

TEST(Svd, InvariantUnderOrthogonalFactors) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix m = oracle::gaussian(7, 5, rng);
    const Matrix q1 = oracle::gram_schmidt(oracle::gaussian(7, 7, rng));
    const Matrix q2 = oracle::gram_schmidt(oracle::gaussian(5, 5, rng));
    const auto a = singular_values(m), b = singular_values(q1 * m * q2);
    for (std::size_t i = 0; i < a.values.size(); ++i) ASSERT_NEAR(a.values[i], b.values[i], 1e-10);
  }
}

TEST(Svd, RejectsNonFiniteAndEmpty) {
  Matrix m = Matrix::Ones(2, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(svd(m), InvalidMatrix);
  m(0, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(singular_values(m), InvalidMatrix);
  EXPECT_THROW(svd(Matrix(0, 3)), InvalidMatrix);
}

TEST(Svd, VectorShapesHaveOneValue) {
  Matrix row(1, 3);
  row << 3, 0, 4;
  EXPECT_EQ(singular_values(row).values.size(), 1u);
  EXPECT_NEAR(singular_values(row).largest(), 5.0, 1e-15);
  EXPECT_NEAR(svd(row.transpose()).s.largest(), 5.0, 1e-14);
}

TEST(Schatten, Examples) {
  EXPECT_NEAR(schatten_norm(Matrix::Identity(3, 3), 2.0 / 13.0), 3.0, 1e-12);
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 4;
  EXPECT_NEAR(schatten_norm(d, 0.5), 2.0, 1e-12);
}

TEST(Schatten, TwoIsSquaredFrobenius) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix m = oracle::gaussian(1 + trial % 9, 1 + trial % 7, rng);
    ASSERT_NEAR(schatten_norm(m, 2.0), m.squaredNorm(), 1e-9 * m.squaredNorm());
  }
}

TEST(Schatten, RejectsNonPositiveExponent) {
  EXPECT_THROW(schatten_norm(Matrix::Identity(2, 2), 0.0), InvalidExponent);
  EXPECT_THROW(schatten_norm(Matrix::Identity(2, 2), -1.0), InvalidExponent);
}

TEST(NumericalRank, Examples) {
  SingularSpectrum s;
  s.values = {1, 1e-9, 1e-12};
  EXPECT_EQ(numerical_rank(s, 1e-3), 1u);
  s.values = {0, 0, 0};
  EXPECT_EQ(numerical_rank(s, 1e-3), 0u);
  // Threshold 1e-3 * 10 = 0.01 keeps only 10 and 5.
  s.values = {10, 5, 0.004, 1e-6};
  EXPECT_EQ(numerical_rank(s, 1e-3), 2u);
}

TEST(NumericalRank, MatchesConstructedRank) {
  std::mt19937_64 rng(5);
  EXPECT_EQ(numerical_rank(oracle::with_spectrum(8, 6, {5, 2, 1e-1}, rng)), 3u);
  EXPECT_EQ(numerical_rank(oracle::with_spectrum(8, 6, {5, 2, 1e-5}, rng)), 2u);
}

TEST(ExactSum, CancellationIsExact) {
  ExactSum s;
  s.add(1e16);
  s.add(1.0);
  s.add(-1e16);
  EXPECT_EQ(s.value(), 1.0);
}

TEST(ExactSum, OrderIndependent) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> xs;
  for (int i = 0; i < 2000; ++i) xs.push_back(n(rng) * std::pow(10.0, i % 17 - 8));
  ExactSum a, b;
  for (double x : xs) a.add_square(x);
  std::shuffle(xs.begin(), xs.end(), rng);
  for (double x : xs) b.add_square(x);
  EXPECT_EQ(a.value(), b.value());
}

TEST(ExactSum, SquaredNormAgreesWithEigen) {
  std::mt19937_64 rng(7);
  const Matrix m = oracle::gaussian(13, 11, rng);
  EXPECT_NEAR(squared_norm(m), m.squaredNorm(), 1e-12 * m.squaredNorm());
}
