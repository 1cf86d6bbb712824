#include <doctest.h>

#include "errors.hpp"
#include "lattice.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace dioph;

namespace {

Mat diag2(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

bool is_integer_matrix(const Mat& m, double tol) {
  return (m - m.array().round().matrix()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

TEST_CASE("successive minima of diagonal lattices") {
  const auto id = successive_minima(LatticeBasis(Mat::Identity(2, 2)));
  CHECK(id.certified);
  CHECK(id.values[0] == doctest::Approx(1.0));
  CHECK(id.values[1] == doctest::Approx(1.0));
  const auto dg = successive_minima(LatticeBasis(diag2(2.0, 0.5)));
  CHECK(dg.values[0] == doctest::Approx(0.5));
  CHECK(dg.values[1] == doctest::Approx(2.0));
}

TEST_CASE("successive minima match the coefficient-box scan") {
  std::mt19937_64 rng(21);
  int compared = 0;
  for (std::size_t k : {3u, 4u}) {
    for (int trial = 0; trial < 25; ++trial) {
      const Mat B = oracle::random_unit_det(k, rng);
      const auto brute = oracle::brute_minima(B, k == 3 ? 20 : 12);
      if (!brute.box_sufficient) continue;
      const auto rep = successive_minima(LatticeBasis(B));
      REQUIRE(rep.values.size() == k);
      for (std::size_t i = 0; i < k; ++i) CHECK(rep.values[i] == doctest::Approx(brute.values[i]).epsilon(1e-9));
      ++compared;
    }
  }
  CHECK(compared >= 40);
}

TEST_CASE("minima witnesses are sorted, attain the values and are independent") {
  std::mt19937_64 rng(22);
  for (std::size_t k = 2; k <= 6; ++k) {
    const Mat B = random_unimodular(k, rng);
    const auto rep = successive_minima(LatticeBasis(B));
    Mat W(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) {
      if (i > 0) CHECK(rep.values[i - 1] <= rep.values[i]);
      CHECK(rep.witnesses[i].norm() == doctest::Approx(rep.values[i]).epsilon(1e-9));
      const Vec recon = B * rep.coefficients[i].cast<double>();
      CHECK((recon - rep.witnesses[i]).norm() <= 1e-9 * std::max(1.0, rep.values[i]));
      W.col(static_cast<Eigen::Index>(i)) = rep.witnesses[i];
    }
    CHECK(std::abs(W.determinant()) > 1e-9);
  }
}

TEST_CASE("conjugating by the reversal permutation keeps the minima") {
  std::mt19937_64 rng(23);
  for (std::size_t k = 2; k <= 5; ++k) {
    const Mat B = random_unimodular(k, rng);
    const Mat s = reverse_involution(k);
    const auto a = successive_minima(LatticeBasis(B));
    const auto b = successive_minima(LatticeBasis(s.inverse() * B * s));
    for (std::size_t i = 0; i < k; ++i) CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-9));
  }
}

TEST_CASE("polar basis pairs integrally and is an involution up to basis change") {
  CHECK(polar_basis(LatticeBasis(Mat::Identity(3, 3))).cols().isApprox(Mat::Identity(3, 3)));
  CHECK(polar_basis(LatticeBasis(diag2(2.0, 0.5))).cols().isApprox(diag2(0.5, 2.0)));
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 2 + static_cast<std::size_t>(trial % 5);
    const Mat B = random_unimodular(k, rng);
    const Mat P = polar_basis(LatticeBasis(B)).cols();
    CHECK(is_integer_matrix(P.transpose() * B, 1e-9));
    const Mat PP = polar_basis(LatticeBasis(P)).cols();
    const Mat change = B.inverse() * PP;
    CHECK(is_integer_matrix(change, 1e-9));
    CHECK(std::abs(std::abs(change.determinant()) - 1.0) <= 1e-9);
  }
}

TEST_CASE("reversal involution") {
  Vec v(3);
  v << 1, 2, 3;
  const Vec r = reverse_involution(3) * v;
  CHECK(r[0] == 3);
  CHECK(r[1] == 2);
  CHECK(r[2] == 1);
  CHECK(reverse_involution(1)(0, 0) == 1.0);
  for (std::size_t k = 1; k <= 8; ++k) {
    const Mat s = reverse_involution(k);
    CHECK((s * s - Mat::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k))).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("dual element is multiplicative") {
  CHECK(dual_element(Mat::Identity(4, 4)).isApprox(Mat::Identity(4, 4)));
  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + static_cast<std::size_t>(trial % 4);
    const Mat a = random_unimodular(k, rng);
    const Mat b = random_unimodular(k, rng);
    CHECK(max_rel_error(dual_element(a * b), dual_element(a) * dual_element(b)) <= 1e-10);
  }
  CHECK_THROWS_AS(dual_element(Mat::Zero(3, 3)), InvalidArgument);
}

TEST_CASE("Mahler products lie in [1, (k!)^2]") {
  const auto id = mahler_gap(LatticeBasis(Mat::Identity(2, 2)));
  CHECK(id[0] == doctest::Approx(1.0));
  CHECK(id[1] == doctest::Approx(1.0));
  const auto dg = mahler_gap(LatticeBasis(diag2(2.0, 0.5)));
  CHECK(dg[0] == doctest::Approx(1.0));
  CHECK(dg[1] == doctest::Approx(1.0));
  CHECK(mahler_constant(3) == 36.0);
  CHECK(mahler_constant(4) == 576.0);
  std::mt19937_64 rng(26);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = trial % 2 ? 3 : 4;
    for (double p : mahler_gap(LatticeBasis(random_unimodular(k, rng)))) {
      CHECK(p >= 1.0 - 1e-9);
      CHECK(p <= mahler_constant(k) + 1e-9);
    }
  }
}

TEST_CASE("LLL output is an integral change of basis with bounded defect") {
  std::mt19937_64 rng(27);
  for (std::size_t k = 2; k <= 8; ++k) {
    const Mat B = random_unimodular(k, rng, 1e4);
    const auto red = lll_reduce(B);
    CHECK((B * red.transform.cast<double>() - red.reduced).cwiseAbs().maxCoeff() <= 1e-9 * B.cwiseAbs().maxCoeff());
    CHECK(std::abs(std::abs(static_cast<double>(red.transform.cast<double>().determinant())) - 1.0) <= 1e-9);
    CHECK(orthogonality_defect(red.reduced) <= std::pow(2.0, static_cast<double>(k * k)));
  }
}

TEST_CASE("basis validation") {
  CHECK_THROWS_AS(LatticeBasis(diag2(2.0, 2.0)), InvalidArgument);
  CHECK_THROWS_AS(LatticeBasis::any_covolume(Mat::Zero(2, 2)), InvalidArgument);
  CHECK_NOTHROW(LatticeBasis::any_covolume(diag2(2.0, 2.0)));
  Mat huge = Mat::Identity(9, 9);
  CHECK_THROWS(successive_minima(LatticeBasis(huge)));
  EnumerationBudget tiny;
  tiny.max_nodes = 1;
  std::mt19937_64 rng(28);
  CHECK_THROWS_AS(successive_minima(LatticeBasis(random_unimodular(6, rng)), tiny), BudgetExceeded);
}
