#include <doctest.h>

#include "errors.hpp"
#include "flow.hpp"
#include "lattice.hpp"

#include <cmath>
#include <random>

using namespace dioph;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

double max_abs(const Mat& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("translation matrix U") {
  CHECK(matrix_U(Vec::Zero(3)).isIdentity(0.0));
  const Mat U = matrix_U(vec({1.5, -2.0}));
  CHECK(U(0, 2) == -2.0);
  CHECK(U(1, 2) == 1.5);
  CHECK(U(2, 2) == 1.0);
  Vec e = Vec::Zero(4);
  e[3] = 1.0;
  const Vec col = matrix_U(vec({1, 2, 3})) * e;
  CHECK(col[0] == 3);
  CHECK(col[1] == 2);
  CHECK(col[2] == 1);
  CHECK(col[3] == 1);
}

TEST_CASE("shear matrix Z") {
  CHECK(matrix_Z(Mat::Zero(2, 1)).isIdentity(0.0));
  Mat th(1, 1);
  th(0, 0) = 0.7;
  const Mat Z = matrix_Z(th);
  Mat expect = Mat::Identity(3, 3);
  expect(0, 1) = 0.7;
  CHECK(Z == expect);
  Mat row(1, 2);
  row << 1, 2;
  CHECK(sup_operator_norm(matrix_Z(row)) == 4.0);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int k = 0; k < 20; ++k) {
    Mat t(2, 3);
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = u(rng);
    double expected = 1.0;
    for (Eigen::Index i = 0; i < 2; ++i) expected = std::max(expected, 1.0 + t.row(i).cwiseAbs().sum());
    CHECK(sup_operator_norm(matrix_Z(t)) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(matrix_Z(t).determinant() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("diagonal flows: closed values and unit determinants") {
  const auto p = FlowParams::make(0.5, std::log(8.0), {2, 1});
  CHECK(p.phi == doctest::Approx(std::cbrt(2.0)).epsilon(1e-14));
  const auto df = diagonal_flows(p);
  CHECK(df.g(0, 0) == doctest::Approx(std::pow(2.0, 4.0 / 3.0)).epsilon(1e-14));
  CHECK(df.g(1, 1) == doctest::Approx(std::pow(2.0, 4.0 / 3.0)).epsilon(1e-14));
  CHECK(df.g(2, 2) == doctest::Approx(std::pow(2.0, -8.0 / 3.0)).epsilon(1e-14));
  CHECK(df.g_dual(0, 0) == doctest::Approx(8.0 / p.phi).epsilon(1e-14));
  CHECK(df.g_dual(1, 1) == doctest::Approx(0.5 / p.phi).epsilon(1e-14));
  CHECK(df.g_dual(2, 2) == doctest::Approx(0.5 / p.phi).epsilon(1e-14));

  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> ue(0.01, 0.99), ut(0.01, 20.0);
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 2 + static_cast<std::size_t>(k % 5);
    const std::size_t d = 1 + static_cast<std::size_t>(k % (n - 1));
    const auto q = FlowParams::make(ue(rng), ut(rng), {n, d});
    const double phi = std::pow(std::pow(q.eps, static_cast<double>(n)) * std::exp(q.t), 1.0 / static_cast<double>(n + 1));
    CHECK(q.phi == doctest::Approx(phi).epsilon(1e-12));
    const auto f = diagonal_flows(q);
    CHECK(std::abs(f.g.determinant() - 1.0) <= 1e-12);
    CHECK(std::abs(f.b.determinant() - 1.0) <= 1e-12);
    CHECK(max_rel_error(dual_element(f.g), f.g_dual) <= 1e-12);
    CHECK(max_rel_error(dual_element(f.b), f.b_dual) <= 1e-12);
    CHECK(max_rel_error(b_inverse(q) * f.b, Mat::Identity(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(n + 1))) <= 1e-12);
  }
  CHECK_THROWS_AS(FlowParams::make(1.0, 1.0, {2, 1}), InvalidArgument);
  CHECK_THROWS_AS(FlowParams::make(0.5, 0.0, {2, 1}), InvalidArgument);
}

TEST_CASE("conjugation identities on fixed and random samples") {
  const auto p = FlowParams::make(0.5, std::log(4.0), {2, 1});
  const auto df = diagonal_flows(p);
  const Mat gU = df.g * matrix_U(vec({1, 1})) * df.g.inverse();
  CHECK(max_rel_error(gU, matrix_U(vec({8, 8}))) <= 1e-14);
  const Mat bU = df.b * matrix_U(vec({1}), 2) * b_inverse(p);
  CHECK(max_rel_error(bU, matrix_U(vec({0.5}), 2)) <= 1e-14);

  for (const Dims dims : {Dims{2, 1}, Dims{3, 1}, Dims{3, 2}, Dims{5, 2}}) {
    const auto q = FlowParams::make(0.3, 4.2, dims);
    const auto rep = check_conjugations(q, random_conjugation_samples(dims, 200, 33));
    CHECK(rep.samples == 200);
    CHECK(rep.pass());
    CHECK(rep.g_z_error <= 1e-15);
  }
}

TEST_CASE("zu product and closed forms agree") {
  CHECK(zu_product(veronese(2), vec({0.0})).isIdentity(0.0));
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& chart : {veronese(2), veronese(4), mixed(2, 3), circle(1.0)}) {
    const auto params = FlowParams::make(0.4, 3.0, Dims::of(chart));
    for (int k = 0; k < 50; ++k) {
      Vec x(static_cast<Eigen::Index>(chart.d()));
      for (std::size_t i = 0; i < chart.d(); ++i)
        x[static_cast<Eigen::Index>(i)] = chart.domain().lo[i] + u(rng) * chart.domain().side(i);
      const Mat zp = zu_product(chart, x);
      CHECK(max_abs(zp - zu_closed_form(chart, x)) <= 1e-12);
      CHECK(max_rel_error(dual_element(zp), zu_dual_closed_form(chart, x)) <= 1e-12);
      CHECK(zp.determinant() == doctest::Approx(1.0).epsilon(1e-12));
      // Block upper triangular with unit diagonal.
      CHECK(zp.diagonal().isOnes(0.0));
      CHECK(zp.triangularView<Eigen::StrictlyLower>().toDenseMatrix().isZero(0.0));
      const FrameAt f = assemble_zu(chart, x, params);
      const Vec ft = chart.graph(x);
      const std::size_t d = chart.d();
      CHECK(f.zu_dual(0, 0) == 1.0);
      for (std::size_t i = 0; i < d; ++i) CHECK(f.zu_dual(0, static_cast<Eigen::Index>(1 + i)) == -x[static_cast<Eigen::Index>(i)]);
      for (std::size_t k2 = 0; k2 < chart.m(); ++k2)
        CHECK(f.zu_dual(0, static_cast<Eigen::Index>(1 + d + k2)) == doctest::Approx(-ft[static_cast<Eigen::Index>(k2)]));
      const Mat flowed = flowed_basis(chart, params, x);
      CHECK(max_rel_error(flowed, f.b * f.g * f.zu) <= 1e-12);
      CHECK(max_rel_error(flowed_dual_basis(chart, params, x), dual_element(flowed)) <= 1e-9);
    }
  }
}

TEST_CASE("embedding of rational points") {
  const Vec v = embed_rational({1, 2, 3}, 5);
  CHECK(v[0] == -3);
  CHECK(v[1] == -2);
  CHECK(v[2] == -1);
  CHECK(v[3] == 5);
  CHECK(c1_constant(veronese(2)) == doctest::Approx(std::sqrt(3.0) * 2 * veronese(2).deriv_bound()));
}

TEST_CASE("local expansion residuals") {
  const auto zero = local_expansion_residual(veronese(2), vec({0.5}), vec({0.0}));
  CHECK(zero.theta_ratio == 0.0);
  CHECK(zero.y_ratio == 0.0);
  const auto lin = polynomial_chart(1, {{{2.0, {1}}, {0.3, {0}}}}, Box::cube(1, 0.0, 1.0));
  const auto r = local_expansion_residual(lin, vec({0.2}), vec({0.3}));
  CHECK(r.theta_hat.cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(r.y_hat.cwiseAbs().maxCoeff() <= 1e-14);
  double prev_y = 1.0;
  for (double s = 0.2; s > 1e-4; s /= 2) {
    const auto e = local_expansion_residual(veronese(2), vec({0.5}), vec({s}));
    // The quadratic term is exact for the parabola, so equality is attained.
    CHECK(e.y_ratio <= e.bound * (1 + 1e-12));
    CHECK(e.theta_ratio <= e.bound * (1 + 1e-12));
    CHECK(e.y_hat.norm() <= prev_y / 3.0);
    prev_y = e.y_hat.norm();
  }
  CHECK_THROWS_AS(local_expansion_residual(veronese(2), vec({0.9}), vec({0.2})), DomainError);
}
