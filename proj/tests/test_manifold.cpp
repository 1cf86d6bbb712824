#include <doctest.h>

#include "errors.hpp"
#include "manifold.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace dioph;

namespace {

Vec v1(double a) {
  Vec v(1);
  v[0] = a;
  return v;
}

Vec random_point(const Box& box, std::mt19937_64& rng) {
  Vec x(static_cast<Eigen::Index>(box.dim()));
  for (std::size_t i = 0; i < box.dim(); ++i) {
    std::uniform_real_distribution<double> u(box.lo[i], box.hi[i]);
    x[static_cast<Eigen::Index>(i)] = u(rng);
  }
  return x;
}

std::vector<ManifoldChart> builtin_charts() {
  return {veronese(2), veronese(3), veronese(5), circle(1.0), circle(2.5), mixed(2, 3), mixed(2, 4), mixed(3, 5)};
}

}  // namespace

TEST_CASE("evaluate returns (x, f(x)) with x copied exactly") {
  CHECK(veronese(2).evaluate(v1(0.0)).isApprox(Vec::Zero(2)));
  const Vec v = veronese(3).evaluate(v1(0.5));
  CHECK(v[0] == 0.5);
  CHECK(v[1] == 0.25);
  CHECK(v[2] == 0.125);
  const Vec c = circle(1.0).evaluate(v1(0.6));
  CHECK(c[0] == 0.6);
  CHECK(c[1] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK_THROWS_AS(veronese(2).evaluate(v1(1.5)), DomainError);
  CHECK_THROWS_AS(veronese(2).jacobian(v1(-0.1)), DomainError);
}

TEST_CASE("jacobian closed forms") {
  CHECK(veronese(2).jacobian(v1(0.0))(0, 0) == 0.0);
  const Mat J = veronese(3).jacobian(v1(1.0));
  REQUIRE(J.rows() == 2);
  REQUIRE(J.cols() == 1);
  CHECK(J(0, 0) == 2.0);
  CHECK(J(1, 0) == 3.0);
}

TEST_CASE("jacobian agrees with central differences at 100 points per chart") {
  std::mt19937_64 rng(11);
  for (const auto& chart : builtin_charts()) {
    const Box inner = chart.domain().shrunk(1e-5);
    for (int k = 0; k < 100; ++k) {
      const Vec x = random_point(inner, rng);
      const Mat fd = oracle::fd_jacobian([&](const Vec& y) { return chart.graph(y); }, x);
      const Mat J = chart.jacobian(x);
      for (Eigen::Index i = 0; i < J.rows(); ++i)
        for (Eigen::Index j = 0; j < J.cols(); ++j)
          CHECK(std::abs(J(i, j) - fd(i, j)) <= 1e-6 * std::max(1.0, std::abs(J(i, j))));
    }
  }
}

TEST_CASE("declared M bounds every sampled first and second partial") {
  std::mt19937_64 rng(12);
  for (const auto& chart : builtin_charts()) {
    CHECK(chart.deriv_bound() >= 1.0);
    for (int k = 0; k < 1000; ++k) {
      const Vec x = random_point(chart.domain(), rng);
      CHECK(chart.jacobian(x).cwiseAbs().maxCoeff() <= chart.deriv_bound() * (1 + 1e-12));
      for (const Mat& H : chart.hessians(x)) CHECK(H.cwiseAbs().maxCoeff() <= chart.deriv_bound() * (1 + 1e-12));
    }
  }
}

TEST_CASE("hessians agree with differenced jacobians") {
  std::mt19937_64 rng(13);
  for (const auto& chart : builtin_charts()) {
    const Box inner = chart.domain().shrunk(1e-4);
    const Vec x = random_point(inner, rng);
    const auto Hs = chart.hessians(x);
    for (std::size_t k = 0; k < chart.m(); ++k) {
      const Mat fd = oracle::fd_jacobian(
          [&](const Vec& y) -> Vec { return chart.jacobian(y).row(static_cast<Eigen::Index>(k)).transpose(); }, x);
      CHECK((Hs[k] - fd).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, Hs[k].cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("intercept h(x) = f(x) - J(x) x") {
  CHECK(veronese(2).intercept_h(v1(0.0))[0] == 0.0);
  CHECK(veronese(2).intercept_h(v1(1.0))[0] == -1.0);
  // Affine chart: f~(x) = 2 x1 - x2 + 0.7, (3 x1 + 0.1).
  const auto affine = polynomial_chart(2, {{{2.0, {1, 0}}, {-1.0, {0, 1}}, {0.7, {0, 0}}}, {{3.0, {1, 0}}, {0.1, {0, 0}}}},
                                       Box::cube(2, -1.0, 1.0));
  std::mt19937_64 rng(14);
  for (int k = 0; k < 50; ++k) {
    const Vec h = affine.intercept_h(random_point(affine.domain(), rng));
    CHECK(h[0] == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(h[1] == doctest::Approx(0.1).epsilon(1e-14));
  }
  const auto linear = polynomial_chart(1, {{{2.5, {1}}}}, Box::cube(1, 0.0, 1.0));
  CHECK(std::abs(linear.intercept_h(v1(0.3))[0]) <= 1e-15);
}

TEST_CASE("nondegeneracy order of curves") {
  CHECK(nondegeneracy_order(veronese(3), 0.3, 5).order == 3);
  const auto c = polynomial_curve({{0, 0, 0, 1}, {0, 0, 0, 0, 1}}, Box::cube(1, -1.0, 1.0));
  CHECK(nondegeneracy_order(c, 0.0, 6).order == 4);
  const auto line = polynomial_curve({{0, 2}}, Box::cube(1, 0.0, 1.0));
  const auto res = nondegeneracy_order(line, 0.5, 2);
  CHECK_FALSE(res.order.has_value());
  CHECK(res.l_max == 2);
  CHECK_THROWS_AS(nondegeneracy_order(mixed(2, 3), 0.5, 5), Unsupported);
  CHECK_THROWS_AS(nondegeneracy_order(veronese(3), 0.5, 2), InvalidArgument);
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 2; n <= 6; ++n)
    for (int k = 0; k < 20; ++k) CHECK(nondegeneracy_order(veronese(n), u(rng), n).order == n);
}

TEST_CASE("chart invariants and JSON specs") {
  for (const auto& chart : builtin_charts()) {
    CHECK(chart.m() == chart.n() - chart.d());
    CHECK(chart.d() >= 1);
    CHECK(chart.d() < chart.n());
  }
  CHECK(veronese(4).nondeg_order() == 4);
  const auto c = chart_from_json(nlohmann::json::parse(R"({"kind":"veronese","params":{"n":3},"domain":[[0.2,0.8]]})"));
  CHECK(c.n() == 3);
  CHECK(c.domain().lo[0] == 0.2);
  CHECK_THROWS_AS(chart_from_json(nlohmann::json::parse(R"({"kind":"torus"})")), InvalidArgument);
  // Declaring M below the sampled derivatives is rejected.
  CHECK_THROWS_AS(chart_from_json(nlohmann::json::parse(R"({"kind":"veronese","params":{"n":3},"M":1.5})")),
                  InvalidArgument);
  CHECK_THROWS_AS(Box({1.0}, {0.0}), InvalidArgument);
}

TEST_CASE("custom chart falls back to differenced jacobians") {
  const auto chart = custom_chart(
      1, 1, [](const Vec& x) { return Vec::Constant(1, std::sin(x[0])); }, std::nullopt, Box::cube(1, 0.0, 1.0), 1.0);
  for (double x : {0.1, 0.5, 0.9}) CHECK(chart.jacobian(v1(x))(0, 0) == doctest::Approx(std::cos(x)).epsilon(1e-8));
}
