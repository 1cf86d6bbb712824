#include "flow.hpp"

#include "errors.hpp"
#include "lattice.hpp"

#include <cmath>
#include <random>

namespace dioph {

FlowParams FlowParams::make(double eps, double t, Dims dims) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("flow: eps must lie in (0, 1)");
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("flow: t must be positive");
  if (dims.d < 1 || dims.n <= dims.d) throw InvalidArgument("flow: need 1 <= d < n");
  FlowParams p;
  p.eps = eps;
  p.t = t;
  p.dims = dims;
  const double n = static_cast<double>(dims.n);
  p.phi = std::exp((n * std::log(eps) + t) / (n + 1.0));
  p.h = static_cast<double>(dims.d) * t / (2.0 * (n + 1.0));
  return p;
}

Mat matrix_U(const Vec& y) {
  const Eigen::Index n = y.size();
  Mat u = Mat::Identity(n + 1, n + 1);
  for (Eigen::Index i = 0; i < n; ++i) u(i, n) = y[n - 1 - i];
  return u;
}

Mat matrix_U(const Vec& y, std::size_t n) {
  if (static_cast<std::size_t>(y.size()) > n) throw InvalidArgument("matrix_U: vector longer than n");
  Vec padded = Vec::Zero(n);
  padded.head(y.size()) = y;
  return matrix_U(padded);
}

Mat matrix_Z(const Mat& theta) {
  const Eigen::Index m = theta.rows(), d = theta.cols();
  const Eigen::Index n = m + d;
  Mat z = Mat::Identity(n + 1, n + 1);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < d; ++j) z(i, m + j) = theta(m - 1 - i, d - 1 - j);
  return z;
}

DiagonalFlows diagonal_flows(const FlowParams& p) {
  const std::size_t n = p.dims.n, d = p.dims.d, m = p.dims.m();
  const double nn = static_cast<double>(n);
  const double mid = std::exp(-(static_cast<double>(m) + 1.0) * p.t / (2.0 * (nn + 1.0)));
  const double eh = std::exp(p.h);
  DiagonalFlows f;
  Vec g(n + 1), b(n + 1), gd(n + 1), bd(n + 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = p.phi / p.eps;
  g[n] = p.phi * std::exp(-p.t);
  for (std::size_t i = 0; i < m; ++i) b[i] = eh;
  for (std::size_t i = 0; i < d; ++i) b[m + i] = mid;
  b[n] = eh;
  gd[0] = std::exp(p.t) / p.phi;
  for (std::size_t i = 1; i <= n; ++i) gd[i] = p.eps / p.phi;
  bd[0] = 1.0 / eh;
  for (std::size_t i = 0; i < d; ++i) bd[1 + i] = 1.0 / mid;
  for (std::size_t i = 0; i < m; ++i) bd[1 + d + i] = 1.0 / eh;
  f.g = g.asDiagonal();
  f.b = b.asDiagonal();
  f.g_dual = gd.asDiagonal();
  f.b_dual = bd.asDiagonal();
  return f;
}

Mat b_inverse(const FlowParams& p) {
  const Mat b = diagonal_flows(p).b;
  return b.diagonal().cwiseInverse().asDiagonal();
}

Mat zu_product(const ManifoldChart& chart, const Vec& x) {
  return matrix_Z(-chart.jacobian(x)) * matrix_U(chart.evaluate(x));
}

Mat zu_closed_form(const ManifoldChart& chart, const Vec& x) {
  const std::size_t n = chart.n(), d = chart.d(), m = chart.m();
  const Mat J = chart.jacobian(x);
  const Vec h = chart.intercept_h(x);
  Mat zu = Mat::Identity(n + 1, n + 1);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < d; ++j) zu(i, m + j) = -J(m - 1 - i, d - 1 - j);
    zu(i, n) = h[m - 1 - i];
  }
  for (std::size_t j = 0; j < d; ++j) zu(m + j, n) = x[d - 1 - j];
  return zu;
}

Mat zu_dual_closed_form(const ManifoldChart& chart, const Vec& x) {
  const std::size_t n = chart.n(), d = chart.d(), m = chart.m();
  const Mat J = chart.jacobian(x);
  const Vec f = chart.graph(x);
  Mat zs = Mat::Identity(n + 1, n + 1);
  for (std::size_t j = 0; j < d; ++j) zs(0, 1 + j) = -x[j];
  for (std::size_t k = 0; k < m; ++k) zs(0, 1 + d + k) = -f[k];
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t k = 0; k < m; ++k) zs(1 + j, 1 + d + k) = J(k, j);
  return zs;
}

FrameAt assemble_zu(const ManifoldChart& chart, const Vec& x, const FlowParams& params) {
  FrameAt fr;
  fr.x = x;
  fr.zu = zu_product(chart, x);
  fr.zu_dual = zu_dual_closed_form(chart, x);
  const DiagonalFlows df = diagonal_flows(params);
  fr.g = df.g;
  fr.b = df.b;
  fr.g_dual = df.g_dual;
  fr.b_dual = df.b_dual;
  return fr;
}

Mat flowed_basis(const ManifoldChart& chart, const FlowParams& params, const Vec& x) {
  const DiagonalFlows df = diagonal_flows(params);
  return df.b * df.g * zu_product(chart, x);
}

Mat flowed_dual_basis(const ManifoldChart& chart, const FlowParams& params, const Vec& x) {
  const DiagonalFlows df = diagonal_flows(params);
  return df.b_dual * df.g_dual * zu_dual_closed_form(chart, x);
}

Vec embed_rational(const std::vector<long long>& p, long long q) {
  const std::size_t n = p.size();
  Vec v(n + 1);
  for (std::size_t i = 0; i < n; ++i) v[i] = -static_cast<double>(p[n - 1 - i]);
  v[n] = static_cast<double>(q);
  return v;
}

double c1_constant(const ManifoldChart& chart) {
  return std::sqrt(static_cast<double>(chart.n() + 1)) * static_cast<double>(chart.d() + 1) *
         chart.deriv_bound();
}

std::vector<ConjugationSample> random_conjugation_samples(Dims dims, std::size_t count, std::uint64_t seed,
                                                          double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<ConjugationSample> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    ConjugationSample c;
    c.y = Vec(dims.n);
    for (auto& v : c.y) v = u(rng);
    c.x = Vec(dims.d);
    for (auto& v : c.x) v = u(rng);
    c.theta = Mat(dims.m(), dims.d);
    for (Eigen::Index i = 0; i < c.theta.size(); ++i) c.theta.data()[i] = u(rng);
    out.push_back(std::move(c));
  }
  return out;
}

double ConjugationReport::max_error() const {
  return std::max(std::max(g_u_error, g_z_error), std::max(b_u_error, b_z_error));
}

ConjugationReport check_conjugations(const FlowParams& params, const std::vector<ConjugationSample>& samples) {
  const DiagonalFlows df = diagonal_flows(params);
  const Mat g_inv = df.g.diagonal().cwiseInverse().asDiagonal();
  const Mat b_inv = b_inverse(params);
  const std::size_t n = params.dims.n;
  const double gu_scale = std::exp(params.t) / params.eps;
  ConjugationReport r;
  r.samples = samples.size();
  for (const auto& s : samples) {
    r.g_u_error = std::max(r.g_u_error, max_rel_error(df.g * matrix_U(s.y) * g_inv, matrix_U(gu_scale * s.y)));
    const Mat z = matrix_Z(s.theta);
    r.g_z_error = std::max(r.g_z_error, max_rel_error(df.g * z * g_inv, z));
    r.b_u_error = std::max(r.b_u_error, max_rel_error(df.b * matrix_U(s.x, n) * b_inv,
                                                      matrix_U(std::exp(-params.t / 2.0) * s.x, n)));
    r.b_z_error = std::max(r.b_z_error,
                           max_rel_error(df.b * z * b_inv, matrix_Z(std::exp(params.t / 2.0) * s.theta)));
  }
  return r;
}

ExpansionResidual local_expansion_residual(const ManifoldChart& chart, const Vec& x, const Vec& dx) {
  const std::size_t n = chart.n(), d = chart.d(), m = chart.m();
  if (static_cast<std::size_t>(dx.size()) != d) throw InvalidArgument("expansion: step dimension must be d");
  const Vec x2 = x + dx;
  // The domain is a box, so both endpoints inside means the segment is.
  if (!chart.domain().contains(x, 1e-12) || !chart.domain().contains(x2, 1e-12))
    throw DomainError("expansion: segment [x, x + x'] leaves the chart domain");
  const Mat zu1 = zu_product(chart, x);
  const Mat zu2 = zu_product(chart, x2);
  // zu(x+x') zu(x)^{-1} U(x')^{-1} = Z(Theta^) U(y^); U(v)^{-1} = U(-v).
  const Mat M = zu2 * zu1.inverse() * matrix_U(-dx, n);
  ExpansionResidual r;
  r.theta_hat = Mat(m, d);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < d; ++j) r.theta_hat(m - 1 - i, d - 1 - j) = M(i, m + j);
  const Mat z = matrix_Z(r.theta_hat);
  const Vec col = z.topLeftCorner(n, n).inverse() * M.col(n).head(n);
  r.y_hat = col.reverse();
  const double s = dx.norm();
  r.theta_ratio = s > 0.0 ? r.theta_hat.norm() / s : 0.0;
  r.y_ratio = s > 0.0 ? r.y_hat.norm() / (s * s) : 0.0;
  r.bound = static_cast<double>(d * d * m) * chart.deriv_bound();
  return r;
}

nlohmann::ordered_json to_json(const ConjugationReport& r) {
  nlohmann::ordered_json j;
  j["samples"] = r.samples;
  j["g_U_error"] = r.g_u_error;
  j["g_Z_error"] = r.g_z_error;
  j["b_U_error"] = r.b_u_error;
  j["b_Z_error"] = r.b_z_error;
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass();
  return j;
}

}  // namespace dioph
