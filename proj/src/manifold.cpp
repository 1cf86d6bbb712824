#include "manifold.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dioph {

// -- Box ---------------------------------------------------------------------

Box::Box(std::vector<double> lo_, std::vector<double> hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (lo.size() != hi.size() || lo.empty()) throw InvalidArgument("box: lo/hi size mismatch");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || !(lo[i] <= hi[i]))
      throw InvalidArgument("box: need finite lo <= hi on every axis");
  }
}

Box Box::cube(std::size_t d, double lo, double hi) {
  return Box(std::vector<double>(d, lo), std::vector<double>(d, hi));
}

double Box::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < dim(); ++i) v *= side(i);
  return v;
}

double Box::min_side() const {
  double s = side(0);
  for (std::size_t i = 1; i < dim(); ++i) s = std::min(s, side(i));
  return s;
}

Vec Box::center() const {
  Vec c(dim());
  for (std::size_t i = 0; i < dim(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
  return c;
}

bool Box::contains(const Vec& x, double slack) const {
  if (static_cast<std::size_t>(x.size()) != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (!(x[i] >= lo[i] - slack && x[i] <= hi[i] + slack)) return false;
  }
  return true;
}

bool Box::contains(const Box& other, double slack) const {
  if (other.dim() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (other.lo[i] < lo[i] - slack || other.hi[i] > hi[i] + slack) return false;
  }
  return true;
}

bool Box::intersects(const Box& other) const {
  for (std::size_t i = 0; i < dim(); ++i) {
    if (other.hi[i] < lo[i] || other.lo[i] > hi[i]) return false;
  }
  return true;
}

Box Box::shrunk(double margin) const {
  Box b = *this;
  for (std::size_t i = 0; i < dim(); ++i) {
    b.lo[i] += margin;
    b.hi[i] -= margin;
    if (b.lo[i] > b.hi[i]) throw InvalidArgument("box: margin exceeds half side");
  }
  return b;
}

// -- ChartModel ----------------------------------------------------------------

std::optional<std::vector<Vec>> ChartModel::curve_derivatives(double, int) const {
  return std::nullopt;
}

namespace {

double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

// e (e-1) ... (e-k+1)
double falling(int e, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= static_cast<double>(e - i);
  return r;
}

class PolynomialModel final : public ChartModel {
 public:
  PolynomialModel(std::size_t d, std::vector<PolyComponent> comps) : d_(d), comps_(std::move(comps)) {
    if (comps_.empty()) throw InvalidArgument("polynomial chart needs at least one graph component");
    for (const auto& c : comps_) {
      for (const auto& t : c) {
        if (t.exps.size() != d_) throw InvalidArgument("monomial exponent count must equal d");
        for (int e : t.exps)
          if (e < 0) throw InvalidArgument("negative exponent in polynomial chart");
      }
    }
  }

  std::size_t domain_dim() const override { return d_; }
  std::size_t codim() const override { return comps_.size(); }

  Vec value(const Vec& x) const override {
    Vec out(comps_.size());
    for (std::size_t k = 0; k < comps_.size(); ++k) {
      double s = 0.0;
      for (const auto& t : comps_[k]) {
        double p = t.coef;
        for (std::size_t i = 0; i < d_; ++i) p *= ipow(x[i], t.exps[i]);
        s += p;
      }
      out[k] = s;
    }
    return out;
  }

  Mat jacobian(const Vec& x) const override {
    Mat J = Mat::Zero(comps_.size(), d_);
    for (std::size_t k = 0; k < comps_.size(); ++k) {
      for (const auto& t : comps_[k]) {
        for (std::size_t j = 0; j < d_; ++j) {
          if (t.exps[j] == 0) continue;
          double p = t.coef * t.exps[j];
          for (std::size_t i = 0; i < d_; ++i) p *= ipow(x[i], t.exps[i] - (i == j ? 1 : 0));
          J(k, j) += p;
        }
      }
    }
    return J;
  }

  std::vector<Mat> hessians(const Vec& x) const override {
    std::vector<Mat> H(comps_.size(), Mat::Zero(d_, d_));
    for (std::size_t k = 0; k < comps_.size(); ++k) {
      for (const auto& t : comps_[k]) {
        for (std::size_t a = 0; a < d_; ++a) {
          for (std::size_t b = 0; b < d_; ++b) {
            std::vector<int> e = t.exps;
            double p = t.coef;
            p *= e[a];
            e[a] -= 1;
            if (p == 0.0) continue;
            p *= e[b];
            e[b] -= 1;
            if (p == 0.0) continue;
            for (std::size_t i = 0; i < d_; ++i) p *= ipow(x[i], e[i]);
            H[k](a, b) += p;
          }
        }
      }
    }
    return H;
  }

  std::optional<std::vector<Vec>> curve_derivatives(double x, int order) const override {
    if (d_ != 1) return std::nullopt;
    std::vector<Vec> out(order + 1, Vec::Zero(comps_.size()));
    for (int k = 0; k <= order; ++k) {
      for (std::size_t c = 0; c < comps_.size(); ++c) {
        double s = 0.0;
        for (const auto& t : comps_[c]) {
          const int e = t.exps[0];
          if (e < k) continue;
          s += t.coef * falling(e, k) * ipow(x, e - k);
        }
        out[k][c] = s;
      }
    }
    return out;
  }

  nlohmann::ordered_json describe() const override {
    nlohmann::ordered_json comps = nlohmann::ordered_json::array();
    for (const auto& c : comps_) {
      nlohmann::ordered_json terms = nlohmann::ordered_json::array();
      for (const auto& t : c) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        row.push_back(t.coef);
        for (int e : t.exps) row.push_back(e);
        terms.push_back(row);
      }
      comps.push_back(terms);
    }
    return {{"d", d_}, {"terms", comps}};
  }

  const std::vector<PolyComponent>& components() const { return comps_; }

 private:
  std::size_t d_;
  std::vector<PolyComponent> comps_;
};

class CircleModel final : public ChartModel {
 public:
  explicit CircleModel(double r) : r_(r) {
    if (!(r > 0.0)) throw InvalidArgument("circle: r must be positive");
  }
  std::size_t domain_dim() const override { return 1; }
  std::size_t codim() const override { return 1; }

  Vec value(const Vec& x) const override {
    Vec v(1);
    v[0] = std::sqrt(r_ - x[0] * x[0]);
    return v;
  }
  Mat jacobian(const Vec& x) const override {
    Mat J(1, 1);
    J(0, 0) = -x[0] / std::sqrt(r_ - x[0] * x[0]);
    return J;
  }
  std::vector<Mat> hessians(const Vec& x) const override {
    const double y = std::sqrt(r_ - x[0] * x[0]);
    Mat H(1, 1);
    H(0, 0) = -r_ / (y * y * y);
    return {H};
  }

  // Taylor coefficients of sqrt(u(x+s)), u(x+s) = (r - x^2) - 2x s - s^2,
  // via y_k = (u_k - sum_{j=1}^{k-1} y_j y_{k-j}) / (2 y_0).
  std::optional<std::vector<Vec>> curve_derivatives(double x, int order) const override {
    std::vector<double> u(order + 1, 0.0), y(order + 1, 0.0);
    u[0] = r_ - x * x;
    if (order >= 1) u[1] = -2.0 * x;
    if (order >= 2) u[2] = -1.0;
    if (!(u[0] > 0.0)) return std::nullopt;
    y[0] = std::sqrt(u[0]);
    for (int k = 1; k <= order; ++k) {
      double s = u[k];
      for (int j = 1; j < k; ++j) s -= y[j] * y[k - j];
      y[k] = s / (2.0 * y[0]);
    }
    std::vector<Vec> out(order + 1, Vec(1));
    double fact = 1.0;
    for (int k = 0; k <= order; ++k) {
      if (k > 0) fact *= k;
      out[k][0] = y[k] * fact;
    }
    return out;
  }

  nlohmann::ordered_json describe() const override { return {{"r", r_}}; }

 private:
  double r_;
};

class FunctionModel final : public ChartModel {
 public:
  FunctionModel(std::size_t d, std::size_t m, ValueFn f, std::optional<JacobianFn> jac)
      : d_(d), m_(m), f_(std::move(f)), jac_(std::move(jac)) {}
  std::size_t domain_dim() const override { return d_; }
  std::size_t codim() const override { return m_; }
  Vec value(const Vec& x) const override { return f_(x); }

  Mat jacobian(const Vec& x) const override {
    if (jac_) return (*jac_)(x);
    Mat J(m_, d_);
    for (std::size_t j = 0; j < d_; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
      Vec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      J.col(j) = (f_(xp) - f_(xm)) / (2.0 * h);
    }
    return J;
  }

  std::vector<Mat> hessians(const Vec& x) const override {
    std::vector<Mat> H(m_, Mat::Zero(d_, d_));
    for (std::size_t j = 0; j < d_; ++j) {
      const double h = 1e-5 * std::max(1.0, std::abs(x[j]));
      Vec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const Mat dJ = (jacobian(xp) - jacobian(xm)) / (2.0 * h);
      for (std::size_t k = 0; k < m_; ++k) H[k].col(j) = dJ.row(k).transpose();
    }
    return H;
  }

  nlohmann::ordered_json describe() const override {
    return {{"d", d_}, {"m", m_}, {"jacobian", jac_ ? "supplied" : "finite-difference"}};
  }

 private:
  std::size_t d_, m_;
  ValueFn f_;
  std::optional<JacobianFn> jac_;
};

double abs_poly_bound(const Monomial& t, const std::vector<double>& radius, int da, int db) {
  // |d_a d_b (coef x^e)| <= |coef| * falling factors * prod R_i^{e_i - k_i}
  std::vector<int> e = t.exps;
  double p = std::abs(t.coef);
  if (da >= 0) {
    p *= e[da];
    e[da] -= 1;
  }
  if (db >= 0) {
    p *= e[db];
    e[db] -= 1;
  }
  if (p == 0.0) return 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) p *= ipow(radius[i], e[i]);
  return p;
}

}  // namespace

// -- ManifoldChart -------------------------------------------------------------

ManifoldChart::ManifoldChart(std::shared_ptr<const ChartModel> model, Box domain, double deriv_bound,
                             std::optional<int> nondeg_order, std::string name)
    : model_(std::move(model)),
      domain_(std::move(domain)),
      d_(model_->domain_dim()),
      m_(model_->codim()),
      M_(deriv_bound),
      l_(nondeg_order),
      name_(std::move(name)) {
  if (d_ < 1 || m_ < 1) throw InvalidArgument("chart needs 1 <= d < n");
  if (domain_.dim() != d_) throw InvalidArgument("chart domain dimension must equal d");
  if (!(M_ >= 1.0) || !std::isfinite(M_)) throw InvalidArgument("derivative bound M must be >= 1");
  if (l_ && *l_ < 1) throw InvalidArgument("nondegeneracy order must be >= 1");
}

void ManifoldChart::require_in_domain(const Vec& x) const {
  if (static_cast<std::size_t>(x.size()) != d_)
    throw InvalidArgument("point dimension does not match chart domain");
  if (!domain_.contains(x, 1e-12)) {
    std::ostringstream os;
    os << "point (";
    for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ") outside chart domain";
    throw DomainError(os.str());
  }
}

Vec ManifoldChart::evaluate(const Vec& x) const {
  require_in_domain(x);
  return evaluate_unchecked(x);
}

Vec ManifoldChart::evaluate_unchecked(const Vec& x) const {
  Vec out(n());
  out.head(d_) = x;
  out.tail(m_) = model_->value(x);
  return out;
}

Vec ManifoldChart::graph(const Vec& x) const {
  require_in_domain(x);
  return model_->value(x);
}

Mat ManifoldChart::jacobian(const Vec& x) const {
  require_in_domain(x);
  return model_->jacobian(x);
}

std::vector<Mat> ManifoldChart::hessians(const Vec& x) const {
  require_in_domain(x);
  return model_->hessians(x);
}

Vec ManifoldChart::intercept_h(const Vec& x) const {
  require_in_domain(x);
  return model_->value(x) - model_->jacobian(x) * x;
}

double ManifoldChart::lipschitz() const {
  return std::sqrt(static_cast<double>(d_)) * std::max(1.0, M_);
}

ManifoldChart ManifoldChart::with_declared(double M, std::optional<int> l) const {
  return ManifoldChart(model_, domain_, M, l, name_);
}

nlohmann::ordered_json ManifoldChart::describe() const {
  nlohmann::ordered_json dom = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < d_; ++i) dom.push_back({domain_.lo[i], domain_.hi[i]});
  nlohmann::ordered_json j;
  j["kind"] = name_;
  j["d"] = d_;
  j["n"] = n();
  j["domain"] = dom;
  j["M"] = M_;
  if (l_) j["l"] = *l_;
  else j["l"] = nullptr;
  j["model"] = model_->describe();
  return j;
}

// -- Library -------------------------------------------------------------------

double polynomial_deriv_bound(const std::vector<PolyComponent>& components, const Box& box) {
  std::vector<double> radius(box.dim());
  for (std::size_t i = 0; i < box.dim(); ++i)
    radius[i] = std::max(std::abs(box.lo[i]), std::abs(box.hi[i]));
  double M = 0.0;
  const int d = static_cast<int>(box.dim());
  for (const auto& comp : components) {
    for (int a = 0; a < d; ++a) {
      double s1 = 0.0;
      for (const auto& t : comp) s1 += abs_poly_bound(t, radius, a, -1);
      M = std::max(M, s1);
      for (int b = 0; b < d; ++b) {
        double s2 = 0.0;
        for (const auto& t : comp) s2 += abs_poly_bound(t, radius, a, b);
        M = std::max(M, s2);
      }
    }
  }
  return M;
}

double sampled_deriv_max(const ManifoldChart& chart, int per_axis) {
  const std::size_t d = chart.d();
  const Box& box = chart.domain();
  std::vector<int> idx(d, 0);
  double worst = 0.0;
  for (;;) {
    Vec x(d);
    for (std::size_t i = 0; i < d; ++i) {
      const double t = per_axis > 1 ? static_cast<double>(idx[i]) / (per_axis - 1) : 0.5;
      x[i] = box.lo[i] + t * box.side(i);
    }
    worst = std::max(worst, chart.model().jacobian(x).cwiseAbs().maxCoeff());
    for (const auto& H : chart.model().hessians(x)) worst = std::max(worst, H.cwiseAbs().maxCoeff());
    std::size_t k = 0;
    while (k < d && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == d) break;
  }
  return worst;
}

namespace {

// Resolves M for a new chart: a declared value must dominate the sampled
// partials; otherwise the analytic bound is used.
double resolve_M(const ManifoldChart& probe, std::optional<double> declared, double analytic) {
  const int per_axis = std::max(11, static_cast<int>(std::ceil(std::pow(1000.0, 1.0 / probe.d()))) + 1);
  const double sampled = sampled_deriv_max(probe, per_axis);
  if (declared) {
    if (!(*declared >= 1.0)) throw InvalidArgument("declared M must be >= 1");
    if (sampled > *declared * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "declared M = " << *declared << " is below the sampled derivative maximum " << sampled;
      throw InvalidArgument(os.str());
    }
    return *declared;
  }
  return std::max({1.0, analytic, sampled});
}

ManifoldChart make_poly(std::size_t d, std::vector<PolyComponent> comps, Box domain,
                        std::optional<double> declared_M, std::optional<int> l, std::string name) {
  auto model = std::make_shared<PolynomialModel>(d, comps);
  const double analytic = std::max(1.0, polynomial_deriv_bound(comps, domain));
  ManifoldChart probe(model, domain, analytic, l, name);
  const double M = resolve_M(probe, declared_M, analytic);
  return ManifoldChart(model, std::move(domain), M, l, std::move(name));
}

Monomial mono(double c, std::vector<int> e) { return Monomial{c, std::move(e)}; }

}  // namespace

ManifoldChart veronese(int n, std::optional<Box> domain) {
  if (n < 2) throw InvalidArgument("veronese: n must be >= 2");
  Box dom = domain ? *domain : Box::cube(1, 0.0, 1.0);
  std::vector<PolyComponent> comps;
  for (int k = 2; k <= n; ++k) comps.push_back({mono(1.0, {k})});
  return make_poly(1, std::move(comps), std::move(dom), std::nullopt, n, "veronese");
}

ManifoldChart circle(double r, std::optional<Box> domain) {
  if (!(r > 0.0)) throw InvalidArgument("circle: r must be positive");
  const double a = 0.8 * std::sqrt(r);
  Box dom = domain ? *domain : Box::cube(1, -a, a);
  const double R = std::max(std::abs(dom.lo[0]), std::abs(dom.hi[0]));
  if (!(R * R < r)) throw InvalidArgument("circle: domain must stay inside (-sqrt(r), sqrt(r))");
  const double y = std::sqrt(r - R * R);
  const double M = std::max({1.0, R / y, r / (y * y * y)});
  return ManifoldChart(std::make_shared<CircleModel>(r), std::move(dom), M, 2, "circle");
}

ManifoldChart mixed(int d, int n, std::optional<Box> domain) {
  if (d < 1 || n <= d) throw InvalidArgument("mixed: need 1 <= d < n");
  Box dom = domain ? *domain : Box::cube(d, 0.0, 1.0);
  std::vector<PolyComponent> comps;
  for (int k = 2; k <= n + 1 - d; ++k) {
    std::vector<int> e(d, 0);
    e[d - 1] = k;
    comps.push_back({mono(1.0, e)});
  }
  std::optional<int> l;
  if (d == 1) l = n;
  return make_poly(d, std::move(comps), std::move(dom), std::nullopt, l, "mixed");
}

ManifoldChart polynomial_chart(std::size_t d, std::vector<PolyComponent> components, Box domain,
                               std::optional<double> declared_M, std::optional<int> nondeg_order,
                               std::string name) {
  return make_poly(d, std::move(components), std::move(domain), declared_M, nondeg_order, std::move(name));
}

ManifoldChart polynomial_curve(const std::vector<std::vector<double>>& coefficients, Box domain,
                               std::optional<double> declared_M, std::optional<int> nondeg_order) {
  std::vector<PolyComponent> comps;
  for (const auto& c : coefficients) {
    PolyComponent comp;
    for (std::size_t k = 0; k < c.size(); ++k)
      if (c[k] != 0.0) comp.push_back(mono(c[k], {static_cast<int>(k)}));
    comps.push_back(std::move(comp));
  }
  return make_poly(1, std::move(comps), std::move(domain), declared_M, nondeg_order, "poly");
}

ManifoldChart custom_chart(std::size_t d, std::size_t m, ValueFn value, std::optional<JacobianFn> jac,
                           Box domain, double M, std::optional<int> nondeg_order, std::string name) {
  auto model = std::make_shared<FunctionModel>(d, m, std::move(value), std::move(jac));
  ManifoldChart probe(model, domain, M, nondeg_order, name);
  resolve_M(probe, M, M);
  return ManifoldChart(model, std::move(domain), M, nondeg_order, std::move(name));
}

// -- JSON spec -------------------------------------------------------------------

namespace {

std::optional<Box> box_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  if (!j.is_array() || j.empty()) throw InvalidArgument("domain must be a non-empty array of [lo, hi]");
  std::vector<double> lo, hi;
  for (const auto& iv : j) {
    if (!iv.is_array() || iv.size() != 2) throw InvalidArgument("domain entries must be [lo, hi]");
    lo.push_back(iv[0].get<double>());
    hi.push_back(iv[1].get<double>());
  }
  return Box(lo, hi);
}

}  // namespace

ManifoldChart chart_from_json(const nlohmann::json& spec) {
  try {
    if (!spec.is_object() || !spec.contains("kind")) throw InvalidArgument("chart spec needs a 'kind'");
    const std::string kind = spec.at("kind").get<std::string>();
    const nlohmann::json params = spec.value("params", nlohmann::json::object());
    const std::optional<Box> domain = box_from_json(spec.value("domain", nlohmann::json()));
    std::optional<double> M;
    if (spec.contains("M") && !spec["M"].is_null()) M = spec["M"].get<double>();
    std::optional<int> l;
    if (spec.contains("l") && !spec["l"].is_null()) l = spec["l"].get<int>();


    ManifoldChart chart = [&]() -> ManifoldChart {
      if (kind == "veronese") return veronese(params.at("n").get<int>(), domain);
      if (kind == "circle") return circle(params.value("r", 1.0), domain);
      if (kind == "mixed") return mixed(params.at("d").get<int>(), params.at("n").get<int>(), domain);
      if (kind == "poly") {
        if (!domain) throw InvalidArgument("poly chart needs an explicit domain");
        if (params.contains("coefficients")) {
          return polynomial_curve(params.at("coefficients").get<std::vector<std::vector<double>>>(), *domain, M, l);
        }
        const std::size_t d = domain->dim();
        std::vector<PolyComponent> comps;
        for (const auto& comp : params.at("terms")) {
          PolyComponent pc;
          for (const auto& row : comp) {
            if (!row.is_array() || row.size() != d + 1) throw InvalidArgument("poly term must be [coef, e_1..e_d]");
            Monomial t;
            t.coef = row[0].get<double>();
            for (std::size_t i = 0; i < d; ++i) t.exps.push_back(row[i + 1].get<int>());
            pc.push_back(std::move(t));
          }
          comps.push_back(std::move(pc));
        }
        return polynomial_chart(d, std::move(comps), *domain, M, l);
      }
      throw InvalidArgument("unknown chart kind '" + kind + "'");
    }();
    if (kind == "poly" || (!M && !l)) return chart;
    const double m_use = M ? resolve_M(chart, M, chart.deriv_bound()) : chart.deriv_bound();
    return chart.with_declared(m_use, l ? l : chart.nondeg_order());
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("chart spec: ") + e.what());
  }
}

// -- Nondegeneracy ---------------------------------------------------------------

NondegeneracyResult nondegeneracy_order(const ManifoldChart& chart, double x, int l_max) {
  if (chart.d() != 1) throw Unsupported("nondegeneracy order is only decided for curves (d = 1)");
  const int n = static_cast<int>(chart.n());
  if (l_max < n) throw InvalidArgument("l_max must be at least n");
  Vec xv(1);
  xv[0] = x;
  if (!chart.domain().contains(xv, 1e-12)) throw DomainError("point outside chart domain");
  const auto derivs = chart.model().curve_derivatives(x, l_max);
  if (!derivs) throw Unsupported("chart backend does not provide derivatives up to l_max");

  Mat D = Mat::Zero(n, l_max);
  for (int i = 1; i <= l_max; ++i) {
    Vec col = Vec::Zero(n);
    if (i == 1) col[0] = 1.0;  // d/dx of the coordinate x itself
    col.tail(n - 1) = (*derivs)[i];
    D.col(i - 1) = col;
  }
  NondegeneracyResult res;
  res.l_max = l_max;
  for (int l = n; l <= l_max; ++l) {
    Eigen::JacobiSVD<Mat> svd(D.leftCols(l));
    const Vec s = svd.singularValues();
    if (s.size() == 0 || s[0] == 0.0) continue;
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s[i] > kRankThreshold * s[0]) ++rank;
    if (rank == n) {
      res.order = l;
      return res;
    }
  }
  return res;
}

}  // namespace dioph
