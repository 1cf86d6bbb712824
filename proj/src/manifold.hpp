#pragma once

#include "linalg.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dioph {

/// Closed axis-aligned box in R^d.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  Box() = default;
  Box(std::vector<double> lo_, std::vector<double> hi_);
  static Box cube(std::size_t d, double lo, double hi);

  std::size_t dim() const { return lo.size(); }
  double volume() const;
  double side(std::size_t i) const { return hi[i] - lo[i]; }
  double min_side() const;
  Vec center() const;
  bool contains(const Vec& x, double slack = 0.0) const;
  bool contains(const Box& other, double slack = 0.0) const;
  bool intersects(const Box& other) const;
  /// Shrinks every side by `margin` at both ends.
  Box shrunk(double margin) const;
};

/// Backend for the graph part x -> f~(x) of a Monge chart.
class ChartModel {
 public:
  virtual ~ChartModel() = default;
  virtual std::size_t domain_dim() const = 0;
  virtual std::size_t codim() const = 0;
  virtual Vec value(const Vec& x) const = 0;
  /// m x d matrix of first partials.
  virtual Mat jacobian(const Vec& x) const = 0;
  /// One d x d matrix of second partials per graph component.
  virtual std::vector<Mat> hessians(const Vec& x) const = 0;
  /// For curves: f~^{(i)}(x), i = 0..order. Empty if the backend cannot
  /// produce derivatives of that order.
  virtual std::optional<std::vector<Vec>> curve_derivatives(double x, int order) const;
  virtual nlohmann::ordered_json describe() const = 0;
};

/// One monomial coef * prod x_i^{exps_i}.
struct Monomial {
  double coef = 0.0;
  std::vector<int> exps;
};
using PolyComponent = std::vector<Monomial>;

/// Monge-parameterised chart x -> (x, f~(x)) on a closed box.
class ManifoldChart {
 public:
  ManifoldChart(std::shared_ptr<const ChartModel> model, Box domain, double deriv_bound,
                std::optional<int> nondeg_order, std::string name);

  std::size_t d() const { return d_; }
  std::size_t n() const { return d_ + m_; }
  std::size_t m() const { return m_; }
  const Box& domain() const { return domain_; }
  double deriv_bound() const { return M_; }
  std::optional<int> nondeg_order() const { return l_; }
  const std::string& name() const { return name_; }
  const ChartModel& model() const { return *model_; }

  /// (x, f~(x)). Throws DomainError outside the domain.
  Vec evaluate(const Vec& x) const;
  /// f~(x) only.
  Vec graph(const Vec& x) const;
  Mat jacobian(const Vec& x) const;
  std::vector<Mat> hessians(const Vec& x) const;
  /// f~(x) - J(x) x^T: the affine intercept of the tangent plane.
  Vec intercept_h(const Vec& x) const;

  /// Per-coordinate Lipschitz constant of f w.r.t. the Euclidean norm on
  /// the domain: sqrt(d) * max(1, M).
  double lipschitz() const;

  nlohmann::ordered_json describe() const;

  /// Same chart with a different derivative bound / nondegeneracy order.
  ManifoldChart with_declared(double M, std::optional<int> l) const;

  /// Unchecked evaluation used by hot loops that already clipped x.
  Vec evaluate_unchecked(const Vec& x) const;

 private:
  void require_in_domain(const Vec& x) const;

  std::shared_ptr<const ChartModel> model_;
  Box domain_;
  std::size_t d_;
  std::size_t m_;
  double M_;
  std::optional<int> l_;
  std::string name_;
};

// -- Chart library ---------------------------------------------------------

/// (x, x^2, ..., x^n). Domain defaults to [0, 1].
ManifoldChart veronese(int n, std::optional<Box> domain = std::nullopt);

/// Upper half of x^2 + y^2 = r as the graph y = sqrt(r - x^2). The default
/// domain is [-0.8 sqrt(r), 0.8 sqrt(r)], which keeps away from the
/// vertical tangents.
ManifoldChart circle(double r, std::optional<Box> domain = std::nullopt);

/// (x_1, ..., x_d, x_d^2, ..., x_d^{n+1-d}). Domain defaults to [0, 1]^d.
ManifoldChart mixed(int d, int n, std::optional<Box> domain = std::nullopt);

/// General polynomial Monge chart. When `declared_M` is absent the bound
/// comes from the triangle inequality over the box.
ManifoldChart polynomial_chart(std::size_t d, std::vector<PolyComponent> components, Box domain,
                               std::optional<double> declared_M = std::nullopt,
                               std::optional<int> nondeg_order = std::nullopt,
                               std::string name = "poly");

/// Curve chart from per-component coefficient lists c_0 + c_1 x + c_2 x^2 + ...
ManifoldChart polynomial_curve(const std::vector<std::vector<double>>& coefficients, Box domain,
                               std::optional<double> declared_M = std::nullopt,
                               std::optional<int> nondeg_order = std::nullopt);

/// User supplied chart. A missing jacobian falls back to central
/// differences (step 1e-6 * max(1,|x_i|), truncation error O(step^2 * M3));
/// hessians are always differenced from the jacobian.
using ValueFn = std::function<Vec(const Vec&)>;
using JacobianFn = std::function<Mat(const Vec&)>;
ManifoldChart custom_chart(std::size_t d, std::size_t m, ValueFn value,
                           std::optional<JacobianFn> jac, Box domain, double M,
                           std::optional<int> nondeg_order = std::nullopt,
                           std::string name = "custom");

/// Builds a chart from {kind, params, domain, M, l}.
ManifoldChart chart_from_json(const nlohmann::json& spec);

/// Triangle-inequality bound on all first and second partials over the box.
double polynomial_deriv_bound(const std::vector<PolyComponent>& components, const Box& box);

/// Largest |first or second partial| seen on a grid of `per_axis`^d points.
double sampled_deriv_max(const ManifoldChart& chart, int per_axis);

// -- Nondegeneracy -------------------------------------------------------------

struct NondegeneracyResult {
  std::optional<int> order;  ///< empty: degenerate up to l_max
  int l_max = 0;
};

/// Smallest l <= l_max with rank{f^{(i)}(x) : 1 <= i <= l} = n. Rank is
/// decided by singular values above 1e-9 times the largest one.
NondegeneracyResult nondegeneracy_order(const ManifoldChart& chart, double x, int l_max);

inline constexpr double kRankThreshold = 1e-9;

}  // namespace dioph
