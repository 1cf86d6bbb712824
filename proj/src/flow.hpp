#pragma once

#include "linalg.hpp"
#include "manifold.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <vector>

namespace dioph {

struct Dims {
  std::size_t n = 0;  ///< ambient dimension
  std::size_t d = 0;  ///< domain dimension
  std::size_t m() const { return n - d; }
  static Dims of(const ManifoldChart& chart) { return {chart.n(), chart.d()}; }
};

/// (eps, t) plus the derived phi = (eps^n e^t)^{1/(n+1)} and the b_t
/// exponent h = d t / (2(n+1)).
struct FlowParams {
  double eps = 0.0;
  double t = 0.0;
  double phi = 0.0;
  double h = 0.0;
  Dims dims;

  /// Throws InvalidArgument unless 0 < eps < 1 and t > 0.
  static FlowParams make(double eps, double t, Dims dims);
};

/// Identity with the last column carrying y in reverse order.
Mat matrix_U(const Vec& y);
/// U of a short vector padded with zeros to length n.
Mat matrix_U(const Vec& y, std::size_t n);
/// Unipotent shear with sigma_m Theta sigma_d in the (m, d) block.
Mat matrix_Z(const Mat& theta);

struct FrameAt {
  Vec x;
  Mat zu;       ///< Z(-J(x)) U(f(x))
  Mat zu_dual;  ///< explicit dual form: rows (1, -x, -f~), (0, I_d, J^T), (0, 0, I_m)
  Mat g, b, g_dual, b_dual;
};

struct DiagonalFlows {
  Mat g;       ///< diag(phi/eps x n, phi e^{-t})
  Mat b;       ///< diag(e^h I_m, e^{-(m+1)t/2(n+1)} I_d, e^h)
  Mat g_dual;  ///< phi^{-1} diag(e^t, eps, ..., eps)
  Mat b_dual;  ///< diag(e^{-h}, e^{(m+1)t/2(n+1)} I_d, e^{-h} I_m)
};

DiagonalFlows diagonal_flows(const FlowParams& params);
/// b_t evaluated at -t, i.e. the inverse of b_t.
Mat b_inverse(const FlowParams& params);

/// zu(x) as the product Z(-J(x)) U(f(x)).
Mat zu_product(const ManifoldChart& chart, const Vec& x);
/// zu(x) from its block form with intercept h(x) = f~(x) - J(x) x^T.
Mat zu_closed_form(const ManifoldChart& chart, const Vec& x);
Mat zu_dual_closed_form(const ManifoldChart& chart, const Vec& x);

FrameAt assemble_zu(const ManifoldChart& chart, const Vec& x, const FlowParams& params);

/// b_t g_t zu(x): the lattice classified by the arc map.
Mat flowed_basis(const ManifoldChart& chart, const FlowParams& params, const Vec& x);
/// b_t* g_t* zu*(x) from the closed forms.
Mat flowed_dual_basis(const ManifoldChart& chart, const FlowParams& params, const Vec& x);

/// (-p sigma_n, q)^T: p reversed with its sign flipped, then q.
Vec embed_rational(const std::vector<long long>& p, long long q);

/// sqrt(n+1) (d+1) M.
double c1_constant(const ManifoldChart& chart);

// -- Identity checks ---------------------------------------------------------------

struct ConjugationSample {
  Vec y;      ///< in R^n
  Vec x;      ///< in R^d
  Mat theta;  ///< m x d
};

std::vector<ConjugationSample> random_conjugation_samples(Dims dims, std::size_t count, std::uint64_t seed,
                                                          double scale = 2.0);

struct ConjugationReport {
  std::size_t samples = 0;
  double g_u_error = 0.0;  ///< g U(y) g^-1 vs U(e^t eps^-1 y)
  double g_z_error = 0.0;  ///< g Z g^-1 vs Z
  double b_u_error = 0.0;  ///< b U(x) b_-t vs U(e^{-t/2} x)
  double b_z_error = 0.0;  ///< b Z b_-t vs Z(e^{t/2} Theta)
  double tolerance = 1e-10;
  double max_error() const;
  bool pass() const { return max_error() <= tolerance; }
};

ConjugationReport check_conjugations(const FlowParams& params, const std::vector<ConjugationSample>& samples);

struct ExpansionResidual {
  Mat theta_hat;
  Vec y_hat;
  double theta_ratio = 0.0;  ///< ||Theta^|| / ||x'||
  double y_ratio = 0.0;      ///< ||y^|| / ||x'||^2
  double bound = 0.0;        ///< d^2 m M
};

/// Peels zu(x + x') = Z(Theta^) U(y^) U(x') zu(x) for the correction factors.
ExpansionResidual local_expansion_residual(const ManifoldChart& chart, const Vec& x, const Vec& dx);

nlohmann::ordered_json to_json(const ConjugationReport& r);

}  // namespace dioph
