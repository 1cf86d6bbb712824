#pragma once

// Reference computations for the test suites. Nothing here includes the
// library: each oracle is a direct, slow evaluation of the definition.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Random real k x k matrix with |det| = 1, rescaled from Gaussian entries.
Mat random_unit_det(std::size_t k, std::mt19937_64& rng, double max_condition = 50.0);

struct BruteMinima {
  std::vector<double> values;
  /// True when every coefficient vector of a lattice vector of norm at
  /// most lambda_k provably lies inside the scanned box.
  bool box_sufficient = false;
};

/// Successive minima by scanning every coefficient vector in [-R, R]^k,
/// sorting the nonzero lattice vectors by length and growing a linearly
/// independent set greedily.
BruteMinima brute_minima(const Mat& basis, int R = 20);

/// Central differences of f at x with step h per coordinate.
Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double h = 1e-6);

/// Largest delta on a uniform grid of `step` with
/// delta^2 (4n^2+2n) + delta (2n^3+5n^2+3n-1) - n - 1 <= 0.
double delta_feasibility_scan(int n, double step = 1e-6);

/// Largest tau on a grid of `step` from 1/n with
/// (n tau - 1)/(tau + 1) <= alpha (3 - 2 n tau)/(2 tau + 1).
double tau_window_scan(int n, double alpha, double step = 1e-7);

/// A graph chart x -> f~(x) on a box, written out independently of the
/// library's chart constructors.
struct Curve {
  std::size_t d = 1;
  std::size_t m = 1;
  std::function<Vec(const Vec&)> graph;  ///< f~(x)
  double lipschitz = 1.0;                ///< bound on every |df_k/dx_i|, at least 1
};

struct TubeScan {
  std::size_t lower = 0;  ///< pairs whose sampled distance is below the threshold
  std::size_t upper = 0;  ///< pairs that could be below it given the sample slack
  bool decisive() const { return lower == upper; }
  /// (q, p) -> smallest sampled distance, for every pair near the tube.
  std::map<std::vector<long long>, double> best;
};

/// Rational points (p, q), 0 < q < e^t, within eps/e^t of the graph over
/// the box, by dense sampling on a grid of `per_axis` points per axis.
/// Pairs the grid cannot settle are resolved by Lipschitz branch and bound.
TubeScan tube_scan(const Curve& curve, const Vec& lo, const Vec& hi, double eps, double t, std::size_t per_axis);

/// Record-setting q for max_i ||q x^i|| over q <= Q, in long double.
std::vector<std::pair<std::uint64_t, double>> best_approximations(long double x, int n, std::uint64_t Q);

/// Least-squares slope of y against log q over records with q >= from.
double record_slope(const std::vector<std::pair<std::uint64_t, double>>& records, std::uint64_t from);

/// ||g_t zu(x) (-p sigma_n, q)^T||_2 expanded by hand: the top n entries
/// are (phi/eps) (q x - p_x, (q f~ - p_f) - J (q x - p_x)) and the last is
/// phi e^{-t} q.
double flowed_integer_norm(const Vec& x, const Vec& graph, const Mat& J, const std::vector<long long>& p, long long q,
                           double eps, double t);

}  // namespace oracle
