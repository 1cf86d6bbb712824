#pragma once

#include "linalg.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <random>
#include <vector>

namespace dioph {

/// Columns of a square matrix spanning the lattice g Z^k. Construction
/// checks ||det| - 1| <= 1e-6 and linear independence.
class LatticeBasis {
 public:
  explicit LatticeBasis(Mat cols);
  /// Skips the unimodularity check (still rejects singular input).
  static LatticeBasis any_covolume(Mat cols);

  std::size_t dim() const { return static_cast<std::size_t>(cols_.cols()); }
  const Mat& cols() const { return cols_; }

 private:
  struct NoCheck {};
  LatticeBasis(Mat cols, NoCheck);
  Mat cols_;
};

struct EnumerationBudget {
  /// Search-tree nodes allowed per minimum.
  std::uint64_t max_nodes = 50'000'000;
};

struct MinimaReport {
  std::vector<double> values;        ///< lambda_1 <= ... <= lambda_k
  std::vector<Vec> witnesses;        ///< lattice vectors achieving them
  std::vector<IVec> coefficients;    ///< integer coordinates w.r.t. the input basis
  bool certified = false;
  std::uint64_t nodes = 0;
};

/// Euclidean successive minima, dim <= 8. LLL reduction, then for each i
/// an exhaustive Schnorr-Euchner enumeration for the shortest lattice
/// vector outside the span of the previous witnesses. Ties within 1e-9
/// relative are broken towards the lexicographically smallest coefficient
/// vector, signs normalised so the first nonzero coefficient is positive.
/// Throws BudgetExceeded instead of truncating.
/// `count` limits the report to lambda_1..lambda_count (0 = all).
MinimaReport successive_minima(const LatticeBasis& basis, const EnumerationBudget& budget = {},
                               std::size_t count = 0);

/// Transpose-inverse basis of the polar lattice.
LatticeBasis polar_basis(const LatticeBasis& basis);

/// sigma_k: the anti-diagonal permutation reversing coordinates.
Mat reverse_involution(std::size_t k);

/// g* = sigma (g^T)^{-1} sigma.
Mat dual_element(const Mat& g);

/// lambda_i(L) * lambda_{k+1-i}(L*) for i = 1..k. Each lies in
/// [1, (k!)^2].
std::vector<double> mahler_gap(const LatticeBasis& basis, const EnumerationBudget& budget = {});

/// ((n+1)!)^2 for a lattice in R^{n+1}.
double mahler_constant(std::size_t k);

/// LLL reduction (delta = 0.99) returning the reduced basis and the integer
/// unimodular change of basis T with reduced = basis * T.
struct Reduction {
  Mat reduced;
  IMat transform;
};
Reduction lll_reduce(const Mat& basis);

/// Product of column norms over |det|.
double orthogonality_defect(const Mat& basis);

/// Random real basis of determinant 1: Gaussian entries rescaled by
/// |det|^{-1/k}, one column negated if needed, redrawn until the 2-norm
/// condition number is at most `max_condition`.
Mat random_unimodular(std::size_t k, std::mt19937_64& rng, double max_condition = 1e3);

nlohmann::ordered_json to_json(const MinimaReport& report);

}  // namespace dioph
