#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dioph {

/// psi(q) = c q^{-tau} (log q)^{-beta} for q > 1.
struct PowerLogPsi {
  double tau = 0.0;
  double c = 1.0;
  double beta = 0.0;

  /// Throws InvalidArgument unless tau >= 0 and c > 0.
  static PowerLogPsi make(double tau, double c = 1.0, double beta = 0.0);
  double operator()(double q) const;
};

enum class SeriesKind { Khintchine, Hausdorff, Minor };

struct SeriesQuery {
  SeriesKind kind = SeriesKind::Khintchine;
  std::size_t n = 0;
  std::size_t d = 0;   ///< m = n - d
  double s = 0.0;      ///< Hausdorff / Minor only
  double alpha = 0.0;  ///< Minor only

  static SeriesQuery khintchine(std::size_t n);
  static SeriesQuery hausdorff(std::size_t n, std::size_t d, double s);
  static SeriesQuery minor(std::size_t n, std::size_t d, double s, double alpha);
};

enum class Verdict { Converges, Diverges, Inconclusive };
const char* to_string(Verdict v);

struct SeriesResult {
  Verdict verdict = Verdict::Inconclusive;
  bool rigorous = false;
  /// Net exponent of q (or of e^t for Minor) in the summand, and the power
  /// of log q (or t) that breaks ties.
  double exponent = 0.0;
  double log_power = 0.0;
};

/// Exact classification for power-log psi.
SeriesResult classify_series(const PowerLogPsi& psi, const SeriesQuery& query);

/// Non-rigorous classification of an arbitrary psi from the local decay rate
/// of its summand at large q; always flagged rigorous = false and
/// Inconclusive when the rate sits within `margin` of the critical value.
SeriesResult classify_series_heuristic(const std::function<double(double)>& psi, const SeriesQuery& query,
                                       double q_probe = 1e8, double margin = 0.05);

struct CondensationResult {
  Verdict direct = Verdict::Inconclusive;     ///< sum_q psi(q)^n
  Verdict condensed = Verdict::Inconclusive;  ///< sum_t psi(e^t)^n e^t
  bool equivalent = false;
};
CondensationResult condensation_equivalence(const PowerLogPsi& psi, std::size_t n);

struct DimensionFormulas {
  double ambient = 0.0;    ///< (n+1)/(tau+1)
  double manifold = 0.0;   ///< ambient - (n - d), clamped at 0
  bool clamped = false;
};
/// d = n means the whole space. Throws InvalidArgument for tau < 1/n.
DimensionFormulas dimension_formulas(std::size_t n, std::size_t d, double tau);

struct SpectrumConstants {
  std::size_t n = 0;
  double A = 0.0;
  double B = 0.0;
  double D = 0.0;
  double delta = 0.0;
  bool lower_bound_holds = false;  ///< 1/(2n^2+6n) < delta
  bool upper_bound_holds = false;  ///< delta < 1/(2n^2+5n)
  double interval_lo = 0.0;        ///< 1/n
  double interval_hi = 0.0;        ///< 1/n + delta/n
};
/// Throws InvalidArgument for n < 3.
SpectrumConstants spectrum_constants(std::size_t n);

/// delta^2 A_n + delta B_n - n - 1.
double spectrum_polynomial(std::size_t n, double delta);

struct ExponentReport {
  std::size_t n = 0, d = 0;
  int l = 0;
  double alpha = 0.0;
  double tau_max = 0.0;
  double tau_max_bisection = 0.0;
  std::optional<SpectrumConstants> spectrum;  ///< for n >= 3
};

/// (n tau - 1)/(tau + 1) - alpha (3 - 2 n tau)/(2 tau + 1); the window is
/// where this is <= 0.
double exponent_window_gap(std::size_t n, double alpha, double tau);

/// Largest tau in the window, from the quadratic
/// 2n(1+alpha) tau^2 + (n - 2 + alpha(2n - 3)) tau - (1 + 3 alpha) = 0,
/// with a bisection cross-check on the original inequality.
ExponentReport exponent_window(std::size_t n, std::size_t d, int l);

/// A real number with enough digits for the estimator.
struct RealSpec {
  enum class Kind { Decimal, Sqrt, Liouville } kind = Kind::Decimal;
  std::string digits;   ///< Decimal
  unsigned radicand = 2;  ///< Sqrt
  unsigned base = 10;     ///< Liouville: sum_k base^{-k!}

  static RealSpec decimal(std::string digits);
  static RealSpec from_double(double x);
  static RealSpec sqrt_of(unsigned k);
  static RealSpec liouville(unsigned base = 10);
  /// "sqrt(k)", "liouville" / "liouville(b)", or a decimal literal.
  static RealSpec parse(const std::string& text);
  std::string describe() const;
};

struct ExponentEstimate {
  std::size_t n = 0;
  std::uint64_t Q = 0;
  std::uint64_t fit_from = 0;
  double estimate = 0.0;
  double intercept = 0.0;
  /// Best approximations: q at which q err(q) = max_i ||q x^i|| drops below
  /// its value at every smaller q, paired with -log(q err(q)).
  std::vector<std::pair<std::uint64_t, double>> records;
  std::size_t fitted = 0;
};

/// Least-squares slope of -log(q err(q)) against log q over the record
/// setting q in [fit_from, Q]; fit_from = 0 means ceil(sqrt(Q)). The estimate is NaN
/// when fewer than two records fall in the window. Throws InvalidArgument
/// if x looks rational at this resolution, BudgetExceeded for Q > max_q.
ExponentEstimate lambda_exponent_estimate(const RealSpec& x, std::size_t n, std::uint64_t Q,
                                          std::uint64_t fit_from = 0, unsigned workers = 1,
                                          std::uint64_t max_q = 100'000'000);

nlohmann::ordered_json to_json(const SpectrumConstants& s);
nlohmann::ordered_json to_json(const ExponentReport& r);
nlohmann::ordered_json to_json(const SeriesResult& r);
nlohmann::ordered_json to_json(const ExponentEstimate& e);

}  // namespace dioph
