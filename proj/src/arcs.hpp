#pragma once

#include "flow.hpp"
#include "lattice.hpp"
#include "manifold.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace dioph {

enum class ArcLabel { RawMinor, EnlargedMinor, Major };

const char* to_string(ArcLabel label);

/// Relative band below the threshold that still counts as RawMinor.
inline constexpr double kClassifySlack = 1e-9;

struct PointClass {
  ArcLabel label = ArcLabel::Major;  ///< RawMinor or Major
  double lambda_top = 0.0;           ///< lambda_{n+1}(b_t g_t zu(x) Z^{n+1})
  double threshold = 0.0;            ///< phi e^h
};

PointClass classify_point(const ManifoldChart& chart, const FlowParams& params, const Vec& x,
                          const EnumerationBudget& budget = {});

struct ArcCell {
  Vec center;
  ArcLabel label = ArcLabel::Major;
  double lambda_top = 0.0;
};

struct CoverBall {
  Vec center;
  double radius = 0.0;
};

struct ArcMap {
  FlowParams params;
  Box box;
  double spacing = 0.0;             ///< requested spacing (upper bound on cell side)
  std::vector<std::size_t> shape;   ///< cells per axis
  std::vector<double> cell_side;    ///< actual side per axis
  double radius = 0.0;              ///< eps e^{-t/2}
  double threshold = 0.0;           ///< phi e^h
  std::vector<ArcCell> cells;       ///< row-major, first axis fastest
  std::vector<CoverBall> cover;
  std::size_t multiplicity = 0;

  double cell_volume() const;
  std::size_t count(ArcLabel label) const;
};

/// Classifies every cell centre, enlarges by eps e^{-t/2} and selects the
/// cover. Requires spacing <= eps e^{-t/2}.
ArcMap build_arc_map(const ManifoldChart& chart, const FlowParams& params, const Box& box, double spacing,
                     unsigned workers = 1, const EnumerationBudget& budget = {});

/// Builds the map from precomputed raw-minor flags (one per cell, same
/// ordering as ArcMap::cells). Used by build_arc_map and by tests.
ArcMap assemble_arc_map(const FlowParams& params, const Box& box, double spacing,
                        const std::vector<bool>& raw_minor, const std::vector<double>& lambda_top = {});

struct MeasureInterval {
  double lo = 0.0;
  double hi = 0.0;
};

/// lo: cells contained in one enlargement ball; hi: cells meeting one.
MeasureInterval estimate_minor_measure(const ArcMap& map);

/// sup over samples of hi * (eps^n e^{3t/2})^alpha with
/// alpha = 1 / (d (2l - 1) (n + 1)).
struct DecaySample {
  double eps = 0.0;
  double t = 0.0;
  double hi = 0.0;
};
double fit_minor_constant(const std::vector<DecaySample>& samples, std::size_t n, std::size_t d, int l);
double minor_alpha(std::size_t n, std::size_t d, int l);

struct RefinementCheck {
  double hi = 0.0;
  double hi_half = 0.0;
  double delta = 0.0;
  double tolerance = 0.0;  ///< two cells of the coarse grid
  bool stable() const { return delta <= tolerance; }
};
RefinementCheck refinement_check(const ManifoldChart& chart, const FlowParams& params, const Box& box,
                                 double spacing, unsigned workers = 1);

// -- Non-divergence witnesses ----------------------------------------------------

struct BkmParams {
  double delta = 0.0;
  double K = 0.0;
  double T = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;

  /// c2 = ((n+1)!)^2, c3 = c2 (1 + n + n^3 M), and
  /// (delta, K, T) = (c3 e^{-t}, c3 eps^{-1} e^{-t/2}, c3 eps^{-1}).
  static BkmParams from_flow(const ManifoldChart& chart, const FlowParams& params);
  /// delta <= 1, T >= 1 and delta^n < K T^{n-1}.
  bool regime_ok(std::size_t n) const;
};

struct BkmWitness {
  long long a0 = 0;
  std::vector<long long> a;
  double linear_form = 0.0;  ///< |a0 + f(x) a^T|
  double gradient = 0.0;     ///< ||grad f(x) a^T||_inf
  long long height = 0;      ///< ||a||_inf
};

/// Evaluates the three inequalities for a given (a0, a).
bool bkm_check(const ManifoldChart& chart, const Vec& x, const BkmParams& bkm, long long a0,
               const std::vector<long long>& a, BkmWitness* out = nullptr);

/// Scans a by increasing ||a||_inf with a0 = -round(f(x) a^T) and returns
/// the first triple satisfying the inequalities, or nullopt. Throws
/// BudgetExceeded after `max_points` candidates.
std::optional<BkmWitness> bkm_witness(const ManifoldChart& chart, const Vec& x, const BkmParams& bkm,
                                      std::uint64_t max_points = 10'000'000);

struct AuditViolation {
  Vec x;
  std::string reason;
};

struct AuditReport {
  std::size_t raw_minor_points = 0;
  std::size_t enlarged_points = 0;
  std::size_t mahler_violations = 0;
  std::size_t system_violations = 0;
  std::size_t bkm_violations = 0;
  std::size_t enlarged_violations = 0;
  std::size_t dual_candidates_used = 0;  ///< S_f witnesses taken directly from the short dual vector
  double c2 = 0.0;
  double c3 = 0.0;
  double t0 = 0.0;         ///< log c3
  bool regime_ok = false;  ///< t >= t0 and the (delta, K, T) regime holds
  BkmParams bkm;
  double max_mahler_ratio = 0.0;  ///< max lambda_1(dual) / (c2 phi^-1 e^-h)
  std::vector<AuditViolation> violations;

  std::size_t total_violations() const {
    return mahler_violations + system_violations + bkm_violations + enlarged_violations;
  }
  bool clean() const { return total_violations() == 0; }
};

/// Audits the minor-arc inclusion chain at every RawMinor cell: the Mahler
/// step on the dual lattice, the integer system read off its shortest
/// vector, and membership in S_f(delta, K, T); EnlargedMinor cells are
/// checked against the witness of a covering RawMinor centre.
AuditReport inclusion_audit(const ManifoldChart& chart, const FlowParams& params, const ArcMap& map,
                            const EnumerationBudget& budget = {});

nlohmann::ordered_json summary_json(const ArcMap& map, const MeasureInterval& measure);
nlohmann::ordered_json to_json(const AuditReport& report);
/// One row per cell and map: t, eps, x_1..x_d, label, lambda_top, threshold.
/// With no maps only the header is written (dimension d for the columns).
void write_csv(std::ostream& os, std::size_t d, const std::vector<const ArcMap*>& maps);

}  // namespace dioph
