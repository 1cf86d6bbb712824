#pragma once

#include "arcs.hpp"
#include "flow.hpp"
#include "manifold.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <optional>
#include <ostream>
#include <vector>

namespace dioph {

enum class Membership { In, Uncertain, Out };

const char* to_string(Membership m);

/// (p, q) with a certified bracket on inf_{x in box} ||f(x) - p/q||_inf.
struct RationalWitness {
  std::vector<long long> p;
  long long q = 0;
  double dist_lo = 0.0;
  double dist_hi = 0.0;
  Membership status = Membership::Out;
  Vec best_x;    ///< evaluated point attaining dist_hi
  Box bracket;   ///< contains every x of the box with ||f(x) - p/q|| < threshold
};

struct TubeBudget {
  double max_q = 1e5;                     ///< ceil(e^t) limit
  double max_candidates_per_q = 1e7;      ///< nominal p-box size per q
  std::size_t max_cells_per_candidate = 200'000;
};

struct TubeResult {
  std::vector<RationalWitness> witnesses;  ///< In and Uncertain, sorted by (q, p)
  std::size_t n_lo = 0;                    ///< certified In
  std::size_t n_hi = 0;                    ///< In + Uncertain
  std::size_t uncertain = 0;
  std::size_t candidates = 0;              ///< (p, q) pairs examined by branch and bound
  double threshold = 0.0;                  ///< eps / e^t
};

/// All (p, q) with 0 < q < e^t and inf_{x in box} ||f(x) - p/q||_inf < eps/e^t,
/// each bracketed by a certified branch and bound (initial cells of side
/// at most (eps/e^t)/(8L), L = sqrt(d) max(1, M)). Pairs are not reduced to
/// lowest terms. Throws BudgetExceeded naming the offending q.
TubeResult enumerate_tube(const ManifoldChart& chart, const Box& box, double eps, double t, unsigned workers = 1,
                          const TubeBudget& budget = {});

enum class ArcSide { Major, Minor, Mixed };
const char* to_string(ArcSide s);

struct CountReport {
  double eps = 0.0;
  double t = 0.0;
  std::size_t n_lo = 0;
  std::size_t n_hi = 0;
  std::size_t n_major_lo = 0;  ///< certified In, bracket meets Major cells only
  std::size_t n_major_hi = 0;  ///< In or Uncertain, bracket meets some Major cell
  std::size_t uncertain = 0;
  double main_term = 0.0;      ///< eps^m e^{(d+1)t} vol(B)
  double ratio = 0.0;          ///< n_major_hi / main_term
  double volume = 0.0;
  std::vector<RationalWitness> witnesses;
  std::vector<ArcSide> sides;  ///< per witness
};

/// Enumerates the tube over B and attributes each witness to the major or
/// minor side of the arc map by the cells its bracket meets.
CountReport count_split(const ManifoldChart& chart, const FlowParams& params, const Box& box, const ArcMap& map,
                        unsigned workers = 1, const TubeBudget& budget = {});

struct CubeCover {
  double side = 0.0;        ///< (eps e^{-t})^{1/2}
  std::vector<Box> cubes;   ///< tiling from box.lo; the last cube per axis may overhang
  double bound = 0.0;       ///< 2 (eps e^{-t})^{-d/2} vol(B)
};

CubeCover cube_cover(const Box& box, double eps, double t);

struct CubeCount {
  Vec center;
  std::size_t n_lo = 0;
  std::size_t n_hi = 0;
  double bound = 0.0;  ///< eps^n e^t (eps e^{-t})^{-d/2}
  double ratio = 0.0;  ///< n_hi / bound
};

/// Count inside cube ∩ B. The cube centre must be Major: looked up in `map`
/// when given, otherwise classified directly. Minor centres are rejected.
CubeCount per_cube_check(const ManifoldChart& chart, const FlowParams& params, const Box& cube, const Box& box,
                         const ArcMap* map = nullptr, unsigned workers = 1, const TubeBudget& budget = {});

/// ||g_t zu(x) (-p sigma_n, q)^T||_2, bounded by c1 phi for tube witnesses.
double flowed_witness_norm(const ManifoldChart& chart, const FlowParams& params, const Vec& x,
                    const std::vector<long long>& p, long long q);

/// The integer t with e^{t-1} <= q < e^t.
int bridge_time(long long q);

/// For y with |y_i - p_i/q| < psi(q)/q and psi nonincreasing: the bridge
/// time t and the bound psi(e^{t-1}) / e^{t-1} that the same (p, q) meets.
struct BridgeCheck {
  int t = 0;
  double distance = 0.0;
  double bound = 0.0;
  bool holds = false;
};
BridgeCheck bridge_check(const std::function<double(double)>& psi, const Vec& y, const std::vector<long long>& p,
                         long long q);

nlohmann::ordered_json to_json(const CountReport& r);
nlohmann::ordered_json to_json(const TubeResult& r);
/// t, eps, q, p_1..p_n, dist_lo, dist_hi, status, arc side; one row per
/// witness of every report. With no reports only the header is written.
void write_witness_csv(std::ostream& os, std::size_t n, const std::vector<CountReport>& runs);

}  // namespace dioph
