#include "arcs.hpp"

#include "errors.hpp"
#include "parallel.hpp"
#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dioph {

const char* to_string(ArcLabel label) {
  switch (label) {
    case ArcLabel::RawMinor: return "raw_minor";
    case ArcLabel::EnlargedMinor: return "enlarged_minor";
    case ArcLabel::Major: return "major";
  }
  return "?";
}

PointClass classify_point(const ManifoldChart& chart, const FlowParams& params, const Vec& x,
                          const EnumerationBudget& budget) {
  if (chart.n() + 1 > 8) throw InvalidArgument("classify_point: n + 1 must be at most 8");
  const LatticeBasis basis(flowed_basis(chart, params, x));
  const MinimaReport minima = successive_minima(basis, budget);
  PointClass out;
  out.lambda_top = minima.values.back();
  out.threshold = params.phi * std::exp(params.h);
  out.label = out.lambda_top > out.threshold * (1.0 - kClassifySlack) ? ArcLabel::RawMinor : ArcLabel::Major;
  return out;
}

double ArcMap::cell_volume() const {
  double v = 1.0;
  for (double s : cell_side) v *= s;
  return v;
}

std::size_t ArcMap::count(ArcLabel label) const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [&](const ArcCell& c) { return c.label == label; }));
}

namespace {

struct Grid {
  std::vector<std::size_t> shape;
  std::vector<double> side;
  std::vector<double> lo;

  std::size_t size() const {
    std::size_t s = 1;
    for (auto k : shape) s *= k;
    return s;
  }
  std::vector<std::size_t> unflatten(std::size_t idx) const {
    std::vector<std::size_t> out(shape.size());
    for (std::size_t a = 0; a < shape.size(); ++a) {
      out[a] = idx % shape[a];
      idx /= shape[a];
    }
    return out;
  }
  std::size_t flatten(const std::vector<std::size_t>& ix) const {
    std::size_t idx = 0;
    for (std::size_t a = shape.size(); a-- > 0;) idx = idx * shape[a] + ix[a];
    return idx;
  }
  Vec center(std::size_t idx) const {
    const auto ix = unflatten(idx);
    Vec c(static_cast<Eigen::Index>(shape.size()));
    for (std::size_t a = 0; a < shape.size(); ++a) c(a) = lo[a] + (ix[a] + 0.5) * side[a];
    return c;
  }
};

Grid make_grid(const Box& box, double spacing) {
  Grid g;
  for (std::size_t a = 0; a < box.dim(); ++a) {
    const double len = box.side(a);
    if (!(len > 0.0)) throw InvalidArgument("arc map: degenerate box");
    const double cells = std::ceil(len / spacing - 1e-9);
    if (cells > 5e7) throw BudgetExceeded("arc map: grid too large");
    const auto k = static_cast<std::size_t>(std::max(1.0, cells));
    g.shape.push_back(k);
    g.side.push_back(len / static_cast<double>(k));
    g.lo.push_back(box.lo[a]);
  }
  if (static_cast<double>(g.size()) > 5e7) throw BudgetExceeded("arc map: grid too large");
  return g;
}

// Squared distance from point c to the cell box of index ix, and the
// squared distance from c to the farthest corner of that box.
void cell_distances(const Grid& g, const std::vector<std::size_t>& ix, const Vec& c, double& near2,
                    double& far2) {
  near2 = far2 = 0.0;
  for (std::size_t a = 0; a < ix.size(); ++a) {
    const double l = g.lo[a] + ix[a] * g.side[a];
    const double h = l + g.side[a];
    const double v = c(a);
    const double dn = v < l ? l - v : (v > h ? v - h : 0.0);
    const double df = std::max(std::abs(v - l), std::abs(v - h));
    near2 += dn * dn;
    far2 += df * df;
  }
}

// Visits every cell whose box lies within Euclidean distance r of c.
template <class F>
void for_cells_near(const Grid& g, const Vec& c, double r, F&& visit) {
  const std::size_t d = g.shape.size();
  std::vector<std::size_t> lo(d), hi(d), ix(d);
  for (std::size_t a = 0; a < d; ++a) {
    const double f0 = std::floor((c(a) - r - g.lo[a]) / g.side[a]);
    const double f1 = std::floor((c(a) + r - g.lo[a]) / g.side[a]);
    const double top = static_cast<double>(g.shape[a] - 1);
    if (f1 < 0.0 || f0 > top) return;
    lo[a] = static_cast<std::size_t>(std::clamp(f0, 0.0, top));
    hi[a] = static_cast<std::size_t>(std::clamp(f1, 0.0, top));
  }
  ix = lo;
  while (true) {
    visit(ix);
    std::size_t a = 0;
    while (a < d) {
      if (ix[a] < hi[a]) {
        ++ix[a];
        break;
      }
      ix[a] = lo[a];
      ++a;
    }
    if (a == d) break;
  }
}

std::size_t cover_multiplicity(const std::vector<CoverBall>& cover, const Grid& g, std::size_t d) {
  if (cover.empty()) return 0;
  if (d == 1) {
    // Exact sweep over closed intervals.
    std::vector<std::pair<double, int>> events;
    for (const auto& b : cover) {
      events.emplace_back(b.center(0) - b.radius, +1);
      events.emplace_back(b.center(0) + b.radius, -1);
    }
    std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
      return a.first < b.first || (a.first == b.first && a.second > b.second);
    });
    int cur = 0, best = 0;
    for (const auto& e : events) {
      cur += e.second;
      best = std::max(best, cur);
    }
    return static_cast<std::size_t>(best);
  }
  // Higher dimensions: probe cell centres and ball centres.
  std::vector<std::size_t> hits(g.size(), 0);
  std::size_t best = 0;
  for (const auto& b : cover) {
    for_cells_near(g, b.center, b.radius, [&](const std::vector<std::size_t>& ix) {
      const std::size_t idx = g.flatten(ix);
      if ((g.center(idx) - b.center).norm() <= b.radius) best = std::max(best, ++hits[idx]);
    });
  }
  for (const auto& p : cover) {
    std::size_t k = 0;
    for (const auto& b : cover) k += (p.center - b.center).norm() <= b.radius ? 1 : 0;
    best = std::max(best, k);
  }
  return best;
}

}  // namespace

ArcMap assemble_arc_map(const FlowParams& params, const Box& box, double spacing,
                        const std::vector<bool>& raw_minor, const std::vector<double>& lambda_top) {
  const double radius = params.eps * std::exp(-params.t / 2.0);
  if (!(spacing > 0.0)) throw InvalidArgument("arc map: spacing must be positive");
  if (spacing > radius * (1.0 + 1e-12))
    throw InvalidArgument("arc map: spacing " + format_double(spacing) + " exceeds eps e^{-t/2} = " +
                          format_double(radius));
  const Grid g = make_grid(box, spacing);
  if (raw_minor.size() != g.size()) throw InvalidArgument("arc map: label count does not match grid");
  if (!lambda_top.empty() && lambda_top.size() != g.size())
    throw InvalidArgument("arc map: lambda count does not match grid");

  ArcMap map;
  map.params = params;
  map.box = box;
  map.spacing = spacing;
  map.shape = g.shape;
  map.cell_side = g.side;
  map.radius = radius;
  map.threshold = params.phi * std::exp(params.h);
  map.cells.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    map.cells[i].center = g.center(i);
    map.cells[i].label = raw_minor[i] ? ArcLabel::RawMinor : ArcLabel::Major;
    map.cells[i].lambda_top = lambda_top.empty() ? 0.0 : lambda_top[i];
  }
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!raw_minor[i]) continue;
    const Vec& c = map.cells[i].center;
    for_cells_near(g, c, radius, [&](const std::vector<std::size_t>& ix) {
      const std::size_t j = g.flatten(ix);
      if (map.cells[j].label == ArcLabel::Major && (map.cells[j].center - c).squaredNorm() <= r2)
        map.cells[j].label = ArcLabel::EnlargedMinor;
    });
  }
  // Greedy cover: raw-minor centres in grid order, each kept only if it is
  // farther than the radius from every centre kept so far.
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!raw_minor[i]) continue;
    const Vec& c = map.cells[i].center;
    bool covered = false;
    for (const auto& b : map.cover) {
      if ((b.center - c).squaredNorm() <= r2) {
        covered = true;
        break;
      }
    }
    if (!covered) map.cover.push_back({c, radius});
  }
  map.multiplicity = cover_multiplicity(map.cover, g, box.dim());
  return map;
}

ArcMap build_arc_map(const ManifoldChart& chart, const FlowParams& params, const Box& box, double spacing,
                     unsigned workers, const EnumerationBudget& budget) {
  if (box.dim() != chart.d()) throw InvalidArgument("arc map: box dimension does not match chart");
  if (!chart.domain().contains(box, 1e-12)) throw InvalidArgument("arc map: box must lie in the chart domain");
  const double radius = params.eps * std::exp(-params.t / 2.0);
  if (!(spacing > 0.0) || spacing > radius * (1.0 + 1e-12))
    throw InvalidArgument("arc map: spacing must lie in (0, eps e^{-t/2}]");
  const Grid g = make_grid(box, spacing);
  std::vector<char> raw(g.size(), 0);
  std::vector<double> lam(g.size(), 0.0);
  parallel_for(g.size(), resolve_workers(workers), [&](std::size_t i) {
    const PointClass pc = classify_point(chart, params, g.center(i), budget);
    raw[i] = pc.label == ArcLabel::RawMinor;
    lam[i] = pc.lambda_top;
  });
  return assemble_arc_map(params, box, spacing, std::vector<bool>(raw.begin(), raw.end()), lam);
}

MeasureInterval estimate_minor_measure(const ArcMap& map) {
  Grid g{map.shape, map.cell_side, map.box.lo};
  std::vector<char> inside(g.size(), 0), touching(g.size(), 0);
  const double r2 = map.radius * map.radius;
  for (std::size_t i = 0; i < map.cells.size(); ++i) {
    if (map.cells[i].label != ArcLabel::RawMinor) continue;
    const Vec& c = map.cells[i].center;
    for_cells_near(g, c, map.radius, [&](const std::vector<std::size_t>& ix) {
      const std::size_t j = g.flatten(ix);
      double near2, far2;
      cell_distances(g, ix, c, near2, far2);
      if (near2 <= r2) touching[j] = 1;
      if (far2 <= r2) inside[j] = 1;
    });
  }
  const double cv = map.cell_volume();
  MeasureInterval out;
  for (std::size_t j = 0; j < g.size(); ++j) {
    out.lo += inside[j] ? cv : 0.0;
    out.hi += touching[j] ? cv : 0.0;
  }
  return out;
}

double minor_alpha(std::size_t n, std::size_t d, int l) {
  if (n == 0 || d == 0 || l < 1) throw InvalidArgument("minor_alpha: need n, d, l >= 1");
  return 1.0 / (static_cast<double>(d) * (2.0 * l - 1.0) * static_cast<double>(n + 1));
}

double fit_minor_constant(const std::vector<DecaySample>& samples, std::size_t n, std::size_t d, int l) {
  const double alpha = minor_alpha(n, d, l);
  double best = 0.0;
  for (const auto& s : samples) {
    const double scale = std::pow(std::pow(s.eps, static_cast<double>(n)) * std::exp(1.5 * s.t), alpha);
    best = std::max(best, s.hi * scale);
  }
  return best;
}

RefinementCheck refinement_check(const ManifoldChart& chart, const FlowParams& params, const Box& box,
                                 double spacing, unsigned workers) {
  const ArcMap coarse = build_arc_map(chart, params, box, spacing, workers);
  const ArcMap fine = build_arc_map(chart, params, box, spacing / 2.0, workers);
  RefinementCheck out;
  out.hi = estimate_minor_measure(coarse).hi;
  out.hi_half = estimate_minor_measure(fine).hi;
  out.delta = std::abs(out.hi - out.hi_half);
  out.tolerance = 2.0 * coarse.cell_volume();
  return out;
}

// -- Non-divergence witnesses ----------------------------------------------------

namespace {

double factorial(std::size_t k) {
  double f = 1.0;
  for (std::size_t i = 2; i <= k; ++i) f *= static_cast<double>(i);
  return f;
}

constexpr double kAuditSlack = 1e-9;

}  // namespace

BkmParams BkmParams::from_flow(const ManifoldChart& chart, const FlowParams& params) {
  const double n = static_cast<double>(chart.n());
  BkmParams p;
  p.c2 = std::pow(factorial(chart.n() + 1), 2);
  p.c3 = p.c2 * (1.0 + n + n * n * n * chart.deriv_bound());
  p.delta = p.c3 * std::exp(-params.t);
  p.K = p.c3 / params.eps * std::exp(-params.t / 2.0);
  p.T = p.c3 / params.eps;
  return p;
}

bool BkmParams::regime_ok(std::size_t n) const {
  const double nn = static_cast<double>(n);
  return delta <= 1.0 && T >= 1.0 && std::pow(delta, nn) < K * std::pow(T, nn - 1.0);
}

namespace {

void witness_quantities(const ManifoldChart& chart, const Vec& x, long long a0, const std::vector<long long>& a,
                        BkmWitness& w) {
  const Vec f = chart.evaluate(x);
  const Mat J = chart.jacobian(x);
  const std::size_t d = chart.d();
  double lin = static_cast<double>(a0);
  long long height = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    lin += f(static_cast<Eigen::Index>(i)) * static_cast<double>(a[i]);
    height = std::max(height, a[i] < 0 ? -a[i] : a[i]);
  }
  double grad = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double g = static_cast<double>(a[j]);
    for (std::size_t k = 0; k < chart.m(); ++k)
      g += J(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) * static_cast<double>(a[d + k]);
    grad = std::max(grad, std::abs(g));
  }
  w.a0 = a0;
  w.a = a;
  w.linear_form = std::abs(lin);
  w.gradient = grad;
  w.height = height;
}

bool satisfies(const BkmWitness& w, const BkmParams& bkm) {
  return w.height > 0 && w.linear_form < bkm.delta && w.gradient < bkm.K &&
         static_cast<double>(w.height) < bkm.T;
}

}  // namespace

bool bkm_check(const ManifoldChart& chart, const Vec& x, const BkmParams& bkm, long long a0,
               const std::vector<long long>& a, BkmWitness* out) {
  if (a.size() != chart.n()) throw InvalidArgument("bkm_check: a must have n entries");
  BkmWitness w;
  witness_quantities(chart, x, a0, a, w);
  if (out) *out = w;
  return satisfies(w, bkm);
}

std::optional<BkmWitness> bkm_witness(const ManifoldChart& chart, const Vec& x, const BkmParams& bkm,
                                      std::uint64_t max_points) {
  const std::size_t n = chart.n();
  const Vec f = chart.evaluate(x);
  std::uint64_t visited = 0;
  std::vector<long long> a(n);
  BkmWitness w;
  // Shell ||a||_inf = h, split by the first index k with |a_k| = h.
  for (long long h = 1; static_cast<double>(h) < bkm.T; ++h) {
    for (std::size_t k = 0; k < n; ++k) {
      for (long long sk : {h, -h}) {
        // Odometer: indices < k range over [-(h-1), h-1], indices > k over [-h, h].
        for (std::size_t i = 0; i < n; ++i) a[i] = i < k ? -(h - 1) : -h;
        a[k] = sk;
        while (true) {
          if (++visited > max_points)
            throw BudgetExceeded("bkm_witness: searched " + std::to_string(max_points) + " candidates");
          double dot = 0.0;
          for (std::size_t i = 0; i < n; ++i) dot += f(static_cast<Eigen::Index>(i)) * static_cast<double>(a[i]);
          const auto a0 = static_cast<long long>(-std::llround(dot));
          witness_quantities(chart, x, a0, a, w);
          if (satisfies(w, bkm)) return w;
          std::size_t i = 0;
          for (; i < n; ++i) {
            if (i == k) continue;
            const long long top = i < k ? h - 1 : h;
            if (a[i] < top) {
              ++a[i];
              break;
            }
            a[i] = i < k ? -(h - 1) : -h;
          }
          if (i == n) break;
        }
      }
    }
  }
  return std::nullopt;
}

AuditReport inclusion_audit(const ManifoldChart& chart, const FlowParams& params, const ArcMap& map,
                            const EnumerationBudget& budget) {
  if (map.params.eps != params.eps || map.params.t != params.t || map.params.dims.n != params.dims.n)
    throw InvalidArgument("inclusion_audit: arc map was built with different parameters");
  const std::size_t n = chart.n();
  const std::size_t d = chart.d();
  AuditReport rep;
  rep.bkm = BkmParams::from_flow(chart, params);
  rep.c2 = rep.bkm.c2;
  rep.c3 = rep.bkm.c3;
  rep.t0 = std::log(rep.c3);
  rep.regime_ok = params.t >= rep.t0 && rep.bkm.regime_ok(n);

  const double mahler_bound = rep.c2 / (params.phi * std::exp(params.h));
  const double lin_bound = rep.c2 * std::exp(-params.t);
  const double grad_bound = rep.c2 / params.eps * std::exp(-params.t / 2.0);
  const double rest_bound = rep.c2 / params.eps;
  const double slack = 1.0 + kAuditSlack;

  auto record = [&](const Vec& x, std::string reason) {
    if (rep.violations.size() < 100) rep.violations.push_back({x, std::move(reason)});
  };

  // Witness per raw-minor cell, reused for the enlarged cells around it.
  std::vector<std::optional<BkmWitness>> witness(map.cells.size());
  for (std::size_t i = 0; i < map.cells.size(); ++i) {
    const ArcCell& cell = map.cells[i];
    if (cell.label != ArcLabel::RawMinor) continue;
    ++rep.raw_minor_points;
    const Vec& x = cell.center;

    const LatticeBasis dual(flowed_dual_basis(chart, params, x));
    const MinimaReport shortest = successive_minima(dual, budget, 1);
    const double lambda1 = shortest.values.front();
    rep.max_mahler_ratio = std::max(rep.max_mahler_ratio, lambda1 / mahler_bound);
    if (lambda1 > mahler_bound * slack) {
      ++rep.mahler_violations;
      record(x, "mahler step: lambda_1 of the dual lattice exceeds c2 phi^-1 e^-h");
    }

    // Coefficients c of the short dual vector give a0 = c_0, a = -c_{1..n}.
    const IVec& c = shortest.coefficients.front();
    const long long a0 = c(0);
    std::vector<long long> a(n);
    for (std::size_t k = 0; k < n; ++k) a[k] = -c(static_cast<Eigen::Index>(k + 1));
    BkmWitness cand;
    bkm_check(chart, x, rep.bkm, a0, a, &cand);
    long long rest = 0;
    for (std::size_t k = d; k < n; ++k) rest = std::max(rest, a[k] < 0 ? -a[k] : a[k]);
    const bool system_ok = cand.linear_form <= lin_bound * slack && cand.gradient <= grad_bound * slack &&
                           static_cast<double>(rest) <= rest_bound * slack;
    if (!system_ok) {
      ++rep.system_violations;
      record(x, "integer system read off the short dual vector fails its bounds");
    }

    if (satisfies(cand, rep.bkm)) {
      ++rep.dual_candidates_used;
      witness[i] = cand;
    } else {
      witness[i] = bkm_witness(chart, x, rep.bkm);
    }
    if (!witness[i]) {
      ++rep.bkm_violations;
      record(x, "no witness in S_f(delta, K, T)");
    }
  }

  const double r2 = map.radius * map.radius;
  for (std::size_t j = 0; j < map.cells.size(); ++j) {
    const ArcCell& cell = map.cells[j];
    if (cell.label != ArcLabel::EnlargedMinor) continue;
    ++rep.enlarged_points;
    // Nearest raw-minor centre; ties resolved by grid order.
    std::size_t best = map.cells.size();
    double best2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < map.cells.size(); ++i) {
      if (map.cells[i].label != ArcLabel::RawMinor) continue;
      const double dist2 = (map.cells[i].center - cell.center).squaredNorm();
      if (dist2 < best2) {
        best2 = dist2;
        best = i;
      }
    }
    bool ok = false;
    if (best < map.cells.size() && best2 <= r2 * slack && witness[best])
      ok = bkm_check(chart, cell.center, rep.bkm, witness[best]->a0, witness[best]->a);
    if (!ok) ok = bkm_witness(chart, cell.center, rep.bkm).has_value();
    if (!ok) {
      ++rep.enlarged_violations;
      record(cell.center, "enlarged cell has no witness in S_f(delta, K, T)");
    }
  }
  return rep;
}

// -- Serialisation ---------------------------------------------------------------

nlohmann::ordered_json summary_json(const ArcMap& map, const MeasureInterval& measure) {
  nlohmann::ordered_json j;
  j["eps"] = map.params.eps;
  j["t"] = map.params.t;
  j["phi"] = map.params.phi;
  j["h"] = map.params.h;
  j["box"] = {{"lo", map.box.lo}, {"hi", map.box.hi}};
  j["spacing"] = map.spacing;
  j["shape"] = map.shape;
  j["cell_side"] = map.cell_side;
  j["radius"] = map.radius;
  j["threshold"] = map.threshold;
  j["cells"] = map.cells.size();
  j["raw_minor"] = map.count(ArcLabel::RawMinor);
  j["enlarged_minor"] = map.count(ArcLabel::EnlargedMinor);
  j["major"] = map.count(ArcLabel::Major);
  j["cover_balls"] = map.cover.size();
  j["multiplicity"] = map.multiplicity;
  j["multiplicity_bound"] = 1u << map.box.dim();
  j["multiplicity_exact"] = map.box.dim() == 1;
  j["measure"] = {{"lo", measure.lo}, {"hi", measure.hi}};
  j["volume"] = map.box.volume();
  j["norms"] =
      "cells are sup-norm boxes, balls are Euclidean; a cell counts towards lo when its farthest corner "
      "is within the radius and towards hi when its nearest point is";
  return j;
}

nlohmann::ordered_json to_json(const AuditReport& r) {
  nlohmann::ordered_json j;
  j["raw_minor_points"] = r.raw_minor_points;
  j["enlarged_points"] = r.enlarged_points;
  j["mahler_violations"] = r.mahler_violations;
  j["system_violations"] = r.system_violations;
  j["bkm_violations"] = r.bkm_violations;
  j["enlarged_violations"] = r.enlarged_violations;
  j["dual_candidates_used"] = r.dual_candidates_used;
  j["max_mahler_ratio"] = r.max_mahler_ratio;
  j["c2"] = r.c2;
  j["c3"] = r.c3;
  j["t0"] = r.t0;
  j["regime_ok"] = r.regime_ok;
  j["delta"] = r.bkm.delta;
  j["K"] = r.bkm.K;
  j["T"] = r.bkm.T;
  j["clean"] = r.clean();
  auto v = nlohmann::ordered_json::array();
  for (const auto& e : r.violations) {
    std::vector<double> x(e.x.data(), e.x.data() + e.x.size());
    v.push_back({{"x", x}, {"reason", e.reason}});
  }
  j["violations"] = v;
  return j;
}

void write_csv(std::ostream& os, std::size_t d, const std::vector<const ArcMap*>& maps) {
  std::vector<std::string> cols{"t", "eps"};
  for (std::size_t a = 0; a < d; ++a) cols.push_back("x" + std::to_string(a + 1));
  cols.insert(cols.end(), {"label", "lambda_top", "threshold"});
  write_csv_header(os,
                   "dioph arcs v" + std::to_string(kSchemaVersion) +
                       ": t, eps, cell centre, label (raw_minor|enlarged_minor|major), lambda_{n+1} of "
                       "b_t g_t zu(x), threshold phi e^h",
                   cols);
  for (const ArcMap* map : maps) {
    const std::string lead = format_double(map->params.t) + "," + format_double(map->params.eps) + ",";
    const std::string thr = format_double(map->threshold);
    for (const auto& c : map->cells) {
      os << lead;
      for (Eigen::Index a = 0; a < c.center.size(); ++a) os << format_double(c.center(a)) << ',';
      os << to_string(c.label) << ',' << format_double(c.lambda_top) << ',' << thr << '\n';
    }
  }
}

}  // namespace dioph
