#include "counting.hpp"

#include "errors.hpp"
#include "parallel.hpp"
#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dioph {

const char* to_string(Membership m) {
  switch (m) {
    case Membership::In: return "in";
    case Membership::Uncertain: return "uncertain";
    case Membership::Out: return "out";
  }
  return "?";
}

const char* to_string(ArcSide s) {
  switch (s) {
    case ArcSide::Major: return "major";
    case ArcSide::Minor: return "minor";
    case ArcSide::Mixed: return "mixed";
  }
  return "?";
}

namespace {

struct Cell {
  std::vector<double> lo;
  std::vector<double> side;
  double lower = 0.0;
};

// Certified branch and bound for inf over a window of ||f(x) - y||_inf.
class TubeProbe {
 public:
  TubeProbe(const ManifoldChart& chart, double thr, std::size_t max_cells)
      : chart_(chart), thr_(thr), L_(chart.lipschitz()), max_cells_(max_cells), d_(chart.d()) {}

  RationalWitness run(const std::vector<long long>& p, long long q, const Box& window) const {
    RationalWitness w;
    w.p = p;
    w.q = q;
    const Vec y = target(p, q);
    const double guard = 1e-13 * std::max(1.0, y.cwiseAbs().maxCoeff());

    best_ = std::numeric_limits<double>::infinity();
    // Whole-window rejection before gridding.
    {
      Cell all{window.lo, side_of(window), 0.0};
      evaluate(all, y, w);
      if (all.lower - guard >= thr_) return finish(w, {}, Membership::Out);
    }

    const double s0 = thr_ / (8.0 * L_);
    std::vector<std::size_t> k(d_);
    std::size_t total = 1;
    for (std::size_t a = 0; a < d_; ++a) {
      k[a] = static_cast<std::size_t>(std::max(1.0, std::ceil(window.side(a) / s0)));
      total *= k[a];
    }
    if (total > max_cells_) throw BudgetExceeded("enumerate_tube: window grid too large at q=" + std::to_string(q));

    std::vector<Cell> live;
    std::vector<std::size_t> ix(d_, 0);
    for (std::size_t c = 0; c < total; ++c) {
      Cell cell;
      cell.lo.resize(d_);
      cell.side.resize(d_);
      for (std::size_t a = 0; a < d_; ++a) {
        cell.side[a] = window.side(a) / static_cast<double>(k[a]);
        cell.lo[a] = window.lo[a] + static_cast<double>(ix[a]) * cell.side[a];
      }
      evaluate(cell, y, w);
      if (cell.lower - guard < thr_) live.push_back(std::move(cell));
      for (std::size_t a = 0; a < d_; ++a) {
        if (++ix[a] < k[a]) break;
        ix[a] = 0;
      }
    }

    const double min_side = 1e-12 * std::max(1.0, window.side(0));
    std::size_t evaluated = total;
    while (true) {
      if (best_ + guard < thr_) return finish(w, live, Membership::In);
      if (live.empty()) return finish(w, live, Membership::Out);
      double widest = 0.0;
      for (const auto& c : live) widest = std::max(widest, *std::max_element(c.side.begin(), c.side.end()));
      const std::size_t children = live.size() << d_;
      if (widest < min_side || evaluated + children > max_cells_) return finish(w, live, Membership::Uncertain);
      std::vector<Cell> next;
      for (const auto& c : live) {
        for (std::size_t mask = 0; mask < (std::size_t{1} << d_); ++mask) {
          Cell child;
          child.lo = c.lo;
          child.side = c.side;
          for (std::size_t a = 0; a < d_; ++a) {
            child.side[a] = c.side[a] / 2.0;
            if (mask >> a & 1) child.lo[a] += child.side[a];
          }
          evaluate(child, y, w);
          if (child.lower - guard < thr_) next.push_back(std::move(child));
        }
      }
      evaluated += children;
      live = std::move(next);
    }
  }

 private:
  static Vec target(const std::vector<long long>& p, long long q) {
    Vec y(static_cast<Eigen::Index>(p.size()));
    for (std::size_t i = 0; i < p.size(); ++i)
      y(static_cast<Eigen::Index>(i)) = static_cast<double>(p[i]) / static_cast<double>(q);
    return y;
  }

  std::vector<double> side_of(const Box& b) const {
    std::vector<double> s(d_);
    for (std::size_t a = 0; a < d_; ++a) s[a] = b.side(a);
    return s;
  }

  void evaluate(Cell& cell, const Vec& y, RationalWitness& w) const {
    Vec c(static_cast<Eigen::Index>(d_));
    double rho2 = 0.0;
    for (std::size_t a = 0; a < d_; ++a) {
      c(static_cast<Eigen::Index>(a)) = cell.lo[a] + cell.side[a] / 2.0;
      rho2 += cell.side[a] * cell.side[a] / 4.0;
    }
    const double dist = (chart_.evaluate_unchecked(c) - y).cwiseAbs().maxCoeff();
    cell.lower = dist - L_ * std::sqrt(rho2);
    if (dist < best_) {
      best_ = dist;
      w.best_x = c;
    }
  }

  RationalWitness& finish(RationalWitness& w, const std::vector<Cell>& live, Membership status) const {
    w.status = status;
    w.dist_hi = best_;
    double lo = thr_;
    std::vector<double> blo(d_, std::numeric_limits<double>::infinity());
    std::vector<double> bhi(d_, -std::numeric_limits<double>::infinity());
    for (const auto& c : live) {
      lo = std::min(lo, c.lower);
      for (std::size_t a = 0; a < d_; ++a) {
        blo[a] = std::min(blo[a], c.lo[a]);
        bhi[a] = std::max(bhi[a], c.lo[a] + c.side[a]);
      }
    }
    w.dist_lo = std::max(0.0, std::min(lo, best_));
    if (!live.empty()) w.bracket = Box(blo, bhi);
    return w;
  }

  const ManifoldChart& chart_;
  double thr_;
  double L_;
  std::size_t max_cells_;
  std::size_t d_;
  mutable double best_ = 0.0;
};

// Certified range of each f_i over the box: sampled extremes widened by the
// Lipschitz slack of the sampling cell.
void coordinate_ranges(const ManifoldChart& chart, const Box& box, std::vector<double>& lo,
                       std::vector<double>& hi) {
  const std::size_t d = chart.d(), n = chart.n();
  lo.assign(n, std::numeric_limits<double>::infinity());
  hi.assign(n, -std::numeric_limits<double>::infinity());
  for (std::size_t a = 0; a < d; ++a) {
    lo[a] = box.lo[a];
    hi[a] = box.hi[a];
  }
  const auto per = static_cast<std::size_t>(std::max(2.0, std::floor(std::pow(4096.0, 1.0 / static_cast<double>(d)))));
  std::size_t total = 1;
  for (std::size_t a = 0; a < d; ++a) total *= per;
  double rho2 = 0.0;
  for (std::size_t a = 0; a < d; ++a) rho2 += std::pow(box.side(a) / static_cast<double>(per) / 2.0, 2);
  const double slack = chart.lipschitz() * std::sqrt(rho2);
  std::vector<std::size_t> ix(d, 0);
  Vec x(static_cast<Eigen::Index>(d));
  for (std::size_t c = 0; c < total; ++c) {
    for (std::size_t a = 0; a < d; ++a)
      x(static_cast<Eigen::Index>(a)) = box.lo[a] + (static_cast<double>(ix[a]) + 0.5) * box.side(a) / static_cast<double>(per);
    const Vec f = chart.evaluate_unchecked(x);
    for (std::size_t i = d; i < n; ++i) {
      lo[i] = std::min(lo[i], f(static_cast<Eigen::Index>(i)) - slack);
      hi[i] = std::max(hi[i], f(static_cast<Eigen::Index>(i)) + slack);
    }
    for (std::size_t a = 0; a < d; ++a) {
      if (++ix[a] < per) break;
      ix[a] = 0;
    }
  }
}

// Odometer over integer ranges [lo_i, hi_i]; returns false when exhausted.
bool advance(std::vector<long long>& v, const std::vector<long long>& lo, const std::vector<long long>& hi,
             std::size_t from, std::size_t to) {
  for (std::size_t i = from; i < to; ++i) {
    if (v[i] < hi[i]) {
      ++v[i];
      return true;
    }
    v[i] = lo[i];
  }
  return false;
}

bool witness_less(const RationalWitness& a, const RationalWitness& b) {
  if (a.q != b.q) return a.q < b.q;
  return a.p < b.p;
}

}  // namespace

TubeResult enumerate_tube(const ManifoldChart& chart, const Box& box, double eps, double t, unsigned workers,
                          const TubeBudget& budget) {
  if (!(eps > 0.0) || !(t > 0.0)) throw InvalidArgument("enumerate_tube: need eps > 0 and t > 0");
  if (box.dim() != chart.d()) throw InvalidArgument("enumerate_tube: box dimension does not match chart");
  if (!chart.domain().contains(box, 1e-12)) throw InvalidArgument("enumerate_tube: box must lie in the chart domain");
  const double et = std::exp(t);
  if (std::ceil(et) > budget.max_q)
    throw BudgetExceeded("enumerate_tube: ceil(e^t) = " + format_double(std::ceil(et)) + " exceeds the q budget");
  const double thr = eps / et;
  const std::size_t d = chart.d(), n = chart.n();
  auto q_max = static_cast<long long>(std::ceil(et)) - 1;
  while (q_max >= 1 && static_cast<double>(q_max) >= et) --q_max;

  std::vector<double> flo, fhi;
  coordinate_ranges(chart, box, flo, fhi);

  std::vector<std::vector<RationalWitness>> per_q(static_cast<std::size_t>(std::max(0LL, q_max)));
  std::vector<std::size_t> examined(per_q.size(), 0);
  parallel_for(per_q.size(), resolve_workers(workers), [&](std::size_t slot) {
    const TubeProbe probe(chart, thr, budget.max_cells_per_candidate);  // one per task: holds scratch state
    const long long q = static_cast<long long>(slot) + 1;
    const auto qd = static_cast<double>(q);
    double nominal = 1.0;
    std::vector<long long> plo(n), phi(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = std::floor(qd * (flo[i] - thr)), b = std::ceil(qd * (fhi[i] + thr));
      nominal *= b - a + 1.0;
      plo[i] = static_cast<long long>(a);
      phi[i] = static_cast<long long>(b);
    }
    if (nominal > budget.max_candidates_per_q)
      throw BudgetExceeded("enumerate_tube: candidate box of " + format_double(nominal) + " points at q=" +
                           std::to_string(q));
    std::vector<long long> p(n);
    for (std::size_t i = 0; i < d; ++i) p[i] = plo[i];
    do {
      std::vector<double> wlo(d), whi(d);
      bool empty = false;
      for (std::size_t a = 0; a < d; ++a) {
        const double c = static_cast<double>(p[a]) / qd;
        wlo[a] = std::max(box.lo[a], c - thr);
        whi[a] = std::min(box.hi[a], c + thr);
        empty = empty || wlo[a] > whi[a];
      }
      if (empty) continue;
      const Box window(wlo, whi);
      // Graph coordinates reachable from the window.
      Vec c(static_cast<Eigen::Index>(d));
      double rho2 = 0.0;
      for (std::size_t a = 0; a < d; ++a) {
        c(static_cast<Eigen::Index>(a)) = (wlo[a] + whi[a]) / 2.0;
        rho2 += std::pow((whi[a] - wlo[a]) / 2.0, 2);
      }
      const Vec fc = chart.evaluate_unchecked(c);
      const double reach = chart.lipschitz() * std::sqrt(rho2) + thr;
      std::vector<long long> rlo(n), rhi(n);
      for (std::size_t i = d; i < n; ++i) {
        const double v = fc(static_cast<Eigen::Index>(i));
        rlo[i] = static_cast<long long>(std::floor(qd * (v - reach)));
        rhi[i] = static_cast<long long>(std::ceil(qd * (v + reach)));
      }
      for (std::size_t i = d; i < n; ++i) p[i] = rlo[i];
      do {
        ++examined[slot];
        RationalWitness w = probe.run(p, q, window);
        if (w.status != Membership::Out) per_q[slot].push_back(std::move(w));
      } while (advance(p, rlo, rhi, d, n));
    } while (advance(p, plo, phi, 0, d));
  });

  TubeResult out;
  out.threshold = thr;
  for (std::size_t s = 0; s < per_q.size(); ++s) {
    out.candidates += examined[s];
    for (auto& w : per_q[s]) out.witnesses.push_back(std::move(w));
  }
  std::sort(out.witnesses.begin(), out.witnesses.end(), witness_less);
  for (const auto& w : out.witnesses) {
    if (w.status == Membership::In) ++out.n_lo;
    if (w.status == Membership::Uncertain) ++out.uncertain;
  }
  out.n_hi = out.n_lo + out.uncertain;
  return out;
}

CountReport count_split(const ManifoldChart& chart, const FlowParams& params, const Box& box, const ArcMap& map,
                        unsigned workers, const TubeBudget& budget) {
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); };
  if (!close(map.params.eps, params.eps) || !close(map.params.t, params.t) || map.params.dims.n != chart.n() ||
      map.params.dims.d != chart.d())
    throw InvalidArgument("count_split: arc map parameters do not match");
  if (!map.box.contains(box, 1e-12)) throw InvalidArgument("count_split: arc map does not cover the box");

  TubeResult tube = enumerate_tube(chart, box, params.eps, params.t, workers, budget);
  CountReport rep;
  rep.eps = params.eps;
  rep.t = params.t;
  rep.n_lo = tube.n_lo;
  rep.n_hi = tube.n_hi;
  rep.uncertain = tube.uncertain;
  rep.volume = box.volume();
  rep.main_term = std::pow(params.eps, static_cast<double>(chart.m())) *
                  std::exp(static_cast<double>(chart.d() + 1) * params.t) * rep.volume;

  const std::size_t d = chart.d();
  for (const auto& w : tube.witnesses) {
    std::vector<std::size_t> lo(d), hi(d), ix(d);
    for (std::size_t a = 0; a < d; ++a) {
      const double top = static_cast<double>(map.shape[a] - 1);
      lo[a] = static_cast<std::size_t>(
          std::clamp(std::floor((w.bracket.lo[a] - map.box.lo[a]) / map.cell_side[a]), 0.0, top));
      hi[a] = static_cast<std::size_t>(
          std::clamp(std::floor((w.bracket.hi[a] - map.box.lo[a]) / map.cell_side[a]), 0.0, top));
    }
    bool major = false, minor = false;
    ix = lo;
    while (true) {
      std::size_t idx = 0;
      for (std::size_t a = d; a-- > 0;) idx = idx * map.shape[a] + ix[a];
      (map.cells[idx].label == ArcLabel::Major ? major : minor) = true;
      std::size_t a = 0;
      for (; a < d; ++a) {
        if (ix[a] < hi[a]) {
          ++ix[a];
          break;
        }
        ix[a] = lo[a];
      }
      if (a == d) break;
    }
    rep.sides.push_back(!minor ? ArcSide::Major : (!major ? ArcSide::Minor : ArcSide::Mixed));
    if (major) ++rep.n_major_hi;
    if (!minor && w.status == Membership::In) ++rep.n_major_lo;
  }
  rep.ratio = rep.main_term > 0.0 ? static_cast<double>(rep.n_major_hi) / rep.main_term : 0.0;
  rep.witnesses = std::move(tube.witnesses);
  return rep;
}

CubeCover cube_cover(const Box& box, double eps, double t) {
  if (box.dim() == 0) throw InvalidArgument("cube_cover: empty box");
  for (std::size_t a = 0; a < box.dim(); ++a)
    if (!(box.side(a) > 0.0)) throw InvalidArgument("cube_cover: degenerate box");
  if (!(eps > 0.0)) throw InvalidArgument("cube_cover: eps must be positive");
  CubeCover out;
  out.side = std::sqrt(eps * std::exp(-t));
  if (out.side > box.min_side() * (1.0 + 1e-12))
    throw InvalidArgument("cube_cover: cube side exceeds the box side");
  const std::size_t d = box.dim();
  std::vector<std::size_t> k(d);
  double total = 1.0;
  for (std::size_t a = 0; a < d; ++a) {
    k[a] = static_cast<std::size_t>(std::max(1.0, std::ceil(box.side(a) / out.side - 1e-9)));
    total *= static_cast<double>(k[a]);
  }
  if (total > 1e7) throw BudgetExceeded("cube_cover: more than 1e7 cubes");
  std::vector<std::size_t> ix(d, 0);
  for (std::size_t c = 0; c < static_cast<std::size_t>(total); ++c) {
    std::vector<double> lo(d), hi(d);
    for (std::size_t a = 0; a < d; ++a) {
      lo[a] = box.lo[a] + static_cast<double>(ix[a]) * out.side;
      hi[a] = lo[a] + out.side;
    }
    out.cubes.emplace_back(lo, hi);
    for (std::size_t a = 0; a < d; ++a) {
      if (++ix[a] < k[a]) break;
      ix[a] = 0;
    }
  }
  out.bound = 2.0 * std::pow(eps * std::exp(-t), -static_cast<double>(d) / 2.0) * box.volume();
  return out;
}

CubeCount per_cube_check(const ManifoldChart& chart, const FlowParams& params, const Box& cube, const Box& box,
                         const ArcMap* map, unsigned workers, const TubeBudget& budget) {
  const Vec x0 = cube.center();
  ArcLabel label;
  if (map) {
    if (!map->box.contains(x0)) throw InvalidArgument("per_cube_check: cube centre outside the arc map");
    std::size_t idx = 0;
    for (std::size_t a = map->shape.size(); a-- > 0;) {
      const double top = static_cast<double>(map->shape[a] - 1);
      const auto i = static_cast<std::size_t>(
          std::clamp(std::floor((x0(static_cast<Eigen::Index>(a)) - map->box.lo[a]) / map->cell_side[a]), 0.0, top));
      idx = idx * map->shape[a] + i;
    }
    label = map->cells[idx].label;
  } else {
    label = classify_point(chart, params, x0).label;
  }
  if (label != ArcLabel::Major) throw InvalidArgument("per_cube_check: cube centre is not a major-arc point");

  CubeCount out;
  out.center = x0;
  const double d = static_cast<double>(chart.d());
  out.bound = std::pow(params.eps, static_cast<double>(chart.n())) * std::exp(params.t) *
              std::pow(params.eps * std::exp(-params.t), -d / 2.0);
  std::vector<double> lo(chart.d()), hi(chart.d());
  bool empty = false;
  for (std::size_t a = 0; a < chart.d(); ++a) {
    lo[a] = std::max(cube.lo[a], box.lo[a]);
    hi[a] = std::min(cube.hi[a], box.hi[a]);
    empty = empty || lo[a] >= hi[a];
  }
  if (!empty) {
    const TubeResult tube = enumerate_tube(chart, Box(lo, hi), params.eps, params.t, workers, budget);
    out.n_lo = tube.n_lo;
    out.n_hi = tube.n_hi;
  }
  out.ratio = static_cast<double>(out.n_hi) / out.bound;
  return out;
}

double flowed_witness_norm(const ManifoldChart& chart, const FlowParams& params, const Vec& x,
                    const std::vector<long long>& p, long long q) {
  return (diagonal_flows(params).g * zu_product(chart, x) * embed_rational(p, q)).norm();
}

int bridge_time(long long q) {
  if (q < 1) throw InvalidArgument("bridge_time: q must be positive");
  const double qd = static_cast<double>(q);
  int t = static_cast<int>(std::floor(std::log(qd))) + 1;
  while (std::exp(static_cast<double>(t - 1)) > qd) --t;
  while (qd >= std::exp(static_cast<double>(t))) ++t;
  return t;
}

BridgeCheck bridge_check(const std::function<double(double)>& psi, const Vec& y, const std::vector<long long>& p,
                         long long q) {
  if (static_cast<std::size_t>(y.size()) != p.size()) throw InvalidArgument("bridge_check: size mismatch");
  BridgeCheck out;
  out.t = bridge_time(q);
  for (std::size_t i = 0; i < p.size(); ++i)
    out.distance = std::max(out.distance, std::abs(y(static_cast<Eigen::Index>(i)) -
                                                   static_cast<double>(p[i]) / static_cast<double>(q)));
  const double base = std::exp(static_cast<double>(out.t - 1));
  out.bound = psi(base) / base;
  out.holds = out.distance < out.bound;
  return out;
}

// -- Serialisation ---------------------------------------------------------------

namespace {

nlohmann::ordered_json witness_json(const RationalWitness& w) {
  nlohmann::ordered_json j;
  j["q"] = w.q;
  j["p"] = w.p;
  j["dist_lo"] = w.dist_lo;
  j["dist_hi"] = w.dist_hi;
  j["status"] = to_string(w.status);
  return j;
}

}  // namespace

nlohmann::ordered_json to_json(const TubeResult& r) {
  nlohmann::ordered_json j;
  j["threshold"] = r.threshold;
  j["n_lo"] = r.n_lo;
  j["n_hi"] = r.n_hi;
  j["uncertain"] = r.uncertain;
  j["candidates"] = r.candidates;
  j["uncertain_fraction"] = r.n_hi ? static_cast<double>(r.uncertain) / static_cast<double>(r.n_hi) : 0.0;
  auto ws = nlohmann::ordered_json::array();
  for (const auto& w : r.witnesses) ws.push_back(witness_json(w));
  j["witnesses"] = ws;
  return j;
}

nlohmann::ordered_json to_json(const CountReport& r) {
  nlohmann::ordered_json j;
  j["eps"] = r.eps;
  j["t"] = r.t;
  j["n_lo"] = r.n_lo;
  j["n_hi"] = r.n_hi;
  j["n_major_lo"] = r.n_major_lo;
  j["n_major_hi"] = r.n_major_hi;
  j["uncertain"] = r.uncertain;
  j["volume"] = r.volume;
  j["main_term"] = r.main_term;
  j["ratio"] = r.ratio;
  return j;
}

void write_witness_csv(std::ostream& os, std::size_t n, const std::vector<CountReport>& runs) {
  std::vector<std::string> cols{"t", "eps", "q"};
  for (std::size_t i = 0; i < n; ++i) cols.push_back("p" + std::to_string(i + 1));
  cols.insert(cols.end(), {"dist_lo", "dist_hi", "status", "arc"});
  write_csv_header(os,
                   "dioph witnesses v" + std::to_string(kSchemaVersion) +
                       ": t, eps, q, p_1..p_n, certified bracket on inf ||f(x) - p/q||_inf, "
                       "status (in|uncertain), arc side (major|minor|mixed)",
                   cols);
  for (const auto& run : runs) {
    const std::string lead = format_double(run.t) + "," + format_double(run.eps) + ",";
    for (std::size_t k = 0; k < run.witnesses.size(); ++k) {
      const auto& w = run.witnesses[k];
      os << lead << w.q;
      for (auto v : w.p) os << ',' << v;
      os << ',' << format_double(w.dist_lo) << ',' << format_double(w.dist_hi) << ',' << to_string(w.status) << ','
         << (k < run.sides.size() ? to_string(run.sides[k]) : "") << '\n';
    }
  }
}

}  // namespace dioph
