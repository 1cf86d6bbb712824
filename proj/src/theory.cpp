#include "theory.hpp"

#include "errors.hpp"
#include "parallel.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <regex>
#include <sstream>

namespace dioph {

namespace {

// Ties in exponent comparisons are decided exactly up to this relative
// slack, which absorbs rounding in the exponent algebra.
constexpr double kTie = 1e-12;

bool tie(double a, double b) { return std::abs(a - b) <= kTie * std::max({1.0, std::abs(a), std::abs(b)}); }

// Convergence of sum q^e (log q)^p (also sum_t e^{e t} t^p with critical 0).
Verdict power_log_verdict(double exponent, double critical, double log_power) {
  if (tie(exponent, critical)) return log_power < -1.0 && !tie(log_power, -1.0) ? Verdict::Converges : Verdict::Diverges;
  return exponent < critical ? Verdict::Converges : Verdict::Diverges;
}

}  // namespace

PowerLogPsi PowerLogPsi::make(double tau, double c, double beta) {
  if (!(tau >= 0.0)) throw InvalidArgument("psi: tau must be nonnegative");
  if (!(c > 0.0)) throw InvalidArgument("psi: scale c must be positive");
  if (!std::isfinite(beta)) throw InvalidArgument("psi: beta must be finite");
  return {tau, c, beta};
}

double PowerLogPsi::operator()(double q) const {
  if (!(q > 1.0)) throw InvalidArgument("psi: defined for q > 1");
  return c * std::pow(q, -tau) * std::pow(std::log(q), -beta);
}

SeriesQuery SeriesQuery::khintchine(std::size_t n) { return {SeriesKind::Khintchine, n, 0, 0.0, 0.0}; }
SeriesQuery SeriesQuery::hausdorff(std::size_t n, std::size_t d, double s) {
  return {SeriesKind::Hausdorff, n, d, s, 0.0};
}
SeriesQuery SeriesQuery::minor(std::size_t n, std::size_t d, double s, double alpha) {
  return {SeriesKind::Minor, n, d, s, alpha};
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Converges: return "converges";
    case Verdict::Diverges: return "diverges";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

void check_query(const SeriesQuery& q) {
  if (q.n == 0) throw InvalidArgument("series: n must be positive");
  if (q.kind != SeriesKind::Khintchine && (q.d == 0 || q.d >= q.n))
    throw InvalidArgument("series: need 1 <= d < n");
}

}  // namespace

SeriesResult classify_series(const PowerLogPsi& psi, const SeriesQuery& query) {
  check_query(query);
  const double n = static_cast<double>(query.n);
  const double m = static_cast<double>(query.n - query.d);
  const double d = static_cast<double>(query.d);
  SeriesResult r;
  r.rigorous = true;
  switch (query.kind) {
    case SeriesKind::Khintchine:
      r.exponent = -n * psi.tau;
      r.log_power = -n * psi.beta;
      r.verdict = power_log_verdict(r.exponent, -1.0, r.log_power);
      break;
    case SeriesKind::Hausdorff:
      // q^n (psi(q)/q)^{s+m}
      r.exponent = n - (psi.tau + 1.0) * (query.s + m);
      r.log_power = -psi.beta * (query.s + m);
      r.verdict = power_log_verdict(r.exponent, -1.0, r.log_power);
      break;
    case SeriesKind::Minor:
      // (psi(e^t)/e^{t/2})^{s-d} (psi(e^t)^n e^{3t/2})^{-alpha}, summed over t
      r.exponent = (-psi.tau - 0.5) * (query.s - d) - query.alpha * (-n * psi.tau + 1.5);
      r.log_power = -psi.beta * (query.s - d) + query.alpha * n * psi.beta;
      r.verdict = power_log_verdict(r.exponent, 0.0, r.log_power);
      break;
  }
  return r;
}

SeriesResult classify_series_heuristic(const std::function<double(double)>& psi, const SeriesQuery& query,
                                       double q_probe, double margin) {
  check_query(query);
  const double n = static_cast<double>(query.n);
  const double m = static_cast<double>(query.n - query.d);
  const double d = static_cast<double>(query.d);
  SeriesResult r;
  r.rigorous = false;
  auto log_term = [&](double q) {
    const double lp = std::log(psi(q));
    switch (query.kind) {
      case SeriesKind::Khintchine: return n * lp;
      case SeriesKind::Hausdorff: return n * std::log(q) + (query.s + m) * (lp - std::log(q));
      case SeriesKind::Minor: {
        const double t = std::log(q);
        return (query.s - d) * (lp - t / 2.0) - query.alpha * (n * lp + 1.5 * t);
      }
    }
    return 0.0;
  };
  double critical;
  if (query.kind == SeriesKind::Minor) {
    // Slope in t of the log summand; the series over t is critical at 0.
    r.exponent = log_term(q_probe * std::exp(1.0)) - log_term(q_probe);
    critical = 0.0;
  } else {
    r.exponent = (log_term(2.0 * q_probe) - log_term(q_probe)) / std::log(2.0);
    critical = -1.0;
  }
  if (!std::isfinite(r.exponent) || std::abs(r.exponent - critical) <= margin)
    r.verdict = Verdict::Inconclusive;
  else
    r.verdict = r.exponent < critical ? Verdict::Converges : Verdict::Diverges;
  return r;
}

CondensationResult condensation_equivalence(const PowerLogPsi& psi, std::size_t n) {
  if (n == 0) throw InvalidArgument("condensation: n must be positive");
  const double nn = static_cast<double>(n);
  CondensationResult r;
  r.direct = classify_series(psi, SeriesQuery::khintchine(n)).verdict;
  // psi(e^t)^n e^t = c^n e^{t(1 - n tau)} t^{-n beta}
  r.condensed = power_log_verdict(1.0 - nn * psi.tau, 0.0, -nn * psi.beta);
  r.equivalent = r.direct == r.condensed;
  return r;
}

DimensionFormulas dimension_formulas(std::size_t n, std::size_t d, double tau) {
  if (n == 0 || d == 0 || d > n) throw InvalidArgument("dimension_formulas: need 1 <= d <= n");
  const double nn = static_cast<double>(n);
  if (tau < 1.0 / nn && !tie(tau, 1.0 / nn)) throw InvalidArgument("dimension_formulas: tau must be at least 1/n");
  DimensionFormulas f;
  f.ambient = (nn + 1.0) / (tau + 1.0);
  f.manifold = f.ambient - static_cast<double>(n - d);
  if (f.manifold < 0.0) {
    f.manifold = 0.0;
    f.clamped = true;
  }
  return f;
}

SpectrumConstants spectrum_constants(std::size_t n) {
  if (n < 3) throw InvalidArgument("spectrum_constants: n must be at least 3");
  const double x = static_cast<double>(n);
  SpectrumConstants s;
  s.n = n;
  s.A = 4 * x * x + 2 * x;
  s.B = 2 * x * x * x + 5 * x * x + 3 * x - 1;
  s.D = 4 * std::pow(x, 6) + 20 * std::pow(x, 5) + 37 * std::pow(x, 4) + 42 * x * x * x + 23 * x * x + 2 * x + 1;
  // (sqrt D - B)/(2A) rewritten with D - B^2 = 4A(n+1) to avoid cancellation.
  s.delta = 2.0 * (x + 1.0) / (std::sqrt(s.D) + s.B);
  s.lower_bound_holds = 1.0 / (2 * x * x + 6 * x) < s.delta;
  s.upper_bound_holds = s.delta < 1.0 / (2 * x * x + 5 * x);
  s.interval_lo = 1.0 / x;
  s.interval_hi = 1.0 / x + s.delta / x;
  return s;
}

double spectrum_polynomial(std::size_t n, double delta) {
  const double x = static_cast<double>(n);
  const double A = 4 * x * x + 2 * x;
  const double B = 2 * x * x * x + 5 * x * x + 3 * x - 1;
  return delta * delta * A + delta * B - x - 1.0;
}

double exponent_window_gap(std::size_t n, double alpha, double tau) {
  const double x = static_cast<double>(n);
  return (x * tau - 1.0) / (tau + 1.0) - alpha * (3.0 - 2.0 * x * tau) / (2.0 * tau + 1.0);
}

ExponentReport exponent_window(std::size_t n, std::size_t d, int l) {
  if (d < 1 || d >= n) throw InvalidArgument("exponent_window: need 1 <= d < n");
  if (l < 1) throw InvalidArgument("exponent_window: l must be positive");
  ExponentReport r;
  r.n = n;
  r.d = d;
  r.l = l;
  r.alpha = 1.0 / (static_cast<double>(d) * (2.0 * l - 1.0) * static_cast<double>(n + 1));
  const double x = static_cast<double>(n);
  const double a = 2.0 * x * (1.0 + r.alpha);
  const double b = x - 2.0 + r.alpha * (2.0 * x - 3.0);
  const double c = -(1.0 + 3.0 * r.alpha);
  // Positive root, in the cancellation-free form.
  const double disc = std::sqrt(b * b - 4.0 * a * c);
  r.tau_max = b >= 0.0 ? (2.0 * c) / (-b - disc) : (-b + disc) / (2.0 * a);

  // The gap is negative at 1/n and changes sign once on (1/n, 1).
  double lo = 1.0 / x, hi = 1.0;
  if (exponent_window_gap(n, r.alpha, hi) <= 0.0) hi = 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (exponent_window_gap(n, r.alpha, mid) <= 0.0 ? lo : hi) = mid;
  }
  r.tau_max_bisection = lo;
  if (std::abs(r.tau_max - r.tau_max_bisection) > 1e-9)
    throw Error(ErrorKind::InvalidArgument, "exponent_window: quadratic root disagrees with bisection");
  if (n >= 3) r.spectrum = spectrum_constants(n);
  return r;
}

// -- lambda_n estimation ---------------------------------------------------------

using BigFloat = boost::multiprecision::cpp_bin_float_100;
using u128 = unsigned __int128;

RealSpec RealSpec::decimal(std::string digits) {
  RealSpec r;
  r.kind = Kind::Decimal;
  r.digits = std::move(digits);
  return r;
}

RealSpec RealSpec::from_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return decimal(os.str());
}

RealSpec RealSpec::sqrt_of(unsigned k) {
  RealSpec r;
  r.kind = Kind::Sqrt;
  r.radicand = k;
  return r;
}

RealSpec RealSpec::liouville(unsigned base) {
  if (base < 2) throw InvalidArgument("liouville: base must be at least 2");
  RealSpec r;
  r.kind = Kind::Liouville;
  r.base = base;
  return r;
}

RealSpec RealSpec::parse(const std::string& text) {
  std::smatch m;
  static const std::regex sqrt_re(R"(\s*sqrt\(\s*(\d+)\s*\)\s*)");
  static const std::regex liou_re(R"(\s*liouville(?:\(\s*(\d+)\s*\))?\s*)");
  static const std::regex dec_re(R"(\s*[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?\s*)");
  if (std::regex_match(text, m, sqrt_re)) return sqrt_of(static_cast<unsigned>(std::stoul(m[1].str())));
  if (std::regex_match(text, m, liou_re))
    return liouville(m[1].matched ? static_cast<unsigned>(std::stoul(m[1].str())) : 10u);
  if (std::regex_match(text, dec_re)) return decimal(text);
  throw InvalidArgument("cannot parse real number '" + text + "'");
}

std::string RealSpec::describe() const {
  switch (kind) {
    case Kind::Decimal: return digits;
    case Kind::Sqrt: return "sqrt(" + std::to_string(radicand) + ")";
    case Kind::Liouville: return "liouville(" + std::to_string(base) + ")";
  }
  return "?";
}

namespace {

BigFloat to_big(const RealSpec& x) {
  switch (x.kind) {
    case RealSpec::Kind::Decimal: {
      try {
        return BigFloat(x.digits);
      } catch (const std::exception&) {
        throw InvalidArgument("cannot parse real number '" + x.digits + "'");
      }
    }
    case RealSpec::Kind::Sqrt: {
      const unsigned r = static_cast<unsigned>(std::llround(std::sqrt(static_cast<double>(x.radicand))));
      if (r * r == x.radicand) throw InvalidArgument("sqrt of a perfect square is rational");
      return boost::multiprecision::sqrt(BigFloat(x.radicand));
    }
    case RealSpec::Kind::Liouville: {
      BigFloat sum = 0, fact = 1;
      for (int k = 1; k <= 6; ++k) {
        fact *= k;
        sum += boost::multiprecision::pow(BigFloat(x.base), -fact);
      }
      return sum;
    }
  }
  return 0;
}

// floor(frac(v) * 2^128).
u128 fixed_fraction(const BigFloat& v) {
  BigFloat f = v - boost::multiprecision::floor(v);
  f = boost::multiprecision::ldexp(f, 64);
  const BigFloat hi = boost::multiprecision::floor(f);
  const BigFloat lo = boost::multiprecision::floor(boost::multiprecision::ldexp(f - hi, 64));
  return (static_cast<u128>(hi.convert_to<std::uint64_t>()) << 64) | lo.convert_to<std::uint64_t>();
}

// Distance to the nearest integer of a fixed-point fraction, as a double.
double nearest_distance(u128 f) {
  const u128 g = -f;
  const u128 m = f < g ? f : g;
  return std::ldexp(static_cast<double>(m), -128);
}

struct Record {
  std::uint64_t q;
  double qerr;  ///< max_i ||q x^i||
};

}  // namespace

ExponentEstimate lambda_exponent_estimate(const RealSpec& x, std::size_t n, std::uint64_t Q,
                                          std::uint64_t fit_from, unsigned workers, std::uint64_t max_q) {
  if (n == 0) throw InvalidArgument("lambda_exponent_estimate: n must be positive");
  if (Q < 2) throw InvalidArgument("lambda_exponent_estimate: Q must be at least 2");
  if (Q > max_q) throw BudgetExceeded("lambda_exponent_estimate: Q exceeds the budget of " + std::to_string(max_q));
  const BigFloat xb = to_big(x);
  std::vector<u128> frac(n);
  BigFloat power = 1;
  for (std::size_t i = 0; i < n; ++i) {
    power *= xb;
    frac[i] = fixed_fraction(power);
  }

  constexpr std::uint64_t kBlock = 1 << 16;
  const std::size_t blocks = static_cast<std::size_t>((Q + kBlock - 1) / kBlock);
  std::vector<std::vector<Record>> local(blocks);
  std::vector<char> rational(blocks, 0);
  parallel_for(blocks, resolve_workers(workers), [&](std::size_t b) {
    const std::uint64_t q0 = 1 + b * kBlock;
    const std::uint64_t q1 = std::min<std::uint64_t>(Q, q0 + kBlock - 1);
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t q = q0; q <= q1; ++q) {
      double worst = 0.0;
      for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, nearest_distance(static_cast<u128>(q) * frac[i]));
      // Below the fixed-point resolution the scan cannot tell x from a rational.
      if (worst < 1e-27) {
        rational[b] = 1;
        return;
      }
      if (worst < best) {
        best = worst;
        local[b].push_back({q, worst});
      }
    }
  });
  if (std::find(rational.begin(), rational.end(), 1) != rational.end())
    throw InvalidArgument("lambda_exponent_estimate: x is rational to working precision");

  ExponentEstimate est;
  est.n = n;
  est.Q = Q;
  est.fit_from = fit_from ? fit_from : static_cast<std::uint64_t>(std::ceil(std::sqrt(static_cast<double>(Q))));
  double best = std::numeric_limits<double>::infinity();
  for (const auto& blk : local) {
    for (const auto& r : blk) {
      if (r.qerr < best) {
        best = r.qerr;
        est.records.emplace_back(r.q, -std::log(r.qerr));
      }
    }
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [q, y] : est.records) {
    if (q < est.fit_from) continue;
    const double lx = std::log(static_cast<double>(q));
    sx += lx;
    sy += y;
    sxx += lx * lx;
    sxy += lx * y;
    ++est.fitted;
  }
  const double k = static_cast<double>(est.fitted);
  const double var = est.fitted < 2 ? 0.0 : sxx - sx * sx / k;
  if (!(var > 0.0)) {
    est.estimate = std::numeric_limits<double>::quiet_NaN();
    est.intercept = std::numeric_limits<double>::quiet_NaN();
    return est;
  }
  est.estimate = (sxy - sx * sy / k) / var;
  est.intercept = (sy - est.estimate * sx) / k;
  return est;
}

// -- Serialisation ---------------------------------------------------------------

nlohmann::ordered_json to_json(const SpectrumConstants& s) {
  nlohmann::ordered_json j;
  j["n"] = s.n;
  j["A_n"] = s.A;
  j["B_n"] = s.B;
  j["D_n"] = s.D;
  j["delta_n"] = s.delta;
  j["lower_bound_holds"] = s.lower_bound_holds;
  j["upper_bound_holds"] = s.upper_bound_holds;
  j["spectrum_interval"] = {s.interval_lo, s.interval_hi};
  return j;
}

nlohmann::ordered_json to_json(const ExponentReport& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["d"] = r.d;
  j["l"] = r.l;
  j["alpha"] = r.alpha;
  j["tau_max"] = r.tau_max;
  j["tau_max_bisection"] = r.tau_max_bisection;
  if (r.spectrum) {
    j["delta_n"] = r.spectrum->delta;
    j["spectrum_interval"] = {r.spectrum->interval_lo, r.spectrum->interval_hi};
  }
  return j;
}

nlohmann::ordered_json to_json(const SeriesResult& r) {
  nlohmann::ordered_json j;
  j["verdict"] = to_string(r.verdict);
  j["rigorous"] = r.rigorous;
  j["exponent"] = r.exponent;
  j["log_power"] = r.log_power;
  return j;
}

nlohmann::ordered_json to_json(const ExponentEstimate& e) {
  nlohmann::ordered_json j;
  j["n"] = e.n;
  j["Q"] = e.Q;
  j["fit_from"] = e.fit_from;
  j["estimate"] = e.estimate;
  j["intercept"] = e.intercept;
  j["fitted_records"] = e.fitted;
  auto recs = nlohmann::ordered_json::array();
  for (const auto& [q, y] : e.records) recs.push_back({q, y});
  j["records"] = recs;
  return j;
}

}  // namespace dioph
