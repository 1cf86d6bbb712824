// Command-line driver: every experiment goes through the C API.
#include "dioph/dioph.h"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

constexpr int kExitPass = 0;
constexpr int kExitInternal = 1;
constexpr int kExitViolation = 2;
constexpr int kExitBudget = 3;
constexpr int kExitConfig = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  if (path.size() > 5 && path.substr(path.size() - 5) == ".toml")
    throw UsageError("TOML configs are not supported; use JSON");
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw UsageError("config file must hold a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw UsageError("config file '" + path + "': " + e.what());
  }
}

// "veronese(3)", "circle(1)", "mixed(2,4)" or a JSON chart object.
json parse_chart(const std::string& text) {
  std::smatch m;
  static const std::regex named(R"(\s*(veronese|circle|mixed)\s*\(\s*([-+0-9.eE]+)\s*(?:,\s*([0-9]+)\s*)?\)\s*)");
  if (std::regex_match(text, m, named)) {
    const std::string kind = m[1];
    if (kind == "veronese" && !m[3].matched) return {{"kind", kind}, {"params", {{"n", std::stoi(m[2])}}}};
    if (kind == "circle" && !m[3].matched) return {{"kind", kind}, {"params", {{"r", std::stod(m[2])}}}};
    if (kind == "mixed" && m[3].matched)
      return {{"kind", kind}, {"params", {{"d", std::stoi(m[2])}, {"n", std::stoi(m[3])}}}};
    throw UsageError("bad chart shorthand '" + text + "'");
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    throw UsageError("chart must be veronese(n), circle(r), mixed(d,n) or a JSON object");
  }
}

// key=value with value read as JSON when it parses, else as a string.
void apply_set(json& cfg, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + kv + "'");
  const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
  try {
    cfg[key] = json::parse(value);
  } catch (const json::parse_error&) {
    cfg[key] = value;
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << content;
  if (!out.flush()) throw UsageError("failed writing '" + path + "'");
}

struct Common {
  std::string config;
  std::string json_out;
  std::string csv_out;
  std::vector<std::string> sets;
  unsigned workers = 0;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON config file; flags override its keys");
  sub->add_option("--json-out", c.json_out, "write the JSON report here instead of stdout");
  sub->add_option("--csv-out", c.csv_out, "write the CSV artifact here");
  sub->add_option("--set", c.sets, "override a config key: key=value (value parsed as JSON)");
  sub->add_option("--workers", c.workers, "worker threads (default: DIOPH_WORKERS or 1)");
}

int run(const std::string& command, const json& cfg, const Common& common) {
  dioph_result* result = nullptr;
  const std::string text = cfg.dump();
  const dioph_status st = dioph_run(command.c_str(), text.c_str(), &result);
  if (st != DIOPH_OK) {
    std::cerr << "dioph " << command << ": " << dioph_status_name(st) << ": " << dioph_last_error() << '\n';
    switch (st) {
      case DIOPH_ERR_BUDGET: return kExitBudget;
      case DIOPH_ERR_INVALID_ARGUMENT:
      case DIOPH_ERR_DOMAIN:
      case DIOPH_ERR_UNSUPPORTED:
      case DIOPH_ERR_IO: return kExitConfig;
      default: return kExitInternal;
    }
  }
  const std::string report = dioph_result_json(result);
  const std::string csv = dioph_result_csv(result);
  const bool passed = dioph_result_passed(result) != 0;
  dioph_result_free(result);
  if (common.json_out.empty())
    std::cout << report;
  else
    write_file(common.json_out, report);
  if (!common.csv_out.empty()) write_file(common.csv_out, csv);
  if (!passed) {
    std::cerr << "dioph " << command << ": invariant violation (see report)\n";
    return kExitViolation;
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dioph: rational points near manifolds, lattice flows and Diophantine exponents"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dioph_version()));

  Common common;
  std::optional<std::string> chart_text;

  // count / arcs
  std::optional<double> eps, eps_rate, spacing, spacing_factor, max_q_count;
  std::vector<double> times;
  std::vector<std::vector<double>> box;
  bool no_audit = false, refine = false;
  // identities / spectrum / series / exponent
  std::optional<long long> n, d, l, n_max, samples, seed, bases, random, Q, fit_from, max_q;
  std::optional<double> s, alpha, tau, c, beta;
  std::optional<std::string> kind, x;

  auto* count = app.add_subcommand("count", "certified rational points in the eps e^-t tube, split by arcs");
  auto* arcs = app.add_subcommand("arcs", "minor/major arc map, minor measure and inclusion audit");
  auto* ident = app.add_subcommand("identities", "flow conjugation identities, dual forms and Mahler products");
  auto* spec = app.add_subcommand("spectrum", "spectrum constants delta_n and the exponent window");
  auto* series = app.add_subcommand("series", "convergence of the series attached to psi");
  auto* expo = app.add_subcommand("exponent", "empirical simultaneous approximation exponent lambda_n(x)");

  for (auto* sub : {count, arcs}) {
    add_common(sub, common);
    sub->add_option("--chart", chart_text, "veronese(n), circle(r), mixed(d,n) or a JSON chart");
    sub->add_option("--eps", eps, "fixed eps in (0, 1)");
    sub->add_option("--eps-rate", eps_rate, "eps = e^{-rate t}");
    sub->add_option("--t", times, "one or more times t");
    sub->add_option("--box", box, "box side lo hi, repeat per axis")->expected(2)->allow_extra_args(false);
    sub->add_option("--spacing", spacing, "arc grid spacing (default eps e^{-t/2})");
    sub->add_option("--spacing-factor", spacing_factor, "arc grid spacing as a multiple of eps e^{-t/2}");
  }
  count->add_option("--max-q", max_q_count, "limit on ceil(e^t)");
  arcs->add_flag("--no-audit", no_audit, "skip the inclusion audit");
  arcs->add_flag("--refine", refine, "also rebuild at half spacing and report the change");

  add_common(ident, common);
  ident->add_option("--n", n, "ambient dimension");
  ident->add_option("--d", d, "domain dimension");
  ident->add_option("--samples", samples, "random samples per identity");
  ident->add_option("--bases", bases, "random bases for the Mahler check");
  ident->add_option("--seed", seed, "random seed");

  add_common(spec, common);
  spec->add_option("--n", n, "n >= 3");
  spec->add_option("--n-max", n_max, "tabulate n..n_max");
  spec->add_option("--d", d, "domain dimension for the exponent window");
  spec->add_option("--l", l, "nondegeneracy order for the exponent window");

  add_common(series, common);
  series->add_option("--kind", kind, "khintchine | hausdorff | minor");
  series->add_option("--n", n, "ambient dimension");
  series->add_option("--d", d, "domain dimension");
  series->add_option("--s", s, "Hausdorff parameter");
  series->add_option("--alpha", alpha, "minor-arc exponent");
  series->add_option("--tau", tau, "psi exponent");
  series->add_option("--c", c, "psi scale");
  series->add_option("--beta", beta, "psi log exponent");

  add_common(expo, common);
  expo->add_option("--x", x, "sqrt(k), liouville, liouville(b) or a decimal");
  expo->add_option("--n", n, "number of consecutive powers");
  expo->add_option("--Q", Q, "largest denominator scanned");
  expo->add_option("--fit-from", fit_from, "smallest q in the fit (default sqrt(Q))");
  expo->add_option("--random", random, "estimate for this many random x instead");
  expo->add_option("--seed", seed, "seed for --random");
  expo->add_option("--max-q", max_q, "budget on Q");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }

  try {
    CLI::App* chosen = app.get_subcommands().front();
    const std::string command = chosen->get_name();
    json cfg = read_config(common.config);
    auto put = [&](const char* key, const auto& opt) {
      if (opt) cfg[key] = *opt;
    };
    if (chart_text) cfg["chart"] = parse_chart(*chart_text);
    if (eps && eps_rate) throw UsageError("give --eps or --eps-rate, not both");
    put("eps", eps);
    if (eps_rate) cfg["eps"] = {{"exp", *eps_rate}};
    if (!times.empty()) cfg["t"] = times.size() == 1 ? json(times[0]) : json(times);
    if (!box.empty()) cfg["box"] = box;
    if (spacing && spacing_factor) throw UsageError("give --spacing or --spacing-factor, not both");
    put("spacing", spacing);
    if (spacing_factor) cfg["spacing"] = {{"factor", *spacing_factor}};
    put("max_q", max_q_count);
    if (no_audit) cfg["audit"] = false;
    if (refine) cfg["refine"] = true;
    put("n", n);
    put("d", d);
    put("l", l);
    put("n_max", n_max);
    put("samples", samples);
    put("bases", bases);
    put("seed", seed);
    put("random", random);
    put("Q", Q);
    put("fit_from", fit_from);
    put("max_q", max_q);
    put("s", s);
    put("alpha", alpha);
    put("tau", tau);
    put("c", c);
    put("beta", beta);
    put("kind", kind);
    put("x", x);
    if (common.workers) cfg["workers"] = common.workers;
    for (const auto& kv : common.sets) apply_set(cfg, kv);
    return run(command, cfg, common);
  } catch (const UsageError& e) {
    std::cerr << "dioph: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "dioph: " << e.what() << '\n';
    return kExitInternal;
  }
}
