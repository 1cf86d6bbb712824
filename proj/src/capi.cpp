#include "dioph/dioph.h"

#include "arcs.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "flow.hpp"
#include "lattice.hpp"
#include "manifold.hpp"
#include "report.hpp"
#include "theory.hpp"

#include <new>
#include <string>

struct dioph_chart {
  dioph::ManifoldChart chart;
};

struct dioph_result {
  std::string json;
  std::string csv;
  bool passed = false;
};

namespace {

thread_local std::string g_last_error;

dioph_status fail(dioph_status status, const std::string& msg) {
  g_last_error = msg;
  return status;
}

template <class F>
dioph_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return DIOPH_OK;
  } catch (const dioph::Error& e) {
    switch (e.kind()) {
      case dioph::ErrorKind::InvalidArgument: return fail(DIOPH_ERR_INVALID_ARGUMENT, e.what());
      case dioph::ErrorKind::Domain: return fail(DIOPH_ERR_DOMAIN, e.what());
      case dioph::ErrorKind::Budget: return fail(DIOPH_ERR_BUDGET, e.what());
      case dioph::ErrorKind::Unsupported: return fail(DIOPH_ERR_UNSUPPORTED, e.what());
      case dioph::ErrorKind::Io: return fail(DIOPH_ERR_IO, e.what());
    }
    return fail(DIOPH_ERR_INTERNAL, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(DIOPH_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(DIOPH_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(DIOPH_ERR_INTERNAL, e.what());
  }
}

void require(bool cond, const char* msg) {
  if (!cond) throw dioph::InvalidArgument(msg);
}

dioph::Mat square(size_t k, const double* data) {
  require(k >= 1 && k <= 8, "basis dimension must be between 1 and 8");
  require(data != nullptr, "null basis");
  const auto kk = static_cast<Eigen::Index>(k);
  return Eigen::Map<const dioph::Mat>(data, kk, kk);
}

dioph::Vec point(const dioph_chart* chart, const double* x) {
  require(chart != nullptr && x != nullptr, "null argument");
  const auto d = static_cast<Eigen::Index>(chart->chart.d());
  return Eigen::Map<const dioph::Vec>(x, d);
}

}  // namespace

extern "C" {

const char* dioph_version(void) { return "0.1.0"; }

const char* dioph_last_error(void) { return g_last_error.c_str(); }

const char* dioph_status_name(dioph_status status) {
  switch (status) {
    case DIOPH_OK: return "ok";
    case DIOPH_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case DIOPH_ERR_DOMAIN: return "domain";
    case DIOPH_ERR_BUDGET: return "budget";
    case DIOPH_ERR_UNSUPPORTED: return "unsupported";
    case DIOPH_ERR_IO: return "io";
    case DIOPH_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

dioph_status dioph_chart_from_json(const char* spec, dioph_chart** out) {
  return guarded([&] {
    require(spec != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto chart = dioph::chart_from_json(nlohmann::json::parse(spec));
    *out = new dioph_chart{std::move(chart)};
  });
}

void dioph_chart_free(dioph_chart* chart) { delete chart; }

dioph_status dioph_chart_dims(const dioph_chart* chart, size_t* n, size_t* d) {
  return guarded([&] {
    require(chart != nullptr && n != nullptr && d != nullptr, "null argument");
    *n = chart->chart.n();
    *d = chart->chart.d();
  });
}

dioph_status dioph_chart_deriv_bound(const dioph_chart* chart, double* M) {
  return guarded([&] {
    require(chart != nullptr && M != nullptr, "null argument");
    *M = chart->chart.deriv_bound();
  });
}

dioph_status dioph_chart_evaluate(const dioph_chart* chart, const double* x, double* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    const dioph::Vec v = chart->chart.evaluate(point(chart, x));
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v(i);
  });
}

dioph_status dioph_chart_jacobian(const dioph_chart* chart, const double* x, double* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    const dioph::Mat J = chart->chart.jacobian(point(chart, x));
    for (Eigen::Index i = 0; i < J.rows(); ++i)
      for (Eigen::Index j = 0; j < J.cols(); ++j) out[i * J.cols() + j] = J(i, j);
  });
}

dioph_status dioph_successive_minima(size_t k, const double* basis, double* values) {
  return guarded([&] {
    require(values != nullptr, "null argument");
    const auto rep = dioph::successive_minima(dioph::LatticeBasis(square(k, basis)));
    for (size_t i = 0; i < k; ++i) values[i] = rep.values[i];
  });
}

dioph_status dioph_mahler_gap(size_t k, const double* basis, double* products) {
  return guarded([&] {
    require(products != nullptr, "null argument");
    const auto gap = dioph::mahler_gap(dioph::LatticeBasis(square(k, basis)));
    for (size_t i = 0; i < k; ++i) products[i] = gap[i];
  });
}

dioph_status dioph_classify_point(const dioph_chart* chart, double eps, double t, const double* x,
                                  dioph_arc_label* label, double* lambda_top, double* threshold) {
  return guarded([&] {
    require(label != nullptr, "null argument");
    const dioph::Vec v = point(chart, x);
    const auto params = dioph::FlowParams::make(eps, t, dioph::Dims::of(chart->chart));
    const auto pc = dioph::classify_point(chart->chart, params, v);
    *label = pc.label == dioph::ArcLabel::RawMinor ? DIOPH_RAW_MINOR : DIOPH_MAJOR;
    if (lambda_top) *lambda_top = pc.lambda_top;
    if (threshold) *threshold = pc.threshold;
  });
}

dioph_status dioph_spectrum_constants(size_t n, dioph_spectrum* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    const auto s = dioph::spectrum_constants(n);
    *out = dioph_spectrum{s.A, s.B, s.D, s.delta, s.lower_bound_holds ? 1 : 0, s.upper_bound_holds ? 1 : 0,
                          s.interval_lo, s.interval_hi};
  });
}

dioph_status dioph_exponent_window(size_t n, size_t d, int l, double* alpha, double* tau_max) {
  return guarded([&] {
    require(alpha != nullptr && tau_max != nullptr, "null argument");
    const auto r = dioph::exponent_window(n, d, l);
    *alpha = r.alpha;
    *tau_max = r.tau_max;
  });
}

dioph_status dioph_run(const char* command, const char* config, dioph_result** out) {
  return guarded([&] {
    require(command != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    const nlohmann::json cfg = config && *config ? nlohmann::json::parse(config) : nlohmann::json::object();
    dioph::RunOutput r = dioph::run_experiment(command, cfg);
    *out = new dioph_result{dioph::dump_json(r.json), std::move(r.csv), r.passed};
  });
}

const char* dioph_result_json(const dioph_result* result) { return result ? result->json.c_str() : ""; }

const char* dioph_result_csv(const dioph_result* result) { return result ? result->csv.c_str() : ""; }

int dioph_result_passed(const dioph_result* result) { return result && result->passed ? 1 : 0; }

void dioph_result_free(dioph_result* result) { delete result; }

}  // extern "C"
