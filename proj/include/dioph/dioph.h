/* C interface to the dioph library.
 *
 * Every function returns a dioph_status. On failure the message is
 * available from dioph_last_error() on the calling thread until the next
 * call into the library from that thread. Handles are opaque and owned by
 * the caller, who releases them with the matching *_free function.
 */
#ifndef DIOPH_DIOPH_H
#define DIOPH_DIOPH_H

#include <stddef.h>

#if defined(DIOPH_BUILDING_LIBRARY)
#define DIOPH_API __attribute__((visibility("default")))
#else
#define DIOPH_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dioph_status {
  DIOPH_OK = 0,
  DIOPH_ERR_INVALID_ARGUMENT = 1,
  DIOPH_ERR_DOMAIN = 2,
  DIOPH_ERR_BUDGET = 3,
  DIOPH_ERR_UNSUPPORTED = 4,
  DIOPH_ERR_IO = 5,
  DIOPH_ERR_INTERNAL = 6
} dioph_status;

typedef struct dioph_chart dioph_chart;
typedef struct dioph_result dioph_result;

DIOPH_API const char* dioph_version(void);
DIOPH_API const char* dioph_last_error(void);
DIOPH_API const char* dioph_status_name(dioph_status status);

/* Charts ------------------------------------------------------------------ */

/* spec: {"kind": "veronese"|"circle"|"mixed"|"poly", "params": {...},
 *        "domain": [[lo, hi], ...], "M": ..., "l": ...} */
DIOPH_API dioph_status dioph_chart_from_json(const char* spec, dioph_chart** out);
DIOPH_API void dioph_chart_free(dioph_chart* chart);
DIOPH_API dioph_status dioph_chart_dims(const dioph_chart* chart, size_t* n, size_t* d);
DIOPH_API dioph_status dioph_chart_deriv_bound(const dioph_chart* chart, double* M);
/* x has d entries; out receives the n coordinates (x, f(x)). */
DIOPH_API dioph_status dioph_chart_evaluate(const dioph_chart* chart, const double* x, double* out);
/* out receives the m x d Jacobian of the graph part, row-major. */
DIOPH_API dioph_status dioph_chart_jacobian(const dioph_chart* chart, const double* x, double* out);

/* Lattices ---------------------------------------------------------------- */

/* basis: k x k column-major matrix whose columns span a unimodular lattice,
 * k <= 8. values receives lambda_1..lambda_k. */
DIOPH_API dioph_status dioph_successive_minima(size_t k, const double* basis, double* values);
/* products[i] = lambda_{i+1}(L) lambda_{k-i}(L*). */
DIOPH_API dioph_status dioph_mahler_gap(size_t k, const double* basis, double* products);

/* Arcs -------------------------------------------------------------------- */

typedef enum dioph_arc_label {
  DIOPH_RAW_MINOR = 0,
  DIOPH_ENLARGED_MINOR = 1,
  DIOPH_MAJOR = 2
} dioph_arc_label;

DIOPH_API dioph_status dioph_classify_point(const dioph_chart* chart, double eps, double t, const double* x,
                                            dioph_arc_label* label, double* lambda_top, double* threshold);

/* Theory ------------------------------------------------------------------ */

typedef struct dioph_spectrum {
  double A, B, D, delta;
  int lower_bound_holds;
  int upper_bound_holds;
  double interval_lo, interval_hi;
} dioph_spectrum;

DIOPH_API dioph_status dioph_spectrum_constants(size_t n, dioph_spectrum* out);
DIOPH_API dioph_status dioph_exponent_window(size_t n, size_t d, int l, double* alpha, double* tau_max);

/* Experiments -------------------------------------------------------------- */

/* Runs one experiment. command is one of "count", "arcs", "identities",
 * "spectrum", "series", "exponent"; config is a JSON object (see README).
 * The result carries a JSON report, an optional CSV artifact and whether
 * every checked invariant held. */
DIOPH_API dioph_status dioph_run(const char* command, const char* config, dioph_result** out);
DIOPH_API const char* dioph_result_json(const dioph_result* result);
/* Empty string when the command produces no CSV. */
DIOPH_API const char* dioph_result_csv(const dioph_result* result);
DIOPH_API int dioph_result_passed(const dioph_result* result);
DIOPH_API void dioph_result_free(dioph_result* result);

#ifdef __cplusplus
}
#endif

#endif /* DIOPH_DIOPH_H */
