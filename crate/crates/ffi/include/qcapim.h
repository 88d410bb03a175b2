#ifndef QCAPIM_H
#define QCAPIM_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QcapimStatus {
  QCAPIM_STATUS_OK = 0,
  QCAPIM_STATUS_NULL_POINTER = 1,
  QCAPIM_STATUS_INVALID_UTF8 = 2,
  QCAPIM_STATUS_PARSE = 3,
  QCAPIM_STATUS_INVALID_ARGUMENT = 4,
  QCAPIM_STATUS_SIMULATION = 5,
  QCAPIM_STATUS_VERIFICATION_FAILED = 6,
  QCAPIM_STATUS_INDETERMINATE = 7,
  QCAPIM_STATUS_BUFFER_TOO_SMALL = 8,
  QCAPIM_STATUS_PANIC = 9,
} QcapimStatus;

/**
 * Opaque layout handle.
 */
typedef struct QcapimLayout QcapimLayout;

/**
 * Opaque simulation result handle.
 */
typedef struct QcapimTraces QcapimTraces;

/**
 * Simulation parameters, field for field.
 */
typedef struct QcapimParams {
  double temperature_k;
  double relaxation_time_s;
  double time_step_s;
  double clock_high_j;
  double clock_low_j;
  double clock_shift;
  double clock_amplitude_factor;
  double radius_of_effect_nm;
  double relative_permittivity;
  double layer_separation_nm;
  double convergence_tolerance;
  size_t num_samples;
  size_t max_iterations_per_sample;
} QcapimParams;

typedef struct QcapimLayoutMetrics {
  size_t cell_count;
  double area_um2;
  size_t clock_zone_regions;
} QcapimLayoutMetrics;

typedef struct QcapimVerifyResult {
  bool pass;
  size_t rows;
  size_t mismatches;
  size_t latency_cycles;
  double min_margin;
} QcapimVerifyResult;

/**
 * One dissipation column; energies in meV per clock cycle. Switching is
 * negative when the layout has no inputs.
 */
typedef struct QcapimDissipation {
  double gamma_ratio;
  double kink_energy_mev;
  double max_circuit_mev;
  double avg_circuit_mev;
  double min_circuit_mev;
  double max_cell_mev;
  double avg_leakage_mev;
  double avg_switching_mev;
  size_t argmax_pair;
  size_t argmin_pair;
} QcapimDissipation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf`.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes; `needed` must be
 * null or writable.
 */
enum QcapimStatus qcapim_last_error(char *buf, size_t len, size_t *needed);

/**
 * Akers cell function `X·!Z + Y·Z`.
 */
bool qcapim_eval_cell(bool x, bool y, bool z);

/**
 * # Safety
 * `out` must be writable.
 */
enum QcapimStatus qcapim_params_default(struct QcapimParams *out);

/**
 * Parses a layout file.
 *
 * # Safety
 * `text` must be a valid C string; `out` must be writable. The handle
 * written to `out` must be released with [`qcapim_layout_free`].
 */
enum QcapimStatus qcapim_layout_parse(const char *text_ptr, struct QcapimLayout **out);

/**
 * Builds a layout: `primitive`, `xor`, `wire`, `inverter`, `majority`.
 *
 * # Safety
 * As for [`qcapim_layout_parse`].
 */
enum QcapimStatus qcapim_layout_synthesize(const char *target, struct QcapimLayout **out);

/**
 * Synthesizes a layout from a network description.
 *
 * # Safety
 * As for [`qcapim_layout_parse`].
 */
enum QcapimStatus qcapim_layout_from_network(const char *network, struct QcapimLayout **out);

/**
 * # Safety
 * `layout` must be null or a handle from this library not yet freed.
 */
void qcapim_layout_free(struct QcapimLayout *layout);

/**
 * Writes the layout file text into `buf`.
 *
 * # Safety
 * `layout` must be a live handle; `buf` null or `len` writable bytes;
 * `needed` null or writable.
 */
enum QcapimStatus qcapim_layout_serialize(const struct QcapimLayout *layout,
                                          char *buf,
                                          size_t len,
                                          size_t *needed);

/**
 * # Safety
 * `layout` must be a live handle; `out` writable.
 */
enum QcapimStatus qcapim_layout_metrics(const struct QcapimLayout *layout,
                                        double radius_nm,
                                        struct QcapimLayoutMetrics *out);

/**
 * Simulates every input vector in binary order over `params.num_samples`
 * samples. `clock_period` of 0 means one clock period per vector.
 *
 * # Safety
 * `layout` and `params` must be valid; `out` writable. Release the result
 * with [`qcapim_traces_free`].
 */
enum QcapimStatus qcapim_simulate(const struct QcapimLayout *layout,
                                  const struct QcapimParams *params,
                                  size_t clock_period,
                                  size_t threads,
                                  struct QcapimTraces **out);

/**
 * # Safety
 * `traces` must be null or a live handle.
 */
void qcapim_traces_free(struct QcapimTraces *traces);

/**
 * Number of samples, or 0 for a null handle.
 *
 * # Safety
 * `traces` must be null or a live handle.
 */
size_t qcapim_traces_samples(const struct QcapimTraces *traces);

/**
 * Polarization of the cell labelled `label` at `sample`.
 *
 * # Safety
 * `traces` must be a live handle, `label` a C string, `out` writable.
 */
enum QcapimStatus qcapim_traces_polarization(const struct QcapimTraces *traces,
                                             const char *label,
                                             size_t sample,
                                             double *out);

/**
 * Writes the trace CSV into `buf`.
 *
 * # Safety
 * As for [`qcapim_layout_serialize`].
 */
enum QcapimStatus qcapim_traces_csv(const struct QcapimTraces *traces,
                                    char *buf,
                                    size_t len,
                                    size_t *needed);

/**
 * Simulates and checks the layout against `oracle`, or against its stored
 * oracle when `oracle` is null. A completed check that finds mismatches
 * fills `out` and returns `VerificationFailed`.
 *
 * # Safety
 * `layout`, `params` must be valid; `oracle` null or a C string; `out`
 * writable.
 */
enum QcapimStatus qcapim_verify(const struct QcapimLayout *layout,
                                const struct QcapimParams *params,
                                const char *oracle,
                                double margin,
                                struct QcapimVerifyResult *out);

/**
 * Dissipation report for one tunneling-energy ratio. The layout must
 * verify against its stored oracle.
 *
 * # Safety
 * `layout`, `params` must be valid; `out` writable.
 */
enum QcapimStatus qcapim_dissipation(const struct QcapimLayout *layout,
                                     const struct QcapimParams *params,
                                     double gamma_ratio,
                                     struct QcapimDissipation *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCAPIM_H */
