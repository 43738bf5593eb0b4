#ifndef GEOGATE_H
#define GEOGATE_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GgFrame {
  GG_FRAME_ON_RESONANCE = 0,
  GG_FRAME_CONDITIONAL_B = 1,
  GG_FRAME_SINGLE_QUBIT_A = 2,
} GgFrame;

typedef enum GgGate {
  GG_GATE_U1 = 0,
  GG_GATE_U2 = 1,
  GG_GATE_UC = 2,
} GgGate;

typedef enum GgStatus {
  GG_STATUS_OK = 0,
  GG_STATUS_NULL_POINTER = 1,
  GG_STATUS_INVALID_ARGUMENT = 2,
  GG_STATUS_PARSE = 3,
  GG_STATUS_NON_UNITARY = 4,
  GG_STATUS_CHECK_FAILED = 5,
  GG_STATUS_IO = 6,
  GG_STATUS_PANIC = 7,
} GgStatus;

typedef enum GgVariant {
  GG_VARIANT_UP = 0,
  GG_VARIANT_MIRROR = 1,
} GgVariant;

// Experiment configuration.
typedef struct GgConfig GgConfig;

// A compiled pulse program.
typedef struct GgProgram GgProgram;

// Spin-system constants.
typedef struct GgSystem GgSystem;

typedef struct GgSweepRecord {
  double theta;
  double phase_measured;
  double gamma_dynamic;
  double gamma_geometric;
  uint32_t variant;
} GgSweepRecord;

typedef struct GgFit {
  double alpha_g;
  double eta;
  double max_residual;
} GgFit;

typedef struct GgGateResult {
  // A `GgGate` value.
  uint32_t gate;
  double duration;
  double unitary_distance;
  double six_state;
  double haar;
  double process;
} GgGateResult;

typedef struct GgPrepReport {
  double lambda;
  double mu;
  double residual;
} GgPrepReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. Owned by the
// library.
const char *gg_last_error_message(void);

// Library version as a static string.
const char *gg_version(void);

// Default constants of the two-spin sample. Never null.
struct GgSystem *gg_system_default(void);

// Larmor frequencies in rad/s, `j_hz` in Hz, T2 times in seconds.
//
// # Safety
// `out` must be a valid pointer to a `GgSystem*`.
enum GgStatus gg_system_new(double omega_a,
                            double omega_b,
                            double j_hz,
                            double t2_a,
                            double t2_b,
                            struct GgSystem **out);

// # Safety
// `sys` must come from this library and not be freed twice. Null is a no-op.
void gg_system_free(struct GgSystem *sys);

// Parses and compiles `text`. `names`/`values` bind `n_bindings` free
// symbols such as `theta`.
//
// # Safety
// Strings must be NUL-terminated; arrays must hold `n_bindings` entries.
enum GgStatus gg_program_compile(const struct GgSystem *sys,
                                 const char *text,
                                 enum GgFrame frame,
                                 const char *const *names,
                                 const double *values,
                                 size_t n_bindings,
                                 struct GgProgram **out);

// # Safety
// `prog` must come from this library and not be freed twice. Null is a no-op.
void gg_program_free(struct GgProgram *prog);

// Total delay time in seconds.
//
// # Safety
// Pointers must be valid.
enum GgStatus gg_program_duration(const struct GgProgram *prog, double *out);

// Noiseless 4×4 propagator, row-major, split into real and imaginary
// parts. Fails with `NON_UNITARY` if the program contains a crusher.
//
// # Safety
// `re` and `im` must each point to 16 writable doubles.
enum GgStatus gg_program_net_unitary(const struct GgProgram *prog,
                                     const struct GgSystem *sys,
                                     double *re,
                                     double *im);

// Default experiment configuration. Never null.
struct GgConfig *gg_config_default(void);

// Configuration from TOML text.
//
// # Safety
// `toml` must be NUL-terminated; `out` must be valid.
enum GgStatus gg_config_from_toml(const char *toml, struct GgConfig **out);

// Switches T2 dephasing on or off.
//
// # Safety
// `cfg` must be valid.
enum GgStatus gg_config_set_noise(struct GgConfig *cfg, bool enabled);

// # Safety
// `cfg` must come from this library and not be freed twice. Null is a no-op.
void gg_config_free(struct GgConfig *cfg);

// One interferometer run at polar angle `theta`.
//
// # Safety
// Pointers must be valid.
enum GgStatus gg_interferometer(const struct GgConfig *cfg,
                                double theta,
                                enum GgVariant variant,
                                struct GgSweepRecord *out);

// Least-squares `γd = αg + η·γg` over `n` points.
//
// # Safety
// `gamma_d` and `gamma_g` must hold `n` doubles.
enum GgStatus gg_fit_unconventional(const double *gamma_d,
                                    const double *gamma_g,
                                    size_t n,
                                    struct GgFit *out);

// Fidelities of U1, U2 and Uc, in that order.
//
// # Safety
// `out` must point to 3 writable `GgGateResult`s.
enum GgStatus gg_gate_suite(const struct GgConfig *cfg, struct GgGateResult *out);

// Pseudo-pure preparation check.
//
// # Safety
// Pointers must be valid.
enum GgStatus gg_prep_check(const struct GgConfig *cfg, struct GgPrepReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GEOGATE_H */
