/* SPDX-License-Identifier: Apache-2.0 */
/* Copyright 2026 The neurodissip Authors */

#ifndef NEURODISSIP_NEURODISSIP_H_
#define NEURODISSIP_NEURODISSIP_H_

#include <stddef.h>

#if defined(_WIN32)
#  if defined(NEURODISSIP_BUILDING)
#    define ND_API __declspec(dllexport)
#  else
#    define ND_API __declspec(dllimport)
#  endif
#else
#  define ND_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nd_status {
  ND_OK = 0,
  ND_ERR_INVALID_ARGUMENT = 1,
  ND_ERR_DIMENSION = 2,
  ND_ERR_CONVERGENCE = 3,
  ND_ERR_SINGULAR = 4,
  ND_ERR_CONFIG = 5,
  ND_ERR_IO = 6,
  ND_ERR_NUMERIC = 7,
  ND_ERR_DEGENERATE = 8,
  ND_ERR_INTERNAL = 99
} nd_status;

/* Opaque handles. */
typedef struct nd_config nd_config;
typedef struct nd_network nd_network;

ND_API const char* nd_version(void);
ND_API const char* nd_status_name(nd_status status);
/* Message of the last failure on the calling thread; "" if none. */
ND_API const char* nd_last_error(void);
/* Frees strings returned through char** out-parameters. */
ND_API void nd_string_free(char* s);

/* Configuration. */
ND_API nd_status nd_config_new(nd_config** out);
ND_API nd_status nd_config_from_json(const char* json, nd_config** out);
ND_API nd_status nd_config_from_file(const char* path, nd_config** out);
/* Dotted-path override, e.g. key "analysis.grid.resolution", value "[60,60]". */
ND_API nd_status nd_config_set(nd_config* config, const char* key, const char* value);
/* Applies count overrides, then validates once; on failure the config is unchanged. */
ND_API nd_status nd_config_set_many(nd_config* config, const char* const* keys,
                                    const char* const* values, size_t count);
ND_API nd_status nd_config_to_json(const nd_config* config, char** out_json);
ND_API void nd_config_free(nd_config* config);

/* Networks. */
ND_API nd_status nd_network_build(const nd_config* config, nd_network** out);
ND_API nd_status nd_network_load(const char* path, nd_network** out);
ND_API nd_status nd_network_to_json(const nd_network* net, char** out_json);
ND_API void nd_network_free(nd_network* net);
ND_API size_t nd_network_input_dim(const nd_network* net);
ND_API size_t nd_network_output_dim(const nd_network* net);
/* y (length output_dim) = f(x) (length input_dim). */
ND_API nd_status nd_network_evaluate(const nd_network* net, const double* x, size_t n, double* y,
                                     size_t m);
/* Pointwise-affine form at x: a_star is output_dim x input_dim, row-major. */
ND_API nd_status nd_network_pwa(const nd_network* net, const double* x, size_t n, double* a_star,
                                double* b_star);
/* ||A*(x)||_2. */
ND_API nd_status nd_network_a_norm(const nd_network* net, const double* x, size_t n,
                                   double* a_norm);

/* Commands: pwa, grid, spectra, rollout, basin, simulate, train, certify,
 * sweep, gen-weights. Outputs go under out_dir with fixed file names.
 * threads = 0 uses NEURODISSIP_THREADS or the hardware concurrency.
 * exit_code receives 0, or 2 when an asserted certificate fails.
 * summary (optional) receives {"command", "exit_code", "message", "result"}
 * as JSON; free with nd_string_free. */
ND_API nd_status nd_run_command(const nd_config* config, const char* command,
                                const char* out_dir, size_t threads, int* exit_code,
                                char** summary);
/* Comma-separated command names. */
ND_API const char* nd_command_names(void);

#ifdef __cplusplus
}
#endif

#endif /* NEURODISSIP_NEURODISSIP_H_ */
