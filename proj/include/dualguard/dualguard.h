/* Copyright 2026 The Dualguard Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

/* C interface to the dualguard engine.
 *
 * Every object is an opaque handle released by its matching *_free function.
 * Functions return a dg_status; on failure dg_last_error() describes the
 * problem for the calling thread until its next call into the library.
 * Strings returned through char** are heap-allocated and released with
 * dg_string_free.
 */
#ifndef DUALGUARD_DUALGUARD_H_
#define DUALGUARD_DUALGUARD_H_

#include <stddef.h>
#include <stdint.h>

#if defined(DG_BUILDING_LIBRARY)
#define DG_API __attribute__((visibility("default")))
#else
#define DG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dg_status {
  DG_OK = 0,
  DG_ERR_INTERNAL = 1,
  DG_ERR_CONFIG = 2,
  DG_ERR_DATA = 3,
  DG_ERR_NUMERIC = 4,
  DG_ERR_ARGUMENT = 5, /* null handle or pointer, bad index */
} dg_status;

typedef struct dg_config dg_config;
typedef struct dg_tensor dg_tensor;
typedef struct dg_bank dg_bank;
typedef struct dg_steering dg_steering;

DG_API const char* dg_version(void);
/* Message of the last failure on this thread, "" if none. */
DG_API const char* dg_last_error(void);
DG_API void dg_string_free(char* s);

/* ---- configuration ---- */

/* path may be NULL for built-in defaults. */
DG_API dg_status dg_config_load(const char* path, dg_config** out);
/* "a.b=value"; value parsed as JSON when possible, else as a string. */
DG_API dg_status dg_config_set(dg_config* cfg, const char* assignment);
DG_API dg_status dg_config_set_seed(dg_config* cfg, uint64_t seed);
DG_API dg_status dg_config_set_out_dir(dg_config* cfg, const char* dir);
DG_API dg_status dg_config_validate(const dg_config* cfg);
DG_API dg_status dg_config_to_json(const dg_config* cfg, char** json_out);
DG_API void dg_config_free(dg_config* cfg);

/* ---- pipeline commands; each writes a JSON summary to *summary_out ---- */

DG_API dg_status dg_cmd_validate_config(const dg_config* cfg, char** summary_out);
DG_API dg_status dg_cmd_gen_usp(const dg_config* cfg, char** summary_out);
DG_API dg_status dg_cmd_synth_embed(const dg_config* cfg, char** summary_out);
DG_API dg_status dg_cmd_train_directions(const dg_config* cfg, char** summary_out);
DG_API dg_status dg_cmd_train_visual_steering(const dg_config* cfg, char** summary_out);
DG_API dg_status dg_cmd_intervene(const dg_config* cfg, const char* manifest_path,
                                  char** summary_out);
DG_API dg_status dg_cmd_run(const dg_config* cfg, char** summary_out);
/* param: "lambda", "epsilon_f", or NULL for both. */
DG_API dg_status dg_cmd_sweep(const dg_config* cfg, const char* param, char** summary_out);

/* ---- tensors (float32, 1 to 4 dims) ---- */

DG_API dg_status dg_tensor_create(const size_t* dims, size_t ndim, const float* data,
                                  dg_tensor** out);
DG_API dg_status dg_tensor_read(const char* path, dg_tensor** out);
DG_API dg_status dg_tensor_write(const dg_tensor* t, const char* path);
DG_API size_t dg_tensor_ndim(const dg_tensor* t);
DG_API size_t dg_tensor_dim(const dg_tensor* t, size_t axis);
DG_API size_t dg_tensor_size(const dg_tensor* t);
/* Borrowed pointer, valid until the tensor is freed. */
DG_API const float* dg_tensor_data(const dg_tensor* t);
DG_API double dg_tensor_frobenius(const dg_tensor* t);
DG_API void dg_tensor_free(dg_tensor* t);

/* ---- textual purification ---- */

DG_API dg_status dg_bank_load(const char* dir, dg_bank** out);
DG_API size_t dg_bank_categories(const dg_bank* bank);
DG_API size_t dg_bank_dim(const dg_bank* bank);
/* trace_out may be NULL. */
DG_API dg_status dg_bank_purify(const dg_bank* bank, const dg_tensor* embedding, double lambda,
                                double epsilon_f, dg_tensor** out, char** trace_out);
DG_API void dg_bank_free(dg_bank* bank);

/* ---- visual suppression ---- */

DG_API dg_status dg_steering_load(const char* dir, dg_steering** out);
/* Returns a suppressed copy of an N x d_v feature tensor at (step, layer). */
DG_API dg_status dg_steering_suppress(const dg_steering* steering, int step, int layer,
                                      const dg_tensor* features, double beta, dg_tensor** out);
DG_API void dg_steering_free(dg_steering* steering);

/* ---- metrics ---- */

/* Defense success rate in percent; DG_ERR_NUMERIC when n_b is zero. */
DG_API dg_status dg_compute_dsr(size_t n_b, size_t n_d, double* dsr_out);

#ifdef __cplusplus
}
#endif

#endif /* DUALGUARD_DUALGUARD_H_ */
