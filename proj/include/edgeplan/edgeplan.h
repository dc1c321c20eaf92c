/*
 * Copyright (c) 2026 The edgeplan authors.
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the edgeplan library: deployment planning, quantisation,
 * memory analysis, partition verification, and pipeline simulation for
 * small neural network graphs on memory-constrained devices.
 *
 * Conventions: every function returns an ep_status; EP_OK means success.
 * On failure, ep_last_error() describes the problem (thread-local, valid
 * until the next failing call on the same thread). Out-parameters are only
 * written on success. Strings returned through char** are heap-allocated;
 * release them with ep_string_free. Handles are opaque; each has a
 * matching _free function, and freeing NULL is a no-op.
 */
#ifndef EDGEPLAN_H
#define EDGEPLAN_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ep_status {
    EP_OK = 0,
    EP_ERR_INVALID_ARGUMENT = 1,
    EP_ERR_PARSE = 2,
    EP_ERR_VALIDATION = 3,
    EP_ERR_INFEASIBLE = 4,
    EP_ERR_VERIFICATION = 5,
    EP_ERR_IO = 6,
    EP_ERR_INTERNAL = 7
} ep_status;

const char* ep_last_error(void);
const char* ep_version(void);
void ep_string_free(char* s);
void ep_buffer_free(double* v);

typedef struct ep_graph ep_graph;
typedef struct ep_device ep_device;
typedef struct ep_plan ep_plan;
typedef struct ep_memory_report ep_memory_report;
typedef struct ep_sim ep_sim;
typedef struct ep_costs ep_costs;

/* ---- model graphs ---- */

/* Parse and validate a model document. Weight files referenced by the
 * document are resolved relative to its directory. */
ep_status ep_graph_load(const char* model_path, ep_graph** out);
void ep_graph_free(ep_graph* g);

/* Resolve tensor shapes for the given input resolution and load or
 * synthesise weights. Must be called before planning or quantising. */
ep_status ep_graph_prepare(ep_graph* g, uint32_t height, uint32_t width);

/* Post-training int8 quantisation. Calibrates activation scales on seeded
 * random inputs and returns a new int8 graph; the source graph must be
 * prepared float32. */
ep_status ep_graph_quantize(const ep_graph* g, uint64_t calibration_seed, ep_graph** out);

ep_status ep_graph_node_count(const ep_graph* g, uint32_t* out);
ep_status ep_graph_is_int8(const ep_graph* g, int* out);

/* ---- devices ---- */

ep_status ep_device_load(const char* path, ep_device** out);
void ep_device_free(ep_device* d);
ep_status ep_device_clock_hz(const ep_device* d, double* out);

/* ---- partition plans ---- */

ep_status ep_plan_load(const char* path, const ep_graph* g, ep_plan** out);

/* Exhaustive k-stage cut search minimising (max per-stage memory, then
 * boundary transfer bytes) subject to every stage fitting device RAM. */
ep_status ep_plan_auto(const ep_graph* g, const ep_device* d, uint32_t k, ep_plan** out);

ep_status ep_plan_stage_count(const ep_plan* p, uint32_t* out);
ep_status ep_plan_to_json(const ep_plan* p, char** out);
void ep_plan_free(ep_plan* p);

/* ---- memory reports ---- */

ep_status ep_memory_report_compute(const ep_graph* g, const ep_plan* p, const ep_device* d,
                                   ep_memory_report** out);
/* placement: 0 = L2, 1 = RAM. */
ep_status ep_memory_report_stage(const ep_memory_report* r, uint32_t index,
                                 uint64_t* weight_bytes, uint64_t* working_bytes, int* placement,
                                 uint64_t* transfer_out_bytes);
ep_status ep_memory_csv(const ep_memory_report* original, const ep_memory_report* optimised,
                        char** out);
ep_status ep_memory_markdown(const ep_memory_report* original, const ep_memory_report* optimised,
                             const ep_device* d, char** out);
void ep_memory_report_free(ep_memory_report* r);

/* ---- plan verification ---- */

/* Compares staged float execution against the monolithic graph bitwise on
 * seeded inputs. corrupt_stage >= 0 perturbs one weight in that stage to
 * exercise the failure path; pass -1 for an honest run. If an int8 twin of
 * the graph is supplied, its dequantised-output error summary is included
 * in the JSON (it never affects all_equal). */
ep_status ep_verify(const ep_graph* g, const ep_plan* p, uint32_t trials, uint64_t seed,
                    int corrupt_stage, const ep_graph* int8_twin, int* all_equal, char** json_out);

/* ---- stage costs and simulation ---- */

ep_status ep_costs_load(const char* path, ep_costs** out);
ep_status ep_costs_count(const ep_costs* c, uint32_t* out);
void ep_costs_free(ep_costs* c);

/* mode: "sequential" or "pipelined". */
ep_status ep_simulate(const ep_costs* c, const ep_device* d, const char* mode, uint32_t frames,
                      ep_sim** out);
ep_status ep_sim_metrics(const ep_sim* s, double* frame_latency_ms, double* steady_period_ms,
                         double* measured_period_ms, double* makespan_ms);
ep_status ep_sim_stage_count(const ep_sim* s, uint32_t* out);
ep_status ep_sim_stage(const ep_sim* s, uint32_t index, char** name, double* total_ms,
                       double* share);
ep_status ep_sim_bottleneck(const ep_sim* s, char** name);
ep_status ep_sim_summary_json(const ep_sim* s, char** out);
ep_status ep_sim_frames_csv(const ep_sim* s, char** out);
void ep_sim_free(ep_sim* s);

/* Per-run totals under per-stage Gaussian jitter (std sigma_ms on every
 * stage, truncated at zero). Returns a malloc'd array of `runs` doubles. */
ep_status ep_jitter_run(const ep_costs* c, double sigma_ms, uint64_t seed, uint32_t runs,
                        double** values, uint32_t* count);

/* ---- statistics ---- */

ep_status ep_bootstrap(const double* values, uint32_t n, uint32_t resample_size, uint32_t reps,
                       uint64_t seed, double* grand_mean, double* ci_low, double* ci_high);
ep_status ep_shapiro_wilk(const double* values, uint32_t n, double* w, double* p_value);
ep_status ep_confidence_interval(const double* values, uint32_t n, double level, double* low,
                                 double* high);
ep_status ep_bootstrap_json(const double* values, uint32_t n, uint32_t resample_size,
                            uint32_t reps, uint64_t seed, int with_shapiro, char** out);

/* ---- unit conversion ---- */

ep_status ep_cycles_to_ms(double cycles, double clock_hz, double* ms);
ep_status ep_ms_to_cycles(double ms, double clock_hz, int64_t* cycles);

/* ---- fixture comparison report ---- */

/* Renders the reference memory table and stage latencies, with locally
 * computed reports beside them when both are supplied (pass NULLs to emit
 * the reference side alone). */
ep_status ep_fixture_report(const char* memory_fixture_path, const char* costs_path,
                            const ep_memory_report* local_original,
                            const ep_memory_report* local_optimised, char** out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* EDGEPLAN_H */
