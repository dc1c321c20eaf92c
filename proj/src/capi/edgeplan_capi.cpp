//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "edgeplan/edgeplan.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "core/error.hpp"
#include "core/executor.hpp"
#include "core/graph.hpp"
#include "core/memory.hpp"
#include "core/model_io.hpp"
#include "core/partition.hpp"
#include "core/quantize.hpp"
#include "core/report.hpp"
#include "core/rng.hpp"
#include "core/simulate.hpp"
#include "core/stats.hpp"

using namespace edgeplan;

struct ep_graph {
    Graph g;
    std::string base_dir;
};
struct ep_device {
    DeviceSpec d;
};
struct ep_plan {
    PartitionPlan p;
};
struct ep_memory_report {
    MemoryReport r;
};
struct ep_sim {
    SimResult r;
};
struct ep_costs {
    std::vector<StageCost> c;
};

namespace {

constexpr uint64_t kCalibrationTag = 0xCA11B8;

thread_local std::string t_last_error;

ep_status map_code(ErrorCode c) {
    switch (c) {
    case ErrorCode::InvalidArgument: return EP_ERR_INVALID_ARGUMENT;
    case ErrorCode::Parse: return EP_ERR_PARSE;
    case ErrorCode::Validation: return EP_ERR_VALIDATION;
    case ErrorCode::Infeasible: return EP_ERR_INFEASIBLE;
    case ErrorCode::Verification: return EP_ERR_VERIFICATION;
    case ErrorCode::Io: return EP_ERR_IO;
    case ErrorCode::Internal: return EP_ERR_INTERNAL;
    }
    return EP_ERR_INTERNAL;
}

template <typename F> ep_status guarded(F&& f) {
    try {
        f();
        return EP_OK;
    } catch (const Error& e) {
        t_last_error = e.what();
        return map_code(e.code());
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return EP_ERR_INTERNAL;
    } catch (...) {
        t_last_error = "unknown failure";
        return EP_ERR_INTERNAL;
    }
}

ep_status bad_arg(const char* msg) {
    t_last_error = msg;
    return EP_ERR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) fail(ErrorCode::Internal, "out of memory");
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

} // namespace

extern "C" {

const char* ep_last_error(void) { return t_last_error.c_str(); }

const char* ep_version(void) { return "0.1.0"; }

void ep_string_free(char* s) { std::free(s); }

void ep_buffer_free(double* v) { std::free(v); }

/* ---- model graphs ---- */

ep_status ep_graph_load(const char* model_path, ep_graph** out) {
    if (!model_path || !out) return bad_arg("ep_graph_load: null argument");
    return guarded([&] {
        auto* h = new ep_graph();
        try {
            h->g = load_model_file(model_path);
            h->base_dir = dir_of(model_path);
        } catch (...) {
            delete h;
            throw;
        }
        *out = h;
    });
}

void ep_graph_free(ep_graph* g) { delete g; }

ep_status ep_graph_prepare(ep_graph* g, uint32_t height, uint32_t width) {
    if (!g) return bad_arg("ep_graph_prepare: null graph");
    return guarded([&] {
        infer_shapes(g->g, height, width);
        materialize_weights(g->g, g->base_dir);
    });
}

ep_status ep_graph_quantize(const ep_graph* g, uint64_t calibration_seed, ep_graph** out) {
    if (!g || !out) return bad_arg("ep_graph_quantize: null argument");
    return guarded([&] {
        ActivationMap calibration =
            make_seeded_inputs(g->g, mix_seed(calibration_seed, kCalibrationTag));
        auto* h = new ep_graph();
        try {
            h->g = quantize_graph(g->g, calibration);
            h->base_dir = g->base_dir;
        } catch (...) {
            delete h;
            throw;
        }
        *out = h;
    });
}

ep_status ep_graph_node_count(const ep_graph* g, uint32_t* out) {
    if (!g || !out) return bad_arg("ep_graph_node_count: null argument");
    *out = uint32_t(g->g.nodes.size());
    return EP_OK;
}

ep_status ep_graph_is_int8(const ep_graph* g, int* out) {
    if (!g || !out) return bad_arg("ep_graph_is_int8: null argument");
    *out = g->g.is_int8 ? 1 : 0;
    return EP_OK;
}

/* ---- devices ---- */

ep_status ep_device_load(const char* path, ep_device** out) {
    if (!path || !out) return bad_arg("ep_device_load: null argument");
    return guarded([&] { *out = new ep_device{load_device_file(path)}; });
}

void ep_device_free(ep_device* d) { delete d; }

ep_status ep_device_clock_hz(const ep_device* d, double* out) {
    if (!d || !out) return bad_arg("ep_device_clock_hz: null argument");
    *out = d->d.clock_hz;
    return EP_OK;
}

/* ---- partition plans ---- */

ep_status ep_plan_load(const char* path, const ep_graph* g, ep_plan** out) {
    if (!path || !g || !out) return bad_arg("ep_plan_load: null argument");
    return guarded([&] {
        PartitionPlan p = load_plan_file(path);
        *out = new ep_plan{split_nodes(g->g, p.stages)};
    });
}

ep_status ep_plan_auto(const ep_graph* g, const ep_device* d, uint32_t k, ep_plan** out) {
    if (!g || !d || !out) return bad_arg("ep_plan_auto: null argument");
    return guarded([&] { *out = new ep_plan{auto_cuts(g->g, d->d, k)}; });
}

ep_status ep_plan_stage_count(const ep_plan* p, uint32_t* out) {
    if (!p || !out) return bad_arg("ep_plan_stage_count: null argument");
    *out = uint32_t(p->p.stages.size());
    return EP_OK;
}

ep_status ep_plan_to_json(const ep_plan* p, char** out) {
    if (!p || !out) return bad_arg("ep_plan_to_json: null argument");
    return guarded([&] { *out = dup_string(plan_to_json(p->p)); });
}

void ep_plan_free(ep_plan* p) { delete p; }

/* ---- memory reports ---- */

ep_status ep_memory_report_compute(const ep_graph* g, const ep_plan* p, const ep_device* d,
                                   ep_memory_report** out) {
    if (!g || !p || !d || !out) return bad_arg("ep_memory_report_compute: null argument");
    return guarded([&] { *out = new ep_memory_report{memory_report(g->g, p->p, d->d)}; });
}

ep_status ep_memory_report_stage(const ep_memory_report* r, uint32_t index,
                                 uint64_t* weight_bytes, uint64_t* working_bytes, int* placement,
                                 uint64_t* transfer_out_bytes) {
    if (!r) return bad_arg("ep_memory_report_stage: null report");
    if (index >= r->r.stages.size()) return bad_arg("ep_memory_report_stage: index out of range");
    const StageMemory& s = r->r.stages[index];
    if (weight_bytes) *weight_bytes = s.weight_bytes;
    if (working_bytes) *working_bytes = s.working_bytes;
    if (placement) *placement = s.placement == Placement::RAM ? 1 : 0;
    if (transfer_out_bytes) *transfer_out_bytes = s.transfer_out_bytes;
    return EP_OK;
}

ep_status ep_memory_csv(const ep_memory_report* original, const ep_memory_report* optimised,
                        char** out) {
    if (!original || !optimised || !out) return bad_arg("ep_memory_csv: null argument");
    return guarded([&] { *out = dup_string(render_memory_csv(original->r, optimised->r)); });
}

ep_status ep_memory_markdown(const ep_memory_report* original, const ep_memory_report* optimised,
                             const ep_device* d, char** out) {
    if (!original || !optimised || !d || !out) return bad_arg("ep_memory_markdown: null argument");
    return guarded(
        [&] { *out = dup_string(render_memory_markdown(original->r, optimised->r, d->d)); });
}

void ep_memory_report_free(ep_memory_report* r) { delete r; }

/* ---- plan verification ---- */

ep_status ep_verify(const ep_graph* g, const ep_plan* p, uint32_t trials, uint64_t seed,
                    int corrupt_stage, const ep_graph* int8_twin, int* all_equal,
                    char** json_out) {
    if (!g || !p) return bad_arg("ep_verify: null argument");
    return guarded([&] {
        VerifyReport r = verify_plan(g->g, p->p, trials, seed, corrupt_stage);
        QuantErrorSummary q;
        const QuantErrorSummary* qp = nullptr;
        if (int8_twin) {
            q = quant_error_summary(g->g, int8_twin->g, trials, seed);
            qp = &q;
        }
        if (all_equal) *all_equal = r.all_equal ? 1 : 0;
        if (json_out) *json_out = dup_string(render_verify_json(r, qp));
    });
}

/* ---- stage costs and simulation ---- */

ep_status ep_costs_load(const char* path, ep_costs** out) {
    if (!path || !out) return bad_arg("ep_costs_load: null argument");
    return guarded([&] { *out = new ep_costs{load_stage_costs_file(path)}; });
}

ep_status ep_costs_count(const ep_costs* c, uint32_t* out) {
    if (!c || !out) return bad_arg("ep_costs_count: null argument");
    *out = uint32_t(c->c.size());
    return EP_OK;
}

void ep_costs_free(ep_costs* c) { delete c; }

ep_status ep_simulate(const ep_costs* c, const ep_device* d, const char* mode, uint32_t frames,
                      ep_sim** out) {
    if (!c || !d || !mode || !out) return bad_arg("ep_simulate: null argument");
    return guarded([&] {
        std::string m = mode;
        SimResult r;
        if (m == "sequential")
            r = simulate_sequential(c->c, d->d, frames);
        else if (m == "pipelined")
            r = simulate_pipelined(c->c, d->d, frames);
        else
            fail(ErrorCode::Validation, "unknown simulation mode: " + m);
        *out = new ep_sim{std::move(r)};
    });
}

ep_status ep_sim_metrics(const ep_sim* s, double* frame_latency_ms, double* steady_period_ms,
                         double* measured_period_ms, double* makespan_ms) {
    if (!s) return bad_arg("ep_sim_metrics: null simulation");
    if (frame_latency_ms) *frame_latency_ms = s->r.frame_latency_ms;
    if (steady_period_ms) *steady_period_ms = s->r.steady_period_ms;
    if (measured_period_ms) *measured_period_ms = s->r.measured_period_ms;
    if (makespan_ms) *makespan_ms = s->r.makespan_ms;
    return EP_OK;
}

ep_status ep_sim_stage_count(const ep_sim* s, uint32_t* out) {
    if (!s || !out) return bad_arg("ep_sim_stage_count: null argument");
    *out = uint32_t(s->r.stage_names.size());
    return EP_OK;
}

ep_status ep_sim_stage(const ep_sim* s, uint32_t index, char** name, double* total_ms,
                       double* share) {
    if (!s) return bad_arg("ep_sim_stage: null simulation");
    if (index >= s->r.stage_names.size()) return bad_arg("ep_sim_stage: index out of range");
    return guarded([&] {
        if (name) *name = dup_string(s->r.stage_names[index]);
        if (total_ms) *total_ms = s->r.stage_total_ms[index];
        if (share) *share = s->r.stage_share[index];
    });
}

ep_status ep_sim_bottleneck(const ep_sim* s, char** name) {
    if (!s || !name) return bad_arg("ep_sim_bottleneck: null argument");
    return guarded([&] {
        *name = dup_string(
            s->r.bottleneck >= 0 ? s->r.stage_names[size_t(s->r.bottleneck)] : std::string());
    });
}

ep_status ep_sim_summary_json(const ep_sim* s, char** out) {
    if (!s || !out) return bad_arg("ep_sim_summary_json: null argument");
    return guarded([&] { *out = dup_string(render_sim_summary_json(s->r)); });
}

ep_status ep_sim_frames_csv(const ep_sim* s, char** out) {
    if (!s || !out) return bad_arg("ep_sim_frames_csv: null argument");
    return guarded([&] { *out = dup_string(render_frames_csv(s->r)); });
}

void ep_sim_free(ep_sim* s) { delete s; }

ep_status ep_jitter_run(const ep_costs* c, double sigma_ms, uint64_t seed, uint32_t runs,
                        double** values, uint32_t* count) {
    if (!c || !values || !count) return bad_arg("ep_jitter_run: null argument");
    return guarded([&] {
        std::vector<double> sigmas(c->c.size(), sigma_ms);
        std::vector<double> totals = jitter_model(c->c, sigmas, seed, runs);
        auto* buf = static_cast<double*>(std::malloc(totals.size() * sizeof(double)));
        if (!buf) fail(ErrorCode::Internal, "out of memory");
        std::memcpy(buf, totals.data(), totals.size() * sizeof(double));
        *values = buf;
        *count = uint32_t(totals.size());
    });
}

/* ---- statistics ---- */

ep_status ep_bootstrap(const double* values, uint32_t n, uint32_t resample_size, uint32_t reps,
                       uint64_t seed, double* grand_mean, double* ci_low, double* ci_high) {
    if (!values || n == 0) return bad_arg("ep_bootstrap: empty input");
    return guarded([&] {
        std::vector<double> v(values, values + n);
        BootstrapResult b = bootstrap_mean(v, resample_size, reps, seed);
        if (grand_mean) *grand_mean = b.grand_mean;
        if (ci_low) *ci_low = b.ci_low;
        if (ci_high) *ci_high = b.ci_high;
    });
}

ep_status ep_shapiro_wilk(const double* values, uint32_t n, double* w, double* p_value) {
    if (!values || n == 0) return bad_arg("ep_shapiro_wilk: empty input");
    return guarded([&] {
        std::vector<double> v(values, values + n);
        ShapiroWilk sw = shapiro_wilk(v);
        if (w) *w = sw.w;
        if (p_value) *p_value = sw.p_value;
    });
}

ep_status ep_confidence_interval(const double* values, uint32_t n, double level, double* low,
                                 double* high) {
    if (!values || n == 0) return bad_arg("ep_confidence_interval: empty input");
    return guarded([&] {
        std::vector<double> v(values, values + n);
        auto [lo, hi] = confidence_interval(v, level);
        if (low) *low = lo;
        if (high) *high = hi;
    });
}

ep_status ep_bootstrap_json(const double* values, uint32_t n, uint32_t resample_size,
                            uint32_t reps, uint64_t seed, int with_shapiro, char** out) {
    if (!values || n == 0 || !out) return bad_arg("ep_bootstrap_json: bad argument");
    return guarded([&] {
        std::vector<double> v(values, values + n);
        BootstrapResult b = bootstrap_mean(v, resample_size, reps, seed);
        ShapiroWilk sw;
        const ShapiroWilk* swp = nullptr;
        if (with_shapiro) {
            sw = shapiro_wilk(v);
            swp = &sw;
        }
        *out = dup_string(render_bootstrap_json(b, swp));
    });
}

/* ---- unit conversion ---- */

ep_status ep_cycles_to_ms(double cycles, double clock_hz, double* ms) {
    if (!ms) return bad_arg("ep_cycles_to_ms: null output");
    return guarded([&] { *ms = cycles_to_ms(cycles, clock_hz); });
}

ep_status ep_ms_to_cycles(double ms, double clock_hz, int64_t* cycles) {
    if (!cycles) return bad_arg("ep_ms_to_cycles: null output");
    return guarded([&] { *cycles = ms_to_cycles(ms, clock_hz); });
}

/* ---- fixture comparison report ---- */

ep_status ep_fixture_report(const char* memory_fixture_path, const char* costs_path,
                            const ep_memory_report* local_original,
                            const ep_memory_report* local_optimised, char** out) {
    if (!memory_fixture_path || !costs_path || !out)
        return bad_arg("ep_fixture_report: null argument");
    return guarded([&] {
        std::vector<ReferenceMemoryEntry> ref = load_reference_memory_file(memory_fixture_path);
        std::vector<StageCost> costs = load_stage_costs_file(costs_path);
        *out = dup_string(render_fixture_report_markdown(
            ref, costs, local_original ? &local_original->r : nullptr,
            local_optimised ? &local_optimised->r : nullptr));
    });
}

} /* extern "C" */
