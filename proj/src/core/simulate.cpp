//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "core/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace edgeplan {

namespace {

constexpr uint64_t kJitterTag = 0x17772026;

void check_stages(const std::vector<StageCost>& stages, uint32_t frames) {
    if (stages.empty()) fail(ErrorCode::InvalidArgument, "no stages to simulate");
    if (frames < 1) fail(ErrorCode::Validation, "frames must be at least 1");
    for (const auto& s : stages) {
        if (!(s.compute_ms >= 0.0))
            fail(ErrorCode::Validation, "stage '" + s.name + "' has negative compute time");
        if (s.passes < 1)
            fail(ErrorCode::Validation, "stage '" + s.name + "' has zero passes");
    }
}

int argmax(const std::vector<double>& v) {
    int best = 0;
    for (size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[size_t(best)]) best = int(i);
    return best;
}

} // namespace

double cycles_to_ms(double cycles, double clock_hz) {
    if (!(clock_hz > 0.0)) fail(ErrorCode::InvalidArgument, "clock rate must be positive");
    return cycles / clock_hz * 1000.0;
}

int64_t ms_to_cycles(double ms, double clock_hz) {
    if (!(clock_hz > 0.0)) fail(ErrorCode::InvalidArgument, "clock rate must be positive");
    return llround(ms / 1000.0 * clock_hz);
}

double stage_total_ms(const StageCost& c) { return c.compute_ms * double(c.passes); }

double transfer_ms(uint64_t bytes, const DeviceSpec& dev) {
    if (bytes == 0) return 0.0;
    if (!(dev.link_bandwidth_bytes_per_s > 0.0))
        fail(ErrorCode::InvalidArgument, "link bandwidth must be positive to move data");
    return double(bytes) / dev.link_bandwidth_bytes_per_s * 1000.0 + dev.link_latency_s * 1000.0;
}

SimResult simulate_sequential(const std::vector<StageCost>& stages, const DeviceSpec& dev,
                              uint32_t frames) {
    check_stages(stages, frames);
    const size_t K = stages.size();

    SimResult r;
    r.mode = "sequential";
    r.frames = frames;
    for (const auto& s : stages) {
        r.stage_names.push_back(s.name);
        r.stage_total_ms.push_back(stage_total_ms(s));
        double load = 0.0;
        if (s.weight_bytes > 0) {
            if (!(dev.load_bandwidth_bytes_per_s > 0.0))
                fail(ErrorCode::InvalidArgument, "load bandwidth must be positive to load weights");
            load = double(s.weight_bytes) / dev.load_bandwidth_bytes_per_s * 1000.0;
        }
        r.stage_load_ms.push_back(load);
    }
    r.link_ms.assign(K > 1 ? K - 1 : 0, 0.0);

    double latency = 0.0;
    std::vector<double> per_stage(K, 0.0);
    for (size_t i = 0; i < K; ++i) {
        per_stage[i] = r.stage_load_ms[i] + r.stage_total_ms[i];
        latency += per_stage[i];
    }
    r.frame_latency_ms = latency;
    r.steady_period_ms = latency;
    r.measured_period_ms = latency;
    r.makespan_ms = latency * double(frames);
    for (uint32_t j = 0; j < frames; ++j) r.frame_done_ms.push_back(latency * double(j + 1));
    r.bottleneck = argmax(per_stage);
    for (size_t i = 0; i < K; ++i)
        r.stage_share.push_back(latency > 0.0 ? per_stage[i] / latency : 0.0);
    return r;
}

SimResult simulate_pipelined(const std::vector<StageCost>& stages, const DeviceSpec& dev,
                             uint32_t frames) {
    check_stages(stages, frames);
    const size_t K = stages.size();

    SimResult r;
    r.mode = "pipelined";
    r.frames = frames;
    double compute_sum = 0.0;
    for (const auto& s : stages) {
        r.stage_names.push_back(s.name);
        r.stage_total_ms.push_back(stage_total_ms(s));
        r.stage_load_ms.push_back(0.0);
        compute_sum += stage_total_ms(s);
    }
    for (size_t i = 0; i + 1 < K; ++i)
        r.link_ms.push_back(transfer_ms(stages[i].transfer_out_bytes, dev));

    double max_stage = *std::max_element(r.stage_total_ms.begin(), r.stage_total_ms.end());
    double max_link =
        r.link_ms.empty() ? 0.0 : *std::max_element(r.link_ms.begin(), r.link_ms.end());
    r.steady_period_ms = std::max(max_stage, max_link);

    // finish[i]: when stage i finished its latest frame; link_free[i]: when
    // link i handed over its latest tensor. One frame at a time, stages in
    // order, so every max() below refers to already-final values.
    std::vector<double> finish(K, 0.0), link_free(K > 1 ? K - 1 : 0, 0.0);
    for (uint32_t j = 0; j < frames; ++j) {
        double arrive = 0.0;
        for (size_t i = 0; i < K; ++i) {
            double start = std::max(finish[i], arrive);
            finish[i] = start + r.stage_total_ms[i];
            if (i + 1 < K) {
                double depart = std::max(finish[i], link_free[i]);
                link_free[i] = depart + r.link_ms[i];
                arrive = link_free[i];
            }
        }
        r.frame_done_ms.push_back(finish[K - 1]);
    }

    r.frame_latency_ms = r.frame_done_ms.front();
    r.makespan_ms = r.frame_done_ms.back();
    r.measured_period_ms = frames >= 2
                               ? r.frame_done_ms[frames - 1] - r.frame_done_ms[frames - 2]
                               : r.frame_latency_ms;
    r.bottleneck = argmax(r.stage_total_ms);
    for (size_t i = 0; i < K; ++i)
        r.stage_share.push_back(compute_sum > 0.0 ? r.stage_total_ms[i] / compute_sum : 0.0);
    return r;
}

std::vector<double> jitter_model(const std::vector<StageCost>& stages,
                                 const std::vector<double>& sigma_ms, uint64_t seed,
                                 uint32_t runs) {
    check_stages(stages, 1);
    if (runs < 1) fail(ErrorCode::Validation, "runs must be at least 1");
    if (sigma_ms.size() != stages.size())
        fail(ErrorCode::InvalidArgument, "need one noise level per stage");
    for (double s : sigma_ms)
        if (!(s >= 0.0)) fail(ErrorCode::Validation, "noise level must be non-negative");

    std::vector<double> totals;
    totals.reserve(runs);
    for (uint32_t j = 0; j < runs; ++j) {
        Rng rng(mix_seed(mix_seed(seed, kJitterTag), j));
        double total = 0.0;
        for (size_t i = 0; i < stages.size(); ++i) {
            double t = stage_total_ms(stages[i]);
            if (sigma_ms[i] > 0.0) t = std::max(0.0, t + sigma_ms[i] * rng.normal());
            total += t;
        }
        totals.push_back(total);
    }
    return totals;
}

} // namespace edgeplan
