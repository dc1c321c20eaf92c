//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <vector>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "core/simulate.hpp"

using namespace edgeplan;

namespace {

DeviceSpec link_device(double link_bw, double link_lat_s, double load_bw = 1e8) {
    DeviceSpec d;
    d.name = "sim";
    d.flash_bytes = 1u << 24;
    d.l2_bytes = 1u << 21;
    d.ram_bytes = 1u << 26;
    d.l1_bytes = 1u << 17;
    d.clock_hz = 370e6;
    d.load_bandwidth_bytes_per_s = load_bw;
    d.link_bandwidth_bytes_per_s = link_bw;
    d.link_latency_s = link_lat_s;
    return d;
}

StageCost stage(const std::string& name, double compute_ms, uint32_t passes = 1,
                uint64_t weight_bytes = 0, uint64_t out_bytes = 0) {
    StageCost c;
    c.name = name;
    c.compute_ms = compute_ms;
    c.passes = passes;
    c.weight_bytes = weight_bytes;
    c.transfer_out_bytes = out_bytes;
    return c;
}

} // namespace

TEST_CASE("cycle and millisecond conversions") {
    CHECK(cycles_to_ms(0.0, 370e6) == 0.0);
    CHECK(cycles_to_ms(370e6, 370e6) == 1000.0);
    CHECK(ms_to_cycles(1000.0, 370e6) == 370000000);
    CHECK(ms_to_cycles(0.0, 370e6) == 0);
    // The four stage totals are whole cycle counts at 370 MHz, so the round
    // trip through cycles is exact well below a nanosecond.
    for (double ms : {15.13, 44.96, 674.79, 5.58}) {
        double back = cycles_to_ms(double(ms_to_cycles(ms, 370e6)), 370e6);
        CHECK(std::fabs(back - ms) < 1e-9);
    }
    // Anything else lands on the nearest cycle, off by at most half a cycle
    // (about 1.4 ns at this clock).
    const double half_cycle_ms = 0.5 / 370e6 * 1000.0;
    for (double ms : {10.54359375, 3.14159, 0.1234567}) {
        double back = cycles_to_ms(double(ms_to_cycles(ms, 370e6)), 370e6);
        CHECK(std::fabs(back - ms) <= half_cycle_ms * (1.0 + 1e-12));
    }
    CHECK_THROWS_AS(cycles_to_ms(1.0, 0.0), Error);
    CHECK_THROWS_AS(ms_to_cycles(1.0, -5.0), Error);
}

TEST_CASE("transfer time is bandwidth plus latency, free at zero bytes") {
    DeviceSpec d = link_device(1e7, 1e-4);
    CHECK(transfer_ms(0, d) == 0.0);
    // 1e6 bytes at 1e7 B/s = 100 ms, plus 0.1 ms latency.
    CHECK(transfer_ms(1000000, d) == doctest::Approx(100.1).epsilon(1e-12));
    DeviceSpec broken = link_device(0.0, 0.0);
    CHECK_THROWS_AS(transfer_ms(5, broken), Error);
}

TEST_CASE("sequential: one stage of 10 ms over 3 frames") {
    DeviceSpec d = link_device(1e7, 1e-4);
    SimResult r = simulate_sequential({stage("only", 10.0)}, d, 3);
    CHECK(r.mode == "sequential");
    CHECK(r.frame_latency_ms == 10.0);
    CHECK(r.steady_period_ms == 10.0);
    CHECK(r.measured_period_ms == 10.0);
    CHECK(r.frame_done_ms == std::vector<double>{10.0, 20.0, 30.0});
    CHECK(r.makespan_ms == 30.0);
    CHECK(r.bottleneck == 0);
    CHECK(r.stage_share == std::vector<double>{1.0});
}

TEST_CASE("sequential adds per-stage weight loads") {
    DeviceSpec d = link_device(1e7, 1e-4, 1e8); // 1e8 B/s swap-in
    // 2e6 bytes -> 20 ms load for the first stage, none for the second.
    SimResult r = simulate_sequential({stage("a", 5.0, 1, 2000000), stage("b", 7.0)}, d, 2);
    CHECK(r.stage_load_ms[0] == doctest::Approx(20.0));
    CHECK(r.stage_load_ms[1] == 0.0);
    CHECK(r.frame_latency_ms == doctest::Approx(32.0));
    CHECK(r.frame_done_ms[1] == doctest::Approx(64.0));
    CHECK(r.bottleneck == 0); // 25 ms beats 7 ms
    CHECK(r.stage_share[0] == doctest::Approx(25.0 / 32.0));

    SUBCASE("multi-pass stages multiply compute, not load") {
        SimResult m = simulate_sequential({stage("a", 2.5, 4, 1000000)}, d, 1);
        CHECK(m.stage_total_ms[0] == doctest::Approx(10.0));
        CHECK(m.frame_latency_ms == doctest::Approx(20.0));
    }
}

TEST_CASE("pipelined: two 5 ms stages with free links") {
    DeviceSpec d = link_device(1e7, 0.0);
    SimResult r = simulate_pipelined({stage("a", 5.0), stage("b", 5.0)}, d, 3);
    CHECK(r.frame_done_ms == std::vector<double>{10.0, 15.0, 20.0});
    CHECK(r.frame_latency_ms == 10.0);
    CHECK(r.steady_period_ms == 5.0);
    CHECK(r.measured_period_ms == 5.0);
    CHECK(r.makespan_ms == 20.0);
}

TEST_CASE("pipelined one-stage degenerates to sequential with no loads") {
    DeviceSpec d = link_device(1e7, 1e-4);
    // The last stage's output stays put, so its transfer bytes are ignored.
    SimResult p = simulate_pipelined({stage("only", 4.0, 1, 0, 123456)}, d, 5);
    SimResult s = simulate_sequential({stage("only", 4.0)}, d, 5);
    CHECK(p.frame_done_ms == s.frame_done_ms);
    CHECK(p.steady_period_ms == s.steady_period_ms);
    CHECK(p.link_ms.empty());
}

TEST_CASE("pipelined serialises each link") {
    // Two 1 ms stages joined by a 10 ms transfer: the link is the bottleneck
    // and spaces frames 10 ms apart.
    DeviceSpec d = link_device(1e6, 0.0); // 10000 bytes -> 10 ms
    SimResult r = simulate_pipelined({stage("a", 1.0, 1, 0, 10000), stage("b", 1.0)}, d, 3);
    CHECK(r.link_ms == std::vector<double>{10.0});
    CHECK(r.steady_period_ms == 10.0);
    // Frame 1: a 0-1, wire 1-11, b 11-12. Frame 2: a 1-2, wire 11-21, b 21-22.
    CHECK(r.frame_done_ms == std::vector<double>{12.0, 22.0, 32.0});
    CHECK(r.measured_period_ms == doctest::Approx(10.0));
}

TEST_CASE("pipelined first frame is the sum of stage and link times") {
    DeviceSpec d = link_device(1e7, 1e-4);
    Rng rng(7171);
    for (int trial = 0; trial < 100; ++trial) {
        size_t k = 1 + rng.below(5);
        std::vector<StageCost> stages;
        double want = 0.0;
        for (size_t i = 0; i < k; ++i) {
            StageCost c = stage("s" + std::to_string(i), rng.uniform(0.0, 20.0),
                                1 + uint32_t(rng.below(4)), 0,
                                rng.below(2) ? rng.below(100000) : 0);
            stages.push_back(c);
            want += stage_total_ms(c);
        }
        for (size_t i = 0; i + 1 < k; ++i) want += transfer_ms(stages[i].transfer_out_bytes, d);
        uint32_t frames = 1 + uint32_t(rng.below(6));
        SimResult r = simulate_pipelined(stages, d, frames);
        CAPTURE(trial);
        CHECK(r.frame_latency_ms == doctest::Approx(want).epsilon(1e-12));
        CHECK(r.frame_done_ms.size() == frames);
    }
}

TEST_CASE("pipelined tail spacing converges to the declared period") {
    DeviceSpec d = link_device(1e7, 1e-4);
    Rng rng(8282);
    for (int trial = 0; trial < 60; ++trial) {
        size_t k = 2 + rng.below(4);
        std::vector<StageCost> stages;
        for (size_t i = 0; i < k; ++i)
            stages.push_back(stage("s" + std::to_string(i), 0.5 + rng.uniform(0.0, 10.0), 1, 0,
                                   rng.below(60000)));
        SimResult r = simulate_pipelined(stages, d, 50);
        CAPTURE(trial);
        CHECK(r.measured_period_ms == doctest::Approx(r.steady_period_ms).epsilon(1e-9));
        // Completions never regress and the period bounds the spacing.
        for (size_t j = 1; j < r.frame_done_ms.size(); ++j)
            CHECK(r.frame_done_ms[j] >= r.frame_done_ms[j - 1]);
    }
}

TEST_CASE("throughput beats or matches one-device swapping when links are light") {
    // With every transfer shorter than the total compute, the pipeline
    // period cannot exceed the sequential frame latency.
    DeviceSpec d = link_device(1e7, 0.0);
    Rng rng(9393);
    for (int trial = 0; trial < 200; ++trial) {
        size_t k = 1 + rng.below(6);
        std::vector<StageCost> stages;
        double compute_total = 0.0;
        for (size_t i = 0; i < k; ++i) {
            stages.push_back(stage("s" + std::to_string(i), 0.1 + rng.uniform(0.0, 15.0)));
            compute_total += stages.back().compute_ms;
        }
        for (size_t i = 0; i + 1 < k; ++i) {
            // Keep each link below 90% of the total compute.
            double target_ms = rng.uniform(0.0, 0.9 * compute_total);
            stages[i].transfer_out_bytes = uint64_t(target_ms / 1000.0 * 1e7);
        }
        SimResult p = simulate_pipelined(stages, d, 10);
        SimResult s = simulate_sequential(stages, d, 10);
        CAPTURE(trial);
        CHECK(p.steady_period_ms <= s.frame_latency_ms + 1e-12);
        CHECK(p.measured_period_ms <= s.frame_latency_ms + 1e-9);
    }
}

TEST_CASE("simulation input validation") {
    DeviceSpec d = link_device(1e7, 1e-4);
    CHECK_THROWS_AS(simulate_sequential({}, d, 1), Error);
    CHECK_THROWS_AS(simulate_sequential({stage("a", 1.0)}, d, 0), Error);
    CHECK_THROWS_AS(simulate_pipelined({stage("a", -1.0)}, d, 1), Error);
    StageCost zero_passes = stage("a", 1.0);
    zero_passes.passes = 0;
    CHECK_THROWS_AS(simulate_pipelined({zero_passes}, d, 1), Error);
}

TEST_CASE("jitter model") {
    std::vector<StageCost> stages{stage("a", 30.0), stage("b", 50.0, 2)};

    SUBCASE("zero noise reproduces the deterministic total") {
        auto runs = jitter_model(stages, {0.0, 0.0}, 3, 8);
        for (double v : runs) CHECK(v == 130.0);
    }
    SUBCASE("seeded determinism and seed sensitivity") {
        auto a = jitter_model(stages, {1.0, 2.0}, 3, 16);
        auto b = jitter_model(stages, {1.0, 2.0}, 3, 16);
        auto c = jitter_model(stages, {1.0, 2.0}, 4, 16);
        CHECK(a == b);
        CHECK(a != c);
        // Runs are independent substreams: the first run of a longer batch
        // matches the first run of a shorter one.
        auto d2 = jitter_model(stages, {1.0, 2.0}, 3, 2);
        CHECK(a[0] == d2[0]);
        CHECK(a[1] == d2[1]);
    }
    SUBCASE("variance approximates the summed stage variances") {
        // Stage times far above sigma: truncation at zero never bites, so
        // var(total) ~ 1^2 + 2^2 = 5.
        auto runs = jitter_model(stages, {1.0, 2.0}, 99, 10000);
        double mean = std::accumulate(runs.begin(), runs.end(), 0.0) / double(runs.size());
        double var = 0.0;
        for (double v : runs) var += (v - mean) * (v - mean);
        var /= double(runs.size() - 1);
        CHECK(var > 5.0 * 0.8);
        CHECK(var < 5.0 * 1.2);
        CHECK(mean == doctest::Approx(130.0).epsilon(0.01));
    }
    SUBCASE("totals never go negative even under huge noise") {
        std::vector<StageCost> tiny{stage("t", 0.01)};
        auto runs = jitter_model(tiny, {50.0}, 5, 200);
        for (double v : runs) CHECK(v >= 0.0);
        bool clipped = false;
        for (double v : runs) clipped = clipped || v == 0.0;
        CHECK(clipped); // half the draws push a 0.01 ms stage below zero
    }
    SUBCASE("argument validation") {
        CHECK_THROWS_AS(jitter_model(stages, {1.0}, 3, 4), Error);
        CHECK_THROWS_AS(jitter_model(stages, {1.0, -1.0}, 3, 4), Error);
        CHECK_THROWS_AS(jitter_model(stages, {1.0, 1.0}, 3, 0), Error);
    }
}
