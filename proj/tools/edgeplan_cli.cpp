//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Links only the public C interface; all planning,
// simulation, and rendering happens inside the library.
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "edgeplan/edgeplan.h"

namespace fs = std::filesystem;

namespace {

int exit_code_for(ep_status st) {
    switch (st) {
    case EP_OK: return 0;
    case EP_ERR_INFEASIBLE: return 2;
    case EP_ERR_VERIFICATION: return 3;
    default: return 1;
    }
}

int report_failure(ep_status st) {
    std::cerr << "error: " << ep_last_error() << "\n";
    return exit_code_for(st);
}

#define CHECK(call)                                                                              \
    do {                                                                                         \
        ep_status st_ = (call);                                                                  \
        if (st_ != EP_OK) return report_failure(st_);                                            \
    } while (0)

bool parse_res(const std::string& s, uint32_t& height, uint32_t& width) {
    unsigned w = 0, h = 0;
    char extra = 0;
    if (sscanf(s.c_str(), "%ux%u%c", &w, &h, &extra) != 2 || w == 0 || h == 0) return false;
    width = w;
    height = h;
    return true;
}

// "auto:K" or "plan:PATH".
bool parse_cuts(const std::string& s, uint32_t& auto_k, std::string& plan_path) {
    if (s.rfind("auto:", 0) == 0) {
        try {
            size_t pos = 0;
            unsigned long k = std::stoul(s.substr(5), &pos);
            if (pos != s.size() - 5 || k == 0) return false;
            auto_k = uint32_t(k);
            return true;
        } catch (const std::exception&) {
            return false;
        }
    }
    if (s.rfind("plan:", 0) == 0 && s.size() > 5) {
        plan_path = s.substr(5);
        return true;
    }
    return false;
}

int write_out(const std::string& dir, const std::string& name, const char* text) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        std::cerr << "error: cannot create output directory " << dir << ": " << ec.message()
                  << "\n";
        return 1;
    }
    fs::path p = fs::path(dir) / name;
    std::ofstream out(p, std::ios::binary);
    if (!out || !(out << text)) {
        std::cerr << "error: cannot write " << p.string() << "\n";
        return 1;
    }
    return 0;
}

int write_string(const std::string& dir, const std::string& name, char* text) {
    int rc = write_out(dir, name, text);
    ep_string_free(text);
    return rc;
}

struct CommonOpts {
    std::string model, device, cuts = "auto:4", dtype = "int8";
    std::string input_res = "320x160", baseline_res = "640x360";
    std::string out_dir = "out";
    uint64_t seed = 1;
};

// Loads the two graph variants and the plan shared by plan/report. The
// original is always float32 at the baseline resolution; the optimised
// variant follows --dtype and --input-res. The plan is computed against
// the optimised graph and applies to both (same node ids).
struct PlannedModel {
    ep_graph* original = nullptr;
    ep_graph* optimised_f32 = nullptr;
    ep_graph* optimised = nullptr;
    ep_device* device = nullptr;
    ep_plan* plan = nullptr;
    ep_memory_report* mem_original = nullptr;
    ep_memory_report* mem_optimised = nullptr;

    ~PlannedModel() {
        ep_memory_report_free(mem_original);
        ep_memory_report_free(mem_optimised);
        ep_plan_free(plan);
        ep_device_free(device);
        if (optimised != optimised_f32) ep_graph_free(optimised);
        ep_graph_free(optimised_f32);
        ep_graph_free(original);
    }
};

int build_planned_model(const CommonOpts& o, PlannedModel& m) {
    uint32_t bh = 0, bw = 0, ih = 0, iw = 0;
    if (!parse_res(o.baseline_res, bh, bw)) {
        std::cerr << "error: --baseline-res must look like 640x360\n";
        return 1;
    }
    if (!parse_res(o.input_res, ih, iw)) {
        std::cerr << "error: --input-res must look like 320x160\n";
        return 1;
    }
    if (o.dtype != "float32" && o.dtype != "int8") {
        std::cerr << "error: --dtype must be float32 or int8\n";
        return 1;
    }

    CHECK(ep_device_load(o.device.c_str(), &m.device));
    CHECK(ep_graph_load(o.model.c_str(), &m.original));
    CHECK(ep_graph_prepare(m.original, bh, bw));
    CHECK(ep_graph_load(o.model.c_str(), &m.optimised_f32));
    CHECK(ep_graph_prepare(m.optimised_f32, ih, iw));
    if (o.dtype == "int8")
        CHECK(ep_graph_quantize(m.optimised_f32, o.seed, &m.optimised));
    else
        m.optimised = m.optimised_f32;

    uint32_t auto_k = 0;
    std::string plan_path;
    if (!parse_cuts(o.cuts, auto_k, plan_path)) {
        std::cerr << "error: --cuts must be auto:K or plan:PATH\n";
        return 1;
    }
    if (auto_k > 0)
        CHECK(ep_plan_auto(m.optimised, m.device, auto_k, &m.plan));
    else
        CHECK(ep_plan_load(plan_path.c_str(), m.optimised, &m.plan));

    CHECK(ep_memory_report_compute(m.original, m.plan, m.device, &m.mem_original));
    CHECK(ep_memory_report_compute(m.optimised, m.plan, m.device, &m.mem_optimised));
    return 0;
}

int cmd_plan(const CommonOpts& o) {
    PlannedModel m;
    if (int rc = build_planned_model(o, m)) return rc;

    char* text = nullptr;
    CHECK(ep_plan_to_json(m.plan, &text));
    if (int rc = write_string(o.out_dir, "plan.json", text)) return rc;
    CHECK(ep_memory_csv(m.mem_original, m.mem_optimised, &text));
    if (int rc = write_string(o.out_dir, "memory.csv", text)) return rc;
    CHECK(ep_memory_markdown(m.mem_original, m.mem_optimised, m.device, &text));
    if (int rc = write_string(o.out_dir, "memory.md", text)) return rc;

    uint32_t stages = 0;
    CHECK(ep_plan_stage_count(m.plan, &stages));
    std::cout << "plan: " << stages << " stages (" << o.dtype << " at " << o.input_res
              << ", original float32 at " << o.baseline_res << ")\n";
    std::cout << "wrote " << o.out_dir << "/plan.json, memory.csv, memory.md\n";
    return 0;
}

int cmd_simulate(const std::string& costs_path, const std::string& device_path,
                 const std::string& mode, uint32_t frames, uint64_t seed, double noise,
                 uint32_t runs, const std::string& out_dir) {
    ep_costs* costs = nullptr;
    ep_device* dev = nullptr;
    ep_sim* sim = nullptr;
    CHECK(ep_costs_load(costs_path.c_str(), &costs));
    CHECK(ep_device_load(device_path.c_str(), &dev));
    ep_status st = ep_simulate(costs, dev, mode.c_str(), frames, &sim);
    if (st != EP_OK) {
        ep_costs_free(costs);
        ep_device_free(dev);
        return report_failure(st);
    }

    char* text = nullptr;
    int rc = 0;
    if (rc == 0 && ep_sim_summary_json(sim, &text) == EP_OK)
        rc = write_string(out_dir, "sim_summary.json", text);
    if (rc == 0 && ep_sim_frames_csv(sim, &text) == EP_OK)
        rc = write_string(out_dir, "frames.csv", text);

    double* totals = nullptr;
    uint32_t count = 0;
    if (rc == 0) {
        st = ep_jitter_run(costs, noise, seed, runs, &totals, &count);
        if (st != EP_OK) rc = report_failure(st);
    }
    if (rc == 0) {
        std::string csv = "value\n";
        char buf[64];
        for (uint32_t i = 0; i < count; ++i) {
            snprintf(buf, sizeof(buf), "%.17g\n", totals[i]);
            csv += buf;
        }
        rc = write_out(out_dir, "runs.csv", csv.c_str());
    }
    if (rc == 0) {
        st = ep_bootstrap_json(totals, count, 25, 400, seed, noise > 0.0 ? 1 : 0, &text);
        if (st != EP_OK)
            rc = report_failure(st);
        else
            rc = write_string(out_dir, "bootstrap.json", text);
    }

    if (rc == 0) {
        double latency = 0, period = 0;
        char* bottleneck = nullptr;
        ep_sim_metrics(sim, &latency, &period, nullptr, nullptr);
        ep_sim_bottleneck(sim, &bottleneck);
        double share = 0;
        uint32_t n = 0;
        ep_sim_stage_count(sim, &n);
        for (uint32_t i = 0; i < n; ++i) {
            char* name = nullptr;
            double s = 0;
            ep_sim_stage(sim, i, &name, nullptr, &s);
            if (bottleneck && name && std::string(name) == bottleneck) share = s;
            ep_string_free(name);
        }
        char line[256];
        snprintf(line, sizeof(line),
                 "%s: frame latency %.2f ms, steady period %.2f ms, bottleneck %s (%.2f%% of "
                 "compute)\n",
                 mode.c_str(), latency, period, bottleneck ? bottleneck : "-", share * 100.0);
        std::cout << line;
        std::cout << "wrote " << out_dir
                  << "/sim_summary.json, frames.csv, runs.csv, bootstrap.json\n";
        ep_string_free(bottleneck);
    }

    ep_buffer_free(totals);
    ep_sim_free(sim);
    ep_costs_free(costs);
    ep_device_free(dev);
    return rc;
}

int cmd_verify(const CommonOpts& o, uint32_t trials, int corrupt_stage) {
    uint32_t ih = 0, iw = 0;
    if (!parse_res(o.input_res, ih, iw)) {
        std::cerr << "error: --input-res must look like 320x160\n";
        return 1;
    }

    ep_graph* g = nullptr;
    ep_graph* twin = nullptr;
    ep_device* dev = nullptr;
    ep_plan* plan = nullptr;
    CHECK(ep_device_load(o.device.c_str(), &dev));
    CHECK(ep_graph_load(o.model.c_str(), &g));
    CHECK(ep_graph_prepare(g, ih, iw));
    CHECK(ep_graph_quantize(g, o.seed, &twin));

    uint32_t auto_k = 0;
    std::string plan_path;
    if (!parse_cuts(o.cuts, auto_k, plan_path)) {
        std::cerr << "error: --cuts must be auto:K or plan:PATH\n";
        return 1;
    }
    if (auto_k > 0)
        CHECK(ep_plan_auto(g, dev, auto_k, &plan));
    else
        CHECK(ep_plan_load(plan_path.c_str(), g, &plan));

    int all_equal = 0;
    char* text = nullptr;
    CHECK(ep_verify(g, plan, trials, o.seed, corrupt_stage, twin, &all_equal, &text));
    int rc = write_string(o.out_dir, "verify.json", text);
    if (rc == 0) {
        std::cout << (all_equal ? "verify: all trials bitwise-equal\n"
                                : "verify: staged execution DIVERGED from the monolithic graph\n");
        std::cout << "wrote " << o.out_dir << "/verify.json\n";
    }

    ep_plan_free(plan);
    ep_graph_free(twin);
    ep_graph_free(g);
    ep_device_free(dev);
    if (rc != 0) return rc;
    return all_equal ? 0 : 3;
}

int cmd_report(const CommonOpts& o, const std::string& fixtures_dir) {
    fs::path dir(fixtures_dir);
    std::string mem_path = (dir / "reference_memory.json").string();
    std::string costs_path = (dir / "table2.json").string();

    char* text = nullptr;
    if (!o.model.empty()) {
        PlannedModel m;
        if (int rc = build_planned_model(o, m)) return rc;
        CHECK(ep_fixture_report(mem_path.c_str(), costs_path.c_str(), m.mem_original,
                                m.mem_optimised, &text));
    } else {
        CHECK(ep_fixture_report(mem_path.c_str(), costs_path.c_str(), nullptr, nullptr, &text));
    }

    std::cout << text;
    int rc = write_string(o.out_dir, "report.md", text);
    if (rc == 0) std::cout << "\nwrote " << o.out_dir << "/report.md\n";
    return rc;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deployment planner, quantiser, and pipeline simulator for small NN graphs"};
    app.require_subcommand(1);

    int rc = 0;
    CommonOpts opts;

    auto add_common = [&](CLI::App* cmd, bool need_model) {
        auto* m = cmd->add_option("--model", opts.model, "model graph JSON");
        if (need_model) m->required();
        cmd->add_option("--device", opts.device, "device description JSON")->required();
        cmd->add_option("--cuts", opts.cuts, "auto:K or plan:PATH (default auto:4)");
        cmd->add_option("--dtype", opts.dtype, "float32 or int8 (default int8)");
        cmd->add_option("--input-res", opts.input_res, "deployed resolution WxH (default 320x160)");
        cmd->add_option("--baseline-res", opts.baseline_res,
                        "resolution of the float32 baseline (default 640x360)");
        cmd->add_option("--seed", opts.seed, "seed for weights, calibration, and trials");
        cmd->add_option("--out", opts.out_dir, "output directory (default out)");
    };

    auto* plan_cmd = app.add_subcommand("plan", "partition a graph and write memory reports");
    add_common(plan_cmd, true);
    plan_cmd->callback([&] { rc = cmd_plan(opts); });

    std::string costs_path, mode = "sequential", fixtures_dir = "fixtures";
    uint32_t frames = 1, runs = 100, trials = 5;
    int corrupt_stage = -1;
    double noise = 0.0;

    auto* sim_cmd = app.add_subcommand("simulate", "run the frame-level execution model");
    sim_cmd->add_option("--stage-costs", costs_path, "stage-cost JSON")->required();
    sim_cmd->add_option("--device", opts.device, "device description JSON")->required();
    sim_cmd->add_option("--mode", mode, "sequential or pipelined (default sequential)");
    sim_cmd->add_option("--frames", frames, "frames to simulate (default 1)");
    sim_cmd->add_option("--seed", opts.seed, "seed for jitter runs");
    sim_cmd->add_option("--noise", noise, "per-stage jitter std in ms (default 0)");
    sim_cmd->add_option("--runs", runs, "jitter runs feeding the bootstrap (default 100)");
    sim_cmd->add_option("--out", opts.out_dir, "output directory (default out)");
    sim_cmd->callback([&] {
        rc = cmd_simulate(costs_path, opts.device, mode, frames, opts.seed, noise, runs,
                          opts.out_dir);
    });

    auto* verify_cmd =
        app.add_subcommand("verify", "check staged execution against the monolithic graph");
    add_common(verify_cmd, true);
    verify_cmd->add_option("--trials", trials, "seeded input trials (default 5)");
    verify_cmd->add_option("--corrupt-stage", corrupt_stage,
                           "perturb one weight in this stage (fault injection)");
    verify_cmd->callback([&] { rc = cmd_verify(opts, trials, corrupt_stage); });

    auto* report_cmd =
        app.add_subcommand("report", "render reference tables beside locally computed plans");
    report_cmd->add_option("--fixtures", fixtures_dir,
                           "directory holding reference_memory.json and table2.json");
    report_cmd->add_option("--model", opts.model, "model graph JSON (adds a computed section)");
    report_cmd->add_option("--device", opts.device, "device description JSON");
    report_cmd->add_option("--cuts", opts.cuts, "auto:K or plan:PATH (default auto:4)");
    report_cmd->add_option("--dtype", opts.dtype, "float32 or int8 (default int8)");
    report_cmd->add_option("--input-res", opts.input_res, "deployed resolution WxH");
    report_cmd->add_option("--baseline-res", opts.baseline_res, "float32 baseline resolution");
    report_cmd->add_option("--seed", opts.seed, "seed for weights and calibration");
    report_cmd->add_option("--out", opts.out_dir, "output directory (default out)");
    report_cmd->callback([&] {
        if (!opts.model.empty() && opts.device.empty()) {
            std::cerr << "error: --model needs --device for the computed section\n";
            rc = 1;
            return;
        }
        rc = cmd_report(opts, fixtures_dir);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    return rc;
}
