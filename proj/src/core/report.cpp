//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "core/report.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "json.hpp"

#include "core/error.hpp"

namespace edgeplan {

using nlohmann::json;

namespace {

std::string fmt2(double v) {
    char buf[64];
    snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

// Shortest decimal string that round-trips the double.
std::string fmt_shortest(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string opt_bytes_str(const std::optional<uint64_t>& v) {
    return v ? std::to_string(*v) : std::string("-");
}

uint64_t l2_part(const StageMemory& s) {
    return s.placement == Placement::L2 ? s.working_bytes : 0;
}

uint64_t ram_part(const StageMemory& s) {
    return s.placement == Placement::RAM ? s.working_bytes : 0;
}

void check_pairing(const MemoryReport& a, const MemoryReport& b) {
    if (a.stages.size() != b.stages.size())
        fail(ErrorCode::InvalidArgument, "memory reports cover different stage counts");
    for (size_t i = 0; i < a.stages.size(); ++i)
        if (a.stages[i].name != b.stages[i].name)
            fail(ErrorCode::InvalidArgument, "memory reports cover different stages");
}

void append_memory_table(std::ostringstream& out, const MemoryReport& original,
                         const MemoryReport& optimised) {
    out << "| stage | flash original | flash optimised | L2 original | L2 optimised "
           "| RAM original | RAM optimised |\n";
    out << "|---|---:|---:|---:|---:|---:|---:|\n";
    for (size_t i = 0; i < original.stages.size(); ++i) {
        const StageMemory& a = original.stages[i];
        const StageMemory& b = optimised.stages[i];
        out << "| " << a.name << " | " << a.weight_bytes << " | " << b.weight_bytes << " | "
            << l2_part(a) << " | " << l2_part(b) << " | " << ram_part(a) << " | " << ram_part(b)
            << " |\n";
    }
}

json sim_to_json(const SimResult& r) {
    json j;
    j["mode"] = r.mode;
    j["frames"] = r.frames;
    j["frame_latency_ms"] = r.frame_latency_ms;
    j["steady_period_ms"] = r.steady_period_ms;
    j["measured_period_ms"] = r.measured_period_ms;
    j["makespan_ms"] = r.makespan_ms;
    j["bottleneck"] = r.bottleneck >= 0 ? r.stage_names[size_t(r.bottleneck)] : "";
    j["stages"] = json::array();
    for (size_t i = 0; i < r.stage_names.size(); ++i) {
        json s;
        s["name"] = r.stage_names[i];
        s["total_ms"] = r.stage_total_ms[i];
        s["load_ms"] = r.stage_load_ms[i];
        s["share"] = r.stage_share[i];
        j["stages"].push_back(std::move(s));
    }
    j["link_ms"] = r.link_ms;
    return j;
}

} // namespace

std::string render_memory_csv(const MemoryReport& original, const MemoryReport& optimised) {
    check_pairing(original, optimised);
    std::ostringstream out;
    out << "stage,flash_original_bytes,flash_optimised_bytes,l2_original_bytes,"
           "l2_optimised_bytes,ram_original_bytes,ram_optimised_bytes,"
           "working_original_bytes,working_optimised_bytes,placement_original,"
           "placement_optimised\n";
    for (size_t i = 0; i < original.stages.size(); ++i) {
        const StageMemory& a = original.stages[i];
        const StageMemory& b = optimised.stages[i];
        out << a.name << "," << a.weight_bytes << "," << b.weight_bytes << "," << l2_part(a)
            << "," << l2_part(b) << "," << ram_part(a) << "," << ram_part(b) << ","
            << a.working_bytes << "," << b.working_bytes << "," << placement_name(a.placement)
            << "," << placement_name(b.placement) << "\n";
    }
    return out.str();
}

std::string render_memory_markdown(const MemoryReport& original, const MemoryReport& optimised,
                                   const DeviceSpec& dev) {
    check_pairing(original, optimised);
    std::ostringstream out;
    out << "# Memory plan: " << dev.name << "\n\n";
    out << "Byte counts per stage. Flash holds the stage's parameters; the working set\n"
           "sits in L2 when it fits " << dev.l2_bytes << " bytes and spills to RAM otherwise.\n\n";
    append_memory_table(out, original, optimised);

    out << "\n## Stage details (optimised)\n\n";
    out << "| stage | working bytes | placement | transfer in | transfer out | conv tiling (L1 "
        << dev.l1_bytes << " bytes) |\n";
    out << "|---|---:|---|---:|---:|---|\n";
    for (const StageMemory& s : optimised.stages) {
        out << "| " << s.name << " | " << s.working_bytes << " | " << placement_name(s.placement)
            << " | " << s.transfer_in_bytes << " | " << s.transfer_out_bytes << " | ";
        bool first = true;
        for (const StageTile& t : s.tiles) {
            if (!first) out << "; ";
            first = false;
            out << "node " << t.node_id << ": ";
            if (t.feasible)
                out << t.plan.tile_rows << " rows x " << t.plan.n_tiles << " tiles, "
                    << t.plan.buffer_bytes << " bytes";
            else
                out << "infeasible";
        }
        if (first) out << "-";
        out << " |\n";
    }

    out << "\nTotal parameter bytes: original " << original.total_weight_bytes << ", optimised "
        << optimised.total_weight_bytes << ". Peak working set: original "
        << original.max_working_bytes << ", optimised " << optimised.max_working_bytes << ".\n";
    return out.str();
}

std::string render_frames_csv(const SimResult& r) {
    std::ostringstream out;
    out << "frame,done_ms,period_ms\n";
    char buf[96];
    for (size_t j = 0; j < r.frame_done_ms.size(); ++j) {
        double period = j == 0 ? r.frame_done_ms[0] : r.frame_done_ms[j] - r.frame_done_ms[j - 1];
        snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f\n", j, r.frame_done_ms[j], period);
        out << buf;
    }
    return out.str();
}

std::string render_sim_summary_json(const SimResult& r) { return sim_to_json(r).dump(2) + "\n"; }

std::string render_bootstrap_json(const BootstrapResult& b, const ShapiroWilk* sw) {
    json j;
    j["resample_size"] = b.resample_size;
    j["reps"] = b.reps;
    j["seed"] = b.seed;
    j["grand_mean"] = b.grand_mean;
    j["ci_low"] = b.ci_low;
    j["ci_high"] = b.ci_high;
    if (sw) {
        j["shapiro_wilk"]["w"] = sw->w;
        j["shapiro_wilk"]["p_value"] = sw->p_value;
    }
    return j.dump(2) + "\n";
}

std::string render_verify_json(const VerifyReport& r, const QuantErrorSummary* quant) {
    json j;
    j["all_equal"] = r.all_equal;
    j["corrupted_node_id"] = r.corrupted_node_id;
    j["trials"] = json::array();
    for (const VerifyTrial& t : r.trials) {
        json e;
        e["seed"] = t.seed;
        e["bitwise_equal"] = t.bitwise_equal;
        e["max_abs"] = t.max_abs;
        j["trials"].push_back(std::move(e));
    }
    if (quant) {
        j["quant_error"]["max_abs"] = quant->max_abs;
        j["quant_error"]["max_rel"] = quant->max_rel;
        j["quant_error"]["trials"] = quant->trials;
    }
    return j.dump(2) + "\n";
}

std::string render_fixture_report_markdown(const std::vector<ReferenceMemoryEntry>& ref,
                                           const std::vector<StageCost>& costs,
                                           const MemoryReport* local_original,
                                           const MemoryReport* local_optimised) {
    std::ostringstream out;
    out << "# Deployment report\n\n";

    out << "## Reference memory (bytes)\n\n";
    out << "Reported measurements for the four-stage deployment. Original is float32 at\n"
           "640x360, optimised is int8 at 320x160; '-' marks values not reported.\n\n";
    out << "| model | flash original | flash optimised | L2 original | L2 optimised "
           "| RAM original | RAM optimised |\n";
    out << "|---|---:|---:|---:|---:|---:|---:|\n";
    for (const ReferenceMemoryEntry& m : ref) {
        out << "| " << m.name << " | " << opt_bytes_str(m.flash_original) << " | "
            << opt_bytes_str(m.flash_optimised) << " | " << opt_bytes_str(m.l2_original) << " | "
            << opt_bytes_str(m.l2_optimised) << " | " << opt_bytes_str(m.ram_original) << " | "
            << opt_bytes_str(m.ram_optimised) << " |\n";
    }

    out << "\n## Reference stage latencies\n\n";
    out << "| stage | per-pass ms | passes | total ms |\n";
    out << "|---|---:|---:|---:|\n";
    double total = 0.0;
    for (const StageCost& c : costs) {
        double t = stage_total_ms(c);
        total += t;
        out << "| " << c.name << " | " << fmt_shortest(c.compute_ms) << " | " << c.passes
            << " | " << fmt2(t) << " |\n";
    }
    out << "\nSequential total: " << fmt2(total) << " ms.";
    if (total > 0.0) {
        double top = 0.0;
        std::string top_name;
        for (const StageCost& c : costs)
            if (stage_total_ms(c) > top) {
                top = stage_total_ms(c);
                top_name = c.name;
            }
        out << " Largest stage: " << top_name << " at " << fmt2(top) << " ms ("
            << fmt2(top / total * 100.0) << "% of the total).";
    }
    out << "\n";

    if (local_original && local_optimised) {
        out << "\n## Locally computed plan (bytes)\n\n";
        out << "Same table shape for the bundled graph, computed by the planner.\n\n";
        append_memory_table(out, *local_original, *local_optimised);
    }
    return out.str();
}

} // namespace edgeplan
