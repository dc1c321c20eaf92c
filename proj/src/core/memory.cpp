//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "core/memory.hpp"

#include <algorithm>

#include "core/error.hpp"
#include "core/partition.hpp"

namespace edgeplan {

std::map<std::string, TensorLife> tensor_lifetimes(const Graph& g) {
    if (!g.shapes_inferred) fail(ErrorCode::InvalidArgument, "liveness needs inferred shapes");
    const int n = int(g.topo.size());
    std::map<std::string, TensorLife> life;

    for (const auto& in : g.inputs) {
        TensorLife t;
        t.prod = 0;
        t.last = g.is_graph_output(in.name) ? n - 1 : 0;
        t.bytes = g.tensors.at(in.name).byte_size();
        life[in.name] = t;
    }
    for (int s = 0; s < n; ++s) {
        const LayerNode& node = *g.find_node(g.topo[size_t(s)]);
        TensorLife t;
        t.prod = s;
        t.last = g.is_graph_output(node.output) ? n - 1 : s;
        t.bytes = g.tensors.at(node.output).byte_size();
        life[node.output] = t;
    }
    for (int s = 0; s < n; ++s) {
        const LayerNode& node = *g.find_node(g.topo[size_t(s)]);
        for (const auto& in : node.inputs) {
            TensorLife& t = life.at(in);
            t.last = std::max(t.last, s);
        }
    }
    return life;
}

std::vector<uint64_t> live_bytes_per_step(const Graph& g) {
    const int n = int(g.topo.size());
    std::vector<uint64_t> steps(size_t(n), 0);
    for (const auto& [name, t] : tensor_lifetimes(g))
        for (int s = t.prod; s <= t.last; ++s) steps[size_t(s)] += t.bytes;
    return steps;
}

uint64_t peak_activation(const Graph& g) {
    uint64_t peak = 0;
    for (uint64_t b : live_bytes_per_step(g)) peak = std::max(peak, b);
    return peak;
}

Placement place(uint64_t working_bytes, const DeviceSpec& dev) {
    if (working_bytes <= dev.l2_bytes) return Placement::L2;
    if (working_bytes <= dev.ram_bytes) return Placement::RAM;
    fail(ErrorCode::Infeasible, "working set of " + std::to_string(working_bytes) +
                                    " bytes exceeds device RAM (" + std::to_string(dev.ram_bytes) +
                                    " bytes)");
}

TilePlan tile_plan(const LayerNode& conv, const TensorSpec& in, const TensorSpec& out,
                   uint64_t budget) {
    if (conv.kind != LayerKind::Conv2d)
        fail(ErrorCode::InvalidArgument, "tile_plan only handles conv2d nodes");
    if (in.dims.size() != 3 || out.dims.size() != 3)
        fail(ErrorCode::InvalidArgument, "tile_plan needs rank-3 HWC tensors");

    const uint64_t elem = dtype_size(in.dtype);
    const uint64_t weight_bytes = conv.weight_bytes(in.dtype);
    const uint64_t w_in = in.dims[1], c_in = in.dims[2];
    const uint64_t h_out = out.dims[0], w_out = out.dims[1], c_out = out.dims[2];

    if (weight_bytes > budget)
        fail(ErrorCode::Infeasible, "node " + std::to_string(conv.id) + ": weights alone (" +
                                        std::to_string(weight_bytes) + " bytes) exceed the " +
                                        std::to_string(budget) + "-byte budget");

    auto in_rows = [&](uint64_t t) { return (t - 1) * uint64_t(conv.stride) + uint64_t(conv.k_h); };
    auto cost = [&](uint64_t t) {
        uint64_t in_tile = in_rows(t) * w_in * c_in * elem;
        uint64_t out_tile = t * w_out * c_out * elem;
        return 2 * (in_tile + out_tile) + weight_bytes;
    };

    uint64_t t = 0;
    for (uint64_t cand = h_out; cand >= 1; --cand) {
        if (cost(cand) <= budget) {
            t = cand;
            break;
        }
    }
    if (t == 0)
        fail(ErrorCode::Infeasible, "node " + std::to_string(conv.id) +
                                        ": even a single output row does not fit the " +
                                        std::to_string(budget) + "-byte budget");

    TilePlan plan;
    plan.tile_rows = uint32_t(t);
    plan.n_tiles = uint32_t((h_out + t - 1) / t);
    plan.halo_rows = uint32_t(conv.k_h - 1);
    plan.buffer_bytes = cost(t);
    for (uint64_t row = 0; row < h_out; row += t) {
        uint64_t rows = std::min(t, h_out - row);
        plan.transfer_bytes_total +=
            in_rows(rows) * w_in * c_in * elem + rows * w_out * c_out * elem;
    }
    return plan;
}

MemoryReport memory_report(const Graph& g, const PartitionPlan& p, const DeviceSpec& dev) {
    StagedGraphs staged = build_stages(g, p);
    MemoryReport report;
    uint64_t boundary_in = 0;

    for (size_t i = 0; i < staged.stages.size(); ++i) {
        const Graph& stage = staged.stages[i];
        StageMemory m;
        m.name = p.stages[i].name;
        m.weight_bytes = weight_footprint(stage);
        m.working_bytes = peak_activation(stage);
        m.placement = place(m.working_bytes, dev);
        m.exceeds_flash = m.weight_bytes > dev.flash_bytes;
        m.transfer_in_bytes = boundary_in;

        if (i + 1 < staged.stages.size()) {
            for (const auto& name : staged.boundary_tensors[i]) {
                m.transfer_out_bytes += g.tensors.at(name).byte_size();
                m.transfer_out_names.push_back(name);
            }
        }
        boundary_in = m.transfer_out_bytes;

        for (int id : p.stages[i].node_ids) {
            const LayerNode* n = stage.find_node(id);
            if (!n || n->kind != LayerKind::Conv2d) continue;
            StageTile st;
            st.node_id = id;
            try {
                st.plan = tile_plan(*n, stage.tensors.at(n->inputs[0]),
                                    stage.tensors.at(n->output), dev.l1_bytes);
                st.feasible = true;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::Infeasible) throw;
                st.feasible = false;
                st.note = e.what();
            }
            m.tiles.push_back(std::move(st));
        }

        report.total_weight_bytes += m.weight_bytes;
        report.max_working_bytes = std::max(report.max_working_bytes, m.working_bytes);
        report.stages.push_back(std::move(m));
    }
    return report;
}

} // namespace edgeplan
