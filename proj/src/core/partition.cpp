//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "core/partition.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "core/error.hpp"
#include "core/executor.hpp"
#include "core/rng.hpp"

namespace edgeplan {

namespace {

constexpr uint64_t kVerifyInputTag = 0x7E57F100;

// Tensor availability in stage terms: the stage that produces each tensor
// (-1 for graph inputs) and the last stage that still needs it (graph
// outputs: the final stage, they are handed over at the very end).
struct StageLife {
    int prod = -1;
    int last = -1;
};

std::map<std::string, StageLife> stage_lifetimes(const Graph& g,
                                                 const std::map<int, int>& stage_of,
                                                 int n_stages) {
    std::map<std::string, StageLife> life;
    for (const auto& in : g.inputs) {
        StageLife s;
        s.prod = -1;
        s.last = g.is_graph_output(in.name) ? n_stages - 1 : -1;
        life[in.name] = s;
    }
    for (const auto& node : g.nodes) {
        StageLife s;
        s.prod = stage_of.at(node.id);
        s.last = g.is_graph_output(node.output) ? n_stages - 1 : s.prod;
        life[node.output] = s;
    }
    for (const auto& node : g.nodes) {
        int st = stage_of.at(node.id);
        for (const auto& in : node.inputs) {
            StageLife& s = life.at(in);
            s.last = std::max(s.last, st);
        }
    }
    return life;
}

// Deterministic tensor enumeration: graph inputs in declaration order, then
// node outputs in topological order.
std::vector<std::string> tensor_enumeration(const Graph& g) {
    std::vector<std::string> names;
    for (const auto& in : g.inputs) names.push_back(in.name);
    for (int id : g.topo) names.push_back(g.find_node(id)->output);
    return names;
}

std::map<int, int> stage_index_of(const Graph& g, const PartitionPlan& p) {
    std::map<int, int> stage_of;
    for (size_t i = 0; i < p.stages.size(); ++i) {
        if (p.stages[i].node_ids.empty())
            fail(ErrorCode::Validation, "plan stage '" + p.stages[i].name + "' has no nodes");
        for (int id : p.stages[i].node_ids) {
            if (!g.find_node(id))
                fail(ErrorCode::Validation, "plan references unknown node id " + std::to_string(id));
            if (!stage_of.emplace(id, int(i)).second)
                fail(ErrorCode::Validation,
                     "node " + std::to_string(id) + " appears in more than one stage");
        }
    }
    if (stage_of.size() != g.nodes.size())
        fail(ErrorCode::Validation, "plan covers " + std::to_string(stage_of.size()) + " of " +
                                        std::to_string(g.nodes.size()) + " nodes");

    // Frontier validity: dataflow may never point backwards.
    for (const auto& node : g.nodes) {
        int consumer = stage_of.at(node.id);
        for (const auto& in : node.inputs) {
            const LayerNode* producer = g.producer_of(in);
            if (!producer) continue; // graph input
            int ps = stage_of.at(producer->id);
            if (ps > consumer)
                fail(ErrorCode::Validation,
                     "invalid frontier: node " + std::to_string(producer->id) + " (stage " +
                         std::to_string(ps) + ") feeds node " + std::to_string(node.id) +
                         " (stage " + std::to_string(consumer) + ")");
        }
    }
    return stage_of;
}

} // namespace

StagedGraphs build_stages(const Graph& g, const PartitionPlan& p) {
    if (!g.shapes_inferred)
        fail(ErrorCode::InvalidArgument, "build_stages needs an inferred graph");
    if (p.stages.empty()) fail(ErrorCode::Validation, "plan has no stages");

    const int K = int(p.stages.size());
    std::map<int, int> stage_of = stage_index_of(g, p);
    std::map<std::string, StageLife> life = stage_lifetimes(g, stage_of, K);
    std::vector<std::string> names = tensor_enumeration(g);

    // Position of each node in the parent topo order, to keep stage node
    // lists in schedule order.
    std::map<int, int> topo_pos;
    for (size_t i = 0; i < g.topo.size(); ++i) topo_pos[g.topo[i]] = int(i);

    StagedGraphs out;
    out.boundary_tensors.resize(size_t(K - 1));
    for (int b = 0; b + 1 < K; ++b)
        for (const auto& name : names) {
            const StageLife& s = life.at(name);
            if (s.prod <= b && s.last >= b + 1) out.boundary_tensors[size_t(b)].push_back(name);
        }

    for (int i = 0; i < K; ++i) {
        Graph sg;
        sg.name = p.stages[size_t(i)].name;
        sg.is_int8 = g.is_int8;

        // Inputs: stage 0 takes the graph inputs it (or anyone downstream)
        // needs; later stages take exactly what crosses the boundary before
        // them.
        std::vector<std::string> in_tensors;
        if (i == 0) {
            for (const auto& in : g.inputs)
                if (life.at(in.name).last >= 0) in_tensors.push_back(in.name);
        } else {
            in_tensors = out.boundary_tensors[size_t(i - 1)];
        }
        for (const auto& name : in_tensors) {
            const TensorSpec& spec = g.tensors.at(name);
            GraphInput gi;
            gi.name = name;
            gi.channels = spec.dims.back();
            gi.fixed_dims = spec.dims;
            gi.fixed_layout = spec.layout;
            sg.inputs.push_back(std::move(gi));
        }

        std::vector<int> ids = p.stages[size_t(i)].node_ids;
        std::sort(ids.begin(), ids.end(),
                  [&](int a, int b) { return topo_pos.at(a) < topo_pos.at(b); });
        for (int id : ids) sg.nodes.push_back(*g.find_node(id));

        if (i + 1 < K)
            sg.outputs = out.boundary_tensors[size_t(i)];
        else
            sg.outputs = g.outputs;

        validate_graph(sg);
        infer_shapes(sg, g.in_h, g.in_w);
        sg.weights_ready = g.weights_ready;
        sg.act_scales = g.act_scales;
        out.stages.push_back(std::move(sg));
    }
    return out;
}

PartitionPlan split_at(const Graph& g, const std::vector<uint32_t>& cut_positions) {
    if (g.topo.empty()) fail(ErrorCode::InvalidArgument, "split_at needs a validated graph");
    const uint32_t n = uint32_t(g.topo.size());
    uint32_t prev = 0;
    for (uint32_t p : cut_positions) {
        if (p < 1 || p >= n)
            fail(ErrorCode::Validation,
                 "cut position " + std::to_string(p) + " outside [1, " + std::to_string(n - 1) + "]");
        if (p <= prev) fail(ErrorCode::Validation, "cut positions must be strictly increasing");
        prev = p;
    }

    PartitionPlan plan;
    uint32_t start = 0;
    auto flush = [&](uint32_t end) {
        PlanStage st;
        st.name = "stage" + std::to_string(plan.stages.size() + 1);
        for (uint32_t i = start; i < end; ++i) st.node_ids.push_back(g.topo[i]);
        plan.stages.push_back(std::move(st));
        start = end;
    };
    for (uint32_t p : cut_positions) flush(p);
    flush(n);
    return plan;
}

PartitionPlan split_nodes(const Graph& g, const std::vector<PlanStage>& stages) {
    PartitionPlan plan;
    plan.stages = stages;
    for (size_t i = 0; i < plan.stages.size(); ++i)
        if (plan.stages[i].name.empty())
            plan.stages[i].name = "stage" + std::to_string(i + 1);
    stage_index_of(g, plan); // full structural validation
    return plan;
}

namespace {

uint64_t combination_count(uint32_t n, uint32_t k, uint64_t cap) {
    if (k > n) return 0;
    uint64_t c = 1;
    for (uint32_t i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;
        if (c > cap) return cap + 1;
    }
    return c;
}

} // namespace

PartitionPlan auto_cuts(const Graph& g, const DeviceSpec& dev, uint32_t k) {
    if (!g.shapes_inferred) fail(ErrorCode::InvalidArgument, "auto_cuts needs an inferred graph");
    if (k < 2) fail(ErrorCode::Validation, "auto_cuts needs k >= 2 stages");
    const uint32_t n = uint32_t(g.topo.size());
    if (k > n)
        fail(ErrorCode::Validation, "cannot cut " + std::to_string(n) + " nodes into " +
                                        std::to_string(k) + " stages");

    constexpr uint64_t kSearchCap = 5000000;
    if (combination_count(n - 1, k - 1, kSearchCap) > kSearchCap)
        fail(ErrorCode::Validation,
             "auto_cuts search space exceeds " + std::to_string(kSearchCap) +
                 " candidates; use an explicit plan or a smaller k");

    // Per-step live bytes; stage peaks are range maxima over it (the live
    // set at a step does not depend on where the cuts are, because
    // boundary and pass-through tensors are live there either way).
    std::vector<uint64_t> steps = live_bytes_per_step(g);

    // Sparse table for O(1) range-max queries.
    int levels = 1;
    while ((1u << levels) <= n) ++levels;
    std::vector<std::vector<uint64_t>> table(size_t(levels), steps);
    for (int j = 1; j < levels; ++j)
        for (uint32_t i = 0; i + (1u << j) <= n; ++i)
            table[size_t(j)][i] =
                std::max(table[size_t(j - 1)][i], table[size_t(j - 1)][i + (1u << (j - 1))]);
    std::vector<int> log2_of(n + 1, 0);
    for (uint32_t i = 2; i <= n; ++i) log2_of[i] = log2_of[i / 2] + 1;
    auto range_peak = [&](uint32_t a, uint32_t b) { // [a, b)
        int j = log2_of[b - a];
        return std::max(table[size_t(j)][a], table[size_t(j)][b - (1u << j)]);
    };

    // Weight bytes per topo position, prefix-summed.
    DType dt = g.is_int8 ? DType::Int8 : DType::Float32;
    std::vector<uint64_t> wprefix(n + 1, 0);
    for (uint32_t i = 0; i < n; ++i)
        wprefix[i + 1] = wprefix[i] + g.find_node(g.topo[i])->weight_bytes(dt);

    // Bytes crossing each cut position p: tensors produced before p and
    // still needed at p or later.
    std::map<std::string, TensorLife> life = tensor_lifetimes(g);
    std::vector<uint64_t> crossing(n, 0);
    for (const auto& [name, t] : life) {
        bool is_input = g.is_graph_input(name);
        for (uint32_t p = 1; p < n; ++p) {
            bool produced_before = is_input || t.prod < int(p);
            if (produced_before && t.last >= int(p)) crossing[p] += t.bytes;
        }
    }

    std::vector<uint32_t> cuts(k - 1);
    for (uint32_t i = 0; i < k - 1; ++i) cuts[i] = i + 1;

    bool have_best = false;
    uint64_t best_mem = 0, best_transfer = 0;
    std::vector<uint32_t> best_cuts;

    auto evaluate = [&]() {
        uint64_t max_mem = 0, transfer = 0;
        uint32_t prev = 0;
        for (uint32_t i = 0; i <= k - 1; ++i) {
            uint32_t end = i < k - 1 ? cuts[i] : n;
            uint64_t working = range_peak(prev, end);
            if (working > dev.ram_bytes) return; // stage cannot be placed
            max_mem = std::max(max_mem, working + (wprefix[end] - wprefix[prev]));
            if (i < k - 1) transfer += crossing[cuts[i]];
            prev = end;
        }
        if (!have_best || max_mem < best_mem ||
            (max_mem == best_mem && transfer < best_transfer)) {
            have_best = true;
            best_mem = max_mem;
            best_transfer = transfer;
            best_cuts = cuts;
        }
    };

    // Lexicographic enumeration of k-1 strictly increasing positions in
    // [1, n-1]; the first optimum found therefore has the earliest cuts.
    while (true) {
        evaluate();
        int i = int(k) - 2;
        while (i >= 0 && cuts[size_t(i)] == n - (k - 1) + uint32_t(i)) --i;
        if (i < 0) break;
        ++cuts[size_t(i)];
        for (uint32_t j = uint32_t(i) + 1; j < k - 1; ++j) cuts[j] = cuts[j - 1] + 1;
    }

    if (!have_best)
        fail(ErrorCode::Infeasible, "no feasible " + std::to_string(k) +
                                        "-stage partition: some stage always exceeds device RAM");
    return split_at(g, best_cuts);
}

VerifyReport verify_plan(const Graph& g, const PartitionPlan& p, uint32_t trials, uint64_t seed,
                         int corrupt_stage) {
    if (g.is_int8)
        fail(ErrorCode::InvalidArgument, "verify_plan runs on the float32 graph");
    StagedGraphs staged = build_stages(g, p);

    VerifyReport report;
    if (corrupt_stage >= 0) {
        if (corrupt_stage >= int(staged.stages.size()))
            fail(ErrorCode::InvalidArgument, "corrupt_stage index out of range");
        Graph& sg = staged.stages[size_t(corrupt_stage)];
        for (int id : sg.topo) {
            LayerNode* node = sg.find_node(id);
            if (node->has_weights() && !node->weights.empty()) {
                node->weights[0] += 1.0f;
                report.corrupted_node_id = id;
                break;
            }
        }
    }

    for (uint32_t t = 0; t < trials; ++t) {
        VerifyTrial trial;
        trial.seed = mix_seed(mix_seed(seed, kVerifyInputTag), t);
        ActivationMap inputs = make_seeded_inputs(g, trial.seed);
        ActivationMap expected = exec_float(g, inputs);

        ActivationMap env = inputs;
        for (const Graph& sg : staged.stages) {
            ActivationMap stage_in;
            for (const auto& in : sg.inputs) stage_in[in.name] = env.at(in.name);
            ActivationMap stage_out = exec_float(sg, stage_in);
            for (auto& [name, act] : stage_out) env[name] = std::move(act);
        }

        trial.bitwise_equal = true;
        for (const auto& name : g.outputs) {
            CompareReport c = compare_outputs(expected.at(name), env.at(name));
            trial.bitwise_equal = trial.bitwise_equal && c.bitwise_equal;
            trial.max_abs = std::max(trial.max_abs, c.max_abs);
        }
        report.all_equal = report.all_equal && trial.bitwise_equal;
        report.trials.push_back(trial);
    }
    return report;
}

} // namespace edgeplan
