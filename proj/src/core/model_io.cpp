//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "core/model_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "core/error.hpp"

namespace edgeplan {

using nlohmann::json;

namespace {

json parse_json(const std::string& text, const std::string& doc_name) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::Parse, doc_name + ": not valid JSON");
    return j;
}

const json& member(const json& j, const char* key, const std::string& ctx) {
    auto it = j.find(key);
    if (it == j.end()) fail(ErrorCode::Parse, ctx + ": missing field '" + key + "'");
    return *it;
}

std::string str_member(const json& j, const char* key, const std::string& ctx) {
    const json& v = member(j, key, ctx);
    if (!v.is_string()) fail(ErrorCode::Parse, ctx + ": field '" + key + "' must be a string");
    return v.get<std::string>();
}

int64_t int_member(const json& j, const char* key, const std::string& ctx) {
    const json& v = member(j, key, ctx);
    if (!v.is_number_integer())
        fail(ErrorCode::Parse, ctx + ": field '" + key + "' must be an integer");
    return v.get<int64_t>();
}

uint64_t uint_member(const json& j, const char* key, const std::string& ctx) {
    int64_t v = int_member(j, key, ctx);
    if (v < 0) fail(ErrorCode::Parse, ctx + ": field '" + key + "' must be non-negative");
    return uint64_t(v);
}

double num_member(const json& j, const char* key, const std::string& ctx) {
    const json& v = member(j, key, ctx);
    if (!v.is_number()) fail(ErrorCode::Parse, ctx + ": field '" + key + "' must be a number");
    return v.get<double>();
}

int param_int(const json& node, const char* key, const std::string& ctx) {
    const json& params = member(node, "params", ctx);
    if (!params.is_object()) fail(ErrorCode::Parse, ctx + ": 'params' must be an object");
    return int(int_member(params, key, ctx + ".params"));
}

LayerNode parse_node(const json& jn, const std::string& doc_name) {
    if (!jn.is_object()) fail(ErrorCode::Parse, doc_name + ": every node must be an object");
    std::string ctx = doc_name + ": node";
    LayerNode n;
    n.id = int(int_member(jn, "id", ctx));
    ctx += " " + std::to_string(n.id);
    n.kind = kind_from_name(str_member(jn, "kind", ctx));

    const json& ins = member(jn, "inputs", ctx);
    if (!ins.is_array() || ins.empty())
        fail(ErrorCode::Parse, ctx + ": 'inputs' must be a non-empty list");
    for (const auto& e : ins) {
        if (!e.is_string()) fail(ErrorCode::Parse, ctx + ": input names must be strings");
        n.inputs.push_back(e.get<std::string>());
    }
    n.output = str_member(jn, "output", ctx);

    switch (n.kind) {
    case LayerKind::Conv2d:
        n.k_h = param_int(jn, "k_h", ctx);
        n.k_w = param_int(jn, "k_w", ctx);
        n.stride = param_int(jn, "stride", ctx);
        n.pad = param_int(jn, "pad", ctx);
        n.out_channels = param_int(jn, "out_channels", ctx);
        break;
    case LayerKind::Dense:
        n.out_features = param_int(jn, "out_features", ctx);
        break;
    case LayerKind::Maxpool:
    case LayerKind::Avgpool:
        n.pool_k = param_int(jn, "k", ctx);
        n.pool_stride = param_int(jn, "stride", ctx);
        break;
    case LayerKind::UpsampleNearest:
        n.factor = param_int(jn, "factor", ctx);
        break;
    case LayerKind::Concat:
        n.axis = param_int(jn, "axis", ctx);
        break;
    case LayerKind::Relu:
    case LayerKind::Add:
    case LayerKind::Identity:
        break;
    }

    if (auto it = jn.find("weights"); it != jn.end()) {
        if (!n.has_weights())
            fail(ErrorCode::Parse, ctx + ": kind '" + kind_name(n.kind) + "' takes no weights");
        const json& w = *it;
        if (!w.is_object()) fail(ErrorCode::Parse, ctx + ": 'weights' must be an object");
        if (w.contains("seed")) {
            n.wsrc.kind = WeightSource::Kind::Seed;
            n.wsrc.seed = uint_member(w, "seed", ctx + ".weights");
            n.wsrc.seeded_bias = w.value("bias", true);
        } else if (w.contains("file")) {
            n.wsrc.kind = WeightSource::Kind::File;
            n.wsrc.file = str_member(w, "file", ctx + ".weights");
            if (w.contains("bias_file"))
                n.wsrc.bias_file = str_member(w, "bias_file", ctx + ".weights");
        } else {
            fail(ErrorCode::Parse, ctx + ": 'weights' needs either 'seed' or 'file'");
        }
    }
    return n;
}

} // namespace

Graph load_model_text(const std::string& text, const std::string& doc_name) {
    json j = parse_json(text, doc_name);
    if (!j.is_object()) fail(ErrorCode::Parse, doc_name + ": model document must be an object");

    Graph g;
    g.name = j.value("name", std::string("model"));

    const json& jin = member(j, "inputs", doc_name);
    if (!jin.is_array() || jin.empty())
        fail(ErrorCode::Parse, doc_name + ": 'inputs' must be a non-empty list");
    for (const auto& e : jin) {
        std::string ctx = doc_name + ": input";
        GraphInput gi;
        gi.name = str_member(e, "name", ctx);
        int64_t ch = int_member(e, "channels", ctx + " '" + gi.name + "'");
        if (ch < 1) fail(ErrorCode::Parse, ctx + " '" + gi.name + "': channels must be positive");
        gi.channels = uint32_t(ch);
        gi.layout = layout_from_name(e.value("layout", std::string("hwc")));
        g.inputs.push_back(std::move(gi));
    }

    const json& jn = member(j, "nodes", doc_name);
    if (!jn.is_array() || jn.empty())
        fail(ErrorCode::Parse, doc_name + ": 'nodes' must be a non-empty list");
    for (const auto& e : jn) g.nodes.push_back(parse_node(e, doc_name));

    const json& jout = member(j, "outputs", doc_name);
    if (!jout.is_array() || jout.empty())
        fail(ErrorCode::Parse, doc_name + ": 'outputs' must be a non-empty list");
    for (const auto& e : jout) {
        if (!e.is_string()) fail(ErrorCode::Parse, doc_name + ": output names must be strings");
        g.outputs.push_back(e.get<std::string>());
    }

    validate_graph(g);
    return g;
}

Graph load_model_file(const std::string& path) {
    return load_model_text(read_text_file(path), path);
}

DeviceSpec load_device_text(const std::string& text, const std::string& doc_name) {
    json j = parse_json(text, doc_name);
    if (!j.is_object()) fail(ErrorCode::Parse, doc_name + ": device document must be an object");
    DeviceSpec d;
    d.name = j.value("name", std::string("device"));
    d.flash_bytes = uint_member(j, "flash_bytes", doc_name);
    d.l2_bytes = uint_member(j, "l2_bytes", doc_name);
    d.ram_bytes = uint_member(j, "ram_bytes", doc_name);
    d.l1_bytes = uint_member(j, "l1_bytes", doc_name);
    d.clock_hz = num_member(j, "clock_hz", doc_name);
    d.load_bandwidth_bytes_per_s = num_member(j, "load_bandwidth_bytes_per_s", doc_name);
    d.link_bandwidth_bytes_per_s = num_member(j, "link_bandwidth_bytes_per_s", doc_name);
    d.link_latency_s = num_member(j, "link_latency_s", doc_name);
    if (!(d.clock_hz > 0.0)) fail(ErrorCode::Validation, doc_name + ": clock_hz must be positive");
    if (d.link_latency_s < 0.0)
        fail(ErrorCode::Validation, doc_name + ": link_latency_s must be non-negative");
    return d;
}

DeviceSpec load_device_file(const std::string& path) {
    return load_device_text(read_text_file(path), path);
}

PartitionPlan load_plan_text(const std::string& text, const std::string& doc_name) {
    json j = parse_json(text, doc_name);
    if (!j.is_object()) fail(ErrorCode::Parse, doc_name + ": plan document must be an object");
    const json& js = member(j, "stages", doc_name);
    if (!js.is_array() || js.empty())
        fail(ErrorCode::Parse, doc_name + ": 'stages' must be a non-empty list");

    PartitionPlan p;
    for (const auto& e : js) {
        std::string ctx = doc_name + ": stage";
        PlanStage st;
        st.name = str_member(e, "name", ctx);
        const json& ids = member(e, "nodes", ctx + " '" + st.name + "'");
        if (!ids.is_array())
            fail(ErrorCode::Parse, ctx + " '" + st.name + "': 'nodes' must be a list");
        for (const auto& id : ids) {
            if (!id.is_number_integer())
                fail(ErrorCode::Parse, ctx + " '" + st.name + "': node ids must be integers");
            st.node_ids.push_back(id.get<int>());
        }
        p.stages.push_back(std::move(st));
    }
    return p;
}

PartitionPlan load_plan_file(const std::string& path) {
    return load_plan_text(read_text_file(path), path);
}

std::string plan_to_json(const PartitionPlan& p) {
    json j;
    j["stages"] = json::array();
    for (const auto& st : p.stages) {
        json e;
        e["name"] = st.name;
        e["nodes"] = st.node_ids;
        j["stages"].push_back(std::move(e));
    }
    return j.dump(2) + "\n";
}

void save_plan_file(const std::string& path, const PartitionPlan& p) {
    write_text_file(path, plan_to_json(p));
}

std::vector<StageCost> load_stage_costs_text(const std::string& text,
                                             const std::string& doc_name) {
    json j = parse_json(text, doc_name);
    const json* list = nullptr;
    if (j.is_array()) {
        list = &j;
    } else if (j.is_object()) {
        list = &member(j, "stages", doc_name);
    }
    if (!list || !list->is_array() || list->empty())
        fail(ErrorCode::Parse, doc_name + ": expected a non-empty list of stage costs");

    std::vector<StageCost> out;
    for (const auto& e : *list) {
        std::string ctx = doc_name + ": stage cost";
        StageCost c;
        c.name = str_member(e, "name", ctx);
        ctx += " '" + c.name + "'";
        c.compute_ms = num_member(e, "compute_ms", ctx);
        c.passes = uint32_t(uint_member(e, "passes", ctx));
        c.weight_bytes = uint_member(e, "weight_bytes", ctx);
        c.transfer_out_bytes = uint_member(e, "transfer_out_bytes", ctx);
        if (c.compute_ms < 0.0) fail(ErrorCode::Validation, ctx + ": compute_ms must be >= 0");
        if (c.passes < 1) fail(ErrorCode::Validation, ctx + ": passes must be >= 1");
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<StageCost> load_stage_costs_file(const std::string& path) {
    return load_stage_costs_text(read_text_file(path), path);
}

std::vector<ReferenceMemoryEntry> load_reference_memory_file(const std::string& path) {
    json j = parse_json(read_text_file(path), path);
    const json& models = member(j, "models", path);
    if (!models.is_array() || models.empty())
        fail(ErrorCode::Parse, path + ": 'models' must be a non-empty list");

    auto opt_bytes = [&](const json& pair, const char* key,
                         const std::string& ctx) -> std::optional<uint64_t> {
        const json& v = member(pair, key, ctx);
        if (v.is_null()) return std::nullopt;
        if (!v.is_number_integer() || v.get<int64_t>() < 0)
            fail(ErrorCode::Parse, ctx + ": '" + key + "' must be a non-negative integer or null");
        return v.get<uint64_t>();
    };

    std::vector<ReferenceMemoryEntry> out;
    for (const auto& e : models) {
        ReferenceMemoryEntry m;
        m.name = str_member(e, "name", path + ": model");
        std::string ctx = path + ": model '" + m.name + "'";
        const json& flash = member(e, "flash", ctx);
        const json& l2 = member(e, "l2", ctx);
        const json& ram = member(e, "ram", ctx);
        m.flash_original = opt_bytes(flash, "original", ctx + ".flash");
        m.flash_optimised = opt_bytes(flash, "optimised", ctx + ".flash");
        m.l2_original = opt_bytes(l2, "original", ctx + ".l2");
        m.l2_optimised = opt_bytes(l2, "optimised", ctx + ".l2");
        m.ram_original = opt_bytes(ram, "original", ctx + ".ram");
        m.ram_optimised = opt_bytes(ram, "optimised", ctx + ".ram");
        out.push_back(std::move(m));
    }
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write file: " + path);
    out << text;
    if (!out) fail(ErrorCode::Io, "short write to file: " + path);
}

std::string dir_of(const std::string& path) {
    size_t pos = path.find_last_of("/\\");
    if (pos == std::string::npos) return ".";
    if (pos == 0) return "/";
    return path.substr(0, pos);
}

} // namespace edgeplan
