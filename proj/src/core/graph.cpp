//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "core/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace edgeplan {

const char* kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Conv2d: return "conv2d";
        case LayerKind::Dense: return "dense";
        case LayerKind::Relu: return "relu";
        case LayerKind::Maxpool: return "maxpool";
        case LayerKind::Avgpool: return "avgpool";
        case LayerKind::UpsampleNearest: return "upsample_nearest";
        case LayerKind::Add: return "add";
        case LayerKind::Concat: return "concat";
        case LayerKind::Identity: return "identity";
    }
    return "?";
}

LayerKind kind_from_name(const std::string& s) {
    if (s == "conv2d") return LayerKind::Conv2d;
    if (s == "dense") return LayerKind::Dense;
    if (s == "relu") return LayerKind::Relu;
    if (s == "maxpool") return LayerKind::Maxpool;
    if (s == "avgpool") return LayerKind::Avgpool;
    if (s == "upsample_nearest") return LayerKind::UpsampleNearest;
    if (s == "add") return LayerKind::Add;
    if (s == "concat") return LayerKind::Concat;
    if (s == "identity") return LayerKind::Identity;
    fail(ErrorCode::Parse, "unknown layer kind '" + s + "'");
}

bool kind_has_weights(LayerKind k) {
    return k == LayerKind::Conv2d || k == LayerKind::Dense;
}

bool LayerNode::has_bias() const {
    if (!has_weights()) return false;
    if (!weights.empty() || !weights_q.empty()) return !bias.empty() || !bias_q.empty();
    // Not materialised yet: answer from the source declaration.
    if (wsrc.kind == WeightSource::Kind::File) return !wsrc.bias_file.empty();
    if (wsrc.kind == WeightSource::Kind::Seed) return wsrc.seeded_bias;
    return false;
}

uint64_t LayerNode::weight_elem_count() const {
    if (kind == LayerKind::Conv2d)
        return uint64_t(out_channels) * k_h * k_w * uint64_t(in_channels);
    if (kind == LayerKind::Dense)
        return uint64_t(out_features) * uint64_t(in_features);
    return 0;
}

uint64_t LayerNode::weight_bytes(DType dtype) const {
    if (!has_weights()) return 0;
    uint64_t n = weight_elem_count();
    uint64_t bias_n = has_bias() ? uint64_t(kind == LayerKind::Conv2d ? out_channels : out_features) : 0;
    // Bias stays 4 bytes per element in both schemes (float32, then int32).
    return n * dtype_size(dtype) + bias_n * 4;
}

const LayerNode* Graph::find_node(int id) const {
    for (const auto& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

LayerNode* Graph::find_node(int id) {
    for (auto& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

const LayerNode* Graph::producer_of(const std::string& tensor) const {
    for (const auto& n : nodes)
        if (n.output == tensor) return &n;
    return nullptr;
}

bool Graph::is_graph_input(const std::string& tensor) const {
    for (const auto& in : inputs)
        if (in.name == tensor) return true;
    return false;
}

bool Graph::is_graph_output(const std::string& tensor) const {
    for (const auto& out : outputs)
        if (out == tensor) return true;
    return false;
}

namespace {

void check_arity(const LayerNode& n) {
    size_t a = n.inputs.size();
    bool multi = n.kind == LayerKind::Add || n.kind == LayerKind::Concat;
    if (multi && a < 2)
        fail(ErrorCode::Validation, "node " + std::to_string(n.id) + " (" + kind_name(n.kind) +
                                        ") needs at least 2 inputs, has " + std::to_string(a));
    if (!multi && a != 1)
        fail(ErrorCode::Validation, "node " + std::to_string(n.id) + " (" + kind_name(n.kind) +
                                        ") needs exactly 1 input, has " + std::to_string(a));
}

void check_params(const LayerNode& n) {
    auto bad = [&](const std::string& what) {
        fail(ErrorCode::Validation,
             "node " + std::to_string(n.id) + " (" + std::string(kind_name(n.kind)) + "): " + what);
    };
    switch (n.kind) {
        case LayerKind::Conv2d:
            if (n.k_h < 1 || n.k_w < 1) bad("kernel extents must be >= 1");
            if (n.stride < 1) bad("stride must be >= 1");
            if (n.pad < 0) bad("pad must be >= 0");
            if (n.out_channels < 1) bad("out_channels must be >= 1");
            break;
        case LayerKind::Dense:
            if (n.out_features < 1) bad("out_features must be >= 1");
            break;
        case LayerKind::Maxpool:
        case LayerKind::Avgpool:
            if (n.pool_k < 1) bad("k must be >= 1");
            if (n.pool_stride < 1) bad("stride must be >= 1");
            break;
        case LayerKind::UpsampleNearest:
            if (n.factor < 1) bad("factor must be >= 1");
            break;
        case LayerKind::Concat:
            if (n.axis < 0) bad("axis must be >= 0");
            break;
        default:
            break;
    }
    if (n.has_weights() && n.wsrc.kind == WeightSource::Kind::None)
        bad("weighted layer is missing its weights declaration");
    if (!n.has_weights() && n.wsrc.kind != WeightSource::Kind::None)
        bad("weightless layer carries a weights declaration");
}

} // namespace

std::vector<int> topo_order(const Graph& g) {
    // Kahn over tensor dependencies; the ready set is a sorted set of node
    // ids so ties always resolve to the smallest id.
    std::map<std::string, std::vector<int>> consumers;
    std::map<int, int> pending;
    for (const auto& n : g.nodes) {
        int deps = 0;
        for (const auto& in : n.inputs) {
            if (g.is_graph_input(in)) continue;
            consumers[in].push_back(n.id);
            ++deps;
        }
        pending[n.id] = deps;
    }
    std::set<int> ready;
    for (const auto& [id, deps] : pending)
        if (deps == 0) ready.insert(id);

    std::vector<int> order;
    order.reserve(g.nodes.size());
    while (!ready.empty()) {
        int id = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(id);
        const LayerNode* n = g.find_node(id);
        auto it = consumers.find(n->output);
        if (it == consumers.end()) continue;
        for (int cid : it->second)
            if (--pending[cid] == 0) ready.insert(cid);
    }
    if (order.size() != g.nodes.size())
        fail(ErrorCode::Validation, "graph contains a cycle");
    return order;
}

void validate_graph(Graph& g) {
    std::set<int> ids;
    std::set<std::string> produced;
    for (const auto& in : g.inputs) {
        if (in.name.empty()) fail(ErrorCode::Validation, "graph input with empty name");
        if (!produced.insert(in.name).second)
            fail(ErrorCode::Validation, "tensor '" + in.name + "' declared more than once");
        if (in.channels == 0 && in.fixed_dims.empty())
            fail(ErrorCode::Validation, "graph input '" + in.name + "' has zero channels");
    }
    if (g.inputs.empty()) fail(ErrorCode::Validation, "graph declares no inputs");
    if (g.nodes.empty()) fail(ErrorCode::Validation, "graph declares no nodes");

    for (const auto& n : g.nodes) {
        if (!ids.insert(n.id).second)
            fail(ErrorCode::Validation, "duplicate node id " + std::to_string(n.id));
        if (n.output.empty())
            fail(ErrorCode::Validation, "node " + std::to_string(n.id) + " has no output name");
        if (!produced.insert(n.output).second)
            fail(ErrorCode::Validation, "tensor '" + n.output + "' is produced more than once");
        check_arity(n);
        check_params(n);
    }
    for (const auto& n : g.nodes)
        for (const auto& in : n.inputs)
            if (!produced.count(in))
                fail(ErrorCode::Validation, "node " + std::to_string(n.id) +
                                                " consumes undeclared tensor '" + in + "'");
    for (const auto& out : g.outputs)
        if (!produced.count(out))
            fail(ErrorCode::Validation, "graph output '" + out + "' is never produced");
    if (g.outputs.empty()) fail(ErrorCode::Validation, "graph declares no outputs");

    g.topo = topo_order(g); // also rejects cycles
}

namespace {

uint32_t conv_extent(int in, int pad, int k, int stride, const LayerNode& n, const char* which) {
    long long num = static_cast<long long>(in) + 2LL * pad - k;
    long long v = num >= 0 ? num / stride + 1 : (num - (stride - 1)) / stride + 1;
    if (v < 1)
        fail(ErrorCode::Validation, "node " + std::to_string(n.id) + " (" + kind_name(n.kind) +
                                        "): inferred " + which + " extent " + std::to_string(v) +
                                        " is not positive (input too small for kernel/stride)");
    return uint32_t(v);
}

} // namespace

void infer_shapes(Graph& g, uint32_t height, uint32_t width) {
    if (height == 0 || width == 0)
        fail(ErrorCode::InvalidArgument, "input resolution must be positive");
    if (g.topo.empty()) validate_graph(g);
    g.tensors.clear();
    g.in_h = height;
    g.in_w = width;

    DType act_dtype = g.is_int8 ? DType::Int8 : DType::Float32;
    for (const auto& in : g.inputs) {
        TensorSpec s;
        s.name = in.name;
        s.dtype = act_dtype;
        if (!in.fixed_dims.empty()) {
            s.dims = in.fixed_dims;
            s.layout = in.fixed_layout;
        } else {
            s.dims = {height, width, in.channels};
            s.layout = Layout::HWC;
        }
        g.tensors[in.name] = s;
    }

    for (int id : g.topo) {
        LayerNode& n = *g.find_node(id);
        const TensorSpec& a = g.tensors.at(n.inputs[0]);
        TensorSpec out;
        out.name = n.output;
        out.dtype = act_dtype;
        auto need_rank3 = [&]() {
            if (a.dims.size() != 3 || a.layout != Layout::HWC)
                fail(ErrorCode::Validation, "node " + std::to_string(n.id) + " (" +
                                                kind_name(n.kind) +
                                                ") requires a rank-3 HWC input, got '" + a.name + "'");
        };
        switch (n.kind) {
            case LayerKind::Conv2d: {
                need_rank3();
                n.in_channels = int(a.dims[2]);
                uint32_t oh = conv_extent(int(a.dims[0]), n.pad, n.k_h, n.stride, n, "height");
                uint32_t ow = conv_extent(int(a.dims[1]), n.pad, n.k_w, n.stride, n, "width");
                out.dims = {oh, ow, uint32_t(n.out_channels)};
                out.layout = Layout::HWC;
                break;
            }
            case LayerKind::Dense: {
                n.in_features = int(a.elem_count());
                out.dims = {uint32_t(n.out_features)};
                out.layout = Layout::Flat;
                break;
            }
            case LayerKind::Maxpool:
            case LayerKind::Avgpool: {
                need_rank3();
                uint32_t oh = conv_extent(int(a.dims[0]), 0, n.pool_k, n.pool_stride, n, "height");
                uint32_t ow = conv_extent(int(a.dims[1]), 0, n.pool_k, n.pool_stride, n, "width");
                out.dims = {oh, ow, a.dims[2]};
                out.layout = Layout::HWC;
                break;
            }
            case LayerKind::UpsampleNearest: {
                need_rank3();
                out.dims = {a.dims[0] * uint32_t(n.factor), a.dims[1] * uint32_t(n.factor), a.dims[2]};
                out.layout = Layout::HWC;
                break;
            }
            case LayerKind::Add: {
                for (size_t i = 1; i < n.inputs.size(); ++i) {
                    const TensorSpec& b = g.tensors.at(n.inputs[i]);
                    if (b.dims != a.dims || b.layout != a.layout)
                        fail(ErrorCode::Validation, "node " + std::to_string(n.id) +
                                                        " (add): input shapes differ ('" + a.name +
                                                        "' vs '" + b.name + "')");
                }
                out.dims = a.dims;
                out.layout = a.layout;
                break;
            }
            case LayerKind::Concat: {
                if (n.axis >= int(a.dims.size()))
                    fail(ErrorCode::Validation, "node " + std::to_string(n.id) +
                                                    " (concat): axis " + std::to_string(n.axis) +
                                                    " out of range for rank " +
                                                    std::to_string(a.dims.size()));
                out.dims = a.dims;
                out.layout = a.layout;
                for (size_t i = 1; i < n.inputs.size(); ++i) {
                    const TensorSpec& b = g.tensors.at(n.inputs[i]);
                    if (b.dims.size() != a.dims.size() || b.layout != a.layout)
                        fail(ErrorCode::Validation, "node " + std::to_string(n.id) +
                                                        " (concat): rank/layout mismatch on '" +
                                                        b.name + "'");
                    for (size_t d = 0; d < a.dims.size(); ++d) {
                        if (int(d) == n.axis) continue;
                        if (b.dims[d] != a.dims[d])
                            fail(ErrorCode::Validation,
                                 "node " + std::to_string(n.id) +
                                     " (concat): non-axis extents differ on '" + b.name + "'");
                    }
                    out.dims[size_t(n.axis)] += b.dims[size_t(n.axis)];
                }
                break;
            }
            case LayerKind::Relu:
            case LayerKind::Identity: {
                out.dims = a.dims;
                out.layout = a.layout;
                break;
            }
        }
        g.tensors[n.output] = out;
    }
    g.shapes_inferred = true;
}

namespace {

constexpr uint64_t kWeightStreamTag = 0x5EED0001;
constexpr uint64_t kBiasStreamTag = 0x5EED0002;

void synthesize(LayerNode& n) {
    uint64_t count = n.weight_elem_count();
    uint64_t fan_in = n.kind == LayerKind::Conv2d ? uint64_t(n.k_h) * n.k_w * uint64_t(n.in_channels)
                                                  : uint64_t(n.in_features);
    double bound = 1.0 / std::sqrt(double(fan_in));
    Rng wr(mix_seed(n.wsrc.seed, kWeightStreamTag));
    n.weights.resize(count);
    for (auto& v : n.weights) v = float(wr.uniform(-bound, bound));
    if (n.wsrc.seeded_bias) {
        uint64_t outs = uint64_t(n.kind == LayerKind::Conv2d ? n.out_channels : n.out_features);
        Rng br(mix_seed(n.wsrc.seed, kBiasStreamTag));
        n.bias.resize(outs);
        for (auto& v : n.bias) v = float(br.uniform(-0.1, 0.1));
    }
}

void load_from_files(LayerNode& n, const std::string& base_dir) {
    auto resolve = [&](const std::string& p) {
        if (p.empty() || p[0] == '/') return p;
        return base_dir.empty() ? p : base_dir + "/" + p;
    };
    Tensor w = read_tensor_file(resolve(n.wsrc.file));
    if (w.dtype != DType::Float32)
        fail(ErrorCode::Validation, "node " + std::to_string(n.id) + ": weight file '" +
                                        n.wsrc.file + "' must be float32");
    if (w.f32.size() != n.weight_elem_count())
        fail(ErrorCode::Validation,
             "node " + std::to_string(n.id) + ": weight file '" + n.wsrc.file + "' holds " +
                 std::to_string(w.f32.size()) + " elements, layer needs " +
                 std::to_string(n.weight_elem_count()));
    n.weights = std::move(w.f32);
    if (!n.wsrc.bias_file.empty()) {
        Tensor b = read_tensor_file(resolve(n.wsrc.bias_file));
        uint64_t outs = uint64_t(n.kind == LayerKind::Conv2d ? n.out_channels : n.out_features);
        if (b.dtype != DType::Float32 || b.f32.size() != outs)
            fail(ErrorCode::Validation, "node " + std::to_string(n.id) + ": bias file '" +
                                            n.wsrc.bias_file + "' must be float32 with " +
                                            std::to_string(outs) + " elements");
        n.bias = std::move(b.f32);
    }
}

} // namespace

void materialize_weights(Graph& g, const std::string& base_dir) {
    if (!g.shapes_inferred)
        fail(ErrorCode::InvalidArgument, "materialize_weights requires inferred shapes");
    for (auto& n : g.nodes) {
        if (!n.has_weights()) continue;
        switch (n.wsrc.kind) {
            case WeightSource::Kind::File: load_from_files(n, base_dir); break;
            case WeightSource::Kind::Seed: synthesize(n); break;
            case WeightSource::Kind::None:
                fail(ErrorCode::Validation,
                     "node " + std::to_string(n.id) + " has no weight source");
        }
    }
    g.weights_ready = true;
}

uint64_t weight_footprint(const Graph& g) {
    uint64_t total = 0;
    DType dt = g.is_int8 ? DType::Int8 : DType::Float32;
    for (const auto& n : g.nodes) total += n.weight_bytes(dt);
    return total;
}

} // namespace edgeplan
