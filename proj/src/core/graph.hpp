//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace edgeplan {

enum class LayerKind : uint8_t {
    Conv2d,
    Dense,
    Relu,
    Maxpool,
    Avgpool,
    UpsampleNearest,
    Add,
    Concat,
    Identity,
};

const char* kind_name(LayerKind k);
LayerKind kind_from_name(const std::string& s);
bool kind_has_weights(LayerKind k);

// Where a weighted layer's parameters come from. File payloads are tensor
// files next to the model document; seeded payloads are synthesised
// deterministically after shape inference (a dense layer's fan-in depends
// on the input resolution, so a fixed file cannot serve every resolution).
struct WeightSource {
    enum class Kind : uint8_t { None, File, Seed };
    Kind kind = Kind::None;
    std::string file;
    std::string bias_file;
    uint64_t seed = 0;
    bool seeded_bias = true;
};

struct LayerNode {
    int id = 0;
    LayerKind kind = LayerKind::Identity;
    std::vector<std::string> inputs;
    std::string output;

    // conv2d
    int k_h = 0, k_w = 0, stride = 1, pad = 0, out_channels = 0;
    // dense
    int out_features = 0;
    // maxpool / avgpool
    int pool_k = 0, pool_stride = 1;
    // upsample_nearest
    int factor = 1;
    // concat
    int axis = 0;

    WeightSource wsrc;

    // Materialised parameters. Conv weights are stored [out_c][k_h][k_w][in_c]
    // so the fixed accumulation order (kernel rows, kernel cols, channels)
    // scans them contiguously; dense weights are [out_features][in_features].
    std::vector<float> weights;
    std::vector<float> bias;

    // Quantised parameters (filled by quantize_graph).
    std::vector<int8_t> weights_q;
    std::vector<int32_t> bias_q;
    double w_scale = 0.0;

    // Resolved during shape inference.
    int in_channels = 0;
    int in_features = 0;

    bool has_weights() const { return kind_has_weights(kind); }
    bool has_bias() const;
    uint64_t weight_elem_count() const;
    // Payload bytes at the given dtype: weights at 1 or 4 bytes per element,
    // bias at 4 (float32 or int32) whenever present.
    uint64_t weight_bytes(DType dtype) const;
};

struct GraphInput {
    std::string name;
    uint32_t channels = 0;
    Layout layout = Layout::HWC;
    // Set on sub-graphs built by the partitioner: the tensor's full shape is
    // known and is not derived from (height, width, channels).
    std::vector<uint32_t> fixed_dims;
    Layout fixed_layout = Layout::HWC;
};

struct Graph {
    std::string name;
    std::vector<GraphInput> inputs;
    std::vector<LayerNode> nodes;
    std::vector<std::string> outputs;

    // Derived state.
    std::vector<int> topo;                        // node ids, deterministic order
    std::map<std::string, TensorSpec> tensors;    // resolved by infer_shapes
    bool shapes_inferred = false;
    bool weights_ready = false;
    bool is_int8 = false;
    std::map<std::string, double> act_scales;     // per-tensor, int8 graphs
    uint32_t in_h = 0, in_w = 0;

    const LayerNode* find_node(int id) const;
    LayerNode* find_node(int id);
    const LayerNode* producer_of(const std::string& tensor) const;
    bool is_graph_input(const std::string& tensor) const;
    bool is_graph_output(const std::string& tensor) const;
};

// Structural validation: unique ids and tensor names, known arities,
// positive parameters, no dangling tensor references, acyclicity. Fills
// g.topo (Kahn's algorithm, ties broken by ascending node id).
void validate_graph(Graph& g);

// Recompute the deterministic topological order of an already-valid graph.
std::vector<int> topo_order(const Graph& g);

// Resolve every tensor's shape for the given input resolution. Conv output
// extents follow floor((in + 2*pad - k)/stride) + 1; pools use the same rule
// with pad fixed at 0. Fails on any non-positive inferred extent.
void infer_shapes(Graph& g, uint32_t height, uint32_t width);

// Load or synthesise every weighted layer's parameters. File paths are
// resolved relative to base_dir. Requires shapes (fan-in) to be known.
void materialize_weights(Graph& g, const std::string& base_dir);

// Sum of weight+bias payload bytes over all weighted layers, at the graph's
// parameter dtype (int8 weights + int32 bias after quantisation).
uint64_t weight_footprint(const Graph& g);

} // namespace edgeplan
