//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "doctest.h"

#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/graph.hpp"
#include "test_util.hpp"

using namespace edgeplan;
using namespace edgeplan::test;

TEST_CASE("layer kind names round-trip") {
    const LayerKind kinds[] = {LayerKind::Conv2d,   LayerKind::Dense,  LayerKind::Relu,
                               LayerKind::Maxpool,  LayerKind::Avgpool,
                               LayerKind::UpsampleNearest, LayerKind::Add,
                               LayerKind::Concat,   LayerKind::Identity};
    for (LayerKind k : kinds) CHECK(kind_from_name(kind_name(k)) == k);
    CHECK_THROWS_AS(kind_from_name("softmax"), Error);
    CHECK(kind_has_weights(LayerKind::Conv2d));
    CHECK(kind_has_weights(LayerKind::Dense));
    CHECK_FALSE(kind_has_weights(LayerKind::Add));
    CHECK_FALSE(kind_has_weights(LayerKind::Relu));
}

TEST_CASE("validation rejects malformed graphs") {
    auto base = [] {
        Graph g;
        g.inputs.push_back(make_input("in0", 3));
        g.nodes.push_back(conv_node(1, "in0", "t1", 3, 1, 1, 4, 7));
        g.outputs = {"t1"};
        return g;
    };

    SUBCASE("well-formed baseline passes") {
        Graph g = base();
        CHECK_NOTHROW(validate_graph(g));
        CHECK(g.topo == std::vector<int>{1});
    }
    SUBCASE("duplicate node id") {
        Graph g = base();
        g.nodes.push_back(conv_node(1, "t1", "t2", 1, 1, 0, 2, 8));
        CHECK_THROWS_WITH_AS(validate_graph(g), "duplicate node id 1", Error);
    }
    SUBCASE("duplicate tensor name") {
        Graph g = base();
        g.nodes.push_back(conv_node(2, "t1", "t1", 1, 1, 0, 2, 8));
        CHECK_THROWS_AS(validate_graph(g), Error);
    }
    SUBCASE("dangling input tensor") {
        Graph g = base();
        g.nodes[0].inputs = {"nosuch"};
        CHECK_THROWS_WITH_AS(validate_graph(g), "node 1 consumes undeclared tensor 'nosuch'",
                             Error);
    }
    SUBCASE("dangling graph output") {
        Graph g = base();
        g.outputs = {"ghost"};
        CHECK_THROWS_AS(validate_graph(g), Error);
    }
    SUBCASE("wrong arity") {
        Graph g = base();
        g.nodes[0].inputs = {"in0", "in0"};
        CHECK_THROWS_AS(validate_graph(g), Error);
        Graph g2 = base();
        g2.nodes.push_back(add_node(2, {"t1"}, "t2"));
        g2.outputs = {"t2"};
        CHECK_THROWS_AS(validate_graph(g2), Error);
    }
    SUBCASE("non-positive parameters") {
        Graph g = base();
        g.nodes[0].stride = 0;
        CHECK_THROWS_AS(validate_graph(g), Error);
        Graph g2 = base();
        g2.nodes[0].out_channels = 0;
        CHECK_THROWS_AS(validate_graph(g2), Error);
    }
    SUBCASE("weighted layer without a source") {
        Graph g = base();
        g.nodes[0].wsrc.kind = WeightSource::Kind::None;
        CHECK_THROWS_AS(validate_graph(g), Error);
    }
    SUBCASE("weightless layer with a source") {
        Graph g = base();
        LayerNode r = unary_node(2, LayerKind::Relu, "t1", "t2");
        r.wsrc.kind = WeightSource::Kind::Seed;
        g.nodes.push_back(r);
        g.outputs = {"t2"};
        CHECK_THROWS_AS(validate_graph(g), Error);
    }
    SUBCASE("cycle") {
        Graph g = base();
        g.nodes.push_back(add_node(2, {"t1", "t3"}, "t2"));
        g.nodes.push_back(unary_node(3, LayerKind::Relu, "t2", "t3"));
        g.outputs = {"t3"};
        CHECK_THROWS_WITH_AS(validate_graph(g), "graph contains a cycle", Error);
    }
    SUBCASE("error codes are Validation") {
        Graph g = base();
        g.outputs.clear();
        try {
            validate_graph(g);
            FAIL("expected a throw");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Validation);
        }
    }
}

TEST_CASE("topological order is deterministic with ascending-id ties") {
    // Diamond: 1 feeds 2 and 3 (both ready together), 4 joins them. Node ids
    // are declared out of order to make the tie-break observable.
    Graph g;
    g.inputs.push_back(make_input("in0", 2));
    g.nodes.push_back(unary_node(4, LayerKind::Relu, "a", "b"));
    g.nodes.push_back(unary_node(1, LayerKind::Identity, "in0", "a"));
    g.nodes.push_back(unary_node(3, LayerKind::Identity, "a", "c"));
    g.nodes.push_back(add_node(5, {"b", "c"}, "d"));
    g.outputs = {"d"};
    validate_graph(g);
    CHECK(g.topo == std::vector<int>{1, 3, 4, 5});
    CHECK(topo_order(g) == g.topo);
}

TEST_CASE("shape inference follows the floor convolution rule") {
    Graph g;
    g.inputs.push_back(make_input("in0", 3));
    g.nodes.push_back(conv_node(1, "in0", "t1", 3, 2, 1, 8, 1));
    g.outputs = {"t1"};
    validate_graph(g);

    SUBCASE("stride 2, pad 1, k 3") {
        infer_shapes(g, 7, 10);
        // floor((7 + 2 - 3)/2) + 1 = 4, floor((10 + 2 - 3)/2) + 1 = 5
        CHECK(g.tensors.at("t1").dims == std::vector<uint32_t>{4, 5, 8});
        CHECK(g.tensors.at("in0").dims == std::vector<uint32_t>{7, 10, 3});
        CHECK(g.nodes[0].in_channels == 3);
        CHECK(g.shapes_inferred);
    }
    SUBCASE("too small for the kernel") {
        g.nodes[0].pad = 0;
        CHECK_THROWS_AS(infer_shapes(g, 2, 2), Error);
    }
    SUBCASE("zero resolution is rejected") {
        CHECK_THROWS_AS(infer_shapes(g, 0, 4), Error);
    }
}

TEST_CASE("shape inference per kind") {
    Graph g;
    g.inputs.push_back(make_input("in0", 4));
    g.nodes.push_back(pool_node(1, LayerKind::Maxpool, "in0", "p", 2, 2));
    g.nodes.push_back(upsample_node(2, "p", "u", 2));
    g.nodes.push_back(unary_node(3, LayerKind::Relu, "u", "r"));
    g.nodes.push_back(concat_node(4, {"r", "in0"}, "cat", 2));
    g.nodes.push_back(dense_node(5, "cat", "d", 10, 3));
    g.outputs = {"d"};
    validate_graph(g);
    infer_shapes(g, 6, 8);
    CHECK(g.tensors.at("p").dims == std::vector<uint32_t>{3, 4, 4});
    CHECK(g.tensors.at("u").dims == std::vector<uint32_t>{6, 8, 4});
    CHECK(g.tensors.at("r").dims == std::vector<uint32_t>{6, 8, 4});
    CHECK(g.tensors.at("cat").dims == std::vector<uint32_t>{6, 8, 8});
    CHECK(g.tensors.at("d").dims == std::vector<uint32_t>{10});
    CHECK(g.tensors.at("d").layout == Layout::Flat);
    CHECK(g.find_node(5)->in_features == 6 * 8 * 8);

    SUBCASE("odd pool input floors") {
        Graph g2;
        g2.inputs.push_back(make_input("in0", 1));
        g2.nodes.push_back(pool_node(1, LayerKind::Avgpool, "in0", "p", 2, 2));
        g2.outputs = {"p"};
        validate_graph(g2);
        infer_shapes(g2, 7, 7);
        CHECK(g2.tensors.at("p").dims == std::vector<uint32_t>{3, 3, 1});
    }
    SUBCASE("add rejects shape mismatch") {
        Graph g2;
        g2.inputs.push_back(make_input("in0", 2));
        g2.nodes.push_back(conv_node(1, "in0", "t1", 1, 1, 0, 3, 1));
        g2.nodes.push_back(add_node(2, {"t1", "in0"}, "s"));
        g2.outputs = {"s"};
        validate_graph(g2);
        CHECK_THROWS_AS(infer_shapes(g2, 4, 4), Error);
    }
    SUBCASE("concat rejects non-axis mismatch") {
        Graph g2;
        g2.inputs.push_back(make_input("in0", 2));
        g2.nodes.push_back(pool_node(1, LayerKind::Maxpool, "in0", "p", 2, 2));
        g2.nodes.push_back(concat_node(2, {"p", "in0"}, "c", 2));
        g2.outputs = {"c"};
        validate_graph(g2);
        CHECK_THROWS_AS(infer_shapes(g2, 4, 4), Error);
    }
}

TEST_CASE("seeded weights are deterministic and seed-sensitive") {
    auto build = [](uint64_t seed) {
        Graph g;
        g.inputs.push_back(make_input("in0", 3));
        g.nodes.push_back(conv_node(1, "in0", "t1", 3, 1, 1, 4, seed));
        g.outputs = {"t1"};
        validate_graph(g);
        infer_shapes(g, 5, 5);
        materialize_weights(g, ".");
        return g;
    };
    Graph a = build(42), b = build(42), c = build(43);
    CHECK(a.nodes[0].weights.size() == 4u * 3 * 3 * 3);
    CHECK(a.nodes[0].bias.size() == 4);
    CHECK(a.nodes[0].weights == b.nodes[0].weights);
    CHECK(a.nodes[0].bias == b.nodes[0].bias);
    CHECK(a.nodes[0].weights != c.nodes[0].weights);
    CHECK(a.weights_ready);

    SUBCASE("bias can be disabled") {
        Graph g;
        g.inputs.push_back(make_input("in0", 3));
        g.nodes.push_back(conv_node(1, "in0", "t1", 3, 1, 1, 4, 42, false));
        g.outputs = {"t1"};
        validate_graph(g);
        infer_shapes(g, 5, 5);
        materialize_weights(g, ".");
        CHECK(g.nodes[0].bias.empty());
        CHECK_FALSE(g.nodes[0].has_bias());
    }
    SUBCASE("weights require shapes first") {
        Graph g;
        g.inputs.push_back(make_input("in0", 3));
        g.nodes.push_back(conv_node(1, "in0", "t1", 3, 1, 1, 4, 42));
        g.outputs = {"t1"};
        validate_graph(g);
        CHECK_THROWS_AS(materialize_weights(g, "."), Error);
    }
}

TEST_CASE("weight byte accounting") {
    Graph g;
    g.inputs.push_back(make_input("in0", 3));
    g.nodes.push_back(conv_node(1, "in0", "t1", 3, 1, 1, 8, 1));       // 8*3*3*3 w + 8 b
    g.nodes.push_back(unary_node(2, LayerKind::Relu, "t1", "t2"));
    g.nodes.push_back(dense_node(3, "t2", "t3", 10, 2, false));        // 10*fan_in w, no b
    g.outputs = {"t3"};
    validate_graph(g);
    infer_shapes(g, 4, 4);
    const LayerNode& conv = *g.find_node(1);
    const LayerNode& dense = *g.find_node(3);
    CHECK(conv.weight_elem_count() == 8u * 3 * 3 * 3);
    CHECK(conv.weight_bytes(DType::Float32) == 216u * 4 + 8 * 4);
    CHECK(conv.weight_bytes(DType::Int8) == 216u + 8 * 4);
    CHECK(dense.weight_elem_count() == 10u * 4 * 4 * 8);
    CHECK(dense.weight_bytes(DType::Float32) == 1280u * 4);
    CHECK(g.find_node(2)->weight_bytes(DType::Float32) == 0);
    CHECK(weight_footprint(g) == conv.weight_bytes(DType::Float32) +
                                     dense.weight_bytes(DType::Float32));
    Graph gq = g;
    gq.is_int8 = true;
    CHECK(weight_footprint(gq) == conv.weight_bytes(DType::Int8) + dense.weight_bytes(DType::Int8));
}

TEST_CASE("graph lookups") {
    Graph g;
    g.inputs.push_back(make_input("in0", 2));
    g.nodes.push_back(unary_node(7, LayerKind::Identity, "in0", "a"));
    g.outputs = {"a"};
    validate_graph(g);
    CHECK(g.find_node(7) != nullptr);
    CHECK(g.find_node(8) == nullptr);
    CHECK(g.producer_of("a")->id == 7);
    CHECK(g.producer_of("in0") == nullptr);
    CHECK(g.is_graph_input("in0"));
    CHECK_FALSE(g.is_graph_input("a"));
    CHECK(g.is_graph_output("a"));
    CHECK_FALSE(g.is_graph_output("in0"));
}

TEST_CASE("random graphs validate and infer at several sizes") {
    Rng rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 3 + int(rng.below(10));
        Graph g = random_graph(rng, n, 16, 16, 1 + uint32_t(rng.below(4)));
        CHECK(g.topo.size() == size_t(n));
        CHECK(g.shapes_inferred);
        CHECK(g.weights_ready);
        for (const auto& out : g.outputs) CHECK(g.tensors.count(out) == 1);
    }
}
