//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
#include "doctest.h"

#include <filesystem>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/model_io.hpp"
#include "core/tensor.hpp"

using namespace edgeplan;

namespace {

std::string fixture(const std::string& name) {
    return std::string(EDGEPLAN_FIXTURES_DIR) + "/" + name;
}

std::string tmp_path(const std::string& name) {
    std::filesystem::path dir(EDGEPLAN_TEST_TMPDIR);
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

const char* kModelDoc = R"({
  "name": "demo",
  "inputs": [{"name": "img", "channels": 3, "layout": "hwc"}],
  "nodes": [
    {"id": 1, "kind": "conv2d", "inputs": ["img"], "output": "c1",
     "params": {"k_h": 3, "k_w": 3, "stride": 2, "pad": 1, "out_channels": 8},
     "weights": {"seed": 11}},
    {"id": 2, "kind": "relu", "inputs": ["c1"], "output": "r1"},
    {"id": 3, "kind": "maxpool", "inputs": ["r1"], "output": "p1",
     "params": {"k": 2, "stride": 2}},
    {"id": 4, "kind": "avgpool", "inputs": ["r1"], "output": "p2",
     "params": {"k": 2, "stride": 2}},
    {"id": 5, "kind": "add", "inputs": ["p1", "p2"], "output": "s1"},
    {"id": 6, "kind": "upsample_nearest", "inputs": ["s1"], "output": "u1",
     "params": {"factor": 2}},
    {"id": 7, "kind": "concat", "inputs": ["u1", "r1"], "output": "k1",
     "params": {"axis": 2}},
    {"id": 8, "kind": "identity", "inputs": ["k1"], "output": "i1"},
    {"id": 9, "kind": "dense", "inputs": ["i1"], "output": "d1",
     "params": {"out_features": 10}, "weights": {"seed": 12, "bias": false}}
  ],
  "outputs": ["d1"]
})";

} // namespace

TEST_CASE("model documents parse every layer kind") {
    Graph g = load_model_text(kModelDoc, "demo.json");
    CHECK(g.name == "demo");
    REQUIRE(g.nodes.size() == 9);
    CHECK(g.inputs[0].name == "img");
    CHECK(g.inputs[0].channels == 3);
    CHECK(g.inputs[0].layout == Layout::HWC);

    const LayerNode& conv = *g.find_node(1);
    CHECK(conv.kind == LayerKind::Conv2d);
    CHECK(conv.k_h == 3);
    CHECK(conv.stride == 2);
    CHECK(conv.pad == 1);
    CHECK(conv.out_channels == 8);
    CHECK(conv.wsrc.kind == WeightSource::Kind::Seed);
    CHECK(conv.wsrc.seed == 11);
    CHECK(conv.wsrc.seeded_bias);

    CHECK(g.find_node(3)->pool_k == 2);
    CHECK(g.find_node(6)->factor == 2);
    CHECK(g.find_node(7)->axis == 2);
    const LayerNode& dense = *g.find_node(9);
    CHECK(dense.out_features == 10);
    CHECK_FALSE(dense.wsrc.seeded_bias);
    CHECK(g.topo.size() == 9); // already validated

    // The document parses into a runnable graph.
    infer_shapes(g, 16, 16);
    CHECK(g.tensors.at("d1").dims == std::vector<uint32_t>{10});
}

TEST_CASE("model document error contexts") {
    CHECK_THROWS_WITH_AS(load_model_text("{not json", "m.json"), "m.json: not valid JSON", Error);
    CHECK_THROWS_WITH_AS(load_model_text("{}", "m.json"), "m.json: missing field 'inputs'", Error);
    CHECK_THROWS_WITH_AS(
        load_model_text(R"({"inputs": [{"name": "a", "channels": 1}],
                            "nodes": [{"id": 4, "kind": "conv2d", "inputs": ["a"],
                                       "output": "y", "params": {"k_h": 3}}],
                            "outputs": ["y"]})",
                        "m.json"),
        "m.json: node 4.params: missing field 'k_w'", Error);
    CHECK_THROWS_WITH_AS(
        load_model_text(R"({"inputs": [{"name": "a", "channels": 1}],
                            "nodes": [{"id": 1, "kind": "relu", "inputs": ["a"],
                                       "output": "y", "weights": {"seed": 1}}],
                            "outputs": ["y"]})",
                        "m.json"),
        "m.json: node 1: kind 'relu' takes no weights", Error);
    CHECK_THROWS_AS(
        load_model_text(R"({"inputs": [{"name": "a", "channels": 1}],
                            "nodes": [{"id": 1, "kind": "dense", "inputs": ["a"],
                                       "output": "y", "params": {"out_features": 2},
                                       "weights": {}}],
                            "outputs": ["y"]})",
                        "m.json"),
        Error);
    // File-sourced weights with an optional bias file.
    Graph g = load_model_text(R"({"inputs": [{"name": "a", "channels": 1}],
                                  "nodes": [{"id": 1, "kind": "dense", "inputs": ["a"],
                                             "output": "y", "params": {"out_features": 2},
                                             "weights": {"file": "w.etns",
                                                         "bias_file": "b.etns"}}],
                                  "outputs": ["y"]})",
                              "m.json");
    CHECK(g.nodes[0].wsrc.kind == WeightSource::Kind::File);
    CHECK(g.nodes[0].wsrc.file == "w.etns");
    CHECK(g.nodes[0].wsrc.bias_file == "b.etns");
}

TEST_CASE("bundled example model loads") {
    Graph g = load_model_file(fixture("toy_perception.json"));
    CHECK(g.nodes.size() == 26);
    CHECK(g.inputs.size() == 1);
    infer_shapes(g, 160, 320);
    materialize_weights(g, fixture(""));
    CHECK(g.weights_ready);
    CHECK_THROWS_AS(load_model_file(fixture("no_such_model.json")), Error);
}

TEST_CASE("device documents") {
    DeviceSpec d = load_device_file(fixture("gap9.json"));
    CHECK(d.flash_bytes == 2097152);
    CHECK(d.l2_bytes == 1638400);
    CHECK(d.ram_bytes == 10000000);
    CHECK(d.l1_bytes == 131072);
    CHECK(d.clock_hz == 370000000.0);
    CHECK(d.load_bandwidth_bytes_per_s == 1e8);
    CHECK(d.link_bandwidth_bytes_per_s == 1e7);
    CHECK(d.link_latency_s == 1e-4);

    CHECK_THROWS_WITH_AS(load_device_text("{}", "d.json"), "d.json: missing field 'flash_bytes'",
                         Error);
    CHECK_THROWS_AS(load_device_text(R"({"flash_bytes": 1, "l2_bytes": 1, "ram_bytes": 1,
                                          "l1_bytes": 1, "clock_hz": 0,
                                          "load_bandwidth_bytes_per_s": 1,
                                          "link_bandwidth_bytes_per_s": 1,
                                          "link_latency_s": 0})",
                                     "d.json"),
                    Error);
}

TEST_CASE("plan documents round-trip") {
    PartitionPlan p = load_plan_file(fixture("toy_perception_plan.json"));
    REQUIRE(p.stages.size() == 4);
    CHECK(p.stages[0].name == "ResNet-MCU");
    CHECK(p.stages[0].node_ids.front() == 1);
    CHECK(p.stages[3].name == "LocalNet-MCU");

    std::string text = plan_to_json(p);
    PartitionPlan back = load_plan_text(text, "roundtrip");
    REQUIRE(back.stages.size() == p.stages.size());
    for (size_t i = 0; i < p.stages.size(); ++i) {
        CHECK(back.stages[i].name == p.stages[i].name);
        CHECK(back.stages[i].node_ids == p.stages[i].node_ids);
    }

    std::string path = tmp_path("plan_out.json");
    save_plan_file(path, p);
    CHECK(load_plan_file(path).stages.size() == 4);

    CHECK_THROWS_AS(load_plan_text(R"({"stages": []})", "p.json"), Error);
    CHECK_THROWS_AS(load_plan_text(R"({"stages": [{"name": "a", "nodes": [1.5]}]})", "p.json"),
                    Error);
}

TEST_CASE("stage cost tables accept bare and wrapped lists") {
    const char* wrapped = R"({"stages": [
        {"name": "a", "compute_ms": 15.13, "passes": 1, "weight_bytes": 0,
         "transfer_out_bytes": 0},
        {"name": "b", "compute_ms": 10.54359375, "passes": 64, "weight_bytes": 100,
         "transfer_out_bytes": 5}
    ]})";
    auto v = load_stage_costs_text(wrapped, "c.json");
    REQUIRE(v.size() == 2);
    CHECK(v[0].name == "a");
    CHECK(v[0].compute_ms == 15.13);
    CHECK(v[1].passes == 64);
    CHECK(v[1].weight_bytes == 100);
    CHECK(v[1].transfer_out_bytes == 5);

    const char* bare = R"([{"name": "x", "compute_ms": 1.0, "passes": 1,
                            "weight_bytes": 0, "transfer_out_bytes": 0}])";
    CHECK(load_stage_costs_text(bare, "c.json").size() == 1);

    CHECK(load_stage_costs_file(fixture("table2.json")).size() == 4);

    CHECK_THROWS_AS(load_stage_costs_text("[]", "c.json"), Error);
    CHECK_THROWS_AS(load_stage_costs_text("3.14", "c.json"), Error);
    CHECK_THROWS_AS(load_stage_costs_text(R"([{"name": "x", "compute_ms": -1.0,
                                               "passes": 1, "weight_bytes": 0,
                                               "transfer_out_bytes": 0}])",
                                          "c.json"),
                    Error);
    CHECK_THROWS_AS(load_stage_costs_text(R"([{"name": "x", "compute_ms": 1.0,
                                               "passes": 0, "weight_bytes": 0,
                                               "transfer_out_bytes": 0}])",
                                          "c.json"),
                    Error);
}

TEST_CASE("reference memory tables carry optional byte counts") {
    auto entries = load_reference_memory_file(fixture("reference_memory.json"));
    REQUIRE(entries.size() == 4);
    int populated = 0;
    for (const auto& e : entries) {
        for (const auto& f : {e.flash_original, e.flash_optimised, e.l2_original, e.l2_optimised,
                              e.ram_original, e.ram_optimised})
            if (f.has_value()) ++populated;
    }
    CHECK(populated == 20);

    const ReferenceMemoryEntry* resnet = nullptr;
    for (const auto& e : entries)
        if (e.name == "ResNet-MCU") resnet = &e;
    REQUIRE(resnet != nullptr);
    CHECK(resnet->flash_original.value() == 1343104);
    CHECK(resnet->flash_optimised.value() == 707092);
    CHECK(resnet->ram_optimised.value() == 0);

    const ReferenceMemoryEntry* pointnet = nullptr;
    for (const auto& e : entries)
        if (e.name == "PointNet-MCU") pointnet = &e;
    REQUIRE(pointnet != nullptr);
    CHECK_FALSE(pointnet->flash_optimised.has_value());
}

TEST_CASE("tensor files round-trip every dtype and rank") {
    SUBCASE("float32 rank 3") {
        Tensor t;
        t.dtype = DType::Float32;
        t.dims = {2, 3, 1};
        t.f32 = {1.5f, -2.5f, 0.0f, 4.25f, 1e-20f, -7.0f};
        std::string path = tmp_path("t_f32.etns");
        write_tensor_file(path, t);
        Tensor back = read_tensor_file(path);
        CHECK(back.dtype == DType::Float32);
        CHECK(back.dims == t.dims);
        CHECK(back.f32 == t.f32);
    }
    SUBCASE("int8 rank 1") {
        Tensor t;
        t.dtype = DType::Int8;
        t.dims = {4};
        t.i8 = {-127, 0, 1, 127};
        std::string path = tmp_path("t_i8.etns");
        write_tensor_file(path, t);
        Tensor back = read_tensor_file(path);
        CHECK(back.i8 == t.i8);
    }
    SUBCASE("int32 rank 2") {
        Tensor t;
        t.dtype = DType::Int32;
        t.dims = {2, 2};
        t.i32 = {1 << 30, -5, 0, 42};
        std::string path = tmp_path("t_i32.etns");
        write_tensor_file(path, t);
        Tensor back = read_tensor_file(path);
        CHECK(back.i32 == t.i32);
    }
    SUBCASE("payload size must match the extents") {
        Tensor t;
        t.dtype = DType::Float32;
        t.dims = {3};
        t.f32 = {1.0f, 2.0f};
        CHECK_THROWS_AS(write_tensor_file(tmp_path("t_bad.etns"), t), Error);
    }
    SUBCASE("bad magic and truncation are rejected") {
        std::string path = tmp_path("t_corrupt.etns");
        write_text_file(path, "NOPE....");
        CHECK_THROWS_AS(read_tensor_file(path), Error);
        write_text_file(path, "ET");
        CHECK_THROWS_AS(read_tensor_file(path), Error);
        CHECK_THROWS_AS(read_tensor_file(tmp_path("t_absent.etns")), Error);
    }
}

TEST_CASE("text file helpers and path splitting") {
    std::string path = tmp_path("hello.txt");
    write_text_file(path, "line1\nline2\n");
    CHECK(read_text_file(path) == "line1\nline2\n");
    CHECK_THROWS_AS(read_text_file(tmp_path("absent.txt")), Error);

    CHECK(dir_of("/a/b/c.json") == "/a/b");
    CHECK(dir_of("c.json") == ".");
    CHECK(dir_of("/c.json") == "/");
    CHECK(dir_of("rel/c.json") == "rel");
}
