#include "onnx_fixtures.hpp"

#include "octgate/rng.hpp"

#include "onnx.pb.h"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <unistd.h>
#include <vector>

namespace octgate::testing {

namespace {

void add_dims(onnx::ValueInfoProto* v, const std::vector<std::string>& dims) {
    v->mutable_type()->mutable_tensor_type()->set_elem_type(onnx::TensorProto::FLOAT);
    auto* shape = v->mutable_type()->mutable_tensor_type()->mutable_shape();
    for (const auto& d : dims) {
        auto* dim = shape->add_dim();
        if (!d.empty() && std::isdigit(static_cast<unsigned char>(d[0])))
            dim->set_dim_value(std::stoll(d));
        else
            dim->set_dim_param(d);
    }
}

void add_initializer(onnx::GraphProto* g, const std::string& name, const std::vector<std::int64_t>& dims,
                     const std::vector<float>& values) {
    auto* t = g->add_initializer();
    t->set_name(name);
    t->set_data_type(onnx::TensorProto::FLOAT);
    for (auto d : dims) t->add_dims(d);
    for (float v : values) t->add_float_data(v);
}

std::vector<float> draws(Rng& rng, std::size_t n, double scale) {
    std::vector<float> out(n);
    for (auto& v : out) v = static_cast<float>(rng.uniform(-scale, scale));
    return out;
}

onnx::NodeProto* add_node(onnx::GraphProto* g, const std::string& op, std::vector<std::string> in,
                          std::vector<std::string> out) {
    auto* n = g->add_node();
    n->set_op_type(op);
    n->set_name(out.front());
    for (auto& s : in) n->add_input(s);
    for (auto& s : out) n->add_output(s);
    return n;
}

void set_ints(onnx::NodeProto* n, const std::string& name, std::vector<std::int64_t> values) {
    auto* a = n->add_attribute();
    a->set_name(name);
    a->set_type(onnx::AttributeProto::INTS);
    for (auto v : values) a->add_ints(v);
}

onnx::ModelProto new_model() {
    onnx::ModelProto m;
    m.set_ir_version(7);
    m.set_producer_name("octgate-tests");
    auto* op = m.add_opset_import();
    op->set_domain("");
    op->set_version(14);
    return m;
}

void save(const onnx::ModelProto& m, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f || !m.SerializeToOstream(&f)) throw std::runtime_error("cannot write " + path);
}

}  // namespace

BackboneWeights backbone_weights() {
    Rng rng(20240611);
    BackboneWeights w;
    w.w1 = draws(rng, 32 * 3 * 3 * 3, 0.3);
    w.b1 = draws(rng, 32, 0.1);
    w.w2 = draws(rng, 96 * 32 * 3 * 3, 0.1);
    w.b2 = draws(rng, 96, 0.1);
    return w;
}

void write_backbone_fixture(const std::string& path) {
    auto m = new_model();
    auto* g = m.mutable_graph();
    g->set_name("backbone");
    const auto w = backbone_weights();
    add_initializer(g, "w1", {32, 3, 3, 3}, w.w1);
    add_initializer(g, "b1", {32}, w.b1);
    add_initializer(g, "w2", {96, 32, 3, 3}, w.w2);
    add_initializer(g, "b2", {96}, w.b2);

    auto* c1 = add_node(g, "Conv", {"input", "w1", "b1"}, {"conv1"});
    set_ints(c1, "kernel_shape", {3, 3});
    set_ints(c1, "strides", {2, 2});
    set_ints(c1, "pads", {1, 1, 1, 1});
    add_node(g, "Relu", {"conv1"}, {kBackboneTapA});
    auto* c2 = add_node(g, "Conv", {kBackboneTapA, "w2", "b2"}, {"conv2"});
    set_ints(c2, "kernel_shape", {3, 3});
    set_ints(c2, "strides", {2, 2});
    set_ints(c2, "pads", {1, 1, 1, 1});
    add_node(g, "HardSwish", {"conv2"}, {kBackboneTapB});
    add_node(g, "GlobalAveragePool", {kBackboneTapB}, {"pooled"});

    add_dims(g->add_input(), {"1", "3", "64", "224"});
    g->mutable_input(0)->set_name("input");
    add_dims(g->add_output(), {"1", "96", "1", "1"});
    g->mutable_output(0)->set_name("pooled");
    save(m, path);
}

void write_identity_heatmap_fixture(const std::string& path) {
    auto m = new_model();
    auto* g = m.mutable_graph();
    g->set_name("identity_heatmap");
    add_node(g, "Identity", {"ascan"}, {"heatmap"});
    add_dims(g->add_input(), {"1", "1", "P"});
    g->mutable_input(0)->set_name("ascan");
    add_dims(g->add_output(), {"1", "1", "P"});
    g->mutable_output(0)->set_name("heatmap");
    save(m, path);
}

std::string temp_path(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("octgate-tests-" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

}  // namespace octgate::testing
