// Copyright 2026 The mlnpose Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "mlnpose/network.hpp"

#include <cmath>
#include <optional>
#include <random>
#include <set>
#include <unordered_map>

#include "mlnpose/byte_io.hpp"
#include "mlnpose/errors.hpp"
#include "mlnpose/ops.hpp"

namespace mlnpose {

namespace {

// Output channels of the VGG-19 conv stack; 0 marks a 2x2 max pool.
constexpr int kVgg19[] = {64,  64,  0,   128, 128, 0,   256, 256, 256, 256, 0,
                          512, 512, 512, 512, 0,   512, 512, 512, 512};
constexpr int kVgg19Convs = 16;

class GraphBuilder {
 public:
  explicit GraphBuilder(NetworkGraph& g) : g_(g) {}

  std::string input(const std::string& name) {
    LayerSpec s;
    s.kind = LayerKind::kInput;
    s.name = name;
    g_.layers.push_back(s);
    return name;
  }
  std::string conv(const std::string& name, const std::string& in, int kernel,
                   int cin, int cout) {
    g_.layers.push_back(make_conv(name, in, kernel, cin, cout));
    return name;
  }
  std::string conv_relu(const std::string& name, const std::string& in,
                        int kernel, int cin, int cout) {
    return relu(name + "_relu", conv(name, in, kernel, cin, cout));
  }
  std::string relu(const std::string& name, const std::string& in) {
    return unary(LayerKind::kRelu, name, in);
  }
  std::string pool(const std::string& name, const std::string& in) {
    return unary(LayerKind::kMaxPool2, name, in);
  }
  std::string join(LayerKind kind, const std::string& name,
                   std::vector<std::string> ins) {
    if (ins.size() == 1) return ins.front();
    LayerSpec s;
    s.kind = kind;
    s.name = name;
    s.inputs = std::move(ins);
    g_.layers.push_back(s);
    return name;
  }

  /// Stack of blocks; each block runs `convs` 3x3 conv+ReLU layers in series
  /// and aggregates their outputs. Returns (output layer, output channels).
  std::pair<std::string, int> blocks(const std::string& prefix,
                                     std::string in, int channels,
                                     const NetworkConfig& cfg, int count) {
    for (int b = 1; b <= count; ++b) {
      std::vector<std::string> outs;
      std::string x = in;
      int cin = channels;
      for (int c = 1; c <= cfg.block_convs; ++c) {
        x = conv_relu(prefix + "_b" + std::to_string(b) + "_c" + std::to_string(c),
                      x, 3, cin, cfg.block_channels);
        cin = cfg.block_channels;
        outs.push_back(x);
      }
      const bool concat = cfg.aggregation == Aggregation::kConcat;
      in = join(concat ? LayerKind::kConcat : LayerKind::kSum,
                prefix + "_b" + std::to_string(b) + "_agg", outs);
      channels = concat ? cfg.block_channels * cfg.block_convs : cfg.block_channels;
    }
    return {in, channels};
  }

 private:
  std::string unary(LayerKind kind, const std::string& name, const std::string& in) {
    LayerSpec s;
    s.kind = kind;
    s.name = name;
    s.inputs = {in};
    g_.layers.push_back(s);
    return name;
  }
  NetworkGraph& g_;
};

float unit_uniform(std::mt19937_64& rng) {
  // 24 random mantissa bits; avoids implementation-defined distributions.
  return static_cast<float>(rng() >> 40) * (1.0f / 16777216.0f);
}

}  // namespace

void NetworkConfig::validate() const {
  const auto positive = [](int v, const char* what) {
    if (v < 1) throw ConfigError(std::string(what) + " must be >= 1");
  };
  positive(input_channels, "input_channels");
  if (backbone_convs < 1 || backbone_convs > kVgg19Convs) {
    throw ConfigError("backbone_convs must be in [1, 16]");
  }
  for (int c : reduction_channels) positive(c, "reduction_channels entry");
  positive(branch_convs, "branch_convs");
  positive(branch_channels, "branch_channels");
  positive(head_hidden, "head_hidden");
  if (transfer_blocks < 0) throw ConfigError("transfer_blocks must be >= 0");
  positive(refine_blocks, "refine_blocks");
  positive(block_convs, "block_convs");
  positive(block_channels, "block_channels");
  if (refine_head_hidden < 0) throw ConfigError("refine_head_hidden must be >= 0");
  if (joint_outputs < 0 || limb_outputs < 0) {
    throw ConfigError("explicit head sizes must be >= 0");
  }
}

void to_json(nlohmann::json& j, const NetworkConfig& c) {
  j = {{"input_channels", c.input_channels},
       {"backbone_convs", c.backbone_convs},
       {"reduction_channels", c.reduction_channels},
       {"branch_convs", c.branch_convs},
       {"branch_channels", c.branch_channels},
       {"head_hidden", c.head_hidden},
       {"transfer_blocks", c.transfer_blocks},
       {"refine_blocks", c.refine_blocks},
       {"block_convs", c.block_convs},
       {"block_channels", c.block_channels},
       {"aggregation", c.aggregation == Aggregation::kSum ? "sum" : "concat"},
       {"transfer_source",
        c.transfer_source == TransferSource::kPenultimate ? "penultimate" : "features"},
       {"refine_uses_transfer", c.refine_uses_transfer},
       {"refine_head_hidden", c.refine_head_hidden},
       {"joint_outputs", c.joint_outputs},
       {"limb_outputs", c.limb_outputs}};
}

void from_json(const nlohmann::json& j, NetworkConfig& c) {
  try {
    NetworkConfig d;
    c.input_channels = j.value("input_channels", d.input_channels);
    c.backbone_convs = j.value("backbone_convs", d.backbone_convs);
    c.reduction_channels = j.value("reduction_channels", d.reduction_channels);
    c.branch_convs = j.value("branch_convs", d.branch_convs);
    c.branch_channels = j.value("branch_channels", d.branch_channels);
    c.head_hidden = j.value("head_hidden", d.head_hidden);
    c.transfer_blocks = j.value("transfer_blocks", d.transfer_blocks);
    c.refine_blocks = j.value("refine_blocks", d.refine_blocks);
    c.block_convs = j.value("block_convs", d.block_convs);
    c.block_channels = j.value("block_channels", d.block_channels);
    const std::string agg = j.value("aggregation", std::string("sum"));
    if (agg == "sum") {
      c.aggregation = Aggregation::kSum;
    } else if (agg == "concat") {
      c.aggregation = Aggregation::kConcat;
    } else {
      throw ParseError("network.aggregation", "expected \"sum\" or \"concat\", got \"" + agg + "\"");
    }
    const std::string src = j.value("transfer_source", std::string("penultimate"));
    if (src == "penultimate") {
      c.transfer_source = TransferSource::kPenultimate;
    } else if (src == "features") {
      c.transfer_source = TransferSource::kFeatures;
    } else {
      throw ParseError("network.transfer_source",
                       "expected \"penultimate\" or \"features\", got \"" + src + "\"");
    }
    c.refine_uses_transfer = j.value("refine_uses_transfer", d.refine_uses_transfer);
    c.refine_head_hidden = j.value("refine_head_hidden", d.refine_head_hidden);
    c.joint_outputs = j.value("joint_outputs", d.joint_outputs);
    c.limb_outputs = j.value("limb_outputs", d.limb_outputs);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("network", e.what());
  }
  c.validate();
}

int NetworkGraph::find(const std::string& name) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

const LayerSpec& NetworkGraph::layer(const std::string& name) const {
  const int i = find(name);
  if (i < 0) throw ConfigError("unknown layer '" + name + "'");
  return layers[static_cast<std::size_t>(i)];
}

void NetworkGraph::validate() const {
  if (layers.empty() || layers.front().kind != LayerKind::kInput) {
    throw ConfigError("graph must start with an input layer");
  }
  std::set<std::string> defined;
  for (const LayerSpec& s : layers) {
    s.validate();
    if (s.kind == LayerKind::kInput && &s != &layers.front()) {
      throw ConfigError("graph has more than one input layer");
    }
    for (const std::string& in : s.inputs) {
      if (!defined.count(in)) {
        throw ConfigError("layer '" + s.name + "' reads '" + in +
                          "' before it is defined");
      }
    }
    if (!defined.insert(s.name).second) {
      throw ConfigError("duplicate layer name '" + s.name + "'");
    }
  }
  for (const std::string* out : {&joint_output, &limb_output, &bifurcation}) {
    if (!defined.count(*out)) throw ConfigError("graph output '" + *out + "' is not a layer");
  }
}

std::vector<Shape> NetworkGraph::infer_shapes(const Shape& input_shape) const {
  std::vector<Shape> shapes;
  shapes.reserve(layers.size());
  std::unordered_map<std::string, std::size_t> index;
  for (const LayerSpec& s : layers) {
    std::vector<Shape> ins;
    if (s.kind == LayerKind::kInput) {
      if (input_shape.c != input_channels) {
        throw ShapeError("network input needs " + std::to_string(input_channels) +
                         " channels, got " + input_shape.str());
      }
      ins.push_back(input_shape);
    }
    for (const std::string& in : s.inputs) ins.push_back(shapes[index.at(in)]);
    index[s.name] = shapes.size();
    shapes.push_back(infer_output_shape(s, ins));
  }
  return shapes;
}

NetworkGraph build_mln(const SkeletonDef& def, const NetworkConfig& cfg) {
  def.validate();
  cfg.validate();
  const int joint_out = def.joint_channels();
  const int limb_out = def.limb_channels();
  if (cfg.joint_outputs != 0 && cfg.joint_outputs != joint_out) {
    throw ConfigError("config asks for " + std::to_string(cfg.joint_outputs) +
                      " joint maps, skeleton defines " + std::to_string(joint_out));
  }
  if (cfg.limb_outputs != 0 && cfg.limb_outputs != limb_out) {
    throw ConfigError("config asks for " + std::to_string(cfg.limb_outputs) +
                      " limb maps, skeleton defines " + std::to_string(limb_out));
  }

  NetworkGraph g;
  g.input_channels = cfg.input_channels;
  GraphBuilder b(g);
  std::string x = b.input("image");
  g.input = x;

  // Backbone: VGG-19 prefix; a pool is emitted only when a conv follows it.
  int channels = cfg.input_channels;
  int convs = 0;
  int block = 1;
  int in_block = 0;
  int stride = 1;
  bool pending_pool = false;
  for (int v : kVgg19) {
    if (convs == cfg.backbone_convs) break;
    if (v == 0) {
      pending_pool = true;
      continue;
    }
    if (pending_pool) {
      x = b.pool("pool" + std::to_string(block), x);
      stride *= 2;
      ++block;
      in_block = 0;
      pending_pool = false;
    }
    ++in_block;
    x = b.conv_relu("conv" + std::to_string(block) + "_" + std::to_string(in_block),
                    x, 3, channels, v);
    channels = v;
    ++convs;
  }
  for (std::size_t i = 0; i < cfg.reduction_channels.size(); ++i) {
    x = b.conv_relu("reduce" + std::to_string(i + 1), x, 3, channels,
                    cfg.reduction_channels[i]);
    channels = cfg.reduction_channels[i];
  }
  g.bifurcation = x;
  g.stride = stride;
  const int bifurcation_channels = channels;

  // Detection branches.
  struct Branch {
    std::string head;
    std::string features;
    int feature_channels = 0;
  };
  const auto detection = [&](const std::string& p, int outputs) {
    std::string y = g.bifurcation;
    int cin = bifurcation_channels;
    for (int i = 1; i <= cfg.branch_convs; ++i) {
      y = b.conv_relu(p + "_conv" + std::to_string(i), y, 3, cin, cfg.branch_channels);
      cin = cfg.branch_channels;
    }
    Branch br;
    if (cfg.transfer_source == TransferSource::kFeatures) {
      br.features = y;
      br.feature_channels = cin;
    }
    y = b.conv_relu(p + "_hidden", y, 1, cin, cfg.head_hidden);
    if (cfg.transfer_source == TransferSource::kPenultimate) {
      br.features = y;
      br.feature_channels = cfg.head_hidden;
    }
    br.head = b.conv(p + "_head", y, 1, cfg.head_hidden, outputs);
    return br;
  };
  const Branch joint = detection("joint", joint_out);
  const Branch limb = detection("limb", limb_out);

  // Cross-branch transfer: both directions read the same concatenated
  // detection features; joint->limb feeds limb refinement and vice versa.
  std::string to_limb, to_joint;
  int transfer_channels = 0;
  if (cfg.transfer_blocks > 0) {
    const std::string tin = b.join(LayerKind::kConcat, "transfer_input",
                                   {joint.features, limb.features});
    const int tin_channels = joint.feature_channels + limb.feature_channels;
    std::tie(to_limb, transfer_channels) =
        b.blocks("transfer_j2l", tin, tin_channels, cfg, cfg.transfer_blocks);
    std::tie(to_joint, transfer_channels) =
        b.blocks("transfer_l2j", tin, tin_channels, cfg, cfg.transfer_blocks);
  }
  const bool use_transfer = cfg.refine_uses_transfer && cfg.transfer_blocks > 0;

  const auto refine = [&](const std::string& p, const std::string& transferred,
                          int outputs) {
    std::vector<std::string> ins = {joint.head, limb.head};
    int cin = joint_out + limb_out;
    if (use_transfer) {
      ins.push_back(transferred);
      cin += transfer_channels;
    }
    ins.push_back(g.bifurcation);
    cin += bifurcation_channels;
    const std::string rin = b.join(LayerKind::kConcat, "refine_" + p + "_input", ins);
    auto [y, ych] = b.blocks("refine_" + p, rin, cin, cfg, cfg.refine_blocks);
    if (cfg.refine_head_hidden > 0) {
      y = b.conv_relu("refine_" + p + "_hidden", y, 1, ych, cfg.refine_head_hidden);
      ych = cfg.refine_head_hidden;
    }
    return b.conv("refine_" + p + "_head", y, 1, ych, outputs);
  };
  g.joint_output = refine("joint", to_joint, joint_out);
  g.limb_output = refine("limb", to_limb, limb_out);
  g.validate();
  return g;
}

WeightStore zero_weights(const NetworkGraph& graph) {
  WeightStore store;
  for (const LayerSpec& s : graph.layers) {
    if (s.kind != LayerKind::kConv) continue;
    const ConvParams& c = s.conv;
    store[s.name] = {Tensor(Shape{c.out_channels, c.in_channels, c.kernel_h, c.kernel_w}),
                     std::vector<float>(static_cast<std::size_t>(c.out_channels), 0.0f)};
  }
  return store;
}

WeightStore random_weights(const NetworkGraph& graph, std::uint64_t seed) {
  WeightStore store = zero_weights(graph);
  std::mt19937_64 rng(seed);
  for (const LayerSpec& s : graph.layers) {
    if (s.kind != LayerKind::kConv) continue;
    LayerWeights& lw = store[s.name];
    const int fan_in = s.conv.in_channels * s.conv.kernel_h * s.conv.kernel_w;
    const float limit = std::sqrt(3.0f / static_cast<float>(fan_in));
    for (float& w : lw.weights.data()) w = (2.0f * unit_uniform(rng) - 1.0f) * limit;
    for (float& v : lw.bias) {
      v = s.conv.has_bias ? (2.0f * unit_uniform(rng) - 1.0f) * 0.01f : 0.0f;
    }
  }
  return store;
}

void validate_weights(const NetworkGraph& graph, const WeightStore& store) {
  for (const LayerSpec& s : graph.layers) {
    if (s.kind != LayerKind::kConv) continue;
    const auto it = store.find(s.name);
    if (it == store.end()) throw WeightError("missing weights for layer '" + s.name + "'");
    const ConvParams& c = s.conv;
    const Shape expected{c.out_channels, c.in_channels, c.kernel_h, c.kernel_w};
    if (!(it->second.weights.shape() == expected)) {
      throw ShapeError("layer '" + s.name + "' expects weights " + expected.str() +
                       ", store has " + it->second.weights.shape().str());
    }
    if (static_cast<int>(it->second.bias.size()) != c.out_channels) {
      throw ShapeError("layer '" + s.name + "' expects " +
                       std::to_string(c.out_channels) + " bias values, store has " +
                       std::to_string(it->second.bias.size()));
    }
  }
}

namespace {

/// Executes layers [0, last] and returns the activations named in `keep`.
std::vector<std::optional<Tensor>> execute(const NetworkGraph& graph,
                                           const WeightStore& weights,
                                           const Tensor& image,
                                           std::size_t last,
                                           const std::set<std::size_t>& keep,
                                           int threads) {
  validate_weights(graph, weights);
  graph.infer_shapes(image.shape());  // throws on any shape mismatch

  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::size_t> last_use(graph.layers.size(), 0);
  for (std::size_t i = 0; i < graph.layers.size(); ++i) {
    index[graph.layers[i].name] = i;
    for (const std::string& in : graph.layers[i].inputs) last_use[index.at(in)] = i;
  }

  std::vector<std::optional<Tensor>> acts(graph.layers.size());
  for (std::size_t i = 0; i <= last; ++i) {
    const LayerSpec& s = graph.layers[i];
    std::vector<const Tensor*> ins;
    for (const std::string& in : s.inputs) ins.push_back(&*acts[index.at(in)]);
    switch (s.kind) {
      case LayerKind::kInput:
        acts[i] = image;
        break;
      case LayerKind::kConv: {
        const LayerWeights& lw = weights.at(s.name);
        std::span<const float> bias;
        if (s.conv.has_bias) bias = lw.bias;
        acts[i] = conv2d(*ins[0], lw.weights, bias, s.conv.stride, s.conv.padding, threads);
        break;
      }
      case LayerKind::kRelu:
        acts[i] = relu(*ins[0]);
        break;
      case LayerKind::kMaxPool2:
        acts[i] = maxpool2(*ins[0]);
        break;
      case LayerKind::kConcat:
        acts[i] = concat_channels(ins);
        break;
      case LayerKind::kSum:
        acts[i] = add(ins);
        break;
    }
    // Release inputs whose last consumer has now run.
    for (const std::string& in : s.inputs) {
      const std::size_t k = index.at(in);
      if (last_use[k] == i && !keep.count(k)) acts[k].reset();
    }
  }
  return acts;
}

}  // namespace

ForwardResult forward(const NetworkGraph& graph, const WeightStore& weights,
                      const Tensor& image, int threads) {
  const auto j = static_cast<std::size_t>(graph.find(graph.joint_output));
  const auto l = static_cast<std::size_t>(graph.find(graph.limb_output));
  auto acts = execute(graph, weights, image, graph.layers.size() - 1, {j, l}, threads);
  return {std::move(*acts[j]), std::move(*acts[l])};
}

Tensor dump_activation(const NetworkGraph& graph, const WeightStore& weights,
                       const Tensor& image, const std::string& layer_name,
                       int threads) {
  const int i = graph.find(layer_name);
  if (i < 0) throw ConfigError("unknown layer '" + layer_name + "'");
  const auto k = static_cast<std::size_t>(i);
  auto acts = execute(graph, weights, image, k, {k}, threads);
  return std::move(*acts[k]);
}

ComplexityReport complexity_report(const NetworkGraph& graph, const Shape& input_shape) {
  ComplexityReport r;
  r.input = input_shape;
  const std::vector<Shape> shapes = graph.infer_shapes(input_shape);
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < graph.layers.size(); ++i) {
    const LayerSpec& s = graph.layers[i];
    index[s.name] = i;
    LayerCost cost;
    cost.name = s.name;
    cost.kind = s.kind;
    cost.output = shapes[i];
    if (s.kind == LayerKind::kConv) {
      const Shape& in = shapes[index.at(s.inputs.front())];
      cost.params = layer_param_count(s);
      cost.flops_mac2 = layer_flop_count(s, in, FlopConvention::kMac2);
      cost.flops_mac1 = layer_flop_count(s, in, FlopConvention::kMac1);
    }
    r.total_params += cost.params;
    r.total_flops_mac2 += cost.flops_mac2;
    r.total_flops_mac1 += cost.flops_mac1;
    r.layers.push_back(std::move(cost));
  }
  return r;
}

nlohmann::json to_json(const ComplexityReport& r, bool per_layer) {
  nlohmann::json j = {
      {"input", {r.input.n, r.input.c, r.input.h, r.input.w}},
      {"total_params", r.total_params},
      {"model_size_mb", r.model_size_mb()},
      {"flops_mac2", r.total_flops_mac2},
      {"flops_mac1", r.total_flops_mac1},
      {"conv_layers", std::count_if(r.layers.begin(), r.layers.end(), [](const LayerCost& c) {
         return c.kind == LayerKind::kConv;
       })}};
  if (per_layer) {
    nlohmann::json layers = nlohmann::json::array();
    for (const LayerCost& c : r.layers) {
      if (c.kind != LayerKind::kConv) continue;
      layers.push_back({{"name", c.name},
                        {"output", {c.output.n, c.output.c, c.output.h, c.output.w}},
                        {"params", c.params},
                        {"flops_mac2", c.flops_mac2},
                        {"flops_mac1", c.flops_mac1}});
    }
    j["layers"] = layers;
  }
  return j;
}

std::vector<char> save_weights(const WeightStore& store) {
  ByteWriter w;
  w.bytes("MLNW");
  w.u32(kWeightFormatVersion);
  w.u32(static_cast<std::uint32_t>(store.size()));
  for (const auto& [name, lw] : store) {
    if (name.size() > 0xffff) throw FormatError("layer name too long: " + name);
    const Shape& s = lw.weights.shape();
    if (static_cast<int>(lw.bias.size()) != s.n) {
      throw ShapeError("layer '" + name + "': bias length must equal dims[0]");
    }
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.bytes(name);
    w.u8(4);
    for (int d : {s.n, s.c, s.h, s.w}) w.u32(static_cast<std::uint32_t>(d));
    w.f32s(lw.weights.data());
    w.f32s(lw.bias);
  }
  return std::move(w.buffer());
}

WeightStore load_weights(std::span<const char> bytes) {
  ByteReader r(bytes, "MLNW weights");
  if (r.bytes(4) != "MLNW") throw FormatError("MLNW weights: bad magic bytes");
  const std::uint32_t version = r.u32();
  if (version != kWeightFormatVersion) {
    throw FormatError("MLNW weights: unsupported version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  WeightStore store;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = r.bytes(r.u16());
    const std::uint8_t rank = r.u8();
    if (rank != 4) {
      throw FormatError("MLNW weights: layer '" + name + "' has rank " +
                        std::to_string(rank) + ", expected 4");
    }
    std::uint32_t dims[4];
    for (auto& d : dims) {
      d = r.u32();
      if (d > 0xffffu) throw FormatError("MLNW weights: implausible dimension in '" + name + "'");
    }
    const Shape shape{static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                      static_cast<int>(dims[2]), static_cast<int>(dims[3])};
    if (r.remaining() / 4 < shape.numel() + dims[0]) {
      throw TruncatedError("MLNW weights: payload of '" + name + "' is truncated");
    }
    LayerWeights lw{Tensor(shape), std::vector<float>(dims[0])};
    r.f32s(lw.weights.data());
    r.f32s(lw.bias);
    if (!store.emplace(name, std::move(lw)).second) {
      throw FormatError("MLNW weights: duplicate layer '" + name + "'");
    }
  }
  if (r.remaining() != 0) throw FormatError("MLNW weights: trailing bytes after last layer");
  return store;
}

}  // namespace mlnpose
