// Copyright 2026 The tgtlab Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tgt/nets.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace tgt {

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
  }
  return "identity";
}

Activation parse_activation(std::string_view name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  throw Error("unknown activation '" + std::string(name) + "'");
}

Architecture Architecture::chain(std::vector<Index> dims,
                                 Activation hidden_act) {
  Architecture arch;
  arch.dims = std::move(dims);
  for (std::size_t i = 1; i < arch.dims.size(); ++i) {
    arch.activations.push_back(i + 1 == arch.dims.size() ? Activation::kIdentity
                                                         : hidden_act);
  }
  return arch;
}

MlpParams::MlpParams(std::string name, std::vector<Layer> layers)
    : name_(std::move(name)), layers_(std::move(layers)) {
  validate();
}

Index MlpParams::input_dim() const {
  return layers_.empty() ? 0 : layers_.front().weight.cols();
}

Index MlpParams::output_dim() const {
  return layers_.empty() ? 0 : layers_.back().weight.rows();
}

Architecture MlpParams::architecture() const {
  Architecture arch;
  arch.dims.push_back(input_dim());
  for (const Layer& l : layers_) {
    arch.dims.push_back(l.weight.rows());
    arch.activations.push_back(l.activation);
  }
  return arch;
}

Index MlpParams::parameter_count() const {
  Index n = 0;
  for (const Layer& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

void MlpParams::validate() const {
  if (layers_.empty()) throw ShapeError(name_ + ": no layers");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    if (l.weight.rows() < 1 || l.weight.cols() < 1) {
      throw ShapeError(name_ + ": empty weight at layer " + std::to_string(i));
    }
    if (l.bias.size() != l.weight.rows()) {
      throw ShapeError(name_ + ": bias length " + std::to_string(l.bias.size()) +
                       " != weight rows " + std::to_string(l.weight.rows()) +
                       " at layer " + std::to_string(i));
    }
    if (i > 0 && layers_[i - 1].weight.rows() != l.weight.cols()) {
      throw ShapeError(name_ + ": layer " + std::to_string(i) + " input " +
                       std::to_string(l.weight.cols()) + " != previous output " +
                       std::to_string(layers_[i - 1].weight.rows()));
    }
  }
  if (layers_.back().activation != Activation::kIdentity) {
    throw ShapeError(name_ + ": final activation must be identity");
  }
}

bool operator==(const MlpParams& a, const MlpParams& b) {
  if (a.name_ != b.name_ || a.layers_.size() != b.layers_.size()) return false;
  for (std::size_t i = 0; i < a.layers_.size(); ++i) {
    const Layer& x = a.layers_[i];
    const Layer& y = b.layers_[i];
    if (x.activation != y.activation || x.weight.rows() != y.weight.rows() ||
        x.weight.cols() != y.weight.cols() || x.weight != y.weight ||
        x.bias != y.bias) {
      return false;
    }
  }
  return true;
}

MlpParams init_params(const Architecture& arch, std::uint64_t seed,
                      std::string name) {
  if (arch.dims.size() < 2 || arch.activations.size() + 1 != arch.dims.size()) {
    throw ShapeError("init_params: need dims.size() == activations.size() + 1");
  }
  Rng rng = make_rng(seed);
  std::vector<Layer> layers;
  for (std::size_t i = 0; i + 1 < arch.dims.size(); ++i) {
    const Index in = arch.dims[i];
    const Index out = arch.dims[i + 1];
    if (in < 1 || out < 1) throw ShapeError("init_params: dims must be positive");
    const double a = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> uniform(-a, a);
    Layer layer;
    layer.weight.resize(out, in);
    for (Index r = 0; r < out; ++r) {
      for (Index c = 0; c < in; ++c) layer.weight(r, c) = uniform(rng);
    }
    layer.bias = Vector::Zero(out);
    layer.activation = arch.activations[i];
    layers.push_back(std::move(layer));
  }
  return MlpParams(std::move(name), std::move(layers));
}

namespace {

void check_input(const MlpParams& params, Index rows) {
  if (rows != params.input_dim()) {
    throw ShapeError(params.name() + ": input has " + std::to_string(rows) +
                     " rows, expected " + std::to_string(params.input_dim()));
  }
}

}  // namespace

Tensor mlp_apply(const MlpParams& params, const Tensor& x) {
  check_input(params, x.rows());
  Tensor h = x;
  for (const Layer& l : params.layers()) {
    Tensor z = l.weight * h;
    z.colwise() += l.bias;
    switch (l.activation) {
      case Activation::kIdentity: h = std::move(z); break;
      case Activation::kTanh: h = z.array().tanh().matrix(); break;
      case Activation::kRelu: h = z.cwiseMax(0.0); break;
    }
  }
  return h;
}

MlpNodes register_params(Tape& tape, const MlpParams& params) {
  MlpNodes nodes;
  for (const Layer& l : params.layers()) {
    nodes.weights.push_back(tape.param(l.weight));
    nodes.biases.push_back(tape.param(l.bias));
  }
  return nodes;
}

NodeId mlp_apply(Tape& tape, const MlpParams& params, const MlpNodes& nodes,
                 NodeId x) {
  check_input(params, tape.value(x).rows());
  if (nodes.weights.size() != params.layers().size()) {
    throw ShapeError(params.name() + ": registered node count mismatch");
  }
  NodeId h = x;
  for (std::size_t i = 0; i < params.layers().size(); ++i) {
    const NodeId z =
        tape.add_bias(tape.matmul(nodes.weights[i], h), nodes.biases[i]);
    switch (params.layers()[i].activation) {
      case Activation::kIdentity: h = z; break;
      case Activation::kTanh: h = tape.tanh(z); break;
      case Activation::kRelu: h = tape.relu(z); break;
    }
  }
  return h;
}

NodeId mlp_apply(Tape& tape, const MlpParams& params, NodeId x,
                 MlpNodes* nodes) {
  MlpNodes registered = register_params(tape, params);
  const NodeId out = mlp_apply(tape, params, registered, x);
  if (nodes != nullptr) *nodes = std::move(registered);
  return out;
}

ProbVector softmax_probs(const Vector& logits, double temperature) {
  if (!(temperature > 0.0)) {
    throw Error("softmax_probs: temperature must be positive");
  }
  return ProbVector{softmax_columns(logits, temperature).col(0), temperature};
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

}  // namespace

void write_mlp(std::ostream& os, const MlpParams& params) {
  const Architecture arch = params.architecture();
  os << params.name() << ' ';
  for (std::size_t i = 0; i < arch.dims.size(); ++i) {
    os << (i ? "," : "") << arch.dims[i];
  }
  os << ' ';
  for (std::size_t i = 0; i < arch.activations.size(); ++i) {
    os << (i ? "," : "") << activation_name(arch.activations[i]);
  }
  os << '\n';
  for (const Layer& l : params.layers()) {
    for (Index r = 0; r < l.weight.rows(); ++r) {
      for (Index c = 0; c < l.weight.cols(); ++c) {
        os << (c ? " " : "") << format_double(l.weight(r, c));
      }
      os << '\n';
    }
    for (Index r = 0; r < l.bias.size(); ++r) {
      os << (r ? " " : "") << format_double(l.bias(r));
    }
    os << '\n';
  }
}

MlpParams read_mlp(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw Error("read_mlp: missing header");
  std::istringstream hs(header);
  std::string name, dims_s, acts_s;
  if (!(hs >> name >> dims_s >> acts_s)) {
    throw Error("read_mlp: malformed header '" + header + "'");
  }
  Architecture arch;
  for (const std::string& d : split(dims_s, ',')) {
    arch.dims.push_back(static_cast<Index>(std::stoll(d)));
  }
  for (const std::string& a : split(acts_s, ',')) {
    arch.activations.push_back(parse_activation(a));
  }
  if (arch.dims.size() != arch.activations.size() + 1) {
    throw Error("read_mlp: dims/activations length mismatch");
  }
  auto read_value = [&is]() {
    std::string tok;
    if (!(is >> tok)) throw Error("read_mlp: truncated weights");
    return std::stod(tok);
  };
  std::vector<Layer> layers;
  for (std::size_t i = 0; i < arch.activations.size(); ++i) {
    Layer l;
    l.weight.resize(arch.dims[i + 1], arch.dims[i]);
    for (Index r = 0; r < l.weight.rows(); ++r) {
      for (Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = read_value();
    }
    l.bias.resize(arch.dims[i + 1]);
    for (Index r = 0; r < l.bias.size(); ++r) l.bias(r) = read_value();
    l.activation = arch.activations[i];
    layers.push_back(std::move(l));
  }
  return MlpParams(name, std::move(layers));
}

void save_mlp(const std::filesystem::path& path, const MlpParams& params) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  write_mlp(os, params);
}

MlpParams load_mlp(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path.string());
  return read_mlp(is);
}

}  // namespace tgt
