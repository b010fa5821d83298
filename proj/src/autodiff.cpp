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

#include "tgt/autodiff.hpp"

#include <cmath>

namespace tgt {

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kInput: return "input";
    case OpKind::kParam: return "param";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kScale: return "scale";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kAddBias: return "add_bias";
    case OpKind::kRelu: return "relu";
    case OpKind::kTanh: return "tanh";
    case OpKind::kExp: return "exp";
    case OpKind::kLog: return "log";
    case OpKind::kSum: return "sum";
    case OpKind::kSoftmax: return "softmax";
  }
  return "unknown";
}

namespace {

[[noreturn]] void throw_shape(OpKind kind, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op_name(kind)) + ": shape mismatch " +
                   shape_string(a) + " vs " + shape_string(b));
}

void require_same_shape(OpKind kind, const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw_shape(kind, a, b);
}

void accumulate(Tensor& slot, const Tensor& delta) {
  if (slot.size() == 0) {
    slot = delta;
  } else {
    slot += delta;
  }
}

}  // namespace

NodeId Tape::push(OpKind kind, int lhs, int rhs, double constant,
                  Tensor value) {
  nodes_.push_back(Node{kind, lhs, rhs, constant, std::move(value)});
  return NodeId{static_cast<int>(nodes_.size()) - 1};
}

const Tape::Node& Tape::node(NodeId id) const {
  if (id.index < 0 || static_cast<std::size_t>(id.index) >= nodes_.size()) {
    throw Error("tape: node id " + std::to_string(id.index) + " out of range");
  }
  return nodes_[static_cast<std::size_t>(id.index)];
}

NodeId Tape::input(Tensor value) {
  return push(OpKind::kInput, -1, -1, 0.0, std::move(value));
}

NodeId Tape::param(Tensor value) {
  return push(OpKind::kParam, -1, -1, 0.0, std::move(value));
}

NodeId Tape::add(NodeId a, NodeId b) {
  const Tensor& x = node(a).value;
  const Tensor& y = node(b).value;
  require_same_shape(OpKind::kAdd, x, y);
  return push(OpKind::kAdd, a.index, b.index, 0.0, x + y);
}

NodeId Tape::sub(NodeId a, NodeId b) {
  const Tensor& x = node(a).value;
  const Tensor& y = node(b).value;
  require_same_shape(OpKind::kSub, x, y);
  return push(OpKind::kSub, a.index, b.index, 0.0, x - y);
}

NodeId Tape::mul(NodeId a, NodeId b) {
  const Tensor& x = node(a).value;
  const Tensor& y = node(b).value;
  require_same_shape(OpKind::kMul, x, y);
  return push(OpKind::kMul, a.index, b.index, 0.0, x.cwiseProduct(y));
}

NodeId Tape::scale(NodeId a, double factor) {
  return push(OpKind::kScale, a.index, -1, factor, node(a).value * factor);
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  const Tensor& x = node(a).value;
  const Tensor& y = node(b).value;
  if (x.cols() != y.rows()) throw_shape(OpKind::kMatMul, x, y);
  Tensor out = x * y;
  return push(OpKind::kMatMul, a.index, b.index, 0.0, std::move(out));
}

NodeId Tape::add_bias(NodeId a, NodeId bias) {
  const Tensor& x = node(a).value;
  const Tensor& b = node(bias).value;
  if (b.cols() != 1 || b.rows() != x.rows()) throw_shape(OpKind::kAddBias, x, b);
  Tensor out = x;
  out.colwise() += b.col(0);
  return push(OpKind::kAddBias, a.index, bias.index, 0.0, std::move(out));
}

NodeId Tape::relu(NodeId a) {
  return push(OpKind::kRelu, a.index, -1, 0.0, node(a).value.cwiseMax(0.0));
}

NodeId Tape::tanh(NodeId a) {
  return push(OpKind::kTanh, a.index, -1, 0.0,
              node(a).value.array().tanh().matrix());
}

NodeId Tape::exp(NodeId a) {
  return push(OpKind::kExp, a.index, -1, 0.0,
              node(a).value.array().exp().matrix());
}

NodeId Tape::log(NodeId a) {
  return push(OpKind::kLog, a.index, -1, 0.0,
              node(a).value.array().max(kLogFloor).log().matrix());
}

NodeId Tape::sum(NodeId a) {
  Tensor out(1, 1);
  out(0, 0) = node(a).value.sum();
  return push(OpKind::kSum, a.index, -1, 0.0, std::move(out));
}

NodeId Tape::softmax(NodeId a, double temperature) {
  if (!(temperature > 0.0)) {
    throw Error("softmax: temperature must be positive");
  }
  const Tensor& x = node(a).value;
  Tensor out = x / temperature;
  for (Index c = 0; c < out.cols(); ++c) {
    out.col(c).array() -= out.col(c).maxCoeff();
    out.col(c) = out.col(c).array().exp().matrix();
    out.col(c) /= out.col(c).sum();
  }
  return push(OpKind::kSoftmax, a.index, -1, temperature, std::move(out));
}

const Tensor& Tape::value(NodeId id) const { return node(id).value; }

double Tape::scalar(NodeId id) const {
  const Tensor& v = node(id).value;
  if (v.size() != 1) {
    throw ShapeError("scalar: node holds " + shape_string(v));
  }
  return v(0, 0);
}

OpKind Tape::kind(NodeId id) const { return node(id).kind; }

bool Tape::is_leaf(NodeId id) const {
  const OpKind k = node(id).kind;
  return k == OpKind::kInput || k == OpKind::kParam;
}

Gradients Tape::backward(NodeId root) const {
  const Tensor& root_value = node(root).value;
  if (root_value.size() != 1) {
    throw ShapeError("backward: root must be scalar, got " +
                     shape_string(root_value));
  }
  std::vector<Tensor> adj(nodes_.size());
  adj[static_cast<std::size_t>(root.index)] = Tensor::Ones(1, 1);

  for (int i = root.index; i >= 0; --i) {
    const auto ui = static_cast<std::size_t>(i);
    if (adj[ui].size() == 0) continue;
    const Node& n = nodes_[ui];
    const Tensor& g = adj[ui];
    const auto lhs = static_cast<std::size_t>(n.lhs);
    const auto rhs = static_cast<std::size_t>(n.rhs);
    switch (n.kind) {
      case OpKind::kInput:
      case OpKind::kParam:
        break;
      case OpKind::kAdd:
        accumulate(adj[lhs], g);
        accumulate(adj[rhs], g);
        break;
      case OpKind::kSub:
        accumulate(adj[lhs], g);
        accumulate(adj[rhs], -g);
        break;
      case OpKind::kMul:
        accumulate(adj[lhs], g.cwiseProduct(nodes_[rhs].value));
        accumulate(adj[rhs], g.cwiseProduct(nodes_[lhs].value));
        break;
      case OpKind::kScale:
        accumulate(adj[lhs], g * n.constant);
        break;
      case OpKind::kMatMul:
        accumulate(adj[lhs], g * nodes_[rhs].value.transpose());
        accumulate(adj[rhs], nodes_[lhs].value.transpose() * g);
        break;
      case OpKind::kAddBias:
        accumulate(adj[lhs], g);
        accumulate(adj[rhs], g.rowwise().sum());
        break;
      case OpKind::kRelu:
        accumulate(adj[lhs],
                   (nodes_[lhs].value.array() > 0.0).select(g, 0.0).matrix());
        break;
      case OpKind::kTanh:
        accumulate(adj[lhs],
                   (g.array() * (1.0 - n.value.array().square())).matrix());
        break;
      case OpKind::kExp:
        accumulate(adj[lhs], g.cwiseProduct(n.value));
        break;
      case OpKind::kLog: {
        const Tensor& x = nodes_[lhs].value;
        accumulate(adj[lhs],
                   (x.array() > kLogFloor).select(g.array() / x.array(), 0.0)
                       .matrix());
        break;
      }
      case OpKind::kSum:
        accumulate(adj[lhs],
                   Tensor::Constant(nodes_[lhs].value.rows(),
                                    nodes_[lhs].value.cols(), g(0, 0)));
        break;
      case OpKind::kSoftmax: {
        // d/dx softmax(x/t): (1/t) * p * (g - <g, p>), per column.
        const Tensor& p = n.value;
        Tensor d(p.rows(), p.cols());
        for (Index c = 0; c < p.cols(); ++c) {
          const double inner = g.col(c).dot(p.col(c));
          d.col(c) = (p.col(c).array() * (g.col(c).array() - inner)).matrix() /
                     n.constant;
        }
        accumulate(adj[lhs], d);
        break;
      }
    }
  }

  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (adj[i].size() == 0) {
      adj[i] = Tensor::Zero(nodes_[i].value.rows(), nodes_[i].value.cols());
    }
  }
  return Gradients(std::move(adj));
}

const Tensor& Gradients::operator[](NodeId id) const {
  if (id.index < 0 || static_cast<std::size_t>(id.index) >= adjoints_.size()) {
    throw Error("gradients: node id " + std::to_string(id.index) +
                " out of range");
  }
  return adjoints_[static_cast<std::size_t>(id.index)];
}

double grad_check(const ScalarBuilder& build, const Tensor& params,
                  double fd_step) {
  if (!(fd_step > 0.0)) throw Error("grad_check: fd_step must be positive");

  Tape tape;
  const NodeId leaf = tape.param(params);
  const NodeId root = build(tape, leaf);
  const Tensor analytic = tape.backward(root)[leaf];

  auto evaluate = [&](const Tensor& p) {
    Tape t;
    const NodeId l = t.param(p);
    return t.scalar(build(t, l));
  };

  double worst = 0.0;
  Tensor probe = params;
  for (Index i = 0; i < params.size(); ++i) {
    const double saved = probe(i);
    probe(i) = saved + fd_step;
    const double up = evaluate(probe);
    probe(i) = saved - fd_step;
    const double down = evaluate(probe);
    probe(i) = saved;
    const double numeric = (up - down) / (2.0 * fd_step);
    const double a = analytic(i);
    worst = std::max(worst, std::abs(a - numeric) / std::max(1.0, std::abs(a)));
  }
  return worst;
}

}  // namespace tgt
