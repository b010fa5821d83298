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

// Reverse-mode automatic differentiation over dense double tensors.
//
// A Tape is an append-only list of nodes in topological order. Every op
// computes its value eagerly when recorded; backward() walks the tape once in
// reverse and accumulates adjoints.
//
// Broadcasting is limited to add_bias (matrix plus column vector, applied to
// every column). Everything else requires identical shapes or conforming
// matrix-product shapes.

#ifndef TGT_AUTODIFF_HPP_
#define TGT_AUTODIFF_HPP_

#include <deque>
#include <functional>
#include <string_view>
#include <vector>

#include "tgt/common.hpp"

namespace tgt {

enum class OpKind {
  kInput,
  kParam,
  kAdd,
  kSub,
  kMul,
  kScale,
  kMatMul,
  kAddBias,
  kRelu,
  kTanh,
  kExp,
  kLog,
  kSum,
  kSoftmax,
};

std::string_view op_name(OpKind kind);

// Lower clamp applied inside log().
inline constexpr double kLogFloor = 1e-12;

struct NodeId {
  int index = -1;
  friend bool operator==(NodeId, NodeId) = default;
};

class Gradients;

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  // Leaves. Inputs and params differ only in how they are reported.
  NodeId input(Tensor value);
  NodeId param(Tensor value);

  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);  // elementwise
  NodeId scale(NodeId a, double factor);
  NodeId matmul(NodeId a, NodeId b);
  NodeId add_bias(NodeId a, NodeId bias);
  NodeId relu(NodeId a);
  NodeId tanh(NodeId a);
  NodeId exp(NodeId a);
  NodeId log(NodeId a);  // log(max(v, kLogFloor))
  NodeId sum(NodeId a);  // 1x1 total
  // Column-wise softmax of a / temperature, computed after subtracting the
  // column max.
  NodeId softmax(NodeId a, double temperature);

  const Tensor& value(NodeId id) const;
  double scalar(NodeId id) const;
  OpKind kind(NodeId id) const;
  bool is_leaf(NodeId id) const;
  std::size_t size() const { return nodes_.size(); }

  // Adjoints of `root` with respect to every node. Throws if root is not
  // 1x1.
  Gradients backward(NodeId root) const;

 private:
  struct Node {
    OpKind kind;
    int lhs = -1;
    int rhs = -1;
    double constant = 0.0;
    Tensor value;
  };

  NodeId push(OpKind kind, int lhs, int rhs, double constant, Tensor value);
  const Node& node(NodeId id) const;

  // deque: references to existing nodes stay valid while recording.
  std::deque<Node> nodes_;
};

class Gradients {
 public:
  explicit Gradients(std::vector<Tensor> adjoints)
      : adjoints_(std::move(adjoints)) {}

  // Gradient with the node's shape; zero when the root does not depend on it.
  const Tensor& operator[](NodeId id) const;

 private:
  std::vector<Tensor> adjoints_;
};

// Builds a scalar root from a parameter leaf holding `params`.
using ScalarBuilder = std::function<NodeId(Tape&, NodeId)>;

// Max over coordinates of |analytic - central difference| / max(1, |analytic|).
double grad_check(const ScalarBuilder& build, const Tensor& params,
                  double fd_step);

}  // namespace tgt

#endif  // TGT_AUTODIFF_HPP_
