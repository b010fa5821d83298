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

// Fully connected networks: the teacher encoder/decoder, the teacher labeler
// and the student are all MlpParams with different architectures.

#ifndef TGT_NETS_HPP_
#define TGT_NETS_HPP_

#include <cmath>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tgt/autodiff.hpp"
#include "tgt/common.hpp"

namespace tgt {

enum class Activation { kIdentity, kTanh, kRelu };

std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);

struct Layer {
  Tensor weight;  // out x in
  Vector bias;    // out
  Activation activation = Activation::kIdentity;
};

// Layer widths plus one activation per layer; the last activation must be
// identity.
struct Architecture {
  std::vector<Index> dims;
  std::vector<Activation> activations;

  // dims.front() -> hidden... -> dims.back(), `hidden_act` on every hidden
  // layer and identity on the output.
  static Architecture chain(std::vector<Index> dims, Activation hidden_act);
};

class MlpParams {
 public:
  MlpParams() = default;
  MlpParams(std::string name, std::vector<Layer> layers);

  const std::string& name() const { return name_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }
  Index input_dim() const;
  Index output_dim() const;
  Architecture architecture() const;
  Index parameter_count() const;

  // Throws ShapeError when the layer chain is inconsistent.
  void validate() const;

  friend bool operator==(const MlpParams& a, const MlpParams& b);

 private:
  std::string name_;
  std::vector<Layer> layers_;
};

// Glorot-uniform weights, zero biases; deterministic per seed.
MlpParams init_params(const Architecture& arch, std::uint64_t seed,
                      std::string name = "mlp");

// Batched forward pass. x is input_dim x batch.
Tensor mlp_apply(const MlpParams& params, const Tensor& x);

// Node ids of the parameters registered on a tape, two per layer.
struct MlpNodes {
  std::vector<NodeId> weights;
  std::vector<NodeId> biases;
};

// Adds every weight and bias to the tape as a param leaf.
MlpNodes register_params(Tape& tape, const MlpParams& params);

// Records the forward pass using already-registered parameters. Values agree
// bit-for-bit with the tape-free overload.
NodeId mlp_apply(Tape& tape, const MlpParams& params, const MlpNodes& nodes,
                 NodeId x);

// Registers the parameters and records the forward pass in one go.
NodeId mlp_apply(Tape& tape, const MlpParams& params, NodeId x,
                 MlpNodes* nodes = nullptr);

// Probability vector produced by a tempered softmax.
struct ProbVector {
  Vector probs;
  double temperature = 1.0;
};

// Column-wise softmax(logits / temperature) with max subtraction.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
softmax_columns(const Eigen::MatrixBase<Derived>& logits,
                typename Derived::Scalar temperature) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
      logits / temperature;
  for (Index c = 0; c < out.cols(); ++c) {
    out.col(c).array() -= out.col(c).maxCoeff();
    out.col(c) = out.col(c).array().exp().matrix();
    out.col(c) /= out.col(c).sum();
  }
  return out;
}

ProbVector softmax_probs(const Vector& logits, double temperature);

// Text serialization. Header line `name dims activations`, e.g.
// `teacher 16,64,64,3 relu,relu,identity`, then per layer `out` rows of
// `in` weights followed by one bias row. Values use 17 significant digits.
void write_mlp(std::ostream& os, const MlpParams& params);
MlpParams read_mlp(std::istream& is);
void save_mlp(const std::filesystem::path& path, const MlpParams& params);
MlpParams load_mlp(const std::filesystem::path& path);

}  // namespace tgt

#endif  // TGT_NETS_HPP_
