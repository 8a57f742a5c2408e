// Copyright 2026 The qstab Authors
//
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

#ifndef QSTAB_MLP_H_
#define QSTAB_MLP_H_

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace qstab {

// Fully connected network with tanh hidden layers and a linear output.
// All weights and biases live in one flat vector: per layer, the weight
// matrix (out x in, column-major) followed by the bias.
class Mlp {
 public:
  Mlp() = default;
  // sizes = {input, hidden..., output}; at least two entries.
  explicit Mlp(std::vector<int> sizes);

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  const std::vector<int>& sizes() const { return sizes_; }
  int num_params() const { return static_cast<int>(params_.size()); }

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  // Offset of layer l's weights in params(); biases follow the weights.
  int weight_offset(int layer) const { return offsets_[layer]; }

  // Orthogonal weights scaled by hidden_gain (output_gain on the last
  // layer), zero biases.
  void InitOrthogonal(std::uint64_t seed, double hidden_gain,
                      double output_gain);

  struct Cache {
    std::vector<Eigen::MatrixXd> activations;  // a_0 = input ... a_L
  };

  // x is input_size x batch. Fills `cache` when non-null.
  Eigen::MatrixXd Forward(const Eigen::MatrixXd& x, Cache* cache = nullptr) const;
  Eigen::VectorXd Forward(const Eigen::VectorXd& x) const;

  // Adds d(loss)/d(params) to `grad` given d(loss)/d(output) (output x batch).
  void Backward(const Cache& cache, const Eigen::MatrixXd& grad_output,
                Eigen::VectorXd& grad) const;

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;
  Eigen::VectorXd params_;
};

}  // namespace qstab

#endif  // QSTAB_MLP_H_
