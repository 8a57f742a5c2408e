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

#include "qstab/mlp.h"

#include <Eigen/Dense>

#include "qstab/errors.h"
#include "qstab/random.h"

namespace qstab {

namespace {

using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
using MatMap = Eigen::Map<Eigen::MatrixXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

}  // namespace

Mlp::Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw ContractViolation("mlp needs >= 2 layer sizes");
  int total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] < 1 || sizes_[l + 1] < 1) {
      throw ContractViolation("mlp layer sizes must be positive");
    }
    offsets_.push_back(total);
    total += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
  }
  params_ = Eigen::VectorXd::Zero(total);
}

void Mlp::InitOrthogonal(std::uint64_t seed, double hidden_gain,
                         double output_gain) {
  params_.setZero();
  for (int l = 0; l < num_layers(); ++l) {
    const int out = sizes_[l + 1];
    const int in = sizes_[l];
    const bool tall = out >= in;
    const int rows = tall ? out : in;
    const int cols = tall ? in : out;
    NoiseStream gauss(DeriveSeed(seed, "orthogonal", {std::uint64_t(l)}));
    Eigen::MatrixXd g(rows, cols);
    for (int c = 0; c < cols; ++c) {
      for (int r = 0; r < rows; ++r) g(r, c) = gauss.NextStandardNormal();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(cols);
    for (int c = 0; c < cols; ++c) {
      if (r(c, c) < 0) q.col(c) *= -1.0;
    }
    const double gain = l + 1 == num_layers() ? output_gain : hidden_gain;
    MatMap w(params_.data() + offsets_[l], out, in);
    if (tall) {
      w = gain * q;
    } else {
      w = gain * q.transpose();
    }
  }
}

Eigen::MatrixXd Mlp::Forward(const Eigen::MatrixXd& x, Cache* cache) const {
  if (x.rows() != input_size()) {
    throw DimensionError("mlp input has " + std::to_string(x.rows()) +
                         " rows, expected " + std::to_string(input_size()));
  }
  if (cache) {
    cache->activations.resize(num_layers() + 1);
    cache->activations[0] = x;
  }
  Eigen::MatrixXd a = x;
  for (int l = 0; l < num_layers(); ++l) {
    const int out = sizes_[l + 1];
    const int in = sizes_[l];
    ConstMatMap w(params_.data() + offsets_[l], out, in);
    ConstVecMap b(params_.data() + offsets_[l] + out * in, out);
    Eigen::MatrixXd z = w * a;
    z.colwise() += b;
    if (l + 1 < num_layers()) z = z.array().tanh();
    a = std::move(z);
    if (cache) cache->activations[l + 1] = a;
  }
  return a;
}

Eigen::VectorXd Mlp::Forward(const Eigen::VectorXd& x) const {
  if (x.size() != input_size()) {
    throw DimensionError("mlp input has length " + std::to_string(x.size()) +
                         ", expected " + std::to_string(input_size()));
  }
  Eigen::VectorXd a = x;
  for (int l = 0; l < num_layers(); ++l) {
    const int out = sizes_[l + 1];
    const int in = sizes_[l];
    ConstMatMap w(params_.data() + offsets_[l], out, in);
    ConstVecMap b(params_.data() + offsets_[l] + out * in, out);
    Eigen::VectorXd z = w * a + b;
    if (l + 1 < num_layers()) z = z.array().tanh();
    a = std::move(z);
  }
  return a;
}

void Mlp::Backward(const Cache& cache, const Eigen::MatrixXd& grad_output,
                   Eigen::VectorXd& grad) const {
  if (grad.size() != params_.size()) {
    throw DimensionError("mlp gradient has the wrong length");
  }
  Eigen::MatrixXd g = grad_output;
  for (int l = num_layers() - 1; l >= 0; --l) {
    const int out = sizes_[l + 1];
    const int in = sizes_[l];
    const Eigen::MatrixXd& a_prev = cache.activations[l];
    MatMap dw(grad.data() + offsets_[l], out, in);
    VecMap db(grad.data() + offsets_[l] + out * in, out);
    dw.noalias() += g * a_prev.transpose();
    db += g.rowwise().sum();
    if (l > 0) {
      ConstMatMap w(params_.data() + offsets_[l], out, in);
      Eigen::MatrixXd back = w.transpose() * g;
      g = back.array() * (1.0 - a_prev.array().square());
    }
  }
}

}  // namespace qstab
