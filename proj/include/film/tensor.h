// Copyright 2026 The FILM Simulator Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FILM_TENSOR_H_
#define FILM_TENSOR_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace film {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixView = Eigen::Map<RowMatrix>;
using ConstMatrixView = Eigen::Map<const RowMatrix>;

// A dense row-major float64 tensor of rank 1 or 2.
struct Tensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> data;

  static Tensor Zeros(std::string name, std::vector<std::size_t> shape);

  std::size_t size() const { return data.size(); }
  std::size_t rows() const { return shape.size() == 2 ? shape[0] : 1; }
  std::size_t cols() const { return shape.empty() ? 0 : shape.back(); }

  // Rank-1 tensors are viewed as a single row.
  MatrixView matrix();
  ConstMatrixView matrix() const;
  std::span<double> row(std::size_t r);
  std::span<const double> row(std::size_t r) const;

  bool operator==(const Tensor&) const = default;
};

// Ordered collection of named tensors. Order is significant: it fixes the
// on-disk layout and every global traversal (norms, pruning ties).
class NamedTensors {
 public:
  NamedTensors() = default;
  explicit NamedTensors(std::vector<Tensor> tensors);

  std::size_t count() const { return tensors_.size(); }
  std::size_t total_size() const;

  Tensor& at(std::size_t i) { return tensors_.at(i); }
  const Tensor& at(std::size_t i) const { return tensors_.at(i); }
  const Tensor& find(std::string_view name) const;
  Tensor& find(std::string_view name);
  std::span<Tensor> tensors() { return tensors_; }
  std::span<const Tensor> tensors() const { return tensors_; }
  void push_back(Tensor t) { tensors_.push_back(std::move(t)); }

  NamedTensors ZerosLike() const;
  bool SameShapes(const NamedTensors& other) const;
  bool AllFinite() const;
  double GlobalL2Norm() const;

  // this += scale * other; shapes must agree.
  void AddScaled(const NamedTensors& other, double scale);
  void Scale(double factor);

  bool operator==(const NamedTensors&) const = default;

 private:
  std::vector<Tensor> tensors_;
};

// Named-tensor container: "FILMCKPT", u32 version, u32 count, then per tensor
// u16 name length, name, u8 dtype (1 = binary64), u8 rank, u64 dims,
// little-endian row-major payload.
void SaveTensors(const NamedTensors& tensors,
                 const std::filesystem::path& path);
NamedTensors LoadTensors(const std::filesystem::path& path);

std::string EncodeTensors(const NamedTensors& tensors);
NamedTensors DecodeTensors(std::string_view bytes);

}  // namespace film

#endif  // FILM_TENSOR_H_
