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

#include "film/tensor.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <utility>

#include "film/error.h"
#include "film/io.h"

namespace film {
namespace {

constexpr std::string_view kMagic = "FILMCKPT";
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kDtypeFloat64 = 1;

template <typename T>
void PutLe(std::string& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto bits = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T Get() {
    Need(sizeof(T));
    std::make_unsigned_t<T> bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bits |= static_cast<std::make_unsigned_t<T>>(
                  static_cast<unsigned char>(bytes_[pos_ + i]))
              << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(bits);
  }

  std::string_view Take(std::size_t n) {
    Need(n);
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void Need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) {
      throw Error(ErrorCode::kCheckpointMismatch, "truncated tensor container");
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Tensor Tensor::Zeros(std::string name, std::vector<std::size_t> shape) {
  std::size_t n = std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                                  std::multiplies<>());
  return Tensor{std::move(name), std::move(shape), std::vector<double>(n, 0.0)};
}

MatrixView Tensor::matrix() {
  return MatrixView(data.data(), static_cast<Eigen::Index>(rows()),
                    static_cast<Eigen::Index>(cols()));
}

ConstMatrixView Tensor::matrix() const {
  return ConstMatrixView(data.data(), static_cast<Eigen::Index>(rows()),
                         static_cast<Eigen::Index>(cols()));
}

std::span<double> Tensor::row(std::size_t r) {
  return std::span<double>(data).subspan(r * cols(), cols());
}

std::span<const double> Tensor::row(std::size_t r) const {
  return std::span<const double>(data).subspan(r * cols(), cols());
}

NamedTensors::NamedTensors(std::vector<Tensor> tensors)
    : tensors_(std::move(tensors)) {}

std::size_t NamedTensors::total_size() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.size();
  return n;
}

const Tensor& NamedTensors::find(std::string_view name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return t;
  }
  throw Error(ErrorCode::kShapeError,
              "no tensor named '" + std::string(name) + "'");
}

Tensor& NamedTensors::find(std::string_view name) {
  return const_cast<Tensor&>(std::as_const(*this).find(name));
}

NamedTensors NamedTensors::ZerosLike() const {
  NamedTensors out;
  for (const auto& t : tensors_) out.push_back(Tensor::Zeros(t.name, t.shape));
  return out;
}

bool NamedTensors::SameShapes(const NamedTensors& other) const {
  if (count() != other.count()) return false;
  for (std::size_t i = 0; i < count(); ++i) {
    if (tensors_[i].name != other.tensors_[i].name ||
        tensors_[i].shape != other.tensors_[i].shape) {
      return false;
    }
  }
  return true;
}

bool NamedTensors::AllFinite() const {
  for (const auto& t : tensors_) {
    for (double v : t.data) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

double NamedTensors::GlobalL2Norm() const {
  double sum = 0.0;
  for (const auto& t : tensors_) {
    for (double v : t.data) sum += v * v;
  }
  return std::sqrt(sum);
}

void NamedTensors::AddScaled(const NamedTensors& other, double scale) {
  if (!SameShapes(other)) {
    throw Error(ErrorCode::kShapeError, "AddScaled: shape mismatch");
  }
  for (std::size_t i = 0; i < count(); ++i) {
    auto& dst = tensors_[i].data;
    const auto& src = other.tensors_[i].data;
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += scale * src[j];
  }
}

void NamedTensors::Scale(double factor) {
  for (auto& t : tensors_) {
    for (double& v : t.data) v *= factor;
  }
}

std::string EncodeTensors(const NamedTensors& tensors) {
  std::string out(kMagic);
  PutLe<std::uint32_t>(out, kVersion);
  PutLe<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.count()));
  for (const auto& t : tensors.tensors()) {
    PutLe<std::uint16_t>(out, static_cast<std::uint16_t>(t.name.size()));
    out += t.name;
    PutLe<std::uint8_t>(out, kDtypeFloat64);
    PutLe<std::uint8_t>(out, static_cast<std::uint8_t>(t.shape.size()));
    for (std::size_t dim : t.shape) PutLe<std::uint64_t>(out, dim);
    for (double v : t.data) {
      PutLe<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    }
  }
  return out;
}

NamedTensors DecodeTensors(std::string_view bytes) {
  Reader in(bytes);
  if (in.Take(kMagic.size()) != kMagic) {
    throw Error(ErrorCode::kCheckpointMismatch, "bad magic bytes");
  }
  if (auto version = in.Get<std::uint32_t>(); version != kVersion) {
    throw Error(ErrorCode::kCheckpointMismatch,
                "unsupported container version " + std::to_string(version));
  }
  auto count = in.Get<std::uint32_t>();
  NamedTensors out;
  for (std::uint32_t i = 0; i < count; ++i) {
    Tensor t;
    auto name_len = in.Get<std::uint16_t>();
    t.name = std::string(in.Take(name_len));
    if (in.Get<std::uint8_t>() != kDtypeFloat64) {
      throw Error(ErrorCode::kCheckpointMismatch,
                  "tensor '" + t.name + "' has unsupported dtype");
    }
    auto rank = in.Get<std::uint8_t>();
    std::size_t n = 1;
    for (std::uint8_t r = 0; r < rank; ++r) {
      t.shape.push_back(static_cast<std::size_t>(in.Get<std::uint64_t>()));
      n *= t.shape.back();
    }
    t.data.resize(n);
    for (auto& v : t.data) v = std::bit_cast<double>(in.Get<std::uint64_t>());
    out.push_back(std::move(t));
  }
  if (!in.done()) {
    throw Error(ErrorCode::kCheckpointMismatch, "trailing bytes in container");
  }
  return out;
}

void SaveTensors(const NamedTensors& tensors,
                 const std::filesystem::path& path) {
  WriteFileAtomic(path, EncodeTensors(tensors));
}

NamedTensors LoadTensors(const std::filesystem::path& path) {
  return DecodeTensors(ReadFile(path));
}

}  // namespace film
