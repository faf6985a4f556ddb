/* Copyright 2026 The latentface Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace latentface {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Broad failure classes. The service layer maps these onto HTTP status codes.
enum class ErrorKind {
  kInvalidArgument,
  kShapeMismatch,
  kNotReady,
  kNotFound,
  kUnsupported,
  kIo,
  kDiverged,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

// 64-bit FNV-1a. Used for content digests (corpus, checkpoints, run ids).
class Digest {
 public:
  Digest& bytes(const void* data, std::size_t n);
  Digest& str(std::string_view s) { return bytes(s.data(), s.size()); }
  template <typename T>
  Digest& pod(const T& v) {
    return bytes(&v, sizeof(T));
  }
  template <typename T>
  Digest& span(std::span<const T> v) {
    return bytes(v.data(), v.size_bytes());
  }
  std::uint64_t value() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string to_hex(std::uint64_t v);

// splitmix64 finalizer; derives independent stream seeds from (seed, index).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

bool is_power_of_two(int v);

}  // namespace latentface
