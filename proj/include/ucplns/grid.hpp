// Copyright 2026 The ucp-lns Authors.
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

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ucplns/error.hpp"

namespace ucplns {

// Dense units x periods matrix stored row-major by (g, t). The tag parameter
// keeps commitments, masks and scores from being mixed up silently.
template <typename T, typename Tag>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int units, int periods, T fill = T{})
      : units_(units),
        periods_(periods),
        data_(static_cast<std::size_t>(units) * periods, fill) {}
  Grid(int units, int periods, std::vector<T> data)
      : units_(units), periods_(periods), data_(std::move(data)) {
    if (data_.size() != static_cast<std::size_t>(units) * periods) {
      throw Error(ErrorCode::kShapeMismatch,
                  "grid data has " + std::to_string(data_.size()) +
                      " entries, expected " +
                      std::to_string(static_cast<std::size_t>(units) * periods));
    }
  }

  int units() const { return units_; }
  int periods() const { return periods_; }
  std::size_t size() const { return data_.size(); }
  bool same_shape(int units, int periods) const {
    return units_ == units && periods_ == periods;
  }
  template <typename U, typename V>
  bool same_shape(const Grid<U, V>& other) const {
    return units_ == other.units() && periods_ == other.periods();
  }

  T& operator()(int g, int t) { return data_[index(g, t)]; }
  const T& operator()(int g, int t) const { return data_[index(g, t)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> flat() { return data_; }
  std::span<const T> flat() const { return data_; }
  const std::vector<T>& values() const { return data_; }

  std::size_t index(int g, int t) const {
    return static_cast<std::size_t>(g) * periods_ + t;
  }

  std::size_t count_nonzero() const {
    return static_cast<std::size_t>(
        std::count_if(data_.begin(), data_.end(), [](const T& v) { return v != T{}; }));
  }

  friend bool operator==(const Grid& a, const Grid& b) = default;

 private:
  int units_ = 0;
  int periods_ = 0;
  std::vector<T> data_;
};

struct CommitmentTag {};
struct MaskTag {};
struct ScoreTag {};

// u[g][t] in {0,1}.
using Commitment = Grid<std::uint8_t, CommitmentTag>;
// a[g][t] = 1 marks a free (neighborhood) entry, 0 a fixed one.
using NeighborhoodMask = Grid<std::uint8_t, MaskTag>;
// Per-commitment-variable scores in (0,1).
using ScoreVector = Grid<double, ScoreTag>;

// Entrywise xor of two commitments, used as a neighborhood.
inline NeighborhoodMask xor_mask(const Commitment& a, const Commitment& b) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::kShapeMismatch, "xor of differently shaped commitments");
  }
  NeighborhoodMask out(a.units(), a.periods());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] != b[i]) ? 1 : 0;
  return out;
}

inline NeighborhoodMask mask_union(const NeighborhoodMask& a, const NeighborhoodMask& b) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::kShapeMismatch, "union of differently shaped masks");
  }
  NeighborhoodMask out(a.units(), a.periods());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] || b[i]) ? 1 : 0;
  return out;
}

}  // namespace ucplns
