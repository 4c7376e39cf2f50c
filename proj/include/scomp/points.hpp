/* Copyright 2026 The scomp Authors. All Rights Reserved.

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
#include <initializer_list>
#include <span>
#include <vector>

#include "scomp/error.hpp"

namespace scomp {

// Row-major n x d block of sample vectors.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::size_t dim) : dim_(dim) {}
  PointSet(std::size_t dim, std::size_t count)
      : dim_(dim), data_(dim * count, 0.0) {}
  PointSet(std::size_t dim, std::vector<double> data)
      : dim_(dim), data_(std::move(data)) {
    require(dim_ > 0 && data_.size() % dim_ == 0, ErrorCode::kDimensionMismatch,
            "point data size is not a multiple of the dimension");
  }

  // 1D convenience: one point per value.
  static PointSet from_values(std::initializer_list<double> values) {
    return PointSet(1, std::vector<double>(values));
  }
  static PointSet from_values(std::span<const double> values) {
    return PointSet(1, std::vector<double>(values.begin(), values.end()));
  }
  static PointSet from_rows(
      std::initializer_list<std::initializer_list<double>> rows) {
    PointSet out;
    for (auto row : rows) {
      if (out.dim_ == 0) out.dim_ = row.size();
      out.push_back(std::span<const double>(row.begin(), row.size()));
    }
    return out;
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
  bool empty() const noexcept { return size() == 0; }

  std::span<const double> operator[](std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<double> operator[](std::size_t i) {
    return {data_.data() + i * dim_, dim_};
  }

  void push_back(std::span<const double> x) {
    require(x.size() == dim_, ErrorCode::kDimensionMismatch,
            "point dimension does not match set dimension");
    data_.insert(data_.end(), x.begin(), x.end());
  }
  void reserve(std::size_t n) { data_.reserve(n * dim_); }

  // Rows [first, first + count).
  PointSet slice(std::size_t first, std::size_t count) const {
    PointSet out(dim_);
    out.data_.assign(data_.begin() + first * dim_,
                     data_.begin() + (first + count) * dim_);
    return out;
  }

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  friend bool operator==(const PointSet&, const PointSet&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

}  // namespace scomp
