// Copyright 2026 The roadloc Authors. All Rights Reserved.
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

#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace roadloc {

/// Dense height x width x channels grid, channel-last (HWC) layout.
class Grid {
 public:
  Grid() = default;
  Grid(int height, int width, int channels, double fill = 0.0);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }
  bool same_shape(const Grid& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

  double& at(int row, int col, int ch) { return data_[index(row, col, ch)]; }
  double at(int row, int col, int ch) const { return data_[index(row, col, ch)]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  std::size_t index(int row, int col, int ch) const {
    return (static_cast<std::size_t>(row) * width_ + col) * channels_ + ch;
  }

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

enum class GridDType { kFloat32, kFloat64 };

/// Writes `<stem>.bin` (little-endian, HWC) and `<stem>.json`
/// ({height, width, channels, stride, dtype}). float32 is the interchange
/// default; float64 keeps values bit-exact.
void save_grid(const std::filesystem::path& stem, const Grid& grid, int stride,
               GridDType dtype = GridDType::kFloat32);

/// Reads the pair written by save_grid. A sidecar without "dtype" is
/// float32. `stride`, when non-null, receives the sidecar stride.
Grid load_grid(const std::filesystem::path& stem, int* stride = nullptr);

}  // namespace roadloc
