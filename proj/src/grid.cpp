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

#include "roadloc/grid.hpp"

#include <bit>
#include <cstdint>

#include <nlohmann/json.hpp>

#include "roadloc/error.hpp"
#include "roadloc/fileio.hpp"

namespace roadloc {

Grid::Grid(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  if (height < 0 || width < 0 || channels < 0) {
    throw Error(ErrorCode::kInvalidArgument, "grid dimensions must be non-negative");
  }
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  return std::filesystem::path(stem.string() + suffix);
}

}  // namespace

namespace {

template <typename Word, typename Float>
void put_le(std::string& bytes, std::size_t i, Float value) {
  const auto bits = std::bit_cast<Word>(value);
  for (std::size_t b = 0; b < sizeof(Word); ++b) {
    bytes[i * sizeof(Word) + b] = static_cast<char>((bits >> (8 * b)) & 0xFFu);
  }
}

template <typename Word, typename Float>
Float get_le(const std::string& bytes, std::size_t i) {
  Word bits = 0;
  for (std::size_t b = 0; b < sizeof(Word); ++b) {
    bits |= static_cast<Word>(static_cast<unsigned char>(bytes[i * sizeof(Word) + b])) << (8 * b);
  }
  return std::bit_cast<Float>(bits);
}

}  // namespace

void save_grid(const std::filesystem::path& stem, const Grid& grid, int stride, GridDType dtype) {
  const bool wide = dtype == GridDType::kFloat64;
  std::string bytes(grid.size() * (wide ? 8 : 4), '\0');
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (wide) {
      put_le<std::uint64_t>(bytes, i, grid.data()[i]);
    } else {
      put_le<std::uint32_t>(bytes, i, static_cast<float>(grid.data()[i]));
    }
  }
  nlohmann::json meta = {{"height", grid.height()},
                         {"width", grid.width()},
                         {"channels", grid.channels()},
                         {"stride", stride},
                         {"dtype", wide ? "float64" : "float32"}};
  write_file_atomic(with_suffix(stem, ".bin"), bytes);
  write_file_atomic(with_suffix(stem, ".json"), meta.dump(2) + "\n");
}

Grid load_grid(const std::filesystem::path& stem, int* stride) {
  const auto meta_path = with_suffix(stem, ".json");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(meta_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, meta_path.string() + ": " + e.what());
  }
  int h = 0, w = 0, c = 0, s = 0;
  std::string dtype;
  try {
    h = meta.at("height").get<int>();
    w = meta.at("width").get<int>();
    c = meta.at("channels").get<int>();
    s = meta.at("stride").get<int>();
    dtype = meta.value("dtype", "float32");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, meta_path.string() + ": " + e.what());
  }
  if (dtype != "float32" && dtype != "float64") {
    throw Error(ErrorCode::kParseError, meta_path.string() + ": dtype must be float32 or float64");
  }
  const bool wide = dtype == "float64";
  Grid grid(h, w, c);
  const std::string bytes = read_file(with_suffix(stem, ".bin"));
  if (bytes.size() != grid.size() * (wide ? 8 : 4)) {
    throw Error(ErrorCode::kShapeMismatch, stem.string() + ".bin: size does not match sidecar shape");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.data()[i] = wide ? get_le<std::uint64_t, double>(bytes, i) : get_le<std::uint32_t, float>(bytes, i);
  }
  if (stride != nullptr) *stride = s;
  return grid;
}

}  // namespace roadloc
