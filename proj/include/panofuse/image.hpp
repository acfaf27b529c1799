// Copyright 2026 The panofuse Authors
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

#ifndef PANOFUSE_IMAGE_HPP_
#define PANOFUSE_IMAGE_HPP_

#include <array>
#include <cstdint>
#include <vector>

#include "panofuse/error.hpp"

namespace panofuse
{

/// Interleaved 8-bit RGB image, row-major.
struct Image
{
  int width{0};
  int height{0};
  std::vector<std::uint8_t> data;

  Image() = default;
  Image(int w, int h, std::array<std::uint8_t, 3> fill = {0, 0, 0})
  : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3)
  {
    if (w < 0 || h < 0) {
      throw Error(Errc::kShapeMismatch, "negative image size");
    }
    for (std::size_t i = 0; i < data.size(); i += 3) {
      data[i] = fill[0];
      data[i + 1] = fill[1];
      data[i + 2] = fill[2];
    }
  }

  std::size_t offset(int u, int v) const
  {
    return (static_cast<std::size_t>(v) * width + u) * 3;
  }
  std::uint8_t * at(int u, int v) { return data.data() + offset(u, v); }
  const std::uint8_t * at(int u, int v) const { return data.data() + offset(u, v); }
  bool same_shape(const Image & o) const { return width == o.width && height == o.height; }
  bool operator==(const Image &) const = default;
};

}  // namespace panofuse

#endif  // PANOFUSE_IMAGE_HPP_
