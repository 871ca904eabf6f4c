// Copyright 2026 The ucorr Authors. All Rights Reserved.
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

#include "ucorr/image.hpp"

#include <stdexcept>
#include <string>

namespace ucorr {

Image resize_nni(const Image& src, int height, int width) {
  if (height <= 0 || width <= 0) {
    throw std::invalid_argument("resize_nni target must be positive, got " +
                                std::to_string(height) + "x" + std::to_string(width));
  }
  if (src.height == height && src.width == width) return src;
  Image out(height, width, src.channels);
  const auto sh = static_cast<std::int64_t>(src.height);
  const auto sw = static_cast<std::int64_t>(src.width);
  for (int y = 0; y < height; ++y) {
    const auto sy = static_cast<int>(((2 * std::int64_t{y} + 1) * sh) / (2 * std::int64_t{height}));
    for (int x = 0; x < width; ++x) {
      const auto sx = static_cast<int>(((2 * std::int64_t{x} + 1) * sw) / (2 * std::int64_t{width}));
      for (int c = 0; c < src.channels; ++c) out.at(y, x, c) = src.at(sy, sx, c);
    }
  }
  return out;
}

Image flip_horizontal(const Image& src) {
  Image out(src.height, src.width, src.channels);
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      for (int c = 0; c < src.channels; ++c) out.at(y, src.width - 1 - x, c) = src.at(y, x, c);
    }
  }
  return out;
}

}  // namespace ucorr
