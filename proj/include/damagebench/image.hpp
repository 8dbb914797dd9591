//------------------------------------------------------------------------------
//
//   Copyright 2026 The damagebench Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "damagebench/errors.hpp"

namespace damagebench {

/// Decoded 8-bit raster, row-major with interleaved channels.
///
/// Holds either a grayscale (1 channel) or RGB (3 channel) image. The sample
/// vector always has exactly width * height * channels entries; the type is
/// the only way images travel through the preprocessing stage.
class ImageBuffer {
public:
  ImageBuffer() = default;

  ImageBuffer(int width, int height, int channels, std::uint8_t fill = 0)
      : width_{width}, height_{height}, channels_{channels} {
    validate_shape(width, height, channels);
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> data)
      : width_{width}, height_{height}, channels_{channels}, data_{std::move(data)} {
    validate_shape(width, height, channels);
    if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
      throw ImageError("sample count does not match width*height*channels");
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }

  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  std::uint8_t at(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }
  std::uint8_t& at(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }

  std::size_t index(int x, int y, int c = 0) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

private:
  static void validate_shape(int width, int height, int channels) {
    if (width < 1 || height < 1) {
      throw ImageError("image dimensions must be at least 1x1");
    }
    if (channels != 1 && channels != 3) {
      throw ImageError("only 1- or 3-channel images are supported, got " + std::to_string(channels));
    }
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> data_;
};

} // namespace damagebench
