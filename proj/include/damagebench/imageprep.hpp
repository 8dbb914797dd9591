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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "damagebench/errors.hpp"
#include "damagebench/image.hpp"

// Stage 1 preprocessing: non-local means denoising, bounded resize and CLAHE.
// Everything here is a pure function of (image, config).

namespace damagebench {

struct PreprocessConfig {
  double nlm_strength = 5.0;  // filter strength h
  int nlm_template_radius = 3;
  int nlm_search_radius = 10;
  // Noise standard deviation subtracted inside the weight kernel; 0 gives
  // the plain exp(-d^2 / h^2) weighting.
  double nlm_sigma = 0.0;
  int max_dimension = 1024;
  double clahe_clip_limit = 2.0;
  int clahe_tiles_x = 8;
  int clahe_tiles_y = 8;

  void validate() const {
    if (!(nlm_strength > 0.0) || nlm_template_radius <= 0 || nlm_search_radius <= 0 ||
        max_dimension < 1 || !(clahe_clip_limit > 0.0) || clahe_tiles_x <= 0 ||
        clahe_tiles_y <= 0) {
      throw ConfigError("preprocess: all numeric parameters must be strictly positive");
    }
    if (!(nlm_sigma >= 0.0)) {
      throw ConfigError("preprocess: nlm_sigma must be non-negative");
    }
  }
};

namespace detail {

inline std::uint8_t saturate_round(double v) noexcept {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

} // namespace detail

/// Non-local means denoising.
///
/// Every output pixel is the weighted average of the pixels q inside a
/// (2*search_radius+1)^2 window around p, with weight
/// exp(-max(d^2 - 2 sigma^2, 0) / h^2) where d^2 is the mean squared
/// difference between the (2*template_radius+1)^2 patches centred on p and q,
/// averaged over channels. Patches read past the border replicate edge
/// pixels; candidate centres q are restricted to the image.
///
/// Patch distances are evaluated for a whole image per search offset with a
/// summed-area table, so the cost is O(W*H*(2R+1)^2) independent of the
/// template size.
inline ImageBuffer nlm_denoise(const ImageBuffer& img, const PreprocessConfig& cfg) {
  cfg.validate();
  const int w = img.width();
  const int h = img.height();
  const int ch = img.channels();
  const int r = cfg.nlm_template_radius;
  const int search = cfg.nlm_search_radius;
  const int pw = w + 2 * r;
  const int ph = h + 2 * r;

  std::vector<int> padded(static_cast<std::size_t>(pw) * ph * ch);
  for (int y = 0; y < ph; ++y) {
    const int sy = std::clamp(y - r, 0, h - 1);
    for (int x = 0; x < pw; ++x) {
      const int sx = std::clamp(x - r, 0, w - 1);
      for (int c = 0; c < ch; ++c) {
        padded[(static_cast<std::size_t>(y) * pw + x) * ch + c] = img.at(sx, sy, c);
      }
    }
  }
  auto pad_at = [&](int x, int y, int c) {
    return padded[(static_cast<std::size_t>(y) * pw + x) * ch + c];
  };

  const double h2 = cfg.nlm_strength * cfg.nlm_strength;
  const double two_sigma2 = 2.0 * cfg.nlm_sigma * cfg.nlm_sigma;
  const double patch_norm = static_cast<double>((2 * r + 1) * (2 * r + 1) * ch);

  std::vector<double> weight_sum(img.pixel_count(), 0.0);
  std::vector<double> accum(img.pixel_count() * ch, 0.0);
  std::vector<std::int64_t> sat(static_cast<std::size_t>(pw + 1) * (ph + 1), 0);
  auto sat_at = [&](int x, int y) -> std::int64_t& {
    return sat[static_cast<std::size_t>(y) * (pw + 1) + x];
  };

  for (int dy = -search; dy <= search; ++dy) {
    for (int dx = -search; dx <= search; ++dx) {
      // Summed-area table of (P(x,y) - P(x+dx,y+dy))^2 over the padded grid.
      for (int y = 0; y < ph; ++y) {
        std::int64_t row = 0;
        const int yy = y + dy;
        for (int x = 0; x < pw; ++x) {
          const int xx = x + dx;
          if (yy >= 0 && yy < ph && xx >= 0 && xx < pw) {
            for (int c = 0; c < ch; ++c) {
              const int diff = pad_at(x, y, c) - pad_at(xx, yy, c);
              row += static_cast<std::int64_t>(diff) * diff;
            }
          }
          sat_at(x + 1, y + 1) = sat_at(x + 1, y) + row;
        }
      }

      for (int py = 0; py < h; ++py) {
        const int qy = py + dy;
        if (qy < 0 || qy >= h) {
          continue;
        }
        for (int px = 0; px < w; ++px) {
          const int qx = px + dx;
          if (qx < 0 || qx >= w) {
            continue;
          }
          const int x1 = px + 2 * r + 1;
          const int y1 = py + 2 * r + 1;
          const std::int64_t ssd = sat_at(x1, y1) - sat_at(px, y1) - sat_at(x1, py) + sat_at(px, py);
          const double d2 = static_cast<double>(ssd) / patch_norm;
          const double weight = std::exp(-std::max(d2 - two_sigma2, 0.0) / h2);
          const std::size_t p = static_cast<std::size_t>(py) * w + px;
          weight_sum[p] += weight;
          for (int c = 0; c < ch; ++c) {
            accum[p * ch + c] += weight * img.at(qx, qy, c);
          }
        }
      }
    }
  }

  ImageBuffer out(w, h, ch);
  auto samples = out.data();
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    for (int c = 0; c < ch; ++c) {
      samples[p * ch + c] = detail::saturate_round(accum[p * ch + c] / weight_sum[p]);
    }
  }
  return out;
}

/// Output size for a bounded resize: the longer side becomes max_dimension,
/// the shorter side is scaled and rounded half-up with a floor of 1. Images
/// already within the bound keep their size.
inline std::pair<int, int> resized_dimensions(int width, int height, int max_dimension) {
  if (max_dimension < 1) {
    throw ConfigError("max_dimension must be >= 1");
  }
  if (std::max(width, height) <= max_dimension) {
    return {width, height};
  }
  auto scale_side = [max_dimension](std::int64_t side, std::int64_t longest) {
    const std::int64_t scaled = (2 * side * max_dimension + longest) / (2 * longest);
    return static_cast<int>(std::max<std::int64_t>(1, scaled));
  };
  if (width >= height) {
    return {max_dimension, scale_side(height, width)};
  }
  return {scale_side(width, height), max_dimension};
}

/// Aspect-preserving bilinear downscale; never upscales.
inline ImageBuffer resize_max_dim(const ImageBuffer& img, int max_dimension) {
  const auto [nw, nh] = resized_dimensions(img.width(), img.height(), max_dimension);
  if (nw == img.width() && nh == img.height()) {
    return img;
  }
  const int w = img.width();
  const int h = img.height();
  const int ch = img.channels();
  const double sx = static_cast<double>(w) / nw;
  const double sy = static_cast<double>(h) / nh;

  ImageBuffer out(nw, nh, ch);
  for (int y = 0; y < nh; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(h - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, h - 1);
    const double ay = fy - y0;
    for (int x = 0; x < nw; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(w - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, w - 1);
      const double ax = fx - x0;
      for (int c = 0; c < ch; ++c) {
        const double top = (1.0 - ax) * img.at(x0, y0, c) + ax * img.at(x1, y0, c);
        const double bottom = (1.0 - ax) * img.at(x0, y1, c) + ax * img.at(x1, y1, c);
        out.at(x, y, c) = detail::saturate_round((1.0 - ay) * top + ay * bottom);
      }
    }
  }
  return out;
}

/// True when the image has fewer pixels than tiles along either axis; clahe()
/// then equalizes the whole image as a single tile.
inline bool clahe_uses_global_fallback(int width, int height, const PreprocessConfig& cfg) {
  return width < cfg.clahe_tiles_x || height < cfg.clahe_tiles_y;
}

namespace detail {

// Clipped-histogram equalization lookup table for one tile.
inline std::array<std::uint8_t, 256> clahe_tile_lut(const std::array<std::int64_t, 256>& hist,
                                                    std::int64_t tile_pixels, double clip_limit) {
  const double clip = std::max(1.0, clip_limit * static_cast<double>(tile_pixels) / 256.0);
  std::array<double, 256> clipped{};
  double excess = 0.0;
  for (int v = 0; v < 256; ++v) {
    const double count = static_cast<double>(hist[v]);
    clipped[v] = std::min(count, clip);
    excess += count - clipped[v];
  }
  const double share = excess / 256.0;
  std::array<std::uint8_t, 256> lut{};
  double cdf = 0.0;
  const double scale = 255.0 / static_cast<double>(tile_pixels);
  for (int v = 0; v < 256; ++v) {
    cdf += clipped[v] + share;
    lut[v] = saturate_round(cdf * scale);
  }
  return lut;
}

// Tile boundaries [start, end) along one axis and their pixel-space centres.
struct TileAxis {
  std::vector<int> start;
  std::vector<double> centre;

  TileAxis(int extent, int tiles) {
    for (int i = 0; i <= tiles; ++i) {
      start.push_back(static_cast<int>(static_cast<std::int64_t>(i) * extent / tiles));
    }
    for (int i = 0; i < tiles; ++i) {
      centre.push_back((start[i] + start[i + 1] - 1) / 2.0);
    }
  }

  int tiles() const { return static_cast<int>(centre.size()); }

  // Neighbouring tiles and blend factor towards the second one.
  std::tuple<int, int, double> neighbours(int pos) const {
    const int n = tiles();
    if (pos <= centre.front()) {
      return {0, 0, 0.0};
    }
    if (pos >= centre.back()) {
      return {n - 1, n - 1, 0.0};
    }
    int i = 0;
    while (i + 1 < n && centre[i + 1] <= pos) {
      ++i;
    }
    return {i, i + 1, (pos - centre[i]) / (centre[i + 1] - centre[i])};
  }
};

inline std::vector<std::uint8_t> clahe_gray(std::span<const std::uint8_t> gray, int w, int h,
                                            const PreprocessConfig& cfg) {
  const bool global = clahe_uses_global_fallback(w, h, cfg);
  const TileAxis xs(w, global ? 1 : cfg.clahe_tiles_x);
  const TileAxis ys(h, global ? 1 : cfg.clahe_tiles_y);

  std::vector<std::array<std::uint8_t, 256>> luts;
  luts.reserve(static_cast<std::size_t>(xs.tiles()) * ys.tiles());
  for (int ty = 0; ty < ys.tiles(); ++ty) {
    for (int tx = 0; tx < xs.tiles(); ++tx) {
      std::array<std::int64_t, 256> hist{};
      for (int y = ys.start[ty]; y < ys.start[ty + 1]; ++y) {
        for (int x = xs.start[tx]; x < xs.start[tx + 1]; ++x) {
          ++hist[gray[static_cast<std::size_t>(y) * w + x]];
        }
      }
      const std::int64_t pixels = static_cast<std::int64_t>(xs.start[tx + 1] - xs.start[tx]) *
                                  (ys.start[ty + 1] - ys.start[ty]);
      luts.push_back(clahe_tile_lut(hist, pixels, cfg.clahe_clip_limit));
    }
  }
  auto lut = [&](int tx, int ty) -> const std::array<std::uint8_t, 256>& {
    return luts[static_cast<std::size_t>(ty) * xs.tiles() + tx];
  };

  std::vector<std::uint8_t> out(gray.size());
  for (int y = 0; y < h; ++y) {
    const auto [ty0, ty1, by] = ys.neighbours(y);
    for (int x = 0; x < w; ++x) {
      const auto [tx0, tx1, bx] = xs.neighbours(x);
      const std::uint8_t v = gray[static_cast<std::size_t>(y) * w + x];
      const double top = (1.0 - bx) * lut(tx0, ty0)[v] + bx * lut(tx1, ty0)[v];
      const double bottom = (1.0 - bx) * lut(tx0, ty1)[v] + bx * lut(tx1, ty1)[v];
      out[static_cast<std::size_t>(y) * w + x] = saturate_round((1.0 - by) * top + by * bottom);
    }
  }
  return out;
}

} // namespace detail

/// Contrast limited adaptive histogram equalization.
///
/// RGB input is equalized on BT.601 luma; each channel is then scaled by the
/// ratio of new to old luma so hue is preserved.
inline ImageBuffer clahe(const ImageBuffer& img, const PreprocessConfig& cfg) {
  cfg.validate();
  const int w = img.width();
  const int h = img.height();
  if (img.channels() == 1) {
    return ImageBuffer(w, h, 1, detail::clahe_gray(img.data(), w, h, cfg));
  }

  std::vector<double> luma(img.pixel_count());
  std::vector<std::uint8_t> luma8(img.pixel_count());
  const auto src = img.data();
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    luma[p] = 0.299 * src[3 * p] + 0.587 * src[3 * p + 1] + 0.114 * src[3 * p + 2];
    luma8[p] = detail::saturate_round(luma[p]);
  }
  const auto equalized = detail::clahe_gray(luma8, w, h, cfg);

  ImageBuffer out(w, h, 3);
  auto dst = out.data();
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    if (luma[p] <= 0.0) {
      dst[3 * p] = dst[3 * p + 1] = dst[3 * p + 2] = equalized[p];
      continue;
    }
    const double gain = equalized[p] / luma[p];
    for (int c = 0; c < 3; ++c) {
      dst[3 * p + c] = detail::saturate_round(src[3 * p + c] * gain);
    }
  }
  return out;
}

/// CLAHE(Resize(NLM(image))).
inline ImageBuffer preprocess(const ImageBuffer& img, const PreprocessConfig& cfg) {
  return clahe(resize_max_dim(nlm_denoise(img, cfg), cfg.max_dimension), cfg);
}

} // namespace damagebench
