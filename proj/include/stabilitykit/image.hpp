#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "stabilitykit/error.hpp"

namespace stabilitykit {

inline constexpr int kMinFrameSide = 16;

// Interleaved 8-bit RGB, row-major.
class Frame {
 public:
  Frame(int width, int height, std::vector<std::uint8_t> rgb)
      : width_(width), height_(height), rgb_(std::move(rgb)) {
    if (width_ < kMinFrameSide || height_ < kMinFrameSide)
      throw ConfigError("frame must be at least 16x16, got " + std::to_string(width_) + "x" +
                        std::to_string(height_));
    if (rgb_.size() != static_cast<std::size_t>(width_) * height_ * 3)
      throw DimensionMismatch("frame pixel buffer does not match width*height*3");
  }

  static Frame filled(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    std::vector<std::uint8_t> px(static_cast<std::size_t>(width) * height * 3);
    for (std::size_t i = 0; i < px.size(); i += 3) {
      px[i] = r;
      px[i + 1] = g;
      px[i + 2] = b;
    }
    return Frame(width, height, std::move(px));
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  const std::vector<std::uint8_t>& rgb() const noexcept { return rgb_; }

  std::array<std::uint8_t, 3> at(int x, int y) const {
    const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
    return {rgb_[i], rgb_[i + 1], rgb_[i + 2]};
  }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> rgb_;
};

// Single-channel floating image (luma, pyramid levels, response maps).
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  Plane() = default;
  Plane(int w, int h, float fill = 0.0f)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  float& operator()(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  float operator()(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

  // Border-replicated access.
  float clamped(int x, int y) const {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return (*this)(x, y);
  }

  std::size_t size() const noexcept { return data.size(); }
  bool same_shape(const Plane& o) const noexcept { return width == o.width && height == o.height; }
};

class FrameSequence {
 public:
  FrameSequence(std::vector<Frame> frames, double fps) : frames_(std::move(frames)), fps_(fps) {
    if (!(fps_ > 0.0)) throw ConfigError("fps must be positive");
    for (const auto& f : frames_) {
      if (f.width() != frames_.front().width() || f.height() != frames_.front().height())
        throw DimensionMismatch("all frames of a sequence must share dimensions");
    }
  }

  const std::vector<Frame>& frames() const noexcept { return frames_; }
  const Frame& operator[](std::size_t i) const { return frames_.at(i); }
  std::size_t size() const noexcept { return frames_.size(); }
  double fps() const noexcept { return fps_; }
  int width() const { return frames_.empty() ? 0 : frames_.front().width(); }
  int height() const { return frames_.empty() ? 0 : frames_.front().height(); }

 private:
  std::vector<Frame> frames_;
  double fps_;
};

// N frames taken from a sequence at a constant stride tau.
struct Clip {
  std::vector<Frame> frames;
  std::vector<std::size_t> source_indices;
  std::size_t n = 0;
  std::size_t tau = 1;
};

inline Plane to_luma(const Frame& frame) {
  Plane out(frame.width(), frame.height());
  const auto& px = frame.rgb();
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const double y = 0.299 * px[3 * i] + 0.587 * px[3 * i + 1] + 0.114 * px[3 * i + 2];
    out.data[i] = static_cast<float>(std::clamp(y, 0.0, 255.0));
  }
  return out;
}

namespace detail {

struct AxisTap {
  int i0, i1;
  double w1;  // weight of i1; i0 gets 1 - w1
};

// Half-pixel-centred source coordinates, clamped to the valid range.
inline std::vector<AxisTap> bilinear_taps(int src, int dst) {
  std::vector<AxisTap> taps(dst);
  const double scale = static_cast<double>(src) / dst;
  for (int d = 0; d < dst; ++d) {
    double s = (d + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src - 1));
    const int i0 = static_cast<int>(std::floor(s));
    const int i1 = std::min(i0 + 1, src - 1);
    taps[d] = {i0, i1, s - i0};
  }
  return taps;
}

}  // namespace detail

inline Plane resize_bilinear(const Plane& src, int w, int h) {
  if (w < 1 || h < 1) throw ConfigError("resize target must be positive");
  if (w == src.width && h == src.height) return src;
  const auto tx = detail::bilinear_taps(src.width, w);
  const auto ty = detail::bilinear_taps(src.height, h);
  Plane out(w, h);
  for (int y = 0; y < h; ++y) {
    const auto [y0, y1, wy] = ty[y];
    for (int x = 0; x < w; ++x) {
      const auto [x0, x1, wx] = tx[x];
      const double top = src(x0, y0) * (1 - wx) + src(x1, y0) * wx;
      const double bot = src(x0, y1) * (1 - wx) + src(x1, y1) * wx;
      out(x, y) = static_cast<float>(top * (1 - wy) + bot * wy);
    }
  }
  return out;
}

inline Frame resize_bilinear(const Frame& src, int w, int h) {
  if (w < 8 || h < 8) throw ConfigError("resize target must be at least 8x8");
  if (w == src.width() && h == src.height()) return src;
  const auto tx = detail::bilinear_taps(src.width(), w);
  const auto ty = detail::bilinear_taps(src.height(), h);
  const auto& in = src.rgb();
  const std::size_t stride = static_cast<std::size_t>(src.width()) * 3;
  std::vector<std::uint8_t> out(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    const auto [y0, y1, wy] = ty[y];
    for (int x = 0; x < w; ++x) {
      const auto [x0, x1, wx] = tx[x];
      for (int c = 0; c < 3; ++c) {
        const double p00 = in[y0 * stride + x0 * 3 + c], p10 = in[y0 * stride + x1 * 3 + c];
        const double p01 = in[y1 * stride + x0 * 3 + c], p11 = in[y1 * stride + x1 * 3 + c];
        const double v = (p00 * (1 - wx) + p10 * wx) * (1 - wy) + (p01 * (1 - wx) + p11 * wx) * wy;
        out[(static_cast<std::size_t>(y) * w + x) * 3 + c] =
            static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return Frame(w, h, std::move(out));
}

// Bilinear sample at a continuous position; coordinates outside the plane are
// clamped to the border.
inline double sample_bilinear(const Plane& p, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(p.width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(p.height - 1));
  const int x0 = std::min(static_cast<int>(x), p.width - 2 < 0 ? 0 : p.width - 2);
  const int y0 = std::min(static_cast<int>(y), p.height - 2 < 0 ? 0 : p.height - 2);
  const int x1 = std::min(x0 + 1, p.width - 1);
  const int y1 = std::min(y0 + 1, p.height - 1);
  const double ax = x - x0, ay = y - y0;
  return (p(x0, y0) * (1 - ax) + p(x1, y0) * ax) * (1 - ay) +
         (p(x0, y1) * (1 - ax) + p(x1, y1) * ax) * ay;
}

// Separable convolution with a symmetric odd-length kernel, replicated borders.
inline Plane convolve_separable(const Plane& src, const std::vector<double>& kernel) {
  const int r = static_cast<int>(kernel.size() / 2);
  Plane tmp(src.width, src.height), out(src.width, src.height);
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x) {
      double acc = 0;
      for (int k = -r; k <= r; ++k) acc += kernel[k + r] * src.clamped(x + k, y);
      tmp(x, y) = static_cast<float>(acc);
    }
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x) {
      double acc = 0;
      for (int k = -r; k <= r; ++k) acc += kernel[k + r] * tmp.clamped(x, y + k);
      out(x, y) = static_cast<float>(acc);
    }
  return out;
}

inline std::vector<double> gaussian_kernel(double sigma) {
  const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * r + 1);
  double sum = 0;
  for (int i = -r; i <= r; ++i) sum += k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& v : k) v /= sum;
  return k;
}

inline Plane box_blur(const Plane& src, int size) {
  return convolve_separable(src, std::vector<double>(size, 1.0 / size));
}

// Grey frame from a plane (values rounded and clamped to 8 bits).
inline Frame frame_from_luma(const Plane& p) {
  std::vector<std::uint8_t> px(p.size() * 3);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto v = static_cast<std::uint8_t>(std::clamp(std::lround(p.data[i]), 0L, 255L));
    px[3 * i] = px[3 * i + 1] = px[3 * i + 2] = v;
  }
  return Frame(p.width, p.height, std::move(px));
}

}  // namespace stabilitykit
