/* Copyright 2026 The fundus-prep Authors. All Rights Reserved.

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

// Brute-force reference computations for the tests. Nothing here calls into
// the library's resampling or quality code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "fprep/image.hpp"
#include "fprep/resample.hpp"

namespace oracle {

inline double triangle(double t) {
  t = std::fabs(t);
  return t < 1.0 ? 1.0 - t : 0.0;
}

inline double keys(double t) {
  // a = -0.5
  t = std::fabs(t);
  if (t < 1.0) return 1.5 * t * t * t - 2.5 * t * t + 1.0;
  if (t < 2.0) return -0.5 * t * t * t + 2.5 * t * t - 4.0 * t + 2.0;
  return 0.0;
}

inline double lanczos(double t, int a) {
  if (t == 0.0) return 1.0;
  if (std::fabs(t) >= a) return 0.0;
  const double pt = std::numbers::pi * t;
  return std::sin(pt) / pt * std::sin(pt / a) / (pt / a);
}

struct Filter {
  enum { tri, cubic, lanczos } shape;
  int lobes = 0;

  double support() const { return shape == tri ? 1.0 : shape == cubic ? 2.0 : lobes; }
  double operator()(double t) const {
    switch (shape) {
      case tri: return triangle(t);
      case cubic: return keys(t);
      case lanczos: return oracle::lanczos(t, lobes);
    }
    return 0.0;
  }
};

inline Filter filter_for(const fprep::ResampleSpec& spec) {
  switch (spec.algorithm) {
    case fprep::Algorithm::bilinear: return {Filter::tri, 0};
    case fprep::Algorithm::bicubic: return {Filter::cubic, 0};
    default: return {Filter::lanczos, spec.lanczos_taps / 2};
  }
}

inline int clampi(int v, int n) { return v < 0 ? 0 : v >= n ? n - 1 : v; }

/// Real-valued result of a general 2-D weighted sum: output (ox, oy) takes
/// source coordinate (o + 0.5) * num / den - 0.5 per axis, weights
/// f((j - c) / stretch) for every integer j with |j - c| < support * stretch,
/// clamped addressing, normalized by the total weight.
inline std::vector<double> weighted_2d(const fprep::Image& im, int ow, int oh, double num,
                                       double den, double stretch, const Filter& f) {
  const int c = im.channels();
  std::vector<double> out(static_cast<std::size_t>(ow) * oh * c);
  const double r = f.support() * stretch;
  for (int oy = 0; oy < oh; ++oy) {
    const double cy = (oy + 0.5) * num / den - 0.5;
    for (int ox = 0; ox < ow; ++ox) {
      const double cx = (ox + 0.5) * num / den - 0.5;
      for (int ch = 0; ch < c; ++ch) {
        long double acc = 0.0L, total = 0.0L;
        for (int j = static_cast<int>(std::floor(cy - r)) - 1; j <= static_cast<int>(cy + r) + 1;
             ++j) {
          if (!(std::fabs(j - cy) < r)) continue;
          const double wy = f((j - cy) / stretch);
          for (int i = static_cast<int>(std::floor(cx - r)) - 1;
               i <= static_cast<int>(cx + r) + 1; ++i) {
            if (!(std::fabs(i - cx) < r)) continue;
            const double w = wy * f((i - cx) / stretch);
            acc += w * im.value(clampi(i, im.width()), clampi(j, im.height()), ch);
            total += w;
          }
        }
        out[(static_cast<std::size_t>(oy) * ow + ox) * c + ch] = static_cast<double>(acc / total);
      }
    }
  }
  return out;
}

inline std::vector<double> downscale(const fprep::Image& im, const fprep::ResampleSpec& spec) {
  const int s = spec.scale;
  const int ow = (im.width() + s - 1) / s;
  const int oh = (im.height() + s - 1) / s;
  return weighted_2d(im, ow, oh, s, 1, spec.antialias ? s : 1.0, filter_for(spec));
}

inline std::vector<double> upscale_lanczos4(const fprep::Image& im, int s) {
  return weighted_2d(im, im.width() * s, im.height() * s, 1, s, 1.0, {Filter::lanczos, 2});
}

/// Source index nearest to the sample center, searching the whole axis;
/// exact ties go to the larger index.
inline int nearest_index(double center, int n) {
  int best = 0;
  for (int j = 1; j < n; ++j) {
    if (std::fabs(j - center) <= std::fabs(best - center)) best = j;
  }
  return best;
}

inline std::vector<double> nearest(const fprep::Image& im, int s) {
  const int ow = (im.width() + s - 1) / s;
  const int oh = (im.height() + s - 1) / s;
  const int c = im.channels();
  std::vector<double> out;
  for (int oy = 0; oy < oh; ++oy) {
    const int y = nearest_index((oy + 0.5) * s - 0.5, im.height());
    for (int ox = 0; ox < ow; ++ox) {
      const int x = nearest_index((ox + 0.5) * s - 0.5, im.width());
      for (int ch = 0; ch < c; ++ch) out.push_back(im.value(x, y, ch));
    }
  }
  return out;
}

/// Weighted patch mean written straight from its definition.
inline std::vector<double> rdip(const fprep::Image& im, int s, double lambda, double eps) {
  const int ow = (im.width() + s - 1) / s;
  const int oh = (im.height() + s - 1) / s;
  const int c = im.channels();
  std::vector<double> out;
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      std::vector<std::pair<int, int>> px;
      for (int dy = 0; dy < s; ++dy) {
        for (int dx = 0; dx < s; ++dx) {
          px.emplace_back(std::min(ox * s + dx, im.width() - 1),
                          std::min(oy * s + dy, im.height() - 1));
        }
      }
      auto intensity = [&](std::pair<int, int> p) {
        long double v = 0;
        for (int ch = 0; ch < c; ++ch) v += im.value(p.first, p.second, ch);
        return v / c;
      };
      long double b = 0;
      for (auto p : px) b += intensity(p);
      b /= px.size();
      for (int ch = 0; ch < c; ++ch) {
        long double num = 0, den = 0;
        for (auto p : px) {
          const long double w = std::pow(std::fabs(intensity(p) - b), (long double)lambda) + eps;
          num += w * im.value(p.first, p.second, ch);
          den += w;
        }
        out.push_back(static_cast<double>(num / den));
      }
    }
  }
  return out;
}

inline double sample_8bit(const fprep::Image& im, int x, int y, int c) {
  if (im.kind() == fprep::SampleKind::u8) return im.u8()[im.index(x, y, c)];
  return static_cast<double>(im.real()[im.index(x, y, c)]) * 255.0;
}

/// Direct two-pass SSIM per window in long double, averaged over windows and
/// then over channels.
inline double ssim(const fprep::Image& a, const fprep::Image& b, int win = 8, int stride = 1,
                   double L = 255.0) {
  const long double c1 = (0.01L * L) * (0.01L * L);
  const long double c2 = (0.03L * L) * (0.03L * L);
  long double total = 0;
  for (int ch = 0; ch < a.channels(); ++ch) {
    long double sum = 0;
    long count = 0;
    for (int y0 = 0; y0 + win <= a.height(); y0 += stride) {
      for (int x0 = 0; x0 + win <= a.width(); x0 += stride) {
        const long double n = static_cast<long double>(win) * win;
        long double mx = 0, my = 0;
        for (int y = y0; y < y0 + win; ++y) {
          for (int x = x0; x < x0 + win; ++x) {
            mx += sample_8bit(a, x, y, ch);
            my += sample_8bit(b, x, y, ch);
          }
        }
        mx /= n;
        my /= n;
        long double vx = 0, vy = 0, cov = 0;
        for (int y = y0; y < y0 + win; ++y) {
          for (int x = x0; x < x0 + win; ++x) {
            const long double dx = sample_8bit(a, x, y, ch) - mx;
            const long double dy = sample_8bit(b, x, y, ch) - my;
            vx += dx * dx;
            vy += dy * dy;
            cov += dx * dy;
          }
        }
        vx /= n;
        vy /= n;
        cov /= n;
        sum += (2 * mx * my + c1) * (2 * cov + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        ++count;
      }
    }
    total += sum / count;
  }
  return static_cast<double>(total / a.channels());
}

inline double psnr(const fprep::Image& a, const fprep::Image& b) {
  long double se = 0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      for (int c = 0; c < a.channels(); ++c) {
        const long double d = sample_8bit(a, x, y, c) - sample_8bit(b, x, y, c);
        se += d * d;
      }
    }
  }
  const long double m = se / a.sample_count();
  if (m == 0) return INFINITY;
  return static_cast<double>(10.0L * std::log10(255.0L * 255.0L / m));
}

/// Bounding box of pixels whose channel mean is at least `threshold`. For
/// images made of black background and solid bright shapes this is the box
/// border cropping must find.
inline fprep::CropBox bright_bbox(const fprep::Image& im, int threshold) {
  fprep::CropBox box{im.width(), im.height(), 0, 0};
  for (int y = 0; y < im.height(); ++y) {
    for (int x = 0; x < im.width(); ++x) {
      double v = 0;
      for (int c = 0; c < im.channels(); ++c) v += im.u8()[im.index(x, y, c)];
      if (v / im.channels() < threshold) continue;
      box.left = std::min(box.left, x);
      box.top = std::min(box.top, y);
      box.right = std::max(box.right, x + 1);
      box.bottom = std::max(box.bottom, y + 1);
    }
  }
  return box;
}

inline fprep::Image random_u8(std::mt19937_64& rng, int w, int h, int c) {
  std::uniform_int_distribution<int> d(0, 255);
  std::vector<std::uint8_t> v(static_cast<std::size_t>(w) * h * c);
  for (auto& s : v) s = static_cast<std::uint8_t>(d(rng));
  return fprep::Image(w, h, c, std::move(v));
}

inline fprep::Image random_real(std::mt19937_64& rng, int w, int h, int c) {
  std::uniform_real_distribution<float> d(0.0f, 1.0f);
  std::vector<float> v(static_cast<std::size_t>(w) * h * c);
  for (auto& s : v) s = d(rng);
  return fprep::Image(w, h, c, std::move(v));
}

/// Largest difference in 8-bit levels between an image and real-unit values.
inline double max_level_diff(const fprep::Image& im, const std::vector<double>& ref) {
  double worst = 0;
  std::size_t i = 0;
  for (int y = 0; y < im.height(); ++y) {
    for (int x = 0; x < im.width(); ++x) {
      for (int c = 0; c < im.channels(); ++c, ++i) {
        worst = std::max(worst, std::fabs(im.value(x, y, c) - std::clamp(ref[i], 0.0, 1.0)) * 255);
      }
    }
  }
  return worst;
}

/// Band-limited test image: uniform noise blurred with a Gaussian of the given
/// sigma (radius 3 sigma), rescaled to span most of the 8-bit range.
inline fprep::Image smooth_noise(std::mt19937_64& rng, int w, int h, int c, double sigma) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  const int r = static_cast<int>(std::ceil(3 * sigma));
  std::vector<double> k(2 * r + 1);
  double ks = 0;
  for (int i = -r; i <= r; ++i) ks += k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& v : k) v /= ks;
  std::vector<std::uint8_t> out(static_cast<std::size_t>(w) * h * c);
  for (int ch = 0; ch < c; ++ch) {
    std::vector<double> a(static_cast<std::size_t>(w) * h), t(a.size());
    for (auto& v : a) v = d(rng);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double s = 0;
        for (int i = -r; i <= r; ++i) s += k[i + r] * a[y * w + clampi(x + i, w)];
        t[y * w + x] = s;
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double s = 0;
        for (int i = -r; i <= r; ++i) s += k[i + r] * t[clampi(y + i, h) * w + x];
        a[y * w + x] = s;
      }
    }
    const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
    const double span = std::max(*hi - *lo, 1e-12);
    for (std::size_t i = 0; i < a.size(); ++i) {
      out[i * c + ch] = static_cast<std::uint8_t>(std::lround(16 + 223 * (a[i] - *lo) / span));
    }
  }
  return fprep::Image(w, h, c, std::move(out));
}

/// Black canvas with a textured bright disc of radius `radius` centred on it,
/// clipped to the square inset by `border` on each side.
inline fprep::Image bordered_disc(int canvas, int border, double radius, int c) {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(canvas) * canvas * c, 0);
  const double mid = (canvas - 1) / 2.0;
  for (int y = border; y < canvas - border; ++y) {
    for (int x = border; x < canvas - border; ++x) {
      if ((x - mid) * (x - mid) + (y - mid) * (y - mid) > radius * radius) continue;
      for (int ch = 0; ch < c; ++ch) {
        out[(static_cast<std::size_t>(y) * canvas + x) * c + ch] =
            static_cast<std::uint8_t>(60 + (x * 7 + y * 3 + ch * 29) % 150);
      }
    }
  }
  return fprep::Image(canvas, canvas, c, std::move(out));
}

}  // namespace oracle
