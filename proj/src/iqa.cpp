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

#include "fprep/iqa.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

namespace fprep {

namespace {

void require_same_shape(const Image& x, const Image& y) {
  if (x.width() != y.width() || x.height() != y.height() || x.channels() != y.channels()) {
    throw DimensionMismatchError(
        "image shapes differ: " + std::to_string(x.width()) + "x" + std::to_string(x.height()) +
        "x" + std::to_string(x.channels()) + " vs " + std::to_string(y.width()) + "x" +
        std::to_string(y.height()) + "x" + std::to_string(y.channels()));
  }
}

void require_window_fits(const Image& x, const SsimParams& p) {
  if (x.width() < p.window || x.height() < p.window) {
    throw std::invalid_argument("image " + std::to_string(x.width()) + "x" +
                                std::to_string(x.height()) + " is smaller than the " +
                                std::to_string(p.window) + "x" + std::to_string(p.window) +
                                " SSIM window");
  }
}

/// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      carry_ += (sum_ - t) + v;
    } else {
      carry_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

double in_8bit_units(const Image& im, int x, int y, int c) {
  if (im.kind() == SampleKind::u8) return im.u8()[im.index(x, y, c)];
  return im.value(x, y, c) * 255.0;
}

double ssim_from_moments(double mx, double my, double vx, double vy, double cxy, double c1,
                         double c2) {
  return ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) /
         ((mx * mx + my * my + c1) * (vx + vy + c2));
}

// Samples of one channel in 8-bit units. Integer images keep exact integer
// window sums.
template <typename T>
class Plane {
 public:
  Plane(const Image& image, int channel) : image_(&image), channel_(channel) {
    if constexpr (std::is_integral_v<T>) data_ = image.u8().data();
  }
  const Image& image() const { return *image_; }
  T at(int x, int y) const {
    if constexpr (std::is_integral_v<T>) {
      return data_[image_->index(x, y, channel_)];
    } else {
      return in_8bit_units(*image_, x, y, channel_);
    }
  }

 private:
  const Image* image_;
  int channel_;
  const std::uint8_t* data_ = nullptr;
};

struct Moments {
  double mx, my, vx, vy, cxy;
};

template <typename Acc>
Moments moments_from_sums(Acc sx, Acc sy, Acc sxx, Acc syy, Acc sxy, Acc n) {
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  return {static_cast<double>(sx) / static_cast<double>(n),
          static_cast<double>(sy) / static_cast<double>(n),
          static_cast<double>(n * sxx - sx * sx) / n2, static_cast<double>(n * syy - sy * sy) / n2,
          static_cast<double>(n * sxy - sx * sy) / n2};
}

// Windows are evaluated one output row at a time: column sums over the window
// height, then prefix sums along the row give every window in O(1). With
// integer samples a thread slides its column sums from the previous row it
// handled; with reals they are rebuilt per row so results stay independent
// of the thread schedule.
template <typename Acc>
double ssim_channel(const Plane<Acc>& px, const Plane<Acc>& py, const SsimParams& p) {
  const int w = px.image().width();
  const int h = px.image().height();
  const int win = p.window;
  const int rows = (h - win) / p.stride + 1;
  const int cols = (w - win) / p.stride + 1;
  const Acc n = static_cast<Acc>(win) * win;
  const double c1 = p.c1();
  const double c2 = p.c2();
  std::vector<double> row_sums(rows);

#pragma omp parallel
  {
    // col[k][x]: statistic k summed over the window rows at column x.
    std::vector<Acc> col(static_cast<std::size_t>(5) * w);
    // prefix[k][i]: col[k] summed over columns [0, i).
    std::vector<Acc> prefix(static_cast<std::size_t>(5) * (w + 1));
    int prev_y0 = -1;

    auto accumulate_row = [&](int y, Acc sign) {
      for (int x = 0; x < w; ++x) {
        const Acc a = px.at(x, y);
        const Acc b = py.at(x, y);
        col[x] += sign * a;
        col[w + x] += sign * b;
        col[2 * w + x] += sign * a * a;
        col[3 * w + x] += sign * b * b;
        col[4 * w + x] += sign * a * b;
      }
    };

#pragma omp for schedule(static)
    for (int r = 0; r < rows; ++r) {
      const int y0 = r * p.stride;
      if (std::is_integral_v<Acc> && prev_y0 >= 0 && y0 - prev_y0 < win) {
        for (int y = prev_y0; y < y0; ++y) accumulate_row(y, Acc(-1));
        for (int y = prev_y0 + win; y < y0 + win; ++y) accumulate_row(y, Acc(1));
      } else {
        std::fill(col.begin(), col.end(), Acc(0));
        for (int y = y0; y < y0 + win; ++y) accumulate_row(y, Acc(1));
      }
      prev_y0 = y0;

      for (int k = 0; k < 5; ++k) {
        Acc* ps = prefix.data() + static_cast<std::size_t>(k) * (w + 1);
        const Acc* cs = col.data() + static_cast<std::size_t>(k) * w;
        ps[0] = 0;
        for (int x = 0; x < w; ++x) ps[x + 1] = ps[x] + cs[x];
      }
      auto window_sum = [&](int k, int x0) {
        const Acc* ps = prefix.data() + static_cast<std::size_t>(k) * (w + 1);
        return ps[x0 + win] - ps[x0];
      };
      CompensatedSum row;
      for (int cidx = 0; cidx < cols; ++cidx) {
        const int x0 = cidx * p.stride;
        const Moments m = moments_from_sums<Acc>(window_sum(0, x0), window_sum(1, x0),
                                                 window_sum(2, x0), window_sum(3, x0),
                                                 window_sum(4, x0), n);
        row.add(ssim_from_moments(m.mx, m.my, m.vx, m.vy, m.cxy, c1, c2));
      }
      row_sums[r] = row.value();
    }
  }

  CompensatedSum total;
  for (double v : row_sums) total.add(v);
  return total.value() / (static_cast<double>(rows) * cols);
}

}  // namespace

void SsimParams::validate() const {
  if (window < 2) throw std::invalid_argument("SSIM window must be at least 2");
  if (stride < 1) throw std::invalid_argument("SSIM stride must be at least 1");
  if (!(dynamic_range > 0.0)) throw std::invalid_argument("SSIM dynamic range must be positive");
  if (!(c1() > 0.0) || !(c2() > 0.0)) {
    throw std::invalid_argument("SSIM stabilizing constants must be positive");
  }
}

double mse(const Image& x, const Image& y) {
  require_same_shape(x, y);
  if (x.kind() == SampleKind::u8 && y.kind() == SampleKind::u8) {
    const auto a = x.u8();
    const auto b = y.u8();
    std::int64_t sum = 0;
#pragma omp parallel for reduction(+ : sum) schedule(static)
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::int64_t d = static_cast<std::int64_t>(a[i]) - b[i];
      sum += d * d;
    }
    return static_cast<double>(sum) / static_cast<double>(a.size());
  }
  CompensatedSum sum;
  for (int yy = 0; yy < x.height(); ++yy) {
    for (int xx = 0; xx < x.width(); ++xx) {
      for (int c = 0; c < x.channels(); ++c) {
        const double d = in_8bit_units(x, xx, yy, c) - in_8bit_units(y, xx, yy, c);
        sum.add(d * d);
      }
    }
  }
  return sum.value() / static_cast<double>(x.sample_count());
}

double psnr(const Image& x, const Image& y, double peak) {
  if (!(peak > 0.0)) throw std::invalid_argument("PSNR peak must be positive");
  const double err = mse(x, y);
  if (err == 0.0) return kInfinitePsnr;
  return 10.0 * std::log10(peak * peak / err);
}

double ssim(const Image& x, const Image& y, const SsimParams& params) {
  params.validate();
  require_same_shape(x, y);
  require_window_fits(x, params);
  const bool integer = x.kind() == SampleKind::u8 && y.kind() == SampleKind::u8;
  double sum = 0.0;
  for (int c = 0; c < x.channels(); ++c) {
    if (integer) {
      sum += ssim_channel(Plane<std::int64_t>(x, c), Plane<std::int64_t>(y, c), params);
    } else {
      sum += ssim_channel(Plane<double>(x, c), Plane<double>(y, c), params);
    }
  }
  return sum / x.channels();
}

double serial::ssim(const Image& x, const Image& y, const SsimParams& params) {
  params.validate();
  require_same_shape(x, y);
  require_window_fits(x, params);
  const int win = params.window;
  const double n = static_cast<double>(win) * win;
  double channel_total = 0.0;
  for (int c = 0; c < x.channels(); ++c) {
    double sum = 0.0;
    long count = 0;
    for (int y0 = 0; y0 + win <= x.height(); y0 += params.stride) {
      for (int x0 = 0; x0 + win <= x.width(); x0 += params.stride) {
        double mx = 0.0, my = 0.0;
        for (int dy = 0; dy < win; ++dy) {
          for (int dx = 0; dx < win; ++dx) {
            mx += in_8bit_units(x, x0 + dx, y0 + dy, c);
            my += in_8bit_units(y, x0 + dx, y0 + dy, c);
          }
        }
        mx /= n;
        my /= n;
        double vx = 0.0, vy = 0.0, cxy = 0.0;
        for (int dy = 0; dy < win; ++dy) {
          for (int dx = 0; dx < win; ++dx) {
            const double a = in_8bit_units(x, x0 + dx, y0 + dy, c) - mx;
            const double b = in_8bit_units(y, x0 + dx, y0 + dy, c) - my;
            vx += a * a;
            vy += b * b;
            cxy += a * b;
          }
        }
        sum += ssim_from_moments(mx, my, vx / n, vy / n, cxy / n, params.c1(), params.c2());
        ++count;
      }
    }
    channel_total += sum / static_cast<double>(count);
  }
  return channel_total / x.channels();
}

}  // namespace fprep
