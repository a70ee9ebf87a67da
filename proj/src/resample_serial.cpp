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

#include <cmath>
#include <stdexcept>

#include "fprep/resample.hpp"
#include "resample_common.hpp"

namespace fprep::serial {

namespace {

using detail::AxisGeometry;

// Weighted sum of `read(j)` over the taps of output index i, weights
// normalized before accumulation.
template <typename Read>
double filter_at(const AxisGeometry& g, int i, Read read) {
  if (!g.kernel) return read(g.nearest(i));
  const int lo = g.first_tap(i);
  const int hi = g.last_tap(i);
  double sum = 0.0;
  for (int j = lo; j <= hi; ++j) sum += g.weight(i, j);
  double acc = 0.0;
  for (int j = lo; j <= hi; ++j) acc += g.weight(i, j) / sum * read(g.clamp(j));
  return acc;
}

Image separable(const Image& image, const AxisGeometry& gx, const AxisGeometry& gy) {
  const int w = image.width();
  const int h = image.height();
  const int c = image.channels();
  const int ow = gx.out_size;
  const int oh = gy.out_size;
  const detail::SampleReader src(image);

  std::vector<double> tmp(static_cast<std::size_t>(h) * ow * c);
  for (int y = 0; y < h; ++y) {
    for (int ox = 0; ox < ow; ++ox) {
      for (int ch = 0; ch < c; ++ch) {
        tmp[(static_cast<std::size_t>(y) * ow + ox) * c + ch] = filter_at(
            gx, ox, [&](int x) { return src[(static_cast<std::size_t>(y) * w + x) * c + ch]; });
      }
    }
  }

  detail::SampleWriter out(image.kind(), static_cast<std::size_t>(ow) * oh * c);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      for (int ch = 0; ch < c; ++ch) {
        const double v = filter_at(
            gy, oy, [&](int y) { return tmp[(static_cast<std::size_t>(y) * ow + ox) * c + ch]; });
        out.store((static_cast<std::size_t>(oy) * ow + ox) * c + ch, v);
      }
    }
  }
  return out.release(ow, oh, c);
}

}  // namespace

Image downscale(const Image& image, const ResampleSpec& spec) {
  spec.validate();
  if (spec.algorithm == Algorithm::rdip) {
    return serial::rdip_downscale(image, spec.scale, spec.rdip_lambda, spec.rdip_epsilon);
  }
  if (spec.algorithm == Algorithm::external) {
    throw std::invalid_argument("external downscaler output must be imported, not computed");
  }
  Kernel storage = Kernel::triangle();
  const Kernel* kernel = detail::spec_kernel(spec, storage);
  return separable(image, detail::shrink_axis(image.width(), spec, kernel),
                   detail::shrink_axis(image.height(), spec, kernel));
}

Image upscale_lanczos4(const Image& image, int scale) {
  detail::check_scale(scale);
  const Kernel kernel = Kernel::lanczos(2);
  return separable(image, detail::grow_axis(image.width(), scale, &kernel),
                   detail::grow_axis(image.height(), scale, &kernel));
}

Image rdip_downscale(const Image& image, int scale, double lambda, double epsilon) {
  detail::check_rdip_args(scale, lambda, epsilon);
  const int w = image.width();
  const int h = image.height();
  const int c = image.channels();
  const int ow = downscaled_size(w, scale);
  const int oh = downscaled_size(h, scale);
  detail::SampleWriter out(image.kind(), static_cast<std::size_t>(ow) * oh * c);

  auto at = [&](int x, int y, int ch) {
    return image.value(std::min(x, w - 1), std::min(y, h - 1), ch);
  };
  auto intensity = [&](int x, int y) {
    double v = 0.0;
    for (int ch = 0; ch < c; ++ch) v += at(x, y, ch);
    return v / c;
  };

  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      const int x0 = ox * scale;
      const int y0 = oy * scale;
      double mean = 0.0;
      for (int dy = 0; dy < scale; ++dy) {
        for (int dx = 0; dx < scale; ++dx) mean += intensity(x0 + dx, y0 + dy);
      }
      mean /= static_cast<double>(scale) * scale;

      double sums[3] = {0.0, 0.0, 0.0};
      double total = 0.0;
      for (int dy = 0; dy < scale; ++dy) {
        for (int dx = 0; dx < scale; ++dx) {
          const double wgt =
              std::pow(std::abs(intensity(x0 + dx, y0 + dy) - mean), lambda) + epsilon;
          total += wgt;
          for (int ch = 0; ch < c; ++ch) sums[ch] += wgt * at(x0 + dx, y0 + dy, ch);
        }
      }
      for (int ch = 0; ch < c; ++ch) {
        out.store((static_cast<std::size_t>(oy) * ow + ox) * c + ch, sums[ch] / total);
      }
    }
  }
  return out.release(ow, oh, c);
}

Image box_downscale(const Image& image, int scale) {
  detail::check_scale(scale);
  const int w = image.width();
  const int h = image.height();
  const int c = image.channels();
  const int ow = downscaled_size(w, scale);
  const int oh = downscaled_size(h, scale);
  detail::SampleWriter out(image.kind(), static_cast<std::size_t>(ow) * oh * c);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      for (int ch = 0; ch < c; ++ch) {
        double sum = 0.0;
        for (int dy = 0; dy < scale; ++dy) {
          for (int dx = 0; dx < scale; ++dx) {
            sum += image.value(std::min(ox * scale + dx, w - 1), std::min(oy * scale + dy, h - 1),
                               ch);
          }
        }
        out.store((static_cast<std::size_t>(oy) * ow + ox) * c + ch,
                  sum / (static_cast<double>(scale) * scale));
      }
    }
  }
  return out.release(ow, oh, c);
}

}  // namespace fprep::serial
