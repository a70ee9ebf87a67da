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

#include "fprep/resample.hpp"

#include <numbers>
#include <stdexcept>

#include "resample_common.hpp"

namespace fprep {

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::nearest: return "nearest";
    case Algorithm::bilinear: return "bilinear";
    case Algorithm::bicubic: return "bicubic";
    case Algorithm::lanczos: return "lanczos";
    case Algorithm::rdip: return "rdip";
    case Algorithm::external: return "external";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::nearest, Algorithm::bilinear, Algorithm::bicubic,
                      Algorithm::lanczos, Algorithm::rdip, Algorithm::external}) {
    if (name == to_string(a)) return a;
  }
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

std::string ResampleSpec::label() const {
  if (algorithm == Algorithm::lanczos && lanczos_taps != 4) {
    return "lanczos" + std::to_string(lanczos_taps);
  }
  return std::string(to_string(algorithm));
}

void ResampleSpec::validate() const {
  detail::check_scale(scale);
  if (lanczos_taps != 4 && lanczos_taps != 6 && lanczos_taps != 8) {
    throw std::invalid_argument("lanczos taps must be 4, 6 or 8");
  }
  if (algorithm == Algorithm::rdip) detail::check_rdip_args(scale, rdip_lambda, rdip_epsilon);
  if (algorithm == Algorithm::external && external_dir.empty()) {
    throw std::invalid_argument("external algorithm requires a directory");
  }
}

double Kernel::support() const {
  switch (shape_) {
    case Shape::triangle: return 1.0;
    case Shape::cubic: return 2.0;
    case Shape::lanczos: return param_;
  }
  return 0.0;
}

double Kernel::operator()(double t) const {
  const double x = std::abs(t);
  switch (shape_) {
    case Shape::triangle:
      return x < 1.0 ? 1.0 - x : 0.0;
    case Shape::cubic: {
      const double a = param_;
      if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
      if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
      return 0.0;
    }
    case Shape::lanczos: {
      const double a = param_;
      if (x == 0.0) return 1.0;
      if (x >= a) return 0.0;
      const double px = std::numbers::pi * x;
      return a * std::sin(px) * std::sin(px / a) / (px * px);
    }
  }
  return 0.0;
}

double kernel_weight(const Kernel& kernel, double t) { return kernel(t); }

namespace detail {

void check_scale(int scale) {
  if (scale < 1) throw std::invalid_argument("scale must be at least 1");
}

void check_rdip_args(int scale, double lambda, double epsilon) {
  if (scale < 2) throw std::invalid_argument("rdip scale must be at least 2");
  if (!(lambda >= 0.0)) throw std::invalid_argument("rdip lambda must be non-negative");
  if (!(epsilon > 0.0)) throw std::invalid_argument("rdip epsilon must be positive");
}

namespace {

/// Normalized taps for every output index, padded to a common width with
/// zero weights so rows can be processed uniformly.
struct AxisPlan {
  int taps = 0;
  std::vector<int> index;
  std::vector<double> weight;
};

AxisPlan plan_axis(const AxisGeometry& g) {
  AxisPlan plan;
  if (!g.kernel) {
    plan.taps = 1;
    plan.index.resize(g.out_size);
    plan.weight.assign(g.out_size, 1.0);
    for (int i = 0; i < g.out_size; ++i) plan.index[i] = g.nearest(i);
    return plan;
  }
  for (int i = 0; i < g.out_size; ++i) {
    plan.taps = std::max(plan.taps, g.last_tap(i) - g.first_tap(i) + 1);
  }
  plan.index.assign(static_cast<std::size_t>(g.out_size) * plan.taps, 0);
  plan.weight.assign(plan.index.size(), 0.0);
  for (int i = 0; i < g.out_size; ++i) {
    const int lo = g.first_tap(i);
    const int hi = g.last_tap(i);
    double sum = 0.0;
    for (int j = lo; j <= hi; ++j) sum += g.weight(i, j);
    for (int j = lo; j <= hi; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * plan.taps + (j - lo);
      plan.index[k] = g.clamp(j);
      plan.weight[k] = g.weight(i, j) / sum;
    }
  }
  return plan;
}

Image separable(const Image& image, const AxisGeometry& gx, const AxisGeometry& gy) {
  const int w = image.width();
  const int h = image.height();
  const int c = image.channels();
  const int ow = gx.out_size;
  const int oh = gy.out_size;
  const AxisPlan px = plan_axis(gx);
  const AxisPlan py = plan_axis(gy);
  const SampleReader src(image);

  // Horizontal pass: h rows of ow samples.
  std::vector<double> tmp(static_cast<std::size_t>(h) * ow * c);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * w;
    for (int ox = 0; ox < ow; ++ox) {
      const int* idx = px.index.data() + static_cast<std::size_t>(ox) * px.taps;
      const double* wt = px.weight.data() + static_cast<std::size_t>(ox) * px.taps;
      double acc[3] = {0.0, 0.0, 0.0};
      for (int k = 0; k < px.taps; ++k) {
        const std::size_t base = (row + idx[k]) * c;
        for (int ch = 0; ch < c; ++ch) acc[ch] += wt[k] * src[base + ch];
      }
      double* dst = tmp.data() + (static_cast<std::size_t>(y) * ow + ox) * c;
      for (int ch = 0; ch < c; ++ch) dst[ch] = acc[ch];
    }
  }

  // Vertical pass.
  const std::size_t out_row = static_cast<std::size_t>(ow) * c;
  SampleWriter out(image.kind(), out_row * oh);
#pragma omp parallel
  {
    std::vector<double> acc(out_row);
#pragma omp for schedule(static)
    for (int oy = 0; oy < oh; ++oy) {
      std::fill(acc.begin(), acc.end(), 0.0);
      const int* idx = py.index.data() + static_cast<std::size_t>(oy) * py.taps;
      const double* wt = py.weight.data() + static_cast<std::size_t>(oy) * py.taps;
      for (int k = 0; k < py.taps; ++k) {
        const double* in = tmp.data() + static_cast<std::size_t>(idx[k]) * out_row;
        const double weight = wt[k];
        for (std::size_t i = 0; i < out_row; ++i) acc[i] += weight * in[i];
      }
      for (std::size_t i = 0; i < out_row; ++i) out.store(oy * out_row + i, acc[i]);
    }
  }
  return out.release(ow, oh, c);
}

}  // namespace
}  // namespace detail

Image downscale(const Image& image, const ResampleSpec& spec) {
  spec.validate();
  if (spec.algorithm == Algorithm::rdip) {
    return fprep::rdip_downscale(image, spec.scale, spec.rdip_lambda, spec.rdip_epsilon);
  }
  if (spec.algorithm == Algorithm::external) {
    throw std::invalid_argument("external downscaler output must be imported, not computed");
  }
  Kernel storage = Kernel::triangle();
  const Kernel* kernel = detail::spec_kernel(spec, storage);
  return detail::separable(image, detail::shrink_axis(image.width(), spec, kernel),
                           detail::shrink_axis(image.height(), spec, kernel));
}

Image upscale_lanczos4(const Image& image, int scale) {
  detail::check_scale(scale);
  const Kernel kernel = Kernel::lanczos(2);
  return detail::separable(image, detail::grow_axis(image.width(), scale, &kernel),
                           detail::grow_axis(image.height(), scale, &kernel));
}

namespace {

template <bool kWeighted>
Image patch_reduce(const Image& image, int scale, double lambda, double epsilon) {
  const int w = image.width();
  const int h = image.height();
  const int c = image.channels();
  const int ow = downscaled_size(w, scale);
  const int oh = downscaled_size(h, scale);
  const detail::SampleReader src(image);
  detail::SampleWriter out(image.kind(), static_cast<std::size_t>(ow) * oh * c);
  const std::size_t patch = static_cast<std::size_t>(scale) * scale;

#pragma omp parallel
  {
    std::vector<std::size_t> offset(patch);
    std::vector<double> intensity(patch);
#pragma omp for schedule(static)
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        for (int dy = 0; dy < scale; ++dy) {
          const int y = std::min(oy * scale + dy, h - 1);
          for (int dx = 0; dx < scale; ++dx) {
            const int x = std::min(ox * scale + dx, w - 1);
            offset[dy * scale + dx] = image.index(x, y, 0);
          }
        }
        double sums[3] = {0.0, 0.0, 0.0};
        double total_weight = 0.0;
        if constexpr (kWeighted) {
          double mean = 0.0;
          for (std::size_t p = 0; p < patch; ++p) {
            double v = 0.0;
            for (int ch = 0; ch < c; ++ch) v += src[offset[p] + ch];
            intensity[p] = v / c;
            mean += intensity[p];
          }
          mean /= static_cast<double>(patch);
          for (std::size_t p = 0; p < patch; ++p) {
            const double wgt = std::pow(std::abs(intensity[p] - mean), lambda) + epsilon;
            total_weight += wgt;
            for (int ch = 0; ch < c; ++ch) sums[ch] += wgt * src[offset[p] + ch];
          }
        } else {
          for (std::size_t p = 0; p < patch; ++p) {
            for (int ch = 0; ch < c; ++ch) sums[ch] += src[offset[p] + ch];
          }
          total_weight = static_cast<double>(patch);
        }
        const std::size_t dst = (static_cast<std::size_t>(oy) * ow + ox) * c;
        for (int ch = 0; ch < c; ++ch) out.store(dst + ch, sums[ch] / total_weight);
      }
    }
  }
  return out.release(ow, oh, c);
}

}  // namespace

Image rdip_downscale(const Image& image, int scale, double lambda, double epsilon) {
  detail::check_rdip_args(scale, lambda, epsilon);
  return patch_reduce<true>(image, scale, lambda, epsilon);
}

Image box_downscale(const Image& image, int scale) {
  detail::check_scale(scale);
  return patch_reduce<false>(image, scale, 0.0, 0.0);
}

}  // namespace fprep
