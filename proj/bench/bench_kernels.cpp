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

// Serial reference kernels against their OpenMP counterparts on a
// fundus-sized frame. Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "fprep/iqa.hpp"
#include "fprep/resample.hpp"

using namespace fprep;

namespace {

const Image& frame(int size) {
  static std::map<int, Image> cache;
  auto it = cache.find(size);
  if (it == cache.end()) {
    std::mt19937_64 rng(size);
    std::uniform_int_distribution<int> d(0, 255);
    std::vector<std::uint8_t> v(static_cast<std::size_t>(size) * size * 3);
    for (auto& x : v) x = static_cast<std::uint8_t>(d(rng));
    it = cache.emplace(size, Image(size, size, 3, std::move(v))).first;
  }
  return it->second;
}

ResampleSpec spec(Algorithm a) {
  ResampleSpec s;
  s.algorithm = a;
  s.scale = 8;
  return s;
}

template <bool Parallel>
void BM_DownscaleBicubic(benchmark::State& state) {
  const Image& im = frame(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    Image out = Parallel ? downscale(im, spec(Algorithm::bicubic))
                         : serial::downscale(im, spec(Algorithm::bicubic));
    benchmark::DoNotOptimize(out);
  }
}

template <bool Parallel>
void BM_Rdip(benchmark::State& state) {
  const Image& im = frame(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    Image out = Parallel ? rdip_downscale(im, 8) : serial::rdip_downscale(im, 8);
    benchmark::DoNotOptimize(out);
  }
}

template <bool Parallel>
void BM_UpscaleLanczos(benchmark::State& state) {
  const Image small = downscale(frame(static_cast<int>(state.range(0))), spec(Algorithm::bilinear));
  for (auto _ : state) {
    Image out = Parallel ? upscale_lanczos4(small, 8) : serial::upscale_lanczos4(small, 8);
    benchmark::DoNotOptimize(out);
  }
}

template <bool Parallel>
void BM_Ssim(benchmark::State& state) {
  const Image& a = frame(static_cast<int>(state.range(0)));
  const Image& b = frame(static_cast<int>(state.range(0)) + 1);
  const Image b2(a.width(), a.height(), 3,
                 std::vector<std::uint8_t>(b.u8().begin(), b.u8().begin() + a.sample_count()));
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? ssim(a, b2) : serial::ssim(a, b2));
  }
}

}  // namespace

BENCHMARK(BM_DownscaleBicubic<false>)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DownscaleBicubic<true>)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Rdip<false>)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Rdip<true>)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_UpscaleLanczos<false>)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_UpscaleLanczos<true>)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ssim<false>)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ssim<true>)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
