// Copyright 2026 The scmat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Sampling pass: random configurations, all-pairs distances for all six
// shape types, per-pair statistics.
//
// Sample k belongs to chunk k / kSamplingChunk and is the (k mod chunk)-th
// draw of Xoshiro256(seed, stream = chunk). Chunks are handed to workers in
// any order and merged in chunk order, so results do not depend on the
// number of threads.

#ifndef SCMAT_SAMPLING_HPP_
#define SCMAT_SAMPLING_HPP_

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

#include "scmat/model.hpp"
#include "scmat/proximity.hpp"
#include "scmat/rng.hpp"
#include "scmat/shapes.hpp"
#include "scmat/stats.hpp"

namespace scmat {

inline constexpr std::size_t kSamplingChunk = 4096;
inline constexpr std::size_t kDefaultSamples = 100000;

// Configurations first..first+count of the deterministic stream for `seed`.
inline std::vector<Configuration> SampleConfigurations(const RobotModel& model,
                                                       std::uint64_t seed,
                                                       std::size_t count,
                                                       std::size_t first = 0) {
  std::vector<Configuration> out;
  out.reserve(count);
  std::size_t k = first;
  while (out.size() < count) {
    const std::size_t chunk = k / kSamplingChunk;
    Xoshiro256 rng(seed, chunk);
    for (std::size_t skip = 0; skip < k % kSamplingChunk; ++skip) {
      SampleConfiguration(model, rng);
    }
    for (std::size_t pos = k % kSamplingChunk; pos < kSamplingChunk && out.size() < count;
         ++pos, ++k) {
      out.push_back(SampleConfiguration(model, rng));
    }
  }
  return out;
}

// Runs `body(chunk)` for chunks 0..n_chunks-1 on up to `threads` workers
// (0 = hardware concurrency). The first exception is rethrown.
inline void ForEachChunk(std::size_t n_chunks, unsigned threads,
                         const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n_chunks, 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto work = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      try {
        body(c);
      } catch (...) {
        const std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n_chunks);
        return;
      }
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
}

struct SamplingOptions {
  std::size_t samples = kDefaultSamples;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

using StatsByType = std::map<ShapeType, StatsTable>;

// Forward kinematics once per sample, then every distinct-link pair of every
// shape type without skips.
inline StatsByType RunSampling(const RobotModel& model, const std::vector<LinkShapes>& shapes,
                               const SamplingOptions& options) {
  if (options.samples == 0) throw StatsError("samples must be >= 1");

  struct TypePlan {
    ShapeType type;
    std::size_t num_shapes;
    PairPlan pairs;
  };
  std::vector<TypePlan> plans;
  {
    const auto poses = ForwardKinematics(model, model.ZeroConfiguration());
    for (const auto type : kAllShapeTypes) {
      const PosedShapes posed = PoseShapesAt(poses, shapes, type);
      const SkipMatrix none =
          EmptyMatrix(model.name, type, ShapeIndexSpace(shapes, type));
      plans.push_back({type, posed.shapes.size(), ActivePairs(posed, none)});
    }
  }

  const std::size_t n_chunks = (options.samples + kSamplingChunk - 1) / kSamplingChunk;
  // chunk -> type -> per-pair stats in plan order
  std::vector<std::vector<std::vector<PairStats>>> partial(n_chunks);

  ForEachChunk(n_chunks, options.threads, [&](std::size_t c) {
    std::vector<std::vector<PairStats>> acc(plans.size());
    for (std::size_t t = 0; t < plans.size(); ++t) {
      acc[t].resize(plans[t].pairs.size());
      for (std::size_t p = 0; p < plans[t].pairs.size(); ++p) {
        acc[t][p].i = plans[t].pairs[p].first;
        acc[t][p].j = plans[t].pairs[p].second;
      }
    }
    Xoshiro256 rng(options.seed, c);
    const std::size_t begin = c * kSamplingChunk;
    const std::size_t end = std::min(options.samples, begin + kSamplingChunk);
    for (std::size_t k = begin; k < end; ++k) {
      const auto poses = ForwardKinematics(model, SampleConfiguration(model, rng));
      for (std::size_t t = 0; t < plans.size(); ++t) {
        const PosedShapes posed = PoseShapesAt(poses, shapes, plans[t].type);
        for (std::size_t p = 0; p < plans[t].pairs.size(); ++p) {
          const auto [i, j] = plans[t].pairs[p];
          acc[t][p].Add(Distance(posed.shapes[i], posed.shapes[j]).distance);
        }
      }
    }
    partial[c] = std::move(acc);
  });

  StatsByType out;
  for (std::size_t t = 0; t < plans.size(); ++t) {
    StatsTable table;
    table.shape_type = plans[t].type;
    table.robot_name = model.name;
    table.seed = options.seed;
    table.samples = options.samples;
    table.num_shapes = plans[t].num_shapes;
    for (std::size_t p = 0; p < plans[t].pairs.size(); ++p) {
      PairStats total = partial[0][t][p];
      for (std::size_t c = 1; c < n_chunks; ++c) total.Merge(partial[c][t][p]);
      table.entries.emplace(plans[t].pairs[p], total);
    }
    out.emplace(plans[t].type, std::move(table));
  }
  return out;
}

}  // namespace scmat

#endif  // SCMAT_SAMPLING_HPP_
