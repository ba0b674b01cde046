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

// Query-time ratios with and without a skip matrix, and matrix accuracy
// against a dense collision oracle.

#ifndef SCMAT_BENCH_HPP_
#define SCMAT_BENCH_HPP_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "scmat/matrix.hpp"
#include "scmat/model.hpp"
#include "scmat/proximity.hpp"
#include "scmat/sampling.hpp"
#include "scmat/shapes.hpp"

namespace scmat {

inline std::string_view ToString(QueryMode mode) {
  return mode == QueryMode::kCollision ? "collision" : "proximity";
}

inline constexpr std::size_t kBenchSlices = 32;

struct BenchReport {
  ShapeType shape_type = ShapeType::kHullLink;
  QueryMode mode = QueryMode::kCollision;
  double ratio_mean = 0.0;
  double ratio_std = 0.0;
  std::size_t n_configs = 0;
  std::size_t repeats = 0;
  double wall_time_with = 0.0;     // s, median batch
  double wall_time_without = 0.0;  // s, median batch
  std::size_t active_pairs_with = 0;
  std::size_t active_pairs_without = 0;
};

namespace detail {

inline double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double StdDev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (const double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Seconds to run one query per posed state in [begin, end).
inline double TimeBatch(const std::vector<PosedShapes>& states, const PairPlan& plan,
                        QueryMode mode, std::size_t begin = 0,
                        std::size_t end = static_cast<std::size_t>(-1)) {
  static volatile double sink = 0.0;
  end = std::min(end, states.size());
  const auto start = std::chrono::steady_clock::now();
  double acc = 0.0;
  for (std::size_t k = begin; k < end; ++k) {
    const PosedShapes& posed = states[k];
    if (mode == QueryMode::kCollision) {
      acc += static_cast<double>(QueryCollision(posed, plan).checks);
    } else {
      const auto pairs = QueryProximity(posed, plan);
      if (!pairs.empty()) acc += pairs.front().d;
    }
  }
  const auto stop = std::chrono::steady_clock::now();
  sink = sink + acc;
  return std::chrono::duration<double>(stop - start).count();
}

}  // namespace detail

// Times queries over one seeded configuration set, with `matrix` and with an
// empty matrix, alternating which goes first. Poses are computed up front so
// forward kinematics is not timed. Single-threaded.
inline BenchReport BenchRatio(const RobotModel& model, const std::vector<LinkShapes>& shapes,
                              const SkipMatrix& matrix, QueryMode mode, std::size_t n_configs,
                              std::uint64_t seed, std::size_t repeats = 5) {
  if (n_configs == 0) throw Error("n_configs must be >= 1");
  repeats = std::max<std::size_t>(repeats, 3);
  std::vector<PosedShapes> states;
  states.reserve(n_configs);
  for (const auto& config : SampleConfigurations(model, seed, n_configs)) {
    states.push_back(PoseShapes(model, shapes, matrix.shape_type, config));
  }
  const SkipMatrix none = EmptyMatrix(matrix.robot_name, matrix.shape_type,
                                      matrix.shape_index_map);
  const PairPlan with = ActivePairs(states.front(), matrix);
  const PairPlan without = ActivePairs(states.front(), none);

  detail::TimeBatch(states, with, mode);  // warm-up
  detail::TimeBatch(states, without, mode);

  // Each batch is cut into slices timed back to back in alternating order.
  // Background load only ever adds time, so a slice's fastest run across
  // repeats is its best estimate.
  const std::size_t slices = std::min<std::size_t>(kBenchSlices, n_configs);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best_with(slices, inf);
  std::vector<double> best_without(slices, inf);
  std::vector<double> t_with;
  std::vector<double> t_without;
  std::vector<double> ratios;
  for (std::size_t r = 0; r < repeats; ++r) {
    double a = 0.0;
    double b = 0.0;
    for (std::size_t s = 0; s < slices; ++s) {
      const std::size_t begin = s * n_configs / slices;
      const std::size_t end = (s + 1) * n_configs / slices;
      double ta = 0.0;
      double tb = 0.0;
      if ((r + s) % 2 == 0) {
        ta = detail::TimeBatch(states, with, mode, begin, end);
        tb = detail::TimeBatch(states, without, mode, begin, end);
      } else {
        tb = detail::TimeBatch(states, without, mode, begin, end);
        ta = detail::TimeBatch(states, with, mode, begin, end);
      }
      best_with[s] = std::min(best_with[s], ta);
      best_without[s] = std::min(best_without[s], tb);
      a += ta;
      b += tb;
    }
    t_with.push_back(a);
    t_without.push_back(b);
    ratios.push_back(b > 0.0 ? a / b : 1.0);
  }
  const double sum_with = std::accumulate(best_with.begin(), best_with.end(), 0.0);
  const double sum_without = std::accumulate(best_without.begin(), best_without.end(), 0.0);
  BenchReport report;
  report.shape_type = matrix.shape_type;
  report.mode = mode;
  report.n_configs = n_configs;
  report.repeats = repeats;
  report.wall_time_with = detail::Median(t_with);
  report.wall_time_without = detail::Median(t_without);
  report.ratio_mean = sum_without > 0.0 ? sum_with / sum_without : 1.0;
  report.ratio_std = detail::StdDev(ratios);
  report.active_pairs_with = with.size();
  report.active_pairs_without = without.size();
  return report;
}

// ---------------------------------------------------------------------------
// Oracle and accuracy.

// Which decomposition-part pairs (and hence link pairs) were ever seen
// intersecting over a dense configuration sample.
struct CollisionOracle {
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  std::vector<ShapeIndexEntry> part_space;  // hull_decomp index space
  std::vector<std::size_t> part_owner;      // link index per part slot
  std::set<std::pair<std::size_t, std::size_t>> colliding_parts;
  std::set<LinkPair> colliding_links;

  bool PartsCollide(std::size_t a, std::size_t b) const {
    return colliding_parts.contains({std::min(a, b), std::max(a, b)});
  }
  bool LinksCollide(std::size_t a, std::size_t b) const {
    return colliding_links.contains({std::min(a, b), std::max(a, b)});
  }
};

// Checks every part pair of distinct links at hull_decomp fidelity. A pair
// stops being checked once seen colliding.
inline CollisionOracle RunCollisionOracle(const RobotModel& model,
                                          const std::vector<LinkShapes>& shapes,
                                          std::size_t samples, std::uint64_t seed,
                                          unsigned threads = 0) {
  CollisionOracle oracle;
  oracle.seed = seed;
  oracle.samples = samples;
  oracle.part_space = ShapeIndexSpace(shapes, ShapeType::kHullDecomp);
  const auto zero = PoseShapes(model, shapes, ShapeType::kHullDecomp, model.ZeroConfiguration());
  for (const auto& s : zero.shapes) oracle.part_owner.push_back(s.owner_link);
  const PairPlan plan = ActivePairs(
      zero, EmptyMatrix(model.name, ShapeType::kHullDecomp, oracle.part_space));

  std::vector<std::atomic<bool>> found(plan.size());
  for (auto& f : found) f.store(false);
  const std::size_t n_chunks = (samples + kSamplingChunk - 1) / kSamplingChunk;
  ForEachChunk(n_chunks, threads, [&](std::size_t c) {
    Xoshiro256 rng(seed, c);
    const std::size_t begin = c * kSamplingChunk;
    const std::size_t end = std::min(samples, begin + kSamplingChunk);
    std::vector<std::size_t> pending;
    for (std::size_t k = begin; k < end; ++k) {
      const auto config = SampleConfiguration(model, rng);
      pending.clear();
      for (std::size_t p = 0; p < plan.size(); ++p) {
        if (!found[p].load(std::memory_order_relaxed)) pending.push_back(p);
      }
      if (pending.empty()) continue;
      const auto posed = PoseShapes(model, shapes, ShapeType::kHullDecomp, config);
      for (const std::size_t p : pending) {
        if (Intersects(posed.shapes[plan[p].first], posed.shapes[plan[p].second])) {
          found[p].store(true, std::memory_order_relaxed);
        }
      }
    }
  });
  for (std::size_t p = 0; p < plan.size(); ++p) {
    if (!found[p].load()) continue;
    oracle.colliding_parts.insert(plan[p]);
    const std::size_t a = oracle.part_owner[plan[p].first];
    const std::size_t b = oracle.part_owner[plan[p].second];
    oracle.colliding_links.insert({std::min(a, b), std::max(a, b)});
  }
  return oracle;
}

struct AccuracyReport {
  ShapeType shape_type = ShapeType::kHullLink;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::size_t false_skips = 0;   // skipped, yet the oracle saw a collision
  std::size_t false_active = 0;  // active, yet the oracle never saw one

  double Fraction() const {
    return total == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(total);
  }
};

// Adjacent and always-in-collision skips are left out. Any other skip is
// correct iff the oracle never saw the pair collide; an active pair is
// correct iff it did. Link-level slots are judged by any part pair of their
// links; part-level slots by their own part pair.
inline AccuracyReport ClassifyAccuracy(const SkipMatrix& matrix, const RobotModel& model,
                                       const CollisionOracle& oracle) {
  AccuracyReport report;
  report.shape_type = matrix.shape_type;
  std::vector<std::size_t> link_of(matrix.num_shapes);
  std::vector<std::size_t> part_slot(matrix.num_shapes, 0);
  for (std::size_t k = 0; k < matrix.num_shapes; ++k) {
    const auto& e = matrix.shape_index_map[k];
    const auto link = model.FindLink(e.link_name);
    if (!link) throw MatrixError("matrix names unknown link '" + e.link_name + "'");
    link_of[k] = *link;
    if (e.part) {
      const auto it = std::find_if(oracle.part_space.begin(), oracle.part_space.end(),
                                   [&](const ShapeIndexEntry& p) {
                                     return p.link_name == e.link_name && p.part == e.part;
                                   });
      if (it == oracle.part_space.end()) {
        throw MatrixError("matrix part slot " + std::to_string(k) + " unknown to the oracle");
      }
      part_slot[k] = it->index;
    }
  }
  const bool part_level = IsDecompositionLevel(matrix.shape_type);
  for (std::size_t i = 0; i < matrix.num_shapes; ++i) {
    for (std::size_t j = i + 1; j < matrix.num_shapes; ++j) {
      if (link_of[i] == link_of[j]) continue;
      const SkipEntry* skip = matrix.Find(i, j);
      if (skip != nullptr && (skip->reason == SkipReason::kAdjacent ||
                              skip->reason == SkipReason::kAlwaysInCollision)) {
        continue;
      }
      const bool truth = part_level ? oracle.PartsCollide(part_slot[i], part_slot[j])
                                    : oracle.LinksCollide(link_of[i], link_of[j]);
      ++report.total;
      if (skip != nullptr) {
        if (!truth) ++report.correct; else ++report.false_skips;
      } else {
        if (truth) ++report.correct; else ++report.false_active;
      }
    }
  }
  return report;
}

inline AccuracyReport ClassifyAccuracy(const SkipMatrix& matrix,
                                       const std::vector<LinkShapes>& shapes,
                                       const RobotModel& model, std::size_t oracle_samples,
                                       std::uint64_t seed) {
  return ClassifyAccuracy(matrix, model, RunCollisionOracle(model, shapes, oracle_samples, seed));
}

// ---------------------------------------------------------------------------
// Reports.

inline nlohmann::ordered_json ToJson(const BenchReport& r) {
  nlohmann::ordered_json out;
  out["shape_type"] = std::string(ToString(r.shape_type));
  out["mode"] = std::string(ToString(r.mode));
  out["ratio_mean"] = r.ratio_mean;
  out["ratio_std"] = r.ratio_std;
  out["n_configs"] = r.n_configs;
  out["repeats"] = r.repeats;
  out["wall_time_with"] = r.wall_time_with;
  out["wall_time_without"] = r.wall_time_without;
  out["active_pairs_with"] = r.active_pairs_with;
  out["active_pairs_without"] = r.active_pairs_without;
  return out;
}

inline nlohmann::ordered_json ToJson(const AccuracyReport& r) {
  nlohmann::ordered_json out;
  out["shape_type"] = std::string(ToString(r.shape_type));
  out["correct"] = r.correct;
  out["total"] = r.total;
  out["false_skips"] = r.false_skips;
  out["false_active"] = r.false_active;
  return out;
}

// Rows per shape type: collision ratio, proximity ratio, accuracy.
inline void PrintBenchTable(std::ostream& os, const std::vector<BenchReport>& ratios,
                            const std::vector<AccuracyReport>& accuracy) {
  os << std::left << std::setw(15) << "shape_type" << std::setw(20) << "collision ratio"
     << std::setw(20) << "proximity ratio" << "accuracy\n";
  for (const auto type : kAllShapeTypes) {
    const auto cell = [&](QueryMode mode) {
      for (const auto& r : ratios) {
        if (r.shape_type == type && r.mode == mode) {
          std::ostringstream s;
          s << std::fixed << std::setprecision(2) << r.ratio_mean << " +/- " << r.ratio_std;
          return s.str();
        }
      }
      return std::string("-");
    };
    std::string acc = "-";
    for (const auto& a : accuracy) {
      if (a.shape_type == type) acc = std::to_string(a.correct) + "/" + std::to_string(a.total);
    }
    os << std::setw(15) << ToString(type) << std::setw(20) << cell(QueryMode::kCollision)
       << std::setw(20) << cell(QueryMode::kProximity) << acc << "\n";
  }
}

}  // namespace scmat

#endif  // SCMAT_BENCH_HPP_
