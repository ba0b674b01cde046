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

// Distance queries, statistics, sampling and skip matrices.

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <set>
#include <string>
#include <vector>

#include "scmat/matrix.hpp"
#include "scmat/proximity.hpp"
#include "scmat/sampling.hpp"
#include "scmat/stats.hpp"
#include "test_util.hpp"

namespace scmat {
namespace {

using ::testing::HasSubstr;
using testing::Rng;

PosedShape At(ShapeGeometry g, const RigidTransform& pose = {}, std::size_t link = 0) {
  return {std::move(g), pose, link, std::nullopt};
}

Obb UnitCube(const Vec3& center) { return {center, Mat3::Identity(), Vec3::Constant(0.5)}; }

// ---------------------------------------------------------------------------
// Pairwise distance.

TEST(Distance, SpheresAnalytic) {
  const auto a = At(Sphere{Vec3::Zero(), 1.0});
  const auto b = At(Sphere{Vec3(0, 0, 5), 2.0});
  const DistanceResult r = Distance(a, b);
  EXPECT_NEAR(r.distance, 2.0, 1e-12);
  EXPECT_FALSE(r.intersecting);
  EXPECT_NEAR((r.point_b - r.point_a).norm(), 2.0, 1e-12);
  EXPECT_NEAR(r.point_a.z(), 1.0, 1e-12);
  EXPECT_NEAR(r.point_b.z(), 3.0, 1e-12);
  EXPECT_FALSE(Intersects(a, b));
}

TEST(Distance, CubesWithGap) {
  const auto a = At(UnitCube(Vec3::Zero()));
  const auto b = At(UnitCube(Vec3(1.5, 0, 0)));
  const DistanceResult r = Distance(a, b);
  EXPECT_NEAR(r.distance, 0.5, 1e-12);
  EXPECT_FALSE(r.intersecting);
  EXPECT_NEAR(r.point_a.x(), 0.5, 1e-12);
  EXPECT_NEAR(r.point_b.x(), 1.0, 1e-12);
  EXPECT_NEAR((r.point_b - r.point_a).norm(), 0.5, 1e-12);
  EXPECT_FALSE(Intersects(a, b));
}

TEST(Distance, PosedPolytopeCubes) {
  const ConvexPolytope cube = ConvexHull(std::vector<Vec3>{
      {-0.5, -0.5, -0.5}, {0.5, -0.5, -0.5}, {-0.5, 0.5, -0.5}, {0.5, 0.5, -0.5},
      {-0.5, -0.5, 0.5},  {0.5, -0.5, 0.5},  {-0.5, 0.5, 0.5},  {0.5, 0.5, 0.5}});
  const auto a = At(&cube);
  const auto b = At(&cube, RigidTransform::FromTranslation(Vec3(1.5, 0, 0)));
  EXPECT_NEAR(Distance(a, b).distance, 0.5, 1e-12);
  EXPECT_FALSE(Intersects(a, b));
  const auto c = At(&cube, RigidTransform::FromTranslation(Vec3(0.9, 0.2, 0)));
  EXPECT_EQ(Distance(a, c).distance, 0.0);
  EXPECT_TRUE(Distance(a, c).intersecting);
  EXPECT_TRUE(Intersects(a, c));
}

TEST(Intersects, ConcentricSpheres) {
  EXPECT_TRUE(Intersects(At(Sphere{Vec3(1, 2, 3), 0.1}), At(Sphere{Vec3(1, 2, 3), 2.0})));
  EXPECT_EQ(Distance(At(Sphere{Vec3(1, 2, 3), 0.1}), At(Sphere{Vec3(1, 2, 3), 2.0})).distance,
            0.0);
}

TEST(Intersects, BoxSeparatingAxesAgreeWithGjk) {
  Rng rng(31);
  std::uniform_real_distribution<double> u(0.02, 0.5);
  int hits = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const Obb a{testing::RandomVec(rng, -0.6, 0.6), testing::RandomRotation(rng),
                Vec3(u(rng), u(rng), u(rng))};
    const Obb b{testing::RandomVec(rng, -0.6, 0.6), testing::RandomRotation(rng),
                Vec3(u(rng), u(rng), u(rng))};
    const auto pa = At(a, testing::RandomPose(rng, 0.3));
    const auto pb = At(b, testing::RandomPose(rng, 0.3), 1);
    const bool gjk = Distance(pa, pb).intersecting;
    ASSERT_EQ(Intersects(pa, pb), gjk) << trial;
    hits += gjk ? 1 : 0;
  }
  EXPECT_GT(hits, 2000);
  EXPECT_LT(hits, 8000);
}

TEST(Distance, RandomPolytopesMatchFeatureOracle) {
  Rng rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Vec3> pa, pb;
    for (int k = 0; k < 12; ++k) pa.push_back(testing::RandomInBall(rng, 0.5));
    for (int k = 0; k < 12; ++k) pb.push_back(testing::RandomInBall(rng, 0.5));
    const ConvexPolytope a = ConvexHull(pa);
    const ConvexPolytope b = ConvexHull(pb);
    const RigidTransform ta = testing::RandomPose(rng, 0.8);
    const RigidTransform tb = testing::RandomPose(rng, 0.8);
    const DistanceResult r = Distance(At(&a, ta), At(&b, tb, 1));
    const double ref =
        testing::RefDistance(testing::RefFromPolytope(a, ta), testing::RefFromPolytope(b, tb));
    EXPECT_NEAR(r.distance, ref, 1e-5);
    EXPECT_NEAR((r.point_b - r.point_a).norm(), r.distance, 1e-7);
    EXPECT_LE(a.SignedDistance(ta.Inverse().Apply(r.point_a)), 1e-7);
    EXPECT_LE(b.SignedDistance(tb.Inverse().Apply(r.point_b)), 1e-7);
  }
}

TEST(Distance, MixedKindsAgreeWithIntersects) {
  Rng rng(5);
  std::vector<Vec3> pts;
  for (int k = 0; k < 16; ++k) pts.push_back(testing::RandomInBall(rng, 0.4));
  const ConvexPolytope poly = ConvexHull(pts);
  const auto make = [&](int kind, const RigidTransform& t) {
    switch (kind) {
      case 0:
        return At(Sphere{Vec3(0.1, 0, 0), 0.3}, t);
      case 1:
        return At(Obb{Vec3::Zero(), testing::RandomRotation(rng), Vec3(0.4, 0.2, 0.1)}, t);
      default:
        return At(&poly, t);
    }
  };
  for (int trial = 0; trial < 600; ++trial) {
    const auto a = make(trial % 3, testing::RandomPose(rng, 0.6));
    const auto b = make((trial / 3) % 3, testing::RandomPose(rng, 0.6));
    const DistanceResult r = Distance(a, b);
    EXPECT_EQ(Intersects(a, b), r.intersecting) << trial;
    EXPECT_EQ(r.intersecting, r.distance == 0.0);
  }
}

// ---------------------------------------------------------------------------
// Posing and all-pairs queries.

TEST(PoseShapes, OnePerLinkAtLinkLevel) {
  const auto& f = testing::PlanarArm();
  for (const auto type : {ShapeType::kSphereLink, ShapeType::kObbLink, ShapeType::kHullLink}) {
    const PosedShapes p = PoseShapes(f.model, f.shapes, type, f.model.ZeroConfiguration());
    ASSERT_EQ(p.shapes.size(), f.model.links.size());
    for (std::size_t k = 0; k < p.shapes.size(); ++k) {
      EXPECT_EQ(p.shapes[k].owner_link, k);
      EXPECT_FALSE(p.shapes[k].owner_part.has_value());
    }
  }
}

TEST(PoseShapes, DecompositionLayout) {
  auto shapes = testing::PlanarArm().shapes;
  LinkShapes& base = shapes[0];
  base.decomposition = {base.hull, base.hull, base.hull};
  base.spheres_decomp.assign(3, base.sphere_link);
  base.obbs_decomp.assign(3, base.obb_link);
  const auto& model = testing::PlanarArm().model;
  const PosedShapes p =
      PoseShapes(model, shapes, ShapeType::kSphereDecomp, model.ZeroConfiguration());
  ASSERT_EQ(p.shapes.size(), 3u + 3u + 2u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(p.shapes[k].owner_link, 0u);
    EXPECT_EQ(p.shapes[k].owner_part, k);
  }
  EXPECT_EQ(p.shapes[3].owner_link, 1u);
  EXPECT_EQ(p.shapes[3].owner_part, 0u);
}

TEST(PoseShapes, PosesComeFromForwardKinematics) {
  const auto& f = testing::FourLink();
  Xoshiro256 rng(12);
  for (const auto& q : {f.model.ZeroConfiguration(), SampleConfiguration(f.model, rng)}) {
    const auto fk = ForwardKinematics(f.model, q);
    const PosedShapes p = PoseShapes(f.model, f.shapes, ShapeType::kHullDecomp, q);
    for (const auto& s : p.shapes) {
      EXPECT_EQ(s.pose.translation, fk[s.owner_link].translation);
      EXPECT_EQ(s.pose.rotation, fk[s.owner_link].rotation);
    }
  }
}

SkipMatrix NoSkips(const testing::Fixture& f, ShapeType type) {
  return EmptyMatrix(f.model.name, type, ShapeIndexSpace(f.shapes, type));
}

SkipMatrix SkipAll(const testing::Fixture& f, ShapeType type) {
  SkipMatrix m = NoSkips(f, type);
  for (std::size_t i = 0; i < m.num_shapes; ++i) {
    for (std::size_t j = i + 1; j < m.num_shapes; ++j) {
      if (!m.SameLink(i, j)) m.skips.push_back({i, j, SkipReason::kUserMarked, std::nullopt});
    }
  }
  return m;
}

TEST(QueryAllPairs, EverythingSkipped) {
  const auto& f = testing::PlanarArm();
  for (const auto type : kAllShapeTypes) {
    const PosedShapes p = PoseShapes(f.model, f.shapes, type, f.model.ZeroConfiguration());
    const SkipMatrix all = SkipAll(f, type);
    const QueryResult prox = QueryAllPairs(p, all, nullptr, QueryMode::kProximity);
    EXPECT_TRUE(prox.pairs.empty());
    EXPECT_EQ(prox.checks, 0u);
    const QueryResult coll = QueryAllPairs(p, all, nullptr, QueryMode::kCollision);
    EXPECT_FALSE(coll.any_collision);
    EXPECT_EQ(coll.checks, 0u);
  }
}

TEST(QueryAllPairs, TwoIntersectingShapesStopAfterOneCheck) {
  PosedShapes p;
  p.type = ShapeType::kSphereLink;
  p.shapes = {At(Sphere{Vec3::Zero(), 1.0}, {}, 0), At(Sphere{Vec3(1, 0, 0), 1.0}, {}, 1)};
  const SkipMatrix m =
      EmptyMatrix("two", ShapeType::kSphereLink,
                  {{0, "a", std::nullopt}, {1, "b", std::nullopt}});
  const QueryResult r = QueryAllPairs(p, m, nullptr, QueryMode::kCollision);
  EXPECT_TRUE(r.any_collision);
  EXPECT_EQ(r.checks, 1u);
}

TEST(QueryAllPairs, SortedListMatchesDirectDistances) {
  const auto& f = testing::PlanarArm();
  Xoshiro256 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const Configuration q = SampleConfiguration(f.model, rng);
    for (const auto type : {ShapeType::kHullLink, ShapeType::kHullDecomp}) {
      const PosedShapes p = PoseShapes(f.model, f.shapes, type, q);
      const QueryResult r = QueryAllPairs(p, NoSkips(f, type), nullptr, QueryMode::kProximity);
      // hull_link: C(5,2) = 10; hull_decomp: C(6,2) minus the side link's own pair.
      ASSERT_EQ(r.pairs.size(), type == ShapeType::kHullLink ? 10u : 14u);
      for (std::size_t k = 1; k < r.pairs.size(); ++k) {
        EXPECT_LE(r.pairs[k - 1].d, r.pairs[k].d);
      }
      for (const auto& pd : r.pairs) {
        const auto* a = std::get<const ConvexPolytope*>(p.shapes[pd.i].geometry);
        const auto* b = std::get<const ConvexPolytope*>(p.shapes[pd.j].geometry);
        const double ref = testing::RefDistance(testing::RefFromPolytope(*a, p.shapes[pd.i].pose),
                                                testing::RefFromPolytope(*b, p.shapes[pd.j].pose));
        EXPECT_NEAR(pd.d, ref, 1e-6);
        EXPECT_LT(pd.i, pd.j);
        EXPECT_NE(p.shapes[pd.i].owner_link, p.shapes[pd.j].owner_link);
      }
    }
  }
}

TEST(QueryAllPairs, SkippedPairsFlaggedOnRequest) {
  const auto& f = testing::PlanarArm();
  const PosedShapes p =
      PoseShapes(f.model, f.shapes, ShapeType::kHullLink, f.model.ZeroConfiguration());
  const SkipMatrix m = SetSkip(NoSkips(f, ShapeType::kHullLink), 0, 2, true);
  const auto active = QueryProximity(p, m);
  EXPECT_EQ(active.size(), 9u);
  const auto all = QueryProximity(p, m, nullptr, true);
  ASSERT_EQ(all.size(), 10u);
  for (const auto& pd : all) EXPECT_EQ(pd.skipped, pd.i == 0 && pd.j == 2);
}

TEST(QueryAllPairs, IndexSpaceMismatchThrows) {
  const auto& f = testing::PlanarArm();
  const PosedShapes p =
      PoseShapes(f.model, f.shapes, ShapeType::kHullDecomp, f.model.ZeroConfiguration());
  EXPECT_THROW(QueryAllPairs(p, NoSkips(f, ShapeType::kHullLink), nullptr, QueryMode::kProximity),
               ProximityError);
}

// ---------------------------------------------------------------------------
// Statistics.

TEST(PairStats, MinMaxMean) {
  PairStats s;
  for (const double d : {1.0, 2.0, 3.0}) s.Add(d);
  EXPECT_EQ(s.d_min, 1.0);
  EXPECT_EQ(s.d_max, 3.0);
  EXPECT_DOUBLE_EQ(s.d_mean(), 2.0);
  EXPECT_EQ(s.collision_fraction(), 0.0);
}

TEST(PairStats, CollisionFraction) {
  PairStats s;
  for (const double d : {0.0, 0.0, 1.0}) s.Add(d);
  EXPECT_DOUBLE_EQ(s.collision_fraction(), 2.0 / 3.0);
  EXPECT_EQ(s.collisions, 2u);
}

TEST(PairStats, MergeEqualsSequential) {
  Rng rng(2);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  PairStats whole, left, right;
  for (int k = 0; k < 1000; ++k) {
    const double d = k % 7 == 0 ? 0.0 : u(rng);
    whole.Add(d);
    (k < 400 ? left : right).Add(d);
  }
  left.Merge(right);
  EXPECT_EQ(left.samples, whole.samples);
  EXPECT_EQ(left.collisions, whole.collisions);
  EXPECT_EQ(left.d_min, whole.d_min);
  EXPECT_EQ(left.d_max, whole.d_max);
  EXPECT_NEAR(left.d_mean(), whole.d_mean(), 1e-14);
}

PairDistance Pd(std::size_t i, std::size_t j, double d) {
  PairDistance pd;
  pd.i = i;
  pd.j = j;
  pd.d = d;
  return pd;
}

TEST(StatsTable, AccumulateValidatesAndRoundTrips) {
  StatsTable t;
  t.shape_type = ShapeType::kObbLink;
  t.robot_name = "r";
  t.num_shapes = 3;
  const std::vector<PairDistance> sample = {Pd(0, 1, 0.5), Pd(1, 2, 0.0)};
  Accumulate(t, ShapeType::kObbLink, 3, sample);
  Accumulate(t, ShapeType::kObbLink, 3, sample);
  EXPECT_EQ(t.samples, 2u);
  ASSERT_NE(t.Find(1, 0), nullptr);
  EXPECT_DOUBLE_EQ(t.Find(0, 1)->d_mean(), 0.5);
  EXPECT_DOUBLE_EQ(t.Find(2, 1)->collision_fraction(), 1.0);
  EXPECT_THROW(Accumulate(t, ShapeType::kHullLink, 3, sample), StatsError);
  EXPECT_THROW(Accumulate(t, ShapeType::kObbLink, 4, sample), StatsError);
  const std::vector<PairDistance> bad = {Pd(2, 3, 1.0)};
  EXPECT_THROW(Accumulate(t, ShapeType::kObbLink, 3, bad), StatsError);

  const auto j = StatsTableToJson(t);
  EXPECT_EQ(StatsTableToJson(StatsTableFromJson(j)).dump(), j.dump());
}

// ---------------------------------------------------------------------------
// Sampling.

TEST(RunSampling, SingleSampleHasDegenerateStats) {
  const auto& f = testing::PlanarArm();
  const auto stats = RunSampling(f.model, f.shapes, {.samples = 1, .seed = 3, .threads = 1});
  ASSERT_EQ(stats.size(), 6u);
  for (const auto& [type, table] : stats) {
    EXPECT_EQ(table.samples, 1u);
    EXPECT_FALSE(table.entries.empty());
    for (const auto& [key, s] : table.entries) {
      EXPECT_EQ(s.d_min, s.d_max);
      EXPECT_DOUBLE_EQ(s.d_mean(), s.d_min);
    }
  }
}

TEST(RunSampling, IndependentOfThreadCount) {
  const auto& f = testing::PlanarArm();
  const auto one = RunSampling(f.model, f.shapes, {.samples = 9000, .seed = 5, .threads = 1});
  const auto three = RunSampling(f.model, f.shapes, {.samples = 9000, .seed = 5, .threads = 3});
  const auto other = RunSampling(f.model, f.shapes, {.samples = 9000, .seed = 6, .threads = 3});
  for (const auto type : kAllShapeTypes) {
    EXPECT_EQ(StatsTableToJson(one.at(type)).dump(), StatsTableToJson(three.at(type)).dump());
    EXPECT_NE(StatsTableToJson(one.at(type)).dump(), StatsTableToJson(other.at(type)).dump());
  }
}

TEST(RunSampling, MatchesSampleConfigurations) {
  const auto& f = testing::FourLink();
  const auto configs = SampleConfigurations(f.model, 8, 5000);
  const auto tail = SampleConfigurations(f.model, 8, 10, 4090);
  for (std::size_t k = 0; k < tail.size(); ++k) EXPECT_EQ(tail[k].values, configs[4090 + k].values);
  StatsTable direct;
  direct.shape_type = ShapeType::kSphereLink;
  direct.num_shapes = f.shapes.size();
  for (const auto& q : configs) {
    const PosedShapes p = PoseShapes(f.model, f.shapes, ShapeType::kSphereLink, q);
    const auto pairs = QueryProximity(p, NoSkips(f, ShapeType::kSphereLink));
    Accumulate(direct, ShapeType::kSphereLink, p.shapes.size(), pairs);
  }
  const auto sampled = RunSampling(f.model, f.shapes, {.samples = 5000, .seed = 8, .threads = 2});
  const StatsTable& t = sampled.at(ShapeType::kSphereLink);
  ASSERT_EQ(t.entries.size(), direct.entries.size());
  for (const auto& [key, s] : direct.entries) {
    const PairStats* o = t.Find(key.first, key.second);
    ASSERT_NE(o, nullptr);
    EXPECT_EQ(o->d_min, s.d_min);
    EXPECT_EQ(o->d_max, s.d_max);
    EXPECT_EQ(o->collisions, s.collisions);
    EXPECT_NEAR(o->d_mean(), s.d_mean(), 1e-12);
  }
}

TEST(RunSampling, SeparatedLinksNeverTouch) {
  // The arm sweeps a horizontal disc 1 m above a 0.2 m tall base: clearance
  // is at least 1 - 0.1 - 0.05 = 0.85 m for every joint value.
  const std::string urdf =
      "<robot name=\"apart\">"
      "<link name=\"base\"><collision><geometry><box size=\"0.4 0.4 0.2\"/></geometry>"
      "</collision></link>"
      "<link name=\"arm\"><collision><origin xyz=\"0.5 0 0\"/><geometry>"
      "<box size=\"1 0.1 0.1\"/></geometry></collision></link>"
      "<joint name=\"j\" type=\"revolute\"><parent link=\"base\"/><child link=\"arm\"/>"
      "<origin xyz=\"0 0 1\"/><axis xyz=\"0 0 1\"/>"
      "<limit lower=\"-3\" upper=\"3\"/></joint></robot>";
  const RobotModel model = ParseUrdf(urdf, "");
  const auto shapes = BuildRobotShapes(model);
  const auto stats = RunSampling(model, shapes, {.samples = 10000, .seed = 1, .threads = 1});
  const PairStats* s = stats.at(ShapeType::kHullLink).Find(0, 1);
  ASSERT_NE(s, nullptr);
  EXPECT_EQ(s->collision_fraction(), 0.0);
  EXPECT_GT(s->d_min, 0.0);
  EXPECT_GE(s->d_min, 0.85 - 1e-9);
  EXPECT_LE(s->d_min, 0.85 + 1e-9);
}

// ---------------------------------------------------------------------------
// Inference.

StatsTable LinkStats(const RobotModel& model, ShapeType type) {
  StatsTable t;
  t.shape_type = type;
  t.robot_name = model.name;
  t.num_shapes = LinkLevelIndexSpace(model).size();
  return t;
}

void Feed(StatsTable& t, std::size_t i, std::size_t j, std::initializer_list<double> ds) {
  PairStats& s = t.entries[{i, j}];
  s.i = i;
  s.j = j;
  for (const double d : ds) s.Add(d);
}

TEST(InferSkips, ReasonsAndPrecedence) {
  const auto& model = testing::PlanarArm().model;
  StatsTable t = LinkStats(model, ShapeType::kHullLink);
  t.samples = 3;
  Feed(t, 0, 1, {0.0, 0.0, 0.0});  // adjacent beats always
  Feed(t, 0, 2, {0.0, 0.0, 0.0});  // always
  Feed(t, 0, 3, {0.2, 0.4, 0.3});  // never
  Feed(t, 1, 3, {0.0, 0.1, 0.2});  // sometimes
  Feed(t, 1, 4, {0.05, 0.1, 0.2});
  const SkipMatrix m = InferSkips(t, model, LinkLevelIndexSpace(model), {});
  ASSERT_NE(m.Find(0, 1), nullptr);
  EXPECT_EQ(m.Find(0, 1)->reason, SkipReason::kAdjacent);
  EXPECT_EQ(m.Find(0, 4)->reason, SkipReason::kAdjacent);  // no stats needed
  EXPECT_EQ(m.Find(0, 2)->reason, SkipReason::kAlwaysInCollision);
  EXPECT_EQ(m.Find(3, 0)->reason, SkipReason::kNeverInCollision);
  EXPECT_EQ(m.Find(1, 3), nullptr);
  EXPECT_EQ(m.Find(1, 4)->reason, SkipReason::kNeverInCollision);

  const SkipMatrix margin = InferSkips(t, model, LinkLevelIndexSpace(model), {0.99, 0.1});
  EXPECT_EQ(margin.Find(1, 4), nullptr);
  EXPECT_NE(margin.Find(0, 3), nullptr);
}

TEST(InferSkips, KeepsUserAndImportedEntries) {
  const auto& model = testing::PlanarArm().model;
  StatsTable t = LinkStats(model, ShapeType::kHullLink);
  t.samples = 1;
  Feed(t, 1, 3, {0.0});
  Feed(t, 2, 4, {0.0});
  SkipMatrix prev = EmptyMatrix(model.name, ShapeType::kHullLink, LinkLevelIndexSpace(model));
  prev.skips = {{1, 3, SkipReason::kUserMarked, std::nullopt},
                {2, 4, SkipReason::kImported, "Never"}};
  const SkipMatrix m = InferSkips(t, model, LinkLevelIndexSpace(model), {}, &prev);
  EXPECT_EQ(m.Find(1, 3)->reason, SkipReason::kUserMarked);
  EXPECT_EQ(m.Find(2, 4)->reason, SkipReason::kImported);
  EXPECT_EQ(m.Find(2, 4)->annotation, "Never");
}

TEST(InferSkips, ValidatesInputs) {
  const auto& model = testing::PlanarArm().model;
  const StatsTable t = LinkStats(model, ShapeType::kHullLink);
  EXPECT_THROW(InferSkips(t, model, LinkLevelIndexSpace(model), {0.0, 0.0}), MatrixError);
  EXPECT_THROW(InferSkips(t, model, LinkLevelIndexSpace(model), {0.99, -1.0}), MatrixError);
  auto short_map = LinkLevelIndexSpace(model);
  short_map.pop_back();
  EXPECT_THROW(InferSkips(t, model, short_map, {}), MatrixError);
  auto renamed = LinkLevelIndexSpace(model);
  renamed[2].link_name = "ghost";
  EXPECT_THROW(InferSkips(t, model, renamed, {}), MatrixError);
}

// ---------------------------------------------------------------------------
// Editing.

SkipMatrix DecompMatrix() {
  const auto& f = testing::PlanarArm();
  return EmptyMatrix(f.model.name, ShapeType::kHullDecomp,
                     ShapeIndexSpace(f.shapes, ShapeType::kHullDecomp));
}

TEST(SetSkip, NormalizesOrder) {
  const SkipMatrix m = SetSkip(DecompMatrix(), 3, 1, true);
  ASSERT_EQ(m.skips.size(), 1u);
  EXPECT_EQ(m.skips[0], (SkipEntry{1, 3, SkipReason::kUserMarked, std::nullopt}));
}

TEST(SetSkip, SetThenUnsetRestores) {
  SkipMatrix base = DecompMatrix();
  base.skips = {{0, 1, SkipReason::kAdjacent, std::nullopt}};
  EXPECT_EQ(SetSkip(SetSkip(base, 2, 5, true), 2, 5, false), base);
  EXPECT_EQ(SetSkip(base, 0, 1, true), base);  // reason kept
}

TEST(SetSkip, Rejections) {
  const SkipMatrix m = DecompMatrix();
  EXPECT_THROW(SetSkip(m, 4, 5, true), MatrixError);  // both parts of "side"
  EXPECT_THROW(SetSkip(m, 2, 2, true), MatrixError);
  EXPECT_THROW(SetSkip(m, 0, 6, true), MatrixError);
}

std::vector<PairDistance> Live(std::initializer_list<std::pair<double, std::optional<double>>> ds) {
  std::vector<PairDistance> out;
  std::size_t j = 1;
  for (const auto& [d, ratio] : ds) {
    PairDistance pd;
    pd.i = 0;
    pd.j = j++;
    pd.d = d;
    pd.d_normalized = ratio;
    out.push_back(pd);
  }
  return out;
}

TEST(ApplyBulkRule, RawIsStrict) {
  const SkipMatrix m = ApplyBulkRule(DecompMatrix(), Live({{0.1, {}}, {0.5, {}}, {1.2, {}}}),
                                     BulkMode::kRaw, 0.5);
  ASSERT_EQ(m.skips.size(), 1u);
  EXPECT_EQ(m.skips[0].j, 1u);
  EXPECT_EQ(m.skips[0].reason, SkipReason::kUserMarked);
}

TEST(ApplyBulkRule, NormalizedUsesRatio) {
  const SkipMatrix m = ApplyBulkRule(DecompMatrix(), Live({{5.0, 0.1}, {0.01, 0.9}}),
                                     BulkMode::kNormalized, 0.6);
  ASSERT_EQ(m.skips.size(), 1u);
  EXPECT_EQ(m.skips[0].j, 1u);
}

TEST(ApplyBulkRule, ZeroThresholdIsVacuous) {
  const auto live = Live({{0.0, 0.0}, {0.3, 0.2}});
  EXPECT_EQ(ApplyBulkRule(DecompMatrix(), live, BulkMode::kRaw, 0.0), DecompMatrix());
  EXPECT_EQ(ApplyBulkRule(DecompMatrix(), live, BulkMode::kNormalized, 0.0), DecompMatrix());
}

TEST(ApplyBulkRule, PairsWithoutStatsUntouchedAndNegativeRejected) {
  const auto live = Live({{0.0, std::nullopt}, {0.3, 0.2}});
  const SkipMatrix m = ApplyBulkRule(DecompMatrix(), live, BulkMode::kNormalized, 1.0);
  ASSERT_EQ(m.skips.size(), 1u);
  EXPECT_EQ(m.skips[0].j, 2u);
  EXPECT_THROW(ApplyBulkRule(DecompMatrix(), live, BulkMode::kRaw, -0.1), MatrixError);
}

// ---------------------------------------------------------------------------
// Serialization.

SkipMatrix Sample() {
  SkipMatrix m = DecompMatrix();
  m.skips = {{0, 1, SkipReason::kAdjacent, std::nullopt},
             {0, 4, SkipReason::kNeverInCollision, std::nullopt},
             {1, 5, SkipReason::kImported, "Never: \"quoted\" # not a comment"},
             {2, 3, SkipReason::kUserMarked, std::nullopt},
             {3, 5, SkipReason::kAlwaysInCollision, std::nullopt}};
  return m;
}

TEST(MatrixSerialization, EmptyRoundTrip) {
  const SkipMatrix m = DecompMatrix();
  for (const auto f : {MatrixFormat::kJson, MatrixFormat::kYaml}) {
    EXPECT_EQ(ImportMatrix(ExportMatrix(m, f), f), m);
  }
}

TEST(MatrixSerialization, JsonYamlJsonStable) {
  const SkipMatrix m = Sample();
  const std::string json = ExportMatrix(m, MatrixFormat::kJson);
  const std::string yaml = ExportMatrix(ImportMatrix(json, MatrixFormat::kJson), MatrixFormat::kYaml);
  const SkipMatrix back = ImportMatrix(yaml, MatrixFormat::kYaml);
  EXPECT_EQ(back, m);
  EXPECT_EQ(ExportMatrix(back, MatrixFormat::kJson), json);
  EXPECT_EQ(ExportMatrix(back, MatrixFormat::kYaml), yaml);
}

TEST(MatrixSerialization, LinkNamesThatLookLikeOtherTypes) {
  SkipMatrix m = EmptyMatrix("yes", ShapeType::kSphereLink,
                             {{0, "true", std::nullopt}, {1, "1.5", std::nullopt},
                              {2, "null", std::nullopt}, {3, "- x: y", std::nullopt}});
  m.skips = {{0, 3, SkipReason::kUserMarked, "~"}};
  const std::string yaml = ExportMatrix(m, MatrixFormat::kYaml);
  EXPECT_EQ(ImportMatrix(yaml, MatrixFormat::kYaml), m);
}

void ExpectRejected(const std::string& text, MatrixFormat f, const std::string& fragment) {
  try {
    ImportMatrix(text, f);
    ADD_FAILURE() << "accepted: " << text;
  } catch (const MatrixError& e) {
    EXPECT_THAT(e.what(), HasSubstr(fragment));
  }
}

std::string WithSkips(const std::string& skips) {
  return R"({"format_version":1,"robot_name":"r","shape_type":"hull_link","num_shapes":8,)"
         R"("shape_index_map":[)"
         R"({"index":0,"link_name":"a","part":null},{"index":1,"link_name":"b","part":null},)"
         R"({"index":2,"link_name":"c","part":null},{"index":3,"link_name":"d","part":null},)"
         R"({"index":4,"link_name":"e","part":null},{"index":5,"link_name":"f","part":null},)"
         R"({"index":6,"link_name":"g","part":null},{"index":7,"link_name":"h","part":null}],)"
         R"("skips":[)" +
         skips + "]}";
}

TEST(MatrixSerialization, Rejections) {
  ExpectRejected(WithSkips(R"({"i":7,"j":7,"reason":"user_marked"})"), MatrixFormat::kJson,
                 "degenerate pair");
  ExpectRejected(WithSkips(R"({"i":1,"j":2,"reason":"user_marked"},)"
                           R"({"i":2,"j":1,"reason":"adjacent"})"),
                 MatrixFormat::kJson, "duplicate entry");
  ExpectRejected(WithSkips(R"({"i":1,"j":8,"reason":"user_marked"})"), MatrixFormat::kJson,
                 "out of declared range");
  ExpectRejected(WithSkips(R"({"i":-1,"j":2,"reason":"user_marked"})"), MatrixFormat::kJson, "i");
  ExpectRejected(WithSkips(R"({"i":1,"j":2,"reason":"because"})"), MatrixFormat::kJson,
                 "unknown skip reason");
  ExpectRejected(WithSkips(R"({"i":1,"j":2})"), MatrixFormat::kJson, "malformed");
  ExpectRejected("{\"format_version\":1", MatrixFormat::kJson, "malformed JSON");
  ExpectRejected(R"({"format_version":2})", MatrixFormat::kJson, "format_version");
  ExpectRejected("skips: [unclosed", MatrixFormat::kYaml, "malformed YAML");

  // Same-link pair in a decomposition-level file.
  SkipMatrix m = DecompMatrix();
  std::string json = ExportMatrix(m, MatrixFormat::kJson);
  json.replace(json.find("\"skips\":[]"), 10, R"("skips":[{"i":4,"j":5,"reason":"user_marked"}])");
  ExpectRejected(json, MatrixFormat::kJson, "same link");
}

// ---------------------------------------------------------------------------
// SRDF.

TEST(ImportMoveItSrdf, SingleEntry) {
  const auto& model = testing::PlanarArm().model;
  const SrdfImport r = ImportMoveItSrdf(
      "<robot name=\"planar_arm\"><disable_collisions link1=\"arm3\" link2=\"base\" "
      "reason=\"Never\"/></robot>",
      model);
  EXPECT_EQ(r.imported, 1u);
  EXPECT_TRUE(r.warnings.empty());
  ASSERT_EQ(r.matrix.skips.size(), 1u);
  EXPECT_EQ(r.matrix.skips[0], (SkipEntry{0, 3, SkipReason::kImported, "Never"}));
  EXPECT_EQ(r.matrix.shape_type, ShapeType::kHullLink);
}

TEST(ImportMoveItSrdf, UnknownLinkWarns) {
  const auto& model = testing::PlanarArm().model;
  const SrdfImport r = ImportMoveItSrdf(
      "<robot name=\"planar_arm\"><disable_collisions link1=\"arm3\" link2=\"gripper\" "
      "reason=\"Never\"/></robot>",
      model);
  EXPECT_TRUE(r.matrix.skips.empty());
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_THAT(r.warnings[0], HasSubstr("gripper"));
}

TEST(ImportMoveItSrdf, EmptyAndMalformed) {
  const auto& model = testing::PlanarArm().model;
  EXPECT_TRUE(ImportMoveItSrdf("<robot name=\"planar_arm\"/>", model).matrix.skips.empty());
  EXPECT_THROW(ImportMoveItSrdf("<robot", model), MatrixError);
}

}  // namespace
}  // namespace scmat
