#include <doctest.h>

#include <algorithm>
#include <random>

#include "atlas/errors.hpp"
#include "atlas/lidar_aggregation.hpp"
#include "fixtures.hpp"
#include "oracles/geometry_oracle.hpp"
#include "oracles/voxel_oracle.hpp"

using namespace atlas;

namespace {

LidarScan make_scan(std::vector<Vec3> pts, std::uint64_t start = 0, std::uint64_t end = 100'000'000) {
  LidarScan s;
  s.sensor = SensorId::of(SensorKind::lidar_left);
  s.start_timestamp = Timestamp{start};
  s.end_timestamp = Timestamp{end};
  for (const auto& p : pts) s.points.push_back({p, 1.0});
  return s;
}

std::vector<Vec3> positions(const std::vector<LidarPoint>& pts) {
  std::vector<Vec3> out;
  for (const auto& p : pts) out.push_back(p.position);
  return out;
}

PointCloudBatch batch_at(std::uint64_t ns, std::size_t points = 1, const Vec3& offset = Vec3::Zero()) {
  std::vector<LidarPoint> pts(points, LidarPoint{Vec3(1, 2, 3), 1.0});
  return PointCloudBatch(pts, TransformChain({RigidTransform::from_translation(offset)}), Timestamp{ns},
                         SensorId::of(SensorKind::lidar_left));
}

struct Sweep {
  LidarScan scan;
  std::vector<double> times;  // seconds, per point
  RigidTransform pose_prev, pose_now;
};

Sweep sweep_of(const ScenarioSpec& spec, double t0, double t1) {
  const auto pts = simulate_sweep(spec, spec.lidars[0], t0, t1);
  Sweep s;
  s.scan.sensor = SensorId::of(SensorKind::lidar_left);
  s.scan.start_timestamp = Timestamp{seconds_to_ns(t0)};
  s.scan.end_timestamp = Timestamp{seconds_to_ns(t1)};
  for (const auto& p : pts) {
    s.scan.points.push_back(p.point);
    s.times.push_back(p.time);
  }
  s.pose_prev = ground_truth_pose(spec, t0);
  s.pose_now = ground_truth_pose(spec, t1);
  return s;
}

/// Per-point exact transform built from homogeneous matrices at each point's own time.
std::vector<Vec3> exact_cloud(const ScenarioSpec& spec, const Sweep& s) {
  const Eigen::Matrix4d ext = spec.lidars[0].extrinsic.matrix();
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < s.scan.points.size(); ++i) {
    const Eigen::Matrix4d pose = ground_truth_pose(spec, s.times[i]).matrix();
    out.push_back(oracle::apply(pose * ext, s.scan.points[i].position));
  }
  return out;
}

double max_residual(const std::vector<PointCloudBatch>& batches, const std::vector<Vec3>& exact) {
  double worst = 0.0;
  std::size_t i = 0;
  for (const auto& b : batches) {
    for (const auto& p : b.world_points()) worst = std::max(worst, (p.position - exact[i++]).norm());
  }
  REQUIRE(i == exact.size());
  return worst;
}

}  // namespace

TEST_CASE("downsample: full collapse and collision-free grid") {
  const auto one = downsample(make_scan({{0.01, 0.01, 0.01}, {0.05, 0.1, 0.02}, {0.15, 0.19, 0.0}}), 0.2);
  REQUIRE(one.points.size() == 1);
  CHECK(one.points[0].position == Vec3(0.01, 0.01, 0.01));

  std::vector<Vec3> grid;
  for (int x = 0; x < 5; ++x)
    for (int y = -2; y < 3; ++y)
      for (int z = 0; z < 3; ++z) grid.emplace_back(x + 0.5, y + 0.5, z + 0.5);
  CHECK(positions(downsample(make_scan(grid), 0.2).points) == grid);

  CHECK_THROWS_AS(downsample(make_scan(grid), 0.0), ArgumentError);
  CHECK_THROWS_AS(downsample(make_scan(grid), -1.0), ArgumentError);
}

TEST_CASE("downsample matches the ordered-map voxel oracle on 10k random points") {
  std::mt19937_64 rng(30);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (double leaf : {0.05, 0.2, 1.0}) {
    std::vector<Vec3> pts(10'000);
    for (auto& p : pts) p = Vec3(u(rng), u(rng), 0.3 * u(rng));
    const LidarScan out = downsample(make_scan(pts), leaf);
    const auto idx = oracle::voxel_first_indices(pts, leaf);
    REQUIRE(out.points.size() == idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) CHECK(out.points[i].position == pts[idx[i]]);
  }
}

TEST_CASE("split_into_batches: slicing, timestamps and errors") {
  std::vector<Vec3> pts;
  for (int i = 0; i < 10; ++i) pts.emplace_back(i, 0, 0);
  const LidarScan scan = make_scan(pts, 1'000, 1'000 + 100'000'000);
  const auto batches = split_into_batches(scan, RigidTransform(), RigidTransform(), RigidTransform(), 4);
  REQUIRE(batches.size() == 4);
  CHECK(batches[0].size() == 3);
  CHECK(batches[3].size() == 1);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(batches[k].batch_timestamp().ns == 1'000 + (2 * k + 1) * 100'000'000 / 8);
    CHECK(batches[k].chain().size() == 2);
  }
  CHECK_THROWS_AS(split_into_batches(scan, {}, {}, {}, 0), ArgumentError);
  CHECK_THROWS_AS(split_into_batches(make_scan({}), {}, {}, {}, 4), ArgumentError);
  // More batches than points leaves the tail empty and drops it.
  CHECK(split_into_batches(make_scan({{1, 1, 1}}), {}, {}, {}, 16).size() == 1);
}

TEST_CASE("stationary agent: every batch chain equals the single-pose transform") {
  const ScenarioSpec spec = testing::room_scenario(Vec3::Zero());
  const Sweep s = sweep_of(spec, 0.2, 0.3);
  const RigidTransform ext = spec.lidars[0].extrinsic;
  const auto batches = split_into_batches(s.scan, s.pose_prev, s.pose_now, ext, 16);
  const RigidTransform naive = s.pose_now * ext;
  std::size_t i = 0;
  for (const auto& b : batches) {
    CHECK(b.transform().is_approx(naive, 1e-12));
    for (const auto& p : b.world_points()) CHECK((p.position - naive * s.scan.points[i++].position).norm() < 1e-12);
  }
}

TEST_CASE("10 m/s over a 100 ms scan: doubled wall of 1 m, batched residual within bound") {
  const ScenarioSpec spec = testing::room_scenario(Vec3(10, 0, 0), 4, 1024);
  const Sweep s = sweep_of(spec, 0.4, 0.5);
  const RigidTransform ext = spec.lidars[0].extrinsic;
  REQUIRE(s.scan.points.size() == 4 * 1024);

  // Naive merge: every point with the end pose. First and last columns both face the front wall.
  const RigidTransform naive = s.pose_now * ext;
  const std::size_t horizontal_ring = 2;  // elevation +5 deg, hits the front wall
  const Vec3 first = naive * s.scan.points[horizontal_ring].position;
  const Vec3 last = naive * s.scan.points[s.scan.points.size() - 4 + horizontal_ring].position;
  CHECK(first.x() - last.x() == doctest::Approx(1.0).epsilon(0.01));

  const auto exact = exact_cloud(spec, s);
  const double v = 10.0, T = 0.1;
  for (int n : {16}) {
    const double r = max_residual(split_into_batches(s.scan, s.pose_prev, s.pose_now, ext, n), exact);
    CHECK(r <= v * T / n);                 // looser stated bound, 0.0625 m at N = 16
    CHECK(r <= v * T / (2 * n) + 1e-6);    // midpoint sampling halves it
  }
}

TEST_CASE("N equal to the point count reproduces per-point poses") {
  // Points sampled at the midpoint of their own time slot, so slot k's pose is exact.
  const ScenarioSpec spec = testing::room_scenario(Vec3(7, -3, 0.5), 2, 200);
  Sweep s = sweep_of(spec, 0.3, 0.4);
  const std::size_t n = s.scan.points.size();
  for (std::size_t i = 0; i < n; ++i) s.times[i] = 0.3 + 0.1 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  const auto exact = exact_cloud(spec, s);
  const auto batches =
      split_into_batches(s.scan, s.pose_prev, s.pose_now, spec.lidars[0].extrinsic, static_cast<int>(n));
  CHECK(max_residual(batches, exact) < 1e-6);
}

TEST_CASE("residual bound holds and is monotone in N across scenes") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-12.0, 12.0);
  for (int scene = 0; scene < 5; ++scene) {
    const Vec3 v(u(rng), u(rng), 0.0);
    const ScenarioSpec spec = testing::room_scenario(v, 3, 512);
    const Sweep s = sweep_of(spec, 0.1, 0.2);
    const auto exact = exact_cloud(spec, s);
    double prev = std::numeric_limits<double>::infinity();
    for (int n : {1, 2, 4, 8, 16, 32, 64, 128}) {
      const double r = max_residual(split_into_batches(s.scan, s.pose_prev, s.pose_now, spec.lidars[0].extrinsic, n),
                                    exact);
      CHECK(r <= v.norm() * 0.1 / (2 * n) + 1e-6);
      CHECK(r <= prev + 1e-12);
      prev = r;
    }
  }
}

TEST_CASE("insert keeps batches sorted by timestamp") {
  PointCloudAggregator agg;
  std::vector<PointCloudBatch> sixteen;
  for (std::uint64_t k = 0; k < 16; ++k) sixteen.push_back(batch_at(k * 10));
  agg.insert_batches(std::move(sixteen));
  CHECK(agg.batch_count() == 16);
  agg.insert_batches({});
  CHECK(agg.batch_count() == 16);

  // Two interleaved LiDAR streams.
  PointCloudAggregator two;
  std::mt19937_64 rng(32);
  std::uniform_int_distribution<std::uint64_t> ts(0, 1'000'000);
  std::vector<std::uint64_t> all;
  for (int round = 0; round < 20; ++round) {
    std::vector<PointCloudBatch> a, b;
    for (int k = 0; k < 8; ++k) {
      all.push_back(ts(rng));
      a.push_back(batch_at(all.back()));
      all.push_back(ts(rng));
      b.push_back(batch_at(all.back()));
    }
    two.insert_batches(std::move(a));
    two.insert_batches(std::move(b));
  }
  std::sort(all.begin(), all.end());
  REQUIRE(two.batch_count() == all.size());
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(two.batches()[i].batch_timestamp().ns == all[i]);
}

TEST_CASE("evict_expired: full eviction, closed boundary, filter oracle") {
  const std::uint64_t s = 1'000'000'000;
  PointCloudAggregator agg;
  agg.insert_batches({});
  std::vector<PointCloudBatch> old;
  for (int k = 0; k < 5; ++k) old.push_back(batch_at(s + k));
  agg.insert_batches(std::move(old));
  agg.evict_expired(Timestamp{10 * s}, 1.5);
  CHECK(agg.empty());

  std::vector<PointCloudBatch> edge;
  edge.push_back(batch_at(s));
  edge.push_back(batch_at(s - 1));
  agg.insert_batches(std::move(edge));
  agg.evict_expired(Timestamp{s + 1'500'000'000}, 1.5);
  REQUIRE(agg.batch_count() == 1);
  CHECK(agg.batches().front().batch_timestamp().ns == s);

  std::mt19937_64 rng(33);
  std::uniform_int_distribution<std::uint64_t> ts(0, 5 * s);
  PointCloudAggregator mixed;
  std::vector<std::uint64_t> stamps;
  std::vector<PointCloudBatch> batches;
  for (int i = 0; i < 300; ++i) {
    stamps.push_back(ts(rng));
    batches.push_back(batch_at(stamps.back(), 1 + i % 3));
  }
  mixed.insert_batches(std::move(batches));
  const Timestamp now{4 * s};
  mixed.evict_expired(now, 1.5);
  std::vector<std::uint64_t> kept;
  for (auto t : stamps)
    if (t >= now.ns - 1'500'000'000) kept.push_back(t);
  std::sort(kept.begin(), kept.end());
  REQUIRE(mixed.batch_count() == kept.size());
  std::size_t points = 0;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    CHECK(mixed.batches()[i].batch_timestamp().ns == kept[i]);
    points += mixed.batches()[i].size();
  }
  CHECK(mixed.point_count() == points);
  CHECK(mixed.aggregated_world_cloud().size() == points);
}

TEST_CASE("aggregated_world_cloud: empty, identity and known transforms") {
  PointCloudAggregator agg;
  CHECK(agg.aggregated_world_cloud().empty());

  std::vector<LidarPoint> pts{{Vec3(1, 2, 3), 0.5}, {Vec3(-1, 0, 4), 0.25}};
  std::vector<PointCloudBatch> one;
  one.emplace_back(pts, TransformChain(), Timestamp{1}, SensorId::of(SensorKind::lidar_left));
  agg.insert_batches(std::move(one));
  const auto cloud = agg.aggregated_world_cloud();
  REQUIRE(cloud.size() == 2);
  CHECK(cloud[0].position == pts[0].position);
  CHECK(cloud[1].intensity == 0.25);

  const Eigen::Matrix3d r1 = oracle::rpy_matrix(0.1, -0.2, 0.7), r2 = oracle::rpy_matrix(0.0, 0.3, -1.1);
  const Eigen::Matrix4d m1 = oracle::homogeneous(r1, Vec3(1, 2, 3)), m2 = oracle::homogeneous(r2, Vec3(-4, 0, 1));
  PointCloudAggregator two;
  std::vector<PointCloudBatch> bs;
  bs.emplace_back(pts, TransformChain({RigidTransform::from_matrix(m1)}), Timestamp{5},
                  SensorId::of(SensorKind::lidar_left));
  bs.emplace_back(pts, TransformChain({RigidTransform::from_matrix(m2)}), Timestamp{9},
                  SensorId::of(SensorKind::lidar_right));
  two.insert_batches(std::move(bs));
  const auto out = two.aggregated_world_cloud();
  REQUIRE(out.size() == 4);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK((out[i].position - oracle::apply(m1, pts[i].position)).norm() < 1e-12);
    CHECK((out[2 + i].position - oracle::apply(m2, pts[i].position)).norm() < 1e-12);
  }
}

TEST_CASE("collapsed transform is computed once per chain") {
  auto b = batch_at(0, 10, Vec3(1, 0, 0));
  CHECK_FALSE(b.has_cached_transform());
  for (int i = 0; i < 5; ++i) b.world_points();
  CHECK(b.collapse_count() == 1);
  b.set_chain(TransformChain({RigidTransform::from_translation({0, 2, 0})}));
  CHECK_FALSE(b.has_cached_transform());
  CHECK(b.world_points()[0].position == Vec3(1, 4, 3));
  CHECK(b.collapse_count() == 2);

  PointCloudAggregator agg;
  std::vector<PointCloudBatch> bs;
  for (int k = 0; k < 4; ++k) bs.push_back(batch_at(k, 3));
  agg.insert_batches(std::move(bs));
  for (int i = 0; i < 3; ++i) agg.aggregated_world_cloud();
  for (const auto& x : agg.batches()) CHECK(x.collapse_count() == 1);
}

TEST_CASE("downsample then split commutes with split then per-slice downsample for collision-free input") {
  std::vector<Vec3> grid;
  for (int i = 0; i < 64; ++i) grid.emplace_back(i % 8, i / 8, 0.5 * (i % 3));
  const LidarScan scan = make_scan(grid);
  const RigidTransform prev(from_rpy(0, 0, 0.1), Vec3(1, 0, 0)), now(from_rpy(0, 0, 0.2), Vec3(2, 0, 0));
  const auto a = split_into_batches(downsample(scan, 0.3), prev, now, RigidTransform(), 8);
  const auto raw = split_into_batches(scan, prev, now, RigidTransform(), 8);
  REQUIRE(a.size() == raw.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    LidarScan slice = make_scan(positions(raw[k].points()));
    CHECK(positions(downsample(slice, 0.3).points) == positions(a[k].points()));
    CHECK(a[k].transform().is_approx(raw[k].transform(), 1e-12));
  }
}
