#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gigp/lift.hpp"

using namespace gigp;
using gigp::lift::LiftedCloud;
using gigp::lift::RawPointCloud;
using gigp::lift::canonical_lift;
using gigp::lift::orbit_of;
using gigp::lift::origin_of;
using gigp::lift::stabilizer_sample;
using group::GroupId;

namespace {

constexpr double kPi = std::numbers::pi;

RawPointCloud random_cloud(std::size_t n, std::size_t dim, std::mt19937_64& rng,
                           std::size_t feat_dim = 1) {
  RawPointCloud c;
  c.n_points = n;
  c.dim = dim;
  c.feat_dim = feat_dim;
  std::normal_distribution<double> d(0.0, 1.5);
  c.coords.resize(n * dim);
  for (double& v : c.coords) v = d(rng);
  c.features.resize(n * feat_dim);
  for (double& v : c.features) v = d(rng);
  return c;
}

double vec_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("orbit_of") {
  CHECK(orbit_of({3, 4}, GroupId::SO2) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(orbit_of({0, 0, 0}, GroupId::SO3) == 0.0);
  CHECK(orbit_of({17.0, -2.5}, GroupId::Tn) == 0.0);
}

TEST_CASE("orbit invariance under the group action") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n(0.0, 2.0);
  for (GroupId gid : {GroupId::SO2, GroupId::SO3, GroupId::Tn}) {
    const std::size_t dim = gid == GroupId::SO3 ? 3 : 2;
    for (int i = 0; i < 100; ++i) {
      std::vector<double> x(dim);
      for (double& c : x) c = n(rng);
      const auto g = group::random_element(gid, dim, rng);
      CHECK(std::fabs(orbit_of(group::act(g, x), gid) - orbit_of(x, gid)) < 1e-10);
    }
  }
}

TEST_CASE("origin_of") {
  CHECK(origin_of(5.0, GroupId::SO2, 2) == std::vector<double>{5, 0});
  CHECK(origin_of(1.0, GroupId::SO3, 3) == std::vector<double>{1, 0, 0});
  CHECK(origin_of(0.0, GroupId::SO2, 2) == std::vector<double>{0, 0});
  CHECK(origin_of(3.0, GroupId::Tn, 2) == std::vector<double>{0, 0});
  CHECK_THROWS_AS(origin_of(-1.0, GroupId::SO2, 2), std::invalid_argument);
}

TEST_CASE("lift basics") {
  RawPointCloud c;
  c.n_points = 2;
  c.dim = 2;
  c.feat_dim = 1;
  c.coords = {0, 2, 1.5, 0};
  c.features = {0.25, -1.0};
  const LiftedCloud lc = lift::lift(c, GroupId::SO2);
  CHECK(lc.points[0].elem.data[0] == doctest::Approx(kPi / 2).epsilon(1e-15));
  CHECK(lc.points[0].orbit == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(lc.points[1].elem.data[0] == 0.0);
  CHECK(lc.points[1].orbit == doctest::Approx(1.5).epsilon(1e-15));
  // features copied unchanged
  CHECK(lc.points[0].feature[0] == 0.25);
  CHECK(lc.points[1].feature[0] == -1.0);
}

TEST_CASE("lift round trip: act(elem, origin(orbit)) reproduces the point") {
  std::mt19937_64 rng(32);
  for (GroupId gid : {GroupId::SO2, GroupId::SO3, GroupId::Tn}) {
    const std::size_t dim = gid == GroupId::SO3 ? 3 : 2;
    const RawPointCloud c = random_cloud(40, dim, rng);
    const LiftedCloud lc = lift::lift(c, gid);
    for (std::size_t i = 0; i < lc.size(); ++i) {
      const auto rebuilt = group::act(
          lc.points[i].elem, origin_of(lc.points[i].orbit, gid, dim));
      CHECK(vec_dist(rebuilt, c.coord_vec(i)) < 1e-9);
      CHECK(lc.points[i].orbit >= 0.0);
    }
  }

  // antipodal and on-axis SO3 points round trip too
  RawPointCloud special;
  special.n_points = 4;
  special.dim = 3;
  special.feat_dim = 1;
  special.coords = {-2, 0, 0, 2, 0, 0, 0, -3, 0, 0, 0, 0.5};
  special.features = {1, 1, 1, 1};
  const LiftedCloud ls = lift::lift(special, GroupId::SO3);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto rebuilt = group::act(
        ls.points[i].elem, origin_of(ls.points[i].orbit, GroupId::SO3, 3));
    CHECK(vec_dist(rebuilt, special.coord_vec(i)) < 1e-9);
  }
}

TEST_CASE("zero-radius points lift to the identity with orbit 0") {
  RawPointCloud c;
  c.n_points = 1;
  c.dim = 3;
  c.feat_dim = 1;
  c.coords = {0, 0, 0};
  c.features = {2.0};
  const LiftedCloud lc = lift::lift(c, GroupId::SO3);
  CHECK(lc.points[0].orbit == 0.0);
  CHECK(lc.points[0].elem.data == group::identity(GroupId::SO3).data);
}

TEST_CASE("lift equivariance") {
  std::mt19937_64 rng(33);
  // SO2 and Tn have trivial stabilizers: the canonical lift of the moved
  // cloud is exactly the left-multiplied lift
  for (GroupId gid : {GroupId::SO2, GroupId::Tn}) {
    for (int trial = 0; trial < 20; ++trial) {
      const RawPointCloud c = random_cloud(24, 2, rng);
      const auto g = group::random_element(gid, 2, rng);
      const LiftedCloud base = lift::lift(c, gid);
      const LiftedCloud moved = lift::lift(
          [&] {
            RawPointCloud t = c;
            for (std::size_t i = 0; i < c.n_points; ++i) {
              const auto p = group::act(g, c.coord_vec(i));
              t.coords[i * 2] = p[0];
              t.coords[i * 2 + 1] = p[1];
            }
            return t;
          }(),
          gid);
      for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(std::fabs(moved.points[i].orbit - base.points[i].orbit) < 1e-9);
        const auto expected = group::compose(g, base.points[i].elem);
        CHECK(vec_dist(moved.points[i].elem.data, expected.data) < 1e-9);
      }
    }
  }

  // SO3 lifts are coset representatives; lift(g x) and g * lift(x) agree as
  // lifts (both carry the origin to g x) and share orbit coordinates
  for (int trial = 0; trial < 20; ++trial) {
    const RawPointCloud c = random_cloud(24, 3, rng);
    const auto g = group::random_element(GroupId::SO3, 3, rng);
    const LiftedCloud base = lift::lift(c, GroupId::SO3);
    RawPointCloud t = c;
    for (std::size_t i = 0; i < c.n_points; ++i) {
      const auto p = group::act(g, c.coord_vec(i));
      for (int d = 0; d < 3; ++d) t.coords[i * 3 + d] = p[d];
    }
    const LiftedCloud moved = lift::lift(t, GroupId::SO3);
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(std::fabs(moved.points[i].orbit - base.points[i].orbit) < 1e-9);
      const auto origin = origin_of(base.points[i].orbit, GroupId::SO3, 3);
      // the relifted element is a lift of g x
      CHECK(vec_dist(group::act(moved.points[i].elem, origin), t.coord_vec(i)) < 1e-9);
      // and so is the left-multiplied original element
      const auto lmul = group::compose(g, base.points[i].elem);
      CHECK(vec_dist(group::act(lmul, origin), t.coord_vec(i)) < 1e-9);
    }
  }
}

TEST_CASE("stabilizer_sample") {
  std::mt19937_64 rng(34);
  std::normal_distribution<double> n(0.0, 1.0);
  const std::vector<double> x = {n(rng), n(rng), n(rng)};

  // m = 1 returns the canonical geodesic lift
  const auto single = stabilizer_sample(x, GroupId::SO3, 1, 99);
  CHECK(single.size() == 1);
  CHECK(vec_dist(single[0].data, canonical_lift(x, GroupId::SO3).data) == 0.0);

  // every sample carries the origin representative to x
  const double r = orbit_of(x, GroupId::SO3);
  const auto origin = origin_of(r, GroupId::SO3, 3);
  const auto many = stabilizer_sample(x, GroupId::SO3, 8, 123);
  CHECK(many.size() == 8);
  for (const auto& u : many) CHECK(vec_dist(group::act(u, origin), x) < 1e-9);

  // deterministic per seed, different across seeds
  const auto again = stabilizer_sample(x, GroupId::SO3, 2, 123);
  CHECK(vec_dist(again[1].data, many[1].data) == 0.0);
  const auto other = stabilizer_sample(x, GroupId::SO3, 2, 124);
  CHECK(vec_dist(other[1].data, many[1].data) > 1e-6);

  CHECK_THROWS_AS(stabilizer_sample({1.0, 0.0}, GroupId::SO2, 2, 0),
                  std::invalid_argument);
}

TEST_CASE("cloud validation") {
  RawPointCloud bad;
  bad.n_points = 0;
  bad.dim = 2;
  bad.feat_dim = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  RawPointCloud nan_cloud;
  nan_cloud.n_points = 1;
  nan_cloud.dim = 2;
  nan_cloud.feat_dim = 1;
  nan_cloud.coords = {0.0, std::nan("")};
  nan_cloud.features = {1.0};
  CHECK_THROWS_AS(nan_cloud.validate(), std::invalid_argument);
}
