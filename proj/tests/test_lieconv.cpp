#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "gigp/lieconv.hpp"

using namespace gigp;
using namespace gigp::lieconv;
using group::GroupId;
using lift::LiftedCloud;
using lift::RawPointCloud;

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

RawPointCloud transform(const RawPointCloud& c, const group::GroupElement& g) {
  RawPointCloud t = c;
  for (std::size_t i = 0; i < c.n_points; ++i) {
    const auto p = group::act(g, c.coord_vec(i));
    for (std::size_t d = 0; d < c.dim; ++d) t.coords[i * c.dim + d] = p[d];
  }
  return t;
}

double feature_dist(const LiftedCloud& a, const LiftedCloud& b) {
  REQUIRE(a.size() == b.size());
  REQUIRE(a.feat_dim == b.feat_dim);
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.feat_dim; ++j)
      m = std::max(m, std::fabs(a.points[i].feature[j] - b.points[i].feature[j]));
  return m;
}

ConvLayerState random_layer(GroupId gid, std::size_t dim, std::size_t in,
                            std::size_t out, std::size_t k, std::mt19937_64& rng,
                            double mc = 1.0) {
  ConvLayerConfig cfg;
  cfg.in_channels = in;
  cfg.out_channels = out;
  cfg.nbhd_k = k;
  cfg.mc_fraction = mc;
  cfg.kernel_hidden = {12};
  return ConvLayerState::make(cfg, pair_feature_dim(gid, dim), rng);
}

}  // namespace

TEST_CASE("neighborhood basics") {
  std::mt19937_64 rng(41);
  const RawPointCloud c = random_cloud(12, 2, rng);
  const LiftedCloud lc = lift::lift(c, GroupId::SO2);

  CHECK(neighborhood(5, lc, 1) == std::vector<std::size_t>{5});

  const auto all = neighborhood(3, lc, 12);
  std::vector<std::size_t> expect(12);
  for (std::size_t i = 0; i < 12; ++i) expect[i] = i;
  CHECK(all == expect);

  CHECK_THROWS_AS(neighborhood(0, lc, 13), std::invalid_argument);
}

TEST_CASE("Geometry neighbor rows agree with the neighborhood op") {
  std::mt19937_64 rng(40);
  for (GroupId gid : {GroupId::SO2, GroupId::SO3}) {
    const std::size_t dim = gid == GroupId::SO3 ? 3 : 2;
    const RawPointCloud c = random_cloud(17, dim, rng);
    const LiftedCloud lc = lift::lift(c, gid);
    const std::size_t k = 5;
    const Geometry geo = Geometry::build(lc, k, 1.0);
    for (std::size_t i = 0; i < lc.size(); ++i) {
      const auto ref = neighborhood(i, lc, k, 1.0);
      const std::vector<std::size_t> row(geo.nbr.begin() + i * k,
                                         geo.nbr.begin() + (i + 1) * k);
      CHECK(row == ref);
    }
  }
}

TEST_CASE("neighborhood ties break by ascending index") {
  RawPointCloud c;
  c.n_points = 4;
  c.dim = 2;
  c.feat_dim = 1;
  // indices 2 and 3 are the same point, equidistant from index 0
  c.coords = {0, 0, 5, 5, 1, 0, 1, 0};
  c.features = {1, 1, 1, 1};
  const LiftedCloud lc = lift::lift(c, GroupId::Tn);
  CHECK(neighborhood(0, lc, 2) == std::vector<std::size_t>{0, 2});
}

TEST_CASE("neighborhoods are invariant under the group action") {
  std::mt19937_64 rng(42);
  for (GroupId gid : {GroupId::SO2, GroupId::SO3, GroupId::Tn}) {
    const std::size_t dim = gid == GroupId::SO3 ? 3 : 2;
    for (int trial = 0; trial < 15; ++trial) {
      const RawPointCloud c = random_cloud(20, dim, rng);
      const auto g = group::random_element(gid, dim, rng);
      const LiftedCloud base = lift::lift(c, gid);
      const LiftedCloud moved = lift::lift(transform(c, g), gid);
      for (std::size_t i = 0; i < 20; i += 5)
        CHECK(neighborhood(i, base, 6) == neighborhood(i, moved, 6));
    }
  }
}

TEST_CASE("constant identity kernel reduces to the neighborhood mean") {
  std::mt19937_64 rng(43);
  const std::size_t channels = 3, k = 5;
  const RawPointCloud c = random_cloud(15, 2, rng, channels);
  const LiftedCloud lc = lift::lift(c, GroupId::SO2);

  ConvLayerConfig cfg;
  cfg.in_channels = channels;
  cfg.out_channels = channels;
  cfg.nbhd_k = k;
  cfg.kernel_hidden = {};  // single linear layer
  ConvLayerState layer = ConvLayerState::make(cfg, 3, rng, /*zero_last=*/true);
  // zero weights + identity-matrix bias make the kernel constant at I
  for (std::size_t o = 0; o < channels; ++o)
    layer.kernel.layers[0].b.data[o * channels + o] = 1.0;

  const LiftedCloud out = conv_forward(layer, lc);
  const Geometry geo = Geometry::build(lc, k, cfg.lambda_orbit);
  for (std::size_t i = 0; i < lc.size(); ++i) {
    for (std::size_t ch = 0; ch < channels; ++ch) {
      double mean = 0.0;
      for (std::size_t s = 0; s < k; ++s)
        mean += lc.points[geo.nbr[i * k + s]].feature[ch];
      mean /= static_cast<double>(k);
      CHECK(out.points[i].feature[ch] == doctest::Approx(mean).epsilon(1e-12));
    }
  }
}

TEST_CASE("single-point cloud applies the kernel at zero offset") {
  std::mt19937_64 rng(44);
  RawPointCloud c;
  c.n_points = 1;
  c.dim = 2;
  c.feat_dim = 2;
  c.coords = {0.6, -0.8};
  c.features = {2.0, -0.5};
  const LiftedCloud lc = lift::lift(c, GroupId::SO2);
  ConvLayerState layer = random_layer(GroupId::SO2, 2, 2, 2, 1, rng);

  const LiftedCloud out = conv_forward(layer, lc);

  // evaluate the kernel MLP independently at (0, q, q) and apply it to f
  const double q = lc.points[0].orbit;
  nn::Tape tape;
  nn::Var w = layer.kernel.apply(
      tape, tape.constant(nn::Tensor::from({1, 3}, {0.0, q, q})));
  const auto& wm = tape.value(w).data;  // out x in, row major
  for (std::size_t o = 0; o < 2; ++o) {
    const double expect = wm[o * 2] * 2.0 + wm[o * 2 + 1] * -0.5;
    CHECK(out.points[0].feature[o] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("conv_forward is exactly equivariant at mc_fraction 1") {
  std::mt19937_64 rng(45);
  for (GroupId gid : {GroupId::SO2, GroupId::SO3, GroupId::Tn}) {
    const std::size_t dim = gid == GroupId::SO3 ? 3 : 2;
    ConvLayerState layer = random_layer(gid, dim, 2, 3, 6, rng);
    for (int trial = 0; trial < 20; ++trial) {
      const RawPointCloud c = random_cloud(18, dim, rng, 2);
      const auto g = group::random_element(gid, dim, rng);
      const LiftedCloud base = conv_forward(layer, lift::lift(c, gid));
      const LiftedCloud moved = conv_forward(layer, lift::lift(transform(c, g), gid));
      CHECK(feature_dist(base, moved) < 1e-9);
    }
  }
}

TEST_CASE("conv_forward is linear in the features") {
  std::mt19937_64 rng(46);
  ConvLayerState layer = random_layer(GroupId::SO2, 2, 2, 2, 4, rng);
  const RawPointCloud c = random_cloud(12, 2, rng, 2);
  RawPointCloud c2 = c;
  std::normal_distribution<double> d(0.0, 1.0);
  for (double& v : c2.features) v = d(rng);

  const double alpha = 1.7, beta = -0.4;
  RawPointCloud mix = c;
  for (std::size_t i = 0; i < c.features.size(); ++i)
    mix.features[i] = alpha * c.features[i] + beta * c2.features[i];

  const LiftedCloud out1 = conv_forward(layer, lift::lift(c, GroupId::SO2));
  const LiftedCloud out2 = conv_forward(layer, lift::lift(c2, GroupId::SO2));
  const LiftedCloud outm = conv_forward(layer, lift::lift(mix, GroupId::SO2));
  for (std::size_t i = 0; i < outm.size(); ++i)
    for (std::size_t ch = 0; ch < 2; ++ch) {
      const double expect = alpha * out1.points[i].feature[ch] +
                            beta * out2.points[i].feature[ch];
      CHECK(std::fabs(outm.points[i].feature[ch] - expect) < 1e-10);
    }
}

TEST_CASE("residual block") {
  std::mt19937_64 rng(47);
  const std::size_t ch = 3;
  const RawPointCloud c = random_cloud(14, 2, rng, ch);
  const LiftedCloud lc = lift::lift(c, GroupId::SO2);

  ConvLayerConfig cfg;
  cfg.in_channels = ch;
  cfg.out_channels = ch;
  cfg.nbhd_k = 5;
  cfg.kernel_hidden = {10};
  ConvLayerState conv1 = ConvLayerState::make(cfg, 3, rng, false);
  ConvLayerState conv2 = ConvLayerState::make(cfg, 3, rng, /*zero_last=*/true);

  // zero-initialized conv2 output layer makes the block an identity
  const LiftedCloud out = residual_block(lc, conv1, conv2);
  CHECK(out.size() == lc.size());
  CHECK(feature_dist(out, lc) == 0.0);
  for (std::size_t i = 0; i < out.size(); ++i)
    CHECK(out.points[i].orbit == lc.points[i].orbit);

  // perturb conv2 and check equivariance of the full block
  std::normal_distribution<double> d(0.0, 0.3);
  for (double& v : conv2.kernel.layers.back().w.data) v = d(rng);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = group::random_element(GroupId::SO2, 2, rng);
    const LiftedCloud base = residual_block(lift::lift(c, GroupId::SO2), conv1, conv2);
    const LiftedCloud moved =
        residual_block(lift::lift(transform(c, g), GroupId::SO2), conv1, conv2);
    CHECK(feature_dist(base, moved) < 1e-9);
  }

  ConvLayerConfig bad = cfg;
  bad.in_channels = ch + 1;
  ConvLayerState conv_bad = ConvLayerState::make(bad, 3, rng);
  CHECK_THROWS_AS(residual_block(lc, conv_bad, conv2), std::invalid_argument);
}

TEST_CASE("subsample") {
  std::mt19937_64 rng(48);
  const RawPointCloud c = random_cloud(4, 2, rng);
  const LiftedCloud lc = lift::lift(c, GroupId::SO2);

  const LiftedCloud same = subsample(lc, 4, 7);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(same.points[i].orbit == lc.points[i].orbit);

  const LiftedCloud one = subsample(lc, 1, 7);
  CHECK(one.size() == 1);

  CHECK_THROWS_AS(subsample(lc, 5, 7), std::invalid_argument);

  // every unordered pair appears with frequency 1/6 +- 0.02 over 10k seeds
  std::map<std::pair<double, double>, int> counts;
  const int trials = 10000;
  for (int seed = 0; seed < trials; ++seed) {
    const LiftedCloud sub = subsample(lc, 2, static_cast<std::uint64_t>(seed));
    counts[{sub.points[0].orbit, sub.points[1].orbit}] += 1;
  }
  CHECK(counts.size() == 6);
  for (const auto& [key, n] : counts) {
    const double freq = static_cast<double>(n) / trials;
    CHECK(std::fabs(freq - 1.0 / 6.0) < 0.02);
  }
}

TEST_CASE("monte-carlo subsampling: matched seeds stay equivariant") {
  std::mt19937_64 rng(49);
  ConvLayerState layer = random_layer(GroupId::SO2, 2, 1, 2, 8, rng, 0.5);
  const RawPointCloud c = random_cloud(24, 2, rng, 1);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = group::random_element(GroupId::SO2, 2, rng);
    const std::uint64_t seed = 1000 + trial;
    const LiftedCloud base = conv_forward(layer, lift::lift(c, GroupId::SO2), seed);
    const LiftedCloud moved =
        conv_forward(layer, lift::lift(transform(c, g), GroupId::SO2), seed);
    CHECK(feature_dist(base, moved) < 1e-9);
  }
}

TEST_CASE("monte-carlo deviation shrinks as mc_fraction grows") {
  std::mt19937_64 rng(50);
  const RawPointCloud c = random_cloud(24, 2, rng, 1);
  const LiftedCloud lc = lift::lift(c, GroupId::SO2);

  auto median_dev = [&](double mc) {
    ConvLayerConfig cfg;
    cfg.in_channels = 1;
    cfg.out_channels = 2;
    cfg.nbhd_k = 8;
    cfg.mc_fraction = 1.0;
    cfg.kernel_hidden = {12};
    std::mt19937_64 wrng(51);  // same weights for every fraction
    ConvLayerState layer = ConvLayerState::make(cfg, 3, wrng);
    const LiftedCloud full = conv_forward(layer, lc);
    layer.config.mc_fraction = mc;
    std::vector<double> devs;
    for (int seed = 0; seed < 20; ++seed)
      devs.push_back(feature_dist(full, conv_forward(layer, lc, 7000 + seed)));
    std::nth_element(devs.begin(), devs.begin() + devs.size() / 2, devs.end());
    return devs[devs.size() / 2];
  };

  const double d25 = median_dev(0.25);
  const double d50 = median_dev(0.5);
  const double d100 = median_dev(1.0);
  CHECK(d100 == 0.0);
  CHECK(d50 > d100);
  CHECK(d25 >= d50);
}

TEST_CASE("discrete cyclic group: conv matches the exact integral form") {
  // seven points on the unit circle form a C7 orbit; with the neighborhood
  // covering the whole group the layer is the plain group convolution. An odd
  // order keeps every relative angle away from the +-pi seam of the log chart,
  // where a chart-coordinate kernel is legitimately discontinuous.
  const std::size_t n = 7;
  RawPointCloud c;
  c.n_points = n;
  c.dim = 2;
  c.feat_dim = 1;
  std::mt19937_64 rng(52);
  std::normal_distribution<double> d(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * kPi * static_cast<double>(i) / n;
    c.coords.push_back(std::cos(t));
    c.coords.push_back(std::sin(t));
    c.features.push_back(d(rng));
  }
  const LiftedCloud lc = lift::lift(c, GroupId::SO2);
  ConvLayerState layer = random_layer(GroupId::SO2, 2, 1, 2, n, rng);
  const LiftedCloud out = conv_forward(layer, lc);

  // independent oracle: straight sum over the whole group, one pair at a time
  for (std::size_t u = 0; u < n; ++u) {
    double expect[2] = {0.0, 0.0};
    for (std::size_t v = 0; v < n; ++v) {
      const double rel = group::wrap_angle(lc.points[u].elem.data[0] -
                                           lc.points[v].elem.data[0]);
      nn::Tape tape;
      nn::Var w = layer.kernel.apply(
          tape, tape.constant(nn::Tensor::from(
                    {1, 3}, {rel, lc.points[u].orbit, lc.points[v].orbit})));
      const auto& wm = tape.value(w).data;
      for (int o = 0; o < 2; ++o) expect[o] += wm[o] * lc.points[v].feature[0];
    }
    for (int o = 0; o < 2; ++o) {
      expect[o] /= static_cast<double>(n);
      CHECK(out.points[u].feature[o] == doctest::Approx(expect[o]).epsilon(1e-10));
    }
  }

  // shifting features one step around the circle shifts outputs one step
  RawPointCloud shifted = c;
  for (std::size_t i = 0; i < n; ++i)
    shifted.features[i] = c.features[(i + 1) % n];
  const LiftedCloud out_shift =
      conv_forward(layer, lift::lift(shifted, GroupId::SO2));
  for (std::size_t i = 0; i < n; ++i)
    for (int o = 0; o < 2; ++o)
      CHECK(out_shift.points[i].feature[o] ==
            doctest::Approx(out.points[(i + 1) % n].feature[o]).epsilon(1e-9));
}
