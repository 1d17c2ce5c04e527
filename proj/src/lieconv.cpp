#include "gigp/lieconv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gigp/kernels.hpp"

namespace gigp::lieconv {

using group::GroupId;
using lift::LiftedCloud;
using lift::LiftedPoint;

void ConvLayerConfig::validate() const {
  if (in_channels < 1 || out_channels < 1 || nbhd_k < 1)
    throw std::invalid_argument("ConvLayerConfig: counts must be >= 1");
  if (mc_fraction <= 0.0 || mc_fraction > 1.0)
    throw std::invalid_argument("ConvLayerConfig: mc_fraction in (0, 1]");
  if (static_cast<std::size_t>(mc_fraction * static_cast<double>(nbhd_k)) < 1)
    throw std::invalid_argument("ConvLayerConfig: mc_fraction * k < 1");
}

ConvLayerState ConvLayerState::make(const ConvLayerConfig& cfg,
                                    std::size_t pair_dim, std::mt19937_64& rng,
                                    bool zero_last) {
  cfg.validate();
  std::vector<std::size_t> widths;
  widths.push_back(pair_dim);
  for (std::size_t h : cfg.kernel_hidden) widths.push_back(h);
  widths.push_back(cfg.out_channels * cfg.in_channels);
  ConvLayerState s{cfg, nn::Mlp::make(widths, rng, zero_last)};
  return s;
}

void ConvLayerState::collect_params(
    const std::string& prefix,
    std::vector<std::pair<std::string, nn::Tensor*>>& out) {
  kernel.collect_params(prefix + ".kernel", out);
}

std::size_t pair_feature_dim(GroupId g, std::size_t n) {
  switch (g) {
    case GroupId::SO2:
      return 3;  // relative angle + both radii
    case GroupId::SO3:
      return 3;  // position angle + both radii
    case GroupId::Tn:
      return n + 2;
  }
  throw std::logic_error("pair_feature_dim: bad group id");
}

namespace {

// Feature-independent per-point cache for fast pairwise geometry.
struct PointCache {
  GroupId g;
  std::size_t dim = 0;
  std::vector<double> angle;   // SO2
  std::vector<double> dir;     // SO3, unit position directions (zero at origin)
  std::vector<double> trans;   // Tn
  std::vector<double> orbit;

  explicit PointCache(const LiftedCloud& cloud) {
    g = cloud.group_id;
    const std::size_t n = cloud.size();
    orbit.resize(n);
    for (std::size_t i = 0; i < n; ++i) orbit[i] = cloud.points[i].orbit;
    switch (g) {
      case GroupId::SO2:
        angle.resize(n);
        for (std::size_t i = 0; i < n; ++i) angle[i] = cloud.points[i].elem.data[0];
        break;
      case GroupId::SO3: {
        dir.assign(n * 3, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          const auto x = group::act(cloud.points[i].elem,
                                    lift::origin_of(cloud.points[i].orbit,
                                                    GroupId::SO3, 3));
          const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
          if (r > 0.0)
            for (int d = 0; d < 3; ++d) dir[i * 3 + d] = x[d] / r;
        }
        break;
      }
      case GroupId::Tn: {
        dim = cloud.points.empty() ? 0 : cloud.points[0].elem.data.size();
        trans.resize(n * dim);
        for (std::size_t i = 0; i < n; ++i)
          std::copy(cloud.points[i].elem.data.begin(),
                    cloud.points[i].elem.data.end(), trans.begin() + i * dim);
        break;
      }
    }
  }

  // angle between lifted positions, the coset (quotient) distance on S^2
  double so3_angle(std::size_t u, std::size_t v) const {
    const double* a = dir.data() + u * 3;
    const double* b = dir.data() + v * 3;
    const double dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    const double cx = a[1] * b[2] - a[2] * b[1];
    const double cy = a[2] * b[0] - a[0] * b[2];
    const double cz = a[0] * b[1] - a[1] * b[0];
    const double cr = std::sqrt(cx * cx + cy * cy + cz * cz);
    return std::atan2(cr, dot);
  }

  double group_dist(std::size_t u, std::size_t v) const {
    switch (g) {
      case GroupId::SO2:
        return std::fabs(group::wrap_angle(angle[v] - angle[u]));
      case GroupId::SO3:
        return so3_angle(u, v);
      case GroupId::Tn: {
        double s = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
          const double diff = trans[v * dim + d] - trans[u * dim + d];
          s += diff * diff;
        }
        return std::sqrt(s);
      }
    }
    return 0.0;
  }

  double dist(std::size_t u, std::size_t v, double lambda) const {
    const double dg = group_dist(u, v);
    const double dq = orbit[u] - orbit[v];
    return std::sqrt(dg * dg + lambda * dq * dq);
  }

  // pair coordinates for kernel input: relative position of v seen from u
  void pair_into(std::size_t u, std::size_t v, double* out) const {
    switch (g) {
      case GroupId::SO2:
        out[0] = group::wrap_angle(angle[u] - angle[v]);
        out[1] = orbit[u];
        out[2] = orbit[v];
        break;
      case GroupId::SO3:
        out[0] = so3_angle(u, v);
        out[1] = orbit[u];
        out[2] = orbit[v];
        break;
      case GroupId::Tn:
        for (std::size_t d = 0; d < dim; ++d)
          out[d] = trans[u * dim + d] - trans[v * dim + d];
        out[dim] = orbit[u];
        out[dim + 1] = orbit[v];
        break;
    }
  }
};

}  // namespace

double lifted_distance(const LiftedPoint& a, const LiftedPoint& b, GroupId g,
                       double lambda) {
  LiftedCloud tmp;
  tmp.group_id = g;
  tmp.feat_dim = 1;
  tmp.points = {a, b};
  PointCache cache(tmp);
  return cache.dist(0, 1, lambda);
}

std::vector<std::size_t> neighborhood(std::size_t target_index,
                                      const LiftedCloud& cloud, std::size_t k,
                                      double lambda) {
  const std::size_t n = cloud.size();
  if (k > n) throw std::invalid_argument("neighborhood: k exceeds point count");
  if (target_index >= n) throw std::invalid_argument("neighborhood: bad target");
  PointCache cache(cloud);
  std::vector<std::pair<double, std::size_t>> d;
  d.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == target_index) continue;
    d.emplace_back(cache.dist(target_index, j, lambda), j);
  }
  std::partial_sort(d.begin(), d.begin() + (k - 1), d.end());
  std::vector<std::size_t> idx;
  idx.reserve(k);
  idx.push_back(target_index);
  for (std::size_t j = 0; j + 1 < k; ++j) idx.push_back(d[j].second);
  std::sort(idx.begin(), idx.end());
  return idx;
}

Geometry Geometry::build(const LiftedCloud& cloud, std::size_t k, double lambda) {
  const std::size_t n = cloud.size();
  if (n == 0) throw std::invalid_argument("Geometry: empty cloud");
  if (k > n) throw std::invalid_argument("Geometry: k exceeds point count");
  PointCache cache(cloud);
  Geometry geo;
  geo.n = n;
  geo.k = k;
  geo.pair_dim = pair_feature_dim(cloud.group_id, cache.dim ? cache.dim : 3);
  geo.nbr.resize(n * k);
  kernels::knn_brute_force(
      n, k, [&](std::size_t i, std::size_t j) { return cache.dist(i, j, lambda); },
      geo.nbr.data());
  geo.pair.resize(n * k * geo.pair_dim);
  kernels::detail::par_for(n, [&](std::size_t i) {
    for (std::size_t s = 0; s < k; ++s)
      cache.pair_into(i, geo.nbr[i * k + s],
                      geo.pair.data() + (i * k + s) * geo.pair_dim);
  });
  return geo;
}

ConvPlan ConvPlan::make(const Geometry& geo, double mc_fraction,
                        std::uint64_t mc_seed) {
  ConvPlan plan;
  if (mc_fraction <= 0.0 || mc_fraction > 1.0)
    throw std::invalid_argument("ConvPlan: mc_fraction in (0, 1]");
  plan.offsets.resize(geo.n + 1, 0);
  if (mc_fraction >= 1.0) {
    plan.sel = geo.nbr;
    plan.pair_rows.resize(geo.n * geo.k);
    std::iota(plan.pair_rows.begin(), plan.pair_rows.end(), 0);
    for (std::size_t i = 0; i <= geo.n; ++i) plan.offsets[i] = i * geo.k;
    return plan;
  }
  const std::size_t take = std::max<std::size_t>(
      1, static_cast<std::size_t>(mc_fraction * static_cast<double>(geo.k) + 1e-12));
  plan.sel.reserve(geo.n * take);
  plan.pair_rows.reserve(geo.n * take);
  std::vector<std::size_t> pos(geo.k);
  for (std::size_t i = 0; i < geo.n; ++i) {
    // per-target stream so the draw only depends on (seed, target)
    std::mt19937_64 rng(mc_seed ^ (0x9E3779B97F4A7C15ULL * (i + 1)));
    std::iota(pos.begin(), pos.end(), 0);
    for (std::size_t j = 0; j < take; ++j) {
      std::uniform_int_distribution<std::size_t> pick(j, geo.k - 1);
      std::swap(pos[j], pos[pick(rng)]);
    }
    std::sort(pos.begin(), pos.begin() + take);
    for (std::size_t j = 0; j < take; ++j) {
      plan.sel.push_back(geo.nbr[i * geo.k + pos[j]]);
      plan.pair_rows.push_back(i * geo.k + pos[j]);
    }
    plan.offsets[i + 1] = plan.sel.size();
  }
  return plan;
}

nn::Var conv_apply(nn::Tape& tape, ConvLayerState& layer, const Geometry& geo,
                   const ConvPlan& plan, nn::Var features) {
  const nn::Tensor& f = tape.value(features);
  if (f.cols() != layer.config.in_channels)
    throw std::invalid_argument("conv_apply: feature channels mismatch");
  const std::size_t rows = plan.sel.size();
  nn::Tensor pairs = nn::Tensor::zeros({rows, geo.pair_dim});
  for (std::size_t p = 0; p < rows; ++p)
    std::copy_n(geo.pair.data() + plan.pair_rows[p] * geo.pair_dim, geo.pair_dim,
                pairs.data.data() + p * geo.pair_dim);
  nn::Var w = layer.kernel.apply(tape, tape.constant(std::move(pairs)));
  nn::Var fn = tape.gather_rows(features, plan.sel);
  nn::Var y = tape.block_matvec(w, fn, layer.config.out_channels);
  return tape.segment_mean(y, plan.offsets);
}

nn::Var residual_apply(nn::Tape& tape, ConvLayerState& conv1,
                       ConvLayerState& conv2, const Geometry& geo,
                       const ConvPlan& plan1, const ConvPlan& plan2,
                       nn::Var features) {
  nn::Var h = conv_apply(tape, conv1, geo, plan1, features);
  h = tape.swish(h);
  h = conv_apply(tape, conv2, geo, plan2, h);
  return tape.add(features, h);
}

namespace {
LiftedCloud with_features(const LiftedCloud& cloud, const nn::Tensor& f) {
  LiftedCloud out = cloud;
  out.set_features(f.data, f.cols());
  return out;
}
}  // namespace

LiftedCloud conv_forward(ConvLayerState& layer, const LiftedCloud& cloud,
                         std::uint64_t mc_seed) {
  const Geometry geo =
      Geometry::build(cloud, layer.config.nbhd_k, layer.config.lambda_orbit);
  const ConvPlan plan = ConvPlan::make(geo, layer.config.mc_fraction, mc_seed);
  nn::Tape tape;
  nn::Tensor f = nn::Tensor::from({cloud.size(), cloud.feat_dim},
                                  cloud.features_matrix());
  nn::Var out = conv_apply(tape, layer, geo, plan, tape.leaf(f));
  return with_features(cloud, tape.value(out));
}

LiftedCloud residual_block(const LiftedCloud& cloud, ConvLayerState& conv1,
                           ConvLayerState& conv2, std::uint64_t mc_seed) {
  if (conv1.config.out_channels != conv2.config.in_channels ||
      conv2.config.out_channels != conv1.config.in_channels ||
      cloud.feat_dim != conv1.config.in_channels)
    throw std::invalid_argument("residual_block: channel chain mismatch");
  const Geometry geo =
      Geometry::build(cloud, conv1.config.nbhd_k, conv1.config.lambda_orbit);
  const ConvPlan plan1 = ConvPlan::make(geo, conv1.config.mc_fraction, mc_seed);
  const ConvPlan plan2 =
      ConvPlan::make(geo, conv2.config.mc_fraction, mc_seed + 1);
  nn::Tape tape;
  nn::Tensor f = nn::Tensor::from({cloud.size(), cloud.feat_dim},
                                  cloud.features_matrix());
  nn::Var out =
      residual_apply(tape, conv1, conv2, geo, plan1, plan2, tape.leaf(f));
  return with_features(cloud, tape.value(out));
}

LiftedCloud subsample(const LiftedCloud& cloud, std::size_t m,
                      std::uint64_t seed) {
  const std::size_t n = cloud.size();
  if (m > n) throw std::invalid_argument("subsample: m exceeds point count");
  if (m == n) return cloud;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t j = 0; j < m; ++j) {
    std::uniform_int_distribution<std::size_t> pick(j, n - 1);
    std::swap(idx[j], idx[pick(rng)]);
  }
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  LiftedCloud out;
  out.group_id = cloud.group_id;
  out.feat_dim = cloud.feat_dim;
  out.points.reserve(m);
  for (std::size_t i : idx) out.points.push_back(cloud.points[i]);
  return out;
}

}  // namespace gigp::lieconv
