#include "gigp/model.hpp"

#include <cmath>
#include <stdexcept>

#include "gigp/checkpoint.hpp"

namespace gigp::harness {

std::size_t head_out_dim(const ExperimentConfig& cfg) {
  return cfg.task == Task::RotDigits ? 10 : 1;
}

namespace {
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return a ^ (0x9E3779B97F4A7C15ULL * (b + 1));
}
}  // namespace

Model Model::build(const ExperimentConfig& cfg, std::size_t feat_in,
                   std::size_t out_dim,
                   const std::vector<double>& orbit_sample) {
  cfg.validate();
  Model m;
  m.cfg = cfg;
  m.feat_in = feat_in;
  m.out_dim = out_dim;

  // Shared components draw from one stream so the mean and gigp variants of
  // the same seed start from identical conv stacks and heads.
  std::mt19937_64 rng(cfg.seed);
  m.embed = nn::Mlp::make({feat_in, cfg.channels}, rng);

  lieconv::ConvLayerConfig conv_cfg;
  conv_cfg.in_channels = cfg.channels;
  conv_cfg.out_channels = cfg.channels;
  conv_cfg.nbhd_k = cfg.nbhd_k;
  conv_cfg.mc_fraction = cfg.mc_fraction;
  conv_cfg.kernel_hidden = cfg.kernel_hidden;
  conv_cfg.lambda_orbit = cfg.lambda_orbit;
  const std::size_t pair_dim =
      lieconv::pair_feature_dim(cfg.group, cfg.spatial_dim());
  for (std::size_t b = 0; b < cfg.blocks; ++b) {
    auto conv1 = lieconv::ConvLayerState::make(conv_cfg, pair_dim, rng, false);
    auto conv2 = lieconv::ConvLayerState::make(conv_cfg, pair_dim, rng, true);
    m.blocks.emplace_back(std::move(conv1), std::move(conv2));
  }

  std::size_t head_in = cfg.channels;
  if (cfg.pooling == Pooling::CoordDebug) head_in += cfg.spatial_dim();
  std::vector<std::size_t> head_widths;
  head_widths.push_back(head_in);
  for (std::size_t h : cfg.head_hidden) head_widths.push_back(h);
  head_widths.push_back(out_dim);
  m.head = nn::Mlp::make(head_widths, rng);

  if (cfg.pooling == Pooling::Gigp) {
    if (orbit_sample.empty())
      throw std::invalid_argument("Model::build: gigp needs an orbit sample");
    auto [anchors, sigma] = pooling::init_anchors(orbit_sample, cfg.anchors_m);
    if (cfg.sigma_override > 0.0) sigma = cfg.sigma_override;
    std::mt19937_64 gigp_rng(mix_seed(cfg.seed, 0x61677));
    m.gigp = pooling::GigpLayer::make(anchors, sigma, cfg.channels,
                                      cfg.phi_hidden, gigp_rng);
    pooling::init_as_mean_pool(m.gigp);
    if (cfg.train_anchors) m.gigp.anchors.set_requires_grad(true);
    m.gigp_sigma.data[0] = sigma;
  }
  return m;
}

nn::Var Model::forward(nn::Tape& tape, const lift::RawPointCloud& cloud,
                       std::uint64_t mc_seed) {
  const lift::LiftedCloud lifted = lift::lift(cloud, cfg.group);
  const std::size_t n = lifted.size();
  const std::size_t k_eff = std::min(cfg.nbhd_k, n);
  const lieconv::Geometry geo =
      lieconv::Geometry::build(lifted, k_eff, cfg.lambda_orbit);

  nn::Tensor f0 = nn::Tensor::from({n, feat_in}, lifted.features_matrix());
  nn::Var h = embed.apply(tape, tape.constant(std::move(f0)));

  std::size_t layer_idx = 0;
  for (auto& [conv1, conv2] : blocks) {
    const auto plan1 = lieconv::ConvPlan::make(geo, cfg.mc_fraction,
                                               mix_seed(mc_seed, layer_idx++));
    const auto plan2 = lieconv::ConvPlan::make(geo, cfg.mc_fraction,
                                               mix_seed(mc_seed, layer_idx++));
    h = lieconv::residual_apply(tape, conv1, conv2, geo, plan1, plan2, h);
  }

  nn::Var pooled;
  switch (cfg.pooling) {
    case Pooling::Mean: {
      nn::Var avg = tape.constant(
          nn::Tensor::full({1, n}, 1.0 / static_cast<double>(n)));
      pooled = tape.matmul(avg, h);
      break;
    }
    case Pooling::Gigp: {
      std::vector<double> orbits(n);
      for (std::size_t i = 0; i < n; ++i) orbits[i] = lifted.points[i].orbit;
      pooled = gigp.apply(tape, h, orbits);
      break;
    }
    case Pooling::CoordDebug: {
      // diagnostic non-invariant pooling: leaks raw coordinates of the first
      // point so invariance checks have a live negative control
      nn::Var avg = tape.constant(
          nn::Tensor::full({1, n}, 1.0 / static_cast<double>(n)));
      nn::Var meanpool = tape.matmul(avg, h);
      nn::Var coords = tape.constant(
          nn::Tensor::from({1, cloud.dim}, cloud.coord_vec(0)));
      pooled = tape.concat_cols(meanpool, coords);
      break;
    }
  }
  return head.apply(tape, pooled);
}

std::vector<double> Model::predict(const lift::RawPointCloud& cloud,
                                   std::uint64_t mc_seed) {
  nn::Tape tape;
  return tape.value(forward(tape, cloud, mc_seed)).data;
}

std::vector<std::pair<std::string, nn::Tensor*>> Model::params() {
  std::vector<std::pair<std::string, nn::Tensor*>> out;
  embed.collect_params("embed", out);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    blocks[b].first.collect_params("block" + std::to_string(b) + ".conv1", out);
    blocks[b].second.collect_params("block" + std::to_string(b) + ".conv2", out);
  }
  if (cfg.pooling == Pooling::Gigp)
    gigp.collect_params("gigp", out, cfg.train_anchors);
  head.collect_params("head", out);
  return out;
}

std::vector<std::pair<std::string, nn::Tensor*>> Model::state_tensors() {
  auto out = params();
  if (cfg.pooling == Pooling::Gigp && !cfg.train_anchors)
    out.emplace_back("gigp.anchors", &gigp.anchors);
  if (cfg.pooling == Pooling::Gigp)
    out.emplace_back("gigp.sigma", &gigp_sigma);
  out.emplace_back("norm.mean", &norm_mean);
  out.emplace_back("norm.std", &norm_std);
  return out;
}

std::size_t Model::param_count() {
  std::size_t n = 0;
  for (auto& [name, t] : params()) n += t->numel();
  if (cfg.pooling == Pooling::Gigp && !cfg.train_anchors)
    n += gigp.anchors.numel();
  return n;
}

void Model::save(const std::string& path) {
  std::vector<std::pair<std::string, const nn::Tensor*>> tensors;
  for (auto& [name, t] : state_tensors()) tensors.emplace_back(name, t);
  save_checkpoint(path, tensors);
}

void Model::load(const std::string& path) {
  auto loaded = load_checkpoint(path);
  for (auto& [name, t] : state_tensors()) {
    auto it = loaded.find(name);
    if (it == loaded.end())
      throw std::runtime_error("checkpoint: missing tensor " + name);
    if (it->second.shape != t->shape)
      throw std::runtime_error("checkpoint: shape mismatch for " + name +
                               ": file " + nn::shape_str(it->second) +
                               " model " + nn::shape_str(*t));
    t->data = it->second.data;
    loaded.erase(it);
  }
  if (!loaded.empty())
    throw std::runtime_error("checkpoint: unexpected tensor " +
                             loaded.begin()->first);
  if (cfg.pooling == Pooling::Gigp) gigp.sigma = gigp_sigma.data[0];
}

}  // namespace gigp::harness
