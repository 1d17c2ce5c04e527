#include "gigp/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gigp::pooling {

GigpLayer GigpLayer::make(std::vector<double> anchor_coords, double sigma,
                          std::size_t feat_dim,
                          const std::vector<std::size_t>& phi_hidden,
                          std::mt19937_64& rng) {
  if (anchor_coords.empty()) throw std::invalid_argument("GigpLayer: M >= 1");
  if (sigma <= 0.0) throw std::invalid_argument("GigpLayer: sigma > 0");
  for (std::size_t i = 0; i + 1 < anchor_coords.size(); ++i)
    if (!(anchor_coords[i] < anchor_coords[i + 1]))
      throw std::invalid_argument("GigpLayer: anchors must ascend, distinct");
  GigpLayer layer;
  layer.sigma = sigma;
  layer.anchors = nn::Tensor::row(std::move(anchor_coords));
  layer.w = nn::Tensor::full({layer.anchors.numel()}, 1.0);
  layer.c = nn::Tensor::scalar(1.0);
  layer.alpha = nn::Tensor::scalar(0.0);
  std::vector<std::size_t> widths;
  widths.push_back(feat_dim + 1);
  for (std::size_t h : phi_hidden) widths.push_back(h);
  widths.push_back(feat_dim);
  layer.phi = nn::Mlp::make(widths, rng);
  layer.w.set_requires_grad(true);
  layer.c.set_requires_grad(true);
  layer.alpha.set_requires_grad(true);
  return layer;
}

nn::Var GigpLayer::apply(nn::Tape& tape, nn::Var features,
                         const std::vector<double>& orbits) {
  const nn::Tensor& f = tape.value(features);
  const std::size_t n = f.rows();
  const std::size_t m = n_anchors();
  if (orbits.size() != n)
    throw std::invalid_argument("gigp: orbit count != feature rows");
  if (f.cols() != feat_dim())
    throw std::invalid_argument("gigp: feature dim != phi width");

  nn::Var q_col = tape.constant(nn::Tensor::from({n, 1}, orbits));
  nn::Var ones_row = tape.constant(nn::Tensor::full({1, m}, 1.0));
  nn::Var ones_col = tape.constant(nn::Tensor::full({n, 1}, 1.0));
  nn::Var anchors_row = tape.leaf(anchors);
  // d[i][m] = q_i - anchor_m, then a gaussian-kernel softmax over anchors
  nn::Var d = tape.sub(tape.matmul(q_col, ones_row),
                       tape.matmul(ones_col, anchors_row));
  nn::Var logits = tape.scale(tape.mul(d, d), -1.0 / (2.0 * sigma * sigma));
  nn::Var assign = tape.softmax_rows(logits);

  // s_m = sum_i A[i][m] f_i, the soft per-orbit aggregate
  nn::Var s = tape.matmul(tape.transpose(assign), features);
  nn::Var mean_branch = tape.scale(s, 1.0 / static_cast<double>(n));
  nn::Var phi_in = tape.concat_cols(s, tape.transpose(anchors_row));
  nn::Var learned = tape.scale_by(phi.apply(tape, phi_in), tape.leaf(alpha));
  nn::Var phi_out = tape.add(mean_branch, learned);
  nn::Var pooled = tape.matmul(tape.leaf(w), phi_out);
  return tape.scale_by(pooled, tape.leaf(c));
}

void GigpLayer::collect_params(
    const std::string& prefix,
    std::vector<std::pair<std::string, nn::Tensor*>>& out,
    bool include_anchors) {
  out.emplace_back(prefix + ".w", &w);
  out.emplace_back(prefix + ".alpha", &alpha);
  out.emplace_back(prefix + ".c", &c);
  phi.collect_params(prefix + ".phi", out);
  if (include_anchors) out.emplace_back(prefix + ".anchors", &anchors);
}

std::vector<double> assign_orbits(const std::vector<double>& orbits,
                                  const std::vector<double>& anchors,
                                  double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("assign_orbits: sigma > 0");
  const std::size_t n = orbits.size(), m = anchors.size();
  std::vector<double> a(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = a.data() + i * m;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      const double diff = orbits[i] - anchors[j];
      row[j] = -diff * diff / (2.0 * sigma * sigma);
      mx = std::max(mx, row[j]);
    }
    double z = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      row[j] = std::exp(row[j] - mx);
      z += row[j];
    }
    for (std::size_t j = 0; j < m; ++j) row[j] /= z;
  }
  return a;
}

void init_as_mean_pool(GigpLayer& layer) {
  layer.alpha.data[0] = 0.0;
  std::fill(layer.w.data.begin(), layer.w.data.end(), 1.0);
  layer.c.data[0] = 1.0;
}

std::pair<std::vector<double>, double> init_anchors(
    const std::vector<double>& orbits_sample, std::size_t m) {
  if (orbits_sample.empty() || m < 1)
    throw std::invalid_argument("init_anchors: nonempty sample, m >= 1");
  std::vector<double> sorted = orbits_sample;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  std::vector<double> anchors(m);
  for (std::size_t j = 0; j < m; ++j) {
    // midpoint of the j-th of m equal-mass bins
    const double p = (static_cast<double>(j) + 0.5) / static_cast<double>(m);
    const double pos = p * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    anchors[j] = sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
  }
  // degenerate samples can collapse quantiles; keep anchors strictly ascending
  for (std::size_t j = 1; j < m; ++j)
    anchors[j] = std::max(anchors[j], anchors[j - 1] + 1e-9);

  double sigma = 1e-3;
  if (m > 1) {
    std::vector<double> gap(m);
    for (std::size_t j = 0; j < m; ++j) {
      double g = std::numeric_limits<double>::infinity();
      if (j > 0) g = std::min(g, anchors[j] - anchors[j - 1]);
      if (j + 1 < m) g = std::min(g, anchors[j + 1] - anchors[j]);
      gap[j] = g;
    }
    std::nth_element(gap.begin(), gap.begin() + m / 2, gap.end());
    sigma = std::max(gap[m / 2], 1e-3);
  }
  return {std::move(anchors), sigma};
}

std::vector<double> gigp_forward(GigpLayer& layer,
                                 const lift::LiftedCloud& cloud) {
  const std::size_t n = cloud.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cloud.points[a].orbit < cloud.points[b].orbit;
  });
  const std::size_t d = cloud.feat_dim;
  std::vector<double> feats(n * d);
  std::vector<double> orbits(n);
  for (std::size_t i = 0; i < n; ++i) {
    orbits[i] = cloud.points[order[i]].orbit;
    std::copy(cloud.points[order[i]].feature.begin(),
              cloud.points[order[i]].feature.end(), feats.begin() + i * d);
  }
  nn::Tape tape;
  nn::Tensor f = nn::Tensor::from({n, d}, std::move(feats));
  nn::Var out = layer.apply(tape, tape.leaf(f), orbits);
  return tape.value(out).data;
}

}  // namespace gigp::pooling
