#pragma once

#include <random>
#include <utility>
#include <vector>

#include "gigp/lift.hpp"
#include "gigp/mlp.hpp"
#include "gigp/tape.hpp"

namespace gigp::pooling {

// Group Invariant Global Pooling. Points are soft-assigned to anchor orbits,
// aggregated per anchor, passed through a shared network with the orbit
// coordinate appended, weighted by learnable orbit weights and summed:
//
//   out = C * sum_m w_m * Phi_alpha(sum_i A[i][m] f_i, anchor_m)
//   Phi_alpha(s, q) = s / N + alpha * MLP(s, q)
//
// With alpha = 0, w = 1, C = 1 the layer is exactly global mean pooling,
// which is how it is initialized.
struct GigpLayer {
  nn::Tensor anchors;  // M ascending distinct orbit coordinates
  nn::Tensor w;        // M orbit weights
  nn::Tensor c;        // scalar output gain
  nn::Tensor alpha;    // scalar gate on the learned branch, 0 at init
  double sigma = 1.0;  // soft-assignment bandwidth, orbit units
  nn::Mlp phi;         // (feat_dim + 1) -> ... -> feat_dim

  static GigpLayer make(std::vector<double> anchor_coords, double sigma,
                        std::size_t feat_dim,
                        const std::vector<std::size_t>& phi_hidden,
                        std::mt19937_64& rng);

  std::size_t n_anchors() const { return anchors.numel(); }
  std::size_t feat_dim() const { return phi.out_dim(); }

  // pooled row vector, [1 x feat_dim]; orbits must be one value per feature row
  nn::Var apply(nn::Tape& tape, nn::Var features,
                const std::vector<double>& orbits);

  void collect_params(const std::string& prefix,
                      std::vector<std::pair<std::string, nn::Tensor*>>& out,
                      bool include_anchors = false);
};

// A[i][m] = softmax_m( -(q_i - anchor_m)^2 / (2 sigma^2) ); rows sum to 1
std::vector<double> assign_orbits(const std::vector<double>& orbits,
                                  const std::vector<double>& anchors,
                                  double sigma);

// alpha = 0, w = 1, C = 1: forward becomes the exact global feature mean
void init_as_mean_pool(GigpLayer& layer);

// Anchors at the M equal-mass bin midpoints of the sampled radii; sigma is
// the median nearest-anchor gap floored at 1e-3.
std::pair<std::vector<double>, double> init_anchors(
    const std::vector<double>& orbits_sample, std::size_t m);

// Convenience forward on a concrete cloud. Summation order is canonicalized
// (stable sort by orbit, then original index) so permuting the input points
// reproduces the output bitwise.
std::vector<double> gigp_forward(GigpLayer& layer,
                                 const lift::LiftedCloud& cloud);

}  // namespace gigp::pooling
