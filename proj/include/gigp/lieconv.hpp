#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "gigp/lift.hpp"
#include "gigp/mlp.hpp"
#include "gigp/tape.hpp"

namespace gigp::lieconv {

struct ConvLayerConfig {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t nbhd_k = 8;
  double mc_fraction = 1.0;  // fraction of the neighborhood sampled per pass
  std::vector<std::size_t> kernel_hidden = {16};
  double lambda_orbit = 1.0;  // weight of the orbit gap in the point metric

  void validate() const;
};

struct ConvLayerState {
  ConvLayerConfig config;
  nn::Mlp kernel;  // pair geometry -> out_channels * in_channels

  static ConvLayerState make(const ConvLayerConfig& cfg, std::size_t pair_dim,
                             std::mt19937_64& rng, bool zero_last = false);
  void collect_params(const std::string& prefix,
                      std::vector<std::pair<std::string, nn::Tensor*>>& out);
};

// Kernel input dimension for a group acting on R^n: the relative-position
// coordinates plus the two orbit radii. SO2 uses the scalar log of the
// relative rotation and Tn the relative translation. SO3 lifts are coset
// representatives (the stabilizer of the origin is a circle), so the only
// pair coordinate that is well defined on cosets is the angle between the
// lifted positions; the kernel consumes that angle.
std::size_t pair_feature_dim(group::GroupId g, std::size_t n);

// Distance between lifted points: sqrt(dG^2 + lambda * (q_u - q_v)^2) with dG
// the log-norm group distance (SO2, Tn) or its quotient by the stabilizer
// (SO3, the angle between positions).
double lifted_distance(const lift::LiftedPoint& a, const lift::LiftedPoint& b,
                       group::GroupId g, double lambda);

// k nearest under lifted_distance, ties broken by ascending index, always
// including the target; returned ascending by index.
std::vector<std::size_t> neighborhood(std::size_t target_index,
                                      const lift::LiftedCloud& cloud,
                                      std::size_t k, double lambda = 1.0);

// Everything about a cloud that does not depend on features or parameters:
// neighbor lists and the kernel's pair-geometry rows. Layers sharing k and
// lambda can share one Geometry.
struct Geometry {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t pair_dim = 0;
  std::vector<std::size_t> nbr;  // n*k, ascending within each row
  std::vector<double> pair;      // (n*k) x pair_dim

  static Geometry build(const lift::LiftedCloud& cloud, std::size_t k,
                        double lambda);
};

// Monte-Carlo selection of neighborhood rows for one forward pass.
struct ConvPlan {
  std::vector<std::size_t> sel;       // selected neighbor point indices
  std::vector<std::size_t> pair_rows; // matching rows into Geometry::pair
  std::vector<std::size_t> offsets;   // per-target segment offsets, n+1

  static ConvPlan make(const Geometry& geo, double mc_fraction,
                       std::uint64_t mc_seed);
};

// h(u) = mean over selected v of K(pair(v,u)) f(v); geometry passes through.
nn::Var conv_apply(nn::Tape& tape, ConvLayerState& layer, const Geometry& geo,
                   const ConvPlan& plan, nn::Var features);

// f + conv2(swish(conv1(f)))
nn::Var residual_apply(nn::Tape& tape, ConvLayerState& conv1,
                       ConvLayerState& conv2, const Geometry& geo,
                       const ConvPlan& plan1, const ConvPlan& plan2,
                       nn::Var features);

// Convenience single-cloud forward passes used by tests and diagnostics.
lift::LiftedCloud conv_forward(ConvLayerState& layer,
                               const lift::LiftedCloud& cloud,
                               std::uint64_t mc_seed = 0);
lift::LiftedCloud residual_block(const lift::LiftedCloud& cloud,
                                 ConvLayerState& conv1, ConvLayerState& conv2,
                                 std::uint64_t mc_seed = 0);

// uniform subset of size m without replacement, deterministic per seed
lift::LiftedCloud subsample(const lift::LiftedCloud& cloud, std::size_t m,
                            std::uint64_t seed);

}  // namespace gigp::lieconv
