#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gigp/config.hpp"
#include "gigp/data.hpp"
#include "gigp/lieconv.hpp"
#include "gigp/mlp.hpp"
#include "gigp/pooling.hpp"

namespace gigp::harness {

// lift -> embed -> residual LieConv blocks -> pooling -> head
struct Model {
  ExperimentConfig cfg;
  std::size_t feat_in = 1;
  std::size_t out_dim = 1;
  nn::Mlp embed;  // feat_in -> channels, linear
  std::vector<std::pair<lieconv::ConvLayerState, lieconv::ConvLayerState>> blocks;
  pooling::GigpLayer gigp;  // present only for Pooling::Gigp
  nn::Mlp head;
  // serialized alongside parameters so eval can rebuild the exact model
  nn::Tensor gigp_sigma = nn::Tensor::scalar(1.0);
  nn::Tensor norm_mean = nn::Tensor::scalar(0.0);
  nn::Tensor norm_std = nn::Tensor::scalar(1.0);

  // anchors come from the training-split orbit radii via init_anchors
  static Model build(const ExperimentConfig& cfg, std::size_t feat_in,
                     std::size_t out_dim,
                     const std::vector<double>& orbit_sample);

  // output row vector [1 x out_dim]
  nn::Var forward(nn::Tape& tape, const lift::RawPointCloud& cloud,
                  std::uint64_t mc_seed = 0);
  std::vector<double> predict(const lift::RawPointCloud& cloud,
                              std::uint64_t mc_seed = 0);

  // trainable parameters; anchors included only when cfg.train_anchors
  std::vector<std::pair<std::string, nn::Tensor*>> params();
  // every tensor that belongs in a checkpoint (adds anchors, norm stats)
  std::vector<std::pair<std::string, nn::Tensor*>> state_tensors();
  std::size_t param_count();

  void save(const std::string& path);
  void load(const std::string& path);
};

std::size_t head_out_dim(const ExperimentConfig& cfg);

}  // namespace gigp::harness
