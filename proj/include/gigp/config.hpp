#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gigp/group.hpp"

namespace gigp::harness {

enum class Task { RotDigits, SynthInvariant, XyzRegression };
enum class Pooling { Mean, Gigp, CoordDebug };

// Flat key = value experiment configuration. Unknown keys are rejected.
struct ExperimentConfig {
  Task task = Task::SynthInvariant;
  group::GroupId group = group::GroupId::SO2;
  Pooling pooling = Pooling::Gigp;

  std::size_t channels = 16;
  std::size_t blocks = 1;
  std::size_t nbhd_k = 8;
  double mc_fraction = 1.0;
  std::vector<std::size_t> kernel_hidden = {16};
  std::vector<std::size_t> phi_hidden = {16};
  std::vector<std::size_t> head_hidden = {};
  std::size_t anchors_m = 8;
  double sigma_override = 0.0;  // 0 = derive from data via init_anchors
  double lambda_orbit = 1.0;
  bool train_anchors = false;

  double lr = 0.003;
  std::size_t batch = 32;
  std::size_t epochs = 30;
  std::uint64_t seed = 0;
  double val_fraction = 0.1;
  int threads = 0;       // 0: leave the OpenMP default
  bool parallel = true;  // false: serial reference kernels

  // synth task
  std::size_t n_train = 2000;
  std::size_t n_test = 500;
  std::size_t n_points = 16;
  std::string synth_path;  // optional JSONL; generated in memory when empty

  // digits task
  std::string train_images, train_labels, test_images, test_labels;
  double img_threshold = 0.3;
  std::size_t img_max_points = 32;
  std::uint64_t rotation_seed = 7;
  std::size_t digits_train_limit = 0;  // 0 = all
  std::size_t digits_test_limit = 0;

  // xyz task
  std::string xyz_dir, xyz_targets;
  bool recenter = true;  // applies to xyz clouds

  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_string(const std::string& text);
  std::string echo() const;  // round-trippable key = value dump
  void validate() const;

  std::size_t spatial_dim() const {
    return group == group::GroupId::SO3 ? 3 : 2;
  }
};

// low-level parser: one key = value per line, '#' starts a comment
std::map<std::string, std::string> parse_kv(const std::string& text);

}  // namespace gigp::harness
