#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gigp/model.hpp"

namespace gigp::harness {

struct MetricsRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double eval_metric = 0.0;  // error % for classification, MSE/MAE otherwise
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
};

std::string metrics_to_json(const MetricsRecord& r);

struct TrainResult {
  std::vector<MetricsRecord> metrics;
  std::size_t best_epoch = 0;
  double best_val_metric = 0.0;
  double test_metric = 0.0;
  std::size_t param_count = 0;
};

// thrown when the loss goes non-finite
struct TrainDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Seeded deterministic training. Splits off the validation tail, tracks the
// best epoch by validation metric and restores those weights at the end.
// When out_dir is set, writes metrics.jsonl, checkpoint.bin and config.txt.
TrainResult train_model(Model& model, const Dataset& train, const Dataset& test,
                        const std::optional<std::string>& out_dir = std::nullopt);

// evaluation metric: error % (classification), MSE (synth), MAE (xyz)
double eval_model(Model& model, const Dataset& data);

struct InvarianceReport {
  double max_deviation = 0.0;
  std::size_t n_samples = 0;
  std::size_t n_transforms = 0;
  std::size_t failures = 0;  // sample/transform pairs above tolerance
  double tolerance = 1e-6;
  bool pass() const { return failures == 0; }
  std::string summary() const;
};

// max |model(g x) - model(x)| over samples and random group elements
InvarianceReport check_invariance(Model& model, const Dataset& data,
                                  std::size_t n_transforms, std::uint64_t seed,
                                  double tolerance = 1e-6,
                                  std::size_t max_samples = 50);

lift::RawPointCloud transform_cloud(const lift::RawPointCloud& cloud,
                                    const group::GroupElement& g);

}  // namespace gigp::harness
