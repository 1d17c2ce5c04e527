#include "gigp/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "gigp/adam.hpp"

namespace gigp::harness {

std::string metrics_to_json(const MetricsRecord& r) {
  nlohmann::json j;
  j["epoch"] = r.epoch;
  j["train_loss"] = r.train_loss;
  j["eval_metric"] = r.eval_metric;
  j["wall_time_s"] = r.wall_time_s;
  j["seed"] = r.seed;
  return j.dump();
}

namespace {

// cross entropy for classification, squared error otherwise
nn::Var loss_var(Model& model, nn::Tape& tape, const Sample& sample,
                 bool classification, std::uint64_t mc_seed) {
  nn::Var out = model.forward(tape, sample.cloud, mc_seed);
  if (classification) {
    nn::Var logp = tape.log_softmax_rows(out);
    nn::Tensor onehot = nn::Tensor::zeros({1, model.out_dim});
    onehot.data[static_cast<std::size_t>(sample.label)] = 1.0;
    return tape.scale(
        tape.sum(tape.mul(logp, tape.constant(std::move(onehot)))), -1.0);
  }
  nn::Var target = tape.constant(nn::Tensor::from({1, 1}, {sample.target}));
  nn::Var diff = tape.sub(out, target);
  return tape.mean(tape.mul(diff, diff));
}

// builds the tape, backpropagates scaled loss, returns the unscaled loss
double train_step_sample(Model& model, const Sample& sample, bool classification,
                         double inv_batch, std::uint64_t mc_seed) {
  nn::Tape tape;
  nn::Var loss = loss_var(model, tape, sample, classification, mc_seed);
  const double value = tape.value(loss).data[0];
  tape.backward(tape.scale(loss, inv_batch));
  return value;
}

double param_norm(Model& model) {
  double s = 0.0;
  for (auto& [name, t] : model.params())
    for (double v : t->data) s += v * v;
  return std::sqrt(s);
}

}  // namespace

double eval_model(Model& model, const Dataset& data) {
  if (data.samples.empty()) return 0.0;
  if (data.classification) {
    std::size_t correct = 0;
    for (const auto& s : data.samples) {
      const auto out = model.predict(s.cloud);
      const std::size_t arg = static_cast<std::size_t>(
          std::max_element(out.begin(), out.end()) - out.begin());
      if (static_cast<int>(arg) == s.label) ++correct;
    }
    const double acc =
        static_cast<double>(correct) / static_cast<double>(data.samples.size());
    return 100.0 * (1.0 - acc);  // error %
  }
  const bool mae = model.cfg.task == Task::XyzRegression;
  double acc = 0.0;
  for (const auto& s : data.samples) {
    const double pred = model.predict(s.cloud)[0];
    const double d = pred - s.target;
    acc += mae ? std::fabs(d) : d * d;
  }
  return acc / static_cast<double>(data.samples.size());
}

TrainResult train_model(Model& model, const Dataset& train, const Dataset& test,
                        const std::optional<std::string>& out_dir) {
  const ExperimentConfig& cfg = model.cfg;
  const std::size_t n = train.samples.size();
  if (n == 0) throw std::invalid_argument("train_model: empty training set");

  const std::size_t n_val = std::min(
      n > 1 ? n - 1 : static_cast<std::size_t>(0),
      static_cast<std::size_t>(static_cast<double>(n) * cfg.val_fraction));
  const std::size_t n_fit = n - n_val;

  Dataset val;
  val.classification = train.classification;
  val.n_classes = train.n_classes;
  for (std::size_t i = n_fit; i < n; ++i) val.samples.push_back(train.samples[i]);

  model.norm_mean.data[0] = train.norm_mean;
  model.norm_std.data[0] = train.norm_std;

  auto named = model.params();
  std::vector<nn::Tensor*> params;
  for (auto& [name, t] : named) params.push_back(t);
  nn::AdamState adam = nn::make_adam(params, cfg.lr);

  TrainResult result;
  result.param_count = model.param_count();
  result.best_val_metric = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best_params;
  for (auto* t : params) best_params.push_back(t->data);

  std::vector<std::size_t> order(n_fit);
  std::iota(order.begin(), order.end(), 0);

  const auto t0 = std::chrono::steady_clock::now();
  std::uint64_t step = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::mt19937_64 shuffle_rng(cfg.seed * 1000003ULL + epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n_fit; start += cfg.batch) {
      const std::size_t stop = std::min(start + cfg.batch, n_fit);
      const double inv_batch = 1.0 / static_cast<double>(stop - start);
      for (auto* t : params) t->zero_grad();
      double batch_loss = 0.0;
      for (std::size_t i = start; i < stop; ++i) {
        batch_loss += train_step_sample(model, train.samples[order[i]],
                                        train.classification, inv_batch,
                                        cfg.seed + 7919ULL * (step++));
      }
      batch_loss *= inv_batch;
      if (!std::isfinite(batch_loss)) {
        std::ostringstream os;
        os << "training diverged: non-finite loss at epoch " << epoch
           << ", batch " << (start / cfg.batch) << ", parameter norm "
           << param_norm(model);
        throw TrainDiverged(os.str());
      }
      loss_sum += batch_loss * static_cast<double>(stop - start);
      nn::adam_step(adam, params);
    }

    MetricsRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(n_fit);
    rec.eval_metric = eval_model(model, val.samples.empty() ? train : val);
    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    rec.seed = cfg.seed;
    result.metrics.push_back(rec);

    if (rec.eval_metric < result.best_val_metric) {
      result.best_val_metric = rec.eval_metric;
      result.best_epoch = epoch;
      for (std::size_t i = 0; i < params.size(); ++i)
        best_params[i] = params[i]->data;
    }
  }

  for (std::size_t i = 0; i < params.size(); ++i)
    params[i]->data = best_params[i];

  result.test_metric = eval_model(model, test);

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    std::ofstream metrics(*out_dir + "/metrics.jsonl");
    for (const auto& r : result.metrics) metrics << metrics_to_json(r) << "\n";
    model.save(*out_dir + "/checkpoint.bin");
    std::ofstream cfg_out(*out_dir + "/config.txt");
    cfg_out << cfg.echo();
  }
  return result;
}

std::string InvarianceReport::summary() const {
  std::ostringstream os;
  os << (pass() ? "PASS" : "FAIL") << ": max deviation " << max_deviation
     << " over " << n_samples << " samples x " << n_transforms
     << " transforms (tolerance " << tolerance << ", " << failures
     << " failures)";
  return os.str();
}

lift::RawPointCloud transform_cloud(const lift::RawPointCloud& cloud,
                                    const group::GroupElement& g) {
  lift::RawPointCloud out = cloud;
  for (std::size_t i = 0; i < cloud.n_points; ++i) {
    const auto p = group::act(g, cloud.coord_vec(i));
    for (std::size_t d = 0; d < cloud.dim; ++d) out.coords[i * cloud.dim + d] = p[d];
  }
  return out;
}

InvarianceReport check_invariance(Model& model, const Dataset& data,
                                  std::size_t n_transforms, std::uint64_t seed,
                                  double tolerance, std::size_t max_samples) {
  InvarianceReport rep;
  rep.tolerance = tolerance;
  rep.n_transforms = n_transforms;
  std::mt19937_64 rng(seed);
  const std::size_t n = std::min(max_samples, data.samples.size());
  rep.n_samples = n;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& cloud = data.samples[i].cloud;
    const auto base = model.predict(cloud);
    for (std::size_t t = 0; t < n_transforms; ++t) {
      const auto g = group::random_element(model.cfg.group, cloud.dim, rng);
      const auto moved = model.predict(transform_cloud(cloud, g));
      double dev = 0.0;
      for (std::size_t j = 0; j < base.size(); ++j)
        dev = std::max(dev, std::fabs(moved[j] - base[j]));
      rep.max_deviation = std::max(rep.max_deviation, dev);
      if (dev >= tolerance) ++rep.failures;
    }
  }
  return rep;
}

}  // namespace gigp::harness
