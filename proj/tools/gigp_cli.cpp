#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "gigp/checks.hpp"
#include "gigp/data.hpp"
#include "gigp/kernels.hpp"
#include "gigp/model.hpp"
#include "gigp/train.hpp"

namespace fs = std::filesystem;
using namespace gigp;
using namespace gigp::harness;

namespace {

void apply_runtime_settings(const ExperimentConfig& cfg) {
  kernels::set_mode(cfg.parallel ? kernels::Mode::OpenMP : kernels::Mode::Serial);
  kernels::set_threads(cfg.threads);
}

Model build_from_config(const ExperimentConfig& cfg, const SplitDatasets& data) {
  return Model::build(cfg, data.train.samples[0].cloud.feat_dim,
                      head_out_dim(cfg),
                      orbit_radius_sample(data.train, cfg.group));
}

// checkpoint CLI flows rebuild the model from the config written next to the
// checkpoint unless --config points elsewhere
ExperimentConfig config_for_checkpoint(const std::string& checkpoint,
                                       const std::string& config_path) {
  if (!config_path.empty()) return ExperimentConfig::from_file(config_path);
  const fs::path sibling = fs::path(checkpoint).parent_path() / "config.txt";
  if (!fs::exists(sibling))
    throw std::runtime_error(
        "no --config given and " + sibling.string() + " does not exist");
  return ExperimentConfig::from_file(sibling.string());
}

void print_metrics_table(const TrainResult& result) {
  std::cout << "epoch  train_loss     eval_metric    wall_s\n";
  for (const auto& r : result.metrics)
    std::cout << std::setw(5) << r.epoch << "  " << std::setw(12)
              << std::setprecision(6) << r.train_loss << "  " << std::setw(12)
              << r.eval_metric << "  " << std::setw(8) << std::setprecision(1)
              << std::fixed << r.wall_time_s << "\n"
              << std::defaultfloat;
  std::cout << "best epoch " << result.best_epoch << " (val "
            << result.best_val_metric << "), test metric "
            << result.test_metric << ", " << result.param_count
            << " parameters\n";
}

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed,
              const std::string& out_dir) {
  ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
  if (seed) cfg.seed = *seed;
  apply_runtime_settings(cfg);
  const SplitDatasets data = make_datasets(cfg);
  Model model = build_from_config(cfg, data);
  const TrainResult result =
      train_model(model, data.train, data.test, out_dir);
  print_metrics_table(result);
  std::cout << "wrote " << out_dir << "/checkpoint.bin, metrics.jsonl, config.txt\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& data_path,
             const std::string& config_path) {
  ExperimentConfig cfg = config_for_checkpoint(checkpoint, config_path);
  if (!data_path.empty()) cfg.synth_path = data_path;
  apply_runtime_settings(cfg);
  const SplitDatasets data = make_datasets(cfg);
  Model model = build_from_config(cfg, data);
  model.load(checkpoint);
  const double metric = eval_model(model, data.test);
  std::cout << "samples=" << data.test.samples.size() << "\n";
  std::cout << "eval_metric=" << std::setprecision(10) << metric << "\n";
  return 0;
}

int cmd_check_invariance(const std::string& checkpoint, std::size_t n_transforms,
                         const std::string& config_path, std::uint64_t seed,
                         double tolerance) {
  ExperimentConfig cfg = config_for_checkpoint(checkpoint, config_path);
  cfg.mc_fraction = 1.0;  // the exact check needs the full neighborhood
  apply_runtime_settings(cfg);
  const SplitDatasets data = make_datasets(cfg);
  Model model = build_from_config(cfg, data);
  model.load(checkpoint);
  const InvarianceReport rep =
      check_invariance(model, data.test, n_transforms, seed, tolerance);
  std::cout << rep.summary() << "\n";
  std::cout << "pass=" << (rep.pass() ? 1 : 0) << "\n"
            << "max_deviation=" << rep.max_deviation << "\n"
            << "samples=" << rep.n_samples << "\n"
            << "transforms=" << rep.n_transforms << "\n"
            << "tolerance=" << rep.tolerance << "\n";
  return rep.pass() ? 0 : 1;
}

int cmd_grad_check(double tol) {
  const auto prim = checks::grad_check_primitives(tol);
  for (const auto& item : prim.items)
    std::cout << "primitive " << item.name << " rel_err=" << item.max_rel_err
              << (item.pass ? " ok" : " FAIL") << "\n";
  const auto e2e = checks::grad_check_gigp_end_to_end(tol);
  for (const auto& item : e2e.items)
    std::cout << "end-to-end " << item.name << " rel_err=" << item.max_rel_err
              << (item.pass ? " ok" : " FAIL") << "\n";
  const bool pass = prim.pass() && e2e.pass();
  std::cout << "pass=" << (pass ? 1 : 0) << "\n"
            << "tol=" << tol << "\n"
            << "worst=" << std::max(prim.worst(), e2e.worst()) << "\n";
  return pass ? 0 : 1;
}

int cmd_check_expressivity(std::size_t max_elems) {
  const auto sweep = checks::expressivity_sweep(max_elems, 3, 3, 3, 12345);
  for (const auto& line : sweep.failure_lines) std::cout << line << "\n";
  std::cout << (sweep.pass() ? "PASS" : "FAIL") << ": " << sweep.domains
            << " domains, " << sweep.functions << " invariant functions, "
            << sweep.assignments << " assignments checked\n";
  std::cout << "pass=" << (sweep.pass() ? 1 : 0) << "\n"
            << "domains=" << sweep.domains << "\n"
            << "functions=" << sweep.functions << "\n"
            << "assignments=" << sweep.assignments << "\n"
            << "collisions=" << sweep.collisions << "\n"
            << "failures=" << sweep.failures << "\n";
  return sweep.pass() ? 0 : 1;
}

int cmd_gen_synth(const std::string& out, std::size_t n_train, std::size_t n_test,
                  std::size_t n_points, std::size_t dim, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.task = Task::SynthInvariant;
  cfg.group = dim == 3 ? group::GroupId::SO3 : group::GroupId::SO2;
  cfg.n_train = n_train;
  cfg.n_test = n_test;
  cfg.n_points = n_points;
  cfg.seed = seed;
  const SplitDatasets data = make_synth_datasets(cfg);
  write_synth_jsonl(out, data.train, data.test);
  std::cout << "wrote " << (n_train + n_test) << " records (train first) to "
            << out << "\n";
  return 0;
}

int cmd_gen_digits(const std::string& out_dir, std::size_t n_train,
                   std::size_t n_test, std::uint64_t seed) {
  fs::create_directories(out_dir);
  const auto train_labels = gen_digit_labels(n_train, seed);
  const auto test_labels = gen_digit_labels(n_test, seed + 1);
  write_idx_images(out_dir + "/train-images.idx",
                   gen_digit_images(train_labels, seed + 2));
  write_idx_labels(out_dir + "/train-labels.idx", train_labels);
  write_idx_images(out_dir + "/test-images.idx",
                   gen_digit_images(test_labels, seed + 3));
  write_idx_labels(out_dir + "/test-labels.idx", test_labels);
  std::cout << "wrote " << n_train << "/" << n_test
            << " glyph images and labels under " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"group invariant global pooling: training and verification"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "run_out", checkpoint, data_path;
  std::optional<std::uint64_t> seed_override;
  std::uint64_t seed = 0;
  std::size_t n_transforms = 10, max_elems = 6;
  std::size_t n_train = 2000, n_test = 500, n_points = 16, dim = 2;
  double tol = 1e-4, tolerance = 1e-6;

  auto* train = app.add_subcommand("train", "train a model from a config file");
  train->add_option("--config", config_path, "key = value config file")
      ->required();
  train->add_option("--seed", seed_override, "override the config seed");
  train->add_option("--out", out_dir, "output directory");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  eval->add_option("--checkpoint", checkpoint)->required();
  eval->add_option("--data", data_path, "synth JSONL overriding the config path");
  eval->add_option("--config", config_path, "config (default: sibling config.txt)");

  auto* inv = app.add_subcommand("check-invariance",
                                 "report max |model(gx) - model(x)|");
  inv->add_option("--checkpoint", checkpoint)->required();
  inv->add_option("--n-transforms", n_transforms);
  inv->add_option("--config", config_path);
  inv->add_option("--seed", seed);
  inv->add_option("--tolerance", tolerance);

  auto* gc = app.add_subcommand("grad-check",
                                "finite-difference check of every primitive "
                                "and the pooling layer end to end");
  gc->add_option("--tol", tol);

  auto* expr = app.add_subcommand("check-expressivity",
                                  "exhaustive orbit-encoding injectivity check");
  expr->add_option("--max-elems", max_elems);

  auto* gs = app.add_subcommand("gen-synth", "generate the radial-shell dataset");
  gs->add_option("--out", out_dir)->required();
  gs->add_option("--n-train", n_train);
  gs->add_option("--n-test", n_test);
  gs->add_option("--points", n_points);
  gs->add_option("--dim", dim)->check(CLI::IsMember({2, 3}));
  gs->add_option("--seed", seed);

  auto* gd = app.add_subcommand("gen-digits",
                                "generate glyph digit IDX files (MNIST layout)");
  gd->add_option("--out", out_dir)->required();
  gd->add_option("--n-train", n_train);
  gd->add_option("--n-test", n_test);
  gd->add_option("--seed", seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(config_path, seed_override, out_dir);
    if (eval->parsed()) return cmd_eval(checkpoint, data_path, config_path);
    if (inv->parsed())
      return cmd_check_invariance(checkpoint, n_transforms, config_path, seed,
                                  tolerance);
    if (gc->parsed()) return cmd_grad_check(tol);
    if (expr->parsed()) return cmd_check_expressivity(max_elems);
    if (gs->parsed())
      return cmd_gen_synth(out_dir, n_train, n_test, n_points, dim, seed);
    if (gd->parsed()) return cmd_gen_digits(out_dir, n_train, n_test, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
