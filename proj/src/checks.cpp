#include "gigp/checks.hpp"

#include <algorithm>
#include <memory>
#include <random>

#include "gigp/model.hpp"
#include "gigp/oracle.hpp"
#include "gigp/train.hpp"

namespace gigp::checks {

namespace {

using nn::Tape;
using nn::Tensor;
using nn::Var;

void run_one(nn::GradCheckReport& report, const std::string& name,
             std::vector<Tensor*> params,
             std::function<Var(Tape&, const std::vector<Var>&)> out_builder,
             std::mt19937_64& rng, double tol) {
  for (Tensor* p : params) p->set_requires_grad(true);
  auto weights = std::make_shared<Tensor>();
  auto loss_fn = [params, out_builder, weights, &rng](bool with_backward) {
    Tape tape;
    std::vector<Var> vars;
    for (Tensor* p : params) vars.push_back(tape.leaf(*p));
    Var out = out_builder(tape, vars);
    if (weights->data.empty()) {
      *weights = Tensor(tape.value(out).shape);
      std::normal_distribution<double> d(0.0, 1.0);
      for (double& v : weights->data) v = d(rng);
    }
    Var loss = tape.sum(tape.mul(out, tape.constant(*weights)));
    const double v = tape.value(loss).data[0];
    if (with_backward) tape.backward(loss);
    return v;
  };
  std::vector<std::pair<std::string, Tensor*>> named;
  for (std::size_t i = 0; i < params.size(); ++i)
    named.emplace_back(name + (params.size() > 1 ? "#" + std::to_string(i) : ""),
                       params[i]);
  const auto one = nn::grad_check(loss_fn, named, 1e-6, tol);
  report.items.insert(report.items.end(), one.items.begin(), one.items.end());
}

Tensor randn(std::vector<std::size_t> shape, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> d(0.0, 1.0);
  for (double& v : t.data) v = d(rng);
  return t;
}

}  // namespace

nn::GradCheckReport grad_check_primitives(double tol) {
  nn::GradCheckReport report;
  report.tol = tol;
  std::mt19937_64 rng(2024);

  {
    Tensor a = randn({3, 5}, rng), b = randn({5, 4}, rng);
    run_one(report, "matmul", {&a, &b},
            [](Tape& t, const std::vector<Var>& v) { return t.matmul(v[0], v[1]); },
            rng, tol);
  }
  {
    Tensor a = randn({4, 3}, rng);
    run_one(report, "transpose", {&a},
            [](Tape& t, const std::vector<Var>& v) { return t.transpose(v[0]); },
            rng, tol);
  }
  {
    Tensor a = randn({2, 6}, rng), b = randn({2, 6}, rng);
    run_one(report, "add", {&a, &b},
            [](Tape& t, const std::vector<Var>& v) { return t.add(v[0], v[1]); },
            rng, tol);
    run_one(report, "sub", {&a, &b},
            [](Tape& t, const std::vector<Var>& v) { return t.sub(v[0], v[1]); },
            rng, tol);
    run_one(report, "mul", {&a, &b},
            [](Tape& t, const std::vector<Var>& v) { return t.mul(v[0], v[1]); },
            rng, tol);
  }
  {
    Tensor a = randn({3, 4}, rng), b = randn({4}, rng);
    run_one(report, "add_rowvec", {&a, &b},
            [](Tape& t, const std::vector<Var>& v) {
              return t.add_rowvec(v[0], v[1]);
            },
            rng, tol);
  }
  {
    Tensor a = randn({5}, rng);
    run_one(report, "scale", {&a},
            [](Tape& t, const std::vector<Var>& v) { return t.scale(v[0], 2.5); },
            rng, tol);
  }
  {
    Tensor a = randn({2, 3}, rng), s = Tensor::scalar(-0.6);
    run_one(report, "scale_by", {&a, &s},
            [](Tape& t, const std::vector<Var>& v) {
              return t.scale_by(v[0], v[1]);
            },
            rng, tol);
  }
  {
    Tensor a = randn({4, 4}, rng);
    run_one(report, "swish", {&a},
            [](Tape& t, const std::vector<Var>& v) { return t.swish(v[0]); }, rng,
            tol);
    run_one(report, "softmax", {&a},
            [](Tape& t, const std::vector<Var>& v) { return t.softmax_rows(v[0]); },
            rng, tol);
    run_one(report, "log_softmax", {&a},
            [](Tape& t, const std::vector<Var>& v) {
              return t.log_softmax_rows(v[0]);
            },
            rng, tol);
    run_one(report, "sum", {&a},
            [](Tape& t, const std::vector<Var>& v) { return t.sum(v[0]); }, rng,
            tol);
    run_one(report, "mean", {&a},
            [](Tape& t, const std::vector<Var>& v) { return t.mean(v[0]); }, rng,
            tol);
  }
  {
    Tensor a = randn({4, 3}, rng);
    const std::vector<std::size_t> idx = {2, 0, 2, 3, 1, 2};
    run_one(report, "gather", {&a},
            [idx](Tape& t, const std::vector<Var>& v) {
              return t.gather_rows(v[0], idx);
            },
            rng, tol);
  }
  {
    Tensor a = randn({3, 2}, rng), b = randn({3, 4}, rng);
    run_one(report, "concat_cols", {&a, &b},
            [](Tape& t, const std::vector<Var>& v) {
              return t.concat_cols(v[0], v[1]);
            },
            rng, tol);
  }
  {
    Tensor w = randn({6, 3 * 2}, rng), f = randn({6, 2}, rng);
    run_one(report, "block_matvec", {&w, &f},
            [](Tape& t, const std::vector<Var>& v) {
              return t.block_matvec(v[0], v[1], 3);
            },
            rng, tol);
  }
  {
    Tensor x = randn({7, 3}, rng);
    const std::vector<std::size_t> offsets = {0, 2, 2, 5, 7};
    run_one(report, "segment_mean", {&x},
            [offsets](Tape& t, const std::vector<Var>& v) {
              return t.segment_mean(v[0], offsets);
            },
            rng, tol);
  }
  return report;
}

nn::GradCheckReport grad_check_gigp_end_to_end(double tol) {
  harness::ExperimentConfig cfg;
  cfg.task = harness::Task::SynthInvariant;
  cfg.group = group::GroupId::SO2;
  cfg.pooling = harness::Pooling::Gigp;
  cfg.channels = 4;
  cfg.blocks = 1;
  cfg.nbhd_k = 4;
  cfg.kernel_hidden = {6};
  cfg.phi_hidden = {6};
  cfg.anchors_m = 3;
  cfg.seed = 99;

  std::mt19937_64 rng(424242);
  lift::RawPointCloud cloud;
  cloud.n_points = 10;
  cloud.dim = 2;
  cloud.feat_dim = 1;
  std::normal_distribution<double> d(0.0, 1.0);
  cloud.coords.resize(20);
  for (double& v : cloud.coords) v = d(rng);
  cloud.features.assign(10, 1.0);

  std::vector<double> radii;
  for (std::size_t i = 0; i < 10; ++i)
    radii.push_back(lift::orbit_of(cloud.coord_vec(i), cfg.group));
  harness::Model model = harness::Model::build(cfg, 1, 1, radii);

  // wake the learned branch up so the orbit network carries real gradient
  model.gigp.alpha.data[0] = 0.7;
  model.gigp.c.data[0] = 1.2;
  for (double& v : model.gigp.w.data) v = d(rng);
  model.gigp.anchors.set_requires_grad(true);

  std::vector<std::pair<std::string, nn::Tensor*>> params;
  model.gigp.collect_params("gigp", params, /*include_anchors=*/true);

  harness::Sample sample;
  sample.cloud = cloud;
  sample.target = 0.8;
  auto loss_fn = [&](bool with_backward) {
    Tape tape;
    Var out = model.forward(tape, sample.cloud);
    Var target = tape.constant(Tensor::from({1, 1}, {sample.target}));
    Var diff = tape.sub(out, target);
    Var loss = tape.mean(tape.mul(diff, diff));
    const double v = tape.value(loss).data[0];
    if (with_backward) tape.backward(loss);
    return v;
  };
  auto report = nn::grad_check(loss_fn, params, 1e-6, tol);
  report.tol = tol;
  return report;
}

namespace {

void partitions_rec(std::size_t remaining, std::size_t max_part,
                    std::size_t max_parts, std::vector<std::size_t>& stack,
                    std::vector<std::vector<std::size_t>>& out) {
  if (remaining == 0) {
    out.push_back(stack);
    return;
  }
  if (stack.size() == max_parts) return;
  for (std::size_t p = std::min(remaining, max_part); p >= 1; --p) {
    stack.push_back(p);
    partitions_rec(remaining - p, p, max_parts, stack, out);
    stack.pop_back();
  }
}

}  // namespace

ExpressivitySweep expressivity_sweep(std::size_t max_elems,
                                     std::size_t max_values,
                                     std::size_t max_orbits,
                                     std::size_t random_per_domain,
                                     std::uint64_t seed) {
  ExpressivitySweep sweep;
  std::mt19937_64 rng(seed);
  for (std::size_t nx = 1; nx <= max_elems; ++nx) {
    std::vector<std::vector<std::size_t>> partitions;
    std::vector<std::size_t> stack;
    partitions_rec(nx, nx, max_orbits, stack, partitions);
    for (const auto& sizes : partitions) {
      for (std::size_t nf = 1; nf <= max_values; ++nf) {
        const auto domain = oracle::FiniteDomain::from_orbit_sizes(sizes, nf);
        ++sweep.domains;

        std::vector<std::vector<double>> tables;
        tables.push_back(
            oracle::make_invariant_table(domain, [](const auto&) { return 1.0; }));
        tables.push_back(oracle::make_invariant_table(domain, [](const auto& key) {
          // count of the first value in the first orbit
          return static_cast<double>(
              std::count(key[0].begin(), key[0].end(), std::size_t(0)));
        }));
        for (std::size_t r = 0; r < random_per_domain; ++r)
          tables.push_back(oracle::random_invariant_table(domain, rng));

        for (const auto& table : tables) {
          const auto rep = oracle::verify_expressivity(domain, table);
          ++sweep.functions;
          sweep.assignments += rep.assignments;
          sweep.classes = std::max(sweep.classes, rep.classes);
          sweep.collisions += rep.collisions;
          if (!rep.pass) {
            ++sweep.failures;
            std::string sizes_str;
            for (std::size_t s : sizes)
              sizes_str += (sizes_str.empty() ? "" : "+") + std::to_string(s);
            sweep.failure_lines.push_back("domain X=" + sizes_str + " F=" +
                                          std::to_string(nf) + ": " +
                                          rep.summary());
          }
        }
      }
    }
  }
  return sweep;
}

}  // namespace gigp::checks
