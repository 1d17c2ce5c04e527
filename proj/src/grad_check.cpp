#include "gigp/grad_check.hpp"

#include <cmath>

namespace gigp::nn {

GradCheckReport grad_check(
    const std::function<double(bool with_backward)>& loss_fn,
    const std::vector<std::pair<std::string, Tensor*>>& params, double step,
    double tol) {
  GradCheckReport report;
  report.tol = tol;

  for (auto& [name, p] : params) p->zero_grad();
  loss_fn(true);

  // snapshot analytic grads before finite differencing disturbs anything
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (auto& [name, p] : params) analytic.push_back(p->grad);

  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor* p = params[pi].second;
    GradCheckItem item;
    item.name = params[pi].first;
    for (std::size_t i = 0; i < p->data.size(); ++i) {
      const double keep = p->data[i];
      p->data[i] = keep + step;
      const double lp = loss_fn(false);
      p->data[i] = keep - step;
      const double lm = loss_fn(false);
      p->data[i] = keep;
      const double fd = (lp - lm) / (2.0 * step);
      const double an = analytic[pi][i];
      const double denom = std::max({std::fabs(fd), std::fabs(an), 1.0});
      item.max_rel_err = std::max(item.max_rel_err, std::fabs(fd - an) / denom);
    }
    item.pass = item.max_rel_err < tol;
    report.items.push_back(item);
  }
  // restore analytic grads for callers that inspect them afterwards
  for (std::size_t pi = 0; pi < params.size(); ++pi)
    params[pi].second->grad = analytic[pi];
  return report;
}

}  // namespace gigp::nn
