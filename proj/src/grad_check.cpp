// SPDX-License-Identifier: Apache-2.0
#include "lgi/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lgi/errors.hpp"

namespace lgi {
namespace {

double evaluate(const std::function<Tensor()>& loss) {
  NoGradGuard no_grad;
  const double value = loss().item();
  if (!std::isfinite(value)) throw NonFiniteValue("grad_check: loss is not finite at a probe point");
  return value;
}

}  // namespace

GradCheckReport grad_check(const std::function<Tensor()>& loss, std::span<Tensor> leaves,
                           double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) {
    throw InvalidArgument("grad_check: eps must lie in [1e-7, 1e-3]");
  }
  for (Tensor& leaf : leaves) {
    if (!leaf.is_leaf() || !leaf.requires_grad()) {
      throw InvalidArgument("grad_check: every probed tensor must be a requires_grad leaf");
    }
    leaf.zero_grad();
  }

  Tape::current().clear();
  const Tensor value = loss();
  if (!std::isfinite(value.item())) throw NonFiniteValue("grad_check: loss is not finite");
  backward(value);

  std::vector<std::vector<double>> analytic;
  analytic.reserve(leaves.size());
  for (Tensor& leaf : leaves) {
    if (leaf.has_grad()) {
      analytic.emplace_back(leaf.grad().begin(), leaf.grad().end());
    } else {
      analytic.emplace_back(leaf.size(), 0.0);
    }
    leaf.zero_grad();
  }

  GradCheckReport report;
  for (std::size_t li = 0; li < leaves.size(); ++li) {
    auto data = leaves[li].mutable_data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      data[i] = saved + eps;
      const double up = evaluate(loss);
      data[i] = saved - eps;
      const double down = evaluate(loss);
      data[i] = saved;

      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[li][i];
      const double err =
          std::fabs(a - numeric) / std::max({1.0, std::fabs(a), std::fabs(numeric)});
      ++report.coords;
      if (err > report.max_rel_error || report.coords == 1) {
        report.max_rel_error = err;
        report.worst_leaf = li;
        report.worst_coord = i;
      }
    }
  }
  return report;
}

double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& point,
                  double eps) {
  Tensor x(point.shape(), std::vector<double>(point.data().begin(), point.data().end()), true);
  std::vector<Tensor> leaves{x};
  return grad_check([&] { return f(x); }, leaves, eps).max_rel_error;
}

}  // namespace lgi
