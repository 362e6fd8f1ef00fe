#include "miaug/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace miaug {

GradCheckResult grad_check(const std::function<double(const Vec&)>& loss_fn,
                           const Vec& params, const Vec& analytic_grad, double step) {
  check(params.size() == analytic_grad.size(),
        "grad_check: params/grad length mismatch ", params.size(), " vs ",
        analytic_grad.size());
  check(step > 0.0, "grad_check: step must be positive");

  GradCheckResult result;
  Vec probe = params;
  for (std::size_t i = 0; i < params.size(); ++i) {
    probe[i] = params[i] + step;
    const double up = loss_fn(probe);
    probe[i] = params[i] - step;
    const double down = loss_fn(probe);
    probe[i] = params[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      result.finite = false;
      result.worst_index = i;
      result.max_rel_err = std::numeric_limits<double>::infinity();
      return result;
    }
    const double numeric = (up - down) / (2.0 * step);
    const double analytic = analytic_grad[i];
    const double denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
    const double rel = std::abs(analytic - numeric) / denom;
    if (rel > result.max_rel_err) {
      result.max_rel_err = rel;
      result.worst_index = i;
    }
  }
  return result;
}

}  // namespace miaug
