// Central finite-difference gradient checker. The analytic gradient of every
// loss in the toolkit is verified against this on small random instances.

#ifndef MIAUG_GRADCHECK_HPP
#define MIAUG_GRADCHECK_HPP

#include <functional>

#include "miaug/common.hpp"

namespace miaug {

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::size_t worst_index = 0;
  bool finite = true;  // false if the loss went non-finite at some probe point

  bool ok(double tol) const { return finite && max_rel_err < tol; }
};

// Compares analytic_grad against the symmetric three-point difference of
// loss_fn at params. Relative error per coordinate is
// |analytic - numeric| / max(1, |analytic|, |numeric|).
GradCheckResult grad_check(const std::function<double(const Vec&)>& loss_fn,
                           const Vec& params, const Vec& analytic_grad,
                           double step = 1e-5);

}  // namespace miaug

#endif  // MIAUG_GRADCHECK_HPP
