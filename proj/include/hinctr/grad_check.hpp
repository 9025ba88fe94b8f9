#pragma once
// Central-difference gradient checker. Independent of the tape: it only
// re-evaluates a scalar loss closure under coordinate perturbations and
// compares against gradients already stored in Parameter::grad.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "hinctr/tensor.hpp"

namespace hinctr {

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst_param;
  size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// For every coordinate of every parameter: numeric = (f(+eps) - f(-eps)) / 2eps,
// relative error |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
// `loss` must be a pure function of the current parameter values.
inline GradCheckResult grad_check(const std::function<double()>& loss,
                                  const std::vector<Parameter*>& params,
                                  double eps) {
  if (!(eps > 0.0)) throw NumericError("grad_check eps must be > 0");
  GradCheckResult res;
  for (Parameter* p : params) {
    for (size_t i = 0; i < p->value.size(); ++i) {
      double keep = p->value[i];
      p->value[i] = keep + eps;
      double up = loss();
      p->value[i] = keep - eps;
      double down = loss();
      p->value[i] = keep;
      double numeric = (up - down) / (2.0 * eps);
      double analytic = p->grad[i];
      double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      double rel = std::abs(analytic - numeric) / denom;
      if (rel > res.max_rel_err) {
        res.max_rel_err = rel;
        res.worst_param = p->name;
        res.worst_index = i;
        res.worst_analytic = analytic;
        res.worst_numeric = numeric;
      }
    }
  }
  return res;
}

}  // namespace hinctr
