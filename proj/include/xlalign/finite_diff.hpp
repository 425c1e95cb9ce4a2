#pragma once

#include <functional>

#include "xlalign/param_vector.hpp"

namespace xlalign {

/// Central-difference gradient (f(x + h e_k) - f(x - h e_k)) / 2h per
/// coordinate, in the flattening order of x. Test oracle for every analytic
/// gradient in the project. Throws NumericError when f returns a non-finite
/// value and std::invalid_argument when h <= 0.
ParamVector finite_diff_gradient(const std::function<double(const ParamVector&)>& f,
                                 const ParamVector& x, double h);

/// max_k |analytic_k - numeric_k| / max(1, |analytic_k|, |numeric_k|).
double max_relative_error(const ParamVector& analytic, const ParamVector& numeric);

} // namespace xlalign
