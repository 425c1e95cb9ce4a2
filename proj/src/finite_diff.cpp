#include "xlalign/finite_diff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xlalign/errors.hpp"

namespace xlalign {

ParamVector finite_diff_gradient(const std::function<double(const ParamVector&)>& f,
                                 const ParamVector& x, double h) {
    if (h <= 0.0) {
        throw std::invalid_argument("finite_diff_gradient: h must be positive");
    }
    ParamVector grad = ParamVector::zeros_like(x);
    std::vector<double> flat = x.flatten();
    std::vector<double> gflat(flat.size(), 0.0);
    ParamVector probe = x;
    for (std::size_t k = 0; k < flat.size(); ++k) {
        const double saved = flat[k];
        flat[k] = saved + h;
        probe.assign_flat(flat);
        const double fp = f(probe);
        flat[k] = saved - h;
        probe.assign_flat(flat);
        const double fm = f(probe);
        flat[k] = saved;
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw NumericError("finite_diff_gradient: non-finite function value");
        }
        gflat[k] = (fp - fm) / (2.0 * h);
    }
    grad.assign_flat(gflat);
    return grad;
}

double max_relative_error(const ParamVector& analytic, const ParamVector& numeric) {
    const std::vector<double> a = analytic.flatten();
    const std::vector<double> n = numeric.flatten();
    if (a.size() != n.size()) {
        throw std::invalid_argument("max_relative_error: size mismatch");
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double denom = std::max({1.0, std::fabs(a[k]), std::fabs(n[k])});
        worst = std::max(worst, std::fabs(a[k] - n[k]) / denom);
    }
    return worst;
}

} // namespace xlalign
