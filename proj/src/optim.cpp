#include "xlalign/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace xlalign {

double lr_at(const LrSchedule& schedule, long step) {
    if (step < 0 || step > schedule.total_steps) {
        throw std::out_of_range("lr_at: step " + std::to_string(step) +
                                " outside [0, " + std::to_string(schedule.total_steps) + "]");
    }
    if (step < schedule.warmup_steps) {
        return schedule.peak_rate * static_cast<double>(step) /
               static_cast<double>(schedule.warmup_steps);
    }
    const long decay_span = schedule.total_steps - schedule.warmup_steps;
    if (decay_span == 0) {
        return schedule.floor_rate;
    }
    const double frac = static_cast<double>(step - schedule.warmup_steps) /
                        static_cast<double>(decay_span);
    return schedule.peak_rate + (schedule.floor_rate - schedule.peak_rate) * frac;
}

AdamState AdamState::init(const ParamVector& params, double beta1, double beta2, double eps) {
    AdamState s;
    s.m = ParamVector::zeros_like(params);
    s.v = ParamVector::zeros_like(params);
    s.beta1 = beta1;
    s.beta2 = beta2;
    s.eps = eps;
    return s;
}

void adam_step(AdamState& state, ParamVector& params, const ParamVector& grads, double rate) {
    if (!params.same_structure(grads) || !params.same_structure(state.m)) {
        throw std::invalid_argument("adam_step: parameter/gradient structure mismatch");
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

    auto p = params.begin();
    auto g = grads.begin();
    auto m = state.m.begin();
    auto v = state.v.begin();
    for (; p != params.end(); ++p, ++g, ++m, ++v) {
        double* pd = p->second.data();
        const double* gd = g->second.data();
        double* md = m->second.data();
        double* vd = v->second.data();
        const std::size_t n = p->second.size();
        for (std::size_t k = 0; k < n; ++k) {
            md[k] = state.beta1 * md[k] + (1.0 - state.beta1) * gd[k];
            vd[k] = state.beta2 * vd[k] + (1.0 - state.beta2) * gd[k] * gd[k];
            const double mhat = md[k] / bc1;
            const double vhat = vd[k] / bc2;
            pd[k] -= rate * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

} // namespace xlalign
