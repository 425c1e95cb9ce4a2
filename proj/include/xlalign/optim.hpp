#pragma once

#include <cstdint>

#include "xlalign/param_vector.hpp"

namespace xlalign {

/// Piecewise-linear learning-rate schedule: 0 -> peak over warmup_steps, then
/// peak -> floor over the remaining steps. With warmup_steps == 0 the rate
/// starts at peak.
struct LrSchedule {
    double peak_rate = 1e-4;
    long warmup_steps = 0;
    long total_steps = 0;
    double floor_rate = 0.0;
};

/// Rate at a step in [0, total_steps]. Throws std::out_of_range otherwise.
double lr_at(const LrSchedule& schedule, long step);

/// Adam moment accumulators shaped like the parameters they update.
struct AdamState {
    long step = 0;
    ParamVector m;
    ParamVector v;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState init(const ParamVector& params,
                          double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
};

/// One bias-corrected Adam update, in place. Deterministic: identical
/// (state, params, grads, rate) give bit-identical results.
void adam_step(AdamState& state, ParamVector& params, const ParamVector& grads, double rate);

} // namespace xlalign
