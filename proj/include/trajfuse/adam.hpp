#pragma once

#include "trajfuse/tensor.hpp"

namespace trajfuse {

struct AdamHyper {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void validate() const;
};

/// Per-parameter optimizer state; moments share the parameter's shape.
struct AdamState {
    Array m;       // first moment
    Array v;       // second moment
    long step = 0; // increments by exactly 1 per adam_step
};

AdamState make_adam_state(const Tensor& param);

/// Bias-corrected Adam update, in place.
void adam_step(Tensor& param, const Array& grad, AdamState& state, const AdamHyper& hyper);

}  // namespace trajfuse
