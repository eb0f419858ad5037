#include "trajfuse/adam.hpp"

#include <cmath>
#include <string>

namespace trajfuse {

void AdamHyper::validate() const {
    if (!(lr > 0)) throw NumericError("adam: lr must be > 0");
    if (!(beta1 >= 0 && beta1 < 1)) throw NumericError("adam: beta1 must be in [0, 1)");
    if (!(beta2 >= 0 && beta2 < 1)) throw NumericError("adam: beta2 must be in [0, 1)");
    if (!(eps > 0)) throw NumericError("adam: eps must be > 0");
}

AdamState make_adam_state(const Tensor& param) {
    AdamState st;
    st.m = Array::Zero(param.numel());
    st.v = Array::Zero(param.numel());
    return st;
}

void adam_step(Tensor& param, const Array& grad, AdamState& state, const AdamHyper& hyper) {
    hyper.validate();
    if (grad.size() != param.data.size() || state.m.size() != param.data.size() ||
        state.v.size() != param.data.size()) {
        throw ShapeError("adam_step: parameter/gradient/state sizes disagree for shape " +
                         shape_str(param.shape));
    }
    if (!grad.allFinite()) throw NumericError("adam_step: non-finite gradient");

    state.step += 1;
    state.m = hyper.beta1 * state.m + (1.0 - hyper.beta1) * grad;
    state.v = hyper.beta2 * state.v + (1.0 - hyper.beta2) * grad.square();
    const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.step));
    param.data -= hyper.lr * (state.m / bc1) / ((state.v / bc2).sqrt() + hyper.eps);
}

}  // namespace trajfuse
