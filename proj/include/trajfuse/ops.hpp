#pragma once

#include <vector>

#include "trajfuse/rng.hpp"
#include "trajfuse/tensor.hpp"

namespace trajfuse {

/// Cross-correlation (no kernel flip) with zero padding.
/// input [C_in,H,W], kernel [C_out,C_in,kh,kw], bias [C_out] -> [C_out,H',W']
/// where H' = (H + 2*padding - kh)/stride + 1 must be a positive integer.
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, int stride,
              int padding);

/// Elementwise y = x for x >= 0, slope*x otherwise. Requires 0 <= slope < 1.
Tensor leaky_relu(const Tensor& x, double slope);

/// Inverted dropout: in training mode surviving entries are scaled by
/// 1/(1-rate); inference mode is the exact identity. The mask comes from
/// `rng`, so a fixed seed gives a fixed mask.
Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng);

/// Channel-axis concatenation of [C_i,H,W] tensors sharing H and W.
Tensor concat_channels(const std::vector<Tensor>& parts);

/// Channels [first, first+count) of x as a new [count,H,W] tensor.
Tensor slice_channels(const Tensor& x, int first, int count);

/// out[c] = x[c+1] - x[c] over the channel axis; [C,H,W] -> [C-1,H,W].
Tensor channel_diff(const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor scale(const Tensor& x, double factor);
Tensor sum(const Tensor& x);  // full reduction to a scalar

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(const Tensor& a, double s) { return scale(a, s); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }

}  // namespace trajfuse
