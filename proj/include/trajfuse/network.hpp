#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "trajfuse/ops.hpp"
#include "trajfuse/rng.hpp"
#include "trajfuse/tensor.hpp"

namespace trajfuse {

// One trajectory spatial-temporal block: a stack of 3x3 convolutions over the
// joints-by-coordinates plane with time as the channel axis, plus 1x1
// residual skips between every-5th-layer boundaries.
struct TSTConfig {
    int c_in = 0;
    int c_out = 0;
    int hidden = 64;
    int depth = 11;
    double slope = 0.2;
    double dropout = 0.1;
    void validate() const;
};

// A skip runs from the value at boundary `src` to the pre-activation sum of
// layer `dst`. Boundary 0 is the block input; boundary k > 0 is the
// post-activation output of layer k.
struct SkipSpec {
    int dst = 0;
    int src = 0;
};

// Boundaries are the block input plus every 5th layer below depth; each
// boundary layer and the final layer receive one skip from every earlier
// boundary. Ordered by (dst, src) ascending.
std::vector<SkipSpec> skip_topology(int depth);

struct ConvLayer {
    Tensor kernel;
    Tensor bias;
};

struct TSTParams {
    TSTConfig cfg;
    std::vector<ConvLayer> layers;  // layers[i] is layer i+1 of the stack
    std::vector<ConvLayer> skips;   // matches skip_topology(cfg.depth) order
};

// Per-timestep stream selector: 1x1 convolution from the 2 concatenated
// stream channels down to 1.
struct Selector {
    Tensor kernel;  // [1, 2, 1, 1]
    Tensor bias;    // [1]
};

struct ModelConfig {
    int joints = 22;
    int t_in = 10;
    int t_out = 10;
    int hidden = 64;
    int depth = 11;
    double slope = 0.2;
    double dropout = 0.1;
    std::uint64_t init_seed = 0;
    void validate() const;
};

struct TwoStreamModelParams {
    ModelConfig cfg;
    TSTParams p_tst;               // positions, c_in = T
    TSTParams v_tst;               // velocities, c_in = T - 1
    std::vector<Selector> selectors;  // one per predicted frame
    TSTParams reinf_tst;           // c_in = c_out = T_out
};

TSTParams init_tst(const TSTConfig& cfg, Rng& rng);
TSTParams zero_tst(const TSTConfig& cfg);
TwoStreamModelParams init_params(const ModelConfig& cfg);
TwoStreamModelParams zero_params(const ModelConfig& cfg);

// Visits every parameter tensor in the canonical checkpoint order:
// p_tst layers 1..depth (kernel, bias each), p_tst skips in topology order,
// v_tst likewise, selectors 0..T_out-1, reinf_tst likewise.
void for_each_tensor(TwoStreamModelParams& params,
                     const std::function<void(const std::string&, Tensor&)>& fn);
void for_each_tensor(const TwoStreamModelParams& params,
                     const std::function<void(const std::string&, const Tensor&)>& fn);

Tensor tst_forward(const Tensor& x, const TSTParams& p, bool training, Rng* rng = nullptr);

Tensor pstream_forward(const Tensor& positions, const TSTParams& p, bool training,
                       Rng* rng = nullptr);

// Differences the input inside the graph, predicts velocity frames, then
// accumulates them onto the last observed pose.
Tensor vstream_forward(const Tensor& positions, const TSTParams& p, bool training,
                       Rng* rng = nullptr);

// Per-timestep fusion before the reinforcement block: slice both streams at
// step i, concatenate to [2, N, 3], apply selector i.
Tensor temporal_concat_select(const Tensor& p_pred, const Tensor& v_pred,
                              const std::vector<Selector>& selectors);

Tensor temporal_fusion(const Tensor& p_pred, const Tensor& v_pred,
                       const std::vector<Selector>& selectors, const TSTParams& reinf,
                       bool training, Rng* rng = nullptr);

struct PredictionBundle {
    Tensor final;
    Tensor p_pred;
    Tensor v_pred;
    Tensor pre_reinforcement;
};

PredictionBundle model_forward(const Tensor& positions, const TwoStreamModelParams& params,
                               bool training, Rng* rng = nullptr);

}  // namespace trajfuse
