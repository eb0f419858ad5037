#include "trajfuse/network.hpp"

#include <cmath>
#include <stdexcept>

#include "trajfuse/errors.hpp"
#include "trajfuse/motion.hpp"

namespace trajfuse {

void TSTConfig::validate() const {
    if (c_in < 1 || c_out < 1) throw ShapeError("TST block needs c_in >= 1 and c_out >= 1");
    if (hidden < 1) throw ShapeError("TST block needs hidden width >= 1");
    if (depth < 1) throw ShapeError("TST block needs depth >= 1");
    if (dropout < 0 || dropout >= 1) throw ShapeError("dropout rate must lie in [0, 1)");
}

void ModelConfig::validate() const {
    if (joints < 1) throw ShapeError("model needs joints >= 1");
    if (t_in < 2) throw ShapeError("model needs t_in >= 2 for the velocity stream");
    if (t_out < 1) throw ShapeError("model needs t_out >= 1");
    if (hidden < 1) throw ShapeError("model needs hidden width >= 1");
    if (depth < 1) throw ShapeError("model needs depth >= 1");
    if (dropout < 0 || dropout >= 1) throw ShapeError("dropout rate must lie in [0, 1)");
    if (slope < 0 || slope >= 1) throw ShapeError("leaky slope must lie in [0, 1)");
}

std::vector<SkipSpec> skip_topology(int depth) {
    if (depth < 1) throw ShapeError("skip_topology: depth must be >= 1");
    std::vector<int> boundaries{0};
    for (int b = 5; b < depth; b += 5) boundaries.push_back(b);
    std::vector<int> destinations(boundaries.begin() + 1, boundaries.end());
    destinations.push_back(depth);
    std::vector<SkipSpec> skips;
    for (int dst : destinations) {
        for (int src : boundaries) {
            if (src < dst) skips.push_back({dst, src});
        }
    }
    return skips;
}

namespace {

int boundary_channels(const TSTConfig& cfg, int boundary) {
    if (boundary == 0) return cfg.c_in;
    if (boundary == cfg.depth) return cfg.c_out;
    return cfg.hidden;
}

Tensor uniform_kernel(const std::vector<int>& shape, Rng& rng) {
    // Fan-in-scaled uniform init: bound sqrt(1/fan_in) over in_channels * kh * kw.
    const double fan_in = static_cast<double>(shape[1]) * shape[2] * shape[3];
    const double bound = std::sqrt(1.0 / fan_in);
    Tensor t = zeros(shape);
    for (int i = 0; i < t.numel(); ++i) t[i] = uniform_in(rng, -bound, bound);
    return t;
}

std::vector<int> layer_kernel_shape(const TSTConfig& cfg, int layer) {
    const int in = layer == 1 ? cfg.c_in : cfg.hidden;
    const int out = layer == cfg.depth ? cfg.c_out : cfg.hidden;
    return {out, in, 3, 3};
}

TSTParams build_tst(const TSTConfig& cfg, Rng* rng) {
    cfg.validate();
    TSTParams p;
    p.cfg = cfg;
    for (int layer = 1; layer <= cfg.depth; ++layer) {
        const std::vector<int> ks = layer_kernel_shape(cfg, layer);
        ConvLayer cl;
        cl.kernel = rng ? uniform_kernel(ks, *rng) : zeros(ks);
        cl.bias = zeros({ks[0]});
        p.layers.push_back(std::move(cl));
    }
    for (const SkipSpec& s : skip_topology(cfg.depth)) {
        const std::vector<int> ks{boundary_channels(cfg, s.dst), boundary_channels(cfg, s.src),
                                  1, 1};
        ConvLayer cl;
        cl.kernel = rng ? uniform_kernel(ks, *rng) : zeros(ks);
        cl.bias = zeros({ks[0]});
        p.skips.push_back(std::move(cl));
    }
    return p;
}

TSTConfig stream_config(const ModelConfig& cfg, int c_in, int c_out) {
    TSTConfig t;
    t.c_in = c_in;
    t.c_out = c_out;
    t.hidden = cfg.hidden;
    t.depth = cfg.depth;
    t.slope = cfg.slope;
    t.dropout = cfg.dropout;
    return t;
}

TwoStreamModelParams build_params(const ModelConfig& cfg, Rng* rng) {
    cfg.validate();
    TwoStreamModelParams params;
    params.cfg = cfg;
    params.p_tst = build_tst(stream_config(cfg, cfg.t_in, cfg.t_out), rng);
    params.v_tst = build_tst(stream_config(cfg, cfg.t_in - 1, cfg.t_out), rng);
    for (int i = 0; i < cfg.t_out; ++i) {
        Selector s;
        s.kernel = rng ? uniform_kernel({1, 2, 1, 1}, *rng) : zeros({1, 2, 1, 1});
        s.bias = zeros({1});
        params.selectors.push_back(std::move(s));
    }
    params.reinf_tst = build_tst(stream_config(cfg, cfg.t_out, cfg.t_out), rng);
    return params;
}

void visit_tst(TSTParams& p, const std::string& prefix,
               const std::function<void(const std::string&, Tensor&)>& fn) {
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        const std::string base = prefix + ".layer" + std::to_string(i + 1);
        fn(base + ".kernel", p.layers[i].kernel);
        fn(base + ".bias", p.layers[i].bias);
    }
    const std::vector<SkipSpec> topo = skip_topology(p.cfg.depth);
    for (std::size_t i = 0; i < p.skips.size(); ++i) {
        const std::string base = prefix + ".skip" + std::to_string(topo[i].dst) + "_" +
                                 std::to_string(topo[i].src);
        fn(base + ".kernel", p.skips[i].kernel);
        fn(base + ".bias", p.skips[i].bias);
    }
}

}  // namespace

TSTParams init_tst(const TSTConfig& cfg, Rng& rng) { return build_tst(cfg, &rng); }

TSTParams zero_tst(const TSTConfig& cfg) { return build_tst(cfg, nullptr); }

TwoStreamModelParams init_params(const ModelConfig& cfg) {
    Rng rng(cfg.init_seed);
    return build_params(cfg, &rng);
}

TwoStreamModelParams zero_params(const ModelConfig& cfg) { return build_params(cfg, nullptr); }

void for_each_tensor(TwoStreamModelParams& params,
                     const std::function<void(const std::string&, Tensor&)>& fn) {
    visit_tst(params.p_tst, "p_tst", fn);
    visit_tst(params.v_tst, "v_tst", fn);
    for (std::size_t i = 0; i < params.selectors.size(); ++i) {
        const std::string base = "selector" + std::to_string(i);
        fn(base + ".kernel", params.selectors[i].kernel);
        fn(base + ".bias", params.selectors[i].bias);
    }
    visit_tst(params.reinf_tst, "reinf_tst", fn);
}

void for_each_tensor(const TwoStreamModelParams& params,
                     const std::function<void(const std::string&, const Tensor&)>& fn) {
    for_each_tensor(const_cast<TwoStreamModelParams&>(params),
                    [&fn](const std::string& name, Tensor& t) { fn(name, t); });
}

Tensor tst_forward(const Tensor& x, const TSTParams& p, bool training, Rng* rng) {
    const TSTConfig& cfg = p.cfg;
    cfg.validate();
    if (x.rank() != 3 || x.dim(0) != cfg.c_in) {
        throw ShapeError("TST input must be [" + std::to_string(cfg.c_in) + ", N, 3], got " +
                         shape_str(x.shape));
    }
    if (static_cast<int>(p.layers.size()) != cfg.depth) {
        throw ShapeError("TST has " + std::to_string(p.layers.size()) + " layers, config says " +
                         std::to_string(cfg.depth));
    }
    const std::vector<SkipSpec> topo = skip_topology(cfg.depth);
    if (p.skips.size() != topo.size()) {
        throw ShapeError("TST has " + std::to_string(p.skips.size()) + " skips, topology needs " +
                         std::to_string(topo.size()));
    }
    if (training && cfg.dropout > 0 && !rng) {
        throw std::invalid_argument("tst_forward: training with dropout needs an rng");
    }

    std::vector<Tensor> boundary_values{x};
    std::vector<int> boundary_idx{0};
    Tensor h = x;
    std::size_t next_skip = 0;
    for (int layer = 1; layer <= cfg.depth; ++layer) {
        Tensor z = conv2d(h, p.layers[static_cast<std::size_t>(layer - 1)].kernel,
                          p.layers[static_cast<std::size_t>(layer - 1)].bias, 1, 1);
        while (next_skip < topo.size() && topo[next_skip].dst == layer) {
            const SkipSpec& s = topo[next_skip];
            const Tensor* src = nullptr;
            for (std::size_t b = 0; b < boundary_idx.size(); ++b) {
                if (boundary_idx[b] == s.src) src = &boundary_values[b];
            }
            if (!src) throw ShapeError("skip source boundary not yet computed");
            z = z + conv2d(*src, p.skips[next_skip].kernel, p.skips[next_skip].bias, 1, 0);
            ++next_skip;
        }
        if (layer == cfg.depth) {
            h = z;  // final layer is linear: regression output must be sign-unrestricted
        } else {
            h = leaky_relu(z, cfg.slope);
            // dropout(x, rate, false, ...) is the identity, so inference skips the call
            if (training && cfg.dropout > 0) h = dropout(h, cfg.dropout, true, *rng);
            if (layer % 5 == 0) {
                boundary_values.push_back(h);
                boundary_idx.push_back(layer);
            }
        }
    }
    return h;
}

Tensor pstream_forward(const Tensor& positions, const TSTParams& p, bool training, Rng* rng) {
    return tst_forward(positions, p, training, rng);
}

Tensor vstream_forward(const Tensor& positions, const TSTParams& p, bool training, Rng* rng) {
    if (positions.rank() != 3 || positions.dim(0) < 2) {
        throw ShapeError("velocity stream needs at least 2 input frames, got " +
                         shape_str(positions.shape));
    }
    Tensor velocities = channel_diff(positions);
    Tensor pred_vel = tst_forward(velocities, p, training, rng);
    Tensor anchor = slice_channels(positions, positions.dim(0) - 1, 1);
    return recover_positions(pred_vel, anchor);
}

Tensor temporal_concat_select(const Tensor& p_pred, const Tensor& v_pred,
                              const std::vector<Selector>& selectors) {
    if (!same_shape(p_pred, v_pred) || p_pred.rank() != 3) {
        throw ShapeError("fusion inputs must share a [T_out, N, 3] shape, got " +
                         shape_str(p_pred.shape) + " and " + shape_str(v_pred.shape));
    }
    const int t_out = p_pred.dim(0);
    if (static_cast<int>(selectors.size()) != t_out) {
        throw ShapeError("fusion needs one selector per predicted frame: " +
                         std::to_string(selectors.size()) + " selectors for " +
                         std::to_string(t_out) + " frames");
    }
    std::vector<Tensor> fused;
    fused.reserve(static_cast<std::size_t>(t_out));
    for (int i = 0; i < t_out; ++i) {
        Tensor cat = concat_channels({slice_channels(p_pred, i, 1), slice_channels(v_pred, i, 1)});
        fused.push_back(conv2d(cat, selectors[static_cast<std::size_t>(i)].kernel,
                               selectors[static_cast<std::size_t>(i)].bias, 1, 0));
    }
    return concat_channels(fused);
}

Tensor temporal_fusion(const Tensor& p_pred, const Tensor& v_pred,
                       const std::vector<Selector>& selectors, const TSTParams& reinf,
                       bool training, Rng* rng) {
    return tst_forward(temporal_concat_select(p_pred, v_pred, selectors), reinf, training, rng);
}

PredictionBundle model_forward(const Tensor& positions, const TwoStreamModelParams& params,
                               bool training, Rng* rng) {
    const ModelConfig& cfg = params.cfg;
    if (positions.rank() != 3 || positions.dim(0) != cfg.t_in ||
        positions.dim(1) != cfg.joints || positions.dim(2) != 3) {
        throw ShapeError("model_forward: input must be [t_in, joints, 3] matching the config");
    }
    PredictionBundle out;
    out.p_pred = pstream_forward(positions, params.p_tst, training, rng);
    out.v_pred = vstream_forward(positions, params.v_tst, training, rng);
    out.pre_reinforcement = temporal_concat_select(out.p_pred, out.v_pred, params.selectors);
    out.final = tst_forward(out.pre_reinforcement, params.reinf_tst, training, rng);
    return out;
}

}  // namespace trajfuse
