#include "trajfuse/ops.hpp"

#include <string>
#include <utility>

namespace trajfuse {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw ShapeError(msg);
}

void require_rank3(const Tensor& t, const char* op) {
    require(t.rank() == 3, std::string(op) + " expects a rank-3 tensor, got " + shape_str(t.shape));
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, int stride,
              int padding) {
    require_rank3(input, "conv2d");
    require(kernel.rank() == 4, "conv2d kernel must be rank 4, got " + shape_str(kernel.shape));
    require(bias.rank() == 1, "conv2d bias must be rank 1, got " + shape_str(bias.shape));
    require(stride >= 1, "conv2d stride must be >= 1");
    require(padding >= 0, "conv2d padding must be >= 0");

    const int ci_n = input.dim(0), h = input.dim(1), w = input.dim(2);
    const int co_n = kernel.dim(0), kh = kernel.dim(2), kw = kernel.dim(3);
    require(kernel.dim(1) == ci_n, "conv2d kernel expects " + std::to_string(kernel.dim(1)) +
                                       " input channels, input has " + std::to_string(ci_n));
    require(bias.dim(0) == co_n, "conv2d bias length " + std::to_string(bias.dim(0)) +
                                     " does not match " + std::to_string(co_n) + " output channels");

    const int h_span = h + 2 * padding - kh;
    const int w_span = w + 2 * padding - kw;
    require(h_span >= 0 && h_span % stride == 0 && w_span >= 0 && w_span % stride == 0,
            "conv2d output size is not a positive integer for input " + shape_str(input.shape) +
                ", kernel " + shape_str(kernel.shape) + ", stride " + std::to_string(stride) +
                ", padding " + std::to_string(padding));
    const int ho_n = h_span / stride + 1;
    const int wo_n = w_span / stride + 1;

    Array out(static_cast<long>(co_n) * ho_n * wo_n);
    {
        const double* in = input.data.data();
        const double* k = kernel.data.data();
        const double* b = bias.data.data();
        double* o = out.data();
        for (int co = 0; co < co_n; ++co) {
            for (int ho = 0; ho < ho_n; ++ho) {
                const int hbase = ho * stride - padding;
                for (int wo = 0; wo < wo_n; ++wo) {
                    const int wbase = wo * stride - padding;
                    double acc = b[co];
                    for (int ci = 0; ci < ci_n; ++ci) {
                        const double* in_c = in + static_cast<long>(ci) * h * w;
                        const double* k_c = k + (static_cast<long>(co) * ci_n + ci) * kh * kw;
                        for (int r = 0; r < kh; ++r) {
                            const int hi = hbase + r;
                            if (hi < 0 || hi >= h) continue;
                            const double* in_row = in_c + static_cast<long>(hi) * w;
                            const double* k_row = k_c + static_cast<long>(r) * kw;
                            for (int c = 0; c < kw; ++c) {
                                const int wi = wbase + c;
                                if (wi < 0 || wi >= w) continue;
                                acc += in_row[wi] * k_row[c];
                            }
                        }
                    }
                    o[(static_cast<long>(co) * ho_n + ho) * wo_n + wo] = acc;
                }
            }
        }
    }

    Tensor result({co_n, ho_n, wo_n}, std::move(out));
    check_finite(result, "conv2d");

    auto tape = common_tape({&input, &kernel, &bias});
    if (tape) {
        std::vector<int> parents;
        const int in_node = input.on_tape() ? input.node : -1;
        const int k_node = kernel.on_tape() ? kernel.node : -1;
        const int b_node = bias.on_tape() ? bias.node : -1;
        for (int n : {in_node, k_node, b_node})
            if (n >= 0) parents.push_back(n);

        // Saved forward context: input and kernel values plus geometry.
        Array in_saved = input.data;
        Array k_saved = kernel.data;
        auto backward = [=](const Array& g, Tape& t) {
            Array din = in_node >= 0 ? Array(Array::Zero(in_saved.size())) : Array();
            Array dk = k_node >= 0 ? Array(Array::Zero(k_saved.size())) : Array();
            Array db = b_node >= 0 ? Array(Array::Zero(co_n)) : Array();
            const double* in = in_saved.data();
            const double* k = k_saved.data();
            for (int co = 0; co < co_n; ++co) {
                for (int ho = 0; ho < ho_n; ++ho) {
                    const int hbase = ho * stride - padding;
                    for (int wo = 0; wo < wo_n; ++wo) {
                        const int wbase = wo * stride - padding;
                        const double gv = g[(static_cast<long>(co) * ho_n + ho) * wo_n + wo];
                        if (b_node >= 0) db[co] += gv;
                        if (in_node < 0 && k_node < 0) continue;
                        for (int ci = 0; ci < ci_n; ++ci) {
                            const long in_c = static_cast<long>(ci) * h * w;
                            const long k_c = (static_cast<long>(co) * ci_n + ci) * kh * kw;
                            for (int r = 0; r < kh; ++r) {
                                const int hi = hbase + r;
                                if (hi < 0 || hi >= h) continue;
                                for (int c = 0; c < kw; ++c) {
                                    const int wi = wbase + c;
                                    if (wi < 0 || wi >= w) continue;
                                    const long in_idx = in_c + static_cast<long>(hi) * w + wi;
                                    const long k_idx = k_c + static_cast<long>(r) * kw + c;
                                    if (dk.size() > 0) dk[k_idx] += gv * in[in_idx];
                                    if (din.size() > 0) din[in_idx] += gv * k[k_idx];
                                }
                            }
                        }
                    }
                }
            }
            if (in_node >= 0) t.accumulate(in_node, din);
            if (k_node >= 0) t.accumulate(k_node, dk);
            if (b_node >= 0) t.accumulate(b_node, db);
        };
        bind_output(result, tape, tape->record("conv2d", std::move(parents), result.numel(), backward));
    }
    return result;
}

Tensor leaky_relu(const Tensor& x, double slope) {
    require(slope >= 0.0 && slope < 1.0, "leaky_relu slope must be in [0, 1)");
    Array factor = (x.data >= 0.0).select(Array::Ones(x.data.size()),
                                          Array::Constant(x.data.size(), slope));
    Tensor result(x.shape, x.data * factor);
    check_finite(result, "leaky_relu");

    auto tape = common_tape({&x});
    if (tape) {
        const int x_node = x.node;
        auto backward = [x_node, factor = std::move(factor)](const Array& g, Tape& t) {
            t.accumulate(x_node, Array(g * factor));
        };
        bind_output(result, tape, tape->record("leaky_relu", {x.node}, result.numel(), backward));
    }
    return result;
}

Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng) {
    require(rate >= 0.0 && rate < 1.0, "dropout rate must be in [0, 1)");
    if (!training || rate == 0.0) return x;  // exact identity, same graph node

    const double keep_scale = 1.0 / (1.0 - rate);
    Array mask(x.data.size());
    for (long i = 0; i < mask.size(); ++i) {
        mask[i] = uniform01(rng) >= rate ? keep_scale : 0.0;
    }
    Tensor result(x.shape, x.data * mask);
    check_finite(result, "dropout");

    auto tape = common_tape({&x});
    if (tape) {
        const int x_node = x.node;
        auto backward = [x_node, mask = std::move(mask)](const Array& g, Tape& t) {
            t.accumulate(x_node, Array(g * mask));
        };
        bind_output(result, tape, tape->record("dropout", {x.node}, result.numel(), backward));
    }
    return result;
}

Tensor concat_channels(const std::vector<Tensor>& parts) {
    require(!parts.empty(), "concat_channels needs at least one tensor");
    require_rank3(parts[0], "concat_channels");
    const int h = parts[0].dim(1), w = parts[0].dim(2);
    int c_total = 0;
    for (const Tensor& p : parts) {
        require_rank3(p, "concat_channels");
        require(p.dim(1) == h && p.dim(2) == w,
                "concat_channels spatial mismatch: " + shape_str(p.shape) + " vs " +
                    shape_str(parts[0].shape));
        c_total += p.dim(0);
    }

    Array out(static_cast<long>(c_total) * h * w);
    long off = 0;
    for (const Tensor& p : parts) {
        out.segment(off, p.numel()) = p.data;
        off += p.numel();
    }
    Tensor result({c_total, h, w}, std::move(out));

    std::vector<const Tensor*> ptrs;
    for (const Tensor& p : parts) ptrs.push_back(&p);
    std::shared_ptr<Tape> tape;
    for (const Tensor* p : ptrs) {
        auto t = common_tape({p});
        if (t) {
            require(!tape || tape == t, "operation mixes tensors from two different tapes");
            tape = t;
        }
    }
    if (tape) {
        std::vector<int> parents;
        std::vector<std::pair<int, std::pair<long, long>>> routes;  // node -> (offset, size)
        long route_off = 0;
        for (const Tensor& p : parts) {
            if (p.on_tape()) {
                parents.push_back(p.node);
                routes.push_back({p.node, {route_off, p.numel()}});
            }
            route_off += p.numel();
        }
        auto backward = [routes = std::move(routes)](const Array& g, Tape& t) {
            for (const auto& [node, span] : routes) {
                t.accumulate(node, Array(g.segment(span.first, span.second)));
            }
        };
        bind_output(result, tape, tape->record("concat_channels", std::move(parents), result.numel(), backward));
    }
    return result;
}

Tensor slice_channels(const Tensor& x, int first, int count) {
    require_rank3(x, "slice_channels");
    require(first >= 0 && count >= 1 && first + count <= x.dim(0),
            "slice_channels range [" + std::to_string(first) + ", " +
                std::to_string(first + count) + ") out of bounds for " + shape_str(x.shape));
    const int h = x.dim(1), w = x.dim(2);
    const long plane = static_cast<long>(h) * w;
    Tensor result({count, h, w}, Array(x.data.segment(first * plane, count * plane)));

    auto tape = common_tape({&x});
    if (tape) {
        const int x_node = x.node;
        const long total = x.numel();
        const long off = first * plane;
        const long len = static_cast<long>(count) * plane;
        auto backward = [=](const Array& g, Tape& t) {
            Array dx = Array::Zero(total);
            dx.segment(off, len) = g;
            t.accumulate(x_node, dx);
        };
        bind_output(result, tape, tape->record("slice_channels", {x.node}, result.numel(), backward));
    }
    return result;
}

Tensor channel_diff(const Tensor& x) {
    require_rank3(x, "channel_diff");
    require(x.dim(0) >= 2, "channel_diff needs at least 2 channels, got " + shape_str(x.shape));
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    const long plane = static_cast<long>(h) * w;
    Array out((c - 1) * plane);
    for (int i = 0; i + 1 < c; ++i) {
        out.segment(i * plane, plane) = x.data.segment((i + 1) * plane, plane) - x.data.segment(i * plane, plane);
    }
    Tensor result({c - 1, h, w}, std::move(out));
    check_finite(result, "channel_diff");

    auto tape = common_tape({&x});
    if (tape) {
        const int x_node = x.node;
        auto backward = [x_node, c, plane](const Array& g, Tape& t) {
            Array dx = Array::Zero(static_cast<long>(c) * plane);
            for (int i = 0; i + 1 < c; ++i) {
                dx.segment((i + 1) * plane, plane) += g.segment(i * plane, plane);
                dx.segment(i * plane, plane) -= g.segment(i * plane, plane);
            }
            t.accumulate(x_node, dx);
        };
        bind_output(result, tape, tape->record("channel_diff", {x.node}, result.numel(), backward));
    }
    return result;
}

Tensor add(const Tensor& a, const Tensor& b) {
    require(same_shape(a, b), "add shape mismatch: " + shape_str(a.shape) + " vs " + shape_str(b.shape));
    Tensor result(a.shape, a.data + b.data);
    check_finite(result, "add");
    auto tape = common_tape({&a, &b});
    if (tape) {
        const int an = a.on_tape() ? a.node : -1;
        const int bn = b.on_tape() ? b.node : -1;
        std::vector<int> parents;
        for (int n : {an, bn})
            if (n >= 0) parents.push_back(n);
        auto backward = [an, bn](const Array& g, Tape& t) {
            if (an >= 0) t.accumulate(an, g);
            if (bn >= 0) t.accumulate(bn, g);
        };
        bind_output(result, tape, tape->record("add", std::move(parents), result.numel(), backward));
    }
    return result;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require(same_shape(a, b), "sub shape mismatch: " + shape_str(a.shape) + " vs " + shape_str(b.shape));
    Tensor result(a.shape, a.data - b.data);
    check_finite(result, "sub");
    auto tape = common_tape({&a, &b});
    if (tape) {
        const int an = a.on_tape() ? a.node : -1;
        const int bn = b.on_tape() ? b.node : -1;
        std::vector<int> parents;
        for (int n : {an, bn})
            if (n >= 0) parents.push_back(n);
        auto backward = [an, bn](const Array& g, Tape& t) {
            if (an >= 0) t.accumulate(an, g);
            if (bn >= 0) t.accumulate(bn, Array(-g));
        };
        bind_output(result, tape, tape->record("sub", std::move(parents), result.numel(), backward));
    }
    return result;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require(same_shape(a, b), "mul shape mismatch: " + shape_str(a.shape) + " vs " + shape_str(b.shape));
    Tensor result(a.shape, a.data * b.data);
    check_finite(result, "mul");
    auto tape = common_tape({&a, &b});
    if (tape) {
        const int an = a.on_tape() ? a.node : -1;
        const int bn = b.on_tape() ? b.node : -1;
        std::vector<int> parents;
        for (int n : {an, bn})
            if (n >= 0) parents.push_back(n);
        Array a_saved = a.data;
        Array b_saved = b.data;
        auto backward = [an, bn, a_saved = std::move(a_saved), b_saved = std::move(b_saved)](
                            const Array& g, Tape& t) {
            if (an >= 0) t.accumulate(an, Array(g * b_saved));
            if (bn >= 0) t.accumulate(bn, Array(g * a_saved));
        };
        bind_output(result, tape, tape->record("mul", std::move(parents), result.numel(), backward));
    }
    return result;
}

Tensor scale(const Tensor& x, double factor) {
    Tensor result(x.shape, x.data * factor);
    check_finite(result, "scale");
    auto tape = common_tape({&x});
    if (tape) {
        const int x_node = x.node;
        auto backward = [x_node, factor](const Array& g, Tape& t) {
            t.accumulate(x_node, Array(g * factor));
        };
        bind_output(result, tape, tape->record("scale", {x.node}, result.numel(), backward));
    }
    return result;
}

Tensor sum(const Tensor& x) {
    Tensor result({1}, Array::Constant(1, x.data.sum()));
    check_finite(result, "sum");
    auto tape = common_tape({&x});
    if (tape) {
        const int x_node = x.node;
        const long n = x.numel();
        auto backward = [x_node, n](const Array& g, Tape& t) {
            t.accumulate(x_node, Array(Array::Constant(n, g[0])));
        };
        bind_output(result, tape, tape->record("sum", {x.node}, result.numel(), backward));
    }
    return result;
}

}  // namespace trajfuse
