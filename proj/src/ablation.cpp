#include "trajfuse/ablation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "trajfuse/errors.hpp"
#include "trajfuse/log.hpp"

namespace trajfuse {

std::vector<std::string> default_ablation_variants() {
    return {"zero-velocity", "constant-velocity", "tst-6",    "tst-11",
            "tst-16",        "tst-21",            "p-only",   "v-only",
            "addition",      "naive-concat",      "temporal-fusion"};
}

namespace {

// A variant bundles its parameters (if any) with training and inference
// entry points; parameters live in the shared state captured by the closures.
struct Variant {
    bool trainable = false;
    Trainable model;
    PredictFn predict;  // inference mode
};

TSTConfig stream_cfg(const ModelConfig& m, int c_in, int c_out) {
    TSTConfig t;
    t.c_in = c_in;
    t.c_out = c_out;
    t.hidden = m.hidden;
    t.depth = m.depth;
    t.slope = m.slope;
    t.dropout = m.dropout;
    return t;
}

Tensor uniform_fuse_kernel(int t_out, Rng& rng) {
    const double bound = std::sqrt(1.0 / (2.0 * t_out));
    Tensor k = zeros({t_out, 2 * t_out, 1, 1});
    for (int i = 0; i < k.numel(); ++i) k[i] = uniform_in(rng, -bound, bound);
    return k;
}

Variant full_model_variant(const ModelConfig& cfg) {
    auto params = std::make_shared<TwoStreamModelParams>(init_params(cfg));
    Variant v;
    v.trainable = true;
    v.model.forward = [params](const Tensor& input, bool training, Rng* rng) {
        return model_forward(input, *params, training, rng).final;
    };
    v.model.for_each_param = [params](const std::function<void(Tensor&)>& fn) {
        for_each_tensor(*params, [&fn](const std::string&, Tensor& t) { fn(t); });
    };
    v.predict = [params](const Tensor& input) {
        return model_forward(input, *params, false).final;
    };
    return v;
}

Variant single_stream_variant(const ModelConfig& cfg, bool velocity, std::uint64_t init_seed) {
    Rng rng(init_seed);
    const TSTConfig tc = stream_cfg(cfg, velocity ? cfg.t_in - 1 : cfg.t_in, cfg.t_out);
    auto params = std::make_shared<TSTParams>(init_tst(tc, rng));
    auto forward = [params, velocity](const Tensor& input, bool training, Rng* r) {
        return velocity ? vstream_forward(input, *params, training, r)
                        : pstream_forward(input, *params, training, r);
    };
    Variant v;
    v.trainable = true;
    v.model.forward = forward;
    v.model.for_each_param = [params](const std::function<void(Tensor&)>& fn) {
        for (ConvLayer& l : params->layers) {
            fn(l.kernel);
            fn(l.bias);
        }
        for (ConvLayer& l : params->skips) {
            fn(l.kernel);
            fn(l.bias);
        }
    };
    v.predict = [forward](const Tensor& input) { return forward(input, false, nullptr); };
    return v;
}

struct TwoStreamOnly {
    TSTParams p;
    TSTParams v;
    ConvLayer fuse;  // naive-concat only
};

Variant summed_streams_variant(const ModelConfig& cfg, bool concat, std::uint64_t init_seed) {
    Rng rng(init_seed);
    auto params = std::make_shared<TwoStreamOnly>();
    params->p = init_tst(stream_cfg(cfg, cfg.t_in, cfg.t_out), rng);
    params->v = init_tst(stream_cfg(cfg, cfg.t_in - 1, cfg.t_out), rng);
    if (concat) {
        params->fuse.kernel = uniform_fuse_kernel(cfg.t_out, rng);
        params->fuse.bias = zeros({cfg.t_out});
    }
    auto forward = [params, concat](const Tensor& input, bool training, Rng* r) {
        Tensor p_pred = pstream_forward(input, params->p, training, r);
        Tensor v_pred = vstream_forward(input, params->v, training, r);
        if (!concat) return p_pred + v_pred;
        return conv2d(concat_channels({p_pred, v_pred}), params->fuse.kernel, params->fuse.bias,
                      1, 0);
    };
    Variant v;
    v.trainable = true;
    v.model.forward = forward;
    v.model.for_each_param = [params, concat](const std::function<void(Tensor&)>& fn) {
        for (TSTParams* tst : {&params->p, &params->v}) {
            for (ConvLayer& l : tst->layers) {
                fn(l.kernel);
                fn(l.bias);
            }
            for (ConvLayer& l : tst->skips) {
                fn(l.kernel);
                fn(l.bias);
            }
        }
        if (concat) {
            fn(params->fuse.kernel);
            fn(params->fuse.bias);
        }
    };
    v.predict = [forward](const Tensor& input) { return forward(input, false, nullptr); };
    return v;
}

Variant baseline_variant(BaselineKind kind, int t_out) {
    Variant v;
    v.trainable = false;
    v.predict = [kind, t_out](const Tensor& input) {
        return baseline_predict(kind, input, t_out);
    };
    return v;
}

Variant build_variant(const std::string& name, const ModelConfig& base, std::uint64_t init_seed) {
    ModelConfig cfg = base;
    cfg.init_seed = init_seed;
    if (name.rfind("tst-", 0) == 0) {
        try {
            std::size_t used = 0;
            cfg.depth = std::stoi(name.substr(4), &used);
            if (used != name.size() - 4) throw std::invalid_argument(name);
        } catch (const std::exception&) {
            throw DataError("unknown ablation variant '" + name + "'");
        }
        return full_model_variant(cfg);
    }
    if (name == "temporal-fusion") return full_model_variant(cfg);
    if (name == "p-only") return single_stream_variant(cfg, false, init_seed);
    if (name == "v-only") return single_stream_variant(cfg, true, init_seed);
    if (name == "addition") return summed_streams_variant(cfg, false, init_seed);
    if (name == "naive-concat") return summed_streams_variant(cfg, true, init_seed);
    if (name == "zero-velocity") return baseline_variant(BaselineKind::ZeroVelocity, cfg.t_out);
    if (name == "constant-velocity") {
        return baseline_variant(BaselineKind::ConstantVelocity, cfg.t_out);
    }
    throw DataError("unknown ablation variant '" + name + "'");
}

}  // namespace

AblationReport run_ablation(const std::vector<SampleWindow>& train_set,
                            const std::vector<SampleWindow>& eval_set,
                            const std::vector<std::string>& variants,
                            const AblationSetup& setup) {
    if (variants.empty()) throw DataError("ablation needs at least one variant");
    assert_disjoint_windows(train_set, eval_set);

    // Reject typos before burning any training budget.
    for (const std::string& name : variants) build_variant(name, setup.base, 0);

    std::vector<std::string> eval_ids;
    eval_ids.reserve(eval_set.size());
    for (const SampleWindow& w : eval_set) eval_ids.push_back(window_id(w));

    TrainConfig budget = setup.budget;
    budget.shuffle_seed = derive_seed(setup.seed, "shuffle");
    budget.dropout_seed = derive_seed(setup.seed, "dropout");
    budget.checkpoint_path.clear();
    budget.checkpoint_every = 0;
    const std::uint64_t init_seed = derive_seed(setup.seed, "init");

    AblationReport report;
    for (const std::string& name : variants) {
        AblationVariantResult result;
        result.name = name;
        result.window_ids = eval_ids;
        try {
            Variant v = build_variant(name, setup.base, init_seed);
            if (v.trainable) {
                log_info("ablation: training variant " + name);
                train(v.model, train_set, budget);
            } else {
                log_info("ablation: evaluating baseline " + name);
            }
            result.table = evaluate_horizons(v.predict, eval_set, setup.horizons_ms, setup.fps,
                                             name);
        } catch (const std::exception& e) {
            result.failed = true;
            result.failure_reason = e.what();
            log_error("ablation variant " + name + " failed: " + e.what());
        }
        report.variants.push_back(std::move(result));
    }
    return report;
}

void write_ablation_csv(std::ostream& out, const AblationReport& report) {
    out << "variant,horizon_ms,frame,mpjpe_mm,count\n";
    for (const AblationVariantResult& v : report.variants) {
        if (v.failed) {
            out << "# variant " << v.name << " failed: " << v.failure_reason << "\n";
        } else {
            write_horizon_csv(out, v.table, false);
        }
    }
}

void write_ablation_csv_file(const std::string& path, const AblationReport& report) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    write_ablation_csv(out, report);
}

std::string format_ablation_text(const AblationReport& report) {
    std::ostringstream os;
    char buf[64];
    os << "variant          ";
    if (!report.variants.empty() && !report.variants.front().table.rows.empty()) {
        for (const HorizonRow& r : report.variants.front().table.rows) {
            std::snprintf(buf, sizeof buf, "%10.0fms", r.horizon_ms);
            os << buf;
        }
    }
    os << "\n";
    for (const AblationVariantResult& v : report.variants) {
        std::snprintf(buf, sizeof buf, "%-17s", v.name.c_str());
        os << buf;
        if (v.failed) {
            os << "failed: " << v.failure_reason;
        } else {
            for (const HorizonRow& r : v.table.rows) {
                std::snprintf(buf, sizeof buf, "%12.3f", r.mpjpe_mm);
                os << buf;
            }
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace trajfuse
