#include "trajfuse/training.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>

#include "trajfuse/checkpoint.hpp"
#include "trajfuse/errors.hpp"
#include "trajfuse/log.hpp"

namespace trajfuse {

Tensor weighted_loss(const Tensor& pred, const Tensor& target,
                     const std::vector<double>& weights) {
    if (pred.rank() != 3 || !same_shape(pred, target)) {
        throw ShapeError("loss needs matching [T_out, N, 3] tensors, got " +
                         shape_str(pred.shape) + " and " + shape_str(target.shape));
    }
    const int t_out = pred.dim(0);
    const int n = pred.dim(1);
    if (static_cast<int>(weights.size()) != t_out) {
        throw ShapeError("loss needs one weight per predicted frame: " +
                         std::to_string(weights.size()) + " weights for " +
                         std::to_string(t_out) + " frames");
    }
    Tensor w_full = zeros(pred.shape);
    const long plane = static_cast<long>(n) * 3;
    for (int t = 0; t < t_out; ++t) {
        w_full.data.segment(t * plane, plane).setConstant(weights[static_cast<std::size_t>(t)]);
    }
    Tensor diff = pred - target;
    Tensor weighted = mul(mul(diff, diff), w_full);
    return scale(sum(weighted), 1.0 / (static_cast<double>(t_out) * n));
}

std::vector<double> make_frame_weights(int t_out, int tail_len, double tail_weight) {
    if (t_out < 1) throw ShapeError("make_frame_weights: t_out must be >= 1");
    if (tail_len < 0 || tail_len > t_out) {
        throw ShapeError("make_frame_weights: tail_len must lie in [0, " + std::to_string(t_out) +
                         "], got " + std::to_string(tail_len));
    }
    if (!(tail_weight > 0)) throw ShapeError("make_frame_weights: tail_weight must be > 0");
    std::vector<double> w(static_cast<std::size_t>(t_out), 1.0);
    for (int i = t_out - tail_len; i < t_out; ++i) w[static_cast<std::size_t>(i)] = tail_weight;
    return w;
}

void TrainConfig::validate() const {
    if (steps < 1) throw ShapeError("training needs steps >= 1");
    if (batch_size < 1) throw ShapeError("training needs batch_size >= 1");
    adam.validate();
    for (double w : frame_weights) {
        if (!(w > 0)) throw ShapeError("frame weights must be positive");
    }
    if (checkpoint_every < 0) throw ShapeError("checkpoint_every must be >= 0");
}

namespace {

// Deterministic epoch sampler: reshuffles whenever the pool runs dry, so a
// batch may straddle an epoch boundary.
class BatchSampler {
public:
    BatchSampler(int n, std::uint64_t seed) : n_(n), rng_(seed) {}

    int next() {
        if (pos_ >= order_.size()) {
            order_ = shuffled_indices(n_, rng_);
            pos_ = 0;
        }
        return order_[pos_++];
    }

private:
    int n_;
    Rng rng_;
    std::vector<int> order_;
    std::size_t pos_ = 0;
};

}  // namespace

TrainLog train(Trainable& model, const std::vector<SampleWindow>& dataset,
               const TrainConfig& tcfg) {
    tcfg.validate();
    if (dataset.empty()) throw DataError("training dataset is empty");

    std::vector<Tensor> inputs;
    std::vector<Tensor> targets;
    inputs.reserve(dataset.size());
    targets.reserve(dataset.size());
    for (const SampleWindow& w : dataset) {
        inputs.push_back(window_input_tensor(w));
        targets.push_back(window_target_tensor(w));
    }
    const int t_out = targets.front().dim(0);
    std::vector<double> weights = tcfg.frame_weights;
    if (weights.empty()) weights.assign(static_cast<std::size_t>(t_out), 1.0);

    BatchSampler sampler(static_cast<int>(dataset.size()), tcfg.shuffle_seed);
    Rng dropout_rng(tcfg.dropout_seed);
    std::vector<AdamState> states;
    TrainLog log;
    const auto start = std::chrono::steady_clock::now();

    for (int step = 1; step <= tcfg.steps; ++step) {
        auto tape = Tape::create();
        model.for_each_param([&tape](Tensor& t) { tape->watch(t); });

        Tensor batch_loss;
        try {
            for (int b = 0; b < tcfg.batch_size; ++b) {
                const int idx = sampler.next();
                Tensor pred = model.forward(inputs[static_cast<std::size_t>(idx)], true,
                                            &dropout_rng);
                Tensor sample_loss =
                    weighted_loss(pred, targets[static_cast<std::size_t>(idx)], weights);
                batch_loss = b == 0 ? sample_loss : batch_loss + sample_loss;
            }
            batch_loss = scale(batch_loss, 1.0 / tcfg.batch_size);
        } catch (const NumericError& e) {
            throw NumericError("step " + std::to_string(step) + ": " + e.what());
        }

        tape->backward(batch_loss);

        std::size_t param_idx = 0;
        try {
            model.for_each_param([&](Tensor& t) {
                if (param_idx == states.size()) states.push_back(make_adam_state(t));
                adam_step(t, tape->grad(t), states[param_idx], tcfg.adam);
                ++param_idx;
            });
        } catch (const NumericError& e) {
            throw NumericError("step " + std::to_string(step) + ": " + e.what());
        }

        const auto now = std::chrono::steady_clock::now();
        const long long ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(now - start).count();
        log.records.push_back({step, batch_loss[0], ms});

        if (model.on_checkpoint && tcfg.checkpoint_every > 0 && step % tcfg.checkpoint_every == 0 &&
            step != tcfg.steps) {
            model.on_checkpoint(step);
        }
        if (step == 1 || step == tcfg.steps || step % 100 == 0) {
            log_debug("step " + std::to_string(step) + " loss " + std::to_string(batch_loss[0]));
        }
    }
    if (model.on_checkpoint) model.on_checkpoint(tcfg.steps);
    return log;
}

Trainable make_trainable(TwoStreamModelParams& params, const TrainConfig& tcfg) {
    Trainable t;
    t.forward = [&params](const Tensor& input, bool training, Rng* rng) {
        return model_forward(input, params, training, rng).final;
    };
    t.for_each_param = [&params](const std::function<void(Tensor&)>& fn) {
        for_each_tensor(params, [&fn](const std::string&, Tensor& tensor) { fn(tensor); });
    };
    if (!tcfg.checkpoint_path.empty()) {
        const std::string path = tcfg.checkpoint_path;
        t.on_checkpoint = [&params, path](int) { save_checkpoint(path, params); };
    }
    return t;
}

TrainLog train(TwoStreamModelParams& params, const std::vector<SampleWindow>& dataset,
               const TrainConfig& tcfg) {
    Trainable model = make_trainable(params, tcfg);
    return train(model, dataset, tcfg);
}

void write_train_log_csv(std::ostream& out, const TrainLog& log) {
    out << "step,loss,millis\n";
    char buf[64];
    for (const TrainStepRecord& r : log.records) {
        std::snprintf(buf, sizeof buf, "%.17g", r.loss);
        out << r.step << "," << buf << "," << r.millis << "\n";
    }
}

void write_train_log_csv_file(const std::string& path, const TrainLog& log) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    write_train_log_csv(out, log);
}

void assert_disjoint_windows(const std::vector<SampleWindow>& train_set,
                             const std::vector<SampleWindow>& eval_set) {
    std::set<std::string> train_ids;
    for (const SampleWindow& w : train_set) train_ids.insert(window_id(w));
    for (const SampleWindow& w : eval_set) {
        if (train_ids.count(window_id(w))) {
            throw DataError("window " + window_id(w) + " appears in both train and eval splits");
        }
    }
}

}  // namespace trajfuse
