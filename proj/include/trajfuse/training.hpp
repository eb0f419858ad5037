#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "trajfuse/adam.hpp"
#include "trajfuse/motion.hpp"
#include "trajfuse/network.hpp"

namespace trajfuse {

// Squared-norm position loss with per-frame weights:
// (1 / (T_out * N)) * sum_t sum_joints w[t] * |pred - target|^2.
// Differentiable when pred is on a tape. Unit weights give the plain form.
Tensor weighted_loss(const Tensor& pred, const Tensor& target, const std::vector<double>& weights);

// First t_out - tail_len entries are 1.0, the last tail_len are tail_weight.
std::vector<double> make_frame_weights(int t_out, int tail_len, double tail_weight);

struct TrainConfig {
    int steps = 1;
    int batch_size = 16;
    AdamHyper adam;
    std::vector<double> frame_weights;  // empty = all ones
    std::uint64_t shuffle_seed = 0;
    std::uint64_t dropout_seed = 0;
    int checkpoint_every = 0;  // extra saves every k steps; 0 = final only
    std::string checkpoint_path;
    void validate() const;
};

struct TrainStepRecord {
    int step = 0;  // 1-based
    double loss = 0;
    long long millis = 0;  // wall time since training start
};

struct TrainLog {
    std::vector<TrainStepRecord> records;
};

// Anything train() can optimize: a forward pass from one input window to a
// prediction tensor, plus access to every parameter tensor in a fixed order.
struct Trainable {
    std::function<Tensor(const Tensor& input, bool training, Rng* rng)> forward;
    std::function<void(const std::function<void(Tensor&)>&)> for_each_param;
    std::function<void(int step)> on_checkpoint;  // optional, called at cadence and at the end
};

TrainLog train(Trainable& model, const std::vector<SampleWindow>& dataset,
               const TrainConfig& tcfg);

// Trains the full two-stream model on the weighted loss over the fused
// output; per-stream predictions never feed the loss directly.
TrainLog train(TwoStreamModelParams& params, const std::vector<SampleWindow>& dataset,
               const TrainConfig& tcfg);

Trainable make_trainable(TwoStreamModelParams& params, const TrainConfig& tcfg);

void write_train_log_csv(std::ostream& out, const TrainLog& log);
void write_train_log_csv_file(const std::string& path, const TrainLog& log);

// Guards the train/eval separation contract.
void assert_disjoint_windows(const std::vector<SampleWindow>& train_set,
                             const std::vector<SampleWindow>& eval_set);

}  // namespace trajfuse
