#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "trajfuse/motion.hpp"
#include "trajfuse/tensor.hpp"

namespace trajfuse {

// Mean per-joint position error: out[t] = mean over joints of the Euclidean
// distance between pred[t] and target[t], in mm. Unsquared, unlike the
// training loss.
std::vector<double> mpjpe_metric(const Tensor& pred, const Tensor& target);

// Round-half-up mapping from lead time to a 1-based predicted-frame index.
// Throws when a horizon rounds below 1 or beyond t_out.
std::vector<int> horizons_to_frames(const std::vector<double>& horizons_ms, double fps, int t_out);

enum class BaselineKind { ZeroVelocity, ConstantVelocity };

// Zero-velocity repeats the last observed pose; constant-velocity
// extrapolates the last frame difference linearly.
Tensor baseline_predict(BaselineKind kind, const Tensor& input, int t_out);

struct HorizonRow {
    double horizon_ms = 0;
    int frame = 0;  // 1-based predicted frame index
    double mpjpe_mm = 0;
    long long count = 0;  // windows averaged
};

struct HorizonTable {
    std::string label;
    std::vector<HorizonRow> rows;
};

using PredictFn = std::function<Tensor(const Tensor& input)>;

// Averages the per-window metric at each horizon frame over all windows, in
// window order (fixed reduction order keeps reruns bitwise identical).
HorizonTable evaluate_horizons(const PredictFn& predict, const std::vector<SampleWindow>& windows,
                               const std::vector<double>& horizons_ms, double fps,
                               const std::string& label);

void write_horizon_csv(std::ostream& out, const HorizonTable& table, bool header = true);
void write_horizon_csv_file(const std::string& path, const HorizonTable& table);
std::string format_horizon_text(const HorizonTable& table);

}  // namespace trajfuse
