#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "trajfuse/evaluation.hpp"
#include "trajfuse/network.hpp"
#include "trajfuse/training.hpp"

namespace trajfuse {

struct AblationVariantResult {
    std::string name;
    bool failed = false;
    std::string failure_reason;
    HorizonTable table;
    std::vector<std::string> window_ids;  // evaluation windows, identical across variants
};

struct AblationReport {
    std::vector<AblationVariantResult> variants;
};

// Depth sweep, fusion-mode sweep, and the two training-free baselines.
std::vector<std::string> default_ablation_variants();

struct AblationSetup {
    ModelConfig base;    // depth is overridden by the tst-<d> variants
    TrainConfig budget;  // steps/batch/optimizer shared by every variant
    std::vector<double> horizons_ms;
    double fps = 25;
    std::uint64_t seed = 0;  // fans out to per-variant init/shuffle/dropout seeds
};

// Trains and evaluates each variant under the same budget, seed, and window
// sets. A variant that throws is marked failed and the run continues.
AblationReport run_ablation(const std::vector<SampleWindow>& train_set,
                            const std::vector<SampleWindow>& eval_set,
                            const std::vector<std::string>& variants, const AblationSetup& setup);

// One row per variant and horizon; failed variants become comment lines.
void write_ablation_csv(std::ostream& out, const AblationReport& report);
void write_ablation_csv_file(const std::string& path, const AblationReport& report);
std::string format_ablation_text(const AblationReport& report);

}  // namespace trajfuse
