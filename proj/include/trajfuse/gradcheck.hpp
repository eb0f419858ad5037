#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace trajfuse {

struct GradCheckSample {
    std::string group;
    std::string name;
    int index = 0;  // flat index inside the tensor
    double autodiff = 0;
    double fd = 0;
    double rel_err = 0;
};

struct GradCheckResult {
    double max_rel_err = 0;
    std::vector<GradCheckSample> samples;
};

// Central finite differences (h = 1e-5) against one taped backward pass on a
// small model (5 joints, 4 input frames, 3 predicted, width 8, depth 11).
// Samples several coordinates from each parameter family: position-stream
// kernels, velocity-stream kernels, skip kernels, selectors, reinforcement
// kernels. Inputs are bounded in [-2, 2] to keep difference quotients tame.
GradCheckResult run_gradient_check(std::uint64_t seed);

}  // namespace trajfuse
