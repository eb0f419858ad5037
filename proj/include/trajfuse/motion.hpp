#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "trajfuse/rng.hpp"
#include "trajfuse/tensor.hpp"

namespace trajfuse {

/// One skeletal pose: joints x (x,y,z) in millimetres.
using Pose = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

struct SkeletonSpec {
    std::vector<std::string> joint_names;
    std::vector<int> parents;  // -1 for the root
    std::string unit = "mm";

    int joint_count() const { return static_cast<int>(joint_names.size()); }
    void validate() const;
};

struct MotionSequence {
    std::vector<Pose> frames;  // F poses, each joints x 3
    double fps = 0;

    int frame_count() const { return static_cast<int>(frames.size()); }
    int joint_count() const { return frames.empty() ? 0 : static_cast<int>(frames[0].rows()); }
    void validate() const;
};

/// Per-frame joint displacements, mm per frame; one entry shorter than
/// the sequence it came from.
struct VelocitySequence {
    std::vector<Pose> deltas;
};

struct SampleWindow {
    std::vector<Pose> input;   // T poses immediately preceding the target
    std::vector<Pose> target;  // T-hat poses
    std::string source_id;
    int start = 0;  // frame index of input[0] in the source sequence
};

struct SynthParams {
    int joint_count = 17;
    std::vector<Eigen::RowVector3d> rest_offsets;  // mm
    std::vector<Eigen::RowVector3d> amplitudes;    // mm, per joint per axis
    std::vector<double> frequencies_hz;
    std::vector<double> phases;
    Eigen::RowVector3d drift{0, 0, 0};  // mm per frame, whole body
    double noise_std = 0;               // mm
    int duration_frames = 0;
    double fps = 25.0;
    std::uint64_t seed = 0;

    void validate() const;
};

VelocitySequence compute_velocity(const MotionSequence& seq);

/// Running cumulative sum of velocities on top of `anchor`:
/// out[i] = anchor + sum_{k<=i} velocities[k].
std::vector<Pose> recover_positions(const std::vector<Pose>& velocities, const Pose& anchor);

/// Tensor form of the same recovery; participates in the tape when its
/// inputs do, with gradients flowing through the cumulative sum.
/// velocities [K,N,3], anchor [1,N,3] or [N,3] -> [K,N,3].
Tensor recover_positions(const Tensor& velocities, const Tensor& anchor);

/// Keeps frames 0, factor, 2*factor, ...; fps is divided by factor.
MotionSequence downsample(const MotionSequence& seq, int factor);

/// Contiguous (input, target) windows starting at 0, stride, 2*stride, ...
std::vector<SampleWindow> window_dataset(const MotionSequence& seq, int t_in, int t_out,
                                         int stride, const std::string& source_id = "0");

/// Sinusoid + whole-body drift + Gaussian noise; bitwise deterministic for
/// a fixed seed.
MotionSequence generate_synthetic(const SynthParams& params);

/// Periodic walking-like parameter set: per-joint offsets, amplitudes and
/// frequencies drawn from `seed`, steady forward drift, light noise.
SynthParams make_periodic_synth(int joints, int frames, double fps, std::uint64_t seed);

/// Skeleton for synthetic data: joint 0 is the root, joint j hangs off j-1.
SkeletonSpec chain_skeleton(int joints);

Tensor poses_to_tensor(const std::vector<Pose>& poses);
std::vector<Pose> tensor_to_poses(const Tensor& t);
Tensor window_input_tensor(const SampleWindow& w);
Tensor window_target_tensor(const SampleWindow& w);
std::string window_id(const SampleWindow& w);

}  // namespace trajfuse
