#include "trajfuse/motion.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace trajfuse {

void SkeletonSpec::validate() const {
    const int n = joint_count();
    if (static_cast<int>(parents.size()) != n) {
        throw DataError("skeleton has " + std::to_string(n) + " joint names but " +
                        std::to_string(parents.size()) + " parent indices");
    }
    for (int j = 0; j < n; ++j) {
        const int p = parents[static_cast<std::size_t>(j)];
        if (p < -1 || p >= n) {
            throw DataError("joint " + std::to_string(j) + " has parent index " +
                            std::to_string(p) + " outside [-1, " + std::to_string(n) + ")");
        }
        if (p == j) throw DataError("joint " + std::to_string(j) + " is its own parent");
    }
    // Walk each joint to a root; more than n hops means a cycle.
    for (int j = 0; j < n; ++j) {
        int cur = j;
        for (int hops = 0; cur != -1; ++hops) {
            if (hops > n) throw DataError("skeleton parent indices contain a cycle");
            cur = parents[static_cast<std::size_t>(cur)];
        }
    }
}

void MotionSequence::validate() const {
    if (frames.empty()) throw DataError("motion sequence has no frames");
    if (!(fps > 0)) throw DataError("motion sequence fps must be > 0");
    const Eigen::Index n = frames[0].rows();
    for (const Pose& f : frames) {
        if (f.rows() != n) throw DataError("motion sequence frames disagree on joint count");
        if (!f.allFinite()) throw DataError("motion sequence contains non-finite coordinates");
    }
}

void SynthParams::validate() const {
    if (joint_count < 1) throw DataError("synth: joint_count must be >= 1");
    if (duration_frames < 1) throw DataError("synth: duration_frames must be >= 1");
    if (!(fps > 0)) throw DataError("synth: fps must be > 0");
    if (noise_std < 0) throw DataError("synth: noise_std must be >= 0");
    const auto n = static_cast<std::size_t>(joint_count);
    if (rest_offsets.size() != n || amplitudes.size() != n || frequencies_hz.size() != n ||
        phases.size() != n) {
        throw DataError("synth: per-joint parameter arrays must all have joint_count entries");
    }
    for (const auto& a : amplitudes) {
        if ((a.array() < 0).any()) throw DataError("synth: amplitudes must be >= 0");
    }
}

VelocitySequence compute_velocity(const MotionSequence& seq) {
    if (seq.frame_count() < 2) {
        throw DataError("compute_velocity needs at least 2 frames, got " +
                        std::to_string(seq.frame_count()));
    }
    VelocitySequence vel;
    vel.deltas.reserve(static_cast<std::size_t>(seq.frame_count() - 1));
    for (int t = 0; t + 1 < seq.frame_count(); ++t) {
        vel.deltas.push_back(seq.frames[static_cast<std::size_t>(t + 1)] -
                             seq.frames[static_cast<std::size_t>(t)]);
    }
    return vel;
}

std::vector<Pose> recover_positions(const std::vector<Pose>& velocities, const Pose& anchor) {
    std::vector<Pose> out;
    out.reserve(velocities.size());
    Pose acc = anchor;
    for (const Pose& v : velocities) {
        if (v.rows() != anchor.rows()) {
            throw ShapeError("recover_positions: velocity has " + std::to_string(v.rows()) +
                             " joints, anchor has " + std::to_string(anchor.rows()));
        }
        acc += v;
        out.push_back(acc);
    }
    return out;
}

Tensor recover_positions(const Tensor& velocities, const Tensor& anchor) {
    if (velocities.rank() != 3) {
        throw ShapeError("recover_positions: velocities must be rank 3, got " +
                         shape_str(velocities.shape));
    }
    const int k_n = velocities.dim(0), h = velocities.dim(1), w = velocities.dim(2);
    const long plane = static_cast<long>(h) * w;
    const bool anchor_ok =
        (anchor.rank() == 2 && anchor.dim(0) == h && anchor.dim(1) == w) ||
        (anchor.rank() == 3 && anchor.dim(0) == 1 && anchor.dim(1) == h && anchor.dim(2) == w);
    if (!anchor_ok) {
        throw ShapeError("recover_positions: anchor " + shape_str(anchor.shape) +
                         " does not match velocity plane " + shape_str(velocities.shape));
    }

    Array out(static_cast<long>(k_n) * plane);
    Array acc = anchor.data;
    for (int i = 0; i < k_n; ++i) {
        acc += velocities.data.segment(i * plane, plane);
        out.segment(i * plane, plane) = acc;
    }
    Tensor result({k_n, h, w}, std::move(out));
    check_finite(result, "recover_positions");

    auto tape = common_tape({&velocities, &anchor});
    if (tape) {
        const int v_node = velocities.on_tape() ? velocities.node : -1;
        const int a_node = anchor.on_tape() ? anchor.node : -1;
        std::vector<int> parents;
        for (int n : {v_node, a_node})
            if (n >= 0) parents.push_back(n);
        auto backward = [=](const Array& g, Tape& t) {
            // d/d vel[j] = sum_{i >= j} g[i]; d/d anchor = sum_i g[i].
            Array suffix = Array::Zero(plane);
            Array dvel = v_node >= 0 ? Array(Array::Zero(static_cast<long>(k_n) * plane)) : Array();
            for (int i = k_n - 1; i >= 0; --i) {
                suffix += g.segment(i * plane, plane);
                if (v_node >= 0) dvel.segment(i * plane, plane) = suffix;
            }
            if (v_node >= 0) t.accumulate(v_node, dvel);
            if (a_node >= 0) t.accumulate(a_node, suffix);
        };
        bind_output(result, tape,
                    tape->record("recover_positions", std::move(parents), result.numel(), backward));
    }
    return result;
}

MotionSequence downsample(const MotionSequence& seq, int factor) {
    if (factor < 1) throw DataError("downsample factor must be >= 1");
    MotionSequence out;
    out.fps = seq.fps / factor;
    for (int i = 0; i < seq.frame_count(); i += factor) {
        out.frames.push_back(seq.frames[static_cast<std::size_t>(i)]);
    }
    return out;
}

std::vector<SampleWindow> window_dataset(const MotionSequence& seq, int t_in, int t_out,
                                         int stride, const std::string& source_id) {
    if (t_in < 1 || t_out < 1) throw DataError("window_dataset: t_in and t_out must be >= 1");
    if (stride < 1) throw DataError("window_dataset: stride must be >= 1");
    const int f = seq.frame_count();
    if (f < t_in + t_out) {
        throw DataError("sequence '" + source_id + "' has " + std::to_string(f) +
                        " frames, need at least " + std::to_string(t_in + t_out));
    }
    std::vector<SampleWindow> windows;
    for (int start = 0; start + t_in + t_out <= f; start += stride) {
        SampleWindow w;
        w.source_id = source_id;
        w.start = start;
        w.input.assign(seq.frames.begin() + start, seq.frames.begin() + start + t_in);
        w.target.assign(seq.frames.begin() + start + t_in,
                        seq.frames.begin() + start + t_in + t_out);
        windows.push_back(std::move(w));
    }
    return windows;
}

MotionSequence generate_synthetic(const SynthParams& params) {
    params.validate();
    Rng rng(params.seed);
    MotionSequence seq;
    seq.fps = params.fps;
    seq.frames.reserve(static_cast<std::size_t>(params.duration_frames));
    const double two_pi = 2.0 * std::numbers::pi;
    for (int f = 0; f < params.duration_frames; ++f) {
        Pose pose(params.joint_count, 3);
        for (int j = 0; j < params.joint_count; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            const double phase = two_pi * params.frequencies_hz[ju] * f / params.fps + params.phases[ju];
            const double s = std::sin(phase);
            for (int c = 0; c < 3; ++c) {
                double v = params.rest_offsets[ju][c] + params.drift[c] * f +
                           params.amplitudes[ju][c] * s;
                if (params.noise_std > 0) v += params.noise_std * normal01(rng);
                pose(j, c) = v;
            }
        }
        seq.frames.push_back(std::move(pose));
    }
    return seq;
}

SynthParams make_periodic_synth(int joints, int frames, double fps, std::uint64_t seed) {
    SynthParams p;
    p.joint_count = joints;
    p.duration_frames = frames;
    p.fps = fps;
    p.seed = derive_seed(seed, "synth-noise");
    p.drift = Eigen::RowVector3d(20.0, 0.0, 4.0);  // steady walk-like advance
    p.noise_std = 0.5;
    Rng rng(derive_seed(seed, "synth-layout"));
    for (int j = 0; j < joints; ++j) {
        p.rest_offsets.emplace_back(uniform_in(rng, -300, 300), uniform_in(rng, 0, 1700),
                                    uniform_in(rng, -200, 200));
        p.amplitudes.emplace_back(uniform_in(rng, 10, 60), uniform_in(rng, 5, 30),
                                  uniform_in(rng, 10, 60));
        p.frequencies_hz.push_back(uniform_in(rng, 0.6, 1.4));
        p.phases.push_back(uniform_in(rng, 0, 2.0 * std::numbers::pi));
    }
    return p;
}

SkeletonSpec chain_skeleton(int joints) {
    SkeletonSpec s;
    for (int j = 0; j < joints; ++j) {
        s.joint_names.push_back("j" + std::to_string(j));
        s.parents.push_back(j - 1);
    }
    return s;
}

Tensor poses_to_tensor(const std::vector<Pose>& poses) {
    if (poses.empty()) throw ShapeError("poses_to_tensor: empty pose list");
    const int n = static_cast<int>(poses[0].rows());
    const int t = static_cast<int>(poses.size());
    Array data(static_cast<long>(t) * n * 3);
    for (int i = 0; i < t; ++i) {
        const Pose& p = poses[static_cast<std::size_t>(i)];
        if (p.rows() != n) throw ShapeError("poses_to_tensor: inconsistent joint counts");
        // Pose is row-major joints x 3, matching the tensor's [N,3] plane.
        data.segment(static_cast<long>(i) * n * 3, static_cast<long>(n) * 3) =
            Eigen::Map<const Array>(p.data(), static_cast<long>(n) * 3);
    }
    return Tensor({t, n, 3}, std::move(data));
}

std::vector<Pose> tensor_to_poses(const Tensor& t) {
    if (t.rank() != 3 || t.dim(2) != 3) {
        throw ShapeError("tensor_to_poses expects [T,N,3], got " + shape_str(t.shape));
    }
    const int frames = t.dim(0), n = t.dim(1);
    std::vector<Pose> poses;
    poses.reserve(static_cast<std::size_t>(frames));
    for (int i = 0; i < frames; ++i) {
        Pose p(n, 3);
        Eigen::Map<Array>(p.data(), static_cast<long>(n) * 3) =
            t.data.segment(static_cast<long>(i) * n * 3, static_cast<long>(n) * 3);
        poses.push_back(std::move(p));
    }
    return poses;
}

Tensor window_input_tensor(const SampleWindow& w) {
    return poses_to_tensor(w.input);
}

Tensor window_target_tensor(const SampleWindow& w) {
    return poses_to_tensor(w.target);
}

std::string window_id(const SampleWindow& w) {
    return w.source_id + ":" + std::to_string(w.start);
}

}  // namespace trajfuse
