#include <doctest.h>

#include <cmath>
#include <set>

#include "trajfuse/motion.hpp"
#include "trajfuse/ops.hpp"

using namespace trajfuse;

namespace {

Pose make_pose(std::initializer_list<double> xyz) {
    const int n = static_cast<int>(xyz.size()) / 3;
    Pose p(n, 3);
    int i = 0;
    for (double v : xyz) p(i / 3, i % 3) = v, ++i;
    return p;
}

MotionSequence line_sequence(int frames, int joints, double step_mm) {
    MotionSequence seq;
    seq.fps = 25;
    for (int f = 0; f < frames; ++f) {
        Pose p(joints, 3);
        for (int j = 0; j < joints; ++j) {
            p(j, 0) = step_mm * f + 10.0 * j;
            p(j, 1) = 100.0 + j;
            p(j, 2) = -step_mm * f;
        }
        seq.frames.push_back(p);
    }
    return seq;
}

}  // namespace

TEST_CASE("skeleton validation") {
    SkeletonSpec sk = chain_skeleton(4);
    CHECK(sk.joint_count() == 4);
    CHECK(sk.parents[0] == -1);
    CHECK(sk.parents[3] == 2);
    CHECK_NOTHROW(sk.validate());

    SkeletonSpec bad = sk;
    bad.parents[2] = 2;  // self-parent
    CHECK_THROWS_AS(bad.validate(), DataError);
    bad = sk;
    bad.parents[1] = 7;  // out of range
    CHECK_THROWS_AS(bad.validate(), DataError);
    bad = sk;
    bad.parents[1] = 2;
    bad.parents[2] = 1;  // cycle
    CHECK_THROWS_AS(bad.validate(), DataError);
    bad = sk;
    bad.parents.pop_back();
    CHECK_THROWS_AS(bad.validate(), DataError);
    bad = sk;
    bad.parents[0] = 0;
    CHECK_THROWS_AS(bad.validate(), DataError);
}

TEST_CASE("compute_velocity is the frame difference") {
    MotionSequence seq;
    seq.fps = 25;
    seq.frames.push_back(make_pose({0, 0, 0, 1, 1, 1}));
    seq.frames.push_back(make_pose({1, 0, 0, 1, 3, 1}));
    seq.frames.push_back(make_pose({4, 0, 0, 1, 6, 1}));
    VelocitySequence vel = compute_velocity(seq);
    REQUIRE(vel.deltas.size() == 2);
    CHECK(vel.deltas[0](0, 0) == 1.0);
    CHECK(vel.deltas[0](1, 1) == 2.0);
    CHECK(vel.deltas[1](0, 0) == 3.0);
    CHECK(vel.deltas[1](1, 1) == 3.0);

    MotionSequence one;
    one.fps = 25;
    one.frames.push_back(make_pose({0, 0, 0}));
    CHECK_THROWS_AS(compute_velocity(one), DataError);
}

TEST_CASE("velocity then recovery round-trips a random sequence") {
    SynthParams params = make_periodic_synth(6, 50, 25, 2024);
    MotionSequence seq = generate_synthetic(params);
    VelocitySequence vel = compute_velocity(seq);
    std::vector<Pose> rebuilt = recover_positions(vel.deltas, seq.frames[0]);
    REQUIRE(rebuilt.size() == seq.frames.size() - 1);
    for (std::size_t i = 0; i < rebuilt.size(); ++i) {
        const double err = (rebuilt[i] - seq.frames[i + 1]).cwiseAbs().maxCoeff();
        CHECK(err < 1e-9);
    }
}

TEST_CASE("recover_positions accumulates on top of the anchor") {
    std::vector<Pose> vel{make_pose({1, 0, 0}), make_pose({2, 0, 0}), make_pose({0, -1, 5})};
    Pose anchor = make_pose({10, 10, 10});
    std::vector<Pose> out = recover_positions(vel, anchor);
    REQUIRE(out.size() == 3);
    CHECK(out[0](0, 0) == 11.0);
    CHECK(out[1](0, 0) == 13.0);
    CHECK(out[2](0, 0) == 13.0);
    CHECK(out[2](0, 1) == 9.0);
    CHECK(out[2](0, 2) == 15.0);
}

TEST_CASE("tensor recover_positions matches the pose version and differentiates") {
    SynthParams params = make_periodic_synth(4, 12, 25, 7);
    MotionSequence seq = generate_synthetic(params);
    VelocitySequence vel = compute_velocity(seq);

    Tensor vel_t = poses_to_tensor(vel.deltas);
    Tensor anchor_t = poses_to_tensor({seq.frames[0]});
    Tensor rebuilt = recover_positions(vel_t, anchor_t);
    std::vector<Pose> want = recover_positions(vel.deltas, seq.frames[0]);
    std::vector<Pose> got = tensor_to_poses(rebuilt);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK((got[i] - want[i]).cwiseAbs().maxCoeff() < 1e-12);
    }

    // gradient structure: d(sum out)/d vel[j] counts the frames at or after j
    auto tape = Tape::create();
    tape->watch(vel_t);
    tape->watch(anchor_t);
    tape->backward(sum(recover_positions(vel_t, anchor_t)));
    const Array gv = tape->grad(vel_t);
    const Array ga = tape->grad(anchor_t);
    const int k = vel_t.dim(0);
    const int plane = vel_t.dim(1) * 3;
    for (int j = 0; j < k; ++j) {
        for (int i = 0; i < plane; ++i) {
            CHECK(gv[j * plane + i] == doctest::Approx(static_cast<double>(k - j)));
        }
    }
    for (int i = 0; i < plane; ++i) CHECK(ga[i] == doctest::Approx(static_cast<double>(k)));
}

TEST_CASE("downsample keeps every factor-th frame and rescales fps") {
    MotionSequence seq = line_sequence(10, 2, 3.0);
    seq.fps = 50;
    MotionSequence half = downsample(seq, 2);
    CHECK(half.fps == 25.0);
    REQUIRE(half.frame_count() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(half.frames[i](0, 0) == seq.frames[2 * i](0, 0));
    }

    MotionSequence same = downsample(seq, 1);
    CHECK(same.frame_count() == 10);
    CHECK(same.fps == 50.0);

    // downsample(4) == downsample(downsample(2), 2)
    MotionSequence quarter = downsample(seq, 4);
    MotionSequence twice = downsample(downsample(seq, 2), 2);
    REQUIRE(quarter.frame_count() == twice.frame_count());
    for (int i = 0; i < quarter.frame_count(); ++i) {
        CHECK((quarter.frames[i] - twice.frames[i]).cwiseAbs().maxCoeff() == 0.0);
    }

    CHECK_THROWS_AS(downsample(seq, 0), DataError);
}

TEST_CASE("window_dataset layout") {
    MotionSequence seq = line_sequence(100, 3, 1.0);

    std::vector<SampleWindow> unit = window_dataset(seq, 10, 10, 1, "walk");
    CHECK(unit.size() == 81);
    CHECK(unit.front().start == 0);
    CHECK(unit.back().start == 80);
    CHECK(window_id(unit[3]) == "walk:3");

    // each window is a contiguous slice: input frames [s, s+T), target [s+T, s+T+T')
    const SampleWindow& w = unit[17];
    REQUIRE(w.input.size() == 10);
    REQUIRE(w.target.size() == 10);
    for (int i = 0; i < 10; ++i) {
        CHECK((w.input[i] - seq.frames[17 + i]).cwiseAbs().maxCoeff() == 0.0);
        CHECK((w.target[i] - seq.frames[27 + i]).cwiseAbs().maxCoeff() == 0.0);
    }

    std::vector<SampleWindow> strided = window_dataset(seq, 10, 10, 7);
    CHECK(strided.size() == 12);
    CHECK(strided.back().start == 77);

    MotionSequence exact = line_sequence(20, 3, 1.0);
    CHECK(window_dataset(exact, 10, 10, 5).size() == 1);

    MotionSequence tiny = line_sequence(19, 3, 1.0);
    CHECK_THROWS_AS(window_dataset(tiny, 10, 10, 1), DataError);
    CHECK_THROWS_AS(window_dataset(seq, 10, 10, 0), DataError);
}

TEST_CASE("generate_synthetic obeys its parameters") {
    SynthParams p;
    p.joint_count = 2;
    p.rest_offsets = {{1, 2, 3}, {4, 5, 6}};
    p.amplitudes = {{0, 0, 0}, {0, 0, 0}};
    p.frequencies_hz = {1.0, 1.0};
    p.phases = {0.0, 0.0};
    p.duration_frames = 5;
    p.noise_std = 0;

    // zero amplitude, zero drift, zero noise: constant at the rest offsets
    MotionSequence still = generate_synthetic(p);
    REQUIRE(still.frame_count() == 5);
    for (const Pose& f : still.frames) {
        CHECK(f(0, 0) == 1.0);
        CHECK(f(1, 2) == 6.0);
    }

    // pure drift moves every joint by the same delta per frame
    p.drift = {2.0, 0.0, -1.0};
    MotionSequence drifting = generate_synthetic(p);
    for (int f = 0; f < 5; ++f) {
        CHECK(drifting.frames[f](0, 0) == doctest::Approx(1.0 + 2.0 * f));
        CHECK(drifting.frames[f](1, 2) == doctest::Approx(6.0 - 1.0 * f));
    }

    // same seed, same frames
    SynthParams noisy = make_periodic_synth(5, 30, 25, 99);
    MotionSequence a = generate_synthetic(noisy);
    MotionSequence b = generate_synthetic(noisy);
    for (int f = 0; f < a.frame_count(); ++f) {
        CHECK((a.frames[f] - b.frames[f]).cwiseAbs().maxCoeff() == 0.0);
    }

    SynthParams bad = noisy;
    bad.duration_frames = 0;
    CHECK_THROWS_AS(generate_synthetic(bad), DataError);
    bad = noisy;
    bad.frequencies_hz.pop_back();
    CHECK_THROWS_AS(generate_synthetic(bad), DataError);
}

TEST_CASE("poses_to_tensor round trip") {
    SynthParams params = make_periodic_synth(3, 8, 25, 5);
    MotionSequence seq = generate_synthetic(params);
    Tensor t = poses_to_tensor(seq.frames);
    REQUIRE(t.shape == std::vector<int>{8, 3, 3});
    CHECK(t.at3(2, 1, 0) == seq.frames[2](1, 0));
    CHECK(t.at3(7, 2, 2) == seq.frames[7](2, 2));

    std::vector<Pose> back = tensor_to_poses(t);
    REQUIRE(back.size() == seq.frames.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK((back[i] - seq.frames[i]).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("window tensors mirror the window poses") {
    MotionSequence seq = line_sequence(30, 4, 2.0);
    std::vector<SampleWindow> ws = window_dataset(seq, 6, 4, 3, "line");
    const SampleWindow& w = ws[2];
    Tensor in = window_input_tensor(w);
    Tensor tgt = window_target_tensor(w);
    REQUIRE(in.shape == std::vector<int>{6, 4, 3});
    REQUIRE(tgt.shape == std::vector<int>{4, 4, 3});
    CHECK(in.at3(0, 0, 0) == seq.frames[6](0, 0));
    CHECK(tgt.at3(0, 0, 0) == seq.frames[12](0, 0));
}

TEST_CASE("window ids are unique across sources and starts") {
    MotionSequence seq = line_sequence(40, 2, 1.0);
    std::set<std::string> ids;
    for (const auto& w : window_dataset(seq, 10, 10, 2, "a")) ids.insert(window_id(w));
    for (const auto& w : window_dataset(seq, 10, 10, 2, "b")) ids.insert(window_id(w));
    CHECK(ids.size() == 2 * window_dataset(seq, 10, 10, 2).size());
}
