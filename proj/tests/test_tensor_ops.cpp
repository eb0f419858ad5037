#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "trajfuse/ops.hpp"
#include "trajfuse/rng.hpp"
#include "trajfuse/tensor.hpp"

using namespace trajfuse;

namespace {

Tensor rand_tensor(const std::vector<int>& shape, Rng& rng, double lo = -2.0, double hi = 2.0) {
    Tensor t = zeros(shape);
    for (int i = 0; i < t.numel(); ++i) t[i] = uniform_in(rng, lo, hi);
    return t;
}

// Reference convolution that materializes the zero-padded input explicitly;
// the production kernel instead bounds-checks against the original array.
Tensor conv_reference(const Tensor& in, const Tensor& k, const Tensor& b, int stride, int pad) {
    const int ci = in.dim(0), h = in.dim(1), w = in.dim(2);
    const int co = k.dim(0), kh = k.dim(2), kw = k.dim(3);
    const int ph = h + 2 * pad, pw = w + 2 * pad;
    std::vector<double> padded(static_cast<std::size_t>(ci) * ph * pw, 0.0);
    for (int c = 0; c < ci; ++c) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                padded[(static_cast<std::size_t>(c) * ph + y + pad) * pw + x + pad] =
                    in.at3(c, y, x);
            }
        }
    }
    const int ho = (h + 2 * pad - kh) / stride + 1;
    const int wo = (w + 2 * pad - kw) / stride + 1;
    Tensor out = zeros({co, ho, wo});
    for (int oc = 0; oc < co; ++oc) {
        for (int oy = 0; oy < ho; ++oy) {
            for (int ox = 0; ox < wo; ++ox) {
                double acc = b[oc];
                for (int c = 0; c < ci; ++c) {
                    for (int r = 0; r < kh; ++r) {
                        for (int s = 0; s < kw; ++s) {
                            acc += padded[(static_cast<std::size_t>(c) * ph + oy * stride + r) *
                                              pw +
                                          ox * stride + s] *
                                   k[((oc * ci + c) * kh + r) * kw + s];
                        }
                    }
                }
                out.at3(oc, oy, ox) = acc;
            }
        }
    }
    return out;
}

// Finite-difference audit of d(sum(f(x) * probe))/dx against one backward().
template <typename F>
void check_grad_against_fd(Tensor x, F&& f, double tol = 1e-3) {
    Rng rng(99);
    Tensor probe = rand_tensor(f(x).shape, rng);

    auto tape = Tape::create();
    tape->watch(x);
    tape->backward(sum(mul(f(x), probe)));
    const Array g = tape->grad(x);
    tape.reset();  // x's tape link expires, so the loop below runs eagerly

    const double h = 1e-5;
    for (int i = 0; i < x.numel(); ++i) {
        const double orig = x[i];
        x[i] = orig + h;
        const double lp = sum(mul(f(x), probe))[0];
        x[i] = orig - h;
        const double lm = sum(mul(f(x), probe))[0];
        x[i] = orig;
        const double fd = (lp - lm) / (2 * h);
        const double rel = std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), 1e-6});
        CAPTURE(i);
        CHECK(rel < tol);
    }
}

}  // namespace

TEST_CASE("tensor construction and validation") {
    Tensor t = from_values({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(t.numel() == 6);
    CHECK(t.rank() == 2);
    CHECK(t.dim(1) == 3);
    CHECK(t[4] == 5.0);

    CHECK_THROWS_AS(zeros({2, 0}), ShapeError);
    CHECK_THROWS_AS(zeros({-1}), ShapeError);
    CHECK_THROWS_AS(from_values({2, 2}, {1, 2, 3}), ShapeError);

    Tensor r3 = zeros({2, 3, 4});
    r3.at3(1, 2, 3) = 7;
    CHECK(r3[1 * 12 + 2 * 4 + 3] == 7.0);
}

TEST_CASE("conv2d hand-computed 3x3 all-ones with padding 1") {
    Tensor in = constant({1, 3, 3}, 1.0);
    Tensor k = constant({1, 1, 3, 3}, 1.0);
    Tensor b = zeros({1});
    Tensor out = conv2d(in, k, b, 1, 1);
    const std::vector<double> want{4, 6, 4, 6, 9, 6, 4, 6, 4};
    REQUIRE(out.numel() == 9);
    for (int i = 0; i < 9; ++i) CHECK(out[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("conv2d 1x1 unit kernel is the identity") {
    Rng rng(3);
    Tensor in = rand_tensor({1, 4, 5}, rng);
    Tensor out = conv2d(in, constant({1, 1, 1, 1}, 1.0), zeros({1}), 1, 0);
    for (int i = 0; i < in.numel(); ++i) CHECK(out[i] == in[i]);
}

TEST_CASE("conv2d matches the padded-copy reference on random shapes") {
    Rng rng(1234);
    // [4,6,6] input against a [3,4,3,3] kernel, then a shape sweep.
    {
        Tensor in = rand_tensor({4, 6, 6}, rng);
        Tensor k = rand_tensor({3, 4, 3, 3}, rng);
        Tensor b = rand_tensor({3}, rng);
        Tensor got = conv2d(in, k, b, 1, 1);
        Tensor want = conv_reference(in, k, b, 1, 1);
        REQUIRE(same_shape(got, want));
        for (int i = 0; i < got.numel(); ++i) {
            CHECK(std::abs(got[i] - want[i]) < 1e-9);
        }
    }
    for (int trial = 0; trial < 20; ++trial) {
        const int ci = 1 + static_cast<int>(rng() % 4);
        const int co = 1 + static_cast<int>(rng() % 4);
        const int kh = 1 + static_cast<int>(rng() % 4);
        const int kw = 1 + static_cast<int>(rng() % 4);
        const int stride = 1 + static_cast<int>(rng() % 3);
        const int pad = static_cast<int>(rng() % 3);
        const int ho = 1 + static_cast<int>(rng() % 5);
        const int wo = 1 + static_cast<int>(rng() % 5);
        const int h = (ho - 1) * stride + kh - 2 * pad;
        const int w = (wo - 1) * stride + kw - 2 * pad;
        if (h < 1 || w < 1) continue;

        Tensor in = rand_tensor({ci, h, w}, rng);
        Tensor k = rand_tensor({co, ci, kh, kw}, rng);
        Tensor b = rand_tensor({co}, rng);
        Tensor got = conv2d(in, k, b, stride, pad);
        Tensor want = conv_reference(in, k, b, stride, pad);
        REQUIRE(same_shape(got, want));
        for (int i = 0; i < got.numel(); ++i) {
            CAPTURE(trial);
            CHECK(std::abs(got[i] - want[i]) < 1e-9);
        }
    }
}

TEST_CASE("conv2d rejects inconsistent shapes") {
    Tensor in = zeros({2, 4, 4});
    CHECK_THROWS_AS(conv2d(in, zeros({1, 3, 3, 3}), zeros({1}), 1, 1), ShapeError);
    CHECK_THROWS_AS(conv2d(in, zeros({1, 2, 3, 3}), zeros({2}), 1, 1), ShapeError);
    // (4 + 0 - 3) / 2 is not an integer
    CHECK_THROWS_AS(conv2d(in, zeros({1, 2, 3, 3}), zeros({1}), 2, 0), ShapeError);
    CHECK_THROWS_AS(conv2d(in, zeros({1, 2, 3, 3}), zeros({1}), 0, 0), ShapeError);
    CHECK_THROWS_AS(conv2d(in, zeros({1, 2, 3, 3}), zeros({1}), 1, -1), ShapeError);
    // kernel larger than padded input
    CHECK_THROWS_AS(conv2d(in, zeros({1, 2, 9, 9}), zeros({1}), 1, 0), ShapeError);
}

TEST_CASE("conv2d gradients match finite differences") {
    Rng rng(42);
    Tensor in = rand_tensor({2, 4, 3}, rng);
    Tensor k = rand_tensor({3, 2, 3, 3}, rng);
    Tensor b = rand_tensor({3}, rng);

    check_grad_against_fd(in, [&](const Tensor& x) { return conv2d(x, k, b, 1, 1); });
    check_grad_against_fd(k, [&](const Tensor& kk) { return conv2d(in, kk, b, 1, 1); });
    check_grad_against_fd(b, [&](const Tensor& bb) { return conv2d(in, k, bb, 1, 1); });

    // strided, unpadded variant
    Tensor in2 = rand_tensor({2, 5, 5}, rng);
    Tensor k2 = rand_tensor({2, 2, 3, 3}, rng);
    Tensor b2 = rand_tensor({2}, rng);
    check_grad_against_fd(in2, [&](const Tensor& x) { return conv2d(x, k2, b2, 2, 0); });
    check_grad_against_fd(k2, [&](const Tensor& kk) { return conv2d(in2, kk, b2, 2, 0); });
}

TEST_CASE("leaky_relu values and gradient") {
    Tensor x = from_values({3}, {2.0, -1.0, 0.0});
    Tensor y = leaky_relu(x, 0.2);
    CHECK(y[0] == 2.0);
    CHECK(y[1] == doctest::Approx(-0.2).epsilon(1e-15));
    CHECK(y[2] == 0.0);

    // gradient at x = -1 is the slope, against central differences
    Tensor neg = from_values({1}, {-1.0});
    auto tape = Tape::create();
    tape->watch(neg);
    tape->backward(sum(leaky_relu(neg, 0.2)));
    const double g = tape->grad(neg)[0];
    const double h = 1e-5;
    const double fd =
        (leaky_relu(from_values({1}, {-1.0 + h}), 0.2)[0] -
         leaky_relu(from_values({1}, {-1.0 - h}), 0.2)[0]) /
        (2 * h);
    CHECK(g == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(std::abs(g - fd) < 1e-9);

    Rng rng(5);
    Tensor r = rand_tensor({3, 4}, rng);
    check_grad_against_fd(r, [](const Tensor& t) { return leaky_relu(t, 0.2); });

    CHECK_THROWS_AS(leaky_relu(x, -0.1), ShapeError);
    CHECK_THROWS_AS(leaky_relu(x, 1.0), ShapeError);
}

TEST_CASE("dropout identity modes") {
    Rng rng(11);
    Tensor x = rand_tensor({4, 5}, rng);
    Rng mask_rng(1);
    Tensor inference = dropout(x, 0.7, false, mask_rng);
    for (int i = 0; i < x.numel(); ++i) CHECK(inference[i] == x[i]);
    Tensor rate0 = dropout(x, 0.0, true, mask_rng);
    for (int i = 0; i < x.numel(); ++i) CHECK(rate0[i] == x[i]);
    CHECK_THROWS_AS(dropout(x, 1.0, true, mask_rng), ShapeError);
    CHECK_THROWS_AS(dropout(x, -0.1, true, mask_rng), ShapeError);
}

TEST_CASE("dropout keeps the expected value and a fixed seed fixes the mask") {
    Tensor ones_in = constant({100000}, 1.0);
    Rng rng_a(77);
    Tensor out = dropout(ones_in, 0.5, true, rng_a);
    const double mean = out.data.mean();
    CHECK(mean > 0.98);
    CHECK(mean < 1.02);

    Rng rng_b(77);
    Tensor out_b = dropout(ones_in, 0.5, true, rng_b);
    for (int i = 0; i < 1000; ++i) CHECK(out[i] == out_b[i]);

    // surviving entries carry the inverted-dropout scale exactly
    for (int i = 0; i < out.numel(); ++i) {
        CHECK((out[i] == 0.0 || out[i] == 2.0));
    }
}

TEST_CASE("dropout backward is the sampled mask") {
    Rng rng(21);
    Tensor x = rand_tensor({6, 7}, rng, 0.5, 2.0);  // strictly positive, so mask is out/in
    auto tape = Tape::create();
    tape->watch(x);
    Rng mask_rng(4);
    Tensor y = dropout(x, 0.4, true, mask_rng);
    tape->backward(sum(y));
    const Array g = tape->grad(x);
    for (int i = 0; i < x.numel(); ++i) {
        CHECK(g[i] == doctest::Approx(y[i] / x[i]).epsilon(1e-12));
    }
}

TEST_CASE("concat_channels values and gradient routing") {
    Tensor a = from_values({1, 2, 2}, {1, 2, 3, 4});
    Tensor b = from_values({1, 2, 2}, {5, 6, 7, 8});
    Tensor cat = concat_channels({a, b});
    REQUIRE(cat.shape == std::vector<int>{2, 2, 2});
    for (int i = 0; i < 4; ++i) {
        CHECK(cat[i] == a[i]);
        CHECK(cat[4 + i] == b[i]);
    }

    Tensor single = concat_channels({a});
    for (int i = 0; i < 4; ++i) CHECK(single[i] == a[i]);

    auto tape = Tape::create();
    tape->watch(a);
    tape->watch(b);
    tape->backward(sum(concat_channels({a, b})));
    for (int i = 0; i < 4; ++i) {
        CHECK(tape->grad(a)[i] == 1.0);
        CHECK(tape->grad(b)[i] == 1.0);
    }

    CHECK_THROWS_AS(concat_channels({a, zeros({1, 3, 2})}), ShapeError);
    CHECK_THROWS_AS(concat_channels({}), ShapeError);

    Rng rng(8);
    Tensor p = rand_tensor({2, 3, 2}, rng);
    Tensor q = rand_tensor({1, 3, 2}, rng);
    check_grad_against_fd(p, [&](const Tensor& t) { return concat_channels({t, q}); });
}

TEST_CASE("slice_channels values and zero-embedding backward") {
    Rng rng(9);
    Tensor x = rand_tensor({4, 2, 3}, rng);
    Tensor mid = slice_channels(x, 1, 2);
    REQUIRE(mid.shape == std::vector<int>{2, 2, 3});
    for (int c = 0; c < 2; ++c) {
        for (int i = 0; i < 6; ++i) CHECK(mid[c * 6 + i] == x[(c + 1) * 6 + i]);
    }
    CHECK_THROWS_AS(slice_channels(x, 3, 2), ShapeError);
    CHECK_THROWS_AS(slice_channels(x, -1, 1), ShapeError);

    check_grad_against_fd(x, [](const Tensor& t) { return slice_channels(t, 1, 2); });

    // untouched channels get exactly zero gradient
    auto tape = Tape::create();
    tape->watch(x);
    tape->backward(sum(slice_channels(x, 1, 2)));
    const Array g = tape->grad(x);
    for (int i = 0; i < 6; ++i) {
        CHECK(g[i] == 0.0);
        CHECK(g[18 + i] == 0.0);
        CHECK(g[6 + i] == 1.0);
        CHECK(g[12 + i] == 1.0);
    }
}

TEST_CASE("channel_diff values and gradient") {
    Tensor x = from_values({3, 1, 2}, {0, 10, 1, 11, 3, 14});
    Tensor d = channel_diff(x);
    REQUIRE(d.shape == std::vector<int>{2, 1, 2});
    CHECK(d[0] == 1.0);
    CHECK(d[1] == 1.0);
    CHECK(d[2] == 2.0);
    CHECK(d[3] == 3.0);
    CHECK_THROWS_AS(channel_diff(zeros({1, 2, 2})), ShapeError);

    Rng rng(10);
    Tensor r = rand_tensor({4, 2, 3}, rng);
    check_grad_against_fd(r, [](const Tensor& t) { return channel_diff(t); });
}

TEST_CASE("elementwise arithmetic and scale") {
    Tensor a = from_values({2, 2}, {1, 2, 3, 4});
    Tensor b = from_values({2, 2}, {10, 20, 30, 40});
    CHECK((a + b)[3] == 44.0);
    CHECK((b - a)[0] == 9.0);
    CHECK((a * b)[2] == 90.0);
    CHECK((a * 2.5)[1] == 5.0);
    CHECK((2.5 * a)[1] == 5.0);
    CHECK_THROWS_AS(add(a, zeros({2, 3})), ShapeError);

    Rng rng(12);
    Tensor x = rand_tensor({3, 3}, rng);
    Tensor y = rand_tensor({3, 3}, rng);
    check_grad_against_fd(x, [&](const Tensor& t) { return mul(t, y); });
    check_grad_against_fd(x, [&](const Tensor& t) { return mul(t, t); });
    check_grad_against_fd(x, [&](const Tensor& t) { return sub(t, y); });
    check_grad_against_fd(x, [&](const Tensor& t) { return add(t, y); });
    check_grad_against_fd(x, [&](const Tensor& t) { return scale(t, -1.7); });
}

TEST_CASE("backward on sum gives all-ones and skips disconnected leaves") {
    Rng rng(13);
    Tensor x = rand_tensor({3, 4}, rng);
    Tensor unused = rand_tensor({2}, rng);
    auto tape = Tape::create();
    tape->watch(x);
    tape->watch(unused);
    tape->backward(sum(x));
    for (int i = 0; i < x.numel(); ++i) CHECK(tape->grad(x)[i] == 1.0);
    for (int i = 0; i < unused.numel(); ++i) CHECK(tape->grad(unused)[i] == 0.0);
}

TEST_CASE("backward validates its loss") {
    Rng rng(14);
    Tensor x = rand_tensor({2, 2}, rng);
    auto tape = Tape::create();
    tape->watch(x);
    Tensor y = x + x;
    CHECK_THROWS_AS(tape->backward(y), ShapeError);  // not scalar

    Tensor off_tape = scalar_tensor(1.0);
    CHECK_THROWS_AS(tape->backward(off_tape), ShapeError);

    auto other = Tape::create();
    Tensor z = rand_tensor({2, 2}, rng);
    other->watch(z);
    CHECK_THROWS_AS(tape->backward(sum(z)), ShapeError);  // scalar, but wrong tape
}

TEST_CASE("operations refuse to mix two live tapes") {
    Rng rng(15);
    Tensor a = rand_tensor({2, 2}, rng);
    Tensor b = rand_tensor({2, 2}, rng);
    auto t1 = Tape::create();
    auto t2 = Tape::create();
    t1->watch(a);
    t2->watch(b);
    CHECK_THROWS_AS(add(a, b), ShapeError);
}

TEST_CASE("an expired tape turns tensors back into constants") {
    Rng rng(16);
    Tensor x = rand_tensor({2, 2}, rng);
    {
        auto tape = Tape::create();
        tape->watch(x);
        CHECK(x.on_tape());
    }
    Tensor y = x + x;  // tape is gone; this must not record or throw
    CHECK_FALSE(y.on_tape());
}

TEST_CASE("non-finite results are rejected") {
    Tensor big = constant({2}, 1e308);
    CHECK_THROWS_AS(add(big, big), NumericError);
    Tensor inf_in = constant({2}, std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(scale(inf_in, 1.0), NumericError);
}

TEST_CASE("forward replay is bitwise deterministic") {
    Rng rng_a(31);
    Rng rng_b(31);
    Tensor in_a = rand_tensor({2, 4, 4}, rng_a);
    Tensor in_b = rand_tensor({2, 4, 4}, rng_b);
    Tensor k_a = rand_tensor({2, 2, 3, 3}, rng_a);
    Tensor k_b = rand_tensor({2, 2, 3, 3}, rng_b);
    Tensor out_a = leaky_relu(conv2d(in_a, k_a, zeros({2}), 1, 1), 0.2);
    Tensor out_b = leaky_relu(conv2d(in_b, k_b, zeros({2}), 1, 1), 0.2);
    REQUIRE(out_a.numel() == out_b.numel());
    for (int i = 0; i < out_a.numel(); ++i) CHECK(out_a[i] == out_b[i]);
}
