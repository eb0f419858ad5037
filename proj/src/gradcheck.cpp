#include "trajfuse/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "trajfuse/network.hpp"
#include "trajfuse/training.hpp"

namespace trajfuse {

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(),
                                                  suffix) == 0;
}

std::string group_of(const std::string& name) {
    if (name.find(".skip") != std::string::npos && ends_with(name, ".kernel")) {
        return "skip kernels";
    }
    if (name.rfind("selector", 0) == 0) return "selectors";
    if (ends_with(name, ".kernel")) {
        if (name.rfind("p_tst.layer", 0) == 0) return "p_tst kernels";
        if (name.rfind("v_tst.layer", 0) == 0) return "v_tst kernels";
        if (name.rfind("reinf_tst.layer", 0) == 0) return "reinf_tst kernels";
    }
    return "";
}

Tensor random_bounded(const std::vector<int>& shape, Rng& rng) {
    Tensor t = zeros(shape);
    for (int i = 0; i < t.numel(); ++i) t[i] = uniform_in(rng, -2.0, 2.0);
    return t;
}

}  // namespace

GradCheckResult run_gradient_check(std::uint64_t seed) {
    ModelConfig cfg;
    cfg.joints = 5;
    cfg.t_in = 4;
    cfg.t_out = 3;
    cfg.hidden = 8;
    cfg.depth = 11;
    cfg.dropout = 0.0;  // finite differences need two identical forward passes
    cfg.init_seed = derive_seed(seed, "init");
    TwoStreamModelParams params = init_params(cfg);

    Rng data_rng(derive_seed(seed, "gradcheck-data"));
    const Tensor input = random_bounded({cfg.t_in, cfg.joints, 3}, data_rng);
    const Tensor target = random_bounded({cfg.t_out, cfg.joints, 3}, data_rng);
    const std::vector<double> weights(static_cast<std::size_t>(cfg.t_out), 1.0);

    auto loss_value = [&]() {
        return weighted_loss(model_forward(input, params, false).final, target, weights)[0];
    };

    auto tape = Tape::create();
    for_each_tensor(params, [&tape](const std::string&, Tensor& t) { tape->watch(t); });
    Tensor loss = weighted_loss(model_forward(input, params, false).final, target, weights);
    tape->backward(loss);
    std::map<std::string, Array> grads;
    for_each_tensor(params, [&](const std::string& name, Tensor& t) {
        grads[name] = tape->grad(t);
    });
    tape.reset();  // lets the finite-difference passes below run tape-free

    std::map<std::string, std::vector<Tensor*>> groups;
    std::map<std::string, std::vector<std::string>> group_names;
    for_each_tensor(params, [&](const std::string& name, Tensor& t) {
        const std::string g = group_of(name);
        if (g.empty()) return;
        groups[g].push_back(&t);
        group_names[g].push_back(name);
    });

    constexpr double h = 1e-5;
    constexpr int samples_per_group = 3;
    Rng pick(derive_seed(seed, "gradcheck-pick"));
    GradCheckResult result;
    for (auto& [group, tensors] : groups) {
        for (int s = 0; s < samples_per_group; ++s) {
            const std::size_t which = pick() % tensors.size();
            Tensor& t = *tensors[which];
            const int idx = static_cast<int>(pick() % static_cast<std::uint64_t>(t.numel()));

            const double orig = t[idx];
            t[idx] = orig + h;
            const double lp = loss_value();
            t[idx] = orig - h;
            const double lm = loss_value();
            t[idx] = orig;

            const double fd = (lp - lm) / (2 * h);
            const double g = grads[group_names[group][which]][idx];
            const double rel = std::abs(fd - g) / std::max({std::abs(fd), std::abs(g), 1e-6});
            result.samples.push_back({group, group_names[group][which], idx, g, fd, rel});
            result.max_rel_err = std::max(result.max_rel_err, rel);
        }
    }
    return result;
}

}  // namespace trajfuse
