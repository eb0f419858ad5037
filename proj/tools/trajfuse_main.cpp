#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trajfuse/ablation.hpp"
#include "trajfuse/checkpoint.hpp"
#include "trajfuse/errors.hpp"
#include "trajfuse/evaluation.hpp"
#include "trajfuse/gradcheck.hpp"
#include "trajfuse/log.hpp"
#include "trajfuse/mocap_csv.hpp"
#include "trajfuse/motion.hpp"
#include "trajfuse/network.hpp"
#include "trajfuse/run_config.hpp"
#include "trajfuse/svg_render.hpp"
#include "trajfuse/training.hpp"

namespace fs = std::filesystem;
using namespace trajfuse;

namespace {

void write_resolved(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const fs::path path = fs::path(cfg.out_dir) / "resolved.json";
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << cfg.to_json_string();
}

ModelConfig model_config(const RunConfig& cfg) {
    ModelConfig m;
    m.joints = cfg.joints;
    m.t_in = cfg.t_in;
    m.t_out = cfg.t_out;
    m.hidden = cfg.hidden;
    m.depth = cfg.depth;
    m.slope = cfg.slope;
    m.dropout = cfg.dropout;
    m.init_seed = derive_seed(cfg.seed, "init");
    return m;
}

TrainConfig train_config(const RunConfig& cfg) {
    TrainConfig t;
    t.steps = cfg.steps;
    t.batch_size = cfg.batch;
    t.adam.lr = cfg.lr;
    if (cfg.tail_len > 0) {
        t.frame_weights = make_frame_weights(cfg.t_out, cfg.tail_len, cfg.tail_weight);
    }
    t.shuffle_seed = derive_seed(cfg.seed, "shuffle");
    t.dropout_seed = derive_seed(cfg.seed, "dropout");
    t.checkpoint_every = cfg.checkpoint_every;
    return t;
}

MocapFile load_data(const RunConfig& cfg) {
    if (cfg.data_path.empty()) throw DataError("no dataset path given (use --data)");
    if (!fs::exists(cfg.data_path)) {
        throw DataError("dataset path '" + cfg.data_path + "' does not exist");
    }
    return load_mocap_csv_file(cfg.data_path);
}

std::vector<SampleWindow> all_windows(const MocapFile& file, int t_in, int t_out, int stride) {
    std::vector<SampleWindow> windows;
    for (const NamedSequence& ns : file.sequences) {
        std::vector<SampleWindow> w = window_dataset(ns.seq, t_in, t_out, stride, ns.id);
        windows.insert(windows.end(), w.begin(), w.end());
    }
    return windows;
}

MocapFile synth_benchmark(const RunConfig& cfg) {
    MocapFile file;
    file.skeleton = chain_skeleton(cfg.synth_joints);
    for (int i = 0; i < cfg.synth_sequences; ++i) {
        SynthParams p = make_periodic_synth(cfg.synth_joints, cfg.synth_frames, cfg.synth_fps,
                                            derive_seed(cfg.seed, "synth") +
                                                static_cast<std::uint64_t>(i));
        p.noise_std = cfg.synth_noise;
        NamedSequence ns;
        ns.id = "s" + std::to_string(i);
        ns.seq = generate_synthetic(p);
        file.sequences.push_back(std::move(ns));
    }
    return file;
}

int cmd_synth(const RunConfig& cfg) {
    if (cfg.synth_sequences < 1) throw DataError("synth needs at least one sequence");
    MocapFile file = synth_benchmark(cfg);
    fs::create_directories(cfg.out_dir);
    const std::string path = (fs::path(cfg.out_dir) / "synth.csv").string();
    write_mocap_csv_file(path, file);
    write_resolved(cfg);
    std::cout << "wrote " << path << " (" << file.sequences.size() << " sequences)\n";
    return 0;
}

int cmd_train(RunConfig cfg) {
    MocapFile file = load_data(cfg);
    cfg.joints = file.skeleton.joint_count();
    std::vector<SampleWindow> windows = all_windows(file, cfg.t_in, cfg.t_out, cfg.stride);
    if (windows.empty()) throw DataError("dataset yields no training windows");

    TwoStreamModelParams params = init_params(model_config(cfg));
    fs::create_directories(cfg.out_dir);
    TrainConfig tc = train_config(cfg);
    tc.checkpoint_path = (fs::path(cfg.out_dir) / "model.ckpt").string();

    log_info("training on " + std::to_string(windows.size()) + " windows for " +
             std::to_string(tc.steps) + " steps");
    TrainLog log = train(params, windows, tc);
    write_train_log_csv_file((fs::path(cfg.out_dir) / "train_log.csv").string(), log);
    write_resolved(cfg);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", log.records.back().loss);
    std::cout << "final loss " << buf << " after " << tc.steps << " steps; checkpoint at "
              << tc.checkpoint_path << "\n";
    return 0;
}

int cmd_predict(const RunConfig& cfg) {
    if (cfg.checkpoint_path.empty()) throw DataError("no checkpoint given (use --checkpoint)");
    TwoStreamModelParams params = load_checkpoint(cfg.checkpoint_path);
    MocapFile file = load_data(cfg);
    if (file.skeleton.joint_count() != params.cfg.joints) {
        throw DataError("dataset has " + std::to_string(file.skeleton.joint_count()) +
                        " joints, checkpoint expects " + std::to_string(params.cfg.joints));
    }

    MocapFile out_file;
    out_file.skeleton = file.skeleton;
    for (const NamedSequence& ns : file.sequences) {
        const int f = ns.seq.frame_count();
        if (f < params.cfg.t_in) {
            throw DataError("sequence '" + ns.id + "' has " + std::to_string(f) +
                            " frames, need " + std::to_string(params.cfg.t_in));
        }
        // predict the continuation of the most recent observed frames
        std::vector<Pose> observed(ns.seq.frames.end() - params.cfg.t_in, ns.seq.frames.end());
        Tensor pred = model_forward(poses_to_tensor(observed), params, false).final;
        NamedSequence po;
        po.id = ns.id;
        po.seq.fps = ns.seq.fps;
        po.seq.frames = tensor_to_poses(pred);
        out_file.sequences.push_back(std::move(po));
    }
    fs::create_directories(cfg.out_dir);
    const std::string path = (fs::path(cfg.out_dir) / "prediction.csv").string();
    write_mocap_csv_file(path, out_file);
    write_resolved(cfg);
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_eval(RunConfig cfg) {
    if (cfg.checkpoint_path.empty()) throw DataError("no checkpoint given (use --checkpoint)");
    TwoStreamModelParams params = load_checkpoint(cfg.checkpoint_path);
    MocapFile file = load_data(cfg);
    if (file.skeleton.joint_count() != params.cfg.joints) {
        throw DataError("dataset has " + std::to_string(file.skeleton.joint_count()) +
                        " joints, checkpoint expects " + std::to_string(params.cfg.joints));
    }
    std::vector<SampleWindow> windows =
        all_windows(file, params.cfg.t_in, params.cfg.t_out, cfg.stride);
    if (windows.empty()) throw DataError("dataset yields no evaluation windows");

    auto predict = [&params](const Tensor& input) {
        return model_forward(input, params, false).final;
    };
    HorizonTable table = evaluate_horizons(predict, windows, parse_double_list(cfg.horizons),
                                           file.sequences.front().seq.fps, "model");
    fs::create_directories(cfg.out_dir);
    write_horizon_csv_file((fs::path(cfg.out_dir) / "horizons.csv").string(), table);
    write_resolved(cfg);
    std::cout << format_horizon_text(table);
    return 0;
}

int cmd_ablate(RunConfig cfg) {
    MocapFile file = cfg.data_path.empty() ? synth_benchmark(cfg) : load_data(cfg);
    cfg.joints = file.skeleton.joint_count();

    // Hold out whole sequences when possible so splits never share frames.
    std::vector<SampleWindow> train_set;
    std::vector<SampleWindow> eval_set;
    if (file.sequences.size() >= 2) {
        const std::size_t n_eval = std::max<std::size_t>(1, file.sequences.size() / 4);
        const std::size_t n_train = file.sequences.size() - n_eval;
        for (std::size_t i = 0; i < file.sequences.size(); ++i) {
            const NamedSequence& ns = file.sequences[i];
            std::vector<SampleWindow> w =
                window_dataset(ns.seq, cfg.t_in, cfg.t_out, cfg.stride, ns.id);
            auto& dst = i < n_train ? train_set : eval_set;
            dst.insert(dst.end(), w.begin(), w.end());
        }
    } else {
        std::vector<SampleWindow> w = window_dataset(file.sequences.front().seq, cfg.t_in,
                                                     cfg.t_out, cfg.stride,
                                                     file.sequences.front().id);
        const std::size_t n_eval = std::max<std::size_t>(1, w.size() / 4);
        if (w.size() < 2) throw DataError("dataset yields too few windows to split");
        train_set.assign(w.begin(), w.end() - static_cast<std::ptrdiff_t>(n_eval));
        eval_set.assign(w.end() - static_cast<std::ptrdiff_t>(n_eval), w.end());
    }
    if (train_set.empty() || eval_set.empty()) {
        throw DataError("dataset yields too few windows to split");
    }

    AblationSetup setup;
    setup.base = model_config(cfg);
    setup.budget = train_config(cfg);
    setup.horizons_ms = parse_double_list(cfg.horizons);
    setup.fps = file.sequences.front().seq.fps;
    setup.seed = cfg.seed;
    const std::vector<std::string> variants =
        cfg.variants.empty() ? default_ablation_variants() : parse_string_list(cfg.variants);

    AblationReport report = run_ablation(train_set, eval_set, variants, setup);
    fs::create_directories(cfg.out_dir);
    write_ablation_csv_file((fs::path(cfg.out_dir) / "ablation.csv").string(), report);
    write_resolved(cfg);
    std::cout << format_ablation_text(report);
    return 0;
}

int cmd_gradcheck(const RunConfig& cfg) {
    const GradCheckResult result = run_gradient_check(cfg.seed);
    for (const GradCheckSample& s : result.samples) {
        std::printf("%-18s %-26s [%5d]  autodiff % .9e  fd % .9e  rel %.3e\n", s.group.c_str(),
                    s.name.c_str(), s.index, s.autodiff, s.fd, s.rel_err);
    }
    std::printf("max relative error %.6e\n", result.max_rel_err);
    write_resolved(cfg);
    return result.max_rel_err < 1e-3 ? 0 : 3;
}

int cmd_render(const RunConfig& cfg) {
    MocapFile file = load_data(cfg);
    const NamedSequence* seq = nullptr;
    for (const NamedSequence& ns : file.sequences) {
        if (cfg.render_sequence.empty() || ns.id == cfg.render_sequence) {
            seq = &ns;
            break;
        }
    }
    if (!seq) throw DataError("sequence '" + cfg.render_sequence + "' not found");
    const std::vector<int> frames = parse_int_list(cfg.render_frames);
    if (frames.empty()) throw DataError("no frame indices given (use --frames)");

    MotionSequence overlay;
    bool has_overlay = false;
    if (!cfg.overlay_path.empty()) {
        MocapFile of = load_mocap_csv_file(cfg.overlay_path);
        const NamedSequence* os = nullptr;
        for (const NamedSequence& ns : of.sequences) {
            if (ns.id == seq->id) os = &ns;
        }
        if (!os) os = &of.sequences.front();
        overlay = os->seq;
        has_overlay = true;
    }

    fs::create_directories(cfg.out_dir);
    const std::string path = (fs::path(cfg.out_dir) / "render.svg").string();
    render_pose_svg(seq->seq, file.skeleton, frames, path, has_overlay ? &overlay : nullptr);
    write_resolved(cfg);
    std::cout << "wrote " << path << "\n";
    return 0;
}

int run_cli(int argc, char** argv) {
    RunConfig cfg;
    // First pass: the config file loads before CLI11 binds flag overrides.
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) {
            cfg.load_file(argv[i + 1]);
            break;
        }
        if (a.rfind("--config=", 0) == 0) {
            cfg.load_file(a.substr(9));
            break;
        }
    }

    CLI::App app{"two-stream convolutional human motion prediction"};
    app.require_subcommand(1);
    std::string config_dummy;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_dummy, "JSON config file with flat dotted keys");
        sub->add_option("--seed", cfg.seed, "master seed; init/shuffle/dropout/synth derive from it");
        sub->add_option("--out", cfg.out_dir, "output directory");
    };
    auto add_model = [&](CLI::App* sub) {
        sub->add_option("--t-in", cfg.t_in, "observed frames per window");
        sub->add_option("--t-out", cfg.t_out, "predicted frames per window");
        sub->add_option("--depth", cfg.depth, "TST depth (3x3 layers per block)");
        sub->add_option("--hidden", cfg.hidden, "TST hidden width");
        sub->add_option("--dropout", cfg.dropout, "dropout rate");
    };
    auto add_train = [&](CLI::App* sub) {
        sub->add_option("--steps", cfg.steps, "training steps");
        sub->add_option("--batch", cfg.batch, "batch size");
        sub->add_option("--lr", cfg.lr, "Adam learning rate");
        sub->add_option("--stride", cfg.stride, "window stride");
    };

    CLI::App* synth = app.add_subcommand("synth", "write a synthetic mocap CSV benchmark");
    add_common(synth);
    synth->add_option("--joints", cfg.synth_joints, "joints per skeleton");
    synth->add_option("--frames", cfg.synth_frames, "frames per sequence");
    synth->add_option("--sequences", cfg.synth_sequences, "number of sequences");
    synth->add_option("--fps", cfg.synth_fps, "frame rate");
    synth->add_option("--noise", cfg.synth_noise, "coordinate noise std in mm");

    CLI::App* tr = app.add_subcommand("train", "train the two-stream model on a mocap CSV");
    add_common(tr);
    add_model(tr);
    add_train(tr);
    tr->add_option("--data", cfg.data_path, "mocap CSV dataset");
    tr->add_option("--tail-len", cfg.tail_len, "frames at the end with reduced loss weight");
    tr->add_option("--tail-weight", cfg.tail_weight, "weight for those frames");
    tr->add_option("--checkpoint-every", cfg.checkpoint_every, "extra checkpoint cadence");

    CLI::App* pr = app.add_subcommand("predict", "predict continuations for every sequence");
    add_common(pr);
    pr->add_option("--checkpoint", cfg.checkpoint_path, "trained model checkpoint");
    pr->add_option("--data", cfg.data_path, "mocap CSV with observed frames");

    CLI::App* ev = app.add_subcommand("eval", "horizon error table for a trained model");
    add_common(ev);
    ev->add_option("--checkpoint", cfg.checkpoint_path, "trained model checkpoint");
    ev->add_option("--data", cfg.data_path, "mocap CSV dataset");
    ev->add_option("--horizons", cfg.horizons, "comma-separated horizons in ms");
    ev->add_option("--stride", cfg.stride, "window stride");

    CLI::App* ab = app.add_subcommand("ablate", "depth and fusion-mode sweep");
    add_common(ab);
    add_model(ab);
    add_train(ab);
    ab->add_option("--data", cfg.data_path, "mocap CSV (omit to use the synthetic benchmark)");
    ab->add_option("--horizons", cfg.horizons, "comma-separated horizons in ms");
    ab->add_option("--variants", cfg.variants, "comma-separated variant names");

    CLI::App* gc = app.add_subcommand("gradcheck", "finite-difference gradient audit");
    add_common(gc);

    CLI::App* re = app.add_subcommand("render", "orthographic SVG of selected frames");
    add_common(re);
    re->add_option("--data", cfg.data_path, "mocap CSV dataset");
    re->add_option("--frames", cfg.render_frames, "comma-separated frame indices");
    re->add_option("--sequence", cfg.render_sequence, "sequence id (default: first)");
    re->add_option("--overlay", cfg.overlay_path, "second CSV drawn in a contrast color");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (app.got_subcommand(synth)) return cmd_synth(cfg);
    if (app.got_subcommand(tr)) return cmd_train(cfg);
    if (app.got_subcommand(pr)) return cmd_predict(cfg);
    if (app.got_subcommand(ev)) return cmd_eval(cfg);
    if (app.got_subcommand(ab)) return cmd_ablate(cfg);
    if (app.got_subcommand(gc)) return cmd_gradcheck(cfg);
    if (app.got_subcommand(re)) return cmd_render(cfg);
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const NumericError& e) {
        log_error(e.what());
        return 3;
    } catch (const DataError& e) {
        log_error(e.what());
        return 2;
    } catch (const ShapeError& e) {
        log_error(e.what());
        return 2;
    } catch (const std::exception& e) {
        log_error(e.what());
        return 1;
    }
}
