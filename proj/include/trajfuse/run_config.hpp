#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace trajfuse {

// Every knob a run can take, merged from defaults, an optional JSON config
// file with flat dotted keys, and command-line flags (strongest last).
struct RunConfig {
    // model.*
    int joints = 22;
    int t_in = 10;
    int t_out = 10;
    int hidden = 64;
    int depth = 11;
    double slope = 0.2;
    double dropout = 0.1;

    // train.*
    int steps = 200;
    int batch = 16;
    double lr = 1e-4;
    int checkpoint_every = 0;
    int tail_len = 0;
    double tail_weight = 0.2;

    // data.*
    std::string data_path;
    int stride = 1;

    // synth.*
    int synth_sequences = 8;
    int synth_joints = 17;
    int synth_frames = 80;
    double synth_fps = 25;
    double synth_noise = 0.5;

    // eval.*
    std::string horizons = "80,160,320,400";
    std::string variants;  // empty = the full default ablation set

    // render.*
    std::string render_frames;
    std::string render_sequence;  // empty = first sequence
    std::string overlay_path;

    std::string checkpoint_path;
    std::uint64_t seed = 0;
    std::string out_dir = "out";

    void load_file(const std::string& path);  // applies the file over current values
    std::string to_json_string() const;       // flat dotted keys, stable order
};

std::vector<double> parse_double_list(const std::string& csv);
std::vector<int> parse_int_list(const std::string& csv);
std::vector<std::string> parse_string_list(const std::string& csv);

}  // namespace trajfuse
