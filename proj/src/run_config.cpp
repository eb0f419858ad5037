#include "trajfuse/run_config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "trajfuse/errors.hpp"

namespace trajfuse {

namespace {

using Json = nlohmann::ordered_json;

template <typename T>
void pick(const Json& j, const char* key, T& field) {
    if (j.contains(key)) {
        try {
            field = j.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw DataError(std::string("config key '") + key + "' has the wrong type");
        }
    }
}

}  // namespace

void RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config '" + path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("config '" + path + "' is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw DataError("config '" + path + "' must be a JSON object");

    pick(j, "model.joints", joints);
    pick(j, "model.t_in", t_in);
    pick(j, "model.t_out", t_out);
    pick(j, "model.hidden", hidden);
    pick(j, "model.depth", depth);
    pick(j, "model.slope", slope);
    pick(j, "model.dropout", dropout);

    pick(j, "train.steps", steps);
    pick(j, "train.batch", batch);
    pick(j, "train.lr", lr);
    pick(j, "train.checkpoint_every", checkpoint_every);
    pick(j, "train.tail_len", tail_len);
    pick(j, "train.tail_weight", tail_weight);

    pick(j, "data.path", data_path);
    pick(j, "data.stride", stride);

    pick(j, "synth.sequences", synth_sequences);
    pick(j, "synth.joints", synth_joints);
    pick(j, "synth.frames", synth_frames);
    pick(j, "synth.fps", synth_fps);
    pick(j, "synth.noise", synth_noise);

    pick(j, "eval.horizons", horizons);
    pick(j, "eval.variants", variants);

    pick(j, "render.frames", render_frames);
    pick(j, "render.sequence", render_sequence);
    pick(j, "render.overlay", overlay_path);

    pick(j, "checkpoint", checkpoint_path);
    pick(j, "seed", seed);
    pick(j, "out", out_dir);
}

std::string RunConfig::to_json_string() const {
    Json j;
    j["model.joints"] = joints;
    j["model.t_in"] = t_in;
    j["model.t_out"] = t_out;
    j["model.hidden"] = hidden;
    j["model.depth"] = depth;
    j["model.slope"] = slope;
    j["model.dropout"] = dropout;

    j["train.steps"] = steps;
    j["train.batch"] = batch;
    j["train.lr"] = lr;
    j["train.checkpoint_every"] = checkpoint_every;
    j["train.tail_len"] = tail_len;
    j["train.tail_weight"] = tail_weight;

    j["data.path"] = data_path;
    j["data.stride"] = stride;

    j["synth.sequences"] = synth_sequences;
    j["synth.joints"] = synth_joints;
    j["synth.frames"] = synth_frames;
    j["synth.fps"] = synth_fps;
    j["synth.noise"] = synth_noise;

    j["eval.horizons"] = horizons;
    j["eval.variants"] = variants;

    j["render.frames"] = render_frames;
    j["render.sequence"] = render_sequence;
    j["render.overlay"] = overlay_path;

    j["checkpoint"] = checkpoint_path;
    j["seed"] = seed;
    j["out"] = out_dir;
    return j.dump(2) + "\n";
}

std::vector<std::string> parse_string_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : csv) {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (ch != ' ') {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    for (const std::string& item : parse_string_list(csv)) {
        errno = 0;
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (end != item.c_str() + item.size() || errno == ERANGE) {
            throw DataError("'" + item + "' is not a number");
        }
        out.push_back(v);
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    for (const std::string& item : parse_string_list(csv)) {
        errno = 0;
        char* end = nullptr;
        const long v = std::strtol(item.c_str(), &end, 10);
        if (end != item.c_str() + item.size() || errno == ERANGE) {
            throw DataError("'" + item + "' is not an integer");
        }
        out.push_back(static_cast<int>(v));
    }
    return out;
}

}  // namespace trajfuse
