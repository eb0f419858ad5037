#include "trajfuse/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "trajfuse/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace trajfuse {

namespace {

constexpr char kMagic[8] = {'T', 'S', 'T', 'C', 'K', 'P', 'T', '1'};

nlohmann::ordered_json config_to_json(const ModelConfig& cfg) {
    nlohmann::ordered_json j;
    j["joints"] = cfg.joints;
    j["t_in"] = cfg.t_in;
    j["t_out"] = cfg.t_out;
    j["hidden"] = cfg.hidden;
    j["depth"] = cfg.depth;
    j["slope"] = cfg.slope;
    j["dropout"] = cfg.dropout;
    j["init_seed"] = cfg.init_seed;
    return j;
}

ModelConfig config_from_json(const nlohmann::ordered_json& j) {
    ModelConfig cfg;
    cfg.joints = j.at("joints").get<int>();
    cfg.t_in = j.at("t_in").get<int>();
    cfg.t_out = j.at("t_out").get<int>();
    cfg.hidden = j.at("hidden").get<int>();
    cfg.depth = j.at("depth").get<int>();
    cfg.slope = j.at("slope").get<double>();
    cfg.dropout = j.at("dropout").get<double>();
    cfg.init_seed = j.at("init_seed").get<std::uint64_t>();
    return cfg;
}

}  // namespace

void save_checkpoint(const std::string& path, const TwoStreamModelParams& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open checkpoint '" + path + "' for writing");
    out.write(kMagic, sizeof kMagic);
    const std::string header = config_to_json(params.cfg).dump();
    const std::uint64_t len = header.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    for_each_tensor(params, [&out](const std::string&, const Tensor& t) {
        out.write(reinterpret_cast<const char*>(t.data.data()),
                  static_cast<std::streamsize>(sizeof(double) * t.data.size()));
    });
    if (!out) throw DataError("write to checkpoint '" + path + "' failed");
}

TwoStreamModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint '" + path + "' for reading");

    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
        throw DataError("'" + path + "' is not a TSTCKPT1 checkpoint");
    }
    std::uint64_t len = 0;
    if (!in.read(reinterpret_cast<char*>(&len), sizeof len) || len > (1u << 20)) {
        throw DataError("checkpoint '" + path + "' has a corrupt header length");
    }
    std::string header(len, '\0');
    if (!in.read(header.data(), static_cast<std::streamsize>(len))) {
        throw DataError("checkpoint '" + path + "' header is truncated");
    }

    ModelConfig cfg;
    try {
        cfg = config_from_json(nlohmann::ordered_json::parse(header));
        cfg.validate();
    } catch (const nlohmann::json::exception& e) {
        throw DataError("checkpoint '" + path + "' header is not valid config JSON: " +
                        std::string(e.what()));
    } catch (const ShapeError& e) {
        throw DataError("checkpoint '" + path + "' config is invalid: " + std::string(e.what()));
    }

    TwoStreamModelParams params = zero_params(cfg);
    for_each_tensor(params, [&in, &path](const std::string& name, Tensor& t) {
        if (!in.read(reinterpret_cast<char*>(t.data.data()),
                     static_cast<std::streamsize>(sizeof(double) * t.data.size()))) {
            throw DataError("checkpoint '" + path + "' is truncated at tensor " + name);
        }
    });
    char extra;
    if (in.read(&extra, 1)) {
        throw DataError("checkpoint '" + path + "' has trailing bytes after the last tensor");
    }
    return params;
}

}  // namespace trajfuse
