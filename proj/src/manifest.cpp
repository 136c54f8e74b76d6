#include "zipsel/manifest.hpp"

#include "zipsel/errors.hpp"
#include "zipsel/version.hpp"

#include <json.hpp>
#include <zlib.h>

#include <array>
#include <fstream>

namespace zipsel {

namespace {

using nlohmann::json;

json codec_to_json(const CodecConfig& codec) {
    json j;
    j["name"] = "deflate";
    j["level"] = codec.level;
    if (codec.context_cap_bytes) {
        j["context_cap_bytes"] = *codec.context_cap_bytes;
    } else {
        j["context_cap_bytes"] = nullptr;
    }
    return j;
}

CodecConfig codec_from_json(const json& j) {
    CodecConfig codec;
    if (j.at("name").get<std::string>() != "deflate") {
        throw ValidationError("manifest names an unsupported codec");
    }
    codec.level = j.at("level").get<int>();
    if (!j.at("context_cap_bytes").is_null()) {
        codec.context_cap_bytes = j.at("context_cap_bytes").get<std::uint64_t>();
    }
    return codec;
}

json trajectory_to_json(const std::vector<TrajectoryPoint>& trajectory) {
    json arr = json::array();
    for (const TrajectoryPoint& p : trajectory) {
        arr.push_back({{"iteration", p.iteration},
                       {"set_ratio", p.set_ratio},
                       {"wall_seconds", p.wall_seconds}});
    }
    return arr;
}

std::vector<TrajectoryPoint> trajectory_from_json(const json& arr) {
    std::vector<TrajectoryPoint> out;
    for (const json& j : arr) {
        TrajectoryPoint p;
        p.iteration = j.at("iteration").get<std::uint32_t>();
        p.set_ratio = j.at("set_ratio").get<double>();
        p.wall_seconds = j.at("wall_seconds").get<double>();
        out.push_back(p);
    }
    return out;
}

} // namespace

std::string to_json_string(const RunManifest& m) {
    json j;
    j["tool"] = m.tool;
    j["version"] = m.version.empty() ? kToolVersion : m.version;
    j["strategy"] = m.strategy;
    j["input"] = {{"path", m.input_path},
                  {"crc32", m.input_crc32},
                  {"mode", m.mode == SampleKind::pair ? "pair" : "single"},
                  {"samples", m.pool_samples}};
    j["budget"] = {{"unit", to_string(m.config.budget.unit)}, {"amount", m.config.budget.amount}};
    j["selector"] = {{"k1", m.config.k1},
                     {"k2", m.config.k2},
                     {"k3", m.config.k3},
                     {"fine_with_selected", m.config.fine_with_selected},
                     {"threads", m.config.threads}};
    j["codec"] = codec_to_json(m.config.codec);
    if (m.seed) {
        j["seed"] = *m.seed;
    } else {
        j["seed"] = nullptr;
    }
    j["selected_ids"] = m.selected_ids;
    j["result"] = {{"final_ratio", m.final_ratio.ratio},
                   {"original_bytes", m.final_ratio.original_bytes},
                   {"compressed_bytes", m.final_ratio.compressed_bytes},
                   {"spent",
                    {{"samples", m.spent.samples}, {"bytes", m.spent.bytes}, {"tokens", m.spent.tokens}}}};
    j["trajectory"] = trajectory_to_json(m.trajectory);
    j["timings"] = {{"total_seconds", m.total_wall_seconds}};
    j["warnings"] = m.warnings;
    return j.dump(2);
}

RunManifest manifest_from_json_string(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ValidationError("malformed manifest JSON");
    }
    try {
        RunManifest m;
        m.tool = j.at("tool").get<std::string>();
        m.version = j.at("version").get<std::string>();
        m.strategy = j.at("strategy").get<std::string>();
        m.input_path = j.at("input").at("path").get<std::string>();
        m.input_crc32 = j.at("input").at("crc32").get<std::string>();
        m.mode = j.at("input").at("mode").get<std::string>() == "pair" ? SampleKind::pair
                                                                       : SampleKind::single;
        m.pool_samples = j.at("input").at("samples").get<std::uint64_t>();
        m.config.budget.unit = budget_unit_from_string(j.at("budget").at("unit").get<std::string>());
        m.config.budget.amount = j.at("budget").at("amount").get<std::uint64_t>();
        m.config.k1 = j.at("selector").at("k1").get<std::uint32_t>();
        m.config.k2 = j.at("selector").at("k2").get<std::uint32_t>();
        m.config.k3 = j.at("selector").at("k3").get<std::uint32_t>();
        m.config.fine_with_selected = j.at("selector").at("fine_with_selected").get<bool>();
        m.config.threads = j.at("selector").at("threads").get<unsigned>();
        m.config.codec = codec_from_json(j.at("codec"));
        if (!j.at("seed").is_null()) m.seed = j.at("seed").get<std::uint64_t>();
        m.selected_ids = j.at("selected_ids").get<std::vector<std::string>>();
        m.final_ratio.ratio = j.at("result").at("final_ratio").get<double>();
        m.final_ratio.original_bytes = j.at("result").at("original_bytes").get<std::uint64_t>();
        m.final_ratio.compressed_bytes = j.at("result").at("compressed_bytes").get<std::uint64_t>();
        m.spent.samples = j.at("result").at("spent").at("samples").get<std::uint64_t>();
        m.spent.bytes = j.at("result").at("spent").at("bytes").get<std::uint64_t>();
        m.spent.tokens = j.at("result").at("spent").at("tokens").get<std::uint64_t>();
        m.trajectory = trajectory_from_json(j.at("trajectory"));
        m.total_wall_seconds = j.at("timings").at("total_seconds").get<double>();
        m.warnings = j.at("warnings").get<std::vector<std::string>>();
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("manifest is missing fields: ") + e.what());
    }
}

void save_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write \"" + path.string() + "\"");
    out << to_json_string(manifest) << '\n';
    if (!out) throw ValidationError("failed writing \"" + path.string() + "\"");
}

RunManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open \"" + path.string() + "\"");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return manifest_from_json_string(text);
}

std::string file_crc32(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open \"" + path.string() + "\"");
    uLong crc = crc32(0L, Z_NULL, 0);
    std::array<char, 1 << 16> buf;
    while (in) {
        in.read(buf.data(), buf.size());
        std::streamsize got = in.gcount();
        if (got > 0) {
            crc = crc32(crc, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(got));
        }
    }
    char hex[9];
    std::snprintf(hex, sizeof(hex), "%08lx", static_cast<unsigned long>(crc));
    return hex;
}

} // namespace zipsel
