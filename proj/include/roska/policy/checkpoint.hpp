#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "roska/common/base64.hpp"
#include "roska/common/errors.hpp"
#include "roska/policy/net.hpp"

#include "nlohmann/json.hpp"

namespace roska::policy {

/// Checkpoint file: JSON header plus base64 little-endian float32 payload.
/// The payload round-trips ParamVector values bit-exactly.
inline nlohmann::ordered_json checkpoint_json(const ParamVector& params, const NetArch& arch,
                                              const std::string& seed_lineage) {
    check_arch(params, arch);
    std::vector<std::uint8_t> bytes(params.values.size() * 4);
    for (std::size_t i = 0; i < params.values.size(); ++i) {
        std::uint32_t u;
        std::memcpy(&u, &params.values[i], 4);
        bytes[4 * i + 0] = static_cast<std::uint8_t>(u & 0xff);
        bytes[4 * i + 1] = static_cast<std::uint8_t>((u >> 8) & 0xff);
        bytes[4 * i + 2] = static_cast<std::uint8_t>((u >> 16) & 0xff);
        bytes[4 * i + 3] = static_cast<std::uint8_t>((u >> 24) & 0xff);
    }
    nlohmann::ordered_json j;
    j["format"] = "roska-checkpoint-v1";
    j["arch"] = {{"obs_dim", arch.obs_dim},
                 {"action_dim", arch.action_dim},
                 {"hidden", arch.hidden},
                 {"activation", "tanh"}};
    char hash_hex[32];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(arch.hash()));
    j["arch_hash"] = hash_hex;
    j["length"] = params.values.size();
    j["seed_lineage"] = seed_lineage;
    j["dtype"] = "f32le";
    j["data"] = base64_encode(bytes.data(), bytes.size());
    return j;
}

inline void save_checkpoint(const std::string& path, const ParamVector& params,
                            const NetArch& arch, const std::string& seed_lineage) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write checkpoint: " + path);
    out << checkpoint_json(params, arch, seed_lineage).dump(2) << "\n";
}

struct Checkpoint {
    ParamVector params;
    NetArch arch;
    std::string seed_lineage;
};

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
    Checkpoint ck;
    ck.arch.obs_dim = j.at("arch").at("obs_dim").get<int>();
    ck.arch.action_dim = j.at("arch").at("action_dim").get<int>();
    ck.arch.hidden = j.at("arch").at("hidden").get<std::vector<int>>();
    ck.seed_lineage = j.value("seed_lineage", "");
    const auto bytes = base64_decode(j.at("data").get<std::string>());
    const std::size_t length = j.at("length").get<std::size_t>();
    if (bytes.size() != length * 4) throw Error("checkpoint payload length mismatch");
    ck.params.arch_hash = ck.arch.hash();
    ck.params.values.resize(length);
    for (std::size_t i = 0; i < length; ++i) {
        const std::uint32_t u = static_cast<std::uint32_t>(bytes[4 * i]) |
                                (static_cast<std::uint32_t>(bytes[4 * i + 1]) << 8) |
                                (static_cast<std::uint32_t>(bytes[4 * i + 2]) << 16) |
                                (static_cast<std::uint32_t>(bytes[4 * i + 3]) << 24);
        std::memcpy(&ck.params.values[i], &u, 4);
    }
    check_arch(ck.params, ck.arch);
    return ck;
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read checkpoint: " + path);
    nlohmann::json j;
    in >> j;
    return checkpoint_from_json(j);
}

}  // namespace roska::policy
