#ifndef SKLAB_IO_HPP
#define SKLAB_IO_HPP

// Text formats: shortest round-trip number formatting, CSV fields, and the
// JSON record for a disorder sample:
//
//   {"n": 12, "seed": 7, "sample_index": 0, "source": "generated",
//    "couplings": [...], "checksum": "9c3e..."}
//
// "couplings" is row-major upper-triangular (pair (i,j), i<j, at
// i*(2n-i-1)/2 + j-i-1) and may be omitted for generated samples.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "model.hpp"

namespace sklab {

/// Shortest decimal text that parses back to exactly the same double.
[[nodiscard]] inline std::string format_double(double value) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw Error("format_double failed");
    return std::string(buf, end);
}

[[nodiscard]] inline double parse_double(std::string_view text) {
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size()) {
        throw ConfigError("not a number: '" + std::string(text) + "'");
    }
    return value;
}

[[nodiscard]] inline std::string hex64(std::uint64_t value) {
    char buf[17];
    const auto [end, ec] = std::to_chars(buf, buf + 16, value, 16);
    std::string out(buf, end);
    return std::string(16 - out.size(), '0') + out;
}

[[nodiscard]] inline std::uint64_t parse_hex64(std::string_view text) {
    std::uint64_t value = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value, 16);
    if (ec != std::errc{} || end != text.data() + text.size()) throw ConfigError("bad hex value '" + std::string(text) + "'");
    return value;
}

/// Quotes a CSV field when it contains a separator, quote or newline.
[[nodiscard]] inline std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

[[nodiscard]] inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes through a temporary file and renames, so readers never see a partial file.
inline void write_text_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << contents;
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

[[nodiscard]] inline nlohmann::json disorder_to_json(const Disorder& d, bool generated, bool include_couplings = true) {
    nlohmann::json j;
    j["n"] = d.n();
    j["seed"] = d.seed();
    j["sample_index"] = d.sample_index();
    j["source"] = generated ? "generated" : "explicit";
    if (include_couplings) {
        j["couplings"] = std::vector<double>(d.couplings().begin(), d.couplings().end());
        j["checksum"] = hex64(coupling_checksum(d));
    }
    return j;
}

/// Reads a disorder record. Generated records are regenerated from their seed
/// and, when couplings are present, compared bit-for-bit; a checksum, when
/// present, must match. Any mismatch raises IntegrityError.
[[nodiscard]] inline Disorder disorder_from_json(const nlohmann::json& j) {
    try {
        const int n = j.at("n").get<int>();
        const auto seed = j.value("seed", std::uint64_t{0});
        const auto index = j.value("sample_index", std::uint64_t{0});
        const bool generated = j.value("source", std::string("explicit")) == "generated";
        if (!j.contains("couplings")) {
            if (!generated) throw ConfigError("explicit disorder record has no couplings");
            return sample_disorder(n, seed, index);
        }
        Disorder d(n, j.at("couplings").get<std::vector<double>>(), seed, index);
        if (j.contains("checksum") && parse_hex64(j.at("checksum").get<std::string>()) != coupling_checksum(d)) {
            throw IntegrityError("disorder integrity failure: coupling checksum mismatch (n=" + std::to_string(n) +
                                 ", sample_index=" + std::to_string(index) + ")");
        }
        if (generated && !(d == sample_disorder(n, seed, index))) {
            throw IntegrityError("disorder integrity failure: couplings differ from those generated by seed " +
                                 std::to_string(seed) + ", sample_index " + std::to_string(index));
        }
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed disorder record: ") + e.what());
    }
}

[[nodiscard]] inline Disorder load_disorder(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("cannot parse " + path.string() + ": " + e.what());
    }
    return disorder_from_json(j);
}

inline void save_disorder(const std::filesystem::path& path, const Disorder& d, bool generated) {
    write_text_file_atomic(path, disorder_to_json(d, generated).dump(2) + "\n");
}

}  // namespace sklab

#endif  // SKLAB_IO_HPP
