#ifndef SKLAB_HARNESS_HPP
#define SKLAB_HARNESS_HPP

// Resumable disorder ensembles.
//
// A run is described by a RunManifest. Unit i (one disorder sample) gets the
// seed mix(mix(master_seed, hash(experiment_id)), i). When a unit finishes
// its CSV rows are written to a sidecar file units/<index>-<hash>.csv, which
// doubles as the completion marker. Once every unit has a marker, the rows
// are concatenated in index order into records.csv and the per-(observable,
// n, beta) statistics are written to summary.json.
//
// Directory layout under <out>/<experiment_id>/:
//   manifest.json  records.csv  summary.json  failures.csv  units/

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "io.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace sklab {

inline constexpr const char* kCodeVersion = "sklab-1.0.0";

using Field = std::variant<std::int64_t, double, std::string>;
using Row = std::vector<Field>;

[[nodiscard]] inline std::string format_field(const Field& f) {
    if (const auto* i = std::get_if<std::int64_t>(&f)) return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&f)) return format_double(*d);
    return csv_escape(std::get<std::string>(f));
}

struct RunManifest {
    std::string experiment_id;
    std::uint64_t master_seed = 0;
    nlohmann::json parameters = nlohmann::json::object();
    std::uint64_t units = 0;
    std::vector<std::string> columns;      ///< CSV header
    std::vector<std::string> observables;  ///< numeric columns aggregated into EnsembleStats
    std::string code_version = kCodeVersion;

    [[nodiscard]] std::uint64_t unit_seed(std::uint64_t index) const {
        return mix_seed(mix_seed(master_seed, hash_string(experiment_id)), index);
    }

    /// Identifies a unit together with everything that determines its output.
    [[nodiscard]] std::uint64_t unit_hash(std::uint64_t index) const {
        std::uint64_t h = hash_string(parameters.dump() + "|" + code_version + "|" + experiment_id);
        return mix_seed(mix_seed(h, master_seed), index);
    }
};

inline void to_json(nlohmann::json& j, const RunManifest& m) {
    j = nlohmann::json{{"experiment_id", m.experiment_id}, {"master_seed", m.master_seed},
                       {"parameters", m.parameters},       {"units", m.units},
                       {"columns", m.columns},             {"observables", m.observables},
                       {"code_version", m.code_version}};
}

inline void from_json(const nlohmann::json& j, RunManifest& m) {
    j.at("experiment_id").get_to(m.experiment_id);
    j.at("master_seed").get_to(m.master_seed);
    m.parameters = j.value("parameters", nlohmann::json::object());
    j.at("units").get_to(m.units);
    j.at("columns").get_to(m.columns);
    m.observables = j.value("observables", std::vector<std::string>{});
    m.code_version = j.value("code_version", std::string(kCodeVersion));
}

enum class FailurePolicy { abort, skip };

struct RunPolicy {
    unsigned threads = 0;
    bool reproducible = true;  ///< pairwise reduction in index order
    FailurePolicy on_failure = FailurePolicy::abort;
    std::optional<std::uint64_t> unit_budget;  ///< stop after computing this many new units
};

struct UnitFailure {
    std::uint64_t sample_index = 0;
    std::uint64_t unit_seed = 0;
    std::string message;
};

/// A unit failed under the abort policy; carries the unit's provenance.
class UnitError : public Error {
public:
    explicit UnitError(UnitFailure failure)
        : Error("unit " + std::to_string(failure.sample_index) + " (seed " + std::to_string(failure.unit_seed) +
                ") failed: " + failure.message),
          failure_(std::move(failure)) {}
    [[nodiscard]] const UnitFailure& failure() const noexcept { return failure_; }

private:
    UnitFailure failure_;
};

using UnitEvaluator = std::function<std::vector<Row>(std::uint64_t unit_seed, std::uint64_t sample_index)>;

struct RunOutcome {
    std::vector<EnsembleStats> stats;
    std::uint64_t computed = 0;  ///< units evaluated in this call
    std::uint64_t reused = 0;    ///< units whose markers already existed
    std::vector<UnitFailure> failures;
    bool complete = false;
    std::filesystem::path directory;

    [[nodiscard]] const EnsembleStats* find(std::string_view observable, int n,
                                            std::optional<double> beta = std::nullopt) const {
        for (const auto& s : stats) {
            if (s.observable == observable && s.n == n && (!beta || (s.beta && *s.beta == *beta))) return &s;
        }
        return nullptr;
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

inline std::filesystem::path marker_path(const std::filesystem::path& dir, const RunManifest& m, std::uint64_t i) {
    return dir / "units" / (std::to_string(i) + "-" + hex64(m.unit_hash(i)) + ".csv");
}

}  // namespace detail

/// Statistics over CSV row lines, grouped by the "n" and "beta" columns.
[[nodiscard]] inline std::vector<EnsembleStats> aggregate_rows(const RunManifest& manifest,
                                                               const std::vector<std::string>& lines,
                                                               bool reproducible) {
    auto column = [&](std::string_view name) -> std::optional<std::size_t> {
        for (std::size_t c = 0; c < manifest.columns.size(); ++c) {
            if (manifest.columns[c] == name) return c;
        }
        return std::nullopt;
    };
    const auto n_col = column("n");
    const auto beta_col = column("beta");
    using Key = std::tuple<std::string, int, std::optional<double>>;
    std::vector<Key> order;
    std::map<Key, std::vector<double>> values;
    for (const auto& line : lines) {
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != manifest.columns.size()) throw ConsistencyError("record row has wrong column count: " + line);
        const int n = n_col ? static_cast<int>(parse_double(fields[*n_col])) : 0;
        std::optional<double> beta;
        if (beta_col && !fields[*beta_col].empty()) beta = parse_double(fields[*beta_col]);
        for (const auto& obs : manifest.observables) {
            const auto c = column(obs);
            if (!c) throw ConfigError("observable '" + obs + "' is not a column");
            Key key{obs, n, beta};
            auto [it, inserted] = values.try_emplace(key);
            if (inserted) order.push_back(key);
            it->second.push_back(parse_double(fields[*c]));
        }
    }
    std::vector<EnsembleStats> out;
    for (const auto& key : order) {
        EnsembleStats stats(std::get<0>(key), std::get<1>(key), std::get<2>(key));
        const auto& v = values[key];
        if (reproducible) {
            stats = reduce_pairwise(v, stats);
        } else {
            for (double x : v) stats.push(x);
        }
        out.push_back(std::move(stats));
    }
    return out;
}

[[nodiscard]] inline nlohmann::json stats_to_json(const EnsembleStats& s) {
    nlohmann::json j{{"observable", s.observable}, {"n", s.n},       {"count", s.count},
                     {"mean", s.mean},             {"stderr", s.stderr_of_mean()}, {"min", s.min},
                     {"max", s.max}};
    j["beta"] = s.beta ? nlohmann::json(*s.beta) : nlohmann::json(nullptr);
    return j;
}

/// Executes every unit of `manifest` that has no completion marker under
/// out_root/<experiment_id>, then assembles records and summary.
inline RunOutcome run_ensemble(const RunManifest& manifest, const std::filesystem::path& out_root,
                               const UnitEvaluator& evaluate, const RunPolicy& policy = {}) {
    if (manifest.experiment_id.empty()) throw ConfigError("manifest needs an experiment id");
    if (manifest.columns.empty()) throw ConfigError("manifest needs record columns");
    const auto dir = out_root / manifest.experiment_id;
    std::filesystem::create_directories(dir / "units");
    write_text_file_atomic(dir / "manifest.json", nlohmann::json(manifest).dump(2) + "\n");

    RunOutcome outcome;
    outcome.directory = dir;
    std::vector<std::uint64_t> pending;
    for (std::uint64_t i = 0; i < manifest.units; ++i) {
        if (std::filesystem::exists(detail::marker_path(dir, manifest, i))) {
            ++outcome.reused;
        } else {
            pending.push_back(i);
        }
    }
    if (policy.unit_budget && pending.size() > *policy.unit_budget) pending.resize(*policy.unit_budget);

    std::mutex failure_mutex;
    std::vector<UnitFailure> failures;
    parallel_map(pending.size(), policy.threads, [&](std::size_t slot) {
        const std::uint64_t index = pending[slot];
        const std::uint64_t seed = manifest.unit_seed(index);
        std::vector<Row> rows;
        try {
            rows = evaluate(seed, index);
        } catch (const std::exception& e) {
            UnitFailure f{index, seed, e.what()};
            if (policy.on_failure == FailurePolicy::abort) throw UnitError(std::move(f));
            std::lock_guard lock(failure_mutex);
            failures.push_back(std::move(f));
            return 0;
        }
        std::string text;
        for (const auto& row : rows) {
            if (row.size() != manifest.columns.size()) {
                throw ConsistencyError("evaluator returned a row with " + std::to_string(row.size()) +
                                       " fields; manifest declares " + std::to_string(manifest.columns.size()));
            }
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c > 0) text += ',';
                text += format_field(row[c]);
            }
            text += '\n';
        }
        write_text_file_atomic(detail::marker_path(dir, manifest, index), text);
        return 0;
    });
    outcome.computed = pending.size() - failures.size();
    std::sort(failures.begin(), failures.end(),
              [](const UnitFailure& a, const UnitFailure& b) { return a.sample_index < b.sample_index; });
    outcome.failures = failures;

    if (!failures.empty()) {
        std::string text = "sample_index,unit_seed,message\n";
        for (const auto& f : failures) {
            text += std::to_string(f.sample_index) + "," + std::to_string(f.unit_seed) + "," + csv_escape(f.message) + "\n";
        }
        write_text_file_atomic(dir / "failures.csv", text);
    }

    // Assemble whatever is complete, in index order.
    std::vector<std::string> lines;
    std::uint64_t done = 0;
    for (std::uint64_t i = 0; i < manifest.units; ++i) {
        const auto path = detail::marker_path(dir, manifest, i);
        if (!std::filesystem::exists(path)) continue;
        ++done;
        std::istringstream in(read_text_file(path));
        for (std::string line; std::getline(in, line);) {
            if (!line.empty()) lines.push_back(line);
        }
    }
    outcome.complete = done == manifest.units ||
                       (policy.on_failure == FailurePolicy::skip && done + failures.size() == manifest.units);
    outcome.stats = aggregate_rows(manifest, lines, policy.reproducible);
    if (!outcome.complete) return outcome;

    std::string records;
    for (std::size_t c = 0; c < manifest.columns.size(); ++c) {
        if (c > 0) records += ',';
        records += manifest.columns[c];
    }
    records += '\n';
    for (const auto& line : lines) records += line + '\n';
    write_text_file_atomic(dir / "records.csv", records);

    nlohmann::json summary{{"experiment_id", manifest.experiment_id},
                           {"master_seed", manifest.master_seed},
                           {"units", manifest.units},
                           {"completed", done},
                           {"failed", failures.size()},
                           {"code_version", manifest.code_version}};
    summary["stats"] = nlohmann::json::array();
    for (const auto& s : outcome.stats) summary["stats"].push_back(stats_to_json(s));
    write_text_file_atomic(dir / "summary.json", summary.dump(2) + "\n");
    return outcome;
}

}  // namespace sklab

#endif  // SKLAB_HARNESS_HPP
