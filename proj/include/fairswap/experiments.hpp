#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairswap/metrics.hpp"
#include "fairswap/swarm.hpp"

namespace fairswap::experiments {

enum class Scale : std::uint8_t { Desk, Full };

/// Throws InvalidConfig for anything but "desk" or "full".
Scale parse_scale(std::string_view text);

struct Arm {
    std::string name;  // proposed, w25..w100, tft
    swarm::StrategySpec strategy;

    bool operator==(const Arm&) const = default;
};

/// "proposed", "tft" or "w<percent>". Throws BadScenarioFile.
Arm parse_arm(std::string_view text);

struct ScenarioPreset {
    std::string name;
    swarm::ScenarioConfig config;  // strategy and seed are set per run
    std::vector<Arm> arms;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> outputs;  // metric columns the report charts

    bool operator==(const ScenarioPreset&) const = default;
};

std::vector<std::string> preset_names();

/// Throws UnknownPreset.
ScenarioPreset preset(std::string_view name, Scale scale = Scale::Full);

/// Flat `key = value` text, `#` starts a comment. Throws BadScenarioFile.
ScenarioPreset parse_scenario(std::string_view text, std::string_view fallback_name);

/// Reads and parses a scenario file; the stem names it unless `name=` is set.
/// Throws IoError or BadScenarioFile.
ScenarioPreset load_scenario(const std::filesystem::path& path);

/// Inverse of parse_scenario.
std::string format_scenario(const ScenarioPreset& preset);

struct RunResult {
    std::string arm;
    std::uint64_t seed = 0;
    std::vector<metrics::MetricRecord> stream;
    bool converged = true;
    std::size_t cap = 0;
    double leecher_upload_mean = 0.0;  // over original leechers, final round
    std::optional<double> freeloader_median;  // completion round, when every freeloader finished
};

/// One arm, one seed. Never throws NonConvergence; the result is flagged instead.
RunResult run_one(const ScenarioPreset& preset, const Arm& arm, std::uint64_t seed);

struct ExperimentOutput {
    std::vector<RunResult> runs;
    std::vector<std::filesystem::path> files;
};

/// Runs every arm for every seed (`seeds` overrides the preset's) and writes
///   <name>_<arm>_<seed>.csv, <name>_aggregate.csv and <name>_summary.csv
/// into `out_dir`. Throws IoError.
ExperimentOutput run_experiment(const ScenarioPreset& preset, const std::optional<std::vector<std::uint64_t>>& seeds,
                                const std::filesystem::path& out_dir);

// --- CSV ---------------------------------------------------------------------

inline constexpr std::string_view kCsvHeader =
    "round,arm,seed,avg_pieces,seeder_upload_mean,seeder_upload_per_interval,upload_variance,completions";

/// Shortest decimal that reads back to the same double.
std::string format_double(double value);

std::string metric_csv(const RunResult& run);

struct MetricCsv {
    std::string arm;
    std::uint64_t seed = 0;
    std::vector<metrics::MetricRecord> records;  // `completed` is not stored
    std::optional<std::size_t> nonconvergence_cap;
};

/// Throws MissingData on a malformed file.
MetricCsv parse_metric_csv(std::string_view text);

struct AggregateRow {
    std::size_t round = 0;
    std::string arm;
    std::size_t seeds = 0;
    double avg_pieces_mean = 0, avg_pieces_median = 0;
    double seeder_upload_mean_mean = 0, seeder_upload_mean_median = 0;
    double seeder_upload_per_interval_mean = 0, seeder_upload_per_interval_median = 0;
    double upload_variance_mean = 0, upload_variance_median = 0;
    double completions_mean = 0;

    bool operator==(const AggregateRow&) const = default;
};

/// Mean and median across seeds per round. A seed that stopped early keeps
/// its last values (with zero completions) until the longest run ends.
std::vector<AggregateRow> aggregate(const std::vector<MetricCsv>& runs);

std::string aggregate_csv(const std::vector<AggregateRow>& rows);
std::vector<AggregateRow> parse_aggregate_csv(std::string_view text);

struct SummaryRow {
    std::string arm;
    std::uint64_t seed = 0;
    std::size_t rounds = 0;
    bool converged = true;
    double final_seeder_upload_mean = 0;
    double final_leecher_upload_mean = 0;
    double final_upload_variance = 0;
    std::optional<double> freeloader_median;

    bool operator==(const SummaryRow&) const = default;
};

std::string summary_csv(const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> parse_summary_csv(std::string_view text);
SummaryRow summarize(const RunResult& run);

// --- report ------------------------------------------------------------------

struct ReportOutput {
    std::vector<std::filesystem::path> charts;
    std::filesystem::path markdown;
};

/// Charts and a headline table for every *_summary.csv found in `dir`.
/// Throws MissingData when there is nothing to report on.
ReportOutput report(const std::filesystem::path& dir);

double median(std::vector<double> values);

}  // namespace fairswap::experiments
