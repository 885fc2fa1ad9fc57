#include "fairswap/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fairswap/error.hpp"

namespace fairswap::experiments {

namespace {

using swarm::Churn;
using swarm::ScenarioConfig;
using swarm::StopCondition;
using swarm::Strategy;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    while (true) {
        const auto at = s.find(sep);
        out.push_back(s.substr(0, at));
        if (at == std::string_view::npos) break;
        s.remove_prefix(at + 1);
    }
    return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
    auto out = split(text, '\n');
    if (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
    s = trim(s);
    T v{};
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || end != s.data() + s.size()) return std::nullopt;
    return v;
}

template <typename T>
T csv_number(std::string_view s, std::string_view what) {
    const auto v = parse_number<T>(s);
    if (!v) throw Error(ErrorCode::MissingData, "bad " + std::string(what) + " value '" + std::string(s) + "'");
    return *v;
}

ScenarioConfig base(std::size_t nodes, std::size_t seeders, std::size_t pieces, Churn churn) {
    ScenarioConfig c;
    c.n_nodes = nodes;
    c.n_seeders = seeders;
    c.n_pieces = pieces;
    c.churn = churn;
    return c;
}

std::vector<Arm> sweep() { return {parse_arm("proposed"), parse_arm("w25"), parse_arm("w50"), parse_arm("w75"), parse_arm("w100")}; }

std::vector<std::uint64_t> default_seeds() { return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}; }

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << content;
    if (!out.flush()) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string join_u64(const std::vector<std::uint64_t>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + std::to_string(xs[i]);
    return out;
}

}  // namespace

Scale parse_scale(std::string_view text) {
    if (text == "desk") return Scale::Desk;
    if (text == "full") return Scale::Full;
    throw Error(ErrorCode::InvalidConfig, "scale must be desk or full, got '" + std::string(text) + "'");
}

Arm parse_arm(std::string_view text) {
    text = trim(text);
    Arm arm;
    arm.name = std::string(text);
    if (text == "proposed") {
        arm.strategy.kind = Strategy::Proposed;
        return arm;
    }
    if (text == "tft") {
        arm.strategy.kind = Strategy::TitForTat;
        return arm;
    }
    if (text.size() > 1 && text.front() == 'w') {
        const auto pct = parse_number<unsigned>(text.substr(1));
        if (pct && *pct <= 100) {
            arm.strategy.kind = Strategy::Willingness;
            arm.strategy.willingness = *pct / 100.0;
            return arm;
        }
    }
    throw Error(ErrorCode::BadScenarioFile, "unknown arm '" + std::string(text) + "'");
}

std::vector<std::string> preset_names() { return {"fig4", "fig5a", "fig5b", "fig6", "fig7a", "fig7b"}; }

ScenarioPreset preset(std::string_view name, Scale scale) {
    const bool desk = scale == Scale::Desk;
    ScenarioPreset p;
    p.name = std::string(name);
    p.seeds = default_seeds();
    if (name == "fig4") {
        p.config = desk ? base(100, 10, 25, Churn::Static) : base(1000, 10, 100, Churn::Static);
        p.arms = sweep();
        p.outputs = {"avg_pieces"};
    } else if (name == "fig5a") {
        p.config = desk ? base(100, 10, 25, Churn::LeaveOnComplete) : base(1000, 10, 100, Churn::LeaveOnComplete);
        p.arms = sweep();
        p.outputs = {"seeder_upload_mean", "seeder_upload_per_interval"};
    } else if (name == "fig5b") {
        p.config = base(100, 10, 100, Churn::Static);
        p.arms = sweep();
        p.outputs = {"upload_variance"};
    } else if (name == "fig6") {
        p.config = desk ? base(100, 10, 25, Churn::Static) : base(500, 10, 100, Churn::Static);
        p.config.n_freeloaders = desk ? 2 : 5;
        p.config.stop = StopCondition::FreeloadersComplete;
        p.arms = {parse_arm("proposed"), parse_arm("w50")};
        p.outputs = {"freeloader_completion"};
    } else if (name == "fig7a" || name == "fig7b") {
        p.config = base(30, 6, 100, Churn::LeaveOnComplete);
        p.arms = {parse_arm("proposed"), parse_arm("tft")};
        p.outputs = name == "fig7a" ? std::vector<std::string>{"leecher_uploads"}
                                    : std::vector<std::string>{"seeder_upload_mean"};
    } else {
        throw Error(ErrorCode::UnknownPreset, "no preset named '" + std::string(name) + "'");
    }
    return p;
}

ScenarioPreset parse_scenario(std::string_view text, std::string_view fallback_name) {
    ScenarioPreset p;
    p.name = std::string(fallback_name);
    p.arms = {parse_arm("proposed")};
    p.seeds = default_seeds();
    p.outputs = {"avg_pieces"};
    auto& c = p.config;
    std::set<std::string, std::less<>> seen;

    const auto lines = lines_of(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto line = lines[i];
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto where = "line " + std::to_string(i + 1);
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw Error(ErrorCode::BadScenarioFile, where + ": expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        const auto value = trim(line.substr(eq + 1));
        if (!seen.insert(key).second) throw Error(ErrorCode::BadScenarioFile, where + ": duplicate key " + key);

        auto size = [&]() {
            const auto v = parse_number<std::size_t>(value);
            if (!v) throw Error(ErrorCode::BadScenarioFile, where + ": " + key + " wants a whole number");
            return *v;
        };
        auto flag = [&]() {
            if (value == "1" || value == "true") return true;
            if (value == "0" || value == "false") return false;
            throw Error(ErrorCode::BadScenarioFile, where + ": " + key + " wants true or false");
        };

        if (key == "name") {
            if (value.empty()) throw Error(ErrorCode::BadScenarioFile, where + ": empty name");
            p.name = std::string(value);
        } else if (key == "nodes") {
            c.n_nodes = size();
        } else if (key == "seeders") {
            c.n_seeders = size();
        } else if (key == "freeloaders") {
            c.n_freeloaders = size();
        } else if (key == "pieces") {
            c.n_pieces = size();
        } else if (key == "degree") {
            c.degree = size();
        } else if (key == "capacity") {
            c.capacity = size();
        } else if (key == "unchoke_period") {
            c.unchoke_period = size();
        } else if (key == "pair_wait") {
            c.pair_wait = size();
        } else if (key == "round_cap") {
            c.round_cap = size();
        } else if (key == "piece_bytes") {
            c.piece_bytes = size();
        } else if (key == "modulus_bits") {
            c.modulus_bits = static_cast<unsigned>(size());
        } else if (key == "tft_slots") {
            c.strategy.tft_slots = size();
        } else if (key == "tft_rotation") {
            c.strategy.tft_rotation = size();
        } else if (key == "tft_window") {
            c.strategy.tft_window = size();
        } else if (key == "secure") {
            c.secure_channels = flag();
        } else if (key == "churn") {
            if (value == "static") {
                c.churn = Churn::Static;
            } else if (value == "leave") {
                c.churn = Churn::LeaveOnComplete;
            } else {
                throw Error(ErrorCode::BadScenarioFile, where + ": churn is static or leave");
            }
        } else if (key == "stop") {
            if (value == "all") {
                c.stop = StopCondition::AllComplete;
            } else if (value == "freeloaders") {
                c.stop = StopCondition::FreeloadersComplete;
            } else {
                throw Error(ErrorCode::BadScenarioFile, where + ": stop is all or freeloaders");
            }
        } else if (key == "arms") {
            p.arms.clear();
            for (const auto a : split(value, ',')) {
                try {
                    p.arms.push_back(parse_arm(a));
                } catch (const Error& e) {
                    throw Error(ErrorCode::BadScenarioFile, where + ": " + e.what());
                }
            }
        } else if (key == "seeds") {
            p.seeds.clear();
            for (const auto s : split(value, ',')) {
                const auto v = parse_number<std::uint64_t>(s);
                if (!v) throw Error(ErrorCode::BadScenarioFile, where + ": bad seed '" + std::string(s) + "'");
                p.seeds.push_back(*v);
            }
        } else if (key == "outputs") {
            p.outputs.clear();
            for (const auto o : split(value, ',')) p.outputs.emplace_back(trim(o));
        } else {
            throw Error(ErrorCode::BadScenarioFile, where + ": unknown key " + key);
        }
    }
    if (p.arms.empty() || p.seeds.empty()) throw Error(ErrorCode::BadScenarioFile, "need at least one arm and seed");
    try {
        swarm::validate(c);
    } catch (const Error& e) {
        throw Error(ErrorCode::BadScenarioFile, e.what());
    }
    return p;
}

ScenarioPreset load_scenario(const std::filesystem::path& path) {
    return parse_scenario(read_file(path), path.stem().string());
}

std::string format_scenario(const ScenarioPreset& p) {
    const auto& c = p.config;
    std::ostringstream out;
    out << "name = " << p.name << '\n'
        << "nodes = " << c.n_nodes << '\n'
        << "seeders = " << c.n_seeders << '\n'
        << "freeloaders = " << c.n_freeloaders << '\n'
        << "pieces = " << c.n_pieces << '\n'
        << "degree = " << c.degree << '\n'
        << "churn = " << swarm::to_string(c.churn) << '\n'
        << "stop = " << swarm::to_string(c.stop) << '\n'
        << "capacity = " << c.capacity << '\n'
        << "unchoke_period = " << c.unchoke_period << '\n'
        << "pair_wait = " << c.pair_wait << '\n';
    if (c.round_cap) out << "round_cap = " << *c.round_cap << '\n';
    out << "secure = " << (c.secure_channels ? "true" : "false") << '\n'
        << "piece_bytes = " << c.piece_bytes << '\n'
        << "modulus_bits = " << c.modulus_bits << '\n'
        << "tft_slots = " << c.strategy.tft_slots << '\n'
        << "tft_rotation = " << c.strategy.tft_rotation << '\n'
        << "tft_window = " << c.strategy.tft_window << '\n';
    out << "arms = ";
    for (std::size_t i = 0; i < p.arms.size(); ++i) out << (i ? "," : "") << p.arms[i].name;
    out << "\nseeds = " << join_u64(p.seeds) << "\noutputs = ";
    for (std::size_t i = 0; i < p.outputs.size(); ++i) out << (i ? "," : "") << p.outputs[i];
    out << '\n';
    return out.str();
}

// --- runs ----------------------------------------------------------------------

RunResult run_one(const ScenarioPreset& preset, const Arm& arm, std::uint64_t seed) {
    ScenarioConfig c = preset.config;
    // Tit-for-tat knobs live on the scenario; the arm picks the policy.
    const auto knobs = c.strategy;
    c.strategy = arm.strategy;
    c.strategy.tft_slots = knobs.tft_slots;
    c.strategy.tft_rotation = knobs.tft_rotation;
    c.strategy.tft_window = knobs.tft_window;
    c.seed = seed;

    RunResult r;
    r.arm = arm.name;
    r.seed = seed;
    r.cap = c.round_cap.value_or(swarm::default_round_cap(c));
    auto state = swarm::build_network(c);
    try {
        swarm::run_until(state);
    } catch (const swarm::NonConvergenceError&) {
        r.converged = false;
    }
    r.stream = std::move(state.metric_stream);

    double uploads = 0;
    std::size_t leechers = 0;
    std::vector<double> freeloader_rounds;
    bool freeloaders_done = true;
    for (const auto& p : state.peers) {
        if (p.role == swarm::Role::Leecher) {
            uploads += static_cast<double>(p.uploads);
            leechers += 1;
        } else if (p.role == swarm::Role::Freeloader) {
            if (p.completed_round) {
                freeloader_rounds.push_back(static_cast<double>(*p.completed_round));
            } else {
                freeloaders_done = false;
            }
        }
    }
    r.leecher_upload_mean = leechers ? uploads / static_cast<double>(leechers) : 0.0;
    if (!freeloader_rounds.empty() && freeloaders_done) r.freeloader_median = median(freeloader_rounds);
    return r;
}

ExperimentOutput run_experiment(const ScenarioPreset& preset, const std::optional<std::vector<std::uint64_t>>& seeds,
                                const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) {
        throw Error(ErrorCode::IoError, "cannot use output directory " + out_dir.string());
    }
    const auto& which = seeds ? *seeds : preset.seeds;
    if (which.empty()) throw Error(ErrorCode::InvalidConfig, "no seeds to run");
    swarm::validate(preset.config);

    ExperimentOutput out;
    std::vector<MetricCsv> parsed;
    std::vector<SummaryRow> summary;
    for (const auto& arm : preset.arms) {
        for (const auto seed : which) {
            auto run = run_one(preset, arm, seed);
            const auto path = out_dir / (preset.name + "_" + arm.name + "_" + std::to_string(seed) + ".csv");
            const auto text = metric_csv(run);
            write_file(path, text);
            out.files.push_back(path);
            parsed.push_back(parse_metric_csv(text));
            summary.push_back(summarize(run));
            out.runs.push_back(std::move(run));
        }
    }
    const auto agg_path = out_dir / (preset.name + "_aggregate.csv");
    write_file(agg_path, aggregate_csv(aggregate(parsed)));
    out.files.push_back(agg_path);
    const auto sum_path = out_dir / (preset.name + "_summary.csv");
    write_file(sum_path, summary_csv(summary));
    out.files.push_back(sum_path);
    auto scenario = preset;
    scenario.seeds = which;
    const auto scenario_path = out_dir / (preset.name + "_scenario.txt");
    write_file(scenario_path, format_scenario(scenario));
    out.files.push_back(scenario_path);
    return out;
}

// --- CSV -------------------------------------------------------------------------

std::string format_double(double value) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw Error(ErrorCode::IoError, "cannot format number");
    return std::string(buf, end);
}

std::string metric_csv(const RunResult& run) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& r : run.stream) {
        out += std::to_string(r.round) + ',' + run.arm + ',' + std::to_string(run.seed) + ',' +
               format_double(r.avg_pieces) + ',' + format_double(r.seeder_upload_mean) + ',' +
               format_double(r.seeder_upload_per_interval) + ',' + format_double(r.upload_variance) + ',' +
               std::to_string(r.completions) + '\n';
    }
    if (!run.converged) out += "# NONCONVERGENCE cap=" + std::to_string(run.cap) + '\n';
    return out;
}

MetricCsv parse_metric_csv(std::string_view text) {
    const auto lines = lines_of(text);
    if (lines.empty() || lines[0] != kCsvHeader) throw Error(ErrorCode::MissingData, "metric CSV header missing");
    MetricCsv out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto line = lines[i];
        if (line.starts_with("# NONCONVERGENCE cap=")) {
            out.nonconvergence_cap = csv_number<std::size_t>(line.substr(21), "cap");
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 8) throw Error(ErrorCode::MissingData, "metric CSV row " + std::to_string(i) + " has wrong width");
        metrics::MetricRecord r;
        r.round = csv_number<std::size_t>(f[0], "round");
        const auto seed = csv_number<std::uint64_t>(f[2], "seed");
        if (out.records.empty()) {
            out.arm = std::string(f[1]);
            out.seed = seed;
        } else if (out.arm != f[1] || out.seed != seed) {
            throw Error(ErrorCode::MissingData, "metric CSV mixes runs");
        }
        r.avg_pieces = csv_number<double>(f[3], "avg_pieces");
        r.seeder_upload_mean = csv_number<double>(f[4], "seeder_upload_mean");
        r.seeder_upload_per_interval = csv_number<double>(f[5], "seeder_upload_per_interval");
        r.upload_variance = csv_number<double>(f[6], "upload_variance");
        r.completions = csv_number<std::size_t>(f[7], "completions");
        out.records.push_back(std::move(r));
    }
    if (out.records.empty()) throw Error(ErrorCode::MissingData, "metric CSV has no rows");
    return out;
}

double median(std::vector<double> values) {
    if (values.empty()) throw Error(ErrorCode::MissingData, "median of nothing");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

std::vector<AggregateRow> aggregate(const std::vector<MetricCsv>& runs) {
    std::vector<std::string> arms;
    std::map<std::string, std::vector<const MetricCsv*>> by_arm;
    for (const auto& run : runs) {
        if (!by_arm.contains(run.arm)) arms.push_back(run.arm);
        by_arm[run.arm].push_back(&run);
    }
    std::vector<AggregateRow> out;
    for (const auto& arm : arms) {
        const auto& group = by_arm[arm];
        std::size_t longest = 0;
        for (const auto* run : group) longest = std::max(longest, run->records.size());
        for (std::size_t i = 0; i < longest; ++i) {
            std::vector<double> pieces, seeder, interval, variance, completions;
            for (const auto* run : group) {
                const bool ended = i >= run->records.size();
                const auto& r = ended ? run->records.back() : run->records[i];
                pieces.push_back(r.avg_pieces);
                seeder.push_back(r.seeder_upload_mean);
                interval.push_back(ended ? 0.0 : r.seeder_upload_per_interval);
                variance.push_back(r.upload_variance);
                completions.push_back(ended ? 0.0 : static_cast<double>(r.completions));
            }
            auto mean = [](const std::vector<double>& xs) {
                double s = 0;
                for (const auto x : xs) s += x;
                return s / static_cast<double>(xs.size());
            };
            AggregateRow row;
            row.round = i;
            row.arm = arm;
            row.seeds = group.size();
            row.avg_pieces_mean = mean(pieces);
            row.avg_pieces_median = median(pieces);
            row.seeder_upload_mean_mean = mean(seeder);
            row.seeder_upload_mean_median = median(seeder);
            row.seeder_upload_per_interval_mean = mean(interval);
            row.seeder_upload_per_interval_median = median(interval);
            row.upload_variance_mean = mean(variance);
            row.upload_variance_median = median(variance);
            row.completions_mean = mean(completions);
            out.push_back(std::move(row));
        }
    }
    return out;
}

namespace {
constexpr std::string_view kAggregateHeader =
    "round,arm,seeds,avg_pieces_mean,avg_pieces_median,seeder_upload_mean_mean,seeder_upload_mean_median,"
    "seeder_upload_per_interval_mean,seeder_upload_per_interval_median,upload_variance_mean,upload_variance_median,"
    "completions_mean";
constexpr std::string_view kSummaryHeader =
    "arm,seed,rounds,converged,final_seeder_upload_mean,final_leecher_upload_mean,final_upload_variance,"
    "freeloader_median";
}  // namespace

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
    std::string out(kAggregateHeader);
    out += '\n';
    for (const auto& r : rows) {
        out += std::to_string(r.round) + ',' + r.arm + ',' + std::to_string(r.seeds) + ',' +
               format_double(r.avg_pieces_mean) + ',' + format_double(r.avg_pieces_median) + ',' +
               format_double(r.seeder_upload_mean_mean) + ',' + format_double(r.seeder_upload_mean_median) + ',' +
               format_double(r.seeder_upload_per_interval_mean) + ',' +
               format_double(r.seeder_upload_per_interval_median) + ',' + format_double(r.upload_variance_mean) +
               ',' + format_double(r.upload_variance_median) + ',' + format_double(r.completions_mean) + '\n';
    }
    return out;
}

std::vector<AggregateRow> parse_aggregate_csv(std::string_view text) {
    const auto lines = lines_of(text);
    if (lines.empty() || lines[0] != kAggregateHeader) throw Error(ErrorCode::MissingData, "aggregate header missing");
    std::vector<AggregateRow> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = split(lines[i], ',');
        if (f.size() != 12) throw Error(ErrorCode::MissingData, "aggregate row " + std::to_string(i) + " has wrong width");
        AggregateRow r;
        r.round = csv_number<std::size_t>(f[0], "round");
        r.arm = std::string(f[1]);
        r.seeds = csv_number<std::size_t>(f[2], "seeds");
        r.avg_pieces_mean = csv_number<double>(f[3], "avg_pieces_mean");
        r.avg_pieces_median = csv_number<double>(f[4], "avg_pieces_median");
        r.seeder_upload_mean_mean = csv_number<double>(f[5], "seeder_upload_mean_mean");
        r.seeder_upload_mean_median = csv_number<double>(f[6], "seeder_upload_mean_median");
        r.seeder_upload_per_interval_mean = csv_number<double>(f[7], "seeder_upload_per_interval_mean");
        r.seeder_upload_per_interval_median = csv_number<double>(f[8], "seeder_upload_per_interval_median");
        r.upload_variance_mean = csv_number<double>(f[9], "upload_variance_mean");
        r.upload_variance_median = csv_number<double>(f[10], "upload_variance_median");
        r.completions_mean = csv_number<double>(f[11], "completions_mean");
        out.push_back(std::move(r));
    }
    return out;
}

SummaryRow summarize(const RunResult& run) {
    SummaryRow s;
    s.arm = run.arm;
    s.seed = run.seed;
    s.rounds = run.stream.empty() ? 0 : run.stream.back().round;
    s.converged = run.converged;
    if (!run.stream.empty()) {
        s.final_seeder_upload_mean = run.stream.back().seeder_upload_mean;
        s.final_upload_variance = run.stream.back().upload_variance;
    }
    s.final_leecher_upload_mean = run.leecher_upload_mean;
    s.freeloader_median = run.freeloader_median;
    return s;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::string out(kSummaryHeader);
    out += '\n';
    for (const auto& r : rows) {
        out += r.arm + ',' + std::to_string(r.seed) + ',' + std::to_string(r.rounds) + ',' +
               (r.converged ? "1" : "0") + ',' + format_double(r.final_seeder_upload_mean) + ',' +
               format_double(r.final_leecher_upload_mean) + ',' + format_double(r.final_upload_variance) + ',' +
               (r.freeloader_median ? format_double(*r.freeloader_median) : "") + '\n';
    }
    return out;
}

std::vector<SummaryRow> parse_summary_csv(std::string_view text) {
    const auto lines = lines_of(text);
    if (lines.empty() || lines[0] != kSummaryHeader) throw Error(ErrorCode::MissingData, "summary header missing");
    std::vector<SummaryRow> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = split(lines[i], ',');
        if (f.size() != 8) throw Error(ErrorCode::MissingData, "summary row " + std::to_string(i) + " has wrong width");
        SummaryRow r;
        r.arm = std::string(f[0]);
        r.seed = csv_number<std::uint64_t>(f[1], "seed");
        r.rounds = csv_number<std::size_t>(f[2], "rounds");
        r.converged = csv_number<int>(f[3], "converged") != 0;
        r.final_seeder_upload_mean = csv_number<double>(f[4], "final_seeder_upload_mean");
        r.final_leecher_upload_mean = csv_number<double>(f[5], "final_leecher_upload_mean");
        r.final_upload_variance = csv_number<double>(f[6], "final_upload_variance");
        if (!f[7].empty()) r.freeloader_median = csv_number<double>(f[7], "freeloader_median");
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace fairswap::experiments
