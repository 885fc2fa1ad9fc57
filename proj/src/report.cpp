#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "fairswap/error.hpp"
#include "fairswap/experiments.hpp"

namespace fairswap::experiments {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 400;
constexpr double kLeft = 70;
constexpr double kRight = 150;
constexpr double kTop = 40;
constexpr double kBottom = 50;

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

std::string fixed(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

// Upper axis bound rounded to 1, 2 or 5 times a power of ten.
double nice_ceiling(double v) {
    if (v <= 0) return 1;
    const double mag = std::pow(10.0, std::floor(std::log10(v)));
    for (const double step : {1.0, 2.0, 5.0, 10.0}) {
        if (step * mag >= v) return step * mag;
    }
    return 10 * mag;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::MissingData, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text).flush()) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

void frame(std::ostringstream& svg, const std::string& title, const std::string& x_label, const std::string& y_label,
           double x_max, double y_max, bool x_ticks) {
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n"
        << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw << "\" y2=\"" << kTop + ph
        << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + ph
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double y = kTop + ph - ph * i / 5.0;
        svg << "<line x1=\"" << kLeft - 4 << "\" y1=\"" << y << "\" x2=\"" << kLeft + pw << "\" y2=\"" << y
            << "\" stroke=\"#ddd\"/>\n"
            << "<text x=\"" << kLeft - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
            << fixed(y_max * i / 5.0, y_max >= 50 ? 0 : 1) << "</text>\n";
        if (x_ticks) {
            const double x = kLeft + pw * i / 5.0;
            svg << "<text x=\"" << x << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">"
                << fixed(x_max * i / 5.0, 0) << "</text>\n";
        }
    }
    svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">" << x_label
        << "</text>\n"
        << "<text transform=\"translate(16," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << y_label
        << "</text>\n";
}

std::string line_chart(const std::string& title, const std::string& y_label, const std::vector<Series>& series) {
    double x_max = 1;
    double y_max = 0;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            x_max = std::max(x_max, x);
            y_max = std::max(y_max, y);
        }
    }
    y_max = nice_ceiling(y_max);
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    std::ostringstream svg;
    frame(svg, title, "time interval", y_label, x_max, y_max, true);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = kColors[i % std::size(kColors)];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : series[i].points) {
            svg << fixed(kLeft + pw * x / x_max) << ',' << fixed(kTop + ph - ph * y / y_max) << ' ';
        }
        svg << "\"/>\n";
        const double ly = kTop + 10 + 18 * static_cast<double>(i);
        svg << "<line x1=\"" << kWidth - kRight + 15 << "\" y1=\"" << ly << "\" x2=\"" << kWidth - kRight + 35
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << kWidth - kRight + 40 << "\" y=\"" << ly + 4 << "\">" << series[i].label << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string bar_chart(const std::string& title, const std::string& y_label,
                      const std::vector<std::pair<std::string, double>>& bars) {
    double y_max = 0;
    for (const auto& b : bars) y_max = std::max(y_max, b.second);
    y_max = nice_ceiling(y_max);
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    std::ostringstream svg;
    frame(svg, title, "arm", y_label, 1, y_max, false);
    const double slot = pw / static_cast<double>(std::max<std::size_t>(bars.size(), 1));
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double h = ph * bars[i].second / y_max;
        const double x = kLeft + slot * static_cast<double>(i) + slot * 0.2;
        svg << "<rect x=\"" << fixed(x) << "\" y=\"" << fixed(kTop + ph - h) << "\" width=\"" << fixed(slot * 0.6)
            << "\" height=\"" << fixed(h) << "\" fill=\"" << kColors[i % std::size(kColors)] << "\"/>\n"
            << "<text x=\"" << fixed(x + slot * 0.3) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">"
            << bars[i].first << "</text>\n"
            << "<text x=\"" << fixed(x + slot * 0.3) << "\" y=\"" << fixed(kTop + ph - h - 5)
            << "\" text-anchor=\"middle\">" << fixed(bars[i].second, 1) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

double aggregate_value(const AggregateRow& r, const std::string& metric) {
    if (metric == "avg_pieces") return r.avg_pieces_mean;
    if (metric == "seeder_upload_mean") return r.seeder_upload_mean_mean;
    if (metric == "seeder_upload_per_interval") return r.seeder_upload_per_interval_mean;
    if (metric == "upload_variance") return r.upload_variance_mean;
    if (metric == "completions") return r.completions_mean;
    throw Error(ErrorCode::MissingData, "no aggregate column for " + metric);
}

std::vector<std::string> arm_order(const std::vector<SummaryRow>& rows) {
    std::vector<std::string> out;
    for (const auto& r : rows) {
        if (std::find(out.begin(), out.end(), r.arm) == out.end()) out.push_back(r.arm);
    }
    return out;
}

// Median over seeds of proposed / baseline, pairing runs by seed.
std::optional<double> paired_ratio(const std::vector<SummaryRow>& rows, const std::string& baseline) {
    std::map<std::uint64_t, double> base;
    for (const auto& r : rows) {
        if (r.arm == baseline && r.freeloader_median) base[r.seed] = *r.freeloader_median;
    }
    std::vector<double> ratios;
    for (const auto& r : rows) {
        if (r.arm != "proposed" || !r.freeloader_median) continue;
        const auto it = base.find(r.seed);
        if (it != base.end() && it->second > 0) ratios.push_back(*r.freeloader_median / it->second);
    }
    if (ratios.empty()) return std::nullopt;
    return median(ratios);
}

}  // namespace

ReportOutput report(const std::filesystem::path& dir) {
    std::vector<std::string> names;
    std::error_code ec;
    if (std::filesystem::is_directory(dir, ec)) {
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            const auto file = entry.path().filename().string();
            constexpr std::string_view suffix = "_summary.csv";
            if (file.size() > suffix.size() && file.ends_with(suffix)) {
                names.push_back(file.substr(0, file.size() - suffix.size()));
            }
        }
    }
    if (names.empty()) throw Error(ErrorCode::MissingData, "no experiment summaries in " + dir.string());
    std::sort(names.begin(), names.end());

    ReportOutput out;
    std::ostringstream md;
    md << "# Experiment report\n";
    for (const auto& name : names) {
        const auto rows = parse_summary_csv(read_text(dir / (name + "_summary.csv")));
        const auto aggregate_rows = parse_aggregate_csv(read_text(dir / (name + "_aggregate.csv")));
        std::vector<std::string> outputs{"avg_pieces"};
        const auto scenario_path = dir / (name + "_scenario.txt");
        if (std::filesystem::exists(scenario_path)) outputs = parse_scenario(read_text(scenario_path), name).outputs;
        const auto arms = arm_order(rows);

        md << "\n## " << name << "\n\n"
           << "| arm | runs | converged | median rounds | median final variance | median final seeder uploads "
              "| median final leecher uploads | median freeloader completion |\n"
           << "|---|---|---|---|---|---|---|---|\n";
        std::map<std::string, std::vector<double>> leecher_uploads, freeloader_done;
        for (const auto& arm : arms) {
            std::vector<double> rounds, variance, seeder, leecher, freeloader;
            std::size_t converged = 0;
            std::size_t runs = 0;
            for (const auto& r : rows) {
                if (r.arm != arm) continue;
                runs += 1;
                converged += r.converged ? 1 : 0;
                rounds.push_back(static_cast<double>(r.rounds));
                variance.push_back(r.final_upload_variance);
                seeder.push_back(r.final_seeder_upload_mean);
                leecher.push_back(r.final_leecher_upload_mean);
                if (r.freeloader_median) freeloader.push_back(*r.freeloader_median);
            }
            md << "| " << arm << " | " << runs << " | " << converged << " | " << fixed(median(rounds), 1) << " | "
               << fixed(median(variance)) << " | " << fixed(median(seeder)) << " | " << fixed(median(leecher))
               << " | " << (freeloader.empty() ? "-" : fixed(median(freeloader), 1)) << " |\n";
            leecher_uploads[arm] = leecher;
            freeloader_done[arm] = freeloader;
        }
        if (std::find(arms.begin(), arms.end(), "proposed") != arms.end() &&
            std::find(arms.begin(), arms.end(), "w50") != arms.end()) {
            if (const auto ratio = paired_ratio(rows, "w50")) {
                md << "\nFreeloader delay ratio, proposed / w50 (median over paired seeds): " << fixed(*ratio) << "\n";
            }
        }

        md << '\n';
        for (const auto& metric : outputs) {
            std::string svg;
            if (metric == "freeloader_completion" || metric == "leecher_uploads") {
                std::vector<std::pair<std::string, double>> bars;
                const auto& source = metric == "freeloader_completion" ? freeloader_done : leecher_uploads;
                for (const auto& arm : arms) {
                    const auto& values = source.at(arm);
                    if (!values.empty()) bars.emplace_back(arm, median(values));
                }
                if (bars.empty()) continue;
                svg = bar_chart(name + ": " + (metric == "freeloader_completion" ? "freeloader completion round"
                                                                                  : "mean leecher uploads"),
                                metric == "freeloader_completion" ? "round" : "uploads", bars);
            } else {
                std::vector<Series> series;
                for (const auto& arm : arms) {
                    Series s{arm, {}};
                    for (const auto& r : aggregate_rows) {
                        if (r.arm == arm) s.points.emplace_back(static_cast<double>(r.round), aggregate_value(r, metric));
                    }
                    series.push_back(std::move(s));
                }
                svg = line_chart(name + ": " + metric, metric, series);
            }
            const auto path = dir / (name + "_" + metric + ".svg");
            write_text(path, svg);
            out.charts.push_back(path);
            md << "![" << name << " " << metric << "](" << path.filename().string() << ")\n";
        }
    }
    out.markdown = dir / "report.md";
    write_text(out.markdown, md.str());
    return out;
}

}  // namespace fairswap::experiments
