#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <string_view>

#include "fairswap/error.hpp"
#include "fairswap/metrics.hpp"

namespace fairswap::metrics {

namespace {

using Fields = std::map<std::string_view, std::string_view>;

Fields split(std::string_view line) {
    Fields out;
    while (!line.empty()) {
        const auto space = line.find(' ');
        const auto token = line.substr(0, space);
        const auto eq = token.find('=');
        if (eq != std::string_view::npos) out[token.substr(0, eq)] = token.substr(eq + 1);
        if (space == std::string_view::npos) break;
        line.remove_prefix(space + 1);
    }
    return out;
}

std::uint64_t number(const Fields& f, std::string_view key) {
    const auto it = f.find(key);
    std::uint64_t v = 0;
    if (it == f.end()) throw Error(ErrorCode::MissingData, "log line lacks " + std::string(key));
    const auto [end, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
    if (ec != std::errc{} || end != it->second.data() + it->second.size()) {
        throw Error(ErrorCode::MissingData, "bad number for " + std::string(key) + ": " + std::string(it->second));
    }
    return v;
}

std::vector<std::uint32_t> piece_list(std::string_view text) {
    std::vector<std::uint32_t> out;
    if (text == "-") return out;
    while (!text.empty()) {
        const auto comma = text.find(',');
        std::uint32_t v = 0;
        std::from_chars(text.data(), text.data() + std::min(comma, text.size()), v);
        out.push_back(v);
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return out;
}

struct Pending {
    std::uint64_t key;
    std::vector<std::uint32_t> pieces;
};

struct Replay {
    std::size_t n_pieces = 0;
    std::vector<std::set<std::uint32_t>> held;
    std::vector<std::uint64_t> uploads;
    std::vector<bool> seeder;
    std::vector<bool> departed;
    std::map<std::pair<std::uint64_t, std::uint32_t>, std::vector<Pending>> waiting;  // (session, receiver)
    std::vector<NodeId> finished;

    void take(std::uint32_t node, std::uint32_t piece) {
        auto& h = held.at(node);
        if (!h.insert(piece).second || seeder[node]) return;
        if (h.size() == n_pieces) finished.push_back(NodeId{node});
    }

    MetricRecord record(std::size_t round, const MetricRecord* previous) {
        MetricRecord r;
        r.round = round;
        std::uint64_t pieces = 0;
        std::uint64_t present = 0;
        std::uint64_t seeded = 0;
        std::uint64_t seeders = 0;
        for (std::size_t v = 0; v < held.size(); ++v) {
            if (!departed[v]) {
                pieces += held[v].size();
                present += 1;
            }
            if (seeder[v]) {
                seeded += uploads[v];
                seeders += 1;
            }
        }
        r.avg_pieces = present ? static_cast<double>(pieces) / static_cast<double>(present) : 0.0;
        r.seeder_upload_mean = seeders ? static_cast<double>(seeded) / static_cast<double>(seeders) : 0.0;
        r.seeder_upload_per_interval = r.seeder_upload_mean - (previous ? previous->seeder_upload_mean : 0.0);
        r.upload_variance = upload_variance(uploads);
        r.completions = finished.size();
        r.completed = std::move(finished);
        finished.clear();
        return r;
    }
};

}  // namespace

std::vector<MetricRecord> replay_log(std::span<const std::string> lines) {
    Replay st;
    std::size_t line_no = 0;
    std::size_t nodes = 0;

    // Header: config line, then one roster line per node.
    for (; line_no < lines.size(); ++line_no) {
        const auto f = split(lines[line_no]);
        if (lines[line_no].starts_with("config ")) {
            if (f.contains("secure") && f.at("secure") != "0") {
                throw Error(ErrorCode::MissingData, "wrapped-key logs cannot be replayed");
            }
            nodes = number(f, "nodes");
            st.n_pieces = number(f, "pieces");
            st.held.assign(nodes, {});
            st.uploads.assign(nodes, 0);
            st.seeder.assign(nodes, false);
            st.departed.assign(nodes, false);
            continue;
        }
        if (!f.contains("node") || !f.contains("role")) break;
        const auto v = number(f, "node");
        if (v >= nodes) throw Error(ErrorCode::MissingData, "roster names node " + std::to_string(v));
        if (f.at("role") == "seeder") {
            st.seeder[v] = true;
            for (std::uint32_t p = 0; p < st.n_pieces; ++p) st.held[v].insert(p);
        }
    }
    if (nodes == 0) throw Error(ErrorCode::MissingData, "log has no config line");

    std::vector<MetricRecord> out;
    out.push_back(st.record(0, nullptr));
    for (; line_no < lines.size(); ++line_no) {
        const std::string_view line = lines[line_no];
        const auto f = split(line);
        if (!f.contains("round")) throw Error(ErrorCode::MissingData, "unexpected line: " + lines[line_no]);
        const auto r = number(f, "round");
        if (r + 1 != out.size()) throw Error(ErrorCode::MissingData, "round out of sequence: " + lines[line_no]);

        if (line.ends_with(" end")) {
            out.push_back(st.record(r + 1, &out.back()));
            continue;
        }
        if (line.find(" depart ") != std::string_view::npos) {
            st.departed.at(number(f, "node")) = true;
            continue;
        }
        if (line.find(" link ") != std::string_view::npos) continue;

        const auto kind = f.at("kind");
        const auto from = static_cast<std::uint32_t>(number(f, "from"));
        const auto to = static_cast<std::uint32_t>(number(f, "to"));
        const auto session = number(f, "session");
        if (kind == "DATA") {
            st.uploads.at(from) += 1;
            const auto pieces = piece_list(f.at("pieces"));
            if (session == 0) {
                for (const auto p : pieces) st.take(to, p);
            } else {
                st.waiting[{session, to}].push_back(Pending{number(f, "key"), pieces});
            }
        } else if (kind == "EXC") {
            const auto key = number(f, "key");
            auto& queue = st.waiting[{session, to}];
            std::erase_if(queue, [&](const Pending& p) {
                if (p.key != key) return false;
                for (const auto piece : p.pieces) st.take(to, piece);
                return true;
            });
        }
    }
    return out;
}

}  // namespace fairswap::metrics
