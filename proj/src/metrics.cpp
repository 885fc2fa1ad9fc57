#include "fairswap/metrics.hpp"

#include <string>

#include "fairswap/error.hpp"
#include "fairswap/swarm.hpp"

namespace fairswap::metrics {

namespace {

using swarm::Role;

std::uint64_t seeder_upload_total(const swarm::SimState& state, std::size_t& count) {
    std::uint64_t total = 0;
    count = 0;
    for (const auto& p : state.peers) {
        if (p.role != Role::Seeder) continue;
        total += p.uploads;
        count += 1;
    }
    return total;
}

}  // namespace

double avg_pieces(const swarm::SimState& state) {
    std::uint64_t held = 0;
    std::uint64_t present = 0;
    for (const auto& p : state.peers) {
        if (p.departed) continue;
        held += p.inventory.count();
        present += 1;
    }
    if (present == 0) throw Error(ErrorCode::EmptyNetwork, "no peers left in the network");
    return static_cast<double>(held) / static_cast<double>(present);
}

double upload_variance(std::span<const std::uint64_t> uploads) {
    if (uploads.empty()) return 0.0;
    unsigned __int128 sum = 0;
    unsigned __int128 sum_sq = 0;
    for (const auto x : uploads) {
        sum += x;
        sum_sq += static_cast<unsigned __int128>(x) * x;
    }
    const unsigned __int128 n = uploads.size();
    const unsigned __int128 numerator = n * sum_sq - sum * sum;
    return static_cast<double>(numerator) / static_cast<double>(n * n);
}

double upload_variance(const swarm::SimState& state) {
    std::vector<std::uint64_t> uploads;
    uploads.reserve(state.peers.size());
    for (const auto& p : state.peers) uploads.push_back(p.uploads);
    return upload_variance(uploads);
}

double seeder_upload_mean(const swarm::SimState& state) {
    std::size_t count = 0;
    const std::uint64_t total = seeder_upload_total(state, count);
    if (count == 0) throw Error(ErrorCode::NoSeeders, "scenario has no seeders");
    return static_cast<double>(total) / static_cast<double>(count);
}

MetricRecord snapshot(const swarm::SimState& state, const MetricRecord* previous, std::vector<NodeId> completed) {
    MetricRecord r;
    r.round = state.round;
    bool anyone = false;
    for (const auto& p : state.peers) anyone = anyone || !p.departed;
    r.avg_pieces = anyone ? avg_pieces(state) : 0.0;
    std::size_t seeders = 0;
    seeder_upload_total(state, seeders);
    r.seeder_upload_mean = seeders > 0 ? seeder_upload_mean(state) : 0.0;
    r.seeder_upload_per_interval = r.seeder_upload_mean - (previous ? previous->seeder_upload_mean : 0.0);
    r.upload_variance = upload_variance(state);
    r.completions = completed.size();
    r.completed = std::move(completed);
    return r;
}

std::map<NodeId, std::size_t> freeloader_completion(std::span<const MetricRecord> stream,
                                                    std::span<const NodeId> freeloaders) {
    std::map<NodeId, std::size_t> out;
    for (const auto& record : stream) {
        for (const NodeId id : record.completed) {
            for (const NodeId f : freeloaders) {
                if (f == id && !out.contains(id)) out[id] = record.round;
            }
        }
    }
    for (const NodeId f : freeloaders) {
        if (!out.contains(f)) {
            throw Error(ErrorCode::NonConvergence, "freeloader " + std::to_string(f.value) + " never finished");
        }
    }
    return out;
}

}  // namespace fairswap::metrics
