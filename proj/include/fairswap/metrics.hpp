#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fairswap/types.hpp"

namespace fairswap::swarm {
class SimState;
}

namespace fairswap::metrics {

struct MetricRecord {
    std::size_t round = 0;  // ticks completed
    double avg_pieces = 0.0;
    double seeder_upload_mean = 0.0;
    double seeder_upload_per_interval = 0.0;
    double upload_variance = 0.0;
    std::size_t completions = 0;
    std::vector<NodeId> completed;  // leechers and freeloaders that finished during this round

    bool operator==(const MetricRecord&) const = default;
};

/// Mean inventory size over peers still in the network. Throws EmptyNetwork.
double avg_pieces(const swarm::SimState& state);

/// Population variance of the given upload counts, computed from exact
/// integer sums: (n * sum(x^2) - sum(x)^2) / n^2.
double upload_variance(std::span<const std::uint64_t> uploads);

/// Variance over every node that ever joined, departed ones included.
double upload_variance(const swarm::SimState& state);

/// Mean upload count of the original seeders. Throws NoSeeders.
double seeder_upload_mean(const swarm::SimState& state);

/// Record for the state as it stands; `previous` supplies the per-interval delta.
MetricRecord snapshot(const swarm::SimState& state, const MetricRecord* previous, std::vector<NodeId> completed);

/// First round each freeloader held every piece. Throws NonConvergence when
/// one of them never finished within the stream.
std::map<NodeId, std::size_t> freeloader_completion(std::span<const MetricRecord> stream,
                                                    std::span<const NodeId> freeloaders);

/// Rebuilds the metric stream from a log written by swarm::attach_log on a
/// freshly built network. A session piece counts once its receiver is handed
/// the key named on the DATA line. Wrapped-key runs are rejected because their
/// key lines name the wrapping key. Throws MissingData.
std::vector<MetricRecord> replay_log(std::span<const std::string> lines);

}  // namespace fairswap::metrics
