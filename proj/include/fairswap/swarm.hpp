#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairswap/error.hpp"
#include "fairswap/metrics.hpp"
#include "fairswap/pieces.hpp"
#include "fairswap/protocol.hpp"
#include "fairswap/random.hpp"
#include "fairswap/topology.hpp"
#include "fairswap/types.hpp"

namespace fairswap::swarm {

enum class Role : std::uint8_t { Seeder, Leecher, Freeloader };
enum class Strategy : std::uint8_t { Proposed, Willingness, TitForTat };
enum class Churn : std::uint8_t { Static, LeaveOnComplete };
enum class StopCondition : std::uint8_t { AllComplete, FreeloadersComplete };

/// How a piece reached its holder.
enum class Channel : std::uint8_t { L2L, L2S, Direct, Gift };

std::string_view to_string(Role role) noexcept;
std::string_view to_string(Strategy strategy) noexcept;
std::string_view to_string(Churn churn) noexcept;
std::string_view to_string(StopCondition stop) noexcept;
std::string_view to_string(Channel channel) noexcept;

struct StrategySpec {
    Strategy kind = Strategy::Proposed;
    double willingness = 1.0;      // Willingness only
    std::size_t tft_slots = 4;     // regular unchoke slots
    std::size_t tft_rotation = 3;  // rounds between optimistic slot changes
    std::size_t tft_window = 3;    // rounds of reciprocation history

    bool operator==(const StrategySpec&) const = default;
};

struct ScenarioConfig {
    std::size_t n_nodes = 100;
    std::size_t n_seeders = 10;
    std::size_t n_freeloaders = 0;
    std::size_t n_pieces = 25;
    std::size_t degree = 8;
    Churn churn = Churn::Static;
    StrategySpec strategy;
    std::size_t capacity = 1;  // uploads per peer per round, gifts included
    std::size_t unchoke_period = 3;
    std::size_t pair_wait = 2;
    StopCondition stop = StopCondition::AllComplete;
    std::optional<std::size_t> round_cap;
    bool secure_channels = false;  // run sessions with wrapped keys
    std::size_t piece_bytes = 16;
    unsigned modulus_bits = 32;
    std::uint64_t seed = 1;

    bool operator==(const ScenarioConfig&) const = default;
};

/// Throws InvalidConfig.
void validate(const ScenarioConfig& config);

/// 10 * pieces * nodes / seeders (seeders taken as 1 when there are none).
std::size_t default_round_cap(const ScenarioConfig& config);

struct Provenance {
    Channel channel = Channel::Direct;
    NodeId from;
    SessionId session = 0;
    std::size_t round = 0;
};

struct PeerState {
    NodeId id;
    Role role = Role::Leecher;
    PieceSet inventory;
    PieceSet inflight;  // promised by a running session
    std::uint64_t uploads = 0;
    std::uint64_t downloads = 0;
    std::vector<NodeId> neighbors;
    bool departed = false;
    std::optional<std::size_t> completed_round;
    std::size_t active_sessions = 0;
    std::optional<NodeId> queued_at;  // seeder holding this peer's request
    std::vector<NodeId> refused;       // seeders whose pairing offer this peer turned down

    // Downloads split by how they arrived. seeder_leg counts L2S pieces the
    // seeder sent itself; relay counts the ones the partner leecher forwarded.
    std::uint64_t via_l2l = 0;
    std::uint64_t via_relay = 0;
    std::uint64_t via_seeder_leg = 0;
    std::uint64_t via_direct = 0;
    std::uint64_t via_gift = 0;

    std::vector<std::optional<Provenance>> provenance;  // per piece; empty for initial holdings

    // Tit-for-tat bookkeeping.
    std::vector<NodeId> unchoked;
    std::optional<NodeId> optimistic;
    std::deque<std::vector<NodeId>> recent_sources;  // uploaders per round, newest last

    [[nodiscard]] bool complete() const noexcept { return inventory.complete(); }
    [[nodiscard]] bool downloads_pieces() const noexcept { return role != Role::Seeder; }
};

struct Request {
    NodeId requester;
    std::size_t since = 0;  // round the request was queued
};

struct Match {
    enum class Kind : std::uint8_t { Pair, Direct };
    Kind kind = Kind::Direct;
    NodeId first;
    NodeId second;  // Pair only
    std::vector<PieceId> pieces;
};

struct TransferEvent {
    std::size_t round = 0;
    Channel channel = Channel::Direct;
    SessionId session = 0;
    std::size_t step = 0;
    protocol::MessageKind kind = protocol::MessageKind::Data;
    NodeId from;
    NodeId to;
    std::vector<PieceId> pieces;
    std::size_t payload_len = 0;
    std::optional<KeyId> key;
};

/// `round=<r> channel=<c> session=<id> step=<n> kind=<K> from=<n> to=<n> pieces=<a,b|-> payload_len=<n> key=<id|->`
std::string format_event(const TransferEvent& event);

struct ActiveSession {
    protocol::ExchangeSession session;
    std::deque<protocol::ProtocolMessage> in_flight;
    Channel channel = Channel::L2L;
    std::vector<std::size_t> credited;  // per party slot: decrypted pieces already handed over
};

struct SimState {
    ScenarioConfig config;
    std::size_t round = 0;
    topology::Graph graph;
    std::vector<PeerState> peers;  // indexed by node id
    std::vector<ActiveSession> sessions;
    std::vector<std::vector<Request>> queues;  // per node, used by seeding peers
    std::vector<std::size_t> used_capacity;    // uploads this round
    Rng rng;
    SessionId next_session = 1;
    std::vector<metrics::MetricRecord> metric_stream;
    std::vector<NodeId> just_completed;  // finished during the round in progress

    std::function<void(std::string_view)> log;  // one line per call, no newline
    std::function<void(const TransferEvent&)> on_event;

    [[nodiscard]] const PeerState& peer(NodeId id) const { return peers.at(id.value); }
    [[nodiscard]] PeerState& peer(NodeId id) { return peers.at(id.value); }
    [[nodiscard]] std::vector<NodeId> ids_with(Role role) const;

    /// Original seeders, plus finished leechers that stay in a static network.
    [[nodiscard]] bool seeds(const PeerState& peer) const;
    [[nodiscard]] bool stop_reached() const;
};

/// Raised by run_until when the round cap trips. The state passed to
/// run_until keeps the partial run.
class NonConvergenceError : public Error {
public:
    NonConvergenceError(std::size_t cap, std::size_t rounds);
    [[nodiscard]] std::size_t cap() const noexcept { return cap_; }
    [[nodiscard]] std::size_t rounds() const noexcept { return rounds_; }

private:
    std::size_t cap_;
    std::size_t rounds_;
};

/// Random regular overlay with seeders and freeloaders placed far apart.
/// Appends the round-0 metric record. Throws InvalidConfig.
SimState build_network(const ScenarioConfig& config);

/// Installs a line sink and writes the node roster to it.
void attach_log(SimState& state, std::function<void(std::string_view)> sink);

/// Uniform choice among pieces `counterparty` holds that `peer` neither has
/// nor is already receiving. Throws NoUsefulPiece.
PieceId select_piece(const PeerState& peer, const PieceSet& counterparty, Rng& rng);

/// Greedy pairing of queued requesters that share at least two missing
/// pieces; requesters left unpaired for `pair_wait` rounds are served
/// directly. At most `slots` matches are returned, pairs first.
std::vector<Match> match_requests(const PeerState& seeder, std::span<const Request> queue,
                                  const std::vector<PeerState>& peers, std::size_t round, std::size_t pair_wait,
                                  std::size_t slots, Rng& rng);

struct Gift {
    NodeId from;
    NodeId to;
    PieceId piece = 0;
};

/// On unchoke rounds, one piece for a random neighbour that lacks something
/// `giver` has. Ignores the giver's remaining capacity.
std::optional<Gift> optimistic_unchoke(const SimState& state, const PeerState& giver, Rng& rng);

/// Whether `peer` agrees to upload to `requester` under its strategy.
bool strategy_decide(const SimState& state, const PeerState& peer, NodeId requester, Rng& rng);

/// Recomputes a tit-for-tat peer's unchoke set for the current round.
void refresh_unchoke(SimState& state, PeerState& peer);

/// One synchronous round.
void tick(SimState& state);

/// Ticks until the configured stop condition holds. Throws NonConvergenceError.
void run_until(SimState& state);

}  // namespace fairswap::swarm
