#include "fairswap/swarm.hpp"

#include <algorithm>
#include <sstream>

namespace fairswap::swarm {

namespace {

using protocol::MessageKind;

bool useful_from(const PeerState& taker, const PeerState& holder) {
    return holder.inventory.any_outside(taker.inventory, taker.inflight);
}

bool marked(const PeerState& p, const PeerState& by) {
    return std::find(p.refused.begin(), p.refused.end(), by.id) != p.refused.end();
}

bool has_spare(const SimState& s, const PeerState& p) { return s.used_capacity[p.id.value] < s.config.capacity; }

bool free_for_session(const SimState& s, const PeerState& p) { return p.active_sessions < s.config.capacity; }

std::vector<NodeId> active_neighbors(const SimState& s, const PeerState& p) {
    std::vector<NodeId> out;
    for (const NodeId n : p.neighbors) {
        if (!s.peer(n).departed) out.push_back(n);
    }
    return out;
}

void emit(SimState& s, const TransferEvent& event) {
    if (s.on_event) s.on_event(event);
    if (s.log) s.log(format_event(event));
}

void receive(SimState& s, PeerState& to, PieceId piece, const Provenance& how, std::uint64_t PeerState::*counter) {
    to.inflight.reset(piece);
    if (to.inventory.test(piece)) return;
    to.inventory.set(piece);
    to.downloads += 1;
    to.*counter += 1;
    to.provenance[piece] = how;
    if (to.complete() && !to.completed_round) {
        to.completed_round = s.round + 1;
        s.just_completed.push_back(to.id);
    }
}

void transfer_direct(SimState& s, PeerState& from, PeerState& to, PieceId piece, Channel channel) {
    from.uploads += 1;
    s.used_capacity[from.id.value] += 1;
    emit(s, TransferEvent{s.round, channel, 0, 0, MessageKind::Data, from.id, to.id, {piece}, s.config.piece_bytes,
                          std::nullopt});
    receive(s, to, piece, Provenance{channel, from.id, 0, s.round},
            channel == Channel::Gift ? &PeerState::via_gift : &PeerState::via_direct);
    if (!to.recent_sources.empty()) to.recent_sources.back().push_back(from.id);
}

void dequeue(SimState& s, PeerState& p) {
    if (!p.queued_at) return;
    auto& queue = s.queues[p.queued_at->value];
    std::erase_if(queue, [&](const Request& r) { return r.requester == p.id; });
    p.queued_at.reset();
}

protocol::SessionOptions session_options(const ScenarioConfig& c) {
    protocol::SessionOptions opts;
    opts.piece_size = c.piece_bytes;
    opts.content_seed = c.seed;
    opts.keygen.modulus_bits = c.modulus_bits;
    return opts;
}

void open_session(SimState& s, protocol::Protocol protocol, std::vector<protocol::Party> parties, Channel channel) {
    ActiveSession active;
    active.session = protocol::start_session(protocol, std::move(parties), s.rng, s.next_session++,
                                             session_options(s.config));
    active.channel = channel;
    const auto opening = active.session.opening_messages();
    active.in_flight.assign(opening.begin(), opening.end());
    active.credited.assign(active.session.parties().size(), 0);
    for (const auto& party : active.session.parties()) {
        PeerState& p = s.peer(party.id);
        p.active_sessions += 1;
        for (const PieceId piece : party.wants) p.inflight.set(piece);
    }
    s.sessions.push_back(std::move(active));
}

// `a` asks `b`; b holds xa for a, a holds xb for b.
void start_pair_exchange(SimState& s, PeerState& a, PeerState& b, PieceId xa, PieceId xb) {
    dequeue(s, a);
    dequeue(s, b);
    using protocol::Party;
    using protocol::PartyRole;
    open_session(s, s.config.secure_channels ? protocol::Protocol::Secure : protocol::Protocol::L2L,
                 {Party{b.id, PartyRole::Leecher, {xb}}, Party{a.id, PartyRole::Leecher, {xa}}}, Channel::L2L);
}

void start_seeder_exchange(SimState& s, PeerState& seeder, PeerState& n1, PeerState& n2,
                           const std::vector<PieceId>& pieces) {
    dequeue(s, n1);
    dequeue(s, n2);
    using protocol::Party;
    using protocol::PartyRole;
    open_session(s, s.config.secure_channels ? protocol::Protocol::Secure : protocol::Protocol::L2S,
                 {Party{seeder.id, PartyRole::Seeder, {}}, Party{n1.id, PartyRole::Leecher, pieces},
                  Party{n2.id, PartyRole::Leecher, pieces}},
                 Channel::L2S);
}

// Hands over pieces a party has just become able to decrypt.
void credit(SimState& s, ActiveSession& active) {
    const auto& session = active.session;
    const auto& ledger = session.ledger();
    for (std::size_t slot = 0; slot < ledger.parties.size(); ++slot) {
        const auto& decrypted = ledger.parties[slot].decrypted_pieces;
        PeerState& holder = s.peer(ledger.parties[slot].node);
        for (std::size_t i = active.credited[slot]; i < decrypted.size(); ++i) {
            const PieceId piece = decrypted[i];
            NodeId from;
            for (const auto& m : session.transcript()) {
                if (m.kind == MessageKind::Data && m.receiver == holder.id &&
                    std::find(m.piece_refs.begin(), m.piece_refs.end(), piece) != m.piece_refs.end()) {
                    from = m.sender;
                }
            }
            std::uint64_t PeerState::*counter = &PeerState::via_l2l;
            if (active.channel == Channel::L2S) {
                counter = from == session.parties()[0].id ? &PeerState::via_seeder_leg : &PeerState::via_relay;
            }
            receive(s, holder, piece, Provenance{active.channel, from, session.id(), s.round}, counter);
        }
        active.credited[slot] = decrypted.size();
    }
}

void close_session(SimState& s, ActiveSession& active) {
    credit(s, active);
    for (const auto& party : active.session.parties()) {
        PeerState& p = s.peer(party.id);
        p.active_sessions -= 1;
        for (const PieceId piece : party.wants) p.inflight.reset(piece);
    }
}

// DATA names the key that opens it; EXC names the key it hands over (or,
// when wrapped, the key that unwraps it).
std::optional<KeyId> key_of(const protocol::ProtocolMessage& m) {
    if (m.kind == MessageKind::Data) return m.envelope->key_id;
    if (m.kind != MessageKind::Exc) return std::nullopt;
    if (m.key_material) return crypto::decode_key(*m.key_material).key_id;
    return m.envelope->key_id;
}

void step_sessions(SimState& s) {
    std::vector<ActiveSession> still_running;
    for (auto& active : s.sessions) {
        std::size_t delivered = 0;
        bool failed = false;
        while (!active.in_flight.empty()) {
            const protocol::ProtocolMessage next = active.in_flight.front();
            PeerState& sender = s.peer(next.sender);
            if (next.kind == MessageKind::Data && !has_spare(s, sender)) break;
            active.in_flight.pop_front();
            std::vector<protocol::ProtocolMessage> replies;
            try {
                replies = active.session.deliver(next);
            } catch (const Error&) {
                failed = true;
                break;
            }
            delivered += 1;
            if (next.kind == MessageKind::Data) {
                sender.uploads += 1;
                s.used_capacity[sender.id.value] += 1;
            }
            emit(s, TransferEvent{s.round, active.channel, active.session.id(), active.session.transcript().size(),
                                  next.kind, next.sender, next.receiver, next.piece_refs, protocol::payload_len(next),
                                  key_of(next)});
            if (next.kind == MessageKind::Exc) credit(s, active);
            for (auto& reply : replies) active.in_flight.push_back(std::move(reply));
        }
        // A session that could not move for a whole round is abandoned.
        const bool done = active.session.complete() || failed || delivered == 0 || active.in_flight.empty();
        if (done) {
            active.session.abort();
            close_session(s, active);
        } else {
            still_running.push_back(std::move(active));
        }
    }
    s.sessions = std::move(still_running);
}

void proposed_requests(SimState& s, const std::vector<NodeId>& order) {
    for (const NodeId id : order) {
        PeerState& a = s.peer(id);
        if (!free_for_session(s, a) || a.complete()) continue;

        if (a.role == Role::Leecher) {
            std::vector<NodeId> partners;
            for (const NodeId n : a.neighbors) {
                const PeerState& b = s.peer(n);
                if (b.departed || b.role != Role::Leecher || b.complete() || !free_for_session(s, b)) continue;
                if (useful_from(a, b) && useful_from(b, a)) partners.push_back(n);
            }
            if (!partners.empty()) {
                PeerState& b = s.peer(pick(partners, s.rng));
                const PieceId xa = select_piece(a, b.inventory, s.rng);
                const PieceId xb = select_piece(b, a.inventory, s.rng);
                start_pair_exchange(s, a, b, xa, xb);
                continue;
            }
        }

        if (a.queued_at) continue;
        std::vector<NodeId> seeders;
        for (const NodeId n : a.neighbors) {
            const PeerState& p = s.peer(n);
            if (s.seeds(p) && useful_from(a, p)) seeders.push_back(n);
        }
        if (seeders.empty()) continue;
        const NodeId target = pick(seeders, s.rng);
        s.queues[target.value].push_back(Request{a.id, s.round});
        a.queued_at = target;
    }
}

void seeder_matching(SimState& s) {
    for (PeerState& seeder : s.peers) {
        auto& queue = s.queues[seeder.id.value];
        if (queue.empty()) continue;
        if (!s.seeds(seeder)) {
            for (const Request& r : queue) s.peer(r.requester).queued_at.reset();
            queue.clear();
            continue;
        }
        std::erase_if(queue, [&](const Request& r) {
            PeerState& p = s.peer(r.requester);
            const bool stale = p.departed || p.complete() || p.queued_at != seeder.id || !useful_from(p, seeder);
            if (stale && p.queued_at == seeder.id) p.queued_at.reset();
            return stale;
        });
        const std::size_t busy = seeder.active_sessions + s.used_capacity[seeder.id.value];
        if (queue.empty() || busy >= s.config.capacity) continue;

        const auto matches =
            match_requests(seeder, queue, s.peers, s.round, s.config.pair_wait, s.config.capacity - busy, s.rng);
        for (const Match& m : matches) {
            PeerState& first = s.peer(m.first);
            if (m.kind == Match::Kind::Pair) {
                PeerState& second = s.peer(m.second);
                if (first.role == Role::Freeloader || second.role == Role::Freeloader) {
                    // A refusal shows the requester had a partner to answer to; it waits again.
                    for (Request& r : queue) {
                        PeerState& p = s.peer(r.requester);
                        if (p.role == Role::Freeloader && (p.id == first.id || p.id == second.id)) {
                            r.since = s.round;
                            p.refused.push_back(seeder.id);
                        }
                    }
                    continue;
                }
                start_seeder_exchange(s, seeder, first, second, m.pieces);
            } else {
                transfer_direct(s, seeder, first, m.pieces.front(), Channel::Direct);
            }
        }
    }
}

void direct_requests(SimState& s, const std::vector<NodeId>& order) {
    const bool tft = s.config.strategy.kind == Strategy::TitForTat;
    for (const NodeId id : order) {
        PeerState& a = s.peer(id);
        if (a.complete()) continue;
        std::vector<NodeId> candidates;
        for (const NodeId n : a.neighbors) {
            const PeerState& b = s.peer(n);
            if (b.departed || !useful_from(a, b)) continue;
            if (tft && !s.seeds(b)) {
                const bool unchokes = std::find(b.unchoked.begin(), b.unchoked.end(), a.id) != b.unchoked.end() ||
                                      b.optimistic == a.id;
                if (!unchokes) continue;
            }
            candidates.push_back(n);
        }
        if (candidates.empty()) continue;
        PeerState& b = s.peer(pick(candidates, s.rng));
        if (!has_spare(s, b) || !strategy_decide(s, b, a.id, s.rng)) continue;
        transfer_direct(s, b, a, select_piece(a, b.inventory, s.rng), Channel::Direct);
    }
}

void unchoke_gifts(SimState& s) {
    if (s.config.strategy.kind != Strategy::Proposed) return;
    std::vector<NodeId> givers;
    for (const PeerState& p : s.peers) {
        if (!p.departed && p.role == Role::Leecher && !p.complete()) givers.push_back(p.id);
    }
    shuffle(givers, s.rng);
    for (const NodeId id : givers) {
        PeerState& giver = s.peer(id);
        if (!has_spare(s, giver)) continue;
        const auto gift = optimistic_unchoke(s, giver, s.rng);
        if (gift) transfer_direct(s, giver, s.peer(gift->to), gift->piece, Channel::Gift);
    }
}

void link(SimState& s, PeerState& a, PeerState& b) {
    auto add = [](std::vector<NodeId>& row, NodeId v) { row.insert(std::upper_bound(row.begin(), row.end(), v), v); };
    add(a.neighbors, b.id);
    add(b.neighbors, a.id);
    s.graph[a.id.value].insert(std::upper_bound(s.graph[a.id.value].begin(), s.graph[a.id.value].end(), b.id.value), b.id.value);
    s.graph[b.id.value].insert(std::upper_bound(s.graph[b.id.value].begin(), s.graph[b.id.value].end(), a.id.value), a.id.value);
}

// A peer that lost a neighbour to churn is handed a fresh live contact.
void replace_link(SimState& s, PeerState& p) {
    std::vector<NodeId> fresh;
    for (const PeerState& q : s.peers) {
        if (q.departed || q.id == p.id) continue;
        if (std::find(p.neighbors.begin(), p.neighbors.end(), q.id) != p.neighbors.end()) continue;
        fresh.push_back(q.id);
    }
    if (fresh.empty()) return;
    PeerState& q = s.peer(pick(fresh, s.rng));
    link(s, p, q);
    if (s.log) {
        s.log("round=" + std::to_string(s.round) + " link a=" + std::to_string(p.id.value) +
              " b=" + std::to_string(q.id.value));
    }
}

void apply_churn(SimState& s) {
    if (s.config.churn != Churn::LeaveOnComplete) return;
    for (PeerState& p : s.peers) {
        if (p.departed || p.role == Role::Seeder || !p.complete() || p.active_sessions > 0) continue;
        p.departed = true;
        dequeue(s, p);
        if (s.log) s.log("round=" + std::to_string(s.round) + " depart node=" + std::to_string(p.id.value));
        for (const NodeId n : p.neighbors) {
            if (!s.peer(n).departed) replace_link(s, s.peer(n));
        }
    }
}

}  // namespace

std::string_view to_string(Role role) noexcept {
    switch (role) {
        case Role::Seeder: return "seeder";
        case Role::Leecher: return "leecher";
        case Role::Freeloader: return "freeloader";
    }
    return "?";
}

std::string_view to_string(Strategy strategy) noexcept {
    switch (strategy) {
        case Strategy::Proposed: return "proposed";
        case Strategy::Willingness: return "willingness";
        case Strategy::TitForTat: return "tft";
    }
    return "?";
}

std::string_view to_string(Churn churn) noexcept {
    switch (churn) {
        case Churn::Static: return "static";
        case Churn::LeaveOnComplete: return "leave";
    }
    return "?";
}

std::string_view to_string(StopCondition stop) noexcept {
    switch (stop) {
        case StopCondition::AllComplete: return "all";
        case StopCondition::FreeloadersComplete: return "freeloaders";
    }
    return "?";
}

std::string_view to_string(Channel channel) noexcept {
    switch (channel) {
        case Channel::L2L: return "l2l";
        case Channel::L2S: return "l2s";
        case Channel::Direct: return "direct";
        case Channel::Gift: return "gift";
    }
    return "?";
}

void validate(const ScenarioConfig& c) {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
    if (c.n_nodes == 0) fail("n_nodes must be positive");
    if (c.n_seeders + c.n_freeloaders > c.n_nodes) fail("seeders + freeloaders exceed n_nodes");
    if (c.n_pieces == 0) fail("n_pieces must be positive");
    if (c.capacity == 0) fail("capacity must be positive");
    if (c.n_nodes > 1 && c.degree == 0) fail("degree must be positive");
    if (c.strategy.willingness < 0.0 || c.strategy.willingness > 1.0) fail("willingness must lie in [0, 1]");
    if (c.strategy.tft_rotation == 0 || c.strategy.tft_window == 0) fail("tft rotation and window must be positive");
    if (c.piece_bytes == 0) fail("piece_bytes must be positive");
    if (c.modulus_bits < 16 || c.modulus_bits > 64) fail("modulus_bits must lie in [16, 64]");
    if (c.stop == StopCondition::FreeloadersComplete && c.n_freeloaders == 0) {
        fail("stop=freeloaders needs at least one freeloader");
    }
    if (c.round_cap && *c.round_cap == 0) fail("round_cap must be positive");
}

std::size_t default_round_cap(const ScenarioConfig& c) {
    return 10 * c.n_pieces * c.n_nodes / std::max<std::size_t>(c.n_seeders, 1);
}

std::string format_event(const TransferEvent& e) {
    std::ostringstream out;
    out << "round=" << e.round << " channel=" << to_string(e.channel) << " session=" << e.session << " step=" << e.step
        << " kind=" << protocol::to_string(e.kind) << " from=" << e.from.value << " to=" << e.to.value << " pieces=";
    if (e.pieces.empty()) out << '-';
    for (std::size_t i = 0; i < e.pieces.size(); ++i) out << (i ? "," : "") << e.pieces[i];
    out << " payload_len=" << e.payload_len << " key=";
    if (e.key) {
        out << *e.key;
    } else {
        out << '-';
    }
    return out.str();
}

std::vector<NodeId> SimState::ids_with(Role role) const {
    std::vector<NodeId> out;
    for (const auto& p : peers) {
        if (p.role == role) out.push_back(p.id);
    }
    return out;
}

bool SimState::seeds(const PeerState& p) const {
    if (p.departed) return false;
    if (p.role == Role::Seeder) return true;
    return p.role == Role::Leecher && config.churn == Churn::Static && p.complete();
}

bool SimState::stop_reached() const {
    for (const auto& p : peers) {
        if (p.role == Role::Seeder) continue;
        if (config.stop == StopCondition::FreeloadersComplete && p.role != Role::Freeloader) continue;
        if (!p.complete()) return false;
    }
    return true;
}

NonConvergenceError::NonConvergenceError(std::size_t cap, std::size_t rounds)
    : Error(ErrorCode::NonConvergence, "no convergence within " + std::to_string(cap) + " rounds"),
      cap_(cap),
      rounds_(rounds) {}

SimState build_network(const ScenarioConfig& config) {
    validate(config);
    SimState s;
    s.config = config;
    s.rng.seed(config.seed);

    std::size_t degree = std::min(config.degree, config.n_nodes - 1);
    if ((degree * config.n_nodes) % 2 != 0) degree -= 1;
    s.graph = topology::random_regular(config.n_nodes, degree, s.rng);
    const auto seeders = topology::spread_out(s.graph, config.n_seeders, {}, s.rng);
    const auto freeloaders = topology::spread_out(s.graph, config.n_freeloaders, seeders, s.rng);

    s.peers.resize(config.n_nodes);
    for (std::uint32_t v = 0; v < config.n_nodes; ++v) {
        PeerState& p = s.peers[v];
        p.id = NodeId{v};
        p.inventory = PieceSet(config.n_pieces);
        p.inflight = PieceSet(config.n_pieces);
        p.provenance.assign(config.n_pieces, std::nullopt);
        for (const auto w : s.graph[v]) p.neighbors.push_back(NodeId{w});
    }
    for (const auto v : seeders) {
        s.peers[v].role = Role::Seeder;
        s.peers[v].inventory = PieceSet::full(config.n_pieces);
    }
    for (const auto v : freeloaders) s.peers[v].role = Role::Freeloader;

    s.queues.resize(config.n_nodes);
    s.used_capacity.assign(config.n_nodes, 0);
    s.metric_stream.push_back(metrics::snapshot(s, nullptr, {}));
    return s;
}

void attach_log(SimState& state, std::function<void(std::string_view)> sink) {
    state.log = std::move(sink);
    if (!state.log) return;
    const auto& c = state.config;
    state.log("config nodes=" + std::to_string(c.n_nodes) + " pieces=" + std::to_string(c.n_pieces) +
              " strategy=" + std::string(to_string(c.strategy.kind)) + " churn=" + std::string(to_string(c.churn)) +
              " secure=" + (c.secure_channels ? "1" : "0") + " seed=" + std::to_string(c.seed));
    for (const auto& p : state.peers) {
        state.log("node=" + std::to_string(p.id.value) + " role=" + std::string(to_string(p.role)));
    }
}

PieceId select_piece(const PeerState& peer, const PieceSet& counterparty, Rng& rng) {
    const auto options = counterparty.minus(peer.inventory).minus(peer.inflight).ids();
    if (options.empty()) {
        throw Error(ErrorCode::NoUsefulPiece, "node " + std::to_string(peer.id.value) + " has nothing to gain here");
    }
    return pick(options, rng);
}

std::vector<Match> match_requests(const PeerState& seeder, std::span<const Request> queue,
                                  const std::vector<PeerState>& peers, std::size_t round, std::size_t pair_wait,
                                  std::size_t slots, Rng& rng) {
    std::vector<Match> out;
    std::vector<bool> taken(queue.size(), false);
    auto eligible = [&](std::size_t i) {
        const PeerState& p = peers.at(queue[i].requester.value);
        return !taken[i] && !p.departed && useful_from(p, seeder);
    };

    for (std::size_t i = 0; i < queue.size() && out.size() < slots; ++i) {
        if (!eligible(i)) continue;
        const PeerState& a = peers.at(queue[i].requester.value);
        if (marked(a, seeder)) continue;
        const PieceSet want_a = seeder.inventory.minus(a.inventory).minus(a.inflight);
        for (std::size_t j = i + 1; j < queue.size(); ++j) {
            if (!eligible(j)) continue;
            const PeerState& b = peers.at(queue[j].requester.value);
            if (marked(b, seeder)) continue;
            auto common = want_a.minus(b.inventory).minus(b.inflight).ids();
            if (common.size() < 2) continue;
            shuffle(common, rng);
            out.push_back(Match{Match::Kind::Pair, a.id, b.id, {common[0], common[1]}});
            taken[i] = taken[j] = true;
            break;
        }
    }

    for (std::size_t i = 0; i < queue.size() && out.size() < slots; ++i) {
        if (!eligible(i) || round - queue[i].since < pair_wait) continue;
        const PeerState& a = peers.at(queue[i].requester.value);
        out.push_back(Match{Match::Kind::Direct, a.id, NodeId{}, {select_piece(a, seeder.inventory, rng)}});
        taken[i] = true;
    }
    return out;
}

std::optional<Gift> optimistic_unchoke(const SimState& state, const PeerState& giver, Rng& rng) {
    const std::size_t period = state.config.unchoke_period;
    if (period == 0 || state.round % period != 0 || giver.inventory.empty()) return std::nullopt;
    std::vector<NodeId> needy;
    for (const NodeId n : giver.neighbors) {
        const PeerState& p = state.peer(n);
        if (!p.departed && p.role != Role::Seeder && useful_from(p, giver)) needy.push_back(n);
    }
    if (needy.empty()) return std::nullopt;
    const PeerState& to = state.peer(pick(needy, rng));
    return Gift{giver.id, to.id, select_piece(to, giver.inventory, rng)};
}

bool strategy_decide(const SimState& state, const PeerState& peer, NodeId requester, Rng& rng) {
    if (peer.role == Role::Freeloader) return false;
    if (peer.role == Role::Seeder) return true;
    const PeerState& asker = state.peer(requester);
    switch (state.config.strategy.kind) {
        case Strategy::Willingness: return bernoulli(rng, state.config.strategy.willingness);
        case Strategy::TitForTat:
            if (state.seeds(peer)) return true;
            return std::find(peer.unchoked.begin(), peer.unchoked.end(), requester) != peer.unchoked.end() ||
                   peer.optimistic == requester;
        case Strategy::Proposed:
            // Uploads happen only inside a session: a swap with a leecher that
            // has something to offer back, or seeder pairing.
            if (state.seeds(peer)) return true;
            return asker.role == Role::Leecher && useful_from(peer, asker);
    }
    return false;
}

void refresh_unchoke(SimState& state, PeerState& peer) {
    const auto& strategy = state.config.strategy;
    std::vector<NodeId> interested;
    for (const NodeId n : active_neighbors(state, peer)) {
        const PeerState& other = state.peer(n);
        if (other.role != Role::Seeder && useful_from(other, peer)) interested.push_back(n);
    }
    shuffle(interested, state.rng);
    auto received_from = [&](NodeId n) {
        std::size_t count = 0;
        for (const auto& round_sources : peer.recent_sources) count += std::count(round_sources.begin(), round_sources.end(), n);
        return count;
    };
    std::stable_sort(interested.begin(), interested.end(),
                     [&](NodeId a, NodeId b) { return received_from(a) > received_from(b); });
    const std::size_t regular = std::min(strategy.tft_slots, interested.size());
    peer.unchoked.assign(interested.begin(), interested.begin() + static_cast<std::ptrdiff_t>(regular));

    const bool stale = !peer.optimistic || state.peer(*peer.optimistic).departed ||
                       std::find(interested.begin(), interested.end(), *peer.optimistic) == interested.end() ||
                       std::find(peer.unchoked.begin(), peer.unchoked.end(), *peer.optimistic) != peer.unchoked.end();
    if (state.round % strategy.tft_rotation == 0 || stale) {
        std::vector<NodeId> rest(interested.begin() + static_cast<std::ptrdiff_t>(regular), interested.end());
        peer.optimistic.reset();
        if (!rest.empty()) peer.optimistic = pick(rest, state.rng);
    }
}

void tick(SimState& s) {
    std::fill(s.used_capacity.begin(), s.used_capacity.end(), 0);
    s.just_completed.clear();
    const auto& strategy = s.config.strategy;

    if (strategy.kind == Strategy::TitForTat) {
        for (PeerState& p : s.peers) {
            if (p.departed || p.role != Role::Leecher || s.seeds(p)) continue;
            refresh_unchoke(s, p);
        }
    }
    for (PeerState& p : s.peers) {
        p.recent_sources.emplace_back();
        while (p.recent_sources.size() > strategy.tft_window) p.recent_sources.pop_front();
    }

    std::vector<NodeId> order;
    for (const PeerState& p : s.peers) {
        if (!p.departed && p.role != Role::Seeder && !p.complete()) order.push_back(p.id);
    }
    shuffle(order, s.rng);

    if (strategy.kind == Strategy::Proposed) {
        proposed_requests(s, order);
        seeder_matching(s);
    } else {
        direct_requests(s, order);
    }
    step_sessions(s);
    unchoke_gifts(s);
    apply_churn(s);
    if (s.log) s.log("round=" + std::to_string(s.round) + " end");

    s.round += 1;
    const metrics::MetricRecord* previous = s.metric_stream.empty() ? nullptr : &s.metric_stream.back();
    auto record = metrics::snapshot(s, previous, s.just_completed);
    s.metric_stream.push_back(std::move(record));
}

void run_until(SimState& s) {
    const std::size_t cap = s.config.round_cap.value_or(default_round_cap(s.config));
    while (!s.stop_reached()) {
        if (s.round >= cap) throw NonConvergenceError(cap, s.round);
        tick(s);
    }
}

}  // namespace fairswap::swarm
