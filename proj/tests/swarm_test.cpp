#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "fairswap/error.hpp"
#include "fairswap/swarm.hpp"
#include "fairswap/topology.hpp"

using namespace fairswap;
using namespace fairswap::swarm;

namespace {

NodeId node(std::uint32_t v) { return NodeId{v}; }

ErrorCode error_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::IoError;
}

PieceSet pieces(std::size_t size, std::initializer_list<PieceId> held) {
    PieceSet out(size);
    for (const auto p : held) out.set(p);
    return out;
}

// A network with no seeders; tests assign roles and inventories by hand.
SimState blank(std::size_t n, std::size_t n_pieces, std::size_t degree, Strategy kind = Strategy::Proposed) {
    ScenarioConfig c;
    c.n_nodes = n;
    c.n_seeders = 0;
    c.n_pieces = n_pieces;
    c.degree = degree;
    c.strategy.kind = kind;
    return build_network(c);
}

void make_seeder(SimState& s, std::uint32_t v) {
    s.peers[v].role = Role::Seeder;
    s.peers[v].inventory = PieceSet::full(s.config.n_pieces);
}

PeerState standalone(std::uint32_t v, std::size_t n_pieces, Role role = Role::Leecher) {
    PeerState p;
    p.id = node(v);
    p.role = role;
    p.inventory = PieceSet(n_pieces);
    p.inflight = PieceSet(n_pieces);
    p.provenance.assign(n_pieces, std::nullopt);
    return p;
}

// Seeder 0 (full) plus `n` empty requesters 1..n.
std::vector<PeerState> seeder_with_requesters(std::size_t n, std::size_t n_pieces) {
    std::vector<PeerState> peers;
    peers.push_back(standalone(0, n_pieces, Role::Seeder));
    peers[0].inventory = PieceSet::full(n_pieces);
    for (std::uint32_t v = 1; v <= n; ++v) peers.push_back(standalone(v, n_pieces));
    return peers;
}

ScenarioConfig random_config(Rng& rng) {
    ScenarioConfig c;
    c.n_nodes = 12 + uniform_below(rng, 20);
    c.n_seeders = 1 + uniform_below(rng, 3);
    c.n_freeloaders = uniform_below(rng, 3);
    c.n_pieces = 4 + uniform_below(rng, 10);
    c.degree = 3 + uniform_below(rng, 4);
    if ((c.degree * c.n_nodes) % 2 != 0) c.degree += 1;
    c.capacity = 1 + uniform_below(rng, 2);
    c.churn = bernoulli(rng, 0.5) ? Churn::Static : Churn::LeaveOnComplete;
    switch (uniform_below(rng, 3)) {
        case 0: c.strategy.kind = Strategy::Proposed; break;
        case 1:
            c.strategy.kind = Strategy::Willingness;
            c.strategy.willingness = 0.25 * static_cast<double>(1 + uniform_below(rng, 4));
            break;
        default: c.strategy.kind = Strategy::TitForTat; break;
    }
    c.secure_channels = bernoulli(rng, 0.2);
    c.seed = rng();
    return c;
}

// Ticks until done or `limit` rounds, whichever comes first.
void run_for(SimState& s, std::size_t limit) {
    for (std::size_t i = 0; i < limit && !s.stop_reached(); ++i) tick(s);
}

}  // namespace

// --- build_network -----------------------------------------------------------

TEST(BuildNetwork, ThousandNodesTenSeeders) {
    ScenarioConfig c;
    c.n_nodes = 1000;
    c.n_seeders = 10;
    c.n_pieces = 100;
    const auto s = build_network(c);
    std::size_t full = 0;
    std::size_t empty = 0;
    for (const auto& p : s.peers) {
        if (p.role == Role::Seeder && p.inventory.complete()) full += 1;
        if (p.role == Role::Leecher && p.inventory.empty()) empty += 1;
    }
    EXPECT_EQ(full, 10u);
    EXPECT_EQ(empty, 990u);
    ASSERT_EQ(s.metric_stream.size(), 1u);
    EXPECT_DOUBLE_EQ(s.metric_stream[0].avg_pieces, 1.0);
}

TEST(BuildNetwork, ThirtyNodeTopologyIsConnectedAndRegular) {
    ScenarioConfig c;
    c.n_nodes = 30;
    c.n_seeders = 6;
    c.n_pieces = 100;
    const auto s = build_network(c);
    EXPECT_TRUE(topology::connected(s.graph));
    for (const auto& p : s.peers) {
        EXPECT_EQ(p.neighbors.size(), 8u);
        EXPECT_FALSE(std::find(p.neighbors.begin(), p.neighbors.end(), p.id) != p.neighbors.end());
    }
    EXPECT_EQ(s.ids_with(Role::Seeder).size(), 6u);
}

TEST(BuildNetwork, TooManySeedersRejected) {
    ScenarioConfig c;
    c.n_nodes = 5;
    c.n_seeders = 6;
    EXPECT_EQ(error_of([&] { build_network(c); }), ErrorCode::InvalidConfig);
}

TEST(BuildNetwork, BadFieldsRejected) {
    ScenarioConfig c;
    c.n_pieces = 0;
    EXPECT_EQ(error_of([&] { build_network(c); }), ErrorCode::InvalidConfig);
    c = ScenarioConfig{};
    c.strategy.willingness = 1.5;
    EXPECT_EQ(error_of([&] { build_network(c); }), ErrorCode::InvalidConfig);
    c = ScenarioConfig{};
    c.stop = StopCondition::FreeloadersComplete;
    EXPECT_EQ(error_of([&] { build_network(c); }), ErrorCode::InvalidConfig);
}

TEST(BuildNetwork, FreeloadersKeptAwayFromSeeders) {
    ScenarioConfig c;
    c.n_nodes = 60;
    c.n_seeders = 3;
    c.n_freeloaders = 2;
    const auto s = build_network(c);
    std::vector<std::uint32_t> seeders;
    for (const auto id : s.ids_with(Role::Seeder)) seeders.push_back(id.value);
    const auto dist = topology::bfs_distances(s.graph, seeders);
    for (const auto id : s.ids_with(Role::Freeloader)) EXPECT_GE(dist[id.value], 2u);
}

TEST(BuildNetwork, DefaultRoundCap) {
    ScenarioConfig c;
    c.n_nodes = 100;
    c.n_seeders = 10;
    c.n_pieces = 25;
    EXPECT_EQ(default_round_cap(c), 2500u);
    c.n_seeders = 0;
    EXPECT_EQ(default_round_cap(c), 25000u);
}

// --- tick --------------------------------------------------------------------

TEST(Tick, EverybodyCompleteIsAFixedPoint) {
    auto s = blank(4, 5, 2);
    for (std::uint32_t v = 0; v < 4; ++v) make_seeder(s, v);
    const auto before = s.peers;
    tick(s);
    EXPECT_EQ(s.round, 1u);
    ASSERT_EQ(s.metric_stream.size(), 2u);
    for (std::size_t i = 0; i < before.size(); ++i) {
        EXPECT_EQ(s.peers[i].inventory, before[i].inventory);
        EXPECT_EQ(s.peers[i].uploads, before[i].uploads);
    }
    EXPECT_TRUE(s.sessions.empty());
}

TEST(Tick, ComplementaryLeechersSwapInOneRound) {
    auto s = blank(2, 2, 1);
    s.peers[0].inventory = pieces(2, {0});
    s.peers[1].inventory = pieces(2, {1});
    tick(s);
    EXPECT_TRUE(s.peers[0].complete());
    EXPECT_TRUE(s.peers[1].complete());
    EXPECT_EQ(s.peers[0].via_l2l, 1u);
    EXPECT_EQ(s.peers[1].via_l2l, 1u);
    EXPECT_EQ(s.peers[0].uploads, 1u);
    EXPECT_EQ(s.peers[1].uploads, 1u);
    EXPECT_TRUE(s.sessions.empty());
    EXPECT_EQ(s.metric_stream.back().completions, 2u);
}

TEST(Tick, FreeloaderGainsOnlyOnUnchokeRounds) {
    // Triangle: two leechers holding the same pieces, so they have nothing
    // to swap, and an empty freeloader.
    auto s = blank(3, 10, 2);
    s.peers[0].role = Role::Freeloader;
    s.peers[1].inventory = pieces(10, {0, 1, 2, 3, 4});
    s.peers[2].inventory = pieces(10, {0, 1, 2, 3, 4});
    std::vector<std::size_t> held;
    for (int r = 0; r < 7; ++r) {
        tick(s);
        held.push_back(s.peers[0].inventory.count());
    }
    EXPECT_EQ(held, (std::vector<std::size_t>{2, 2, 2, 4, 4, 4, 5}));
    EXPECT_EQ(s.peers[0].uploads, 0u);
    EXPECT_EQ(s.peers[0].via_gift, 5u);
}

TEST(Tick, FreeloaderRefusesPairingAndIsMarked) {
    auto s = blank(3, 6, 2);
    make_seeder(s, 0);
    s.peers[2].role = Role::Freeloader;
    tick(s);
    EXPECT_TRUE(s.sessions.empty());
    EXPECT_EQ(s.peers[2].refused, std::vector<NodeId>{node(0)});
    EXPECT_TRUE(s.peers[1].refused.empty());
    EXPECT_EQ(s.peers[0].uploads, 0u);
}

TEST(Tick, LeaveOnCompleteDepartsAndRelinks) {
    ScenarioConfig c;
    c.n_nodes = 6;
    c.n_seeders = 0;
    c.n_pieces = 2;
    c.degree = 2;
    c.churn = Churn::LeaveOnComplete;
    auto s = build_network(c);
    s.peers[0].inventory = PieceSet::full(2);
    const auto old_neighbors = s.peers[0].neighbors;
    tick(s);
    EXPECT_TRUE(s.peers[0].departed);
    for (const auto n : old_neighbors) {
        const auto& nb = s.peer(n).neighbors;
        const auto live = std::count_if(nb.begin(), nb.end(), [&](NodeId m) { return !s.peer(m).departed; });
        EXPECT_GE(live, 2) << "node " << n.value;
        EXPECT_TRUE(std::is_sorted(nb.begin(), nb.end()));
    }
    EXPECT_LT(s.metric_stream.back().avg_pieces, 2.0);
}

TEST(Tick, StaticFinishersKeepServing) {
    auto s = blank(3, 4, 2);
    s.peers[0].inventory = PieceSet::full(4);
    EXPECT_TRUE(s.seeds(s.peers[0]));
    s.config.churn = Churn::LeaveOnComplete;
    EXPECT_FALSE(s.seeds(s.peers[0]));
}

// --- select_piece ------------------------------------------------------------

TEST(SelectPiece, OnlyPieceOnOffer) {
    auto p = standalone(1, 3);
    p.inventory = pieces(3, {0, 1});
    Rng rng(1);
    EXPECT_EQ(select_piece(p, pieces(3, {0, 1, 2}), rng), 2u);
}

TEST(SelectPiece, NothingNewThrows) {
    auto p = standalone(1, 3);
    p.inventory = pieces(3, {0, 1});
    Rng rng(1);
    EXPECT_EQ(error_of([&] { select_piece(p, pieces(3, {0}), rng); }), ErrorCode::NoUsefulPiece);
}

TEST(SelectPiece, SkipsPiecesAlreadyPromised) {
    auto p = standalone(1, 3);
    p.inflight = pieces(3, {0, 1});
    Rng rng(1);
    for (int i = 0; i < 20; ++i) EXPECT_EQ(select_piece(p, PieceSet::full(3), rng), 2u);
}

TEST(SelectPiece, UniformOverOptions) {
    auto p = standalone(1, 4);
    Rng rng(7);
    std::map<PieceId, int> seen;
    for (int i = 0; i < 4000; ++i) seen[select_piece(p, PieceSet::full(4), rng)] += 1;
    ASSERT_EQ(seen.size(), 4u);
    for (const auto& [piece, n] : seen) EXPECT_NEAR(n, 1000, 120) << piece;
}

// --- match_requests ----------------------------------------------------------

TEST(MatchRequests, TwoRequestersPair) {
    const auto peers = seeder_with_requesters(2, 10);
    const std::vector<Request> queue{{node(1), 0}, {node(2), 0}};
    Rng rng(1);
    const auto m = match_requests(peers[0], queue, peers, 0, 2, 1, rng);
    ASSERT_EQ(m.size(), 1u);
    EXPECT_EQ(m[0].kind, Match::Kind::Pair);
    EXPECT_EQ(m[0].first, node(1));
    EXPECT_EQ(m[0].second, node(2));
    ASSERT_EQ(m[0].pieces.size(), 2u);
    EXPECT_NE(m[0].pieces[0], m[0].pieces[1]);
}

TEST(MatchRequests, LoneRequesterServedAfterWait) {
    const auto peers = seeder_with_requesters(1, 10);
    const std::vector<Request> queue{{node(1), 3}};
    Rng rng(1);
    EXPECT_TRUE(match_requests(peers[0], queue, peers, 3, 2, 1, rng).empty());
    EXPECT_TRUE(match_requests(peers[0], queue, peers, 4, 2, 1, rng).empty());
    const auto m = match_requests(peers[0], queue, peers, 5, 2, 1, rng);
    ASSERT_EQ(m.size(), 1u);
    EXPECT_EQ(m[0].kind, Match::Kind::Direct);
    EXPECT_EQ(m[0].first, node(1));
    EXPECT_EQ(m[0].pieces.size(), 1u);
}

TEST(MatchRequests, ThreeRequestersPairPlusOneWaiting) {
    const auto peers = seeder_with_requesters(3, 10);
    const std::vector<Request> queue{{node(1), 0}, {node(2), 0}, {node(3), 0}};
    Rng rng(1);
    const auto m = match_requests(peers[0], queue, peers, 0, 2, 5, rng);
    ASSERT_EQ(m.size(), 1u);
    EXPECT_EQ(m[0].kind, Match::Kind::Pair);
    const auto later = match_requests(peers[0], queue, peers, 2, 2, 5, rng);
    ASSERT_EQ(later.size(), 2u);
    EXPECT_EQ(later[1].kind, Match::Kind::Direct);
    EXPECT_EQ(later[1].first, node(3));
}

TEST(MatchRequests, PairNeedsTwoSharedMissingPieces) {
    auto peers = seeder_with_requesters(2, 4);
    peers[1].inventory = pieces(4, {0, 1, 2});
    peers[2].inventory = pieces(4, {0, 1});
    const std::vector<Request> queue{{node(1), 0}, {node(2), 0}};
    Rng rng(1);
    EXPECT_TRUE(match_requests(peers[0], queue, peers, 0, 2, 1, rng).empty());
}

TEST(MatchRequests, SlotsBoundTheMatches) {
    const auto peers = seeder_with_requesters(4, 10);
    const std::vector<Request> queue{{node(1), 0}, {node(2), 0}, {node(3), 0}, {node(4), 0}};
    Rng rng(1);
    EXPECT_EQ(match_requests(peers[0], queue, peers, 0, 2, 1, rng).size(), 1u);
    EXPECT_EQ(match_requests(peers[0], queue, peers, 0, 2, 2, rng).size(), 2u);
    EXPECT_TRUE(match_requests(peers[0], queue, peers, 0, 2, 0, rng).empty());
}

TEST(MatchRequests, MarkedRequesterIsNotOfferedPairs) {
    auto peers = seeder_with_requesters(2, 10);
    peers[2].refused.push_back(node(0));
    const std::vector<Request> queue{{node(1), 0}, {node(2), 0}};
    Rng rng(1);
    EXPECT_TRUE(match_requests(peers[0], queue, peers, 0, 2, 2, rng).empty());
    EXPECT_EQ(match_requests(peers[0], queue, peers, 2, 2, 2, rng).size(), 2u);
}

// --- optimistic_unchoke ------------------------------------------------------

TEST(OptimisticUnchoke, FiresEveryPeriod) {
    auto s = blank(3, 6, 2);
    s.peers[0].inventory = pieces(6, {0, 1});
    Rng rng(3);
    std::vector<std::size_t> fired;
    for (std::size_t r = 0; r < 7; ++r) {
        s.round = r;
        if (optimistic_unchoke(s, s.peers[0], rng)) fired.push_back(r);
    }
    EXPECT_EQ(fired, (std::vector<std::size_t>{0, 3, 6}));
}

TEST(OptimisticUnchoke, GiftIsUsefulToANeighbour) {
    auto s = blank(5, 6, 2);
    s.peers[0].inventory = pieces(6, {0, 1, 2});
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const auto gift = optimistic_unchoke(s, s.peers[0], rng);
        ASSERT_TRUE(gift);
        EXPECT_EQ(gift->from, node(0));
        const auto& nb = s.peers[0].neighbors;
        EXPECT_TRUE(std::find(nb.begin(), nb.end(), gift->to) != nb.end());
        EXPECT_LT(gift->piece, 3u);
    }
}

TEST(OptimisticUnchoke, NothingToGive) {
    auto s = blank(3, 6, 2);
    Rng rng(3);
    EXPECT_FALSE(optimistic_unchoke(s, s.peers[0], rng));
    s.peers[0].inventory = pieces(6, {0});
    s.peers[1].inventory = PieceSet::full(6);
    s.peers[2].inventory = PieceSet::full(6);
    EXPECT_FALSE(optimistic_unchoke(s, s.peers[0], rng));
}

// --- strategy_decide ---------------------------------------------------------

TEST(StrategyDecide, FullWillingnessAlwaysAccepts) {
    auto s = blank(2, 4, 1, Strategy::Willingness);
    s.config.strategy.willingness = 1.0;
    s.peers[0].inventory = pieces(4, {0});
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) ASSERT_TRUE(strategy_decide(s, s.peers[0], node(1), rng));
}

TEST(StrategyDecide, HalfWillingnessAcceptsHalf) {
    auto s = blank(2, 4, 1, Strategy::Willingness);
    s.config.strategy.willingness = 0.5;
    Rng rng(5);
    int yes = 0;
    for (int i = 0; i < 10000; ++i) yes += strategy_decide(s, s.peers[0], node(1), rng) ? 1 : 0;
    EXPECT_NEAR(yes / 10000.0, 0.5, 0.02);
}

TEST(StrategyDecide, SeedersAlwaysFreeloadersNever) {
    auto s = blank(2, 4, 1, Strategy::Willingness);
    s.config.strategy.willingness = 0.0;
    Rng rng(5);
    make_seeder(s, 0);
    EXPECT_TRUE(strategy_decide(s, s.peers[0], node(1), rng));
    s.peers[1].role = Role::Freeloader;
    s.peers[1].inventory = pieces(4, {0});
    EXPECT_FALSE(strategy_decide(s, s.peers[1], node(0), rng));
}

TEST(StrategyDecide, TitForTatReciprocates) {
    auto s = blank(8, 6, 7, Strategy::TitForTat);
    s.peers[0].inventory = pieces(6, {0, 1, 2});
    for (std::uint32_t v = 1; v < 8; ++v) s.peers[v].inventory = pieces(6, {3});
    // Node 5 uploaded to node 0 last round.
    s.peers[0].recent_sources.push_back({node(5)});
    s.round = 1;
    refresh_unchoke(s, s.peers[0]);
    Rng rng(1);
    EXPECT_TRUE(strategy_decide(s, s.peers[0], node(5), rng));
    EXPECT_EQ(s.peers[0].unchoked.size(), 4u);
    EXPECT_TRUE(s.peers[0].optimistic.has_value());
    std::size_t refused = 0;
    for (std::uint32_t v = 1; v < 8; ++v) refused += strategy_decide(s, s.peers[0], node(v), rng) ? 0 : 1;
    EXPECT_EQ(refused, 2u);
}

TEST(StrategyDecide, ProposedUploadsOnlyForSomethingBack) {
    auto s = blank(3, 4, 2);
    s.peers[0].inventory = pieces(4, {0});
    s.peers[1].inventory = pieces(4, {1});
    s.peers[2].inventory = pieces(4, {0});
    Rng rng(1);
    EXPECT_TRUE(strategy_decide(s, s.peers[0], node(1), rng));
    EXPECT_FALSE(strategy_decide(s, s.peers[0], node(2), rng));
}

// --- run_until ---------------------------------------------------------------

TEST(RunUntil, OneSeederOneLeecherTenPieces) {
    ScenarioConfig c;
    c.n_nodes = 2;
    c.n_seeders = 1;
    c.n_pieces = 10;
    c.degree = 1;
    c.strategy.kind = Strategy::Willingness;
    c.strategy.willingness = 1.0;
    auto s = build_network(c);
    run_until(s);
    EXPECT_EQ(s.round, 10u);
    EXPECT_EQ(s.metric_stream.size(), 11u);
    const auto& leecher = s.peers[s.ids_with(Role::Leecher).front().value];
    EXPECT_EQ(leecher.completed_round, 10u);
    EXPECT_EQ(leecher.via_direct, 10u);
}

TEST(RunUntil, NoSeedersNeverConverges) {
    ScenarioConfig c;
    c.n_nodes = 4;
    c.n_seeders = 0;
    c.n_pieces = 3;
    c.degree = 2;
    c.round_cap = 50;
    auto s = build_network(c);
    try {
        run_until(s);
        FAIL() << "expected non-convergence";
    } catch (const NonConvergenceError& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonConvergence);
        EXPECT_EQ(e.cap(), 50u);
        EXPECT_EQ(e.rounds(), 50u);
    }
    EXPECT_EQ(s.round, 50u);
}

TEST(RunUntil, FreeloaderStopIgnoresLeechers) {
    ScenarioConfig c;
    c.n_nodes = 20;
    c.n_seeders = 2;
    c.n_freeloaders = 1;
    c.n_pieces = 6;
    c.degree = 4;
    c.stop = StopCondition::FreeloadersComplete;
    auto s = build_network(c);
    run_until(s);
    EXPECT_TRUE(s.peer(s.ids_with(Role::Freeloader).front()).complete());
}

// --- format_event ------------------------------------------------------------

TEST(FormatEvent, Fields) {
    TransferEvent e{4, Channel::L2S, 7, 3, protocol::MessageKind::Data, node(9), node(1), {3, 4}, 88, std::nullopt};
    EXPECT_EQ(format_event(e),
              "round=4 channel=l2s session=7 step=3 kind=DATA from=9 to=1 pieces=3,4 payload_len=88 key=-");
    e.pieces.clear();
    e.key = 12;
    e.kind = protocol::MessageKind::Exc;
    EXPECT_EQ(format_event(e),
              "round=4 channel=l2s session=7 step=3 kind=EXC from=9 to=1 pieces=- payload_len=88 key=12");
}

// --- properties over random scenarios ----------------------------------------

TEST(SwarmProperty, ConservationEveryPieceHasASource) {
    Rng gen(101);
    for (int trial = 0; trial < 40; ++trial) {
        const auto c = random_config(gen);
        auto s = build_network(c);
        std::set<std::tuple<std::uint32_t, std::uint32_t, SessionId, PieceId>> sent;  // from, to, session, piece
        s.on_event = [&](const TransferEvent& e) {
            if (e.kind != protocol::MessageKind::Data) return;
            for (const auto p : e.pieces) sent.emplace(e.from.value, e.to.value, e.session, p);
        };
        run_for(s, 300);
        for (const auto& p : s.peers) {
            if (p.role == Role::Seeder) continue;
            for (const auto piece : p.inventory.ids()) {
                const auto& how = p.provenance[piece];
                ASSERT_TRUE(how) << "trial " << trial << " node " << p.id.value << " piece " << piece;
                EXPECT_TRUE(sent.count({how->from.value, p.id.value, how->session, piece}))
                    << "trial " << trial << " node " << p.id.value << " piece " << piece;
            }
            EXPECT_EQ(p.downloads, p.inventory.count());
            EXPECT_EQ(p.downloads, p.via_l2l + p.via_relay + p.via_seeder_leg + p.via_direct + p.via_gift);
        }
    }
}

TEST(SwarmProperty, SameConfigSameStream) {
    Rng gen(202);
    for (int trial = 0; trial < 15; ++trial) {
        const auto c = random_config(gen);
        auto a = build_network(c);
        auto b = build_network(c);
        run_for(a, 200);
        run_for(b, 200);
        EXPECT_EQ(a.metric_stream, b.metric_stream) << "trial " << trial;
    }
}

TEST(SwarmProperty, InventoriesNeverShrink) {
    Rng gen(303);
    for (int trial = 0; trial < 30; ++trial) {
        auto s = build_network(random_config(gen));
        for (int r = 0; r < 200 && !s.stop_reached(); ++r) {
            std::vector<std::size_t> before;
            for (const auto& p : s.peers) before.push_back(p.inventory.count());
            tick(s);
            for (std::size_t i = 0; i < before.size(); ++i) {
                if (s.peers[i].departed) continue;
                ASSERT_GE(s.peers[i].inventory.count(), before[i]) << "trial " << trial << " node " << i;
            }
        }
    }
}

TEST(SwarmProperty, UploadsWithinCapacity) {
    Rng gen(404);
    for (int trial = 0; trial < 40; ++trial) {
        const auto c = random_config(gen);
        auto s = build_network(c);
        std::map<std::pair<std::size_t, std::uint32_t>, std::size_t> per_round;
        s.on_event = [&](const TransferEvent& e) {
            if (e.kind == protocol::MessageKind::Data) per_round[{e.round, e.from.value}] += 1;
        };
        run_for(s, 300);
        for (const auto& [key, n] : per_round) {
            ASSERT_LE(n, c.capacity) << "trial " << trial << " round " << key.first << " node " << key.second;
        }
    }
}

TEST(SwarmProperty, UploadCountsMatchEvents) {
    Rng gen(505);
    for (int trial = 0; trial < 20; ++trial) {
        auto s = build_network(random_config(gen));
        std::vector<std::uint64_t> counted(s.peers.size(), 0);
        s.on_event = [&](const TransferEvent& e) {
            if (e.kind == protocol::MessageKind::Data) counted[e.from.value] += 1;
        };
        run_for(s, 300);
        for (const auto& p : s.peers) EXPECT_EQ(p.uploads, counted[p.id.value]) << "trial " << trial;
    }
}

TEST(SwarmProperty, ProposedLeechersPayForWhatTheyTake) {
    Rng gen(606);
    for (int trial = 0; trial < 25; ++trial) {
        auto c = random_config(gen);
        c.strategy = StrategySpec{};
        c.n_freeloaders = 0;
        c.churn = Churn::Static;
        auto s = build_network(c);
        run_for(s, 500);
        for (const auto& p : s.peers) {
            if (p.role != Role::Leecher || !p.completed_round) continue;
            const std::uint64_t free_ride = p.via_gift + p.via_direct + p.via_seeder_leg;
            EXPECT_GE(p.uploads + free_ride, p.downloads) << "trial " << trial << " node " << p.id.value;
        }
    }
}

TEST(SwarmProperty, FreeloadersNeverUpload) {
    Rng gen(707);
    for (int trial = 0; trial < 25; ++trial) {
        auto c = random_config(gen);
        c.n_freeloaders = 1 + uniform_below(gen, 2);
        auto s = build_network(c);
        run_for(s, 300);
        for (const auto id : s.ids_with(Role::Freeloader)) EXPECT_EQ(s.peer(id).uploads, 0u) << "trial " << trial;
    }
}

TEST(SwarmProperty, MetricRecordPerRound) {
    Rng gen(808);
    for (int trial = 0; trial < 10; ++trial) {
        auto s = build_network(random_config(gen));
        run_for(s, 100);
        ASSERT_EQ(s.metric_stream.size(), s.round + 1);
        for (std::size_t r = 0; r < s.metric_stream.size(); ++r) EXPECT_EQ(s.metric_stream[r].round, r);
    }
}
