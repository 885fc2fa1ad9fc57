#include "fairswap/topology.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <string>

#include "fairswap/error.hpp"

namespace fairswap::topology {

namespace {

bool adjacent(const Graph& g, std::uint32_t a, std::uint32_t b) {
    return std::find(g[a].begin(), g[a].end(), b) != g[a].end();
}

void remove_at(std::vector<std::uint32_t>& stubs, std::size_t i, std::size_t j) {
    if (i < j) std::swap(i, j);
    stubs[i] = stubs.back();
    stubs.pop_back();
    stubs[j] = stubs.back();
    stubs.pop_back();
}

// One pass of random stub pairing that refuses loops and repeated edges.
// Returns false when the leftover stubs cannot be paired legally.
bool try_pairing(std::size_t n, std::size_t degree, Rng& rng, Graph& out) {
    out.assign(n, {});
    std::vector<std::uint32_t> stubs;
    stubs.reserve(n * degree);
    for (std::uint32_t v = 0; v < n; ++v) stubs.insert(stubs.end(), degree, v);

    while (!stubs.empty()) {
        bool paired = false;
        for (int tries = 0; tries < 64 && !paired; ++tries) {
            const std::size_t i = uniform_below(rng, stubs.size());
            const std::size_t j = uniform_below(rng, stubs.size());
            const std::uint32_t a = stubs[i];
            const std::uint32_t b = stubs[j];
            if (a == b || adjacent(out, a, b)) continue;
            out[a].push_back(b);
            out[b].push_back(a);
            remove_at(stubs, i, j);
            paired = true;
        }
        if (paired) continue;

        std::vector<std::pair<std::size_t, std::size_t>> legal;
        for (std::size_t i = 0; i < stubs.size(); ++i) {
            for (std::size_t j = i + 1; j < stubs.size(); ++j) {
                if (stubs[i] != stubs[j] && !adjacent(out, stubs[i], stubs[j])) legal.emplace_back(i, j);
            }
        }
        if (legal.empty()) return false;
        const auto [i, j] = pick(legal, rng);
        out[stubs[i]].push_back(stubs[j]);
        out[stubs[j]].push_back(stubs[i]);
        remove_at(stubs, i, j);
    }
    return true;
}

}  // namespace

Graph random_regular(std::size_t n, std::size_t degree, Rng& rng) {
    if (n == 0) throw Error(ErrorCode::InvalidConfig, "graph needs at least one vertex");
    if (degree >= n || (n * degree) % 2 != 0) {
        throw Error(ErrorCode::InvalidConfig,
                    "no simple " + std::to_string(degree) + "-regular graph on " + std::to_string(n) + " vertices");
    }
    if (n > 1 && degree == 0) throw Error(ErrorCode::InvalidConfig, "degree 0 leaves the graph disconnected");

    Graph g;
    for (int attempt = 0; attempt < 1000; ++attempt) {
        if (try_pairing(n, degree, rng, g) && connected(g)) {
            for (auto& row : g) std::sort(row.begin(), row.end());
            return g;
        }
    }
    throw Error(ErrorCode::InvalidConfig, "could not build a connected regular graph");
}

std::vector<std::size_t> bfs_distances(const Graph& graph, const std::vector<std::uint32_t>& sources) {
    constexpr auto kFar = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> dist(graph.size(), kFar);
    std::deque<std::uint32_t> frontier;
    for (const auto s : sources) {
        if (dist[s] == kFar) {
            dist[s] = 0;
            frontier.push_back(s);
        }
    }
    while (!frontier.empty()) {
        const auto v = frontier.front();
        frontier.pop_front();
        for (const auto w : graph[v]) {
            if (dist[w] != kFar) continue;
            dist[w] = dist[v] + 1;
            frontier.push_back(w);
        }
    }
    return dist;
}

bool connected(const Graph& graph) {
    if (graph.empty()) return true;
    const auto dist = bfs_distances(graph, {0});
    return std::none_of(dist.begin(), dist.end(), [](std::size_t d) { return d == std::numeric_limits<std::size_t>::max(); });
}

std::vector<std::uint32_t> spread_out(const Graph& graph, std::size_t count, const std::vector<std::uint32_t>& taken,
                                      Rng& rng) {
    std::vector<std::uint32_t> chosen = taken;
    std::vector<bool> used(graph.size(), false);
    for (const auto v : taken) used[v] = true;
    if (count + taken.size() > graph.size()) throw Error(ErrorCode::InvalidConfig, "not enough vertices to place");

    std::vector<std::uint32_t> out;
    for (std::size_t k = 0; k < count; ++k) {
        std::vector<std::uint32_t> best;
        if (chosen.empty()) {
            for (std::uint32_t v = 0; v < graph.size(); ++v) best.push_back(v);
        } else {
            const auto dist = bfs_distances(graph, chosen);
            std::size_t far = 0;
            for (std::uint32_t v = 0; v < graph.size(); ++v) {
                if (used[v]) continue;
                if (dist[v] > far) {
                    far = dist[v];
                    best.clear();
                }
                if (dist[v] == far) best.push_back(v);
            }
        }
        const auto v = pick(best, rng);
        used[v] = true;
        chosen.push_back(v);
        out.push_back(v);
    }
    return out;
}

}  // namespace fairswap::topology
