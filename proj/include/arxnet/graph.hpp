// Copyright (c) 2026 arxnet contributors
// SPDX-License-Identifier: MIT

#ifndef ARXNET_GRAPH_HPP
#define ARXNET_GRAPH_HPP

/** @file
 * Sensor network topologies and their diffusion weight matrices.
 *
 * A topology is an undirected connected graph over sensors `0..n-1` together
 * with the Metropolis weight matrix
 *
 *     a_ij = 1 / (1 + max(deg_i, deg_j))     for each edge {i, j},
 *     a_ii = 1 - sum_{j != i} a_ij,
 *
 * which is symmetric, doubly stochastic, and has strictly positive diagonal.
 * The graph diameter D is computed by breadth-first search; every entry of
 * the l-th weight-matrix power is strictly positive once l >= D, which is the
 * property the estimator diagnostics rely on.
 */

#include <algorithm>
#include <cstdint>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "arxnet/common.hpp"

namespace arxnet {

/// Built-in topology families.
enum class GraphKind {
    complete,           ///< every pair connected
    ring,               ///< cycle 0-1-...-(n-1)-0, n >= 3
    star,               ///< node 0 is the hub
    path,               ///< chain 0-1-...-(n-1)
    grid,               ///< rows x cols 4-neighbour lattice
    random_geometric,   ///< uniform points in the unit square, radius threshold
};

inline std::string to_string(GraphKind k) {
    switch (k) {
        case GraphKind::complete: return "complete";
        case GraphKind::ring: return "ring";
        case GraphKind::star: return "star";
        case GraphKind::path: return "path";
        case GraphKind::grid: return "grid";
        case GraphKind::random_geometric: return "random_geometric";
    }
    throw ValidationError("unknown graph kind");
}

inline GraphKind graph_kind_from_string(const std::string& s) {
    if (s == "complete") return GraphKind::complete;
    if (s == "ring") return GraphKind::ring;
    if (s == "star") return GraphKind::star;
    if (s == "path") return GraphKind::path;
    if (s == "grid") return GraphKind::grid;
    if (s == "random_geometric") return GraphKind::random_geometric;
    throw ValidationError("unknown graph kind: " + s);
}

/// Undirected sensor graph with precomputed diffusion weights.
struct Topology {
    int n = 0;
    std::vector<std::pair<int, int>> edges;  ///< i < j, lexicographically sorted
    Eigen::MatrixXd weights;                 ///< Metropolis matrix, n x n
    int diameter = 0;                        ///< max BFS eccentricity

    /// Neighbour lists including the node itself, ascending index order.
    /// Diffusion sums always iterate in this fixed order so results are
    /// reproducible bit-for-bit.
    std::vector<std::vector<int>> closed_neighbourhoods;
};

namespace detail {

inline std::vector<int> degrees(int n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<int> deg(static_cast<std::size_t>(n), 0);
    for (const auto& [i, j] : edges) {
        ++deg[static_cast<std::size_t>(i)];
        ++deg[static_cast<std::size_t>(j)];
    }
    return deg;
}

/// All-pairs BFS diameter; throws ValidationError if the graph is disconnected.
inline int bfs_diameter(int n, const std::vector<std::vector<int>>& adj) {
    int diameter = 0;
    for (int s = 0; s < n; ++s) {
        std::vector<int> dist(static_cast<std::size_t>(n), -1);
        std::queue<int> frontier;
        dist[static_cast<std::size_t>(s)] = 0;
        frontier.push(s);
        while (!frontier.empty()) {
            const int v = frontier.front();
            frontier.pop();
            for (int w : adj[static_cast<std::size_t>(v)]) {
                if (dist[static_cast<std::size_t>(w)] < 0) {
                    dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
                    frontier.push(w);
                }
            }
        }
        for (int v = 0; v < n; ++v) {
            if (dist[static_cast<std::size_t>(v)] < 0)
                throw ValidationError("topology is disconnected");
            diameter = std::max(diameter, dist[static_cast<std::size_t>(v)]);
        }
    }
    return diameter;
}

}  // namespace detail

/// Metropolis weight matrix for the given edge set.
inline Eigen::MatrixXd metropolis_weights(int n, const std::vector<std::pair<int, int>>& edges) {
    if (n < 1) throw ValidationError("topology needs at least one sensor");
    const std::vector<int> deg = detail::degrees(n, edges);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [i, j] : edges) {
        const double w = 1.0 / (1.0 + std::max(deg[static_cast<std::size_t>(i)],
                                               deg[static_cast<std::size_t>(j)]));
        a(i, j) = w;
        a(j, i) = w;
    }
    for (int i = 0; i < n; ++i) a(i, i) = 1.0 - a.row(i).sum();
    return a;
}

/// Assembles a Topology from an explicit edge list (validated, deduplicated).
inline Topology make_topology(int n, std::vector<std::pair<int, int>> edges) {
    if (n < 1) throw ValidationError("topology needs at least one sensor");
    for (auto& [i, j] : edges) {
        if (i == j) throw ValidationError("self-loops are not allowed in the edge list");
        if (i < 0 || j < 0 || i >= n || j >= n)
            throw ValidationError("edge endpoint out of range");
        if (i > j) std::swap(i, j);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (const auto& [i, j] : edges) {
        adj[static_cast<std::size_t>(i)].push_back(j);
        adj[static_cast<std::size_t>(j)].push_back(i);
    }

    Topology topo;
    topo.n = n;
    topo.edges = std::move(edges);
    topo.weights = metropolis_weights(n, topo.edges);
    topo.diameter = (n == 1) ? 0 : detail::bfs_diameter(n, adj);
    topo.closed_neighbourhoods.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& nb = topo.closed_neighbourhoods[static_cast<std::size_t>(i)];
        nb = adj[static_cast<std::size_t>(i)];
        nb.push_back(i);
        std::sort(nb.begin(), nb.end());
    }
    return topo;
}

/**
 * Builds one of the named topology families.
 *
 * @param kind    family selector
 * @param n       sensor count (grid: ignored in favour of rows*cols)
 * @param seed    placement seed, used by random_geometric only
 * @param rows    grid rows (grid only)
 * @param cols    grid cols (grid only)
 * @param radius  connection radius (random_geometric only)
 */
inline Topology build_topology(GraphKind kind, int n, std::uint64_t seed = 0,
                               int rows = 0, int cols = 0, double radius = 0.45) {
    std::vector<std::pair<int, int>> edges;
    switch (kind) {
        case GraphKind::complete:
            if (n < 1) throw ValidationError("complete topology needs n >= 1");
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
            return make_topology(n, std::move(edges));
        case GraphKind::ring:
            if (n < 3) throw ValidationError("ring topology needs n >= 3");
            for (int i = 0; i < n; ++i) edges.emplace_back(std::min(i, (i + 1) % n),
                                                           std::max(i, (i + 1) % n));
            return make_topology(n, std::move(edges));
        case GraphKind::star:
            if (n < 2) throw ValidationError("star topology needs n >= 2");
            for (int i = 1; i < n; ++i) edges.emplace_back(0, i);
            return make_topology(n, std::move(edges));
        case GraphKind::path:
            if (n < 2) throw ValidationError("path topology needs n >= 2");
            for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
            return make_topology(n, std::move(edges));
        case GraphKind::grid: {
            if (rows < 1 || cols < 1) throw ValidationError("grid topology needs rows, cols >= 1");
            const int m = rows * cols;
            auto id = [cols](int r, int c) { return r * cols + c; };
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c) {
                    if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
                    if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c));
                }
            return make_topology(m, std::move(edges));
        }
        case GraphKind::random_geometric: {
            if (n < 1) throw ValidationError("random_geometric topology needs n >= 1");
            if (!(radius > 0.0)) throw ValidationError("random_geometric needs radius > 0");
            // Retry with perturbed seeds until the sample is connected.
            for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
                RandomStream rng(seed + attempt, /*stream_id=*/0x9e0);
                std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
                for (int i = 0; i < n; ++i) {
                    x[static_cast<std::size_t>(i)] = rng.uniform01();
                    y[static_cast<std::size_t>(i)] = rng.uniform01();
                }
                edges.clear();
                for (int i = 0; i < n; ++i)
                    for (int j = i + 1; j < n; ++j) {
                        const double dx = x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)];
                        const double dy = y[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(j)];
                        if (dx * dx + dy * dy <= radius * radius) edges.emplace_back(i, j);
                    }
                try {
                    return make_topology(n, edges);
                } catch (const ValidationError&) {
                    // disconnected sample; try the next perturbed seed
                }
            }
            throw ValidationError(
                "random_geometric: no connected sample in 100 attempts; increase radius");
        }
    }
    throw ValidationError("unknown graph kind");
}

/// l-th power of the weight matrix by binary exponentiation (l >= 0).
inline Eigen::MatrixXd weight_power(const Topology& topo, int l) {
    if (l < 0) throw ValidationError("weight_power requires l >= 0");
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(topo.n, topo.n);
    Eigen::MatrixXd base = topo.weights;
    int e = l;
    while (e > 0) {
        if (e & 1) result = result * base;
        base = base * base;
        e >>= 1;
    }
    return result;
}

}  // namespace arxnet

#endif  // ARXNET_GRAPH_HPP
