#pragma once

// Simple undirected graphs, edge-weighted instances, lattice generators,
// XOR-game instances, colorings and file I/O.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "core.hpp"

namespace rankgroth {

struct Edge {
    std::size_t u = 0;
    std::size_t v = 0;
    friend bool operator==(const Edge&, const Edge&) = default;
};

class Graph {
public:
    Graph() = default;
    explicit Graph(std::size_t n) : n_(n), adj_(n) {}

    std::size_t num_vertices() const { return n_; }
    std::size_t num_edges() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<std::size_t>& neighbors(std::size_t u) const { return adj_.at(u); }

    /// Stores {u, v} with u < v; returns the edge index.
    std::size_t add_edge(std::size_t u, std::size_t v) {
        if (u >= n_ || v >= n_) throw std::invalid_argument("Graph: vertex index out of range");
        if (u == v) throw std::invalid_argument("Graph: loops are not allowed");
        if (u > v) std::swap(u, v);
        if (!index_.insert({u, v}).second) throw std::invalid_argument("Graph: duplicate edge");
        edges_.push_back({u, v});
        adj_[u].push_back(v);
        adj_[v].push_back(u);
        return edges_.size() - 1;
    }

    bool has_edge(std::size_t u, std::size_t v) const {
        if (u > v) std::swap(u, v);
        return index_.count({u, v}) > 0;
    }

    Matrix adjacency() const {
        Matrix a = Matrix::Zero(n_, n_);
        for (const auto& e : edges_) a(e.u, e.v) = a(e.v, e.u) = 1.0;
        return a;
    }

private:
    std::size_t n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> adj_;
    std::set<std::pair<std::size_t, std::size_t>> index_;
};

inline Graph complete_graph(std::size_t n) {
    Graph g(n);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v) g.add_edge(u, v);
    return g;
}

inline Graph cycle_graph(std::size_t n) {
    detail::require(n >= 3, "cycle_graph: need n >= 3");
    Graph g(n);
    for (std::size_t u = 0; u < n; ++u) g.add_edge(u, (u + 1) % n);
    return g;
}

/// One weight per edge of `graph`, in edge order. The objective is
/// sum_E A(u,v) f(u).f(v) = (1/2) <A~, X> with A~ the dense symmetric matrix.
struct WeightedInstance {
    Graph graph;
    std::vector<double> weights;

    WeightedInstance() = default;
    WeightedInstance(Graph g, std::vector<double> w) : graph(std::move(g)), weights(std::move(w)) {
        if (weights.size() != graph.num_edges())
            throw std::invalid_argument("WeightedInstance: one weight per edge required");
        for (double x : weights)
            if (!std::isfinite(x)) throw std::invalid_argument("WeightedInstance: non-finite weight");
    }

    std::size_t num_vertices() const { return graph.num_vertices(); }

    Matrix dense() const {
        const auto n = graph.num_vertices();
        Matrix a = Matrix::Zero(n, n);
        for (std::size_t i = 0; i < weights.size(); ++i) {
            const auto& e = graph.edges()[i];
            a(e.u, e.v) = a(e.v, e.u) = weights[i];
        }
        return a;
    }

    double abs_weight_sum() const {
        double s = 0.0;
        for (double w : weights) s += std::abs(w);
        return s;
    }
};

inline WeightedInstance uniform_instance(const Graph& g, double w) {
    return WeightedInstance(g, std::vector<double>(g.num_edges(), w));
}

/// Box in Z^d with nearest-neighbour edges; vertex id is the row-major index.
inline Graph lattice_graph(const std::vector<std::size_t>& dims) {
    detail::require(!dims.empty(), "lattice_graph: empty dimension list");
    std::size_t n = 1;
    for (auto e : dims) {
        detail::require(e >= 1, "lattice_graph: every extent must be >= 1");
        n *= e;
    }
    Graph g(n);
    std::vector<std::size_t> stride(dims.size(), 1);
    for (std::size_t i = dims.size() - 1; i-- > 0;) stride[i] = stride[i + 1] * dims[i + 1];
    for (std::size_t v = 0; v < n; ++v)
        for (std::size_t axis = 0; axis < dims.size(); ++axis) {
            const std::size_t coord = (v / stride[axis]) % dims[axis];
            if (coord + 1 < dims[axis]) g.add_edge(v, v + stride[axis]);
        }
    return g;
}

struct BipartiteCheck {
    bool bipartite = true;
    std::vector<int> side;                // 0/1 per vertex when bipartite
    std::vector<std::size_t> odd_cycle;  // closed walk witness otherwise
};

inline BipartiteCheck is_bipartite(const Graph& g) {
    const auto n = g.num_vertices();
    BipartiteCheck out;
    out.side.assign(n, -1);
    std::vector<std::size_t> parent(n, n);
    for (std::size_t s = 0; s < n; ++s) {
        if (out.side[s] != -1) continue;
        out.side[s] = 0;
        std::queue<std::size_t> queue;
        queue.push(s);
        while (!queue.empty()) {
            const auto u = queue.front();
            queue.pop();
            for (auto v : g.neighbors(u)) {
                if (out.side[v] == -1) {
                    out.side[v] = 1 - out.side[u];
                    parent[v] = u;
                    queue.push(v);
                } else if (out.side[v] == out.side[u]) {
                    // Paths to the BFS root meet at the lowest common ancestor.
                    std::vector<std::size_t> pu{u}, pv{v};
                    while (parent[pu.back()] != n) pu.push_back(parent[pu.back()]);
                    while (parent[pv.back()] != n) pv.push_back(parent[pv.back()]);
                    while (pu.size() > 1 && pv.size() > 1 && pu[pu.size() - 2] == pv[pv.size() - 2]) {
                        pu.pop_back();
                        pv.pop_back();
                    }
                    out.bipartite = false;
                    out.odd_cycle = pu;
                    for (std::size_t i = pv.size() - 1; i-- > 0;) out.odd_cycle.push_back(pv[i]);
                    out.side.clear();
                    return out;
                }
            }
        }
    }
    return out;
}

/// Greedy coloring in smallest-last (degeneracy) order; colors are 0-based.
inline std::vector<int> greedy_coloring(const Graph& g) {
    const auto n = g.num_vertices();
    std::vector<std::size_t> degree(n);
    std::vector<bool> removed(n, false);
    for (std::size_t u = 0; u < n; ++u) degree[u] = g.neighbors(u).size();
    std::vector<std::size_t> order;
    order.reserve(n);
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t best = n;
        for (std::size_t u = 0; u < n; ++u)
            if (!removed[u] && (best == n || degree[u] < degree[best])) best = u;
        removed[best] = true;
        order.push_back(best);
        for (auto v : g.neighbors(best))
            if (!removed[v]) --degree[v];
    }
    std::reverse(order.begin(), order.end());
    std::vector<int> color(n, -1);
    for (auto u : order) {
        std::vector<bool> used(n + 1, false);
        for (auto v : g.neighbors(u))
            if (color[v] >= 0) used[color[v]] = true;
        int c = 0;
        while (used[c]) ++c;
        color[u] = c;
    }
    return color;
}

inline int color_count(const std::vector<int>& colors) {
    return colors.empty() ? 0 : *std::max_element(colors.begin(), colors.end()) + 1;
}

inline bool is_proper_coloring(const Graph& g, const std::vector<int>& colors) {
    if (colors.size() != g.num_vertices()) return false;
    for (const auto& e : g.edges())
        if (colors[e.u] == colors[e.v]) return false;
    return true;
}

inline int greedy_chromatic_upper_bound(const Graph& g) { return color_count(greedy_coloring(g)); }

/// Proper coloring with at most k colors by DSatur backtracking. Throws
/// std::invalid_argument if the search proves none exists and numerical_error
/// if it gives up after `node_budget` search nodes.
inline std::vector<int> find_coloring(const Graph& g, int k, std::size_t node_budget = 2'000'000) {
    detail::require(k >= 1, "find_coloring: k must be >= 1");
    const auto n = g.num_vertices();
    {
        auto greedy = greedy_coloring(g);
        if (color_count(greedy) <= k) return greedy;
    }
    if (k == 2) {
        auto check = is_bipartite(g);
        if (!check.bipartite) throw std::invalid_argument("find_coloring: graph is not 2-colorable");
        return check.side;
    }
    std::vector<int> color(n, -1);
    std::size_t nodes = 0;
    bool exhausted = false;

    auto pick = [&]() {
        std::size_t best = n;
        int best_sat = -1, best_deg = -1;
        for (std::size_t u = 0; u < n; ++u) {
            if (color[u] >= 0) continue;
            std::vector<bool> seen(k, false);
            int sat = 0, deg = 0;
            for (auto v : g.neighbors(u)) {
                if (color[v] >= 0 && !seen[color[v]]) {
                    seen[color[v]] = true;
                    ++sat;
                }
                if (color[v] < 0) ++deg;
            }
            if (sat > best_sat || (sat == best_sat && deg > best_deg)) {
                best = u;
                best_sat = sat;
                best_deg = deg;
            }
        }
        return best;
    };

    auto solve = [&](auto&& self, std::size_t colored, int used) -> bool {
        if (colored == n) return true;
        if (++nodes > node_budget) {
            exhausted = true;
            return false;
        }
        const auto u = pick();
        // Only one fresh color needs to be tried (color symmetry).
        for (int c = 0; c < std::min(k, used + 1); ++c) {
            bool ok = true;
            for (auto v : g.neighbors(u))
                if (color[v] == c) {
                    ok = false;
                    break;
                }
            if (!ok) continue;
            color[u] = c;
            if (self(self, colored + 1, std::max(used, c + 1))) return true;
            color[u] = -1;
            if (exhausted) return false;
        }
        return false;
    };
    if (solve(solve, 0, 0)) return color;
    if (exhausted) throw numerical_error("find_coloring: search budget exhausted");
    throw std::invalid_argument("find_coloring: no proper coloring with " + std::to_string(k) + " colors");
}

/// A maximal clique grown greedily from every start vertex; returns the largest.
inline std::vector<std::size_t> greedy_clique(const Graph& g) {
    std::vector<std::size_t> best;
    for (std::size_t s = 0; s < g.num_vertices(); ++s) {
        std::vector<std::size_t> clique{s};
        auto candidates = g.neighbors(s);
        std::sort(candidates.begin(), candidates.end(),
                  [&](auto a, auto b) { return g.neighbors(a).size() > g.neighbors(b).size(); });
        for (auto c : candidates) {
            bool ok = true;
            for (auto m : clique)
                if (!g.has_edge(c, m)) {
                    ok = false;
                    break;
                }
            if (ok) clique.push_back(c);
        }
        if (clique.size() > best.size()) best = clique;
    }
    return best;
}

struct XorGame {
    std::size_t s = 0;
    std::size_t t = 0;
    Matrix pi;                       // s x t, nonnegative, sums to 1
    std::vector<std::vector<int>> g;  // s x t, entries in {0, 1}

    void validate() const {
        detail::require(s >= 1 && t >= 1, "XorGame: question sets must be nonempty");
        detail::require(static_cast<std::size_t>(pi.rows()) == s && static_cast<std::size_t>(pi.cols()) == t,
                        "XorGame: pi has wrong shape");
        detail::require(g.size() == s, "XorGame: g has wrong shape");
        for (const auto& row : g) {
            detail::require(row.size() == t, "XorGame: g has wrong shape");
            for (int x : row) detail::require(x == 0 || x == 1, "XorGame: g entries must be 0 or 1");
        }
        detail::require((pi.array() >= 0.0).all(), "XorGame: pi must be nonnegative");
        detail::require(std::abs(pi.sum() - 1.0) <= 1e-12, "XorGame: pi must sum to 1");
    }
};

/// Complete bipartite instance: Alice's questions are vertices 0..s-1, Bob's
/// are s..s+t-1, and edge {u, s+v} carries (-1)^g(u,v) pi(u,v). Winning
/// probability of a strategy is then (1 + objective)/2.
inline WeightedInstance xor_game_instance(const XorGame& game) {
    game.validate();
    Graph graph(game.s + game.t);
    std::vector<double> w;
    for (std::size_t u = 0; u < game.s; ++u)
        for (std::size_t v = 0; v < game.t; ++v) {
            graph.add_edge(u, game.s + v);
            w.push_back((game.g[u][v] ? -1.0 : 1.0) * game.pi(u, v));
        }
    return WeightedInstance(std::move(graph), std::move(w));
}

inline XorGame chsh_game() {
    XorGame game;
    game.s = game.t = 2;
    game.pi = Matrix::Constant(2, 2, 0.25);
    game.g = {{0, 0}, {0, 1}};
    return game;
}

// ---- serialization -------------------------------------------------------

inline nlohmann::json to_json(const WeightedInstance& inst) {
    nlohmann::json edges = nlohmann::json::array();
    for (std::size_t i = 0; i < inst.weights.size(); ++i) {
        const auto& e = inst.graph.edges()[i];
        edges.push_back({e.u, e.v, inst.weights[i]});
    }
    return {{"n", inst.num_vertices()}, {"edges", edges}};
}

inline WeightedInstance instance_from_json(const nlohmann::json& j) {
    try {
        Graph g(j.at("n").get<std::size_t>());
        std::vector<double> w;
        for (const auto& e : j.at("edges")) {
            if (!e.is_array() || e.size() != 3) throw std::invalid_argument("instance JSON: edges must be [u, v, w]");
            g.add_edge(e[0].get<std::size_t>(), e[1].get<std::size_t>());
            w.push_back(e[2].get<double>());
        }
        return WeightedInstance(std::move(g), std::move(w));
    } catch (const nlohmann::json::exception& ex) {
        throw std::invalid_argument(std::string("instance JSON: ") + ex.what());
    }
}

inline std::string format_instance(const WeightedInstance& inst) {
    std::ostringstream os;
    os.precision(17);
    os << inst.num_vertices() << ' ' << inst.graph.num_edges() << '\n';
    for (std::size_t i = 0; i < inst.weights.size(); ++i) {
        const auto& e = inst.graph.edges()[i];
        os << e.u << ' ' << e.v << ' ' << inst.weights[i] << '\n';
    }
    return os.str();
}

/// Edge-list text: "n m" then m lines "u v w". Blank lines and '#' comments
/// are skipped.
inline WeightedInstance parse_instance(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    auto next_line = [&](std::istringstream& ls) {
        while (std::getline(in, line)) {
            ++lineno;
            const auto pos = line.find_first_not_of(" \t\r");
            if (pos == std::string::npos || line[pos] == '#') continue;
            ls.clear();
            ls.str(line);
            return true;
        }
        return false;
    };
    auto fail = [&](const std::string& what) {
        throw std::invalid_argument("line " + std::to_string(lineno) + ": " + what);
    };
    std::istringstream ls;
    if (!next_line(ls)) throw std::invalid_argument("instance: empty input");
    long long n = -1, m = -1;
    std::string extra;
    if (!(ls >> n >> m) || n < 0 || m < 0 || (ls >> extra)) fail("expected header 'n m'");
    Graph g(static_cast<std::size_t>(n));
    std::vector<double> w;
    for (long long i = 0; i < m; ++i) {
        if (!next_line(ls)) fail("expected " + std::to_string(m) + " edge lines, found " + std::to_string(i));
        long long u = -1, v = -1;
        std::string wtext;
        if (!(ls >> u >> v >> wtext) || (ls >> extra)) fail("expected 'u v w'");
        if (u < 0 || v < 0 || u >= n || v >= n) fail("vertex index out of range");
        if (u == v) fail("loop edge");
        if (g.has_edge(static_cast<std::size_t>(u), static_cast<std::size_t>(v))) fail("duplicate edge");
        double weight = 0.0;
        try {
            std::size_t used = 0;
            weight = std::stod(wtext, &used);
            if (used != wtext.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            fail("malformed weight '" + wtext + "'");
        }
        if (!std::isfinite(weight)) fail("non-finite weight");
        g.add_edge(static_cast<std::size_t>(u), static_cast<std::size_t>(v));
        w.push_back(weight);
    }
    std::istringstream rest;
    if (next_line(rest)) fail("unexpected trailing content");
    return WeightedInstance(std::move(g), std::move(w));
}

inline bool looks_like_json(const std::string& path, std::istream& in) {
    if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) return true;
    in >> std::ws;
    return in.peek() == '{';
}

inline WeightedInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open instance file: " + path);
    if (looks_like_json(path, in)) {
        try {
            return instance_from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::parse_error& ex) {
            throw std::invalid_argument(path + ": " + ex.what());
        }
    }
    try {
        return parse_instance(in);
    } catch (const std::invalid_argument& ex) {
        throw std::invalid_argument(path + ": " + ex.what());
    }
}

/// Graph files use the instance format; weights are ignored.
inline Graph load_graph(const std::string& path) { return load_instance(path).graph; }

inline void save_instance(const WeightedInstance& inst, const std::string& path) {
    const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
    const std::string text = json ? to_json(inst).dump(2) + "\n" : format_instance(inst);
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write instance file: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline XorGame xor_game_from_json(const nlohmann::json& j) {
    try {
        XorGame game;
        const auto& pi = j.at("pi");
        const auto& gm = j.at("g");
        game.s = pi.size();
        game.t = game.s ? pi[0].size() : 0;
        game.pi = Matrix::Zero(game.s, game.t);
        for (std::size_t u = 0; u < game.s; ++u) {
            if (pi[u].size() != game.t) throw std::invalid_argument("XorGame: ragged pi");
            for (std::size_t v = 0; v < game.t; ++v) game.pi(u, v) = pi[u][v].get<double>();
        }
        game.g = gm.get<std::vector<std::vector<int>>>();
        game.validate();
        return game;
    } catch (const nlohmann::json::exception& ex) {
        throw std::invalid_argument(std::string("XOR game JSON: ") + ex.what());
    }
}

inline XorGame load_xor_game(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open game file: " + path);
    try {
        return xor_game_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& ex) {
        throw std::invalid_argument(path + ": " + ex.what());
    }
}

}  // namespace rankgroth
