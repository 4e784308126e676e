// Copyright 2026 The hqc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hqc/circuit.hpp"
#include "hqc/rng.hpp"
#include "hqc/statevector.hpp"

namespace hqc {

struct Edge {
    std::size_t u = 0;
    std::size_t v = 0;
    double weight = 1.0;
    bool operator==(const Edge &) const = default;
};

/// Undirected simple graph with non-negative edge weights.
class Graph {
  public:
    explicit Graph(std::size_t n_nodes = 0) : n_(n_nodes) {
    }

    Graph &add_edge(std::size_t u, std::size_t v, double weight = 1.0) {
        if (u >= n_ || v >= n_) {
            throw std::invalid_argument("edge (" + std::to_string(u) + "," + std::to_string(v) +
                                        ") references a node outside 0.." + std::to_string(n_) + "-1");
        }
        if (u == v) {
            throw std::invalid_argument("self-loop on node " + std::to_string(u));
        }
        if (!(weight >= 0.0) || !std::isfinite(weight)) {
            throw std::invalid_argument("edge weight must be finite and non-negative");
        }
        const auto key = std::minmax(u, v);
        if (!keys_.insert(key).second) {
            throw std::invalid_argument("duplicate edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
        }
        edges_.push_back({u, v, weight});
        return *this;
    }

    std::size_t n_nodes() const {
        return n_;
    }
    const std::vector<Edge> &edges() const {
        return edges_;
    }
    double total_weight() const {
        double s = 0.0;
        for (const Edge &e : edges_) s += e.weight;
        return s;
    }

  private:
    std::size_t n_;
    std::vector<Edge> edges_;
    std::set<std::pair<std::size_t, std::size_t>> keys_;
};

/// Edge-list text: first non-comment line holds n_nodes, then `u v [weight]`
/// per line. Blank lines and `#` comments are skipped.
inline Graph read_graph(std::istream &in) {
    std::string line;
    std::size_t line_no = 0;
    std::optional<Graph> g;
    auto fail = [&](const std::string &msg) {
        throw std::invalid_argument("graph line " + std::to_string(line_no) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream fields(line);
        std::vector<std::string> tok;
        for (std::string t; fields >> t;) tok.push_back(t);
        if (tok.empty()) {
            continue;
        }
        auto to_index = [&](const std::string &s) {
            std::size_t pos = 0;
            unsigned long long v = 0;
            try {
                if (s.empty() || s[0] == '-') throw std::invalid_argument(s);
                v = std::stoull(s, &pos);
            } catch (const std::exception &) {
                fail("expected a non-negative integer, got '" + s + "'");
            }
            if (pos != s.size()) fail("expected a non-negative integer, got '" + s + "'");
            return static_cast<std::size_t>(v);
        };
        if (!g) {
            if (tok.size() != 1) fail("header must hold only n_nodes");
            g.emplace(to_index(tok[0]));
            continue;
        }
        if (tok.size() < 2 || tok.size() > 3) fail("expected `u v [weight]`");
        double w = 1.0;
        if (tok.size() == 3) {
            std::size_t pos = 0;
            try {
                w = std::stod(tok[2], &pos);
            } catch (const std::exception &) {
                fail("bad weight '" + tok[2] + "'");
            }
            if (pos != tok[2].size()) fail("bad weight '" + tok[2] + "'");
        }
        try {
            g->add_edge(to_index(tok[0]), to_index(tok[1]), w);
        } catch (const std::invalid_argument &e) {
            fail(e.what());
        }
    }
    if (!g) {
        throw std::invalid_argument("graph file has no n_nodes header");
    }
    return *g;
}

inline void write_graph(std::ostream &out, const Graph &g) {
    out << g.n_nodes() << '\n';
    std::ostringstream w;
    w.precision(17);
    for (const Edge &e : g.edges()) {
        w.str({});
        w << e.weight;
        out << e.u << ' ' << e.v << ' ' << w.str() << '\n';
    }
}

/// Side bit per node; node i is bit i of a basis index.
struct CutAssignment {
    std::vector<std::uint8_t> side;
    double cut_value = 0.0;
};

inline double cut_value(const Graph &g, const std::vector<std::uint8_t> &side) {
    if (side.size() != g.n_nodes()) {
        throw std::invalid_argument("assignment length does not match the graph");
    }
    double s = 0.0;
    for (const Edge &e : g.edges()) {
        if (side[e.u] != side[e.v]) s += e.weight;
    }
    return s;
}

inline CutAssignment make_assignment(const Graph &g, std::vector<std::uint8_t> side) {
    const double v = cut_value(g, side);
    return {std::move(side), v};
}

/// Bitstring with node 0 as the rightmost character.
inline std::string assignment_bits(const CutAssignment &a) {
    std::string s(a.side.size(), '0');
    for (std::size_t i = 0; i < a.side.size(); ++i) {
        if (a.side[i]) s[a.side.size() - 1 - i] = '1';
    }
    return s;
}

/// H_C = sum_{(u,v,w)} (w/2)(I - Z_u Z_v).
inline PauliSum cost_hamiltonian(const Graph &g) {
    PauliSum h;
    for (const Edge &e : g.edges()) {
        PauliString zz = PauliString::identity(g.n_nodes());
        zz.set_op(e.u, 'Z');
        zz.set_op(e.v, 'Z');
        h.add(e.weight / 2, PauliString::identity(g.n_nodes()));
        h.add(-e.weight / 2, zz);
    }
    return h;
}

struct QaoaParams {
    std::size_t p = 1;
    std::vector<double> gammas;
    std::vector<double> betas;

    std::map<std::string, double> bindings() const {
        std::map<std::string, double> m;
        for (std::size_t j = 0; j < p; ++j) {
            m["gamma_" + std::to_string(j + 1)] = gammas.at(j);
            m["beta_" + std::to_string(j + 1)] = betas.at(j);
        }
        return m;
    }
};

/// |+>^n followed by p layers of exp(-i beta_j H_M) exp(-i gamma_j H_C).
/// exp(-i gamma w/2 (I - ZZ)) equals RZZ(-w gamma) up to a global phase.
inline Circuit qaoa_ansatz(const Graph &g, std::size_t p) {
    if (p < 1) {
        throw std::invalid_argument("QAOA needs at least one layer");
    }
    if (g.n_nodes() == 0) {
        throw std::invalid_argument("QAOA needs at least one node");
    }
    Circuit c(g.n_nodes());
    for (std::size_t q = 0; q < g.n_nodes(); ++q) c.append(gates::h(q));
    for (std::size_t j = 1; j <= p; ++j) {
        const std::string gamma = "gamma_" + std::to_string(j), beta = "beta_" + std::to_string(j);
        for (const Edge &e : g.edges()) c.append(gates::rzz(e.u, e.v, Param(gamma, -e.weight)));
        for (std::size_t q = 0; q < g.n_nodes(); ++q) c.append(gates::rx(q, Param(beta, 2.0)));
    }
    return c;
}

namespace detail {

// Binds only the names the circuit actually uses (an edgeless graph has no gammas).
inline Circuit bind_qaoa(const Circuit &ansatz, const QaoaParams &params) {
    std::map<std::string, double> used;
    const auto all = params.bindings();
    for (const std::string &name : ansatz.params()) used[name] = all.at(name);
    return ansatz.bind(used);
}

// Cut value of every basis index, for fast diagonal expectations.
inline std::vector<double> cut_table(const Graph &g) {
    const std::size_t dim = std::size_t{1} << g.n_nodes();
    std::vector<double> t(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
        for (const Edge &e : g.edges()) {
            if (((i >> e.u) ^ (i >> e.v)) & 1) t[i] += e.weight;
        }
    }
    return t;
}

}  // namespace detail

/// <H_C> at the given parameters.
inline double qaoa_expectation(const Graph &g, const QaoaParams &params) {
    const StateVector s = simulate(detail::bind_qaoa(qaoa_ansatz(g, params.p), params));
    return expectation(s, cost_hamiltonian(g));
}

struct OptimizerConfig {
    std::size_t restarts = 5;
    std::size_t max_iterations = 500;
    double initial_step = 0.3;
    double ftol = 1e-12;
    double xtol = 1e-9;
    // Points per axis of the p=1 starting grid; 0 disables it.
    std::size_t grid = 24;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t evaluations = 0;
};

/// Nelder-Mead minimization with the standard coefficients (1, 2, 1/2, 1/2).
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double> &)> &f,
                                    std::vector<double> x0, double step, std::size_t max_iterations, double ftol,
                                    double xtol) {
    const std::size_t dim = x0.size();
    NelderMeadResult r;
    std::vector<std::vector<double>> simplex(dim + 1, x0);
    std::vector<double> fv(dim + 1);
    for (std::size_t i = 0; i < dim; ++i) simplex[i + 1][i] += step;
    for (std::size_t i = 0; i <= dim; ++i) fv[i] = f(simplex[i]);
    r.evaluations = dim + 1;
    auto eval = [&](const std::vector<double> &x) {
        ++r.evaluations;
        return f(x);
    };
    auto combine = [&](const std::vector<double> &a, const std::vector<double> &b, double t) {
        std::vector<double> out(dim);
        for (std::size_t k = 0; k < dim; ++k) out[k] = a[k] + t * (b[k] - a[k]);
        return out;
    };
    std::vector<std::size_t> order(dim + 1);
    for (std::size_t it = 0; it < max_iterations; ++it) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[dim - 1];
        double size = 0.0;
        for (std::size_t i = 0; i <= dim; ++i) {
            for (std::size_t k = 0; k < dim; ++k) size = std::max(size, std::abs(simplex[i][k] - simplex[best][k]));
        }
        if (fv[worst] - fv[best] <= ftol && size <= xtol) {
            break;
        }
        std::vector<double> centroid(dim, 0.0);
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == worst) continue;
            for (std::size_t k = 0; k < dim; ++k) centroid[k] += simplex[i][k] / static_cast<double>(dim);
        }
        const std::vector<double> xr = combine(centroid, simplex[worst], -1.0);
        const double fr = eval(xr);
        if (fr < fv[best]) {
            const std::vector<double> xe = combine(centroid, simplex[worst], -2.0);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[worst] = xe;
                fv[worst] = fe;
            } else {
                simplex[worst] = xr;
                fv[worst] = fr;
            }
            continue;
        }
        if (fr < fv[second]) {
            simplex[worst] = xr;
            fv[worst] = fr;
            continue;
        }
        const bool outside = fr < fv[worst];
        const std::vector<double> xc = combine(centroid, outside ? xr : simplex[worst], 0.5);
        const double fc = eval(xc);
        if (fc < (outside ? fr : fv[worst])) {
            simplex[worst] = xc;
            fv[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == best) continue;
            simplex[i] = combine(simplex[best], simplex[i], 0.5);
            fv[i] = eval(simplex[i]);
        }
    }
    const std::size_t best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    r.x = simplex[best];
    r.value = fv[best];
    return r;
}

struct QaoaSolution {
    QaoaParams params;
    double expected_cut = 0.0;
    std::size_t evaluations = 0;
};

/// Multi-start Nelder-Mead over (gammas, betas). Starts: all zeros, the best
/// point of a coarse grid when p = 1, then `restarts` seeded random points.
inline QaoaSolution optimize_qaoa(const Graph &g, std::size_t p, const OptimizerConfig &config, std::uint64_t seed) {
    if (g.n_nodes() > kMaxStatevectorQubits) {
        throw std::invalid_argument("graph with " + std::to_string(g.n_nodes()) +
                                    " nodes exceeds the simulator cap of " + std::to_string(kMaxStatevectorQubits));
    }
    const Circuit ansatz = qaoa_ansatz(g, p);
    const std::vector<double> table = detail::cut_table(g);
    auto unpack = [p](const std::vector<double> &x) {
        QaoaParams q;
        q.p = p;
        q.gammas.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(p));
        q.betas.assign(x.begin() + static_cast<std::ptrdiff_t>(p), x.end());
        return q;
    };
    std::size_t evaluations = 0;
    auto value = [&](const std::vector<double> &x) {
        ++evaluations;
        const StateVector s = simulate(detail::bind_qaoa(ansatz, unpack(x)));
        double v = 0.0;
        for (std::size_t i = 0; i < table.size(); ++i) v += std::norm(s[i]) * table[i];
        return v;
    };

    std::vector<std::vector<double>> starts;
    starts.emplace_back(2 * p, 0.0);
    if (p == 1 && config.grid > 0) {
        std::vector<double> best{0.0, 0.0};
        double best_v = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < config.grid; ++a) {
            for (std::size_t b = 0; b < config.grid; ++b) {
                const std::vector<double> x{2 * std::numbers::pi * (a + 0.5) / config.grid,
                                            (std::numbers::pi / 2) * (b + 0.5) / config.grid};
                const double v = value(x);
                if (v > best_v) {
                    best_v = v;
                    best = x;
                }
            }
        }
        starts.push_back(best);
    }
    Rng rng(seed);
    for (std::size_t r = 0; r < config.restarts; ++r) {
        std::vector<double> x(2 * p);
        for (std::size_t j = 0; j < p; ++j) x[j] = rng.uniform(0.0, 2 * std::numbers::pi);
        for (std::size_t j = 0; j < p; ++j) x[p + j] = rng.uniform(0.0, std::numbers::pi / 2);
        starts.push_back(std::move(x));
    }

    QaoaSolution best;
    best.expected_cut = -std::numeric_limits<double>::infinity();
    for (const auto &x0 : starts) {
        // The start itself stays a candidate, so the all-zero point bounds the result below.
        const double v0 = value(x0);
        if (v0 > best.expected_cut) {
            best.expected_cut = v0;
            best.params = unpack(x0);
        }
        const NelderMeadResult r = nelder_mead([&](const std::vector<double> &x) { return -value(x); }, x0,
                                               config.initial_step, config.max_iterations, config.ftol, config.xtol);
        if (-r.value > best.expected_cut) {
            best.expected_cut = -r.value;
            best.params = unpack(r.x);
        }
    }
    best.evaluations = evaluations;
    return best;
}

/// Best-scoring bitstring among `shots` samples of the QAOA state.
inline CutAssignment sample_assignment(const Graph &g, const QaoaParams &params, std::uint64_t shots,
                                       std::uint64_t seed) {
    const StateVector s = simulate(detail::bind_qaoa(qaoa_ansatz(g, params.p), params));
    const Counts counts = sample(s, shots, seed);
    CutAssignment best;
    best.cut_value = -1.0;
    for (const auto &[bits, count] : counts) {
        std::vector<std::uint8_t> side(g.n_nodes());
        for (std::size_t i = 0; i < side.size(); ++i) side[i] = bits[bits.size() - 1 - i] == '1';
        const double v = cut_value(g, side);
        if (v > best.cut_value) {
            best = {std::move(side), v};
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Divide and conquer.

struct Partition {
    std::vector<std::vector<std::size_t>> communities;
    std::vector<Edge> inter_edges;
};

/// Greedy agglomeration: repeatedly merges the connected pair of communities
/// with the largest modularity gain whose union fits `max_community_size`.
/// Communities are listed by smallest member; members are sorted.
inline Partition partition_graph(const Graph &g, std::size_t max_community_size) {
    if (max_community_size < 2) {
        throw std::invalid_argument("community size cap must be at least 2");
    }
    const std::size_t n = g.n_nodes();
    const double m = g.total_weight();
    std::vector<std::vector<std::size_t>> comm(n);
    std::vector<double> degree(n, 0.0);
    // Neighbouring communities and the edge weight between them; zero-weight
    // edges still count as links.
    std::vector<std::map<std::size_t, double>> nbr(n);
    for (std::size_t i = 0; i < n; ++i) comm[i] = {i};
    for (const Edge &e : g.edges()) {
        nbr[e.u][e.v] += e.weight;
        nbr[e.v][e.u] += e.weight;
        degree[e.u] += e.weight;
        degree[e.v] += e.weight;
    }
    std::vector<bool> alive(n, true);
    while (true) {
        std::optional<std::pair<std::size_t, std::size_t>> best;
        double best_gain = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < n; ++a) {
            for (const auto &[b, w] : nbr[a]) {
                if (b < a || comm[a].size() + comm[b].size() > max_community_size) continue;
                const double gain = m > 0.0 ? w / m - degree[a] * degree[b] / (2 * m * m) : 0.0;
                if (gain > best_gain + 1e-15) {
                    best_gain = gain;
                    best = {a, b};
                }
            }
        }
        if (!best) break;
        const auto [a, b] = *best;  // b folds into a
        comm[a].insert(comm[a].end(), comm[b].begin(), comm[b].end());
        comm[b].clear();
        alive[b] = false;
        degree[a] += degree[b];
        for (const auto &[c, w] : nbr[b]) {
            nbr[c].erase(b);
            if (c == a) continue;
            nbr[a][c] += w;
            nbr[c][a] += w;
        }
        nbr[b].clear();
    }
    Partition p;
    std::vector<std::size_t> label(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!alive[i]) continue;
        std::sort(comm[i].begin(), comm[i].end());
        for (std::size_t v : comm[i]) label[v] = p.communities.size();
        p.communities.push_back(comm[i]);
    }
    for (const Edge &e : g.edges()) {
        if (label[e.u] != label[e.v]) p.inter_edges.push_back(e);
    }
    return p;
}

enum class MergeMode { Auto, Brute, Local };

inline constexpr std::size_t kBruteMergeLimit = 20;

struct QaoaSquaredResult {
    CutAssignment assignment;
    Partition partition;
    std::vector<int> signs;
    // Cut value with every community sign +1.
    double unsigned_cut = 0.0;
};

namespace detail {

// Maximizes -sum_{k<l} s_k s_l A_kl over signs with s_0 = +1.
inline std::vector<int> best_signs(const std::vector<std::vector<double>> &a, MergeMode mode) {
    const std::size_t k = a.size();
    auto score = [&](const std::vector<int> &s) {
        double v = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = i + 1; j < k; ++j) v -= s[i] * s[j] * a[i][j];
        }
        return v;
    };
    std::vector<int> best(k, 1);
    if (k <= 1) return best;
    const bool brute = mode == MergeMode::Brute || (mode == MergeMode::Auto && k <= kBruteMergeLimit);
    if (brute) {
        if (k > kBruteMergeLimit) {
            throw std::invalid_argument("brute-force merge supports at most " + std::to_string(kBruteMergeLimit) +
                                        " communities");
        }
        double best_v = score(best);
        std::vector<int> s(k, 1);
        for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << (k - 1)); ++mask) {
            for (std::size_t i = 1; i < k; ++i) s[i] = (mask >> (i - 1)) & 1 ? -1 : 1;
            const double v = score(s);
            if (v > best_v + 1e-12) {
                best_v = v;
                best = s;
            }
        }
        return best;
    }
    // Single-flip local search from all +1.
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t i = 0; i < k; ++i) {
            double delta = 0.0;  // change in score when s_i flips
            for (std::size_t j = 0; j < k; ++j) {
                if (j != i) delta += 2.0 * best[i] * best[j] * a[std::min(i, j)][std::max(i, j)];
            }
            if (delta > 1e-12) {
                best[i] = -best[i];
                improved = true;
            }
        }
    }
    if (best[0] < 0) {
        for (int &s : best) s = -s;
    }
    return best;
}

}  // namespace detail

/// Partitions, solves each community with QAOA on its internal edges (in
/// parallel), then picks a sign per community to maximize the total cut.
inline QaoaSquaredResult qaoa_squared(const Graph &g, std::size_t cap, std::size_t p, MergeMode mode,
                                      std::uint64_t seed, const OptimizerConfig &config = {},
                                      std::uint64_t shots = 1024) {
    if (cap > kMaxStatevectorQubits) {
        throw std::invalid_argument("community cap exceeds the simulator qubit cap");
    }
    QaoaSquaredResult out;
    out.partition = partition_graph(g, cap);
    const auto &comms = out.partition.communities;
    std::vector<std::size_t> label(g.n_nodes()), local(g.n_nodes());
    for (std::size_t k = 0; k < comms.size(); ++k) {
        for (std::size_t i = 0; i < comms[k].size(); ++i) {
            label[comms[k][i]] = k;
            local[comms[k][i]] = i;
        }
    }
    std::vector<Graph> sub;
    for (const auto &c : comms) sub.emplace_back(c.size());
    for (const Edge &e : g.edges()) {
        if (label[e.u] == label[e.v]) sub[label[e.u]].add_edge(local[e.u], local[e.v], e.weight);
    }
    std::vector<std::future<CutAssignment>> tasks;
    for (std::size_t k = 0; k < comms.size(); ++k) {
        tasks.push_back(std::async(std::launch::async, [&, k] {
            const Graph &h = sub[k];
            if (h.edges().empty()) {
                return make_assignment(h, std::vector<std::uint8_t>(h.n_nodes(), 0));
            }
            const QaoaSolution sol = optimize_qaoa(h, p, config, derive_seed(seed, 2 * k));
            return sample_assignment(h, sol.params, shots, derive_seed(seed, 2 * k + 1));
        }));
    }
    std::vector<std::uint8_t> side(g.n_nodes());
    for (std::size_t k = 0; k < comms.size(); ++k) {
        const CutAssignment a = tasks[k].get();
        for (std::size_t i = 0; i < comms[k].size(); ++i) side[comms[k][i]] = a.side[i];
    }
    out.unsigned_cut = cut_value(g, side);

    // A_kl sums +w over inter edges whose endpoints agree and -w where they differ.
    std::vector<std::vector<double>> a(comms.size(), std::vector<double>(comms.size(), 0.0));
    for (const Edge &e : out.partition.inter_edges) {
        const std::size_t x = std::min(label[e.u], label[e.v]), y = std::max(label[e.u], label[e.v]);
        a[x][y] += side[e.u] == side[e.v] ? e.weight : -e.weight;
    }
    out.signs = detail::best_signs(a, mode);
    for (std::size_t v = 0; v < g.n_nodes(); ++v) {
        if (out.signs[label[v]] < 0) side[v] ^= 1;
    }
    out.assignment = make_assignment(g, std::move(side));
    return out;
}

// ---------------------------------------------------------------------------
// Classical baselines.

/// Node-order greedy placement followed by single-flip hill climbing.
inline CutAssignment baseline_greedy(const Graph &g) {
    const std::size_t n = g.n_nodes();
    std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
    for (const Edge &e : g.edges()) {
        adj[e.u].push_back({e.v, e.weight});
        adj[e.v].push_back({e.u, e.weight});
    }
    std::vector<std::uint8_t> side(n, 0);
    for (std::size_t v = 0; v < n; ++v) {
        double gain[2] = {0.0, 0.0};
        for (const auto &[u, w] : adj[v]) {
            if (u < v) gain[side[u] ^ 1] += w;
        }
        side[v] = gain[1] > gain[0] ? 1 : 0;
    }
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t v = 0; v < n; ++v) {
            double delta = 0.0;
            for (const auto &[u, w] : adj[v]) delta += side[u] == side[v] ? w : -w;
            if (delta > 1e-12) {
                side[v] ^= 1;
                improved = true;
            }
        }
    }
    return make_assignment(g, std::move(side));
}

/// Best of `trials` uniform assignments; enumerates every assignment when
/// trials >= 2^n.
inline CutAssignment baseline_random(const Graph &g, std::uint64_t trials, std::uint64_t seed) {
    const std::size_t n = g.n_nodes();
    CutAssignment best = make_assignment(g, std::vector<std::uint8_t>(n, 0));
    auto consider = [&](std::vector<std::uint8_t> side) {
        const double v = cut_value(g, side);
        if (v > best.cut_value) best = {std::move(side), v};
    };
    if (n < 63 && trials >= (std::uint64_t{1} << n)) {
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
            std::vector<std::uint8_t> side(n);
            for (std::size_t i = 0; i < n; ++i) side[i] = (mask >> i) & 1;
            consider(std::move(side));
        }
        return best;
    }
    Rng rng(seed);
    bool first = true;
    for (std::uint64_t t = 0; t < trials; ++t) {
        std::vector<std::uint8_t> side(n);
        for (std::size_t i = 0; i < n; ++i) side[i] = static_cast<std::uint8_t>(rng.below(2));
        if (first) {
            best = make_assignment(g, side);
            first = false;
        }
        consider(std::move(side));
    }
    return best;
}

// ---------------------------------------------------------------------------
// Reporting.

inline nlohmann::json maxcut_json(const CutAssignment &a, const std::string &method,
                                  const std::optional<QaoaParams> &params = std::nullopt) {
    nlohmann::json doc;
    doc["assignment"] = assignment_bits(a);
    doc["cut"] = a.cut_value;
    doc["method"] = method;
    if (params) {
        doc["params"] = {{"p", params->p}, {"gammas", params->gammas}, {"betas", params->betas}};
    } else {
        doc["params"] = nullptr;
    }
    return doc;
}

inline void write_maxcut_csv_header(std::ostream &out) {
    out << "method,n_nodes,n_edges,cut,seed\n";
}

inline void write_maxcut_csv_row(std::ostream &out, const Graph &g, const std::string &method,
                                 const CutAssignment &a, std::uint64_t seed) {
    std::ostringstream row;
    row.precision(17);
    row << method << ',' << g.n_nodes() << ',' << g.edges().size() << ',' << a.cut_value << ',' << seed;
    out << row.str() << '\n';
}

}  // namespace hqc
