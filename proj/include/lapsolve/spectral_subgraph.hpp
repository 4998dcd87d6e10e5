#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "lapsolve/config.hpp"
#include "lapsolve/decompose.hpp"
#include "lapsolve/graph.hpp"
#include "lapsolve/path_sparsify.hpp"
#include "lapsolve/resistance.hpp"
#include "lapsolve/rng.hpp"

namespace lapsolve {

struct AkpwParams {
    double k = 0, p = 0;
    double beta = 0, sigma = 0, delta = 0;
    bool overridden = false;
    double beta_delta_p() const { return beta * std::pow(delta, p); }
    bool converges() const { return beta_delta_p() < 1; }

    // beta = (49 ln^2 k)^(-p/(1-p)), sigma = ceil(log_{1/beta} k),
    // delta = 48 sigma ln(k) / beta; any of the three may be overridden.
    static AkpwParams make(double k, double p, double beta_override = 0, double delta_override = 0,
                           double sigma_override = 0) {
        if (!(k > 1)) throw std::invalid_argument("akpw: k must exceed 1");
        if (!(p > 0 && p < 1)) throw std::invalid_argument("akpw: p must lie in (0,1)");
        AkpwParams a;
        a.k = k;
        a.p = p;
        const double lk = std::log(k);
        a.beta = beta_override > 0 ? beta_override : std::pow(49 * lk * lk, -p / (1 - p));
        if (!(a.beta > 0 && a.beta < 1)) throw std::invalid_argument("akpw: beta outside (0,1)");
        a.sigma = sigma_override > 0 ? std::ceil(sigma_override)
                                     : std::max(1.0, std::ceil(lk / std::log(1 / a.beta) - 1e-12));
        a.delta = delta_override > 0 ? delta_override : 48 * a.sigma * lk / a.beta;
        if (!(a.delta > 1)) throw std::invalid_argument("akpw: delta must exceed 1");
        a.overridden = beta_override > 0 || delta_override > 0 || sigma_override > 0;
        if (!a.overridden && !a.converges()) throw std::logic_error("akpw: beta*delta^p >= 1");
        return a;
    }

    static AkpwParams from_config(double k, const SolverConfig& cfg) {
        return make(k, cfg.p, cfg.akpw_beta_override, cfg.akpw_delta_override, cfg.akpw_sigma_override);
    }
};

// l_e = w_max / w_e in [delta^(i-1), delta^i) goes to bucket i-1 (0-based).
inline EdgePartition bucket_edges(const WeightedMultiGraph& g, double delta) {
    if (!(delta > 1)) throw std::invalid_argument("bucket_edges: delta must exceed 1");
    EdgePartition b;
    b.bucket_of.assign(g.num_edges(), 0);
    if (g.num_edges() == 0) return b;
    const double wmax = g.max_weight(), wmin = g.min_weight();
    if (!(wmin > 0)) throw std::invalid_argument("bucket_edges: weights must be positive");
    const double n = std::max(2, g.num_vertices());
    if (wmax / wmin > std::pow(n, 12.0)) throw std::invalid_argument("bucket_edges: weight ratio not polynomially bounded");
    const double ld = std::log(delta);
    for (int e = 0; e < g.num_edges(); ++e) {
        double l = wmax / g.edge(e).w;
        int i = static_cast<int>(std::floor(std::log(l) / ld + 1e-12));
        // guard the floating boundary against the exact power test
        if (i > 0 && std::pow(delta, i) > l * (1 + 1e-12)) --i;
        if (std::pow(delta, i + 1) <= l) ++i;
        b.bucket_of[e] = i;
        b.num_buckets = std::max(b.num_buckets, i + 1);
    }
    return b;
}

// Returns kept edge ids of an unweighted multigraph.
using PathSparsifyFn = std::function<std::vector<int>(const WeightedMultiGraph&, const SeedSplitter&)>;

inline PathSparsifyFn default_path_sparsifier(const SolverConfig& cfg) {
    return [cfg](const WeightedMultiGraph& g, const SeedSplitter& seeds) {
        return path_sparsify(g, std::max(1.0, cfg.augment_ps_k), cfg, seeds).F;
    };
}

inline PathSparsifyFn keep_all_path_sparsifier() {
    return [](const WeightedMultiGraph& g, const SeedSplitter&) {
        std::vector<int> all(g.num_edges());
        std::iota(all.begin(), all.end(), 0);
        return all;
    };
}

// tree_of: tree label per vertex of g (labels onto [0, nu)). Returns edge ids
// of g kept by the path sparsifier on the contracted, unweighted graph.
inline std::vector<int> augment_tree(const WeightedMultiGraph& g, const std::vector<int>& tree_of,
                                     const PathSparsifyFn& ps, const SeedSplitter& seeds) {
    if (static_cast<int>(tree_of.size()) != g.num_vertices()) throw std::invalid_argument("augment_tree: label size");
    int nu = 0;
    for (int x : tree_of) {
        if (x < 0) throw std::invalid_argument("augment_tree: forest does not cover V");
        nu = std::max(nu, x + 1);
    }
    if (nu <= 1) return {};
    std::vector<Edge> es;
    std::vector<int> back;
    for (int e = 0; e < g.num_edges(); ++e) {
        int a = tree_of[g.edge(e).u], b = tree_of[g.edge(e).v];
        if (a == b) continue;
        es.push_back({a, b, 1.0});
        back.push_back(e);
    }
    if (es.empty()) return {};
    WeightedMultiGraph contracted(nu, std::move(es));
    std::vector<int> kept;
    for (int e : ps(contracted, seeds)) kept.push_back(back.at(e));
    std::sort(kept.begin(), kept.end());
    return kept;
}

struct SpectralIteration {
    int t = 0;
    int window_lo = 0, window_hi = 0;  // 1-based bucket indices
    long long window_edges = 0;
    int pieces = 0;
    int trees = 0;
    long long settled = 0;
    long long augment_added = 0;
    long long extra_added = 0;
    long long giveup_added = 0;
    double forest_diameter = 0;
    double forest_bound = 0;
    bool forest_ok = true;
    bool decay_ok = true;
};

struct DistortionSubgraph {
    std::vector<int> H;  // edge ids of the input, sorted
    std::vector<double> tau;
    double p = 0;
    double kappa_measured = 0;  // sum tau^p
    AkpwParams params;
    int num_buckets = 0;
    std::vector<SpectralIteration> iterations;
    bool forest_invariant_ok = true;
    bool decay_ok = true;
    long long forest_edges = 0;
    long long augment_edges = 0;
    long long extra_edges = 0;
    long long giveup_edges = 0;
};

namespace detail {

// Resistance diameter of each tree in a forest (path sums of 1/w).
inline double max_forest_resistance_diameter(int n, const std::vector<std::vector<std::pair<int, double>>>& adj) {
    std::vector<double> dist(n, -1);
    std::vector<char> done(n, 0);
    double best = 0;
    std::vector<int> stack, comp;
    auto sweep = [&](int s) {
        int far = s;
        stack.assign(1, s);
        dist[s] = 0;
        comp.clear();
        while (!stack.empty()) {
            int x = stack.back();
            stack.pop_back();
            comp.push_back(x);
            if (dist[x] > dist[far]) far = x;
            for (auto [y, r] : adj[x])
                if (dist[y] < 0) {
                    dist[y] = dist[x] + r;
                    stack.push_back(y);
                }
        }
        return far;
    };
    for (int v = 0; v < n; ++v) {
        if (done[v]) continue;
        int a = sweep(v);
        for (int x : comp) dist[x] = -1;
        int b = sweep(a);
        best = std::max(best, dist[b]);
        for (int x : comp) {
            done[x] = 1;
            dist[x] = -1;
        }
    }
    return best;
}

}  // namespace detail

inline DistortionSubgraph spectral_subgraph(const WeightedMultiGraph& g, const AkpwParams& prm,
                                            const PathSparsifyFn& ps, const SeedSplitter& seeds,
                                            const std::string& tau_mode = "paper") {
    const int n = g.num_vertices();
    const int m = g.num_edges();
    DistortionSubgraph out;
    out.params = prm;
    out.p = prm.p;
    out.tau.assign(m, 1.0);
    if (m == 0) return out;
    const double wmax = g.max_weight();
    const double delta = prm.delta;
    const int sigma = static_cast<int>(prm.sigma);
    const double r = std::floor(delta / 4);
    const double beta_d = prm.beta / 6;
    auto buckets = bucket_edges(g, delta);
    const int L = buckets.num_buckets;
    out.num_buckets = L;
    const long long y_size = static_cast<long long>(std::floor(6.0 * m / (prm.k * prm.k)));

    enum : char { kAlive = 0, kSettled = 1, kForest = 2, kExtra = 3 };
    std::vector<char> status(m, kAlive);
    std::vector<std::vector<int>> alive(L);  // by bucket, ascending id
    for (int e = 0; e < m; ++e) alive[buckets.bucket_of[e]].push_back(e);
    UnionFind uf(n);
    std::vector<std::vector<std::pair<int, double>>> forest_adj(n);

    for (int t = 1; t <= L + sigma; ++t) {
        bool all_empty = true;
        for (const auto& b : alive) all_empty = all_empty && b.empty();
        if (t > L && all_empty) break;
        SpectralIteration it;
        it.t = t;
        it.window_lo = std::max(1, t - sigma);
        it.window_hi = std::min(L, t);
        const int nb = it.window_hi - it.window_lo + 1;
        std::vector<long long> before(std::max(nb, 0), 0);
        if (nb > 0) {
            // contract F's components
            std::vector<int> label(n, -1), comp_of(n);
            int nc = 0;
            for (int v = 0; v < n; ++v) {
                int rt = uf.find(v);
                if (label[rt] < 0) label[rt] = nc++;
                comp_of[v] = label[rt];
            }
            std::vector<Edge> es;
            std::vector<int> orig;
            EdgePartition wb;
            wb.num_buckets = nb;
            for (int j = it.window_lo; j <= it.window_hi; ++j) {
                before[j - it.window_lo] = static_cast<long long>(alive[j - 1].size());
                for (int e : alive[j - 1]) {
                    es.push_back({comp_of[g.edge(e).u], comp_of[g.edge(e).v], 1.0});
                    orig.push_back(e);
                    wb.bucket_of.push_back(j - it.window_lo);
                }
            }
            it.window_edges = static_cast<long long>(es.size());
            if (!es.empty()) {
                WeightedMultiGraph gt(nc, std::move(es));
                auto dec = decompose(gt, wb, beta_d, r);
                it.pieces = static_cast<int>(dec.pieces.size());
                std::vector<int> tree_label(nc, -1);
                for (const auto& piece : dec.pieces) {
                    it.trees += static_cast<int>(piece.trees.size());
                    for (std::size_t ti = 0; ti < piece.trees.size(); ++ti)
                        for (int x : piece.trees[ti].vertices) tree_label[x] = static_cast<int>(ti);
                }
                // group window edges by piece
                std::vector<std::vector<int>> piece_edges(dec.pieces.size());
                for (int le = 0; le < gt.num_edges(); ++le) {
                    int pu = dec.piece_of[gt.edge(le).u], pv = dec.piece_of[gt.edge(le).v];
                    if (pu == pv) piece_edges[pu].push_back(le);
                }
                for (std::size_t pi = 0; pi < dec.pieces.size(); ++pi) {
                    const auto& piece = dec.pieces[pi];
                    if (piece.trees.size() > 1 && !piece_edges[pi].empty()) {
                        std::vector<int> local(nc, -1);
                        for (std::size_t i = 0; i < piece.vertices.size(); ++i)
                            local[piece.vertices[i]] = static_cast<int>(i);
                        std::vector<Edge> pes;
                        for (int le : piece_edges[pi])
                            pes.push_back({local[gt.edge(le).u], local[gt.edge(le).v], 1.0});
                        WeightedMultiGraph gpi(static_cast<int>(piece.vertices.size()), std::move(pes));
                        std::vector<int> tl(piece.vertices.size());
                        for (std::size_t i = 0; i < piece.vertices.size(); ++i) tl[i] = tree_label[piece.vertices[i]];
                        for (int k : augment_tree(gpi, tl, ps, seeds.child("augment", t, pi))) {
                            int e = orig[piece_edges[pi][k]];
                            if (status[e] != kAlive) continue;
                            status[e] = kExtra;
                            ++it.augment_added;
                        }
                    }
                    for (const auto& tree : piece.trees)
                        for (int le : tree.edges) {
                            int e = orig[le];
                            status[e] = kForest;
                            ++out.forest_edges;
                            uf.unite(g.edge(e).u, g.edge(e).v);
                            double res = 1.0 / g.edge(e).w;
                            forest_adj[g.edge(e).u].push_back({g.edge(e).v, res});
                            forest_adj[g.edge(e).v].push_back({g.edge(e).u, res});
                        }
                    for (int le : piece_edges[pi]) {
                        int e = orig[le];
                        if (status[e] == kAlive) {
                            status[e] = kSettled;
                            ++it.settled;
                        }
                        out.tau[e] = 4 * g.edge(e).w / wmax * std::pow(delta, t + 1);
                    }
                }
                out.augment_edges += it.augment_added;
            }
            for (int j = it.window_lo; j <= it.window_hi; ++j) {
                auto& b = alive[j - 1];
                b.erase(std::remove_if(b.begin(), b.end(), [&](int e) { return status[e] != kAlive; }), b.end());
            }
            // extra edges from all but the oldest bucket of the window
            for (int j = std::max(1, t - sigma + 1); j <= it.window_hi; ++j) {
                auto& b = alive[j - 1];
                long long take = std::min<long long>(y_size, static_cast<long long>(b.size()));
                for (long long i = 0; i < take; ++i) status[b[i]] = kExtra;
                b.erase(b.begin(), b.begin() + take);
                it.extra_added += take;
            }
            out.extra_edges += it.extra_added;
            // cut bound per bucket, less the extra edges taken
            const double f = std::exp(-r * beta_d / nb);
            for (int j = it.window_lo; j <= it.window_hi; ++j) {
                if (j == t - sigma) continue;
                double bound = prm.beta * before[j - it.window_lo] +
                               std::max(0.0, prm.beta * it.window_edges * f - static_cast<double>(y_size));
                if (static_cast<double>(alive[j - 1].size()) > bound + 1e-9) it.decay_ok = false;
            }
        }
        if (t - sigma >= 1 && t - sigma <= L) {
            auto& b = alive[t - sigma - 1];
            for (int e : b) status[e] = kExtra;
            it.giveup_added = static_cast<long long>(b.size());
            out.giveup_edges += it.giveup_added;
            b.clear();
        }
        it.forest_diameter = detail::max_forest_resistance_diameter(n, forest_adj);
        it.forest_bound = std::pow(delta, t + 1) / wmax;
        it.forest_ok = it.forest_diameter <= it.forest_bound * (1 + 1e-9);
        out.forest_invariant_ok = out.forest_invariant_ok && it.forest_ok;
        out.decay_ok = out.decay_ok && it.decay_ok;
        out.iterations.push_back(it);
    }
    for (const auto& b : alive)
        for (int e : b) status[e] = kExtra;  // unreachable when the loop ran to L + sigma

    if (tau_mode == "tightened") {
        // tree-path resistance in the final forest is also an overestimate
        std::vector<int> parent(n, -1), depth(n, -1);
        std::vector<double> up(n, 0);
        for (int s = 0; s < n; ++s) {
            if (depth[s] >= 0) continue;
            depth[s] = 0;
            std::vector<int> st{s};
            while (!st.empty()) {
                int x = st.back();
                st.pop_back();
                for (auto [y, res] : forest_adj[x])
                    if (depth[y] < 0) {
                        depth[y] = depth[x] + 1;
                        parent[y] = x;
                        up[y] = up[x] + res;
                        st.push_back(y);
                    }
            }
        }
        for (int e = 0; e < m; ++e) {
            if (status[e] != kSettled) continue;
            int a = g.edge(e).u, b = g.edge(e).v;
            if (uf.find(a) != uf.find(b)) continue;
            int x = a, y = b;
            while (x != y) {
                if (depth[x] >= depth[y]) x = parent[x];
                else y = parent[y];
            }
            double path = up[a] + up[b] - 2 * up[x];
            out.tau[e] = std::min(out.tau[e], g.edge(e).w * path);
        }
    }
    for (int e = 0; e < m; ++e)
        if (status[e] == kForest || status[e] == kExtra) {
            out.tau[e] = 1.0;
            out.H.push_back(e);
        }
    for (double x : out.tau) out.kappa_measured += std::pow(x, prm.p);
    return out;
}

inline DistortionSubgraph spectral_subgraph(const WeightedMultiGraph& g, double k, const SolverConfig& cfg,
                                            const SeedSplitter& seeds) {
    return spectral_subgraph(g, AkpwParams::from_config(k, cfg), default_path_sparsifier(cfg), seeds, cfg.tau_mode);
}

// Sum over edges of (w_e R^eff_H(e))^p, by dense pseudoinverse.
inline double distortion(const WeightedMultiGraph& g, const std::vector<int>& H, double p,
                         std::vector<double>* stretch = nullptr) {
    if (g.num_vertices() > oracle::dense_cap()) throw std::length_error("distortion: above dense cap");
    oracle::ResistanceOracle ro(edge_subgraph(g, H).graph);
    double total = 0;
    if (stretch) stretch->assign(g.num_edges(), 0);
    for (int e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edge(e);
        double s = ed.w * ro.resistance(ed.u, ed.v);
        if (stretch) (*stretch)[e] = s;
        total += std::pow(s, p);
    }
    return total;
}

}  // namespace lapsolve
