#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lapsolve/config.hpp"
#include "lapsolve/graph.hpp"
#include "lapsolve/rng.hpp"

namespace lapsolve {

// A subgraph of a fixed base graph given by vertex ids and edge ids of the base.
// Path sparsification treats every edge as unit weight.
struct EdgeView {
    std::vector<int> vertices;
    std::vector<int> edges;
};

struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DegenerateInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline EdgeView full_view(const WeightedMultiGraph& g) {
    EdgeView v;
    v.vertices.resize(g.num_vertices());
    v.edges.resize(g.num_edges());
    std::iota(v.vertices.begin(), v.vertices.end(), 0);
    std::iota(v.edges.begin(), v.edges.end(), 0);
    return v;
}

// Degrees inside the view, indexed by base vertex id.
inline std::vector<int> view_degrees(const WeightedMultiGraph& g, const EdgeView& h) {
    std::vector<int> deg(g.num_vertices(), 0);
    for (int e : h.edges) {
        ++deg[g.edge(e).u];
        ++deg[g.edge(e).v];
    }
    return deg;
}

inline bool view_is_simple(const WeightedMultiGraph& g, const EdgeView& h) {
    std::vector<std::pair<int, int>> keys;
    keys.reserve(h.edges.size());
    for (int e : h.edges) {
        const Edge& ed = g.edge(e);
        if (ed.u == ed.v) return false;
        keys.emplace_back(std::min(ed.u, ed.v), std::max(ed.u, ed.v));
    }
    std::sort(keys.begin(), keys.end());
    return std::adjacent_find(keys.begin(), keys.end()) == keys.end();
}

struct RegularPiece {
    EdgeView view;
    int d_min = 0;
    int d_max = 0;
    double d_ratio = 0;
};

// Drops isolated vertices and records the degree spread.
inline RegularPiece make_piece(const WeightedMultiGraph& g, EdgeView v) {
    auto deg = view_degrees(g, v);
    RegularPiece p;
    std::vector<int> keep;
    for (int x : v.vertices)
        if (deg[x] > 0) keep.push_back(x);
    v.vertices = std::move(keep);
    if (!v.vertices.empty()) {
        p.d_min = std::numeric_limits<int>::max();
        for (int x : v.vertices) {
            p.d_min = std::min(p.d_min, deg[x]);
            p.d_max = std::max(p.d_max, deg[x]);
        }
        p.d_ratio = static_cast<double>(p.d_max) / p.d_min;
    }
    p.view = std::move(v);
    return p;
}

struct DegreeLowerboundStats {
    double d_avg = 0;
    double threshold = 0;
    int removed_vertices = 0;
    int removed_edges = 0;
};

// Peel vertices of degree < c * d_avg, where d_avg is fixed at entry.
inline EdgeView degree_lowerbound(const WeightedMultiGraph& g, const EdgeView& h, double c,
                                  DegreeLowerboundStats* stats = nullptr) {
    if (!(c > 0 && c < 1)) throw std::invalid_argument("degree_lowerbound: c must lie in (0,1)");
    DegreeLowerboundStats st;
    if (h.vertices.empty()) {
        if (stats) *stats = st;
        return {};
    }
    st.d_avg = 2.0 * static_cast<double>(h.edges.size()) / static_cast<double>(h.vertices.size());
    st.threshold = c * st.d_avg;
    const int n = g.num_vertices();
    std::vector<int> deg(n, 0);
    std::vector<char> in(n, 0);
    for (int x : h.vertices) in[x] = 1;
    // local adjacency over the view's edges
    std::vector<int> off(n + 1, 0);
    for (int e : h.edges) {
        ++off[g.edge(e).u + 1];
        ++off[g.edge(e).v + 1];
    }
    for (int i = 0; i < n; ++i) off[i + 1] += off[i];
    std::vector<int> adj(off[n]), fill(off.begin(), off.end() - 1);
    for (int e : h.edges) {
        adj[fill[g.edge(e).u]++] = e;
        adj[fill[g.edge(e).v]++] = e;
        ++deg[g.edge(e).u];
        ++deg[g.edge(e).v];
    }
    std::vector<int> queue;
    std::vector<char> queued(n, 0);
    for (int x : h.vertices)
        if (deg[x] < st.threshold) {
            queue.push_back(x);
            queued[x] = 1;
        }
    std::vector<char> dead_edge;  // edges touching removed vertices are gone
    for (std::size_t q = 0; q < queue.size(); ++q) {
        int a = queue[q];
        in[a] = 0;
        ++st.removed_vertices;
        for (int i = off[a]; i < off[a + 1]; ++i) {
            int e = adj[i];
            int b = g.other(e, a);
            if (b == a || !in[b]) continue;
            ++st.removed_edges;
            if (--deg[b] < st.threshold && !queued[b]) {
                queued[b] = 1;
                queue.push_back(b);
            }
        }
    }
    EdgeView out;
    for (int x : h.vertices)
        if (in[x]) out.vertices.push_back(x);
    for (int e : h.edges) {
        const Edge& ed = g.edge(e);
        if (in[ed.u] && in[ed.v]) out.edges.push_back(e);
        else if (ed.u == ed.v) ++st.removed_edges;
    }
    if (stats) *stats = st;
    return out;
}

// Random split of the left side into k groups until every right degree and
// every group size lies in its [1/(2k), 3/(2k)] window.
inline std::vector<EdgeView> bipartite_split(const WeightedMultiGraph& g, const EdgeView& h,
                                             const std::vector<int>& L, const std::vector<int>& R, int k,
                                             Rng& rng, double c_split, int max_retries = 64,
                                             int* attempts_out = nullptr) {
    const int n = g.num_vertices();
    if (k < 1 || k > static_cast<int>(L.size())) throw std::invalid_argument("bipartite_split: k must lie in [1,|L|]");
    std::vector<int> side(n, 0);  // 1 = L, 2 = R
    for (int a : L) side[a] = 1;
    for (int b : R) {
        if (side[b]) throw std::invalid_argument("bipartite_split: L and R overlap");
        side[b] = 2;
    }
    std::vector<int> deg(n, 0);
    for (int e : h.edges) {
        const Edge& ed = g.edge(e);
        if (side[ed.u] + side[ed.v] != 3) throw std::invalid_argument("bipartite_split: edge not between L and R");
        ++deg[ed.u];
        ++deg[ed.v];
    }
    if (static_cast<double>(L.size()) / k < c_split) throw PreconditionError("bipartite_split: |L|/k below c_split");
    for (int b : R)
        if (static_cast<double>(deg[b]) / k < c_split) throw PreconditionError("bipartite_split: right degree/k below c_split");
    if (attempts_out) *attempts_out = 1;
    if (k == 1) {
        EdgeView v;
        v.vertices = L;
        v.vertices.insert(v.vertices.end(), R.begin(), R.end());
        v.edges = h.edges;
        return {v};
    }
    std::vector<int> part(n, -1);
    std::vector<int> cnt(static_cast<std::size_t>(k) * n, 0);
    std::vector<int> lsize(k);
    const double lo_l = static_cast<double>(L.size()) / (2.0 * k), hi_l = 3.0 * static_cast<double>(L.size()) / (2.0 * k);
    for (int attempt = 1; attempt <= max_retries; ++attempt) {
        if (attempts_out) *attempts_out = attempt;
        std::uniform_int_distribution<int> pick(0, k - 1);
        std::fill(lsize.begin(), lsize.end(), 0);
        for (int a : L) {
            part[a] = pick(rng);
            ++lsize[part[a]];
        }
        bool ok = true;
        for (int i = 0; i < k && ok; ++i)
            if (lsize[i] < lo_l || lsize[i] > hi_l) ok = false;
        if (ok) {
            for (int b : R)
                for (int i = 0; i < k; ++i) cnt[static_cast<std::size_t>(i) * n + b] = 0;
            for (int e : h.edges) {
                const Edge& ed = g.edge(e);
                int a = side[ed.u] == 1 ? ed.u : ed.v, b = g.other(e, a);
                ++cnt[static_cast<std::size_t>(part[a]) * n + b];
            }
            for (int b : R) {
                double lo = deg[b] / (2.0 * k), hi = 3.0 * deg[b] / (2.0 * k);
                for (int i = 0; i < k; ++i) {
                    int c = cnt[static_cast<std::size_t>(i) * n + b];
                    if (c < lo || c > hi) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) break;
            }
        }
        if (!ok) continue;
        std::vector<EdgeView> out(k);
        for (int a : L) out[part[a]].vertices.push_back(a);
        for (auto& v : out) v.vertices.insert(v.vertices.end(), R.begin(), R.end());
        for (int e : h.edges) {
            const Edge& ed = g.edge(e);
            int a = side[ed.u] == 1 ? ed.u : ed.v;
            out[part[a]].edges.push_back(e);
        }
        return out;
    }
    throw DegenerateInput("bipartite_split: retry cap exhausted");
}

struct DecomposeBipartiteResult {
    std::string branch;  // early | split | precondition | split_precondition | split_failed
    bool precondition_ok = false;
    int k = 0;
    int attempts = 0;
    double d_avg_L = 0, d_avg_R = 0, c = 0;
    std::vector<RegularPiece> pieces;
};

inline DecomposeBipartiteResult decompose_bipartite(const WeightedMultiGraph& g, const EdgeView& h,
                                                    std::vector<int> L, std::vector<int> R,
                                                    const SolverConfig& cfg, Rng& rng) {
    DecomposeBipartiteResult res;
    const int nloc = static_cast<int>(L.size() + R.size());
    auto deg = view_degrees(g, h);
    double m = static_cast<double>(h.edges.size());
    if (L.empty() || R.empty() || m == 0) {
        res.branch = "precondition";
        return res;
    }
    res.d_avg_L = m / L.size();
    res.d_avg_R = m / R.size();
    int dmax_l = 0, dmax_r = 0;
    for (int a : L) dmax_l = std::max(dmax_l, deg[a]);
    for (int b : R) dmax_r = std::max(dmax_r, deg[b]);
    res.c = std::max(dmax_l / res.d_avg_L, dmax_r / res.d_avg_R);
    double floor_bip = cfg.eff_c_bip(nloc);
    if (res.d_avg_L < floor_bip || res.d_avg_R < floor_bip) {
        res.branch = "precondition";
        return res;
    }
    res.precondition_ok = true;
    double d_avg_r = res.d_avg_R;
    if (R.size() > L.size()) {
        std::swap(L, R);
        d_avg_r = res.d_avg_L;
    }
    std::vector<char> in_rp(g.num_vertices(), 0);
    std::vector<int> Rp;
    for (int b : R)
        if (deg[b] >= 0.5 * d_avg_r) {
            Rp.push_back(b);
            in_rp[b] = 1;
        }
    std::vector<char> in_l(g.num_vertices(), 0);
    for (int a : L) in_l[a] = 1;
    EdgeView gp;
    gp.vertices = L;
    gp.vertices.insert(gp.vertices.end(), Rp.begin(), Rp.end());
    for (int e : h.edges) {
        const Edge& ed = g.edge(e);
        if (in_rp[ed.u] || in_rp[ed.v]) gp.edges.push_back(e);
    }
    if (2 * Rp.size() >= L.size()) {
        res.branch = "early";
        auto piece = make_piece(g, degree_lowerbound(g, gp, 0.5));
        if (!piece.view.edges.empty()) res.pieces.push_back(std::move(piece));
        return res;
    }
    res.k = static_cast<int>(L.size() / Rp.size());
    std::vector<EdgeView> parts;
    try {
        parts = bipartite_split(g, gp, L, Rp, res.k, rng, cfg.eff_c_split(nloc), static_cast<int>(cfg.max_retries),
                                &res.attempts);
    } catch (const PreconditionError&) {
        res.branch = "split_precondition";
        return res;
    } catch (const DegenerateInput&) {
        res.branch = "split_failed";
        return res;
    }
    res.branch = "split";
    for (const auto& part : parts) {
        auto piece = make_piece(g, degree_lowerbound(g, part, 0.5));
        if (!piece.view.edges.empty()) res.pieces.push_back(std::move(piece));
    }
    return res;
}

struct BoundsReport {
    std::vector<std::pair<std::string, bool>> items;
    double measured_volume = 0, required_volume = 0;
    bool all() const {
        for (const auto& it : items)
            if (!it.second) return false;
        return true;
    }
};

inline double pieces_volume(const std::vector<RegularPiece>& ps) {
    double v = 0;
    for (const auto& p : ps) v += 2.0 * static_cast<double>(p.view.edges.size());
    return v;
}

inline BoundsReport check_decompose_bipartite(const WeightedMultiGraph& g, const EdgeView& h,
                                              const DecomposeBipartiteResult& r) {
    BoundsReport rep;
    const double n = static_cast<double>(h.vertices.size());
    double sum_v = 0;
    for (const auto& p : r.pieces) sum_v += static_cast<double>(p.view.vertices.size());
    rep.measured_volume = pieces_volume(r.pieces);
    rep.required_volume = 2.0 * static_cast<double>(h.edges.size()) / 8.0;
    rep.items.push_back({"vertex_size", sum_v <= 4 * n});
    rep.items.push_back({"volume", rep.measured_volume >= rep.required_volume});
    bool ratio = true, dmin = true;
    for (const auto& p : r.pieces) {
        if (p.d_ratio > 16 * r.c + 1e-9) ratio = false;
        if (p.d_min < std::min(r.d_avg_L, r.d_avg_R) / 16 - 1e-9) dmin = false;
    }
    rep.items.push_back({"regularity", ratio});
    rep.items.push_back({"min_degree", dmin});
    (void)g;
    return rep;
}

struct PairTrace {
    int i, j;
    long long edges;
    std::string branch;  // diagonal | bipartite:<sub-branch> | skipped_volume
};

struct RegularDecompositionResult {
    std::vector<RegularPiece> pieces;
    std::vector<PairTrace> trace;
    int num_buckets = 0;
    double d_avg = 0;
};

inline RegularDecompositionResult regular_decomposition(const WeightedMultiGraph& g, const EdgeView& h,
                                                        const SolverConfig& cfg, Rng& rng) {
    RegularDecompositionResult res;
    const int n = static_cast<int>(h.vertices.size());
    if (n < 2) throw PreconditionError("regular_decomposition: fewer than two vertices");
    res.d_avg = 2.0 * static_cast<double>(h.edges.size()) / n;
    if (res.d_avg < cfg.eff_density_floor(n)) throw PreconditionError("regular_decomposition: density floor unmet");
    EdgeView gp = degree_lowerbound(g, h, 0.5);
    auto deg = view_degrees(g, gp);
    const double ln_n = std::log(static_cast<double>(n));
    // ceil so that degrees in [e^floor(ln n), n) still get a bucket
    const int kb = std::max(1, static_cast<int>(std::ceil(ln_n)));
    res.num_buckets = kb;
    std::vector<int> bucket(g.num_vertices(), 0);
    std::vector<std::vector<int>> S(kb + 1);
    std::vector<double> volS(kb + 1, 0);
    for (int a : gp.vertices) {
        int i = static_cast<int>(std::floor(std::log(static_cast<double>(deg[a])))) + 1;
        i = std::clamp(i, 1, kb);
        bucket[a] = i;
        S[i].push_back(a);
        volS[i] += deg[a];
    }
    std::map<std::pair<int, int>, std::vector<int>> E;
    for (int e : gp.edges) {
        int i = bucket[g.edge(e).u], j = bucket[g.edge(e).v];
        if (i > j) std::swap(i, j);
        E[{i, j}].push_back(e);
    }
    for (int i = 1; i <= kb; ++i)
        for (int j = i; j <= kb; ++j) {
            auto it = E.find({i, j});
            long long cnt = it == E.end() ? 0 : static_cast<long long>(it->second.size());
            if (S[i].empty() || S[j].empty()) continue;
            PairTrace tr{i, j, cnt, ""};
            double vol = 2.0 * cnt;
            if (cnt == 0 || vol < volS[i] / (2 * ln_n) || vol < volS[j] / (2 * ln_n)) {
                tr.branch = "skipped_volume";
                res.trace.push_back(tr);
                continue;
            }
            EdgeView gij;
            gij.vertices = S[i];
            if (i != j) gij.vertices.insert(gij.vertices.end(), S[j].begin(), S[j].end());
            gij.edges = it->second;
            if (i == j) {
                tr.branch = "diagonal";
                auto piece = make_piece(g, degree_lowerbound(g, gij, 0.5));
                if (!piece.view.edges.empty()) res.pieces.push_back(std::move(piece));
            } else {
                auto db = decompose_bipartite(g, gij, S[i], S[j], cfg, rng);
                tr.branch = "bipartite:" + db.branch;
                for (auto& p : db.pieces) res.pieces.push_back(std::move(p));
            }
            res.trace.push_back(tr);
        }
    return res;
}

inline BoundsReport check_regular_decomposition(const WeightedMultiGraph& g, const EdgeView& h,
                                                const RegularDecompositionResult& r) {
    BoundsReport rep;
    const double n = static_cast<double>(h.vertices.size());
    const double ln_n = std::log(n);
    double sum_v = 0;
    for (const auto& p : r.pieces) sum_v += static_cast<double>(p.view.vertices.size());
    rep.measured_volume = pieces_volume(r.pieces);
    rep.required_volume = 2.0 * static_cast<double>(h.edges.size()) / 100.0;
    rep.items.push_back({"vertex_size", sum_v <= 4 * n * r.num_buckets});
    rep.items.push_back({"volume", rep.measured_volume >= rep.required_volume});
    bool ratio = true, dmin = true;
    for (const auto& p : r.pieces) {
        if (p.d_ratio > 1000 * std::log(2 * n)) ratio = false;
        if (p.d_min < r.d_avg / (250 * ln_n)) dmin = false;
    }
    rep.items.push_back({"regularity", ratio});
    rep.items.push_back({"min_degree", dmin});
    (void)g;
    return rep;
}

struct UniformSample {
    EdgeView view;
    double p = 1;
};

// Keep each edge independently with probability min(1, c_unif ln n / d).
inline UniformSample uniform_sample_graph(const WeightedMultiGraph& g, const EdgeView& h, double d, double c_unif,
                                          Rng& rng) {
    auto deg = view_degrees(g, h);
    for (int x : h.vertices)
        if (d > deg[x] + 1e-12) throw std::invalid_argument("uniform_sample_graph: d exceeds minimum degree");
    UniformSample s;
    s.view.vertices = h.vertices;
    const double n = static_cast<double>(h.vertices.size());
    s.p = d > 0 ? std::min(1.0, c_unif * std::log(std::max(n, 2.0)) / d) : 1.0;
    if (s.p >= 1.0) {
        s.p = 1.0;
        s.view.edges = h.edges;
        return s;
    }
    for (int e : h.edges)
        if (uniform01(rng) < s.p) s.view.edges.push_back(e);
    return s;
}

struct ExpanderPiece {
    std::vector<int> vertices;
    double phi_cert = 0;  // lower bound on the conductance of the self-looped piece
    bool certified = false;
};

struct ExpanderDecomposition {
    std::vector<ExpanderPiece> pieces;
    long long cut_edges = 0;
    bool cut_ok = true;
    int max_depth_hit = 0;
};

namespace detail {

// Second eigenpair of D^{-1/2} L_int D^{-1/2} with D the degrees in the whole view.
inline std::pair<double, Eigen::VectorXd> normalized_lambda2(const std::vector<int>& P,
                                                             const std::vector<std::vector<int>>& adj,
                                                             const std::vector<int>& local, const std::vector<int>& deg,
                                                             bool dense) {
    const int s = static_cast<int>(P.size());
    Eigen::VectorXd isq(s);
    for (int i = 0; i < s; ++i) isq[i] = 1.0 / std::sqrt(static_cast<double>(deg[P[i]]));
    if (dense) {
        Eigen::MatrixXd N = Eigen::MatrixXd::Zero(s, s);
        for (int i = 0; i < s; ++i)
            for (int b : adj[P[i]]) {
                int j = local[b];
                if (j < 0 || j == i) continue;
                N(i, j) -= isq[i] * isq[j];
                N(i, i) += isq[i] * isq[i];
            }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(N);
        return {es.eigenvalues()[1], es.eigenvectors().col(1)};
    }
    // power iteration on I - N/2 with the trivial direction deflated
    Eigen::VectorXd top(s);
    for (int i = 0; i < s; ++i) top[i] = 1.0 / isq[i];
    top.normalize();
    Eigen::VectorXd x(s);
    for (int i = 0; i < s; ++i) x[i] = std::sin(1.0 + 7.3 * i);
    auto apply_n = [&](const Eigen::VectorXd& y) {
        Eigen::VectorXd z = Eigen::VectorXd::Zero(s);
        for (int i = 0; i < s; ++i)
            for (int b : adj[P[i]]) {
                int j = local[b];
                if (j < 0 || j == i) continue;
                z[i] += isq[i] * isq[i] * y[i] - isq[i] * isq[j] * y[j];
            }
        return z;
    };
    for (int it = 0; it < 400; ++it) {
        x -= top.dot(x) * top;
        x = x - 0.5 * apply_n(x);
        x.normalize();
    }
    x -= top.dot(x) * top;
    x.normalize();
    return {x.dot(apply_n(x)), x};
}

}  // namespace detail

// Recursive spectral partitioning: a piece is kept once lambda_2/2 of its
// self-looped normalized Laplacian reaches phi_target, else split by sweep cut.
inline ExpanderDecomposition expander_decompose(const WeightedMultiGraph& g, const EdgeView& h, double phi_target,
                                                double cut_fraction = 0.125, int max_depth = 40,
                                                int dense_limit = 2500) {
    if (h.vertices.empty()) throw std::invalid_argument("expander_decompose: empty graph");
    const int n = g.num_vertices();
    auto deg = view_degrees(g, h);
    std::vector<std::vector<int>> adj(n);
    for (int e : h.edges) {
        const Edge& ed = g.edge(e);
        if (ed.u == ed.v) continue;
        adj[ed.u].push_back(ed.v);
        adj[ed.v].push_back(ed.u);
    }
    ExpanderDecomposition out;
    std::vector<int> local(n, -1);
    std::vector<std::pair<std::vector<int>, int>> work{{h.vertices, 0}};
    auto emit_singletons = [&](const std::vector<int>& P) {
        for (int x : P) out.pieces.push_back({{x}, 1.0, true});
    };
    while (!work.empty()) {
        auto [P, depth] = std::move(work.back());
        work.pop_back();
        if (P.size() == 1) {
            out.pieces.push_back({P, 1.0, true});
            continue;
        }
        if (depth > max_depth) {
            out.max_depth_hit = 1;
            emit_singletons(P);
            continue;
        }
        for (std::size_t i = 0; i < P.size(); ++i) local[P[i]] = static_cast<int>(i);
        // split off internal connected components first
        std::vector<int> comp(P.size(), -1);
        int nc = 0;
        for (std::size_t s = 0; s < P.size(); ++s) {
            if (comp[s] >= 0) continue;
            std::vector<int> st{static_cast<int>(s)};
            comp[s] = nc;
            while (!st.empty()) {
                int i = st.back();
                st.pop_back();
                for (int b : adj[P[i]]) {
                    int j = local[b];
                    if (j >= 0 && comp[j] < 0) {
                        comp[j] = nc;
                        st.push_back(j);
                    }
                }
            }
            ++nc;
        }
        if (nc > 1) {
            std::vector<std::vector<int>> parts(nc);
            for (std::size_t i = 0; i < P.size(); ++i) parts[comp[i]].push_back(P[i]);
            for (int x : P) local[x] = -1;
            for (auto& q : parts) work.push_back({std::move(q), depth});
            continue;
        }
        bool dense = static_cast<int>(P.size()) <= dense_limit;
        auto [lam2, vec] = detail::normalized_lambda2(P, adj, local, deg, dense);
        if (dense && lam2 / 2 >= phi_target) {
            out.pieces.push_back({P, lam2 / 2, true});
            for (int x : P) local[x] = -1;
            continue;
        }
        // sweep cut on D^{-1/2} v2
        std::vector<int> order(P.size());
        std::iota(order.begin(), order.end(), 0);
        std::vector<double> key(P.size());
        for (std::size_t i = 0; i < P.size(); ++i) key[i] = vec[static_cast<Eigen::Index>(i)] / std::sqrt(deg[P[i]]);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key[a] < key[b]; });
        double vol_total = 0;
        for (int x : P) vol_total += deg[x];
        std::vector<char> inS(P.size(), 0);
        double vol_s = 0, cut = 0, best = std::numeric_limits<double>::infinity();
        std::size_t best_k = 1;
        for (std::size_t t = 0; t + 1 < order.size(); ++t) {
            int i = order[t];
            inS[i] = 1;
            vol_s += deg[P[i]];
            for (int b : adj[P[i]]) {
                int j = local[b];
                if (j < 0) continue;
                cut += inS[j] ? -1 : 1;
            }
            double denom = std::min(vol_s, vol_total - vol_s);
            double phi = denom > 0 ? cut / denom : std::numeric_limits<double>::infinity();
            if (phi < best) {
                best = phi;
                best_k = t + 1;
            }
        }
        std::vector<int> A, B;
        for (std::size_t t = 0; t < order.size(); ++t) (t < best_k ? A : B).push_back(P[order[t]]);
        for (int x : P) local[x] = -1;
        work.push_back({std::move(A), depth + 1});
        work.push_back({std::move(B), depth + 1});
    }
    std::vector<int> piece_of(n, -1);
    for (std::size_t i = 0; i < out.pieces.size(); ++i)
        for (int x : out.pieces[i].vertices) piece_of[x] = static_cast<int>(i);
    for (int e : h.edges)
        if (piece_of[g.edge(e).u] != piece_of[g.edge(e).v]) ++out.cut_edges;
    out.cut_ok = out.cut_edges <= cut_fraction * static_cast<double>(h.edges.size());
    return out;
}

struct EdgeClaim {
    int edge;
    double alpha;
    double beta_len;
};

struct PathSparsifierResult {
    std::vector<int> F;
    std::vector<int> E_cut;
    std::vector<int> covered;
    std::vector<EdgeClaim> claims;  // one per covered edge
    double p = 1;
    bool quick_return = false;
    double alpha = 1;     // smallest claim over covered edges
    double beta_len = 1;  // largest claim over covered edges
    int num_pieces = 0;
    bool ecut_ok = true;
};

inline PathSparsifierResult partial_path_sparsify(const WeightedMultiGraph& g, const EdgeView& h, double k,
                                                  const SolverConfig& cfg, Rng& rng) {
    if (k < 1) throw std::invalid_argument("partial_path_sparsify: k must be >= 1");
    if (!view_is_simple(g, h)) throw std::invalid_argument("partial_path_sparsify: input must be simple");
    PathSparsifierResult res;
    auto deg = view_degrees(g, h);
    int d_min = std::numeric_limits<int>::max();
    for (int x : h.vertices) d_min = std::min(d_min, deg[x]);
    if (h.vertices.empty()) d_min = 0;
    const double n = static_cast<double>(h.vertices.size());
    double d = d_min / (cfg.pps_d_divisor * k);
    res.p = d > 0 ? std::min(1.0, cfg.c_unif * std::log(std::max(n, 2.0)) / d) : 1.0;
    if (res.p >= 1.0) {
        res.p = 1.0;
        res.quick_return = true;
        res.F = h.edges;
        return res;
    }
    EdgeView sampled{h.vertices, {}};
    for (int e : h.edges)
        if (uniform01(rng) < res.p) sampled.edges.push_back(e);
    auto ed = expander_decompose(g, sampled, cfg.eff_phi_target(static_cast<long long>(sampled.edges.size())),
                                 cfg.cut_fraction, static_cast<int>(cfg.expander_max_depth),
                                 static_cast<int>(cfg.expander_dense_limit));
    res.num_pieces = static_cast<int>(ed.pieces.size());
    std::vector<int> piece_of(g.num_vertices(), -1);
    for (std::size_t i = 0; i < ed.pieces.size(); ++i)
        for (int x : ed.pieces[i].vertices) piece_of[x] = static_cast<int>(i);
    auto sdeg = view_degrees(g, sampled);
    std::vector<double> alpha(ed.pieces.size(), 0), beta(ed.pieces.size(), 0);
    for (std::size_t i = 0; i < ed.pieces.size(); ++i) {
        const auto& P = ed.pieces[i].vertices;
        if (P.size() < 2) continue;
        int lo = std::numeric_limits<int>::max(), hi = 0;
        for (int x : P) {
            lo = std::min(lo, sdeg[x]);
            hi = std::max(hi, sdeg[x]);
        }
        double ratio = static_cast<double>(hi) / lo, phi = ed.pieces[i].phi_cert;
        alpha[i] = phi * lo / (8 * ratio);
        beta[i] = std::max(2.0, (4 * ratio / phi) * std::log(static_cast<double>(P.size()) / lo));
    }
    std::vector<char> in_sample(g.num_edges(), 0);
    for (int e : sampled.edges) in_sample[e] = 1;
    res.alpha = std::numeric_limits<double>::infinity();
    res.beta_len = 0;
    for (int e : h.edges) {
        int pu = piece_of[g.edge(e).u], pv = piece_of[g.edge(e).v];
        if (pu != pv) {
            res.E_cut.push_back(e);
        } else if (in_sample[e]) {
            res.F.push_back(e);
        } else {
            res.covered.push_back(e);
            res.claims.push_back({e, alpha[pu], beta[pu]});
            res.alpha = std::min(res.alpha, alpha[pu]);
            res.beta_len = std::max(res.beta_len, beta[pu]);
        }
    }
    if (res.claims.empty()) res.alpha = res.beta_len = 1;
    res.ecut_ok = 2 * res.E_cut.size() <= h.edges.size();
    return res;
}

struct PathSparsifyIteration {
    long long remain_before = 0;
    long long remain_after = 0;
    long long assigned = 0;
    long long f_added = 0;
    int pieces = 0;
};

struct PathSparsifyResult {
    std::vector<int> F;  // ids in the input graph
    std::vector<EdgeClaim> claims;
    std::vector<PathSparsifyIteration> iterations;
    double k_partial = 1;
    long long budget = 0;
};

inline long long path_sparsity_budget(int n, double k, const SolverConfig& cfg) {
    double l = std::log(std::max(n, 2));
    return static_cast<long long>(std::ceil(cfg.ps_budget_coeff * n * cfg.k_partial(k, n) * l +
                                            cfg.eff_density_floor(n) * n / 2.0));
}

// Parallel copies and self-loops are collapsed before sparsifying; a parallel
// copy inherits the status of its lowest-id representative.
inline PathSparsifyResult path_sparsify(const WeightedMultiGraph& g, double k, const SolverConfig& cfg,
                                        const SeedSplitter& seeds) {
    if (k < 1) throw std::invalid_argument("path_sparsify: k must be >= 1");
    const int n = g.num_vertices();
    PathSparsifyResult res;
    res.k_partial = cfg.k_partial(k, n);
    res.budget = path_sparsity_budget(n, k, cfg);
    std::map<std::pair<int, int>, int> rep_of;
    std::vector<int> rep(g.num_edges(), -1);
    std::vector<Edge> simple;
    std::vector<int> simple_to_orig;
    for (int e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edge(e);
        if (ed.u == ed.v) continue;
        auto key = std::make_pair(std::min(ed.u, ed.v), std::max(ed.u, ed.v));
        auto it = rep_of.find(key);
        if (it == rep_of.end()) {
            it = rep_of.emplace(key, static_cast<int>(simple.size())).first;
            simple.push_back({ed.u, ed.v, 1.0});
            simple_to_orig.push_back(e);
        }
        rep[e] = it->second;
    }
    WeightedMultiGraph gs(n, std::move(simple));
    std::vector<int> remain(gs.num_edges());
    std::iota(remain.begin(), remain.end(), 0);
    std::vector<int> F;
    std::vector<EdgeClaim> claims;
    std::vector<int> all_v(n);
    std::iota(all_v.begin(), all_v.end(), 0);
    const int cap = static_cast<int>(std::ceil(cfg.c_iter * std::log2(gs.num_edges() + 2.0))) + 1;
    const double floor_d = cfg.eff_density_floor(n);
    for (int iter = 0; iter < cap && n > 1; ++iter) {
        if (2.0 * static_cast<double>(remain.size()) / n < floor_d) break;
        Rng rng = seeds.stream("regular_decomposition", iter);
        auto rd = regular_decomposition(gs, EdgeView{all_v, remain}, cfg, rng);
        PathSparsifyIteration it;
        it.remain_before = static_cast<long long>(remain.size());
        it.pieces = static_cast<int>(rd.pieces.size());
        std::vector<char> assigned(gs.num_edges(), 0);
        std::vector<int> next;
        for (std::size_t i = 0; i < rd.pieces.size(); ++i) {
            const auto& piece = rd.pieces[i];
            for (int e : piece.view.edges) assigned[e] = 1;
            Rng prng = seeds.stream("partial_path_sparsify", iter, i);
            auto pr = partial_path_sparsify(gs, piece.view, res.k_partial, cfg, prng);
            F.insert(F.end(), pr.F.begin(), pr.F.end());
            it.f_added += static_cast<long long>(pr.F.size());
            next.insert(next.end(), pr.E_cut.begin(), pr.E_cut.end());
            claims.insert(claims.end(), pr.claims.begin(), pr.claims.end());
        }
        for (int e : remain)
            if (!assigned[e]) next.push_back(e);
            else ++it.assigned;
        std::sort(next.begin(), next.end());
        it.remain_after = static_cast<long long>(next.size());
        res.iterations.push_back(it);
        bool progress = next.size() < remain.size();
        remain = std::move(next);
        if (!progress) break;
    }
    F.insert(F.end(), remain.begin(), remain.end());
    // back to input ids
    std::vector<int> status(gs.num_edges(), 0);  // 1 kept, 2 covered
    std::vector<EdgeClaim> claim_of(gs.num_edges(), {-1, 0, 0});
    for (int e : F) status[e] = 1;
    for (const auto& c : claims) {
        status[c.edge] = 2;
        claim_of[c.edge] = c;
    }
    for (int e = 0; e < gs.num_edges(); ++e)
        if (status[e] == 1) res.F.push_back(simple_to_orig[e]);
    for (int e = 0; e < g.num_edges(); ++e) {
        if (rep[e] < 0) continue;
        int s = rep[e];
        if (simple_to_orig[s] == e) {
            if (status[s] == 2) res.claims.push_back({e, claim_of[s].alpha, claim_of[s].beta_len});
        } else if (status[s] == 1) {
            res.claims.push_back({e, 1, 1});
        } else {
            res.claims.push_back({e, claim_of[s].alpha, claim_of[s].beta_len});
        }
    }
    std::sort(res.F.begin(), res.F.end());
    return res;
}

// Maximum number of internally vertex-disjoint s-t paths, by unit-capacity
// max-flow on the split digraph (a_in -> a_out per vertex).
inline int vertex_disjoint_count(const WeightedMultiGraph& g, int s, int t) {
    if (s == t) throw std::invalid_argument("vertex_disjoint_count: s == t");
    const int n = g.num_vertices();
    const int N = 2 * n;
    struct Arc {
        int to, cap;
    };
    std::vector<Arc> arcs;
    std::vector<std::vector<int>> out(N);
    auto add = [&](int a, int b, int c) {
        out[a].push_back(static_cast<int>(arcs.size()));
        arcs.push_back({b, c});
        out[b].push_back(static_cast<int>(arcs.size()));
        arcs.push_back({a, 0});
    };
    for (int v = 0; v < n; ++v) add(2 * v, 2 * v + 1, (v == s || v == t) ? n : 1);
    std::vector<std::pair<int, int>> seen;
    for (const Edge& e : g.edges()) {
        if (e.u == e.v) continue;
        seen.emplace_back(std::min(e.u, e.v), std::max(e.u, e.v));
    }
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (auto [a, b] : seen) {
        add(2 * a + 1, 2 * b, 1);
        add(2 * b + 1, 2 * a, 1);
    }
    const int src = 2 * s + 1, snk = 2 * t;
    int flow = 0;
    std::vector<int> via(N);
    for (;;) {
        std::fill(via.begin(), via.end(), -1);
        std::vector<int> q{src};
        via[src] = -2;
        for (std::size_t h = 0; h < q.size() && via[snk] == -1; ++h)
            for (int id : out[q[h]])
                if (arcs[id].cap > 0 && via[arcs[id].to] == -1) {
                    via[arcs[id].to] = id;
                    q.push_back(arcs[id].to);
                }
        if (via[snk] == -1) break;
        for (int x = snk; x != src;) {
            int id = via[x];
            --arcs[id].cap;
            ++arcs[id ^ 1].cap;
            x = arcs[id ^ 1].to;
        }
        ++flow;
    }
    return flow;
}

struct EdgeVerification {
    int edge;
    double alpha, beta_len;
    int menger;  // -1 when not computed
    int peeled;
    bool pass;
};

struct PathVerifyReport {
    std::vector<EdgeVerification> edges;
    int checked = 0;
    int passed = 0;
    bool pass = true;
    double pass_rate() const { return checked ? static_cast<double>(passed) / checked : 1.0; }
};

// Greedy peeling: repeatedly take a shortest u-v path in G[F] avoiding the
// interior of earlier paths; counts those of length <= beta_len. A lower bound
// on the number of length-bounded disjoint paths.
inline int greedy_peel_paths(const WeightedMultiGraph& hf, int u, int v, double beta_len) {
    const int n = hf.num_vertices();
    std::vector<char> used(n, 0);
    std::vector<int> dist(n), par(n);
    bool direct_used = false;
    int count = 0;
    for (;;) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[u] = 0;
        std::vector<int> q{u};
        for (std::size_t h = 0; h < q.size() && dist[v] < 0; ++h) {
            int x = q[h];
            if (dist[x] + 1 > beta_len) break;
            for (int e : hf.incident(x)) {
                int y = hf.other(e, x);
                if (dist[y] >= 0 || (used[y] && y != v)) continue;
                if (x == u && y == v && direct_used) continue;
                dist[y] = dist[x] + 1;
                par[y] = x;
                q.push_back(y);
            }
        }
        if (dist[v] < 0 || dist[v] > beta_len) break;
        ++count;
        if (dist[v] == 1) direct_used = true;
        for (int x = par[v]; x != u; x = par[x]) used[x] = 1;
    }
    return count;
}

inline PathVerifyReport verify_path_sparsifier(const WeightedMultiGraph& g, const std::vector<int>& F,
                                               const std::vector<EdgeClaim>& claims, bool with_menger = true) {
    auto hf = edge_subgraph(g, F).graph;
    PathVerifyReport rep;
    for (const auto& c : claims) {
        const Edge& ed = g.edge(c.edge);
        EdgeVerification ev{c.edge, c.alpha, c.beta_len, -1, 0, true};
        if (ed.u != ed.v) {
            if (with_menger) ev.menger = vertex_disjoint_count(hf, ed.u, ed.v);
            ev.peeled = greedy_peel_paths(hf, ed.u, ed.v, c.beta_len);
            ev.pass = ev.peeled + 1e-12 >= c.alpha;
        }
        ++rep.checked;
        rep.passed += ev.pass ? 1 : 0;
        rep.pass = rep.pass && ev.pass;
        rep.edges.push_back(ev);
    }
    return rep;
}

// Uniform claim for every edge outside F.
inline PathVerifyReport verify_path_sparsifier(const WeightedMultiGraph& g, const std::vector<int>& F, double alpha,
                                               double beta_len, bool with_menger = true) {
    std::vector<char> in(g.num_edges(), 0);
    for (int e : F) in[e] = 1;
    std::vector<EdgeClaim> claims;
    for (int e = 0; e < g.num_edges(); ++e)
        if (!in[e]) claims.push_back({e, alpha, beta_len});
    return verify_path_sparsifier(g, F, claims, with_menger);
}

}  // namespace lapsolve
