#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "graph.hpp"

namespace lapsolve {

// Bucket index per edge, 0-based, in [0, num_buckets).
struct EdgePartition {
    std::vector<int> bucket_of;
    int num_buckets = 0;
};

struct DecompTree {
    int root = -1;
    int radius = 0;
    std::vector<int> vertices;
    std::vector<int> edges;  // edge ids of the host graph
};

struct DecompPiece {
    std::vector<int> vertices;
    int ball_radius = 0;
    std::vector<DecompTree> trees;
};

struct Decomposition {
    std::vector<DecompPiece> pieces;
    std::vector<int> piece_of;  // vertex -> piece index

    int tree_count() const {
        int c = 0;
        for (const auto& p : pieces) c += static_cast<int>(p.trees.size());
        return c;
    }
};

struct DecomposeBoundsReport {
    bool cut_ok = true;
    bool radius_ok = true;
    bool count_ok = true;
    bool partition_ok = true;
    std::vector<long long> cut_per_bucket;
    std::vector<double> cut_bound_per_bucket;
    int max_radius = 0;
    int tree_count = 0;
    double tree_count_bound = 0;
    bool all() const { return cut_ok && radius_ok && count_ok && partition_ok; }
};

namespace detail {

struct GrowState {
    double vol = 0;
    double cut = 0;
    std::vector<double> vol_j;
    std::vector<double> cut_j;
};

}  // namespace detail

// Checks the three decomposition guarantees plus the partition structure.
// Every weight is read as 1.
inline DecomposeBoundsReport check_decomposition_bounds(const WeightedMultiGraph& g, const EdgePartition& buckets,
                                                        double beta, double r, const Decomposition& d) {
    DecomposeBoundsReport rep;
    r = std::floor(r);
    const int n = g.num_vertices();
    const int m = g.num_edges();
    const int l = buckets.num_buckets;
    const double f = l > 0 ? std::exp(-r * beta / l) : 0.0;
    std::vector<int> piece(n, -1), tree(n, -1);
    std::vector<char> seen(n, 0);
    int tid = 0;
    for (std::size_t i = 0; i < d.pieces.size(); ++i) {
        for (const DecompTree& t : d.pieces[i].trees) {
            for (int v : t.vertices) {
                if (tree[v] >= 0) rep.partition_ok = false;
                tree[v] = tid;
            }
            rep.max_radius = std::max(rep.max_radius, t.radius);
            if (t.radius > r) rep.radius_ok = false;
            // recompute depths by walking the tree edges from the root
            std::vector<std::pair<int, int>> adj;
            for (int e : t.edges) {
                adj.emplace_back(g.edge(e).u, g.edge(e).v);
                adj.emplace_back(g.edge(e).v, g.edge(e).u);
            }
            std::sort(adj.begin(), adj.end());
            std::vector<std::pair<int, int>> q{{t.root, 0}};
            std::vector<int> reached{t.root};
            seen[t.root] = 1;
            for (std::size_t h = 0; h < q.size(); ++h) {
                auto [x, dx] = q[h];
                if (dx > r) rep.radius_ok = false;
                auto it = std::lower_bound(adj.begin(), adj.end(), std::make_pair(x, -1));
                for (; it != adj.end() && it->first == x; ++it) {
                    int y = it->second;
                    if (seen[y]) continue;
                    seen[y] = 1;
                    reached.push_back(y);
                    q.emplace_back(y, dx + 1);
                }
            }
            if (t.edges.size() + 1 != t.vertices.size() || reached.size() != t.vertices.size())
                rep.partition_ok = false;
            for (int y : reached) seen[y] = 0;
            ++tid;
        }
        for (int v : d.pieces[i].vertices) {
            if (piece[v] >= 0) rep.partition_ok = false;
            piece[v] = static_cast<int>(i);
            if (tree[v] < 0) rep.partition_ok = false;
        }
    }
    for (int v = 0; v < n; ++v)
        if (piece[v] < 0) rep.partition_ok = false;
    rep.cut_per_bucket.assign(l, 0);
    std::vector<long long> size(l, 0);
    for (int e = 0; e < m; ++e) {
        int b = buckets.bucket_of[e];
        ++size[b];
        const Edge& ed = g.edge(e);
        if (piece[ed.u] != piece[ed.v]) ++rep.cut_per_bucket[b];
    }
    rep.cut_bound_per_bucket.resize(l);
    for (int b = 0; b < l; ++b) {
        rep.cut_bound_per_bucket[b] = 6 * beta * size[b] + 6 * beta * m * f;
        if (rep.cut_per_bucket[b] > rep.cut_bound_per_bucket[b] + 1e-9) rep.cut_ok = false;
    }
    rep.tree_count = d.tree_count();
    rep.tree_count_bound = static_cast<double>(d.pieces.size()) + 4.0 * m * f;
    if (rep.tree_count > rep.tree_count_bound + 1e-9) rep.count_ok = false;
    return rep;
}

// Bucketed ball growing with retraction. The graph is read as unweighted and
// r is taken as a hop count (floored).
inline Decomposition decompose(const WeightedMultiGraph& g, const EdgePartition& buckets, double beta, double r) {
    if (!(beta > 0.0) || beta > 1.0 / 6.0 + 1e-15) throw std::invalid_argument("beta must lie in (0, 1/6]");
    if (r < 0) throw std::invalid_argument("negative radius parameter");
    r = std::floor(r);  // hop radius
    const int n = g.num_vertices();
    const int m = g.num_edges();
    const int l = buckets.num_buckets;
    if (static_cast<int>(buckets.bucket_of.size()) != m) throw std::invalid_argument("bucket map size mismatch");
    for (int b : buckets.bucket_of)
        if (b < 0 || b >= l) throw std::invalid_argument("bucket index out of range");
    const double f = l > 0 ? std::exp(-r * beta / l) : 0.0;

    std::vector<char> alive(n, 1), in_ball(n, 0), edge_dead(m, 0);
    std::vector<long long> surviving(l, 0);
    for (int e = 0; e < m; ++e) ++surviving[buckets.bucket_of[e]];

    Decomposition out;
    out.piece_of.assign(n, -1);
    detail::GrowState st;
    std::vector<int> ball, layer, next, tree_idx(n, -1);
    int next_start = 0;

    auto add_vertex = [&](int x) {
        in_ball[x] = 1;
        for (int e : g.incident(x)) {
            int y = g.other(e, x);
            if (!alive[y]) continue;
            int b = buckets.bucket_of[e];
            if (y == x) {
                st.vol += 0.5;
                st.vol_j[b] += 0.5;
                continue;
            }
            st.vol += 1;
            st.vol_j[b] += 1;
            double s = in_ball[y] ? -1.0 : 1.0;
            st.cut += s;
            st.cut_j[b] += s;
        }
    };

    for (int v = 0; v < n; v = next_start) {
        while (v < n && !alive[v]) ++v;
        if (v >= n) break;
        next_start = v + 1;

        st.vol = st.cut = 0;
        st.vol_j.assign(l, 0.0);
        st.cut_j.assign(l, 0.0);
        ball.clear();
        layer.assign(1, v);
        ball.push_back(v);
        add_vertex(v);
        int R = 0;
        for (;;) {
            bool expand = false;
            for (int j = 0; j < l && !expand; ++j) {
                if (surviving[j] == 0) continue;
                if (f * st.cut + st.cut_j[j] >= 3 * beta * (f * st.vol + st.vol_j[j])) expand = true;
            }
            if (!expand) break;
            next.clear();
            for (int x : layer)
                for (int e : g.incident(x)) {
                    int y = g.other(e, x);
                    if (alive[y] && !in_ball[y]) {
                        in_ball[y] = 2;  // provisional mark to avoid duplicates
                        next.push_back(y);
                    }
                }
            if (next.empty()) break;
#ifndef NDEBUG
            double vol_before = st.vol, cut_before = st.cut;
#endif
            for (int y : next) in_ball[y] = 0;
            for (int y : next) {
                add_vertex(y);
                ball.push_back(y);
            }
#ifndef NDEBUG
            if (st.vol + 1e-9 < vol_before + cut_before) throw std::logic_error("ball volume growth violated");
#endif
            layer.swap(next);
            ++R;
        }

        BallTree bt = ball_and_tree(g, v, R, &alive);
        DecompPiece piece;
        piece.ball_radius = R;
        piece.vertices = bt.vertices;
        const RootedForest& T = bt.tree;
        // Retraction: tree edges whose deeper endpoint sits at depth <= R - r
        // are dropped, so every vertex at depth <= R - r roots its own tree.
        const bool retract = R >= r;
        const int cutoff = retract ? R - static_cast<int>(r) : 0;  // r <= R fits in int here
        for (int x : bt.vertices) {  // BFS order: parents first
            if (x == v || (retract && T.depth[x] <= cutoff)) {
                DecompTree t;
                t.root = x;
                tree_idx[x] = static_cast<int>(piece.trees.size());
                piece.trees.push_back(std::move(t));
            } else {
                int ti = tree_idx[T.parent[x]];
                tree_idx[x] = ti;
                piece.trees[ti].edges.push_back(T.parent_edge[x]);
                piece.trees[ti].radius = std::max(piece.trees[ti].radius, T.depth[x] - cutoff);
            }
            piece.trees[tree_idx[x]].vertices.push_back(x);
        }
        const int pid = static_cast<int>(out.pieces.size());
        for (int x : bt.vertices) out.piece_of[x] = pid;
        // remove the ball from the graph
        for (int x : bt.vertices) {
            for (int e : g.incident(x)) {
                if (edge_dead[e]) continue;
                int y = g.other(e, x);
                if (!alive[y]) continue;
                edge_dead[e] = 1;
                --surviving[buckets.bucket_of[e]];
            }
        }
        for (int x : bt.vertices) {
            alive[x] = 0;
            in_ball[x] = 0;
        }
        out.pieces.push_back(std::move(piece));
    }
#ifndef NDEBUG
    auto rep = check_decomposition_bounds(g, buckets, beta, r, out);
    if (!rep.all()) throw std::logic_error("decomposition bound violated");
#endif
    return out;
}

}  // namespace lapsolve
