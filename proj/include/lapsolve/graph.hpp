#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace lapsolve {

struct Edge {
    int u = 0;
    int v = 0;
    double w = 1.0;
};

// Weighted multigraph with stable edge ids. Self-loops are stored like any
// other edge; they count once (weight w) toward the degree of their vertex and
// are invisible to the Laplacian.
class WeightedMultiGraph {
public:
    WeightedMultiGraph() = default;

    WeightedMultiGraph(int n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
        if (n < 0) throw std::invalid_argument("negative vertex count");
        for (const Edge& e : edges_) {
            if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n)
                throw std::invalid_argument("edge endpoint out of range");
            if (!(e.w > 0.0) || !std::isfinite(e.w))
                throw std::invalid_argument("edge weight must be positive and finite");
        }
        index();
    }

    int num_vertices() const { return n_; }
    int num_edges() const { return static_cast<int>(edges_.size()); }
    const Edge& edge(int e) const { return edges_[e]; }
    const std::vector<Edge>& edges() const { return edges_; }

    // Edge ids incident to v; a self-loop appears twice.
    struct Range {
        const int* b;
        const int* e;
        const int* begin() const { return b; }
        const int* end() const { return e; }
        std::size_t size() const { return static_cast<std::size_t>(e - b); }
    };
    Range incident(int v) const { return {inc_.data() + off_[v], inc_.data() + off_[v + 1]}; }

    int other(int e, int v) const { return edges_[e].u == v ? edges_[e].v : edges_[e].u; }
    bool is_loop(int e) const { return edges_[e].u == edges_[e].v; }

    double weighted_degree(int v) const { return wdeg_[v]; }
    // Unit-weight degree; a self-loop contributes 1.
    int degree(int v) const { return udeg_[v]; }

    double volume() const {
        double s = 0;
        for (double d : wdeg_) s += d;
        return s;
    }
    double volume(const std::vector<int>& set) const {
        double s = 0;
        for (int v : set) s += wdeg_[v];
        return s;
    }
    double max_weight() const {
        double m = 0;
        for (const Edge& e : edges_) m = std::max(m, e.w);
        return m;
    }
    double min_weight() const {
        double m = std::numeric_limits<double>::infinity();
        for (const Edge& e : edges_) m = std::min(m, e.w);
        return m;
    }

private:
    void index() {
        off_.assign(n_ + 1, 0);
        wdeg_.assign(n_, 0.0);
        udeg_.assign(n_, 0);
        for (const Edge& e : edges_) {
            ++off_[e.u + 1];
            ++off_[e.v + 1];
            if (e.u == e.v) {
                wdeg_[e.u] += e.w;
                udeg_[e.u] += 1;
            } else {
                wdeg_[e.u] += e.w;
                wdeg_[e.v] += e.w;
                udeg_[e.u] += 1;
                udeg_[e.v] += 1;
            }
        }
        for (int i = 0; i < n_; ++i) off_[i + 1] += off_[i];
        inc_.assign(off_[n_], 0);
        std::vector<int> pos(off_.begin(), off_.end() - 1);
        for (int id = 0; id < num_edges(); ++id) {
            inc_[pos[edges_[id].u]++] = id;
            inc_[pos[edges_[id].v]++] = id;
        }
    }

    int n_ = 0;
    std::vector<Edge> edges_;
    std::vector<int> off_;
    std::vector<int> inc_;
    std::vector<double> wdeg_;
    std::vector<int> udeg_;
};

inline WeightedMultiGraph build_graph(int n, std::vector<Edge> edges) {
    return WeightedMultiGraph(n, std::move(edges));
}

// Same topology, every weight set to one.
inline WeightedMultiGraph unweighted_copy(const WeightedMultiGraph& g) {
    std::vector<Edge> es = g.edges();
    for (Edge& e : es) e.w = 1.0;
    return WeightedMultiGraph(g.num_vertices(), std::move(es));
}

class UnionFind {
public:
    explicit UnionFind(int n = 0) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }
    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return true;
    }
    int size() const { return static_cast<int>(parent_.size()); }

private:
    std::vector<int> parent_;
    std::vector<int> size_;
};

// Per-vertex parent pointers over a subset of vertices. Vertices outside the
// forest have in_forest == false.
struct RootedForest {
    std::vector<int> parent;       // -1 for roots and non-members
    std::vector<int> parent_edge;  // edge id to parent, -1 otherwise
    std::vector<int> depth;        // hops from the root of the vertex's tree
    std::vector<char> in_forest;
    std::vector<int> roots;

    explicit RootedForest(int n = 0)
        : parent(n, -1), parent_edge(n, -1), depth(n, 0), in_forest(n, 0) {}

    int root_of(int v) const {
        while (parent[v] >= 0) v = parent[v];
        return v;
    }
    int radius(int root) const {
        int r = 0;
        for (std::size_t v = 0; v < parent.size(); ++v)
            if (in_forest[v] && root_of(static_cast<int>(v)) == root) r = std::max(r, depth[v]);
        return r;
    }
};

struct BallTree {
    std::vector<int> vertices;  // BFS order, center first
    RootedForest tree;
};

// Hop-distance ball around v with its BFS tree. Neighbors are scanned in
// increasing (vertex id, edge id) order so the tree is deterministic.
inline BallTree ball_and_tree(const WeightedMultiGraph& g, int v, int radius,
                              const std::vector<char>* alive = nullptr) {
    const int n = g.num_vertices();
    if (v < 0 || v >= n) throw std::invalid_argument("ball center out of range");
    if (radius < 0) throw std::invalid_argument("negative radius");
    BallTree out{{}, RootedForest(n)};
    RootedForest& t = out.tree;
    t.in_forest[v] = 1;
    t.roots.push_back(v);
    out.vertices.push_back(v);
    std::vector<std::pair<int, int>> nb;
    for (std::size_t head = 0; head < out.vertices.size(); ++head) {
        int x = out.vertices[head];
        if (t.depth[x] >= radius) continue;
        nb.clear();
        for (int e : g.incident(x)) {
            int y = g.other(e, x);
            if (y == x || t.in_forest[y]) continue;
            if (alive && !(*alive)[y]) continue;
            nb.emplace_back(y, e);
        }
        std::sort(nb.begin(), nb.end());
        for (auto [y, e] : nb) {
            if (t.in_forest[y]) continue;
            t.in_forest[y] = 1;
            t.parent[y] = x;
            t.parent_edge[y] = e;
            t.depth[y] = t.depth[x] + 1;
            out.vertices.push_back(y);
        }
    }
    return out;
}

// Hop distances from a source; -1 when unreachable.
inline std::vector<int> bfs_distances(const WeightedMultiGraph& g, int s) {
    std::vector<int> d(g.num_vertices(), -1);
    std::vector<int> q{s};
    d[s] = 0;
    for (std::size_t h = 0; h < q.size(); ++h) {
        int x = q[h];
        for (int e : g.incident(x)) {
            int y = g.other(e, x);
            if (d[y] < 0) {
                d[y] = d[x] + 1;
                q.push_back(y);
            }
        }
    }
    return d;
}

struct QuotientMap {
    std::vector<int> vertex_to_supernode;
    std::vector<int> edge_to_quotient_edge;
};

// One supernode per group label; every edge survives, possibly as a self-loop.
// Labels must cover [0, k) for some k.
inline std::pair<WeightedMultiGraph, QuotientMap> quotient(const WeightedMultiGraph& g,
                                                           const std::vector<int>& group_of) {
    const int n = g.num_vertices();
    if (static_cast<int>(group_of.size()) != n) throw std::invalid_argument("group label size mismatch");
    int k = 0;
    for (int x : group_of) {
        if (x < 0) throw std::invalid_argument("negative group label");
        k = std::max(k, x + 1);
    }
    std::vector<char> seen(k, 0);
    for (int x : group_of) seen[x] = 1;
    for (char s : seen)
        if (!s) throw std::invalid_argument("group labels are not onto");
    std::vector<Edge> es;
    es.reserve(g.num_edges());
    QuotientMap qm{group_of, std::vector<int>(g.num_edges())};
    for (int id = 0; id < g.num_edges(); ++id) {
        const Edge& e = g.edge(id);
        es.push_back({group_of[e.u], group_of[e.v], e.w});
        qm.edge_to_quotient_edge[id] = id;
    }
    return {WeightedMultiGraph(k, std::move(es)), std::move(qm)};
}

inline std::pair<WeightedMultiGraph, QuotientMap> quotient(const WeightedMultiGraph& g,
                                                           const std::vector<std::vector<int>>& groups) {
    std::vector<int> label(g.num_vertices(), -1);
    for (std::size_t i = 0; i < groups.size(); ++i)
        for (int v : groups[i]) {
            if (v < 0 || v >= g.num_vertices() || label[v] >= 0)
                throw std::invalid_argument("groups do not partition the vertex set");
            label[v] = static_cast<int>(i);
        }
    for (int x : label)
        if (x < 0) throw std::invalid_argument("groups do not partition the vertex set");
    return quotient(g, label);
}

// Subgraph with translation tables back to the parent graph.
struct Subgraph {
    WeightedMultiGraph graph;
    std::vector<int> vertex_map;  // local -> parent vertex
    std::vector<int> edge_map;    // local -> parent edge
};

inline Subgraph induced_subgraph(const WeightedMultiGraph& g, const std::vector<int>& vertex_set) {
    std::vector<int> local(g.num_vertices(), -1);
    Subgraph s;
    for (int v : vertex_set) {
        if (v < 0 || v >= g.num_vertices()) throw std::invalid_argument("vertex out of range");
        if (local[v] >= 0) throw std::invalid_argument("duplicate vertex in set");
        local[v] = static_cast<int>(s.vertex_map.size());
        s.vertex_map.push_back(v);
    }
    std::vector<Edge> es;
    for (int id = 0; id < g.num_edges(); ++id) {
        const Edge& e = g.edge(id);
        if (local[e.u] >= 0 && local[e.v] >= 0) {
            es.push_back({local[e.u], local[e.v], e.w});
            s.edge_map.push_back(id);
        }
    }
    s.graph = WeightedMultiGraph(static_cast<int>(vertex_set.size()), std::move(es));
    return s;
}

// Keeps all n vertices and the listed edges.
inline Subgraph edge_subgraph(const WeightedMultiGraph& g, const std::vector<int>& edge_set) {
    Subgraph s;
    s.vertex_map.resize(g.num_vertices());
    std::iota(s.vertex_map.begin(), s.vertex_map.end(), 0);
    std::vector<char> seen(g.num_edges(), 0);
    std::vector<Edge> es;
    for (int id : edge_set) {
        if (id < 0 || id >= g.num_edges()) throw std::invalid_argument("edge id out of range");
        if (seen[id]) throw std::invalid_argument("duplicate edge in set");
        seen[id] = 1;
        es.push_back(g.edge(id));
        s.edge_map.push_back(id);
    }
    s.graph = WeightedMultiGraph(g.num_vertices(), std::move(es));
    return s;
}

inline std::vector<double> laplacian_matvec(const WeightedMultiGraph& g, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != g.num_vertices()) throw std::invalid_argument("dimension mismatch");
    std::vector<double> y(x.size(), 0.0);
    for (const Edge& e : g.edges()) {
        double f = e.w * (x[e.u] - x[e.v]);
        y[e.u] += f;
        y[e.v] -= f;
    }
    return y;
}

// x^T L x.
inline double laplacian_quadratic(const WeightedMultiGraph& g, const std::vector<double>& x) {
    double s = 0;
    for (const Edge& e : g.edges()) {
        double d = x[e.u] - x[e.v];
        s += e.w * d * d;
    }
    return s;
}

inline std::vector<int> connected_components(const WeightedMultiGraph& g, int* count = nullptr) {
    std::vector<int> comp(g.num_vertices(), -1);
    int c = 0;
    std::vector<int> stack;
    for (int s = 0; s < g.num_vertices(); ++s) {
        if (comp[s] >= 0) continue;
        comp[s] = c;
        stack.push_back(s);
        while (!stack.empty()) {
            int x = stack.back();
            stack.pop_back();
            for (int e : g.incident(x)) {
                int y = g.other(e, x);
                if (comp[y] < 0) {
                    comp[y] = c;
                    stack.push_back(y);
                }
            }
        }
        ++c;
    }
    if (count) *count = c;
    return comp;
}

// Subtracts the per-component mean so b lies in the range of the Laplacian.
inline void project_to_range(const std::vector<int>& comp, int ncomp, std::vector<double>& b) {
    std::vector<double> sum(ncomp, 0.0);
    std::vector<int> cnt(ncomp, 0);
    for (std::size_t i = 0; i < b.size(); ++i) {
        sum[comp[i]] += b[i];
        ++cnt[comp[i]];
    }
    for (std::size_t i = 0; i < b.size(); ++i) b[i] -= sum[comp[i]] / cnt[comp[i]];
}

inline void project_to_range(const WeightedMultiGraph& g, std::vector<double>& b) {
    int c = 0;
    auto comp = connected_components(g, &c);
    project_to_range(comp, c, b);
}

// Unit-capacity view helpers used across modules.
inline WeightedMultiGraph grid_graph(int rows, int cols, double w = 1.0) {
    std::vector<Edge> es;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            int v = r * cols + c;
            if (c + 1 < cols) es.push_back({v, v + 1, w});
            if (r + 1 < rows) es.push_back({v, v + cols, w});
        }
    return WeightedMultiGraph(rows * cols, std::move(es));
}

inline WeightedMultiGraph complete_graph(int n, double w = 1.0) {
    std::vector<Edge> es;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) es.push_back({i, j, w});
    return WeightedMultiGraph(n, std::move(es));
}

inline WeightedMultiGraph path_graph(int n, double w = 1.0) {
    std::vector<Edge> es;
    for (int i = 0; i + 1 < n; ++i) es.push_back({i, i + 1, w});
    return WeightedMultiGraph(n, std::move(es));
}

inline WeightedMultiGraph cycle_graph(int n, double w = 1.0) {
    std::vector<Edge> es;
    for (int i = 0; i < n; ++i) es.push_back({i, (i + 1) % n, w});
    return WeightedMultiGraph(n, std::move(es));
}

inline WeightedMultiGraph hypercube_graph(int dim) {
    int n = 1 << dim;
    std::vector<Edge> es;
    for (int v = 0; v < n; ++v)
        for (int b = 0; b < dim; ++b) {
            int u = v ^ (1 << b);
            if (v < u) es.push_back({v, u, 1.0});
        }
    return WeightedMultiGraph(n, std::move(es));
}

// Simple d-regular graph as a union of d/2 random Hamilton cycles (plus a
// random perfect matching when d is odd). A cycle or matching that would
// repeat an edge is redrawn.
// Pairing model, then double-edge swaps until no loop or repeated pair remains.
inline WeightedMultiGraph random_regular_graph(int n, int d, std::uint64_t seed) {
    if (d < 0 || d >= n || (1LL * n * d) % 2) throw std::invalid_argument("no simple d-regular graph on n vertices");
    std::mt19937_64 rng(seed);
    std::vector<int> stubs;
    for (int v = 0; v < n; ++v)
        for (int i = 0; i < d; ++i) stubs.push_back(v);
    std::shuffle(stubs.begin(), stubs.end(), rng);
    const int m = static_cast<int>(stubs.size()) / 2;
    std::vector<std::pair<int, int>> es(m);
    std::map<std::pair<int, int>, int> count;
    for (int i = 0; i < m; ++i) {
        es[i] = std::minmax(stubs[2 * i], stubs[2 * i + 1]);
        ++count[es[i]];
    }
    auto bad = [&](const std::pair<int, int>& e) { return e.first == e.second || count[e] > 1; };
    std::uniform_int_distribution<int> pick(0, std::max(0, m - 1));
    long long budget = 1000LL * (m + 1);
    for (int i = 0; i < m; ++i) {
        while (bad(es[i])) {
            if (--budget < 0) throw std::runtime_error("random_regular_graph: swap budget exhausted");
            int j = pick(rng);
            if (j == i) continue;
            auto [a, b] = es[i];
            auto [c, e] = es[j];
            if (rng() & 1) std::swap(c, e);
            auto x = std::minmax(a, c), y = std::minmax(b, e);
            if (x.first == x.second || y.first == y.second || x == y || count[x] || count[y]) continue;
            --count[es[i]];
            --count[es[j]];
            es[i] = x;
            es[j] = y;
            ++count[x];
            ++count[y];
            break;
        }
    }
    std::vector<Edge> out;
    out.reserve(m);
    for (auto [u, v] : es) out.push_back({u, v, 1.0});
    return WeightedMultiGraph(n, std::move(out));
}

// Margulis-Gabber-Galil expander on Z_s x Z_s: 8-regular multigraph, loops
// and parallel edges included.
inline WeightedMultiGraph margulis_graph(int s) {
    if (s < 2) throw std::invalid_argument("margulis_graph: side must be at least 2");
    auto id = [s](long long x, long long y) { return static_cast<int>(((x % s) * s) + (y % s)); };
    std::vector<Edge> es;
    for (int x = 0; x < s; ++x)
        for (int y = 0; y < s; ++y) {
            int v = id(x, y);
            es.push_back({v, id(x, x + y), 1.0});
            es.push_back({v, id(x, x + y + 1), 1.0});
            es.push_back({v, id(x + y, y), 1.0});
            es.push_back({v, id(x + y + 1, y), 1.0});
        }
    return WeightedMultiGraph(s * s, std::move(es));
}

inline WeightedMultiGraph petersen_graph() {
    std::vector<Edge> es;
    for (int i = 0; i < 5; ++i) {
        es.push_back({i, (i + 1) % 5, 1.0});
        es.push_back({i, i + 5, 1.0});
        es.push_back({5 + i, 5 + (i + 2) % 5, 1.0});
    }
    return WeightedMultiGraph(10, std::move(es));
}

}  // namespace lapsolve
