#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"
#include "graph.hpp"
#include "rng.hpp"
#include "spectral_subgraph.hpp"

namespace lapsolve {

// Laplacian in CSR form: loops dropped, parallel edges merged.
class CsrLaplacian {
public:
    CsrLaplacian() = default;

    explicit CsrLaplacian(const WeightedMultiGraph& g) : n_(g.num_vertices()) {
        std::vector<std::pair<int, int>> cnt;
        off_.assign(n_ + 1, 0);
        for (const Edge& e : g.edges())
            if (e.u != e.v) {
                ++off_[e.u + 1];
                ++off_[e.v + 1];
            }
        for (int i = 0; i < n_; ++i) off_[i + 1] += off_[i];
        std::vector<int> col(off_[n_]);
        std::vector<double> val(off_[n_]);
        std::vector<int> pos(off_.begin(), off_.end() - 1);
        for (const Edge& e : g.edges())
            if (e.u != e.v) {
                col[pos[e.u]] = e.v;
                val[pos[e.u]++] = e.w;
                col[pos[e.v]] = e.u;
                val[pos[e.v]++] = e.w;
            }
        // merge duplicates row by row
        diag_.assign(n_, 0.0);
        std::vector<int> slot(n_, -1);
        std::vector<int> noff(n_ + 1, 0);
        for (int u = 0; u < n_; ++u) {
            int start = static_cast<int>(col_.size());
            for (int i = off_[u]; i < off_[u + 1]; ++i) {
                int v = col[i];
                diag_[u] += val[i];
                if (slot[v] >= start) {
                    val_[slot[v]] += val[i];
                } else {
                    slot[v] = static_cast<int>(col_.size());
                    col_.push_back(v);
                    val_.push_back(val[i]);
                }
            }
            noff[u + 1] = static_cast<int>(col_.size());
        }
        off_ = std::move(noff);
        comp_ = connected_components(g, &ncomp_);
    }

    int size() const { return n_; }
    long long nnz() const { return static_cast<long long>(col_.size()); }
    const std::vector<double>& diagonal() const { return diag_; }
    const std::vector<int>& components() const { return comp_; }
    int num_components() const { return ncomp_; }

    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        y.resize(n_);
        for (int u = 0; u < n_; ++u) {
            double s = diag_[u] * x[u];
            for (int i = off_[u]; i < off_[u + 1]; ++i) s -= val_[i] * x[col_[i]];
            y[u] = s;
        }
    }
    std::vector<double> operator()(const std::vector<double>& x) const {
        std::vector<double> y;
        apply(x, y);
        return y;
    }
    double quadratic(const std::vector<double>& x) const {
        std::vector<double> y;
        apply(x, y);
        double s = 0;
        for (int i = 0; i < n_; ++i) s += x[i] * y[i];
        return std::max(s, 0.0);
    }
    void project(std::vector<double>& b) const { project_to_range(comp_, ncomp_, b); }

private:
    int n_ = 0;
    std::vector<int> off_;
    std::vector<int> col_;
    std::vector<double> val_;
    std::vector<double> diag_;
    std::vector<int> comp_;
    int ncomp_ = 0;
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

struct CgStats {
    int iterations = 0;
    double rel_residual = 0;
};

// Jacobi-preconditioned CG on L x = b with b projected onto the range. Stops
// at relative residual tol or after max_iters (default 10n + 1000).
inline std::vector<double> conjugate_gradient(const CsrLaplacian& L, std::vector<double> b, double tol,
                                              CgStats* st = nullptr, int max_iters = 0) {
    const int n = L.size();
    L.project(b);
    std::vector<double> x(n, 0.0);
    double bn = norm2(b);
    if (st) *st = {};
    if (bn == 0) return x;
    if (max_iters <= 0) max_iters = 10 * n + 1000;
    std::vector<double> r = b, z(n), p(n), q(n);
    const auto& d = L.diagonal();
    auto precond = [&] {
        for (int i = 0; i < n; ++i) z[i] = d[i] > 0 ? r[i] / d[i] : 0.0;
    };
    precond();
    p = z;
    double rz = dot(r, z);
    int it = 0;
    double rn = bn;
    for (; it < max_iters && rn > tol * bn; ++it) {
        L.apply(p, q);
        double pq = dot(p, q);
        if (!(pq > 0)) break;
        double a = rz / pq;
        for (int i = 0; i < n; ++i) {
            x[i] += a * p[i];
            r[i] -= a * q[i];
        }
        rn = norm2(r);
        precond();
        double rz2 = dot(r, z);
        double beta = rz2 / rz;
        rz = rz2;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    L.project(x);
    if (st) {
        st->iterations = it;
        st->rel_residual = rn / bn;
    }
    return x;
}

inline std::vector<double> conjugate_gradient(const WeightedMultiGraph& g, std::vector<double> b, double tol,
                                              CgStats* st = nullptr) {
    return conjugate_gradient(CsrLaplacian(g), std::move(b), tol, st);
}

// Solve(G, b, eps) in the sense of an eps-approximate Laplacian solver.
using LaplacianSolveFn =
    std::function<std::vector<double>(const WeightedMultiGraph&, const std::vector<double>&, double)>;

// ---------------------------------------------------------------- Sample

// Precomputed draw tables for repeated sampling with fixed tau.
class TauSampler {
public:
    TauSampler(const std::vector<double>& tau, double delta) : tau_(tau), delta_(delta) {
        if (!(delta > 0 && delta < 1)) throw std::invalid_argument("sample delta must lie in (0,1)");
        for (double t : tau)
            if (!(t >= 0) || !std::isfinite(t)) throw std::invalid_argument("tau must be finite and nonnegative");
        s_ = std::accumulate(tau.begin(), tau.end(), 0.0);
        t_ = s_ / delta;
        r_lo_ = static_cast<long long>(std::ceil(t_));
        r_hi_ = std::max(r_lo_, static_cast<long long>(std::floor(2 * t_ - 1)));
        if (s_ <= 0) r_lo_ = r_hi_ = 0;
        cond_.resize(tau.size());
        double suffix = 0;
        for (std::size_t i = tau.size(); i-- > 0;) {
            suffix += tau[i];
            cond_[i] = suffix > 0 ? std::min(1.0, tau[i] / suffix) : 0.0;
        }
        if (s_ > 0) pick_ = std::discrete_distribution<int>(tau.begin(), tau.end());
    }

    double s() const { return s_; }
    double t() const { return t_; }
    long long r_lo() const { return r_lo_; }
    long long r_hi() const { return r_hi_; }
    double delta() const { return delta_; }
    const std::vector<double>& tau() const { return tau_; }

    long long draw_r(Rng& rng) const {
        if (r_hi_ <= 0) return 0;
        return std::uniform_int_distribution<long long>(r_lo_, r_hi_)(rng);
    }

    // Multiplicity of each index among r draws proportional to tau. Long runs
    // use sequential conditional binomials, which give the same multinomial law
    // as r single draws.
    std::vector<long long> counts(long long r, Rng& rng) const {
        std::vector<long long> c(tau_.size(), 0);
        if (r <= 0) return c;
        if (r < static_cast<long long>(tau_.size())) {
            auto pick = pick_;
            for (long long j = 0; j < r; ++j) ++c[pick(rng)];
            return c;
        }
        long long rem = r;
        for (std::size_t i = 0; i < tau_.size() && rem > 0; ++i) {
            if (cond_[i] <= 0) continue;
            long long k = cond_[i] >= 1 ? rem : std::binomial_distribution<long long>(rem, cond_[i])(rng);
            c[i] = k;
            rem -= k;
        }
        return c;
    }

private:
    std::vector<double> tau_;
    double delta_;
    double s_ = 0, t_ = 0;
    long long r_lo_ = 0, r_hi_ = 0;
    std::vector<double> cond_;
    std::discrete_distribution<int> pick_;
};

struct SampledPreconditioner {
    WeightedMultiGraph Z;
    long long draws = 0;
    int new_edges = 0;  // sampled edges not parallel to a base edge
};

// Z = base + sum over r draws of (delta / tau_e) w_e b_e b_e^T. With base_of,
// an edge of g lying on top of a base edge adds its weight to that edge
// instead of creating a new one.
inline SampledPreconditioner sample_with(const WeightedMultiGraph& g, const WeightedMultiGraph& base,
                                         const TauSampler& ts, Rng& rng, const std::vector<int>* base_of = nullptr) {
    if (static_cast<int>(ts.tau().size()) != g.num_edges()) throw std::invalid_argument("tau size mismatch");
    SampledPreconditioner out;
    out.draws = ts.draw_r(rng);
    auto c = ts.counts(out.draws, rng);
    std::vector<Edge> es = base.edges();
    for (int e = 0; e < g.num_edges(); ++e) {
        if (!c[e]) continue;
        const Edge& ed = g.edge(e);
        double add = static_cast<double>(c[e]) * ts.delta() / ts.tau()[e] * ed.w;
        int b = base_of ? (*base_of)[e] : -1;
        if (b >= 0) {
            es[b].w += add;
        } else {
            es.push_back({ed.u, ed.v, add});
            ++out.new_edges;
        }
    }
    out.Z = WeightedMultiGraph(g.num_vertices(), std::move(es));
    return out;
}

inline SampledPreconditioner sample_preconditioner(const WeightedMultiGraph& g, const WeightedMultiGraph& base,
                                                   const std::vector<double>& tau, double delta, Rng& rng,
                                                   const std::vector<int>* base_of = nullptr) {
    if (g.num_vertices() != base.num_vertices()) throw std::invalid_argument("vertex count mismatch");
    return sample_with(g, base, TauSampler(tau, delta), rng, base_of);
}

// ---------------------------------------------------------------- elimination

struct EliminationStats {
    int eliminated = 0;
    int core_vertices = 0;
    int core_edges = 0;
    int inner_calls = 0;
};

// Greedy elimination of degree-1 and degree-2 vertices (partial Cholesky).
// Degrees count distinct neighbours; parallel edges are merged on input and
// whenever a series edge lands on an existing one.
class PartialCholesky {
public:
    explicit PartialCholesky(const WeightedMultiGraph& g) : n_(g.num_vertices()) {
        std::vector<std::vector<Nbr>> adj(n_);
        std::vector<int> slot(n_, -1);
        {
            std::vector<std::vector<Nbr>> raw(n_);
            for (const Edge& e : g.edges())
                if (e.u != e.v) {
                    raw[e.u].push_back({e.v, e.w});
                    raw[e.v].push_back({e.u, e.w});
                }
            for (int u = 0; u < n_; ++u) {
                for (const Nbr& x : raw[u]) {
                    if (slot[x.v] >= 0) {
                        adj[u][slot[x.v]].w += x.w;
                    } else {
                        slot[x.v] = static_cast<int>(adj[u].size());
                        adj[u].push_back(x);
                    }
                }
                for (const Nbr& x : adj[u]) slot[x.v] = -1;
            }
        }
        std::vector<char> gone(n_, 0);
        std::vector<int> queue;
        for (int v = 0; v < n_; ++v)
            if (adj[v].size() <= 2) queue.push_back(v);
        auto drop = [&](int u, int v) -> double {
            auto& a = adj[u];
            for (std::size_t i = 0; i < a.size(); ++i)
                if (a[i].v == v) {
                    double w = a[i].w;
                    a[i] = a.back();
                    a.pop_back();
                    return w;
                }
            return 0;
        };
        auto link = [&](int u, int v, double w) {
            for (auto& x : adj[u])
                if (x.v == v) {
                    x.w += w;
                    return false;
                }
            adj[u].push_back({v, w});
            return true;
        };
        while (!queue.empty()) {
            int v = queue.back();
            queue.pop_back();
            if (gone[v] || adj[v].size() > 2) continue;
            gone[v] = 1;
            Step s{v, -1, -1, 0, 0};
            if (adj[v].size() >= 1) {
                s.a = adj[v][0].v;
                s.wa = adj[v][0].w;
            }
            if (adj[v].size() == 2) {
                s.b = adj[v][1].v;
                s.wb = adj[v][1].w;
            }
            if (s.a >= 0) drop(s.a, v);
            if (s.b >= 0) {
                drop(s.b, v);
                double w = s.wa * s.wb / (s.wa + s.wb);
                link(s.a, s.b, w);
                link(s.b, s.a, w);
            }
            adj[v].clear();
            steps_.push_back(s);
            if (s.a >= 0 && adj[s.a].size() <= 2) queue.push_back(s.a);
            if (s.b >= 0 && adj[s.b].size() <= 2) queue.push_back(s.b);
        }
        local_.assign(n_, -1);
        for (int v = 0; v < n_; ++v)
            if (!gone[v]) {
                local_[v] = static_cast<int>(core_vertices_.size());
                core_vertices_.push_back(v);
            }
        std::vector<Edge> es;
        for (int v : core_vertices_)
            for (const Nbr& x : adj[v])
                if (v < x.v) es.push_back({local_[v], local_[x.v], x.w});
        core_ = WeightedMultiGraph(static_cast<int>(core_vertices_.size()), std::move(es));
    }

    const WeightedMultiGraph& core() const { return core_; }
    const std::vector<int>& core_vertices() const { return core_vertices_; }
    int eliminated() const { return static_cast<int>(steps_.size()); }

    // Exact reduction of b, one inner call on the core (skipped when the core
    // has no edges), exact back-substitution.
    std::vector<double> solve(std::vector<double> b, const LaplacianSolveFn& inner, double eps,
                              int* inner_calls = nullptr) const {
        if (static_cast<int>(b.size()) != n_) throw std::invalid_argument("dimension mismatch");
        for (const Step& s : steps_) {
            if (s.b >= 0) {
                double f = s.wa / (s.wa + s.wb);
                b[s.a] += b[s.v] * f;
                b[s.b] += b[s.v] * (1 - f);
            } else if (s.a >= 0) {
                b[s.a] += b[s.v];
            }
        }
        std::vector<double> x(n_, 0.0);
        if (core_.num_edges() > 0) {
            std::vector<double> bc(core_vertices_.size());
            for (std::size_t i = 0; i < bc.size(); ++i) bc[i] = b[core_vertices_[i]];
            auto xc = inner(core_, bc, eps);
            for (std::size_t i = 0; i < bc.size(); ++i) x[core_vertices_[i]] = xc[i];
            if (inner_calls) ++*inner_calls;
        }
        for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
            const Step& s = *it;
            if (s.b >= 0)
                x[s.v] = (s.wa * x[s.a] + s.wb * x[s.b] + b[s.v]) / (s.wa + s.wb);
            else if (s.a >= 0)
                x[s.v] = x[s.a] + b[s.v] / s.wa;
        }
        return x;
    }

private:
    struct Nbr {
        int v;
        double w;
    };
    struct Step {
        int v, a, b;
        double wa, wb;
    };
    int n_;
    std::vector<Step> steps_;
    std::vector<int> local_;
    std::vector<int> core_vertices_;
    WeightedMultiGraph core_;
};

inline std::vector<double> eliminate_and_solve(const WeightedMultiGraph& g, const LaplacianSolveFn& inner,
                                               std::vector<double> b, double eps, EliminationStats* st = nullptr) {
    project_to_range(g, b);
    PartialCholesky pc(g);
    int calls = 0;
    auto x = pc.solve(std::move(b), inner, eps, &calls);
    if (st) {
        st->eliminated = pc.eliminated();
        st->core_vertices = static_cast<int>(pc.core_vertices().size());
        st->core_edges = pc.core().num_edges();
        st->inner_calls = calls;
    }
    return x;
}

// ---------------------------------------------------------------- Richardson

struct RichardsonOptions {
    double iters_coeff = 200;
    double size_check_coeff = 1600;
    double step = 0.1;
    double delta = 0.1;
    double p = std::sqrt(10.0) / 3.0 - 1.0 / 3.0;

    static RichardsonOptions from_config(const SolverConfig& cfg) {
        return {cfg.richardson_iters_coeff, cfg.size_check_coeff, cfg.richardson_step, cfg.sample_delta, cfg.p};
    }
    long long iterations(double eps) const {
        if (eps >= 1) return 0;
        return static_cast<long long>(std::ceil(iters_coeff * std::log(1.0 / eps)));
    }
};

struct RichardsonStats {
    long long iterations = 0;
    long long updates = 0;
    long long skipped = 0;
    long long draws = 0;
    long long sampled_edges_total = 0;  // sum of |E(H_i)|
    int sampled_edges_max = 0;
    int core_vertices_max = 0;
    long long inner_calls = 0;

    void merge(const RichardsonStats& o) {
        iterations += o.iterations;
        updates += o.updates;
        skipped += o.skipped;
        draws += o.draws;
        sampled_edges_total += o.sampled_edges_total;
        sampled_edges_max = std::max(sampled_edges_max, o.sampled_edges_max);
        core_vertices_max = std::max(core_vertices_max, o.core_vertices_max);
        inner_calls += o.inner_calls;
    }
};

using IterateObserver = std::function<void(long long, const std::vector<double>&)>;

// Solves L_G x = b by Richardson steps preconditioned with Sample(G, base,
// tau). tau must overestimate leverage through base.
class PreconRichardson {
public:
    PreconRichardson(const WeightedMultiGraph& g, const WeightedMultiGraph& base, const std::vector<double>& tau,
                     RichardsonOptions opt, std::vector<int> base_of = {})
        : g_(g), base_(base), L_(g), sampler_(tau, opt.delta), opt_(opt), base_of_(std::move(base_of)) {
        if (g.num_vertices() != base.num_vertices()) throw std::invalid_argument("vertex count mismatch");
        if (!base_of_.empty() && static_cast<int>(base_of_.size()) != g.num_edges())
            throw std::invalid_argument("base_of size mismatch");
        for (double t : tau) tau_norm_pp_ += std::pow(t, opt.p);
    }

    double tau_norm_pp() const { return tau_norm_pp_; }
    double size_limit() const { return opt_.size_check_coeff * tau_norm_pp_ + base_.num_edges(); }
    const CsrLaplacian& laplacian() const { return L_; }
    const TauSampler& sampler() const { return sampler_; }

    std::vector<double> solve(std::vector<double> b, double eps, const LaplacianSolveFn& inner, double inner_eps,
                              Rng& rng, RichardsonStats* st = nullptr, const IterateObserver& obs = {}) const {
        L_.project(b);
        const int n = g_.num_vertices();
        std::vector<double> x(n, 0.0), r(n);
        const long long iters = opt_.iterations(eps);
        RichardsonStats loc;
        const std::vector<int>* bo = base_of_.empty() ? nullptr : &base_of_;
        for (long long i = 0; i < iters; ++i) {
            auto H = sample_with(g_, base_, sampler_, rng, bo);
            ++loc.iterations;
            loc.draws += H.draws;
            int eh = H.Z.num_edges();
            loc.sampled_edges_total += eh;
            loc.sampled_edges_max = std::max(loc.sampled_edges_max, eh);
            if (eh <= size_limit()) {
                L_.apply(x, r);
                for (int v = 0; v < n; ++v) r[v] -= b[v];
                EliminationStats es;
                auto y = eliminate_and_solve(H.Z, inner, r, inner_eps, &es);
                loc.core_vertices_max = std::max(loc.core_vertices_max, es.core_vertices);
                loc.inner_calls += es.inner_calls;
                for (int v = 0; v < n; ++v) x[v] -= opt_.step * y[v];
                ++loc.updates;
            } else {
                ++loc.skipped;
            }
            if (obs) obs(i + 1, x);
        }
        if (st) st->merge(loc);
        return x;
    }

private:
    const WeightedMultiGraph& g_;
    const WeightedMultiGraph& base_;
    CsrLaplacian L_;
    TauSampler sampler_;
    RichardsonOptions opt_;
    std::vector<int> base_of_;
    double tau_norm_pp_ = 0;
};

inline std::vector<double> precon_richardson(const WeightedMultiGraph& g, const WeightedMultiGraph& base,
                                             const std::vector<double>& tau, const std::vector<double>& b, double eps,
                                             const LaplacianSolveFn& inner, double inner_eps, Rng& rng,
                                             RichardsonOptions opt = {}, RichardsonStats* st = nullptr,
                                             const IterateObserver& obs = {}) {
    return PreconRichardson(g, base, tau, opt).solve(b, eps, inner, inner_eps, rng, st, obs);
}

// ---------------------------------------------------------------- AGD

struct AgdSchedule {
    double kappa = 1;
    double alpha = 0;
    double eta = 0;
    double beta = 0;
    long long T = 0;

    static AgdSchedule make(double kappa, double eps) {
        if (!(kappa >= 1)) throw std::invalid_argument("kappa must be at least 1");
        if (!(eps > 0 && eps < 1)) throw std::invalid_argument("epsilon must lie in (0,1)");
        AgdSchedule s;
        double r = std::sqrt(kappa);
        s.kappa = kappa;
        s.alpha = 2 * r / (1 + 2 * r);
        s.eta = 2 * kappa;
        s.beta = 1 - 1 / (2 * r);
        s.T = static_cast<long long>(std::ceil(4 * r * std::log(2 / eps)));
        return s;
    }
};

using VectorMap = std::function<std::vector<double>(const std::vector<double>&)>;
using AgdObserver = std::function<void(long long, const std::vector<double>&, const std::vector<double>&)>;

// Three-sequence recursion: y = a x + (1-a) v, x' = y - g, v' = b v + (1-b)(y - eta g),
// g = solve_B(A y - b). obs sees (t, x_t, v_t) for t = 1..T.
inline std::vector<double> precon_noisy_agd(const VectorMap& apply_A, const std::vector<double>& b, double eps,
                                            const VectorMap& solve_B, double kappa, const AgdObserver& obs = {}) {
    const AgdSchedule s = AgdSchedule::make(kappa, eps);
    const std::size_t n = b.size();
    std::vector<double> x(n, 0.0), v(n, 0.0), y(n);
    for (long long t = 0; t < s.T; ++t) {
        for (std::size_t i = 0; i < n; ++i) y[i] = s.alpha * x[i] + (1 - s.alpha) * v[i];
        auto r = apply_A(y);
        for (std::size_t i = 0; i < n; ++i) r[i] -= b[i];
        auto g = solve_B(r);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = y[i] - g[i];
            v[i] = s.beta * v[i] + (1 - s.beta) * (y[i] - s.eta * g[i]);
        }
        if (obs) obs(t + 1, x, v);
    }
    return x;
}

// ---------------------------------------------------------------- recursion

// G' = G + (eta-1)H with H's edges reweighted in place, base = eta H.
struct PreconditionerGraph {
    WeightedMultiGraph Gp;
    WeightedMultiGraph base;
    std::vector<int> base_of;  // edge of Gp -> edge of base, -1 off H
    std::vector<double> tau;   // overestimates of leverage through base
    double eta = 1;
};

// Off H, tau' = tau/eta. An H edge carries weight eta w_e in G', so its
// leverage through eta H is w_e R_H(e) <= tau_e; those keep tau_e.
inline PreconditionerGraph make_preconditioner_graph(const WeightedMultiGraph& g, const std::vector<int>& H,
                                                     const std::vector<double>& tau, double eta) {
    if (!(eta >= 1)) throw std::invalid_argument("eta must be at least 1");
    if (static_cast<int>(tau.size()) != g.num_edges()) throw std::invalid_argument("tau size mismatch");
    PreconditionerGraph P;
    P.eta = eta;
    P.base_of.assign(g.num_edges(), -1);
    std::vector<Edge> gp = g.edges(), be;
    for (int e : H) {
        P.base_of[e] = static_cast<int>(be.size());
        gp[e].w *= eta;
        be.push_back(gp[e]);
    }
    P.tau.resize(g.num_edges());
    for (int e = 0; e < g.num_edges(); ++e) P.tau[e] = P.base_of[e] >= 0 ? tau[e] : tau[e] / eta;
    P.Gp = WeightedMultiGraph(g.num_vertices(), std::move(gp));
    P.base = WeightedMultiGraph(g.num_vertices(), std::move(be));
    return P;
}

struct LevelStats {
    int level = 0;
    long long calls = 0;
    long long base_case_calls = 0;
    long long guard_fallbacks = 0;  // recursion that did not shrink the graph
    long long cg_iterations = 0;
    long long agd_iterations = 0;
    RichardsonStats richardson;
    int n_max = 0;
    long long m_max = 0;
    // last recursive (non-base) call at this level
    long long h_edges = 0;
    double tau_norm_pp = 0;
    double kappa = 0;
    double eta = 0;
    double k = 0;
};

struct SolveReport {
    std::vector<LevelStats> levels;
    std::vector<double> residual_trajectory;  // top level, ||L x_t - b|| / ||b||
    std::vector<double> error_trajectory;     // top level, relative A-norm squared, when a reference is known
    double final_residual = 0;
    double final_error = -1;
    double wall_seconds = 0;
    int components = 0;
    std::string base_case_solver = "jacobi-cg";

    LevelStats& level(int l) {
        while (static_cast<int>(levels.size()) <= l) {
            levels.emplace_back();
            levels.back().level = static_cast<int>(levels.size()) - 1;
        }
        return levels[l];
    }
};

inline double eta_from_formula(const SolverConfig& cfg, int n, long long m, double kappa) {
    if (cfg.eta_override > 0) return std::max(1.0, cfg.eta_override);
    double ll = std::log(std::max(std::log(std::max(n, 3)), 1.0 + 1e-12));
    double ex = 2.0 / (2.0 * cfg.p - 1.0) + cfg.eta_slack;
    return std::max(1.0, cfg.eta_coeff * std::pow(ll * kappa / static_cast<double>(m), ex));
}

// kappa(m): measured ||tau||_p^p raised to the envelope coeff m (ln(k ln n))^{4p/(1-p)}.
inline double kappa_envelope(const SolverConfig& cfg, int n, long long m, double k, double measured) {
    if (cfg.kappa_env_coeff <= 0) return measured;
    double l = std::log(std::max(k * std::log(std::max(n, 3)), 1.0 + 1e-12));
    return std::max(measured, cfg.kappa_env_coeff * static_cast<double>(m) * std::pow(l, 4 * cfg.p / (1 - cfg.p)));
}

class RecursiveSolver {
public:
    RecursiveSolver(const SolverConfig& cfg, SolveReport* rep) : cfg_(cfg), rep_(rep ? rep : &own_) {}

    std::vector<double> solve(const WeightedMultiGraph& g_in, std::vector<double> b, double eps,
                              const SeedSplitter& seeds, int level = 0, long long parent_m = -1,
                              const std::vector<double>* reference = nullptr) {
        const int n = g_in.num_vertices();
        if (static_cast<int>(b.size()) != n) throw std::invalid_argument("rhs dimension mismatch");
        std::vector<Edge> es;
        for (const Edge& e : g_in.edges())
            if (e.u != e.v) es.push_back(e);
        WeightedMultiGraph g(n, std::move(es));
        const long long m = g.num_edges();
        CsrLaplacian L(g);
        L.project(b);
        LevelStats& ls = rep_->level(level);
        ++ls.calls;
        ls.n_max = std::max(ls.n_max, n);
        ls.m_max = std::max(ls.m_max, m);
        if (level == 0) rep_->components = L.num_components();
        if (norm2(b) == 0) return std::vector<double>(n, 0.0);

        bool base = m <= cfg_.base_case_edge_threshold || level >= cfg_.max_levels;
        if (!base && parent_m >= 0 && m >= parent_m) {
            ++ls.guard_fallbacks;
            base = true;
        }
        if (base) {
            CgStats cs;
            auto x = conjugate_gradient(L, b, cfg_.base_case_tol, &cs);
            ++rep_->level(level).base_case_calls;
            rep_->level(level).cg_iterations += cs.iterations;
            if (level == 0) record(L, b, x, reference);
            return x;
        }

        const double ln = std::log(std::max(n, 3));
        const double k = cfg_.akpw_k_override > 0 ? cfg_.akpw_k_override : std::max(3.0, m / (ln * ln));
        auto D = spectral_subgraph(g, k, cfg_, seeds.child("lowstretch"));
        const double kappa = kappa_envelope(cfg_, n, m, k, D.kappa_measured);
        const double eta = eta_from_formula(cfg_, n, m, kappa);
        const double kappa_agd = cfg_.agd_kappa_override > 0 ? cfg_.agd_kappa_override : eta;
        PreconditionerGraph P = make_preconditioner_graph(g, D.H, D.tau, eta);
        {
            LevelStats& l2 = rep_->level(level);
            l2.h_edges = static_cast<long long>(D.H.size());
            l2.tau_norm_pp = D.kappa_measured;
            l2.kappa = kappa;
            l2.eta = eta;
            l2.k = k;
        }

        PreconRichardson rich(P.Gp, P.base, P.tau, RichardsonOptions::from_config(cfg_), P.base_of);
        const double inner_eps = cfg_.inner_error(n);
        const double rich_eps = 1.0 / (10.0 * kappa_agd);
        long long calls = 0, rec_calls = 0;
        LaplacianSolveFn rec = [&, level, m](const WeightedMultiGraph& h, const std::vector<double>& rhs, double e) {
            return solve(h, rhs, e, seeds.child("recurse", rec_calls++), level + 1, m);
        };
        VectorMap solve_B = [&](const std::vector<double>& r) {
            Rng rng = seeds.stream("richardson", calls++);
            RichardsonStats st;
            auto y = rich.solve(r, rich_eps, rec, inner_eps, rng, &st);
            rep_->level(level).richardson.merge(st);
            return y;
        };
        VectorMap apply_A = [&](const std::vector<double>& x) { return L(x); };
        AgdObserver obs;
        if (level == 0)
            obs = [&](long long, const std::vector<double>& x, const std::vector<double>&) {
                std::vector<double> r = L(x);
                for (int i = 0; i < n; ++i) r[i] -= b[i];
                rep_->residual_trajectory.push_back(norm2(r) / norm2(b));
                if (reference) rep_->error_trajectory.push_back(relative_error(L, x, *reference));
            };
        auto x = precon_noisy_agd(apply_A, b, eps, solve_B, kappa_agd, obs);
        rep_->level(level).agd_iterations += AgdSchedule::make(kappa_agd, eps).T;
        L.project(x);
        if (level == 0) record(L, b, x, reference);
        return x;
    }

    static double relative_error(const CsrLaplacian& L, const std::vector<double>& x, const std::vector<double>& ref) {
        std::vector<double> d(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - ref[i];
        double den = L.quadratic(ref);
        return den > 0 ? L.quadratic(d) / den : L.quadratic(d);
    }

private:
    void record(const CsrLaplacian& L, const std::vector<double>& b, const std::vector<double>& x,
                const std::vector<double>* reference) {
        std::vector<double> r = L(x);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
        rep_->final_residual = norm2(r) / norm2(b);
        if (reference) rep_->final_error = relative_error(L, x, *reference);
    }

    SolverConfig cfg_;
    SolveReport own_;
    SolveReport* rep_;
};

// eps-approximate solve of L_G x = b. b is projected onto the range first;
// reference (an exact solution) only feeds the report's error trajectory.
inline std::vector<double> recursive_solver(const WeightedMultiGraph& g, const std::vector<double>& b, double eps,
                                            const SolverConfig& cfg, std::uint64_t seed, SolveReport* rep = nullptr,
                                            const std::vector<double>* reference = nullptr) {
    if (!(eps > 0 && eps < 1)) throw std::invalid_argument("epsilon must lie in (0,1)");
    auto t0 = std::chrono::steady_clock::now();
    SolveReport local;
    SolveReport* r = rep ? rep : &local;
    RecursiveSolver rs(cfg, r);
    auto x = rs.solve(g, b, eps, SeedSplitter(seed), 0, -1, reference);
    r->wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return x;
}

}  // namespace lapsolve
