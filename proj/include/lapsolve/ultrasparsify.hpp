#pragma once

// Dense ultrasparsifier construction: greedy Sherman-Morrison vector removal
// followed by barrier-potential augmentation. Cubic per phase, for n <= 200.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "config.hpp"
#include "graph.hpp"
#include "rng.hpp"

namespace lapsolve {

// ---------------------------------------------------------------- removal

struct TraceRemovalResult {
    std::vector<int> selection;     // sorted indices kept
    double trace = 0;               // tr[B^-1 A] at the end, from a fresh inverse
    std::vector<double> trajectory; // trace after each removal, starting with the initial value
    std::vector<int> sizes;         // |S| before each removal
    double max_sm_drift = 0;        // worst relative Frobenius gap at a refresh
    int refreshes = 0;
    int rejected = 0;               // candidates skipped for 1 - v^T B^-1 v below tolerance
    double bound = 0;               // m k
    bool bound_ok = false;
    bool trajectory_ok = false;     // per-step (|S|-n+1)/(|S|-n) growth respected
};

// Vectors v_1..v_m as columns, current selection S, B = sum_S v v^T and its
// inverse kept up to date by rank-one downdates.
class RankOneSystem {
public:
    explicit RankOneSystem(Eigen::MatrixXd V, int refresh_every = 50)
        : V_(std::move(V)), refresh_every_(refresh_every), in_(V_.cols(), 1) {
        A_ = V_ * V_.transpose();
        size_ = static_cast<int>(V_.cols());
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A_);
        if (lu.rank() < A_.rows()) throw std::invalid_argument("sum of v v^T is not full rank");
        refresh();
        max_drift_ = 0;
        refreshes_ = 0;
    }

    int n() const { return static_cast<int>(V_.rows()); }
    int m() const { return static_cast<int>(V_.cols()); }
    int size() const { return size_; }
    bool selected(int i) const { return in_[i]; }
    double trace() const { return trace_; }
    const Eigen::MatrixXd& A() const { return A_; }
    const Eigen::MatrixXd& Binv() const { return Binv_; }
    double max_drift() const { return max_drift_; }
    int refreshes() const { return refreshes_; }

    Eigen::MatrixXd B() const {
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n(), n());
        for (int i = 0; i < m(); ++i)
            if (in_[i]) B.noalias() += V_.col(i) * V_.col(i).transpose();
        return B;
    }

    // Trace after removing i, or +inf if the downdate would lose rank.
    double trace_if_removed(int i, double tol) const {
        if (!in_[i] || d_[i] <= tol) return std::numeric_limits<double>::infinity();
        return trace_ + num_[i] / d_[i];
    }

    // Removes the index with the smallest trace increase. Returns it, or -1.
    int remove_best(double tol, int* rejected = nullptr) {
        int best = -1;
        double bv = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m(); ++i) {
            if (!in_[i]) continue;
            if (d_[i] <= tol) {
                if (rejected) ++*rejected;
                continue;
            }
            double inc = num_[i] / d_[i];
            if (inc < bv) {
                bv = inc;
                best = i;
            }
        }
        if (best >= 0) remove(best);
        return best;
    }

    void remove(int r) {
        const double dr = d_[r];
        Eigen::VectorXd x = X_.col(r);
        Eigen::VectorXd c = V_.transpose() * x;
        Eigen::VectorXd z = A_ * x;
        Eigen::VectorXd xz = X_.transpose() * z;
        const double xAx = x.dot(z);
        trace_ += num_[r] / dr;
        Binv_.noalias() += x * x.transpose() / dr;
        X_.noalias() += x * c.transpose() / dr;
        for (int i = 0; i < m(); ++i) {
            num_[i] += 2 * c[i] * xz[i] / dr + c[i] * c[i] * xAx / (dr * dr);
            d_[i] -= c[i] * c[i] / dr;
        }
        in_[r] = 0;
        --size_;
        if (++since_ >= refresh_every_) refresh();
    }

    // Recomputes everything from a fresh inverse; returns the relative drift.
    double refresh() {
        Eigen::MatrixXd fresh = B().ldlt().solve(Eigen::MatrixXd::Identity(n(), n()));
        double drift = Binv_.size() ? (Binv_ - fresh).norm() / fresh.norm() : 0.0;
        max_drift_ = std::max(max_drift_, drift);
        ++refreshes_;
        Binv_ = fresh;
        X_ = Binv_ * V_;
        Eigen::MatrixXd AX = A_ * X_;
        num_.resize(m());
        d_.resize(m());
        for (int i = 0; i < m(); ++i) {
            num_[i] = X_.col(i).dot(AX.col(i));
            d_[i] = 1 - V_.col(i).dot(X_.col(i));
        }
        trace_ = (Binv_ * A_).trace();
        since_ = 0;
        return drift;
    }

private:
    Eigen::MatrixXd V_, A_, Binv_, X_;
    int refresh_every_;
    std::vector<char> in_;
    std::vector<double> num_, d_;
    int size_ = 0;
    double trace_ = 0;
    int since_ = 0;
    double max_drift_ = 0;
    int refreshes_ = 0;
};

inline TraceRemovalResult greedy_trace_removal_to(const Eigen::MatrixXd& V, int target, double k = 0) {
    const int n = static_cast<int>(V.rows());
    const int m = static_cast<int>(V.cols());
    if (target < n) throw std::invalid_argument("cannot keep fewer than n vectors");
    RankOneSystem sys(V);
    TraceRemovalResult out;
    out.trajectory.push_back(sys.trace());
    out.trajectory_ok = true;
    const double tol = 1e-9;
    while (sys.size() > target) {
        int s = sys.size();
        double before = sys.trace();
        if (sys.remove_best(tol, &out.rejected) < 0) throw std::runtime_error("every removal candidate loses rank");
        out.sizes.push_back(s);
        out.trajectory.push_back(sys.trace());
        if (sys.trace() > before * (s - n + 1.0) / (s - n) * (1 + 1e-9)) out.trajectory_ok = false;
    }
    sys.refresh();
    out.max_sm_drift = sys.max_drift();
    out.refreshes = sys.refreshes();
    out.trace = sys.trace();
    for (int i = 0; i < m; ++i)
        if (sys.selected(i)) out.selection.push_back(i);
    out.bound = static_cast<double>(m) * k;
    out.bound_ok = k <= 0 || out.trace <= out.bound * (1 + 1e-9);
    return out;
}

// Keeps n + ceil(n/k) of the m vectors, fewer removals if m is already small.
inline TraceRemovalResult greedy_trace_removal(const Eigen::MatrixXd& V, double k) {
    if (!(k >= 1)) throw std::invalid_argument("k must be at least 1");
    const int n = static_cast<int>(V.rows());
    int target = n + static_cast<int>(std::ceil(n / k - 1e-12));
    return greedy_trace_removal_to(V, std::min<int>(target, static_cast<int>(V.cols())), k);
}

// ---------------------------------------------------------------- barrier augmentation

struct BarrierState {
    double u = 2, l = 0;
    double gamma_U = 0, gamma_L = 0;
    double delta_U = 0, delta_L = 0;
    double phi_upper = 0, phi_lower = 0;
};

struct BarrierStep {
    int index = -1;
    double t = 0;
    double t_lo = 0, t_hi = 0;
    BarrierState state;  // after the step
};

struct BssResult {
    std::vector<std::pair<int, double>> additions;
    Eigen::MatrixXd result;
    double kappa = 0, q = 0;
    int s = 0;
    BarrierState initial;
    std::vector<BarrierStep> steps;
    int violations = 0;
    double lambda_min = 0, lambda_max = 0;
    bool sandwich_ok = false;
};

namespace detail {

inline double phi_upper(const Eigen::VectorXd& lam, double u) {
    double s = 0;
    for (double x : lam) s += 1 / (u - x);
    return s;
}

inline double phi_lower(const Eigen::VectorXd& lam, double l) {
    double s = 0;
    for (double x : lam) s += 1 / (x - l);
    return s;
}

}  // namespace detail

// A + sum w_i v_i v_i^T between qI and 3I using s = ceil((kappa + 2n) q) steps.
inline BssResult bss_augment(const Eigen::MatrixXd& A, const Eigen::MatrixXd& V, double q, double bisect_tol = 1e-10) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(V.cols());
    if (A.cols() != n || V.rows() != n) throw std::invalid_argument("dimension mismatch");
    if (!(q >= 0)) throw std::invalid_argument("q must be nonnegative");
    BssResult out;
    out.q = q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es0(A, Eigen::EigenvaluesOnly);
    if (es0.eigenvalues()[0] <= 0) throw std::invalid_argument("A must be positive definite");
    if (es0.eigenvalues()[n - 1] > 1 + 1e-9) throw std::invalid_argument("A must satisfy A <= I");
    out.kappa = es0.eigenvalues().cwiseInverse().sum();
    out.s = static_cast<int>(std::ceil((out.kappa + 2 * n) * q - 1e-12));
    if (out.s > n) throw std::invalid_argument("ceil((kappa + 2n) q) exceeds n");

    BarrierState st;
    st.gamma_U = n;
    st.gamma_L = out.kappa;
    st.delta_U = 1.0 / n;
    st.delta_L = 1.0 / (2 * n + out.kappa);
    st.phi_upper = detail::phi_upper(es0.eigenvalues(), st.u);
    st.phi_lower = detail::phi_lower(es0.eigenvalues(), st.l);
    out.initial = st;
    const double slack = 1e-9;
    auto violated = [&](const BarrierState& b) {
        return b.phi_upper > b.gamma_U * (1 + slack) || b.phi_lower > b.gamma_L * (1 + slack);
    };
    if (violated(st)) ++out.violations;

    Eigen::MatrixXd M = A;
    for (int j = 0; j < out.s; ++j) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
        const Eigen::VectorXd& lam = es.eigenvalues();
        const double u1 = st.u + st.delta_U, l1 = st.l + st.delta_L;
        if (lam[0] <= l1) throw std::runtime_error("lower barrier overtaken");
        Eigen::VectorXd ru = (u1 - lam.array()).inverse().matrix();
        Eigen::VectorXd rl = (lam.array() - l1).inverse().matrix();
        const double g = st.gamma_U - ru.sum();
        const double h = rl.sum() - st.gamma_L;
        if (g <= 0) throw std::runtime_error("upper potential exhausted");
        Eigen::MatrixXd W = es.eigenvectors().transpose() * V;
        Eigen::MatrixXd W2 = W.cwiseProduct(W);
        Eigen::VectorXd a1 = W2.transpose() * ru;
        Eigen::VectorXd a2 = W2.transpose() * ru.cwiseProduct(ru);
        Eigen::VectorXd b1 = W2.transpose() * rl;
        Eigen::VectorXd b2 = W2.transpose() * rl.cwiseProduct(rl);

        // Both potentials are Mobius in t, so the feasible interval has closed
        // form; it ranks the indices, then the weight is pinned by bisection.
        int best = -1;
        double best_score = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
            if (W2.col(i).sum() <= 0) continue;
            double thi = g / (a2[i] + g * a1[i]);
            double tlo = 0;
            if (h > 0) {
                if (b2[i] <= h * b1[i]) continue;
                tlo = h / (b2[i] - h * b1[i]);
            }
            if (!(tlo < thi)) continue;
            double score = tlo > 0 ? std::log(thi / tlo) : std::numeric_limits<double>::max();
            if (score > best_score) {
                best_score = score;
                best = i;
            }
        }
        if (best < 0) throw std::runtime_error("no feasible (index, weight) pair");

        auto up = [&](double t) {  // +inf past the pole
            double d = 1 - t * a1[best];
            if (d <= 0) return std::numeric_limits<double>::infinity();
            return ru.sum() + t * a2[best] / d;
        };
        auto lo = [&](double t) { return rl.sum() - t * b2[best] / (1 + t * b1[best]); };
        // upper endpoint: largest t with up(t) <= gamma_U, bracketed by the pole
        double a = 0, b = 1 / a1[best];
        while (b - a > bisect_tol * b) {
            double c = 0.5 * (a + b);
            (up(c) <= st.gamma_U ? a : b) = c;
        }
        const double t_hi = a;
        double t_lo = 0;
        if (lo(0) > st.gamma_L) {
            double x = 0, y = t_hi;
            while (y - x > bisect_tol * y) {
                double c = 0.5 * (x + y);
                (lo(c) <= st.gamma_L ? y : x) = c;
            }
            t_lo = y;
        }
        if (!(t_lo < t_hi)) throw std::runtime_error("feasible interval collapsed under bisection");
        const double t = 0.5 * (t_lo + t_hi);
        M.noalias() += t * V.col(best) * V.col(best).transpose();
        out.additions.push_back({best, t});

        st.u = u1;
        st.l = l1;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ek(M, Eigen::EigenvaluesOnly);
        st.phi_upper = ek.eigenvalues()[n - 1] < st.u ? detail::phi_upper(ek.eigenvalues(), st.u)
                                                      : std::numeric_limits<double>::infinity();
        st.phi_lower = ek.eigenvalues()[0] > st.l ? detail::phi_lower(ek.eigenvalues(), st.l)
                                                  : std::numeric_limits<double>::infinity();
        if (violated(st)) ++out.violations;
        out.steps.push_back({best, t, t_lo, t_hi, st});
    }
    out.result = M;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ef(M, Eigen::EigenvaluesOnly);
    out.lambda_min = ef.eigenvalues()[0];
    out.lambda_max = ef.eigenvalues()[n - 1];
    out.sandwich_ok = out.lambda_min >= q * (1 - 1e-9) && out.lambda_max <= 3 * (1 + 1e-9);
    return out;
}

// ---------------------------------------------------------------- graphs

struct Presparsify {
    bool applied = false;
    bool fell_back = false;       // no connected sample within 16n edges; G kept whole
    bool ratio_exceeded = false;  // best sample's pencil ratio is above 2
    int attempts = 0;
    int input_edges = 0;          // after merging parallels and dropping loops
    int output_edges = 0;
    double lambda_min = 1, lambda_max = 1;  // pencil of G' against G after scaling
};

struct UltrasparsifyResult {
    WeightedMultiGraph H;           // L_H <= L_G <= 18 k^2 scale L_H
    std::vector<int> source_edges;  // one representative input edge per output edge
    double k = 0;
    double statement_k = 0;         // 108 k^2
    int n = 0;
    Presparsify pre;
    TraceRemovalResult removal;
    BssResult bss;
    bool ones_in_selection = false;
    // unscaled H' against G' (expected [q, 3]) and against G (expected [q, 6])
    double gp_lambda_min = 0, gp_lambda_max = 0;
    double g_lambda_min = 0, g_lambda_max = 0;
    bool proof_sandwich_ok = false;
    double edge_bound = 0;          // n + 2n/k
    bool edge_bound_ok = false;
    double scale = 6;               // H = H' / scale, with scale = 3 max(2, rho)
};

namespace detail {

struct DenseGraph {
    int n = 0;
    std::vector<Edge> edges;
    std::vector<int> source;
};

inline Eigen::MatrixXd laplacian_of(int n, const std::vector<Edge>& es) {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (const Edge& e : es) {
        L(e.u, e.u) += e.w;
        L(e.v, e.v) += e.w;
        L(e.u, e.v) -= e.w;
        L(e.v, e.u) -= e.w;
    }
    return L;
}

// M^{-1/2} for M = L + 1 1^T (positive definite when the graph is connected).
inline Eigen::MatrixXd inv_sqrt_shifted(const Eigen::MatrixXd& L) {
    const int n = static_cast<int>(L.rows());
    Eigen::MatrixXd M = L + Eigen::MatrixXd::Ones(n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.eigenvalues()[0] <= 1e-12 * es.eigenvalues()[n - 1]) throw std::invalid_argument("graph is disconnected");
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

// Orthonormal basis of the complement of the all-ones vector.
inline Eigen::MatrixXd ones_complement(int n) {
    Eigen::MatrixXd one = Eigen::MatrixXd::Ones(n, 1);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(one);
    Eigen::MatrixXd Q = qr.householderQ();
    return Q.rightCols(n - 1);
}

// Extreme eigenvalues of L_a against L_b on the complement of 1, with
// Minv = (L_b + 1 1^T)^{-1/2}.
inline std::pair<double, double> pencil(const Eigen::MatrixXd& La, const Eigen::MatrixXd& Minv, const Eigen::MatrixXd& P) {
    Eigen::MatrixXd C = P.transpose() * Minv * La * Minv * P;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C, Eigen::EigenvaluesOnly);
    return {es.eigenvalues()[0], es.eigenvalues()[C.rows() - 1]};
}

inline DenseGraph merge_parallel(const WeightedMultiGraph& g) {
    DenseGraph d;
    d.n = g.num_vertices();
    std::map<std::pair<int, int>, int> at;
    for (int e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edge(e);
        if (ed.u == ed.v) continue;
        auto key = std::minmax(ed.u, ed.v);
        auto [it, fresh] = at.try_emplace({key.first, key.second}, static_cast<int>(d.edges.size()));
        if (fresh) {
            d.edges.push_back({key.first, key.second, ed.w});
            d.source.push_back(e);
        } else {
            d.edges[it->second].w += ed.w;
        }
    }
    return d;
}

// Leverage-score sampling down to at most 16n edges, scaled so L_G <= L_G'.
// Expected size starts at 12n and is topped up by n per round until the pencil
// ratio is at most 2. Past 16n the best sample seen is kept and its ratio
// reported, since no 16n-edge graph reaches 2 against a large complete graph.
inline DenseGraph presparsify(const DenseGraph& g, const Eigen::MatrixXd& Minv, const Eigen::MatrixXd& P, std::uint64_t seed,
                              Presparsify* info) {
    const int n = g.n;
    const int m = static_cast<int>(g.edges.size());
    info->input_edges = m;
    info->output_edges = m;
    if (m <= 16 * n) return g;
    info->applied = true;
    std::vector<double> lev(m);
    for (int e = 0; e < m; ++e) {
        Eigen::VectorXd b = Minv.col(g.edges[e].u) - Minv.col(g.edges[e].v);
        lev[e] = g.edges[e].w * b.squaredNorm();
    }
    auto expected = [&](double rho) {
        double s = 0;
        for (double l : lev) s += std::min(1.0, rho * l);
        return s;
    };
    Rng rng(seed);
    DenseGraph best;
    double best_ratio = std::numeric_limits<double>::infinity(), best_min = 0;
    for (int target = 12 * n; target <= 16 * n && best_ratio > 2; target += n) {
        double lo = 0, hi = 1;
        while (expected(hi) < target) hi *= 2;
        for (int it = 0; it < 100; ++it) {
            double mid = 0.5 * (lo + hi);
            (expected(mid) < target ? lo : hi) = mid;
        }
        for (int attempt = 0; attempt < 4 && best_ratio > 2; ++attempt) {
            ++info->attempts;
            DenseGraph s;
            s.n = n;
            for (int e = 0; e < m; ++e) {
                double p = std::min(1.0, lo * lev[e]);
                if (uniform01(rng) < p) {
                    s.edges.push_back({g.edges[e].u, g.edges[e].v, g.edges[e].w / p});
                    s.source.push_back(g.source[e]);
                }
            }
            if (static_cast<int>(s.edges.size()) > 16 * n) continue;
            auto [a, b] = pencil(laplacian_of(n, s.edges), Minv, P);
            if (!(a > 1e-12 * b) || b / a >= best_ratio) continue;
            best = std::move(s);
            best_ratio = b / a;
            best_min = a;
        }
    }
    if (!std::isfinite(best_ratio)) {
        info->fell_back = true;
        return g;
    }
    for (Edge& e : best.edges) e.w /= best_min;
    info->lambda_max = best_ratio;
    info->ratio_exceeded = best_ratio > 2;
    info->output_edges = static_cast<int>(best.edges.size());
    return best;
}

}  // namespace detail

inline UltrasparsifyResult ultrasparsify(const WeightedMultiGraph& G, double k, const SolverConfig& cfg = {},
                                         std::uint64_t seed = 1) {
    const int n = G.num_vertices();
    if (!(k >= 1)) throw std::invalid_argument("k must be at least 1");
    if (n > cfg.us_dense_cap) throw std::length_error("ultrasparsify dense cap exceeded");
    if (n < 2) throw std::invalid_argument("need at least two vertices");
    UltrasparsifyResult out;
    out.k = k;
    out.statement_k = 108 * k * k;
    out.n = n;

    detail::DenseGraph g0 = detail::merge_parallel(G);
    Eigen::MatrixXd LG = detail::laplacian_of(n, g0.edges);
    Eigen::MatrixXd MinvG = detail::inv_sqrt_shifted(LG);
    Eigen::MatrixXd P = detail::ones_complement(n);
    detail::DenseGraph gp = detail::presparsify(g0, MinvG, P, seed, &out.pre);
    Eigen::MatrixXd Lp = detail::laplacian_of(n, gp.edges);
    Eigen::MatrixXd Minv = out.pre.applied && !out.pre.fell_back ? detail::inv_sqrt_shifted(Lp) : MinvG;

    const int mp = static_cast<int>(gp.edges.size());
    Eigen::MatrixXd V(n, mp + 1);
    for (int e = 0; e < mp; ++e)
        V.col(e) = std::sqrt(gp.edges[e].w) * (Minv.col(gp.edges[e].u) - Minv.col(gp.edges[e].v));
    V.col(mp) = Minv * Eigen::VectorXd::Ones(n);

    out.removal = greedy_trace_removal(V, k);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    std::vector<double> coef(mp + 1, 0.0);
    for (int i : out.removal.selection) {
        A.noalias() += V.col(i) * V.col(i).transpose();
        coef[i] = 1;
    }
    out.ones_in_selection = coef[mp] > 0;
    out.bss = bss_augment(A, V, 1 / (18 * k * k), cfg.bss_bisect_tol);
    for (auto [i, t] : out.bss.additions) coef[i] += t;

    std::vector<Edge> hedges;
    for (int e = 0; e < mp; ++e)
        if (coef[e] > 0) {
            hedges.push_back({gp.edges[e].u, gp.edges[e].v, coef[e] * gp.edges[e].w});
            out.source_edges.push_back(gp.source[e]);
        }
    Eigen::MatrixXd LH = detail::laplacian_of(n, hedges);
    std::tie(out.gp_lambda_min, out.gp_lambda_max) = detail::pencil(LH, Minv, P);
    std::tie(out.g_lambda_min, out.g_lambda_max) = detail::pencil(LH, MinvG, P);
    const double q = out.bss.q;
    out.scale = 3 * std::max(2.0, out.pre.lambda_max);
    out.proof_sandwich_ok = out.gp_lambda_min >= q * (1 - 1e-9) && out.gp_lambda_max <= 3 * (1 + 1e-9) &&
                            out.g_lambda_min >= q * (1 - 1e-9) && out.g_lambda_max <= out.scale * (1 + 1e-9);
    for (Edge& e : hedges) e.w /= out.scale;
    out.H = WeightedMultiGraph(n, std::move(hedges));
    out.edge_bound = n + 2.0 * n / k;
    out.edge_bound_ok = out.H.num_edges() <= out.edge_bound + 1e-9;
    return out;
}

}  // namespace lapsolve
