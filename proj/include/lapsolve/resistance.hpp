#pragma once

// Dense verification oracle. Deliberately slow and independent of the sparse
// code paths: everything goes through Eigen's symmetric eigensolver.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "graph.hpp"

namespace lapsolve::oracle {

inline int& dense_cap() {
    static int cap = 500;
    return cap;
}

inline void check_cap(int n) {
    if (n > dense_cap()) throw std::length_error("dense oracle cap exceeded");
}

inline Eigen::MatrixXd laplacian_dense(const WeightedMultiGraph& g) {
    check_cap(g.num_vertices());
    const int n = g.num_vertices();
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (const Edge& e : g.edges()) {
        if (e.u == e.v) continue;
        L(e.u, e.u) += e.w;
        L(e.v, e.v) += e.w;
        L(e.u, e.v) -= e.w;
        L(e.v, e.u) -= e.w;
    }
    return L;
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& x) {
    return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

inline std::vector<double> from_eigen(const Eigen::VectorXd& x) {
    return std::vector<double>(x.data(), x.data() + x.size());
}

// Moore-Penrose pseudoinverse with eigenvalue cutoff 1e-10 * lambda_max.
inline Eigen::MatrixXd pinv_psd(const Eigen::MatrixXd& A) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    const Eigen::VectorXd& lam = es.eigenvalues();
    double lmax = lam.cwiseAbs().maxCoeff();
    double cut = 1e-10 * std::max(lmax, 1e-300);
    Eigen::VectorXd inv(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) inv[i] = lam[i] > cut ? 1.0 / lam[i] : 0.0;
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

// Holds L^+ for repeated resistance queries on one graph.
class ResistanceOracle {
public:
    explicit ResistanceOracle(const WeightedMultiGraph& g)
        : comp_(connected_components(g, &ncomp_)), pinv_(pinv_psd(laplacian_dense(g))) {}

    double resistance(int u, int v) const {
        if (u == v) return 0.0;
        if (comp_[u] != comp_[v]) return std::numeric_limits<double>::infinity();
        return pinv_(u, u) + pinv_(v, v) - 2.0 * pinv_(u, v);
    }

    std::vector<double> solve(std::vector<double> b) const {
        project_to_range(comp_, ncomp_, b);
        return from_eigen(pinv_ * to_eigen(b));
    }

    const Eigen::MatrixXd& pinv() const { return pinv_; }

private:
    int ncomp_ = 0;
    std::vector<int> comp_;
    Eigen::MatrixXd pinv_;
};

inline std::vector<double> pinv_solve(const WeightedMultiGraph& g, const std::vector<double>& b) {
    if (static_cast<int>(b.size()) != g.num_vertices()) throw std::invalid_argument("dimension mismatch");
    return ResistanceOracle(g).solve(b);
}

inline double effective_resistance(const WeightedMultiGraph& g, int u, int v) {
    return ResistanceOracle(g).resistance(u, v);
}

// (x - xs)^T L (x - xs).
inline double a_norm_error(const WeightedMultiGraph& g, const std::vector<double>& x,
                           const std::vector<double>& xs) {
    if (x.size() != xs.size() || static_cast<int>(x.size()) != g.num_vertices())
        throw std::invalid_argument("dimension mismatch");
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - xs[i];
    return laplacian_quadratic(g, d);
}

// Orthonormal basis for the range of a PSD matrix.
inline Eigen::MatrixXd range_basis(const Eigen::MatrixXd& A) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    const Eigen::VectorXd& lam = es.eigenvalues();
    double cut = 1e-10 * std::max(lam.cwiseAbs().maxCoeff(), 1e-300);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        if (lam[i] > cut) keep.push_back(i);
    Eigen::MatrixXd Q(A.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) Q.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]);
    return Q;
}

// Smallest eigenvalue of Q^T D Q.
inline double min_eig_on(const Eigen::MatrixXd& D, const Eigen::MatrixXd& Q) {
    if (Q.cols() == 0) return 0.0;
    Eigen::MatrixXd R = Q.transpose() * D * Q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R, Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
}

// c_lo L_lo <= L_mid <= c_hi L_hi on the range of L_mid, to tolerance
// 1e-9 times the larger operator norm in each comparison.
inline bool spectral_sandwich(const WeightedMultiGraph& glo, const WeightedMultiGraph& gmid,
                              const WeightedMultiGraph& ghi, double c_lo, double c_hi) {
    if (glo.num_vertices() != gmid.num_vertices() || ghi.num_vertices() != gmid.num_vertices())
        throw std::invalid_argument("vertex sets differ");
    Eigen::MatrixXd Lm = laplacian_dense(gmid);
    Eigen::MatrixXd Ll = c_lo * laplacian_dense(glo);
    Eigen::MatrixXd Lh = c_hi * laplacian_dense(ghi);
    Eigen::MatrixXd Q = range_basis(Lm + Lh + Ll);
    auto norm2 = [](const Eigen::MatrixXd& M) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    };
    double tol_lo = 1e-9 * std::max({norm2(Lm), norm2(Ll), 1e-300});
    double tol_hi = 1e-9 * std::max({norm2(Lm), norm2(Lh), 1e-300});
    return min_eig_on(Lm - Ll, Q) >= -tol_lo && min_eig_on(Lh - Lm, Q) >= -tol_hi;
}

// Dense-matrix form of the same check for arbitrary PSD matrices.
inline bool psd_leq(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double rel_tol = 1e-9) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(A, Eigen::EigenvaluesOnly), eb(B, Eigen::EigenvaluesOnly);
    double scale = std::max({ea.eigenvalues().cwiseAbs().maxCoeff(), eb.eigenvalues().cwiseAbs().maxCoeff(), 1e-300});
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ed(B - A, Eigen::EigenvaluesOnly);
    return ed.eigenvalues()[0] >= -rel_tol * scale;
}

// Extreme generalized eigenvalues of L_a x = lambda L_b x on range(L_b).
struct PencilBounds {
    double lambda_min = 0;
    double lambda_max = 0;
};

inline PencilBounds pencil_bounds(const WeightedMultiGraph& ga, const WeightedMultiGraph& gb) {
    Eigen::MatrixXd La = laplacian_dense(ga);
    Eigen::MatrixXd Lb = laplacian_dense(gb);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Lb);
    const Eigen::VectorXd& lam = es.eigenvalues();
    double cut = 1e-10 * std::max(lam.cwiseAbs().maxCoeff(), 1e-300);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        if (lam[i] > cut) keep.push_back(i);
    Eigen::MatrixXd W(La.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
        W.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]) / std::sqrt(lam[keep[j]]);
    Eigen::MatrixXd M = W.transpose() * La * W;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(M, Eigen::EigenvaluesOnly);
    if (M.rows() == 0) return {};
    return {em.eigenvalues()[0], em.eigenvalues()[M.rows() - 1]};
}

// Sum over edges of G of (w_e R_H(e))^p.
inline double distortion(const WeightedMultiGraph& g, const WeightedMultiGraph& h, double p) {
    if (g.num_vertices() != h.num_vertices()) throw std::invalid_argument("vertex sets differ");
    ResistanceOracle ro(h);
    double s = 0;
    for (const Edge& e : g.edges()) {
        if (e.u == e.v) continue;
        s += std::pow(e.w * ro.resistance(e.u, e.v), p);
    }
    return s;
}

}  // namespace lapsolve::oracle
