#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <set>

#include "lapsolve/resistance.hpp"
#include "lapsolve/ultrasparsify.hpp"
#include "test_util.hpp"

using namespace lapsolve;

namespace {

Eigen::MatrixXd gaussian(int r, int c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd X(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) X(i, j) = nd(rng);
    return X;
}

// Columns rescaled so that sum v v^T = I.
Eigen::MatrixXd isotropic(int n, int m, std::uint64_t seed) {
    Eigen::MatrixXd G = gaussian(n, m, seed);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G * G.transpose());
    return es.operatorInverseSqrt() * G;
}

double fresh_trace(const Eigen::MatrixXd& V, const std::vector<int>& S) {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(V.rows(), V.rows());
    for (int i : S) B += V.col(i) * V.col(i).transpose();
    return (B.inverse() * (V * V.transpose())).trace();
}

WeightedMultiGraph weighted_random(int n, int m, std::uint64_t seed) {
    auto g = testutil::random_simple_graph(n, m, seed);
    std::mt19937_64 rng(seed + 1);
    std::vector<Edge> es = g.edges();
    for (auto& e : es) e.w = std::exp(std::log(100.0) * uniform01(rng));
    return WeightedMultiGraph(n, es);
}

}  // namespace

// ------------------------------------------------------------------ removal

TEST(GreedyTraceRemoval, NothingToRemove) {
    const int n = 8;
    auto V = gaussian(n, n + 4, 1);
    auto r = greedy_trace_removal(V, 2);
    EXPECT_EQ(r.selection.size(), 12u);
    EXPECT_NEAR(r.trace, n, 1e-9);
    EXPECT_EQ(r.trajectory.size(), 1u);
}

TEST(GreedyTraceRemoval, DuplicatedBasis) {
    const int n = 6;
    Eigen::MatrixXd V(n, 2 * n);
    V << Eigen::MatrixXd::Identity(n, n), Eigen::MatrixXd::Identity(n, n);
    // k = 1 keeps n + n = 2n vectors, so nothing moves
    auto r = greedy_trace_removal(V, 1);
    EXPECT_EQ(r.selection.size(), 12u);
    EXPECT_NEAR(r.trace, n, 1e-12);
    // removing down to n keeps exactly one copy of each direction
    auto s = greedy_trace_removal_to(V, n);
    ASSERT_EQ(s.selection.size(), 6u);
    std::set<int> dirs;
    for (int i : s.selection) dirs.insert(i % n);
    EXPECT_EQ(dirs.size(), 6u);
    EXPECT_NEAR(s.trace, 2 * n, 1e-9);
    EXPECT_GT(s.rejected, 0);  // the last copy of a direction is never a candidate
}

TEST(GreedyTraceRemoval, GaussianTwentyByEighty) {
    auto V = gaussian(20, 80, 3);
    auto r = greedy_trace_removal(V, 2);
    EXPECT_EQ(r.selection.size(), 30u);
    double tr = fresh_trace(V, r.selection);
    EXPECT_NEAR(r.trace, tr, 1e-8 * tr);
    EXPECT_LE(tr, 160.0);
    EXPECT_TRUE(r.bound_ok);
    EXPECT_DOUBLE_EQ(r.bound, 160.0);
}

TEST(GreedyTraceRemoval, ShermanMorrisonStaysConsistent) {
    auto V = isotropic(40, 400, 5);
    auto r = greedy_trace_removal(V, 3);
    EXPECT_GE(r.refreshes, 7);
    EXPECT_LE(r.max_sm_drift, 1e-8);
    // maintained inverse against a fresh one after an odd number of removals
    RankOneSystem sys(V);
    for (int i = 0; i < 73; ++i) sys.remove_best(1e-9);
    Eigen::MatrixXd fresh = sys.B().inverse();
    EXPECT_LE((sys.Binv() - fresh).norm() / fresh.norm(), 1e-8);
}

TEST(GreedyTraceRemoval, PerStepGrowthBound) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto V = gaussian(15, 60 + 10 * static_cast<int>(seed), seed);
        auto r = greedy_trace_removal(V, 1.5);
        ASSERT_EQ(r.trajectory.size(), r.sizes.size() + 1);
        for (std::size_t j = 0; j < r.sizes.size(); ++j) {
            double s = r.sizes[j];
            EXPECT_LE(r.trajectory[j + 1], r.trajectory[j] * (s - 15 + 1) / (s - 15) * (1 + 1e-9));
        }
        EXPECT_TRUE(r.trajectory_ok);
        EXPECT_LE(fresh_trace(V, r.selection), V.cols() * 1.5);
    }
}

TEST(GreedyTraceRemoval, LoneDirectionNeverRemoved) {
    Eigen::MatrixXd V = gaussian(10, 50, 8);
    V.row(9).setZero();
    V(9, 17) = 0.01;  // only column 17 reaches the last coordinate
    auto r = greedy_trace_removal(V, 2);
    EXPECT_TRUE(std::find(r.selection.begin(), r.selection.end(), 17) != r.selection.end());
    EXPECT_THROW(greedy_trace_removal(Eigen::MatrixXd::Zero(3, 5), 1), std::invalid_argument);
}

// ------------------------------------------------------------------ barrier

TEST(BssAugment, ZeroStepsWhenQIsZero) {
    auto V = isotropic(5, 20, 1);
    Eigen::MatrixXd A = 0.5 * Eigen::MatrixXd::Identity(5, 5);
    auto r = bss_augment(A, V, 0.0);
    EXPECT_EQ(r.s, 0);
    EXPECT_TRUE(r.additions.empty());
    EXPECT_TRUE(r.sandwich_ok);
}

TEST(BssAugment, InitialUpperPotentialAtMostN) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const int n = 7;
        auto V = isotropic(n, 30, seed);
        auto sel = greedy_trace_removal(V, 2).selection;
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
        for (int i : sel) A += V.col(i) * V.col(i).transpose();
        auto r = bss_augment(A, V, 0.0);
        EXPECT_LE(r.initial.phi_upper, n);
        EXPECT_NEAR(r.initial.phi_lower, r.kappa, 1e-9 * r.kappa);
    }
}

TEST(BssAugment, SixDimensionalSandwich) {
    const int n = 6;
    const double k = 2, q = 1 / (18 * k * k);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto V = isotropic(n, 40, seed);
        auto sel = greedy_trace_removal(V, k).selection;
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
        for (int i : sel) A += V.col(i) * V.col(i).transpose();
        auto r = bss_augment(A, V, q);
        EXPECT_EQ(r.s, static_cast<int>(std::ceil((r.kappa + 2 * n) * q - 1e-12)));
        EXPECT_EQ(static_cast<int>(r.additions.size()), r.s);
        Eigen::MatrixXd R = A;
        for (auto [i, t] : r.additions) {
            EXPECT_GT(t, 0);
            R += t * V.col(i) * V.col(i).transpose();
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R, Eigen::EigenvaluesOnly);
        EXPECT_GE(es.eigenvalues()[0], q * (1 - 1e-9));
        EXPECT_LE(es.eigenvalues()[n - 1], 3 * (1 + 1e-9));
        EXPECT_EQ(r.violations, 0);
    }
}

TEST(BssAugment, PotentialsRecomputedPerStep) {
    const int n = 12;
    auto V = isotropic(n, 100, 4);
    auto sel = greedy_trace_removal(V, 1.2).selection;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int i : sel) A += V.col(i) * V.col(i).transpose();
    auto r = bss_augment(A, V, 0.05);
    ASSERT_GT(r.s, 3);
    EXPECT_DOUBLE_EQ(r.initial.gamma_U, n);
    EXPECT_DOUBLE_EQ(r.initial.delta_U, 1.0 / n);
    EXPECT_NEAR(r.initial.delta_L, 1 / (2 * n + r.kappa), 1e-15);
    // the step condition holds with equality for these parameters
    EXPECT_NEAR(1 / r.initial.delta_U + r.initial.gamma_U, 1 / r.initial.delta_L - r.initial.gamma_L, 1e-9);
    Eigen::MatrixXd M = A;
    for (std::size_t j = 0; j < r.steps.size(); ++j) {
        const auto& st = r.steps[j];
        M += st.t * V.col(st.index) * V.col(st.index).transpose();
        double u = 2 + (j + 1.0) / n, l = (j + 1.0) / (2 * n + r.kappa);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
        double pu = 0, pl = 0;
        for (double x : es.eigenvalues()) {
            ASSERT_LT(x, u);
            ASSERT_GT(x, l);
            pu += 1 / (u - x);
            pl += 1 / (x - l);
        }
        EXPECT_LE(pu, n * (1 + 1e-9)) << "step " << j;
        EXPECT_LE(pl, r.kappa * (1 + 1e-9)) << "step " << j;
        EXPECT_GE(st.t, st.t_lo);
        EXPECT_LE(st.t, st.t_hi);
    }
}

TEST(BssAugment, RejectsBadInputs) {
    auto V = isotropic(4, 10, 2);
    EXPECT_THROW(bss_augment(2 * Eigen::MatrixXd::Identity(4, 4), V, 0.1), std::invalid_argument);
    EXPECT_THROW(bss_augment(Eigen::MatrixXd::Identity(4, 4), V, 1.0), std::invalid_argument);
}

// ------------------------------------------------------------------ graphs

TEST(Ultrasparsify, TreeStaysTree) {
    auto g = testutil::random_multigraph(30, 29, 2, false);
    for (double k : {1.0, 3.0, 10.0}) {
        auto r = ultrasparsify(g, k);
        ASSERT_EQ(r.H.num_edges(), 29);
        std::set<std::pair<int, int>> a, b;
        for (const Edge& e : g.edges()) a.insert(std::minmax(e.u, e.v));
        for (const Edge& e : r.H.edges()) b.insert(std::minmax(e.u, e.v));
        EXPECT_EQ(a, b);
        EXPECT_TRUE(r.ones_in_selection);
    }
}

TEST(Ultrasparsify, CompleteTwentyKFour) {
    auto g = complete_graph(20);
    auto r = ultrasparsify(g, 4);
    EXPECT_LE(r.H.num_edges(), 30);
    EXPECT_FALSE(r.pre.applied);
    std::vector<Edge> es = r.H.edges();
    for (Edge& e : es) e.w *= 6;  // undo the final scaling
    auto pb = oracle::pencil_bounds(WeightedMultiGraph(20, es), g);
    EXPECT_GE(pb.lambda_min, 1.0 / 288 * (1 - 1e-9));
    EXPECT_LE(pb.lambda_max, 6 * (1 + 1e-9));
    EXPECT_TRUE(r.proof_sandwich_ok);
}

TEST(Ultrasparsify, WeightedFortyThreeHundred) {
    auto g = weighted_random(40, 300, 7);
    const double k = 3;
    auto r = ultrasparsify(g, k);
    EXPECT_TRUE(oracle::psd_leq(oracle::laplacian_dense(r.H), oracle::laplacian_dense(g)));
    auto pb = oracle::pencil_bounds(g, r.H);
    EXPECT_LE(pb.lambda_max, 108 * k * k);
    EXPECT_LE(r.H.num_edges(), 40 + 2 * 40 / k);
    EXPECT_TRUE(r.removal.bound_ok);
    EXPECT_EQ(r.bss.violations, 0);
    for (int e : r.source_edges) EXPECT_LT(e, g.num_edges());
}

TEST(Ultrasparsify, DensePresparsifiedWithinFactorTwo) {
    auto g = complete_graph(60);
    auto r = ultrasparsify(g, 2, SolverConfig{}, 3);
    EXPECT_TRUE(r.pre.applied);
    if (!r.pre.fell_back) {
        EXPECT_LE(r.pre.output_edges, 16 * 60);
        EXPECT_LE(r.pre.lambda_max, 2.0);
    }
    EXPECT_TRUE(oracle::psd_leq(oracle::laplacian_dense(r.H), oracle::laplacian_dense(g)));
    EXPECT_LE(oracle::pencil_bounds(g, r.H).lambda_max, 108 * 4);
    EXPECT_TRUE(r.proof_sandwich_ok);
}

TEST(Ultrasparsify, CompleteHundredKeepsEdgeBound) {
    // 16n edges cannot reach ratio 2 against K_100; the measured ratio sets the scale
    auto g = complete_graph(100);
    auto r = ultrasparsify(g, 2, SolverConfig{}, 1);
    EXPECT_TRUE(r.pre.applied);
    EXPECT_FALSE(r.pre.fell_back);
    EXPECT_LE(r.pre.output_edges, 1600);
    EXPECT_NEAR(r.scale, 3 * std::max(2.0, r.pre.lambda_max), 1e-12);
    EXPECT_LE(r.H.num_edges(), 200);
    EXPECT_TRUE(oracle::psd_leq(oracle::laplacian_dense(r.H), oracle::laplacian_dense(g)));
    EXPECT_LE(oracle::pencil_bounds(g, r.H).lambda_max, 18 * 4 * r.scale * (1 + 1e-9));
    EXPECT_TRUE(r.proof_sandwich_ok);
}

TEST(Ultrasparsify, MultigraphAndLoops) {
    auto g = testutil::random_multigraph(25, 120, 9, true);
    auto r = ultrasparsify(g, 2);
    EXPECT_TRUE(oracle::psd_leq(oracle::laplacian_dense(r.H), oracle::laplacian_dense(g)));
    EXPECT_LE(oracle::pencil_bounds(g, r.H).lambda_max, 108 * 4);
    for (const Edge& e : r.H.edges()) EXPECT_NE(e.u, e.v);
}

TEST(Ultrasparsify, Errors) {
    WeightedMultiGraph dis(4, {{0, 1, 1}, {2, 3, 1}});
    EXPECT_THROW(ultrasparsify(dis, 2), std::invalid_argument);
    EXPECT_THROW(ultrasparsify(path_graph(201), 2), std::length_error);
    EXPECT_THROW(ultrasparsify(path_graph(5), 0.5), std::invalid_argument);
}
