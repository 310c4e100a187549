#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "mfindex/error.hpp"
#include "mfindex/manifold.hpp"
#include "oracles.hpp"

using namespace mfindex;

namespace {

Eigen::MatrixXd dense(const SparseMatrix& m) { return Eigen::MatrixXd(m); }

PointMatrix line3() {
    // Unit vectors at angles 0, 0.1, 0.3: the middle one is nearest to both ends.
    PointMatrix p(3, 2);
    const double a[] = {0.0, 0.1, 0.3};
    for (int i = 0; i < 3; ++i) p.row(i) << std::cos(a[i]), std::sin(a[i]);
    return p;
}

}  // namespace

TEST(Knn, CollinearMiddleIsNearest) {
    const AdjacencyGraph g = knn_graph(line3(), 1);
    EXPECT_EQ(g.neighbors(0)[0], 1u);
    EXPECT_EQ(g.neighbors(2)[0], 1u);
    EXPECT_EQ(g.neighbors(1)[0], 0u);
}

TEST(Knn, CompleteGraphAtKnMinusOne) {
    std::mt19937_64 rng(1);
    const auto pts = oracle::random_points(rng, 9, 4);
    const AdjacencyGraph g = knn_graph(oracle::to_matrix(pts), 8);
    for (std::size_t i = 0; i < 9; ++i) {
        std::vector<std::size_t> nb(g.neighbors(i).begin(), g.neighbors(i).end());
        std::sort(nb.begin(), nb.end());
        std::vector<std::size_t> want;
        for (std::size_t j = 0; j < 9; ++j)
            if (j != i) want.push_back(j);
        EXPECT_EQ(nb, want);
    }
}

TEST(Knn, DuplicatesAreMutualAtZero) {
    PointMatrix p(4, 2);
    p << 0, 0, 1, 1, 1, 1, 5, 5;
    const AdjacencyGraph g = knn_graph(p, 1);
    EXPECT_EQ(g.neighbors(1)[0], 2u);
    EXPECT_EQ(g.neighbors(2)[0], 1u);
    EXPECT_EQ(g.distances(1)[0], 0.0);
}

TEST(Knn, TiesByIndex) {
    PointMatrix p(4, 1);
    p << 0, 1, -1, 2;  // 1 and 2 are both at distance 1 from 0
    const AdjacencyGraph g = knn_graph(p, 2);
    EXPECT_EQ(g.neighbors(0)[0], 1u);
    EXPECT_EQ(g.neighbors(0)[1], 2u);
}

TEST(Knn, RejectsBadK) {
    PointMatrix p = line3();
    EXPECT_THROW(knn_graph(p, 0), ParameterError);
    EXPECT_THROW(knn_graph(p, 3), ParameterError);
}

TEST(Knn, MatchesOracleAndSerial) {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 10 + rng() % 80, k = 1 + rng() % 9;
        auto pts = oracle::random_points(rng, n, 1 + rng() % 6);
        // force some exact ties
        if (trial % 3 == 0) pts[1] = pts[0];
        const PointMatrix m = oracle::to_matrix(pts);
        const AdjacencyGraph g = knn_graph(m, k);
        EXPECT_EQ(g, knn_graph_serial(m, k));
        const auto want = oracle::knn(pts, k);
        for (std::size_t i = 0; i < n; ++i) {
            ASSERT_EQ(std::vector<std::size_t>(g.neighbors(i).begin(), g.neighbors(i).end()), want[i]);
            for (std::size_t r = 0; r < k; ++r) {
                EXPECT_NE(g.neighbors(i)[r], i);
                EXPECT_GE(g.distances(i)[r], 0.0);
                if (r) EXPECT_LE(g.distances(i)[r - 1], g.distances(i)[r]);
            }
        }
    }
}

TEST(Weights, KernelSpotValues) {
    EXPECT_EQ(-heat_kernel(0.0, 0.37), -1.0);
    EXPECT_NEAR(-heat_kernel(2.5, 2.5), -std::exp(-1.0), 1e-15);
    EXPECT_NEAR(-heat_kernel(1.0, 1.0), -0.367879, 1e-6);
}

TEST(Weights, KernelMonotone) {
    double prev = -1.0;
    for (double d2 = 0.01; d2 < 5; d2 += 0.01) {
        const double w = -heat_kernel(d2, 0.7);
        EXPECT_GT(w, prev);
        EXPECT_LE(w, 0.0);
        prev = w;
    }
}

TEST(Weights, DiagonalIsRowSumOfKernels) {
    // Point 0 has neighbors at d2 = ln 2 and ln 4 with t = 1: kernels 0.5 and 0.25.
    AdjacencyGraph g(3, 2);
    g.neighbors(0)[0] = 1, g.neighbors(0)[1] = 2;
    g.distances(0)[0] = std::log(2.0), g.distances(0)[1] = std::log(4.0);
    g.neighbors(1)[0] = 0, g.neighbors(1)[1] = 2;
    g.distances(1)[0] = std::log(2.0), g.distances(1)[1] = 1.0;
    g.neighbors(2)[0] = 1, g.neighbors(2)[1] = 0;
    g.distances(2)[0] = 1.0, g.distances(2)[1] = std::log(4.0);
    const Eigen::MatrixXd w = dense(weight_tilde(g, 1.0).entries);
    EXPECT_NEAR(w(0, 0), 0.75, 1e-15);
    EXPECT_NEAR(w(0, 1), -0.5, 1e-15);
    EXPECT_NEAR(w(0, 2), -0.25, 1e-15);
    EXPECT_THROW(weight_tilde(g, 0.0), ParameterError);
    EXPECT_THROW(weight_tilde(g, -1.0), ParameterError);
}

TEST(Weights, AsymmetricEdgeAverages) {
    // 0 -> 1 only: w~_01 = -0.4, w~_10 = 0.
    AdjacencyGraph g(3, 1);
    g.neighbors(0)[0] = 1, g.distances(0)[0] = -std::log(0.4);
    g.neighbors(1)[0] = 2, g.distances(1)[0] = -std::log(0.5);
    g.neighbors(2)[0] = 1, g.distances(2)[0] = -std::log(0.5);
    const auto tilde = weight_tilde(g, 1.0);
    const Eigen::MatrixXd paper = dense(symmetrize(tilde, OperatorMode::Paper).entries);
    EXPECT_NEAR(paper(0, 1), -0.2, 1e-15);
    EXPECT_NEAR(paper(1, 0), -0.2, 1e-15);
    EXPECT_NEAR(paper(0, 0), 0.4, 1e-15);  // diagonal unchanged
    EXPECT_NEAR(paper(1, 1), 0.5, 1e-15);

    // Hand-computed balanced version: off-diagonals -0.2 (0-1) and -0.5 (1-2).
    const Eigen::MatrixXd bal = dense(symmetrize(tilde, OperatorMode::Balanced).entries);
    Eigen::Matrix3d want;
    want << 0.2, -0.2, 0.0, -0.2, 0.7, -0.5, 0.0, -0.5, 0.5;
    EXPECT_LT((bal - want).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT(bal.rowwise().sum().cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Weights, SymmetricInputIsFixedPoint) {
    PointMatrix p(2, 1);
    p << 0, 1;
    const auto g = knn_graph(p, 1);
    const auto tilde = weight_tilde(g, 0.5);
    for (auto mode : {OperatorMode::Paper, OperatorMode::Balanced})
        EXPECT_EQ(dense(symmetrize(tilde, mode).entries), dense(tilde.entries));
}

TEST(Weights, MatchesDenseOracle) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 15 + rng() % 50, k = 2 + rng() % 7;
        const auto pts = oracle::random_points(rng, n, 5);
        const auto g = knn_graph(oracle::to_matrix(pts), k);
        const double t = g.mean_squared_distance();
        const auto tilde = weight_tilde(g, t);
        const Eigen::MatrixXd ot = oracle::dense_tilde(pts, oracle::knn(pts, k), t);
        EXPECT_LT((dense(tilde.entries) - ot).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_LT(dense(tilde.entries).rowwise().sum().cwiseAbs().maxCoeff(), 1e-12);
        for (bool balanced : {false, true}) {
            const auto w = symmetrize(tilde, balanced ? OperatorMode::Balanced : OperatorMode::Paper);
            const Eigen::MatrixXd dw = dense(w.entries);
            EXPECT_LT((dw - oracle::dense_symmetric(ot, balanced)).cwiseAbs().maxCoeff(), 1e-14);
            EXPECT_LT((dw - dw.transpose()).cwiseAbs().maxCoeff(), 1e-15);
            for (Eigen::Index i = 0; i < dw.rows(); ++i) {
                EXPECT_GT(dw(i, i), 0.0);
                for (Eigen::Index j = 0; j < dw.cols(); ++j)
                    if (i != j) {
                        EXPECT_LE(dw(i, j), 0.0);
                        EXPECT_GE(dw(i, j), -1.0);
                    }
            }
            if (balanced) EXPECT_LT(dw.rowwise().sum().cwiseAbs().maxCoeff(), 1e-10);
        }
    }
}

TEST(Mass, CopiesDiagonal) {
    WeightMatrix w;
    w.entries = SparseMatrix(3, 3);
    w.entries.insert(0, 0) = 0.75;
    w.entries.insert(1, 1) = 0.5;
    w.entries.insert(2, 2) = 1.25;
    const MassMatrix a = mass_matrix(w);
    EXPECT_EQ(a.diag, Eigen::Vector3d(0.75, 0.5, 1.25));
    w.entries.coeffRef(1, 1) = 0.0;
    EXPECT_THROW(mass_matrix(w), SingularMassError);
}

TEST(Mass, TwoMutualNeighbors) {
    PointMatrix p(2, 1);
    p << 0, 0.3;
    const auto op = build_operator(knn_graph(p, 1), 0.2, OperatorMode::Paper);
    const double w = std::exp(-0.09 / 0.2);
    EXPECT_NEAR(op.mass.diag(0), w, 1e-15);
    EXPECT_NEAR(op.mass.diag(1), w, 1e-15);
}

TEST(Operator, SelfTuningBandwidth) {
    std::mt19937_64 rng(3);
    const auto pts = oracle::random_points(rng, 40, 3);
    const auto g = knn_graph(oracle::to_matrix(pts), 5);
    double s = 0;
    for (std::size_t i = 0; i < 40; ++i)
        for (double d2 : g.distances(i)) s += d2;
    EXPECT_NEAR(resolve_bandwidth(g, 0.0), s / 200, 1e-15);
    EXPECT_EQ(resolve_bandwidth(g, 0.3), 0.3);
    EXPECT_EQ(build_operator(g, -1, OperatorMode::Balanced).weights.t, resolve_bandwidth(g, 0.0));
}

TEST(Operator, ModeText) {
    EXPECT_EQ(parse_operator_mode("paper"), OperatorMode::Paper);
    EXPECT_EQ(parse_operator_mode("balanced"), OperatorMode::Balanced);
    EXPECT_EQ(to_string(OperatorMode::Paper), "paper");
    EXPECT_THROW(parse_operator_mode("other"), ParameterError);
}

TEST(Operator, ConnectedComponents) {
    PointMatrix p(5, 1);
    p << 0, 0.1, 10, 10.1, 10.2;
    const auto labels = connected_components(knn_graph(p, 1));
    EXPECT_EQ(labels, (std::vector<std::size_t>{0, 0, 1, 1, 1}));
}

TEST(Operator, TripletDump) {
    PointMatrix p(3, 1);
    p << 0, 1, 3;
    const auto op = build_operator(knn_graph(p, 1), 1.0, OperatorMode::Balanced);
    const auto path = std::filesystem::temp_directory_path() / "mfindex_w.txt";
    write_triplets(path.string(), op.weights.entries);
    std::ifstream in(path);
    std::size_t i, j, count = 0;
    double v;
    const Eigen::MatrixXd w = dense(op.weights.entries);
    while (in >> i >> j >> v) {
        EXPECT_EQ(v, w(i, j));
        ++count;
    }
    EXPECT_EQ(count, static_cast<std::size_t>(op.weights.entries.nonZeros()));
}
