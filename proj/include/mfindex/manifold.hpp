// manifold.hpp
// KNN adjacency graph over stock vectors and the discrete Laplace-Beltrami
// pair (W, A) built from Gaussian-kernel weights.

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "mfindex/marketdata.hpp"

namespace mfindex {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// `paper`: A is the pre-symmetrization diagonal. `balanced`: the diagonal is
/// recomputed from the symmetrized off-diagonals so W has zero row sums.
enum class OperatorMode { Paper, Balanced };

std::string_view to_string(OperatorMode mode);
OperatorMode parse_operator_mode(std::string_view text);

/// Directed k-nearest-neighbor graph. Neighbor lists are sorted by
/// (squared distance, index) and never contain the point itself.
class AdjacencyGraph {
public:
    AdjacencyGraph(std::size_t n, std::size_t k);

    std::size_t size() const { return n_; }
    std::size_t k() const { return k_; }

    std::span<const std::size_t> neighbors(std::size_t i) const { return {&neighbors_[i * k_], k_}; }
    std::span<const double> distances(std::size_t i) const { return {&distances_[i * k_], k_}; }
    std::span<std::size_t> neighbors(std::size_t i) { return {&neighbors_[i * k_], k_}; }
    std::span<double> distances(std::size_t i) { return {&distances_[i * k_], k_}; }

    /// Mean of all stored squared neighbor distances.
    double mean_squared_distance() const;

    friend bool operator==(const AdjacencyGraph&, const AdjacencyGraph&) = default;

private:
    std::size_t n_;
    std::size_t k_;
    std::vector<std::size_t> neighbors_;
    std::vector<double> distances_;  // squared Euclidean
};

/// Exact KNN by brute force, parallel over query points. Ties broken by
/// ascending index. Throws ParameterError unless 1 <= k < n.
AdjacencyGraph knn_graph(const PointMatrix& points, std::size_t k);
AdjacencyGraph knn_graph(const MarketFrame& frame, std::size_t k);

/// Single-threaded reference for knn_graph; results are bit-identical.
AdjacencyGraph knn_graph_serial(const PointMatrix& points, std::size_t k);

/// Kernel value exp(-d2 / t); the off-diagonal weight is its negative.
inline double heat_kernel(double squared_distance, double t);

/// Directed weight matrix before symmetrization.
struct DirectedWeights {
    SparseMatrix entries;
    double t = 0.0;
};

struct WeightMatrix {
    SparseMatrix entries;
    double t = 0.0;
    OperatorMode mode = OperatorMode::Balanced;
};

struct MassMatrix {
    Eigen::VectorXd diag;
};

/// w_ij = -exp(-d2_ij / t) for j in N_i, w_ii = sum_{k != i} -w_ik, 0 elsewhere.
DirectedWeights weight_tilde(const AdjacencyGraph& graph, double t);

/// (W~ + W~^T) / 2, with the diagonal rebuilt from the off-diagonals in balanced mode.
WeightMatrix symmetrize(const DirectedWeights& tilde, OperatorMode mode);

/// a_i = w_ii. Throws SingularMassError when some a_i <= 1e-300.
MassMatrix mass_matrix(const WeightMatrix& w);

struct DiscreteOperator {
    WeightMatrix weights;
    MassMatrix mass;
};

/// Full assembly. `t` <= 0 selects the self-tuning bandwidth (mean squared KNN distance).
DiscreteOperator build_operator(const AdjacencyGraph& graph, double t, OperatorMode mode);

/// Resolves the bandwidth the same way build_operator does.
double resolve_bandwidth(const AdjacencyGraph& graph, double t);

/// `i j value` lines, 0-based, column-major order.
void write_triplets(const std::string& path, const SparseMatrix& m);
void write_triplets(const std::string& path, const MassMatrix& a);

/// Connected components of the symmetrized adjacency; label per point, labels 0.. in first-seen order.
std::vector<std::size_t> connected_components(const AdjacencyGraph& graph);

inline double heat_kernel(double squared_distance, double t) { return std::exp(-squared_distance / t); }

}  // namespace mfindex
