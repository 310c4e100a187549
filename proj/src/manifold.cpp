#include "mfindex/manifold.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <utility>

#include "mfindex/csv.hpp"
#include "mfindex/error.hpp"

namespace mfindex {

std::string_view to_string(OperatorMode mode) {
    return mode == OperatorMode::Paper ? "paper" : "balanced";
}

OperatorMode parse_operator_mode(std::string_view text) {
    if (text == "paper") return OperatorMode::Paper;
    if (text == "balanced") return OperatorMode::Balanced;
    throw ParameterError("unknown operator mode '" + std::string(text) + "' (expected paper|balanced)");
}

AdjacencyGraph::AdjacencyGraph(std::size_t n, std::size_t k)
    : n_(n), k_(k), neighbors_(n * k), distances_(n * k) {}

double AdjacencyGraph::mean_squared_distance() const {
    if (distances_.empty()) return 0.0;
    return std::accumulate(distances_.begin(), distances_.end(), 0.0) / static_cast<double>(distances_.size());
}

namespace {

void check_k(std::size_t n, std::size_t k) {
    if (k < 1 || k >= n)
        throw ParameterError("k must satisfy 1 <= k < n (k = " + std::to_string(k) +
                             ", n = " + std::to_string(n) + ")");
}

// Fills row i of the graph. `scratch` holds (d2, j) for every other point.
void knn_row(const PointMatrix& points, std::size_t i, std::size_t k,
             std::vector<std::pair<double, std::size_t>>& scratch, AdjacencyGraph& graph) {
    const auto n = static_cast<std::size_t>(points.rows());
    scratch.clear();
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double d2 = (points.row(static_cast<Eigen::Index>(i)) -
                           points.row(static_cast<Eigen::Index>(j))).squaredNorm();
        scratch.emplace_back(d2, j);
    }
    std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k), scratch.end());
    auto nb = graph.neighbors(i);
    auto ds = graph.distances(i);
    for (std::size_t r = 0; r < k; ++r) {
        ds[r] = scratch[r].first;
        nb[r] = scratch[r].second;
    }
}

}  // namespace

AdjacencyGraph knn_graph(const PointMatrix& points, std::size_t k) {
    const auto n = static_cast<std::size_t>(points.rows());
    check_k(n, k);
    AdjacencyGraph graph(n, k);
#pragma omp parallel
    {
        std::vector<std::pair<double, std::size_t>> scratch;
        scratch.reserve(n);
#pragma omp for schedule(dynamic, 8)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
            knn_row(points, static_cast<std::size_t>(i), k, scratch, graph);
    }
    return graph;
}

AdjacencyGraph knn_graph(const MarketFrame& frame, std::size_t k) { return knn_graph(frame.points(), k); }

AdjacencyGraph knn_graph_serial(const PointMatrix& points, std::size_t k) {
    const auto n = static_cast<std::size_t>(points.rows());
    check_k(n, k);
    AdjacencyGraph graph(n, k);
    std::vector<std::pair<double, std::size_t>> scratch;
    scratch.reserve(n);
    for (std::size_t i = 0; i < n; ++i) knn_row(points, i, k, scratch, graph);
    return graph;
}

DirectedWeights weight_tilde(const AdjacencyGraph& graph, double t) {
    if (!(t > 0.0)) throw ParameterError("kernel bandwidth t must be positive");
    const std::size_t n = graph.size();
    const std::size_t k = graph.k();

    std::vector<double> kernel(n * k);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        const auto ds = graph.distances(static_cast<std::size_t>(i));
        for (std::size_t r = 0; r < k; ++r) kernel[static_cast<std::size_t>(i) * k + r] = heat_kernel(ds[r], t);
    }

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(n * (k + 1));
    for (std::size_t i = 0; i < n; ++i) {
        const auto nb = graph.neighbors(i);
        double diag = 0.0;
        for (std::size_t r = 0; r < k; ++r) {
            const double w = kernel[i * k + r];
            triplets.emplace_back(static_cast<int>(i), static_cast<int>(nb[r]), -w);
            diag += w;
        }
        triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), diag);
    }
    DirectedWeights out;
    out.t = t;
    out.entries.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    out.entries.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

WeightMatrix symmetrize(const DirectedWeights& tilde, OperatorMode mode) {
    const SparseMatrix& wt = tilde.entries;
    if (wt.rows() != wt.cols()) throw ParameterError("weight matrix must be square");
    SparseMatrix transposed = wt.transpose();
    WeightMatrix w;
    w.t = tilde.t;
    w.mode = mode;
    // Evaluate entrywise as 0.5 * (a + b) so (i,j) and (j,i) round identically.
    w.entries = (wt + transposed) * 0.5;
    w.entries.prune(0.0);

    if (mode == OperatorMode::Balanced) {
        const Eigen::Index n = w.entries.rows();
        Eigen::VectorXd off(n);
        off.setZero();
        for (Eigen::Index c = 0; c < w.entries.outerSize(); ++c)
            for (SparseMatrix::InnerIterator it(w.entries, c); it; ++it)
                if (it.row() != it.col()) off[it.row()] -= it.value();
        for (Eigen::Index c = 0; c < w.entries.outerSize(); ++c)
            for (SparseMatrix::InnerIterator it(w.entries, c); it; ++it)
                if (it.row() == it.col()) it.valueRef() = off[it.row()];
    }
    return w;
}

MassMatrix mass_matrix(const WeightMatrix& w) {
    MassMatrix a;
    a.diag = w.entries.diagonal();
    for (Eigen::Index i = 0; i < a.diag.size(); ++i) {
        if (!(a.diag[i] > 1e-300))
            throw SingularMassError("mass entry a_" + std::to_string(i) + " = " + csv::format_double(a.diag[i]) +
                                    " (isolated point)");
    }
    return a;
}

double resolve_bandwidth(const AdjacencyGraph& graph, double t) {
    if (t > 0.0) return t;
    const double mean = graph.mean_squared_distance();
    // Every neighbor coincides with its point; any positive bandwidth yields unit kernels.
    return mean > 0.0 ? mean : 1.0;
}

DiscreteOperator build_operator(const AdjacencyGraph& graph, double t, OperatorMode mode) {
    auto w = symmetrize(weight_tilde(graph, resolve_bandwidth(graph, t)), mode);
    auto a = mass_matrix(w);
    return {std::move(w), std::move(a)};
}

void write_triplets(const std::string& path, const SparseMatrix& m) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    for (Eigen::Index c = 0; c < m.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(m, c); it; ++it)
            out << it.row() << ' ' << it.col() << ' ' << csv::format_double(it.value()) << '\n';
}

void write_triplets(const std::string& path, const MassMatrix& a) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    for (Eigen::Index i = 0; i < a.diag.size(); ++i)
        out << i << ' ' << i << ' ' << csv::format_double(a.diag[i]) << '\n';
}

std::vector<std::size_t> connected_components(const AdjacencyGraph& graph) {
    const std::size_t n = graph.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j : graph.neighbors(i)) {
            auto a = find(i), b = find(j);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    std::vector<std::size_t> label(n);
    std::vector<std::size_t> root_label(n, n);
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        auto r = find(i);
        if (root_label[r] == n) root_label[r] = next++;
        label[i] = root_label[r];
    }
    return label;
}

}  // namespace mfindex
