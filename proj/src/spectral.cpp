#include "mfindex/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Eigenvalues>

#include "mfindex/csv.hpp"
#include "mfindex/error.hpp"
#include "mfindex/rng.hpp"

namespace mfindex {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void check_problem(const WeightMatrix& w, const MassMatrix& a) {
    if (w.entries.rows() != w.entries.cols() || w.entries.rows() != a.diag.size())
        throw ParameterError("W and A dimensions disagree");
    for (Index i = 0; i < a.diag.size(); ++i)
        if (!(a.diag[i] > 0.0)) throw SingularMassError("mass matrix must be positive");
}

// C = A^-1/2 W A^-1/2
SparseMatrix scaled_operator(const WeightMatrix& w, const VectorXd& inv_sqrt_a) {
    SparseMatrix c = w.entries;
    for (Index col = 0; col < c.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(c, col); it; ++it)
            it.valueRef() *= inv_sqrt_a[it.row()] * inv_sqrt_a[it.col()];
    return c;
}

EigenBasis finish(const VectorXd& values, const MatrixXd& y, const VectorXd& inv_sqrt_a) {
    EigenBasis basis;
    basis.values = values;
    basis.vectors = inv_sqrt_a.asDiagonal() * y;
    fix_signs(basis.vectors);
    return basis;
}

void fill_random(MatrixXd& block, CounterRng& rng) {
    for (Index j = 0; j < block.cols(); ++j)
        for (Index i = 0; i < block.rows(); ++i) block(i, j) = rng.uniform() - 0.5;
}

// Orthonormalizes `block` against the first `m` columns of q and within itself.
// Columns that collapse are replaced by fresh random directions; returns the
// number of usable columns (0 when the basis already spans the space).
Index orthonormalize_block(const MatrixXd& q, Index m, MatrixXd& block, CounterRng& rng) {
    const Index n = block.rows();
    Index kept = 0;
    for (Index j = 0; j < block.cols() && m + kept < n; ++j) {
        VectorXd v = block.col(j);
        for (int attempt = 0; attempt < 8; ++attempt) {
            const double before = v.norm();
            // Two classical Gram-Schmidt passes against the basis and the kept block columns.
            for (int pass = 0; pass < 2; ++pass) {
                if (m > 0) v -= q.leftCols(m) * (q.leftCols(m).transpose() * v);
                if (kept > 0) v -= block.leftCols(kept) * (block.leftCols(kept).transpose() * v);
            }
            const double after = v.norm();
            if (before > 0.0 && after > 1e-8 * before) {
                v /= after;
                break;
            }
            v.resize(n);
            for (Index i = 0; i < n; ++i) v[i] = rng.uniform() - 0.5;
            if (attempt == 7) v.setZero();
        }
        if (v.squaredNorm() == 0.0) continue;
        block.col(kept++) = v;
    }
    return kept;
}

EigenBasis solve_dense(const WeightMatrix& w, const MassMatrix& a, std::size_t count) {
    const VectorXd inv_sqrt_a = a.diag.cwiseSqrt().cwiseInverse();
    const MatrixXd c = MatrixXd(scaled_operator(w, inv_sqrt_a));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(c);
    if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", NAN);
    const auto p = static_cast<Index>(count);
    return finish(es.eigenvalues().head(p), es.eigenvectors().leftCols(p), inv_sqrt_a);
}

// Block Krylov iteration with full reorthogonalization and Rayleigh-Ritz
// extraction of the smallest Ritz pairs.
EigenBasis solve_lanczos(const WeightMatrix& w, const MassMatrix& a, std::size_t count,
                         const SolverOptions& opt) {
    const VectorXd inv_sqrt_a = a.diag.cwiseSqrt().cwiseInverse();
    const SparseMatrix c = scaled_operator(w, inv_sqrt_a);
    const Index n = c.rows();
    const Index p = static_cast<Index>(count);
    const Index b = std::clamp<Index>(static_cast<Index>(opt.block_size), 1, n);
    const Index cap = opt.max_basis == 0 ? n : std::clamp<Index>(static_cast<Index>(opt.max_basis), p, n);

    CounterRng rng(opt.seed, static_cast<std::uint64_t>(n));
    MatrixXd q(n, cap);      // orthonormal basis
    MatrixXd cq(n, cap);     // C * q
    MatrixXd h(cap, cap);    // q^T C q
    Index m = 0;

    MatrixXd block(n, b);
    fill_random(block, rng);

    Index next_rr = std::max<Index>(p + b, 2 * b);
    double worst = NAN;
    while (true) {
        const Index added = orthonormalize_block(q, m, block, rng);
        const Index usable = std::min(added, cap - m);
        if (usable > 0) {
            q.middleCols(m, usable) = block.leftCols(usable);
            cq.middleCols(m, usable) = c * block.leftCols(usable);
            h.block(0, m, m + usable, usable) = q.leftCols(m + usable).transpose() * cq.middleCols(m, usable);
            h.block(m, 0, usable, m) = h.block(0, m, m, usable).transpose();
            m += usable;
        }
        const bool exhausted = (usable == 0 || m >= cap);

        if (m >= p && (m >= next_rr || exhausted)) {
            MatrixXd hm = h.topLeftCorner(m, m);
            hm = 0.5 * (hm + hm.transpose()).eval();
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(hm);
            if (es.info() != Eigen::Success) throw ConvergenceError("Rayleigh-Ritz step failed", NAN);
            const MatrixXd s = es.eigenvectors().leftCols(p);
            const VectorXd theta = es.eigenvalues().head(p);
            MatrixXd y = q.leftCols(m) * s;
            const MatrixXd r = cq.leftCols(m) * s - y * theta.asDiagonal();
            worst = 0.0;
            bool converged = true;
            for (Index j = 0; j < p; ++j) {
                const double res = r.col(j).norm();
                worst = std::max(worst, res);
                if (res > opt.tolerance * std::max(1.0, std::abs(theta[j]))) converged = false;
            }
            if (converged || (exhausted && m == n)) {
                // Re-orthonormalize against drift before mapping back.
                Eigen::HouseholderQR<MatrixXd> qr(y);
                MatrixXd yq = qr.householderQ() * MatrixXd::Identity(n, p);
                for (Index j = 0; j < p; ++j)
                    if (yq.col(j).dot(y.col(j)) < 0.0) yq.col(j) *= -1.0;
                VectorXd values(p);
                for (Index j = 0; j < p; ++j) values[j] = yq.col(j).dot(c * yq.col(j));
                // Rayleigh quotients may reorder near-degenerate pairs by an ulp.
                std::vector<Index> order(static_cast<std::size_t>(p));
                for (Index j = 0; j < p; ++j) order[static_cast<std::size_t>(j)] = j;
                std::stable_sort(order.begin(), order.end(), [&](Index x, Index z) { return values[x] < values[z]; });
                VectorXd sorted_values(p);
                MatrixXd sorted_vectors(n, p);
                for (Index j = 0; j < p; ++j) {
                    sorted_values[j] = values[order[static_cast<std::size_t>(j)]];
                    sorted_vectors.col(j) = yq.col(order[static_cast<std::size_t>(j)]);
                }
                return finish(sorted_values, sorted_vectors, inv_sqrt_a);
            }
            next_rr = std::max(m + b, m + m / 4);
        }
        if (exhausted) break;
        block = cq.middleCols(m - usable, usable);
        if (usable < b) {
            MatrixXd extra(n, b - usable);
            fill_random(extra, rng);
            MatrixXd full(n, b);
            full << block, extra;
            block = std::move(full);
        }
    }
    throw ConvergenceError("Krylov basis reached " + std::to_string(m) + " vectors without convergence", worst);
}

}  // namespace

void fix_signs(Eigen::MatrixXd& vectors) {
    for (Index j = 0; j < vectors.cols(); ++j) {
        Index best = 0;
        double mag = -1.0;
        for (Index i = 0; i < vectors.rows(); ++i) {
            const double v = std::abs(vectors(i, j));
            if (v > mag) {
                mag = v;
                best = i;
            }
        }
        if (vectors.rows() > 0 && vectors(best, j) < 0.0) vectors.col(j) *= -1.0;
    }
}

EigenBasis solve_generalized(const WeightMatrix& w, const MassMatrix& a, std::size_t p,
                             const SolverOptions& options) {
    check_problem(w, a);
    const auto n = static_cast<std::size_t>(w.entries.rows());
    if (p < 1 || p > n)
        throw ParameterError("requested " + std::to_string(p) + " eigenpairs of an n = " + std::to_string(n) +
                             " problem");
    EigenMethod method = options.method;
    if (method == EigenMethod::Auto) {
        const bool small = n <= options.dense_threshold;
        const bool wide = options.dense_fraction > 0 && p * options.dense_fraction > n;
        method = (small || wide) && n <= kDenseOracleLimit ? EigenMethod::Dense : EigenMethod::Lanczos;
    }
    if (method == EigenMethod::Dense) {
        if (n > kDenseOracleLimit) throw SizeError("dense eigensolver limited to n <= 2000");
        return solve_dense(w, a, p);
    }
    return solve_lanczos(w, a, p, options);
}

EigenBasis dense_oracle(const WeightMatrix& w, const MassMatrix& a) {
    check_problem(w, a);
    const auto n = static_cast<std::size_t>(w.entries.rows());
    if (n > kDenseOracleLimit)
        throw SizeError("dense oracle limited to n <= " + std::to_string(kDenseOracleLimit) + " (n = " +
                        std::to_string(n) + ")");
    return solve_dense(w, a, n);
}

void snap_null_space(EigenBasis& basis, const std::vector<std::size_t>& labels, const MassMatrix& a,
                     double zero_tol) {
    if (labels.empty() || basis.count() == 0) return;
    const std::size_t components = *std::max_element(labels.begin(), labels.end()) + 1;
    const std::size_t snapped = std::min(components, basis.count());
    for (std::size_t j = 0; j < snapped; ++j)
        if (!(std::abs(basis.values[static_cast<Index>(j)]) <= zero_tol)) return;
    if (components < basis.count() && std::abs(basis.values[static_cast<Index>(components)]) <= zero_tol) return;

    std::vector<double> mass(components, 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) mass[labels[i]] += a.diag[static_cast<Index>(i)];
    for (std::size_t j = 0; j < snapped; ++j) {
        const double v = 1.0 / std::sqrt(mass[j]);
        for (std::size_t i = 0; i < labels.size(); ++i)
            basis.vectors(static_cast<Index>(i), static_cast<Index>(j)) = labels[i] == j ? v : 0.0;
        basis.values[static_cast<Index>(j)] = 0.0;
    }
}

void write_eigenbasis(const std::string& path, const EigenBasis& basis) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "index,eigenvalue";
    for (std::size_t i = 1; i <= basis.size(); ++i) out << ",phi_" << i;
    out << '\n';
    for (std::size_t j = 0; j < basis.count(); ++j) {
        out << (j + 1) << ',' << csv::format_double(basis.values[static_cast<Index>(j)]);
        for (std::size_t i = 0; i < basis.size(); ++i)
            out << ',' << csv::format_double(basis.vectors(static_cast<Index>(i), static_cast<Index>(j)));
        out << '\n';
    }
}

}  // namespace mfindex
