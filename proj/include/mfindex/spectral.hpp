// spectral.hpp
// Lowest eigenpairs of the generalized problem W phi = lambda A phi with
// diagonal positive A. Both solvers work on the scaled standard problem
// C y = lambda y, C = A^-1/2 W A^-1/2, and map back phi = A^-1/2 y.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mfindex/manifold.hpp"

namespace mfindex {

/// Ascending eigenvalues with A-orthonormal eigenvectors stored column-wise.
/// The largest-magnitude entry of every vector is positive.
struct EigenBasis {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;  // n x count

    std::size_t count() const { return static_cast<std::size_t>(values.size()); }
    std::size_t size() const { return static_cast<std::size_t>(vectors.rows()); }
    Eigen::VectorXd vector(std::size_t i) const { return vectors.col(static_cast<Eigen::Index>(i)); }
};

enum class EigenMethod { Auto, Lanczos, Dense };

struct SolverOptions {
    EigenMethod method = EigenMethod::Auto;
    /// Auto uses the dense path at or below this size, or when p exceeds n / dense_fraction.
    std::size_t dense_threshold = 300;
    std::size_t dense_fraction = 8;
    std::size_t block_size = 4;
    /// Cap on the Krylov basis size; 0 means n (always terminates exactly).
    std::size_t max_basis = 0;
    /// Convergence threshold on ||C y - lambda y|| for unit y.
    double tolerance = 1e-10;
    std::uint64_t seed = 0x6d66696e646578ULL;
};

/// The p algebraically smallest eigenpairs. Throws ParameterError for
/// p outside [1, n] and ConvergenceError when max_basis is reached first.
EigenBasis solve_generalized(const WeightMatrix& w, const MassMatrix& a, std::size_t p,
                             const SolverOptions& options = {});

/// All n eigenpairs by dense symmetric decomposition. Throws SizeError for n > 2000.
EigenBasis dense_oracle(const WeightMatrix& w, const MassMatrix& a);

inline constexpr std::size_t kDenseOracleLimit = 2000;

/// Flips each column so its largest-magnitude entry (first on ties) is positive.
void fix_signs(Eigen::MatrixXd& vectors);

/// In balanced mode the null space is exactly spanned by connected-component
/// indicators. Replaces numerically-zero pairs (|lambda| <= zero_tol) with the
/// A-normalized indicators so that they carry no floating-point ripple.
/// Leaves the basis untouched if the leading eigenvalues do not match the
/// component count.
void snap_null_space(EigenBasis& basis, const std::vector<std::size_t>& component_labels,
                     const MassMatrix& a, double zero_tol = 1e-10);

/// `index,eigenvalue,phi_1..phi_n` with one row per eigenpair.
void write_eigenbasis(const std::string& path, const EigenBasis& basis);

}  // namespace mfindex
