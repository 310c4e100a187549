// selection.hpp
// Feature-point detection on eigenvectors and constituent accumulation.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mfindex/manifold.hpp"
#include "mfindex/spectral.hpp"

namespace mfindex {

enum class ExtremumKind { Max, Min };

std::string_view to_string(ExtremumKind kind);

/// Strict local extrema of a scalar field over the directed KNN neighborhoods.
/// Both lists are sorted ascending.
struct Extrema {
    std::vector<std::size_t> maxima;
    std::vector<std::size_t> minima;
};

/// x is a maximum iff phi(y) < phi(x) for every y in N_x, a minimum iff
/// phi(y) > phi(x) for every y in N_x. Exact comparisons, parallel over points.
Extrema detect_extrema(std::span<const double> phi, const AdjacencyGraph& graph);

/// Single-threaded reference for detect_extrema.
Extrema detect_extrema_serial(std::span<const double> phi, const AdjacencyGraph& graph);

struct FeatureOrigin {
    std::size_t eigenvector;  // 0-based position in the eigenbasis
    ExtremumKind kind;
};

/// Insertion-ordered set of point indices, remembering where each came from.
class FeatureSet {
public:
    explicit FeatureSet(std::size_t universe) : present_(universe, false) {}

    /// Adds the point unless already present; returns whether it was added.
    bool insert(std::size_t point, FeatureOrigin origin);
    bool contains(std::size_t point) const { return present_[point]; }
    std::size_t size() const { return members_.size(); }

    const std::vector<std::size_t>& members() const { return members_; }
    const std::vector<FeatureOrigin>& origins() const { return origins_; }

    /// Drops members with the smallest caps (ties: lower index first) until `target` remain.
    void trim_to(std::size_t target, std::span<const double> caps);

private:
    std::vector<bool> present_;
    std::vector<std::size_t> members_;
    std::vector<FeatureOrigin> origins_;
};

/// Accumulates the extrema of phi_1, phi_2, ... until at least `target` points
/// are collected, then trims by market cap to exactly `target`.
/// Throws InsufficientFeaturesError when the basis runs out first.
FeatureSet select_constituents(const EigenBasis& basis, const AdjacencyGraph& graph, std::size_t target,
                               std::span<const double> caps);

/// Constituent list as `rank,ticker,source_eigenvector,extremum_kind,market_cap`;
/// eigenvector numbers are 1-based.
void write_constituents(const std::string& path, const FeatureSet& features,
                        const std::vector<std::string>& tickers, std::span<const double> caps);

/// Reads back the ticker column of a constituent list, in rank order.
std::vector<std::string> read_constituents(const std::string& path);

}  // namespace mfindex
