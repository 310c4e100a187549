#include "mfindex/selection.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>

#include "mfindex/csv.hpp"
#include "mfindex/error.hpp"

namespace mfindex {

std::string_view to_string(ExtremumKind kind) { return kind == ExtremumKind::Max ? "max" : "min"; }

namespace {

// 1 = maximum, 2 = minimum, 0 = neither.
std::uint8_t classify(std::span<const double> phi, const AdjacencyGraph& graph, std::size_t x) {
    const double fx = phi[x];
    bool is_max = true;
    bool is_min = true;
    for (std::size_t y : graph.neighbors(x)) {
        const double fy = phi[y];
        if (!(fy < fx)) is_max = false;
        if (!(fy > fx)) is_min = false;
        if (!is_max && !is_min) return 0;
    }
    return is_max ? 1 : (is_min ? 2 : 0);
}

Extrema collect(const std::vector<std::uint8_t>& flags) {
    Extrema out;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (flags[i] == 1) out.maxima.push_back(i);
        else if (flags[i] == 2) out.minima.push_back(i);
    }
    return out;
}

void check_length(std::span<const double> phi, const AdjacencyGraph& graph) {
    if (phi.size() != graph.size())
        throw ParameterError("eigenvector length " + std::to_string(phi.size()) + " does not match graph size " +
                             std::to_string(graph.size()));
}

}  // namespace

Extrema detect_extrema(std::span<const double> phi, const AdjacencyGraph& graph) {
    check_length(phi, graph);
    const auto n = static_cast<std::ptrdiff_t>(graph.size());
    std::vector<std::uint8_t> flags(graph.size(), 0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) flags[i] = classify(phi, graph, static_cast<std::size_t>(i));
    return collect(flags);
}

Extrema detect_extrema_serial(std::span<const double> phi, const AdjacencyGraph& graph) {
    check_length(phi, graph);
    std::vector<std::uint8_t> flags(graph.size(), 0);
    for (std::size_t i = 0; i < graph.size(); ++i) flags[i] = classify(phi, graph, i);
    return collect(flags);
}

bool FeatureSet::insert(std::size_t point, FeatureOrigin origin) {
    if (present_[point]) return false;
    present_[point] = true;
    members_.push_back(point);
    origins_.push_back(origin);
    return true;
}

void FeatureSet::trim_to(std::size_t target, std::span<const double> caps) {
    if (members_.size() <= target) return;
    std::vector<std::size_t> order(members_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const std::size_t pa = members_[a], pb = members_[b];
        if (caps[pa] != caps[pb]) return caps[pa] < caps[pb];
        return pa < pb;
    });
    std::vector<bool> drop(members_.size(), false);
    for (std::size_t r = 0; r < members_.size() - target; ++r) drop[order[r]] = true;

    std::vector<std::size_t> kept_members;
    std::vector<FeatureOrigin> kept_origins;
    for (std::size_t i = 0; i < members_.size(); ++i) {
        if (drop[i]) {
            present_[members_[i]] = false;
            continue;
        }
        kept_members.push_back(members_[i]);
        kept_origins.push_back(origins_[i]);
    }
    members_ = std::move(kept_members);
    origins_ = std::move(kept_origins);
}

FeatureSet select_constituents(const EigenBasis& basis, const AdjacencyGraph& graph, std::size_t target,
                               std::span<const double> caps) {
    if (target < 1) throw ParameterError("constituent count must be at least 1");
    if (caps.size() != graph.size()) throw ParameterError("one market cap per point is required");
    if (basis.size() != graph.size()) throw ParameterError("eigenbasis and graph sizes disagree");

    FeatureSet features(graph.size());
    for (std::size_t k = 0; k < basis.count() && features.size() < target; ++k) {
        const Eigen::VectorXd phi = basis.vector(k);
        const Extrema ext = detect_extrema(std::span<const double>(phi.data(), static_cast<std::size_t>(phi.size())), graph);
        // Union in ascending point order; a point cannot be both a max and a min (k >= 1).
        std::size_t a = 0, b = 0;
        while (a < ext.maxima.size() || b < ext.minima.size()) {
            if (b == ext.minima.size() || (a < ext.maxima.size() && ext.maxima[a] < ext.minima[b]))
                features.insert(ext.maxima[a++], {k, ExtremumKind::Max});
            else
                features.insert(ext.minima[b++], {k, ExtremumKind::Min});
        }
    }
    if (features.size() < target) throw InsufficientFeaturesError(features.size(), target);
    features.trim_to(target, caps);
    return features;
}

void write_constituents(const std::string& path, const FeatureSet& features,
                        const std::vector<std::string>& tickers, std::span<const double> caps) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "rank,ticker,source_eigenvector,extremum_kind,market_cap\n";
    for (std::size_t r = 0; r < features.size(); ++r) {
        const std::size_t p = features.members()[r];
        const FeatureOrigin& o = features.origins()[r];
        out << (r + 1) << ',' << tickers[p] << ',' << (o.eigenvector + 1) << ',' << to_string(o.kind) << ','
            << csv::format_double(caps[p]) << '\n';
    }
}

std::vector<std::string> read_constituents(const std::string& path) {
    csv::Reader r(path);
    const auto c_rank = r.require("rank");
    const auto c_ticker = r.require("ticker");
    std::map<long long, std::string> ranked;
    while (r.next()) {
        const long long rank = r.integer(c_rank);
        if (!ranked.emplace(rank, r.field(c_ticker)).second) r.fail("duplicate rank " + std::to_string(rank));
    }
    std::vector<std::string> out;
    for (auto& [rank, t] : ranked) out.push_back(std::move(t));
    if (out.empty()) throw EmptyUniverseError("constituent list " + path + " is empty");
    return out;
}

}  // namespace mfindex
