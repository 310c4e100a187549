// synth.hpp
// Deterministic sector-factor market: each stock's daily return is its
// sector's factor return plus idiosyncratic noise. A sector's factor return
// may share a common market component. Draws come from
// counter-based SplitMix64 streams, one per sector and one per stock.

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mfindex/index.hpp"
#include "mfindex/marketdata.hpp"

namespace mfindex {

struct SynthConfig {
    std::size_t n_stocks = 300;
    std::size_t m_days = 244;      // trading days per year
    std::size_t n_sectors = 8;
    double market_vol = 0.0;       // daily return standard deviations
    double sector_vol = 0.012;
    double idio_vol = 0.010;
    double cap_log_mean = 22.0;    // ln(market cap)
    double cap_log_sd = 1.0;
    std::uint64_t seed = 1;
    int start_year = 2017;
    std::size_t n_years = 2;

    /// Throws ParameterError describing the first violated constraint.
    void validate() const;
};

struct SynthMarket {
    QuoteBook quotes;
    IndexSeries benchmark;               // cap-weighted over all stocks, base level 1000
    std::vector<std::size_t> sector_of;  // aligned with tickers in quotes order
};

/// Weekdays of `year` after New Year's Day, first `m_days` of them.
std::vector<Date> synthetic_calendar(int year, std::size_t m_days);

SynthMarket generate_market(const SynthConfig& config);

}  // namespace mfindex
