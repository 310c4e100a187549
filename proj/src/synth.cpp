#include "mfindex/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mfindex/error.hpp"
#include "mfindex/rng.hpp"

namespace mfindex {

void SynthConfig::validate() const {
    if (n_sectors < 1) throw ParameterError("n_sectors must be at least 1");
    if (n_stocks < n_sectors) throw ParameterError("n_stocks must be at least n_sectors");
    if (m_days < 20) throw ParameterError("m_days must be at least 20");
    if (m_days > 250) throw ParameterError("m_days must not exceed 250 weekdays per year");
    if (!(market_vol >= 0.0) || !(sector_vol >= 0.0) || !(idio_vol >= 0.0)) throw ParameterError("volatilities must be nonnegative");
    if (!(cap_log_sd >= 0.0)) throw ParameterError("cap_log_sd must be nonnegative");
    if (n_years < 1) throw ParameterError("n_years must be at least 1");
}

std::vector<Date> synthetic_calendar(int year, std::size_t m_days) {
    using namespace std::chrono;
    std::vector<Date> out;
    sys_days d = sys_days{std::chrono::year{year} / January / 2};
    const sys_days end = sys_days{std::chrono::year{year} / December / 31};
    while (out.size() < m_days && d <= end) {
        const weekday wd{d};
        if (wd != Saturday && wd != Sunday) out.emplace_back(d);
        d += days{1};
    }
    return out;
}

SynthMarket generate_market(const SynthConfig& config) {
    config.validate();
    std::vector<Date> dates;
    for (std::size_t y = 0; y < config.n_years; ++y) {
        auto year_dates = synthetic_calendar(config.start_year + static_cast<int>(y), config.m_days);
        dates.insert(dates.end(), year_dates.begin(), year_dates.end());
    }
    const std::size_t days = dates.size();
    const std::size_t n = config.n_stocks;

    std::vector<double> common(days, 0.0);
    {
        CounterRng rng(config.seed, std::uint64_t{1} << 41);
        for (std::size_t d = 1; d < days; ++d) common[d] = config.market_vol * rng.normal();
    }
    std::vector<std::vector<double>> factors(config.n_sectors, std::vector<double>(days, 0.0));
    for (std::size_t s = 0; s < config.n_sectors; ++s) {
        CounterRng rng(config.seed, (std::uint64_t{1} << 40) + s);
        for (std::size_t d = 1; d < days; ++d) factors[s][d] = common[d] + config.sector_vol * rng.normal();
    }

    SynthMarket market;
    std::vector<std::vector<double>> prices(n, std::vector<double>(days));
    std::vector<double> shares(n);
    std::vector<std::string> tickers(n);
    const int width = n < 10000 ? 4 : 8;
    for (std::size_t i = 0; i < n; ++i) {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "S%0*zu", width, i);
        tickers[i] = buf;
        const std::size_t sector = i % config.n_sectors;
        CounterRng rng(config.seed, i);
        const double p0 = 100.0 * (1.0 + 0.05 * (2.0 * rng.uniform() - 1.0));
        const double cap0 = std::exp(config.cap_log_mean + config.cap_log_sd * rng.normal());
        shares[i] = cap0 / p0;
        prices[i][0] = p0;
        for (std::size_t d = 1; d < days; ++d) {
            const double r = std::max(factors[sector][d] + config.idio_vol * rng.normal(), -0.99);
            prices[i][d] = prices[i][d - 1] * (1.0 + r);
        }
        market.sector_of.push_back(sector);
    }

    for (std::size_t i = 0; i < n; ++i) {
        auto& quotes = market.quotes[tickers[i]];
        quotes.reserve(days);
        for (std::size_t d = 0; d < days; ++d) quotes.push_back({tickers[i], dates[d], prices[i][d], shares[i]});
    }

    double base_cap = 0.0;
    for (std::size_t i = 0; i < n; ++i) base_cap += prices[i][0] * shares[i];
    market.benchmark.dates = dates;
    for (std::size_t d = 0; d < days; ++d) {
        double cap = 0.0;
        for (std::size_t i = 0; i < n; ++i) cap += prices[i][d] * shares[i];
        market.benchmark.values.push_back(cap / base_cap * kDefaultBaseLevel);
    }
    return market;
}

}  // namespace mfindex
