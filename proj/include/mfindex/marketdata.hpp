// marketdata.hpp
// Quote ingestion and the three preprocessing steps that turn daily closes
// into unit-norm stock vectors: forward-fill completion, listing/delisting
// screening, and normalization.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mfindex/date.hpp"

namespace mfindex {

struct RawQuote {
    std::string ticker;
    Date date;
    std::optional<double> close;          // absent on suspension / before listing
    std::optional<double> shares_issued;
};

/// Quotes grouped by ticker, each group sorted by date.
using QuoteBook = std::map<std::string, std::vector<RawQuote>>;

/// A calendar-aligned series where absent entries are nullopt.
using SparseSeries = std::vector<std::optional<double>>;

class TradingCalendar {
public:
    TradingCalendar() = default;
    /// Throws ParameterError unless dates are strictly increasing and at least two.
    explicit TradingCalendar(std::vector<Date> dates);

    /// Every distinct quote date inside `window`.
    static TradingCalendar from_quotes(const QuoteBook& book, const DateRange& window);

    std::size_t m() const { return dates_.size(); }
    const std::vector<Date>& dates() const { return dates_; }
    const Date& front() const { return dates_.front(); }
    const Date& back() const { return dates_.back(); }
    std::optional<std::size_t> index_of(const Date& d) const;

private:
    std::vector<Date> dates_;
};

struct StockVector {
    std::string ticker;
    std::vector<double> components;
};

/// Row-major n x m matrix of points, one stock per row.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct MarketFrame {
    TradingCalendar calendar;
    std::vector<StockVector> stocks;   // sorted by ticker
    std::vector<double> caps;          // aligned with stocks, close * shares at the selection date

    std::size_t n() const { return stocks.size(); }
    PointMatrix points() const;
    std::vector<std::string> tickers() const;
};

/// Reads the quote CSV (`date,ticker,close,shares_issued`, extra columns ignored).
/// Rows outside `window` are dropped. Throws ParseError on malformed or duplicate
/// rows and EmptyUniverseError when no rows remain.
QuoteBook load_quotes(const std::string& path, std::optional<DateRange> window = std::nullopt);

void write_quotes(const std::string& path, const QuoteBook& book);

/// Places one ticker's closes (or share counts) on the calendar; dates without a row are absent.
SparseSeries align_closes(std::span<const RawQuote> quotes, const TradingCalendar& calendar);
SparseSeries align_shares(std::span<const RawQuote> quotes, const TradingCalendar& calendar);

/// Forward-fills every gap with the latest preceding value. Leading gaps stay absent.
SparseSeries forward_fill(const SparseSeries& series);

/// Dense forward-filled closes, or nullopt when the first calendar date has no close.
std::optional<std::vector<double>> complete_series(const SparseSeries& series);
std::optional<std::vector<double>> complete_series(std::span<const RawQuote> quotes,
                                                   const TradingCalendar& calendar);

/// Tickers with a close on both the first and the last calendar date.
/// Throws EmptyUniverseError when nothing survives.
std::vector<std::string> screen_universe(const std::map<std::string, SparseSeries>& all_series);

/// v / ||v||. Throws NormalizationError for a zero (or non-finite) vector.
std::vector<double> normalize(std::span<const double> series);

/// Completion, screening and normalization in that order; caps taken at `selection_date`.
MarketFrame build_market_frame(const QuoteBook& book, const TradingCalendar& calendar,
                               const Date& selection_date);

/// Forward-filled closes and share counts for a set of tickers over one calendar.
/// Used for index valuation, where leading gaps mean "not yet priced".
struct PriceTable {
    TradingCalendar calendar;
    std::map<std::string, SparseSeries> closes;
    std::map<std::string, SparseSeries> shares;
    std::map<std::string, std::size_t> last_row_day;  // last calendar day carrying any row

    std::optional<double> close(const std::string& ticker, std::size_t day) const;
    std::optional<double> shares_at(const std::string& ticker, std::size_t day) const;
    bool has(const std::string& ticker) const { return closes.count(ticker) != 0; }
};

PriceTable build_price_table(const QuoteBook& book, const TradingCalendar& calendar);

}  // namespace mfindex
