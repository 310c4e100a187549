#include "mfindex/marketdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "mfindex/csv.hpp"
#include "mfindex/error.hpp"

namespace mfindex {

TradingCalendar::TradingCalendar(std::vector<Date> dates) : dates_(std::move(dates)) {
    if (dates_.size() < 2) throw ParameterError("trading calendar needs at least two dates");
    for (std::size_t i = 1; i < dates_.size(); ++i) {
        if (!(dates_[i - 1] < dates_[i]))
            throw ParameterError("trading calendar dates must be strictly increasing at " +
                                 format_date(dates_[i]));
    }
}

TradingCalendar TradingCalendar::from_quotes(const QuoteBook& book, const DateRange& window) {
    std::set<Date> seen;
    for (const auto& [ticker, quotes] : book)
        for (const auto& q : quotes)
            if (window.contains(q.date)) seen.insert(q.date);
    if (seen.size() < 2)
        throw EmptyUniverseError("fewer than two trading dates between " + format_date(window.first) +
                                 " and " + format_date(window.last));
    return TradingCalendar(std::vector<Date>(seen.begin(), seen.end()));
}

std::optional<std::size_t> TradingCalendar::index_of(const Date& d) const {
    auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
    if (it == dates_.end() || *it != d) return std::nullopt;
    return static_cast<std::size_t>(it - dates_.begin());
}

PointMatrix MarketFrame::points() const {
    const auto rows = static_cast<Eigen::Index>(stocks.size());
    const auto cols = static_cast<Eigen::Index>(calendar.m());
    PointMatrix p(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) p(i, j) = stocks[i].components[j];
    return p;
}

std::vector<std::string> MarketFrame::tickers() const {
    std::vector<std::string> out;
    out.reserve(stocks.size());
    for (const auto& s : stocks) out.push_back(s.ticker);
    return out;
}

namespace {

std::optional<double> parse_optional(const csv::Reader& r, std::size_t col, const char* what) {
    const std::string& text = r.field(col);
    if (text.empty() || text == "NA") return std::nullopt;
    auto v = csv::parse_double(text);
    if (!v || !std::isfinite(*v)) r.fail(std::string("bad ") + what + " '" + text + "'");
    return v;
}

}  // namespace

QuoteBook load_quotes(const std::string& path, std::optional<DateRange> window) {
    csv::Reader r(path);
    if (r.empty()) throw EmptyUniverseError("quote file " + path + " is empty");
    const auto c_date = r.require("date");
    const auto c_ticker = r.require("ticker");
    const auto c_close = r.require("close");
    const auto c_shares = r.require("shares_issued");

    QuoteBook book;
    std::map<std::string, std::map<Date, std::size_t>> seen;
    while (r.next()) {
        auto date = parse_date(r.field(c_date));
        if (!date) r.fail("bad date '" + r.field(c_date) + "'");
        const std::string& ticker = r.field(c_ticker);
        if (ticker.empty()) r.fail("empty ticker");
        RawQuote q{ticker, *date, parse_optional(r, c_close, "close"),
                   parse_optional(r, c_shares, "shares_issued")};
        if (q.close && *q.close <= 0.0) r.fail("close must be positive");
        if (q.shares_issued && *q.shares_issued < 0.0) r.fail("shares_issued must be nonnegative");
        auto [it, fresh] = seen[ticker].emplace(q.date, r.line());
        if (!fresh)
            r.fail("duplicate row for (" + ticker + ", " + format_date(q.date) + "), first seen on line " +
                   std::to_string(it->second));
        if (window && !window->contains(q.date)) continue;
        book[ticker].push_back(std::move(q));
    }
    if (book.empty()) throw EmptyUniverseError("no quotes in " + path);

    for (auto& [ticker, quotes] : book)
        std::sort(quotes.begin(), quotes.end(),
                  [](const RawQuote& a, const RawQuote& b) { return a.date < b.date; });
    return book;
}

void write_quotes(const std::string& path, const QuoteBook& book) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    // Date-major order, tickers sorted within a date.
    std::vector<const RawQuote*> rows;
    for (const auto& [t, quotes] : book)
        for (const auto& q : quotes) rows.push_back(&q);
    std::stable_sort(rows.begin(), rows.end(),
                     [](const RawQuote* a, const RawQuote* b) { return a->date < b->date; });
    out << "date,ticker,close,shares_issued\n";
    for (const RawQuote* q : rows) {
        out << format_date(q->date) << ',' << q->ticker << ','
            << (q->close ? csv::format_double(*q->close) : "NA") << ','
            << (q->shares_issued ? csv::format_double(*q->shares_issued) : "NA") << '\n';
    }
}

namespace {

template <typename Field>
SparseSeries align(std::span<const RawQuote> quotes, const TradingCalendar& calendar, Field field) {
    SparseSeries out(calendar.m());
    for (const auto& q : quotes) {
        if (auto idx = calendar.index_of(q.date)) out[*idx] = field(q);
    }
    return out;
}

}  // namespace

SparseSeries align_closes(std::span<const RawQuote> quotes, const TradingCalendar& calendar) {
    return align(quotes, calendar, [](const RawQuote& q) { return q.close; });
}

SparseSeries align_shares(std::span<const RawQuote> quotes, const TradingCalendar& calendar) {
    return align(quotes, calendar, [](const RawQuote& q) { return q.shares_issued; });
}

SparseSeries forward_fill(const SparseSeries& series) {
    SparseSeries out(series);
    std::optional<double> last;
    for (auto& v : out) {
        if (v) last = v;
        else v = last;
    }
    return out;
}

std::optional<std::vector<double>> complete_series(const SparseSeries& series) {
    if (series.empty() || !series.front()) return std::nullopt;
    std::vector<double> out;
    out.reserve(series.size());
    for (const auto& v : forward_fill(series)) out.push_back(*v);
    return out;
}

std::optional<std::vector<double>> complete_series(std::span<const RawQuote> quotes,
                                                   const TradingCalendar& calendar) {
    return complete_series(align_closes(quotes, calendar));
}

std::vector<std::string> screen_universe(const std::map<std::string, SparseSeries>& all_series) {
    std::vector<std::string> survivors;
    for (const auto& [ticker, s] : all_series) {
        if (!s.empty() && s.front() && s.back()) survivors.push_back(ticker);
    }
    if (survivors.empty()) throw EmptyUniverseError("no ticker traded throughout the study window");
    return survivors;
}

std::vector<double> normalize(std::span<const double> series) {
    double sum_sq = 0.0;
    for (double v : series) sum_sq += v * v;
    const double norm = std::sqrt(sum_sq);
    if (!(norm > 0.0) || !std::isfinite(norm)) throw NormalizationError("cannot normalize a zero vector");
    std::vector<double> out(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) out[i] = series[i] / norm;
    return out;
}

MarketFrame build_market_frame(const QuoteBook& book, const TradingCalendar& calendar,
                               const Date& selection_date) {
    const auto sel = calendar.index_of(selection_date);
    if (!sel) throw ParameterError("selection date " + format_date(selection_date) + " is not a trading date");

    std::vector<const std::string*> tickers;
    std::vector<const std::vector<RawQuote>*> groups;
    for (const auto& [t, q] : book) {
        tickers.push_back(&t);
        groups.push_back(&q);
    }
    const auto count = static_cast<std::ptrdiff_t>(tickers.size());

    // Per-ticker preprocessing is independent.
    std::vector<SparseSeries> closes(tickers.size());
    std::vector<SparseSeries> shares(tickers.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        closes[i] = align_closes(*groups[i], calendar);
        shares[i] = forward_fill(align_shares(*groups[i], calendar));
    }

    std::map<std::string, SparseSeries> by_ticker;
    for (std::size_t i = 0; i < tickers.size(); ++i) by_ticker.emplace(*tickers[i], closes[i]);
    const auto survivors = screen_universe(by_ticker);

    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < tickers.size(); ++i) pos.emplace(*tickers[i], i);

    MarketFrame frame;
    frame.calendar = calendar;
    frame.stocks.resize(survivors.size());
    frame.caps.resize(survivors.size());
    const auto n = static_cast<std::ptrdiff_t>(survivors.size());
    std::vector<std::string> errors(survivors.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::size_t src = pos.at(survivors[i]);
        const auto dense = complete_series(closes[src]);  // survivors are completable
        frame.stocks[i] = StockVector{survivors[i], normalize(*dense)};
        const auto& n_sel = shares[src][*sel];
        if (!n_sel) {
            errors[i] = "no shares_issued for " + survivors[i] + " on or before " + format_date(selection_date);
            continue;
        }
        frame.caps[i] = (*dense)[*sel] * *n_sel;
    }
    for (const auto& e : errors)
        if (!e.empty()) throw ParameterError(e);
    return frame;
}

std::optional<double> PriceTable::close(const std::string& ticker, std::size_t day) const {
    auto it = closes.find(ticker);
    if (it == closes.end() || day >= it->second.size()) return std::nullopt;
    return it->second[day];
}

std::optional<double> PriceTable::shares_at(const std::string& ticker, std::size_t day) const {
    auto it = shares.find(ticker);
    if (it == shares.end() || day >= it->second.size()) return std::nullopt;
    return it->second[day];
}

PriceTable build_price_table(const QuoteBook& book, const TradingCalendar& calendar) {
    PriceTable table;
    table.calendar = calendar;
    for (const auto& [ticker, quotes] : book) {
        std::optional<std::size_t> last;
        for (const auto& q : quotes)
            if (auto idx = calendar.index_of(q.date)) last = idx;
        if (!last) continue;
        table.closes.emplace(ticker, forward_fill(align_closes(quotes, calendar)));
        table.shares.emplace(ticker, forward_fill(align_shares(quotes, calendar)));
        table.last_row_day.emplace(ticker, *last);
    }
    return table;
}

}  // namespace mfindex
