#include "mfindex/index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <tuple>

#include "mfindex/csv.hpp"
#include "mfindex/error.hpp"

namespace mfindex {

std::string_view to_string(ActionKind kind) {
    switch (kind) {
        case ActionKind::ShareChange: return "share_change";
        case ActionKind::Delisting: return "delisting";
        case ActionKind::RightsOrBonusIssue: return "rights_or_bonus_issue";
    }
    return "unknown";
}

ActionKind parse_action_kind(std::string_view text) {
    if (text == "share_change") return ActionKind::ShareChange;
    if (text == "delisting") return ActionKind::Delisting;
    if (text == "rights_or_bonus_issue") return ActionKind::RightsOrBonusIssue;
    throw ParameterError("unknown corporate action kind '" + std::string(text) + "'");
}

double basket_cap(const std::vector<Constituent>& constituents, const PriceMap& prices, const Date& date) {
    double total = 0.0;
    for (const auto& c : constituents) {
        auto it = prices.find(c.ticker);
        if (it == prices.end()) throw MissingPriceError(c.ticker, format_date(date));
        total += it->second * c.shares_issued;
    }
    return total;
}

DivisorState init_divisor(const std::vector<Constituent>& constituents, const PriceMap& prices_at_base,
                          double base_level, const Date& base_date) {
    if (!(base_level > 0.0)) throw ParameterError("base level must be positive");
    const double cap = basket_cap(constituents, prices_at_base, base_date);
    if (!(cap > 0.0)) throw DegenerateUniverseError("total constituent cap at the base date is zero");
    return {cap, base_level, base_date};
}

double index_value(const PriceMap& prices, const std::vector<Constituent>& constituents,
                   const DivisorState& state, const Date& date) {
    return basket_cap(constituents, prices, date) / state.divisor * state.base_level;
}

DivisorState adjust_divisor(const DivisorState& state, double m_old, double m_new) {
    if (!(m_old > 0.0)) throw DegenerateUniverseError("market cap before adjustment must be positive");
    if (!(m_new > 0.0)) throw DegenerateUniverseError("market cap after adjustment must be positive");
    DivisorState next = state;
    next.divisor = state.divisor * (m_new / m_old);
    return next;
}

AppliedAction apply_action(const std::vector<Constituent>& constituents, const DivisorState& state,
                           const CorporateAction& action, const PriceMap& prices_at_event) {
    auto member = std::find_if(constituents.begin(), constituents.end(),
                               [&](const Constituent& c) { return c.ticker == action.ticker; });
    if (member == constituents.end())
        throw ParameterError("corporate action for " + action.ticker + " which is not a constituent");

    AppliedAction out;
    out.m_old = basket_cap(constituents, prices_at_event, action.effective_date);
    out.constituents = constituents;
    const auto pos = static_cast<std::size_t>(member - constituents.begin());
    const double price = prices_at_event.at(action.ticker);

    switch (action.kind) {
        case ActionKind::ShareChange:
            if (!action.new_shares || !(*action.new_shares > 0.0))
                throw ParameterError("share_change for " + action.ticker + " needs positive new_shares");
            out.constituents[pos].shares_issued = *action.new_shares;
            out.m_new = basket_cap(out.constituents, prices_at_event, action.effective_date);
            break;
        case ActionKind::Delisting:
            out.constituents.erase(out.constituents.begin() + static_cast<std::ptrdiff_t>(pos));
            out.m_new = basket_cap(out.constituents, prices_at_event, action.effective_date);
            break;
        case ActionKind::RightsOrBonusIssue: {
            const double shares = action.new_shares.value_or(constituents[pos].shares_issued);
            const double ref_price = action.replacement_price.value_or(price);
            if (!(shares > 0.0) || !(ref_price > 0.0))
                throw ParameterError("rights_or_bonus_issue for " + action.ticker + " needs positive shares and price");
            out.constituents[pos].shares_issued = shares;
            out.m_new = out.m_old - price * constituents[pos].shares_issued + ref_price * shares;
            break;
        }
    }
    out.state = adjust_divisor(state, out.m_old, out.m_new);
    return out;
}

namespace {

PriceMap prices_on(const PriceTable& table, const std::vector<Constituent>& members, std::size_t day) {
    PriceMap out;
    for (const auto& c : members) {
        auto p = table.close(c.ticker, day);
        if (!p) throw MissingPriceError(c.ticker, format_date(table.calendar.dates()[day]));
        out.emplace(c.ticker, *p);
    }
    return out;
}

}  // namespace

IndexResult compute_series(const PriceTable& prices, const std::vector<std::string>& constituents,
                           double base_level, std::vector<CorporateAction> actions) {
    const auto& dates = prices.calendar.dates();
    if (dates.empty()) throw ParameterError("empty valuation calendar");
    if (constituents.empty()) throw EmptyUniverseError("index has no constituents");

    std::vector<Constituent> members;
    std::set<std::string> unique;
    for (const auto& t : constituents) {
        if (!unique.insert(t).second) throw ParameterError("duplicate constituent " + t);
        auto n = prices.shares_at(t, 0);
        if (!prices.has(t) || !prices.close(t, 0)) throw MissingPriceError(t, format_date(dates.front()));
        if (!n || !(*n > 0.0))
            throw ParameterError("no positive shares_issued for " + t + " at " + format_date(dates.front()));
        members.push_back({t, *n});
    }

    for (const auto& a : actions)
        if (a.effective_date < dates.front() || dates.back() < a.effective_date)
            throw ParameterError("corporate action for " + a.ticker + " on " + format_date(a.effective_date) +
                                 " lies outside the series window");
    std::stable_sort(actions.begin(), actions.end(), [](const CorporateAction& a, const CorporateAction& b) {
        return a.effective_date < b.effective_date;
    });

    IndexResult result;
    std::size_t next = 0;
    // Base-day actions reshape the basket before the divisor is fixed.
    for (; next < actions.size() && actions[next].effective_date == dates.front(); ++next) {
        const auto& a = actions[next];
        auto it = std::find_if(members.begin(), members.end(), [&](const Constituent& c) { return c.ticker == a.ticker; });
        if (it == members.end()) throw ParameterError("corporate action for " + a.ticker + " which is not a constituent");
        if (a.kind == ActionKind::Delisting) members.erase(it);
        else if (a.new_shares) it->shares_issued = *a.new_shares;
    }
    if (members.empty()) throw DegenerateUniverseError("every constituent delisted on the base date");

    DivisorState state = init_divisor(members, prices_on(prices, members, 0), base_level, dates.front());
    result.series.dates = dates;
    result.series.values.reserve(dates.size());
    result.divisors.reserve(dates.size());
    result.series.values.push_back(index_value(prices_on(prices, members, 0), members, state, dates.front()));
    result.divisors.push_back(state.divisor);

    for (std::size_t day = 1; day < dates.size(); ++day) {
        if (next < actions.size() && actions[next].effective_date <= dates[day]) {
            const PriceMap at_event = prices_on(prices, members, day - 1);
            for (; next < actions.size() && actions[next].effective_date <= dates[day]; ++next) {
                AppliedAction applied = apply_action(members, state, actions[next], at_event);
                result.events.push_back({actions[next], applied.m_old, applied.m_new, state.divisor,
                                         applied.state.divisor});
                members = std::move(applied.constituents);
                state = applied.state;
            }
        }
        result.series.values.push_back(index_value(prices_on(prices, members, day), members, state, dates[day]));
        result.divisors.push_back(state.divisor);
    }
    return result;
}

std::vector<CorporateAction> infer_actions(const PriceTable& prices, const std::vector<std::string>& tickers) {
    std::vector<CorporateAction> out;
    const auto& dates = prices.calendar.dates();
    for (const auto& t : tickers) {
        auto sh = prices.shares.find(t);
        auto last = prices.last_row_day.find(t);
        if (sh == prices.shares.end() || last == prices.last_row_day.end()) continue;
        const std::size_t end = last->second;
        for (std::size_t d = 1; d <= end && d < dates.size(); ++d) {
            const auto& prev = sh->second[d - 1];
            const auto& cur = sh->second[d];
            if (prev && cur && *prev != *cur && *cur > 0.0)
                out.push_back({ActionKind::ShareChange, t, dates[d], *cur, std::nullopt});
        }
        if (end + 1 < dates.size()) out.push_back({ActionKind::Delisting, t, dates[end + 1], std::nullopt, std::nullopt});
    }
    std::stable_sort(out.begin(), out.end(), [](const CorporateAction& a, const CorporateAction& b) {
        return a.effective_date < b.effective_date;
    });
    return out;
}

std::vector<CorporateAction> merge_actions(std::vector<CorporateAction> explicit_actions,
                                           const std::vector<CorporateAction>& inferred) {
    std::set<std::tuple<std::string, Date, int>> seen;
    for (const auto& a : explicit_actions) seen.emplace(a.ticker, a.effective_date, static_cast<int>(a.kind));
    std::set<std::string> delisted;
    for (const auto& a : explicit_actions)
        if (a.kind == ActionKind::Delisting) delisted.insert(a.ticker);
    for (const auto& a : inferred) {
        if (seen.count({a.ticker, a.effective_date, static_cast<int>(a.kind)})) continue;
        if (a.kind == ActionKind::Delisting && delisted.count(a.ticker)) continue;
        explicit_actions.push_back(a);
    }
    std::stable_sort(explicit_actions.begin(), explicit_actions.end(),
                     [](const CorporateAction& a, const CorporateAction& b) { return a.effective_date < b.effective_date; });
    return explicit_actions;
}

std::vector<CorporateAction> load_actions(const std::string& path) {
    csv::Reader r(path);
    std::vector<CorporateAction> out;
    if (r.empty()) return out;
    const auto c_date = r.require("effective_date");
    const auto c_ticker = r.require("ticker");
    const auto c_kind = r.require("kind");
    const auto c_shares = r.column("new_shares");
    const auto c_price = r.column("replacement_price");
    auto optional_number = [&](std::optional<std::size_t> col) -> std::optional<double> {
        if (!col) return std::nullopt;
        const std::string& text = r.field(*col);
        if (text.empty() || text == "NA") return std::nullopt;
        return r.number(*col);
    };
    while (r.next()) {
        CorporateAction a;
        auto d = parse_date(r.field(c_date));
        if (!d) r.fail("bad effective_date '" + r.field(c_date) + "'");
        a.effective_date = *d;
        a.ticker = r.field(c_ticker);
        try {
            a.kind = parse_action_kind(r.field(c_kind));
        } catch (const ParameterError& e) {
            r.fail(e.what());
        }
        a.new_shares = optional_number(c_shares);
        a.replacement_price = optional_number(c_price);
        out.push_back(std::move(a));
    }
    return out;
}

void write_actions(const std::string& path, const std::vector<CorporateAction>& actions) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "effective_date,ticker,kind,new_shares,replacement_price\n";
    for (const auto& a : actions) {
        out << format_date(a.effective_date) << ',' << a.ticker << ',' << to_string(a.kind) << ','
            << (a.new_shares ? csv::format_double(*a.new_shares) : "") << ','
            << (a.replacement_price ? csv::format_double(*a.replacement_price) : "") << '\n';
    }
}

void write_index_series(const std::string& path, const IndexResult& result) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "date,level,divisor\n";
    for (std::size_t i = 0; i < result.series.dates.size(); ++i)
        out << format_date(result.series.dates[i]) << ',' << csv::format_double(result.series.values[i]) << ','
            << csv::format_double(result.divisors[i]) << '\n';
}

void write_divisor_events(const std::string& path, const std::vector<DivisorEvent>& events) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "effective_date,ticker,kind,m_old,m_new,divisor_old,divisor_new\n";
    for (const auto& e : events)
        out << format_date(e.action.effective_date) << ',' << e.action.ticker << ',' << to_string(e.action.kind) << ','
            << csv::format_double(e.m_old) << ',' << csv::format_double(e.m_new) << ','
            << csv::format_double(e.divisor_old) << ',' << csv::format_double(e.divisor_new) << '\n';
}

IndexSeries read_level_series(const std::string& path) {
    csv::Reader r(path);
    const auto c_date = r.require("date");
    const auto c_level = r.require("level");
    IndexSeries s;
    while (r.next()) {
        auto d = parse_date(r.field(c_date));
        if (!d) r.fail("bad date '" + r.field(c_date) + "'");
        if (!s.dates.empty() && !(s.dates.back() < *d)) r.fail("dates must be strictly increasing");
        const double level = r.number(c_level);
        if (!(level > 0.0)) r.fail("index level must be positive");
        s.dates.push_back(*d);
        s.values.push_back(level);
    }
    return s;
}

void write_level_series(const std::string& path, const IndexSeries& series) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "date,level\n";
    for (std::size_t i = 0; i < series.dates.size(); ++i)
        out << format_date(series.dates[i]) << ',' << csv::format_double(series.values[i]) << '\n';
}

}  // namespace mfindex
