// index.hpp
// Divisor-maintained capitalization-weighted index:
//   level(t) = sum_i P_i(t) N_i / D * B
// with D rescaled by M_new / M_old whenever a non-trading event changes the
// basket's market cap.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mfindex/date.hpp"
#include "mfindex/marketdata.hpp"

namespace mfindex {

inline constexpr double kDefaultBaseLevel = 1000.0;

struct Constituent {
    std::string ticker;
    double shares_issued = 0.0;
};

struct DivisorState {
    double divisor = 0.0;
    double base_level = kDefaultBaseLevel;
    Date base_date{};
};

enum class ActionKind { ShareChange, Delisting, RightsOrBonusIssue };

std::string_view to_string(ActionKind kind);
ActionKind parse_action_kind(std::string_view text);

struct CorporateAction {
    ActionKind kind = ActionKind::ShareChange;
    std::string ticker;
    Date effective_date{};
    std::optional<double> new_shares;
    std::optional<double> replacement_price;  // ex-event reference price for issues
};

struct IndexSeries {
    std::vector<Date> dates;
    std::vector<double> values;
};

using PriceMap = std::map<std::string, double>;

/// D starts at the base-date total cap sum P_i(base) N_i, so the level cap / D * B is exactly B on the base date.
/// Throws DegenerateUniverseError for a zero total cap, MissingPriceError for an unpriced member.
DivisorState init_divisor(const std::vector<Constituent>& constituents, const PriceMap& prices_at_base,
                          double base_level, const Date& base_date);

/// Total market cap sum P_i N_i. Throws MissingPriceError naming the ticker and `date`.
double basket_cap(const std::vector<Constituent>& constituents, const PriceMap& prices, const Date& date);

double index_value(const PriceMap& prices, const std::vector<Constituent>& constituents,
                   const DivisorState& state, const Date& date);

/// D_new = D_old * M_new / M_old. Throws DegenerateUniverseError when M_old <= 0 or M_new <= 0.
DivisorState adjust_divisor(const DivisorState& state, double m_old, double m_new);

struct AppliedAction {
    std::vector<Constituent> constituents;  // basket after the event
    DivisorState state;                     // divisor after the event
    double m_old = 0.0;
    double m_new = 0.0;
};

/// Applies one action at the event instant, valued at `prices_at_event`.
/// The level computed from the returned basket and divisor equals the level
/// before the action at those prices.
AppliedAction apply_action(const std::vector<Constituent>& constituents, const DivisorState& state,
                           const CorporateAction& action, const PriceMap& prices_at_event);

struct DivisorEvent {
    CorporateAction action;
    double m_old = 0.0;
    double m_new = 0.0;
    double divisor_old = 0.0;
    double divisor_new = 0.0;
};

struct IndexResult {
    IndexSeries series;
    std::vector<double> divisors;  // divisor in effect for each day's valuation
    std::vector<DivisorEvent> events;
};

/// Values the basket on every date of `prices.calendar`. The base date is the
/// first date; share counts are read from the table at the base date. Actions
/// apply in date order before the valuation of their effective day, at the
/// previous day's closes.
IndexResult compute_series(const PriceTable& prices, const std::vector<std::string>& constituents,
                           double base_level, std::vector<CorporateAction> actions);

/// Delistings (rows stop before the calendar ends) and share-count changes
/// read off the quote data for the given tickers.
std::vector<CorporateAction> infer_actions(const PriceTable& prices, const std::vector<std::string>& tickers);

/// Explicit actions win over inferred ones with the same (ticker, date, kind).
std::vector<CorporateAction> merge_actions(std::vector<CorporateAction> explicit_actions,
                                           const std::vector<CorporateAction>& inferred);

std::vector<CorporateAction> load_actions(const std::string& path);
void write_actions(const std::string& path, const std::vector<CorporateAction>& actions);

/// `date,level,divisor`
void write_index_series(const std::string& path, const IndexResult& result);
/// `effective_date,ticker,kind,m_old,m_new,divisor_old,divisor_new`
void write_divisor_events(const std::string& path, const std::vector<DivisorEvent>& events);

/// Reads `date,level[,...]` (index series or benchmark files).
IndexSeries read_level_series(const std::string& path);
void write_level_series(const std::string& path, const IndexSeries& series);

}  // namespace mfindex
