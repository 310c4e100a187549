#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "mfindex/error.hpp"
#include "mfindex/index.hpp"

using namespace mfindex;

namespace {

Date d(const char* s) { return *parse_date(s); }

const Date kBase = *parse_date("2018-01-02");

std::vector<Date> weekdays(std::size_t m) {
    std::vector<Date> out;
    std::chrono::sys_days day{std::chrono::year{2018} / 1 / 2};
    while (out.size() < m) {
        const std::chrono::weekday wd{day};
        if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.emplace_back(day);
        day += std::chrono::days{1};
    }
    return out;
}

// Quotes for `closes[ticker][day]` with constant shares; a negative close marks "no row".
PriceTable table(const std::map<std::string, std::vector<double>>& closes,
                 const std::map<std::string, std::vector<double>>& shares) {
    const std::size_t m = closes.begin()->second.size();
    const auto dates = weekdays(m);
    QuoteBook book;
    for (const auto& [t, c] : closes)
        for (std::size_t i = 0; i < m; ++i)
            if (c[i] >= 0) book[t].push_back({t, dates[i], c[i], shares.at(t)[i]});
    return build_price_table(book, TradingCalendar(dates));
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Divisor, InitialValueIsBaseCap) {
    const std::vector<Constituent> c{{"A", 6}, {"B", 4}};
    const PriceMap p{{"A", 10.0}, {"B", 10.0}};
    const DivisorState s = init_divisor(c, p, 1000.0, kBase);
    EXPECT_DOUBLE_EQ(s.divisor, 100.0);
    EXPECT_DOUBLE_EQ(index_value(p, c, s, kBase), 1000.0);
}

TEST(Divisor, SingleStockAndFiveStockFixture) {
    const std::vector<Constituent> one{{"A", 250}};
    const DivisorState s1 = init_divisor(one, {{"A", 4.0}}, 1000.0, kBase);
    EXPECT_DOUBLE_EQ(s1.divisor, 1000.0);
    EXPECT_DOUBLE_EQ(index_value({{"A", 4.0}}, one, s1, kBase), 1000.0);

    const std::vector<Constituent> five{{"A", 10}, {"B", 20}, {"C", 30}, {"D", 40}, {"E", 50}};
    const PriceMap p{{"A", 1.5}, {"B", 2.0}, {"C", 0.5}, {"D", 3.25}, {"E", 1.0}};
    // 15 + 40 + 15 + 130 + 50
    EXPECT_DOUBLE_EQ(init_divisor(five, p, 1000.0, kBase).divisor, 250.0);
}

TEST(Divisor, InitErrors) {
    const std::vector<Constituent> c{{"A", 0}};
    EXPECT_THROW(init_divisor(c, {{"A", 5.0}}, 1000.0, kBase), DegenerateUniverseError);
    EXPECT_THROW(init_divisor({{"A", 1}}, {{"A", 5.0}}, 0.0, kBase), ParameterError);
    try {
        init_divisor({{"A", 1}, {"Z", 1}}, {{"A", 5.0}}, 1000.0, kBase);
        FAIL();
    } catch (const MissingPriceError& e) {
        EXPECT_NE(std::string(e.what()).find("Z"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("2018-01-02"), std::string::npos);
    }
}

TEST(IndexValue, Examples) {
    const std::vector<Constituent> c{{"A", 10}, {"B", 20}, {"C", 5}};
    const PriceMap base{{"A", 10.0}, {"B", 5.0}, {"C", 40.0}};  // cap 400
    const DivisorState s = init_divisor(c, base, 1000.0, kBase);
    EXPECT_DOUBLE_EQ(index_value(base, c, s, kBase), 1000.0);
    EXPECT_DOUBLE_EQ(index_value({{"A", 20.0}, {"B", 10.0}, {"C", 80.0}}, c, s, kBase), 2000.0);
    // 10*12 + 20*4 + 5*44 = 420 -> 1050
    EXPECT_NEAR(index_value({{"A", 12.0}, {"B", 4.0}, {"C", 44.0}}, c, s, kBase), 1050.0, 1e-12);
}

TEST(IndexValue, HomogeneousInPrices) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(1, 100);
    const std::vector<Constituent> c{{"A", 3}, {"B", 7}, {"C", 11}};
    PriceMap p{{"A", u(rng)}, {"B", u(rng)}, {"C", u(rng)}};
    const DivisorState s = init_divisor(c, p, 1000.0, kBase);
    const double v = index_value(p, c, s, kBase);
    for (double scale : {0.5, 1.7, 3.0}) {
        PriceMap q = p;
        for (auto& [k, x] : q) x *= scale;
        EXPECT_NEAR(index_value(q, c, s, kBase), scale * v, 1e-10 * scale * v);
    }
}

TEST(IndexValue, EqualSharesTrackMeanPrice) {
    const std::vector<Constituent> c{{"A", 5}, {"B", 5}, {"C", 5}};
    const DivisorState s{7.0, 1000.0, kBase};
    const PriceMap p1{{"A", 1.0}, {"B", 2.0}, {"C", 3.0}}, p2{{"A", 4.0}, {"B", 0.5}, {"C", 9.5}};
    EXPECT_NEAR(index_value(p2, c, s, kBase) / index_value(p1, c, s, kBase), (14.0 / 3) / 2.0, 1e-14);
}

TEST(Adjust, RatioAndComposition) {
    const DivisorState s{2.0, 1000.0, kBase};
    EXPECT_NEAR(adjust_divisor(s, 100, 110).divisor, 2.2, 1e-15);
    EXPECT_THROW(adjust_divisor(s, 0, 110), DegenerateUniverseError);
    EXPECT_THROW(adjust_divisor(s, 100, -1), DegenerateUniverseError);
    const double two = adjust_divisor(adjust_divisor(s, 100, 130), 130, 90).divisor;
    EXPECT_NEAR(two, adjust_divisor(s, 100, 90).divisor, 1e-15);
}

TEST(Adjust, DelistingTenPercent) {
    const std::vector<Constituent> c{{"A", 9}, {"B", 1}};
    const PriceMap p{{"A", 10.0}, {"B", 10.0}};
    const DivisorState s = init_divisor(c, p, 1000.0, kBase);
    const AppliedAction a = apply_action(c, s, {ActionKind::Delisting, "B", kBase, {}, {}}, p);
    EXPECT_NEAR(a.state.divisor, 0.9 * s.divisor, 1e-12);
    EXPECT_EQ(a.constituents.size(), 1u);
    EXPECT_LT(rel(index_value(p, a.constituents, a.state, kBase), index_value(p, c, s, kBase)), 1e-10);
}

TEST(Adjust, ShareChangeContinuity) {
    const std::vector<Constituent> c{{"A", 100}, {"B", 40}};
    const PriceMap p{{"A", 3.0}, {"B", 8.0}};
    const DivisorState s = init_divisor(c, p, 1000.0, kBase);
    const AppliedAction a = apply_action(c, s, {ActionKind::ShareChange, "A", kBase, 150.0, {}}, p);
    EXPECT_EQ(a.constituents[0].shares_issued, 150.0);
    EXPECT_DOUBLE_EQ(a.m_old, 620.0);
    EXPECT_DOUBLE_EQ(a.m_new, 770.0);
    EXPECT_LT(rel(index_value(p, a.constituents, a.state, kBase), index_value(p, c, s, kBase)), 1e-10);
    EXPECT_THROW(apply_action(c, s, {ActionKind::ShareChange, "A", kBase, {}, {}}, p), ParameterError);
    EXPECT_THROW(apply_action(c, s, {ActionKind::Delisting, "Q", kBase, {}, {}}, p), ParameterError);
}

TEST(Adjust, RightsIssueUsesReferencePrice) {
    const std::vector<Constituent> c{{"A", 100}, {"B", 50}};
    const PriceMap p{{"A", 10.0}, {"B", 4.0}};
    const DivisorState s = init_divisor(c, p, 1000.0, kBase);
    const AppliedAction a = apply_action(c, s, {ActionKind::RightsOrBonusIssue, "A", kBase, 125.0, 9.0}, p);
    EXPECT_DOUBLE_EQ(a.m_old, 1200.0);
    EXPECT_DOUBLE_EQ(a.m_new, 1200.0 - 1000.0 + 125.0 * 9.0);
    // At the ex-event reference price the level is unchanged.
    EXPECT_LT(rel(index_value({{"A", 9.0}, {"B", 4.0}}, a.constituents, a.state, kBase), index_value(p, c, s, kBase)),
              1e-10);
}

TEST(Series, ConstantPricesStayAtBase) {
    const PriceTable t = table({{"A", std::vector<double>(10, 5.0)}, {"B", std::vector<double>(10, 2.0)}},
                               {{"A", std::vector<double>(10, 3.0)}, {"B", std::vector<double>(10, 8.0)}});
    const IndexResult r = compute_series(t, {"A", "B"}, 1000.0, {});
    ASSERT_EQ(r.series.values.size(), 10u);
    for (double v : r.series.values) EXPECT_DOUBLE_EQ(v, 1000.0);
    EXPECT_TRUE(r.events.empty());
}

TEST(Series, DelistingIsContinuous) {
    // B stops trading after day 4; the divisor absorbs it at day 4's close.
    std::vector<double> a{10, 11, 12, 13, 14, 15, 16, 17}, b{5, 5, 6, 6, 7, -1, -1, -1};
    const PriceTable t = table({{"A", a}, {"B", b}}, {{"A", std::vector<double>(8, 10)}, {"B", std::vector<double>(8, 20)}});
    const auto actions = infer_actions(t, {"A", "B"});
    ASSERT_EQ(actions.size(), 1u);
    EXPECT_EQ(actions[0].kind, ActionKind::Delisting);
    const IndexResult r = compute_series(t, {"A", "B"}, 1000.0, actions);
    ASSERT_EQ(r.events.size(), 1u);
    const auto& e = r.events[0];
    // level at day 4 prices, before vs after
    const double before = e.m_old / e.divisor_old * 1000.0, after = e.m_new / e.divisor_new * 1000.0;
    EXPECT_LT(rel(after, before), 1e-10);
    EXPECT_NEAR(r.series.values[4], before, 1e-9);
    // afterwards only A drives the level
    for (std::size_t i = 5; i < 8; ++i) EXPECT_NEAR(r.series.values[i] / r.series.values[5], a[i] / a[5], 1e-12);
}

TEST(Series, ReplayOracleTwoActions) {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g01;
    const std::size_t m = 60;
    std::map<std::string, std::vector<double>> closes, shares;
    for (const char* t : {"A", "B", "C", "D"}) {
        double p = 20 + 10 * g01(rng) * 0.1;
        for (std::size_t i = 0; i < m; ++i) {
            p *= std::exp(0.02 * g01(rng));
            closes[t].push_back(p);
            shares[t].push_back(100.0 + static_cast<double>(t[0] - 'A') * 10);
        }
    }
    for (std::size_t i = 20; i < m; ++i) shares["C"][i] = 180.0;  // share change on day 20
    for (std::size_t i = 41; i < m; ++i) closes["D"][i] = -1;   // last row on day 40
    const PriceTable t = table(closes, shares);
    const auto actions = infer_actions(t, {"A", "B", "C", "D"});
    ASSERT_EQ(actions.size(), 2u);
    const IndexResult r = compute_series(t, {"A", "B", "C", "D"}, 1000.0, actions);

    // Replay: the level moves by the basket's price return with shares held
    // fixed over each step, so no divisor is needed at all.
    std::vector<double> level{1000.0};
    std::map<std::string, double> held{{"A", 100}, {"B", 110}, {"C", 120}, {"D", 130}};
    for (std::size_t i = 1; i < m; ++i) {
        if (i == 20) held["C"] = 180.0;
        if (i == 41) held.erase("D");
        double prev = 0, cur = 0;
        for (const auto& [tk, n] : held) {
            prev += closes[tk][i - 1] * n;
            cur += closes[tk][i] * n;
        }
        level.push_back(level.back() * cur / prev);
    }
    for (std::size_t i = 0; i < m; ++i) EXPECT_LT(rel(r.series.values[i], level[i]), 1e-12) << i;
}

TEST(Series, Errors) {
    const PriceTable t = table({{"A", {1, 2, 3}}, {"B", {-1, 2, 3}}}, {{"A", {1, 1, 1}}, {"B", {1, 1, 1}}});
    EXPECT_THROW(compute_series(t, {"A", "B"}, 1000.0, {}), MissingPriceError);
    EXPECT_THROW(compute_series(t, {"A", "Z"}, 1000.0, {}), MissingPriceError);
    EXPECT_THROW(compute_series(t, {}, 1000.0, {}), EmptyUniverseError);
    EXPECT_THROW(compute_series(t, {"A"}, 1000.0, {{ActionKind::Delisting, "A", d("2019-01-02"), {}, {}}}),
                 ParameterError);
}

TEST(Series, BaseDayActionsReshapeBasket) {
    const PriceTable t = table({{"A", {10, 11, 12}}, {"B", {5, 5, 5}}}, {{"A", {1, 1, 1}}, {"B", {1, 1, 1}}});
    const IndexResult r =
        compute_series(t, {"A", "B"}, 1000.0, {{ActionKind::Delisting, "B", t.calendar.front(), {}, {}}});
    EXPECT_DOUBLE_EQ(r.series.values[0], 1000.0);
    EXPECT_NEAR(r.series.values[2], 1200.0, 1e-9);
}

TEST(Actions, MergePrefersExplicit) {
    const std::vector<CorporateAction> inferred{{ActionKind::ShareChange, "A", d("2018-02-01"), 5.0, {}},
                                                {ActionKind::Delisting, "B", d("2018-03-01"), {}, {}}};
    const std::vector<CorporateAction> given{{ActionKind::ShareChange, "A", d("2018-02-01"), 7.0, {}},
                                             {ActionKind::Delisting, "B", d("2018-02-20"), {}, {}}};
    const auto merged = merge_actions(given, inferred);
    ASSERT_EQ(merged.size(), 2u);
    EXPECT_EQ(*merged[0].new_shares, 7.0);
    EXPECT_EQ(merged[1].effective_date, d("2018-02-20"));
}

TEST(Actions, CsvRoundTrip) {
    const std::vector<CorporateAction> acts{{ActionKind::ShareChange, "A", d("2018-02-01"), 5.5, {}},
                                            {ActionKind::Delisting, "B", d("2018-03-01"), {}, {}},
                                            {ActionKind::RightsOrBonusIssue, "C", d("2018-04-02"), 9.0, 1.25}};
    const auto path = (std::filesystem::temp_directory_path() / "mfindex_actions.csv").string();
    write_actions(path, acts);
    const auto back = load_actions(path);
    ASSERT_EQ(back.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(back[i].kind, acts[i].kind);
        EXPECT_EQ(back[i].ticker, acts[i].ticker);
        EXPECT_EQ(back[i].effective_date, acts[i].effective_date);
        EXPECT_EQ(back[i].new_shares, acts[i].new_shares);
        EXPECT_EQ(back[i].replacement_price, acts[i].replacement_price);
    }
    EXPECT_EQ(parse_action_kind("rights_or_bonus_issue"), ActionKind::RightsOrBonusIssue);
    EXPECT_THROW(parse_action_kind("split"), ParameterError);
}

TEST(Series, CsvRoundTrip) {
    const PriceTable t = table({{"A", {10, 11, 9.5}}}, {{"A", {3, 3, 3}}});
    const IndexResult r = compute_series(t, {"A"}, 1000.0, {});
    const auto path = (std::filesystem::temp_directory_path() / "mfindex_series.csv").string();
    write_index_series(path, r);
    const IndexSeries back = read_level_series(path);
    EXPECT_EQ(back.dates, r.series.dates);
    EXPECT_EQ(back.values, r.series.values);
}
