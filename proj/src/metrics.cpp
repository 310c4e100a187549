#include "mfindex/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "mfindex/csv.hpp"
#include "mfindex/error.hpp"

namespace mfindex {

ReturnSeries monthly_returns(const IndexSeries& series) {
    if (series.dates.size() != series.values.size()) throw ParameterError("series dates and values differ in length");
    std::vector<int> keys;
    std::vector<double> month_end;
    for (std::size_t i = 0; i < series.dates.size(); ++i) {
        const int key = month_key(series.dates[i]);
        if (!keys.empty() && keys.back() == key) month_end.back() = series.values[i];
        else {
            keys.push_back(key);
            month_end.push_back(series.values[i]);
        }
    }
    if (keys.size() < 2) throw InsufficientDataError("monthly returns need at least two calendar months");
    ReturnSeries out;
    for (std::size_t j = 1; j < keys.size(); ++j) {
        out.months.push_back(keys[j]);
        out.returns.push_back((month_end[j] - month_end[j - 1]) / month_end[j - 1]);
    }
    return out;
}

namespace {

double mean(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

void check_aligned(const ReturnSeries& ri, const ReturnSeries& rm) {
    if (ri.returns.size() != rm.returns.size())
        throw AlignmentError("return series lengths differ (" + std::to_string(ri.size()) + " vs " +
                             std::to_string(rm.size()) + ")");
    if (!ri.months.empty() && !rm.months.empty() && ri.months != rm.months)
        throw AlignmentError("return series cover different months");
    if (ri.returns.empty()) throw InsufficientDataError("empty return series");
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ParameterError("pearson inputs differ in length");
    if (x.size() < 2) throw ParameterError("pearson needs at least two samples");
    const double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double dx = x[k] - mx, dy = y[k] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw UndefinedStatisticError("correlation undefined for a constant series");
    return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

double alpha(const ReturnSeries& ri, const ReturnSeries& rm) {
    check_aligned(ri, rm);
    return mean(ri.returns) - mean(rm.returns);
}

double beta(const ReturnSeries& ri, const ReturnSeries& rm) {
    check_aligned(ri, rm);
    if (ri.size() < 2) throw InsufficientDataError("beta needs at least two returns");
    const double mi = mean(ri.returns), mm = mean(rm.returns);
    double cov = 0.0, var = 0.0;
    for (std::size_t k = 0; k < ri.size(); ++k) {
        cov += (ri.returns[k] - mi) * (rm.returns[k] - mm);
        var += (rm.returns[k] - mm) * (rm.returns[k] - mm);
    }
    if (var == 0.0) throw UndefinedStatisticError("beta undefined for zero market variance");
    const double dof = static_cast<double>(ri.size() - 1);
    return (cov / dof) / (var / dof);
}

double jensen_alpha(const ReturnSeries& ri, const ReturnSeries& rm, double risk_free) {
    const double b = beta(ri, rm);
    const double mi = mean(ri.returns), mm = mean(rm.returns);
    return mi - (risk_free + b * (mm - risk_free));
}

double stability_std(std::span<const double> values) {
    if (values.size() < 2) throw InsufficientDataError("standard deviation needs at least two values");
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double mean_baseline_distance(std::span<const double> values, double baseline) {
    if (values.empty()) throw InsufficientDataError("no metric values to average");
    double total = 0.0;
    for (double v : values) total += std::abs(v - baseline);
    return total / static_cast<double>(values.size());
}

IndexSeries align_to(const IndexSeries& benchmark, const std::vector<Date>& dates) {
    IndexSeries out;
    std::size_t j = 0;
    for (const auto& d : dates) {
        while (j < benchmark.dates.size() && benchmark.dates[j] < d) ++j;
        if (j == benchmark.dates.size() || benchmark.dates[j] != d)
            throw AlignmentError("benchmark has no level on " + format_date(d));
        out.dates.push_back(d);
        out.values.push_back(benchmark.values[j]);
    }
    return out;
}

MetricsReport evaluate(const IndexSeries& series, const IndexSeries& benchmark, double risk_free) {
    const IndexSeries bench = align_to(benchmark, series.dates);
    const ReturnSeries ri = monthly_returns(series);
    const ReturnSeries rm = monthly_returns(bench);
    MetricsReport r;
    r.pearson = pearson(series.values, bench.values);
    r.alpha = alpha(ri, rm);
    r.beta = beta(ri, rm);
    r.jensen_alpha = jensen_alpha(ri, rm, risk_free);
    r.risk_free = risk_free;
    return r;
}

const char* metric_name(Metric m) {
    switch (m) {
        case Metric::Pearson: return "pearson";
        case Metric::Alpha: return "alpha";
        case Metric::Beta: return "beta";
        case Metric::JensenAlpha: return "jensen_alpha";
    }
    return "unknown";
}

double metric_baseline(Metric m) { return (m == Metric::Pearson || m == Metric::Beta) ? 1.0 : 0.0; }

double metric_value(const MetricsReport& r, Metric m) {
    switch (m) {
        case Metric::Pearson: return r.pearson;
        case Metric::Alpha: return r.alpha;
        case Metric::Beta: return r.beta;
        case Metric::JensenAlpha: return r.jensen_alpha;
    }
    return NAN;
}

std::vector<StabilityRow> stability_summary(const std::vector<MetricsRow>& rows) {
    std::map<std::string, std::vector<const MetricsRow*>> by_index;
    std::map<int, std::vector<const MetricsRow*>> by_year;
    for (const auto& r : rows) {
        by_index[r.index_name].push_back(&r);
        by_year[r.year].push_back(&r);
    }
    std::vector<StabilityRow> out;
    auto emit = [&](const std::string& group_by, const std::string& group, const std::vector<const MetricsRow*>& members) {
        for (Metric m : kAllMetrics) {
            std::vector<double> values;
            for (const auto* r : members) values.push_back(metric_value(r->report, m));
            StabilityRow s;
            s.group_by = group_by;
            s.group = group;
            s.metric = m;
            s.count = values.size();
            if (values.size() >= 2) s.std_dev = stability_std(values);
            s.mean_distance = mean_baseline_distance(values, metric_baseline(m));
            out.push_back(s);
        }
    };
    for (const auto& [name, members] : by_index) emit("index", name, members);
    for (const auto& [year, members] : by_year) emit("year", std::to_string(year), members);
    return out;
}

void write_metrics(const std::string& path, const std::vector<MetricsRow>& rows) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "index_name,year,pearson,alpha,beta,jensen_alpha\n";
    for (const auto& r : rows)
        out << r.index_name << ',' << r.year << ',' << csv::format_double(r.report.pearson) << ','
            << csv::format_double(r.report.alpha) << ',' << csv::format_double(r.report.beta) << ','
            << csv::format_double(r.report.jensen_alpha) << '\n';
}

std::vector<MetricsRow> read_metrics(const std::string& path) {
    csv::Reader r(path);
    const auto c_name = r.require("index_name");
    const auto c_year = r.require("year");
    const auto c_p = r.require("pearson");
    const auto c_a = r.require("alpha");
    const auto c_b = r.require("beta");
    const auto c_j = r.require("jensen_alpha");
    std::vector<MetricsRow> rows;
    while (r.next()) {
        MetricsRow row;
        row.index_name = r.field(c_name);
        row.year = static_cast<int>(r.integer(c_year));
        row.report.pearson = r.number(c_p);
        row.report.alpha = r.number(c_a);
        row.report.beta = r.number(c_b);
        row.report.jensen_alpha = r.number(c_j);
        rows.push_back(row);
    }
    return rows;
}

void write_stability(const std::string& path, const std::vector<StabilityRow>& rows) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "group_by,group,metric,count,std_dev,mean_distance_to_baseline\n";
    for (const auto& s : rows)
        out << s.group_by << ',' << s.group << ',' << metric_name(s.metric) << ',' << s.count << ','
            << (s.std_dev ? csv::format_double(*s.std_dev) : "NA") << ',' << csv::format_double(s.mean_distance)
            << '\n';
}

}  // namespace mfindex
