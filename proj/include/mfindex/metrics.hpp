// metrics.hpp
// Index evaluation against a benchmark: Pearson correlation of levels, and
// Alpha / Beta / Jensen's Alpha on monthly simple returns. Plus the
// stability statistics used to compare metric values across years or
// across members of an index family.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfindex/index.hpp"

namespace mfindex {

inline constexpr double kDefaultRiskFree = 0.002;  // monthly

struct ReturnSeries {
    std::vector<int> months;       // month keys (year * 12 + month - 1) of each return
    std::vector<double> returns;   // simple returns, month over previous month-end

    std::size_t size() const { return returns.size(); }
};

/// Month-end to month-end simple returns; the first month is the baseline.
/// Throws InsufficientDataError when the series covers fewer than two months.
ReturnSeries monthly_returns(const IndexSeries& series);

/// Throws ParameterError on length mismatch or m < 2, UndefinedStatisticError for a constant input.
double pearson(std::span<const double> x, std::span<const double> y);

double alpha(const ReturnSeries& ri, const ReturnSeries& rm);
/// Sample covariance over sample variance. Throws UndefinedStatisticError when var(rm) = 0.
double beta(const ReturnSeries& ri, const ReturnSeries& rm);
/// mean(ri) - [rf + beta * (mean(rm) - rf)]
double jensen_alpha(const ReturnSeries& ri, const ReturnSeries& rm, double risk_free = kDefaultRiskFree);

/// Sample standard deviation (n - 1). Throws InsufficientDataError for fewer than two values.
double stability_std(std::span<const double> values);
/// mean |v - baseline|. Throws InsufficientDataError when empty.
double mean_baseline_distance(std::span<const double> values, double baseline);

struct MetricsReport {
    double pearson = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double jensen_alpha = 0.0;
    double risk_free = kDefaultRiskFree;
};

/// Restricts `benchmark` to `dates`. Throws AlignmentError if any date is missing.
IndexSeries align_to(const IndexSeries& benchmark, const std::vector<Date>& dates);

/// All four metrics for `series` against the benchmark on the series' dates.
MetricsReport evaluate(const IndexSeries& series, const IndexSeries& benchmark,
                       double risk_free = kDefaultRiskFree);

struct MetricsRow {
    std::string index_name;
    int year = 0;
    MetricsReport report;
};

enum class Metric { Pearson, Alpha, Beta, JensenAlpha };
inline constexpr Metric kAllMetrics[] = {Metric::Pearson, Metric::Alpha, Metric::Beta, Metric::JensenAlpha};
const char* metric_name(Metric m);
/// 1 for Pearson and Beta, 0 for Alpha and Jensen's Alpha.
double metric_baseline(Metric m);
double metric_value(const MetricsReport& r, Metric m);

struct StabilityRow {
    std::string group_by;  // "index" (across years) or "year" (across index family members)
    std::string group;
    Metric metric = Metric::Pearson;
    std::size_t count = 0;
    std::optional<double> std_dev;  // absent when count < 2
    double mean_distance = 0.0;
};

std::vector<StabilityRow> stability_summary(const std::vector<MetricsRow>& rows);

/// `index_name,year,pearson,alpha,beta,jensen_alpha`
void write_metrics(const std::string& path, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics(const std::string& path);
/// `group_by,group,metric,count,std_dev,mean_distance_to_baseline`
void write_stability(const std::string& path, const std::vector<StabilityRow>& rows);

}  // namespace mfindex
