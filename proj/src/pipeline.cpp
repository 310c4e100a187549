#include "mfindex/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>

#include "mfindex/csv.hpp"
#include "mfindex/error.hpp"

namespace mfindex {

namespace fs = std::filesystem;

namespace {

std::size_t parse_size(const std::string& key, const std::string& value) {
    auto v = csv::parse_double(value);
    if (!v || *v < 0 || *v != static_cast<double>(static_cast<std::size_t>(*v)))
        throw ParameterError("'" + key + "' expects a nonnegative integer, got '" + value + "'");
    return static_cast<std::size_t>(*v);
}

double parse_real(const std::string& key, const std::string& value) {
    auto v = csv::parse_double(value);
    if (!v) throw ParameterError("'" + key + "' expects a number, got '" + value + "'");
    return *v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ParameterError("'" + key + "' expects true/false, got '" + value + "'");
}

EigenMethod parse_method(const std::string& value) {
    if (value == "auto") return EigenMethod::Auto;
    if (value == "lanczos") return EigenMethod::Lanczos;
    if (value == "dense") return EigenMethod::Dense;
    throw ParameterError("eigen_method expects auto|lanczos|dense, got '" + value + "'");
}

QuoteBook slice_book(const QuoteBook& book, const DateRange& window) {
    QuoteBook out;
    for (const auto& [t, quotes] : book) {
        std::vector<RawQuote> kept;
        for (const auto& q : quotes)
            if (window.contains(q.date)) kept.push_back(q);
        if (!kept.empty()) out.emplace(t, std::move(kept));
    }
    if (out.empty())
        throw EmptyUniverseError("no quotes between " + format_date(window.first) + " and " + format_date(window.last));
    return out;
}

int resolved_target(const PipelineConfig& c) { return c.target_year != 0 ? c.target_year : c.study_year + 1; }

void check_years(const PipelineConfig& c) {
    if (c.study_year == 0) throw ParameterError("study_year is required");
    if (resolved_target(c) != c.study_year + 1) throw ParameterError("target_year must equal study_year + 1");
}

class LazyEigenBasis {
public:
    LazyEigenBasis(const DiscreteOperator& op, const std::vector<std::size_t>& labels, const PipelineConfig& config)
        : op_(op), labels_(labels), config_(config), n_(static_cast<std::size_t>(op.mass.diag.size())) {}

    const EigenBasis& at_least(std::size_t p) {
        p = std::min(p, n_);
        if (basis_ && basis_->count() >= p) return *basis_;
        SolverOptions opt;
        opt.method = config_.eigen_method;
        const bool dense = opt.method == EigenMethod::Dense ||
                           (opt.method == EigenMethod::Auto &&
                            (n_ <= opt.dense_threshold || p * opt.dense_fraction > n_) && n_ <= kDenseOracleLimit);
        basis_ = dense ? dense_oracle(op_.weights, op_.mass) : solve_generalized(op_.weights, op_.mass, p, opt);
        if (config_.mode == OperatorMode::Balanced) snap_null_space(*basis_, labels_, op_.mass);
        return *basis_;
    }

    const std::optional<EigenBasis>& current() const { return basis_; }
    std::size_t n() const { return n_; }

private:
    const DiscreteOperator& op_;
    const std::vector<std::size_t>& labels_;
    const PipelineConfig& config_;
    std::size_t n_;
    std::optional<EigenBasis> basis_;
};

SelectionRun select_from_book(const QuoteBook& book, const PipelineConfig& config, bool write_files) {
    check_years(config);
    SelectionRun run = run_selection(slice_book(book, DateRange::year(config.study_year)), config);
    if (write_files) {
        fs::create_directories(config.output_dir);
        const auto tickers = run.frame.tickers();
        for (const auto& [n, features] : run.selections)
            write_constituents(constituents_path(config, n).string(), features, tickers, run.frame.caps);
    }
    return run;
}

std::map<std::size_t, IndexResult> index_from_book(const QuoteBook& book, const PipelineConfig& config) {
    check_years(config);
    const int target = resolved_target(config);
    const QuoteBook year_book = slice_book(book, DateRange::year(target));
    const TradingCalendar calendar = TradingCalendar::from_quotes(year_book, DateRange::year(target));
    const PriceTable table = build_price_table(year_book, calendar);

    std::vector<CorporateAction> explicit_actions;
    if (!config.actions_path.empty()) {
        for (auto& a : load_actions(config.actions_path))
            if (calendar.front() <= a.effective_date && a.effective_date <= calendar.back())
                explicit_actions.push_back(std::move(a));
    }

    fs::create_directories(config.output_dir);
    std::map<std::size_t, IndexResult> out;
    for (std::size_t n : config.n_list) {
        const auto tickers = read_constituents(constituents_path(config, n).string());
        std::vector<CorporateAction> actions;
        for (const auto& a : explicit_actions)
            if (std::find(tickers.begin(), tickers.end(), a.ticker) != tickers.end()) actions.push_back(a);
        if (config.infer_actions) actions = merge_actions(std::move(actions), infer_actions(table, tickers));
        IndexResult result = compute_series(table, tickers, config.base_level, actions);
        write_index_series(index_path(config, n).string(), result);
        write_divisor_events(events_path(config, n).string(), result.events);
        out.emplace(n, std::move(result));
    }
    return out;
}

}  // namespace

void apply_config_value(PipelineConfig& c, const std::string& key, const std::string& value) {
    if (key == "quotes") c.quotes_path = value;
    else if (key == "benchmark") c.benchmark_path = value;
    else if (key == "actions") c.actions_path = value;
    else if (key == "out" || key == "output_dir") c.output_dir = value;
    else if (key == "study_year") c.study_year = static_cast<int>(parse_size(key, value));
    else if (key == "target_year") c.target_year = static_cast<int>(parse_size(key, value));
    else if (key == "first_year") c.first_year = static_cast<int>(parse_size(key, value));
    else if (key == "last_year") c.last_year = static_cast<int>(parse_size(key, value));
    else if (key == "k") c.k = parse_size(key, value);
    else if (key == "t") c.t = value == "auto" ? 0.0 : parse_real(key, value);
    else if (key == "mode") c.mode = parse_operator_mode(value);
    else if (key == "n_list") {
        c.n_list.clear();
        for (const auto& part : csv::split(value)) c.n_list.push_back(parse_size(key, part));
    } else if (key == "base_level") c.base_level = parse_real(key, value);
    else if (key == "batch") c.batch = parse_size(key, value);
    else if (key == "risk_free") c.risk_free = parse_real(key, value);
    else if (key == "infer_actions") c.infer_actions = parse_bool(key, value);
    else if (key == "dump_operator") c.dump_operator = parse_bool(key, value);
    else if (key == "dump_eigenbasis") c.dump_eigenbasis = parse_bool(key, value);
    else if (key == "eigen_method") c.eigen_method = parse_method(value);
    else if (key == "seed") c.synth.seed = static_cast<std::uint64_t>(parse_size(key, value));
    else if (key == "n_stocks") c.synth.n_stocks = parse_size(key, value);
    else if (key == "m_days") c.synth.m_days = parse_size(key, value);
    else if (key == "n_sectors") c.synth.n_sectors = parse_size(key, value);
    else if (key == "market_vol") c.synth.market_vol = parse_real(key, value);
    else if (key == "sector_vol") c.synth.sector_vol = parse_real(key, value);
    else if (key == "idio_vol") c.synth.idio_vol = parse_real(key, value);
    else if (key == "cap_log_mean") c.synth.cap_log_mean = parse_real(key, value);
    else if (key == "cap_log_sd") c.synth.cap_log_sd = parse_real(key, value);
    else if (key == "start_year") c.synth.start_year = static_cast<int>(parse_size(key, value));
    else if (key == "n_years") c.synth.n_years = parse_size(key, value);
    else throw ParameterError("unknown config key '" + key + "'");
}

void load_config_file(const std::string& path, PipelineConfig& config) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto text = csv::trim(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) throw ParseError(path, number, "expected key = value");
        const std::string key(csv::trim(text.substr(0, eq)));
        const std::string value(csv::trim(text.substr(eq + 1)));
        try {
            apply_config_value(config, key, value);
        } catch (const ParameterError& e) {
            throw ParseError(path, number, e.what());
        }
    }
}

std::string index_name(std::size_t n) { return "MF" + std::to_string(n); }

fs::path constituents_path(const PipelineConfig& c, std::size_t n) {
    return c.output_dir / ("constituents_" + index_name(n) + "_" + std::to_string(resolved_target(c)) + ".csv");
}

fs::path index_path(const PipelineConfig& c, std::size_t n) {
    return c.output_dir / ("index_" + index_name(n) + "_" + std::to_string(resolved_target(c)) + ".csv");
}

fs::path events_path(const PipelineConfig& c, std::size_t n) {
    return c.output_dir / ("divisor_events_" + index_name(n) + "_" + std::to_string(resolved_target(c)) + ".csv");
}

SelectionRun run_selection(const QuoteBook& study_quotes, const PipelineConfig& config) {
    if (config.n_list.empty()) throw ParameterError("n_list is empty");
    if (config.batch < 1) throw ParameterError("batch must be at least 1");

    const TradingCalendar calendar = TradingCalendar::from_quotes(study_quotes, DateRange::year(config.study_year));
    SelectionRun run;
    run.frame = build_market_frame(study_quotes, calendar, calendar.back());
    const std::size_t n = run.frame.n();
    for (std::size_t target : config.n_list)
        if (target < 1 || target >= n)
            throw ParameterError("constituent count " + std::to_string(target) + " must lie in [1, " +
                                 std::to_string(n) + ") for the surviving universe");

    const AdjacencyGraph graph = knn_graph(run.frame, config.k);
    const DiscreteOperator op = build_operator(graph, config.t, config.mode);
    const std::vector<std::size_t> labels = connected_components(graph);

    if (config.dump_operator) {
        fs::create_directories(config.output_dir);
        const std::string stem = "operator_" + std::to_string(config.study_year);
        write_triplets((config.output_dir / (stem + "_W.txt")).string(), op.weights.entries);
        write_triplets((config.output_dir / (stem + "_A.txt")).string(), op.mass);
    }

    LazyEigenBasis eigen(op, labels, config);
    std::vector<std::size_t> targets(config.n_list);
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

    std::size_t want = config.batch;
    for (std::size_t target : targets) {
        while (true) {
            const EigenBasis& basis = eigen.at_least(want);
            try {
                run.selections.emplace(target, select_constituents(basis, graph, target, run.frame.caps));
                break;
            } catch (const InsufficientFeaturesError& e) {
                if (basis.count() >= n)
                    throw Error(std::string(e.what()) + " after exhausting all " + std::to_string(n) +
                                " eigenpairs (k = " + std::to_string(config.k) + ")");
                want = basis.count() + config.batch;
            }
        }
    }
    run.eigenpairs = eigen.current() ? eigen.current()->count() : 0;

    if (config.dump_eigenbasis && eigen.current()) {
        fs::create_directories(config.output_dir);
        write_eigenbasis((config.output_dir / ("eigenbasis_" + std::to_string(config.study_year) + ".csv")).string(),
                         *eigen.current());
    }
    return run;
}

SelectionRun cmd_select(const PipelineConfig& config) {
    check_years(config);
    return select_from_book(load_quotes(config.quotes_path, DateRange::year(config.study_year)), config, true);
}

std::map<std::size_t, IndexResult> cmd_index(const PipelineConfig& config) {
    check_years(config);
    return index_from_book(load_quotes(config.quotes_path, DateRange::year(resolved_target(config))), config);
}

std::vector<MetricsRow> cmd_metrics(const PipelineConfig& config, const std::vector<int>& target_years) {
    if (config.benchmark_path.empty()) throw ParameterError("a benchmark series is required for metrics");
    const IndexSeries benchmark = read_level_series(config.benchmark_path);
    std::vector<MetricsRow> rows;
    for (int year : target_years) {
        PipelineConfig c = config;
        c.study_year = year - 1;
        c.target_year = year;
        for (std::size_t n : config.n_list) {
            const IndexSeries series = read_level_series(index_path(c, n).string());
            rows.push_back({index_name(n), year, evaluate(series, benchmark, config.risk_free)});
        }
    }
    fs::create_directories(config.output_dir);
    write_metrics((config.output_dir / "metrics.csv").string(), rows);
    write_stability((config.output_dir / "stability.csv").string(), stability_summary(rows));
    return rows;
}

SynthMarket cmd_synth(const PipelineConfig& config) {
    SynthMarket market = generate_market(config.synth);
    fs::create_directories(config.output_dir);
    write_quotes((config.output_dir / "quotes.csv").string(), market.quotes);
    write_level_series((config.output_dir / "benchmark.csv").string(), market.benchmark);
    return market;
}

std::vector<MetricsRow> cmd_backtest(const PipelineConfig& config) {
    if (config.first_year == 0 || config.last_year < config.first_year)
        throw ParameterError("backtest needs first_year <= last_year (target years)");
    const QuoteBook book =
        load_quotes(config.quotes_path, DateRange{DateRange::year(config.first_year - 1).first,
                                                  DateRange::year(config.last_year).last});
    std::vector<int> years;
    for (int year = config.first_year; year <= config.last_year; ++year) {
        PipelineConfig c = config;
        c.study_year = year - 1;
        c.target_year = year;
        select_from_book(book, c, true);
        index_from_book(book, c);
        years.push_back(year);
    }
    return cmd_metrics(config, years);
}

}  // namespace mfindex
