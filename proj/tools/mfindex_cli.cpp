// mfindex: command-line front end for the manifold-feature index pipeline.
//
//   mfindex synth    --out data --seed 7
//   mfindex select   --quotes data/quotes.csv --study-year 2017 --out run
//   mfindex index    --quotes data/quotes.csv --study-year 2017 --out run
//   mfindex metrics  --benchmark data/benchmark.csv --study-year 2017 --out run
//   mfindex backtest --quotes q.csv --benchmark b.csv --first-year 2015 --last-year 2018
//
// Flags override values from --config (key = value lines).

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mfindex/error.hpp"
#include "mfindex/pipeline.hpp"

namespace {

struct FlagSpec {
    const char* flag;
    const char* key;
    const char* help;
};

constexpr FlagSpec kPipelineFlags[] = {
    {"--quotes", "quotes", "Quote CSV (date,ticker,close,shares_issued)"},
    {"--benchmark", "benchmark", "Benchmark level CSV (date,level)"},
    {"--actions", "actions", "Corporate actions CSV"},
    {"--out", "out", "Output directory"},
    {"--study-year", "study_year", "Year whose closes select the constituents"},
    {"--target-year", "target_year", "Year the index is computed for (study year + 1)"},
    {"--first-year", "first_year", "First target year of a backtest"},
    {"--last-year", "last_year", "Last target year of a backtest"},
    {"--k", "k", "Nearest neighbors per point"},
    {"--t", "t", "Kernel bandwidth, or 'auto' for the mean squared KNN distance"},
    {"--mode", "mode", "Operator mode: balanced or paper"},
    {"--n-list", "n_list", "Comma-separated constituent counts"},
    {"--base-level", "base_level", "Index base level B"},
    {"--batch", "batch", "Eigenpairs requested per batch"},
    {"--risk-free", "risk_free", "Monthly risk-free rate"},
    {"--eigen-method", "eigen_method", "auto, lanczos or dense"},
    {"--infer-actions", "infer_actions", "Derive delistings and share changes from the quotes (true/false)"},
    {"--dump-operator", "dump_operator", "Write W and A as sparse triplets (true/false)"},
    {"--dump-eigenbasis", "dump_eigenbasis", "Write the eigenbasis CSV (true/false)"},
};

constexpr FlagSpec kSynthFlags[] = {
    {"--seed", "seed", "Generator seed"},
    {"--n-stocks", "n_stocks", "Number of stocks"},
    {"--m-days", "m_days", "Trading days per year"},
    {"--n-sectors", "n_sectors", "Number of sector factors"},
    {"--market-vol", "market_vol", "Daily market-factor volatility shared by all sectors"},
    {"--sector-vol", "sector_vol", "Daily sector-factor volatility"},
    {"--idio-vol", "idio_vol", "Daily idiosyncratic volatility"},
    {"--cap-log-mean", "cap_log_mean", "Mean of log market cap"},
    {"--cap-log-sd", "cap_log_sd", "Standard deviation of log market cap"},
    {"--start-year", "start_year", "First synthetic year"},
    {"--n-years", "n_years", "Number of synthetic years"},
    {"--out", "out", "Output directory"},
};

struct Command {
    CLI::App* app = nullptr;
    std::string config_path;
    std::map<std::string, std::string> values;
};

template <std::size_t N>
void register_flags(Command& cmd, const FlagSpec (&flags)[N]) {
    cmd.app->add_option("--config", cmd.config_path, "key = value configuration file");
    for (const auto& f : flags) cmd.app->add_option(f.flag, cmd.values[f.key], f.help);
}

mfindex::PipelineConfig resolve(const Command& cmd) {
    mfindex::PipelineConfig config;
    if (!cmd.config_path.empty()) mfindex::load_config_file(cmd.config_path, config);
    for (const auto& [key, value] : cmd.values) {
        std::string flag = "--" + key;
        for (auto& ch : flag)
            if (ch == '_') ch = '-';
        if (key == "out") flag = "--out";
        if (cmd.app->count(flag) > 0) mfindex::apply_config_value(config, key, value);
    }
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Manifold-feature stock index pipeline"};
    app.require_subcommand(1);

    Command synth{app.add_subcommand("synth", "Generate a synthetic market (quotes.csv, benchmark.csv)")};
    Command select{app.add_subcommand("select", "Select constituents for every N from the study year")};
    Command index{app.add_subcommand("index", "Compute index series for the target year")};
    Command metrics{app.add_subcommand("metrics", "Evaluate index series against the benchmark")};
    Command backtest{app.add_subcommand("backtest", "Run select, index and metrics over a range of years")};

    register_flags(synth, kSynthFlags);
    for (Command* c : {&select, &index, &metrics, &backtest}) register_flags(*c, kPipelineFlags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth.app->parsed()) {
            auto config = resolve(synth);
            auto market = mfindex::cmd_synth(config);
            std::cout << "wrote " << market.quotes.size() << " tickers x " << market.benchmark.dates.size()
                      << " days to " << config.output_dir.string() << "\n";
        } else if (select.app->parsed()) {
            auto config = resolve(select);
            auto run = mfindex::cmd_select(config);
            std::cout << "universe n = " << run.frame.n() << ", m = " << run.frame.calendar.m()
                      << ", eigenpairs = " << run.eigenpairs << "\n";
            for (const auto& [n, features] : run.selections)
                std::cout << mfindex::constituents_path(config, n).string() << "\n";
        } else if (index.app->parsed()) {
            auto config = resolve(index);
            for (const auto& [n, result] : mfindex::cmd_index(config))
                std::cout << mfindex::index_path(config, n).string() << " (" << result.events.size()
                          << " divisor events)\n";
        } else if (metrics.app->parsed()) {
            auto config = resolve(metrics);
            const int year = config.target_year != 0 ? config.target_year : config.study_year + 1;
            if (config.study_year == 0 && config.target_year == 0)
                throw mfindex::ParameterError("metrics needs --study-year or --target-year");
            auto rows = mfindex::cmd_metrics(config, {year});
            for (const auto& r : rows)
                std::cout << r.index_name << ' ' << r.year << " pearson=" << r.report.pearson
                          << " alpha=" << r.report.alpha << " beta=" << r.report.beta
                          << " jensen_alpha=" << r.report.jensen_alpha << "\n";
        } else if (backtest.app->parsed()) {
            auto config = resolve(backtest);
            auto rows = mfindex::cmd_backtest(config);
            std::cout << "wrote " << rows.size() << " metric rows to "
                      << (config.output_dir / "metrics.csv").string() << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "mfindex: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
