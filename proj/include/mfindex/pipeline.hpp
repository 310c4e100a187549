// pipeline.hpp
// End-to-end stages behind the command-line tool. Each stage reads its inputs
// from files and writes its artifacts to the output directory, so stages can
// be re-run from intermediate results.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mfindex/index.hpp"
#include "mfindex/manifold.hpp"
#include "mfindex/metrics.hpp"
#include "mfindex/selection.hpp"
#include "mfindex/spectral.hpp"
#include "mfindex/synth.hpp"

namespace mfindex {

struct PipelineConfig {
    std::string quotes_path;
    std::string benchmark_path;
    std::string actions_path;          // optional
    std::filesystem::path output_dir = "out";

    int study_year = 0;
    int target_year = 0;               // defaults to study_year + 1
    int first_year = 0;                // backtest range of target years
    int last_year = 0;

    std::size_t k = 10;
    double t = 0.0;                    // <= 0 means self-tuning
    OperatorMode mode = OperatorMode::Balanced;
    std::vector<std::size_t> n_list{50, 100, 150, 180, 380};
    double base_level = kDefaultBaseLevel;
    std::size_t batch = 32;
    double risk_free = kDefaultRiskFree;
    bool infer_actions = true;
    bool dump_operator = false;
    bool dump_eigenbasis = false;
    EigenMethod eigen_method = EigenMethod::Auto;

    SynthConfig synth;
};

/// Applies `key = value` lines (# starts a comment) on top of `config`.
/// Throws ParseError for unknown keys or malformed values.
void load_config_file(const std::string& path, PipelineConfig& config);
void apply_config_value(PipelineConfig& config, const std::string& key, const std::string& value);

std::string index_name(std::size_t n);
std::filesystem::path constituents_path(const PipelineConfig& c, std::size_t n);
std::filesystem::path index_path(const PipelineConfig& c, std::size_t n);
std::filesystem::path events_path(const PipelineConfig& c, std::size_t n);

struct SelectionRun {
    MarketFrame frame;
    std::map<std::size_t, FeatureSet> selections;  // by N
    std::size_t eigenpairs = 0;                    // pairs computed for the largest N
};

/// Preprocesses the study year, builds the operator, and selects constituents
/// for every N, growing the eigenbasis in batches until every selection is complete.
SelectionRun run_selection(const QuoteBook& study_quotes, const PipelineConfig& config);

/// Stage wrappers: file in, file out.
SelectionRun cmd_select(const PipelineConfig& config);
std::map<std::size_t, IndexResult> cmd_index(const PipelineConfig& config);
std::vector<MetricsRow> cmd_metrics(const PipelineConfig& config, const std::vector<int>& target_years);
SynthMarket cmd_synth(const PipelineConfig& config);
std::vector<MetricsRow> cmd_backtest(const PipelineConfig& config);

}  // namespace mfindex
