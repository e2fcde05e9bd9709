#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hellsemble/ensemble.hpp"

namespace hellsemble {

struct NamedSuite {
    std::string name;
    std::vector<LearnerSpec> specs;
};

struct NamedRouter {
    std::string name;
    LearnerSpec spec;
};

struct ExperimentConfig {
    std::vector<NamedSuite> suites;
    std::vector<NamedRouter> routers;
    std::vector<FitMode> modes = {FitMode::sequential, FitMode::greedy};
    double test_fraction = 0.2;   // of the full data
    double val_fraction = 0.25;   // of the remaining training portion
    std::string metric = "accuracy";
    AlphaPolicy alpha_policy;
    int max_iterations = 10;
    int min_subset_size = 10;
    std::uint64_t seed = 42;
    // Wall times are only measured when set; the default keeps report
    // files byte-identical across runs and job counts.
    bool measure_time = false;

    /// The paper-grid default: four base-model suites crossed with four
    /// routers, both construction modes.
    static ExperimentConfig default_grid(std::uint64_t seed = 42);
};

/// One ensemble cell of the grid.
struct CellResult {
    std::string dataset;
    std::string suite;
    std::string router;
    std::string mode;
    std::size_t member_count = 0;
    double score = 0.0;
    std::int64_t wall_ms = 0;
    std::string status = "ok";  // "ok" or "failed:<Code>"
    std::vector<IterationRecord> history;

    bool ok() const noexcept { return status == "ok"; }
};

/// One standalone-baseline row: a base spec trained on the same training
/// portion the ensembles receive, scored on the same test split.
struct BaselineResult {
    std::string dataset;
    std::string spec_label;
    double score = 0.0;
    std::int64_t wall_ms = 0;
    std::string status = "ok";

    bool ok() const noexcept { return status == "ok"; }
};

struct ConfigurationAggregate {
    std::string suite;
    std::string router;
    std::string mode;
    double multi_model_ratio = 0.0;
    double mean_score = 0.0;
    std::size_t dataset_count = 0;
};

struct BaselineAggregate {
    std::string spec_label;
    double mean_score = 0.0;
    std::size_t dataset_count = 0;
};

struct ExperimentReport {
    std::vector<CellResult> cells;          // canonical grid order
    std::vector<BaselineResult> baselines;  // canonical order
    std::vector<ConfigurationAggregate> configuration_aggregates;
    std::vector<BaselineAggregate> baseline_aggregates;

    std::string to_csv() const;
    nlohmann::json to_json() const;
};

/// Run the full grid over the given datasets. Cells are independent;
/// `jobs` > 1 executes them concurrently without changing any result (all
/// seeds derive from (seed, dataset, suite, router, mode) and rows are
/// assembled in canonical order).
ExperimentReport run_experiment(const ExperimentConfig& config,
                                const std::vector<std::pair<std::string, Dataset>>& datasets,
                                int jobs = 1);

/// Fraction of ok datasets whose ensemble for (suite, router, mode) kept
/// more than one member. Throws UnknownConfiguration for keys absent from
/// the report.
double multi_model_ratio(const ExperimentReport& report, const std::string& suite,
                         const std::string& router, const std::string& mode);

/// Shortest round-trip decimal rendering, used everywhere report bytes
/// must be deterministic.
std::string format_double(double value);

}  // namespace hellsemble
