#include "hellsemble/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <sstream>

#include "hellsemble/rng.hpp"

namespace hellsemble {

ExperimentConfig ExperimentConfig::default_grid(std::uint64_t seed) {
    ExperimentConfig config;
    config.seed = seed;

    const auto knn3 = LearnerSpec::knn(3);
    const auto knn5 = LearnerSpec::knn(5);
    const auto logreg = LearnerSpec::of(LearnerKind::logistic_regression);
    const auto dtree = LearnerSpec::of(LearnerKind::decision_tree);
    const auto gnb = LearnerSpec::of(LearnerKind::gaussian_nb);
    const auto forest = LearnerSpec::of(LearnerKind::random_forest);
    const auto gbt = LearnerSpec::of(LearnerKind::gradient_boosted_trees);
    const auto mlp = LearnerSpec::of(LearnerKind::mlp);

    config.suites = {
        {"suite1", {knn5, logreg, dtree, gnb}},
        {"suite2", {forest, gbt, mlp}},
        {"suite3", {knn3, knn5, dtree, gnb}},
        {"suite4", {knn3, knn5, logreg, dtree, gnb, forest, gbt, mlp}},
    };
    config.routers = {
        {"knn3", knn3},
        {"knn5", knn5},
        {"mlp", mlp},
        {"random_forest", forest},
    };
    return config;
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

namespace {

struct SplitViews {
    DataView train;
    DataView val;
    DataView test;
};

// Shared per-dataset split: test first, then validation out of the rest.
SplitViews split_dataset(const Dataset& data, const ExperimentConfig& config,
                         std::uint64_t dataset_seed) {
    auto [test, rest] =
        stratified_split(data, SplitSpec{config.test_fraction, mix_seed(dataset_seed, 1)});
    auto [val, train] =
        stratified_split(rest, SplitSpec{config.val_fraction, mix_seed(dataset_seed, 2)});
    return SplitViews{std::move(train), std::move(val), std::move(test)};
}

double score_fitted(const FittedHellsemble& model, const DataView& data, const Metric& metric) {
    return evaluate_ensemble(model.members, model.router.get(), data, metric);
}

std::vector<std::pair<std::string, LearnerSpec>> distinct_base_specs(
    const ExperimentConfig& config) {
    std::vector<std::pair<std::string, LearnerSpec>> out;
    for (const auto& suite : config.suites) {
        for (const auto& spec : suite.specs) {
            const bool seen = std::any_of(out.begin(), out.end(), [&](const auto& entry) {
                return entry.second.same_model(spec);
            });
            if (!seen) out.emplace_back(spec.label(), spec);
        }
    }
    // Disambiguate clashing labels (same kind, different hyperparameters).
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::size_t dup = 1;
        for (std::size_t j = i + 1; j < out.size(); ++j) {
            if (out[j].first == out[i].first) out[j].first += "#" + std::to_string(++dup);
        }
    }
    return out;
}

struct CellTask {
    std::size_t dataset_idx;
    std::size_t suite_idx;
    std::size_t router_idx;
    std::size_t mode_idx;
};

std::string csv_row(const CellResult& c) {
    std::ostringstream os;
    os << c.dataset << ',' << c.suite << ',' << c.router << ',' << c.mode << ','
       << c.member_count << ',' << (c.ok() ? format_double(c.score) : "") << ',' << c.wall_ms
       << ',' << c.status;
    return os.str();
}

std::string csv_baseline_row(const BaselineResult& b) {
    std::ostringstream os;
    os << b.dataset << ',' << b.spec_label << ",-,baseline,1,"
       << (b.ok() ? format_double(b.score) : "") << ',' << b.wall_ms << ',' << b.status;
    return os.str();
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config,
                                const std::vector<std::pair<std::string, Dataset>>& datasets,
                                int jobs) {
    if (config.suites.empty() || config.routers.empty() || config.modes.empty()) {
        throw ConfigError("BadConfig", "suites, routers and modes must be non-empty");
    }
    const Metric& metric = get_metric(config.metric);

    // Pre-split every dataset once; ensembles and baselines share it.
    std::vector<SplitViews> splits;
    std::vector<std::uint64_t> spec_seeds;
    splits.reserve(datasets.size());
    for (const auto& [name, data] : datasets) {
        const std::uint64_t dataset_seed = mix_seed(config.seed, hash_str(name));
        splits.push_back(split_dataset(data, config, dataset_seed));
        // One spec seed per dataset: every occurrence of a spec in the grid
        // (members and baselines alike) fits with the same seed, so a
        // single-member ensemble reproduces its baseline exactly.
        spec_seeds.push_back(mix_seed(dataset_seed, 3));
    }

    std::vector<CellTask> tasks;
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        for (std::size_t s = 0; s < config.suites.size(); ++s) {
            for (std::size_t r = 0; r < config.routers.size(); ++r) {
                for (std::size_t m = 0; m < config.modes.size(); ++m) {
                    tasks.push_back({d, s, r, m});
                }
            }
        }
    }

    ExperimentReport report;
    report.cells.resize(tasks.size());

    auto run_cell = [&](std::size_t t) {
        const CellTask& task = tasks[t];
        const auto& [dataset_name, dataset] = datasets[task.dataset_idx];
        const auto& suite = config.suites[task.suite_idx];
        const auto& named_router = config.routers[task.router_idx];
        const FitMode mode = config.modes[task.mode_idx];
        const auto& views = splits[task.dataset_idx];

        CellResult cell;
        cell.dataset = dataset_name;
        cell.suite = suite.name;
        cell.router = named_router.name;
        cell.mode = mode_name(mode);

        HellsembleConfig hc;
        hc.candidates = suite.specs;
        hc.router_spec = named_router.spec;
        for (auto& spec : hc.candidates) spec.seed = spec_seeds[task.dataset_idx];
        hc.router_spec.seed = spec_seeds[task.dataset_idx];
        hc.mode = mode;
        hc.metric = config.metric;
        hc.alpha_policy = config.alpha_policy;
        hc.max_iterations = config.max_iterations;
        hc.min_subset_size = config.min_subset_size;
        hc.seed = mix_seed(config.seed, hash_str(dataset_name + "|" + suite.name + "|" +
                                                 named_router.name + "|" + cell.mode));

        const auto start = std::chrono::steady_clock::now();
        try {
            auto fitted = fit_hellsemble(hc, views.train, views.val);
            cell.member_count = fitted.members.size();
            cell.score = score_fitted(fitted, views.test, metric);
            cell.history = std::move(fitted.history);
        } catch (const Error& e) {
            cell.status = "failed:" + e.code();
        }
        if (config.measure_time) {
            cell.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - start)
                               .count();
        }
        report.cells[t] = std::move(cell);
    };

    if (jobs > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
        for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(tasks.size()); ++t) {
            run_cell(static_cast<std::size_t>(t));
        }
    } else {
        for (std::size_t t = 0; t < tasks.size(); ++t) run_cell(t);
    }

    // Standalone baselines: every distinct base spec on each dataset.
    const auto base_specs = distinct_base_specs(config);
    std::vector<std::pair<std::size_t, std::size_t>> baseline_tasks;
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        for (std::size_t b = 0; b < base_specs.size(); ++b) baseline_tasks.emplace_back(d, b);
    }
    report.baselines.resize(baseline_tasks.size());

    auto run_baseline = [&](std::size_t t) {
        const auto [d, b] = baseline_tasks[t];
        const auto& views = splits[d];
        BaselineResult row;
        row.dataset = datasets[d].first;
        row.spec_label = base_specs[b].first;
        LearnerSpec spec = base_specs[b].second;
        spec.seed = spec_seeds[d];
        const auto start = std::chrono::steady_clock::now();
        try {
            auto model = fit(spec, views.train);
            if (metric.uses_scores()) {
                const Matrix probs = model->predict_proba(views.test.to_matrix());
                std::vector<double> scores(probs.rows(), 0.0);
                for (std::size_t r = 0; r < probs.rows(); ++r) {
                    const auto& classes = model->class_set();
                    for (std::size_t c = 0; c < classes.size(); ++c) {
                        if (classes[c] == 1) scores[r] = probs(r, c);
                    }
                }
                row.score = metric.eval_scores(views.test.labels(), scores);
            } else {
                row.score =
                    metric.eval_labels(views.test.labels(), model->predict(views.test.to_matrix()));
            }
        } catch (const Error& e) {
            row.status = "failed:" + e.code();
        }
        if (config.measure_time) {
            row.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - start)
                              .count();
        }
        report.baselines[t] = std::move(row);
    };

    if (jobs > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
        for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(baseline_tasks.size()); ++t) {
            run_baseline(static_cast<std::size_t>(t));
        }
    } else {
        for (std::size_t t = 0; t < baseline_tasks.size(); ++t) run_baseline(t);
    }

    // Aggregates over datasets, one entry per grid configuration.
    for (const auto& suite : config.suites) {
        for (const auto& named_router : config.routers) {
            for (const auto mode : config.modes) {
                ConfigurationAggregate agg;
                agg.suite = suite.name;
                agg.router = named_router.name;
                agg.mode = mode_name(mode);
                std::size_t multi = 0;
                for (const auto& cell : report.cells) {
                    if (cell.suite != agg.suite || cell.router != agg.router ||
                        cell.mode != agg.mode || !cell.ok()) {
                        continue;
                    }
                    ++agg.dataset_count;
                    agg.mean_score += cell.score;
                    if (cell.member_count > 1) ++multi;
                }
                if (agg.dataset_count > 0) {
                    agg.mean_score /= static_cast<double>(agg.dataset_count);
                    agg.multi_model_ratio =
                        static_cast<double>(multi) / static_cast<double>(agg.dataset_count);
                }
                report.configuration_aggregates.push_back(std::move(agg));
            }
        }
    }
    for (const auto& [label, spec] : base_specs) {
        BaselineAggregate agg;
        agg.spec_label = label;
        for (const auto& row : report.baselines) {
            if (row.spec_label != label || !row.ok()) continue;
            ++agg.dataset_count;
            agg.mean_score += row.score;
        }
        if (agg.dataset_count > 0) agg.mean_score /= static_cast<double>(agg.dataset_count);
        report.baseline_aggregates.push_back(std::move(agg));
    }
    return report;
}

double multi_model_ratio(const ExperimentReport& report, const std::string& suite,
                         const std::string& router, const std::string& mode) {
    for (const auto& agg : report.configuration_aggregates) {
        if (agg.suite == suite && agg.router == router && agg.mode == mode) {
            return agg.multi_model_ratio;
        }
    }
    throw ConfigError("UnknownConfiguration",
                      "no configuration (" + suite + ", " + router + ", " + mode + ") in report");
}

std::string ExperimentReport::to_csv() const {
    std::ostringstream os;
    os << "dataset,suite,router,mode,member_count,score,wall_ms,status\n";
    for (const auto& cell : cells) os << csv_row(cell) << '\n';
    for (const auto& row : baselines) os << csv_baseline_row(row) << '\n';
    return os.str();
}

nlohmann::json ExperimentReport::to_json() const {
    nlohmann::json jcells = nlohmann::json::array();
    for (const auto& cell : cells) {
        nlohmann::json history = nlohmann::json::array();
        for (const auto& rec : cell.history) {
            history.push_back({{"iteration", rec.iteration},
                               {"model", rec.chosen_spec.label()},
                               {"train_size", rec.train_size},
                               {"misclassified_count", rec.misclassified_count},
                               {"alpha_used", rec.alpha_used},
                               {"val_score", rec.val_score},
                               {"accepted", rec.accepted}});
        }
        jcells.push_back({{"dataset", cell.dataset},
                          {"suite", cell.suite},
                          {"router", cell.router},
                          {"mode", cell.mode},
                          {"member_count", cell.member_count},
                          {"score", cell.ok() ? nlohmann::json(cell.score) : nlohmann::json()},
                          {"wall_ms", cell.wall_ms},
                          {"status", cell.status},
                          {"history", std::move(history)}});
    }
    nlohmann::json jbaselines = nlohmann::json::array();
    for (const auto& row : baselines) {
        jbaselines.push_back({{"dataset", row.dataset},
                              {"model", row.spec_label},
                              {"score", row.ok() ? nlohmann::json(row.score) : nlohmann::json()},
                              {"wall_ms", row.wall_ms},
                              {"status", row.status}});
    }
    nlohmann::json jconfig_aggs = nlohmann::json::array();
    for (const auto& agg : configuration_aggregates) {
        jconfig_aggs.push_back({{"suite", agg.suite},
                                {"router", agg.router},
                                {"mode", agg.mode},
                                {"multi_model_ratio", agg.multi_model_ratio},
                                {"mean_score", agg.mean_score},
                                {"dataset_count", agg.dataset_count}});
    }
    nlohmann::json jbase_aggs = nlohmann::json::array();
    for (const auto& agg : baseline_aggregates) {
        jbase_aggs.push_back({{"model", agg.spec_label},
                              {"mean_score", agg.mean_score},
                              {"dataset_count", agg.dataset_count}});
    }
    return {{"cells", std::move(jcells)},
            {"baselines", std::move(jbaselines)},
            {"aggregates",
             {{"configurations", std::move(jconfig_aggs)},
              {"baselines", std::move(jbase_aggs)}}}};
}

}  // namespace hellsemble
