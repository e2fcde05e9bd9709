#include "hellsemble/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "hellsemble/rng.hpp"
#include "hellsemble/version.hpp"

namespace hellsemble {

std::string mode_name(FitMode mode) {
    return mode == FitMode::sequential ? "sequential" : "greedy";
}

FitMode mode_from_name(const std::string& name) {
    if (name == "sequential") return FitMode::sequential;
    if (name == "greedy") return FitMode::greedy;
    throw ConfigError("BadConfig", "field 'mode' must be 'sequential' or 'greedy', got '" + name + "'");
}

double compute_alpha(double train_score, double val_score, const AlphaPolicy& policy) {
    if (policy.rule == AlphaPolicy::Rule::fixed) return policy.fixed_value;
    return std::clamp(train_score - val_score, 0.0, policy.alpha_max);
}

void RouterDataset::relabel(std::span<const std::int64_t> ids, int iteration) {
    if (iteration < 1) {
        throw TrainError("BadIteration", "circle labels start at 1");
    }
    for (std::int64_t id : ids) labels_[id] = iteration;
}

std::vector<int> RouterDataset::distinct_labels() const {
    std::vector<int> out;
    for (const auto& [id, label] : labels_) {
        if (out.empty() || out.back() != label) out.push_back(label);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

RouterDataset update_router_dataset(RouterDataset rd, std::span<const std::int64_t> ids,
                                    int iteration) {
    rd.relabel(ids, iteration);
    return rd;
}

namespace {

bool multiclass_capable(LearnerKind kind) {
    return kind == LearnerKind::knn || kind == LearnerKind::decision_tree ||
           kind == LearnerKind::random_forest || kind == LearnerKind::mlp;
}

void require_router_kind(const LearnerSpec& spec) {
    if (!multiclass_capable(spec.kind())) {
        throw ConfigError("RouterUnsupported",
                          "router kind '" + kind_name(spec.kind()) + "' cannot fit multiclass data");
    }
}

Matrix gather_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
    Matrix sub(rows.size(), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto src = x.row(rows[i]);
        std::copy(src.begin(), src.end(), sub.row(i).begin());
    }
    return sub;
}

// Per-row predictions with each row delegated to its assigned member.
std::vector<int> routed_predictions(std::span<const LearnerPtr> members,
                                    const std::vector<int>& assignment, const Matrix& x) {
    std::vector<int> out(x.rows(), 0);
    for (std::size_t j = 1; j <= members.size(); ++j) {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < assignment.size(); ++r) {
            if (static_cast<std::size_t>(assignment[r]) == j) rows.push_back(r);
        }
        if (rows.empty()) continue;
        auto preds = members[j - 1]->predict(gather_rows(x, rows));
        for (std::size_t i = 0; i < rows.size(); ++i) out[rows[i]] = preds[i];
    }
    return out;
}

double positive_class_probability(const Learner& member, const Matrix& probs, std::size_t row) {
    const auto& classes = member.class_set();
    for (std::size_t c = 0; c < classes.size(); ++c) {
        if (classes[c] == 1) return probs(row, c);
    }
    return 0.0;
}

std::vector<double> routed_positive_scores(std::span<const LearnerPtr> members,
                                           const std::vector<int>& assignment, const Matrix& x) {
    std::vector<double> out(x.rows(), 0.0);
    for (std::size_t j = 1; j <= members.size(); ++j) {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < assignment.size(); ++r) {
            if (static_cast<std::size_t>(assignment[r]) == j) rows.push_back(r);
        }
        if (rows.empty()) continue;
        const Matrix probs = members[j - 1]->predict_proba(gather_rows(x, rows));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            out[rows[i]] = positive_class_probability(*members[j - 1], probs, i);
        }
    }
    return out;
}

void check_assignment(std::span<const LearnerPtr> members, const std::vector<int>& assignment) {
    for (int a : assignment) {
        if (a < 1 || static_cast<std::size_t>(a) > members.size()) {
            throw TrainError("BadRouterLabel",
                             "router produced circle label " + std::to_string(a) + " for " +
                                 std::to_string(members.size()) + " members");
        }
    }
}

}  // namespace

LearnerPtr train_router(const RouterDataset& rd, const LearnerSpec& router_spec) {
    require_router_kind(router_spec);
    if (rd.empty()) {
        throw TrainError("EmptyTrainingSet", "router dataset is empty");
    }
    if (rd.distinct_labels().size() <= 1) {
        return nullptr;  // trivial routing to member 1
    }
    const Dataset& backing = rd.backing();
    Matrix x(rd.labels().size(), backing.d());
    std::vector<int> y;
    y.reserve(rd.labels().size());
    std::size_t r = 0;
    for (const auto& [id, label] : rd.labels()) {
        auto src = backing.row(backing.row_of_id(id));
        std::copy(src.begin(), src.end(), x.row(r).begin());
        y.push_back(label);
        ++r;
    }
    return fit(router_spec, x, y);
}

std::vector<int> route(const Learner* router, const Matrix& x) {
    if (router == nullptr) return std::vector<int>(x.rows(), 1);
    return router->predict(x);
}

double evaluate_ensemble(std::span<const LearnerPtr> members, const Learner* router,
                         const DataView& data, const Metric& metric) {
    if (members.empty()) {
        throw TrainError("EmptyTrainingSet", "cannot evaluate an empty ensemble");
    }
    const Matrix x = data.to_matrix();
    const auto truth = data.labels();
    const auto assignment = route(router, x);
    check_assignment(members, assignment);
    if (metric.uses_scores()) {
        return metric.eval_scores(truth, routed_positive_scores(members, assignment, x));
    }
    return metric.eval_labels(truth, routed_predictions(members, assignment, x));
}

std::uint64_t iteration_seed(std::uint64_t config_seed, int iteration) {
    return mix_seed(config_seed, static_cast<std::uint64_t>(iteration));
}

std::vector<std::int64_t> partition_next(const DataView& circle, const std::vector<int>& predictions,
                                         double alpha, std::uint64_t seed) {
    if (predictions.size() != circle.rows()) {
        throw DataError("LengthMismatch", "predictions must cover the circle");
    }
    std::vector<std::int64_t> next, correct;
    for (std::size_t i = 0; i < circle.rows(); ++i) {
        (predictions[i] != circle.label(i) ? next : correct).push_back(circle.id(i));
    }
    const auto carry = std::min<std::size_t>(
        static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(correct.size()))),
        correct.size());
    Rng rng(seed);
    for (std::size_t i = 0; i < carry; ++i) {
        const std::size_t j = i + rng.below(correct.size() - i);
        std::swap(correct[i], correct[j]);
    }
    next.insert(next.end(), correct.begin(), correct.begin() + static_cast<std::ptrdiff_t>(carry));
    std::sort(next.begin(), next.end());
    return next;
}

CandidateChoice select_greedy_candidate(std::span<const LearnerPtr> members,
                                        const Learner* tentative_router,
                                        std::span<const LearnerSpec> candidates,
                                        const DataView& circle, const DataView& val,
                                        const Metric& metric) {
    if (candidates.empty()) {
        throw ConfigError("BadConfig", "candidate list must be non-empty");
    }
    const Matrix cx = circle.to_matrix();
    const auto cy = circle.labels();

    std::vector<LearnerPtr> fitted(candidates.size());
    std::vector<double> scores(candidates.size(), 0.0);
    std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic) if (candidates.size() > 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(candidates.size()); ++i) {
        try {
            auto model = fit(candidates[static_cast<std::size_t>(i)], cx, cy);
            std::vector<LearnerPtr> tentative(members.begin(), members.end());
            tentative.push_back(model);
            scores[static_cast<std::size_t>(i)] =
                evaluate_ensemble(tentative, tentative_router, val, metric);
            fitted[static_cast<std::size_t>(i)] = std::move(model);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        if (scores[i] > scores[best]) best = i;  // ties keep the earlier candidate
    }
    return CandidateChoice{best, fitted[best], scores[best]};
}

FittedHellsemble fit_hellsemble(const HellsembleConfig& config, const DataView& train,
                                const DataView& val) {
    if (config.candidates.empty()) {
        throw ConfigError("BadConfig", "field 'candidates' must be non-empty");
    }
    if (config.max_iterations < 1) {
        throw ConfigError("BadConfig", "field 'max_iterations' must be positive");
    }
    if (config.min_subset_size < 1) {
        throw ConfigError("BadConfig", "field 'min_subset_size' must be positive");
    }
    require_router_kind(config.router_spec);
    if (train.rows() == 0) {
        throw TrainError("EmptyTrainingSet", "training set is empty");
    }
    if (val.rows() == 0) {
        throw TrainError("EmptyTrainingSet", "validation set is empty");
    }
    const Metric& metric = get_metric(config.metric);

    // Greedy follows the same per-iteration structure with all candidates
    // in play; its iteration count keeps the candidate-list bound so a
    // single-candidate greedy run coincides with the sequential one.
    const std::size_t iteration_cap =
        config.mode == FitMode::sequential
            ? config.candidates.size()
            : std::min<std::size_t>(config.candidates.size(),
                                    static_cast<std::size_t>(config.max_iterations));

    DataView circle = train;
    RouterDataset rd(train.parent());
    std::vector<LearnerPtr> members;
    LearnerPtr router;
    std::vector<IterationRecord> history;
    double best_score = 0.0;

    for (int iter = 1; static_cast<std::size_t>(iter) <= iteration_cap; ++iter) {
        std::span<const LearnerSpec> cands;
        if (config.mode == FitMode::sequential) {
            cands = {&config.candidates[static_cast<std::size_t>(iter - 1)], 1};
        } else {
            cands = config.candidates;
        }

        RouterDataset rd_tentative = rd;
        const auto circle_ids = circle.ids();
        rd_tentative.relabel(circle_ids, iter);
        LearnerPtr router_tentative = train_router(rd_tentative, config.router_spec);

        auto choice =
            select_greedy_candidate(members, router_tentative.get(), cands, circle, val, metric);

        const auto circle_preds = choice.model->predict(circle.to_matrix());
        std::size_t miss = 0;
        for (std::size_t i = 0; i < circle.rows(); ++i) {
            if (circle_preds[i] != circle.label(i)) ++miss;
        }
        IterationRecord rec{iter,  cands[choice.index], circle.rows(), miss, 0.0,
                            choice.val_score, false};

        // The first member is always kept (S_prev starts at 0); afterwards
        // a non-strict improvement rejects the candidate and stops.
        const bool accepted = (iter == 1) || (choice.val_score > best_score);
        if (!accepted) {
            history.push_back(rec);
            if (config.strict_algorithm1) {
                members.push_back(choice.model);
                router = router_tentative;
                rd = rd_tentative;
            }
            break;
        }
        rec.accepted = true;
        members.push_back(choice.model);
        router = router_tentative;
        rd = rd_tentative;
        best_score = choice.val_score;

        if (miss == 0) {
            history.push_back(rec);
            break;
        }
        const double train_routed = evaluate_ensemble(members, router.get(), train, metric);
        rec.alpha_used = compute_alpha(train_routed, choice.val_score, config.alpha_policy);
        history.push_back(rec);

        auto next_ids = partition_next(circle, circle_preds, rec.alpha_used,
                                       iteration_seed(config.seed, iter));
        if (next_ids.size() < static_cast<std::size_t>(config.min_subset_size)) break;
        circle = train.select_ids(
            std::unordered_set<std::int64_t>(next_ids.begin(), next_ids.end()));
    }

    FittedHellsemble out;
    out.members = std::move(members);
    out.router = out.members.size() > 1 ? router : nullptr;
    out.history = std::move(history);
    out.config = config;
    out.feature_count = train.cols();
    out.feature_names = train.parent().feature_names();
    out.router_label_histogram.assign(out.members.size(), 0);
    for (const auto& [id, label] : rd.labels()) {
        ++out.router_label_histogram[static_cast<std::size_t>(label - 1)];
    }
    return out;
}

FittedHellsemble fit_sequential(const HellsembleConfig& config, const DataView& train,
                                const DataView& val) {
    if (config.mode != FitMode::sequential) {
        throw ConfigError("BadConfig", "fit_sequential requires mode=sequential");
    }
    return fit_hellsemble(config, train, val);
}

FittedHellsemble fit_greedy(const HellsembleConfig& config, const DataView& train,
                            const DataView& val) {
    if (config.mode != FitMode::greedy) {
        throw ConfigError("BadConfig", "fit_greedy requires mode=greedy");
    }
    return fit_hellsemble(config, train, val);
}

std::vector<int> FittedHellsemble::predict(const Matrix& x) const {
    if (x.cols() != feature_count) {
        throw DataError("DimensionMismatch", "model expects " + std::to_string(feature_count) +
                                                 " features, got " + std::to_string(x.cols()));
    }
    const auto assignment = route(router.get(), x);
    check_assignment(members, assignment);
    return routed_predictions(members, assignment, x);
}

Matrix FittedHellsemble::predict_proba(const Matrix& x) const {
    if (x.cols() != feature_count) {
        throw DataError("DimensionMismatch", "model expects " + std::to_string(feature_count) +
                                                 " features, got " + std::to_string(x.cols()));
    }
    const auto assignment = route(router.get(), x);
    check_assignment(members, assignment);
    Matrix out(x.rows(), 2);
    for (std::size_t j = 1; j <= members.size(); ++j) {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < assignment.size(); ++r) {
            if (static_cast<std::size_t>(assignment[r]) == j) rows.push_back(r);
        }
        if (rows.empty()) continue;
        const auto& member = *members[j - 1];
        const Matrix probs = member.predict_proba(gather_rows(x, rows));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t c = 0; c < member.class_set().size(); ++c) {
                out(rows[i], static_cast<std::size_t>(member.class_set()[c])) = probs(i, c);
            }
        }
    }
    return out;
}

namespace {

nlohmann::json alpha_policy_to_json(const AlphaPolicy& p) {
    if (p.rule == AlphaPolicy::Rule::fixed) {
        return {{"rule", "fixed"}, {"value", p.fixed_value}};
    }
    return {{"rule", "gap_clamp"}, {"alpha_max", p.alpha_max}};
}

AlphaPolicy alpha_policy_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ConfigError("BadConfig", "field 'alpha' must be an object");
    }
    AlphaPolicy p;
    const auto rule = j.value("rule", std::string("gap_clamp"));
    std::vector<std::string> allowed{"rule"};
    if (rule == "gap_clamp") {
        p.rule = AlphaPolicy::Rule::gap_clamp;
        p.alpha_max = j.value("alpha_max", p.alpha_max);
        allowed.push_back("alpha_max");
    } else if (rule == "fixed") {
        p.rule = AlphaPolicy::Rule::fixed;
        if (!j.contains("value")) {
            throw ConfigError("BadConfig", "alpha rule 'fixed' needs a 'value' field");
        }
        p.fixed_value = j.at("value").get<double>();
        allowed.push_back("value");
    } else {
        throw ConfigError("BadConfig",
                          "field 'alpha.rule' must be 'gap_clamp' or 'fixed', got '" + rule + "'");
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
            throw ConfigError("BadConfig", "unknown field 'alpha." + it.key() + "'");
        }
    }
    const double a = (p.rule == AlphaPolicy::Rule::fixed) ? p.fixed_value : p.alpha_max;
    if (a < 0.0 || a > 1.0) {
        throw ConfigError("BadConfig", "alpha values must lie in [0, 1]");
    }
    return p;
}

nlohmann::json record_to_json(const IterationRecord& r) {
    return {{"iteration", r.iteration},
            {"chosen_spec", spec_to_json(r.chosen_spec)},
            {"train_size", r.train_size},
            {"misclassified_count", r.misclassified_count},
            {"alpha_used", r.alpha_used},
            {"val_score", r.val_score},
            {"accepted", r.accepted}};
}

IterationRecord record_from_json(const nlohmann::json& j) {
    IterationRecord r;
    r.iteration = j.at("iteration").get<int>();
    r.chosen_spec = spec_from_json(j.at("chosen_spec"));
    r.train_size = j.at("train_size").get<std::size_t>();
    r.misclassified_count = j.at("misclassified_count").get<std::size_t>();
    r.alpha_used = j.at("alpha_used").get<double>();
    r.val_score = j.at("val_score").get<double>();
    r.accepted = j.at("accepted").get<bool>();
    return r;
}

}  // namespace

nlohmann::json config_to_json(const HellsembleConfig& config) {
    nlohmann::json cands = nlohmann::json::array();
    for (const auto& c : config.candidates) cands.push_back(spec_to_json(c));
    return {{"candidates", std::move(cands)},
            {"router", spec_to_json(config.router_spec)},
            {"mode", mode_name(config.mode)},
            {"metric", config.metric},
            {"alpha", alpha_policy_to_json(config.alpha_policy)},
            {"max_iterations", config.max_iterations},
            {"min_subset_size", config.min_subset_size},
            {"seed", config.seed},
            {"strict_algorithm1", config.strict_algorithm1}};
}

HellsembleConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ConfigError("BadConfig", "ensemble config must be a JSON object");
    }
    static const std::vector<std::string> known{
        "candidates", "router",          "mode", "metric", "alpha",
        "max_iterations", "min_subset_size", "seed", "strict_algorithm1"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
            throw ConfigError("BadConfig", "unknown field '" + it.key() + "' in ensemble config");
        }
    }
    HellsembleConfig config;
    if (!j.contains("candidates") || !j.at("candidates").is_array() || j.at("candidates").empty()) {
        throw ConfigError("BadConfig", "field 'candidates' must be a non-empty array");
    }
    for (const auto& jc : j.at("candidates")) {
        config.candidates.push_back(spec_from_json(jc));
    }
    if (j.contains("router")) config.router_spec = spec_from_json(j.at("router"));
    if (j.contains("mode")) config.mode = mode_from_name(j.at("mode").get<std::string>());
    if (j.contains("metric")) config.metric = j.at("metric").get<std::string>();
    if (j.contains("alpha")) config.alpha_policy = alpha_policy_from_json(j.at("alpha"));
    if (j.contains("max_iterations")) config.max_iterations = j.at("max_iterations").get<int>();
    if (j.contains("min_subset_size")) config.min_subset_size = j.at("min_subset_size").get<int>();
    if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("strict_algorithm1")) {
        config.strict_algorithm1 = j.at("strict_algorithm1").get<bool>();
    }
    return config;
}

nlohmann::json FittedHellsemble::to_json() const {
    nlohmann::json jmembers = nlohmann::json::array();
    for (const auto& m : members) jmembers.push_back(learner_to_json(*m));
    nlohmann::json jhistory = nlohmann::json::array();
    for (const auto& r : history) jhistory.push_back(record_to_json(r));
    return {{"format", "hellsemble-ensemble/1"},
            {"version", std::string(kVersion)},
            {"config", config_to_json(config)},
            {"members", std::move(jmembers)},
            {"router", router ? learner_to_json(*router) : nlohmann::json()},
            {"history", std::move(jhistory)},
            {"feature_count", feature_count},
            {"feature_names", feature_names},
            {"router_label_histogram", router_label_histogram}};
}

FittedHellsemble FittedHellsemble::from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("format", "") != "hellsemble-ensemble/1") {
        throw DataError("BadModelFile", "not a hellsemble ensemble archive");
    }
    FittedHellsemble out;
    out.config = config_from_json(j.at("config"));
    for (const auto& jm : j.at("members")) out.members.push_back(learner_from_json(jm));
    if (!j.at("router").is_null()) out.router = learner_from_json(j.at("router"));
    for (const auto& jr : j.at("history")) out.history.push_back(record_from_json(jr));
    out.feature_count = j.at("feature_count").get<std::size_t>();
    out.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    out.router_label_histogram = j.at("router_label_histogram").get<std::vector<std::size_t>>();
    if (out.members.empty()) {
        throw DataError("BadModelFile", "archive holds no members");
    }
    return out;
}

void FittedHellsemble::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) {
        throw DataError("FileNotFound", "cannot write '" + path.string() + "'");
    }
    out << to_json().dump(2) << '\n';
}

FittedHellsemble FittedHellsemble::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("FileNotFound", "cannot open '" + path.string() + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("BadModelFile", "cannot parse '" + path.string() + "': " + e.what());
    }
    return from_json(j);
}

}  // namespace hellsemble
