#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>

#include "hellsemble/dataset.hpp"
#include "hellsemble/learner.hpp"
#include "hellsemble/metrics.hpp"

namespace hellsemble {

enum class FitMode { sequential, greedy };

std::string mode_name(FitMode mode);
FitMode mode_from_name(const std::string& name);

/// Carryover rule for correctly classified instances. gap_clamp maps the
/// train/validation score gap of the just-accepted routed ensemble to
/// clamp(train - val, 0, alpha_max); `fixed` always uses fixed_value.
struct AlphaPolicy {
    enum class Rule { gap_clamp, fixed };
    Rule rule = Rule::gap_clamp;
    double alpha_max = 0.5;
    double fixed_value = 0.0;

    bool operator==(const AlphaPolicy&) const = default;
};

double compute_alpha(double train_score, double val_score, const AlphaPolicy& policy);

struct HellsembleConfig {
    std::vector<LearnerSpec> candidates;
    LearnerSpec router_spec = LearnerSpec::knn(3);
    FitMode mode = FitMode::sequential;
    std::string metric = "accuracy";
    AlphaPolicy alpha_policy;
    int max_iterations = 10;    // greedy iteration cap
    int min_subset_size = 10;   // smallest circle worth training on
    std::uint64_t seed = 42;
    // Literal stop behavior: keep the non-improving member instead of
    // rolling back to the last accepted state.
    bool strict_algorithm1 = false;

    bool operator==(const HellsembleConfig&) const = default;
};

/// One construction iteration. alpha_used is the carryover fraction applied
/// when forming the next circle (0 when none was formed).
struct IterationRecord {
    int iteration = 0;
    LearnerSpec chosen_spec;
    std::size_t train_size = 0;
    std::size_t misclassified_count = 0;
    double alpha_used = 0.0;
    double val_score = 0.0;
    bool accepted = false;
};

/// Per-instance latest circle label: the router's multiclass training set.
/// Relabeling is latest-wins; features come from the backing dataset.
class RouterDataset {
public:
    explicit RouterDataset(const Dataset& backing) : backing_(&backing) {}

    void relabel(std::span<const std::int64_t> ids, int iteration);

    const std::map<std::int64_t, int>& labels() const noexcept { return labels_; }
    const Dataset& backing() const noexcept { return *backing_; }
    bool empty() const noexcept { return labels_.empty(); }

    /// Distinct circle labels, ascending.
    std::vector<int> distinct_labels() const;

private:
    const Dataset* backing_;
    std::map<std::int64_t, int> labels_;
};

RouterDataset update_router_dataset(RouterDataset rd, std::span<const std::int64_t> ids,
                                    int iteration);

/// Fit the router on (features, circle label). Returns null when the
/// router dataset holds a single distinct label (trivial routing to member
/// 1). Router kinds are restricted to multiclass-capable learners.
LearnerPtr train_router(const RouterDataset& rd, const LearnerSpec& router_spec);

/// 1-based member index per row; all 1 when router is null.
std::vector<int> route(const Learner* router, const Matrix& x);

/// Routed score of (members, router) on `data`: each instance is predicted
/// by its assigned member; score-based metrics see the assigned member's
/// positive-class probability.
double evaluate_ensemble(std::span<const LearnerPtr> members, const Learner* router,
                         const DataView& data, const Metric& metric);

/// Ids forming the next circle: every misclassified id plus a seeded
/// uniform sample without replacement of ceil(alpha * correct) correctly
/// classified ids.
std::vector<std::int64_t> partition_next(const DataView& circle, const std::vector<int>& predictions,
                                         double alpha, std::uint64_t seed);

/// Seed stream for the per-iteration carryover sample.
std::uint64_t iteration_seed(std::uint64_t config_seed, int iteration);

struct CandidateChoice {
    std::size_t index = 0;
    LearnerPtr model;
    double val_score = 0.0;
};

/// Fit every candidate on the circle, evaluate each as a tentative
/// extension of (members, tentative_router) on val, and return the argmax
/// with ties to the lower list index. Evaluations are mutually independent
/// and may run concurrently; the winner matches serial order.
CandidateChoice select_greedy_candidate(std::span<const LearnerPtr> members,
                                        const Learner* tentative_router,
                                        std::span<const LearnerSpec> candidates,
                                        const DataView& circle, const DataView& val,
                                        const Metric& metric);

struct FittedHellsemble {
    std::vector<LearnerPtr> members;
    LearnerPtr router;  // null iff members.size() == 1
    std::vector<IterationRecord> history;
    HellsembleConfig config;
    std::size_t feature_count = 0;
    std::vector<std::string> feature_names;
    // Final circle-label counts, indexed by member (label - 1).
    std::vector<std::size_t> router_label_histogram;

    std::vector<int> predict(const Matrix& x) const;
    /// Columns are [P(label 0), P(label 1)].
    Matrix predict_proba(const Matrix& x) const;

    nlohmann::json to_json() const;
    static FittedHellsemble from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static FittedHellsemble load(const std::filesystem::path& path);
};

FittedHellsemble fit_hellsemble(const HellsembleConfig& config, const DataView& train,
                                const DataView& val);
FittedHellsemble fit_sequential(const HellsembleConfig& config, const DataView& train,
                                const DataView& val);
FittedHellsemble fit_greedy(const HellsembleConfig& config, const DataView& train,
                            const DataView& val);

}  // namespace hellsemble
