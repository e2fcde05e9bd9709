#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hellsemble/dataset.hpp"
#include "hellsemble/matrix.hpp"

namespace hellsemble {

enum class LearnerKind {
    knn,
    gaussian_nb,
    logistic_regression,
    decision_tree,
    random_forest,
    gradient_boosted_trees,
    mlp,
};

std::string kind_name(LearnerKind kind);
LearnerKind kind_from_name(const std::string& name);

// Kind-specific hyperparameters. Defaults are frozen in docs/config.md and
// are part of the public contract.
struct KnnParams {
    int k = 5;
    bool operator==(const KnnParams&) const = default;
};
struct GaussianNbParams {
    bool operator==(const GaussianNbParams&) const = default;
};
struct LogisticRegressionParams {
    double l2 = 1e-4;
    int epochs = 200;
    double learning_rate = 0.1;
    bool operator==(const LogisticRegressionParams&) const = default;
};
struct DecisionTreeParams {
    int max_depth = 8;
    int min_leaf = 1;
    bool operator==(const DecisionTreeParams&) const = default;
};
struct RandomForestParams {
    int n_trees = 100;
    int max_depth = 8;
    int min_leaf = 1;
    double feature_fraction = 0.0;  // 0 means the sqrt(d)/d default
    bool operator==(const RandomForestParams&) const = default;
};
struct GradientBoostedTreesParams {
    int n_rounds = 100;
    double learning_rate = 0.1;
    int max_depth = 3;
    bool operator==(const GradientBoostedTreesParams&) const = default;
};
struct MlpParams {
    int hidden_units = 32;
    int epochs = 200;
    double learning_rate = 0.01;
    int batch_size = 32;
    bool operator==(const MlpParams&) const = default;
};

// Alternative order matches LearnerKind.
using LearnerParams =
    std::variant<KnnParams, GaussianNbParams, LogisticRegressionParams, DecisionTreeParams,
                 RandomForestParams, GradientBoostedTreesParams, MlpParams>;

struct LearnerSpec {
    LearnerParams params = KnnParams{};
    std::uint64_t seed = 0;

    LearnerKind kind() const { return static_cast<LearnerKind>(params.index()); }

    /// Short label used in reports ("knn3", "mlp", ...).
    std::string label() const;

    static LearnerSpec of(LearnerKind kind, std::uint64_t seed = 0);
    static LearnerSpec knn(int k, std::uint64_t seed = 0);

    bool operator==(const LearnerSpec&) const = default;

    /// Same kind and hyperparameters, seed ignored.
    bool same_model(const LearnerSpec& other) const { return params == other.params; }
};

nlohmann::json spec_to_json(const LearnerSpec& spec);
/// Strict parser: unknown keys and malformed values raise ConfigError
/// naming the offending field.
LearnerSpec spec_from_json(const nlohmann::json& j);

/// A fitted model. Immutable after fit; concurrent predict calls are safe.
/// predict is the argmax over predict_proba rows with ties broken toward
/// the smaller class label.
class Learner {
public:
    virtual ~Learner() = default;

    const LearnerSpec& spec() const noexcept { return spec_; }
    const std::vector<int>& class_set() const noexcept { return class_set_; }
    std::size_t feature_count() const noexcept { return dim_; }

    std::vector<int> predict(const Matrix& x) const;
    /// Row-stochastic matrix, one column per class in class_set order.
    Matrix predict_proba(const Matrix& x) const;

    /// Kind-specific fitted state for serialization.
    virtual nlohmann::json payload() const = 0;

protected:
    Learner(LearnerSpec spec, std::vector<int> class_set, std::size_t dim)
        : spec_(std::move(spec)), class_set_(std::move(class_set)), dim_(dim) {}

    virtual Matrix proba_impl(const Matrix& x) const = 0;

    /// Position of a label in class_set.
    std::size_t class_index(int label) const;

private:
    LearnerSpec spec_;
    std::vector<int> class_set_;
    std::size_t dim_;
};

using LearnerPtr = std::shared_ptr<const Learner>;

/// Train a learner. Deterministic for fixed (spec, x, y) including the
/// spec seed. Single-class data yields a constant predictor of any kind.
LearnerPtr fit(const LearnerSpec& spec, const Matrix& x, const std::vector<int>& y);
LearnerPtr fit(const LearnerSpec& spec, const DataView& data);

/// Versioned self-describing blob; serialize/deserialize/predict is
/// lossless.
nlohmann::json learner_to_json(const Learner& model);
LearnerPtr learner_from_json(const nlohmann::json& j);

}  // namespace hellsemble
