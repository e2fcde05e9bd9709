#include "hellsemble/learner.hpp"

#include <algorithm>

#include "hellsemble/learners/decision_tree.hpp"
#include "hellsemble/learners/gaussian_nb.hpp"
#include "hellsemble/learners/gradient_boosted_trees.hpp"
#include "hellsemble/learners/knn.hpp"
#include "hellsemble/learners/logistic_regression.hpp"
#include "hellsemble/learners/mlp.hpp"
#include "hellsemble/learners/random_forest.hpp"

namespace hellsemble {

std::string kind_name(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::knn: return "knn";
        case LearnerKind::gaussian_nb: return "gaussian_nb";
        case LearnerKind::logistic_regression: return "logistic_regression";
        case LearnerKind::decision_tree: return "decision_tree";
        case LearnerKind::random_forest: return "random_forest";
        case LearnerKind::gradient_boosted_trees: return "gradient_boosted_trees";
        case LearnerKind::mlp: return "mlp";
    }
    throw ConfigError("BadLearnerKind", "unhandled learner kind");
}

LearnerKind kind_from_name(const std::string& name) {
    static const std::pair<const char*, LearnerKind> table[] = {
        {"knn", LearnerKind::knn},
        {"gaussian_nb", LearnerKind::gaussian_nb},
        {"logistic_regression", LearnerKind::logistic_regression},
        {"decision_tree", LearnerKind::decision_tree},
        {"random_forest", LearnerKind::random_forest},
        {"gradient_boosted_trees", LearnerKind::gradient_boosted_trees},
        {"mlp", LearnerKind::mlp},
    };
    for (const auto& [n, k] : table) {
        if (name == n) return k;
    }
    throw ConfigError("BadLearnerKind", "unknown learner kind '" + name + "'");
}

std::string LearnerSpec::label() const {
    if (kind() == LearnerKind::knn) {
        return "knn" + std::to_string(std::get<KnnParams>(params).k);
    }
    if (kind() == LearnerKind::logistic_regression) return "logreg";
    if (kind() == LearnerKind::gradient_boosted_trees) return "gbt";
    return kind_name(kind());
}

LearnerSpec LearnerSpec::of(LearnerKind kind, std::uint64_t seed) {
    LearnerSpec spec;
    spec.seed = seed;
    switch (kind) {
        case LearnerKind::knn: spec.params = KnnParams{}; break;
        case LearnerKind::gaussian_nb: spec.params = GaussianNbParams{}; break;
        case LearnerKind::logistic_regression: spec.params = LogisticRegressionParams{}; break;
        case LearnerKind::decision_tree: spec.params = DecisionTreeParams{}; break;
        case LearnerKind::random_forest: spec.params = RandomForestParams{}; break;
        case LearnerKind::gradient_boosted_trees: spec.params = GradientBoostedTreesParams{}; break;
        case LearnerKind::mlp: spec.params = MlpParams{}; break;
    }
    return spec;
}

LearnerSpec LearnerSpec::knn(int k, std::uint64_t seed) {
    LearnerSpec spec;
    spec.params = KnnParams{k};
    spec.seed = seed;
    return spec;
}

namespace {

void require_positive(double value, const std::string& field) {
    if (!(value > 0.0)) {
        throw ConfigError("BadHyperparameter", "'" + field + "' must be positive");
    }
}

// Strict field reader: every key in `j` must be consumed.
class FieldReader {
public:
    explicit FieldReader(const nlohmann::json& j) : j_(j) {
        if (!j.is_object()) {
            throw ConfigError("BadConfig", "learner spec must be a JSON object");
        }
    }

    template <class T>
    T get(const std::string& key, T fallback) {
        seen_.push_back(key);
        if (!j_.contains(key)) return fallback;
        try {
            return j_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError("BadConfig", "field '" + key + "' has the wrong type");
        }
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) {
                throw ConfigError("BadConfig", "unknown field '" + it.key() + "' in learner spec");
            }
        }
    }

private:
    const nlohmann::json& j_;
    std::vector<std::string> seen_;
};

}  // namespace

nlohmann::json spec_to_json(const LearnerSpec& spec) {
    nlohmann::json j{{"kind", kind_name(spec.kind())}, {"seed", spec.seed}};
    switch (spec.kind()) {
        case LearnerKind::knn:
            j["k"] = std::get<KnnParams>(spec.params).k;
            break;
        case LearnerKind::gaussian_nb:
            break;
        case LearnerKind::logistic_regression: {
            const auto& p = std::get<LogisticRegressionParams>(spec.params);
            j["l2"] = p.l2;
            j["epochs"] = p.epochs;
            j["learning_rate"] = p.learning_rate;
            break;
        }
        case LearnerKind::decision_tree: {
            const auto& p = std::get<DecisionTreeParams>(spec.params);
            j["max_depth"] = p.max_depth;
            j["min_leaf"] = p.min_leaf;
            break;
        }
        case LearnerKind::random_forest: {
            const auto& p = std::get<RandomForestParams>(spec.params);
            j["n_trees"] = p.n_trees;
            j["max_depth"] = p.max_depth;
            j["min_leaf"] = p.min_leaf;
            j["feature_fraction"] = p.feature_fraction;
            break;
        }
        case LearnerKind::gradient_boosted_trees: {
            const auto& p = std::get<GradientBoostedTreesParams>(spec.params);
            j["n_rounds"] = p.n_rounds;
            j["learning_rate"] = p.learning_rate;
            j["max_depth"] = p.max_depth;
            break;
        }
        case LearnerKind::mlp: {
            const auto& p = std::get<MlpParams>(spec.params);
            j["hidden_units"] = p.hidden_units;
            j["epochs"] = p.epochs;
            j["learning_rate"] = p.learning_rate;
            j["batch_size"] = p.batch_size;
            break;
        }
    }
    return j;
}

LearnerSpec spec_from_json(const nlohmann::json& j) {
    FieldReader reader(j);
    const auto kind_str = reader.get<std::string>("kind", "");
    if (kind_str.empty()) {
        throw ConfigError("BadConfig", "learner spec is missing 'kind'");
    }
    LearnerSpec spec = LearnerSpec::of(kind_from_name(kind_str));
    spec.seed = reader.get<std::uint64_t>("seed", 0);
    switch (spec.kind()) {
        case LearnerKind::knn: {
            KnnParams p;
            p.k = reader.get<int>("k", p.k);
            require_positive(p.k, "k");
            spec.params = p;
            break;
        }
        case LearnerKind::gaussian_nb:
            spec.params = GaussianNbParams{};
            break;
        case LearnerKind::logistic_regression: {
            LogisticRegressionParams p;
            p.l2 = reader.get<double>("l2", p.l2);
            p.epochs = reader.get<int>("epochs", p.epochs);
            p.learning_rate = reader.get<double>("learning_rate", p.learning_rate);
            if (p.l2 < 0.0) throw ConfigError("BadHyperparameter", "'l2' must be non-negative");
            require_positive(p.epochs, "epochs");
            require_positive(p.learning_rate, "learning_rate");
            spec.params = p;
            break;
        }
        case LearnerKind::decision_tree: {
            DecisionTreeParams p;
            p.max_depth = reader.get<int>("max_depth", p.max_depth);
            p.min_leaf = reader.get<int>("min_leaf", p.min_leaf);
            require_positive(p.max_depth, "max_depth");
            require_positive(p.min_leaf, "min_leaf");
            spec.params = p;
            break;
        }
        case LearnerKind::random_forest: {
            RandomForestParams p;
            p.n_trees = reader.get<int>("n_trees", p.n_trees);
            p.max_depth = reader.get<int>("max_depth", p.max_depth);
            p.min_leaf = reader.get<int>("min_leaf", p.min_leaf);
            p.feature_fraction = reader.get<double>("feature_fraction", p.feature_fraction);
            require_positive(p.n_trees, "n_trees");
            require_positive(p.max_depth, "max_depth");
            require_positive(p.min_leaf, "min_leaf");
            if (p.feature_fraction < 0.0 || p.feature_fraction > 1.0) {
                throw ConfigError("BadHyperparameter", "'feature_fraction' must lie in [0, 1]");
            }
            spec.params = p;
            break;
        }
        case LearnerKind::gradient_boosted_trees: {
            GradientBoostedTreesParams p;
            p.n_rounds = reader.get<int>("n_rounds", p.n_rounds);
            p.learning_rate = reader.get<double>("learning_rate", p.learning_rate);
            p.max_depth = reader.get<int>("max_depth", p.max_depth);
            require_positive(p.n_rounds, "n_rounds");
            require_positive(p.learning_rate, "learning_rate");
            require_positive(p.max_depth, "max_depth");
            spec.params = p;
            break;
        }
        case LearnerKind::mlp: {
            MlpParams p;
            p.hidden_units = reader.get<int>("hidden_units", p.hidden_units);
            p.epochs = reader.get<int>("epochs", p.epochs);
            p.learning_rate = reader.get<double>("learning_rate", p.learning_rate);
            p.batch_size = reader.get<int>("batch_size", p.batch_size);
            require_positive(p.hidden_units, "hidden_units");
            require_positive(p.epochs, "epochs");
            require_positive(p.learning_rate, "learning_rate");
            require_positive(p.batch_size, "batch_size");
            spec.params = p;
            break;
        }
    }
    reader.finish();
    return spec;
}

std::size_t Learner::class_index(int label) const {
    auto it = std::lower_bound(class_set_.begin(), class_set_.end(), label);
    return static_cast<std::size_t>(it - class_set_.begin());
}

std::vector<int> Learner::predict(const Matrix& x) const {
    const Matrix probs = predict_proba(x);
    std::vector<int> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        std::size_t arg = 0;
        for (std::size_t c = 1; c < class_set_.size(); ++c) {
            if (probs(r, c) > probs(r, arg)) arg = c;  // ties keep the smaller label
        }
        out[r] = class_set_[arg];
    }
    return out;
}

Matrix Learner::predict_proba(const Matrix& x) const {
    if (x.cols() != dim_) {
        throw DataError("DimensionMismatch", "model expects " + std::to_string(dim_) +
                                                 " features, got " + std::to_string(x.cols()));
    }
    return proba_impl(x);
}

namespace {

/// Degenerate single-class fit of any kind: a constant predictor.
class ConstantLearner final : public Learner {
public:
    ConstantLearner(LearnerSpec spec, std::vector<int> class_set, std::size_t dim)
        : Learner(std::move(spec), std::move(class_set), dim) {}

    nlohmann::json payload() const override { return nlohmann::json::object(); }

protected:
    Matrix proba_impl(const Matrix& x) const override { return Matrix(x.rows(), 1, 1.0); }
};

}  // namespace

LearnerPtr fit(const LearnerSpec& spec, const Matrix& x, const std::vector<int>& y) {
    if (x.rows() == 0 || y.empty()) {
        throw TrainError("EmptyTrainingSet", "cannot fit on an empty training set");
    }
    if (x.rows() != y.size()) {
        throw DataError("DimensionMismatch", "features and labels disagree in length");
    }
    std::vector<int> classes(y);
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    if (classes.size() == 1) {
        return std::make_shared<ConstantLearner>(spec, classes, x.cols());
    }
    switch (spec.kind()) {
        case LearnerKind::knn: return KnnLearner::fit(spec, x, y);
        case LearnerKind::gaussian_nb: return GaussianNbLearner::fit(spec, x, y);
        case LearnerKind::logistic_regression: return LogisticRegressionLearner::fit(spec, x, y);
        case LearnerKind::decision_tree: return DecisionTreeLearner::fit(spec, x, y);
        case LearnerKind::random_forest: return RandomForestLearner::fit(spec, x, y);
        case LearnerKind::gradient_boosted_trees:
            return GradientBoostedTreesLearner::fit(spec, x, y);
        case LearnerKind::mlp: return MlpLearner::fit(spec, x, y);
    }
    throw ConfigError("BadLearnerKind", "unhandled learner kind");
}

LearnerPtr fit(const LearnerSpec& spec, const DataView& data) {
    return fit(spec, data.to_matrix(), data.labels());
}

nlohmann::json learner_to_json(const Learner& model) {
    return {{"format", "hellsemble-learner/1"},
            {"spec", spec_to_json(model.spec())},
            {"class_set", model.class_set()},
            {"dim", model.feature_count()},
            {"payload", model.payload()}};
}

LearnerPtr learner_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("format", "") != "hellsemble-learner/1") {
        throw DataError("BadModelFile", "not a hellsemble learner blob");
    }
    LearnerSpec spec = spec_from_json(j.at("spec"));
    auto class_set = j.at("class_set").get<std::vector<int>>();
    const auto dim = j.at("dim").get<std::size_t>();
    const auto& payload = j.at("payload");
    if (class_set.size() == 1) {
        return std::make_shared<ConstantLearner>(std::move(spec), std::move(class_set), dim);
    }
    switch (spec.kind()) {
        case LearnerKind::knn:
            return KnnLearner::from_payload(std::move(spec), std::move(class_set), dim, payload);
        case LearnerKind::gaussian_nb:
            return GaussianNbLearner::from_payload(std::move(spec), std::move(class_set), dim,
                                                   payload);
        case LearnerKind::logistic_regression:
            return LogisticRegressionLearner::from_payload(std::move(spec), std::move(class_set),
                                                           dim, payload);
        case LearnerKind::decision_tree:
            return DecisionTreeLearner::from_payload(std::move(spec), std::move(class_set), dim,
                                                     payload);
        case LearnerKind::random_forest:
            return RandomForestLearner::from_payload(std::move(spec), std::move(class_set), dim,
                                                     payload);
        case LearnerKind::gradient_boosted_trees:
            return GradientBoostedTreesLearner::from_payload(std::move(spec), std::move(class_set),
                                                             dim, payload);
        case LearnerKind::mlp:
            return MlpLearner::from_payload(std::move(spec), std::move(class_set), dim, payload);
    }
    throw DataError("BadModelFile", "unhandled learner kind in blob");
}

}  // namespace hellsemble
