#pragma once

#include <optional>

#include "hellsemble/learner.hpp"
#include "hellsemble/rng.hpp"

namespace hellsemble {

/// 1 - sum_c p_c^2 over the label distribution.
double gini_impurity(std::span<const int> labels);

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double weighted_gini = 0.0;
};

/// Exhaustive CART split search over midpoint thresholds between
/// consecutive distinct sorted values. Minimizes the weighted child Gini
/// computed from integer class counts; ties resolve to the lower feature
/// index, then the lower threshold. `features` lists the candidate feature
/// indices in ascending order; `rows` indexes into x/y_idx. Splits leaving
/// a child below min_leaf are skipped. Returns nullopt when no candidate
/// split exists.
std::optional<SplitChoice> best_split(const Matrix& x, const std::vector<int>& y_idx,
                                      std::size_t n_classes, const std::vector<std::size_t>& rows,
                                      const std::vector<int>& features, int min_leaf);

struct TreeGrowthConfig {
    int max_depth = 8;
    int min_leaf = 1;
    int mtry = 0;  // features sampled per split; 0 means all
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> class_fractions;

    bool is_leaf() const noexcept { return feature < 0; }
};

/// Grown CART tree shared by the decision-tree learner and the random
/// forest (which passes mtry and a per-tree rng for feature sampling).
class ClassificationTree {
public:
    static ClassificationTree grow(const Matrix& x, const std::vector<int>& y_idx,
                                   std::size_t n_classes, const std::vector<std::size_t>& rows,
                                   const TreeGrowthConfig& cfg, Rng* feature_rng);

    std::span<const double> leaf_fractions(std::span<const double> row) const;

    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }

    nlohmann::json to_json() const;
    static ClassificationTree from_json(const nlohmann::json& j);

private:
    int grow_node(const Matrix& x, const std::vector<int>& y_idx, std::size_t n_classes,
                  std::vector<std::size_t> rows, int depth, const TreeGrowthConfig& cfg,
                  Rng* feature_rng);

    std::vector<TreeNode> nodes_;
};

/// CART decision tree with Gini impurity. Multiclass capable (usable as a
/// router).
class DecisionTreeLearner final : public Learner {
public:
    static std::shared_ptr<DecisionTreeLearner> fit(const LearnerSpec& spec, const Matrix& x,
                                                    const std::vector<int>& y);

    const ClassificationTree& tree() const noexcept { return tree_; }

    nlohmann::json payload() const override;
    static LearnerPtr from_payload(LearnerSpec spec, std::vector<int> class_set, std::size_t dim,
                                   const nlohmann::json& j);

protected:
    Matrix proba_impl(const Matrix& x) const override;

private:
    DecisionTreeLearner(LearnerSpec spec, std::vector<int> class_set, std::size_t dim)
        : Learner(std::move(spec), std::move(class_set), dim) {}

    ClassificationTree tree_;
};

}  // namespace hellsemble
