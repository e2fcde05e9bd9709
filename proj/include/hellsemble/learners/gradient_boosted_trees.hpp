#pragma once

#include "hellsemble/learner.hpp"

namespace hellsemble {

struct RegressionTreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    bool is_leaf() const noexcept { return feature < 0; }
};

/// Gradient-boosted trees for binary classification: logistic loss,
/// first-order residual fitting (leaf value = mean residual), shrinkage,
/// depth-limited regression trees. Binary-only.
class GradientBoostedTreesLearner final : public Learner {
public:
    static std::shared_ptr<GradientBoostedTreesLearner> fit(const LearnerSpec& spec,
                                                            const Matrix& x,
                                                            const std::vector<int>& y);

    /// Raw additive score F(x) before the sigmoid.
    double decision_value(std::span<const double> row) const;

    /// Mean logistic loss of the fitted stage sequence on (x, y), one entry
    /// per boosting round including the base score (index 0). Recorded at
    /// fit time on the training set.
    const std::vector<double>& training_loss_curve() const noexcept { return loss_curve_; }

    nlohmann::json payload() const override;
    static LearnerPtr from_payload(LearnerSpec spec, std::vector<int> class_set, std::size_t dim,
                                   const nlohmann::json& j);

protected:
    Matrix proba_impl(const Matrix& x) const override;

private:
    GradientBoostedTreesLearner(LearnerSpec spec, std::vector<int> class_set, std::size_t dim)
        : Learner(std::move(spec), std::move(class_set), dim) {}

    double base_score_ = 0.0;
    double learning_rate_ = 0.1;
    std::vector<std::vector<RegressionTreeNode>> trees_;
    std::vector<double> loss_curve_;
};

}  // namespace hellsemble
