#pragma once

#include "hellsemble/learners/decision_tree.hpp"

namespace hellsemble {

/// Bagged CART trees with per-split feature sampling and majority vote.
/// Per-tree seeds derive deterministically from the spec seed, so training
/// trees in parallel cannot change the result. Multiclass capable.
class RandomForestLearner final : public Learner {
public:
    static std::shared_ptr<RandomForestLearner> fit(const LearnerSpec& spec, const Matrix& x,
                                                    const std::vector<int>& y);

    const std::vector<ClassificationTree>& trees() const noexcept { return trees_; }

    nlohmann::json payload() const override;
    static LearnerPtr from_payload(LearnerSpec spec, std::vector<int> class_set, std::size_t dim,
                                   const nlohmann::json& j);

protected:
    Matrix proba_impl(const Matrix& x) const override;

private:
    RandomForestLearner(LearnerSpec spec, std::vector<int> class_set, std::size_t dim)
        : Learner(std::move(spec), std::move(class_set), dim) {}

    std::vector<ClassificationTree> trees_;
};

}  // namespace hellsemble
