#pragma once

#include "hellsemble/learner.hpp"
#include "hellsemble/standardize.hpp"

namespace hellsemble {

/// Brute-force k-nearest-neighbours vote over internally standardized
/// features (Euclidean distance). Equidistant neighbours at the k boundary
/// resolve to the lower fit-row index; vote ties resolve to the lower class
/// label via the shared argmax rule.
class KnnLearner final : public Learner {
public:
    static std::shared_ptr<KnnLearner> fit(const LearnerSpec& spec, const Matrix& x,
                                           const std::vector<int>& y);

    nlohmann::json payload() const override;
    static LearnerPtr from_payload(LearnerSpec spec, std::vector<int> class_set, std::size_t dim,
                                   const nlohmann::json& j);

    // Exposed for the brute-force oracle tests.
    const Standardizer& scaler() const noexcept { return scaler_; }
    const Matrix& train_features() const noexcept { return train_x_; }
    const std::vector<int>& train_class_indices() const noexcept { return train_y_; }
    int effective_k() const noexcept { return k_; }

protected:
    Matrix proba_impl(const Matrix& x) const override;

private:
    KnnLearner(LearnerSpec spec, std::vector<int> class_set, std::size_t dim)
        : Learner(std::move(spec), std::move(class_set), dim) {}

    Standardizer scaler_;
    Matrix train_x_;            // standardized
    std::vector<int> train_y_;  // class indices into class_set
    int k_ = 1;                 // clamped to the training size
};

}  // namespace hellsemble
