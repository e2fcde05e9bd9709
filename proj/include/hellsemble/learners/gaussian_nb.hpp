#pragma once

#include "hellsemble/learner.hpp"

namespace hellsemble {

/// Gaussian naive Bayes with per-class feature means and population
/// variances. Variances are floored at
/// max(variance, 1e-9 * overall feature variance, 1e-12) so constant
/// columns stay well defined. Binary-only.
class GaussianNbLearner final : public Learner {
public:
    static std::shared_ptr<GaussianNbLearner> fit(const LearnerSpec& spec, const Matrix& x,
                                                  const std::vector<int>& y);

    /// log prior + sum of per-feature Gaussian log densities, one entry per
    /// class in class_set order. Exposed for the density-evaluation oracle.
    std::vector<double> log_joint(std::span<const double> row) const;

    const std::vector<double>& priors() const noexcept { return priors_; }
    const Matrix& means() const noexcept { return means_; }
    const Matrix& variances() const noexcept { return vars_; }

    nlohmann::json payload() const override;
    static LearnerPtr from_payload(LearnerSpec spec, std::vector<int> class_set, std::size_t dim,
                                   const nlohmann::json& j);

protected:
    Matrix proba_impl(const Matrix& x) const override;

private:
    GaussianNbLearner(LearnerSpec spec, std::vector<int> class_set, std::size_t dim)
        : Learner(std::move(spec), std::move(class_set), dim) {}

    std::vector<double> priors_;  // per class
    Matrix means_;                // class x feature
    Matrix vars_;                 // class x feature, floored
};

}  // namespace hellsemble
