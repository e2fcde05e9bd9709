#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hellsemble/errors.hpp"

namespace hellsemble {

/// Fraction of exact matches.
double accuracy(const std::vector<int>& truth, const std::vector<int>& predicted);

/// Rank-based AUC: probability that a uniformly random positive outscores a
/// random negative, ties counted 0.5. Requires both classes in `truth`.
double roc_auc(const std::vector<int>& truth, const std::vector<double>& scores);

/// A named scoring function over either hard labels or positive-class
/// scores. Values map into [0, 1].
class Metric {
public:
    using LabelFn = std::function<double(const std::vector<int>&, const std::vector<int>&)>;
    using ScoreFn = std::function<double(const std::vector<int>&, const std::vector<double>&)>;

    static Metric from_labels(std::string name, LabelFn fn);
    static Metric from_scores(std::string name, ScoreFn fn);

    const std::string& name() const noexcept { return name_; }
    bool uses_scores() const noexcept { return uses_scores_; }

    double eval_labels(const std::vector<int>& truth, const std::vector<int>& predicted) const;
    double eval_scores(const std::vector<int>& truth, const std::vector<double>& scores) const;

private:
    std::string name_;
    bool uses_scores_ = false;
    LabelFn label_fn_;
    ScoreFn score_fn_;
};

/// Look up a registered metric ("accuracy" and "roc_auc" are built in).
/// Throws MetricUnknown for unregistered names.
const Metric& get_metric(const std::string& name);

/// Registration hook for user-supplied metrics. Replaces any metric with
/// the same name.
void register_metric(Metric metric);

}  // namespace hellsemble
