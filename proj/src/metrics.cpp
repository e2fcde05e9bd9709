#include "hellsemble/metrics.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace hellsemble {

double accuracy(const std::vector<int>& truth, const std::vector<int>& predicted) {
    if (truth.size() != predicted.size()) {
        throw DataError("LengthMismatch", "truth has " + std::to_string(truth.size()) +
                                              " entries, predictions " +
                                              std::to_string(predicted.size()));
    }
    if (truth.empty()) {
        throw DataError("EmptyInput", "accuracy of empty sequences is undefined");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == predicted[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double roc_auc(const std::vector<int>& truth, const std::vector<double>& scores) {
    if (truth.size() != scores.size()) {
        throw DataError("LengthMismatch", "truth has " + std::to_string(truth.size()) +
                                              " entries, scores " + std::to_string(scores.size()));
    }
    if (truth.empty()) {
        throw DataError("EmptyInput", "roc_auc of empty sequences is undefined");
    }
    std::size_t npos = 0;
    for (int y : truth) {
        if (y == 1) ++npos;
    }
    const std::size_t nneg = truth.size() - npos;
    if (npos == 0 || nneg == 0) {
        throw DataError("SingleClassTruth", "roc_auc needs both classes present");
    }

    std::vector<std::size_t> order(truth.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Mid-rank assignment over tie groups. Rank sums of half-integers stay
    // exact in doubles at these sizes, so this equals pairwise counting
    // (wins + ties/2) / (npos * nneg) bit for bit.
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (truth[order[k]] == 1) pos_rank_sum += mid_rank;
        }
        i = j;
    }
    const double adjusted =
        pos_rank_sum - static_cast<double>(npos) * (static_cast<double>(npos) + 1.0) / 2.0;
    return adjusted / (static_cast<double>(npos) * static_cast<double>(nneg));
}

Metric Metric::from_labels(std::string name, LabelFn fn) {
    Metric m;
    m.name_ = std::move(name);
    m.uses_scores_ = false;
    m.label_fn_ = std::move(fn);
    return m;
}

Metric Metric::from_scores(std::string name, ScoreFn fn) {
    Metric m;
    m.name_ = std::move(name);
    m.uses_scores_ = true;
    m.score_fn_ = std::move(fn);
    return m;
}

double Metric::eval_labels(const std::vector<int>& truth, const std::vector<int>& predicted) const {
    if (uses_scores_) {
        throw DataError("MetricUnknown", "metric '" + name_ + "' needs scores, not labels");
    }
    return label_fn_(truth, predicted);
}

double Metric::eval_scores(const std::vector<int>& truth, const std::vector<double>& scores) const {
    if (!uses_scores_) {
        throw DataError("MetricUnknown", "metric '" + name_ + "' needs labels, not scores");
    }
    return score_fn_(truth, scores);
}

namespace {

std::map<std::string, Metric>& registry() {
    static std::map<std::string, Metric> metrics = [] {
        std::map<std::string, Metric> m;
        m.emplace("accuracy", Metric::from_labels("accuracy", accuracy));
        m.emplace("roc_auc", Metric::from_scores("roc_auc", roc_auc));
        return m;
    }();
    return metrics;
}

}  // namespace

const Metric& get_metric(const std::string& name) {
    auto& reg = registry();
    auto it = reg.find(name);
    if (it == reg.end()) {
        throw ConfigError("MetricUnknown", "no metric registered under '" + name + "'");
    }
    return it->second;
}

void register_metric(Metric metric) {
    auto& reg = registry();
    reg.insert_or_assign(metric.name(), std::move(metric));
}

}  // namespace hellsemble
