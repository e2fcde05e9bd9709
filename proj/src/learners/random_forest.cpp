#include "hellsemble/learners/random_forest.hpp"

#include <algorithm>
#include <cmath>

namespace hellsemble {

std::shared_ptr<RandomForestLearner> RandomForestLearner::fit(const LearnerSpec& spec,
                                                              const Matrix& x,
                                                              const std::vector<int>& y) {
    const auto& params = std::get<RandomForestParams>(spec.params);
    std::vector<int> classes(y);
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

    auto model =
        std::shared_ptr<RandomForestLearner>(new RandomForestLearner(spec, classes, x.cols()));
    std::vector<int> y_idx(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        y_idx[i] = static_cast<int>(model->class_index(y[i]));
    }

    const int d = static_cast<int>(x.cols());
    double fraction = params.feature_fraction;
    if (fraction <= 0.0) fraction = std::sqrt(static_cast<double>(d)) / static_cast<double>(d);
    const int mtry = std::clamp(static_cast<int>(std::llround(fraction * d)), 1, d);
    const TreeGrowthConfig cfg{params.max_depth, params.min_leaf, mtry};

    const std::size_t n = x.rows();
    model->trees_.resize(static_cast<std::size_t>(params.n_trees));
#pragma omp parallel for schedule(dynamic) if (params.n_trees > 1)
    for (int t = 0; t < params.n_trees; ++t) {
        Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> rows(n);
        for (std::size_t i = 0; i < n; ++i) rows[i] = rng.below(n);
        std::sort(rows.begin(), rows.end());
        model->trees_[static_cast<std::size_t>(t)] =
            ClassificationTree::grow(x, y_idx, classes.size(), rows, cfg, &rng);
    }
    return model;
}

Matrix RandomForestLearner::proba_impl(const Matrix& x) const {
    const std::size_t n_classes = class_set().size();
    Matrix probs(x.rows(), n_classes);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        std::vector<std::size_t> votes(n_classes, 0);
        for (const auto& tree : trees_) {
            auto fr = tree.leaf_fractions(x.row(r));
            std::size_t arg = 0;
            for (std::size_t c = 1; c < n_classes; ++c) {
                if (fr[c] > fr[arg]) arg = c;
            }
            ++votes[arg];
        }
        for (std::size_t c = 0; c < n_classes; ++c) {
            probs(r, c) = static_cast<double>(votes[c]) / static_cast<double>(trees_.size());
        }
    }
    return probs;
}

nlohmann::json RandomForestLearner::payload() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : trees_) arr.push_back(t.to_json());
    return {{"trees", std::move(arr)}};
}

LearnerPtr RandomForestLearner::from_payload(LearnerSpec spec, std::vector<int> class_set,
                                             std::size_t dim, const nlohmann::json& j) {
    auto model = std::shared_ptr<RandomForestLearner>(
        new RandomForestLearner(std::move(spec), std::move(class_set), dim));
    for (const auto& jt : j.at("trees")) {
        model->trees_.push_back(ClassificationTree::from_json(jt));
    }
    return model;
}

}  // namespace hellsemble
