#include "hellsemble/learners/decision_tree.hpp"

#include <algorithm>
#include <numeric>

namespace hellsemble {

double gini_impurity(std::span<const int> labels) {
    if (labels.empty()) {
        throw DataError("EmptyInput", "gini_impurity of an empty label sequence is undefined");
    }
    std::vector<int> sorted(labels.begin(), labels.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double sum_sq = 0.0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double p = static_cast<double>(j - i) / n;
        sum_sq += p * p;
        i = j;
    }
    return 1.0 - sum_sq;
}

namespace {

// Gini from integer class counts. Both the grower and the exhaustive test
// oracle reduce to this expression, so equal candidates compare equal in
// floating point and the (feature, threshold) tie-break is exact.
double gini_from_counts(const std::vector<std::size_t>& counts, std::size_t total) {
    double sum_sq = 0.0;
    const double n = static_cast<double>(total);
    for (std::size_t c : counts) {
        const double p = static_cast<double>(c) / n;
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

}  // namespace

std::optional<SplitChoice> best_split(const Matrix& x, const std::vector<int>& y_idx,
                                      std::size_t n_classes, const std::vector<std::size_t>& rows,
                                      const std::vector<int>& features, int min_leaf) {
    const std::size_t n = rows.size();
    std::optional<SplitChoice> best;
    std::vector<std::pair<double, int>> values(n);  // (feature value, class)

    for (int f : features) {
        for (std::size_t i = 0; i < n; ++i) {
            values[i] = {x(rows[i], static_cast<std::size_t>(f)), y_idx[rows[i]]};
        }
        std::sort(values.begin(), values.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        std::vector<std::size_t> left(n_classes, 0), right(n_classes, 0);
        for (const auto& [v, c] : values) ++right[static_cast<std::size_t>(c)];

        for (std::size_t i = 0; i + 1 < n; ++i) {
            const auto cls = static_cast<std::size_t>(values[i].second);
            ++left[cls];
            --right[cls];
            if (values[i].first == values[i + 1].first) continue;
            const std::size_t n_left = i + 1;
            const std::size_t n_right = n - n_left;
            if (n_left < static_cast<std::size_t>(min_leaf) ||
                n_right < static_cast<std::size_t>(min_leaf)) {
                continue;
            }
            const double threshold = values[i].first + (values[i + 1].first - values[i].first) / 2.0;
            const double weighted = (static_cast<double>(n_left) * gini_from_counts(left, n_left) +
                                     static_cast<double>(n_right) * gini_from_counts(right, n_right)) /
                                    static_cast<double>(n);
            if (!best || weighted < best->weighted_gini) {
                best = SplitChoice{f, threshold, weighted};
            }
        }
    }
    return best;
}

ClassificationTree ClassificationTree::grow(const Matrix& x, const std::vector<int>& y_idx,
                                            std::size_t n_classes,
                                            const std::vector<std::size_t>& rows,
                                            const TreeGrowthConfig& cfg, Rng* feature_rng) {
    ClassificationTree tree;
    tree.grow_node(x, y_idx, n_classes, rows, 0, cfg, feature_rng);
    return tree;
}

int ClassificationTree::grow_node(const Matrix& x, const std::vector<int>& y_idx,
                                  std::size_t n_classes, std::vector<std::size_t> rows, int depth,
                                  const TreeGrowthConfig& cfg, Rng* feature_rng) {
    const int node_id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    std::vector<std::size_t> counts(n_classes, 0);
    for (std::size_t r : rows) ++counts[static_cast<std::size_t>(y_idx[r])];
    std::vector<double> fractions(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) {
        fractions[c] = static_cast<double>(counts[c]) / static_cast<double>(rows.size());
    }
    nodes_[node_id].class_fractions = fractions;

    const double node_gini = gini_from_counts(counts, rows.size());
    const bool pure = std::count(counts.begin(), counts.end(), rows.size()) > 0;
    if (pure || depth >= cfg.max_depth || rows.size() < 2 * static_cast<std::size_t>(cfg.min_leaf)) {
        return node_id;
    }

    std::vector<int> features;
    const int d = static_cast<int>(x.cols());
    if (cfg.mtry > 0 && cfg.mtry < d && feature_rng) {
        std::vector<int> all(d);
        std::iota(all.begin(), all.end(), 0);
        for (int i = 0; i < cfg.mtry; ++i) {
            const std::size_t j = i + feature_rng->below(static_cast<std::size_t>(d - i));
            std::swap(all[static_cast<std::size_t>(i)], all[j]);
        }
        features.assign(all.begin(), all.begin() + cfg.mtry);
        std::sort(features.begin(), features.end());
    } else {
        features.resize(static_cast<std::size_t>(d));
        std::iota(features.begin(), features.end(), 0);
    }

    auto split = best_split(x, y_idx, n_classes, rows, features, cfg.min_leaf);
    if (!split || split->weighted_gini >= node_gini) {
        return node_id;
    }

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
        if (x(r, static_cast<std::size_t>(split->feature)) <= split->threshold) {
            left_rows.push_back(r);
        } else {
            right_rows.push_back(r);
        }
    }
    rows.clear();
    rows.shrink_to_fit();

    nodes_[node_id].feature = split->feature;
    nodes_[node_id].threshold = split->threshold;
    const int left = grow_node(x, y_idx, n_classes, std::move(left_rows), depth + 1, cfg, feature_rng);
    nodes_[node_id].left = left;
    const int right =
        grow_node(x, y_idx, n_classes, std::move(right_rows), depth + 1, cfg, feature_rng);
    nodes_[node_id].right = right;
    return node_id;
}

std::span<const double> ClassificationTree::leaf_fractions(std::span<const double> row) const {
    int node = 0;
    while (!nodes_[static_cast<std::size_t>(node)].is_leaf()) {
        const auto& n = nodes_[static_cast<std::size_t>(node)];
        node = (row[static_cast<std::size_t>(n.feature)] <= n.threshold) ? n.left : n.right;
    }
    return nodes_[static_cast<std::size_t>(node)].class_fractions;
}

nlohmann::json ClassificationTree::to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& n : nodes_) {
        out.push_back({{"f", n.feature},
                       {"t", n.threshold},
                       {"l", n.left},
                       {"r", n.right},
                       {"p", n.class_fractions}});
    }
    return out;
}

ClassificationTree ClassificationTree::from_json(const nlohmann::json& j) {
    ClassificationTree tree;
    for (const auto& jn : j) {
        TreeNode n;
        n.feature = jn.at("f").get<int>();
        n.threshold = jn.at("t").get<double>();
        n.left = jn.at("l").get<int>();
        n.right = jn.at("r").get<int>();
        n.class_fractions = jn.at("p").get<std::vector<double>>();
        tree.nodes_.push_back(std::move(n));
    }
    return tree;
}

std::shared_ptr<DecisionTreeLearner> DecisionTreeLearner::fit(const LearnerSpec& spec,
                                                              const Matrix& x,
                                                              const std::vector<int>& y) {
    const auto& params = std::get<DecisionTreeParams>(spec.params);
    std::vector<int> classes(y);
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

    auto model =
        std::shared_ptr<DecisionTreeLearner>(new DecisionTreeLearner(spec, classes, x.cols()));
    std::vector<int> y_idx(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        y_idx[i] = static_cast<int>(model->class_index(y[i]));
    }
    std::vector<std::size_t> rows(x.rows());
    std::iota(rows.begin(), rows.end(), 0);
    TreeGrowthConfig cfg{params.max_depth, params.min_leaf, 0};
    model->tree_ = ClassificationTree::grow(x, y_idx, classes.size(), rows, cfg, nullptr);
    return model;
}

Matrix DecisionTreeLearner::proba_impl(const Matrix& x) const {
    Matrix probs(x.rows(), class_set().size());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto fr = tree_.leaf_fractions(x.row(r));
        std::copy(fr.begin(), fr.end(), probs.row(r).begin());
    }
    return probs;
}

nlohmann::json DecisionTreeLearner::payload() const { return {{"tree", tree_.to_json()}}; }

LearnerPtr DecisionTreeLearner::from_payload(LearnerSpec spec, std::vector<int> class_set,
                                             std::size_t dim, const nlohmann::json& j) {
    auto model = std::shared_ptr<DecisionTreeLearner>(
        new DecisionTreeLearner(std::move(spec), std::move(class_set), dim));
    model->tree_ = ClassificationTree::from_json(j.at("tree"));
    return model;
}

}  // namespace hellsemble
