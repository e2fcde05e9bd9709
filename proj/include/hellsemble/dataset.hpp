#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "hellsemble/errors.hpp"
#include "hellsemble/matrix.hpp"

namespace hellsemble {

/// Immutable table of instances: stable ids, dense numeric features and
/// binary labels. Ingestion guarantees finite features and labels in {0,1}.
/// Instance identity across ensemble iterations is by id, never by row
/// position.
class Dataset {
public:
    Dataset(std::vector<std::int64_t> ids, Matrix features, std::vector<int> labels,
            std::vector<std::string> feature_names);

    std::size_t n() const noexcept { return labels_.size(); }
    std::size_t d() const noexcept { return features_.cols(); }

    const std::vector<std::int64_t>& ids() const noexcept { return ids_; }
    const Matrix& features() const noexcept { return features_; }
    const std::vector<int>& labels() const noexcept { return labels_; }
    const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }

    std::span<const double> row(std::size_t i) const { return features_.row(i); }

    /// Row position of an id. Throws IndexOutOfRange for unknown ids.
    std::size_t row_of_id(std::int64_t id) const;

private:
    std::vector<std::int64_t> ids_;
    Matrix features_;
    std::vector<int> labels_;
    std::vector<std::string> feature_names_;
    std::unordered_map<std::int64_t, std::size_t> id_to_row_;
};

/// Zero-copy subset of a Dataset: the parent plus an ordered list of row
/// positions. Views behave like datasets for every operation; ids are
/// inherited from the parent so they stay stable across nested subsetting.
class DataView {
public:
    explicit DataView(const Dataset& parent);
    DataView(const Dataset& parent, std::vector<std::size_t> indices);

    std::size_t rows() const noexcept { return indices_.size(); }
    std::size_t cols() const noexcept { return parent_->d(); }

    std::span<const double> row(std::size_t i) const { return parent_->row(indices_[i]); }
    int label(std::size_t i) const { return parent_->labels()[indices_[i]]; }
    std::int64_t id(std::size_t i) const { return parent_->ids()[indices_[i]]; }

    const Dataset& parent() const noexcept { return *parent_; }
    const std::vector<std::size_t>& indices() const noexcept { return indices_; }

    Matrix to_matrix() const;
    std::vector<int> labels() const;
    std::vector<std::int64_t> ids() const;

    /// Subsequence of this view containing only rows whose id is in `keep`,
    /// in this view's order.
    DataView select_ids(const std::unordered_set<std::int64_t>& keep) const;

    /// Subset by positions relative to this view.
    DataView subset(const std::vector<std::size_t>& positions) const;

private:
    const Dataset* parent_;
    std::vector<std::size_t> indices_;
};

struct SplitSpec {
    double fraction = 0.5;  // proportion assigned to the first part, in (0,1)
    std::uint64_t seed = 0;
};

/// Stratified split: within each class the first part receives
/// round(fraction * class_count) instances drawn by a seeded shuffle.
/// Deterministic, and invariant to input row order up to relabeling: the
/// per-class shuffle runs over a content-canonical ordering of the rows.
std::pair<DataView, DataView> stratified_split(const DataView& data, const SplitSpec& spec);
std::pair<DataView, DataView> stratified_split(const Dataset& data, const SplitSpec& spec);

/// View of `data` at the given row positions (must be unique and in range).
DataView subset(const Dataset& data, std::vector<std::size_t> indices);

/// Parse a headered CSV with a named binary label column. Rejects
/// non-numeric or non-finite features, labels outside {0,1}, empty files
/// and malformed rows.
Dataset load_csv(const std::filesystem::path& path, const std::string& label_column);

/// Parse a headered CSV where every column is a feature (prediction input).
struct FeatureTable {
    std::vector<std::int64_t> ids;
    Matrix features;
    std::vector<std::string> feature_names;
};
FeatureTable load_csv_features(const std::filesystem::path& path);

}  // namespace hellsemble
