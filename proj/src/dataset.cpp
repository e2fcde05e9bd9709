#include "hellsemble/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hellsemble/rng.hpp"

namespace hellsemble {

Dataset::Dataset(std::vector<std::int64_t> ids, Matrix features, std::vector<int> labels,
                 std::vector<std::string> feature_names)
    : ids_(std::move(ids)),
      features_(std::move(features)),
      labels_(std::move(labels)),
      feature_names_(std::move(feature_names)) {
    if (ids_.size() != labels_.size() || ids_.size() != features_.rows()) {
        throw DataError("DimensionMismatch", "ids, labels and feature rows must agree");
    }
    if (feature_names_.size() != features_.cols()) {
        throw DataError("DimensionMismatch", "feature_names must match feature columns");
    }
    for (int y : labels_) {
        if (y != 0 && y != 1) {
            throw DataError("NonBinaryLabel", "labels must be 0 or 1");
        }
    }
    id_to_row_.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (!id_to_row_.emplace(ids_[i], i).second) {
            throw DataError("DuplicateIndex", "instance ids must be unique");
        }
    }
    for (double v : features_.data()) {
        if (!std::isfinite(v)) {
            throw DataError("NonNumericFeature", "features must be finite");
        }
    }
}

std::size_t Dataset::row_of_id(std::int64_t id) const {
    auto it = id_to_row_.find(id);
    if (it == id_to_row_.end()) {
        throw DataError("IndexOutOfRange", "unknown instance id " + std::to_string(id));
    }
    return it->second;
}

DataView::DataView(const Dataset& parent) : parent_(&parent) {
    indices_.resize(parent.n());
    for (std::size_t i = 0; i < indices_.size(); ++i) indices_[i] = i;
}

DataView::DataView(const Dataset& parent, std::vector<std::size_t> indices)
    : parent_(&parent), indices_(std::move(indices)) {
    std::vector<bool> seen(parent.n(), false);
    for (std::size_t idx : indices_) {
        if (idx >= parent.n()) {
            throw DataError("IndexOutOfRange",
                            "index " + std::to_string(idx) + " out of range for " +
                                std::to_string(parent.n()) + " rows");
        }
        if (seen[idx]) {
            throw DataError("DuplicateIndex", "index " + std::to_string(idx) + " repeated");
        }
        seen[idx] = true;
    }
}

Matrix DataView::to_matrix() const {
    Matrix m(rows(), cols());
    for (std::size_t i = 0; i < rows(); ++i) {
        auto src = row(i);
        std::copy(src.begin(), src.end(), m.row(i).begin());
    }
    return m;
}

std::vector<int> DataView::labels() const {
    std::vector<int> y(rows());
    for (std::size_t i = 0; i < rows(); ++i) y[i] = label(i);
    return y;
}

std::vector<std::int64_t> DataView::ids() const {
    std::vector<std::int64_t> out(rows());
    for (std::size_t i = 0; i < rows(); ++i) out[i] = id(i);
    return out;
}

DataView DataView::select_ids(const std::unordered_set<std::int64_t>& keep) const {
    std::vector<std::size_t> sel;
    sel.reserve(keep.size());
    for (std::size_t i = 0; i < rows(); ++i) {
        if (keep.count(id(i))) sel.push_back(indices_[i]);
    }
    return DataView(*parent_, std::move(sel));
}

DataView DataView::subset(const std::vector<std::size_t>& positions) const {
    std::vector<std::size_t> mapped;
    mapped.reserve(positions.size());
    for (std::size_t p : positions) {
        if (p >= rows()) {
            throw DataError("IndexOutOfRange",
                            "position " + std::to_string(p) + " out of range for view of " +
                                std::to_string(rows()) + " rows");
        }
        mapped.push_back(indices_[p]);
    }
    return DataView(*parent_, std::move(mapped));
}

namespace {

// Content-canonical order of view positions within one class: sort by the
// feature row lexicographically, ties by parent index. Duplicated rows are
// interchangeable, so the split is row-order invariant up to relabeling.
std::vector<std::size_t> canonical_class_order(const DataView& data,
                                               const std::vector<std::size_t>& positions) {
    std::vector<std::size_t> order = positions;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        auto ra = data.row(a);
        auto rb = data.row(b);
        for (std::size_t c = 0; c < ra.size(); ++c) {
            if (ra[c] != rb[c]) return ra[c] < rb[c];
        }
        return data.indices()[a] < data.indices()[b];
    });
    return order;
}

}  // namespace

std::pair<DataView, DataView> stratified_split(const DataView& data, const SplitSpec& spec) {
    if (!(spec.fraction > 0.0 && spec.fraction < 1.0)) {
        throw ConfigError("BadSplitFraction", "fraction must lie strictly between 0 and 1");
    }
    std::vector<std::size_t> class_positions[2];
    for (std::size_t i = 0; i < data.rows(); ++i) {
        class_positions[data.label(i)].push_back(i);
    }
    for (int c = 0; c < 2; ++c) {
        if (!class_positions[c].empty() && class_positions[c].size() < 2) {
            throw DataError("ClassTooSmall",
                            "class " + std::to_string(c) + " has fewer than 2 instances");
        }
    }

    std::vector<std::size_t> first, second;
    for (int c = 0; c < 2; ++c) {
        if (class_positions[c].empty()) continue;
        auto order = canonical_class_order(data, class_positions[c]);
        Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(c)));
        rng.shuffle(order);
        auto take = static_cast<std::size_t>(
            std::llround(spec.fraction * static_cast<double>(order.size())));
        for (std::size_t i = 0; i < order.size(); ++i) {
            (i < take ? first : second).push_back(data.indices()[order[i]]);
        }
    }
    std::sort(first.begin(), first.end());
    std::sort(second.begin(), second.end());
    return {DataView(data.parent(), std::move(first)), DataView(data.parent(), std::move(second))};
}

std::pair<DataView, DataView> stratified_split(const Dataset& data, const SplitSpec& spec) {
    return stratified_split(DataView(data), spec);
}

DataView subset(const Dataset& data, std::vector<std::size_t> indices) {
    return DataView(data, std::move(indices));
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

double parse_feature(std::string_view token, std::size_t file_line, const std::string& column) {
    auto t = trim(token);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(value)) {
        throw DataError("NonNumericFeature", "row " + std::to_string(file_line) + ", column '" +
                                                 column + "': cannot parse '" + std::string(t) +
                                                 "' as a finite number");
    }
    return value;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("FileNotFound", "cannot open '" + path.string() + "'");
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    // A trailing newline yields one final empty line; drop it. Any other
    // empty line is malformed.
    if (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    return lines;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column) {
    auto lines = read_lines(path);
    if (lines.empty()) {
        throw DataError("EmptyDataset", "'" + path.string() + "' has no header row");
    }
    auto header = split_fields(lines[0]);
    std::vector<std::string> names;
    std::size_t label_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        std::string name(trim(header[i]));
        if (name == label_column) {
            label_idx = i;
        } else {
            names.push_back(std::move(name));
        }
    }
    if (label_idx == header.size()) {
        throw DataError("MissingLabelColumn",
                        "label column '" + label_column + "' not in header of '" +
                            path.string() + "'");
    }

    Matrix features(0, names.size());
    std::vector<int> labels;
    std::vector<double> rowbuf(names.size());
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::size_t file_line = li + 1;
        if (trim(lines[li]).empty()) {
            throw DataError("MalformedRow", "row " + std::to_string(file_line) + " is empty");
        }
        auto fields = split_fields(lines[li]);
        if (fields.size() != header.size()) {
            throw DataError("MalformedRow", "row " + std::to_string(file_line) + " has " +
                                                std::to_string(fields.size()) + " fields, expected " +
                                                std::to_string(header.size()));
        }
        std::size_t fi = 0;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i == label_idx) {
                auto t = trim(fields[i]);
                if (t == "0") {
                    labels.push_back(0);
                } else if (t == "1") {
                    labels.push_back(1);
                } else {
                    throw DataError("NonBinaryLabel",
                                    "row " + std::to_string(file_line) + ": label '" +
                                        std::string(t) + "' is not 0 or 1");
                }
            } else {
                rowbuf[fi] = parse_feature(fields[i], file_line, names[fi]);
                ++fi;
            }
        }
        features.push_row(rowbuf);
    }
    if (labels.empty()) {
        throw DataError("EmptyDataset", "'" + path.string() + "' has a header but no rows");
    }
    std::vector<std::int64_t> ids(labels.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::int64_t>(i);
    return Dataset(std::move(ids), std::move(features), std::move(labels), std::move(names));
}

FeatureTable load_csv_features(const std::filesystem::path& path) {
    auto lines = read_lines(path);
    if (lines.empty()) {
        throw DataError("EmptyDataset", "'" + path.string() + "' has no header row");
    }
    auto header = split_fields(lines[0]);
    FeatureTable table;
    for (auto h : header) table.feature_names.emplace_back(trim(h));
    table.features = Matrix(0, header.size());

    std::vector<double> rowbuf(header.size());
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::size_t file_line = li + 1;
        if (trim(lines[li]).empty()) {
            throw DataError("MalformedRow", "row " + std::to_string(file_line) + " is empty");
        }
        auto fields = split_fields(lines[li]);
        if (fields.size() != header.size()) {
            throw DataError("MalformedRow", "row " + std::to_string(file_line) + " has " +
                                                std::to_string(fields.size()) + " fields, expected " +
                                                std::to_string(header.size()));
        }
        for (std::size_t i = 0; i < fields.size(); ++i) {
            rowbuf[i] = parse_feature(fields[i], file_line, table.feature_names[i]);
        }
        table.features.push_row(rowbuf);
        table.ids.push_back(static_cast<std::int64_t>(table.ids.size()));
    }
    if (table.ids.empty()) {
        throw DataError("EmptyDataset", "'" + path.string() + "' has a header but no rows");
    }
    return table;
}

}  // namespace hellsemble
