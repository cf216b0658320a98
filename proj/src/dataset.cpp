#include "ftdrf/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "ftdrf/rng.hpp"

namespace ftdrf {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::string hex32(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "0x%08x", v);
    return buf;
}

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failure: " + path);
    return bytes;
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset,
                        const std::string& path) {
    if (offset + 4 > bytes.size()) {
        throw IoError("truncated file " + path + ": need 4 bytes at offset " +
                      std::to_string(offset) + ", file has " + std::to_string(bytes.size()));
    }
    return (std::uint32_t(bytes[offset]) << 24) | (std::uint32_t(bytes[offset + 1]) << 16) |
           (std::uint32_t(bytes[offset + 2]) << 8) | std::uint32_t(bytes[offset + 3]);
}

}  // namespace

Dataset::Dataset(Matrix features, std::vector<std::int32_t> labels, std::int32_t n_classes,
                 std::optional<ImageShape> image_shape, std::vector<std::string> label_names)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      n_classes_(n_classes),
      image_shape_(image_shape),
      label_names_(std::move(label_names)) {
    if (features_.rows() != labels_.size()) {
        throw ValidationError("dataset: " + std::to_string(features_.rows()) + " feature rows vs " +
                              std::to_string(labels_.size()) + " labels");
    }
    if (n_classes_ < 2) {
        throw ValidationError("dataset: n_classes must be >= 2, got " + std::to_string(n_classes_));
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] < 0 || labels_[i] >= n_classes_) {
            throw ValidationError("dataset: label " + std::to_string(labels_[i]) + " at row " +
                                  std::to_string(i) + " outside {0.." +
                                  std::to_string(n_classes_ - 1) + "}");
        }
    }
    const auto values = features_.data();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw ValidationError("dataset: non-finite feature at row " +
                                  std::to_string(i / std::max<std::size_t>(features_.cols(), 1)) +
                                  ", column " +
                                  std::to_string(i % std::max<std::size_t>(features_.cols(), 1)));
        }
    }
    if (image_shape_ && image_shape_->rows * image_shape_->cols != features_.cols()) {
        throw ValidationError("dataset: image shape " + std::to_string(image_shape_->rows) + "x" +
                              std::to_string(image_shape_->cols) + " does not cover " +
                              std::to_string(features_.cols()) + " features");
    }
    if (!label_names_.empty() && label_names_.size() != static_cast<std::size_t>(n_classes_)) {
        throw ValidationError("dataset: label name count does not match n_classes");
    }
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
    Matrix out(rows.size(), n_features());
    std::vector<std::int32_t> out_labels(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto src = features_.row(rows[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
        out_labels[i] = labels_[rows[i]];
    }
    return Dataset(std::move(out), std::move(out_labels), n_classes_, image_shape_, label_names_);
}

Dataset Dataset::head(std::size_t n) const {
    if (n > n_rows()) {
        throw ValidationError("head: " + std::to_string(n) + " rows requested, dataset has " +
                              std::to_string(n_rows()));
    }
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return select_rows(rows);
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    const auto image_bytes = read_file(images_path);
    const auto label_bytes = read_file(labels_path);

    const std::uint32_t image_magic = read_be32(image_bytes, 0, images_path);
    if (image_magic != kImageMagic) {
        throw FormatError("bad magic in " + images_path + ": got " + hex32(image_magic) +
                          ", expected " + hex32(kImageMagic));
    }
    const std::uint32_t label_magic = read_be32(label_bytes, 0, labels_path);
    if (label_magic != kLabelMagic) {
        throw FormatError("bad magic in " + labels_path + ": got " + hex32(label_magic) +
                          ", expected " + hex32(kLabelMagic));
    }

    const std::size_t n_images = read_be32(image_bytes, 4, images_path);
    const std::size_t rows = read_be32(image_bytes, 8, images_path);
    const std::size_t cols = read_be32(image_bytes, 12, images_path);
    const std::size_t n_labels = read_be32(label_bytes, 4, labels_path);
    if (n_images != n_labels) {
        throw ValidationError("image/label count mismatch: " + std::to_string(n_images) +
                              " images in " + images_path + " vs " + std::to_string(n_labels) +
                              " labels in " + labels_path);
    }

    const std::size_t d = rows * cols;
    if (16 + n_images * d > image_bytes.size()) {
        throw IoError("truncated file " + images_path + ": need " +
                      std::to_string(16 + n_images * d) + " bytes, file has " +
                      std::to_string(image_bytes.size()) + " (short at offset " +
                      std::to_string(image_bytes.size()) + ")");
    }
    if (8 + n_labels > label_bytes.size()) {
        throw IoError("truncated file " + labels_path + ": need " + std::to_string(8 + n_labels) +
                      " bytes, file has " + std::to_string(label_bytes.size()) +
                      " (short at offset " + std::to_string(label_bytes.size()) + ")");
    }

    Matrix features(n_images, d);
    auto out = features.data();
    for (std::size_t i = 0; i < n_images * d; ++i) {
        out[i] = static_cast<double>(image_bytes[16 + i]) / 255.0;
    }
    std::vector<std::int32_t> labels(n_images);
    std::int32_t max_label = 0;
    for (std::size_t i = 0; i < n_labels; ++i) {
        labels[i] = static_cast<std::int32_t>(label_bytes[8 + i]);
        max_label = std::max(max_label, labels[i]);
    }
    const std::int32_t n_classes = std::max<std::int32_t>(max_label + 1, 2);
    return Dataset(std::move(features), std::move(labels), n_classes, ImageShape{rows, cols});
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

bool parse_double(const std::string& s, double& out) {
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc{} && ptr == end && begin != end;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty CSV file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto header = split_csv_line(line);
    std::size_t label_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == label_column) {
            label_idx = i;
            break;
        }
    }
    if (label_idx == header.size()) {
        throw ValidationError("label column '" + label_column + "' not found in " + path);
    }
    const std::size_t d = header.size() - 1;

    std::vector<double> values;
    std::vector<std::string> raw_labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw FormatError(path + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(header.size()) + " cells, got " +
                              std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == label_idx) {
                raw_labels.push_back(cells[c]);
                continue;
            }
            double v = 0.0;
            if (!parse_double(cells[c], v)) {
                throw FormatError(path + ":" + std::to_string(line_no) + ": column '" + header[c] +
                                  "': cannot parse '" + cells[c] + "' as a number");
            }
            values.push_back(v);
        }
    }
    const std::size_t n = raw_labels.size();
    if (n == 0) throw ValidationError("CSV has no data rows: " + path);

    // Dense re-encoding by sorted order of the distinct raw labels. Numeric
    // order when every label parses as a number, lexicographic otherwise.
    std::vector<std::string> distinct = raw_labels;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    bool all_numeric = true;
    std::vector<double> numeric(distinct.size());
    for (std::size_t i = 0; i < distinct.size(); ++i) {
        if (!parse_double(distinct[i], numeric[i])) {
            all_numeric = false;
            break;
        }
    }
    if (all_numeric) {
        std::vector<std::size_t> order(distinct.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return numeric[a] != numeric[b] ? numeric[a] < numeric[b] : distinct[a] < distinct[b];
        });
        std::vector<std::string> reordered(distinct.size());
        for (std::size_t i = 0; i < order.size(); ++i) reordered[i] = distinct[order[i]];
        distinct = std::move(reordered);
    }
    if (distinct.size() < 2) {
        throw ValidationError("CSV has a single class ('" + distinct.front() + "'): " + path);
    }

    std::map<std::string, std::int32_t> to_id;
    for (std::size_t i = 0; i < distinct.size(); ++i) {
        to_id[distinct[i]] = static_cast<std::int32_t>(i);
    }
    std::vector<std::int32_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = to_id[raw_labels[i]];

    return Dataset(Matrix::from_data(n, d, std::move(values)), std::move(labels),
                   static_cast<std::int32_t>(distinct.size()), std::nullopt, std::move(distinct));
}

void save_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open file for writing: " + path);

    out << "label";
    for (std::size_t c = 0; c < data.n_features(); ++c) out << ",x" << c;
    out << "\n";

    char buf[64];
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        if (data.label_names().empty()) {
            out << data.labels()[i];
        } else {
            out << data.label_names()[static_cast<std::size_t>(data.labels()[i])];
        }
        const auto row = data.features().row(i);
        for (double v : row) {
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
            out << ',';
            out.write(buf, ptr - buf);
            (void)ec;
        }
        out << "\n";
    }
    if (!out) throw IoError("write failure: " + path);
}

SplitPair stratified_split(const Dataset& data, double holdout_fraction, std::uint64_t seed) {
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
        throw ValidationError("holdout_fraction must be in (0,1), got " +
                              std::to_string(holdout_fraction));
    }
    const std::size_t n = data.n_rows();
    const auto k = static_cast<std::size_t>(data.n_classes());

    std::vector<std::vector<std::size_t>> by_class(k);
    for (std::size_t i = 0; i < n; ++i) {
        by_class[static_cast<std::size_t>(data.labels()[i])].push_back(i);
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (!by_class[c].empty() && by_class[c].size() < 2) {
            throw ValidationError("stratified_split: class " + std::to_string(c) +
                                  " has a single sample");
        }
    }

    // Largest-remainder apportionment against a total of round(fraction * N).
    const auto target = static_cast<std::size_t>(std::llround(holdout_fraction * double(n)));
    std::vector<std::size_t> take(k, 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < k; ++c) {
        const double ideal = holdout_fraction * double(by_class[c].size());
        take[c] = static_cast<std::size_t>(ideal);
        assigned += take[c];
        remainders.emplace_back(ideal - double(take[c]), c);
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (std::size_t i = 0; i < remainders.size() && assigned < target; ++i) {
        const std::size_t c = remainders[i].second;
        if (take[c] < by_class[c].size()) {
            ++take[c];
            ++assigned;
        }
    }

    std::vector<std::size_t> holdout_rows;
    std::vector<char> in_holdout(n, 0);
    for (std::size_t c = 0; c < k; ++c) {
        auto rows = by_class[c];
        Rng rng(hash_seed(seed, c));
        rng.shuffle(rows.data(), rows.size());
        for (std::size_t i = 0; i < take[c]; ++i) {
            holdout_rows.push_back(rows[i]);
            in_holdout[rows[i]] = 1;
        }
    }
    std::sort(holdout_rows.begin(), holdout_rows.end());

    std::vector<std::size_t> train_rows;
    train_rows.reserve(n - holdout_rows.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (!in_holdout[i]) train_rows.push_back(i);
    }

    return SplitPair{data.select_rows(train_rows), data.select_rows(holdout_rows), seed};
}

Dataset wiggle_augment(const Dataset& data) {
    if (!data.image_shape()) {
        throw ValidationError("wiggle_augment: dataset has no image shape");
    }
    const auto shape = *data.image_shape();
    const std::size_t n = data.n_rows();
    const std::size_t d = data.n_features();
    const auto rows = static_cast<std::ptrdiff_t>(shape.rows);
    const auto cols = static_cast<std::ptrdiff_t>(shape.cols);

    // Shift (dr, dc) moves image content by that offset: the up-left copy of
    // a pixel at (r, c) lands at (r-1, c-1).
    constexpr std::ptrdiff_t kShifts[4][2] = {{-1, -1}, {-1, 1}, {1, -1}, {1, 1}};

    Matrix out(5 * n, d);
    std::vector<std::int32_t> labels(5 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto src = data.features().row(i);
        std::copy(src.begin(), src.end(), out.row(i).begin());
        labels[i] = data.labels()[i];
    }
    for (std::size_t s = 0; s < 4; ++s) {
        const std::ptrdiff_t dr = kShifts[s][0];
        const std::ptrdiff_t dc = kShifts[s][1];
        for (std::size_t i = 0; i < n; ++i) {
            const auto src = data.features().row(i);
            auto dst = out.row((s + 1) * n + i);
            for (std::ptrdiff_t r = 0; r < rows; ++r) {
                for (std::ptrdiff_t c = 0; c < cols; ++c) {
                    const std::ptrdiff_t sr = r - dr;
                    const std::ptrdiff_t sc = c - dc;
                    dst[static_cast<std::size_t>(r * cols + c)] =
                        (sr >= 0 && sr < rows && sc >= 0 && sc < cols)
                            ? src[static_cast<std::size_t>(sr * cols + sc)]
                            : 0.0;
                }
            }
            labels[(s + 1) * n + i] = data.labels()[i];
        }
    }
    return Dataset(std::move(out), std::move(labels), data.n_classes(), shape, data.label_names());
}

}  // namespace ftdrf
