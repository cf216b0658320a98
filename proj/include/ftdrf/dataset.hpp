#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ftdrf/core.hpp"

namespace ftdrf {

struct ImageShape {
    std::size_t rows = 0;
    std::size_t cols = 0;

    friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

/// Immutable labeled dataset: N x d feature matrix plus class labels in
/// {0..K-1}. When the rows are flattened monochrome images, image_shape
/// records the geometry. label_names keeps the raw-to-dense label mapping
/// produced by the CSV loader (empty otherwise).
class Dataset {
public:
    Dataset(Matrix features, std::vector<std::int32_t> labels, std::int32_t n_classes,
            std::optional<ImageShape> image_shape = std::nullopt,
            std::vector<std::string> label_names = {});

    std::size_t n_rows() const { return features_.rows(); }
    std::size_t n_features() const { return features_.cols(); }
    std::int32_t n_classes() const { return n_classes_; }

    const Matrix& features() const { return features_; }
    const std::vector<std::int32_t>& labels() const { return labels_; }
    const std::optional<ImageShape>& image_shape() const { return image_shape_; }
    const std::vector<std::string>& label_names() const { return label_names_; }

    /// Copy of the rows at the given indices (labels carried along).
    Dataset select_rows(std::span<const std::size_t> rows) const;

    /// First n rows; n must not exceed n_rows().
    Dataset head(std::size_t n) const;

private:
    Matrix features_;
    std::vector<std::int32_t> labels_;
    std::int32_t n_classes_ = 0;
    std::optional<ImageShape> image_shape_;
    std::vector<std::string> label_names_;
};

struct SplitPair {
    Dataset train;
    Dataset holdout;
    std::uint64_t seed = 0;
};

/// Reads an IDX image/label file pair (the MNIST container format).
/// Pixels are scaled to [0,1] by dividing by 255 and image_shape is set.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Reads a CSV with a header row; label_column names the label, every other
/// column must be numeric. Labels are re-encoded to dense {0..K-1} by sorted
/// order of the distinct raw labels (numeric order when all labels parse as
/// numbers, lexicographic otherwise); the raw labels are kept in label_names.
Dataset load_csv(const std::string& path, const std::string& label_column);

/// Writes the dataset back out as CSV with the label first. Features are
/// printed as shortest-round-trip decimals, so a load_csv of the output
/// reproduces them bit-equal.
void save_csv(const Dataset& data, const std::string& path);

/// Deterministic stratified split: per-class holdout counts follow the
/// largest-remainder rule against a total of round(fraction * N). Row order
/// within each part keeps the original ascending order.
SplitPair stratified_split(const Dataset& data, double holdout_fraction, std::uint64_t seed);

/// Augments an image dataset with one-pixel diagonal shifts. Output holds 5N
/// rows: all originals, then the up-left, up-right, down-left and down-right
/// blocks in that order. Pixels shifted in from outside the frame are 0.
Dataset wiggle_augment(const Dataset& data);

}  // namespace ftdrf
