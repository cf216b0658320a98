#pragma once

#include <cstdint>
#include <vector>

#include "ftdrf/core.hpp"
#include "ftdrf/dataset.hpp"
#include "ftdrf/tree.hpp"

namespace ftdrf {

struct MGSConfig {
    std::vector<int> window_sizes{7, 9, 14};
    int stride = 1;
    int trees_per_forest = 30;
    std::uint64_t seed = 0;
    double sample_fraction = 1.0;  // fraction of window rows used to fit each window size
    int n_threads = 0;
};

/// Number of window start positions along one axis of length `side`.
std::size_t window_count_1d(std::size_t side, int window, int stride);

/// All w x w windows of one image in row-major scan order (columns advance
/// first), each flattened row-major. Returns an n_windows x (w*w) matrix.
Matrix extract_windows(std::span<const double> image, const ImageShape& shape, int window,
                       int stride);

/// Multi-grained scanning model: per window size, one standard and one
/// extra-random forest trained on window vectors labeled with their source
/// image's label.
class MGSModel {
public:
    struct WindowForests {
        int window = 0;
        std::vector<TreeModel> standard_forest;
        std::vector<TreeModel> extra_forest;
    };

    MGSModel(std::vector<WindowForests> forests, std::int32_t n_classes, ImageShape image_shape,
             int stride);

    const std::vector<WindowForests>& forests() const { return forests_; }
    std::int32_t n_classes() const { return n_classes_; }
    const ImageShape& image_shape() const { return image_shape_; }
    int stride() const { return stride_; }

    /// Sum over window sizes of 2 * K * n_windows(w).
    std::int64_t output_dim() const;

    void validate() const;

private:
    std::vector<WindowForests> forests_;
    std::int32_t n_classes_ = 0;
    ImageShape image_shape_{};
    int stride_ = 1;
};

MGSModel fit_mgs(const Dataset& data, const MGSConfig& config);

/// Per image, per window size (config order), per window (scan order), per
/// forest (standard then extra): the forest-level probability vector (mean of
/// its trees' outputs), all concatenated. Labels are carried through.
Dataset transform_mgs(const MGSModel& model, const Dataset& images, int n_threads = 0);

}  // namespace ftdrf
