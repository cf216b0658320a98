#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ftdrf/core.hpp"
#include "ftdrf/dataset.hpp"
#include "ftdrf/tree.hpp"

namespace ftdrf {

struct LayerParams {
    int n_trees = 2000;
    double type_mix_p = 0.5;  // Bernoulli success = extra_random
    TreeParams tree_params_standard{};
    TreeParams tree_params_extra{TreeKind::extra_random};
    std::uint64_t seed = 0;
    int n_threads = 0;  // 0 = all available cores
};

/// One half-half forest layer: an ordered sequence of trees whose
/// concatenated per-tree probability vectors form the next layer's features.
class LayerModel {
public:
    LayerModel(std::vector<TreeModel> trees, std::int32_t n_classes, std::int32_t input_dim);

    std::size_t n_trees() const { return trees_.size(); }
    std::int32_t n_classes() const { return n_classes_; }
    std::int32_t input_dim() const { return input_dim_; }
    std::int32_t output_dim() const { return n_classes_ * static_cast<std::int32_t>(trees_.size()); }

    const std::vector<TreeModel>& trees() const { return trees_; }

    /// Maps N x input_dim to N x (K * m): row i is the tree-order
    /// concatenation of each tree's probability vector for row i.
    Matrix transform(const Matrix& features, int n_threads = 0) const;

    /// Averages the per-tree vectors (summed in tree index order, divided
    /// once) and takes the argmax, lowest class index on ties.
    struct Prediction {
        Matrix probabilities;              // N x K
        std::vector<std::int32_t> labels;  // N
    };
    Prediction predict(const Matrix& features, int n_threads = 0) const;

    void validate() const;

private:
    std::vector<TreeModel> trees_;
    std::int32_t n_classes_ = 0;
    std::int32_t input_dim_ = 0;
};

LayerModel fit_layer(const Dataset& data, const LayerParams& params);
LayerModel fit_layer(const Matrix& features, std::span<const std::int32_t> labels,
                     std::int32_t n_classes, const LayerParams& params);

}  // namespace ftdrf
