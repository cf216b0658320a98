#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ftdrf/core.hpp"
#include "ftdrf/dataset.hpp"
#include "ftdrf/rng.hpp"

namespace ftdrf {

enum class TreeKind : std::uint8_t { standard = 0, extra_random = 1 };
enum class Criterion : std::uint8_t { entropy = 0, gini = 1 };

struct TreeParams {
    TreeKind kind = TreeKind::standard;
    Criterion criterion = Criterion::entropy;
    std::optional<int> max_depth{};   // unset = unlimited
    int min_samples_split = 2;
    int min_samples_leaf = 1;
    int mtry = 0;                     // 0 = round(sqrt(d))
    std::optional<bool> bootstrap{};  // unset = on for standard, off for extra_random
};

/// Node impurity from integer class counts. Entropy is base 2, in
/// [0, log2 K]; gini is in [0, 1 - 1/K]. A pure node scores 0.
double impurity(std::span<const std::int64_t> class_counts, Criterion criterion);

struct SplitCandidate {
    std::int32_t feature = -1;
    double threshold = 0.0;
    double impurity_decrease = 0.0;
};

/// Best midpoint split over the feature subset: every midpoint of consecutive
/// distinct sorted values is a candidate, scored by weighted impurity
/// decrease. Returns nullopt when every subset feature is constant on the
/// node or no candidate decreases impurity. Ties go to the lowest feature
/// index, then the lowest threshold.
std::optional<SplitCandidate> best_split_standard(std::span<const std::int32_t> sample_rows,
                                                  const Matrix& features,
                                                  std::span<const std::int32_t> labels,
                                                  std::span<const std::int32_t> feature_subset,
                                                  Criterion criterion,
                                                  std::int32_t n_classes,
                                                  int min_samples_leaf = 1);

/// Extra-random split: one threshold drawn uniformly inside (min, max) per
/// non-constant subset feature; best candidate wins under the same tie-break.
std::optional<SplitCandidate> best_split_extra(std::span<const std::int32_t> sample_rows,
                                               const Matrix& features,
                                               std::span<const std::int32_t> labels,
                                               std::span<const std::int32_t> feature_subset,
                                               Criterion criterion,
                                               std::int32_t n_classes,
                                               Rng& rng,
                                               int min_samples_leaf = 1);

/// A single node of a fitted tree, stored flat in preorder. Internal nodes
/// route "x[feature] <= threshold" to the left child; leaves have
/// feature == -1 and index a K-wide block in the leaf probability array.
struct TreeNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t leaf = -1;

    bool is_leaf() const { return feature < 0; }

    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class TreeModel {
public:
    TreeModel(std::vector<TreeNode> nodes, std::vector<double> leaf_probabilities,
              TreeKind kind, std::int32_t n_classes, std::int32_t n_features_in);

    TreeKind kind() const { return kind_; }
    std::int32_t n_classes() const { return n_classes_; }
    std::int32_t n_features_in() const { return n_features_in_; }
    std::size_t n_nodes() const { return nodes_.size(); }
    std::size_t n_leaves() const { return leaf_probabilities_.size() / static_cast<std::size_t>(n_classes_); }

    std::span<const TreeNode> nodes() const { return nodes_; }
    std::span<const double> leaf_probabilities() const { return leaf_probabilities_; }

    /// Index of the leaf x is routed to.
    std::int32_t leaf_index(std::span<const double> x) const;

    /// Stored class-probability vector of the leaf x is routed to.
    std::span<const double> predict_proba(std::span<const double> x) const;

    /// Re-checks every structural and numeric invariant (single-rooted strict
    /// binary tree in preorder, leaf vectors normalized). Throws
    /// IntegrityError with node/leaf indices on failure.
    void validate() const;

    friend bool operator==(const TreeModel&, const TreeModel&) = default;

private:
    std::vector<TreeNode> nodes_;
    std::vector<double> leaf_probabilities_;  // n_leaves * K
    TreeKind kind_ = TreeKind::standard;
    std::int32_t n_classes_ = 0;
    std::int32_t n_features_in_ = 0;
};

TreeModel fit_tree(const Dataset& data, const TreeParams& params, Rng rng);

/// Same as above but on a raw matrix + labels; used on transformed data where
/// re-validating a Dataset per layer would be wasted work.
TreeModel fit_tree(const Matrix& features, std::span<const std::int32_t> labels,
                   std::int32_t n_classes, const TreeParams& params, Rng rng);

/// Cache-friendly variant over a column-major copy; forest fits transpose
/// once and share the copy across trees. Produces bit-identical trees to the
/// row-major overloads.
TreeModel fit_tree(const ColMatrix& features, std::span<const std::int32_t> labels,
                   std::int32_t n_classes, const TreeParams& params, Rng rng);

}  // namespace ftdrf
