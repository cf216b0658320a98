#include "ftdrf/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace ftdrf {

double impurity(std::span<const std::int64_t> class_counts, Criterion criterion) {
    std::int64_t total = 0;
    for (std::int64_t c : class_counts) {
        if (c < 0) throw ValidationError("impurity: negative class count");
        total += c;
    }
    if (total == 0) throw ValidationError("impurity: all class counts are zero");

    if (criterion == Criterion::entropy) {
        double h = 0.0;
        for (std::int64_t c : class_counts) {
            if (c > 0) {
                const double p = static_cast<double>(c) / static_cast<double>(total);
                h -= p * std::log2(p);
            }
        }
        return h < 0.0 ? 0.0 : h;
    }
    double sum_sq = 0.0;
    for (std::int64_t c : class_counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        sum_sq += p * p;
    }
    const double g = 1.0 - sum_sq;
    return g < 0.0 ? 0.0 : g;
}

namespace {

// Candidate comparison: larger decrease wins; exact ties go to the lowest
// feature index, then the lowest threshold.
bool improves(const SplitCandidate& cand, const std::optional<SplitCandidate>& best) {
    if (!best) return true;
    if (cand.impurity_decrease != best->impurity_decrease) {
        return cand.impurity_decrease > best->impurity_decrease;
    }
    if (cand.feature != best->feature) return cand.feature < best->feature;
    return cand.threshold < best->threshold;
}

struct SplitScratch {
    std::vector<std::pair<double, std::int32_t>> values;  // (feature value, label)
    std::vector<std::int64_t> node_counts;
    std::vector<std::int64_t> left_counts;
    std::vector<std::int64_t> right_counts;

    void reset(std::int32_t n_classes) {
        node_counts.assign(static_cast<std::size_t>(n_classes), 0);
        left_counts.assign(static_cast<std::size_t>(n_classes), 0);
        right_counts.assign(static_cast<std::size_t>(n_classes), 0);
    }
};

double weighted_decrease(double parent_impurity, std::span<const std::int64_t> left,
                         std::span<const std::int64_t> right, std::int64_t n_left,
                         std::int64_t n_right, Criterion criterion) {
    const double n = static_cast<double>(n_left + n_right);
    const double wl = static_cast<double>(n_left) / n;
    const double wr = static_cast<double>(n_right) / n;
    return parent_impurity - wl * impurity(left, criterion) - wr * impurity(right, criterion);
}

template <typename Mat>
std::optional<SplitCandidate> scan_standard(std::span<const std::int32_t> rows, const Mat& X,
                                            std::span<const std::int32_t> labels,
                                            std::span<const std::int32_t> subset,
                                            Criterion criterion, std::int32_t n_classes,
                                            int min_samples_leaf, SplitScratch& s) {
    const std::size_t n = rows.size();
    s.reset(n_classes);
    for (std::int32_t r : rows) ++s.node_counts[static_cast<std::size_t>(labels[r])];
    const double parent = impurity(s.node_counts, criterion);

    s.values.resize(n);
    std::optional<SplitCandidate> best;
    for (std::int32_t f : subset) {
        for (std::size_t i = 0; i < n; ++i) {
            s.values[i] = {X(static_cast<std::size_t>(rows[i]), static_cast<std::size_t>(f)),
                           labels[rows[i]]};
        }
        std::sort(s.values.begin(), s.values.end());
        if (s.values.front().first == s.values.back().first) continue;  // constant on this node

        std::fill(s.left_counts.begin(), s.left_counts.end(), 0);
        std::copy(s.node_counts.begin(), s.node_counts.end(), s.right_counts.begin());
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const auto y = static_cast<std::size_t>(s.values[i].second);
            ++s.left_counts[y];
            --s.right_counts[y];
            const double a = s.values[i].first;
            const double b = s.values[i + 1].first;
            if (a == b) continue;
            const auto n_left = static_cast<std::int64_t>(i + 1);
            const auto n_right = static_cast<std::int64_t>(n) - n_left;
            if (n_left < min_samples_leaf || n_right < min_samples_leaf) continue;
            double threshold = a + (b - a) / 2.0;
            if (!(threshold < b)) threshold = a;  // keep b's rows strictly on the right
            const double dec = weighted_decrease(parent, s.left_counts, s.right_counts, n_left,
                                                 n_right, criterion);
            if (dec <= 0.0) continue;
            SplitCandidate cand{f, threshold, dec};
            if (improves(cand, best)) best = cand;
        }
    }
    return best;
}

template <typename Mat>
std::optional<SplitCandidate> scan_extra(std::span<const std::int32_t> rows, const Mat& X,
                                         std::span<const std::int32_t> labels,
                                         std::span<const std::int32_t> subset, Criterion criterion,
                                         std::int32_t n_classes, Rng& rng, int min_samples_leaf,
                                         SplitScratch& s) {
    const std::size_t n = rows.size();
    s.reset(n_classes);
    for (std::int32_t r : rows) ++s.node_counts[static_cast<std::size_t>(labels[r])];
    const double parent = impurity(s.node_counts, criterion);

    std::optional<SplitCandidate> best;
    for (std::int32_t f : subset) {
        const auto fc = static_cast<std::size_t>(f);
        double lo = X(static_cast<std::size_t>(rows[0]), fc);
        double hi = lo;
        for (std::size_t i = 1; i < n; ++i) {
            const double v = X(static_cast<std::size_t>(rows[i]), fc);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (lo == hi) continue;
        const double threshold = rng.open_range(lo, hi);
        if (!(threshold > lo && threshold < hi)) continue;  // range too narrow to split

        std::fill(s.left_counts.begin(), s.left_counts.end(), 0);
        std::int64_t n_left = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (X(static_cast<std::size_t>(rows[i]), fc) <= threshold) {
                ++s.left_counts[static_cast<std::size_t>(labels[rows[i]])];
                ++n_left;
            }
        }
        const auto n_right = static_cast<std::int64_t>(n) - n_left;
        if (n_left < min_samples_leaf || n_right < min_samples_leaf) continue;
        for (std::size_t c = 0; c < s.left_counts.size(); ++c) {
            s.right_counts[c] = s.node_counts[c] - s.left_counts[c];
        }
        const double dec =
            weighted_decrease(parent, s.left_counts, s.right_counts, n_left, n_right, criterion);
        if (dec <= 0.0) continue;
        SplitCandidate cand{f, threshold, dec};
        if (improves(cand, best)) best = cand;
    }
    return best;
}

struct ResolvedParams {
    TreeKind kind;
    Criterion criterion;
    int max_depth;  // -1 = unlimited
    int min_samples_split;
    int min_samples_leaf;
    std::int32_t mtry;
    bool bootstrap;
};

ResolvedParams resolve(const TreeParams& p, std::size_t d) {
    if (d == 0) throw ValidationError("fit_tree: dataset has no features");
    if (p.min_samples_split < 2) throw ValidationError("min_samples_split must be >= 2");
    if (p.min_samples_leaf < 1) throw ValidationError("min_samples_leaf must be >= 1");
    if (p.max_depth && *p.max_depth < 0) throw ValidationError("max_depth must be >= 0");
    std::int32_t mtry = p.mtry;
    if (mtry == 0) {
        mtry = static_cast<std::int32_t>(std::llround(std::sqrt(static_cast<double>(d))));
        mtry = std::clamp<std::int32_t>(mtry, 1, static_cast<std::int32_t>(d));
    }
    if (mtry < 1 || static_cast<std::size_t>(mtry) > d) {
        throw ValidationError("mtry must be in [1, " + std::to_string(d) + "], got " +
                              std::to_string(mtry));
    }
    const bool bootstrap = p.bootstrap ? *p.bootstrap : (p.kind == TreeKind::standard);
    return ResolvedParams{p.kind,
                          p.criterion,
                          p.max_depth ? *p.max_depth : -1,
                          p.min_samples_split,
                          p.min_samples_leaf,
                          mtry,
                          bootstrap};
}

struct PendingNode {
    std::size_t begin;
    std::size_t end;
    int depth;
    std::int32_t parent;  // -1 for the root
    bool is_left;
};

template <typename Mat>
TreeModel fit_tree_impl(const Mat& features, std::span<const std::int32_t> labels,
                        std::int32_t n_classes, const TreeParams& params, Rng rng) {
    const std::size_t n = features.rows();
    if (n == 0) throw ValidationError("fit_tree: empty dataset");
    if (labels.size() != n) throw ValidationError("fit_tree: label count mismatch");
    const ResolvedParams rp = resolve(params, features.cols());
    const auto d = static_cast<std::int32_t>(features.cols());
    const auto k = static_cast<std::size_t>(n_classes);

    // Row working set: bootstrap sample (with replacement) or the identity.
    std::vector<std::int32_t> rows(n);
    if (rp.bootstrap) {
        for (std::size_t i = 0; i < n; ++i) {
            rows[i] = static_cast<std::int32_t>(rng.below(n));
        }
    } else {
        std::iota(rows.begin(), rows.end(), 0);
    }

    std::vector<std::int32_t> feature_perm(static_cast<std::size_t>(d));
    std::iota(feature_perm.begin(), feature_perm.end(), 0);

    std::vector<TreeNode> nodes;
    std::vector<double> leaf_probs;
    nodes.reserve(64);
    SplitScratch scratch;
    scratch.reset(n_classes);

    // Explicit stack, left child pushed last, so nodes land in preorder.
    std::vector<PendingNode> stack;
    stack.push_back({0, n, 0, -1, false});
    while (!stack.empty()) {
        const PendingNode task = stack.back();
        stack.pop_back();
        const std::size_t count = task.end - task.begin;
        const std::span<const std::int32_t> node_rows{rows.data() + task.begin, count};

        std::fill(scratch.node_counts.begin(), scratch.node_counts.end(), 0);
        for (std::int32_t r : node_rows) {
            ++scratch.node_counts[static_cast<std::size_t>(labels[r])];
        }
        const bool pure =
            std::any_of(scratch.node_counts.begin(), scratch.node_counts.end(),
                        [&](std::int64_t c) { return c == static_cast<std::int64_t>(count); });
        const bool depth_capped = rp.max_depth >= 0 && task.depth >= rp.max_depth;
        const bool too_small = count < static_cast<std::size_t>(rp.min_samples_split);

        std::optional<SplitCandidate> split;
        if (!pure && !depth_capped && !too_small) {
            // Fresh mtry-subset per node: partial Fisher-Yates on a
            // persistent permutation of all feature indices.
            for (std::int32_t i = 0; i < rp.mtry; ++i) {
                const auto j =
                    static_cast<std::size_t>(i) +
                    static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(d - i)));
                std::swap(feature_perm[static_cast<std::size_t>(i)], feature_perm[j]);
            }
            const std::span<const std::int32_t> subset{feature_perm.data(),
                                                       static_cast<std::size_t>(rp.mtry)};
            split = (rp.kind == TreeKind::standard)
                        ? scan_standard(node_rows, features, labels, subset, rp.criterion,
                                        n_classes, rp.min_samples_leaf, scratch)
                        : scan_extra(node_rows, features, labels, subset, rp.criterion, n_classes,
                                     rng, rp.min_samples_leaf, scratch);
        }

        const auto node_index = static_cast<std::int32_t>(nodes.size());
        nodes.emplace_back();
        if (task.parent >= 0) {
            auto& parent = nodes[static_cast<std::size_t>(task.parent)];
            (task.is_left ? parent.left : parent.right) = node_index;
        }

        if (!split) {
            // Leaf: class proportions of the node's (bootstrapped) rows. The
            // scans clobbered node_counts, so recount.
            std::fill(scratch.node_counts.begin(), scratch.node_counts.end(), 0);
            for (std::int32_t r : node_rows) {
                ++scratch.node_counts[static_cast<std::size_t>(labels[r])];
            }
            auto& leaf = nodes[static_cast<std::size_t>(node_index)];
            leaf.leaf = static_cast<std::int32_t>(leaf_probs.size() / k);
            for (std::size_t c = 0; c < k; ++c) {
                leaf_probs.push_back(static_cast<double>(scratch.node_counts[c]) /
                                     static_cast<double>(count));
            }
            continue;
        }

        // Two-pointer partition; deterministic by construction (library
        // std::partition makes no ordering promise across implementations).
        const auto f = static_cast<std::size_t>(split->feature);
        std::size_t mid = task.begin;
        for (std::size_t i = task.begin; i < task.end; ++i) {
            if (features(static_cast<std::size_t>(rows[i]), f) <= split->threshold) {
                std::swap(rows[i], rows[mid]);
                ++mid;
            }
        }

        auto& node = nodes[static_cast<std::size_t>(node_index)];
        node.feature = split->feature;
        node.threshold = split->threshold;
        stack.push_back({mid, task.end, task.depth + 1, node_index, false});
        stack.push_back({task.begin, mid, task.depth + 1, node_index, true});
    }

    return TreeModel(std::move(nodes), std::move(leaf_probs), rp.kind, n_classes, d);
}

}  // namespace

std::optional<SplitCandidate> best_split_standard(std::span<const std::int32_t> sample_rows,
                                                  const Matrix& features,
                                                  std::span<const std::int32_t> labels,
                                                  std::span<const std::int32_t> feature_subset,
                                                  Criterion criterion, std::int32_t n_classes,
                                                  int min_samples_leaf) {
    if (feature_subset.empty()) throw ValidationError("best_split_standard: empty feature subset");
    if (sample_rows.size() < 2) {
        throw ValidationError("best_split_standard: need >= 2 rows, got " +
                              std::to_string(sample_rows.size()));
    }
    SplitScratch scratch;
    return scan_standard(sample_rows, features, labels, feature_subset, criterion, n_classes,
                         min_samples_leaf, scratch);
}

std::optional<SplitCandidate> best_split_extra(std::span<const std::int32_t> sample_rows,
                                               const Matrix& features,
                                               std::span<const std::int32_t> labels,
                                               std::span<const std::int32_t> feature_subset,
                                               Criterion criterion, std::int32_t n_classes,
                                               Rng& rng, int min_samples_leaf) {
    if (feature_subset.empty()) throw ValidationError("best_split_extra: empty feature subset");
    if (sample_rows.size() < 2) {
        throw ValidationError("best_split_extra: need >= 2 rows, got " +
                              std::to_string(sample_rows.size()));
    }
    SplitScratch scratch;
    return scan_extra(sample_rows, features, labels, feature_subset, criterion, n_classes, rng,
                      min_samples_leaf, scratch);
}

TreeModel::TreeModel(std::vector<TreeNode> nodes, std::vector<double> leaf_probabilities,
                     TreeKind kind, std::int32_t n_classes, std::int32_t n_features_in)
    : nodes_(std::move(nodes)),
      leaf_probabilities_(std::move(leaf_probabilities)),
      kind_(kind),
      n_classes_(n_classes),
      n_features_in_(n_features_in) {
    validate();
}

std::int32_t TreeModel::leaf_index(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(n_features_in_)) {
        throw ValidationError("predict: expected " + std::to_string(n_features_in_) +
                              " features, got " + std::to_string(x.size()));
    }
    const TreeNode* node = &nodes_[0];
    while (!node->is_leaf()) {
        node = (x[static_cast<std::size_t>(node->feature)] <= node->threshold)
                   ? &nodes_[static_cast<std::size_t>(node->left)]
                   : &nodes_[static_cast<std::size_t>(node->right)];
    }
    return node->leaf;
}

std::span<const double> TreeModel::predict_proba(std::span<const double> x) const {
    const auto leaf = static_cast<std::size_t>(leaf_index(x));
    const auto k = static_cast<std::size_t>(n_classes_);
    return {leaf_probabilities_.data() + leaf * k, k};
}

void TreeModel::validate() const {
    if (n_classes_ < 2) throw IntegrityError("tree: n_classes must be >= 2");
    if (n_features_in_ < 1) throw IntegrityError("tree: n_features_in must be >= 1");
    if (nodes_.empty()) throw IntegrityError("tree: no nodes");
    const auto n = static_cast<std::int32_t>(nodes_.size());
    const auto k = static_cast<std::size_t>(n_classes_);
    if (leaf_probabilities_.size() % k != 0) {
        throw IntegrityError("tree: leaf probability array size not a multiple of n_classes");
    }
    const auto n_leaves = static_cast<std::int32_t>(leaf_probabilities_.size() / k);

    std::vector<char> seen(nodes_.size(), 0);
    std::vector<char> leaf_seen(static_cast<std::size_t>(n_leaves), 0);
    std::vector<std::int32_t> stack{0};
    std::int32_t visited = 0;
    while (!stack.empty()) {
        const std::int32_t idx = stack.back();
        stack.pop_back();
        if (idx < 0 || idx >= n) throw IntegrityError("tree: child index out of range");
        if (seen[static_cast<std::size_t>(idx)]) {
            throw IntegrityError("tree: node " + std::to_string(idx) + " reached twice");
        }
        seen[static_cast<std::size_t>(idx)] = 1;
        ++visited;
        const TreeNode& node = nodes_[static_cast<std::size_t>(idx)];
        if (node.is_leaf()) {
            if (node.leaf < 0 || node.leaf >= n_leaves) {
                throw IntegrityError("tree: node " + std::to_string(idx) +
                                     " has leaf index out of range");
            }
            if (leaf_seen[static_cast<std::size_t>(node.leaf)]) {
                throw IntegrityError("tree: leaf " + std::to_string(node.leaf) + " shared");
            }
            leaf_seen[static_cast<std::size_t>(node.leaf)] = 1;
        } else {
            if (node.feature >= n_features_in_) {
                throw IntegrityError("tree: node " + std::to_string(idx) + " splits on feature " +
                                     std::to_string(node.feature) +
                                     " >= " + std::to_string(n_features_in_));
            }
            if (!std::isfinite(node.threshold)) {
                throw IntegrityError("tree: node " + std::to_string(idx) +
                                     " has a non-finite threshold");
            }
            if (node.left <= idx || node.right <= idx) {
                throw IntegrityError("tree: node " + std::to_string(idx) +
                                     " children must follow it in preorder");
            }
            stack.push_back(node.right);
            stack.push_back(node.left);
        }
    }
    if (visited != n) {
        throw IntegrityError("tree: " + std::to_string(n - visited) + " unreachable nodes");
    }

    for (std::int32_t leaf = 0; leaf < n_leaves; ++leaf) {
        double sum = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            const double p = leaf_probabilities_[static_cast<std::size_t>(leaf) * k + c];
            if (!(p >= 0.0 && p <= 1.0 + 1e-12)) {
                throw IntegrityError("tree: leaf " + std::to_string(leaf) + " class " +
                                     std::to_string(c) + " probability out of [0,1]");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw IntegrityError("tree: leaf " + std::to_string(leaf) + " probabilities sum to " +
                                 std::to_string(sum));
        }
    }
}

TreeModel fit_tree(const Dataset& data, const TreeParams& params, Rng rng) {
    return fit_tree_impl(data.features(), data.labels(), data.n_classes(), params, rng);
}

TreeModel fit_tree(const Matrix& features, std::span<const std::int32_t> labels,
                   std::int32_t n_classes, const TreeParams& params, Rng rng) {
    return fit_tree_impl(features, labels, n_classes, params, rng);
}

TreeModel fit_tree(const ColMatrix& features, std::span<const std::int32_t> labels,
                   std::int32_t n_classes, const TreeParams& params, Rng rng) {
    return fit_tree_impl(features, labels, n_classes, params, rng);
}

}  // namespace ftdrf
