#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ftdrf/core.hpp"
#include "ftdrf/dataset.hpp"
#include "ftdrf/layer.hpp"

namespace ftdrf {

/// Base of the layer-over-layer improvement ratio used as the stopping
/// signal: gain relative to the previous accuracy (default) or to the
/// remaining error 1 - previous accuracy.
enum class GainMode : std::uint8_t { prev_accuracy = 0, remaining_error = 1 };

struct CascadeConfig {
    LayerParams layer_params{};
    double holdout_fraction = 0.2;
    double gain_threshold = 0.01;
    int max_layers = 10;
    int min_layers = 1;
    std::uint64_t seed = 0;
    GainMode gain_mode = GainMode::prev_accuracy;
    bool wiggle = false;               // augment the training images inside the fit
    bool augment_before_split = false; // wiggle the whole input before the holdout split
    bool refit_full = false;           // refit the frozen layer stack on 100% of the data
};

enum class StopReason : std::uint8_t { gain_below_threshold = 0, max_layers_reached = 1 };

struct LayerRecord {
    double holdout_accuracy = 0.0;
    double relative_gain = 0.0;  // 0 by convention for the first layer
};

/// (curr - prev) / prev; prev must be positive.
double relative_gain(double prev_accuracy, double curr_accuracy);

/// (curr - prev) / (1 - prev); degrades to curr - prev when prev == 1.
double relative_gain_remaining_error(double prev_accuracy, double curr_accuracy);

class CascadeModel {
public:
    CascadeModel(std::vector<LayerModel> layers, std::int32_t n_classes, std::int32_t input_dim,
                 std::vector<LayerRecord> history, StopReason stop_reason,
                 std::optional<LayerRecord> rejected, CascadeConfig config);

    std::size_t n_layers() const { return layers_.size(); }
    std::int32_t n_classes() const { return n_classes_; }
    std::int32_t input_dim() const { return input_dim_; }
    const std::vector<LayerModel>& layers() const { return layers_; }
    const std::vector<LayerRecord>& history() const { return history_; }
    StopReason stop_reason() const { return stop_reason_; }
    /// Holdout record of the layer that was trained, measured and discarded;
    /// absent when the run stopped at max_layers.
    const std::optional<LayerRecord>& rejected_layer() const { return rejected_; }
    const CascadeConfig& config() const { return config_; }

    /// Checks the layer chaining invariants (dims, class counts, history
    /// length) plus every tree invariant. Throws IntegrityError on failure.
    void validate() const;

private:
    std::vector<LayerModel> layers_;
    std::int32_t n_classes_ = 0;
    std::int32_t input_dim_ = 0;
    std::vector<LayerRecord> history_;
    StopReason stop_reason_ = StopReason::max_layers_reached;
    std::optional<LayerRecord> rejected_;
    CascadeConfig config_;
};

/// Grows layers greedily: split off a holdout, fit a layer on the training
/// portion, keep it while the holdout relative gain clears the threshold,
/// mapping both portions forward through each kept layer.
CascadeModel fit_cascade(const Dataset& data, const CascadeConfig& config);

/// Maps features through the first n_layers transforms (default: all but the
/// last layer). n_layers = 0 returns the input unchanged.
Matrix transform_through(const CascadeModel& model, const Matrix& features,
                         std::optional<std::size_t> n_layers = std::nullopt, int n_threads = 0);

LayerModel::Prediction predict_cascade(const CascadeModel& model, const Matrix& features,
                                       int n_threads = 0);

struct EvalReport {
    std::size_t n_samples = 0;
    std::int32_t n_classes = 0;
    double accuracy = 0.0;
    std::vector<double> per_class_accuracy;  // K entries; 0 when the class is absent
    std::vector<std::int64_t> confusion;     // K x K, row = true class, col = predicted
};

EvalReport evaluate(const CascadeModel& model, const Dataset& data, int n_threads = 0);

}  // namespace ftdrf
