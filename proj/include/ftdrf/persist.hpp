#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ftdrf/cascade.hpp"
#include "ftdrf/dataset.hpp"
#include "ftdrf/mgs.hpp"

namespace ftdrf {

inline constexpr std::uint32_t kModelFormatVersion = 1;

struct DatasetFingerprint {
    std::uint64_t n_rows = 0;
    std::uint64_t n_features = 0;
    std::uint32_t n_classes = 0;
    std::uint64_t content_hash = 0;
};

DatasetFingerprint fingerprint(const Dataset& data);

/// Everything needed to replay predictions exactly: the cascade (with its
/// config snapshot and training history), the optional MGS preprocessor, and
/// a fingerprint of the training data.
struct ModelFile {
    std::uint32_t format_version = kModelFormatVersion;
    std::optional<MGSModel> mgs;
    CascadeModel cascade;
    DatasetFingerprint train_fingerprint;
};

/// Atomic write (temp file + rename); identical models produce identical
/// bytes. On failure no partial file is left behind.
void save_model(const ModelFile& model, const std::string& path);

/// Reads and fully re-validates a model file. Throws FormatError on a bad
/// magic, VersionError on an unknown version, IntegrityError on truncation or
/// corrupted content.
ModelFile load_model(const std::string& path);

// Deterministic in-memory encodings; save_model wraps these. Exposed so tests
// can compare models byte-for-byte.
std::string serialize_tree(const TreeModel& tree);
std::string serialize_layer(const LayerModel& layer);
std::string serialize_cascade(const CascadeModel& cascade);
std::string serialize_model(const ModelFile& model);

}  // namespace ftdrf
