#pragma once

#include <string>

#include "scfn/trainer.hpp"

namespace scfn {

/// Applies a key=value config file to cfg. Recognized keys: epochs,
/// batch_size, alpha, beta1, beta2, seed, dataset_root, categories
/// (comma-separated, ordered), n_train, n_val, n_test, deterministic.
/// '#' starts a comment; blank lines are skipped; unknown keys and
/// malformed values are errors. dataset_root is resolved relative to the
/// config file's directory. The three n_* keys must appear together.
void apply_config_file(const std::string& path, TrainConfig& cfg);

}  // namespace scfn
