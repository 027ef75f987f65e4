#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scfn/preprocess.hpp"
#include "scfn/rng.hpp"
#include "scfn/tensor.hpp"

namespace scfn {

struct Sample {
  Tensor<float> image;  // [128,128,1], raw [0,1] values
  int label = 0;        // index into the category list
  std::string source_path;
};

struct SplitCounts {
  size_t n_train = 0, n_val = 0, n_test = 0;
  size_t total() const { return n_train + n_val + n_test; }
};

struct DatasetSplit {
  std::vector<Sample> train, validation, test;
};

/// Loads <root>/<category>/*.pgm for each category in order; the category's
/// position in the list is the sample label. Paths are sorted
/// lexicographically (relative to root) before any shuffling happens, so
/// directory enumeration order never matters.
std::vector<Sample> load_dataset_dir(const std::string& root,
                                     const std::vector<std::string>& categories);

/// Holdout rule used when no explicit counts are given: a tenth each
/// (rounded down) for validation and test, remainder for training.
SplitCounts default_split_counts(size_t n);

/// Fisher-Yates permutation of [0,n) from the split stream of `seed`,
/// partitioned as first n_train / next n_val / last n_test. Counts must
/// sum to n; a zero count is allowed only with n == 0.
std::vector<std::vector<size_t>> split_indices(size_t n, SplitCounts counts, uint64_t seed);

DatasetSplit split_dataset(std::vector<Sample> samples, SplitCounts counts, uint64_t seed);

/// One training batch: images [n,128,128,1] (standardized, optionally
/// augmented) and labels [n] of 0/1.
struct Batch {
  Tensor<float> images;
  Tensor<float> labels;
};

/// Batches for one training epoch (1-based): shuffles sample order with the
/// epoch's shuffle stream, then augments (when aug is non-null, each sample
/// through its own derived stream) and standardizes. The final short batch
/// is kept. Throws on an empty sample set.
std::vector<Batch> make_train_batches(const std::vector<Sample>& samples, size_t batch_size,
                                      uint64_t seed, uint64_t epoch,
                                      const AugmentConfig* aug);

/// Evaluation batches: original order, standardize only.
std::vector<Batch> make_eval_batches(const std::vector<Sample>& samples, size_t batch_size);

}  // namespace scfn
