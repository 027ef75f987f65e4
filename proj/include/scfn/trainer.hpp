#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "scfn/dataset.hpp"
#include "scfn/metrics.hpp"
#include "scfn/network.hpp"

namespace scfn {

struct TrainConfig {
  size_t epochs = 8;
  size_t batch_size = 32;
  float alpha = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  uint64_t seed = 1;
  std::string dataset_root;
  std::vector<std::string> categories = {"MDA-MB-468", "MCF7"};
  std::optional<SplitCounts> split;  // empty -> tenth/tenth/remainder rule
  AugmentConfig augment;
  bool augment_enabled = true;
  bool deterministic = true;  // false draws the run seed from the OS
};

struct EpochRecord {
  double train_loss;
  double val_loss;
  double val_accuracy;
};

struct History {
  std::vector<EpochRecord> epochs;
  size_t best_epoch = 0;  // 1-based; argmin of val_loss, first on ties
};

/// Test seams. val_loss_override replaces the computed validation loss
/// (checkpoint-rule tests); on_epoch_end observes the live network.
struct TrainHooks {
  std::function<double(size_t epoch, double computed)> val_loss_override;
  std::function<void(size_t epoch, const Network<float>&)> on_epoch_end;
};

struct TrainResult {
  Network<float> best;
  History history;
  uint64_t seed_used = 0;
};

/// Mini-batch Adam over train_set with per-epoch validation; returns the
/// parameter snapshot from the epoch with the lowest validation loss.
/// Throws std::runtime_error naming the epoch and batch if the loss goes
/// non-finite.
TrainResult train(const TrainConfig& cfg, const std::vector<Sample>& train_set,
                  const std::vector<Sample>& val_set, const TrainHooks& hooks = {});

/// Loads cfg.dataset_root, splits it (cfg.split or the default rule), and
/// trains on the result.
TrainResult train(const TrainConfig& cfg, const TrainHooks& hooks = {});

/// Eval-mode forward over every sample: standardize only, no augmentation,
/// no dropout. auc is empty when only one category is present.
EvalResult evaluate(const Network<float>& net, const std::vector<Sample>& samples,
                    size_t batch_size = 64);

/// Per-sample sigmoid outputs in sample order, eval mode.
std::vector<double> predict_scores(const Network<float>& net,
                                   const std::vector<Sample>& samples,
                                   size_t batch_size = 64);

/// Single-image path: load -> resize -> standardize -> eval forward.
/// Category index 1 wins at probability >= 0.5.
std::pair<double, std::string> predict(const Network<float>& net,
                                       const std::string& image_path,
                                       const std::vector<std::string>& categories);

/// Compares analytic gradients of the mean BCE loss against central finite
/// differences on a narrow double-precision network (dropout disabled) over
/// a 2x16x16x1 input; returns the max relative error, with denominator
/// max(|analytic|, |numeric|, 1e-12).
double gradient_check(uint64_t seed);

/// "epoch,train_loss,val_loss,val_accuracy" + one row per epoch at 6
/// significant digits, then a "# best_epoch=N" comment.
void write_history_csv(const History& history, const std::string& path);

}  // namespace scfn
