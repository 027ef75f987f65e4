#include "scfn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "scfn/adam.hpp"
#include "scfn/loss.hpp"
#include "scfn/pgm.hpp"

namespace scfn {

namespace {

uint64_t entropy_seed() {
  std::random_device rd;
  uint64_t hi = rd(), lo = rd();
  uint64_t t = static_cast<uint64_t>(
      std::chrono::steady_clock::now().time_since_epoch().count());
  return (hi << 32 | lo) ^ t;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const std::vector<Sample>& train_set,
                  const std::vector<Sample>& val_set, const TrainHooks& hooks) {
  if (cfg.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (cfg.batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (train_set.empty() || val_set.empty())
    throw std::invalid_argument("train and validation sets must be non-empty");

  uint64_t seed = cfg.deterministic ? cfg.seed : entropy_seed();
  Network<float> net =
      Network<float>::init(RngStream::root(seed).derive(rng_slot::kInit), {});

  AdamState<float> adam;
  adam.alpha = cfg.alpha;
  adam.beta1 = cfg.beta1;
  adam.beta2 = cfg.beta2;

  TrainResult result{net, {}, seed};
  double best_val = std::numeric_limits<double>::infinity();

  const AugmentConfig* aug = cfg.augment_enabled ? &cfg.augment : nullptr;
  for (size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    auto batches = make_train_batches(train_set, cfg.batch_size, seed, epoch, aug);
    double loss_sum = 0.0;
    size_t sample_count = 0;
    for (size_t b = 0; b < batches.size(); ++b) {
      const Batch& batch = batches[b];
      RngStream dropout_stream =
          RngStream::root(seed).derive(rng_slot::kDropout).derive(epoch).derive(b);
      typename Network<float>::Cache cache;
      auto fwd = net.forward(batch.images, Mode::kTrain, dropout_stream, &cache);
      LossReport<float> report = bce_loss(fwd.logits, batch.labels);
      if (!std::isfinite(report.mean_loss))
        throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                 std::to_string(epoch) + ", batch " + std::to_string(b + 1));
      for (float l : report.per_sample) loss_sum += l;
      sample_count += report.per_sample.size();

      Tensor<float> dlogit = bce_grad(fwd.logits, batch.labels);
      auto grads = net.backward(cache, dlogit);
      adam_step(adam, net.parameters(), grads);
    }

    EvalResult val = evaluate(net, val_set, cfg.batch_size > 64 ? cfg.batch_size : 64);
    double val_loss = hooks.val_loss_override
                          ? hooks.val_loss_override(epoch, val.mean_loss)
                          : val.mean_loss;

    result.history.epochs.push_back(
        {loss_sum / static_cast<double>(sample_count), val_loss, val.accuracy});
    if (val_loss < best_val) {
      best_val = val_loss;
      result.history.best_epoch = epoch;
      result.best = net;  // snapshot; later epochs must not touch it
    }
    if (hooks.on_epoch_end) hooks.on_epoch_end(epoch, net);
  }
  return result;
}

TrainResult train(const TrainConfig& cfg, const TrainHooks& hooks) {
  if (cfg.dataset_root.empty()) throw std::invalid_argument("dataset_root is not set");
  std::vector<Sample> samples = load_dataset_dir(cfg.dataset_root, cfg.categories);
  SplitCounts counts = cfg.split ? *cfg.split : default_split_counts(samples.size());
  uint64_t seed = cfg.deterministic ? cfg.seed : entropy_seed();
  DatasetSplit split = split_dataset(std::move(samples), counts, seed);

  TrainConfig inner = cfg;
  inner.deterministic = true;  // entropy already applied once
  inner.seed = seed;
  return train(inner, split.train, split.validation, hooks);
}

std::vector<double> predict_scores(const Network<float>& net,
                                   const std::vector<Sample>& samples, size_t batch_size) {
  std::vector<double> scores;
  scores.reserve(samples.size());
  for (const Batch& b : make_eval_batches(samples, batch_size)) {
    Tensor<float> probs = net.forward_eval(b.images).probs;
    for (size_t i = 0; i < probs.size(); ++i) scores.push_back(probs.data()[i]);
  }
  return scores;
}

EvalResult evaluate(const Network<float>& net, const std::vector<Sample>& samples,
                    size_t batch_size) {
  if (samples.empty()) throw std::invalid_argument("evaluate: empty sample set");

  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(samples.size());
  labels.reserve(samples.size());
  double loss_sum = 0.0;
  for (const Batch& b : make_eval_batches(samples, batch_size)) {
    auto fwd = net.forward(b.images, Mode::kEval, RngStream::root(0), nullptr);
    LossReport<float> report = bce_loss(fwd.logits, b.labels);
    for (float l : report.per_sample) loss_sum += l;
    for (size_t i = 0; i < fwd.probs.size(); ++i) {
      scores.push_back(fwd.probs.data()[i]);
      labels.push_back(static_cast<int>(b.labels.data()[i]));
    }
  }

  EvalResult r;
  r.mean_loss = loss_sum / static_cast<double>(samples.size());
  r.confusion = confusion_counts(scores, labels);
  r.accuracy = accuracy(scores, labels);
  long pos = r.confusion.tp + r.confusion.fn;
  if (pos > 0 && pos < static_cast<long>(labels.size())) r.auc = auc(scores, labels);
  return r;
}

std::pair<double, std::string> predict(const Network<float>& net,
                                       const std::string& image_path,
                                       const std::vector<std::string>& categories) {
  if (categories.size() != 2) throw std::invalid_argument("predict: need two categories");
  Tensor<float> img = standardize(load_image(image_path));
  Tensor<float> batch({1, img.extent(0), img.extent(1), 1}, img.values());
  double p = net.forward_eval(batch).probs.data()[0];
  return {p, p >= 0.5 ? categories[1] : categories[0]};
}

double gradient_check(uint64_t seed) {
  // Narrow layers keep the parameter count (and so the finite-difference
  // pass count) small; every layer kind is still exercised.
  typename Network<double>::Config cfg;
  cfg.in_h = 16;
  cfg.in_w = 16;
  cfg.c1 = 4;
  cfg.c2 = 4;
  cfg.c3 = 8;
  cfg.hidden = 4;
  cfg.dropout_rate = 0.0;

  RngStream root = RngStream::root(seed);
  Network<double> net = Network<double>::init(root.derive(rng_slot::kInit), cfg);

  RngStream xs = root.derive(7);
  Tensor<double> x({2, 16, 16, 1});
  for (size_t i = 0; i < x.size(); ++i) x.data()[i] = xs.next_normal(0.0, 1.0);
  Tensor<double> y({2});
  y.data()[0] = 0.0;
  y.data()[1] = 1.0;

  typename Network<double>::Cache cache;
  auto fwd = net.forward(x, Mode::kTrain, RngStream::root(0), &cache);
  Tensor<double> dlogit = bce_grad(fwd.logits, y);
  auto grads = net.backward(cache, dlogit);

  auto loss_at = [&](Network<double>& n) {
    return bce_loss(n.forward(x, Mode::kEval, RngStream::root(0), nullptr).logits, y)
        .mean_loss;
  };

  auto params = net.parameters();
  double max_rel = 0.0;
  for (size_t p = 0; p < params.size(); ++p) {
    Tensor<double>& theta = *params[p];
    for (size_t i = 0; i < theta.size(); ++i) {
      double saved = theta.data()[i];
      auto central = [&](double h) {
        theta.data()[i] = saved + h;
        double up = loss_at(net);
        theta.data()[i] = saved - h;
        double down = loss_at(net);
        theta.data()[i] = saved;
        return (up - down) / (2.0 * h);
      };
      auto agree = [](double a, double b) {
        return std::abs(a - b) <= 1e-3 * std::max({std::abs(a), std::abs(b), 1e-12});
      };
      // The loss is piecewise smooth: a relu kink inside the step window makes
      // the estimate wrong by O(1) no matter how small the step, so a central
      // difference is only meaningful where shrinking the step does not move
      // it. Start at the nominal relative step and refine tenfold until two
      // consecutive estimates agree; a real gradient bug survives refinement
      // because the estimates then agree with each other, not with analytic.
      double h = 1e-3 * std::max(std::abs(saved), 1e-1);
      double numeric = central(h);
      for (int refine = 0; refine < 3; ++refine) {
        double finer = central(h / 10.0);
        bool stable = agree(numeric, finer);
        numeric = finer;
        h /= 10.0;
        if (stable) break;
      }
      double analytic = grads[p].data()[i];
      double rel = std::abs(analytic - numeric) /
                   std::max({std::abs(analytic), std::abs(numeric), 1e-12});
      if (rel > max_rel) max_rel = rel;
    }
  }
  return max_rel;
}

void write_history_csv(const History& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "epoch,train_loss,val_loss,val_accuracy\n";
  char line[160];
  for (size_t e = 0; e < history.epochs.size(); ++e) {
    const EpochRecord& r = history.epochs[e];
    std::snprintf(line, sizeof(line), "%zu,%.6g,%.6g,%.6g\n", e + 1, r.train_loss,
                  r.val_loss, r.val_accuracy);
    out << line;
  }
  out << "# best_epoch=" << history.best_epoch << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace scfn
