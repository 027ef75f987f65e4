// Command-line front end: generate / train / evaluate / predict / roc /
// gradcheck. Exit codes: 0 success, 1 runtime failure, 2 usage or config
// error. Machine-readable output goes to stdout as "name=value" lines;
// diagnostics go to stderr.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "scfn/config.hpp"
#include "scfn/dataset.hpp"
#include "scfn/metrics.hpp"
#include "scfn/network.hpp"
#include "scfn/synthetic.hpp"
#include "scfn/trainer.hpp"

namespace {

// Config-file and flag problems exit 2; runtime failures exit 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SharedFlags {
  std::string config_path;
  std::string data_dir;
  std::string split = "test";
  uint64_t seed = 1;
  bool seed_given = false;
};

scfn::TrainConfig load_config(const SharedFlags& flags) {
  scfn::TrainConfig cfg;
  if (!flags.config_path.empty()) {
    try {
      scfn::apply_config_file(flags.config_path, cfg);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }
  if (!flags.data_dir.empty()) cfg.dataset_root = flags.data_dir;
  if (flags.seed_given) cfg.seed = flags.seed;
  return cfg;
}

std::vector<scfn::Sample> select_split(const scfn::TrainConfig& cfg,
                                       const std::string& which) {
  if (cfg.dataset_root.empty())
    throw ConfigError("no dataset directory given (--data or dataset_root)");
  std::vector<scfn::Sample> samples =
      scfn::load_dataset_dir(cfg.dataset_root, cfg.categories);
  if (which == "all") return samples;

  scfn::SplitCounts counts =
      cfg.split ? *cfg.split : scfn::default_split_counts(samples.size());
  scfn::DatasetSplit split = scfn::split_dataset(std::move(samples), counts, cfg.seed);
  if (which == "train") return split.train;
  if (which == "validation") return split.validation;
  return split.test;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cell-line image classifier"};
  app.require_subcommand(1);

  SharedFlags flags;
  std::string out_dir, model_path, image_path, out_path;
  std::string model_out = "model.scfn", history_out = "history.csv";
  size_t gen_n = 200;
  bool no_augment = false;
  size_t o_epochs = 0, o_batch = 0;
  double o_alpha = 0, o_beta1 = 0, o_beta2 = 0;

  CLI::App* gen = app.add_subcommand("generate", "write a synthetic dataset");
  gen->add_option("--out", out_dir, "output directory")->required();
  gen->add_option("--n", gen_n, "images per category")->check(CLI::PositiveNumber);
  gen->add_option("--seed", flags.seed, "generator seed");

  auto add_shared = [&](CLI::App* sub, bool with_split) {
    sub->add_option("--config", flags.config_path, "key=value config file");
    sub->add_option("--data", flags.data_dir, "dataset root directory");
    sub->add_option("--seed", flags.seed, "run seed")
        ->each([&](const std::string&) { flags.seed_given = true; });
    if (with_split)
      sub->add_option("--split", flags.split, "which split to use")
          ->check(CLI::IsMember({"train", "validation", "test", "all"}));
  };

  CLI::App* train = app.add_subcommand("train", "train a model");
  add_shared(train, false);
  CLI::Option* opt_epochs =
      train->add_option("--epochs", o_epochs, "")->check(CLI::PositiveNumber);
  CLI::Option* opt_batch =
      train->add_option("--batch-size", o_batch, "")->check(CLI::PositiveNumber);
  CLI::Option* opt_alpha = train->add_option("--alpha", o_alpha, "learning rate");
  CLI::Option* opt_beta1 = train->add_option("--beta1", o_beta1, "");
  CLI::Option* opt_beta2 = train->add_option("--beta2", o_beta2, "");
  train->add_flag("--no-augment", no_augment, "disable training-time augmentation");
  train->add_option("--model-out", model_out, "model file to write");
  train->add_option("--history-out", history_out, "history CSV to write");

  CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate a saved model");
  add_shared(evaluate, true);
  evaluate->add_option("--model", model_path, "model file")->required();

  CLI::App* predict = app.add_subcommand("predict", "classify one image");
  predict->add_option("--config", flags.config_path, "key=value config file");
  predict->add_option("--model", model_path, "model file")->required();
  predict->add_option("--image", image_path, "image to classify")->required();

  CLI::App* roc = app.add_subcommand("roc", "export the ROC curve");
  add_shared(roc, true);
  roc->add_option("--model", model_path, "model file")->required();
  roc->add_option("--out", out_path, "CSV file to write")->required();

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "verify gradients");
  gradcheck->add_option("--seed", flags.seed, "check seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    std::string name = e.get_name();
    bool informational =
        name == "CallForHelp" || name == "CallForAllHelp" || name == "CallForVersion";
    return informational ? code : 2;
  }

  try {
    if (gen->parsed()) {
      std::cout << scfn::generate_synthetic(gen_n, flags.seed, out_dir) << "\n";
      return 0;
    }

    if (train->parsed()) {
      scfn::TrainConfig cfg = load_config(flags);
      if (opt_epochs->count()) cfg.epochs = o_epochs;
      if (opt_batch->count()) cfg.batch_size = o_batch;
      if (opt_alpha->count()) cfg.alpha = static_cast<float>(o_alpha);
      if (opt_beta1->count()) cfg.beta1 = static_cast<float>(o_beta1);
      if (opt_beta2->count()) cfg.beta2 = static_cast<float>(o_beta2);
      if (no_augment) cfg.augment_enabled = false;

      scfn::TrainResult result = scfn::train(cfg);
      scfn::save_network(result.best, model_out);
      scfn::write_history_csv(result.history, history_out);

      const scfn::EpochRecord& best = result.history.epochs[result.history.best_epoch - 1];
      std::printf("best_epoch=%zu\n", result.history.best_epoch);
      std::printf("val_loss=%.6g\n", best.val_loss);
      std::printf("val_accuracy=%.6g\n", best.val_accuracy);
      return 0;
    }

    if (evaluate->parsed()) {
      scfn::TrainConfig cfg = load_config(flags);
      scfn::Network<float> net = scfn::load_network(model_path);
      scfn::EvalResult r = scfn::evaluate(net, select_split(cfg, flags.split));
      std::printf("accuracy=%.6g\n", r.accuracy);
      std::printf("loss=%.6g\n", r.mean_loss);
      if (r.auc)
        std::printf("auc=%.6g\n", *r.auc);
      else
        std::printf("auc=nan\n");
      return 0;
    }

    if (predict->parsed()) {
      scfn::TrainConfig cfg = load_config(flags);
      scfn::Network<float> net = scfn::load_network(model_path);
      auto [p, category] = scfn::predict(net, image_path, cfg.categories);
      std::printf("probability=%.6f\n", p);
      std::printf("category=%s\n", category.c_str());
      return 0;
    }

    if (roc->parsed()) {
      scfn::TrainConfig cfg = load_config(flags);
      scfn::Network<float> net = scfn::load_network(model_path);
      std::vector<scfn::Sample> samples = select_split(cfg, flags.split);

      std::vector<double> scores = scfn::predict_scores(net, samples);
      std::vector<int> labels;
      labels.reserve(samples.size());
      for (const scfn::Sample& s : samples) labels.push_back(s.label);

      scfn::RocCurve curve = scfn::roc_curve(scores, labels);  // rejects one-category sets
      scfn::write_roc_csv(curve, out_path);
      std::printf("auc=%.6g\n", scfn::auc(scores, labels));
      return 0;
    }

    if (gradcheck->parsed()) {
      double err = scfn::gradient_check(flags.seed);
      std::printf("max_rel_err=%.6g\n", err);
      return err < 1e-4 ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
