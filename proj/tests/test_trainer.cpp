#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "scfn/pgm.hpp"
#include "scfn/synthetic.hpp"
#include "scfn/trainer.hpp"

using scfn::Network;
using scfn::RngStream;
using scfn::Sample;
using scfn::Tensor;
using scfn::TrainConfig;
using scfn::TrainHooks;

namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* stem) {
  fs::path p = fs::temp_directory_path() /
               (std::string(stem) + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<Sample> noise_samples(size_t n, uint64_t seed) {
  RngStream s = RngStream::root(seed).derive(99);
  std::vector<Sample> out(n);
  for (size_t i = 0; i < n; ++i) {
    out[i].image = Tensor<float>({128, 128, 1});
    for (size_t j = 0; j < out[i].image.size(); ++j)
      out[i].image[j] = static_cast<float>(s.next_uniform());
    out[i].label = static_cast<int>(i % 2);
  }
  return out;
}

// All-zero parameters except the output bias: the probability is
// sigmoid(bias) for any input.
Network<float> constant_net(float logit) {
  Network<float> net = scfn::init_network(RngStream::root(1));
  for (Tensor<float>* p : net.parameters())
    for (size_t i = 0; i < p->size(); ++i) (*p)[i] = 0.0f;
  net.fc2.bias[0] = logit;
  return net;
}

std::vector<std::vector<float>> snapshot(const Network<float>& net) {
  std::vector<std::vector<float>> out;
  for (const Tensor<float>* p : net.parameters()) out.push_back(p->values());
  return out;
}

TrainConfig small_config(size_t epochs) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = 4;
  cfg.seed = 7;
  cfg.augment_enabled = false;
  return cfg;
}

}  // namespace

TEST_CASE("checkpoint keeps the epoch with the lowest validation loss") {
  auto train_set = noise_samples(4, 1);
  auto val_set = noise_samples(2, 2);

  std::vector<double> stub{0.5, 0.3, 0.4};
  std::vector<std::vector<std::vector<float>>> per_epoch;
  TrainHooks hooks;
  hooks.val_loss_override = [&](size_t epoch, double) { return stub[epoch - 1]; };
  hooks.on_epoch_end = [&](size_t, const Network<float>& net) {
    per_epoch.push_back(snapshot(net));
  };

  auto result = scfn::train(small_config(3), train_set, val_set, hooks);

  CHECK(result.history.best_epoch == 2);
  REQUIRE(result.history.epochs.size() == 3);
  CHECK(result.history.epochs[0].val_loss == 0.5);
  CHECK(result.history.epochs[1].val_loss == 0.3);
  CHECK(result.history.epochs[2].val_loss == 0.4);
  for (const auto& rec : result.history.epochs) {
    CHECK(std::isfinite(rec.train_loss));
    CHECK(rec.train_loss > 0.0);
    CHECK(rec.val_accuracy >= 0.0);
    CHECK(rec.val_accuracy <= 1.0);
  }

  // returned parameters are the epoch-2 snapshot, not the final state
  REQUIRE(per_epoch.size() == 3);
  CHECK(snapshot(result.best) == per_epoch[1]);
  CHECK(snapshot(result.best) != per_epoch[2]);
}

TEST_CASE("ties in validation loss keep the earliest epoch") {
  auto train_set = noise_samples(4, 3);
  auto val_set = noise_samples(2, 4);
  TrainHooks hooks;
  hooks.val_loss_override = [](size_t, double) { return 0.42; };
  auto result = scfn::train(small_config(3), train_set, val_set, hooks);
  CHECK(result.history.best_epoch == 1);
}

TEST_CASE("training twice with one seed is bitwise identical") {
  auto train_set = noise_samples(6, 5);
  auto val_set = noise_samples(2, 6);
  TrainConfig cfg = small_config(2);
  cfg.augment_enabled = true;  // cover the augmentation path too

  auto r1 = scfn::train(cfg, train_set, val_set);
  auto r2 = scfn::train(cfg, train_set, val_set);
  CHECK(snapshot(r1.best) == snapshot(r2.best));
  REQUIRE(r1.history.epochs.size() == r2.history.epochs.size());
  for (size_t e = 0; e < r1.history.epochs.size(); ++e) {
    CHECK(r1.history.epochs[e].train_loss == r2.history.epochs[e].train_loss);
    CHECK(r1.history.epochs[e].val_loss == r2.history.epochs[e].val_loss);
  }
  CHECK(r1.seed_used == cfg.seed);

  TrainConfig other = cfg;
  other.seed = 8;
  auto r3 = scfn::train(other, train_set, val_set);
  CHECK(snapshot(r1.best) != snapshot(r3.best));
}

TEST_CASE("a non-deterministic run draws a fresh seed") {
  auto train_set = noise_samples(4, 7);
  auto val_set = noise_samples(2, 8);
  TrainConfig cfg = small_config(1);
  cfg.deterministic = false;
  auto r1 = scfn::train(cfg, train_set, val_set);
  auto r2 = scfn::train(cfg, train_set, val_set);
  CHECK(r1.seed_used != r2.seed_used);
}

TEST_CASE("divergence aborts with the failing epoch and batch") {
  auto train_set = noise_samples(8, 9);
  auto val_set = noise_samples(2, 10);
  TrainConfig cfg = small_config(2);
  cfg.alpha = 1e10f;  // first step throws every weight to +-1e10

  bool threw = false;
  try {
    scfn::train(cfg, train_set, val_set);
  } catch (const std::runtime_error& e) {
    threw = true;
    std::string what = e.what();
    CHECK(what.find("non-finite loss") != std::string::npos);
    CHECK(what.find("epoch") != std::string::npos);
    CHECK(what.find("batch") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("train validates its inputs") {
  auto train_set = noise_samples(4, 11);
  auto val_set = noise_samples(2, 12);
  TrainConfig cfg = small_config(1);
  cfg.epochs = 0;
  CHECK_THROWS_AS(scfn::train(cfg, train_set, val_set), std::invalid_argument);
  cfg = small_config(1);
  cfg.batch_size = 0;
  CHECK_THROWS_AS(scfn::train(cfg, train_set, val_set), std::invalid_argument);
  CHECK_THROWS_AS(scfn::train(small_config(1), {}, val_set), std::invalid_argument);
  CHECK_THROWS_AS(scfn::train(small_config(1), train_set, {}), std::invalid_argument);
  CHECK_THROWS_AS(scfn::train(TrainConfig{}), std::invalid_argument);  // no root
}

TEST_CASE("evaluate reports loss, accuracy, confusion and auc") {
  auto samples = noise_samples(6, 13);  // balanced 3/3

  // constant positive predictor: p = sigmoid(10) for everything
  Network<float> pos = constant_net(10.0f);
  auto r = scfn::evaluate(pos, samples);
  CHECK(r.accuracy == doctest::Approx(0.5));
  CHECK(r.confusion.tp == 3);
  CHECK(r.confusion.fp == 3);
  CHECK(r.confusion.tn == 0);
  CHECK(r.confusion.fn == 0);
  REQUIRE(r.auc.has_value());
  CHECK(*r.auc == doctest::Approx(0.5));  // all scores tie
  // per-sample losses: ~0 for the positives, ~10 for the negatives
  CHECK(r.mean_loss == doctest::Approx(5.0).epsilon(0.01));

  // constant negative predictor flips the confusion table
  Network<float> neg = constant_net(-10.0f);
  auto rn = scfn::evaluate(neg, samples);
  CHECK(rn.accuracy == doctest::Approx(0.5));
  CHECK(rn.confusion.tn == 3);
  CHECK(rn.confusion.fn == 3);

  // exactly 0.5 predicts the positive category (threshold tie rule)
  Network<float> half = constant_net(0.0f);
  auto rh = scfn::evaluate(half, samples);
  CHECK(rh.confusion.tp == 3);
  CHECK(rh.confusion.fp == 3);
  CHECK(rh.mean_loss == doctest::Approx(std::log(2.0)).epsilon(1e-5));

  // single-category set: auc undefined, accuracy still works
  std::vector<Sample> one_class(samples.begin(), samples.begin() + 2);
  one_class[1].label = 0;
  auto ro = scfn::evaluate(pos, one_class);
  CHECK_FALSE(ro.auc.has_value());
  CHECK(ro.accuracy == doctest::Approx(0.0));

  CHECK_THROWS_AS(scfn::evaluate(pos, {}), std::invalid_argument);
}

TEST_CASE("a fresh network scores near chance on noise") {
  auto samples = noise_samples(10, 14);
  Network<float> net = scfn::init_network(RngStream::root(20).derive(1));
  auto r = scfn::evaluate(net, samples);
  CHECK(r.accuracy >= 0.2);
  CHECK(r.accuracy <= 0.8);
  CHECK(r.mean_loss > 0.3);
  CHECK(r.mean_loss < 2.0);
  for (double s : scfn::predict_scores(net, samples)) {
    CHECK(s > 0.0);
    CHECK(s < 1.0);
  }
}

TEST_CASE("predict_scores preserves sample order across batch sizes") {
  auto samples = noise_samples(7, 15);
  Network<float> net = scfn::init_network(RngStream::root(21).derive(1));
  auto one = scfn::predict_scores(net, samples, 1);
  auto four = scfn::predict_scores(net, samples, 4);
  auto big = scfn::predict_scores(net, samples, 64);
  REQUIRE(one.size() == 7);
  for (size_t i = 0; i < 7; ++i) {
    CHECK(one[i] == doctest::Approx(four[i]).epsilon(1e-6));
    CHECK(one[i] == doctest::Approx(big[i]).epsilon(1e-6));
  }
}

TEST_CASE("predict maps probability to the category list") {
  fs::path dir = temp_dir("predict");
  std::vector<uint8_t> px(64 * 64);
  for (size_t i = 0; i < px.size(); ++i) px[i] = static_cast<uint8_t>(i % 251);
  scfn::write_pgm((dir / "img.pgm").string(), px, 64, 64);
  std::vector<std::string> cats{"MDA-MB-468", "MCF7"};

  auto low = scfn::predict(constant_net(-4.6f), (dir / "img.pgm").string(), cats);
  CHECK(low.first == doctest::Approx(0.01).epsilon(0.02));
  CHECK(low.second == "MDA-MB-468");

  auto high = scfn::predict(constant_net(4.6f), (dir / "img.pgm").string(), cats);
  CHECK(high.first == doctest::Approx(0.99).epsilon(0.02));
  CHECK(high.second == "MCF7");

  // the boundary itself belongs to the second category
  auto mid = scfn::predict(constant_net(0.0f), (dir / "img.pgm").string(), cats);
  CHECK(mid.first == doctest::Approx(0.5));
  CHECK(mid.second == "MCF7");

  CHECK_THROWS_AS(
      scfn::predict(constant_net(0.0f), (dir / "img.pgm").string(), {"only-one"}),
      std::invalid_argument);
  fs::remove_all(dir);
}

TEST_CASE("gradient check on the narrow network is tight") {
  double err = scfn::gradient_check(1);
  CHECK(err < 1e-4);
  CHECK(err >= 0.0);
}

TEST_CASE("history csv round trips through a parser") {
  scfn::History h;
  h.epochs.push_back({0.693147, 0.65, 0.5});
  h.epochs.push_back({0.41, 0.38, 0.875});
  h.epochs.push_back({0.30002, 0.40001, 0.9});
  h.best_epoch = 2;
  fs::path path = fs::temp_directory_path() /
                  ("hist_" + std::to_string(::getpid()) + ".csv");
  scfn::write_history_csv(h, path.string());

  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,train_loss,val_loss,val_accuracy");
  for (size_t e = 0; e < 3; ++e) {
    REQUIRE(std::getline(in, line));
    std::istringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');
    CHECK(std::stoul(cell) == e + 1);
    std::getline(ls, cell, ',');
    CHECK(std::stod(cell) == doctest::Approx(h.epochs[e].train_loss).epsilon(1e-5));
    std::getline(ls, cell, ',');
    CHECK(std::stod(cell) == doctest::Approx(h.epochs[e].val_loss).epsilon(1e-5));
    std::getline(ls, cell, ',');
    CHECK(std::stod(cell) == doctest::Approx(h.epochs[e].val_accuracy).epsilon(1e-5));
  }
  REQUIRE(std::getline(in, line));
  CHECK(line == "# best_epoch=2");
  fs::remove(path);
}

TEST_CASE("the dataset-root overload loads, splits and trains") {
  fs::path dir = temp_dir("trainroot");
  scfn::generate_synthetic(10, 17, dir.string());

  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 8;
  cfg.seed = 17;
  cfg.augment_enabled = false;
  cfg.dataset_root = dir.string();
  cfg.categories = {"class-a", "class-b"};

  auto result = scfn::train(cfg);
  CHECK(result.history.epochs.size() == 1);
  CHECK(result.history.best_epoch == 1);
  CHECK(result.seed_used == 17);
  for (const Tensor<float>* p : result.best.parameters())
    CHECK(p->all_finite());
  fs::remove_all(dir);
}
