#include "scfn/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <stdexcept>

#include "scfn/pgm.hpp"

namespace fs = std::filesystem;

namespace scfn {

std::vector<Sample> load_dataset_dir(const std::string& root,
                                     const std::vector<std::string>& categories) {
  if (categories.empty()) throw std::invalid_argument("no categories given");
  fs::path base(root);
  if (!fs::is_directory(base)) throw std::runtime_error("dataset root not found: " + root);

  std::vector<std::pair<std::string, int>> entries;  // (relative path, label)
  for (size_t label = 0; label < categories.size(); ++label) {
    fs::path dir = base / categories[label];
    if (!fs::is_directory(dir))
      throw std::runtime_error("category directory not found: " + dir.string());
    for (const auto& e : fs::directory_iterator(dir)) {
      if (!e.is_regular_file()) continue;
      if (e.path().extension() != ".pgm") continue;
      entries.emplace_back((fs::path(categories[label]) / e.path().filename()).string(),
                           static_cast<int>(label));
    }
  }
  if (entries.empty()) throw std::runtime_error("no .pgm images under " + root);
  std::sort(entries.begin(), entries.end());

  std::vector<Sample> samples(entries.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(entries.size()); ++i) {
    fs::path p = base / entries[i].first;
    samples[i] = Sample{load_image(p.string()), entries[i].second, p.string()};
  }
  return samples;
}

SplitCounts default_split_counts(size_t n) {
  SplitCounts c;
  c.n_val = n / 10;
  c.n_test = n / 10;
  c.n_train = n - c.n_val - c.n_test;
  return c;
}

std::vector<std::vector<size_t>> split_indices(size_t n, SplitCounts counts, uint64_t seed) {
  if (counts.total() != n)
    throw std::invalid_argument("split counts sum to " + std::to_string(counts.total()) +
                                " but there are " + std::to_string(n) + " samples");
  if (n > 0 && (counts.n_train == 0 || counts.n_val == 0 || counts.n_test == 0))
    throw std::invalid_argument("each split role needs at least one sample");

  std::vector<size_t> perm(n);
  for (size_t i = 0; i < n; ++i) perm[i] = i;
  RngStream stream = RngStream::root(seed).derive(rng_slot::kSplit);
  for (size_t i = n; i > 1; --i) {
    size_t j = static_cast<size_t>(stream.next_below(i));
    std::swap(perm[i - 1], perm[j]);
  }

  std::vector<std::vector<size_t>> out(3);
  out[0].assign(perm.begin(), perm.begin() + counts.n_train);
  out[1].assign(perm.begin() + counts.n_train, perm.begin() + counts.n_train + counts.n_val);
  out[2].assign(perm.begin() + counts.n_train + counts.n_val, perm.end());
  return out;
}

DatasetSplit split_dataset(std::vector<Sample> samples, SplitCounts counts, uint64_t seed) {
  auto idx = split_indices(samples.size(), counts, seed);
  DatasetSplit split;
  auto take = [&](const std::vector<size_t>& ix) {
    std::vector<Sample> part;
    part.reserve(ix.size());
    for (size_t i : ix) part.push_back(samples[i]);
    return part;
  };
  split.train = take(idx[0]);
  split.validation = take(idx[1]);
  split.test = take(idx[2]);
  return split;
}

namespace {

std::vector<Batch> assemble(const std::vector<Sample>& samples,
                            const std::vector<size_t>& order, size_t batch_size,
                            const AugmentConfig* aug, uint64_t seed, uint64_t epoch) {
  int h = samples.front().image.extent(0);
  int w = samples.front().image.extent(1);
  std::vector<Batch> batches;
  for (size_t start = 0; start < order.size(); start += batch_size) {
    size_t n = std::min(batch_size, order.size() - start);
    Batch b{Tensor<float>({static_cast<int>(n), h, w, 1}),
            Tensor<float>({static_cast<int>(n)})};
#pragma omp parallel for schedule(dynamic)
    for (long k = 0; k < static_cast<long>(n); ++k) {
      const Sample& s = samples[order[start + k]];
      Tensor<float> img = s.image;
      if (aug) {
        RngStream stream = RngStream::root(seed)
                               .derive(rng_slot::kAugment)
                               .derive(epoch)
                               .derive(order[start + k]);
        img = augment(img, *aug, stream);
      }
      img = standardize(img);
      std::copy(img.data(), img.data() + img.size(),
                b.images.data() + static_cast<size_t>(k) * img.size());
      b.labels.data()[k] = static_cast<float>(s.label);
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

}  // namespace

std::vector<Batch> make_train_batches(const std::vector<Sample>& samples, size_t batch_size,
                                      uint64_t seed, uint64_t epoch,
                                      const AugmentConfig* aug) {
  if (samples.empty()) throw std::invalid_argument("make_train_batches: empty sample set");
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");

  std::vector<size_t> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  RngStream stream = RngStream::root(seed).derive(rng_slot::kShuffle).derive(epoch);
  for (size_t i = order.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(stream.next_below(i));
    std::swap(order[i - 1], order[j]);
  }
  return assemble(samples, order, batch_size, aug, seed, epoch);
}

std::vector<Batch> make_eval_batches(const std::vector<Sample>& samples, size_t batch_size) {
  if (samples.empty()) throw std::invalid_argument("make_eval_batches: empty sample set");
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  std::vector<size_t> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  return assemble(samples, order, batch_size, nullptr, 0, 0);
}

}  // namespace scfn
