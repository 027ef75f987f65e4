#include "scfn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "scfn/pgm.hpp"

namespace fs = std::filesystem;

namespace scfn {

namespace {

constexpr int kSide = 128;

Tensor<float> base_canvas(RngStream& s) {
  double brightness = 0.3 + 0.4 * s.next_uniform();
  return Tensor<float>({kSide, kSide, 1}, static_cast<float>(brightness));
}

void add_noise_and_clamp(Tensor<float>& img, RngStream& s) {
  for (size_t i = 0; i < img.size(); ++i) {
    double v = img.data()[i] + s.next_normal(0.0, 0.03);
    img.data()[i] = static_cast<float>(std::min(std::max(v, 0.0), 1.0));
  }
}

}  // namespace

Tensor<float> render_blob_image(RngStream stream) {
  Tensor<float> img = base_canvas(stream);
  size_t count = 3 + static_cast<size_t>(stream.next_uniform() * 4.0);  // 3..6
  for (size_t b = 0; b < count; ++b) {
    double cx = stream.next_uniform() * (kSide - 1);
    double cy = stream.next_uniform() * (kSide - 1);
    double radius = 10.0 + stream.next_uniform() * 14.0;
    double sign = stream.next_uniform() < 0.5 ? -1.0 : 1.0;
    double amp = sign * (0.18 + stream.next_uniform() * 0.22);
    double reach = radius + 12.0;  // soft edge tail
    int x0 = static_cast<int>(std::max(0.0, cx - reach));
    int x1 = static_cast<int>(std::min(static_cast<double>(kSide - 1), cx + reach));
    int y0 = static_cast<int>(std::max(0.0, cy - reach));
    int y1 = static_cast<int>(std::min(static_cast<double>(kSide - 1), cy + reach));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        double d = std::hypot(static_cast<double>(x) - cx, static_cast<double>(y) - cy);
        img(y, x, 0) += static_cast<float>(amp / (1.0 + std::exp((d - radius) / 2.5)));
      }
    }
  }
  add_noise_and_clamp(img, stream);
  return img;
}

Tensor<float> render_streak_image(RngStream stream) {
  Tensor<float> img = base_canvas(stream);
  size_t count = 26 + static_cast<size_t>(stream.next_uniform() * 15.0);  // 26..40
  for (size_t r = 0; r < count; ++r) {
    double cx = stream.next_uniform() * (kSide - 1);
    double cy = stream.next_uniform() * (kSide - 1);
    double phi = stream.next_uniform() * M_PI;
    double half_len = 12.0 + stream.next_uniform() * 18.0;
    double sigma = 0.9 + stream.next_uniform() * 0.8;
    double sign = stream.next_uniform() < 0.5 ? -1.0 : 1.0;
    double amp = sign * (0.15 + stream.next_uniform() * 0.2);

    double ax = std::cos(phi), ay = std::sin(phi);
    double pad_along = half_len + 8.0, pad_across = 4.0 * sigma + 1.0;
    double ex = std::abs(ax) * pad_along + std::abs(ay) * pad_across;
    double ey = std::abs(ay) * pad_along + std::abs(ax) * pad_across;
    int x0 = static_cast<int>(std::max(0.0, cx - ex));
    int x1 = static_cast<int>(std::min(static_cast<double>(kSide - 1), cx + ex));
    int y0 = static_cast<int>(std::max(0.0, cy - ey));
    int y1 = static_cast<int>(std::min(static_cast<double>(kSide - 1), cy + ey));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        double dx = static_cast<double>(x) - cx, dy = static_cast<double>(y) - cy;
        double along = dx * ax + dy * ay;
        double across = -dx * ay + dy * ax;
        double overshoot = std::max(0.0, std::abs(along) - half_len);
        img(y, x, 0) += static_cast<float>(
            amp * std::exp(-(across * across) / (2.0 * sigma * sigma) -
                           (overshoot * overshoot) / 8.0));
      }
    }
  }
  add_noise_and_clamp(img, stream);
  return img;
}

std::string generate_synthetic(size_t n_per_category, uint64_t seed,
                               const std::string& out_dir) {
  if (n_per_category < 1) throw std::invalid_argument("n_per_category must be >= 1");
  const char* names[2] = {"class-a", "class-b"};

  fs::path base(out_dir);
  std::error_code ec;
  fs::create_directories(base / names[0], ec);
  fs::create_directories(base / names[1], ec);
  if (!fs::is_directory(base / names[0]) || !fs::is_directory(base / names[1]))
    throw std::runtime_error("cannot create output directory under " + out_dir);

  RngStream root = RngStream::root(seed).derive(rng_slot::kSynthetic);
  std::vector<std::string> manifest_lines;
  manifest_lines.reserve(2 * n_per_category);

  for (int label = 0; label < 2; ++label) {
    RngStream cat_stream = root.derive(static_cast<uint64_t>(label));
    for (size_t i = 0; i < n_per_category; ++i) {
      RngStream img_stream = cat_stream.derive(i);
      Tensor<float> img =
          label == 0 ? render_blob_image(img_stream) : render_streak_image(img_stream);
      std::vector<uint8_t> bytes(img.size());
      for (size_t k = 0; k < img.size(); ++k)
        bytes[k] = static_cast<uint8_t>(std::lround(img.data()[k] * 255.0f));
      char name[32];
      std::snprintf(name, sizeof(name), "%c_%05zu.pgm", label == 0 ? 'a' : 'b', i);
      fs::path rel = fs::path(names[label]) / name;
      write_pgm((base / rel).string(), bytes, kSide, kSide);
      manifest_lines.push_back(rel.generic_string() + "," + names[label]);
    }
  }

  fs::path manifest_path = base / "manifest.csv";
  std::ofstream manifest(manifest_path);
  if (!manifest) throw std::runtime_error("cannot write manifest: " + manifest_path.string());
  for (const std::string& line : manifest_lines) manifest << line << "\n";
  if (!manifest) throw std::runtime_error("manifest write failed");
  return manifest_path.string();
}

}  // namespace scfn
