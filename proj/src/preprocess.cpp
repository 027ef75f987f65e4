#include "scfn/preprocess.hpp"

#include <cmath>
#include <stdexcept>

namespace scfn {

Tensor<float> standardize(const Tensor<float>& img) {
  if (img.size() == 0) throw std::invalid_argument("standardize: empty image");
  double sum = 0.0;
  for (size_t i = 0; i < img.size(); ++i) sum += img.data()[i];
  double mean = sum / static_cast<double>(img.size());
  double sq = 0.0;
  for (size_t i = 0; i < img.size(); ++i) {
    double d = img.data()[i] - mean;
    sq += d * d;
  }
  double std_dev = std::sqrt(sq / static_cast<double>(img.size()));
  double denom = std::max(std_dev, 1e-7);

  Tensor<float> out(img.shape());
  for (size_t i = 0; i < img.size(); ++i)
    out.data()[i] = static_cast<float>((img.data()[i] - mean) / denom);
  return out;
}

namespace {

float sample_clamped(const Tensor<float>& img, double fy, double fx) {
  int h = img.extent(0), w = img.extent(1);
  fy = std::min(std::max(fy, 0.0), static_cast<double>(h - 1));
  fx = std::min(std::max(fx, 0.0), static_cast<double>(w - 1));
  int y0 = static_cast<int>(fy);
  int x0 = static_cast<int>(fx);
  int y1 = std::min(y0 + 1, h - 1);
  int x1 = std::min(x0 + 1, w - 1);
  double ty = fy - static_cast<double>(y0);
  double tx = fx - static_cast<double>(x0);
  double top = img(y0, x0, 0) + tx * (img(y0, x1, 0) - img(y0, x0, 0));
  double bot = img(y1, x0, 0) + tx * (img(y1, x1, 0) - img(y1, x0, 0));
  return static_cast<float>(top + ty * (bot - top));
}

}  // namespace

Tensor<float> augment(const Tensor<float>& img, const AugmentConfig& cfg, RngStream& rng) {
  if (img.rank() != 3 || img.extent(2) != 1)
    throw std::invalid_argument("augment: expected [h,w,1]");
  int h = img.extent(0), w = img.extent(1);

  // Fixed draw order so a given stream always yields the same transform.
  double u_flip = rng.next_uniform();
  double u_rot = rng.next_uniform();
  double u_dx = rng.next_uniform();
  double u_dy = rng.next_uniform();
  double u_zoom = rng.next_uniform();

  bool flip = u_flip < cfg.hflip_prob;
  double theta = (2.0 * u_rot - 1.0) * cfg.max_rotate_deg * (M_PI / 180.0);
  double dx = (2.0 * u_dx - 1.0) * cfg.max_shift_frac * static_cast<double>(w);
  double dy = (2.0 * u_dy - 1.0) * cfg.max_shift_frac * static_cast<double>(h);
  double zoom = cfg.zoom_min + u_zoom * (cfg.zoom_max - cfg.zoom_min);

  double cx = static_cast<double>(w - 1) / 2.0;
  double cy = static_cast<double>(h - 1) / 2.0;
  double cos_t = std::cos(-theta);
  double sin_t = std::sin(-theta);

  Tensor<float> out({h, w, 1});
  for (int oy = 0; oy < h; ++oy) {
    for (int ox = 0; ox < w; ++ox) {
      // invert zoom, then shift, then rotation, then flip
      double x = cx + (static_cast<double>(ox) - cx) / zoom - dx;
      double y = cy + (static_cast<double>(oy) - cy) / zoom - dy;
      double rx = cx + cos_t * (x - cx) - sin_t * (y - cy);
      double ry = cy + sin_t * (x - cx) + cos_t * (y - cy);
      if (flip) rx = static_cast<double>(w - 1) - rx;
      out(oy, ox, 0) = sample_clamped(img, ry, rx);
    }
  }
  return out;
}

}  // namespace scfn
