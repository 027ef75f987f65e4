#include "scfn/pgm.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace scfn {

namespace {

// Reads one header token, skipping whitespace and '#' comment lines.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

size_t parse_dim(const std::string& tok, const std::string& path, const char* what) {
  size_t v = 0;
  for (char ch : tok) {
    if (!std::isdigit(static_cast<unsigned char>(ch)))
      throw std::runtime_error(path + ": malformed " + what + " in PGM header");
    v = v * 10 + static_cast<size_t>(ch - '0');
    if (v > 1u << 20) throw std::runtime_error(path + ": implausible " + what);
  }
  if (tok.empty() || v == 0) throw std::runtime_error(path + ": malformed " + std::string(what));
  return v;
}

}  // namespace

Tensor<float> read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);

  std::string magic = next_token(in);
  if (magic != "P5")
    throw std::runtime_error(path + ": unsupported image format \"" + magic +
                             "\" (only binary PGM, P5)");
  size_t w = parse_dim(next_token(in), path, "width");
  size_t h = parse_dim(next_token(in), path, "height");
  size_t maxval = parse_dim(next_token(in), path, "maxval");
  if (maxval > 255)
    throw std::runtime_error(path + ": 16-bit PGM (maxval " + std::to_string(maxval) +
                             ") is not supported");

  std::vector<char> raw(h * w);
  in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (static_cast<size_t>(in.gcount()) != raw.size())
    throw std::runtime_error(path + ": truncated pixel data");

  Tensor<float> img({static_cast<int>(h), static_cast<int>(w), 1});
  float scale = 1.0f / static_cast<float>(maxval);
  for (size_t i = 0; i < raw.size(); ++i)
    img.data()[i] = static_cast<float>(static_cast<uint8_t>(raw[i])) * scale;
  return img;
}

void write_pgm(const std::string& path, const std::vector<uint8_t>& pixels, size_t h,
               size_t w) {
  if (pixels.size() != h * w)
    throw std::invalid_argument("write_pgm: pixel count does not match dimensions");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "P5\n" << w << " " << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

Tensor<float> resize_bilinear(const Tensor<float>& img, int out_h, int out_w) {
  if (img.rank() != 3 || img.extent(2) != 1)
    throw std::invalid_argument("resize_bilinear: expected [h,w,1]");
  if (out_h < 1 || out_w < 1)
    throw std::invalid_argument("resize_bilinear: output extents must be positive");
  int ih = img.extent(0), iw = img.extent(1);
  if (ih == out_h && iw == out_w) return img;

  Tensor<float> out({out_h, out_w, 1});
  double sy = static_cast<double>(ih) / static_cast<double>(out_h);
  double sx = static_cast<double>(iw) / static_cast<double>(out_w);
  for (int oy = 0; oy < out_h; ++oy) {
    double fy = (static_cast<double>(oy) + 0.5) * sy - 0.5;
    fy = std::min(std::max(fy, 0.0), static_cast<double>(ih - 1));
    int y0 = static_cast<int>(fy);
    int y1 = std::min(y0 + 1, ih - 1);
    double ty = fy - static_cast<double>(y0);
    for (int ox = 0; ox < out_w; ++ox) {
      double fx = (static_cast<double>(ox) + 0.5) * sx - 0.5;
      fx = std::min(std::max(fx, 0.0), static_cast<double>(iw - 1));
      int x0 = static_cast<int>(fx);
      int x1 = std::min(x0 + 1, iw - 1);
      double tx = fx - static_cast<double>(x0);
      double top = img(y0, x0, 0) + tx * (img(y0, x1, 0) - img(y0, x0, 0));
      double bot = img(y1, x0, 0) + tx * (img(y1, x1, 0) - img(y1, x0, 0));
      out(oy, ox, 0) = static_cast<float>(top + ty * (bot - top));
    }
  }
  return out;
}

Tensor<float> load_image(const std::string& path, int out_h, int out_w) {
  return resize_bilinear(read_pgm(path), out_h, out_w);
}

}  // namespace scfn
