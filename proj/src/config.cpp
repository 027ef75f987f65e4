#include "scfn/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>

namespace fs = std::filesystem;

namespace scfn {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const std::string& path, size_t line_no, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

uint64_t parse_u64(const std::string& v, const std::string& path, size_t line_no) {
  uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    fail(path, line_no, "expected a non-negative integer, got \"" + v + "\"");
  return out;
}

double parse_real(const std::string& v, const std::string& path, size_t line_no) {
  try {
    size_t used = 0;
    double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return out;
  } catch (const std::exception&) {
    fail(path, line_no, "expected a number, got \"" + v + "\"");
  }
}

bool parse_flag(const std::string& v, const std::string& path, size_t line_no) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(path, line_no, "expected true/false, got \"" + v + "\"");
}

std::vector<std::string> parse_list(const std::string& v) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= v.size()) {
    size_t comma = v.find(',', start);
    if (comma == std::string::npos) comma = v.size();
    out.push_back(trim(v.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

}  // namespace

void apply_config_file(const std::string& path, TrainConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  fs::path dir = fs::path(path).parent_path();

  std::optional<size_t> n_train, n_val, n_test;
  std::string raw;
  size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;

    size_t eq = line.find('=');
    if (eq == std::string::npos) fail(path, line_no, "expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(path, line_no, "empty key");

    if (key == "epochs") {
      cfg.epochs = parse_u64(value, path, line_no);
      if (cfg.epochs < 1) fail(path, line_no, "epochs must be >= 1");
    } else if (key == "batch_size") {
      cfg.batch_size = parse_u64(value, path, line_no);
      if (cfg.batch_size < 1) fail(path, line_no, "batch_size must be >= 1");
    } else if (key == "alpha") {
      cfg.alpha = static_cast<float>(parse_real(value, path, line_no));
    } else if (key == "beta1") {
      cfg.beta1 = static_cast<float>(parse_real(value, path, line_no));
    } else if (key == "beta2") {
      cfg.beta2 = static_cast<float>(parse_real(value, path, line_no));
    } else if (key == "seed") {
      cfg.seed = parse_u64(value, path, line_no);
    } else if (key == "dataset_root") {
      if (value.empty()) fail(path, line_no, "dataset_root must not be empty");
      fs::path root(value);
      cfg.dataset_root = root.is_absolute() ? root.string() : (dir / root).string();
    } else if (key == "categories") {
      auto list = parse_list(value);
      if (list.size() != 2 || list[0].empty() || list[1].empty())
        fail(path, line_no, "categories needs exactly two comma-separated names");
      cfg.categories = list;
    } else if (key == "n_train") {
      n_train = parse_u64(value, path, line_no);
    } else if (key == "n_val") {
      n_val = parse_u64(value, path, line_no);
    } else if (key == "n_test") {
      n_test = parse_u64(value, path, line_no);
    } else if (key == "deterministic") {
      cfg.deterministic = parse_flag(value, path, line_no);
    } else {
      fail(path, line_no, "unknown key \"" + key + "\"");
    }
  }

  if (n_train || n_val || n_test) {
    if (!(n_train && n_val && n_test))
      throw std::runtime_error(path + ": n_train, n_val and n_test must be given together");
    cfg.split = SplitCounts{*n_train, *n_val, *n_test};
  }
}

}  // namespace scfn
