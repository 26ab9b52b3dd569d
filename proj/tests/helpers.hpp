#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <random>
#include <string>
#include <unistd.h>

#include "lbto/fields.hpp"
#include "lbto/types.hpp"

namespace lbto::test {

inline Box unit_box(int dims = 3) {
  Box b;
  b.dims = dims;
  b.lo = {0, 0, 0};
  b.hi = {1, 1, dims == 3 ? 1.0 : 0.0};
  return b;
}

inline TimeField constant_field(const Vec& v, double dt, const Box& domain) {
  LinearParams p;
  p.offset = v;
  return TimeField::linear(p, dt, domain);
}

inline Vec random_point(std::mt19937_64& rng, const Box& box) {
  Vec p{0, 0, 0};
  for (int a = 0; a < box.dims; ++a) p[a] = std::uniform_real_distribution<double>(box.lo[a], box.hi[a])(rng);
  return p;
}

// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("lbto_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

// Relative path -> contents for every regular file under dir.
inline std::map<std::string, std::string> tree_contents(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[std::filesystem::relative(e.path(), dir).generic_string()] = ss.str();
  }
  return out;
}

}  // namespace lbto::test
