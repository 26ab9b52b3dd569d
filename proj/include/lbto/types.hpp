#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lbto {

// Positions and velocities. 2D data keeps the third component at zero so the
// same arithmetic serves both dimensionalities.
using Vec = std::array<double, 3>;
using Index3 = std::array<int, 3>;

inline Vec operator+(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec operator-(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec operator*(double s, const Vec& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }
inline double distance(const Vec& a, const Vec& b) { return norm(a - b); }

enum class ErrorCode {
  PositionOutOfDomain,
  CycleUnavailable,
  InvalidLayout,
  EmptyBlock,
  DegenerateInput,
  UnfillableHole,
  NonpositiveCell,
  LengthMismatch,
  Empty,
  NoCommonSamples,
  DegenerateFit,
  ParseError,
  ValidationError,
  BadMagic,
  VersionMismatch,
  TruncatedFile,
  IoError,
  InvalidArgument,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Axis-aligned box. Axes at or beyond `dims` are ignored.
struct Box {
  Vec lo{0, 0, 0};
  Vec hi{0, 0, 0};
  int dims = 3;

  bool contains(const Vec& x) const {
    for (int a = 0; a < dims; ++a)
      if (!(x[a] >= lo[a] && x[a] <= hi[a])) return false;
    return true;
  }
  double extent(int axis) const { return hi[axis] - lo[axis]; }
  bool valid() const {
    if (dims != 2 && dims != 3) return false;
    for (int a = 0; a < dims; ++a)
      if (!(lo[a] < hi[a])) return false;
    return true;
  }
};

/// Trajectory stitched from successive intervals, sampled at interval boundaries.
struct Pathline {
  enum class Status : std::uint8_t { Complete, TruncatedOutOfHull, TruncatedOutOfDomain };
  struct Sample {
    double time;
    Vec pos;
  };

  Vec seed{};
  std::vector<Sample> samples;
  Status status = Status::Complete;
};

const char* to_string(Pathline::Status status);

}  // namespace lbto
