#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace posenorm {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  // z-component of the 3-d cross product; positive is a clockwise turn in
  // y-down image coordinates.
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateBody : Error {
  using Error::Error;
};
struct ZeroVector : Error {
  using Error::Error;
};
struct ShapeMismatch : Error {
  using Error::Error;
};
struct ParseError : Error {
  size_t byte_offset = 0;
  ParseError(const std::string& msg, size_t offset)
      : Error(msg + " (byte " + std::to_string(offset) + ")"), byte_offset(offset) {}
  explicit ParseError(const std::string& msg) : Error(msg) {}
};
struct SchemaMismatch : Error {
  using Error::Error;
};
struct EmptyEval : Error {
  using Error::Error;
};
struct TooFewPoints : Error {
  using Error::Error;
};
struct DivergenceDetected : Error {
  using Error::Error;
};
struct CanvasTooSmall : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

constexpr double kPi = 3.14159265358979323846;

}  // namespace posenorm
