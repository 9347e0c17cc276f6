#pragma once

#include <stdexcept>
#include <string>

namespace racer {

/// Caller passed something malformed: NaNs, bad ranges, wrong sizes.
struct InvalidInput : std::invalid_argument {
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Not enough data to run the operation (too few points, empty map, ...).
struct InsufficientData : std::runtime_error {
  explicit InsufficientData(const std::string& what) : std::runtime_error(what) {}
};

/// The math degenerated: singular system, collinear sample, rank-deficient
/// registration, point at infinity. Callers typically fall back.
struct DegenerateError : std::runtime_error {
  explicit DegenerateError(const std::string& what) : std::runtime_error(what) {}
};

/// Index or parameter outside its valid range.
struct OutOfRange : std::out_of_range {
  explicit OutOfRange(const std::string& what) : std::out_of_range(what) {}
};

/// No usable pose source left (odometry degenerate and GPS absent).
struct LocalizationLost : std::runtime_error {
  explicit LocalizationLost(const std::string& what) : std::runtime_error(what) {}
};

/// File could not be read/written or fails format validation.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace racer
