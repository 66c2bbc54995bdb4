#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace scenegraph {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

using Vec2 = Vector2<double>;
using Vec3 = Vector3<double>;

/// Row-major dynamic matrix; the storage order used for tensors and checkpoints.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using PlaneId = std::int64_t;

/// Base for all library errors. Maps onto CLI exit code 2 unless noted.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Geometry that cannot support the requested construction (zero-length
/// segments, unpaired room planes, ...).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss/gradients or an unsolvable linear system. CLI exit code 3.
class NumericError : public Error {
 public:
  using Error::Error;
};

enum class Relation { kSameRoom, kSameWall };

inline std::string to_string(Relation r) { return r == Relation::kSameRoom ? "room" : "wall"; }

inline Relation relation_from_string(const std::string& s) {
  if (s == "room" || s == "same_room") return Relation::kSameRoom;
  if (s == "wall" || s == "same_wall") return Relation::kSameWall;
  throw InvalidArgument("unknown relation '" + s + "'");
}

}  // namespace scenegraph
