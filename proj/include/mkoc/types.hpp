#ifndef MKOC_TYPES_HPP
#define MKOC_TYPES_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace mkoc {

// Samples are rows. Row-major so sample views are contiguous and the C API
// can map caller buffers without copies.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Error codes mirrored one-to-one by the C API header.
enum class ErrorCode : int {
  InvalidArgument = 1,
  DimensionMismatch = 2,
  DegenerateData = 3,
  SingularSystem = 4,
  EmptyCluster = 5,
  Io = 6,
  Parse = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mkoc

#endif
