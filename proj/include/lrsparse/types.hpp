#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace lrsparse {

using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Observation pattern; true marks a known entry.
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Ascending list of 0-based row or column indices.
using IndexSet = std::vector<Index>;

/// Shape, length or finiteness problem in the data handed to an operation.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Out-of-domain hyperparameter or option (negative threshold, bad grid, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The input is well-formed but carries no information to work with,
/// e.g. a completion problem with no observed entries.
class DegenerateInput : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline void require_finite(const DenseMatrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidInput(std::string(what) + ": non-finite entry");
  }
}

inline void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw InvalidInput(std::string(what) + ": non-finite entry");
  }
}

}  // namespace lrsparse
