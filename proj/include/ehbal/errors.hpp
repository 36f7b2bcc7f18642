#pragma once

#include <stdexcept>

namespace ehbal {

/// An iterative scheme exhausted its budget before meeting tolerance.
class convergence_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A denominator came too close to zero to report a trustworthy value.
class singularity_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ehbal
