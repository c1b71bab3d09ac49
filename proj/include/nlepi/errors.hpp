#pragma once

#include <stdexcept>
#include <string>

namespace nlepi {

/// A computation failed for numerical reasons (non-convergence, invariant
/// breach, missing root). Distinct from invalid input, which raises
/// std::invalid_argument.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iteration hit its cap; carries the residual at the last iterate.
class NotConverged : public NumericalError {
 public:
  NotConverged(const std::string& what, double last_residual) : NumericalError(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

class EigenNotConverged : public NotConverged {
 public:
  using NotConverged::NotConverged;
};

}  // namespace nlepi
