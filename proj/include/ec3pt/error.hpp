#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ec3pt {

// Base class of every error raised by the library. The CLI maps these to exit
// code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define EC3PT_DEFINE_ERROR(Name)          \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

EC3PT_DEFINE_ERROR(InvalidArgument);
EC3PT_DEFINE_ERROR(InfeasibleRequest);
EC3PT_DEFINE_ERROR(UnsatisfiableEnsemble);
EC3PT_DEFINE_ERROR(DimensionError);
EC3PT_DEFINE_ERROR(NoContradictingClause);
EC3PT_DEFINE_ERROR(UntrimmedDegeneracy);
EC3PT_DEFINE_ERROR(NoSolution);
EC3PT_DEFINE_ERROR(TrackingFailure);
EC3PT_DEFINE_ERROR(UnderflowAtScale);
EC3PT_DEFINE_ERROR(FitError);
EC3PT_DEFINE_ERROR(RangeTooLarge);

#undef EC3PT_DEFINE_ERROR

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Raised by the eigensolver; carries the residual norms of the last iterate.
class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, std::vector<double> residuals)
      : Error(what), residuals_(std::move(residuals)) {}

  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

}  // namespace ec3pt
