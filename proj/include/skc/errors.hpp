#pragma once

#include <stdexcept>
#include <string>

namespace skc {

// Input/validation failures map to CLI exit code 2, computation failures
// (well-formed input, operation not applicable or numerically impossible)
// map to exit code 1.
struct ValidationError : std::invalid_argument {
  explicit ValidationError(const std::string& m) : std::invalid_argument(m) {}
};

struct ComputeError : std::runtime_error {
  explicit ComputeError(const std::string& m) : std::runtime_error(m) {}
};

#define SKC_DEFINE_ERROR(Name, Base) \
  struct Name : Base {               \
    explicit Name(const std::string& m) : Base(m) {} \
  }

SKC_DEFINE_ERROR(DegenerateCorrelation, ValidationError);
SKC_DEFINE_ERROR(NegativeRate, ValidationError);
SKC_DEFINE_ERROR(NonpositiveMu, ValidationError);
SKC_DEFINE_ERROR(LengthMismatch, ValidationError);
SKC_DEFINE_ERROR(SupportTooWide, ValidationError);
SKC_DEFINE_ERROR(GridEmpty, ValidationError);
SKC_DEFINE_ERROR(OrderViolation, ValidationError);
SKC_DEFINE_ERROR(ZeroMarginal, ValidationError);

SKC_DEFINE_ERROR(SaturatedCorrelation, ComputeError);
SKC_DEFINE_ERROR(NotCommutative, ComputeError);
SKC_DEFINE_ERROR(IllConditioned, ComputeError);
SKC_DEFINE_ERROR(UndefinedBeta, ComputeError);
SKC_DEFINE_ERROR(NotDegraded, ComputeError);
SKC_DEFINE_ERROR(PoleAtOne, ComputeError);
SKC_DEFINE_ERROR(DegenerateChannel, ComputeError);
SKC_DEFINE_ERROR(CapacityExceeded, ComputeError);

#undef SKC_DEFINE_ERROR

}  // namespace skc
