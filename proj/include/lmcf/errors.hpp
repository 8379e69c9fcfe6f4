#pragma once

#include <stdexcept>
#include <string>

namespace lmcf {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define LMCF_DECLARE_ERROR(Name)                                  \
  class Name : public Error {                                     \
   public:                                                        \
    using Error::Error;                                           \
    const char* kind() const noexcept override { return #Name; }  \
  };

// Geometry / chart
LMCF_DECLARE_ERROR(ChartExit)
LMCF_DECLARE_ERROR(DegenerateMetric)
LMCF_DECLARE_ERROR(InvalidImmersion)

// Flow
LMCF_DECLARE_ERROR(DefectBlowup)

// Lagrangian angle / deformations
LMCF_DECLARE_ERROR(NotClosed)
LMCF_DECLARE_ERROR(NotMinimal)

// Spectral
LMCF_DECLARE_ERROR(NoConvergence)
LMCF_DECLARE_ERROR(ClusterAmbiguous)
LMCF_DECLARE_ERROR(SpectrumTruncation)

// Monitors
LMCF_DECLARE_ERROR(WindowTooShort)
LMCF_DECLARE_ERROR(ScaleViolation)

// Scenario files
LMCF_DECLARE_ERROR(ParseError)
LMCF_DECLARE_ERROR(ValidationError)

#undef LMCF_DECLARE_ERROR

}  // namespace lmcf
