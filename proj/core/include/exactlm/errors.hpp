#pragma once

#include <stdexcept>
#include <string>

namespace exactlm {

// Malformed user input: unknown symbols, bad files, out-of-range parameters.
// The CLI maps this to exit code 2.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A numerical guarantee could not be certified: divergent series, non-tight
// adapted model, cross-check mismatch. The CLI maps this to exit code 3.
struct CertificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A truncation rule emptied a step distribution.
struct DegenerateAdaptorError : CertificationError {
  using CertificationError::CertificationError;
};

// Autoregressive sampling hit the hard length cap before EOS.
struct CappedSampleError : CertificationError {
  using CertificationError::CertificationError;
};

}  // namespace exactlm
