#pragma once

#include <stdexcept>
#include <string>

namespace passtax {

enum class SolveErrorCode {
  CapExceeded,      // transient set larger than the configured dense cap
  AbsorbingSubset,  // (I - Q) singular: a closed set with no leakage
  NonConverged,     // iteration budget exhausted
  RedoOverflow,     // component redo loop exceeded its bound
};

inline const char* to_string(SolveErrorCode code) {
  switch (code) {
    case SolveErrorCode::CapExceeded: return "CAP_EXCEEDED";
    case SolveErrorCode::AbsorbingSubset: return "ABSORBING_SUBSET";
    case SolveErrorCode::NonConverged: return "NON_CONVERGED";
    case SolveErrorCode::RedoOverflow: return "REDO_OVERFLOW";
  }
  return "UNKNOWN";
}

class SolveError : public std::runtime_error {
 public:
  SolveError(SolveErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  SolveErrorCode code() const { return code_; }

 private:
  SolveErrorCode code_;
};

/// Malformed input file, bad header, unparsable field.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace passtax
