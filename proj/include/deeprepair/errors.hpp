#pragma once

#include <stdexcept>
#include <string>

namespace deeprepair {

// File could not be read or parsed.
struct LoadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Data violates an invariant (label range, shape mismatch, ...).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inconsistent or invalid configuration / arguments.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Corruption kind has no native synthesizer; caller must ingest.
struct UnsupportedKindError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Optional style backend cannot run (asset missing).
struct BackendUnavailableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Model produced no failures on the corrupted set; nothing to repair.
struct EmptyFailureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace deeprepair
