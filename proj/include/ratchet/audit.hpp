#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace ratchet {

/// Tolerances of the artifact audit.
struct AuditTolerances {
  double obstacle = 1e-7;      ///< sign, growth and monotonicity of w per slice
  double habit = 1e-6;         ///< adjacent-slice monotonicity and the habit slope bound
  double convexity = 1e-7;     ///< u_zz - u_z from the dual samples
  double policy = 1e-10;       ///< consumption band, stock sign and value bounds, relative to 1 + |value|
  double probability = 0.01;   ///< largest excluded fraction of simulated paths
};

struct AuditLine {
  std::string name;
  double violation = 0.0;  ///< largest violation found; <= tolerance passes
  double tolerance = 0.0;
  bool hard = true;        ///< informational lines never fail the audit
  bool pass = true;
};

struct AuditReport {
  std::vector<AuditLine> lines;
  bool passed() const;
  /// One line per invariant: status, name, max violation, tolerance.
  std::string text() const;
  nlohmann::json to_json() const;
};

/// Re-checks every module's invariants against the files of an artifact directory.
/// Throws DataError when a required artifact is missing or unreadable.
AuditReport audit_artifacts(const std::string& dir, const AuditTolerances& tol = {});

}  // namespace ratchet
