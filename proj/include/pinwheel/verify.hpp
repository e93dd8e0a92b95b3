#pragma once

// Invariant suite shared by the `verify` subcommand and the acceptance
// binary. Every check compares the library against an independent
// computation: plain C^2 arithmetic, a Cartesian 4-D grid, finite
// differences, or the serial kernels.

#include <functional>
#include <string>
#include <vector>

namespace pinwheel {

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct VerifyOptions {
  int n_r = 192;
  int n_phi = 32;
  /// Cartesian nodes per axis of the 4-D oracle grid.
  int full_n = 40;
  unsigned seed = 12345;
  std::function<void(const Check&)> on_check;
};

std::vector<Check> verify_suite(const VerifyOptions& opts = {});

}  // namespace pinwheel
