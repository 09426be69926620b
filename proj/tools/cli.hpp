#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace welfare::cli {

enum ExitCode : int { kOk = 0, kRuntimeFailure = 1, kConfigError = 2 };

struct VerifyRow {
  std::string group;
  std::string name;
  double lhs;
  double rhs;
  double tolerance;
  bool pass;
};

/// The analytic identity suite behind `welfare verify`: four-point family
/// identities on a lambda x epsilon grid, concave-family properties and the
/// best-constant oracle against brute force. `perturbation` shifts every
/// identity's left-hand side.
std::vector<VerifyRow> verify_suite(const std::vector<double>& lambdas, const std::vector<double>& epsilons,
                                    double perturbation = 0.0);

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace welfare::cli
