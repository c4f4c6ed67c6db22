#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "linsys/kernel.hpp"
#include "linsys/theory.hpp"

namespace linsys::cli {

struct IdentityCheck {
  std::string name;
  bool skipped = false;
  bool passed = false;
  double residual = 0.0;
  double tolerance = 0.0;
  std::string note;
};

struct IdentityOptions {
  /// Test mode: perturbs beta_{0,0} in the closed form of the U term.
  bool corrupt_beta = false;
  std::uint64_t seed = 1;
  int random_instances = 20;
  GreenOptions green;
};

std::vector<IdentityCheck> run_identities(const KernelDistribution& dist, const IdentityOptions& options = {});

/// "PASS name  max residual r (tol t)" lines; returns true if nothing failed.
bool print_identities(std::ostream& os, const std::vector<IdentityCheck>& checks);

}  // namespace linsys::cli
