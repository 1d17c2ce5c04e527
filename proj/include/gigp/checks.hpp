#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gigp/grad_check.hpp"

namespace gigp::checks {

// finite-difference verification of every tape primitive
nn::GradCheckReport grad_check_primitives(double tol = 1e-4);

// end-to-end model loss differentiated with respect to the pooling layer's
// parameters: w, alpha, C, the orbit network, and the anchors as inputs
nn::GradCheckReport grad_check_gigp_end_to_end(double tol = 1e-4);

struct ExpressivitySweep {
  std::size_t domains = 0;
  std::size_t functions = 0;
  std::size_t assignments = 0;
  std::size_t classes = 0;
  std::size_t collisions = 0;
  std::size_t failures = 0;
  std::vector<std::string> failure_lines;
  bool pass() const { return failures == 0 && collisions == 0; }
};

// verify_expressivity over every orbit partition with |X| <= max_elems,
// |F| <= max_values and at most max_orbits orbits, with structured plus
// randomly tabulated invariant functions per domain
ExpressivitySweep expressivity_sweep(std::size_t max_elems,
                                     std::size_t max_values,
                                     std::size_t max_orbits,
                                     std::size_t random_per_domain,
                                     std::uint64_t seed);

}  // namespace gigp::checks
