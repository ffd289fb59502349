#pragma once

// Simulation designs: median regression W* = θ1* + θ2* X + u with
// X ~ U(0,1), u ~ U(-1,1), and W* missing with probability p(X)
// independently of W*.

#include <cstddef>

#include "mscan/models.hpp"
#include "mscan/rng.hpp"

namespace mscan {

struct DesignSpec {
  int id = 1;
  double theta1_star = 0.0;
  double theta2_star = 0.0;

  // Design 1: .1;  Design 2: .02 + 2(.98)|x - .5|;  Design 3: .02 + 4(.98)(x - .5)^2.
  double missing_probability(double x) const;
  double min_missing_probability() const;
  // Hölder smoothness of the conditional mean at the contact point
  // (infinity for the flat Design 1). Informational.
  double smoothness() const;
  // Largest θ1 with (θ1, 0) in the identified set: p_min / (1 - p_min).
  double boundary_theta1() const;

  // Throws InvalidInput for an id outside {1, 2, 3}.
  static DesignSpec design(int id);
};

// w_hi = W* (or +inf when missing), w_lo = W* (or -inf).
Dataset simulate_design(const DesignSpec& design, std::size_t n, Engine& rng);

}  // namespace mscan
