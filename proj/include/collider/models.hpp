#pragma once

// Reference data-generating mechanisms: a confounder triangle, a collider
// triangle, and the sodium / blood pressure / proteinuria model whose
// coefficients the Monte Carlo tools vary.

#include <string>

#include "collider/sem.hpp"

namespace collider::models {

namespace names {
inline const std::string kAge = "Age_years";
inline const std::string kSodium = "Sodium_gr";
inline const std::string kSbp = "sbp_in_mmHg";
inline const std::string kHypertension = "hypertension";
inline const std::string kProteinuria = "Proteinuria_in_mg";
}  // namespace names

/// W -> A, W -> Y, A -> Y with standard normal errors.
inline SemSpec confounder_spec() {
  return {{
              {"W", 0.0, {}, {0.0, 1.0}},
              {"A", 0.0, {{"W", 0.5}}, {0.0, 1.0}},
              {"Y", 0.0, {{"A", 0.3}, {"W", 0.4}}, {0.0, 1.0}},
          },
          {}};
}

/// A -> Y, A -> C, Y -> C with standard normal errors.
inline SemSpec collider_spec() {
  return {{
              {"A", 0.0, {}, {0.0, 1.0}},
              {"Y", 0.0, {{"A", 0.3}}, {0.0, 1.0}},
              {"C", 0.0, {{"A", 1.2}, {"Y", 0.9}}, {0.0, 1.0}},
          },
          {}};
}

struct SodiumCoefficients {
  double sodium_on_sbp = 1.05;        // true effect
  double age_on_sbp = 2.00;
  double sodium_on_proteinuria = 2.80;
  double sbp_on_proteinuria = 2.00;
};

/// Age ~ N(65, 5); sodium = age/18 + e; SBP = b1*sodium + b2*age + e;
/// proteinuria = a2*SBP + a1*sodium + e; hypertension = 1{SBP > 140}.
inline SemSpec sodium_spec(const SodiumCoefficients& c = {}) {
  using namespace names;
  return {{
              {kAge, 0.0, {}, {65.0, 5.0}},
              {kSodium, 0.0, {{kAge, 1.0 / 18.0}}, {0.0, 1.0}},
              {kSbp, 0.0, {{kSodium, c.sodium_on_sbp}, {kAge, c.age_on_sbp}}, {0.0, 1.0}},
              {kProteinuria, 0.0, {{kSbp, c.sbp_on_proteinuria}, {kSodium, c.sodium_on_proteinuria}}, {0.0, 1.0}},
          },
          {{kHypertension, kSbp, 140.0, Comparison::Greater}}};
}

}  // namespace collider::models
