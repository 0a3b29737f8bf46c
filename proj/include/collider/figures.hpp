#pragma once

// Reference causal graphs: confounding (1A), collider (1B), M-structure (1C),
// and the sodium / blood pressure graph with its proteinuria collider.

#include "collider/dag.hpp"

namespace collider::figures {

inline Dag confounding() { return build_dag({"W", "A", "Y"}, {{"W", "A"}, {"W", "Y"}, {"A", "Y"}}); }

inline Dag collider() { return build_dag({"A", "C", "Y"}, {{"A", "C"}, {"Y", "C"}, {"A", "Y"}}); }

inline Dag m_bias() {
  return build_dag({"W1", "W2", "A", "C", "Y"},
                   {{"W1", "A"}, {"W1", "C"}, {"W2", "C"}, {"W2", "Y"}, {"A", "Y"}});
}

inline Dag sodium() {
  return build_dag({"AGE", "SOD", "SBP", "PRO"},
                   {{"AGE", "SOD"}, {"AGE", "SBP"}, {"SOD", "SBP"}, {"SOD", "PRO"}, {"SBP", "PRO"}});
}

}  // namespace collider::figures
