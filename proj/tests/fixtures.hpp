#pragma once

#include <cmath>

#include "seqinvest/seqinvest.hpp"

namespace seqinvest::testing {

// f(0,.) = 1, 2, 0, 0, ...; f(1,.) = 0, 3, 2, 2, ...; agents i >= 2 get 0 on
// the diagonal, 2 one row later and 1 afterwards.
inline RewardRule perturbed_f3_rule() {
  return RewardRule::Perturbed(RewardRule::F3(1.0, 0.0), {{1, 2, 1.0}},
                               {{0, 2, -1.0}, {1, 3, 1.0}});
}

inline ConstantTailProfile perturbed_f3_rounded() {
  return ConstantTailProfile({0.0131, 0.3106}, 0.1777);
}

inline double half_sqrt2() { return std::sqrt(2.0) / 2.0; }

}  // namespace seqinvest::testing
