// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#pragma once

#include "ndprop/interpretation.hpp"
#include "ndprop/program.hpp"

namespace ndprop {

/// One application of the immediate consequence operator with respect to j:
/// heads of rules whose positive body lies inside i and whose negative body
/// avoids j. Inputs are not modified.
Interpretation immediate_consequence(const GroundProgram& p, const Interpretation& j,
                                     const Interpretation& i);

/// Iterates immediate_consequence from i0 until the set stops changing.
/// From the empty seed the sequence is monotone and the least fixpoint is
/// computed with a worklist in O(rules + body literals). From arbitrary
/// seeds the sequence may revisit sets; iteration stops at the first repeat.
Interpretation least_fixpoint(const GroundProgram& p, const Interpretation& j,
                              const Interpretation& i0);

/// S is a stable model iff it reproduces itself: S = C^inf_{P,S}(empty).
bool is_stable(const GroundProgram& p, const Interpretation& s);

constexpr std::size_t kDefaultOracleCap = 20;

/// Brute-force ground-truth oracle: tests every subset of the atom universe
/// and returns the stable models in ascending bitmask order. Throws
/// OracleScaleError when the universe exceeds atom_cap.
std::vector<Interpretation> enumerate_stable_models(const GroundProgram& p,
                                                    std::size_t atom_cap = kDefaultOracleCap);

} // namespace ndprop
