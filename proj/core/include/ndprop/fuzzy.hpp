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

#include <span>
#include <string>
#include <vector>

#include "ndprop/crisp.hpp"
#include "ndprop/tnorm.hpp"

namespace ndprop {

/// Paired truth/falsity degree vectors. (0,0) undecided, (1,0) derived
/// truth, (0,1) explicit falsity, (1,1) contradiction. phi never decreases
/// across decision updates.
struct FuzzyState {
    std::vector<double> tau;
    std::vector<double> phi;
    std::size_t t = 0;
};

constexpr double kDefaultConvergenceEps = 1e-6;
constexpr double kDefaultBinaryTol = 1e-3;

/// Default sweep budget: crisp chains need at most n sweeps, the smooth
/// t-norms converge geometrically, so 20n covers both with slack.
inline std::size_t default_max_inner(std::size_t atom_count) {
    return 20 * std::max<std::size_t>(atom_count, 1);
}

/// mu_i = (1 - tau_i) (x) (1 - phi_i): zero exactly when the atom is decided.
std::vector<double> undecided_degree(std::span<const double> tau,
                                     std::span<const double> phi, TNormKind kind);

/// Body support of one rule: t-norm fold over literal values, where a
/// positive literal reads tau and a negated literal reads phi. Empty body
/// folds to 1, so facts fully support their head.
double rule_support(const GroundProgram& p, std::uint32_t rule_id,
                    std::span<const double> tau, std::span<const double> phi,
                    TNormKind kind);

/// Soft immediate consequence operator: per atom, t-conorm fold of the
/// supports of the rules with that head. Atoms with no rules get 0; the
/// input tau enters only through the supports.
std::vector<double> soft_consequence(const GroundProgram& p, std::span<const double> phi,
                                     std::span<const double> tau, TNormKind kind);

struct PropagateResult {
    std::vector<double> tau;
    bool converged = false;
    std::size_t inner_iters = 0;
};

/// Repeated synchronous application of soft_consequence from tau0, stopping
/// when the max-abs change drops below eps or after max_inner sweeps
/// (max_inner = 0 selects the default budget). Non-convergence is reported,
/// never silently truncated.
PropagateResult propagate(const GroundProgram& p, std::span<const double> phi,
                          std::vector<double> tau0, TNormKind kind,
                          double eps = kDefaultConvergenceEps, std::size_t max_inner = 0);

/// Falsity update phi' = phi + mu (*) delta. Decided atoms (mu = 0) are
/// untouched regardless of delta; the result stays in [0,1] and dominates
/// phi pointwise.
std::vector<double> decision_update(std::span<const double> phi,
                                    std::span<const double> mu,
                                    std::span<const double> delta);

/// Membership score p = (tau + 1 - phi) / 2; binary exactly at the decided
/// encodings (1,0) and (0,1).
std::vector<double> membership(std::span<const double> tau, std::span<const double> phi);

enum class CertKind { Stable, NotBinary, NotStable };

struct Certification {
    CertKind kind = CertKind::NotBinary;
    Interpretation model; // populated when kind == Stable
    std::string diagnostic;
};

/// Binary-terminal stability certificate: propagate to convergence, demand
/// every membership score be within binary_tol of 0 or 1, then let the
/// crisp engine have the final word on the rounded set.
Certification certify(const GroundProgram& p, std::vector<double> tau,
                      std::vector<double> phi, TNormKind kind,
                      double binary_tol = kDefaultBinaryTol,
                      double eps = kDefaultConvergenceEps, std::size_t max_inner = 0);

} // namespace ndprop
