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

#include <functional>
#include <vector>

#include "ndprop/crisp.hpp"
#include "ndprop/rng.hpp"

namespace ndprop {

/// Decision-propagation state: true, false, and undecided atom sets.
/// u = universe \ (t | f) at every observable point; t and f only grow.
struct CrispState {
    Interpretation t, f, u;
    std::size_t k = 0;
};

/// Produces a non-empty subset of the undecided atoms to falsify next.
using DecisionPolicy =
    std::function<Interpretation(const CrispState&, const GroundProgram&, Rng&)>;

enum class RunStatus { Success, Contradiction };

struct RunOutcome {
    RunStatus status = RunStatus::Contradiction;
    Interpretation model; // final true set; a stable model when status == Success
    std::size_t iterations = 0;
    std::vector<Interpretation> decisions;
};

/// t = consequences derivable with every negative body blocked (only
/// negation-free derivations fire), f empty, u the rest.
CrispState init_state(const GroundProgram& p);

/// One decision + propagation round. The policy picks E, f grows by E,
/// t is re-propagated with the enlarged false set held fixed.
CrispState dprop_step(const GroundProgram& p, const CrispState& state,
                      const DecisionPolicy& policy, Rng& rng);

/// Runs rounds until no atom is undecided. Success iff t and f stay
/// disjoint; the contradiction check runs after every propagation since
/// both sets only grow. max_iters must be at least the atom count.
RunOutcome dprop_run(const GroundProgram& p, const DecisionPolicy& policy, Rng& rng,
                     std::size_t max_iters);
RunOutcome dprop_run(const GroundProgram& p, const DecisionPolicy& policy, Rng& rng);

/// Uniform random decisions. With singleton=true (the default, used by
/// restart solving) one undecided atom is drawn per round; otherwise a
/// uniformly random non-empty subset of the undecided atoms is taken.
DecisionPolicy random_policy(bool singleton = true);

/// Falsifies one atom outside `target` per round; throws GuidanceExhausted
/// if no such atom remains while undecided atoms exist (impossible when
/// target is a stable model; kept as a test hook).
DecisionPolicy guided_policy(Interpretation target);

struct SolveStats {
    std::size_t runs_attempted = 0;
    std::size_t decisions_total = 0;
};

/// Restart-based solving: up to `restarts` independent runs with random
/// singleton decisions, each run seeded from a split of `rng` so the whole
/// loop is reproducible from one seed. Returns the first success, else the
/// last contradiction. max_iters = 0 selects the atom count.
RunOutcome rdprop_solve(const GroundProgram& p, std::size_t restarts, Rng& rng,
                        SolveStats* stats = nullptr, std::size_t max_iters = 0);

} // namespace ndprop
