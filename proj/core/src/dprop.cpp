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

#include "ndprop/dprop.hpp"

#include <stdexcept>

namespace ndprop {

CrispState init_state(const GroundProgram& p) {
    const std::size_t n = p.atom_count();
    CrispState s;
    s.t = least_fixpoint(p, Interpretation::full(n), Interpretation(n));
    s.f = Interpretation(n);
    s.u = s.t.united(s.f).complement();
    s.k = 0;
    return s;
}

CrispState dprop_step(const GroundProgram& p, const CrispState& state,
                      const DecisionPolicy& policy, Rng& rng) {
    Interpretation e = policy(state, p, rng);
    if (e.empty() || !e.subset_of(state.u))
        throw std::logic_error("decision policy returned an invalid set");
    CrispState next;
    next.f = state.f.united(e);
    next.t = least_fixpoint(p, next.f.complement(), state.t);
    next.u = state.u.minus(next.t.united(next.f));
    next.k = state.k + 1;
    return next;
}

RunOutcome dprop_run(const GroundProgram& p, const DecisionPolicy& policy, Rng& rng,
                     std::size_t max_iters) {
    if (max_iters < p.atom_count())
        throw std::invalid_argument("max_iters below atom count");
    RunOutcome out;
    CrispState state = init_state(p);
    while (!state.u.empty()) {
        if (state.k >= max_iters)
            throw std::logic_error("decision budget exhausted with undecided atoms");
        CrispState next = dprop_step(p, state, policy, rng);
        out.decisions.push_back(next.f.minus(state.f));
        state = std::move(next);
        if (state.t.intersects(state.f)) {
            out.status = RunStatus::Contradiction;
            out.model = state.t;
            out.iterations = state.k;
            return out;
        }
    }
    out.status = state.t.intersects(state.f) ? RunStatus::Contradiction : RunStatus::Success;
    out.model = state.t;
    out.iterations = state.k;
    return out;
}

RunOutcome dprop_run(const GroundProgram& p, const DecisionPolicy& policy, Rng& rng) {
    return dprop_run(p, policy, rng, p.atom_count());
}

DecisionPolicy random_policy(bool singleton) {
    return [singleton](const CrispState& state, const GroundProgram&,
                       Rng& rng) -> Interpretation {
        const std::vector<std::size_t> undecided = state.u.to_indices();
        Interpretation e(state.u.universe_size());
        if (singleton) {
            e.insert(undecided[rng.uniform_index(undecided.size())]);
            return e;
        }
        for (auto a : undecided)
            if (rng.bernoulli(0.5)) e.insert(a);
        if (e.empty()) e.insert(undecided[rng.uniform_index(undecided.size())]);
        return e;
    };
}

DecisionPolicy guided_policy(Interpretation target) {
    return [target = std::move(target)](const CrispState& state, const GroundProgram&,
                                        Rng&) -> Interpretation {
        const Interpretation candidates = state.u.minus(target);
        if (candidates.empty()) throw GuidanceExhausted();
        Interpretation e(state.u.universe_size());
        bool done = false;
        candidates.for_each([&](std::size_t a) {
            if (!done) {
                e.insert(a);
                done = true;
            }
        });
        return e;
    };
}

RunOutcome rdprop_solve(const GroundProgram& p, std::size_t restarts, Rng& rng,
                        SolveStats* stats, std::size_t max_iters) {
    if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
    if (max_iters == 0) max_iters = p.atom_count();
    RunOutcome last;
    const DecisionPolicy policy = random_policy();
    for (std::size_t attempt = 0; attempt < restarts; ++attempt) {
        Rng run_rng = rng.split(attempt);
        last = dprop_run(p, policy, run_rng, max_iters);
        if (stats) {
            ++stats->runs_attempted;
            stats->decisions_total += last.decisions.size();
        }
        if (last.status == RunStatus::Success) return last;
    }
    return last;
}

} // namespace ndprop
