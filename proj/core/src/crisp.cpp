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

#include "ndprop/crisp.hpp"

#include <unordered_set>

namespace ndprop {

namespace {

bool rule_fires(const Rule& r, const Interpretation& j, const Interpretation& i) {
    for (auto a : r.pos_body)
        if (!i.contains(a)) return false;
    for (auto a : r.neg_body)
        if (j.contains(a)) return false;
    return true;
}

/// Least model from the empty seed, worklist-style: rules blocked by j are
/// discarded up front, remaining rules count down their unsatisfied positive
/// bodies. When `within` is given, derivation aborts as soon as it leaves
/// that set (the caller then knows the fixpoint cannot equal `within`).
bool least_model_from_empty(const GroundProgram& p, const Interpretation& j,
                            Interpretation& out, const Interpretation* within) {
    const std::size_t n = p.atom_count();
    out = Interpretation(n);

    std::vector<std::uint32_t> need(p.rule_count());
    std::vector<std::uint32_t> queue;
    queue.reserve(n);

    for (std::uint32_t r = 0; r < p.rule_count(); ++r) {
        const Rule& rule = p.rule(r);
        bool blocked = false;
        for (auto a : rule.neg_body)
            if (j.contains(a)) {
                blocked = true;
                break;
            }
        if (blocked) {
            need[r] = ~std::uint32_t{0};
            continue;
        }
        need[r] = static_cast<std::uint32_t>(rule.pos_body.size());
        if (need[r] == 0 && !out.contains(rule.head)) {
            out.insert(rule.head);
            queue.push_back(rule.head);
        }
    }

    while (!queue.empty()) {
        const std::uint32_t a = queue.back();
        queue.pop_back();
        if (within && !within->contains(a)) return false;
        for (auto r : p.rules_with_pos_body(a)) {
            if (need[r] == ~std::uint32_t{0}) continue;
            if (--need[r] == 0) {
                const std::uint32_t h = p.rule(r).head;
                if (!out.contains(h)) {
                    out.insert(h);
                    queue.push_back(h);
                }
            }
        }
    }
    return true;
}

} // namespace

Interpretation immediate_consequence(const GroundProgram& p, const Interpretation& j,
                                     const Interpretation& i) {
    Interpretation out(p.atom_count());
    for (const Rule& r : p.rules())
        if (rule_fires(r, j, i)) out.insert(r.head);
    return out;
}

Interpretation least_fixpoint(const GroundProgram& p, const Interpretation& j,
                              const Interpretation& i0) {
    if (i0.empty()) {
        Interpretation out;
        least_model_from_empty(p, j, out, nullptr);
        return out;
    }
    // General seeds: the sequence need not be monotone, so guard against
    // revisiting a set and stop at the first repeat.
    std::unordered_set<Interpretation, InterpretationHash> seen;
    Interpretation cur = i0;
    seen.insert(cur);
    for (;;) {
        Interpretation next = immediate_consequence(p, j, cur);
        if (next == cur) return cur;
        if (!seen.insert(next).second) return next;
        cur = std::move(next);
    }
}

bool is_stable(const GroundProgram& p, const Interpretation& s) {
    Interpretation fix;
    if (!least_model_from_empty(p, s, fix, &s)) return false;
    return fix == s;
}

std::vector<Interpretation> enumerate_stable_models(const GroundProgram& p,
                                                    std::size_t atom_cap) {
    const std::size_t n = p.atom_count();
    if (n > atom_cap) throw OracleScaleError(n, atom_cap);
    std::vector<Interpretation> models;
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        Interpretation s = Interpretation::from_mask(n, mask);
        if (is_stable(p, s)) models.push_back(std::move(s));
    }
    return models;
}

} // namespace ndprop
