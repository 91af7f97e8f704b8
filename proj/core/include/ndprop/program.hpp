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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ndprop/errors.hpp"

namespace ndprop {

struct Atom {
    std::uint32_t index = 0;
    std::string name;
};

/// A ground normal rule: head derived from positive body atoms and
/// default-negated body atoms. Bodies are stored as sorted, duplicate-free
/// index vectors.
struct Rule {
    std::uint32_t head = 0;
    std::vector<std::uint32_t> pos_body;
    std::vector<std::uint32_t> neg_body;

    bool operator==(const Rule&) const = default;
};

/// Immutable ground normal logic program over an indexed atom universe.
/// Shared read-only across concurrent solver runs.
class GroundProgram {
public:
    GroundProgram() = default;

    /// Builds the head and positive-occurrence indexes from the rules.
    /// Inputs are trusted; run validate() to audit a hand-built program.
    GroundProgram(std::vector<Atom> atoms, std::vector<Rule> rules);

    /// Test hook: also accepts an explicit heads index so validate()'s
    /// bidirectional check can be exercised against inconsistent data.
    GroundProgram(std::vector<Atom> atoms, std::vector<Rule> rules,
                  std::vector<std::vector<std::uint32_t>> heads_index);

    std::size_t atom_count() const { return atoms_.size(); }
    std::size_t rule_count() const { return rules_.size(); }
    const std::vector<Atom>& atoms() const { return atoms_; }
    const std::vector<Rule>& rules() const { return rules_; }
    const Atom& atom(std::uint32_t i) const { return atoms_[i]; }
    const Rule& rule(std::uint32_t j) const { return rules_[j]; }

    /// Rule ids whose head is the given atom, ascending.
    const std::vector<std::uint32_t>& rules_with_head(std::uint32_t atom) const {
        return heads_index_[atom];
    }

    /// Rule ids in whose positive body the given atom occurs, ascending.
    const std::vector<std::uint32_t>& rules_with_pos_body(std::uint32_t atom) const {
        return pos_occurrence_[atom];
    }

    const std::vector<std::vector<std::uint32_t>>& heads_index() const {
        return heads_index_;
    }

    std::optional<std::uint32_t> atom_index(std::string_view name) const;

    std::size_t total_body_literals() const;

private:
    void build_name_index();

    std::vector<Atom> atoms_;
    std::vector<Rule> rules_;
    std::vector<std::vector<std::uint32_t>> heads_index_;
    std::vector<std::vector<std::uint32_t>> pos_occurrence_;
    std::unordered_map<std::string, std::uint32_t> name_index_;
};

struct ParseResult {
    GroundProgram program;
    std::vector<std::string> warnings;
    std::size_t dropped_rules = 0;   // body mentioned an atom both positively and negatively
    std::size_t duplicate_rules = 0; // textual duplicates removed
};

/// Grammar (whitespace-insensitive, `%` comments to end of line):
///   rule := head ( ":-" body )? "."
///   body := lit ("," lit)*
///   lit  := ["not" WS] atomname
/// Atom names are [A-Za-z0-9_]+ with an optional balanced parenthesis group
/// for ground terms like digit(1,2). Atoms are indexed in first-appearance
/// order. A leading `% atoms: n1 n2 ...` comment pre-registers the atom
/// universe in the given order; serialize_program emits it whenever the
/// program's atom table cannot be reconstructed from the rules alone.
ParseResult parse_program(std::string_view text);

/// Inverse of parse_program: parse_program(serialize_program(p)) is
/// structurally identical to p (atom order, rule order).
std::string serialize_program(const GroundProgram& p);

/// Report-style invariant audit; an empty report means the program is
/// well-formed (indices in range, no duplicate rules or atom names, heads
/// index consistent in both directions).
std::vector<std::string> validate(const GroundProgram& p);

} // namespace ndprop
