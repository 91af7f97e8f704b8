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

#include "ndprop/program.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_set>

namespace ndprop {

namespace {

constexpr std::size_t kMaxAtomNameLength = 255;

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_name_char(char c) {
    return is_ident_char(c) || c == '(' || c == ')' || c == ',';
}

bool valid_atom_name(std::string_view name) {
    if (name.empty() || name.size() > kMaxAtomNameLength) return false;
    if (name == "not") return false;
    std::size_t i = 0;
    while (i < name.size() && is_ident_char(name[i])) ++i;
    if (i == 0) return false;
    if (i == name.size()) return true;
    if (name[i] != '(') return false;
    int depth = 0;
    for (; i < name.size(); ++i) {
        const char c = name[i];
        if (!is_name_char(c)) return false;
        if (c == '(') ++depth;
        if (c == ')' && --depth < 0) return false;
    }
    return depth == 0 && name.back() == ')';
}

struct Token {
    enum Kind { Word, Implies, Comma, Dot, End };
    Kind kind;
    std::string text;
    int line;
    int column;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    // Atom names pre-registered by a leading `% atoms:` directive.
    const std::vector<std::string>& directive_atoms() const { return directive_atoms_; }

    std::vector<Token> run() {
        std::vector<Token> tokens;
        while (true) {
            skip_blank(tokens.empty());
            if (pos_ >= text_.size()) break;
            const int line = line_, col = col_;
            const char c = text_[pos_];
            if (c == ':') {
                advance();
                if (pos_ >= text_.size() || text_[pos_] != '-')
                    throw ParseError("expected ':-'", line, col);
                advance();
                tokens.push_back({Token::Implies, ":-", line, col});
            } else if (c == ',') {
                advance();
                tokens.push_back({Token::Comma, ",", line, col});
            } else if (c == '.') {
                advance();
                tokens.push_back({Token::Dot, ".", line, col});
            } else if (is_ident_char(c)) {
                tokens.push_back(lex_word());
            } else {
                throw ParseError(std::string("unexpected character '") + c + "'", line, col);
            }
        }
        tokens.push_back({Token::End, "", line_, col_});
        return tokens;
    }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_blank(bool before_first_token) {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == '%') {
                const int line = line_, col = col_;
                std::string comment;
                while (pos_ < text_.size() && text_[pos_] != '\n') {
                    comment.push_back(text_[pos_]);
                    advance();
                }
                handle_comment(comment, before_first_token, line, col);
            } else {
                return;
            }
        }
    }

    void handle_comment(std::string_view comment, bool before_first_token, int line,
                        int col) {
        comment.remove_prefix(1); // '%'
        std::size_t i = 0;
        while (i < comment.size() && std::isspace(static_cast<unsigned char>(comment[i])))
            ++i;
        if (comment.substr(i, 6) != "atoms:") return;
        if (!before_first_token)
            throw ParseError("atoms directive must precede all rules", line, col);
        if (directive_seen_)
            throw ParseError("duplicate atoms directive", line, col);
        directive_seen_ = true;
        std::istringstream names(std::string(comment.substr(i + 6)));
        std::string name;
        while (names >> name) {
            if (!valid_atom_name(name))
                throw ParseError("invalid atom name '" + name + "' in atoms directive",
                                 line, col);
            directive_atoms_.push_back(name);
        }
    }

    Token lex_word() {
        const int line = line_, col = col_;
        std::string word;
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) {
            word.push_back(text_[pos_]);
            advance();
        }
        if (pos_ < text_.size() && text_[pos_] == '(') {
            int depth = 0;
            do {
                const char c = text_[pos_];
                if (!is_name_char(c))
                    throw ParseError("invalid character in atom name", line_, col_);
                if (c == '(') ++depth;
                if (c == ')') --depth;
                word.push_back(c);
                advance();
                if (depth < 0) throw ParseError("unbalanced ')'", line, col);
            } while (pos_ < text_.size() && depth > 0);
            if (depth != 0) throw ParseError("unbalanced '(' in atom name", line, col);
            // Trailing ident characters after the group would be ambiguous.
            if (pos_ < text_.size() && is_name_char(text_[pos_]) && text_[pos_] != '(' &&
                text_[pos_] != ')' && text_[pos_] != ',')
                throw ParseError("invalid atom name", line, col);
        }
        if (word.size() > kMaxAtomNameLength)
            throw ParseError("atom name exceeds 255 characters", line, col);
        return {Token::Word, word, line, col};
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    bool directive_seen_ = false;
    std::vector<std::string> directive_atoms_;
};

void normalize_body(std::vector<std::uint32_t>& body) {
    std::sort(body.begin(), body.end());
    body.erase(std::unique(body.begin(), body.end()), body.end());
}

std::uint64_t rule_hash(const Rule& r) {
    std::uint64_t h = 0xcbf29ce484222325ull ^ r.head;
    auto mix = [&h](std::uint64_t v) {
        h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    };
    for (auto a : r.pos_body) mix(a);
    mix(0xffffffffull);
    for (auto a : r.neg_body) mix(a);
    return h;
}

struct RuleHash {
    std::size_t operator()(const Rule& r) const {
        return static_cast<std::size_t>(rule_hash(r));
    }
};

/// Atom interner shared by the parser and by serialize_program's
/// reconstruction check: indexes names in first-appearance order.
class AtomTable {
public:
    std::uint32_t intern(const std::string& name) {
        auto it = index_.find(name);
        if (it != index_.end()) return it->second;
        const auto id = static_cast<std::uint32_t>(atoms_.size());
        atoms_.push_back({id, name});
        index_.emplace(name, id);
        return id;
    }

    bool known(const std::string& name) const { return index_.count(name) > 0; }
    std::vector<Atom> take() { return std::move(atoms_); }
    const std::vector<Atom>& atoms() const { return atoms_; }

private:
    std::vector<Atom> atoms_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

} // namespace

GroundProgram::GroundProgram(std::vector<Atom> atoms, std::vector<Rule> rules)
    : atoms_(std::move(atoms)), rules_(std::move(rules)) {
    heads_index_.resize(atoms_.size());
    pos_occurrence_.resize(atoms_.size());
    for (std::uint32_t j = 0; j < rules_.size(); ++j) {
        const Rule& r = rules_[j];
        if (r.head < atoms_.size()) heads_index_[r.head].push_back(j);
        for (auto a : r.pos_body)
            if (a < atoms_.size()) pos_occurrence_[a].push_back(j);
    }
    build_name_index();
}

GroundProgram::GroundProgram(std::vector<Atom> atoms, std::vector<Rule> rules,
                             std::vector<std::vector<std::uint32_t>> heads_index)
    : atoms_(std::move(atoms)), rules_(std::move(rules)),
      heads_index_(std::move(heads_index)) {
    pos_occurrence_.resize(atoms_.size());
    for (std::uint32_t j = 0; j < rules_.size(); ++j)
        for (auto a : rules_[j].pos_body)
            if (a < atoms_.size()) pos_occurrence_[a].push_back(j);
    build_name_index();
}

void GroundProgram::build_name_index() {
    for (const Atom& a : atoms_) name_index_.emplace(a.name, a.index);
}

std::optional<std::uint32_t> GroundProgram::atom_index(std::string_view name) const {
    auto it = name_index_.find(std::string(name));
    if (it == name_index_.end()) return std::nullopt;
    return it->second;
}

std::size_t GroundProgram::total_body_literals() const {
    std::size_t c = 0;
    for (const Rule& r : rules_) c += r.pos_body.size() + r.neg_body.size();
    return c;
}

ParseResult parse_program(std::string_view text) {
    Lexer lexer(text);
    const std::vector<Token> tokens = lexer.run();

    ParseResult result;
    AtomTable table;
    for (const std::string& name : lexer.directive_atoms()) {
        if (table.known(name))
            throw ParseError("atom '" + name + "' listed twice in atoms directive", 1, 1);
        table.intern(name);
    }

    std::vector<Rule> rules;
    std::unordered_set<Rule, RuleHash> seen;

    std::size_t at = 0;
    auto peek = [&]() -> const Token& { return tokens[at]; };
    auto next = [&]() -> const Token& { return tokens[at++]; };

    auto expect_atom = [&](const char* where) -> std::uint32_t {
        const Token& t = next();
        if (t.kind != Token::Word || t.text == "not")
            throw ParseError(std::string("expected atom name in ") + where, t.line,
                             t.column);
        if (!valid_atom_name(t.text))
            throw ParseError("invalid atom name '" + t.text + "'", t.line, t.column);
        return table.intern(t.text);
    };

    while (peek().kind != Token::End) {
        const int rule_line = peek().line;
        Rule rule;
        rule.head = expect_atom("rule head");
        const Token& sep = next();
        if (sep.kind == Token::Implies) {
            for (;;) {
                const Token& t = peek();
                if (t.kind == Token::Word && t.text == "not") {
                    ++at;
                    rule.neg_body.push_back(expect_atom("negative literal"));
                } else {
                    rule.pos_body.push_back(expect_atom("body literal"));
                }
                const Token& after = next();
                if (after.kind == Token::Dot) break;
                if (after.kind != Token::Comma)
                    throw ParseError("expected ',' or '.'", after.line, after.column);
            }
        } else if (sep.kind != Token::Dot) {
            throw ParseError("expected ':-' or '.'", sep.line, sep.column);
        }

        normalize_body(rule.pos_body);
        normalize_body(rule.neg_body);

        std::vector<std::uint32_t> overlap;
        std::set_intersection(rule.pos_body.begin(), rule.pos_body.end(),
                              rule.neg_body.begin(), rule.neg_body.end(),
                              std::back_inserter(overlap));
        if (!overlap.empty()) {
            ++result.dropped_rules;
            result.warnings.push_back(
                "line " + std::to_string(rule_line) + ": dropped rule; atom '" +
                table.atoms()[overlap.front()].name +
                "' occurs both positively and negatively in the body");
            continue;
        }
        if (!seen.insert(rule).second) {
            ++result.duplicate_rules;
            result.warnings.push_back("line " + std::to_string(rule_line) +
                                      ": duplicate rule removed");
            continue;
        }
        rules.push_back(std::move(rule));
    }

    result.program = GroundProgram(table.take(), std::move(rules));
    return result;
}

namespace {

void write_rule(std::string& out, const GroundProgram& p, const Rule& r) {
    out += p.atom(r.head).name;
    if (!r.pos_body.empty() || !r.neg_body.empty()) {
        out += " :- ";
        bool first = true;
        for (auto a : r.pos_body) {
            if (!first) out += ", ";
            out += p.atom(a).name;
            first = false;
        }
        for (auto a : r.neg_body) {
            if (!first) out += ", ";
            out += "not ";
            out += p.atom(a).name;
            first = false;
        }
    }
    out += ".\n";
}

/// True when re-parsing the rules alone reproduces the atom table, i.e.
/// first-appearance order matches the stored order and no atom is orphaned.
bool atoms_reconstructible(const GroundProgram& p) {
    AtomTable table;
    for (const Rule& r : p.rules()) {
        table.intern(p.atom(r.head).name);
        for (auto a : r.pos_body) table.intern(p.atom(a).name);
        for (auto a : r.neg_body) table.intern(p.atom(a).name);
    }
    const auto& rebuilt = table.atoms();
    if (rebuilt.size() != p.atom_count()) return false;
    for (std::size_t i = 0; i < rebuilt.size(); ++i)
        if (rebuilt[i].name != p.atom(static_cast<std::uint32_t>(i)).name) return false;
    return true;
}

} // namespace

std::string serialize_program(const GroundProgram& p) {
    std::string out;
    if (p.atom_count() > 0 && !atoms_reconstructible(p)) {
        out += "% atoms:";
        for (const Atom& a : p.atoms()) {
            out += ' ';
            out += a.name;
        }
        out += '\n';
    }
    for (const Rule& r : p.rules()) write_rule(out, p, r);
    return out;
}

std::vector<std::string> validate(const GroundProgram& p) {
    std::vector<std::string> report;
    const std::size_t n = p.atom_count();

    std::unordered_set<std::string> names;
    for (std::size_t i = 0; i < n; ++i) {
        const Atom& a = p.atom(static_cast<std::uint32_t>(i));
        if (a.index != i)
            report.push_back("atom table: index " + std::to_string(a.index) +
                             " stored at position " + std::to_string(i));
        if (a.name.empty()) report.push_back("atom " + std::to_string(i) + ": empty name");
        if (!names.insert(a.name).second)
            report.push_back("duplicate atom name '" + a.name + "'");
    }

    std::unordered_set<Rule, RuleHash> seen;
    for (std::uint32_t j = 0; j < p.rule_count(); ++j) {
        const Rule& r = p.rule(j);
        if (r.head >= n)
            report.push_back("rule " + std::to_string(j) + ": out-of-range head " +
                             std::to_string(r.head));
        for (auto a : r.pos_body)
            if (a >= n)
                report.push_back("rule " + std::to_string(j) +
                                 ": out-of-range positive body atom " + std::to_string(a));
        for (auto a : r.neg_body)
            if (a >= n)
                report.push_back("rule " + std::to_string(j) +
                                 ": out-of-range negative body atom " + std::to_string(a));
        Rule norm = r;
        normalize_body(norm.pos_body);
        normalize_body(norm.neg_body);
        if (norm.pos_body != r.pos_body || norm.neg_body != r.neg_body)
            report.push_back("rule " + std::to_string(j) +
                             ": body not sorted and duplicate-free");
        if (!seen.insert(norm).second)
            report.push_back("duplicate rule " + std::to_string(j));
    }

    // heads_index must list every rule exactly once, under its own head.
    if (p.heads_index().size() != n) {
        report.push_back("heads index: size " + std::to_string(p.heads_index().size()) +
                         " != atom count " + std::to_string(n));
    } else {
        std::vector<int> listed(p.rule_count(), 0);
        for (std::uint32_t a = 0; a < n; ++a) {
            for (auto j : p.heads_index()[a]) {
                if (j >= p.rule_count()) {
                    report.push_back("heads index: atom " + std::to_string(a) +
                                     " lists out-of-range rule " + std::to_string(j));
                    continue;
                }
                ++listed[j];
                if (p.rule(j).head != a)
                    report.push_back("heads index: rule " + std::to_string(j) +
                                     " listed under atom " + std::to_string(a) +
                                     " but has head " + std::to_string(p.rule(j).head));
            }
        }
        for (std::uint32_t j = 0; j < p.rule_count(); ++j)
            if (listed[j] != 1 && p.rule(j).head < n)
                report.push_back("heads index: rule " + std::to_string(j) + " listed " +
                                 std::to_string(listed[j]) + " times");
    }

    return report;
}

} // namespace ndprop
