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

#include <stdexcept>
#include <string>

namespace ndprop {

/// Source-text parse failure with a 1-based position.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, int line, int column)
        : std::runtime_error("parse error at " + std::to_string(line) + ":" +
                             std::to_string(column) + ": " + message),
          line_(line),
          column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

/// Brute-force enumeration refused because the atom universe is too large.
class OracleScaleError : public std::runtime_error {
public:
    explicit OracleScaleError(std::size_t n, std::size_t cap)
        : std::runtime_error("oracle scale exceeded: " + std::to_string(n) +
                             " atoms > cap " + std::to_string(cap)) {}
};

/// Guided policy found no falsifiable atom outside its target while
/// undecided atoms remain. Reaching this indicates the target was not a
/// stable model of the program.
class GuidanceExhausted : public std::runtime_error {
public:
    GuidanceExhausted() : std::runtime_error("guidance exhausted") {}
};

/// Weight-file or dataset-file corruption.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& message) : std::runtime_error(message) {}
};

} // namespace ndprop
