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

#include <algorithm>
#include <stdexcept>
#include <string>

namespace ndprop {

enum class TNormKind { Goedel, Product, Lukasiewicz };

inline const char* tnorm_name(TNormKind k) {
    switch (k) {
        case TNormKind::Goedel: return "godel";
        case TNormKind::Product: return "product";
        case TNormKind::Lukasiewicz: return "lukasiewicz";
    }
    return "?";
}

inline TNormKind tnorm_from_name(const std::string& name) {
    if (name == "godel" || name == "goedel") return TNormKind::Goedel;
    if (name == "product") return TNormKind::Product;
    if (name == "lukasiewicz") return TNormKind::Lukasiewicz;
    throw std::invalid_argument("unknown t-norm '" + name + "'");
}

namespace detail {
inline void check_degree(double x) {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("degree outside [0,1]: " + std::to_string(x));
}
} // namespace detail

/// Unchecked binary t-norm; callers in inner loops keep values in range by
/// construction. Folds start from the unit 1.
inline double tnorm_raw(TNormKind k, double x, double y) {
    switch (k) {
        case TNormKind::Goedel: return std::min(x, y);
        case TNormKind::Product: return x * y;
        case TNormKind::Lukasiewicz: return std::max(0.0, x + y - 1.0);
    }
    return 0.0;
}

/// Unchecked binary t-conorm (the dual disjunction). Folds start from 0.
inline double tconorm_raw(TNormKind k, double x, double y) {
    switch (k) {
        case TNormKind::Goedel: return std::max(x, y);
        case TNormKind::Product: return x + y - x * y;
        case TNormKind::Lukasiewicz: return std::min(1.0, x + y);
    }
    return 0.0;
}

inline double tnorm(TNormKind k, double x, double y) {
    detail::check_degree(x);
    detail::check_degree(y);
    return tnorm_raw(k, x, y);
}

inline double tconorm(TNormKind k, double x, double y) {
    detail::check_degree(x);
    detail::check_degree(y);
    return tconorm_raw(k, x, y);
}

} // namespace ndprop
