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

#include "ndprop/fuzzy.hpp"

#include <cmath>
#include <stdexcept>

namespace ndprop {

namespace {

void check_vector(std::span<const double> v) {
    for (double x : v) detail::check_degree(x);
}

} // namespace

std::vector<double> undecided_degree(std::span<const double> tau,
                                     std::span<const double> phi, TNormKind kind) {
    if (tau.size() != phi.size()) throw std::invalid_argument("tau/phi size mismatch");
    check_vector(tau);
    check_vector(phi);
    std::vector<double> mu(tau.size());
    for (std::size_t i = 0; i < tau.size(); ++i)
        mu[i] = tnorm_raw(kind, 1.0 - tau[i], 1.0 - phi[i]);
    return mu;
}

double rule_support(const GroundProgram& p, std::uint32_t rule_id,
                    std::span<const double> tau, std::span<const double> phi,
                    TNormKind kind) {
    const Rule& r = p.rule(rule_id);
    double acc = 1.0;
    for (auto a : r.pos_body) acc = tnorm_raw(kind, acc, tau[a]);
    for (auto a : r.neg_body) acc = tnorm_raw(kind, acc, phi[a]);
    return acc;
}

std::vector<double> soft_consequence(const GroundProgram& p, std::span<const double> phi,
                                     std::span<const double> tau, TNormKind kind) {
    const std::size_t n = p.atom_count();
    if (tau.size() != n || phi.size() != n)
        throw std::invalid_argument("degree vector size mismatch");
    std::vector<double> out(n, 0.0);
    for (std::uint32_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (auto r : p.rules_with_head(i))
            acc = tconorm_raw(kind, acc, rule_support(p, r, tau, phi, kind));
        out[i] = acc;
    }
    return out;
}

PropagateResult propagate(const GroundProgram& p, std::span<const double> phi,
                          std::vector<double> tau0, TNormKind kind, double eps,
                          std::size_t max_inner) {
    if (eps <= 0.0) throw std::invalid_argument("eps must be positive");
    if (max_inner == 0) max_inner = default_max_inner(p.atom_count());
    PropagateResult result;
    result.tau = std::move(tau0);
    check_vector(result.tau);
    check_vector(phi);
    while (result.inner_iters < max_inner) {
        std::vector<double> next = soft_consequence(p, phi, result.tau, kind);
        ++result.inner_iters;
        double change = 0.0;
        for (std::size_t i = 0; i < next.size(); ++i)
            change = std::max(change, std::abs(next[i] - result.tau[i]));
        result.tau = std::move(next);
        if (change < eps) {
            result.converged = true;
            break;
        }
    }
    return result;
}

std::vector<double> decision_update(std::span<const double> phi,
                                    std::span<const double> mu,
                                    std::span<const double> delta) {
    if (phi.size() != mu.size() || phi.size() != delta.size())
        throw std::invalid_argument("decision_update size mismatch");
    std::vector<double> out(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i)
        out[i] = std::min(1.0, phi[i] + mu[i] * delta[i]);
    return out;
}

std::vector<double> membership(std::span<const double> tau, std::span<const double> phi) {
    if (tau.size() != phi.size()) throw std::invalid_argument("tau/phi size mismatch");
    std::vector<double> p(tau.size());
    for (std::size_t i = 0; i < tau.size(); ++i) p[i] = 0.5 * (tau[i] + 1.0 - phi[i]);
    return p;
}

Certification certify(const GroundProgram& p, std::vector<double> tau,
                      std::vector<double> phi, TNormKind kind, double binary_tol,
                      double eps, std::size_t max_inner) {
    if (binary_tol <= 0.0) throw std::invalid_argument("binary_tol must be positive");
    Certification cert;
    PropagateResult prop = propagate(p, phi, std::move(tau), kind, eps, max_inner);
    if (!prop.converged) {
        cert.kind = CertKind::NotBinary;
        cert.diagnostic = "propagation did not converge within " +
                          std::to_string(prop.inner_iters) + " sweeps";
        return cert;
    }
    const std::vector<double> score = membership(prop.tau, phi);
    Interpretation s(p.atom_count());
    for (std::size_t i = 0; i < score.size(); ++i) {
        const double rounded = score[i] >= 0.5 ? 1.0 : 0.0;
        if (std::abs(score[i] - rounded) > binary_tol) {
            cert.kind = CertKind::NotBinary;
            cert.diagnostic = "membership score " + std::to_string(score[i]) +
                              " at atom '" + p.atom(static_cast<std::uint32_t>(i)).name +
                              "' is not binary";
            return cert;
        }
        if (rounded == 1.0) s.insert(i);
    }
    if (is_stable(p, s)) {
        cert.kind = CertKind::Stable;
        cert.model = std::move(s);
    } else {
        cert.kind = CertKind::NotStable;
        cert.diagnostic = "rounded set fails the crisp stability check";
    }
    return cert;
}

} // namespace ndprop
