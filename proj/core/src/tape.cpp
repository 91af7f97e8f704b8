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

#include "ndprop/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace ndprop::ad {

namespace {
constexpr double kSafeEps = 1e-12;

struct Partials {
    double da, db;
};

Partials tnorm_partials(TNormKind k, double a, double b) {
    switch (k) {
        case TNormKind::Goedel: return a <= b ? Partials{1.0, 0.0} : Partials{0.0, 1.0};
        case TNormKind::Product: return {b, a};
        case TNormKind::Lukasiewicz:
            return a + b - 1.0 > 0.0 ? Partials{1.0, 1.0} : Partials{0.0, 0.0};
    }
    return {0.0, 0.0};
}

Partials tconorm_partials(TNormKind k, double a, double b) {
    switch (k) {
        case TNormKind::Goedel: return a >= b ? Partials{1.0, 0.0} : Partials{0.0, 1.0};
        case TNormKind::Product: return {1.0 - b, 1.0 - a};
        case TNormKind::Lukasiewicz:
            return a + b < 1.0 ? Partials{1.0, 1.0} : Partials{0.0, 0.0};
    }
    return {0.0, 0.0};
}

} // namespace

DiffValue Tape::push(Node node) {
    nodes_.push_back(std::move(node));
    return {static_cast<std::uint32_t>(nodes_.size() - 1)};
}

DiffValue Tape::leaf(std::vector<double> value) {
    return push({Op::Leaf, 0, 0, 0, 0, 0, std::move(value)});
}

DiffValue Tape::constant(std::vector<double> value) {
    return push({Op::Const, 0, 0, 0, 0, 0, std::move(value)});
}

void Tape::check_same_or_scalar(DiffValue a, DiffValue b, const char* what) const {
    const std::size_t sa = size(a), sb = size(b);
    if (sa != sb && sa != 1 && sb != 1)
        throw std::invalid_argument(std::string(what) + ": shape mismatch " +
                                    std::to_string(sa) + " vs " + std::to_string(sb));
}

DiffValue Tape::add(DiffValue a, DiffValue b) {
    check_same_or_scalar(a, b, "add");
    const auto &va = value(a), &vb = value(b);
    const std::size_t n = std::max(va.size(), vb.size());
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k)
        out[k] = va[va.size() == 1 ? 0 : k] + vb[vb.size() == 1 ? 0 : k];
    return push({Op::Add, a.id, b.id, 0, 0, 0, std::move(out)});
}

DiffValue Tape::sub(DiffValue a, DiffValue b) {
    check_same_or_scalar(a, b, "sub");
    const auto &va = value(a), &vb = value(b);
    const std::size_t n = std::max(va.size(), vb.size());
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k)
        out[k] = va[va.size() == 1 ? 0 : k] - vb[vb.size() == 1 ? 0 : k];
    return push({Op::Sub, a.id, b.id, 0, 0, 0, std::move(out)});
}

DiffValue Tape::mul(DiffValue a, DiffValue b) {
    check_same_or_scalar(a, b, "mul");
    const auto &va = value(a), &vb = value(b);
    const std::size_t n = std::max(va.size(), vb.size());
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k)
        out[k] = va[va.size() == 1 ? 0 : k] * vb[vb.size() == 1 ? 0 : k];
    return push({Op::Mul, a.id, b.id, 0, 0, 0, std::move(out)});
}

DiffValue Tape::div_safe(DiffValue a, DiffValue b) {
    check_same_or_scalar(a, b, "div_safe");
    const auto &va = value(a), &vb = value(b);
    const std::size_t n = std::max(va.size(), vb.size());
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double d = vb[vb.size() == 1 ? 0 : k];
        out[k] = va[va.size() == 1 ? 0 : k] / std::max(d, kSafeEps);
    }
    return push({Op::DivSafe, a.id, b.id, 0, 0, 0, std::move(out)});
}

DiffValue Tape::min(DiffValue a, DiffValue b) {
    check_same_or_scalar(a, b, "min");
    const auto &va = value(a), &vb = value(b);
    const std::size_t n = std::max(va.size(), vb.size());
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double x = va[va.size() == 1 ? 0 : k], y = vb[vb.size() == 1 ? 0 : k];
        note_gap(std::abs(x - y));
        out[k] = std::min(x, y);
    }
    return push({Op::Min, a.id, b.id, 0, 0, 0, std::move(out)});
}

DiffValue Tape::max(DiffValue a, DiffValue b) {
    check_same_or_scalar(a, b, "max");
    const auto &va = value(a), &vb = value(b);
    const std::size_t n = std::max(va.size(), vb.size());
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double x = va[va.size() == 1 ? 0 : k], y = vb[vb.size() == 1 ? 0 : k];
        note_gap(std::abs(x - y));
        out[k] = std::max(x, y);
    }
    return push({Op::Max, a.id, b.id, 0, 0, 0, std::move(out)});
}

DiffValue Tape::clamp01(DiffValue a) {
    std::vector<double> out = value(a);
    for (double& x : out) x = std::min(1.0, std::max(0.0, x));
    return push({Op::Clamp01, a.id, 0, 0, 0, 0, std::move(out)});
}

DiffValue Tape::sigmoid(DiffValue a) {
    std::vector<double> out = value(a);
    for (double& x : out) x = 1.0 / (1.0 + std::exp(-x));
    return push({Op::Sigmoid, a.id, 0, 0, 0, 0, std::move(out)});
}

DiffValue Tape::tanh(DiffValue a) {
    std::vector<double> out = value(a);
    for (double& x : out) x = std::tanh(x);
    return push({Op::Tanh, a.id, 0, 0, 0, 0, std::move(out)});
}

DiffValue Tape::log_safe(DiffValue a) {
    std::vector<double> out = value(a);
    for (double& x : out) x = std::log(std::max(x, kSafeEps));
    return push({Op::LogSafe, a.id, 0, 0, 0, 0, std::move(out)});
}

DiffValue Tape::affine(DiffValue w, std::uint32_t rows, std::uint32_t cols, DiffValue x,
                       DiffValue b) {
    if (size(w) != static_cast<std::size_t>(rows) * cols || size(x) != cols ||
        size(b) != rows)
        throw std::invalid_argument("affine: shape mismatch");
    const auto &vw = value(w), &vx = value(x), &vb = value(b);
    std::vector<double> out(rows);
    for (std::uint32_t r = 0; r < rows; ++r) {
        double acc = vb[r];
        const double* row = vw.data() + static_cast<std::size_t>(r) * cols;
        for (std::uint32_t c = 0; c < cols; ++c) acc += row[c] * vx[c];
        out[r] = acc;
    }
    return push({Op::Affine, w.id, x.id, b.id, rows, cols, std::move(out)});
}

DiffValue Tape::concat(std::span<const DiffValue> parts) {
    if (parts.empty()) throw std::invalid_argument("concat: no operands");
    std::vector<double> out;
    const auto offset = static_cast<std::uint32_t>(concat_pool_.size());
    for (DiffValue part : parts) {
        concat_pool_.push_back(part.id);
        const auto& v = value(part);
        out.insert(out.end(), v.begin(), v.end());
    }
    return push({Op::Concat, 0, 0, 0, offset, static_cast<std::uint32_t>(parts.size()),
                 std::move(out)});
}

DiffValue Tape::pick(DiffValue a, std::uint32_t i) {
    if (i >= size(a)) throw std::invalid_argument("pick: index out of range");
    return push({Op::Pick, a.id, 0, 0, i, 0, {value(a)[i]}});
}

DiffValue Tape::sum(DiffValue a) {
    double acc = 0.0;
    for (double x : value(a)) acc += x;
    return push({Op::Sum, a.id, 0, 0, 0, 0, {acc}});
}

DiffValue Tape::mean(DiffValue a) {
    if (size(a) == 0) throw std::invalid_argument("mean: empty operand");
    double acc = 0.0;
    for (double x : value(a)) acc += x;
    return push({Op::Mean, a.id, 0, 0, 0, 0, {acc / static_cast<double>(size(a))}});
}

DiffValue Tape::rule_support_all(DiffValue tau, DiffValue phi) {
    if (!program_) throw std::logic_error("rule_support_all: no program bound");
    const GroundProgram& p = *program_;
    if (size(tau) != p.atom_count() || size(phi) != p.atom_count())
        throw std::invalid_argument("rule_support_all: shape mismatch");
    const auto &vt = value(tau), &vp = value(phi);
    std::vector<double> out(p.rule_count());
    for (std::uint32_t j = 0; j < p.rule_count(); ++j) {
        const Rule& r = p.rule(j);
        double acc = 1.0;
        bool first = true;
        for (auto a : r.pos_body) {
            if (!first) note_gap(std::abs(acc - vt[a]));
            acc = tnorm_raw(kind_, acc, vt[a]);
            first = false;
        }
        for (auto a : r.neg_body) {
            if (!first) note_gap(std::abs(acc - vp[a]));
            acc = tnorm_raw(kind_, acc, vp[a]);
            first = false;
        }
        out[j] = acc;
    }
    return push({Op::RuleSupport, tau.id, phi.id, 0, 0, 0, std::move(out)});
}

DiffValue Tape::head_aggregate(DiffValue rho) {
    if (!program_) throw std::logic_error("head_aggregate: no program bound");
    const GroundProgram& p = *program_;
    if (size(rho) != p.rule_count())
        throw std::invalid_argument("head_aggregate: shape mismatch");
    const auto& vr = value(rho);
    std::vector<double> out(p.atom_count(), 0.0);
    for (std::uint32_t i = 0; i < p.atom_count(); ++i) {
        double acc = 0.0;
        bool first = true;
        for (auto j : p.rules_with_head(i)) {
            if (!first) note_gap(std::abs(acc - vr[j]));
            acc = tconorm_raw(kind_, acc, vr[j]);
            first = false;
        }
        out[i] = acc;
    }
    return push({Op::HeadAggregate, rho.id, 0, 0, 0, 0, std::move(out)});
}

void Tape::backward_elementwise(const Node& n, const std::vector<double>& g) {
    const auto &va = nodes_[n.a].val, &vb = nodes_[n.b].val;
    auto &ga = adjoint_[n.a], &gb = adjoint_[n.b];
    for (std::size_t k = 0; k < g.size(); ++k) {
        const std::size_t ia = va.size() == 1 ? 0 : k, ib = vb.size() == 1 ? 0 : k;
        const double x = va[ia], y = vb[ib];
        switch (n.op) {
            case Op::Add:
                ga[ia] += g[k];
                gb[ib] += g[k];
                break;
            case Op::Sub:
                ga[ia] += g[k];
                gb[ib] -= g[k];
                break;
            case Op::Mul:
                ga[ia] += g[k] * y;
                gb[ib] += g[k] * x;
                break;
            case Op::DivSafe: {
                const double d = std::max(y, kSafeEps);
                ga[ia] += g[k] / d;
                if (y >= kSafeEps) gb[ib] -= g[k] * x / (d * d);
                break;
            }
            case Op::Min:
                if (x <= y)
                    ga[ia] += g[k];
                else
                    gb[ib] += g[k];
                break;
            case Op::Max:
                if (x >= y)
                    ga[ia] += g[k];
                else
                    gb[ib] += g[k];
                break;
            default: break;
        }
    }
}

void Tape::backward(DiffValue loss) {
    if (size(loss) != 1) throw std::invalid_argument("backward: loss must be scalar");
    adjoint_.assign(nodes_.size(), {});
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        adjoint_[i].assign(nodes_[i].val.size(), 0.0);
    adjoint_[loss.id][0] = 1.0;

    for (std::size_t idx = nodes_.size(); idx-- > 0;) {
        const Node& n = nodes_[idx];
        const std::vector<double>& g = adjoint_[idx];
        switch (n.op) {
            case Op::Leaf:
            case Op::Const:
                break;
            case Op::Add:
            case Op::Sub:
            case Op::Mul:
            case Op::DivSafe:
            case Op::Min:
            case Op::Max:
                backward_elementwise(n, g);
                break;
            case Op::Clamp01: {
                const auto& x = nodes_[n.a].val;
                for (std::size_t k = 0; k < g.size(); ++k)
                    if (x[k] >= 0.0 && x[k] <= 1.0) adjoint_[n.a][k] += g[k];
                break;
            }
            case Op::Sigmoid:
                for (std::size_t k = 0; k < g.size(); ++k)
                    adjoint_[n.a][k] += g[k] * n.val[k] * (1.0 - n.val[k]);
                break;
            case Op::Tanh:
                for (std::size_t k = 0; k < g.size(); ++k)
                    adjoint_[n.a][k] += g[k] * (1.0 - n.val[k] * n.val[k]);
                break;
            case Op::LogSafe: {
                const auto& x = nodes_[n.a].val;
                for (std::size_t k = 0; k < g.size(); ++k)
                    if (x[k] >= kSafeEps) adjoint_[n.a][k] += g[k] / x[k];
                break;
            }
            case Op::Affine: {
                const auto &vw = nodes_[n.a].val, &vx = nodes_[n.b].val;
                auto &gw = adjoint_[n.a], &gx = adjoint_[n.b], &gb = adjoint_[n.c];
                for (std::uint32_t r = 0; r < n.rows; ++r) {
                    const double gr = g[r];
                    gb[r] += gr;
                    const std::size_t base = static_cast<std::size_t>(r) * n.cols;
                    for (std::uint32_t c = 0; c < n.cols; ++c) {
                        gw[base + c] += gr * vx[c];
                        gx[c] += gr * vw[base + c];
                    }
                }
                break;
            }
            case Op::Concat: {
                std::size_t at = 0;
                for (std::uint32_t part = 0; part < n.cols; ++part) {
                    const std::uint32_t src = concat_pool_[n.rows + part];
                    auto& gs = adjoint_[src];
                    for (std::size_t k = 0; k < gs.size(); ++k) gs[k] += g[at + k];
                    at += gs.size();
                }
                break;
            }
            case Op::Pick:
                adjoint_[n.a][n.rows] += g[0];
                break;
            case Op::Sum:
                for (double& v : adjoint_[n.a]) v += g[0];
                break;
            case Op::Mean: {
                const double share = g[0] / static_cast<double>(nodes_[n.a].val.size());
                for (double& v : adjoint_[n.a]) v += share;
                break;
            }
            case Op::RuleSupport: {
                const GroundProgram& p = *program_;
                const auto &vt = nodes_[n.a].val, &vp = nodes_[n.b].val;
                auto &gt = adjoint_[n.a], &gp = adjoint_[n.b];
                std::vector<double> prefix;
                for (std::uint32_t j = 0; j < p.rule_count(); ++j) {
                    if (g[j] == 0.0) continue;
                    const Rule& r = p.rule(j);
                    // Recompute the left-fold prefixes, then chain backwards.
                    prefix.assign(1, 1.0);
                    for (auto a : r.pos_body)
                        prefix.push_back(tnorm_raw(kind_, prefix.back(), vt[a]));
                    for (auto a : r.neg_body)
                        prefix.push_back(tnorm_raw(kind_, prefix.back(), vp[a]));
                    double gacc = g[j];
                    const std::size_t m = r.pos_body.size() + r.neg_body.size();
                    for (std::size_t t = m; t-- > 0;) {
                        const bool positive = t < r.pos_body.size();
                        const std::uint32_t atom =
                            positive ? r.pos_body[t] : r.neg_body[t - r.pos_body.size()];
                        const double lit = positive ? vt[atom] : vp[atom];
                        const Partials d = tnorm_partials(kind_, prefix[t], lit);
                        (positive ? gt : gp)[atom] += gacc * d.db;
                        gacc *= d.da;
                    }
                }
                break;
            }
            case Op::HeadAggregate: {
                const GroundProgram& p = *program_;
                const auto& vr = nodes_[n.a].val;
                auto& gr = adjoint_[n.a];
                std::vector<double> prefix;
                for (std::uint32_t i = 0; i < p.atom_count(); ++i) {
                    if (g[i] == 0.0) continue;
                    const auto& heads = p.rules_with_head(i);
                    prefix.assign(1, 0.0);
                    for (auto j : heads)
                        prefix.push_back(tconorm_raw(kind_, prefix.back(), vr[j]));
                    double gacc = g[i];
                    for (std::size_t t = heads.size(); t-- > 0;) {
                        const Partials d = tconorm_partials(kind_, prefix[t], vr[heads[t]]);
                        gr[heads[t]] += gacc * d.db;
                        gacc *= d.da;
                    }
                }
                break;
            }
        }
    }
}

double grad_check(
    const std::function<DiffValue(Tape&, const std::vector<DiffValue>&)>& build,
    const std::vector<std::vector<double>>& point, double h, const GroundProgram* program,
    TNormKind kind) {
    if (h <= 0.0) throw std::invalid_argument("grad_check: h must be positive");

    Tape tape(program, kind);
    std::vector<DiffValue> leaves;
    leaves.reserve(point.size());
    for (const auto& arr : point) leaves.push_back(tape.leaf(arr));
    const DiffValue loss = build(tape, leaves);
    tape.backward(loss);

    std::vector<std::vector<double>> analytic;
    analytic.reserve(leaves.size());
    for (DiffValue l : leaves) analytic.push_back(tape.grad(l));

    auto eval_at = [&](const std::vector<std::vector<double>>& x) {
        Tape t(program, kind);
        std::vector<DiffValue> ls;
        ls.reserve(x.size());
        for (const auto& arr : x) ls.push_back(t.leaf(arr));
        return t.scalar(build(t, ls));
    };

    double worst = 0.0;
    std::vector<std::vector<double>> perturbed = point;
    for (std::size_t i = 0; i < point.size(); ++i) {
        for (std::size_t k = 0; k < point[i].size(); ++k) {
            perturbed[i][k] = point[i][k] + h;
            const double up = eval_at(perturbed);
            perturbed[i][k] = point[i][k] - h;
            const double down = eval_at(perturbed);
            perturbed[i][k] = point[i][k];
            const double numeric = (up - down) / (2.0 * h);
            const double a = analytic[i][k];
            const double rel =
                std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

} // namespace ndprop::ad
