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
#include <functional>
#include <span>
#include <vector>

#include "ndprop/program.hpp"
#include "ndprop/tnorm.hpp"

namespace ndprop::ad {

/// Handle into a Tape's node list. Values are scalars (size 1) or
/// length-n arrays; shape consistency is enforced at op construction.
struct DiffValue {
    std::uint32_t id = 0;
};

/// Append-only reverse-mode differentiation record. Operands always precede
/// consumers, so one reverse sweep over the node list accumulates exact
/// adjoints. A tape is single-owner during construction and backward;
/// independent tapes may run concurrently.
///
/// Besides elementwise arithmetic, the tape knows two program-structure
/// ops, rule_support_all and head_aggregate, which together form one sweep
/// of the soft consequence operator; their folds match the plain fuzzy
/// engine bit for bit.
class Tape {
public:
    explicit Tape(const GroundProgram* program = nullptr,
                  TNormKind kind = TNormKind::Goedel)
        : program_(program), kind_(kind) {}

    void bind(const GroundProgram* program, TNormKind kind) {
        program_ = program;
        kind_ = kind;
    }

    /// Differentiable input; backward() reports gradients for these.
    DiffValue leaf(std::vector<double> value);
    DiffValue leaf(double value) { return leaf(std::vector<double>{value}); }

    /// Non-differentiable input (targets, initial states, constants).
    DiffValue constant(std::vector<double> value);
    DiffValue constant(double value) { return constant(std::vector<double>{value}); }

    // Elementwise; operands of equal size, or one scalar broadcast.
    DiffValue add(DiffValue a, DiffValue b);
    DiffValue sub(DiffValue a, DiffValue b);
    DiffValue mul(DiffValue a, DiffValue b);
    /// Denominator clamped to >= 1e-12; the clamp is recorded so backward
    /// sends no gradient through a clamped denominator.
    DiffValue div_safe(DiffValue a, DiffValue b);
    /// Ties route the gradient to the first operand.
    DiffValue min(DiffValue a, DiffValue b);
    DiffValue max(DiffValue a, DiffValue b);

    DiffValue clamp01(DiffValue a);
    DiffValue sigmoid(DiffValue a);
    DiffValue tanh(DiffValue a);
    /// log(max(x, 1e-12)); zero gradient below the clamp.
    DiffValue log_safe(DiffValue a);

    /// rows x cols matrix (row-major vector value) times vector plus bias.
    DiffValue affine(DiffValue w, std::uint32_t rows, std::uint32_t cols, DiffValue x,
                     DiffValue b);
    DiffValue concat(std::span<const DiffValue> parts);
    /// Extract element i of a vector as a scalar.
    DiffValue pick(DiffValue a, std::uint32_t i);
    DiffValue sum(DiffValue a);
    DiffValue mean(DiffValue a);

    /// Per-rule body supports for the bound program: t-norm fold over
    /// literal values (tau for positive, phi for negated literals).
    DiffValue rule_support_all(DiffValue tau, DiffValue phi);
    /// Per-atom t-conorm fold of the supports of the rules with that head.
    DiffValue head_aggregate(DiffValue rho);

    const std::vector<double>& value(DiffValue v) const { return nodes_[v.id].val; }
    double scalar(DiffValue v) const { return nodes_[v.id].val.at(0); }
    std::size_t size(DiffValue v) const { return nodes_[v.id].val.size(); }

    /// Reverse sweep from a scalar loss. Adjoints for every node are
    /// (re)computed; query them through grad(). Gradient accumulation is
    /// additive over fan-out.
    void backward(DiffValue loss);
    const std::vector<double>& grad(DiffValue v) const { return adjoint_[v.id]; }

    /// Smallest distance to a nondifferentiable point (min/max tie, t-norm
    /// kink) seen while building the forward pass; +inf when none occurred.
    /// Lets callers reject near-tie sample points before comparing
    /// gradients against finite differences.
    double min_kink_gap() const { return min_kink_gap_; }

    std::size_t node_count() const { return nodes_.size(); }

    void reset() {
        nodes_.clear();
        adjoint_.clear();
        concat_pool_.clear();
        min_kink_gap_ = kNoKink;
    }

private:
    enum class Op : std::uint8_t {
        Leaf, Const, Add, Sub, Mul, DivSafe, Min, Max, Clamp01, Sigmoid, Tanh,
        LogSafe, Affine, Concat, Pick, Sum, Mean, RuleSupport, HeadAggregate,
    };

    struct Node {
        Op op;
        std::uint32_t a = 0, b = 0, c = 0; // operand ids; affine uses (w, x, bias)
        std::uint32_t rows = 0, cols = 0;  // affine dims; concat pool slice; pick index
        std::vector<double> val;
    };

    static constexpr double kNoKink = 1e300;

    DiffValue push(Node node);
    void note_gap(double gap) {
        if (gap < min_kink_gap_) min_kink_gap_ = gap;
    }
    void backward_elementwise(const Node& n, const std::vector<double>& g);
    void check_same_or_scalar(DiffValue a, DiffValue b, const char* what) const;

    const GroundProgram* program_;
    TNormKind kind_;
    std::vector<Node> nodes_;
    std::vector<std::vector<double>> adjoint_;
    std::vector<std::uint32_t> concat_pool_;
    double min_kink_gap_ = kNoKink;
};

/// Central-difference audit of a tape-built scalar function. `build` gets a
/// fresh tape plus one leaf per entry of `point` and returns the loss node.
/// Returns the max relative error over all coordinates, where the relative
/// error denominator is max(|analytic|, |numeric|, 1e-8).
double grad_check(
    const std::function<DiffValue(Tape&, const std::vector<DiffValue>&)>& build,
    const std::vector<std::vector<double>>& point, double h,
    const GroundProgram* program = nullptr, TNormKind kind = TNormKind::Goedel);

} // namespace ndprop::ad
