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

#include "ndprop/policy.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

namespace ndprop {

namespace {

constexpr char kMagic[4] = {'N', 'D', 'P', 'W'};
constexpr std::uint32_t kWeightFormatVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
    const auto bits = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t& at) {
    if (at + 4 > in.size()) throw FormatError("weight file truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at++])) << (8 * i);
    return v;
}

double get_f64(const std::string& in, std::size_t& at) {
    if (at + 8 > in.size()) throw FormatError("weight file truncated");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at++])) << (8 * i);
    return std::bit_cast<double>(bits);
}

/// Striped worker threads; results land in per-index slots so the caller's
/// sequential reduction never depends on scheduling.
void parallel_for(std::size_t threads, std::size_t count,
                  const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t tid = 0; tid < threads; ++tid)
        pool.emplace_back([&, tid] {
            for (std::size_t i = tid; i < count; i += threads) fn(i);
        });
    for (auto& t : pool) t.join();
}

std::vector<double> lifted_tau0(const GroundProgram& p) {
    const std::size_t n = p.atom_count();
    const Interpretation t0 =
        least_fixpoint(p, Interpretation::full(n), Interpretation(n));
    std::vector<double> tau(n, 0.0);
    t0.for_each([&](std::size_t i) { tau[i] = 1.0; });
    return tau;
}

double binarization_distance(std::span<const double> p) {
    if (p.empty()) return 0.0;
    double acc = 0.0;
    for (double x : p) acc += std::min(x, 1.0 - x);
    return acc / static_cast<double>(p.size());
}

std::vector<double> propagate_fixed(const GroundProgram& p, std::span<const double> phi,
                                    std::vector<double> tau, TNormKind kind,
                                    std::size_t sweeps) {
    for (std::size_t s = 0; s < sweeps; ++s) tau = soft_consequence(p, phi, tau, kind);
    return tau;
}

/// Fixed per-(atom, unit) sign pattern applied to the per-state hidden rows.
/// Atoms start from distinct hidden vectors, which is what lets the shared
/// cell make different decisions for atoms whose degree histories coincide
/// (on symmetric programs they otherwise never diverge). Deterministic and
/// independent of the weights, so nothing extra is persisted.
double hidden_sign(std::size_t atom, std::size_t unit) {
    const std::uint64_t bits = splitmix64(0x5eedc0de00000000ull ^ (atom * 8191 + unit));
    return (bits & 1) ? 1.0 : -1.0;
}

} // namespace

std::vector<double> initial_hidden(const PolicyWeights& w, std::size_t logical_state,
                                   std::size_t atom) {
    const std::uint32_t H = w.hidden_dim;
    std::vector<double> h(H);
    const double* row = w.init_hidden.data() + logical_state * H;
    for (std::uint32_t u = 0; u < H; ++u) h[u] = row[u] * hidden_sign(atom, u);
    return h;
}

PolicyWeights init_weights(std::uint32_t hidden_dim, std::uint32_t logical_dim,
                           std::uint64_t seed) {
    if (hidden_dim < 1 || logical_dim < 1)
        throw std::invalid_argument("hidden and logical dims must be >= 1");
    PolicyWeights w;
    w.hidden_dim = hidden_dim;
    w.logical_dim = logical_dim;
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
    Rng rng(seed);
    auto fill = [&](std::vector<double>& arr, std::size_t len) {
        arr.resize(len);
        for (double& x : arr) x = rng.uniform_in(-bound, bound);
    };
    fill(w.w_in, 3ull * hidden_dim);
    fill(w.w_h, static_cast<std::size_t>(hidden_dim) * hidden_dim);
    fill(w.bias, hidden_dim);
    fill(w.w_out, hidden_dim);
    fill(w.b_out, 1);
    fill(w.init_hidden, static_cast<std::size_t>(logical_dim) * hidden_dim);
    return w;
}

void save_weights(const PolicyWeights& w, const std::filesystem::path& path) {
    std::string out;
    out.append(kMagic, 4);
    put_u32(out, kWeightFormatVersion);
    put_u32(out, w.hidden_dim);
    put_u32(out, w.logical_dim);
    out.push_back(static_cast<char>(w.tnorm));
    for (const auto* arr : {&w.w_in, &w.w_h, &w.bias, &w.w_out, &w.b_out, &w.init_hidden})
        for (double d : *arr) put_f64(out, d);
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw FormatError("cannot open '" + path.string() + "' for writing");
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
}

PolicyWeights load_weights(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw FormatError("cannot open '" + path.string() + "'");
    std::string in((std::istreambuf_iterator<char>(file)),
                   std::istreambuf_iterator<char>());
    if (in.size() < 17 || std::memcmp(in.data(), kMagic, 4) != 0)
        throw FormatError("corrupt weight file header");
    std::size_t at = 4;
    const std::uint32_t version = get_u32(in, at);
    if (version != kWeightFormatVersion)
        throw FormatError("unsupported weight format version " + std::to_string(version));
    PolicyWeights w;
    w.hidden_dim = get_u32(in, at);
    w.logical_dim = get_u32(in, at);
    if (w.hidden_dim < 1 || w.logical_dim < 1)
        throw FormatError("corrupt weight file header");
    const auto tnorm_id = static_cast<unsigned char>(in[at++]);
    if (tnorm_id > 2) throw FormatError("unknown t-norm id in weight file");
    w.tnorm = static_cast<TNormKind>(tnorm_id);
    auto read = [&](std::vector<double>& arr, std::size_t len) {
        arr.resize(len);
        for (double& d : arr) d = get_f64(in, at);
    };
    read(w.w_in, 3ull * w.hidden_dim);
    read(w.w_h, static_cast<std::size_t>(w.hidden_dim) * w.hidden_dim);
    read(w.bias, w.hidden_dim);
    read(w.w_out, w.hidden_dim);
    read(w.b_out, 1);
    read(w.init_hidden, static_cast<std::size_t>(w.logical_dim) * w.hidden_dim);
    if (at != in.size()) throw FormatError("trailing bytes in weight file");
    return w;
}

DecisionOutcome decision_step(const PolicyWeights& w, std::span<const double> tau,
                              std::span<const double> phi, std::span<const double> mu,
                              std::span<const double> hidden) {
    const std::size_t n = tau.size();
    const std::uint32_t H = w.hidden_dim;
    if (phi.size() != n || mu.size() != n || hidden.size() != n * H)
        throw std::invalid_argument("decision_step: shape mismatch");
    DecisionOutcome out;
    out.delta.resize(n);
    out.hidden.resize(n * H);
    for (std::size_t i = 0; i < n; ++i) {
        const double x[3] = {tau[i], phi[i], mu[i]};
        const double* h = hidden.data() + i * H;
        double* h_next = out.hidden.data() + i * H;
        for (std::uint32_t r = 0; r < H; ++r) {
            double a1 = w.bias[r];
            for (std::uint32_t c = 0; c < 3; ++c) a1 += w.w_in[r * 3 + c] * x[c];
            double a2 = 0.0;
            for (std::uint32_t c = 0; c < H; ++c)
                a2 += w.w_h[static_cast<std::size_t>(r) * H + c] * h[c];
            h_next[r] = std::tanh(a1 + a2);
        }
        double d = w.b_out[0];
        for (std::uint32_t c = 0; c < H; ++c) d += w.w_out[c] * h_next[c];
        out.delta[i] = 1.0 / (1.0 + std::exp(-d));
    }
    return out;
}

ForwardResult ndprop_forward(const GroundProgram& p, const PolicyWeights& w,
                             const ForwardConfig& cfg) {
    const std::size_t n = p.atom_count();
    const std::uint32_t H = w.hidden_dim, L = w.logical_dim;
    if (L < 1) throw std::invalid_argument("logical_dim must be >= 1");

    const std::vector<double> tau0 = lifted_tau0(p);
    struct Running {
        std::vector<double> tau, phi, hidden;
    };
    std::vector<Running> run(L);
    for (std::uint32_t l = 0; l < L; ++l) {
        run[l].tau = tau0;
        run[l].phi.assign(n, 0.0);
        run[l].hidden.resize(n * H);
        for (std::size_t i = 0; i < n; ++i) {
            const std::vector<double> h0 = initial_hidden(w, l, i);
            std::copy(h0.begin(), h0.end(), run[l].hidden.data() + i * H);
        }
    }

    ForwardResult result;
    for (std::size_t round = 0; round < cfg.outer_iterations; ++round) {
        for (std::uint32_t l = 0; l < L; ++l) {
            Running& s = run[l];
            const std::vector<double> mu = undecided_degree(s.tau, s.phi, w.tnorm);
            std::vector<double> delta;
            if (cfg.delta_override) {
                delta = cfg.delta_override(round, l, s.tau, s.phi, mu);
            } else {
                DecisionOutcome dec = decision_step(w, s.tau, s.phi, mu, s.hidden);
                delta = std::move(dec.delta);
                s.hidden = std::move(dec.hidden);
            }
            if (cfg.hard_threshold)
                for (double& d : delta) d = d >= 0.5 ? 1.0 : 0.0;
            s.phi = decision_update(s.phi, mu, delta);
            if (cfg.inner_sweeps > 0) {
                s.tau = propagate_fixed(p, s.phi, std::move(s.tau), w.tnorm,
                                        cfg.inner_sweeps);
            } else {
                PropagateResult prop = propagate(p, s.phi, std::move(s.tau), w.tnorm,
                                                 cfg.eps, cfg.max_inner);
                s.tau = std::move(prop.tau);
            }
        }
        if (cfg.record_trace) {
            std::vector<StateSnapshot> snap(L);
            for (std::uint32_t l = 0; l < L; ++l) snap[l] = {run[l].tau, run[l].phi};
            result.trace.push_back(std::move(snap));
        }
    }

    result.states.resize(L);
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t l = 0; l < L; ++l) {
        StateTrajectory& out = result.states[l];
        out.tau = std::move(run[l].tau);
        out.phi = std::move(run[l].phi);
        out.p = membership(out.tau, out.phi);
        out.binarization = binarization_distance(out.p);
        if (out.binarization < best) {
            best = out.binarization;
            result.best_state = l;
        }
    }
    const StateTrajectory& chosen = result.states[result.best_state];
    result.cert = certify(p, chosen.tau, chosen.phi, w.tnorm, cfg.binary_tol, cfg.eps,
                          cfg.max_inner);
    return result;
}

namespace {

ad::DiffValue bce_of_model(ad::Tape& tape, ad::DiffValue p, const Interpretation& model,
                           std::size_t n) {
    std::vector<double> y(n, 0.0), inv(n, 1.0);
    model.for_each([&](std::size_t i) {
        y[i] = 1.0;
        inv[i] = 0.0;
    });
    const ad::DiffValue yc = tape.constant(std::move(y));
    const ad::DiffValue invc = tape.constant(std::move(inv));
    const ad::DiffValue one = tape.constant(1.0);
    const ad::DiffValue hit = tape.mul(yc, tape.log_safe(p));
    const ad::DiffValue miss = tape.mul(invc, tape.log_safe(tape.sub(one, p)));
    return tape.sub(tape.constant(0.0), tape.mean(tape.add(hit, miss)));
}

} // namespace

ad::DiffValue min_bce_loss(ad::Tape& tape, ad::DiffValue p,
                           const std::vector<Interpretation>& models,
                           std::size_t* chosen_model) {
    if (models.empty())
        throw std::invalid_argument("inconsistent instance: no stable models");
    const std::size_t n = tape.size(p);
    ad::DiffValue best{};
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    for (std::size_t m = 0; m < models.size(); ++m) {
        const ad::DiffValue candidate = bce_of_model(tape, p, models[m], n);
        if (tape.scalar(candidate) < best_val) {
            best_val = tape.scalar(candidate);
            best = candidate;
            best_idx = m;
        }
    }
    if (chosen_model) *chosen_model = best_idx;
    return best;
}

WeightLeaves make_weight_leaves(ad::Tape& tape, const PolicyWeights& w) {
    return {tape.leaf(w.w_in), tape.leaf(w.w_h), tape.leaf(w.bias), tape.leaf(w.w_out),
            tape.leaf(w.b_out)};
}

TapeForward build_training_loss(ad::Tape& tape, const GroundProgram& p,
                                const PolicyWeights& w, const WeightLeaves& leaves,
                                const TrainConfig& cfg,
                                const std::vector<Interpretation>& models,
                                std::optional<std::size_t> fixed_state,
                                std::optional<std::size_t> fixed_model,
                                const std::vector<double>* init_tau,
                                const std::vector<double>* init_phi) {
    const std::size_t n = p.atom_count();
    const std::uint32_t H = w.hidden_dim, L = w.logical_dim;
    tape.bind(&p, cfg.tnorm);

    const ad::DiffValue one = tape.constant(1.0);
    const ad::DiffValue zero = tape.constant(0.0);
    const ad::DiffValue half = tape.constant(0.5);
    const ad::DiffValue zero_h = tape.constant(std::vector<double>(H, 0.0));

    const ad::DiffValue tau_init =
        tape.constant(init_tau ? *init_tau : lifted_tau0(p));
    const ad::DiffValue phi_init =
        tape.constant(init_phi ? *init_phi : std::vector<double>(n, 0.0));

    auto fuzzy_and = [&](ad::DiffValue a, ad::DiffValue b) {
        switch (cfg.tnorm) {
            case TNormKind::Goedel: return tape.min(a, b);
            case TNormKind::Product: return tape.mul(a, b);
            case TNormKind::Lukasiewicz:
                return tape.max(tape.sub(tape.add(a, b), one), zero);
        }
        return a;
    };

    TapeForward result;
    result.p_per_state.reserve(L);
    for (std::uint32_t l = 0; l < L; ++l) {
        ad::DiffValue tau = tau_init;
        ad::DiffValue phi = phi_init;
        std::vector<ad::DiffValue> hidden;
        hidden.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            hidden.push_back(tape.constant(initial_hidden(w, l, i)));

        for (std::size_t round = 0; round < cfg.outer_iterations; ++round) {
            const ad::DiffValue mu = fuzzy_and(tape.sub(one, tau), tape.sub(one, phi));
            std::vector<ad::DiffValue> delta_parts;
            delta_parts.reserve(n);
            for (std::uint32_t i = 0; i < n; ++i) {
                const ad::DiffValue x = tape.concat(std::array{
                    tape.pick(tau, i), tape.pick(phi, i), tape.pick(mu, i)});
                const ad::DiffValue pre =
                    tape.add(tape.affine(leaves.w_in, H, 3, x, leaves.bias),
                             tape.affine(leaves.w_h, H, H, hidden[i], zero_h));
                hidden[i] = tape.tanh(pre);
                delta_parts.push_back(tape.sigmoid(
                    tape.affine(leaves.w_out, 1, H, hidden[i], leaves.b_out)));
            }
            const ad::DiffValue delta = tape.concat(delta_parts);
            phi = tape.add(phi, tape.mul(mu, delta));
            for (std::size_t sweep = 0; sweep < cfg.train_inner_sweeps; ++sweep)
                tau = tape.head_aggregate(tape.rule_support_all(tau, phi));
        }
        result.p_per_state.push_back(tape.mul(half, tape.add(tau, tape.sub(one, phi))));
    }

    // Closest-to-binary state selection; discrete, so gradient flows only
    // through the chosen trajectory.
    if (fixed_state) {
        result.best_state = *fixed_state;
    } else {
        double best = std::numeric_limits<double>::infinity();
        for (std::uint32_t l = 0; l < L; ++l) {
            const double d = binarization_distance(tape.value(result.p_per_state[l]));
            if (d < best) {
                best = d;
                result.best_state = l;
            }
        }
    }

    switch (cfg.loss_mode) {
        case LossMode::BestState: {
            const ad::DiffValue p_best = result.p_per_state[result.best_state];
            if (fixed_model) {
                result.chosen_model = *fixed_model;
                result.loss = bce_of_model(tape, p_best, models[*fixed_model], n);
            } else {
                result.loss =
                    min_bce_loss(tape, p_best, models, &result.chosen_model);
            }
            break;
        }
        case LossMode::MeanStates: {
            ad::DiffValue acc = min_bce_loss(tape, result.p_per_state[0], models);
            for (std::uint32_t l = 1; l < L; ++l)
                acc = tape.add(acc, min_bce_loss(tape, result.p_per_state[l], models));
            result.loss = tape.mul(tape.constant(1.0 / L), acc);
            break;
        }
        case LossMode::MinStates: {
            ad::DiffValue best = min_bce_loss(tape, result.p_per_state[0], models);
            for (std::uint32_t l = 1; l < L; ++l) {
                const ad::DiffValue candidate =
                    min_bce_loss(tape, result.p_per_state[l], models);
                if (tape.scalar(candidate) < tape.scalar(best)) best = candidate;
            }
            result.loss = best;
            break;
        }
    }
    return result;
}

bool ndprop_solves(const GroundProgram& p, const PolicyWeights& w,
                   std::size_t outer_iterations) {
    ForwardConfig cfg;
    cfg.outer_iterations = outer_iterations;
    return ndprop_forward(p, w, cfg).cert.kind == CertKind::Stable;
}

namespace {

struct AdamState {
    std::vector<double> m, v;
};

void adam_update(std::vector<double>& param, const std::vector<double>& grad,
                 AdamState& state, double lr, std::size_t t) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    if (state.m.empty()) {
        state.m.assign(param.size(), 0.0);
        state.v.assign(param.size(), 0.0);
    }
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (std::size_t i = 0; i < param.size(); ++i) {
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * grad[i];
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * grad[i] * grad[i];
        const double mhat = state.m[i] / c1;
        const double vhat = state.v[i] / c2;
        param[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

struct InstanceGrad {
    double loss = 0.0;
    std::vector<double> w_in, w_h, bias, w_out, b_out;
};

InstanceGrad instance_gradient(const TrainInstance& inst, const PolicyWeights& w,
                               const TrainConfig& cfg) {
    ad::Tape tape;
    const WeightLeaves leaves = make_weight_leaves(tape, w);
    const TapeForward fwd =
        build_training_loss(tape, inst.program, w, leaves, cfg, inst.models);
    tape.backward(fwd.loss);
    InstanceGrad g;
    g.loss = tape.scalar(fwd.loss);
    g.w_in = tape.grad(leaves.w_in);
    g.w_h = tape.grad(leaves.w_h);
    g.bias = tape.grad(leaves.bias);
    g.w_out = tape.grad(leaves.w_out);
    g.b_out = tape.grad(leaves.b_out);
    return g;
}

double validation_rate(const std::vector<TrainInstance>& val, const PolicyWeights& w,
                       std::size_t iterations, std::size_t threads) {
    if (val.empty()) return 0.0;
    std::vector<char> solved(val.size(), 0);
    parallel_for(threads, val.size(), [&](std::size_t i) {
        solved[i] = ndprop_solves(val[i].program, w, iterations) ? 1 : 0;
    });
    std::size_t count = 0;
    for (char s : solved) count += s;
    return 100.0 * static_cast<double>(count) / static_cast<double>(val.size());
}

} // namespace

TrainResult train(const std::vector<TrainInstance>& train_set,
                  const std::vector<TrainInstance>& val_set, const TrainConfig& cfg) {
    if (train_set.empty()) throw std::invalid_argument("empty training set");
    for (const TrainInstance& inst : train_set)
        if (inst.models.empty())
            throw std::invalid_argument("inconsistent instance in training set");

    const std::size_t threads =
        cfg.threads ? cfg.threads
                    : std::max<std::size_t>(1, std::thread::hardware_concurrency());

    PolicyWeights weights = init_weights(cfg.hidden_dim, cfg.logical_dim, cfg.seed);
    weights.tnorm = cfg.tnorm;

    TrainResult result;
    result.initial_val_rate =
        validation_rate(val_set, weights, cfg.outer_iterations, threads);
    result.weights = weights;
    result.best_epoch = 0;
    double best_rate = result.initial_val_rate;

    AdamState adam_w_in, adam_w_h, adam_bias, adam_w_out, adam_b_out;
    std::size_t adam_t = 0;

    Rng master(cfg.seed);
    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng shuffle_rng = master.split(epoch);
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t bsize = std::min(cfg.batch_size, order.size() - start);
            std::vector<InstanceGrad> grads(bsize);
            parallel_for(threads, bsize, [&](std::size_t k) {
                grads[k] = instance_gradient(train_set[order[start + k]], weights, cfg);
            });

            InstanceGrad total;
            total.w_in.assign(weights.w_in.size(), 0.0);
            total.w_h.assign(weights.w_h.size(), 0.0);
            total.bias.assign(weights.bias.size(), 0.0);
            total.w_out.assign(weights.w_out.size(), 0.0);
            total.b_out.assign(weights.b_out.size(), 0.0);
            for (std::size_t k = 0; k < bsize; ++k) {
                const InstanceGrad& g = grads[k];
                if (!std::isfinite(g.loss))
                    throw std::runtime_error(
                        "training diverged: non-finite loss at epoch " +
                        std::to_string(epoch) + ", instance " +
                        std::to_string(order[start + k]));
                epoch_loss += g.loss;
                for (std::size_t i = 0; i < total.w_in.size(); ++i)
                    total.w_in[i] += g.w_in[i];
                for (std::size_t i = 0; i < total.w_h.size(); ++i)
                    total.w_h[i] += g.w_h[i];
                for (std::size_t i = 0; i < total.bias.size(); ++i)
                    total.bias[i] += g.bias[i];
                for (std::size_t i = 0; i < total.w_out.size(); ++i)
                    total.w_out[i] += g.w_out[i];
                total.b_out[0] += g.b_out[0];
            }
            const double scale = 1.0 / static_cast<double>(bsize);
            for (auto* arr : {&total.w_in, &total.w_h, &total.bias, &total.w_out,
                              &total.b_out})
                for (double& x : *arr) x *= scale;

            ++adam_t;
            adam_update(weights.w_in, total.w_in, adam_w_in, cfg.learning_rate, adam_t);
            adam_update(weights.w_h, total.w_h, adam_w_h, cfg.learning_rate, adam_t);
            adam_update(weights.bias, total.bias, adam_bias, cfg.learning_rate, adam_t);
            adam_update(weights.w_out, total.w_out, adam_w_out, cfg.learning_rate,
                        adam_t);
            adam_update(weights.b_out, total.b_out, adam_b_out, cfg.learning_rate,
                        adam_t);
        }

        EpochLog log;
        log.epoch = epoch;
        log.mean_loss = epoch_loss / static_cast<double>(train_set.size());
        log.val_solve_rate =
            validation_rate(val_set, weights, cfg.outer_iterations, threads);
        result.log.push_back(log);
        if (cfg.on_epoch) cfg.on_epoch(log);
        if (log.val_solve_rate > best_rate) {
            best_rate = log.val_solve_rate;
            result.weights = weights;
            result.best_epoch = epoch;
        }
    }
    return result;
}

} // namespace ndprop
