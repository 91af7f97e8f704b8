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

#include <filesystem>
#include <functional>
#include <optional>
#include <span>

#include "ndprop/fuzzy.hpp"
#include "ndprop/rng.hpp"
#include "ndprop/tape.hpp"

namespace ndprop {

/// Parameters of the shared per-atom recurrent decision cell plus its
/// readout. The same cell is applied to every atom, so programs of any size
/// share one weight set; atom structure reaches the policy through
/// propagation's effect on the degree vectors between rounds.
///
/// init_hidden holds one seed-random H-vector per logical state. It is not
/// trained, but it is what makes the otherwise identical trajectories
/// diverge, and it ships inside the weight file so evaluation is
/// reproducible from the file alone.
struct PolicyWeights {
    std::uint32_t hidden_dim = 0;
    std::uint32_t logical_dim = 0;
    TNormKind tnorm = TNormKind::Goedel;
    std::vector<double> w_in;        // H x 3, row-major
    std::vector<double> w_h;         // H x H
    std::vector<double> bias;        // H
    std::vector<double> w_out;       // 1 x H readout
    std::vector<double> b_out;       // 1
    std::vector<double> init_hidden; // L x H

    std::size_t cell_parameter_count() const {
        const std::size_t h = hidden_dim;
        return 3 * h + h * h + h + h + 1;
    }
};

/// Uniform initialization in [-1/sqrt(H), 1/sqrt(H)], deterministic under seed.
PolicyWeights init_weights(std::uint32_t hidden_dim, std::uint32_t logical_dim,
                           std::uint64_t seed);

/// The hidden vector atom `atom` starts from in logical state
/// `logical_state`: the stored per-state row under a fixed per-(atom, unit)
/// sign pattern. The signs are what give atoms with identical degree
/// histories distinct trajectories.
std::vector<double> initial_hidden(const PolicyWeights& w, std::size_t logical_state,
                                   std::size_t atom);

/// Binary weight file: magic "NDPW", u32 version, u32 H, u32 L, u8 t-norm
/// id, then little-endian f64 arrays in declared order. Round-trips are
/// bit-exact and the header wins over caller expectations.
void save_weights(const PolicyWeights& w, const std::filesystem::path& path);
PolicyWeights load_weights(const std::filesystem::path& path);

struct DecisionOutcome {
    std::vector<double> delta;  // per atom, strictly within (0,1)
    std::vector<double> hidden; // n x H, post-update
};

/// One decision step of a single logical state: the shared cell consumes
/// [tau_i, phi_i, mu_i] and that atom's hidden vector, yielding decision
/// scores sigma(readout(tanh(W_in x + W_h h + b))).
DecisionOutcome decision_step(const PolicyWeights& w, std::span<const double> tau,
                              std::span<const double> phi, std::span<const double> mu,
                              std::span<const double> hidden);

using DeltaOverride = std::function<std::vector<double>(
    std::size_t round, std::size_t state, std::span<const double> tau,
    std::span<const double> phi, std::span<const double> mu)>;

struct ForwardConfig {
    std::size_t outer_iterations = 10;
    /// 0 = adaptive propagation (eps / max_inner); a positive value runs
    /// exactly that many unrolled sweeps, as in training.
    std::size_t inner_sweeps = 0;
    double eps = kDefaultConvergenceEps;
    std::size_t max_inner = 0;
    double binary_tol = kDefaultBinaryTol;
    /// Test hook: snap decision scores to {0,1}, cutting at 0.5 (>= goes up).
    bool hard_threshold = false;
    /// Test hook: bypass the cell entirely and inject decision scores.
    DeltaOverride delta_override;
    bool record_trace = false;
};

struct StateTrajectory {
    std::vector<double> tau, phi, p;
    double binarization = 0.0; // mean_i min(p_i, 1 - p_i); 0 means fully binary
};

struct StateSnapshot {
    std::vector<double> tau, phi;
};

struct ForwardResult {
    std::vector<StateTrajectory> states;
    std::size_t best_state = 0;
    Certification cert; // certification of the best state
    std::vector<std::vector<StateSnapshot>> trace; // [round][state], when recorded
};

/// Full multi-state run: tau0 lifts the crisp negation-free consequences,
/// phi0 = 0, then outer_iterations rounds of decide / update / propagate.
/// The best state is the one closest to binary; it is certified through the
/// fuzzy engine (and thereby re-checked by the crisp engine).
ForwardResult ndprop_forward(const GroundProgram& p, const PolicyWeights& w,
                             const ForwardConfig& cfg);

/// Tape-built binary cross entropy of p against the indicator of every
/// stable model; returns the branch with the smallest forward value, so the
/// gradient flows through the chosen model only. Throws on an empty model
/// list (inconsistent instances are filtered at dataset build).
ad::DiffValue min_bce_loss(ad::Tape& tape, ad::DiffValue p,
                           const std::vector<Interpretation>& models,
                           std::size_t* chosen_model = nullptr);

enum class LossMode { BestState, MeanStates, MinStates };

struct EpochLog {
    std::size_t epoch = 0;
    double mean_loss = 0.0;
    double val_solve_rate = 0.0;
};

struct TrainConfig {
    std::size_t epochs = 1000;
    std::size_t outer_iterations = 10;
    std::size_t train_inner_sweeps = 10;
    std::size_t test_outer_iterations = 50;
    std::uint32_t hidden_dim = 32;
    std::uint32_t logical_dim = 32;
    double learning_rate = 1e-3;
    std::size_t batch_size = 64;
    TNormKind tnorm = TNormKind::Goedel;
    std::uint64_t seed = 0;
    LossMode loss_mode = LossMode::BestState;
    std::size_t threads = 0; // 0 = hardware concurrency
    std::function<void(const EpochLog&)> on_epoch; // progress hook
};

struct WeightLeaves {
    ad::DiffValue w_in, w_h, bias, w_out, b_out;
};

WeightLeaves make_weight_leaves(ad::Tape& tape, const PolicyWeights& w);

struct TapeForward {
    ad::DiffValue loss;
    std::size_t best_state = 0;
    std::size_t chosen_model = 0;
    std::vector<ad::DiffValue> p_per_state;
};

/// Differentiable forward + loss with a fixed number of unrolled sweeps.
/// fixed_state / fixed_model pin the discrete argmin branches, which keeps
/// finite-difference probes on the same smooth piece as the analytic run.
/// init_tau / init_phi override the crisp initialization (used to probe
/// gradients at randomized interior states).
TapeForward build_training_loss(ad::Tape& tape, const GroundProgram& p,
                                const PolicyWeights& w, const WeightLeaves& leaves,
                                const TrainConfig& cfg,
                                const std::vector<Interpretation>& models,
                                std::optional<std::size_t> fixed_state = {},
                                std::optional<std::size_t> fixed_model = {},
                                const std::vector<double>* init_tau = nullptr,
                                const std::vector<double>* init_phi = nullptr);

struct TrainInstance {
    GroundProgram program;
    std::vector<Interpretation> models;
};

struct TrainResult {
    PolicyWeights weights; // best-validation checkpoint
    std::vector<EpochLog> log;
    double initial_val_rate = 0.0;
    std::size_t best_epoch = 0; // 0 = the untrained weights were never beaten
};

/// Minibatch Adam on the min-BCE objective. Deterministic for a fixed seed
/// and data: shuffling, batch reduction order, and thread partitioning all
/// derive from the config. Aborts with diagnostics if the loss diverges.
TrainResult train(const std::vector<TrainInstance>& train_set,
                  const std::vector<TrainInstance>& val_set, const TrainConfig& cfg);

/// Evaluation helper: does one forward solve the instance, i.e. does the
/// best state certify as stable.
bool ndprop_solves(const GroundProgram& p, const PolicyWeights& w,
                   std::size_t outer_iterations);

} // namespace ndprop
