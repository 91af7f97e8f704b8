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

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "ndprop/dprop.hpp"
#include "ndprop/eval.hpp"
#include "ndprop/generators.hpp"
#include "ndprop/policy.hpp"
#include "ndprop/tape.hpp"

namespace {

using namespace ndprop;

std::string read_file(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw FormatError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << file.rdbuf();
    return ss.str();
}

GroundProgram load_program(const std::string& path) {
    ParseResult parsed = parse_program(read_file(path));
    for (const std::string& w : parsed.warnings) std::cerr << "warning: " << w << "\n";
    return std::move(parsed.program);
}

std::string model_line(const GroundProgram& p, const Interpretation& model) {
    std::string line;
    model.for_each([&](std::size_t i) {
        if (!line.empty()) line += ' ';
        line += p.atom(static_cast<std::uint32_t>(i)).name;
    });
    return line;
}

std::vector<double> parse_degree_csv(const std::string& text, std::size_t expected) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    if (out.size() != expected)
        throw std::invalid_argument("expected " + std::to_string(expected) +
                                    " comma-separated degrees, got " +
                                    std::to_string(out.size()));
    return out;
}

int cmd_solve(const std::string& program_path, const std::string& policy,
              std::size_t restarts, std::uint64_t seed, std::size_t max_iters) {
    const GroundProgram p = load_program(program_path);
    const auto started = std::chrono::steady_clock::now();
    SolveStats stats;
    RunOutcome outcome;
    bool have_outcome = true;

    if (policy == "random") {
        Rng rng(seed);
        outcome = rdprop_solve(p, restarts, rng, &stats, max_iters);
    } else { // guided: steer toward the first oracle model, a Theorem-1 demo
        const std::vector<Interpretation> models = enumerate_stable_models(p);
        if (models.empty()) {
            have_outcome = false;
        } else {
            Rng rng(seed);
            outcome = dprop_run(p, guided_policy(models.front()), rng,
                                max_iters ? max_iters : p.atom_count());
            stats.runs_attempted = 1;
            stats.decisions_total = outcome.decisions.size();
        }
    }

    const auto ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - started)
                        .count();
    if (have_outcome && outcome.status == RunStatus::Success) {
        if (!is_stable(p, outcome.model))
            throw std::logic_error("solver returned an unstable model");
        std::cout << model_line(p, outcome.model) << "\n";
    } else {
        std::cout << "UNSAT-WITHIN-BUDGET\n";
    }
    std::cerr << "runs=" << stats.runs_attempted << " decisions=" << stats.decisions_total
              << " ms=" << static_cast<long long>(ms) << "\n";
    return 0;
}

int cmd_enumerate(const std::string& program_path, std::size_t cap) {
    const GroundProgram p = load_program(program_path);
    for (const Interpretation& m : enumerate_stable_models(p, cap))
        std::cout << model_line(p, m) << "\n";
    return 0;
}

int cmd_check(const std::string& program_path, const std::string& tau_csv,
              const std::string& phi_csv, const std::string& tnorm, double binary_tol,
              double eps, std::size_t max_inner) {
    const GroundProgram p = load_program(program_path);
    const std::vector<double> tau = parse_degree_csv(tau_csv, p.atom_count());
    const std::vector<double> phi = parse_degree_csv(phi_csv, p.atom_count());
    const Certification cert =
        certify(p, tau, phi, tnorm_from_name(tnorm), binary_tol, eps, max_inner);
    switch (cert.kind) {
        case CertKind::Stable:
            std::cout << "STABLE: " << model_line(p, cert.model) << "\n";
            break;
        case CertKind::NotBinary:
            std::cout << "NOT-BINARY: " << cert.diagnostic << "\n";
            break;
        case CertKind::NotStable:
            std::cout << "NOT-STABLE: " << cert.diagnostic << "\n";
            break;
    }
    return 0;
}

int cmd_generate(const BuildConfig& cfg, const std::string& out_dir,
                 const std::string& from_manifest) {
    const BuildReport report =
        from_manifest.empty() ? build_dataset(cfg, out_dir)
                              : rebuild_from_manifest(from_manifest, out_dir);
    std::cerr << "manifest: " << report.manifest_path.string()
              << " rejected_train=" << report.rejected_train
              << " rejected_val=" << report.rejected_val << "\n";
    std::cout << report.manifest_path.string() << "\n";
    return 0;
}

int cmd_train(const std::string& data_dir, const std::string& out_path,
              TrainConfig cfg, const std::string& log_path) {
    const auto train_set = to_train_instances(load_dataset(data_dir, "train"));
    const auto val_set = to_train_instances(load_dataset(data_dir, "val"));
    cfg.on_epoch = [](const EpochLog& e) {
        std::cerr << "epoch " << e.epoch << " loss=" << e.mean_loss
                  << " val=" << e.val_solve_rate << "\n";
    };
    const TrainResult result = train(train_set, val_set, cfg);
    save_weights(result.weights, out_path);
    std::string log_csv = "epoch,mean_loss,val_solve_rate\n";
    char buf[96];
    std::snprintf(buf, sizeof buf, "0,,%.2f\n", result.initial_val_rate);
    log_csv += buf;
    for (const EpochLog& e : result.log) {
        std::snprintf(buf, sizeof buf, "%zu,%.6f,%.2f\n", e.epoch, e.mean_loss,
                      e.val_solve_rate);
        log_csv += buf;
    }
    if (!log_path.empty()) {
        std::ofstream log(log_path, std::ios::binary | std::ios::trunc);
        log << log_csv;
    }
    std::cerr << "best_epoch=" << result.best_epoch
              << " initial_val=" << result.initial_val_rate << "\n";
    std::cout << out_path << "\n";
    return 0;
}

int cmd_eval(const EvalConfig& cfg, const std::string& data_dir,
             const std::string& csv_path) {
    const EvalReport report = run_eval(cfg, data_dir);
    std::cout << report.to_table();
    if (!csv_path.empty()) {
        std::ofstream csv(csv_path, std::ios::binary | std::ios::trunc);
        csv << report.to_csv();
    }
    return 0;
}

int cmd_gradcheck(std::uint64_t seed, std::size_t programs);

int cmd_experiment(const std::string& config_path, const std::string& output_dir) {
    const ExperimentOutcome outcome = run_experiment_suite(config_path, output_dir);
    std::cout << outcome.eval.to_table();
    return 0;
}

// Small finite-difference audit over random programs; product uses the
// pipeline initialization, godel randomized interior non-tie states.
int cmd_gradcheck(std::uint64_t seed, std::size_t programs) {
    Rng master(seed);
    double worst_product = 0.0, worst_godel = 0.0;
    for (std::size_t k = 0; k < programs; ++k) {
        Rng inst = master.split(k);
        GroundProgram p;
        std::vector<Interpretation> models;
        do {
            const std::size_t n = 5 + inst.uniform_index(4);
            p = gen_n2l({n, 3.0, 1.0, inst.next_u64()});
            models = enumerate_stable_models(p);
        } while (models.empty());

        TrainConfig tc;
        tc.hidden_dim = 6;
        tc.logical_dim = 2;
        tc.outer_iterations = 3;
        tc.train_inner_sweeps = 5;
        const PolicyWeights w0 = init_weights(tc.hidden_dim, tc.logical_dim, inst.next_u64());

        for (TNormKind kind : {TNormKind::Product, TNormKind::Goedel}) {
            tc.tnorm = kind;
            PolicyWeights w = w0;
            w.tnorm = kind;
            std::vector<double> init_tau, init_phi;

            // Godel runs from a randomized interior state, resampled until
            // every min/max comparison is safely away from a tie.
            std::size_t state = 0, model = 0;
            bool usable = false;
            for (int attempt = 0; attempt < 50 && !usable; ++attempt) {
                if (kind == TNormKind::Goedel) {
                    init_tau.resize(p.atom_count());
                    init_phi.resize(p.atom_count());
                    for (auto& x : init_tau) x = inst.uniform_in(0.05, 0.95);
                    for (auto& x : init_phi) x = inst.uniform_in(0.05, 0.95);
                }
                ad::Tape probe;
                const WeightLeaves probe_leaves = make_weight_leaves(probe, w);
                const TapeForward fwd = build_training_loss(
                    probe, p, w, probe_leaves, tc, models, {}, {},
                    init_tau.empty() ? nullptr : &init_tau,
                    init_phi.empty() ? nullptr : &init_phi);
                if (kind == TNormKind::Product || probe.min_kink_gap() > 1e-3) {
                    usable = true;
                    state = fwd.best_state;
                    model = fwd.chosen_model;
                }
            }
            if (!usable) continue;

            auto build = [&](ad::Tape& tape, const std::vector<ad::DiffValue>& leaves) {
                const WeightLeaves wl{leaves[0], leaves[1], leaves[2], leaves[3],
                                      leaves[4]};
                return build_training_loss(tape, p, w, wl, tc, models, state, model,
                                           init_tau.empty() ? nullptr : &init_tau,
                                           init_phi.empty() ? nullptr : &init_phi)
                    .loss;
            };
            const double err = ad::grad_check(
                build, {w.w_in, w.w_h, w.bias, w.w_out, w.b_out}, 1e-5, &p, kind);
            (kind == TNormKind::Product ? worst_product : worst_godel) =
                std::max(kind == TNormKind::Product ? worst_product : worst_godel, err);
        }
    }
    std::cout << "product max_rel_err=" << worst_product << "\n";
    std::cout << "godel   max_rel_err=" << worst_godel << "\n";
    if (worst_product > 1e-4 || worst_godel > 1e-4) {
        std::cerr << "gradient audit failed\n";
        return 2;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ground answer-set solving with decision-propagation, a "
                 "differentiable fuzzy extension, and a trainable decision policy"};
    app.require_subcommand(1);

    // solve
    std::string program_path, policy = "random";
    std::size_t restarts = 1, max_iters = 0;
    std::uint64_t seed = 0;
    auto* solve = app.add_subcommand("solve", "Find a stable model");
    solve->add_option("--program", program_path, "Ground program file")->required();
    solve->add_option("--policy", policy, "random|guided")
        ->check(CLI::IsMember({"random", "guided"}));
    solve->add_option("--restarts", restarts, "Restart budget K");
    solve->add_option("--seed", seed, "Random seed");
    solve->add_option("--max-iters", max_iters, "Decision budget per run (0 = atoms)");

    // enumerate
    std::string enum_program;
    std::size_t cap = kDefaultOracleCap;
    auto* enumerate = app.add_subcommand("enumerate", "Brute-force all stable models");
    enumerate->add_option("--program", enum_program, "Ground program file")->required();
    enumerate->add_option("--cap", cap, "Max atom count for 2^n search");

    // check
    std::string check_program, tau_csv, phi_csv, tnorm = "godel";
    double binary_tol = kDefaultBinaryTol, eps = kDefaultConvergenceEps;
    std::size_t max_inner = 0;
    auto* check = app.add_subcommand("check", "Certify a fuzzy state");
    check->add_option("--program", check_program, "Ground program file")->required();
    check->add_option("--tau", tau_csv, "Comma-separated truth degrees")->required();
    check->add_option("--phi", phi_csv, "Comma-separated falsity degrees")->required();
    check->add_option("--tnorm", tnorm, "godel|product|lukasiewicz")
        ->check(CLI::IsMember({"godel", "product", "lukasiewicz"}));
    check->add_option("--binary-tol", binary_tol, "Binary tolerance");
    check->add_option("--eps", eps, "Convergence threshold");
    check->add_option("--max-inner", max_inner, "Propagation sweep cap (0 = 20n)");

    // generate
    BuildConfig build;
    std::string gen_kind = "n2l", gen_split = "easy", out_dir, from_manifest;
    auto* generate = app.add_subcommand("generate", "Build a labeled random dataset");
    generate->add_option("--kind", gen_kind, "n2l|3lp")
        ->check(CLI::IsMember({"n2l", "3lp"}));
    generate->add_option("--split", gen_split, "easy|medium|hard")
        ->check(CLI::IsMember({"easy", "medium", "hard"}));
    generate->add_option("--out", out_dir, "Output directory")->required();
    generate->add_option("--train", build.counts.train, "Training instances");
    generate->add_option("--val", build.counts.val, "Validation instances");
    generate->add_option("--test", build.counts.test, "Test instances");
    generate->add_option("--seed", build.seed, "Master seed");
    generate->add_option("--c1", build.c1, "N2L pure-rule density");
    generate->add_option("--c2", build.c2, "N2L contradiction-rule density");
    generate->add_option("--ratio", build.rules_per_atom, "3-LP rules per atom");
    generate->add_option("--oracle-cap", build.oracle_cap, "Enumeration cap");
    generate->add_option("--from-manifest", from_manifest,
                         "Rebuild a dataset from an existing manifest");

    // train
    std::string train_data, train_out, train_log, loss_mode = "best";
    TrainConfig tc;
    tc.epochs = 200;
    tc.logical_dim = 8;
    auto* train_cmd = app.add_subcommand("train", "Train the decision policy");
    train_cmd->add_option("--data", train_data, "Dataset directory")->required();
    train_cmd->add_option("--out", train_out, "Weight file to write")->required();
    train_cmd->add_option("--epochs", tc.epochs, "Training epochs");
    train_cmd->add_option("--hidden", tc.hidden_dim, "Hidden dimension H");
    train_cmd->add_option("--logical", tc.logical_dim, "Logical dimension L");
    train_cmd->add_option("--lr", tc.learning_rate, "Learning rate");
    train_cmd->add_option("--batch", tc.batch_size, "Minibatch size");
    train_cmd->add_option("--tnorm", tnorm, "godel|product|lukasiewicz")
        ->check(CLI::IsMember({"godel", "product", "lukasiewicz"}));
    train_cmd->add_option("--seed", tc.seed, "Seed");
    train_cmd->add_option("--iters", tc.outer_iterations, "Decision rounds while training");
    train_cmd->add_option("--inner-sweeps", tc.train_inner_sweeps,
                          "Unrolled propagation sweeps");
    train_cmd->add_option("--test-iters", tc.test_outer_iterations,
                          "Decision rounds at evaluation time");
    train_cmd->add_option("--loss-mode", loss_mode, "best|mean|min")
        ->check(CLI::IsMember({"best", "mean", "min"}));
    train_cmd->add_option("--threads", tc.threads, "Worker threads (0 = auto)");
    train_cmd->add_option("--log", train_log, "Training log CSV path");

    // eval
    EvalConfig ec;
    std::string eval_data, eval_mode = "rdprop", eval_weights, eval_csv;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a solver on a dataset");
    eval_cmd->add_option("--data", eval_data, "Dataset directory")->required();
    eval_cmd->add_option("--mode", eval_mode, "rdprop|ndprop|random")
        ->check(CLI::IsMember({"rdprop", "ndprop", "random"}));
    eval_cmd->add_option("--restarts", ec.restarts, "RDProp restart budget");
    eval_cmd->add_option("--weights", eval_weights, "NDProp weight file");
    eval_cmd->add_option("--iters", ec.iters, "NDProp decision rounds");
    eval_cmd->add_option("--seed", ec.seed, "Seed");
    eval_cmd->add_option("--csv", eval_csv, "CSV output path");
    eval_cmd->add_flag("--timing", ec.timing, "Include measured wall time in the CSV");

    // gradcheck
    std::uint64_t gc_seed = 0;
    std::size_t gc_programs = 5;
    auto* gradcheck = app.add_subcommand("gradcheck",
                                         "Finite-difference audit of the gradients");
    gradcheck->add_option("--seed", gc_seed, "Seed");
    gradcheck->add_option("--programs", gc_programs, "Programs to audit");

    // experiment
    std::string exp_config, exp_out;
    auto* experiment = app.add_subcommand("experiment", "Full generate/train/eval run");
    experiment->add_option("--config", exp_config, "JSON config file")->required();
    experiment->add_option("--output-dir", exp_out, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(program_path, policy, restarts, seed, max_iters);
        if (enumerate->parsed()) return cmd_enumerate(enum_program, cap);
        if (check->parsed())
            return cmd_check(check_program, tau_csv, phi_csv, tnorm, binary_tol, eps,
                             max_inner);
        if (generate->parsed()) {
            build.kind = generator_from_name(gen_kind);
            build.split = split_from_name(gen_split);
            return cmd_generate(build, out_dir, from_manifest);
        }
        if (train_cmd->parsed()) {
            tc.tnorm = tnorm_from_name(tnorm);
            tc.loss_mode = loss_mode == "mean"  ? LossMode::MeanStates
                           : loss_mode == "min" ? LossMode::MinStates
                                                : LossMode::BestState;
            return cmd_train(train_data, train_out, tc, train_log);
        }
        if (eval_cmd->parsed()) {
            ec.mode = eval_mode == "ndprop"   ? EvalMode::NDProp
                      : eval_mode == "random" ? EvalMode::RandomBaseline
                                              : EvalMode::RDProp;
            ec.weights_path = eval_weights;
            return cmd_eval(ec, eval_data, eval_csv);
        }
        if (gradcheck->parsed()) return cmd_gradcheck(gc_seed, gc_programs);
        if (experiment->parsed()) return cmd_experiment(exp_config, exp_out);
    } catch (const std::logic_error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
