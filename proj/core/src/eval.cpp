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

#include "ndprop/eval.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "ndprop/dprop.hpp"

namespace ndprop {

namespace {

using nlohmann::json;

std::string format_double(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

std::string mode_label(const EvalConfig& cfg) {
    switch (cfg.mode) {
        case EvalMode::RDProp: return "rdprop-" + std::to_string(cfg.restarts);
        case EvalMode::NDProp: return "ndprop";
        case EvalMode::RandomBaseline: return "random";
    }
    return "?";
}

} // namespace

std::string EvalReport::to_csv() const {
    std::string out = "# ndprop eval csv v1\n";
    out += "split,mode,solve_rate,mean_decisions,wall_ms,seed\n";
    for (const SplitReport& r : rows) {
        out += r.split + "," + r.mode_label + ",";
        out += format_double("%.2f", r.solve_rate) + ",";
        out += format_double("%.3f", r.mean_decisions) + ",";
        if (r.wall_ms) out += format_double("%.0f", *r.wall_ms);
        out += "," + std::to_string(r.seed) + "\n";
    }
    return out;
}

std::string EvalReport::to_table() const {
    std::string out = "split    mode         solve%   mean-dec   wall-ms\n";
    for (const SplitReport& r : rows) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-8s %-12s %7.2f %10.3f %9s\n", r.split.c_str(),
                      r.mode_label.c_str(), r.solve_rate, r.mean_decisions,
                      r.wall_ms ? format_double("%.0f", *r.wall_ms).c_str() : "-");
        out += buf;
    }
    return out;
}

EvalReport run_eval(const EvalConfig& cfg, const std::filesystem::path& dataset_dir) {
    std::vector<DatasetInstance> instances = load_dataset(dataset_dir, "test");
    const Split split = dataset_split(dataset_dir);

    PolicyWeights weights;
    if (cfg.mode == EvalMode::NDProp) weights = load_weights(cfg.weights_path);

    const auto started = std::chrono::steady_clock::now();
    std::size_t solved = 0;
    std::size_t decisions_on_solved = 0;
    Rng master(cfg.seed);

    for (const DatasetInstance& inst : instances) {
        const GroundProgram& p = inst.program;
        switch (cfg.mode) {
            case EvalMode::RDProp: {
                Rng rng = master.split(inst.id);
                const RunOutcome outcome = rdprop_solve(p, cfg.restarts, rng);
                if (outcome.status == RunStatus::Success) {
                    if (!is_stable(p, outcome.model))
                        throw std::logic_error("unverified solve from rdprop");
                    ++solved;
                    decisions_on_solved += outcome.decisions.size();
                }
                break;
            }
            case EvalMode::NDProp: {
                ForwardConfig fwd;
                fwd.outer_iterations = cfg.iters;
                const ForwardResult result = ndprop_forward(p, weights, fwd);
                if (result.cert.kind == CertKind::Stable) {
                    if (!is_stable(p, result.cert.model))
                        throw std::logic_error("unverified solve from ndprop");
                    ++solved;
                    decisions_on_solved += cfg.iters;
                }
                break;
            }
            case EvalMode::RandomBaseline: {
                Rng rng = master.split(inst.id);
                Interpretation guess(p.atom_count());
                for (std::size_t i = 0; i < p.atom_count(); ++i)
                    if (rng.bernoulli(0.5)) guess.insert(i);
                if (is_stable(p, guess)) ++solved;
                break;
            }
        }
    }
    const auto elapsed = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - started)
                             .count();

    SplitReport row;
    row.split = split_name(split);
    row.mode_label = mode_label(cfg);
    row.seed = cfg.seed;
    const std::size_t count = instances.size();
    row.solve_rate =
        count ? 100.0 * static_cast<double>(solved) / static_cast<double>(count) : 0.0;
    row.mean_decisions =
        solved ? static_cast<double>(decisions_on_solved) / static_cast<double>(solved)
               : 0.0;
    if (cfg.timing) row.wall_ms = elapsed;

    EvalReport report;
    report.rows.push_back(std::move(row));
    return report;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw FormatError("cannot write '" + path.string() + "'");
    file.write(content.data(), static_cast<std::streamsize>(content.size()));
}

EvalConfig eval_config_for(const std::string& label, const std::filesystem::path& weights,
                           std::uint64_t seed, std::size_t iters) {
    EvalConfig cfg;
    cfg.seed = seed;
    cfg.iters = iters;
    cfg.weights_path = weights;
    if (label == "ndprop") {
        cfg.mode = EvalMode::NDProp;
    } else if (label == "random") {
        cfg.mode = EvalMode::RandomBaseline;
    } else if (label.rfind("rdprop-", 0) == 0) {
        cfg.mode = EvalMode::RDProp;
        cfg.restarts = std::stoul(label.substr(7));
    } else {
        throw std::invalid_argument("unknown eval mode '" + label + "'");
    }
    return cfg;
}

} // namespace

ExperimentOutcome run_experiment_suite(const std::filesystem::path& config_path,
                                       const std::filesystem::path& output_dir) {
    std::ifstream file(config_path);
    if (!file) throw FormatError("cannot read '" + config_path.string() + "'");
    json config = json::parse(file);

    // Resolve every knob now so the embedded copy fully describes the run.
    json resolved;
    resolved["seed"] = config.value("seed", std::uint64_t{0});
    resolved["generator"] = config.value("generator", std::string("n2l"));
    resolved["split"] = config.value("split", std::string("easy"));
    resolved["counts"] = {
        {"train", config.contains("counts") ? config["counts"].value("train", 500) : 500},
        {"val", config.contains("counts") ? config["counts"].value("val", 100) : 100},
        {"test", config.contains("counts") ? config["counts"].value("test", 100) : 100}};
    resolved["c1"] = config.value("c1", 5.0);
    resolved["c2"] = config.value("c2", 1.0);
    resolved["rules_per_atom"] = config.value("rules_per_atom", 5.0);
    resolved["oracle_cap"] = config.value("oracle_cap", kDefaultOracleCap);
    const json train_in = config.value("train", json::object());
    resolved["train"] = {{"epochs", train_in.value("epochs", 200)},
                         {"hidden", train_in.value("hidden", 32)},
                         {"logical", train_in.value("logical", 8)},
                         {"lr", train_in.value("lr", 1e-3)},
                         {"batch", train_in.value("batch", 64)},
                         {"tnorm", train_in.value("tnorm", std::string("godel"))},
                         {"outer_iterations", train_in.value("outer_iterations", 10)},
                         {"train_inner_sweeps", train_in.value("train_inner_sweeps", 10)},
                         {"test_outer_iterations",
                          train_in.value("test_outer_iterations", 50)}};
    resolved["eval_modes"] = config.value(
        "eval_modes", json::array({"rdprop-1", "rdprop-10", "rdprop-100", "ndprop",
                                   "random"}));

    std::filesystem::create_directories(output_dir);
    const std::filesystem::path data_dir = output_dir / "data";

    BuildConfig build;
    build.kind = generator_from_name(resolved["generator"].get<std::string>());
    build.split = split_from_name(resolved["split"].get<std::string>());
    build.counts = {resolved["counts"]["train"].get<std::size_t>(),
                    resolved["counts"]["val"].get<std::size_t>(),
                    resolved["counts"]["test"].get<std::size_t>()};
    build.seed = resolved["seed"].get<std::uint64_t>();
    build.oracle_cap = resolved["oracle_cap"].get<std::size_t>();
    build.c1 = resolved["c1"].get<double>();
    build.c2 = resolved["c2"].get<double>();
    build.rules_per_atom = resolved["rules_per_atom"].get<double>();
    build_dataset(build, data_dir);

    TrainConfig tc;
    tc.epochs = resolved["train"]["epochs"].get<std::size_t>();
    tc.hidden_dim = resolved["train"]["hidden"].get<std::uint32_t>();
    tc.logical_dim = resolved["train"]["logical"].get<std::uint32_t>();
    tc.learning_rate = resolved["train"]["lr"].get<double>();
    tc.batch_size = resolved["train"]["batch"].get<std::size_t>();
    tc.tnorm = tnorm_from_name(resolved["train"]["tnorm"].get<std::string>());
    tc.outer_iterations = resolved["train"]["outer_iterations"].get<std::size_t>();
    tc.train_inner_sweeps = resolved["train"]["train_inner_sweeps"].get<std::size_t>();
    tc.test_outer_iterations =
        resolved["train"]["test_outer_iterations"].get<std::size_t>();
    tc.seed = build.seed;

    const std::filesystem::path weights_path = output_dir / "weights.ndpw";
    if (tc.epochs > 0) {
        const auto train_set = to_train_instances(load_dataset(data_dir, "train"));
        const auto val_set = to_train_instances(load_dataset(data_dir, "val"));
        const TrainResult result = train(train_set, val_set, tc);
        save_weights(result.weights, weights_path);
        std::string log_csv = "epoch,mean_loss,val_solve_rate\n";
        log_csv += "0,," + format_double("%.2f", result.initial_val_rate) + "\n";
        for (const EpochLog& e : result.log)
            log_csv += std::to_string(e.epoch) + "," +
                       format_double("%.6f", e.mean_loss) + "," +
                       format_double("%.2f", e.val_solve_rate) + "\n";
        write_text(output_dir / "train_log.csv", log_csv);
    } else {
        PolicyWeights w = init_weights(tc.hidden_dim, tc.logical_dim, tc.seed);
        w.tnorm = tc.tnorm;
        save_weights(w, weights_path);
    }

    ExperimentOutcome outcome;
    outcome.output_dir = output_dir;
    for (const json& mode : resolved["eval_modes"]) {
        const EvalConfig ec = eval_config_for(mode.get<std::string>(), weights_path,
                                              build.seed, tc.test_outer_iterations);
        const EvalReport part = run_eval(ec, data_dir);
        outcome.eval.rows.insert(outcome.eval.rows.end(), part.rows.begin(),
                                 part.rows.end());
    }
    write_text(output_dir / "eval.csv", outcome.eval.to_csv());
    write_text(output_dir / "config.resolved.json", resolved.dump(2) + "\n");
    return outcome;
}

} // namespace ndprop
