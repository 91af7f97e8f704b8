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

#include <optional>

#include "ndprop/generators.hpp"

namespace ndprop {

enum class EvalMode { RDProp, NDProp, RandomBaseline };

struct EvalConfig {
    EvalMode mode = EvalMode::RDProp;
    std::size_t restarts = 1;           // rdprop
    std::filesystem::path weights_path; // ndprop
    std::size_t iters = 50;             // ndprop outer rounds at test time
    std::uint64_t seed = 0;
    /// Measured wall time is inherently nondeterministic, so it enters the
    /// CSV only on request; reports stay byte-identical across reruns
    /// otherwise.
    bool timing = false;
};

struct SplitReport {
    std::string split;
    std::string mode_label;
    double solve_rate = 0.0;     // percent of test instances with a verified model
    double mean_decisions = 0.0; // over solved instances
    std::optional<double> wall_ms;
    std::uint64_t seed = 0;
};

struct EvalReport {
    std::vector<SplitReport> rows;
    /// Versioned schema: a `# ndprop eval csv v1` comment line, then
    /// `split,mode,solve_rate,mean_decisions,wall_ms,seed`.
    std::string to_csv() const;
    std::string to_table() const;
};

/// Evaluates the test section of a dataset. Every claimed solve is
/// re-verified with the crisp stability check before it is counted; a
/// verification failure is an internal invariant violation.
EvalReport run_eval(const EvalConfig& cfg, const std::filesystem::path& dataset_dir);

struct ExperimentOutcome {
    std::filesystem::path output_dir;
    EvalReport eval;
};

/// End-to-end generate -> (train) -> eval pipeline driven by a JSON config.
/// Writes the dataset, weights, training log, eval CSV, and the resolved
/// config under one output directory; byte-identical on rerun.
ExperimentOutcome run_experiment_suite(const std::filesystem::path& config_path,
                                       const std::filesystem::path& output_dir);

} // namespace ndprop
