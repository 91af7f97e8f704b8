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
#include <string>

#include "ndprop/crisp.hpp"
#include "ndprop/policy.hpp"
#include "ndprop/rng.hpp"

namespace ndprop {

/// Linear-model random negative-two-literal programs: each pure rule
/// `a :- not b.` (a != b) appears independently with probability c1/n and
/// each contradiction rule `a :- not a.` with probability c2/n.
struct N2LParams {
    std::size_t n = 0;
    double c1 = 0.0;
    double c2 = 0.0;
    std::uint64_t seed = 0;
};

/// Random 3-literal-body programs: exactly l rules, each with a uniform
/// head, three distinct body atoms drawn from the non-head atoms, and each
/// body atom negated with probability 1/2. Hard around l/n = 5.
struct ThreeLPParams {
    std::size_t n = 0;
    std::size_t l = 0;
    std::uint64_t seed = 0;
};

GroundProgram gen_n2l(const N2LParams& params);
GroundProgram gen_3lp(const ThreeLPParams& params);

enum class GeneratorKind { N2L, ThreeLP };
enum class Split { Easy, Medium, Hard };

const char* split_name(Split s);
Split split_from_name(const std::string& name);
const char* generator_name(GeneratorKind k);
GeneratorKind generator_from_name(const std::string& name);

/// Atom-count range of a split: easy 5-10, medium 11-50, hard 51-100.
std::pair<std::size_t, std::size_t> split_range(Split s);

struct DatasetCounts {
    std::size_t train = 0;
    std::size_t val = 0;
    std::size_t test = 0;
};

struct BuildConfig {
    GeneratorKind kind = GeneratorKind::N2L;
    Split split = Split::Easy;
    DatasetCounts counts;
    std::uint64_t seed = 0;
    std::size_t oracle_cap = kDefaultOracleCap;
    double c1 = 5.0;            // n2l pure-rule density
    double c2 = 1.0;            // n2l contradiction-rule density
    double rules_per_atom = 5.0; // 3-lp l/n ratio
};

struct BuildReport {
    std::size_t rejected_train = 0; // inconsistent instances regenerated
    std::size_t rejected_val = 0;
    std::filesystem::path manifest_path;
};

/// Writes `<dir>/manifest` plus `train/NNNN.lp`, `train/NNNN.models` (one
/// model per line; empty file when unlabeled or none), and the same for
/// val/ and test/. Train and val instances are labeled by the brute-force
/// oracle and rejection-sampled to have at least one stable model; test
/// instances above the oracle cap carry an empty label file and a
/// labels-unavailable flag in the manifest. Byte-identical for a fixed
/// config, and reproducible from the manifest alone.
BuildReport build_dataset(const BuildConfig& cfg, const std::filesystem::path& dir);

/// Regenerates a dataset directory from a previously written manifest.
BuildReport rebuild_from_manifest(const std::filesystem::path& manifest_path,
                                  const std::filesystem::path& dir);

struct DatasetInstance {
    std::size_t id = 0;
    GroundProgram program;
    std::vector<Interpretation> models;
    bool labels_unavailable = false;
};

/// Loads one section (train/val/test) of a dataset directory.
std::vector<DatasetInstance> load_dataset(const std::filesystem::path& dir,
                                          const std::string& section);

/// Split tag recorded in a dataset's manifest.
Split dataset_split(const std::filesystem::path& dir);

std::vector<TrainInstance> to_train_instances(std::vector<DatasetInstance> instances);

} // namespace ndprop
