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

#include "ndprop/generators.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace ndprop {

namespace {

using nlohmann::json;

std::vector<Atom> numbered_atoms(std::size_t n) {
    std::vector<Atom> atoms(n);
    for (std::size_t i = 0; i < n; ++i)
        atoms[i] = {static_cast<std::uint32_t>(i), "a" + std::to_string(i)};
    return atoms;
}

std::uint64_t rule_key(const Rule& r) {
    std::uint64_t h = 0xcbf29ce484222325ull ^ r.head;
    auto mix = [&h](std::uint64_t v) {
        h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    };
    for (auto a : r.pos_body) mix(a);
    mix(0xffffffffull);
    for (auto a : r.neg_body) mix(a);
    return h;
}

} // namespace

GroundProgram gen_n2l(const N2LParams& params) {
    const std::size_t n = params.n;
    if (n < 2) throw std::invalid_argument("n2l: n must be >= 2");
    if (params.c1 < 0 || params.c2 < 0 || params.c1 > static_cast<double>(n) ||
        params.c2 > static_cast<double>(n))
        throw std::invalid_argument("n2l: c1/n and c2/n must be probabilities");

    const double p_pure = params.c1 / static_cast<double>(n);
    const double p_contra = params.c2 / static_cast<double>(n);
    Rng rng(params.seed);
    std::vector<Rule> rules;
    for (std::uint32_t a = 0; a < n; ++a)
        for (std::uint32_t b = 0; b < n; ++b) {
            if (a == b) continue;
            if (rng.bernoulli(p_pure)) rules.push_back({a, {}, {b}});
        }
    for (std::uint32_t a = 0; a < n; ++a)
        if (rng.bernoulli(p_contra)) rules.push_back({a, {}, {a}});
    return GroundProgram(numbered_atoms(n), std::move(rules));
}

GroundProgram gen_3lp(const ThreeLPParams& params) {
    const std::size_t n = params.n;
    if (n < 4) throw std::invalid_argument("3lp: n must be >= 4");
    if (params.l < 1) throw std::invalid_argument("3lp: l must be >= 1");

    Rng rng(params.seed);
    std::vector<Rule> rules;
    std::unordered_set<std::uint64_t> seen;
    rules.reserve(params.l);
    while (rules.size() < params.l) {
        const auto head = static_cast<std::uint32_t>(rng.uniform_index(n));
        std::uint32_t body[3];
        for (int k = 0; k < 3; ++k) {
            for (;;) {
                const std::size_t x = rng.uniform_index(n - 1);
                const auto atom = static_cast<std::uint32_t>(x >= head ? x + 1 : x);
                bool fresh = true;
                for (int j = 0; j < k; ++j)
                    if (body[j] == atom) fresh = false;
                if (fresh) {
                    body[k] = atom;
                    break;
                }
            }
        }
        Rule rule;
        rule.head = head;
        for (int k = 0; k < 3; ++k)
            (rng.bernoulli(0.5) ? rule.neg_body : rule.pos_body).push_back(body[k]);
        std::sort(rule.pos_body.begin(), rule.pos_body.end());
        std::sort(rule.neg_body.begin(), rule.neg_body.end());
        // Identical rules would be merged by the parser's dedup pass and by
        // the t-conorm aggregation; redraw so the program really has l rules.
        if (seen.insert(rule_key(rule)).second) rules.push_back(std::move(rule));
    }
    return GroundProgram(numbered_atoms(n), std::move(rules));
}

const char* split_name(Split s) {
    switch (s) {
        case Split::Easy: return "easy";
        case Split::Medium: return "medium";
        case Split::Hard: return "hard";
    }
    return "?";
}

Split split_from_name(const std::string& name) {
    if (name == "easy") return Split::Easy;
    if (name == "medium") return Split::Medium;
    if (name == "hard") return Split::Hard;
    throw std::invalid_argument("unknown split '" + name + "'");
}

const char* generator_name(GeneratorKind k) {
    return k == GeneratorKind::N2L ? "n2l" : "3lp";
}

GeneratorKind generator_from_name(const std::string& name) {
    if (name == "n2l") return GeneratorKind::N2L;
    if (name == "3lp") return GeneratorKind::ThreeLP;
    throw std::invalid_argument("unknown generator '" + name + "'");
}

std::pair<std::size_t, std::size_t> split_range(Split s) {
    switch (s) {
        case Split::Easy: return {5, 10};
        case Split::Medium: return {11, 50};
        case Split::Hard: return {51, 100};
    }
    return {5, 10};
}

namespace {

struct GeneratedInstance {
    GroundProgram program;
    std::size_t n = 0;
    std::size_t l = 0; // 3-lp rule count; 0 for n2l
};

GeneratedInstance generate_instance(const BuildConfig& cfg, std::uint64_t instance_seed) {
    Rng rng(instance_seed);
    const auto [lo, hi] = split_range(cfg.split);
    GeneratedInstance out;
    out.n = lo + rng.uniform_index(hi - lo + 1);
    const std::uint64_t gen_seed = rng.next_u64();
    if (cfg.kind == GeneratorKind::N2L) {
        out.program = gen_n2l({out.n, cfg.c1, cfg.c2, gen_seed});
    } else {
        out.l = static_cast<std::size_t>(
            std::max(1.0, cfg.rules_per_atom * static_cast<double>(out.n) + 0.5));
        out.program = gen_3lp({out.n, out.l, gen_seed});
    }
    return out;
}

std::uint64_t instance_seed_for(std::uint64_t master, std::size_t section,
                                std::size_t index, std::size_t attempt) {
    return Rng(master).split(section).split(index).split(attempt).seed();
}

std::string model_line(const GroundProgram& p, const Interpretation& model) {
    std::string line;
    model.for_each([&](std::size_t i) {
        if (!line.empty()) line += ' ';
        line += p.atom(static_cast<std::uint32_t>(i)).name;
    });
    return line;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw FormatError("cannot write '" + path.string() + "'");
    file.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw FormatError("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << file.rdbuf();
    return ss.str();
}

constexpr const char* kSections[3] = {"train", "val", "test"};

std::string instance_basename(std::size_t id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04zu", id);
    return buf;
}

BuildConfig config_from_manifest(const json& m) {
    BuildConfig cfg;
    cfg.kind = generator_from_name(m.at("kind").get<std::string>());
    cfg.split = split_from_name(m.at("split").get<std::string>());
    cfg.seed = m.at("seed").get<std::uint64_t>();
    cfg.oracle_cap = m.at("oracle_cap").get<std::size_t>();
    cfg.counts = {m.at("counts").at("train").get<std::size_t>(),
                  m.at("counts").at("val").get<std::size_t>(),
                  m.at("counts").at("test").get<std::size_t>()};
    const json& params = m.at("params");
    if (cfg.kind == GeneratorKind::N2L) {
        cfg.c1 = params.at("c1").get<double>();
        cfg.c2 = params.at("c2").get<double>();
    } else {
        cfg.rules_per_atom = params.at("rules_per_atom").get<double>();
    }
    return cfg;
}

BuildReport write_dataset(const BuildConfig& cfg, const std::filesystem::path& dir,
                          const json* fixed_manifest) {
    namespace fs = std::filesystem;
    const auto [lo, hi] = split_range(cfg.split);
    if ((cfg.counts.train > 0 || cfg.counts.val > 0) && hi > cfg.oracle_cap)
        throw std::invalid_argument(
            std::string("labeled split '") + split_name(cfg.split) +
            "' needs atom counts up to " + std::to_string(hi) +
            " but the oracle cap is " + std::to_string(cfg.oracle_cap));

    fs::create_directories(dir);
    for (const char* section : kSections) fs::create_directories(dir / section);

    BuildReport report;
    json instances = json::array();
    const std::size_t section_counts[3] = {cfg.counts.train, cfg.counts.val,
                                           cfg.counts.test};
    std::size_t fixed_at = 0;

    for (std::size_t sec = 0; sec < 3; ++sec) {
        const bool labeled_section = sec < 2;
        for (std::size_t id = 0; id < section_counts[sec]; ++id) {
            std::uint64_t seed = 0;
            GeneratedInstance inst;
            std::vector<Interpretation> models;
            bool labels_unavailable = false;

            if (fixed_manifest) {
                const json& rec = fixed_manifest->at("instances").at(fixed_at++);
                seed = rec.at("seed").get<std::uint64_t>();
                inst = generate_instance(cfg, seed);
                labels_unavailable = rec.at("labels_unavailable").get<bool>();
                if (!labels_unavailable)
                    models = enumerate_stable_models(inst.program, cfg.oracle_cap);
                if (inst.n != rec.at("n").get<std::size_t>() ||
                    models.size() != rec.at("models").get<std::size_t>())
                    throw FormatError("manifest replay mismatch at " +
                                      std::string(kSections[sec]) + "/" +
                                      instance_basename(id));
            } else {
                for (std::size_t attempt = 0;; ++attempt) {
                    seed = instance_seed_for(cfg.seed, sec, id, attempt);
                    inst = generate_instance(cfg, seed);
                    if (inst.n <= cfg.oracle_cap) {
                        models = enumerate_stable_models(inst.program, cfg.oracle_cap);
                    } else {
                        models.clear();
                        labels_unavailable = true;
                    }
                    if (labeled_section && models.empty()) {
                        // Training needs at least one stable model as a target.
                        (sec == 0 ? report.rejected_train : report.rejected_val) += 1;
                        continue;
                    }
                    break;
                }
            }

            const std::string base = instance_basename(id);
            const fs::path lp_path = dir / kSections[sec] / (base + ".lp");
            write_file(lp_path, serialize_program(inst.program));
            std::string label_text;
            for (const Interpretation& m : models)
                label_text += model_line(inst.program, m) + "\n";
            write_file(dir / kSections[sec] / (base + ".models"), label_text);

            json rec;
            rec["section"] = kSections[sec];
            rec["id"] = id;
            rec["file"] = std::string(kSections[sec]) + "/" + base + ".lp";
            rec["seed"] = seed;
            rec["n"] = inst.n;
            if (cfg.kind == GeneratorKind::ThreeLP) rec["l"] = inst.l;
            rec["models"] = models.size();
            rec["labels_unavailable"] = labels_unavailable;
            instances.push_back(std::move(rec));
        }
    }

    json manifest;
    if (fixed_manifest) {
        manifest = *fixed_manifest;
    } else {
        manifest["format_version"] = 1;
        manifest["kind"] = generator_name(cfg.kind);
        manifest["split"] = split_name(cfg.split);
        manifest["seed"] = cfg.seed;
        manifest["oracle_cap"] = cfg.oracle_cap;
        if (cfg.kind == GeneratorKind::N2L)
            manifest["params"] = {{"c1", cfg.c1}, {"c2", cfg.c2}};
        else
            manifest["params"] = {{"rules_per_atom", cfg.rules_per_atom}};
        manifest["counts"] = {{"train", cfg.counts.train},
                              {"val", cfg.counts.val},
                              {"test", cfg.counts.test}};
        manifest["rejected"] = {{"train", report.rejected_train},
                                {"val", report.rejected_val}};
        manifest["instances"] = std::move(instances);
    }
    report.manifest_path = dir / "manifest";
    write_file(report.manifest_path, manifest.dump(2) + "\n");
    return report;
}

} // namespace

BuildReport build_dataset(const BuildConfig& cfg, const std::filesystem::path& dir) {
    return write_dataset(cfg, dir, nullptr);
}

BuildReport rebuild_from_manifest(const std::filesystem::path& manifest_path,
                                  const std::filesystem::path& dir) {
    const json manifest = json::parse(read_file(manifest_path));
    const BuildConfig cfg = config_from_manifest(manifest);
    return write_dataset(cfg, dir, &manifest);
}

std::vector<DatasetInstance> load_dataset(const std::filesystem::path& dir,
                                          const std::string& section) {
    const json manifest = json::parse(read_file(dir / "manifest"));
    std::vector<DatasetInstance> out;
    for (const json& rec : manifest.at("instances")) {
        if (rec.at("section").get<std::string>() != section) continue;
        DatasetInstance inst;
        inst.id = rec.at("id").get<std::size_t>();
        inst.labels_unavailable = rec.at("labels_unavailable").get<bool>();
        const std::filesystem::path lp_path = dir / rec.at("file").get<std::string>();
        inst.program = parse_program(read_file(lp_path)).program;

        std::filesystem::path models_path = lp_path;
        models_path.replace_extension(".models");
        std::istringstream lines(read_file(models_path));
        std::string line;
        while (std::getline(lines, line)) {
            Interpretation model(inst.program.atom_count());
            std::istringstream words(line);
            std::string name;
            while (words >> name) {
                const auto idx = inst.program.atom_index(name);
                if (!idx)
                    throw FormatError("model atom '" + name + "' not in program " +
                                      lp_path.string());
                model.insert(*idx);
            }
            inst.models.push_back(std::move(model));
        }
        out.push_back(std::move(inst));
    }
    return out;
}

Split dataset_split(const std::filesystem::path& dir) {
    const json manifest = json::parse(read_file(dir / "manifest"));
    return split_from_name(manifest.at("split").get<std::string>());
}

std::vector<TrainInstance> to_train_instances(std::vector<DatasetInstance> instances) {
    std::vector<TrainInstance> out;
    out.reserve(instances.size());
    for (DatasetInstance& inst : instances)
        out.push_back({std::move(inst.program), std::move(inst.models)});
    return out;
}

} // namespace ndprop
