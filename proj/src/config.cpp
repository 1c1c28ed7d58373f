#include "rmplab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace rmp {

ExperimentConfig default_config() {
    ExperimentConfig cfg;
    cfg.atoms = {Mat(2, {2, 1, 1, 1}), Mat(2, {1, 1, 1, 2})};
    cfg.weights = {0.5, 0.5};
    return cfg;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<double> parse_reals(const std::string& file, int line, const std::string& key,
                                const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ';')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw ConfigError(file, line, key, "cannot parse real number '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError(file, line, key, "empty value");
    return out;
}

std::vector<long> parse_longs(const std::string& file, int line, const std::string& key,
                              const std::string& value) {
    std::vector<long> out;
    for (double v : parse_reals(file, line, key, value)) {
        if (v != std::floor(v))
            throw ConfigError(file, line, key, "expected an integer, got " + std::to_string(v));
        out.push_back(static_cast<long>(v));
    }
    return out;
}

double parse_real(const std::string& file, int line, const std::string& key,
                  const std::string& value) {
    const auto v = parse_reals(file, line, key, value);
    if (v.size() != 1) throw ConfigError(file, line, key, "expected a single number");
    return v[0];
}

long parse_long(const std::string& file, int line, const std::string& key,
                const std::string& value) {
    const auto v = parse_longs(file, line, key, value);
    if (v.size() != 1) throw ConfigError(file, line, key, "expected a single integer");
    return v[0];
}

struct RawEntry {
    std::string value;
    int line;
};

std::map<std::string, RawEntry> read_entries(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    std::map<std::string, RawEntry> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path, lineno, "", "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(path, lineno, "", "empty key");
        if (value.empty()) throw ConfigError(path, lineno, key, "empty value");
        if (entries.count(key))
            throw ConfigError(path, lineno, key,
                              "duplicate key (first seen on line " +
                                  std::to_string(entries[key].line) + ")");
        entries[key] = {value, lineno};
    }
    return entries;
}

void apply_model_entries(ExperimentConfig& cfg, const std::string& path,
                         std::map<std::string, RawEntry>& entries) {
    int atom_count = -1;
    if (entries.count("dim")) {
        cfg.dim = static_cast<int>(parse_long(path, entries["dim"].line, "dim",
                                              entries["dim"].value));
        entries.erase("dim");
    }
    if (entries.count("atoms")) {
        atom_count = static_cast<int>(parse_long(path, entries["atoms"].line, "atoms",
                                                 entries["atoms"].value));
        entries.erase("atoms");
    }
    // gather atom.i / weight.i keys
    std::vector<std::pair<int, RawEntry>> atom_entries, weight_entries;
    for (auto it = entries.begin(); it != entries.end();) {
        const std::string& key = it->first;
        if (key.rfind("atom.", 0) == 0 || key.rfind("weight.", 0) == 0) {
            const bool is_atom = key[0] == 'a';
            const std::string idx_str = key.substr(is_atom ? 5 : 7);
            int idx;
            try {
                idx = std::stoi(idx_str);
            } catch (const std::exception&) {
                throw ConfigError(path, it->second.line, key, "bad atom index");
            }
            (is_atom ? atom_entries : weight_entries).emplace_back(idx, it->second);
            it = entries.erase(it);
        } else {
            ++it;
        }
    }
    if (atom_entries.empty()) {
        if (!weight_entries.empty())
            throw ConfigError(path, weight_entries.front().second.line, "weight",
                              "weights given without atoms");
        return;  // keep the default model
    }
    std::sort(atom_entries.begin(), atom_entries.end(),
              [](auto& a, auto& b) { return a.first < b.first; });
    std::sort(weight_entries.begin(), weight_entries.end(),
              [](auto& a, auto& b) { return a.first < b.first; });
    if (atom_count >= 0 && static_cast<int>(atom_entries.size()) != atom_count)
        throw ConfigError(path, atom_entries.front().second.line, "atoms",
                          "declared " + std::to_string(atom_count) + " atoms but found " +
                              std::to_string(atom_entries.size()));
    cfg.atoms.clear();
    cfg.weights.clear();
    for (size_t i = 0; i < atom_entries.size(); ++i) {
        const auto& [idx, entry] = atom_entries[i];
        if (idx != static_cast<int>(i))
            throw ConfigError(path, entry.line, "atom." + std::to_string(idx),
                              "atom indices must be contiguous from 0");
        const auto vals = parse_reals(path, entry.line, "atom." + std::to_string(idx),
                                      entry.value);
        if (static_cast<int>(vals.size()) != cfg.dim * cfg.dim)
            throw ConfigError(path, entry.line, "atom." + std::to_string(idx),
                              "expected " + std::to_string(cfg.dim * cfg.dim) +
                                  " entries for dim " + std::to_string(cfg.dim));
        cfg.atoms.emplace_back(cfg.dim, vals);
    }
    if (weight_entries.size() != atom_entries.size())
        throw ConfigError(path, atom_entries.front().second.line, "weight",
                          "need one weight per atom");
    for (size_t i = 0; i < weight_entries.size(); ++i) {
        const auto& [idx, entry] = weight_entries[i];
        if (idx != static_cast<int>(i))
            throw ConfigError(path, entry.line, "weight." + std::to_string(idx),
                              "weight indices must be contiguous from 0");
        cfg.weights.push_back(parse_real(path, entry.line, "weight." + std::to_string(idx),
                                         entry.value));
    }
}

}  // namespace

ExperimentConfig parse_config(const std::string& path) {
    ExperimentConfig cfg = default_config();
    auto entries = read_entries(path);

    if (entries.count("measure_file")) {
        const std::string mpath = entries["measure_file"].value;
        entries.erase("measure_file");
        auto model_entries = read_entries(mpath);
        apply_model_entries(cfg, mpath, model_entries);
        for (auto& [key, entry] : model_entries)
            throw ConfigError(mpath, entry.line, key, "unknown key in measure file");
    }
    apply_model_entries(cfg, path, entries);

    auto take = [&](const char* key) -> std::optional<RawEntry> {
        auto it = entries.find(key);
        if (it == entries.end()) return std::nullopt;
        RawEntry e = it->second;
        entries.erase(it);
        return e;
    };

    if (auto e = take("x")) cfg.x_rep = parse_reals(path, e->line, "x", e->value);
    if (auto e = take("y")) cfg.y_rep = parse_reals(path, e->line, "y", e->value);
    if (auto e = take("A")) cfg.A = parse_real(path, e->line, "A", e->value);
    if (auto e = take("B")) cfg.B = parse_real(path, e->line, "B", e->value);
    if (auto e = take("zeta")) cfg.zeta = parse_real(path, e->line, "zeta", e->value);
    if (auto e = take("delta")) cfg.delta = parse_real(path, e->line, "delta", e->value);
    if (auto e = take("alpha")) cfg.alpha = parse_real(path, e->line, "alpha", e->value);
    if (auto e = take("n_grid")) cfg.n_grid = parse_longs(path, e->line, "n_grid", e->value);
    if (auto e = take("samples")) cfg.samples = parse_long(path, e->line, "samples", e->value);
    if (auto e = take("seed"))
        cfg.seed = static_cast<uint64_t>(parse_long(path, e->line, "seed", e->value));
    if (auto e = take("workers"))
        cfg.workers = static_cast<int>(parse_long(path, e->line, "workers", e->value));
    if (auto e = take("a")) cfg.a = parse_real(path, e->line, "a", e->value);
    if (auto e = take("b")) cfg.b = parse_real(path, e->line, "b", e->value);
    if (auto e = take("t_points"))
        cfg.t_points = static_cast<int>(parse_long(path, e->line, "t_points", e->value));
    if (auto e = take("estimate_n"))
        cfg.estimate_n = parse_long(path, e->line, "estimate_n", e->value);
    if (auto e = take("estimate_samples"))
        cfg.estimate_samples = parse_long(path, e->line, "estimate_samples", e->value);
    if (auto e = take("burn_in")) cfg.burn_in = parse_long(path, e->line, "burn_in", e->value);
    if (auto e = take("chain_length"))
        cfg.chain_length = parse_long(path, e->line, "chain_length", e->value);
    if (auto e = take("epsilon")) cfg.epsilon = parse_real(path, e->line, "epsilon", e->value);
    if (auto e = take("ld_n_grid"))
        cfg.ld_n_grid = parse_longs(path, e->line, "ld_n_grid", e->value);
    if (auto e = take("ld_samples"))
        cfg.ld_samples = parse_long(path, e->line, "ld_samples", e->value);
    if (auto e = take("grid_m"))
        cfg.grid_m = static_cast<int>(parse_long(path, e->line, "grid_m", e->value));
    if (auto e = take("xi_max")) cfg.xi_max = parse_real(path, e->line, "xi_max", e->value);
    if (auto e = take("xi_points"))
        cfg.xi_points = static_cast<int>(parse_long(path, e->line, "xi_points", e->value));
    if (auto e = take("pipeline_n"))
        cfg.pipeline_n = static_cast<int>(parse_long(path, e->line, "pipeline_n", e->value));
    if (auto e = take("out")) cfg.out_dir = e->value;
    if (auto e = take("dump_samples"))
        cfg.dump_samples = parse_long(path, e->line, "dump_samples", e->value) != 0;

    for (auto& [key, entry] : entries)
        throw ConfigError(path, entry.line, key, "unknown key");

    validate_config(cfg);
    return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.n_grid.empty()) throw std::invalid_argument("config: n_grid is empty");
    for (size_t i = 1; i < cfg.n_grid.size(); ++i)
        if (cfg.n_grid[i] <= cfg.n_grid[i - 1])
            throw std::invalid_argument("config: n_grid must be strictly ascending");
    if (cfg.samples < 1000) throw std::invalid_argument("config: samples must be >= 1000");
    if (!(cfg.a < cfg.b)) throw std::invalid_argument("config: need a < b");
    if (static_cast<int>(cfg.x_rep.size()) != cfg.dim ||
        static_cast<int>(cfg.y_rep.size()) != cfg.dim)
        throw std::invalid_argument("config: x/y dimension mismatch");
    if (!(cfg.zeta > 0 && cfg.zeta <= 1))
        throw std::invalid_argument("config: zeta must lie in (0, 1]");
    if (!(cfg.delta > 0 && cfg.delta < 1))
        throw std::invalid_argument("config: delta must lie in (0, 1)");
    if (cfg.t_points < 2) throw std::invalid_argument("config: t_points must be >= 2");
    if (!(cfg.alpha > 0 && cfg.alpha * std::max(cfg.A, cfg.B) <= 1.0 / 6.0 + 1e-12))
        throw std::invalid_argument(
            "config: alpha must be positive with alpha * max(A, B) <= 1/6");
}

}  // namespace rmp
