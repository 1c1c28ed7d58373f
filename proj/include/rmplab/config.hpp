#pragma once

// Flat key = value experiment configuration: UTF-8 text, '#' comments,
// matrices as row-major semicolon-separated lists.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmplab/measure.hpp"

namespace rmp {

struct ConfigError : std::runtime_error {
    ConfigError(const std::string& file, int line, const std::string& field,
                const std::string& message)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " +
                             (field.empty() ? "" : field + ": ") + message),
          line_number(line), field_name(field) {}
    int line_number;
    std::string field_name;
};

struct ExperimentConfig {
    // model
    int dim = 2;
    std::vector<Mat> atoms;
    std::vector<double> weights;
    Vec x_rep = {1, 0};
    Vec y_rep = {1, 0};

    // analytic constants
    double A = 1.5;
    double B = 1.5;
    double zeta = 0.25;
    double delta = 0.25;
    double alpha = 0.1;

    // experiment grids
    std::vector<long> n_grid = {64, 128, 256, 512, 1024, 2048, 4096};
    long samples = 1000000;
    uint64_t seed = 1;
    int workers = 0;  // 0 = hardware concurrency
    double a = -0.5;
    double b = 0.5;
    int t_points = 21;

    // estimate stage
    long estimate_n = 8192;
    long estimate_samples = 400000;
    long burn_in = 1000;
    long chain_length = 200000;

    // large deviations
    double epsilon = 0.1;
    std::vector<long> ld_n_grid = {16, 32, 64, 128, 256};
    long ld_samples = 200000;

    // spectral
    int grid_m = 4096;
    double xi_max = 2.0;
    int xi_points = 81;

    // pipeline check
    int pipeline_n = 8;

    std::string out_dir = "out";
    bool dump_samples = false;
    bool exact_mode = false;
    bool strict = false;

    MatrixMeasure measure() const { return MatrixMeasure(atoms, weights); }
    ProjPoint x() const { return ProjPoint(x_rep); }
    DualPoint y() const { return DualPoint(y_rep); }
};

// Benchmark defaults: two positive atoms [[2,1],[1,1]] and [[1,1],[1,2]],
// uniform weights.
ExperimentConfig default_config();

ExperimentConfig parse_config(const std::string& path);

void validate_config(const ExperimentConfig& cfg);  // throws on bad grids

}  // namespace rmp
