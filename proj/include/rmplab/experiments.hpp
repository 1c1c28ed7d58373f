#pragma once

// The two flagship experiments (Berry-Esseen rate and local limit
// theorem), the large-deviation rate fit and the exact F_n pipeline
// cross-checks, with CSV outputs and a merged plain-text report.

#include <map>
#include <string>
#include <vector>

#include "rmplab/config.hpp"
#include "rmplab/estimators.hpp"
#include "rmplab/smoothing.hpp"

namespace rmp {

struct DegenerateModel : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// gamma via Richardson extrapolation of the fixed-n estimator over
// {n/2, n} (kills the O(1/n) start-point constant), rho^2 from the CLT
// variance at n. Writes <out>/estimates.txt.
EstimateCache run_estimate(const ExperimentConfig& cfg);

// Lazily computed per-n samples of the centered functionals, shared by
// the BE and LLT experiments. Sub-seeds are derived from (seed, n) only.
class SampleBank {
public:
    SampleBank(const ExperimentConfig& cfg, const EstimateCache& est);

    struct PerN {
        std::vector<double> coeff_sorted;  // coeff_log - n gamma_hat, ascending
        long trunc_count = 0;              // log_dist <= -A log n
        long vanished = 0;                 // exact zero pairings (-inf)
        long samples = 0;
        bool exact = false;
        std::vector<double> weights_cum;   // exact mode only, aligned with coeff_sorted
    };

    const PerN& get(long n);

private:
    const ExperimentConfig& cfg_;
    const EstimateCache& est_;
    MatrixMeasure mu_;
    std::map<long, PerN> cache_;
};

struct BERow {
    long n = 0;
    double gap = 0;
    double trunc_frac = 0;
    long samples = 0;
    uint64_t seed = 0;
};

struct BEReport {
    std::vector<BERow> rows;
    double slope = 0, slope_se = 0, intercept = 0;
    double rho_used = 0, gamma_used = 0;
};

BEReport run_be_experiment(const ExperimentConfig& cfg, const EstimateCache& est,
                           SampleBank& bank);

struct LLTRow {
    long n = 0;
    double t = 0;
    double a_hat = 0;
    double target = 0;
    double abs_dev = 0;
};

struct LLTReport {
    std::vector<LLTRow> rows;
    std::vector<std::pair<long, double>> sup_dev;  // per n
    bool decreased = false;                         // last sup_dev < first
};

LLTReport run_llt_experiment(const ExperimentConfig& cfg, const EstimateCache& est,
                             SampleBank& bank);

struct LDRow {
    long n = 0;
    double freq_sigma = 0;
    double freq_dist = 0;
    long samples = 0;
};

struct LDReport {
    std::vector<LDRow> rows;
    LineFit fit_sigma, fit_dist;     // log-frequency against n
    bool sigma_negative = false;     // slope negative at 95% confidence
    bool dist_negative = false;
    double epsilon = 0;
};

LDReport run_ld_experiment(const ExperimentConfig& cfg, const EstimateCache& est);

struct PipelineReport {
    long n = 0;
    // (i) conjugate characteristic function of F_n, two routes
    double cf_max_err = 0;
    double cf_worst_xi = 0;
    bool cf_pass = false;
    // (ii) sandwich of the truncated law between shifted F_n
    double c_tilde = 0;
    bool sandwich_finite = false;
    // (iii) window functional, direct sum against Fourier inversion
    double window_max_err = 0;
    bool window_pass = false;
    double r_n_max_err = 0;  // aggregated R_n identity
    bool r_n_pass = false;
};

PipelineReport fn_pipeline_check(const ExperimentConfig& cfg, const EstimateCache& est);

void write_be_csv(const std::string& path, const BEReport& rep);
void write_llt_csv(const std::string& path, const LLTReport& rep);
void write_ld_csv(const std::string& path, const LDReport& rep, uint64_t seed);

// merges the CSVs present in out_dir into report.txt; returns the text
std::string merge_report(const std::string& out_dir);

void ensure_directory(const std::string& path);

}  // namespace rmp
