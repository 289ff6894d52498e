#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tiltalloc/allocator.hpp"
#include "tiltalloc/config.hpp"

namespace tiltalloc {

// --- brute-force inversion oracle ---

struct OracleResult {
    ActuatorInput command;
    bool converged = false;
    double residual = 0.0;  // ||forward_design(command) - F_req|| / ||F_req||
};

// Independent inversion of forward_design: dense grid over the actuator box,
// then damped Newton with a central finite-difference Jacobian from the best
// cells. Ties between exact solutions break like the allocator: smaller
// thrust, then smaller |tilt|.
OracleResult oracle_invert(const AllocRequest& req, const AircraftParams& params,
                           int grid_n = 32, const ModelFlags& flags = {});

// --- Monte-Carlo campaign ---

struct SampleRow {
    int index = 0;
    FlightCondition cond;
    double F_x = 0.0, F_z = 0.0;
    bool ok = false;
    ActuatorInput command;
    AllocBranch branch = AllocBranch::Coupled;
    double residual_design = 0.0;
    double residual_full = 0.0;
    int n_candidates = 0;
    bool saturated = false;
    double latency = 0.0;  // seconds
    std::string error;
};

struct CampaignReport {
    int n = 0;
    int failures = 0;
    // residual_full statistics over successful samples
    double res_full_median = 0.0;
    double res_full_p99 = 0.0;
    double res_full_max = 0.0;
    double res_design_max = 0.0;
    double latency_median = 0.0;
    double latency_max = 0.0;
    std::vector<SampleRow> rows;
};

// Deterministic per-sample draws (seed + index), evaluated over a worker
// pool and merged by index. Per-sample failures are recorded, never abort.
CampaignReport run_montecarlo(const CampaignSpec& spec, const AircraftParams& params,
                              const BlendPolicy& policy = {}, const ModelFlags& flags = {},
                              int n_threads = 0);

void write_campaign_csv(std::ostream& os, const CampaignReport& report);
std::string campaign_summary_json(const CampaignReport& report);

// Draws the deterministic sample `index` of a campaign (exposed for tests).
AllocRequest campaign_sample(const CampaignSpec& spec, int index);

// Random in-envelope request generated from forward_design; thrust is kept
// away from the singular T = 0 region (T >= 0.05 T_max).
AllocRequest envelope_request(std::uint64_t seed, int index, const AircraftParams& params,
                              const ModelFlags& flags = {}, ActuatorInput* truth = nullptr);

// --- latency benchmark ---

struct BenchReport {
    std::vector<double> cold;  // seconds, warm-up excluded
    std::vector<double> warm;
    double cold_median = 0.0, cold_max = 0.0;
    double warm_median = 0.0, warm_max = 0.0;
};

// Cold path recomputes the basis per call; warm path reuses the cached
// structure. The first 10 iterations of each path are discarded.
BenchReport run_bench(const AircraftParams& params, int n_iters,
                      const ModelFlags& flags = {});

void write_bench_csv(std::ostream& os, const BenchReport& report);

// --- forward-map sweep ---

// (T, delta) grid with forward_full and forward_design columns.
void run_sweep(std::ostream& os, const AircraftParams& params, const FlightCondition& cond,
               int n_thrust = 41, int n_tilt = 41, const ModelFlags& flags = {});

double median(std::vector<double> values);
double quantile(std::vector<double> values, double p);

}  // namespace tiltalloc
