#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tiltalloc/harness.hpp"

namespace {

using namespace tiltalloc;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitGate = 2;

struct CommonOpts {
    std::string config_path;
    std::string spec_path;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    int samples = 0;
    std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "aircraft JSON config");
    cmd->add_option("--spec", opts.spec_path, "campaign JSON spec");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "random seed");
    cmd->add_option("--samples", opts.samples, "sample / iteration count");
    cmd->add_option("--format", opts.format, "summary format")
        ->check(CLI::IsMember({"csv", "json"}));
}

AircraftParams load_params(const CommonOpts& opts) {
    if (opts.config_path.empty()) return {};
    return load_aircraft(opts.config_path);
}

std::ofstream open_out(const CommonOpts& opts, const std::string& name) {
    std::filesystem::create_directories(opts.out_dir);
    const auto path = std::filesystem::path(opts.out_dir) / name;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

nlohmann::json result_json(const AllocResult& r) {
    return {{"thrust", r.command.thrust},
            {"tilt", r.command.tilt},
            {"branch", to_string(r.branch)},
            {"residual_design", r.residual_design},
            {"residual_full", r.residual_full},
            {"n_candidates", r.n_candidates},
            {"saturated", r.saturated},
            {"latency_seconds", r.latency}};
}

int cmd_allocate(const CommonOpts& opts, const AllocRequest& req) {
    const AircraftParams params = load_params(opts);
    StructureCache cache;
    const AllocResult r = allocate(req, params, {}, {}, &cache);
    if (opts.format == "json") {
        std::cout << result_json(r).dump(2) << "\n";
    } else {
        std::cout << "thrust,tilt,branch,residual_design,residual_full\n"
                  << r.command.thrust << ',' << r.command.tilt << ','
                  << to_string(r.branch) << ',' << r.residual_design << ','
                  << r.residual_full << "\n";
    }
    return kExitOk;
}

int cmd_montecarlo(const CommonOpts& opts) {
    const AircraftParams params = load_params(opts);
    CampaignSpec spec;
    if (!opts.spec_path.empty()) spec = load_campaign(opts.spec_path);
    if (opts.samples > 0) spec.n_samples = opts.samples;
    if (opts.seed != 1) spec.seed = opts.seed;

    const CampaignReport report = run_montecarlo(spec, params);
    auto csv = open_out(opts, "montecarlo.csv");
    write_campaign_csv(csv, report);
    const std::string summary = campaign_summary_json(report);
    open_out(opts, "montecarlo_summary.json") << summary << "\n";
    if (opts.format == "json") {
        std::cout << summary << "\n";
    } else {
        std::cout << "n,failures,median_residual_full,p99,max,latency_median_s\n"
                  << report.n << ',' << report.failures << ',' << report.res_full_median
                  << ',' << report.res_full_p99 << ',' << report.res_full_max << ','
                  << report.latency_median << "\n";
    }
    const bool gate_pass = report.failures == 0 && report.res_full_max <= 0.15 &&
                           report.res_full_median <= 0.05;
    return gate_pass ? kExitOk : kExitGate;
}

int cmd_bench(const CommonOpts& opts) {
    const AircraftParams params = load_params(opts);
    const int iters = opts.samples > 0 ? opts.samples : 50;
    const BenchReport report = run_bench(params, iters);
    auto csv = open_out(opts, "bench.csv");
    write_bench_csv(csv, report);
    nlohmann::json j = {{"cold_median_s", report.cold_median},
                        {"cold_max_s", report.cold_max},
                        {"warm_median_s", report.warm_median},
                        {"warm_max_s", report.warm_max}};
    if (opts.format == "json")
        std::cout << j.dump(2) << "\n";
    else
        std::cout << "cold_median_s,cold_max_s,warm_median_s,warm_max_s\n"
                  << report.cold_median << ',' << report.cold_max << ','
                  << report.warm_median << ',' << report.warm_max << "\n";
    if (report.warm_median > 0.010)
        std::cerr << "warning: warm-path median " << report.warm_median * 1e3
                  << " ms exceeds the 10 ms advisory target\n";
    return report.warm_median < report.cold_median ? kExitOk : kExitGate;
}

int cmd_sweep(const CommonOpts& opts, const FlightCondition& cond, int n_thrust,
              int n_tilt) {
    const AircraftParams params = load_params(opts);
    auto csv = open_out(opts, "sweep.csv");
    run_sweep(csv, params, cond, n_thrust, n_tilt);
    std::cout << "wrote " << (std::filesystem::path(opts.out_dir) / "sweep.csv").string()
              << "\n";
    return kExitOk;
}

int cmd_oracle(const CommonOpts& opts) {
    const AircraftParams params = load_params(opts);
    const int n = opts.samples > 0 ? opts.samples : 100;
    StructureCache cache;
    double worst = 0.0;
    int compared = 0, oracle_failures = 0;
    for (int i = 0; i < n; ++i) {
        const AllocRequest req = envelope_request(opts.seed, i, params);
        const OracleResult oracle = oracle_invert(req, params);
        if (!oracle.converged) {
            ++oracle_failures;
            continue;
        }
        const AllocResult r = allocate_coupled(req, params, {}, &cache);
        const double scale = std::max({params.propeller.T_max, 1.0});
        const double diff =
            std::max(std::abs(r.command.thrust - oracle.command.thrust) / scale,
                     std::abs(r.command.tilt - oracle.command.tilt));
        worst = std::max(worst, diff);
        ++compared;
    }
    nlohmann::json j = {{"instances", n},
                        {"compared", compared},
                        {"oracle_nonconverged", oracle_failures},
                        {"max_relative_disagreement", worst}};
    if (opts.format == "json")
        std::cout << j.dump(2) << "\n";
    else
        std::cout << "instances,compared,oracle_nonconverged,max_relative_disagreement\n"
                  << n << ',' << compared << ',' << oracle_failures << ',' << worst
                  << "\n";
    return worst <= 1e-6 ? kExitOk : kExitGate;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tilt-rotor control allocation toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    AllocRequest req;
    double alpha_deg = 0.0;
    bool alpha_is_deg = false;
    int n_thrust = 41, n_tilt = 41;

    auto* alloc_cmd = app.add_subcommand("allocate", "invert one force request");
    add_common(alloc_cmd, opts);
    alloc_cmd->add_option("--fx", req.F_x, "requested F_x [N]")->required();
    alloc_cmd->add_option("--fz", req.F_z, "requested F_z [N]")->required();
    alloc_cmd->add_option("--v-inf", req.cond.v_inf, "airspeed [m/s]")->required();
    alloc_cmd->add_option("--rho", req.cond.rho, "air density [kg/m^3]");
    auto* deg_opt =
        alloc_cmd->add_option("--alpha-inf-deg", alpha_deg, "free-stream AoA [deg]");
    alloc_cmd->add_option("--alpha-inf-rad", req.cond.alpha_inf,
                          "free-stream AoA [rad]");

    auto* mc_cmd = app.add_subcommand("montecarlo", "accuracy campaign");
    add_common(mc_cmd, opts);

    auto* bench_cmd = app.add_subcommand("bench", "cold/warm latency benchmark");
    add_common(bench_cmd, opts);

    FlightCondition sweep_cond{15.0, 1.225, 5.0 * M_PI / 180};
    auto* sweep_cmd = app.add_subcommand("sweep", "forward-map grid dump");
    add_common(sweep_cmd, opts);
    sweep_cmd->add_option("--v-inf", sweep_cond.v_inf, "airspeed [m/s]");
    sweep_cmd->add_option("--rho", sweep_cond.rho, "air density [kg/m^3]");
    sweep_cmd->add_option("--alpha-inf-rad", sweep_cond.alpha_inf,
                          "free-stream AoA [rad]");
    sweep_cmd->add_option("--n-thrust", n_thrust, "thrust grid points");
    sweep_cmd->add_option("--n-tilt", n_tilt, "tilt grid points");

    auto* oracle_cmd =
        app.add_subcommand("oracle", "cross-check allocator against grid+Newton oracle");
    add_common(oracle_cmd, opts);

    CLI11_PARSE(app, argc, argv);
    alpha_is_deg = deg_opt->count() > 0;

    try {
        if (alloc_cmd->parsed()) {
            if (alpha_is_deg) req.cond.alpha_inf = alpha_deg * M_PI / 180;
            req.cond.validate();
            return cmd_allocate(opts, req);
        }
        if (mc_cmd->parsed()) return cmd_montecarlo(opts);
        if (bench_cmd->parsed()) return cmd_bench(opts);
        if (sweep_cmd->parsed()) return cmd_sweep(opts, sweep_cond, n_thrust, n_tilt);
        if (oracle_cmd->parsed()) return cmd_oracle(opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
