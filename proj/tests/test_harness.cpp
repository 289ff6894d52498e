#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "tiltalloc/harness.hpp"

using namespace tiltalloc;

namespace {

const AircraftParams kDefault{};
const FlightCondition kCond{16.0, 1.0, 6.0 * M_PI / 180};

AllocRequest request_from_design(double T, double delta, const FlightCondition& cond) {
    AllocRequest req;
    req.cond = cond;
    const PlanarForce f = forward_design({T, delta}, cond, kDefault);
    req.F_x = f.x;
    req.F_z = f.z;
    return req;
}

// drops the trailing (latency) column of every CSV line
std::string strip_latency(const std::string& csv) {
    std::istringstream is(csv);
    std::ostringstream os;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (!first) os << '\n';
        first = false;
        if (!line.empty() && line[0] != '#') {
            const auto pos = line.rfind(',');
            if (pos != std::string::npos) line.resize(pos);
        }
        os << line;
    }
    return os.str();
}

CampaignSpec small_spec(int n) {
    CampaignSpec spec;
    spec.n_samples = n;
    spec.seed = 42;
    return spec;
}

}  // namespace

TEST_CASE("oracle_invert") {
    SUBCASE("self-consistency") {
        const AllocRequest req = request_from_design(150.0, 0.3, kCond);
        const OracleResult o = oracle_invert(req, kDefault);
        CHECK(o.converged);
        CHECK(o.command.thrust == doctest::Approx(150.0).epsilon(1e-6));
        CHECK(o.command.tilt == doctest::Approx(0.3).epsilon(1e-6));
        CHECK(o.residual <= 1e-9);
    }

    SUBCASE("zero-thrust request") {
        const AllocRequest req = request_from_design(0.0, 0.25, kCond);
        const OracleResult o = oracle_invert(req, kDefault);
        CHECK(o.converged);
        CHECK(o.command.thrust <= 1e-3);
    }

    SUBCASE("grid precondition") {
        const AllocRequest req = request_from_design(150.0, 0.3, kCond);
        CHECK_THROWS_AS(oracle_invert(req, kDefault, 8), std::invalid_argument);
    }

    SUBCASE("cross-oracle agreement on envelope samples") {
        StructureCache cache;
        for (int i = 0; i < 5; ++i) {
            const AllocRequest req = envelope_request(99, i, kDefault);
            const OracleResult o = oracle_invert(req, kDefault);
            if (!o.converged) continue;
            const AllocResult r = allocate_coupled(req, kDefault, {}, &cache);
            CHECK(std::abs(r.command.thrust - o.command.thrust) <=
                  1e-6 * kDefault.propeller.T_max);
            CHECK(std::abs(r.command.tilt - o.command.tilt) <= 1e-6);
        }
    }
}

TEST_CASE("campaign sampling") {
    const CampaignSpec spec = small_spec(100);
    for (int i = 0; i < 100; ++i) {
        const AllocRequest a = campaign_sample(spec, i);
        const AllocRequest b = campaign_sample(spec, i);
        CHECK(a.cond.v_inf == b.cond.v_inf);
        CHECK(a.F_x == b.F_x);
        CHECK(a.cond.v_inf >= spec.v_inf[0]);
        CHECK(a.cond.v_inf <= spec.v_inf[1]);
        CHECK(a.cond.rho >= spec.rho[0]);
        CHECK(a.cond.rho <= spec.rho[1]);
        CHECK(a.cond.alpha_inf >= spec.alpha_inf[0]);
        CHECK(a.cond.alpha_inf <= spec.alpha_inf[1]);
        CHECK(a.F_x >= spec.F_x[0]);
        CHECK(a.F_x <= spec.F_x[1]);
        CHECK(a.F_z >= spec.F_z[0]);
        CHECK(a.F_z <= spec.F_z[1]);
    }

    SUBCASE("envelope requests are design-invertible by construction") {
        ActuatorInput truth;
        const AllocRequest req = envelope_request(7, 3, kDefault, {}, &truth);
        const PlanarForce f = forward_design(truth, req.cond, kDefault);
        CHECK(f.x == doctest::Approx(req.F_x));
        CHECK(f.z == doctest::Approx(req.F_z));
        CHECK(truth.thrust >= 0.05 * kDefault.propeller.T_max);
    }
}

TEST_CASE("run_montecarlo") {
    SUBCASE("single-sample degenerate spec") {
        const CampaignReport r = run_montecarlo(small_spec(1), kDefault);
        CHECK(r.n == 1);
        CHECK(r.rows.size() == 1);
    }

    SUBCASE("reproducibility and report arithmetic") {
        const CampaignSpec spec = small_spec(8);
        const CampaignReport r1 = run_montecarlo(spec, kDefault);
        const CampaignReport r2 = run_montecarlo(spec, kDefault);

        std::ostringstream c1, c2;
        write_campaign_csv(c1, r1);
        write_campaign_csv(c2, r2);
        CHECK(strip_latency(c1.str()) == strip_latency(c2.str()));

        std::vector<double> res;
        int failures = 0;
        for (const SampleRow& row : r1.rows) {
            if (!row.ok) {
                ++failures;
                continue;
            }
            res.push_back(row.residual_full);
        }
        CHECK(failures == r1.failures);
        if (!res.empty()) {
            CHECK(median(res) == doctest::Approx(r1.res_full_median));
            CHECK(quantile(res, 1.0) == doctest::Approx(r1.res_full_max));
            CHECK(r1.res_full_max >= r1.res_full_p99);
            CHECK(r1.res_full_p99 >= r1.res_full_median);
        }

        const std::string summary = campaign_summary_json(r1);
        CHECK(summary.find("\"n_samples\": 8") != std::string::npos);
        CHECK(summary.find("gate") != std::string::npos);
    }
}

TEST_CASE("run_bench") {
    const BenchReport r = run_bench(kDefault, 3);
    CHECK(r.cold.size() == 3);
    CHECK(r.warm.size() == 3);
    for (double t : r.cold) CHECK(t > 0.0);
    for (double t : r.warm) CHECK(t > 0.0);
    CHECK(r.cold_median > 0.0);
    CHECK(r.warm_median > 0.0);
    CHECK(r.cold_max >= r.cold_median);
    CHECK(r.warm_max >= r.warm_median);

    std::ostringstream os;
    write_bench_csv(os, r);
    CHECK(os.str().find("iteration,path,latency") != std::string::npos);
    CHECK(os.str().find("cold") != std::string::npos);
    CHECK(os.str().find("warm") != std::string::npos);

    CHECK_THROWS_AS(run_bench(kDefault, 0), std::invalid_argument);
}

TEST_CASE("run_sweep") {
    std::ostringstream os;
    run_sweep(os, kDefault, kCond, 5, 5);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);  // comment
    std::getline(is, line);  // header
    CHECK(line == "thrust,tilt,full_F_x,full_F_z,design_F_x,design_F_z");

    struct Row {
        double thrust, tilt, fx, fz, dx, dz;
    };
    std::vector<Row> rows;
    while (std::getline(is, line)) {
        Row r{};
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf", &r.thrust, &r.tilt,
                            &r.fx, &r.fz, &r.dx, &r.dz) == 6);
        rows.push_back(r);
    }
    REQUIRE(rows.size() == 25);

    SUBCASE("T = 0 rows are constant in tilt") {
        // decoupling holds while alpha_inf + tilt stays below pi/2; past that
        // the parallel inflow component changes sign and the wake term shifts
        for (size_t i = 1; i < 5; ++i) {
            CHECK(rows[i].thrust == 0.0);
            if (rows[i].tilt + kCond.alpha_inf >= M_PI / 2) continue;
            CHECK(rows[i].fx == doctest::Approx(rows[0].fx).epsilon(1e-12));
            CHECK(rows[i].fz == doctest::Approx(rows[0].fz).epsilon(1e-12));
        }
    }

    SUBCASE("thrust projection grows monotonically with tilt in F_z") {
        // at fixed max thrust, T*sin(delta) dominates the z trend
        for (size_t i = 21; i < 25; ++i)
            CHECK(rows[i].thrust * std::sin(rows[i].tilt) >=
                  rows[i - 1].thrust * std::sin(rows[i - 1].tilt));
    }

    SUBCASE("columns reproduce the forward maps") {
        for (const Row& r : rows) {
            const PlanarForce full = forward_full({r.thrust, r.tilt}, kCond, kDefault);
            const PlanarForce design = forward_design({r.thrust, r.tilt}, kCond, kDefault);
            CHECK(r.fx == doctest::Approx(full.x).epsilon(1e-12));
            CHECK(r.fz == doctest::Approx(full.z).epsilon(1e-12));
            CHECK(r.dx == doctest::Approx(design.x).epsilon(1e-12));
            CHECK(r.dz == doctest::Approx(design.z).epsilon(1e-12));
        }
    }

    SUBCASE("deterministic output") {
        std::ostringstream again;
        run_sweep(again, kDefault, kCond, 5, 5);
        CHECK(again.str() == os.str());
    }

    SUBCASE("still air leaves the design columns empty") {
        std::ostringstream still;
        run_sweep(still, kDefault, {0.0, 1.225, 0.0}, 2, 2);
        CHECK(still.str().find(",,") != std::string::npos);
    }

    CHECK_THROWS_AS(run_sweep(os, kDefault, kCond, 1, 5), std::invalid_argument);
}

TEST_CASE("aircraft config") {
    SUBCASE("round trip") {
        AircraftParams p = kDefault;
        p.propeller.T_max = 333.0;
        p.wing.cl0 = 0.41;
        p.mounting.f_w = 0.6;
        p.limits.delta_max = 1.2;
        const AircraftParams q = aircraft_from_json_text(aircraft_to_json_text(p));
        CHECK(q.propeller.T_max == p.propeller.T_max);
        CHECK(q.wing.cl0 == p.wing.cl0);
        CHECK(q.mounting.f_w == p.mounting.f_w);
        CHECK(q.limits.delta_max == p.limits.delta_max);
    }

    SUBCASE("missing fields keep defaults") {
        const AircraftParams p = aircraft_from_json_text(R"({"wing": {"cl0": 0.5}})");
        CHECK(p.wing.cl0 == 0.5);
        CHECK(p.wing.cd0 == kDefault.wing.cd0);
        CHECK(p.propeller.T_max == kDefault.propeller.T_max);
    }

    SUBCASE("unknown fields rejected") {
        CHECK_THROWS_AS(aircraft_from_json_text(R"({"wing": {"span": 2.0}})"), ConfigError);
        CHECK_THROWS_AS(aircraft_from_json_text(R"({"fuselage": {}})"), ConfigError);
        CHECK_THROWS_AS(aircraft_from_json_text("not json"), ConfigError);
    }

    SUBCASE("invalid values rejected") {
        CHECK_THROWS_AS(aircraft_from_json_text(R"({"propeller": {"T_max": -1}})"),
                        ConfigError);
        CHECK_THROWS_AS(aircraft_from_json_text(R"({"wing": {"cl0": "big"}})"), ConfigError);
    }
}

TEST_CASE("campaign config") {
    SUBCASE("angles accept an explicit unit suffix") {
        const CampaignSpec deg = campaign_from_json_text(R"({"alpha_inf_deg": [5, 10]})");
        CHECK(deg.alpha_inf[0] == doctest::Approx(5.0 * M_PI / 180));
        CHECK(deg.alpha_inf[1] == doctest::Approx(10.0 * M_PI / 180));
        const CampaignSpec rad = campaign_from_json_text(R"({"alpha_inf_rad": [0.1, 0.2]})");
        CHECK(rad.alpha_inf[0] == doctest::Approx(0.1));
    }

    SUBCASE("round trip") {
        CampaignSpec s;
        s.n_samples = 123;
        s.seed = 9;
        s.F_x = {10.0, 20.0};
        const CampaignSpec t = campaign_from_json_text(campaign_to_json_text(s));
        CHECK(t.n_samples == 123);
        CHECK(t.seed == 9);
        CHECK(t.F_x == s.F_x);
    }

    SUBCASE("validation") {
        CHECK_THROWS_AS(campaign_from_json_text(R"({"n_samples": 0})"), ConfigError);
        CHECK_THROWS_AS(campaign_from_json_text(R"({"v_inf": [20, 15]})"), ConfigError);
        CHECK_THROWS_AS(campaign_from_json_text(R"({"mystery": 1})"), ConfigError);
        CHECK_THROWS_AS(campaign_from_json_text(R"({"rho": [0, 1]})"), ConfigError);
    }
}
