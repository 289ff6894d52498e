// Acceptance gate runner: one pass/fail line per criterion. Criteria may be
// selected by number on the command line; the default runs everything except
// the long Monte-Carlo campaign (criterion 2), which CTest registers as its
// own entry. Exit status is nonzero when any executed criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tiltalloc/harness.hpp"

using namespace tiltalloc;

namespace {

const AircraftParams kParams{};

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

void report(int criterion, const char* name, bool pass, const std::string& detail) {
    std::printf("CRITERION %d (%s): %s -- %s\n", criterion, name, pass ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

// ---- criterion 1: solver exactness on 1000 envelope requests ----
bool criterion_solver_exactness() {
    const double t0 = now_s();
    double worst = 0.0;
    int failures = 0;
    for (int i = 0; i < 1000; ++i) {
        const AllocRequest req = envelope_request(2024, i, kParams);
        try {
            const AllocResult r = allocate_coupled(req, kParams);
            worst = std::max(worst, r.residual_design);
        } catch (const std::exception&) {
            ++failures;
        }
    }
    const double elapsed = now_s() - t0;
    const bool pass = failures == 0 && worst <= 1e-6 && elapsed <= 300.0;
    report(1, "solver exactness", pass,
           fmt("1000 envelope requests, max residual_design %.3g (gate 1e-6), %d failures, "
               "%.1f s (limit 300 s)",
               worst, failures, elapsed));
    return pass;
}

// ---- criterion 2: Monte-Carlo accuracy against forward_full ----
bool criterion_montecarlo() {
    const double t0 = now_s();
    CampaignSpec spec;  // pinned campaign box, n = 10^4, seed 1
    const CampaignReport r = run_montecarlo(spec, kParams);
    const double elapsed = now_s() - t0;
    const bool gates = r.failures == 0 && r.res_full_max <= 0.15 &&
                       r.res_full_median <= 0.05;
    const bool pass = gates && elapsed <= 600.0;
    report(2, "Monte-Carlo accuracy", pass,
           fmt("n=%d, failures=%d, residual_full median %.3g (gate 0.05), p99 %.3g, "
               "max %.3g (gate 0.15), residual_design max %.3g, %.1f s (limit 600 s); "
               "reference campaign reports < 8%% on its own (unpublished) constants -- "
               "with the shipped constants the design model cannot reach this request box "
               "(see README, Known deviations)",
               r.n, r.failures, r.res_full_median, r.res_full_p99, r.res_full_max,
               r.res_design_max, elapsed));
    return pass;
}

// ---- criterion 3: quotient dimension stability over 100 generic draws ----
bool criterion_dimension_stability() {
    std::set<size_t> dims;
    for (int i = 0; i < 100; ++i) {
        const AllocRequest req = envelope_request(33, i, kParams);
        dims.insert(build_structure(req, kParams)->ns.size());
    }
    const bool constant = dims.size() == 1;
    const size_t value = constant ? *dims.begin() : 0;
    const bool pass = constant;
    std::string detail;
    if (constant) {
        detail = fmt("|NormalSet| = %zu across 100 generic draws (reference value 14)%s",
                     value, value == 14 ? "" : " -- differing constant, documented deviation");
    } else {
        detail = "dimension varies across draws";
    }
    report(3, "quotient dimension stability", pass, detail);
    return pass;
}

// ---- criterion 4: Groebner correctness, exact arithmetic ----
bool criterion_groebner() {
    using P = Polynomial<Rational>;
    int checked = 0, failed = 0;

    // tilt-rotor systems at random envelope instances
    for (int i = 0; i < 5; ++i) {
        const AllocRequest req = envelope_request(77, i, kParams);
        const auto sys = build_system(req, kParams);
        const auto gb = buchberger(sys.polys, MonomialOrder::grevlex(5));
        ++checked;
        if (!verify_groebner(gb, sys.polys)) ++failed;
    }

    // hand-crafted small ideals
    const auto ord = MonomialOrder::grevlex(2);
    auto parse2 = [&](const std::string& s) {
        return parse_polynomial(s, {"x", "y"}, ord);
    };
    const std::vector<std::vector<P>> ideals = {
        {parse2("1/1 * x^2 + -1/1"), parse2("1/1 * y^1 + -1/1 * x^1")},
        {parse2("1/1 * x^2 + 1/1 * y^2 + -1/1"), parse2("1/1 * x^1 + -1/1 * y^1")},
        {parse2("1/1 * x^1 + -1/1")},
        {parse2("1/1 * x^3 + -1/1 * y^1"), parse2("1/1 * y^2 + -1/1 * x^1")},
        {parse2("1/1 * x^2 y^1 + -1/1"), parse2("1/1 * x^1 y^2 + -1/1")},
        {parse2("1/1 * x^2 + 2/3 * y^1"), parse2("1/1 * y^3 + -5/7 * x^1")},
        {parse2("1/1 * x^4 + -1/1 * y^1"), parse2("1/1 * x^1 y^1 + -1/1")},
        {parse2("2/1 * x^2 + 3/1 * x^1 y^1 + -1/1"), parse2("1/1 * y^2 + -4/1")},
        {parse2("1/1 * x^2"), parse2("1/1 * y^1 + -1/1 * x^1")},
        {parse2("1/1 * x^1 y^1 + -1/1"), parse2("1/1 * y^2 + -1/1")},
    };
    for (const auto& gens : ideals) {
        const auto gb = buchberger(gens, ord);
        ++checked;
        if (!verify_groebner(gb, gens)) ++failed;
    }

    const bool pass = failed == 0;
    report(4, "Groebner correctness", pass,
           fmt("%d bases re-verified in exact arithmetic (S-pairs and generators reduce to "
               "0), %d failures",
               checked, failed));
    return pass;
}

// ---- criterion 5: oracle equivalence on 100 envelope instances ----
bool criterion_oracle_equivalence() {
    StructureCache cache;
    double worst = 0.0;
    int compared = 0, unconverged = 0, disagreements = 0;
    for (int i = 0; i < 100; ++i) {
        const AllocRequest req = envelope_request(512, i, kParams);
        const OracleResult o = oracle_invert(req, kParams);
        if (!o.converged) {
            ++unconverged;
            continue;
        }
        const AllocResult r = allocate_coupled(req, kParams, {}, &cache);
        const double diff =
            std::max(std::abs(r.command.thrust - o.command.thrust) /
                         std::max(1.0, kParams.propeller.T_max),
                     std::abs(r.command.tilt - o.command.tilt));
        worst = std::max(worst, diff);
        if (diff > 1e-6) ++disagreements;
        ++compared;
    }
    const bool pass = disagreements == 0 && compared > 0;
    report(5, "oracle equivalence", pass,
           fmt("%d/100 instances compared (%d oracle non-convergences), max relative "
               "disagreement %.3g (gate 1e-6)",
               compared, unconverged, worst));
    return pass;
}

// ---- criterion 6: root soundness and completeness ----
bool criterion_roots() {
    using P = Polynomial<Rational>;
    int unsound = 0, missed = 0, roots_checked = 0;

    // soundness on tilt-rotor instances
    for (int i = 0; i < 10; ++i) {
        const AllocRequest req = envelope_request(4096, i, kParams);
        const auto s = build_structure(req, kParams);
        for (const auto& r : solve_roots(s->gb, s->ns, s->mats, s->system)) {
            ++roots_checked;
            if (r.residual > 1e-6) ++unsound;
        }
    }

    // completeness on products of linear forms with known roots
    const auto ord = MonomialOrder::grevlex(2);
    auto line = [&](long a, long b, long c) {
        P p(2, ord);
        p.add_term({1, 0}, Rational(a));
        p.add_term({0, 1}, Rational(b));
        p.add_term({0, 0}, Rational(c));
        return p;
    };
    struct L {
        long a, b, c;
    };
    const std::vector<std::array<L, 4>> instances = {
        {L{1, 1, -3}, L{1, -1, -1}, L{1, 2, -5}, L{2, -1, -1}},
        {L{1, 0, -1}, L{1, 0, -2}, L{0, 1, -1}, L{0, 1, -2}},
        {L{1, 1, 0}, L{1, -2, 1}, L{3, 1, -2}, L{1, 4, -3}},
        {L{1, 0, -2}, L{0, 1, -3}, L{1, 1, -4}, L{1, -1, -1}},
    };
    for (const auto& [l1, l2, l3, l4] : instances) {
        std::vector<P> gens{line(l1.a, l1.b, l1.c) * line(l2.a, l2.b, l2.c),
                            line(l3.a, l3.b, l3.c) * line(l4.a, l4.b, l4.c)};
        const GroebnerBasis gb{buchberger(gens, ord), ord};
        const NormalSet ns = normal_set(gb);
        const auto mats = multiplication_matrices(gb, ns);
        const auto roots = solve_roots(gb, ns, mats, {gens, {"x", "y"}});
        for (const auto& r : roots) {
            ++roots_checked;
            if (r.residual > 1e-6) ++unsound;
        }
        for (const L& p : {l1, l2})
            for (const L& q : {l3, l4}) {
                const double det = double(p.a) * q.b - double(p.b) * q.a;
                if (det == 0.0) continue;
                const double x = (-double(p.c) * q.b + double(q.c) * p.b) / det;
                const double y = (-double(p.a) * q.c + double(q.a) * p.c) / det;
                const bool hit = std::any_of(
                    roots.begin(), roots.end(), [&](const CandidateRoot& r) {
                        return std::abs(r.coords[0] - std::complex<double>(x)) <= 1e-8 &&
                               std::abs(r.coords[1] - std::complex<double>(y)) <= 1e-8;
                    });
                if (!hit) ++missed;
            }
    }

    const bool pass = unsound == 0 && missed == 0;
    report(6, "root soundness and completeness", pass,
           fmt("%d roots verified to 1e-6 scaled residual (%d unsound); linear-form "
               "intersections missed: %d",
               roots_checked, unsound, missed));
    return pass;
}

// ---- criterion 7: latency, warm path strictly faster than cold ----
bool criterion_latency() {
    const BenchReport r = run_bench(kParams, 50);
    const bool hard_gate = r.warm_median < r.cold_median;
    report(7, "latency", hard_gate,
           fmt("cold median %.2f ms / max %.2f ms, warm median %.2f ms / max %.2f ms; "
               "hard gate warm < cold %s; 10 ms warm advisory %s (reference: 2.5 ms "
               "median on unspecified hardware)",
               r.cold_median * 1e3, r.cold_max * 1e3, r.warm_median * 1e3,
               r.warm_max * 1e3, hard_gate ? "holds" : "violated",
               r.warm_median <= 0.010 ? "met" : "exceeded (warning only)"));
    return hard_gate;
}

// ---- criterion 8: trivial-physics suite ----
bool criterion_trivial_physics() {
    const double t0 = now_s();
    std::vector<std::string> failures;

    // zero-thrust decoupling
    {
        const FlightCondition c{15.0, 1.0, 0.12};
        auto [cl, cd] = wing_coefficients(kParams.wing, c.alpha_inf, 0.0);
        const PlanarForce clean =
            wing_forces(c.rho, kParams.wing.A_w, cl, cd, c.v_inf, c.alpha_inf);
        for (double d = 0.0; d < 1.45; d += 0.05) {
            const PlanarForce f = forward_full({0.0, d}, c, kParams);
            if (std::abs(f.x - clean.x) > 1e-12 * std::max(1.0, std::abs(clean.x)) ||
                std::abs(f.z - clean.z) > 1e-12 * std::max(1.0, std::abs(clean.z)))
                failures.push_back("zero-thrust decoupling");
        }
    }

    // T = 0 AoA recovery
    {
        const FlightCondition c{12.0, 1.0, 0.15};
        for (double d = 0.0; d < 1.3; d += 0.1)
            if (std::abs(local_flow({0.0, d}, c, kParams).alpha_w - c.alpha_inf) > 1e-12)
                failures.push_back("T=0 AoA recovery");
    }

    // pseudo-inverse identities
    {
        PropellerLayout layout{{PropellerArm{0.3, 1.2, -0.1, 150.0},
                                PropellerArm{0.3, -1.2, -0.1, 150.0},
                                PropellerArm{-0.8, 0.0, 0.2, 220.0}}};
        Eigen::MatrixXd L(5, 6);
        for (int i = 0; i < 3; ++i)
            L.block<5, 2>(0, 2 * i) = arm_matrix(layout.propellers[i]);
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> fd(-40.0, 40.0);
        for (int t = 0; t < 20; ++t) {
            Eigen::VectorXd f(6);
            for (int i = 0; i < 6; ++i) f(i) = fd(rng);
            const Eigen::VectorXd wv = L * f;
            const WrenchDistribution d =
                distribute_wrench({wv(0), wv(1), wv(2), wv(3), wv(4)}, layout);
            Eigen::VectorXd g(6);
            for (int i = 0; i < 3; ++i) {
                g(2 * i) = d.forces[i].x;
                g(2 * i + 1) = d.forces[i].z;
            }
            if ((L * g - wv).norm() > 1e-9 * (1.0 + wv.norm()))
                failures.push_back("pseudo-inverse identity");
        }
    }

    // blend continuity across the transition corridor
    {
        const FlightCondition mid{6.0, 1.225, 5.0 * M_PI / 180};
        const PlanarForce f = forward_design({150.0, 0.4}, mid, kParams);
        StructureCache cache;
        double prev = -1.0;
        for (double v = 2.0; v <= 10.001; v += 0.1) {
            AllocRequest req;
            req.cond = {v, 1.225, 5.0 * M_PI / 180};
            req.F_x = f.x;
            req.F_z = f.z;
            try {
                const AllocResult r = allocate(req, kParams, {}, {}, &cache);
                if (prev >= 0.0 &&
                    std::abs(r.command.thrust - prev) > 0.05 * kParams.propeller.T_max)
                    failures.push_back("blend continuity jump");
                prev = r.command.thrust;
            } catch (const std::exception&) {
                failures.push_back("blend sweep infeasible");
                prev = -1.0;
            }
        }
    }

    const double elapsed = now_s() - t0;
    const bool pass = failures.empty() && elapsed <= 60.0;
    std::string detail = fmt("%.1f s (limit 60 s)", elapsed);
    if (!failures.empty()) detail += "; first failure: " + failures.front();
    report(8, "trivial-physics suite", pass, detail);
    return pass;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    if (selected.empty()) selected = {1, 3, 4, 5, 6, 7, 8};

    bool all_pass = true;
    auto run = [&](int k, bool (*fn)()) {
        if (selected.count(k)) all_pass = fn() && all_pass;
    };
    run(1, criterion_solver_exactness);
    run(2, criterion_montecarlo);
    run(3, criterion_dimension_stability);
    run(4, criterion_groebner);
    run(5, criterion_oracle_equivalence);
    run(6, criterion_roots);
    run(7, criterion_latency);
    run(8, criterion_trivial_physics);
    return all_pass ? 0 : 1;
}
