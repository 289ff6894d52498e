#include "tiltalloc/allocator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace tiltalloc {

namespace {

enum Var { VT = 0, VS = 1, VC = 2, VV = 3, VW = 4 };
constexpr int kNumVars = 5;

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

double relative_force_error(const PlanarForce& got, const AllocRequest& req) {
    const PlanarForce want{req.F_x, req.F_z};
    const double scale = std::max(want.norm(), 1e-9);
    return (got - want).norm() / scale;
}

double residual_vs_design(const ActuatorInput& cmd, const AllocRequest& req,
                          const AircraftParams& params, const ModelFlags& flags) {
    return relative_force_error(forward_design(cmd, req.cond, params, flags), req);
}

double residual_vs_full(const ActuatorInput& cmd, const AllocRequest& req,
                        const AircraftParams& params) {
    return relative_force_error(forward_full(cmd, req.cond, params), req);
}

// Damped Newton refinement of (T, delta) against forward_design, projected
// onto the actuator box. Removes the residual left by coefficient rounding.
ActuatorInput polish_command(ActuatorInput cmd, const AllocRequest& req,
                             const AircraftParams& params, const ModelFlags& flags) {
    auto project = [&](ActuatorInput c) {
        c.thrust = std::clamp(c.thrust, 0.0, params.propeller.T_max);
        c.tilt = std::clamp(c.tilt, params.limits.delta_min, params.limits.delta_max);
        return c;
    };
    auto residual = [&](const ActuatorInput& c) -> Eigen::Vector2d {
        PlanarForce f;
        try {
            f = forward_design(c, req.cond, params, flags);
        } catch (const DomainError&) {
            return Eigen::Vector2d(1e30, 1e30);
        }
        return {f.x - req.F_x, f.z - req.F_z};
    };
    Eigen::Vector2d r = residual(cmd);
    for (int iter = 0; iter < 8 && r.norm() > 1e-12; ++iter) {
        const double ht = 1e-6 * (1.0 + std::abs(cmd.thrust));
        const double hd = 1e-6;
        Eigen::Matrix2d jac;
        jac.col(0) = (residual({cmd.thrust + ht, cmd.tilt}) -
                      residual({cmd.thrust - ht, cmd.tilt})) / (2.0 * ht);
        jac.col(1) = (residual({cmd.thrust, cmd.tilt + hd}) -
                      residual({cmd.thrust, cmd.tilt - hd})) / (2.0 * hd);
        Eigen::Vector2d step = jac.fullPivLu().solve(r);
        if (!step.allFinite()) break;
        bool improved = false;
        for (double damp = 1.0; damp >= 1.0 / 64.0; damp /= 2.0) {
            const ActuatorInput trial =
                project({cmd.thrust - damp * step(0), cmd.tilt - damp * step(1)});
            const Eigen::Vector2d rt = residual(trial);
            if (rt.norm() < r.norm()) {
                cmd = trial;
                r = rt;
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }
    return cmd;
}

}  // namespace

std::string StructureCache::key(const AllocRequest& req) {
    std::ostringstream os;
    os.precision(17);
    os << req.cond.v_inf << "|" << req.cond.rho << "|" << req.cond.alpha_inf << "|"
       << req.F_x << "|" << req.F_z;
    return os.str();
}

std::shared_ptr<const SolveStructure> StructureCache::find(const AllocRequest& req) const {
    std::lock_guard lock(mutex_);
    auto it = cells_.find(key(req));
    return it == cells_.end() ? nullptr : it->second;
}

void StructureCache::store(const AllocRequest& req,
                           std::shared_ptr<const SolveStructure> s) {
    std::lock_guard lock(mutex_);
    cells_.emplace(key(req), std::move(s));
}

PolySystem<Rational> build_system(const AllocRequest& req, const AircraftParams& params,
                                  const ModelFlags& flags) {
    if (!(req.cond.v_inf > 0.0)) throw DomainError("build_system requires v_inf > 0");
    if (!flags.linearize_arctan)
        throw std::invalid_argument(
            "the polynomial reformulation requires the linearized angle model");

    const MonomialOrder order = MonomialOrder::grevlex(kNumVars);
    using P = Polynomial<Rational>;
    auto var = [&](int k) { return P::variable(kNumVars, order, k); };
    auto cst = [&](const Rational& c) { return P::constant(kNumVars, order, c); };
    auto rat = rational_from_double;

    const Rational vinf = rat(req.cond.v_inf);
    const Rational rho = rat(req.cond.rho);
    const Rational ca = rat(std::cos(req.cond.alpha_inf));
    const Rational sa = rat(std::sin(req.cond.alpha_inf));
    const Rational k = Rational(2) / (rat(params.propeller.eta_p) * rho * rat(params.propeller.A_p));
    const Rational half_rho_aw = rho * rat(params.wing.A_w) / 2;
    const Rational cl0 = rat(params.wing.cl0), cl_a = rat(params.wing.cl_alpha);
    const Rational cd0 = rat(params.wing.cd0), cd_a = rat(params.wing.cd_alpha);

    const P t = var(VT), s = var(VS), c = var(VC), v = var(VV), w = var(VW);
    const P sin_ad = c.scaled(sa) + s.scaled(ca);  // sin(alpha_inf + delta)
    const P cos_ad = c.scaled(ca) - s.scaled(sa);  // cos(alpha_inf + delta)
    const P q2 = cst(vinf * vinf) + t.scaled(k);   // v_inf^2 + 2T/(eta rho A_p)

    // F_x: thrust projection plus the lift term of the design model
    P e1 = t * c + (cst(cl0) + w.scaled(cl_a)) * q2.scaled(half_rho_aw) -
           cst(rat(req.F_x));
    // F_z: thrust projection minus the drag term
    P drag_coeff = cst(cd0);
    if (!flags.omit_cd_alpha) drag_coeff += (w * w).scaled(cd_a);
    P e2 = t * s - drag_coeff * q2.scaled(half_rho_aw) - cst(rat(req.F_z));
    // lifted (linearized) wing angle of attack:
    // w * (v_perp s + v c) = v_perp c - v s, with v_perp = v_inf sin(alpha+delta)
    const P v_perp = sin_ad.scaled(vinf);
    P e3 = w * (v_perp * s + v * c) - v_perp * c + v * s;
    // lifted induced speed: v^2 = 2T/(eta rho A_p) + (v_inf cos(alpha+delta))^2
    P e4 = v * v - t.scaled(k) - (cos_ad * cos_ad).scaled(vinf * vinf);
    P e5 = s * s + c * c - cst(Rational(1));

    PolySystem<Rational> sys;
    sys.var_names = kSystemVars;
    sys.polys = {std::move(e1), std::move(e2), std::move(e3), std::move(e4), std::move(e5)};
    if (flags.coeff_round > 0.0) {
        for (auto& p : sys.polys) {
            Polynomial<Rational> rounded(p.nvars(), p.order());
            for (const auto& [m, coeff] : p.terms())
                rounded.add_term(m, rational_approx(coeff.get_d(), flags.coeff_round));
            p = std::move(rounded);
        }
    }
    return sys;
}

std::shared_ptr<const SolveStructure> build_structure(const AllocRequest& req,
                                                      const AircraftParams& params,
                                                      const ModelFlags& flags) {
    auto s = std::make_shared<SolveStructure>();
    s->system = build_system(req, params, flags);
    const MonomialOrder order = MonomialOrder::grevlex(kNumVars);
    s->gb = GroebnerBasis{buchberger(s->system.polys, order), order};
    s->ns = normal_set(s->gb);
    s->mats = multiplication_matrices(s->gb, s->ns);
    return s;
}

AllocResult allocate_coupled(const AllocRequest& req, const AircraftParams& params,
                             const ModelFlags& flags, StructureCache* cache,
                             const SolveOptions& solve_opts) {
    const double t0 = now_seconds();
    std::shared_ptr<const SolveStructure> st;
    if (cache) st = cache->find(req);
    if (!st) {
        st = build_structure(req, params, flags);
        if (cache) cache->store(req, st);
    }

    auto roots = solve_roots(st->gb, st->ns, st->mats, st->system, solve_opts);
    auto reals = filter_real(roots, 1e-6);

    struct Candidate {
        ActuatorInput cmd;
        double residual;
    };
    const double k_lift = 2.0 / (params.propeller.eta_p * req.cond.rho * params.propeller.A_p);
    const double angle_slack = 1e-6;
    std::vector<Candidate> candidates;
    for (const auto& x : reals) {
        double thrust = x[VT];
        const double s = x[VS], c = x[VC], v = x[VV];
        if (thrust < -1e-9 * params.propeller.T_max ||
            thrust > params.propeller.T_max * (1.0 + 1e-9))
            continue;
        thrust = std::clamp(thrust, 0.0, params.propeller.T_max);
        if (std::abs(s * s + c * c - 1.0) > 1e-6) continue;
        if (v < -1e-8 * (1.0 + std::abs(v))) continue;
        double delta = std::atan2(s, c);
        if (delta < params.limits.delta_min - angle_slack ||
            delta > params.limits.delta_max + angle_slack)
            continue;
        delta = std::clamp(delta, params.limits.delta_min, params.limits.delta_max);
        // lifted-speed coherence with the recovered command
        const auto [v_par, v_perp] = flow_decompose(req.cond, delta);
        const double v_check = std::sqrt(k_lift * thrust + v_par * v_par);
        if (std::abs(std::max(v, 0.0) - v_check) > 1e-6 * std::max(v_check, 1.0)) continue;

        const ActuatorInput cmd{thrust, delta};
        candidates.push_back({cmd, residual_vs_design(cmd, req, params, flags)});
    }

    if (candidates.empty())
        throw NoFeasibleSolutionError("no physically feasible root for the request");

    // minimal residual (log-bucketed so solver noise does not mask the
    // energy preference), then minimal thrust, then minimal |delta|
    auto bucket = [](double r) {
        return r <= 1e-6 ? -6 : static_cast<int>(std::ceil(std::log10(r)));
    };
    std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
        const int ba = bucket(a.residual), bb = bucket(b.residual);
        if (ba != bb) return ba < bb;
        if (a.cmd.thrust != b.cmd.thrust) return a.cmd.thrust < b.cmd.thrust;
        return std::abs(a.cmd.tilt) < std::abs(b.cmd.tilt);
    });

    AllocResult out;
    out.command = polish_command(candidates.front().cmd, req, params, flags);
    out.branch = AllocBranch::Coupled;
    out.residual_design = residual_vs_design(out.command, req, params, flags);
    out.residual_full = residual_vs_full(out.command, req, params);
    out.n_candidates = static_cast<int>(candidates.size());
    out.saturated = out.command.thrust >= params.propeller.T_max * (1.0 - 1e-12);

    // the design map is singular at T = 0; near it, trust whichever of the
    // coupled and decoupled answers tracks the full model better
    if (out.command.thrust < 0.01 * params.propeller.T_max) {
        AllocResult dec = allocate_decoupled(req, params);
        if (dec.residual_full < out.residual_full) {
            dec.n_candidates = out.n_candidates;
            dec.latency = now_seconds() - t0;
            return dec;
        }
    }
    out.latency = now_seconds() - t0;
    return out;
}

AllocResult allocate_decoupled(const AllocRequest& req, const AircraftParams& params,
                               double hold_tilt) {
    const double t0 = now_seconds();
    PlanarForce clean{0.0, 0.0};
    if (req.cond.v_inf > 0.0) clean = forward_full({0.0, 0.0}, req.cond, params);
    const PlanarForce net{req.F_x - clean.x, req.F_z - clean.z};

    AllocResult out;
    out.branch = AllocBranch::Decoupled;
    const double magnitude = net.norm();
    if (magnitude == 0.0) {
        out.command = {0.0, hold_tilt};
    } else {
        out.command.thrust = std::min(magnitude, params.propeller.T_max);
        out.command.tilt = std::clamp(std::atan2(net.z, net.x), params.limits.delta_min,
                                      params.limits.delta_max);
    }
    out.saturated = magnitude > params.propeller.T_max;
    out.residual_full = residual_vs_full(out.command, req, params);
    out.residual_design = req.cond.v_inf > 0.0
                              ? residual_vs_design(out.command, req, params, {})
                              : out.residual_full;
    out.n_candidates = 1;
    out.latency = now_seconds() - t0;
    return out;
}

AllocResult allocate(const AllocRequest& req, const AircraftParams& params,
                     const BlendPolicy& policy, const ModelFlags& flags,
                     StructureCache* cache) {
    const double t0 = now_seconds();
    AllocResult dec = allocate_decoupled(req, params);
    double weight = 0.0;
    if (req.cond.v_inf >= policy.v_couple_min) {
        const double ramp = policy.v_couple_ramp > 0.0
                                ? std::clamp((req.cond.v_inf - policy.v_couple_min) /
                                                 policy.v_couple_ramp,
                                             0.0, 1.0)
                                : 1.0;
        const double kappa = local_flow(dec.command, req.cond, params).kappa;
        weight = kappa * ramp;
    }
    if (weight <= 0.0) {
        dec.latency = now_seconds() - t0;
        return dec;
    }

    AllocResult coupled = allocate_coupled(req, params, flags, cache);

    AllocResult out;
    out.command.thrust =
        weight * coupled.command.thrust + (1.0 - weight) * dec.command.thrust;
    out.command.tilt = weight * coupled.command.tilt + (1.0 - weight) * dec.command.tilt;
    out.branch = weight >= 1.0 ? AllocBranch::Coupled
                               : (weight <= 0.0 ? AllocBranch::Decoupled : AllocBranch::Blended);
    out.residual_full = residual_vs_full(out.command, req, params);
    out.residual_design = req.cond.v_inf > 0.0
                              ? residual_vs_design(out.command, req, params, flags)
                              : out.residual_full;
    out.n_candidates = coupled.n_candidates;
    out.saturated = coupled.saturated || dec.saturated;
    out.latency = now_seconds() - t0;
    return out;
}

double surface_fraction(double q, double q_ref) {
    if (!(q_ref > 0.0)) throw DomainError("q_ref must be positive");
    return std::clamp(q / q_ref, 0.0, 1.0);
}

SurfaceAllocation allocate_surfaces(const Eigen::Vector3d& moments, double q,
                                    const SurfaceModel& surf, const WingParams& wing,
                                    double phi) {
    surf.validate();
    SurfaceAllocation out;
    if (phi == 0.0) {
        out.deflections.setZero();
        out.realized_moment.setZero();
        return out;
    }
    if (!(q > 0.0)) throw DomainError("singular surface allocation at q = 0 with phi > 0");
    const Eigen::Vector3d diag(surf.slope_roll * q, surf.slope_pitch * q, surf.slope_yaw * q);
    Eigen::Vector3d defl = (phi * moments).cwiseQuotient(diag);
    for (int i = 0; i < 3; ++i) {
        const double lim = surf.deflection_limit;
        if (std::abs(defl(i)) > lim) {
            defl(i) = std::clamp(defl(i), -lim, lim);
            out.clamped = true;
        }
    }
    out.deflections = defl;
    out.realized_moment = diag.cwiseProduct(defl);
    // lift/drag increments from the in-plane (pitch) surface deflection
    auto [cl, cd] = wing_coefficients(wing, 0.0, defl(1));
    out.delta_cl = cl - wing.cl0;
    out.delta_cd = cd - wing.cd0;
    return out;
}

Eigen::Matrix<double, 5, 2> arm_matrix(const PropellerArm& arm) {
    Eigen::Matrix<double, 5, 2> l;
    l << 0.0, arm.L_y,
         arm.L_z, arm.L_x,
         arm.L_y, 0.0,
         1.0, 0.0,
         0.0, 1.0;
    return l;
}

WrenchDistribution distribute_wrench(const CGWrench& w, const PropellerLayout& layout) {
    const int n = static_cast<int>(layout.propellers.size());
    if (n == 0) throw std::invalid_argument("layout must contain at least one propeller");
    Eigen::MatrixXd l(5, 2 * n);
    Eigen::VectorXd scale(2 * n);
    for (int i = 0; i < n; ++i) {
        l.block<5, 2>(0, 2 * i) = arm_matrix(layout.propellers[i]);
        scale(2 * i) = scale(2 * i + 1) = layout.propellers[i].F_max;
    }
    // normalize per-propeller columns by F_max so the minimal-norm property
    // equalizes relative load, then unscale
    Eigen::MatrixXd ls = l * scale.asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ls, Eigen::ComputeThinU | Eigen::ComputeThinV);
    WrenchDistribution out;
    out.rank_deficient = svd.rank() < 5;
    Eigen::VectorXd scaled = svd.solve(w.vec());
    Eigen::VectorXd forces = scale.asDiagonal() * scaled;
    for (int i = 0; i < n; ++i) out.forces.push_back({forces(2 * i), forces(2 * i + 1)});
    return out;
}

CombinedUncertainty combine_uncertainty(const UncertaintyModel& u, double phi,
                                        const Eigen::Matrix3d& c_a,
                                        const PropellerLayout& layout) {
    const double psi = 1.0 - phi;
    CombinedUncertainty out;
    out.eps0 = phi * u.eps0_A + psi * u.eps0_p;

    Eigen::FullPivLU<Eigen::Matrix3d> lu(c_a);
    if (!lu.isInvertible()) throw DomainError("singular surface derivative matrix");
    const Eigen::Matrix3d surface_block = c_a * u.eps1_A * lu.inverse();

    const int n = static_cast<int>(layout.propellers.size());
    Eigen::MatrixXd l(5, 2 * n);
    for (int i = 0; i < n; ++i) l.block<5, 2>(0, 2 * i) = arm_matrix(layout.propellers[i]);
    Eigen::MatrixXd eps1_p = u.eps1_p;
    if (eps1_p.size() == 0) eps1_p = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    if (eps1_p.rows() != 2 * n || eps1_p.cols() != 2 * n)
        throw std::invalid_argument("eps1_p must be 2n x 2n");
    const Eigen::MatrixXd l_pinv = l.completeOrthogonalDecomposition().pseudoInverse();
    const Eigen::MatrixXd prop_block = l * eps1_p * l_pinv;

    out.eps1 = psi * prop_block;
    out.eps1.topLeftCorner<3, 3>() += phi * surface_block;

    const Eigen::Matrix<double, 5, 5> a =
        Eigen::Matrix<double, 5, 5>::Identity() + out.eps1;
    out.decoupled = true;
    for (int i = 0; i < 5; ++i) {
        double off = 0.0;
        for (int j = 0; j < 5; ++j)
            if (j != i) off += std::abs(a(i, j));
        if (std::abs(a(i, i)) < off) out.decoupled = false;
    }
    return out;
}

}  // namespace tiltalloc
