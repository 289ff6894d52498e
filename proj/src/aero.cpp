#include "tiltalloc/aero.hpp"

#include <algorithm>

namespace tiltalloc {

namespace {
constexpr double kZeroFlowSpeed = 1e-300;  // below this the wing sees no flow
}

std::pair<double, double> flow_decompose(const FlightCondition& cond, double delta) {
    const double a = cond.alpha_inf + delta;
    return {cond.v_inf * std::cos(a), cond.v_inf * std::sin(a)};
}

double thrust_from_speed(double c_T, double rho, double n_rev_per_s, double D) {
    if (!(rho > 0.0) || !(D > 0.0)) throw DomainError("rho and D must be positive");
    if (n_rev_per_s < 0.0) throw DomainError("rotational speed must be nonnegative");
    const double d2 = D * D;
    return c_T * rho * n_rev_per_s * n_rev_per_s * d2 * d2;
}

double induced_velocity(double thrust, double v_parallel, double eta_p, double rho,
                        double A_p) {
    const double denom = eta_p * rho * A_p;
    if (!(denom > 0.0)) throw DomainError("eta_p * rho * A_p must be positive");
    if (thrust < 0.0) throw DomainError("thrust must be nonnegative");
    return std::sqrt(2.0 * thrust / denom + v_parallel * v_parallel);
}

double wing_alpha(double v_perp, double v_i, double delta) {
    const double s = std::sin(delta), c = std::cos(delta);
    const double den = v_perp * s + v_i * c;
    if (!(den > 0.0)) throw DomainError("degenerate flow: wing sees no oncoming stream");
    return std::atan2(v_perp * c - v_i * s, den);
}

std::pair<double, double> wing_coefficients(const WingParams& wing, double alpha_w,
                                            double delta_s) {
    const double cl = wing.cl0 + wing.cl_alpha * alpha_w + wing.cl_ds * delta_s;
    const double cd = wing.cd0 + wing.cd_alpha * alpha_w * alpha_w + wing.cd_ds * delta_s;
    return {cl, cd};
}

PlanarForce wing_forces(double rho, double A_w, double C_L, double C_D, double v_w,
                        double alpha_w) {
    if (v_w < 0.0) throw DomainError("v_w must be nonnegative");
    const double q = 0.5 * rho * A_w * v_w * v_w;
    const double lift = q * C_L, drag = q * C_D;
    // Stability-to-body rotation. Lift lands in x and drag opposes z so that
    // the alpha_w = 0 limit matches the force convention of the design model.
    const double s = std::sin(alpha_w), c = std::cos(alpha_w);
    return {lift * c + drag * s, lift * s - drag * c};
}

std::pair<double, double> overlap_blend(const MountingGeometry& geom, const WingParams& wing,
                                        const PropellerParams& prop, double delta, double v_i,
                                        double v_ip, double v_parallel) {
    const double c = std::cos(delta);
    if (!(c > 0.0)) throw DomainError("singular geometry: cos(delta) <= 0");
    const double developed = geom.f_w * v_i + (1.0 - geom.f_w) * v_parallel;
    // one fixed-point pass of the slipstream contraction
    double r_local = prop.r_p;
    if (developed > 0.0 && v_ip > 0.0) r_local = prop.r_p * std::sqrt(v_ip / developed);
    const double x_w = r_local / c;
    const double kappa = std::clamp((x_w - geom.x_p) / wing.c_w, 0.0, 1.0);
    const double v_iw = kappa * developed + (1.0 - kappa) * v_parallel;
    return {v_iw, kappa};
}

LocalFlow local_flow(const ActuatorInput& input, const FlightCondition& cond,
                     const AircraftParams& params, bool force_kappa_one) {
    LocalFlow f;
    std::tie(f.v_parallel, f.v_perp) = flow_decompose(cond, input.tilt);
    f.v_i = induced_velocity(input.thrust, f.v_parallel, params.propeller.eta_p, cond.rho,
                             params.propeller.A_p);
    f.v_ip = 0.5 * (f.v_i + f.v_parallel);
    if (force_kappa_one) {
        f.kappa = 1.0;
        f.v_iw = params.mounting.f_w * f.v_i + (1.0 - params.mounting.f_w) * f.v_parallel;
        f.r_local = params.propeller.r_p;
        f.x_w = 0.0;
    } else {
        std::tie(f.v_iw, f.kappa) =
            overlap_blend(params.mounting, params.wing, params.propeller, input.tilt, f.v_i,
                          f.v_ip, f.v_parallel);
        const double c = std::cos(input.tilt);
        const double developed =
            params.mounting.f_w * f.v_i + (1.0 - params.mounting.f_w) * f.v_parallel;
        f.r_local = (developed > 0.0 && f.v_ip > 0.0)
                        ? params.propeller.r_p * std::sqrt(f.v_ip / developed)
                        : params.propeller.r_p;
        f.x_w = f.r_local / c;
    }
    const double v_w = std::hypot(f.v_iw, f.v_perp);
    f.alpha_w = v_w > kZeroFlowSpeed ? wing_alpha(f.v_perp, f.v_iw, input.tilt)
                                     : cond.alpha_inf;
    return f;
}

PlanarForce forward_full(const ActuatorInput& input, const FlightCondition& cond,
                         const AircraftParams& params, double delta_s,
                         bool force_kappa_one) {
    const LocalFlow f = local_flow(input, cond, params, force_kappa_one);
    const double v_w = std::hypot(f.v_iw, f.v_perp);
    PlanarForce wing{0.0, 0.0};
    if (v_w > kZeroFlowSpeed) {
        auto [cl, cd] = wing_coefficients(params.wing, f.alpha_w, delta_s);
        wing = wing_forces(cond.rho, params.wing.A_w, cl, cd, v_w, f.alpha_w);
    }
    const double t = input.thrust;
    return {wing.x + t * std::cos(input.tilt), wing.z + t * std::sin(input.tilt)};
}

double design_alpha_w(const ActuatorInput& input, const FlightCondition& cond,
                      const AircraftParams& params, const ModelFlags& flags) {
    if (!(cond.v_inf > 0.0)) throw DomainError("forward_design requires v_inf > 0");
    const auto [v_par, v_perp] = flow_decompose(cond, input.tilt);
    const double v_i = induced_velocity(input.thrust, v_par, params.propeller.eta_p, cond.rho,
                                        params.propeller.A_p);
    const double s = std::sin(input.tilt), c = std::cos(input.tilt);
    const double num = v_perp * c - v_i * s;
    const double den = v_perp * s + v_i * c;
    if (flags.linearize_arctan) {
        if (den == 0.0) throw DomainError("degenerate flow in design model");
        return num / den;
    }
    if (!(den > 0.0)) throw DomainError("degenerate flow in design model");
    return std::atan2(num, den);
}

PlanarForce forward_design(const ActuatorInput& input, const FlightCondition& cond,
                           const AircraftParams& params, const ModelFlags& flags,
                           double delta_s) {
    const double alpha_w = design_alpha_w(input, cond, params, flags);
    const double t = input.thrust;
    const double s = std::sin(input.tilt), c = std::cos(input.tilt);
    const double q2 = cond.v_inf * cond.v_inf +
                      2.0 * t / (params.propeller.eta_p * cond.rho * params.propeller.A_p);
    const double half_rho_aw = 0.5 * cond.rho * params.wing.A_w;
    const double cl = params.wing.cl0 + params.wing.cl_alpha * alpha_w +
                      params.wing.cl_ds * delta_s;
    double cd = params.wing.cd0 + params.wing.cd_ds * delta_s;
    if (!flags.omit_cd_alpha) cd += params.wing.cd_alpha * alpha_w * alpha_w;
    return {t * c + half_rho_aw * cl * q2, t * s - half_rho_aw * cd * q2};
}

}  // namespace tiltalloc
