#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

namespace tiltalloc {

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Free-stream state parametrizing every map. Planar model: no sideslip.
struct FlightCondition {
    double v_inf = 0.0;      // airspeed magnitude [m/s]
    double rho = 1.225;      // air density [kg/m^3]
    double alpha_inf = 0.0;  // free-stream angle of attack [rad]

    static FlightCondition from_components(double u, double w, double rho) {
        FlightCondition c;
        c.v_inf = std::hypot(u, w);
        c.rho = rho;
        c.alpha_inf = (u == 0.0 && w == 0.0) ? 0.0 : std::atan2(w, u);
        c.validate();
        return c;
    }

    void validate() const {
        if (!(rho > 0.0)) throw DomainError("rho must be positive");
        if (!(v_inf >= 0.0)) throw DomainError("v_inf must be nonnegative");
        if (!(std::abs(alpha_inf) < M_PI / 2)) throw DomainError("|alpha_inf| must be < pi/2");
    }
};

struct PropellerParams {
    double A_p = 0.5;    // disk area [m^2]
    double r_p = 0.4;    // disk radius [m]
    double D = 0.8;      // diameter [m]
    double c_T = 0.1;    // thrust coefficient
    double eta_p = 0.8;  // efficiency factor, (0, 1]
    double T_max = 400;  // maximum thrust [N]

    void validate(bool check_area_radius = false) const {
        if (!(A_p > 0.0)) throw DomainError("A_p must be positive");
        if (!(D > 0.0)) throw DomainError("D must be positive");
        if (!(eta_p > 0.0 && eta_p <= 1.0)) throw DomainError("eta_p must be in (0,1]");
        if (!(T_max > 0.0)) throw DomainError("T_max must be positive");
        if (check_area_radius && r_p > 0.0) {
            const double area = M_PI * r_p * r_p;
            if (std::abs(area - A_p) > 1e-9 * area)
                throw DomainError("A_p and r_p are inconsistent (A_p != pi*r_p^2)");
        }
    }
};

struct WingParams {
    double A_w = 0.75;     // wing area [m^2]
    double c_w = 0.5;      // chord [m]
    double cl0 = 0.4;      // zero-alpha lift coefficient
    double cl_alpha = 5.7; // lift slope [1/rad]
    double cd0 = 0.03;     // zero-alpha drag coefficient
    double cd_alpha = 1.0; // drag curvature [1/rad^2]
    double cl_ds = 2.0;    // lift per surface deflection [1/rad]
    double cd_ds = 0.05;   // drag per surface deflection [1/rad]

    void validate() const {
        if (!(A_w > 0.0)) throw DomainError("A_w must be positive");
        if (!(c_w > 0.0)) throw DomainError("c_w must be positive");
        if (!(cl_alpha > 0.0)) throw DomainError("cl_alpha must be positive");
        if (!(cd0 >= 0.0)) throw DomainError("cd0 must be nonnegative");
        if (!(cd_alpha >= 0.0)) throw DomainError("cd_alpha must be nonnegative");
    }
};

struct MountingGeometry {
    double x_p = 0.1;  // propeller center to leading edge [m]
    double f_w = 0.7;  // wake development factor, [0, 1]

    void validate() const {
        if (!(x_p >= 0.0)) throw DomainError("x_p must be nonnegative");
        if (!(f_w >= 0.0 && f_w <= 1.0)) throw DomainError("f_w must be in [0,1]");
    }
};

struct ActuatorLimits {
    double delta_min = 0.0;
    double delta_max = M_PI / 2;

    void validate() const {
        if (!(delta_min >= 0.0 && delta_max <= M_PI / 2 && delta_min <= delta_max))
            throw DomainError("tilt range must satisfy 0 <= delta_min <= delta_max <= pi/2");
    }
};

struct AircraftParams {
    PropellerParams propeller;
    WingParams wing;
    MountingGeometry mounting;
    ActuatorLimits limits;

    void validate(bool check_area_radius = false) const {
        propeller.validate(check_area_radius);
        wing.validate();
        mounting.validate();
        limits.validate();
    }
};

// Forward-map input pair: thrust [N] and tilt angle [rad].
// delta = 0 is cruise (thrust along body x), delta = pi/2 is hover.
struct ActuatorInput {
    double thrust = 0.0;
    double tilt = 0.0;
};

struct PlanarForce {
    double x = 0.0;
    double z = 0.0;

    friend PlanarForce operator+(PlanarForce a, PlanarForce b) { return {a.x + b.x, a.z + b.z}; }
    friend PlanarForce operator-(PlanarForce a, PlanarForce b) { return {a.x - b.x, a.z - b.z}; }
    double norm() const { return std::hypot(x, z); }
};

// Flow state local to one propeller-wing pair.
struct LocalFlow {
    double v_parallel = 0.0;  // free-stream component along thrust axis
    double v_perp = 0.0;      // free-stream component across thrust axis
    double v_i = 0.0;         // fully developed induced speed
    double v_ip = 0.0;        // speed at the disk, (v_i + v_parallel)/2
    double v_iw = 0.0;        // induced speed blended at the wing
    double alpha_w = 0.0;     // local wing angle of attack
    double kappa = 0.0;       // chord coverage fraction, [0, 1]
    double x_w = 0.0;         // slipstream/chord intersection distance
    double r_local = 0.0;     // contracted slipstream radius
};

// Model simplifications toggled independently. The first two define the
// design (inversion) model; force_kappa_one applies to the full map when
// comparing the two.
struct ModelFlags {
    bool linearize_arctan = true;
    bool omit_cd_alpha = true;
    bool force_kappa_one = false;
    // Relative rounding applied to each scalar parameter before it enters the
    // exact polynomial system; 0 uses the exact binary image of the doubles.
    // Rounding at the parameter level keeps shared coefficients identical
    // across equations, so the quotient structure is unchanged.
    double coeff_round = 1e-7;
};

std::pair<double, double> flow_decompose(const FlightCondition& cond, double delta);

double thrust_from_speed(double c_T, double rho, double n_rev_per_s, double D);

double induced_velocity(double thrust, double v_parallel, double eta_p, double rho,
                        double A_p);

double wing_alpha(double v_perp, double v_i, double delta);

std::pair<double, double> wing_coefficients(const WingParams& wing, double alpha_w,
                                            double delta_s);

PlanarForce wing_forces(double rho, double A_w, double C_L, double C_D, double v_w,
                        double alpha_w);

std::pair<double, double> overlap_blend(const MountingGeometry& geom, const WingParams& wing,
                                        const PropellerParams& prop, double delta, double v_i,
                                        double v_ip, double v_parallel);

LocalFlow local_flow(const ActuatorInput& input, const FlightCondition& cond,
                     const AircraftParams& params, bool force_kappa_one = false);

PlanarForce forward_full(const ActuatorInput& input, const FlightCondition& cond,
                         const AircraftParams& params, double delta_s = 0.0,
                         bool force_kappa_one = false);

PlanarForce forward_design(const ActuatorInput& input, const FlightCondition& cond,
                           const AircraftParams& params, const ModelFlags& flags = {},
                           double delta_s = 0.0);

// Local wing angle of attack of the design model (shared with the polynomial
// system construction).
double design_alpha_w(const ActuatorInput& input, const FlightCondition& cond,
                      const AircraftParams& params, const ModelFlags& flags = {});

}  // namespace tiltalloc
