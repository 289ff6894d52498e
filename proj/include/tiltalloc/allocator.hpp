#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "tiltalloc/aero.hpp"
#include "tiltalloc/zerodim.hpp"

namespace tiltalloc {

struct NoFeasibleSolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Lifted variables of the polynomial system, in basis order.
// T = thrust, s = sin(delta), c = cos(delta), v = lifted induced speed,
// w = lifted wing angle of attack.
inline const std::vector<std::string> kSystemVars = {"T", "s", "c", "v", "w"};

struct AllocRequest {
    FlightCondition cond;
    double F_x = 0.0;
    double F_z = 0.0;
    bool allow_surface_budget = false;
};

enum class AllocBranch { Coupled, Decoupled, Blended };

inline const char* to_string(AllocBranch b) {
    switch (b) {
        case AllocBranch::Coupled: return "coupled";
        case AllocBranch::Decoupled: return "decoupled";
        default: return "blended";
    }
}

struct AllocResult {
    ActuatorInput command;
    AllocBranch branch = AllocBranch::Coupled;
    double residual_design = 0.0;  // relative force error vs forward_design
    double residual_full = 0.0;    // relative force error vs forward_full
    int n_candidates = 0;
    double latency = 0.0;  // seconds
    bool saturated = false;
};

struct BlendPolicy {
    double v_couple_min = 3.0;   // below this the decoupled branch is used alone
    double v_couple_ramp = 2.0;  // width of the linear hand-over above v_couple_min
};

// Reusable solve structure for one (condition, request) cell: basis, normal
// set and multiplication matrices. Written once, then shared read-only.
struct SolveStructure {
    PolySystem<Rational> system;
    GroebnerBasis gb;
    NormalSet ns;
    std::vector<Eigen::MatrixXd> mats;
};

class StructureCache {
public:
    std::shared_ptr<const SolveStructure> find(const AllocRequest& req) const;
    void store(const AllocRequest& req, std::shared_ptr<const SolveStructure> s);

private:
    static std::string key(const AllocRequest& req);
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<const SolveStructure>> cells_;
};

// Polynomial encoding of forward_design(T, delta) = (F_x, F_z) in the lifted
// variables (T, s, c, v, w). Coefficients are exact rational images of the
// numeric parameters; the system is generated from the implemented design
// model, not transcribed.
PolySystem<Rational> build_system(const AllocRequest& req, const AircraftParams& params,
                                  const ModelFlags& flags = {});

std::shared_ptr<const SolveStructure> build_structure(const AllocRequest& req,
                                                      const AircraftParams& params,
                                                      const ModelFlags& flags = {});

AllocResult allocate_coupled(const AllocRequest& req, const AircraftParams& params,
                             const ModelFlags& flags = {}, StructureCache* cache = nullptr,
                             const SolveOptions& solve_opts = {});

AllocResult allocate_decoupled(const AllocRequest& req, const AircraftParams& params,
                               double hold_tilt = 0.0);

AllocResult allocate(const AllocRequest& req, const AircraftParams& params,
                     const BlendPolicy& policy = {}, const ModelFlags& flags = {},
                     StructureCache* cache = nullptr);

// --- CG-level allocation layer ---

struct CGWrench {
    double M_x = 0.0, M_y = 0.0, M_z = 0.0;  // N*m
    double F_x = 0.0, F_z = 0.0;             // N

    Eigen::Matrix<double, 5, 1> vec() const {
        Eigen::Matrix<double, 5, 1> v;
        v << M_x, M_y, M_z, F_x, F_z;
        return v;
    }
};

struct PropellerArm {
    double L_x = 0.0, L_y = 0.0, L_z = 0.0;  // m
    double F_max = 1.0;                      // N
};

struct PropellerLayout {
    std::vector<PropellerArm> propellers;
};

// Control-derivative slopes; each moment derivative is slope * q.
struct SurfaceModel {
    double slope_roll = 1.0;   // aileron
    double slope_pitch = 1.0;  // elevator
    double slope_yaw = 1.0;    // rudder
    double deflection_limit = 0.5;  // rad, symmetric

    void validate() const {
        if (slope_roll == 0.0 || slope_pitch == 0.0 || slope_yaw == 0.0)
            throw DomainError("surface slopes must be nonzero");
    }
};

struct SurfaceAllocation {
    Eigen::Vector3d deflections;      // aileron, elevator, rudder [rad]
    Eigen::Vector3d realized_moment;  // C_A(q) * deflections
    double delta_cl = 0.0;            // lift increment from the in-plane surface
    double delta_cd = 0.0;
    bool clamped = false;
};

SurfaceAllocation allocate_surfaces(const Eigen::Vector3d& moments, double q,
                                    const SurfaceModel& surf, const WingParams& wing,
                                    double phi);

struct WrenchDistribution {
    std::vector<PlanarForce> forces;
    bool rank_deficient = false;
};

// Per-propeller block mapping a planar force to the CG wrench.
Eigen::Matrix<double, 5, 2> arm_matrix(const PropellerArm& arm);

WrenchDistribution distribute_wrench(const CGWrench& w, const PropellerLayout& layout);

struct UncertaintyModel {
    Eigen::Matrix<double, 5, 1> eps0_A = Eigen::Matrix<double, 5, 1>::Zero();
    Eigen::Matrix<double, 5, 1> eps0_p = Eigen::Matrix<double, 5, 1>::Zero();
    Eigen::Matrix3d eps1_A = Eigen::Matrix3d::Zero();   // surface gain error
    Eigen::MatrixXd eps1_p;                             // propeller gain error, 2n x 2n
};

struct CombinedUncertainty {
    Eigen::Matrix<double, 5, 1> eps0;
    Eigen::Matrix<double, 5, 5> eps1;
    bool decoupled = false;  // I + eps1 weakly diagonally dominant (row-wise)
};

CombinedUncertainty combine_uncertainty(const UncertaintyModel& u, double phi,
                                        const Eigen::Matrix3d& c_a,
                                        const PropellerLayout& layout);

// phi(q) placeholder: clamp(q / q_ref, 0, 1).
double surface_fraction(double q, double q_ref);

}  // namespace tiltalloc
