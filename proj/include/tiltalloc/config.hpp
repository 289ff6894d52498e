#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "tiltalloc/aero.hpp"

namespace tiltalloc {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Aircraft configuration document: top-level objects "propeller", "wing",
// "mounting", "limits", fields named exactly like the parameter structs,
// SI units. Unknown fields are rejected. Missing fields keep the shipped
// defaults.
AircraftParams aircraft_from_json_text(const std::string& text);
AircraftParams load_aircraft(const std::string& path);
std::string aircraft_to_json_text(const AircraftParams& params);

// Monte-Carlo campaign description. Ranges are inclusive [lo, hi]; the
// angle range carries an explicit unit suffix on input (alpha_inf_deg or
// alpha_inf_rad) and is stored in radians.
struct CampaignSpec {
    int n_samples = 10000;
    std::uint64_t seed = 1;
    std::array<double, 2> v_inf{15.0, 20.0};                            // m/s
    std::array<double, 2> rho{0.5, 1.225};                              // kg/m^3
    std::array<double, 2> alpha_inf{5.0 * M_PI / 180, 10.0 * M_PI / 180};  // rad
    std::array<double, 2> F_x{40.0, 80.0};                              // N
    std::array<double, 2> F_z{70.0, 140.0};                             // N

    void validate() const;
};

CampaignSpec campaign_from_json_text(const std::string& text);
CampaignSpec load_campaign(const std::string& path);
std::string campaign_to_json_text(const CampaignSpec& spec);

}  // namespace tiltalloc
