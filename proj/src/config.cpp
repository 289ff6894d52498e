#include "tiltalloc/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace tiltalloc {

namespace {

using nlohmann::json;

json parse(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("invalid JSON document");
    return j;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + " must be a number");
    return j.get<double>();
}

// Applies `fields` to a config object, rejecting anything unlisted.
void apply_object(const json& obj, const std::string& where,
                  const std::map<std::string, double*>& fields) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        auto it = fields.find(key);
        if (it == fields.end())
            throw ConfigError("unknown field \"" + key + "\" in " + where);
        *it->second = number(value, where + "." + key);
    }
}

std::array<double, 2> range(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2)
        throw ConfigError(where + " must be a [lo, hi] pair");
    std::array<double, 2> r{number(j[0], where), number(j[1], where)};
    if (!(r[0] <= r[1])) throw ConfigError(where + " must satisfy lo <= hi");
    return r;
}

}  // namespace

AircraftParams aircraft_from_json_text(const std::string& text) {
    const json doc = parse(text);
    if (!doc.is_object()) throw ConfigError("aircraft config must be an object");
    AircraftParams p;
    for (const auto& [key, value] : doc.items()) {
        if (key == "propeller") {
            apply_object(value, key,
                         {{"A_p", &p.propeller.A_p},
                          {"r_p", &p.propeller.r_p},
                          {"D", &p.propeller.D},
                          {"c_T", &p.propeller.c_T},
                          {"eta_p", &p.propeller.eta_p},
                          {"T_max", &p.propeller.T_max}});
        } else if (key == "wing") {
            apply_object(value, key,
                         {{"A_w", &p.wing.A_w},
                          {"c_w", &p.wing.c_w},
                          {"cl0", &p.wing.cl0},
                          {"cl_alpha", &p.wing.cl_alpha},
                          {"cd0", &p.wing.cd0},
                          {"cd_alpha", &p.wing.cd_alpha},
                          {"cl_ds", &p.wing.cl_ds},
                          {"cd_ds", &p.wing.cd_ds}});
        } else if (key == "mounting") {
            apply_object(value, key, {{"x_p", &p.mounting.x_p}, {"f_w", &p.mounting.f_w}});
        } else if (key == "limits") {
            apply_object(value, key,
                         {{"delta_min", &p.limits.delta_min},
                          {"delta_max", &p.limits.delta_max}});
        } else {
            throw ConfigError("unknown top-level object \"" + key + "\"");
        }
    }
    try {
        p.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid aircraft config: ") + e.what());
    }
    return p;
}

AircraftParams load_aircraft(const std::string& path) {
    return aircraft_from_json_text(read_file(path));
}

std::string aircraft_to_json_text(const AircraftParams& p) {
    json doc;
    doc["propeller"] = {{"A_p", p.propeller.A_p}, {"r_p", p.propeller.r_p},
                        {"D", p.propeller.D},     {"c_T", p.propeller.c_T},
                        {"eta_p", p.propeller.eta_p}, {"T_max", p.propeller.T_max}};
    doc["wing"] = {{"A_w", p.wing.A_w},         {"c_w", p.wing.c_w},
                   {"cl0", p.wing.cl0},         {"cl_alpha", p.wing.cl_alpha},
                   {"cd0", p.wing.cd0},         {"cd_alpha", p.wing.cd_alpha},
                   {"cl_ds", p.wing.cl_ds},     {"cd_ds", p.wing.cd_ds}};
    doc["mounting"] = {{"x_p", p.mounting.x_p}, {"f_w", p.mounting.f_w}};
    doc["limits"] = {{"delta_min", p.limits.delta_min}, {"delta_max", p.limits.delta_max}};
    return doc.dump(2);
}

void CampaignSpec::validate() const {
    if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
    for (const auto& [name, r] :
         std::initializer_list<std::pair<const char*, std::array<double, 2>>>{
             {"v_inf", v_inf}, {"rho", rho}, {"alpha_inf", alpha_inf},
             {"F_x", F_x}, {"F_z", F_z}})
        if (!(r[0] <= r[1]))
            throw ConfigError(std::string(name) + " range must satisfy lo <= hi");
    if (!(rho[0] > 0.0)) throw ConfigError("rho range must be positive");
}

CampaignSpec campaign_from_json_text(const std::string& text) {
    const json doc = parse(text);
    if (!doc.is_object()) throw ConfigError("campaign spec must be an object");
    CampaignSpec s;
    for (const auto& [key, value] : doc.items()) {
        if (key == "n_samples") {
            if (!value.is_number_integer() || value.get<long long>() < 1)
                throw ConfigError("n_samples must be a positive integer");
            s.n_samples = value.get<int>();
        } else if (key == "seed") {
            if (!value.is_number_unsigned() && !value.is_number_integer())
                throw ConfigError("seed must be an integer");
            s.seed = value.get<std::uint64_t>();
        } else if (key == "v_inf") {
            s.v_inf = range(value, key);
        } else if (key == "rho") {
            s.rho = range(value, key);
        } else if (key == "alpha_inf_deg") {
            auto deg = range(value, key);
            s.alpha_inf = {deg[0] * M_PI / 180, deg[1] * M_PI / 180};
        } else if (key == "alpha_inf_rad") {
            s.alpha_inf = range(value, key);
        } else if (key == "F_x") {
            s.F_x = range(value, key);
        } else if (key == "F_z") {
            s.F_z = range(value, key);
        } else {
            throw ConfigError("unknown field \"" + key + "\" in campaign spec");
        }
    }
    s.validate();
    return s;
}

CampaignSpec load_campaign(const std::string& path) {
    return campaign_from_json_text(read_file(path));
}

std::string campaign_to_json_text(const CampaignSpec& s) {
    json doc;
    doc["n_samples"] = s.n_samples;
    doc["seed"] = s.seed;
    doc["v_inf"] = s.v_inf;
    doc["rho"] = s.rho;
    doc["alpha_inf_rad"] = s.alpha_inf;
    doc["F_x"] = s.F_x;
    doc["F_z"] = s.F_z;
    return doc.dump(2);
}

}  // namespace tiltalloc
