#include "config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <starris/errors.hpp>

namespace starris::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& what) {
    throw ConfigError(key + ": " + what);
}

std::string join(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) fail(join(path, key), "unknown key");
    }
}

double read_number(const json& v, const std::string& key) {
    if (!v.is_number()) fail(key, "must be a number");
    return v.get<double>();
}

int read_int(const json& v, const std::string& key) {
    if (!v.is_number_integer()) fail(key, "must be an integer");
    const auto x = v.get<std::int64_t>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
        fail(key, "out of range");
    }
    return static_cast<int>(x);
}

void read_pair(const json& v, const std::string& key, double& lo, double& hi) {
    if (!v.is_array() || v.size() != 2) fail(key, "must be a [min, max] pair");
    lo = read_number(v[0], key + "[0]");
    hi = read_number(v[1], key + "[1]");
}

void read_range(const json& v, const std::string& key, double& lo, double& hi, double& step) {
    if (!v.is_array() || v.size() != 3) fail(key, "must be a [min, max, step] triple");
    lo = read_number(v[0], key + "[0]");
    hi = read_number(v[1], key + "[1]");
    step = read_number(v[2], key + "[2]");
}

ArrayConfig read_array(const json& v, const std::string& key, ArrayConfig out) {
    check_keys(v, key, {"n_y", "n_z", "spacing_y", "spacing_z"});
    if (v.contains("n_y")) out.n_y = read_int(v["n_y"], key + ".n_y");
    if (v.contains("n_z")) out.n_z = read_int(v["n_z"], key + ".n_z");
    if (v.contains("spacing_y")) out.spacing_y = read_number(v["spacing_y"], key + ".spacing_y");
    if (v.contains("spacing_z")) out.spacing_z = read_number(v["spacing_z"], key + ".spacing_z");
    return out;
}

RegionSpec read_region(const json& v, const std::string& key, RegionSpec out,
                       std::set<std::string> extra = {}) {
    extra.insert({"azimuth_deg", "elevation_deg", "doppler_hz"});
    check_keys(v, key, extra);
    if (v.contains("azimuth_deg")) read_pair(v["azimuth_deg"], key + ".azimuth_deg", out.az_min_deg, out.az_max_deg);
    if (v.contains("elevation_deg")) read_pair(v["elevation_deg"], key + ".elevation_deg", out.el_min_deg, out.el_max_deg);
    if (v.contains("doppler_hz")) read_pair(v["doppler_hz"], key + ".doppler_hz", out.doppler_min_hz, out.doppler_max_hz);
    return out;
}

json region_json(const RegionSpec& r) {
    return {{"azimuth_deg", {r.az_min_deg, r.az_max_deg}},
            {"elevation_deg", {r.el_min_deg, r.el_max_deg}},
            {"doppler_hz", {r.doppler_min_hz, r.doppler_max_hz}}};
}

json array_json(const ArrayConfig& a) {
    return {{"n_y", a.n_y}, {"n_z", a.n_z}, {"spacing_y", a.spacing_y}, {"spacing_z", a.spacing_z}};
}

AngularBox to_box(const RegionSpec& r) {
    return {deg_to_rad(r.az_min_deg), deg_to_rad(r.az_max_deg), deg_to_rad(r.el_min_deg),
            deg_to_rad(r.el_max_deg)};
}

void check_direction(double az, double el, HalfSpace half, const std::string& key) {
    Direction d = Direction::from_degrees(0, 0);
    try {
        d = Direction::from_degrees(az, el);
    } catch (const ConfigError& e) {
        fail(key, e.what());
    }
    if (d.half_space() != half) {
        fail(key, std::string("direction must lie in the ") + to_string(half) + " half-space");
    }
}

}  // namespace

ExperimentConfig RunConfig::experiment(const ScanningPolicy& policy) const {
    ExperimentConfig c;
    c.carrier_hz = carrier_hz;
    c.pri_s = pri_s;
    c.policy = policy;
    c.ris = {ris.n_y, ris.n_z, ris.spacing_y, ris.spacing_z};
    c.rx = {rx.n_y, rx.n_z, rx.spacing_y, rx.spacing_z};
    c.target_t = {to_box(target_t), {target_t.doppler_min_hz, target_t.doppler_max_hz}};
    c.target_r = {to_box(target_r), {target_r.doppler_min_hz, target_r.doppler_max_hz}};
    c.clutter_t = {clutter_t.count, to_box(clutter_t.region),
                   {clutter_t.region.doppler_min_hz, clutter_t.region.doppler_max_hz}};
    c.clutter_r = {clutter_r.count, to_box(clutter_r.region),
                   {clutter_r.region.doppler_min_hz, clutter_r.region.doppler_max_hz}};
    c.cnr_db = cnr_db;
    c.snr_db = snr_db;
    c.target_far = target_far;
    c.h0_trials = h0_trials;
    c.trials = trials;
    c.seed = seed;
    c.doppler_oversampling = doppler_oversampling;
    c.search = search;
    c.noise_variance = noise_variance;
    c.frozen_scene = frozen_scene;
    return c;
}

std::vector<ScanningPolicy> RunConfig::cases() const {
    std::vector<ScanningPolicy> out;
    for (Policy p : policies) {
        for (int n : pulses) out.push_back({p, n});
    }
    return out;
}

void RunConfig::validate() const {
    if (policies.empty()) fail("policy", "at least one scanning policy is required");
    if (pulses.empty()) fail("pulses", "at least one pulse count is required");
    if (std::set<Policy>(policies.begin(), policies.end()).size() != policies.size()) {
        fail("policy", "duplicate entries");
    }
    if (std::set<int>(pulses.begin(), pulses.end()).size() != pulses.size()) {
        fail("pulses", "duplicate entries");
    }
    if (threads < 1) fail("threads", "must be >= 1");
    for (const auto& c : cases()) experiment(c).validate();

    const auto& b = beampattern;
    HalfSpace half;
    if (b.half_space == "reflective") half = HalfSpace::reflective;
    else if (b.half_space == "transmissive") half = HalfSpace::transmissive;
    else fail("beampattern.half_space", "must be \"reflective\" or \"transmissive\"");
    check_direction(b.steer_t_az, b.steer_t_el, HalfSpace::transmissive, "beampattern.steer_t_deg");
    check_direction(b.steer_r_az, b.steer_r_el, HalfSpace::reflective, "beampattern.steer_r_deg");
    if (!(b.az_step > 0) || !(b.az_min <= b.az_max)) fail("beampattern.azimuth_deg", "needs min <= max and step > 0");
    if (!(b.el_step > 0) || !(b.el_min <= b.el_max)) fail("beampattern.elevation_deg", "needs min <= max and step > 0");
    check_direction(b.az_min, b.el_min, half, "beampattern.azimuth_deg");
    check_direction(b.az_max, b.el_max, half, "beampattern.azimuth_deg");
    if ((b.az_max - b.az_min) / b.az_step > 1e5 || (b.el_max - b.el_min) / b.el_step > 1e5) {
        fail("beampattern", "grid too large");
    }
}

RunConfig from_json(const json& doc) {
    check_keys(doc, "", {"carrier_hz", "pri_s", "policy", "pulses", "ris", "rx", "target_t", "target_r",
                         "clutter_t", "clutter_r", "cnr_db", "snr_db", "target_far", "h0_trials", "trials",
                         "seed", "doppler_oversampling", "doppler_search", "noise_variance", "frozen_scene",
                         "threads", "beampattern"});
    RunConfig c;
    if (doc.contains("carrier_hz")) c.carrier_hz = read_number(doc["carrier_hz"], "carrier_hz");
    if (doc.contains("pri_s")) c.pri_s = read_number(doc["pri_s"], "pri_s");
    if (doc.contains("policy")) {
        const json& v = doc["policy"];
        const json list = v.is_array() ? v : json::array({v});
        c.policies.clear();
        for (const auto& p : list) {
            if (!p.is_string()) fail("policy", "must be a policy name or a list of names");
            try {
                c.policies.push_back(policy_from_string(p.get<std::string>()));
            } catch (const ConfigError& e) {
                fail("policy", e.what());
            }
        }
    }
    if (doc.contains("pulses")) {
        const json& v = doc["pulses"];
        const json list = v.is_array() ? v : json::array({v});
        c.pulses.clear();
        for (const auto& p : list) c.pulses.push_back(read_int(p, "pulses"));
    }
    if (doc.contains("ris")) c.ris = read_array(doc["ris"], "ris", c.ris);
    if (doc.contains("rx")) c.rx = read_array(doc["rx"], "rx", c.rx);
    if (doc.contains("target_t")) c.target_t = read_region(doc["target_t"], "target_t", c.target_t);
    if (doc.contains("target_r")) c.target_r = read_region(doc["target_r"], "target_r", c.target_r);
    for (auto [key, clutter] : {std::pair{"clutter_t", &c.clutter_t}, std::pair{"clutter_r", &c.clutter_r}}) {
        if (!doc.contains(key)) continue;
        const json& v = doc[key];
        clutter->region = read_region(v, key, clutter->region, {"count"});
        if (v.contains("count")) clutter->count = read_int(v["count"], std::string(key) + ".count");
    }
    if (doc.contains("cnr_db")) c.cnr_db = read_number(doc["cnr_db"], "cnr_db");
    if (doc.contains("snr_db")) {
        const json& v = doc["snr_db"];
        c.snr_db.clear();
        if (v.is_object()) {
            check_keys(v, "snr_db", {"min", "max", "step"});
            if (!v.contains("min") || !v.contains("max") || !v.contains("step")) {
                fail("snr_db", "range form needs min, max and step");
            }
            const double lo = read_number(v["min"], "snr_db.min");
            const double hi = read_number(v["max"], "snr_db.max");
            const double step = read_number(v["step"], "snr_db.step");
            if (!(step > 0) || !(lo <= hi)) fail("snr_db", "range needs min <= max and step > 0");
            const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
            if (n > 10'000) fail("snr_db", "range has too many points");
            for (long k = 0; k <= n; ++k) c.snr_db.push_back(lo + static_cast<double>(k) * step);
        } else if (v.is_array()) {
            for (const auto& s : v) c.snr_db.push_back(read_number(s, "snr_db"));
        } else {
            fail("snr_db", "must be a list of dB values or {min, max, step}");
        }
    }
    if (doc.contains("target_far")) c.target_far = read_number(doc["target_far"], "target_far");
    if (doc.contains("h0_trials")) c.h0_trials = read_int(doc["h0_trials"], "h0_trials");
    if (doc.contains("trials")) c.trials = read_int(doc["trials"], "trials");
    if (doc.contains("seed")) {
        const json& v = doc["seed"];
        if (!v.is_number_unsigned()) fail("seed", "must be a non-negative integer");
        c.seed = v.get<std::uint64_t>();
    }
    if (doc.contains("doppler_oversampling")) {
        c.doppler_oversampling = read_int(doc["doppler_oversampling"], "doppler_oversampling");
    }
    if (doc.contains("doppler_search")) {
        const json& v = doc["doppler_search"];
        if (v.is_string()) {
            const auto mode = v.get<std::string>();
            if (mode == "full") c.search = {};
            else if (mode == "targets") c.search = {DopplerSearch::Mode::targets, 0, 0, 0};
            else fail("doppler_search", "must be \"full\", \"targets\" or {min_hz, max_hz, step_hz}");
        } else {
            check_keys(v, "doppler_search", {"min_hz", "max_hz", "step_hz"});
            if (!v.contains("min_hz") || !v.contains("max_hz") || !v.contains("step_hz")) {
                fail("doppler_search", "explicit interval needs min_hz, max_hz and step_hz");
            }
            c.search = {DopplerSearch::Mode::explicit_range, read_number(v["min_hz"], "doppler_search.min_hz"),
                        read_number(v["max_hz"], "doppler_search.max_hz"),
                        read_number(v["step_hz"], "doppler_search.step_hz")};
        }
    }
    if (doc.contains("noise_variance")) c.noise_variance = read_number(doc["noise_variance"], "noise_variance");
    if (doc.contains("frozen_scene")) {
        if (!doc["frozen_scene"].is_boolean()) fail("frozen_scene", "must be true or false");
        c.frozen_scene = doc["frozen_scene"].get<bool>();
    }
    if (doc.contains("threads")) c.threads = read_int(doc["threads"], "threads");
    if (doc.contains("beampattern")) {
        const json& v = doc["beampattern"];
        check_keys(v, "beampattern", {"half_space", "steer_t_deg", "steer_r_deg", "azimuth_deg", "elevation_deg"});
        auto& b = c.beampattern;
        if (v.contains("half_space")) {
            if (!v["half_space"].is_string()) fail("beampattern.half_space", "must be a string");
            b.half_space = v["half_space"].get<std::string>();
        }
        if (v.contains("steer_t_deg")) read_pair(v["steer_t_deg"], "beampattern.steer_t_deg", b.steer_t_az, b.steer_t_el);
        if (v.contains("steer_r_deg")) read_pair(v["steer_r_deg"], "beampattern.steer_r_deg", b.steer_r_az, b.steer_r_el);
        if (v.contains("azimuth_deg")) read_range(v["azimuth_deg"], "beampattern.azimuth_deg", b.az_min, b.az_max, b.az_step);
        if (v.contains("elevation_deg")) read_range(v["elevation_deg"], "beampattern.elevation_deg", b.el_min, b.el_max, b.el_step);
    }
    c.validate();
    return c;
}

json to_json(const RunConfig& c) {
    json policies = json::array();
    for (Policy p : c.policies) policies.push_back(to_string(p));
    json search;
    switch (c.search.mode) {
    case DopplerSearch::Mode::full: search = "full"; break;
    case DopplerSearch::Mode::targets: search = "targets"; break;
    case DopplerSearch::Mode::explicit_range:
        search = {{"min_hz", c.search.min_hz}, {"max_hz", c.search.max_hz}, {"step_hz", c.search.step_hz}};
        break;
    }
    json clutter_t = region_json(c.clutter_t.region);
    clutter_t["count"] = c.clutter_t.count;
    json clutter_r = region_json(c.clutter_r.region);
    clutter_r["count"] = c.clutter_r.count;
    const auto& b = c.beampattern;
    return {
        {"carrier_hz", c.carrier_hz},
        {"pri_s", c.pri_s},
        {"policy", policies},
        {"pulses", c.pulses},
        {"ris", array_json(c.ris)},
        {"rx", array_json(c.rx)},
        {"target_t", region_json(c.target_t)},
        {"target_r", region_json(c.target_r)},
        {"clutter_t", clutter_t},
        {"clutter_r", clutter_r},
        {"cnr_db", c.cnr_db},
        {"snr_db", c.snr_db},
        {"target_far", c.target_far},
        {"h0_trials", c.h0_trials},
        {"trials", c.trials},
        {"seed", c.seed},
        {"doppler_oversampling", c.doppler_oversampling},
        {"doppler_search", search},
        {"noise_variance", c.noise_variance},
        {"frozen_scene", c.frozen_scene},
        {"threads", c.threads},
        {"beampattern",
         {{"half_space", b.half_space},
          {"steer_t_deg", {b.steer_t_az, b.steer_t_el}},
          {"steer_r_deg", {b.steer_r_az, b.steer_r_el}},
          {"azimuth_deg", {b.az_min, b.az_max, b.az_step}},
          {"elevation_deg", {b.el_min, b.el_max, b.el_step}}}},
    };
}

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: " + path.string() + " is not valid JSON (" + e.what() + ")");
    }
    return from_json(doc);
}

bool is_preset(const std::string& name) {
    return name == "paper_fig3" || name == "desk";
}

RunConfig preset(const std::string& name) {
    RunConfig c;
    if (name == "paper_fig3") {
        c.policies = {Policy::simultaneous, Policy::sequential};
        c.pulses = {8, 16};
        for (int s = -6; s <= 20; s += 2) c.snr_db.push_back(s);
        c.search = {DopplerSearch::Mode::targets, 0, 0, 0};
    } else if (name == "desk") {
        c.policies = {Policy::simultaneous, Policy::sequential};
        c.pulses = {8, 16};
        for (int s = -4; s <= 16; s += 4) c.snr_db.push_back(s);
        c.search = {DopplerSearch::Mode::targets, 0, 0, 0};
        c.trials = 200;
        c.h0_trials = 2000;
    } else {
        throw ConfigError("config: unknown preset " + name);
    }
    c.validate();
    return c;
}

RunConfig load_config(const std::string& source) {
    if (is_preset(source) && !std::filesystem::exists(source)) return preset(source);
    return parse_config(source);
}

namespace {

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace

std::uint64_t config_hash(const RunConfig& config) {
    json doc = to_json(config);
    doc.erase("threads");
    return fnv1a(doc.dump());
}

std::uint64_t calibration_hash(const RunConfig& config, const ScanningPolicy& policy) {
    json doc = to_json(config);
    for (const char* key : {"threads", "snr_db", "trials", "beampattern", "policy", "pulses"}) doc.erase(key);
    doc["case"] = {to_string(policy.kind), policy.pulses};
    return fnv1a(doc.dump());
}

std::string hex(std::uint64_t value) {
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << value;
    return out.str();
}

}  // namespace starris::cli
