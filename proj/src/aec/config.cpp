#include "aec/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "aec/control.hpp"

namespace aec {

EnvConfig RunConfig::env_config() const {
    EnvConfig e;
    e.baseline_m = baseline_m;
    e.distance_min_m = screen_distance_min_m;
    e.distance_max_m = screen_distance_max_m;
    e.screen_speed_max_px = screen_speed_max_px;
    e.pan_range_deg = pan_range_deg;
    e.tilt_range_deg = tilt_range_deg;
    e.vergence_max_deg = vergence_max_deg;
    e.screen_half_angle_deg = screen_half_angle_deg;
    e.init_error_px = init_error_px;
    return e;
}

namespace {

struct Field {
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

double parse_double(const std::string& key, const std::string& v, double lo, double hi) {
    std::size_t used = 0;
    double x = 0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw std::runtime_error("config: bad numeric value '" + v + "' for " + key);
    }
    if (used != v.size() || !std::isfinite(x))
        throw std::runtime_error("config: bad numeric value '" + v + "' for " + key);
    if (x < lo || x > hi)
        throw std::runtime_error("config: " + key + "=" + v + " outside [" + std::to_string(lo) +
                                 ", " + std::to_string(hi) + "]");
    return x;
}

long long parse_int(const std::string& key, const std::string& v, long long lo, long long hi) {
    std::size_t used = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &used);
    } catch (const std::exception&) {
        throw std::runtime_error("config: bad integer value '" + v + "' for " + key);
    }
    if (used != v.size())
        throw std::runtime_error("config: bad integer value '" + v + "' for " + key);
    if (x < lo || x > hi)
        throw std::runtime_error("config: " + key + "=" + v + " outside [" + std::to_string(lo) +
                                 ", " + std::to_string(hi) + "]");
    return x;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return buf;
}

#define STR_FIELD(name)                                           \
    {#name, Field{[](const RunConfig& c) { return c.name; },      \
                  [](RunConfig& c, const std::string& v) { c.name = v; }}}
#define INT_FIELD(name, lo, hi)                                                          \
    {#name, Field{[](const RunConfig& c) { return std::to_string(c.name); },             \
                  [](RunConfig& c, const std::string& v) {                               \
                      c.name = static_cast<decltype(c.name)>(parse_int(#name, v, lo, hi)); \
                  }}}
#define DBL_FIELD(name, lo, hi)                                                      \
    {#name, Field{[](const RunConfig& c) { return fmt_double(c.name); },             \
                  [](RunConfig& c, const std::string& v) {                           \
                      c.name = parse_double(#name, v, lo, hi);                       \
                  }}}

const std::map<std::string, Field>& field_table() {
    static const std::map<std::string, Field> table = {
        STR_FIELD(stimuli),
        STR_FIELD(eval_stimuli),
        INT_FIELD(seed, 0, 0x7fffffffffffffffLL),
        INT_FIELD(episodes, 1, 100000000),
        INT_FIELD(episode_length, 2, 100000),
        INT_FIELD(workers, 1, 1024),
        INT_FIELD(eval_interval, 1, 100000000),
        INT_FIELD(checkpoint_interval, 1, 100000000),
        STR_FIELD(reward_mode),
        DBL_FIELD(reward_scale_c, 1e-9, 1e9),
        DBL_FIELD(gamma, 0.0, 0.999999),
        DBL_FIELD(epsilon, 0.0, 1.0),
        INT_FIELD(batch_size, 1, 1000000),
        INT_FIELD(replay_capacity, 1, 100000000),
        INT_FIELD(critic_filters, 1, 4096),
        DBL_FIELD(huber_delta, 1e-9, 1e9),
        DBL_FIELD(ae_lr, 0.0, 1.0),
        DBL_FIELD(critic_lr, 0.0, 1.0),
        DBL_FIELD(adam_beta1, 0.0, 0.999999),
        DBL_FIELD(adam_beta2, 0.0, 0.999999),
        DBL_FIELD(adam_eps, 1e-300, 1.0),
        DBL_FIELD(baseline_m, 1e-4, 1.0),
        DBL_FIELD(screen_distance_min_m, 0.05, 100.0),
        DBL_FIELD(screen_distance_max_m, 0.05, 100.0),
        DBL_FIELD(screen_speed_max_px, 0.0, 64.0),
        DBL_FIELD(pan_range_deg, 1.0, 80.0),
        DBL_FIELD(tilt_range_deg, 1.0, 60.0),
        DBL_FIELD(vergence_max_deg, 1.0, 45.0),
        DBL_FIELD(screen_half_angle_deg, 14.0, 44.0),
        DBL_FIELD(init_error_px, 0.0, 16.0),
    };
    return table;
}

#undef STR_FIELD
#undef INT_FIELD
#undef DBL_FIELD

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    const auto& table = field_table();
    auto it = table.find(key);
    if (it == table.end()) throw std::runtime_error("config: unknown key '" + key + "'");
    it->second.set(*this, value);
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: " + path + ":" + std::to_string(lineno) +
                                     ": expected key = value");
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

void RunConfig::validate() const {
    reward_mode_from_string(reward_mode);  // throws on bad value
    if (screen_distance_min_m >= screen_distance_max_m)
        throw std::runtime_error("config: screen_distance_min_m must be < screen_distance_max_m");
    // Reset samples vergence error uniformly in [-init, +init] px; the
    // vergence range must accommodate that at both distance extremes,
    // otherwise clamping would distort the stated distribution.
    const double err_deg = px_to_deg(init_error_px);
    const double demand_near = vergence_demand_deg(screen_distance_min_m, baseline_m);
    const double demand_far = vergence_demand_deg(screen_distance_max_m, baseline_m);
    if (demand_near + err_deg > vergence_max_deg)
        throw std::runtime_error(
            "config: vergence_max_deg too small for init_error_px at screen_distance_min_m "
            "(needs " +
            std::to_string(demand_near + err_deg) + " deg)");
    if (demand_far - err_deg < 0.0)
        throw std::runtime_error(
            "config: screen_distance_max_m too large: a +" + std::to_string(init_error_px) +
            " px vergence error would need a divergent (negative) vergence angle");
    // The coarse crop must stay on the screen while the gaze tracks it.
    if (screen_half_angle_deg < 14.0)
        throw std::runtime_error("config: screen_half_angle_deg must cover the 13.5 deg coarse half-field");
    if (batch_size < 1 || episode_length < 2)
        throw std::runtime_error("config: episode_length must be >= 2 and batch_size >= 1");
}

std::string RunConfig::dump() const {
    std::ostringstream os;
    for (const auto& [name, field] : field_table()) os << name << " = " << field.get(*this) << "\n";
    return os.str();
}

std::string RunConfig::eval_stimuli_or_default() const {
    if (!eval_stimuli.empty()) return eval_stimuli;
    // Held-out procedural set: shift the seed far away from the training one.
    if (stimuli.rfind("procedural:", 0) == 0) {
        const std::string rest = stimuli.substr(11);
        const auto colon = rest.find(':');
        if (colon != std::string::npos) {
            const std::string count = rest.substr(0, colon);
            const std::uint64_t s = std::stoull(rest.substr(colon + 1));
            return "procedural:" + count + ":" + std::to_string(s + 1000);
        }
    }
    return stimuli;
}

}  // namespace aec
