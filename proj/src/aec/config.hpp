#pragma once

#include <cstdint>
#include <string>

#include "aec/environment.hpp"

namespace aec {

// Every tunable of the stack, serialized as a flat `key = value` text file.
// Unknown keys and out-of-range values are rejected at parse time.
struct RunConfig {
    // stimuli
    std::string stimuli = "procedural:20:7";
    std::string eval_stimuli;  // empty: derived from `stimuli` (held-out seed)

    // schedule
    std::uint64_t seed = 1;
    int episodes = 2000;
    int episode_length = 10;
    int workers = 1;
    int eval_interval = 200;
    int checkpoint_interval = 1000;

    // control
    std::string reward_mode = "new";
    double reward_scale_c = 10.0;
    double gamma = 0.1;
    double epsilon = 0.05;
    int batch_size = 64;
    int replay_capacity = 1000;
    int critic_filters = 32;
    double huber_delta = 1.0;

    // optimization
    double ae_lr = 1e-4;
    double critic_lr = 1e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    // environment
    double baseline_m = 0.065;
    double screen_distance_min_m = 0.5;
    double screen_distance_max_m = 3.0;
    double screen_speed_max_px = 4.0;
    double pan_range_deg = 30.0;
    double tilt_range_deg = 30.0;
    double vergence_max_deg = 9.0;
    double screen_half_angle_deg = 40.0;
    double init_error_px = 4.0;

    EnvConfig env_config() const;

    // Parse `key = value` lines ('#' comments allowed). Throws
    // std::runtime_error naming the offending key/value.
    static RunConfig from_file(const std::string& path);
    void set(const std::string& key, const std::string& value);
    void validate() const;
    std::string dump() const;

    std::string eval_stimuli_or_default() const;
};

}  // namespace aec
