#pragma once

#include <random>

#include "aec/stimulus.hpp"
#include "aec/tensor.hpp"

namespace aec {

// Camera raster: 240x320 over a 90 deg horizontal field, angle-linear
// mapping so that 1 pixel = 0.28125 deg everywhere. Disparities and joint
// errors measured in pixels are then exactly proportional to angles.
struct CameraSpec {
    static constexpr int width = 320;
    static constexpr int height = 240;
    static constexpr double hfov_deg = 90.0;
    static constexpr double px_per_deg = width / hfov_deg;   // 3.5556 px/deg
    static constexpr double deg_per_px = hfov_deg / width;   // 0.28125 deg/px
};

inline double px_to_deg(double px) { return px * CameraSpec::deg_per_px; }
inline double deg_to_px(double deg) { return deg * CameraSpec::px_per_deg; }

// Central crop geometry: fine = native 32x32 (9 deg), coarse = 96x96
// (27 deg) average-pooled 3x3 down to 32x32.
inline constexpr int kCropSize = 32;
inline constexpr int kCoarseSpan = 96;
inline constexpr int kFineRow0 = (CameraSpec::height - kCropSize) / 2;   // 104
inline constexpr int kFineCol0 = (CameraSpec::width - kCropSize) / 2;    // 144
inline constexpr int kCoarseRow0 = (CameraSpec::height - kCoarseSpan) / 2;  // 72
inline constexpr int kCoarseCol0 = (CameraSpec::width - kCoarseSpan) / 2;   // 112

struct EnvConfig {
    double baseline_m = 0.065;
    double distance_min_m = 0.5;
    double distance_max_m = 3.0;
    double screen_speed_max_px = 4.0;  // px per iteration, each axis
    double pan_range_deg = 30.0;
    double tilt_range_deg = 30.0;
    double vergence_min_deg = 0.0;  // parallel optical axes
    double vergence_max_deg = 9.0;
    double screen_half_angle_deg = 40.0;
    double init_error_px = 4.0;  // reset: vergence error ~ U[-x, +x]
};

struct EyePose {
    double pan_deg = 0.0;
    double tilt_deg = 0.0;
    double vergence_deg = 0.0;       // total inward rotation, split +/- between eyes
    double pan_vel_deg = 0.0;        // deg per iteration
    double tilt_vel_deg = 0.0;
};

struct ScreenState {
    double distance_m = 2.0;
    double pan_deg = 0.0;       // angular position relative to the head
    double tilt_deg = 0.0;
    double pan_vel_deg = 0.0;   // deg per iteration
    double tilt_vel_deg = 0.0;
    int stimulus_id = 0;
};

// Rendered pixels, row-major [rows, cols, 3]; (row0, col0) locates the
// patch inside the full camera raster.
struct Frame {
    int rows = 0, cols = 0;
    int row0 = 0, col0 = 0;
    std::vector<float> rgb;

    const float* px(int r, int c) const {
        return rgb.data() + (static_cast<std::size_t>(r) * cols + c) * 3;
    }
    float* px(int r, int c) { return rgb.data() + (static_cast<std::size_t>(r) * cols + c) * 3; }
};

struct StereoFrames {
    Frame left, right;
};

// Fine and coarse 32x32 crops of both cameras at t and t-1.
struct BinocularObservation {
    Tensor fine_left, fine_right, fine_left_prev, fine_right_prev;
    Tensor coarse_left, coarse_right, coarse_left_prev, coarse_right_prev;
};

struct GroundTruthErrors {
    double pan_px = 0.0;       // (screen speed - eye speed), px per iteration
    double tilt_px = 0.0;
    double vergence_px = 0.0;  // (demand - vergence), px
};

// Vergence angle that fixates a target at `distance_m`: 2*atan(b/2d), deg.
double vergence_demand_deg(double distance_m, double baseline_m);

enum class EyeSide { Left, Right };

// Pure renderer: pinhole ray camera at (+-baseline/2, 0, 0) with the
// angle-linear pixel mapping, textured screen plane facing the head origin,
// bilinear sampling, mid-gray outside the screen.
Frame render_view(const Texture& tex, const EyePose& eye, const ScreenState& screen,
                  const EnvConfig& cfg, EyeSide side, int row0, int row1, int col0, int col1);

// Crops + 3x3-pools `cur`/`prev` frames into an observation. Frames must
// cover the coarse region (rows 72..167, cols 112..207).
BinocularObservation extract_observation(const StereoFrames& cur, const StereoFrames& prev);

class Environment {
public:
    Environment(const StimulusSet* stimuli, EnvConfig cfg);

    // New episode: uniform stimulus, distance ~ U[dmin,dmax], screen speeds
    // ~ U[-vmax,vmax], vergence error ~ U[-init,+init] px, eyes centered at
    // rest, previous frame := current frame.
    void reset(std::mt19937& rng);

    // Realizes exact joint errors for the evaluation suites: screen at 2 m
    // (or `distance_m`), eye at rest, screen speed = pan/tilt error, and
    // vergence = demand - error. The previous frame is rendered one
    // iteration back so the temporal stream reflects the imposed motion.
    // With strict=true, unrealizable errors throw std::domain_error.
    void impose(int stimulus_id, double distance_m, double vergence_err_px,
                double pan_speed_err_px, double tilt_speed_err_px, bool strict = true);

    // One control step. Values must come from the 9-element action set
    // (px/it for vergence, px/it^2 for pan and tilt).
    void apply_actions(double pan_px, double tilt_px, double vergence_px);

    BinocularObservation observation() const;
    GroundTruthErrors ground_truth_errors() const;

    // Full 240x320 stereo render of the current (and previous) state.
    StereoFrames render_stereo() const;
    StereoFrames render_stereo_prev() const;

    const EyePose& eye() const { return eye_; }
    const ScreenState& screen() const { return screen_; }
    const EnvConfig& config() const { return cfg_; }
    double vergence_demand_px() const;

private:
    void render_current();
    const Texture& screen_texture(int stimulus_id) const;

    const StimulusSet* stimuli_;
    EnvConfig cfg_;
    EyePose eye_, prev_eye_;
    ScreenState screen_, prev_screen_;
    StereoFrames cur_, prev_;  // coarse-region patches
};

}  // namespace aec
