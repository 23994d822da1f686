#include "aec/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aec/rng.hpp"

namespace aec {

namespace {

constexpr double kPi = 3.14159265358979323846;
inline double rad(double deg) { return deg * kPi / 180.0; }

struct Vec3 {
    double x = 0, y = 0, z = 0;
};
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

// Rotation R_y(yaw)*R_x(pitch); maps the camera axes into the world.
// Positive yaw turns the optical axis toward +x (rightward), positive
// pitch toward +y (upward).
struct Basis {
    double m[3][3];

    static Basis yaw_pitch(double yaw_deg, double pitch_deg) {
        const double cy = std::cos(rad(yaw_deg)), sy = std::sin(rad(yaw_deg));
        const double cp = std::cos(rad(pitch_deg)), sp = std::sin(rad(pitch_deg));
        Basis b;
        b.m[0][0] = cy;  b.m[0][1] = -sy * sp; b.m[0][2] = sy * cp;
        b.m[1][0] = 0;   b.m[1][1] = cp;       b.m[1][2] = sp;
        b.m[2][0] = -sy; b.m[2][1] = -cy * sp; b.m[2][2] = cy * cp;
        return b;
    }
    Vec3 apply(Vec3 v) const {
        return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
                m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
                m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
    }
    Vec3 axis_x() const { return {m[0][0], m[1][0], m[2][0]}; }
    Vec3 axis_y() const { return {m[0][1], m[1][1], m[2][1]}; }
    Vec3 axis_z() const { return {m[0][2], m[1][2], m[2][2]}; }
};

inline void sample_bilinear(const Texture& tex, double u, double v, float* out) {
    u = std::clamp(u, 0.0, static_cast<double>(tex.width - 1));
    v = std::clamp(v, 0.0, static_cast<double>(tex.height - 1));
    const int x0 = static_cast<int>(u), y0 = static_cast<int>(v);
    const int x1 = std::min(x0 + 1, tex.width - 1), y1 = std::min(y0 + 1, tex.height - 1);
    const double fx = u - x0, fy = v - y0;
    const float* p00 = tex.px(y0, x0);
    const float* p01 = tex.px(y0, x1);
    const float* p10 = tex.px(y1, x0);
    const float* p11 = tex.px(y1, x1);
    for (int k = 0; k < 3; ++k) {
        const double top = p00[k] + fx * (p01[k] - p00[k]);
        const double bot = p10[k] + fx * (p11[k] - p10[k]);
        out[k] = static_cast<float>(top + fy * (bot - top));
    }
}

constexpr float kBackgroundGray = 0.5f;

}  // namespace

double vergence_demand_deg(double distance_m, double baseline_m) {
    if (distance_m <= 0.0) throw std::invalid_argument("vergence_demand: distance must be > 0");
    if (baseline_m <= 0.0) throw std::invalid_argument("vergence_demand: baseline must be > 0");
    return 2.0 * std::atan2(baseline_m, 2.0 * distance_m) * 180.0 / kPi;
}

Frame render_view(const Texture& tex, const EyePose& eye, const ScreenState& screen,
                  const EnvConfig& cfg, EyeSide side, int row0, int row1, int col0, int col1) {
    Frame out;
    out.rows = row1 - row0;
    out.cols = col1 - col0;
    out.row0 = row0;
    out.col0 = col0;
    out.rgb.assign(static_cast<std::size_t>(out.rows) * out.cols * 3, kBackgroundGray);

    const double half = side == EyeSide::Left ? -0.5 : 0.5;
    const Vec3 eye_pos{half * cfg.baseline_m, 0.0, 0.0};
    const double yaw = eye.pan_deg + (side == EyeSide::Left ? 0.5 : -0.5) * eye.vergence_deg;
    const Basis cam = Basis::yaw_pitch(yaw, eye.tilt_deg);

    const Basis scr = Basis::yaw_pitch(screen.pan_deg, screen.tilt_deg);
    const Vec3 normal = scr.axis_z();
    const Vec3 center = screen.distance_m * normal;
    const Vec3 ex = scr.axis_x();
    const Vec3 ey = scr.axis_y();
    const double half_size = screen.distance_m * std::tan(rad(cfg.screen_half_angle_deg));
    const double plane_offset = dot(center - eye_pos, normal);

    // Angle-linear raster: precompute per-row / per-column ray angles.
    const double cx = (CameraSpec::width - 1) * 0.5;
    const double cy = (CameraSpec::height - 1) * 0.5;
    std::vector<double> sin_az(static_cast<std::size_t>(out.cols)),
        cos_az(static_cast<std::size_t>(out.cols));
    for (int c = 0; c < out.cols; ++c) {
        const double az = rad((col0 + c - cx) * CameraSpec::deg_per_px);
        sin_az[static_cast<std::size_t>(c)] = std::sin(az);
        cos_az[static_cast<std::size_t>(c)] = std::cos(az);
    }
    for (int r = 0; r < out.rows; ++r) {
        const double el = rad((cy - (row0 + r)) * CameraSpec::deg_per_px);
        const double se = std::sin(el), ce = std::cos(el);
        for (int c = 0; c < out.cols; ++c) {
            const Vec3 ray_cam{ce * sin_az[static_cast<std::size_t>(c)], se,
                               ce * cos_az[static_cast<std::size_t>(c)]};
            const Vec3 w = cam.apply(ray_cam);
            const double denom = dot(w, normal);
            if (denom <= 1e-12) continue;  // looking away from the screen
            const double t = plane_offset / denom;
            if (t <= 0.0) continue;
            const Vec3 hit = eye_pos + t * w - center;
            const double a = dot(hit, ex);
            const double b = dot(hit, ey);
            if (std::abs(a) > half_size || std::abs(b) > half_size) continue;
            const double u = (a + half_size) / (2.0 * half_size) * (tex.width - 1);
            const double v = (half_size - b) / (2.0 * half_size) * (tex.height - 1);
            sample_bilinear(tex, u, v, out.px(r, c));
        }
    }
    return out;
}

namespace {

Tensor crop32(const Frame& f, int abs_row0, int abs_col0) {
    Tensor t({kCropSize, kCropSize, 3});
    const int r0 = abs_row0 - f.row0;
    const int c0 = abs_col0 - f.col0;
    if (r0 < 0 || c0 < 0 || r0 + kCropSize > f.rows || c0 + kCropSize > f.cols)
        throw std::invalid_argument("extract_observation: frame does not cover the crop region");
    for (int r = 0; r < kCropSize; ++r)
        for (int c = 0; c < kCropSize; ++c) {
            const float* p = f.px(r0 + r, c0 + c);
            for (int k = 0; k < 3; ++k) t.at3(r, c, k) = p[k];
        }
    return t;
}

Tensor coarse32(const Frame& f) {
    Tensor t({kCropSize, kCropSize, 3});
    const int r0 = kCoarseRow0 - f.row0;
    const int c0 = kCoarseCol0 - f.col0;
    if (r0 < 0 || c0 < 0 || r0 + kCoarseSpan > f.rows || c0 + kCoarseSpan > f.cols)
        throw std::invalid_argument("extract_observation: frame does not cover the coarse region");
    for (int r = 0; r < kCropSize; ++r)
        for (int c = 0; c < kCropSize; ++c) {
            float acc[3] = {0, 0, 0};
            for (int dy = 0; dy < 3; ++dy)
                for (int dx = 0; dx < 3; ++dx) {
                    const float* p = f.px(r0 + 3 * r + dy, c0 + 3 * c + dx);
                    for (int k = 0; k < 3; ++k) acc[k] += p[k];
                }
            for (int k = 0; k < 3; ++k) t.at3(r, c, k) = acc[k] / 9.0f;
        }
    return t;
}

}  // namespace

BinocularObservation extract_observation(const StereoFrames& cur, const StereoFrames& prev) {
    BinocularObservation o;
    o.fine_left = crop32(cur.left, kFineRow0, kFineCol0);
    o.fine_right = crop32(cur.right, kFineRow0, kFineCol0);
    o.fine_left_prev = crop32(prev.left, kFineRow0, kFineCol0);
    o.fine_right_prev = crop32(prev.right, kFineRow0, kFineCol0);
    o.coarse_left = coarse32(cur.left);
    o.coarse_right = coarse32(cur.right);
    o.coarse_left_prev = coarse32(prev.left);
    o.coarse_right_prev = coarse32(prev.right);
    return o;
}

Environment::Environment(const StimulusSet* stimuli, EnvConfig cfg)
    : stimuli_(stimuli), cfg_(cfg) {
    if (!stimuli_ || stimuli_->size() == 0)
        throw std::runtime_error("environment requires a non-empty stimulus set");
}

const Texture& Environment::screen_texture(int stimulus_id) const {
    const double span_px =
        deg_to_px(2.0 * cfg_.screen_half_angle_deg);  // on-screen pixel footprint
    return stimuli_->level_for_span(stimulus_id, span_px);
}

void Environment::render_current() {
    const Texture& tex = screen_texture(screen_.stimulus_id);
    cur_.left = render_view(tex, eye_, screen_, cfg_, EyeSide::Left, kCoarseRow0,
                            kCoarseRow0 + kCoarseSpan, kCoarseCol0, kCoarseCol0 + kCoarseSpan);
    cur_.right = render_view(tex, eye_, screen_, cfg_, EyeSide::Right, kCoarseRow0,
                             kCoarseRow0 + kCoarseSpan, kCoarseCol0, kCoarseCol0 + kCoarseSpan);
}

void Environment::reset(std::mt19937& rng) {
    screen_ = ScreenState{};
    screen_.stimulus_id = static_cast<int>(rng_index(rng, static_cast<std::uint32_t>(stimuli_->size())));
    screen_.distance_m = rng_uniform(rng, cfg_.distance_min_m, cfg_.distance_max_m);
    const double vmax = px_to_deg(cfg_.screen_speed_max_px);
    screen_.pan_vel_deg = rng_uniform(rng, -vmax, vmax);
    screen_.tilt_vel_deg = rng_uniform(rng, -vmax, vmax);

    eye_ = EyePose{};
    const double err_px = rng_uniform(rng, -cfg_.init_error_px, cfg_.init_error_px);
    eye_.vergence_deg = vergence_demand_deg(screen_.distance_m, cfg_.baseline_m) - px_to_deg(err_px);

    render_current();
    prev_ = cur_;
    prev_eye_ = eye_;
    prev_screen_ = screen_;
}

void Environment::impose(int stimulus_id, double distance_m, double vergence_err_px,
                         double pan_speed_err_px, double tilt_speed_err_px, bool strict) {
    if (stimulus_id < 0 || stimulus_id >= stimuli_->size())
        throw std::invalid_argument("impose: stimulus id out of range");
    screen_ = ScreenState{};
    screen_.stimulus_id = stimulus_id;
    screen_.distance_m = distance_m;
    screen_.pan_vel_deg = px_to_deg(pan_speed_err_px);
    screen_.tilt_vel_deg = px_to_deg(tilt_speed_err_px);

    eye_ = EyePose{};
    const double demand = vergence_demand_deg(distance_m, cfg_.baseline_m);
    eye_.vergence_deg = demand - px_to_deg(vergence_err_px);
    if (strict && (eye_.vergence_deg < cfg_.vergence_min_deg ||
                   eye_.vergence_deg > cfg_.vergence_max_deg))
        throw std::domain_error("impose: vergence error " + std::to_string(vergence_err_px) +
                                " px needs vergence " + std::to_string(eye_.vergence_deg) +
                                " deg, outside joint limits");

    // Render the state one iteration back, then advance so the previous
    // frame is exactly one step old.
    screen_.pan_deg = -screen_.pan_vel_deg;
    screen_.tilt_deg = -screen_.tilt_vel_deg;
    render_current();
    prev_ = cur_;
    prev_eye_ = eye_;
    prev_screen_ = screen_;
    screen_.pan_deg = 0.0;
    screen_.tilt_deg = 0.0;
    render_current();
}

void Environment::apply_actions(double pan_px, double tilt_px, double vergence_px) {
    auto in_set = [](double v) {
        for (double a : {-4.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0})
            if (v == a) return true;
        return false;
    };
    if (!in_set(pan_px) || !in_set(tilt_px) || !in_set(vergence_px))
        throw std::invalid_argument("apply_actions: action value outside the discrete set");

    prev_ = cur_;
    prev_eye_ = eye_;
    prev_screen_ = screen_;

    // Vergence: velocity control (direct increment), clamped to limits.
    eye_.vergence_deg = std::clamp(eye_.vergence_deg + px_to_deg(vergence_px),
                                   cfg_.vergence_min_deg, cfg_.vergence_max_deg);

    // Pan/tilt: acceleration control; hitting a position limit zeroes the
    // velocity so it cannot wind up against the stop.
    eye_.pan_vel_deg += px_to_deg(pan_px);
    eye_.pan_deg += eye_.pan_vel_deg;
    if (eye_.pan_deg > cfg_.pan_range_deg || eye_.pan_deg < -cfg_.pan_range_deg) {
        eye_.pan_deg = std::clamp(eye_.pan_deg, -cfg_.pan_range_deg, cfg_.pan_range_deg);
        eye_.pan_vel_deg = 0.0;
    }
    eye_.tilt_vel_deg += px_to_deg(tilt_px);
    eye_.tilt_deg += eye_.tilt_vel_deg;
    if (eye_.tilt_deg > cfg_.tilt_range_deg || eye_.tilt_deg < -cfg_.tilt_range_deg) {
        eye_.tilt_deg = std::clamp(eye_.tilt_deg, -cfg_.tilt_range_deg, cfg_.tilt_range_deg);
        eye_.tilt_vel_deg = 0.0;
    }

    screen_.pan_deg += screen_.pan_vel_deg;
    screen_.tilt_deg += screen_.tilt_vel_deg;

    render_current();
}

BinocularObservation Environment::observation() const { return extract_observation(cur_, prev_); }

GroundTruthErrors Environment::ground_truth_errors() const {
    GroundTruthErrors e;
    e.pan_px = deg_to_px(screen_.pan_vel_deg - eye_.pan_vel_deg);
    e.tilt_px = deg_to_px(screen_.tilt_vel_deg - eye_.tilt_vel_deg);
    e.vergence_px =
        deg_to_px(vergence_demand_deg(screen_.distance_m, cfg_.baseline_m) - eye_.vergence_deg);
    return e;
}

StereoFrames Environment::render_stereo() const {
    const Texture& tex = screen_texture(screen_.stimulus_id);
    StereoFrames f;
    f.left = render_view(tex, eye_, screen_, cfg_, EyeSide::Left, 0, CameraSpec::height, 0,
                         CameraSpec::width);
    f.right = render_view(tex, eye_, screen_, cfg_, EyeSide::Right, 0, CameraSpec::height, 0,
                          CameraSpec::width);
    return f;
}

StereoFrames Environment::render_stereo_prev() const {
    const Texture& tex = screen_texture(prev_screen_.stimulus_id);
    StereoFrames f;
    f.left = render_view(tex, prev_eye_, prev_screen_, cfg_, EyeSide::Left, 0, CameraSpec::height,
                         0, CameraSpec::width);
    f.right = render_view(tex, prev_eye_, prev_screen_, cfg_, EyeSide::Right, 0,
                          CameraSpec::height, 0, CameraSpec::width);
    return f;
}

double Environment::vergence_demand_px() const {
    return deg_to_px(vergence_demand_deg(screen_.distance_m, cfg_.baseline_m));
}

}  // namespace aec
