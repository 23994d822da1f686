#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace aec {

// RGB texture, row-major [height, width, 3], values in [0,1].
struct Texture {
    int height = 0;
    int width = 0;
    std::vector<float> rgb;

    float* px(int r, int c) { return rgb.data() + (static_cast<std::size_t>(r) * width + c) * 3; }
    const float* px(int r, int c) const {
        return rgb.data() + (static_cast<std::size_t>(r) * width + c) * 3;
    }
};

// Immutable after construction; safe for concurrent reads. Each stimulus
// carries a box-filtered pyramid so the renderer can pick a level close to
// the on-screen pixel density and avoid minification aliasing.
class StimulusSet {
public:
    // Loads every decodable PNG under `dir` in alphabetical filename order.
    // Corrupt or undersized (< 256x256) files are skipped with a warning on
    // stderr; an empty result throws std::runtime_error.
    static StimulusSet load_image_dir(const std::string& dir);

    // Deterministic dead-leaves textures (`count` of them, seeds derived
    // from `seed`).
    static StimulusSet procedural(int count, std::uint64_t seed, int size = 256);

    // "procedural:<count>:<seed>" or a directory path.
    static StimulusSet from_spec(const std::string& spec);

    int size() const { return static_cast<int>(stimuli_.size()); }
    const std::string& name(int id) const { return names_[static_cast<std::size_t>(id)]; }
    const Texture& base(int id) const { return stimuli_[static_cast<std::size_t>(id)].front(); }

    // Finest pyramid level whose larger extent does not exceed
    // span_px * 1.25 (slight minification is left to bilinear sampling).
    const Texture& level_for_span(int id, double span_px) const;

private:
    void add(std::string name, Texture base);

    std::vector<std::vector<Texture>> stimuli_;  // [id][level]
    std::vector<std::string> names_;
};

// Random colored discs with a power-law radius distribution; broadband
// statistics close to natural images. Deterministic in `seed`.
Texture dead_leaves_texture(std::uint64_t seed, int size);

Texture decode_png(const std::string& path);            // throws on failure
void encode_png(const std::string& path, const Texture& t);

}  // namespace aec
