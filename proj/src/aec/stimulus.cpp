#include "aec/stimulus.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "aec/rng.hpp"

namespace aec {

namespace {

Texture box_halve(const Texture& t) {
    Texture out;
    out.height = std::max(1, t.height / 2);
    out.width = std::max(1, t.width / 2);
    out.rgb.resize(static_cast<std::size_t>(out.height) * out.width * 3);
    for (int r = 0; r < out.height; ++r) {
        for (int c = 0; c < out.width; ++c) {
            const int r1 = std::min(2 * r + 1, t.height - 1);
            const int c1 = std::min(2 * c + 1, t.width - 1);
            const float* p00 = t.px(2 * r, 2 * c);
            const float* p01 = t.px(2 * r, c1);
            const float* p10 = t.px(r1, 2 * c);
            const float* p11 = t.px(r1, c1);
            float* o = out.px(r, c);
            for (int k = 0; k < 3; ++k) o[k] = 0.25f * (p00[k] + p01[k] + p10[k] + p11[k]);
        }
    }
    return out;
}

std::vector<Texture> build_pyramid(Texture base) {
    std::vector<Texture> levels;
    levels.push_back(std::move(base));
    while (std::max(levels.back().height, levels.back().width) > 160)
        levels.push_back(box_halve(levels.back()));
    return levels;
}

}  // namespace

Texture decode_png(const std::string& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
        throw std::runtime_error("cannot read PNG " + path + ": " + image.message);
    image.format = PNG_FORMAT_RGB;
    std::vector<unsigned char> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
        png_image_free(&image);
        throw std::runtime_error("cannot decode PNG " + path + ": " + image.message);
    }
    Texture t;
    t.height = static_cast<int>(image.height);
    t.width = static_cast<int>(image.width);
    t.rgb.resize(buf.size());
    for (std::size_t i = 0; i < buf.size(); ++i)
        t.rgb[i] = static_cast<float>(buf[i]) / 255.0f;
    return t;
}

void encode_png(const std::string& path, const Texture& t) {
    std::vector<unsigned char> buf(t.rgb.size());
    for (std::size_t i = 0; i < buf.size(); ++i) {
        const float v = std::clamp(t.rgb[i], 0.0f, 1.0f);
        buf[i] = static_cast<unsigned char>(std::lround(v * 255.0f));
    }
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(t.width);
    image.height = static_cast<png_uint_32>(t.height);
    image.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&image, path.c_str(), 0, buf.data(), 0, nullptr))
        throw std::runtime_error("cannot write PNG " + path + ": " + image.message);
}

void StimulusSet::add(std::string name, Texture base) {
    names_.push_back(std::move(name));
    stimuli_.push_back(build_pyramid(std::move(base)));
}

StimulusSet StimulusSet::load_image_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw std::runtime_error("stimulus directory not found: " + dir);

    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::string ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (ext == ".png") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

    StimulusSet set;
    for (const auto& f : files) {
        try {
            Texture t = decode_png(f.string());
            if (t.height < 256 || t.width < 256) {
                std::fprintf(stderr, "warning: skipping %s: %dx%d is below the 256x256 minimum\n",
                             f.string().c_str(), t.width, t.height);
                continue;
            }
            set.add(f.filename().string(), std::move(t));
        } catch (const std::exception& ex) {
            std::fprintf(stderr, "warning: skipping %s: %s\n", f.string().c_str(), ex.what());
        }
    }
    if (set.size() == 0)
        throw std::runtime_error("no decodable PNG stimuli in directory: " + dir);
    return set;
}

StimulusSet StimulusSet::procedural(int count, std::uint64_t seed, int size) {
    if (count < 1) throw std::runtime_error("procedural stimulus count must be >= 1");
    if (size < 256) throw std::runtime_error("procedural stimulus size must be >= 256");
    StimulusSet set;
    for (int i = 0; i < count; ++i)
        set.add("procedural_" + std::to_string(i),
                dead_leaves_texture(seed + static_cast<std::uint64_t>(i), size));
    return set;
}

StimulusSet StimulusSet::from_spec(const std::string& spec) {
    if (spec.rfind("procedural:", 0) == 0) {
        const std::string rest = spec.substr(11);
        const std::size_t colon = rest.find(':');
        if (colon == std::string::npos)
            throw std::runtime_error("bad stimulus spec '" + spec +
                                     "', expected procedural:<count>:<seed>");
        const int count = std::stoi(rest.substr(0, colon));
        const std::uint64_t seed = std::stoull(rest.substr(colon + 1));
        return procedural(count, seed);
    }
    return load_image_dir(spec);
}

const Texture& StimulusSet::level_for_span(int id, double span_px) const {
    const auto& levels = stimuli_[static_cast<std::size_t>(id)];
    const double limit = span_px * 1.25;
    for (const Texture& t : levels)
        if (std::max(t.height, t.width) <= limit) return t;
    return levels.back();
}

Texture dead_leaves_texture(std::uint64_t seed, int size) {
    std::mt19937 rng = make_rng(seed, 0xd15c);
    Texture t;
    t.height = size;
    t.width = size;
    t.rgb.resize(static_cast<std::size_t>(size) * size * 3);

    float base[3];
    for (float& v : base) v = rng_uniform_f(rng, 0.0f, 1.0f);
    for (std::size_t i = 0; i < t.rgb.size(); i += 3)
        for (int k = 0; k < 3; ++k) t.rgb[i + static_cast<std::size_t>(k)] = base[k];

    const double r_min = 3.0, r_max = size / 3.0;
    const double inv_min2 = 1.0 / (r_min * r_min), inv_max2 = 1.0 / (r_max * r_max);
    const int discs = 4000 * (size / 256) * (size / 256);
    for (int d = 0; d < discs; ++d) {
        const double cx = rng_uniform(rng, 0.0, size);
        const double cy = rng_uniform(rng, 0.0, size);
        const double u = rng_uniform(rng, 0.0, 1.0);
        // Inverse CDF of p(r) ~ r^-3 on [r_min, r_max].
        const double r = 1.0 / std::sqrt(inv_min2 - u * (inv_min2 - inv_max2));
        float col[3];
        for (float& v : col) v = rng_uniform_f(rng, 0.0f, 1.0f);

        const int y0 = std::max(0, static_cast<int>(std::floor(cy - r)));
        const int y1 = std::min(size - 1, static_cast<int>(std::ceil(cy + r)));
        for (int y = y0; y <= y1; ++y) {
            const double dy = y + 0.5 - cy;
            const double span2 = r * r - dy * dy;
            if (span2 <= 0) continue;
            const double half = std::sqrt(span2);
            const int x0 = std::max(0, static_cast<int>(std::floor(cx - half)));
            const int x1 = std::min(size - 1, static_cast<int>(std::ceil(cx + half)));
            for (int x = x0; x <= x1; ++x) {
                const double dx = x + 0.5 - cx;
                if (dx * dx + dy * dy > r * r) continue;
                float* p = t.px(y, x);
                for (int k = 0; k < 3; ++k) p[k] = col[k];
            }
        }
    }
    return t;
}

}  // namespace aec
