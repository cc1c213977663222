#pragma once

#include <stdlib.h>
#include <sys/stat.h>

#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>

#include "fcb/image.hpp"
#include "fcb/text.hpp"

namespace fcb::testing {

/// mkdtemp-backed scratch directory, removed on destruction.
class TempDir {
public:
    TempDir() {
        auto pattern = (std::filesystem::temp_directory_path() / "fcb-test-XXXXXX").string();
        if (!::mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
        path_ = pattern;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// Writes an executable shell script.
inline std::filesystem::path write_script(const std::filesystem::path& file, const std::string& body) {
    text::write_file(file, "#!/bin/sh\n" + body);
    ::chmod(file.c_str(), 0755);
    return file;
}

inline ImagePlane random_image(std::mt19937_64& rng, int w, int h) {
    ImagePlane img(w, h);
    for (auto& s : img.samples()) s = static_cast<std::uint8_t>(rng() & 0xFF);
    return img;
}

inline ImagePlane solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    ImagePlane img(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) img.set_pixel(x, y, r, g, b);
    }
    return img;
}

inline ImagePlane gray_image(int w, int h, const std::vector<std::uint8_t>& values) {
    ImagePlane img(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto v = values[static_cast<std::size_t>(y * w + x)];
            img.set_pixel(x, y, v, v, v);
        }
    }
    return img;
}

inline ImagePlane mirror_x(const ImagePlane& src) {
    ImagePlane out(src.width(), src.height());
    for (int y = 0; y < src.height(); ++y) {
        for (int x = 0; x < src.width(); ++x) {
            for (int c = 0; c < 3; ++c) out.at(src.width() - 1 - x, y, c) = src.at(x, y, c);
        }
    }
    return out;
}

inline ImagePlane mirror_y(const ImagePlane& src) {
    ImagePlane out(src.width(), src.height());
    for (int y = 0; y < src.height(); ++y) {
        for (int x = 0; x < src.width(); ++x) {
            for (int c = 0; c < 3; ++c) out.at(x, src.height() - 1 - y, c) = src.at(x, y, c);
        }
    }
    return out;
}

inline ImagePlane invert(const ImagePlane& src) {
    ImagePlane out = src;
    for (auto& s : out.samples()) s = static_cast<std::uint8_t>(255 - s);
    return out;
}

}  // namespace fcb::testing
