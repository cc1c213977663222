#pragma once

#include <cstdint>
#include <filesystem>
#include <random>

#include "fcb/image.hpp"
#include "fcb/imgcore.hpp"

// Deterministic photo-like face renderings with known landmarks. Used by the
// tests and by `fcbench synth` to produce a desk-scale dataset.
namespace fcb::synth {

/// Portable draws on std::mt19937_64 (the std distributions are not
/// specified bit-for-bit across standard libraries).
double uniform01(std::mt19937_64& rng);
double uniform(std::mt19937_64& rng, double lo, double hi);
/// Unbiased integer in [0, n).
std::uint64_t below(std::mt19937_64& rng, std::uint64_t n);

struct Face {
    ImagePlane image;
    Landmarks landmarks;
};

/// Same subject seed gives the same identity (face shape, tones, feature
/// placement); the capture seed varies pose, expression, lighting and noise.
Face render_face(std::uint64_t subject_seed, std::uint64_t capture_seed, int width = 250,
                 int height = 250);

/// Writes `subjects` x `captures_per_subject` faces as PNG plus a manifest
/// with landmarks; returns the manifest path.
std::filesystem::path write_dataset(const std::filesystem::path& dir, int subjects,
                                    int captures_per_subject, std::uint64_t seed, int width = 250,
                                    int height = 250);

}  // namespace fcb::synth
