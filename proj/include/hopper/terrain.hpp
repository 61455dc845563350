#pragma once

#include "hopper/model.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace hopper {

struct Crater {
    Vec2 center = Vec2::Zero();
    double radius = 1.0;
    double depth = 0.0;
    double rim_height = 0.0;
    bool operator==(const Crater& o) const
    {
        return center == o.center && radius == o.radius && depth == o.depth && rim_height == o.rim_height;
    }
};

struct TerrainSpec {
    int grid_size = 241;
    double extent = 12.0;  // square side, metres; grid spans [0, extent] on both axes
    std::vector<Crater> craters;
    double base_noise_amplitude = 0.02;
    double noise_cell = 0.5;  // lattice spacing of the value noise
    std::uint64_t rng_seed = 1;
    bool operator==(const TerrainSpec&) const = default;
};

TerrainSpec default_terrain_spec();
TerrainSpec flat_terrain_spec();

ValidationReport validate_terrain_spec(const TerrainSpec& spec);

/// Elevation of one crater at radial distance r: a cos^2 bowl of the given
/// depth inside the radius plus a cos^2 rim band straddling the lip.
double crater_profile(const Crater& c, double r);

/// Width of the rim band on each side of the lip, as a fraction of the radius.
constexpr double kRimBandFraction = 0.25;

class Heightfield {
public:
    Heightfield() = default;
    Heightfield(int size, double extent, std::vector<double> elevations);

    int size() const { return size_; }
    double extent() const { return extent_; }
    double spacing() const { return extent_ / (size_ - 1); }
    double min_elevation() const { return min_; }
    double max_elevation() const { return max_; }

    // Row-major: row iy (y = iy * spacing), column ix (x = ix * spacing).
    double at(int ix, int iy) const { return grid_[static_cast<std::size_t>(iy) * size_ + ix]; }
    const std::vector<double>& data() const { return grid_; }

private:
    int size_ = 0;
    double extent_ = 0.0;
    std::vector<double> grid_;
    double min_ = 0.0;
    double max_ = 0.0;
};

Heightfield generate_heightfield(const TerrainSpec& spec);

/// Writes a binary 16-bit PGM (P5, maxval 65535, big-endian samples). Image
/// row 0 is grid row 0. Elevations map linearly min -> 0, max -> 65535; a flat
/// field maps to 32768 everywhere.
void export_grayscale(const Heightfield& hf, const std::filesystem::path& path);

struct Pgm16 {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> pixels;
};

std::vector<std::uint8_t> encode_pgm16(const Heightfield& hf);
Pgm16 read_pgm16(const std::filesystem::path& path);

/// Piecewise-linear sagittal terrain slice h(x), sampled uniformly from x = 0.
/// Queries outside [0, length] clamp to the boundary elevation.
class TerrainProfile {
public:
    TerrainProfile() = default;
    TerrainProfile(double spacing, std::vector<double> samples);

    static TerrainProfile flat(double length, double height = 0.0);

    double spacing() const { return spacing_; }
    double length() const { return spacing_ * (samples_.size() - 1); }
    const std::vector<double>& samples() const { return samples_; }
    const std::vector<double>& slopes() const { return slopes_; }

    double height(double x) const;
    // Central-difference slope at the samples, linearly interpolated between them.
    double slope(double x) const;

private:
    double spacing_ = 1.0;
    std::vector<double> samples_;
    std::vector<double> slopes_;
};

TerrainProfile profile_slice(const Heightfield& hf, double y);

}  // namespace hopper
