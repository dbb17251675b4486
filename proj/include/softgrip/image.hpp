#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace softgrip::image {

// 8-bit grayscale or RGB raster. Fixtures travel as binary PPM (P6) / PGM
// (P5), which keeps everything bit-exact and dependency-free.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1; // 1 or 3
    std::vector<std::uint8_t> pixels; // row-major, interleaved

    void validate() const;
    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

    bool operator==(const Image&) const = default;
};

Image load_pnm(const std::filesystem::path& file);
void save_pnm(const Image& img, const std::filesystem::path& file);
std::string serialize_pnm(const Image& img);
Image parse_pnm(const std::string& bytes);

// 64-bit FNV-1a over the serialized image, as a 16-digit hex string. Keys the
// mock vision fixtures.
std::string content_hash(const Image& img);

struct LumaStats {
    double mean = 0.0;
    int p5 = 0;  // nearest-rank percentiles of integer luma
    int p95 = 0;
};

// Integer luma (299 R + 587 G + 114 B) / 1000; identity for grayscale.
int luma_of(std::uint8_t r, std::uint8_t g, std::uint8_t b);
LumaStats luminance_stats(const Image& img);

enum class EnhanceMode { none, brighten, darken };

std::string to_string(EnhanceMode mode);

struct GateThresholds {
    double low = 60.0;   // brighten below this mean luma
    double high = 200.0; // darken above this mean luma
};

EnhanceMode should_enhance(const LumaStats& stats, const GateThresholds& gates = {});

struct EnhanceParams {
    double gamma = 1.0;    // v -> 255 * (v/255)^gamma, round half up
    bool equalize = true;  // global histogram equalization after gamma
};

using TransferLut = std::array<std::uint8_t, 256>;

// Monotone per-value lookup tables. Equalization of a single-bin histogram is
// the identity by convention.
TransferLut gamma_lut(double gamma);
TransferLut equalization_lut(const std::array<std::uint64_t, 256>& histogram);

// Deterministic built-in enhancer: gamma then global equalization computed on
// the luma histogram and applied per channel. The composed transfer function
// is monotone non-decreasing.
Image enhance(const Image& img, EnhanceMode mode, const EnhanceParams& params);

// Optional external enhancer: a command that reads a PNM image on stdin and
// writes one on stdout. Nonzero exit or bad output reports failure so the
// caller can fall back to the built-in.
struct ExternalResult {
    bool ok = false;
    Image image;
    std::string error;
};
ExternalResult run_external_enhancer(const std::string& command, const Image& img);

} // namespace softgrip::image
