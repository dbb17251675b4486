#include "softgrip/image.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

namespace softgrip::image {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

} // namespace

void Image::validate() const {
    require(width > 0 && height > 0, "image: dimensions must be positive");
    require(channels == 1 || channels == 3, "image: channels must be 1 or 3");
    require(pixels.size() == pixel_count() * static_cast<std::size_t>(channels),
            "image: pixel buffer size mismatch");
}

std::string serialize_pnm(const Image& img) {
    img.validate();
    std::string out = img.channels == 3 ? "P6" : "P5";
    out += "\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
    return out;
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(const std::string& bytes, std::size_t& pos) {
    while (pos < bytes.size()) {
        const char c = bytes[pos];
        if (c == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++pos;
        } else {
            break;
        }
    }
    std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
}

} // namespace

Image parse_pnm(const std::string& bytes) {
    std::size_t pos = 0;
    const std::string magic = next_token(bytes, pos);
    if (magic != "P5" && magic != "P6") throw std::runtime_error("pnm: expected P5 or P6");

    Image img;
    img.channels = magic == "P6" ? 3 : 1;
    try {
        img.width = std::stoi(next_token(bytes, pos));
        img.height = std::stoi(next_token(bytes, pos));
        const int maxval = std::stoi(next_token(bytes, pos));
        if (maxval != 255) throw std::runtime_error("pnm: only maxval 255 supported");
    } catch (const std::logic_error&) {
        throw std::runtime_error("pnm: malformed header");
    }
    if (pos >= bytes.size()) throw std::runtime_error("pnm: truncated header");
    ++pos; // single whitespace after maxval

    if (img.width <= 0 || img.height <= 0) throw std::runtime_error("pnm: bad dimensions");
    const std::size_t need =
        static_cast<std::size_t>(img.width) * img.height * static_cast<std::size_t>(img.channels);
    if (bytes.size() - pos < need) throw std::runtime_error("pnm: truncated pixel data");
    img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                      bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
    return img;
}

Image load_pnm(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("pnm: cannot open " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_pnm(buf.str());
}

void save_pnm(const Image& img, const std::filesystem::path& file) {
    const std::string bytes = serialize_pnm(img);
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("pnm: cannot write " + file.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("pnm: write failed for " + file.string());
}

std::string content_hash(const Image& img) {
    const std::string bytes = serialize_pnm(img);
    std::uint64_t hash = 1469598103934665603ULL; // FNV offset basis
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ULL; // FNV prime
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(hash));
    return out;
}

int luma_of(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    return (299 * r + 587 * g + 114 * b) / 1000;
}

namespace {

std::array<std::uint64_t, 256> luma_histogram(const Image& img) {
    std::array<std::uint64_t, 256> hist{};
    if (img.channels == 1) {
        for (std::uint8_t v : img.pixels) ++hist[v];
    } else {
        for (std::size_t i = 0; i < img.pixels.size(); i += 3)
            ++hist[static_cast<std::size_t>(
                luma_of(img.pixels[i], img.pixels[i + 1], img.pixels[i + 2]))];
    }
    return hist;
}

} // namespace

LumaStats luminance_stats(const Image& img) {
    img.validate();
    const auto hist = luma_histogram(img);
    const std::uint64_t total = img.pixel_count();

    LumaStats stats;
    std::uint64_t weighted = 0;
    for (int v = 0; v < 256; ++v) weighted += hist[static_cast<std::size_t>(v)] * v;
    stats.mean = static_cast<double>(weighted) / static_cast<double>(total);

    // Nearest-rank percentile: smallest value whose cumulative count reaches
    // ceil(q * total).
    auto nearest_rank = [&](double q) {
        const std::uint64_t rank =
            static_cast<std::uint64_t>(std::ceil(q * static_cast<double>(total)));
        std::uint64_t cum = 0;
        for (int v = 0; v < 256; ++v) {
            cum += hist[static_cast<std::size_t>(v)];
            if (cum >= rank) return v;
        }
        return 255;
    };
    stats.p5 = nearest_rank(0.05);
    stats.p95 = nearest_rank(0.95);
    return stats;
}

std::string to_string(EnhanceMode mode) {
    switch (mode) {
        case EnhanceMode::none: return "none";
        case EnhanceMode::brighten: return "brighten";
        case EnhanceMode::darken: return "darken";
    }
    return "unknown";
}

EnhanceMode should_enhance(const LumaStats& stats, const GateThresholds& gates) {
    require(gates.low < gates.high, "gate thresholds: low must be < high");
    if (stats.mean < gates.low) return EnhanceMode::brighten;
    if (stats.mean > gates.high) return EnhanceMode::darken;
    return EnhanceMode::none;
}

TransferLut gamma_lut(double gamma) {
    require(std::isfinite(gamma) && gamma > 0.0, "enhance: gamma must be > 0");
    TransferLut lut{};
    for (int v = 0; v < 256; ++v) {
        const double mapped = 255.0 * std::pow(v / 255.0, gamma);
        lut[static_cast<std::size_t>(v)] =
            static_cast<std::uint8_t>(std::floor(mapped + 0.5)); // round half up
    }
    return lut;
}

TransferLut equalization_lut(const std::array<std::uint64_t, 256>& histogram) {
    std::uint64_t total = 0;
    for (std::uint64_t h : histogram) total += h;

    TransferLut lut{};
    std::uint64_t cdf_min = 0;
    for (std::uint64_t h : histogram) {
        if (h > 0) {
            cdf_min = h;
            break;
        }
    }
    if (total == 0 || cdf_min == total) {
        // Empty or single-bin histogram: identity by convention.
        for (int v = 0; v < 256; ++v) lut[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(v);
        return lut;
    }
    std::uint64_t cum = 0;
    for (int v = 0; v < 256; ++v) {
        cum += histogram[static_cast<std::size_t>(v)];
        const double scaled = cum <= cdf_min
                                  ? 0.0
                                  : 255.0 * static_cast<double>(cum - cdf_min) /
                                        static_cast<double>(total - cdf_min);
        lut[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(std::floor(scaled + 0.5));
    }
    return lut;
}

Image enhance(const Image& img, EnhanceMode mode, const EnhanceParams& params) {
    img.validate();
    if (mode == EnhanceMode::none) return img;

    Image out = img;
    const TransferLut gamma = gamma_lut(params.gamma);
    for (std::uint8_t& v : out.pixels) v = gamma[v];

    if (params.equalize) {
        const TransferLut eq = equalization_lut(luma_histogram(out));
        for (std::uint8_t& v : out.pixels) v = eq[v];
    }
    return out;
}

ExternalResult run_external_enhancer(const std::string& command, const Image& img) {
    ExternalResult result;
    const auto dir = std::filesystem::temp_directory_path();
    const auto tag = std::to_string(static_cast<unsigned long>(::getpid()));
    const auto in_path = dir / ("softgrip_enh_in_" + tag + ".pnm");
    const auto out_path = dir / ("softgrip_enh_out_" + tag + ".pnm");

    try {
        save_pnm(img, in_path);
        const std::string shell =
            command + " < '" + in_path.string() + "' > '" + out_path.string() + "'";
        const int status = std::system(shell.c_str());
        if (status != 0) {
            result.error = "external enhancer exited with status " + std::to_string(status);
        } else {
            result.image = load_pnm(out_path);
            result.ok = true;
        }
    } catch (const std::exception& e) {
        result.ok = false;
        result.error = e.what();
    }
    std::error_code ec;
    std::filesystem::remove(in_path, ec);
    std::filesystem::remove(out_path, ec);
    return result;
}

} // namespace softgrip::image
