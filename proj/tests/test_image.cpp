#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "softgrip/image.hpp"

using namespace softgrip::image;

namespace {

Image constant_image(int w, int h, std::uint8_t value, int channels = 1) {
    Image img;
    img.width = w;
    img.height = h;
    img.channels = channels;
    img.pixels.assign(static_cast<std::size_t>(w) * h * channels, value);
    return img;
}

// Deterministic pseudo-random test image from a small LCG.
Image noise_image(int w, int h, int channels, std::uint32_t seed, std::uint8_t max_value) {
    Image img;
    img.width = w;
    img.height = h;
    img.channels = channels;
    img.pixels.resize(static_cast<std::size_t>(w) * h * channels);
    std::uint32_t state = seed;
    for (auto& px : img.pixels) {
        state = state * 1664525u + 1013904223u;
        px = static_cast<std::uint8_t>((state >> 24) % (max_value + 1u));
    }
    return img;
}

} // namespace

TEST_CASE("luminance stats on flat and split images") {
    const LumaStats flat = luminance_stats(constant_image(8, 8, 128));
    CHECK(flat.mean == 128.0);
    CHECK(flat.p5 == 128);
    CHECK(flat.p95 == 128);

    Image split = constant_image(2, 100, 0);
    std::fill(split.pixels.begin() + 100, split.pixels.end(), 255);
    const LumaStats stats = luminance_stats(split);
    CHECK(stats.mean == doctest::Approx(127.5));
    CHECK(stats.p5 == 0);
    CHECK(stats.p95 == 255);
}

TEST_CASE("luminance stats match a brute-force pixel scan") {
    const Image img = noise_image(37, 23, 3, 99, 255);
    const LumaStats stats = luminance_stats(img);

    // Independent oracle: explicit per-pixel loop plus sorted nearest-rank.
    std::vector<int> lumas;
    double sum = 0.0;
    for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
        const int luma =
            (299 * img.pixels[i] + 587 * img.pixels[i + 1] + 114 * img.pixels[i + 2]) / 1000;
        lumas.push_back(luma);
        sum += luma;
    }
    std::sort(lumas.begin(), lumas.end());
    auto rank = [&](double q) {
        const auto r = static_cast<std::size_t>(std::ceil(q * static_cast<double>(lumas.size())));
        return lumas[r - 1];
    };
    CHECK(stats.mean == doctest::Approx(sum / static_cast<double>(lumas.size())).epsilon(1e-12));
    CHECK(stats.p5 == rank(0.05));
    CHECK(stats.p95 == rank(0.95));
}

TEST_CASE("gating thresholds") {
    LumaStats stats;
    stats.mean = 128.0;
    CHECK(should_enhance(stats) == EnhanceMode::none);
    stats.mean = 30.0;
    CHECK(should_enhance(stats) == EnhanceMode::brighten);
    stats.mean = 230.0;
    CHECK(should_enhance(stats) == EnhanceMode::darken);
    stats.mean = 60.0;
    CHECK(should_enhance(stats) == EnhanceMode::none); // gates are strict inequalities
    CHECK(should_enhance(stats, {100.0, 150.0}) == EnhanceMode::brighten);
    CHECK_THROWS_AS(should_enhance(stats, {200.0, 100.0}), std::invalid_argument);
}

TEST_CASE("gamma lookup table values") {
    const TransferLut lut = gamma_lut(0.5);
    CHECK(lut[16] == 64); // 255*(16/255)^0.5 = 63.9, rounds half up to 64
    CHECK(lut[0] == 0);
    CHECK(lut[255] == 255);
    const TransferLut identity = gamma_lut(1.0);
    for (int v = 0; v < 256; ++v) CHECK(identity[static_cast<std::size_t>(v)] == v);
    CHECK_THROWS_AS(gamma_lut(0.0), std::invalid_argument);
}

TEST_CASE("transfer functions are monotone over the full range") {
    for (double gamma : {0.3, 0.5, 0.8, 1.0, 1.5, 2.0, 3.0}) {
        const TransferLut lut = gamma_lut(gamma);
        for (int v = 1; v < 256; ++v)
            CHECK(lut[static_cast<std::size_t>(v)] >= lut[static_cast<std::size_t>(v - 1)]);
    }

    // Composite built-in transfer observed through a gradient image.
    Image gradient;
    gradient.width = 256;
    gradient.height = 1;
    gradient.channels = 1;
    for (int v = 0; v < 256; ++v) gradient.pixels.push_back(static_cast<std::uint8_t>(v));
    for (EnhanceMode mode : {EnhanceMode::brighten, EnhanceMode::darken}) {
        const Image out = enhance(gradient, mode, {mode == EnhanceMode::brighten ? 0.5 : 2.0, true});
        for (int v = 1; v < 256; ++v)
            CHECK(out.pixels[static_cast<std::size_t>(v)] >=
                  out.pixels[static_cast<std::size_t>(v - 1)]);
    }
}

TEST_CASE("identity and fixed-point behavior of enhance") {
    const Image img = noise_image(16, 16, 1, 5, 200);
    const Image identity = enhance(img, EnhanceMode::brighten, {1.0, false});
    CHECK(identity.pixels == img.pixels);

    const Image flat = constant_image(9, 9, 77, 3);
    const Image enhanced = enhance(flat, EnhanceMode::brighten, {0.5, true});
    // Gamma moves the constant, equalization of a single bin leaves it fixed.
    const Image gamma_only = enhance(flat, EnhanceMode::brighten, {0.5, false});
    CHECK(enhanced.pixels == gamma_only.pixels);

    const Image untouched = enhance(img, EnhanceMode::none, {0.5, true});
    CHECK(untouched.pixels == img.pixels);
}

TEST_CASE("brighten raises the mean of underexposed images") {
    for (std::uint32_t seed : {1u, 2u, 3u, 4u}) {
        const Image dark = noise_image(32, 32, 3, seed, 90); // mean well under 60
        const LumaStats before = luminance_stats(dark);
        REQUIRE(before.mean < 60.0);
        const Image out = enhance(dark, EnhanceMode::brighten, {0.5, true});
        CHECK(luminance_stats(out).mean > before.mean);
    }
}

TEST_CASE("pnm round trip and parse errors") {
    const Image rgb = noise_image(13, 7, 3, 42, 255);
    const Image gray = noise_image(5, 9, 1, 43, 255);
    CHECK(parse_pnm(serialize_pnm(rgb)) == rgb);
    CHECK(parse_pnm(serialize_pnm(gray)) == gray);

    const auto path = std::filesystem::temp_directory_path() / "softgrip_test.ppm";
    save_pnm(rgb, path);
    CHECK(load_pnm(path) == rgb);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(parse_pnm("P3\n1 1\n255\n"), std::runtime_error);
    CHECK_THROWS_AS(parse_pnm("P6\n4 4\n255\nxx"), std::runtime_error);
    CHECK_THROWS_AS(parse_pnm("P6\n-1 4\n255\n"), std::runtime_error);

    // Header comments are tolerated.
    const std::string with_comment = "P5\n# camera frame\n2 1\n255\nab";
    const Image parsed = parse_pnm(with_comment);
    CHECK(parsed.width == 2);
    CHECK(parsed.pixels[0] == 'a');
}

TEST_CASE("content hash is stable and content-sensitive") {
    const Image img = noise_image(8, 8, 3, 7, 255);
    const std::string h1 = content_hash(img);
    CHECK(h1 == content_hash(img));
    CHECK(h1.size() == 16);
    Image tweaked = img;
    tweaked.pixels[0] ^= 1;
    CHECK(content_hash(tweaked) != h1);
}

TEST_CASE("external enhancer hook honors the stdin/stdout contract") {
    const Image img = noise_image(6, 6, 3, 11, 255);
    const ExternalResult identity = run_external_enhancer("cat", img);
    REQUIRE(identity.ok);
    CHECK(identity.image == img);

    const ExternalResult failed = run_external_enhancer("false", img);
    CHECK_FALSE(failed.ok);
    CHECK_FALSE(failed.error.empty());
}
