#include <gtest/gtest.h>

#include <png.h>

#include <cmath>
#include <fstream>
#include <random>

#include "lumen/error.hpp"
#include "lumen/imageio.hpp"
#include "lumen/resample.hpp"
#include "support/synthetic.hpp"

using namespace lumen;
using lumen::test::TempDir;

namespace {

// Encodes 8-bit RGB through libpng directly, bypassing save_frame.
void write_png_rgb(const std::filesystem::path& path, std::size_t h, std::size_t w,
                   const std::vector<std::uint8_t>& rgb) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(w);
    image.height = static_cast<png_uint_32>(h);
    image.format = PNG_FORMAT_RGB;
    ASSERT_TRUE(png_image_write_to_file(&image, path.c_str(), 0, rgb.data(), 0, nullptr));
}

std::vector<std::uint8_t> read_png_rgb(const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    EXPECT_TRUE(png_image_begin_read_from_file(&image, path.c_str()));
    image.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
    EXPECT_TRUE(png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr));
    return buf;
}

void write_ppm(const std::filesystem::path& path, std::size_t h, std::size_t w,
               const std::vector<std::uint8_t>& rgb, const std::string& header_extra = "") {
    std::ofstream out(path, std::ios::binary);
    out << "P6\n" << header_extra << w << " " << h << "\n255\n";
    out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
}

}  // namespace

TEST(LoadFrame, PngPixelMapsLinearly) {
    TempDir dir("io");
    write_png_rgb(dir / "p.png", 1, 1, {255, 0, 128});
    const Frame f = load_frame(dir / "p.png");
    ASSERT_EQ(f.height(), 1u);
    ASSERT_EQ(f.width(), 1u);
    EXPECT_DOUBLE_EQ(f.at(0, 0, 0), 1.0);
    EXPECT_DOUBLE_EQ(f.at(0, 0, 1), 0.0);
    EXPECT_DOUBLE_EQ(f.at(0, 0, 2), 128.0 / 255.0);
}

TEST(LoadFrame, BlackPpm) {
    TempDir dir("io");
    write_ppm(dir / "b.ppm", 2, 2, std::vector<std::uint8_t>(12, 0));
    const Frame f = load_frame(dir / "b.ppm");
    ASSERT_EQ(f.pixel_count(), 4u);
    for (double v : f.data()) EXPECT_EQ(v, 0.0);
}

TEST(LoadFrame, PpmHeaderComments) {
    TempDir dir("io");
    write_ppm(dir / "c.ppm", 1, 2, {10, 20, 30, 40, 50, 60}, "# made by hand\n");
    const Frame f = load_frame(dir / "c.ppm");
    EXPECT_EQ(f.width(), 2u);
    EXPECT_DOUBLE_EQ(f.at(0, 1, 2), 60.0 / 255.0);
}

TEST(LoadFrame, RgbaDropsAlpha) {
    TempDir dir("io");
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = 1;
    image.height = 1;
    image.format = PNG_FORMAT_RGBA;
    const std::uint8_t px[4] = {51, 102, 204, 7};
    const auto path = dir / "a.png";
    ASSERT_TRUE(png_image_write_to_file(&image, path.c_str(), 0, px, 0, nullptr));
    const Frame f = load_frame(path);
    EXPECT_DOUBLE_EQ(f.at(0, 0, 0), 0.2);
    EXPECT_DOUBLE_EQ(f.at(0, 0, 1), 0.4);
    EXPECT_DOUBLE_EQ(f.at(0, 0, 2), 0.8);
}

TEST(LoadFrame, Errors) {
    TempDir dir("io");
    EXPECT_THROW(load_frame(dir / "missing.png"), IoError);
    lumen::test::write_text(dir / "junk.png", "not an image at all");
    EXPECT_THROW(load_frame(dir / "junk.png"), FormatError);
    lumen::test::write_text(dir / "zero.ppm", "P6\n0 4\n255\n");
    EXPECT_THROW(load_frame(dir / "zero.ppm"), Error);
    lumen::test::write_text(dir / "deep.ppm", "P6\n1 1\n65535\n\x01\x02\x03\x04\x05\x06");
    EXPECT_THROW(load_frame(dir / "deep.ppm"), FormatError);
}

TEST(SaveFrame, QuantizesRoundHalfUp) {
    EXPECT_EQ(quantize_channel(1.0), 255);
    EXPECT_EQ(quantize_channel(0.5), 128);
    EXPECT_EQ(quantize_channel(0.0), 0);
    EXPECT_EQ(quantize_channel(1.0000001), 255);
    EXPECT_EQ(quantize_channel(-1e-9), 0);
    EXPECT_EQ(quantize_channel(127.4999 / 255.0), 127);
}

TEST(SaveFrame, WhiteAndGrayPixels) {
    TempDir dir("io");
    save_frame(Frame(1, 1, 1.0), dir / "w.png");
    EXPECT_EQ(read_png_rgb(dir / "w.png"), (std::vector<std::uint8_t>{255, 255, 255}));
    save_frame(Frame(1, 1, 0.5), dir / "g.png");
    EXPECT_EQ(read_png_rgb(dir / "g.png"), (std::vector<std::uint8_t>{128, 128, 128}));
}

TEST(SaveFrame, DriftAboveOneClamps) {
    TempDir dir("io");
    Frame f(1, 1, 1.0);
    f.mutable_data()[0] = 1.0000001;
    save_frame(f, dir / "d.ppm");
    const std::string bytes = lumen::test::read_text(dir / "d.ppm");
    EXPECT_EQ(static_cast<unsigned char>(bytes[bytes.size() - 3]), 255);
}

TEST(SaveFrame, UnwritablePath) {
    EXPECT_THROW(save_frame(Frame(1, 1), "/nonexistent_dir_xyz/f.png"), IoError);
}

TEST(SaveFrame, RoundTripWithinQuantization) {
    TempDir dir("io");
    std::mt19937_64 rng(7);
    for (const char* name : {"r.png", "r.ppm"}) {
        const Frame f = lumen::test::random_frame(4, 4, rng);
        save_frame(f, dir / name);
        const Frame g = load_frame(dir / name);
        ASSERT_TRUE(f.same_shape(g));
        for (std::size_t i = 0; i < f.data().size(); ++i)
            EXPECT_LE(std::abs(f.data()[i] - g.data()[i]), 1.0 / 255.0 + 1e-12);
    }
}

TEST(LoadSequence, OrderedByFilename) {
    TempDir dir("seq");
    save_frame(Frame(2, 3, 0.2), dir / "f002.png");
    save_frame(Frame(2, 3, 0.8), dir / "f001.png");
    lumen::test::write_text(dir / "notes.txt", "ignored");
    const FrameSequence seq = load_sequence(dir.path());
    ASSERT_EQ(seq.size(), 2u);
    EXPECT_NEAR(seq[0].at(0, 0, 0), 0.8, 1.0 / 255.0);
    EXPECT_NEAR(seq[1].at(0, 0, 0), 0.2, 1.0 / 255.0);
}

TEST(LoadSequence, MixedDimensionsRejected) {
    TempDir dir("seq");
    save_frame(Frame(270, 480, 0.1), dir / "a.png");
    save_frame(Frame(135, 240, 0.1), dir / "b.png");
    EXPECT_THROW(load_sequence(dir.path()), DimensionError);
}

TEST(LoadSequence, EmptyDirectoryRejected) {
    TempDir dir("seq");
    EXPECT_THROW(load_sequence(dir.path()), IoError);
}

TEST(Frame, RejectsOutOfRangeValues) {
    EXPECT_THROW(Frame(1, 1, 1.5), ValidationError);
    EXPECT_THROW(Frame(1, 1, std::vector<double>{0.1, 0.2}), ValidationError);
    EXPECT_THROW(Frame(1, 1, std::vector<double>{0.1, -0.2, 0.3}), ValidationError);
}

TEST(Resample, ConstantHalved) {
    const Frame f(4, 4, 0.37);
    const Frame g = downsample(f, 2);
    ASSERT_EQ(g.height(), 2u);
    ASSERT_EQ(g.width(), 2u);
    for (double v : g.data()) EXPECT_DOUBLE_EQ(v, 0.37);
}

TEST(Resample, FactorOneIsBitIdentical) {
    std::mt19937_64 rng(3);
    const Frame f = lumen::test::random_frame(5, 7, rng);
    EXPECT_EQ(downsample(f, 1), f);
    EXPECT_EQ(resample(f, 5, 7), f);
}

TEST(Resample, FloorDims) {
    const Frame f(270, 480, 0.5);
    const Frame third = downsample(f, 3);
    EXPECT_EQ(third.height(), 90u);
    EXPECT_EQ(third.width(), 160u);
    const Frame odd = downsample(Frame(5, 7, 0.5), 2);
    EXPECT_EQ(odd.height(), 2u);
    EXPECT_EQ(odd.width(), 3u);
}

TEST(Resample, UpsampleMonotoneRows) {
    Frame f(2, 2);
    for (std::size_t y = 0; y < 2; ++y)
        for (std::size_t c = 0; c < 3; ++c) f.at(y, 1, c) = 1.0;
    const Frame g = resample(f, 4, 4);
    // Centres map to source x = -0.25, 0.25, 0.75, 1.25; edge clamping gives 0, .25, .75, 1.
    const double expected[4] = {0.0, 0.25, 0.75, 1.0};
    for (std::size_t y = 0; y < 4; ++y) {
        for (std::size_t x = 0; x < 4; ++x) EXPECT_DOUBLE_EQ(g.at(y, x, 0), expected[x]);
        for (std::size_t x = 1; x < 4; ++x) EXPECT_LE(g.at(y, x - 1, 1), g.at(y, x, 1));
    }
}

TEST(Resample, DegenerateOutput) {
    EXPECT_THROW(downsample(Frame(2, 2, 0.5), 3), ValidationError);
    EXPECT_THROW(resample(Frame(2, 2, 0.5), 0, 3), ValidationError);
}

TEST(Resample, ConstantPreservedAnySize) {
    const Frame f(9, 13, 0.61);
    for (auto [h, w] : {std::pair{3, 4}, {18, 26}, {1, 1}, {7, 29}}) {
        const Frame g = resample(f, h, w);
        for (double v : g.data()) EXPECT_NEAR(v, 0.61, 1e-15);
    }
}
