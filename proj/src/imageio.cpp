#include "lumen/imageio.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "lumen/error.hpp"

namespace lumen {

namespace fs = std::filesystem;

namespace {

std::string lower_extension(const fs::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return ext;
}

std::string read_all(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed for " + path.string());
    return ss.str();
}

Frame frame_from_bytes(std::size_t height, std::size_t width, const std::uint8_t* rgb,
                       std::size_t stride_channels) {
    std::vector<double> data(height * width * 3);
    for (std::size_t i = 0; i < height * width; ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            data[i * 3 + c] = rgb[i * stride_channels + c] / 255.0;
        }
    }
    return Frame(height, width, std::move(data));
}

Frame decode_png(const std::string& bytes, const fs::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw FormatError(path.string() + ": " + image.message);
    }
    if (image.format & PNG_FORMAT_FLAG_LINEAR) {
        png_image_free(&image);
        throw FormatError(path.string() + ": only 8-bit PNG channels are supported");
    }
    if (image.width == 0 || image.height == 0) {
        png_image_free(&image);
        throw FormatError(path.string() + ": zero-dimension image");
    }
    image.format = PNG_FORMAT_RGBA;
    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw FormatError(path.string() + ": " + msg);
    }
    return frame_from_bytes(image.height, image.width, buffer.data(), 4);
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string ppm_token(const std::string& bytes, std::size_t& pos) {
    while (pos < bytes.size()) {
        if (bytes[pos] == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
            ++pos;
        } else {
            break;
        }
    }
    std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
}

std::size_t parse_dim(const std::string& token, const fs::path& path) {
    if (token.empty() || !std::all_of(token.begin(), token.end(), [](unsigned char ch) {
            return std::isdigit(ch);
        })) {
        throw FormatError(path.string() + ": malformed PPM header");
    }
    return std::stoul(token);
}

Frame decode_ppm(const std::string& bytes, const fs::path& path) {
    std::size_t pos = 0;
    if (ppm_token(bytes, pos) != "P6") throw FormatError(path.string() + ": not a P6 PPM");
    const std::size_t width = parse_dim(ppm_token(bytes, pos), path);
    const std::size_t height = parse_dim(ppm_token(bytes, pos), path);
    const std::size_t maxval = parse_dim(ppm_token(bytes, pos), path);
    if (maxval != 255) throw FormatError(path.string() + ": only 8-bit PPM (maxval 255) is supported");
    if (width == 0 || height == 0) throw FormatError(path.string() + ": zero-dimension image");
    ++pos;  // single whitespace byte before the raster
    const std::size_t need = width * height * 3;
    if (pos + need > bytes.size()) throw FormatError(path.string() + ": truncated PPM raster");
    return frame_from_bytes(height, width, reinterpret_cast<const std::uint8_t*>(bytes.data() + pos), 3);
}

bool is_supported_extension(const fs::path& path) {
    const std::string ext = lower_extension(path);
    return ext == ".png" || ext == ".ppm";
}

}  // namespace

std::uint8_t quantize_channel(double v) {
    const double scaled = std::floor(v * 255.0 + 0.5);
    return static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
}

Frame load_frame(const fs::path& path) {
    const std::string bytes = read_all(path);
    static constexpr std::array<unsigned char, 8> kPngMagic{0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    if (bytes.size() >= kPngMagic.size() &&
        std::equal(kPngMagic.begin(), kPngMagic.end(), reinterpret_cast<const unsigned char*>(bytes.data()))) {
        return decode_png(bytes, path);
    }
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return decode_ppm(bytes, path);
    throw FormatError(path.string() + ": unsupported image format (expected PNG or P6 PPM)");
}

void save_frame(const Frame& frame, const fs::path& path) {
    if (frame.empty()) throw ValidationError("cannot save an empty frame");
    std::vector<std::uint8_t> rgb(frame.data().size());
    std::transform(frame.data().begin(), frame.data().end(), rgb.begin(), quantize_channel);

    if (lower_extension(path) == ".ppm") {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path.string());
        out << "P6\n" << frame.width() << ' ' << frame.height() << "\n255\n";
        out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
        if (!out) throw IoError("write failed for " + path.string());
        return;
    }

    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(frame.width());
    image.height = static_cast<png_uint_32>(frame.height());
    image.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, rgb.data(), 0, nullptr)) {
        throw IoError("cannot write " + path.string() + ": " + image.message);
    }
}

std::vector<fs::path> list_frame_files(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && is_supported_extension(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
    return files;
}

FrameSequence load_sequence(const fs::path& dir) {
    const auto files = list_frame_files(dir);
    if (files.empty()) throw IoError("no PNG/PPM frames in " + dir.string());
    FrameSequence seq;
    seq.frames.reserve(files.size());
    for (const auto& file : files) seq.frames.push_back(load_frame(file));
    seq.validate();
    return seq;
}

}  // namespace lumen
