#pragma once

#include <filesystem>

#include "lumen/frame.hpp"

namespace lumen {

/// Reads an 8-bit PNG (gray, RGB or RGBA; alpha is dropped) or a binary PPM
/// (P6, maxval 255). Channels are mapped v / 255.
Frame load_frame(const std::filesystem::path& path);

/// Writes `frame` as 8-bit RGB, channel = round-half-up(v * 255) clamped to
/// [0, 255]. The format follows the extension: ".ppm" writes P6, anything
/// else writes PNG.
void save_frame(const Frame& frame, const std::filesystem::path& path);

/// Loads every supported image in `dir`, ordered by filename.
FrameSequence load_sequence(const std::filesystem::path& dir);

/// Sorted list of supported image files in `dir` (".png", ".ppm").
std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir);

std::uint8_t quantize_channel(double v);

}  // namespace lumen
