#pragma once

#include <optional>
#include <string>

#include "lumen/frame.hpp"

namespace lumen {

inline constexpr double kPsnrCap = 100.0;
inline constexpr double kColorDelta = 1e-4;

/// 10 log10(1 / MSE) over all channels; identical frames give kPsnrCap.
double psnr(const Frame& a, const Frame& b);

/// Mean SSIM of the luminance planes with an 11x11 Gaussian window
/// (sigma 1.5), C1 = 0.01^2, C2 = 0.03^2, over valid window positions.
double ssim(const Frame& a, const Frame& b);
double ssim(const Plane& a, const Plane& b);

/// Mean |a - b| on the 0-255 scale.
double mae(const Frame& a, const Frame& b);

/// Mean SSIM of consecutive frames.
double tssim(const FrameSequence& seq);

/// Mean |B_{t+1} - B_t| where B_t is the mean luminance of frame t.
double mabd(const FrameSequence& seq);

struct ConsistencyValue {
    double sum = 0.0;
    double per_pixel = 0.0;
};

/// sum_x | sum_rgb e_t1 - sum_rgb e_t_aligned |
ConsistencyValue exposure_consistency(const Frame& e_t1, const Frame& e_t_aligned);

/// sum_x sum_k | (e_t1^k + c) / (sum_i e_t1^i + c) - (e_t^k + c) / (sum_i e_t^i + c) |
ConsistencyValue color_consistency(const Frame& e_t1, const Frame& e_t_aligned,
                                   double c = kColorDelta);

/// |a - b| per pixel and channel.
Frame frame_difference_map(const Frame& a, const Frame& b);

/// Mean value of frame_difference_map over consecutive frames.
double mean_frame_difference(const FrameSequence& seq);

struct MetricReport {
    std::optional<double> psnr;
    std::optional<double> ssim;
    std::optional<double> mae;
    std::optional<double> tssim;
    std::optional<double> mabd;
    std::optional<ConsistencyValue> exposure_consistency;
    std::optional<ConsistencyValue> color_consistency;
};

MetricReport compare_frames(const Frame& reference, const Frame& test);

/// Temporal metrics; the consistency terms are averaged over consecutive
/// pairs after aligning frame t to frame t + 1 with optical flow.
MetricReport sequence_report(const FrameSequence& seq);

std::string to_json(const MetricReport& report, int indent = 2);

}  // namespace lumen
