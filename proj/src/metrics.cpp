#include "lumen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "json.hpp"
#include "lumen/error.hpp"
#include "lumen/flow.hpp"

namespace lumen {

double psnr(const Frame& a, const Frame& b) {
    require_same_shape(a, b, "psnr");
    const auto x = a.data();
    const auto y = b.data();
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        sum += d * d;
    }
    if (x.empty() || sum == 0.0) return kPsnrCap;
    const double mse = sum / static_cast<double>(x.size());
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::vector<double> gaussian_window() {
    std::vector<double> k(kSsimWindow);
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - kSsimWindow / 2;
        k[static_cast<std::size_t>(i)] = std::exp(-(d * d) / (2.0 * kSsimSigma * kSsimSigma));
        sum += k[static_cast<std::size_t>(i)];
    }
    for (double& v : k) v /= sum;
    return k;
}

// Separable Gaussian filter restricted to windows that fit in the image.
std::vector<double> filter_valid(const std::vector<double>& src, std::size_t h, std::size_t w,
                                 const std::vector<double>& k) {
    const std::size_t n = k.size();
    const std::size_t oh = h - n + 1;
    const std::size_t ow = w - n + 1;
    std::vector<double> tmp(h * ow);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += k[j] * src[y * w + x + j];
            tmp[y * ow + x] = s;
        }
    }
    std::vector<double> out(oh * ow);
    for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += k[j] * tmp[(y + j) * ow + x];
            out[y * ow + x] = s;
        }
    }
    return out;
}

}  // namespace

double ssim(const Plane& a, const Plane& b) {
    if (a.height != b.height || a.width != b.width) throw DimensionError("ssim: plane dimensions differ");
    if (a.height < kSsimWindow || a.width < kSsimWindow) {
        throw ValidationError("ssim needs frames of at least 11x11, got " + std::to_string(a.height) + "x" +
                              std::to_string(a.width));
    }
    const auto k = gaussian_window();
    const std::size_t n = a.values.size();
    std::vector<double> aa(n), bb(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
        aa[i] = a.values[i] * a.values[i];
        bb[i] = b.values[i] * b.values[i];
        ab[i] = a.values[i] * b.values[i];
    }
    const auto mu_a = filter_valid(a.values, a.height, a.width, k);
    const auto mu_b = filter_valid(b.values, a.height, a.width, k);
    const auto e_aa = filter_valid(aa, a.height, a.width, k);
    const auto e_bb = filter_valid(bb, a.height, a.width, k);
    const auto e_ab = filter_valid(ab, a.height, a.width, k);
    double total = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a[i];
        const double mb = mu_b[i];
        const double va = e_aa[i] - ma * ma;
        const double vb = e_bb[i] - mb * mb;
        const double cov = e_ab[i] - ma * mb;
        total += ((2.0 * ma * mb + kC1) * (2.0 * cov + kC2)) / ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
    }
    return total / static_cast<double>(mu_a.size());
}

double ssim(const Frame& a, const Frame& b) {
    require_same_shape(a, b, "ssim");
    return ssim(luminance(a), luminance(b));
}

double mae(const Frame& a, const Frame& b) {
    require_same_shape(a, b, "mae");
    const auto x = a.data();
    const auto y = b.data();
    if (x.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += std::abs(x[i] - y[i]);
    return sum / static_cast<double>(x.size()) * 255.0;
}

namespace {
void require_pairs(const FrameSequence& seq, const char* what) {
    if (seq.size() < 2) throw ValidationError(std::string(what) + " needs at least 2 frames");
    seq.validate();
}
}  // namespace

double tssim(const FrameSequence& seq) {
    require_pairs(seq, "tssim");
    double sum = 0.0;
    for (std::size_t t = 0; t + 1 < seq.size(); ++t) sum += ssim(seq[t], seq[t + 1]);
    return sum / static_cast<double>(seq.size() - 1);
}

double mabd(const FrameSequence& seq) {
    require_pairs(seq, "mabd");
    double sum = 0.0;
    double prev = mean_luminance(seq[0]);
    for (std::size_t t = 1; t < seq.size(); ++t) {
        const double cur = mean_luminance(seq[t]);
        sum += std::abs(cur - prev);
        prev = cur;
    }
    return sum / static_cast<double>(seq.size() - 1);
}

ConsistencyValue exposure_consistency(const Frame& e_t1, const Frame& e_t_aligned) {
    require_same_shape(e_t1, e_t_aligned, "exposure_consistency");
    const auto x = e_t1.data();
    const auto y = e_t_aligned.data();
    ConsistencyValue v;
    for (std::size_t p = 0; p < e_t1.pixel_count(); ++p) {
        const double sx = x[p * 3] + x[p * 3 + 1] + x[p * 3 + 2];
        const double sy = y[p * 3] + y[p * 3 + 1] + y[p * 3 + 2];
        v.sum += std::abs(sx - sy);
    }
    v.per_pixel = e_t1.pixel_count() ? v.sum / static_cast<double>(e_t1.pixel_count()) : 0.0;
    return v;
}

ConsistencyValue color_consistency(const Frame& e_t1, const Frame& e_t_aligned, double c) {
    require_same_shape(e_t1, e_t_aligned, "color_consistency");
    if (!(c > 0.0)) throw ValidationError("color consistency delta must be positive");
    const auto x = e_t1.data();
    const auto y = e_t_aligned.data();
    ConsistencyValue v;
    for (std::size_t p = 0; p < e_t1.pixel_count(); ++p) {
        const double sx = x[p * 3] + x[p * 3 + 1] + x[p * 3 + 2] + c;
        const double sy = y[p * 3] + y[p * 3 + 1] + y[p * 3 + 2] + c;
        for (std::size_t k = 0; k < 3; ++k) {
            v.sum += std::abs((x[p * 3 + k] + c) / sx - (y[p * 3 + k] + c) / sy);
        }
    }
    v.per_pixel = e_t1.pixel_count() ? v.sum / static_cast<double>(e_t1.pixel_count()) : 0.0;
    return v;
}

Frame frame_difference_map(const Frame& a, const Frame& b) {
    require_same_shape(a, b, "frame_difference_map");
    Frame out(a.height(), a.width());
    auto dst = out.mutable_data();
    const auto x = a.data();
    const auto y = b.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::abs(x[i] - y[i]);
    return out;
}

double mean_frame_difference(const FrameSequence& seq) {
    require_pairs(seq, "mean_frame_difference");
    double sum = 0.0;
    for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
        const Frame d = frame_difference_map(seq[t], seq[t + 1]);
        double s = 0.0;
        for (double v : d.data()) s += v;
        sum += s / static_cast<double>(d.data().size());
    }
    return sum / static_cast<double>(seq.size() - 1);
}

MetricReport compare_frames(const Frame& reference, const Frame& test) {
    MetricReport r;
    r.psnr = psnr(reference, test);
    r.mae = mae(reference, test);
    if (reference.height() >= 11 && reference.width() >= 11) r.ssim = ssim(reference, test);
    return r;
}

MetricReport sequence_report(const FrameSequence& seq) {
    require_pairs(seq, "sequence_report");
    MetricReport r;
    r.mabd = mabd(seq);
    if (seq[0].height() >= 11 && seq[0].width() >= 11) r.tssim = tssim(seq);
    ConsistencyValue exposure;
    ConsistencyValue color;
    for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
        const Frame aligned = warp(seq[t], estimate_flow(seq[t], seq[t + 1]));
        const auto e = exposure_consistency(seq[t + 1], aligned);
        const auto c = color_consistency(seq[t + 1], aligned);
        exposure.sum += e.sum;
        exposure.per_pixel += e.per_pixel;
        color.sum += c.sum;
        color.per_pixel += c.per_pixel;
    }
    const double pairs = static_cast<double>(seq.size() - 1);
    r.exposure_consistency = ConsistencyValue{exposure.sum / pairs, exposure.per_pixel / pairs};
    r.color_consistency = ConsistencyValue{color.sum / pairs, color.per_pixel / pairs};
    return r;
}

std::string to_json(const MetricReport& report, int indent) {
    nlohmann::json doc = nlohmann::json::object();
    if (report.psnr) doc["psnr"] = *report.psnr;
    if (report.ssim) doc["ssim"] = *report.ssim;
    if (report.mae) doc["mae"] = *report.mae;
    if (report.tssim) doc["tssim"] = *report.tssim;
    if (report.mabd) doc["mabd"] = *report.mabd;
    if (report.exposure_consistency) {
        doc["exposure_consistency"] = {{"sum", report.exposure_consistency->sum},
                                       {"per_pixel", report.exposure_consistency->per_pixel}};
    }
    if (report.color_consistency) {
        doc["color_consistency"] = {{"sum", report.color_consistency->sum},
                                    {"per_pixel", report.color_consistency->per_pixel}};
    }
    return doc.dump(indent);
}

}  // namespace lumen
