#include "lumen/net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "lumen/error.hpp"
#include "lumen/parallel.hpp"

namespace lumen {

using nlohmann::json;

std::size_t LayerSpec::output_height(std::size_t in_height) const {
    const auto span = static_cast<long>(in_height) + 2L * padding - kernel;
    if (span < 0) throw DimensionError("layer kernel larger than its padded input");
    return static_cast<std::size_t>(span / stride + 1);
}

std::size_t LayerSpec::output_width(std::size_t in_width) const {
    const auto span = static_cast<long>(in_width) + 2L * padding - kernel;
    if (span < 0) throw DimensionError("layer kernel larger than its padded input");
    return static_cast<std::size_t>(span / stride + 1);
}

int NetworkSpec::tensor_channels(std::size_t index) const {
    if (index == 0) return 3;
    return layers.at(index - 1).out_channels;
}

std::size_t NetworkSpec::conv_layer_count() const {
    return static_cast<std::size_t>(std::count_if(layers.begin(), layers.end(),
                                                  [](const LayerSpec& l) { return l.kind == LayerKind::Conv; }));
}

std::size_t NetworkSpec::block_count() const {
    return static_cast<std::size_t>(std::count_if(layers.begin(), layers.end(), [](const LayerSpec& l) {
        return std::find(l.dense_inputs.begin(), l.dense_inputs.end(), 0) != l.dense_inputs.end();
    }));
}

void NetworkSpec::validate() const {
    auto fail = [](std::size_t i, const std::string& msg) {
        throw ValidationError("layer " + std::to_string(i) + ": " + msg);
    };
    if (layers.empty()) throw ValidationError("network has no layers");
    if (!(gamma_min > 0.0 && gamma_min < gamma_max && std::isfinite(gamma_max))) {
        throw ValidationError("gamma range must satisfy 0 < min < max");
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const LayerSpec& l = layers[i];
        if (l.kernel < 1 || l.in_channels < 1 || l.out_channels < 1 || l.stride < 1 || l.padding < 0 ||
            l.groups < 1) {
            fail(i, "kernel, channels, stride and groups must be positive");
        }
        if (l.in_channels % l.groups != 0 || l.out_channels % l.groups != 0) {
            fail(i, "groups must divide both channel counts");
        }
        if (l.kind == LayerKind::Conv) {
            const auto expect = static_cast<std::size_t>(l.out_channels) * (l.in_channels / l.groups) *
                                l.kernel * l.kernel;
            if (l.weights.size() != expect) fail(i, "expected " + std::to_string(expect) + " weights");
            if (l.bias.size() != static_cast<std::size_t>(l.out_channels)) fail(i, "bias length != cout");
        } else {
            if (l.in_channels != l.out_channels) fail(i, "activation must preserve channel count");
            if (!l.weights.empty() || !l.bias.empty()) fail(i, "activation carries no weights");
        }
        if (l.dense_inputs.empty()) fail(i, "no inputs declared");
        int channels = 0;
        for (int src : l.dense_inputs) {
            if (src < 0 || static_cast<std::size_t>(src) > i) fail(i, "dense input " + std::to_string(src) + " is not an earlier tensor");
            channels += tensor_channels(static_cast<std::size_t>(src));
        }
        if (channels != l.in_channels) {
            fail(i, "cin " + std::to_string(l.in_channels) + " != " + std::to_string(channels) +
                        " channels from dense inputs");
        }
    }
    if (layers.back().out_channels != 3) throw ValidationError("final layer must produce 3 channels");
}

// ---------------------------------------------------------------------------
// Weights file

namespace {

template <typename T>
T require(const json& obj, const char* key, std::size_t layer) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw FormatError("layer " + std::to_string(layer) + ": missing \"" + key + "\"");
    }
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw FormatError("layer " + std::to_string(layer) + ": bad type for \"" + key + "\"");
    }
}

template <typename T>
T optional_field(const json& obj, const char* key, T fallback, std::size_t layer) {
    if (!obj.contains(key)) return fallback;
    return require<T>(obj, key, layer);
}

}  // namespace

NetworkSpec parse_weights(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("weights file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw FormatError("weights document must be an object");
    if (doc.value("version", 0) != 1) throw FormatError("unsupported weights version");
    NetworkSpec spec;
    if (doc.contains("gamma_range")) {
        const auto& range = doc["gamma_range"];
        if (!range.is_array() || range.size() != 2 || !range[0].is_number() || !range[1].is_number()) {
            throw FormatError("gamma_range must be [min, max]");
        }
        spec.gamma_min = range[0].get<double>();
        spec.gamma_max = range[1].get<double>();
    }
    if (!doc.contains("layers") || !doc["layers"].is_array()) throw FormatError("missing layers array");

    std::size_t index = 0;
    for (const auto& item : doc["layers"]) {
        if (!item.is_object()) throw FormatError("layer " + std::to_string(index) + " is not an object");
        LayerSpec l;
        const auto kind = require<std::string>(item, "kind", index);
        if (kind == "conv") {
            l.kind = LayerKind::Conv;
        } else if (kind == "activation") {
            l.kind = LayerKind::Activation;
            const auto act = optional_field<std::string>(item, "activation", "relu", index);
            if (act != "relu") throw FormatError("layer " + std::to_string(index) + ": unsupported activation " + act);
        } else {
            throw FormatError("layer " + std::to_string(index) + ": unknown kind " + kind);
        }
        l.kernel = optional_field<int>(item, "k", 1, index);
        l.in_channels = require<int>(item, "cin", index);
        l.out_channels = require<int>(item, "cout", index);
        l.stride = optional_field<int>(item, "stride", 1, index);
        l.padding = optional_field<int>(item, "padding", 0, index);
        l.groups = optional_field<int>(item, "groups", 1, index);
        const auto mode = optional_field<std::string>(item, "padding_mode", "zero", index);
        if (mode == "zero") {
            l.padding_mode = PaddingMode::Zero;
        } else if (mode == "reflect") {
            l.padding_mode = PaddingMode::Reflect;
        } else {
            throw FormatError("layer " + std::to_string(index) + ": unknown padding_mode " + mode);
        }
        l.dense_inputs = optional_field<std::vector<int>>(item, "dense_inputs", {static_cast<int>(index)}, index);
        if (l.kind == LayerKind::Conv) {
            l.weights = require<std::vector<double>>(item, "weights", index);
            l.bias = require<std::vector<double>>(item, "bias", index);
            if (l.kernel >= 1 && l.in_channels >= 1 && l.out_channels >= 1 && l.groups >= 1 &&
                l.in_channels % l.groups == 0) {
                const auto expect = static_cast<std::size_t>(l.out_channels) * (l.in_channels / l.groups) *
                                    l.kernel * l.kernel;
                if (l.weights.size() != expect || l.bias.size() != static_cast<std::size_t>(l.out_channels)) {
                    throw FormatError("layer " + std::to_string(index) + ": weight array has " +
                                      std::to_string(l.weights.size()) + " values, expected " +
                                      std::to_string(expect));
                }
            }
        }
        spec.layers.push_back(std::move(l));
        ++index;
    }
    spec.validate();
    return spec;
}

std::string serialize_weights(const NetworkSpec& spec) {
    json doc;
    doc["version"] = 1;
    doc["gamma_range"] = {spec.gamma_min, spec.gamma_max};
    json layers = json::array();
    for (const auto& l : spec.layers) {
        json item;
        item["kind"] = l.kind == LayerKind::Conv ? "conv" : "activation";
        if (l.kind == LayerKind::Activation) item["activation"] = "relu";
        item["k"] = l.kernel;
        item["cin"] = l.in_channels;
        item["cout"] = l.out_channels;
        item["stride"] = l.stride;
        item["padding"] = l.padding;
        item["padding_mode"] = l.padding_mode == PaddingMode::Zero ? "zero" : "reflect";
        item["groups"] = l.groups;
        item["dense_inputs"] = l.dense_inputs;
        if (l.kind == LayerKind::Conv) {
            item["weights"] = l.weights;
            item["bias"] = l.bias;
        }
        layers.push_back(std::move(item));
    }
    doc["layers"] = std::move(layers);
    return doc.dump(1);
}

NetworkSpec load_weights(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open weights file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_weights(ss.str());
}

void save_weights(const NetworkSpec& spec, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write weights file " + path.string());
    out << serialize_weights(spec) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

NetworkSpec default_topology() {
    auto conv = [](int k, int cin, int cout, int padding, PaddingMode mode, std::vector<int> inputs) {
        LayerSpec l;
        l.kind = LayerKind::Conv;
        l.kernel = k;
        l.in_channels = cin;
        l.out_channels = cout;
        l.padding = padding;
        l.padding_mode = mode;
        l.dense_inputs = std::move(inputs);
        l.weights.assign(static_cast<std::size_t>(cout * cin * k * k), 0.0);
        l.bias.assign(static_cast<std::size_t>(cout), 0.0);
        return l;
    };
    auto act = [](int channels, int input) {
        LayerSpec l;
        l.kind = LayerKind::Activation;
        l.in_channels = channels;
        l.out_channels = channels;
        l.dense_inputs = {input};
        return l;
    };
    NetworkSpec spec;
    spec.layers = {
        conv(1, 3, 1, 0, PaddingMode::Zero, {0}),     // 0 -> t1
        act(1, 1),                                    // 1 -> t2
        conv(3, 1, 1, 1, PaddingMode::Reflect, {2}),  // 2 -> t3
        act(1, 3),                                    // 3 -> t4
        conv(1, 4, 1, 0, PaddingMode::Zero, {0, 4}),  // 4 -> t5
        act(1, 5),                                    // 5 -> t6
        conv(3, 1, 1, 1, PaddingMode::Zero, {6}),     // 6 -> t7
        act(1, 7),                                    // 7 -> t8
        conv(1, 4, 3, 0, PaddingMode::Zero, {0, 8}),  // 8 -> t9, raw gamma logits
    };
    return spec;
}

// ---------------------------------------------------------------------------
// Inference

Tensor frame_to_tensor(const Frame& frame) {
    Tensor t(3, frame.height(), frame.width());
    const auto src = frame.data();
    const std::size_t n = frame.pixel_count();
    for (std::size_t c = 0; c < 3; ++c) {
        double* dst = t.plane(c);
        for (std::size_t i = 0; i < n; ++i) dst[i] = src[i * 3 + c];
    }
    return t;
}

namespace {

// Maps a possibly out-of-range coordinate into [0, n) by mirror reflection
// (edge pixel not repeated).
long reflect_index(long i, long n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * (n - 1) - i;
    }
    return i;
}

Tensor pad(const Tensor& in, int padding, PaddingMode mode) {
    if (padding == 0) return in;
    const long p = padding;
    const long h = static_cast<long>(in.height);
    const long w = static_cast<long>(in.width);
    Tensor out(in.channels, in.height + 2 * padding, in.width + 2 * padding);
    for (std::size_t c = 0; c < in.channels; ++c) {
        const double* src = in.plane(c);
        double* dst = out.plane(c);
        for (long y = -p; y < h + p; ++y) {
            for (long x = -p; x < w + p; ++x) {
                double v = 0.0;
                if (mode == PaddingMode::Reflect) {
                    v = src[reflect_index(y, h) * w + reflect_index(x, w)];
                } else if (y >= 0 && y < h && x >= 0 && x < w) {
                    v = src[y * w + x];
                }
                dst[(y + p) * static_cast<long>(out.width) + (x + p)] = v;
            }
        }
    }
    return out;
}

Tensor concat(const std::vector<const Tensor*>& parts) {
    Tensor out;
    out.height = parts.front()->height;
    out.width = parts.front()->width;
    for (const Tensor* t : parts) {
        if (t->height != out.height || t->width != out.width) {
            throw DimensionError("dense inputs have different spatial sizes");
        }
        out.channels += t->channels;
        out.values.insert(out.values.end(), t->values.begin(), t->values.end());
    }
    return out;
}

}  // namespace

Tensor conv2d(const Tensor& input, const LayerSpec& layer) {
    if (static_cast<int>(input.channels) != layer.in_channels) {
        throw DimensionError("conv expects " + std::to_string(layer.in_channels) + " input channels, got " +
                             std::to_string(input.channels));
    }
    const Tensor padded = pad(input, layer.padding, layer.padding_mode);
    const std::size_t out_h = layer.output_height(input.height);
    const std::size_t out_w = layer.output_width(input.width);
    const auto k = static_cast<std::size_t>(layer.kernel);
    const auto s = static_cast<std::size_t>(layer.stride);
    const std::size_t cin_g = static_cast<std::size_t>(layer.in_channels / layer.groups);
    const std::size_t cout_g = static_cast<std::size_t>(layer.out_channels / layer.groups);
    const std::size_t pw = padded.width;

    Tensor out(static_cast<std::size_t>(layer.out_channels), out_h, out_w);
    parallel_for(out_h, [&](std::size_t y0, std::size_t y1) {
        for (std::size_t oc = 0; oc < out.channels; ++oc) {
            const std::size_t group = oc / cout_g;
            double* dst = out.plane(oc);
            for (std::size_t y = y0; y < y1; ++y) {
                std::fill(dst + y * out_w, dst + (y + 1) * out_w, layer.bias[oc]);
            }
            for (std::size_t icl = 0; icl < cin_g; ++icl) {
                const double* src = padded.plane(group * cin_g + icl);
                const double* wk = layer.weights.data() + (oc * cin_g + icl) * k * k;
                for (std::size_t ky = 0; ky < k; ++ky) {
                    for (std::size_t kx = 0; kx < k; ++kx) {
                        const double w = wk[ky * k + kx];
                        if (w == 0.0) continue;
                        for (std::size_t y = y0; y < y1; ++y) {
                            const double* row = src + (y * s + ky) * pw + kx;
                            double* o = dst + y * out_w;
                            for (std::size_t x = 0; x < out_w; ++x) o[x] += w * row[x * s];
                        }
                    }
                }
            }
        }
    });
    return out;
}

Tensor relu(const Tensor& input) {
    Tensor out = input;
    for (double& v : out.values) v = v > 0.0 ? v : 0.0;
    return out;
}

GammaMap raw_to_gamma(const Tensor& raw, double gamma_min, double gamma_max) {
    if (raw.channels != 3) throw DimensionError("gamma head must have 3 channels");
    const double lo = std::log(gamma_min);
    const double hi = std::log(gamma_max);
    const std::size_t n = raw.plane_size();
    std::vector<double> exponents(n * 3);
    for (std::size_t c = 0; c < 3; ++c) {
        const double* src = raw.plane(c);
        for (std::size_t i = 0; i < n; ++i) {
            // clamp before exp keeps the result inside [gamma_min, gamma_max]
            exponents[i * 3 + c] = std::clamp(std::exp(std::clamp(src[i], lo, hi)), gamma_min, gamma_max);
        }
    }
    return GammaMap(raw.height, raw.width, std::move(exponents));
}

std::size_t reused_prefix_length(const NetworkSpec& spec, int reuse_layers) {
    const std::size_t convs = spec.conv_layer_count();
    if (reuse_layers < 0 || static_cast<std::size_t>(reuse_layers) >= std::max<std::size_t>(convs, 1)) {
        throw ValidationError("layer reuse " + std::to_string(reuse_layers) + " must be in [0, " +
                              std::to_string(convs) + ")");
    }
    if (reuse_layers == 0) return 0;
    int seen = 0;
    std::size_t i = 0;
    for (; i < spec.layers.size(); ++i) {
        if (spec.layers[i].kind == LayerKind::Conv && ++seen == reuse_layers) break;
    }
    ++i;
    while (i < spec.layers.size() && spec.layers[i].kind == LayerKind::Activation) ++i;
    return i;
}

namespace {

ForwardResult run_network(const NetworkSpec& spec, const Frame& frame, const ActivationCache* cached,
                          std::size_t prefix) {
    const std::size_t n_layers = spec.layers.size();
    std::vector<Tensor> tensors(n_layers + 1);
    tensors[0] = frame_to_tensor(frame);
    for (std::size_t i = 0; i < n_layers; ++i) {
        if (i < prefix) {
            tensors[i + 1] = cached->outputs[i];
            continue;
        }
        const LayerSpec& layer = spec.layers[i];
        Tensor input;
        const Tensor* in = nullptr;
        if (layer.dense_inputs.size() == 1) {
            in = &tensors[static_cast<std::size_t>(layer.dense_inputs.front())];
        } else {
            std::vector<const Tensor*> parts;
            for (int src : layer.dense_inputs) parts.push_back(&tensors[static_cast<std::size_t>(src)]);
            input = concat(parts);
            in = &input;
        }
        tensors[i + 1] = layer.kind == LayerKind::Conv ? conv2d(*in, layer) : relu(*in);
    }
    const Tensor& raw = tensors.back();
    if (raw.height != frame.height() || raw.width != frame.width()) {
        throw DimensionError("network output is " + std::to_string(raw.height) + "x" + std::to_string(raw.width) +
                             ", expected the input size");
    }
    ForwardResult result;
    result.gamma = raw_to_gamma(raw, spec.gamma_min, spec.gamma_max);
    result.cache.height = frame.height();
    result.cache.width = frame.width();
    result.cache.outputs.assign(std::make_move_iterator(tensors.begin() + 1), std::make_move_iterator(tensors.end()));
    result.layers_computed = n_layers - prefix;
    return result;
}

}  // namespace

GammaMap forward(const NetworkSpec& spec, const Frame& frame) {
    return run_network(spec, frame, nullptr, 0).gamma;
}

ForwardResult forward_cached(const NetworkSpec& spec, const Frame& frame) {
    return run_network(spec, frame, nullptr, 0);
}

ForwardResult forward_partial(const NetworkSpec& spec, const Frame& frame, const ActivationCache& cached,
                              int reuse_layers) {
    const std::size_t prefix = reused_prefix_length(spec, reuse_layers);
    if (prefix == 0) return run_network(spec, frame, nullptr, 0);
    if (cached.outputs.size() != spec.layers.size()) {
        throw ValidationError("activation cache does not match the network");
    }
    if (cached.height != frame.height() || cached.width != frame.width()) {
        throw DimensionError("activation cache was built at " + std::to_string(cached.height) + "x" +
                             std::to_string(cached.width) + ", frame is " + std::to_string(frame.height()) + "x" +
                             std::to_string(frame.width()));
    }
    return run_network(spec, frame, &cached, prefix);
}

}  // namespace lumen
