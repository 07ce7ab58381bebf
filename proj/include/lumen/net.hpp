#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lumen/curves.hpp"
#include "lumen/frame.hpp"

namespace lumen {

/// Channel-planar (C, H, W) activation tensor.
struct Tensor {
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> values;

    Tensor() = default;
    Tensor(std::size_t c, std::size_t h, std::size_t w, double fill = 0.0)
        : channels(c), height(h), width(w), values(c * h * w, fill) {}

    std::size_t plane_size() const { return height * width; }
    double* plane(std::size_t c) { return values.data() + c * plane_size(); }
    const double* plane(std::size_t c) const { return values.data() + c * plane_size(); }

    friend bool operator==(const Tensor&, const Tensor&) = default;
};

enum class LayerKind { Conv, Activation };
enum class PaddingMode { Zero, Reflect };

struct LayerSpec {
    LayerKind kind = LayerKind::Conv;
    int kernel = 1;
    int in_channels = 1;
    int out_channels = 1;
    int stride = 1;
    int padding = 0;
    PaddingMode padding_mode = PaddingMode::Zero;
    int groups = 1;
    /// Earlier tensors concatenated (in order) as this layer's input. Tensor 0
    /// is the RGB input, tensor i + 1 is the output of layer i.
    std::vector<int> dense_inputs;
    /// out_channels x (in_channels / groups) x kernel x kernel, row-major.
    std::vector<double> weights;
    std::vector<double> bias;

    std::size_t output_height(std::size_t in_height) const;
    std::size_t output_width(std::size_t in_width) const;
};

struct NetworkSpec {
    std::vector<LayerSpec> layers;
    double gamma_min = kGammaMin;
    double gamma_max = kGammaMax;

    /// Checks kernel/channel arithmetic, dense links and the 3-channel head.
    /// Throws ValidationError.
    void validate() const;

    std::size_t conv_layer_count() const;
    /// Dense blocks are counted by the layers that read the raw RGB input.
    std::size_t block_count() const;
    /// Channel count of tensor `index` (0 = input).
    int tensor_channels(std::size_t index) const;
};

NetworkSpec parse_weights(std::string_view json_text);
std::string serialize_weights(const NetworkSpec& spec);
NetworkSpec load_weights(const std::filesystem::path& path);
void save_weights(const NetworkSpec& spec, const std::filesystem::path& path);

/// Three dense blocks: 1x1 (3->1), 3x3 (1->1); 1x1 (4->1), 3x3 (1->1);
/// 1x1 (4->3), with ReLU after every hidden conv. All weights zero.
NetworkSpec default_topology();

Tensor frame_to_tensor(const Frame& frame);
Tensor conv2d(const Tensor& input, const LayerSpec& layer);
Tensor relu(const Tensor& input);

/// gamma = exp(clamp(raw, ln gamma_min, ln gamma_max)) per element.
GammaMap raw_to_gamma(const Tensor& raw, double gamma_min, double gamma_max);

/// Output tensors of every layer from the last evaluation at a given input
/// resolution. Owned by a single pipeline.
struct ActivationCache {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<Tensor> outputs;

    bool empty() const { return outputs.empty(); }
};

struct ForwardResult {
    GammaMap gamma;
    ActivationCache cache;
    /// Number of layer entries actually evaluated.
    std::size_t layers_computed = 0;
};

/// Number of leading layer entries covered when the first `reuse_layers`
/// conv layers are reused: those convs plus the activations that directly
/// follow the last of them. Throws ValidationError unless
/// 0 <= reuse_layers < conv_layer_count().
std::size_t reused_prefix_length(const NetworkSpec& spec, int reuse_layers);

GammaMap forward(const NetworkSpec& spec, const Frame& frame);
ForwardResult forward_cached(const NetworkSpec& spec, const Frame& frame);

/// Reuses the outputs of the leading `reuse_layers` conv layers from `cached`
/// and recomputes the rest; links to tensor 0 always read the current frame.
ForwardResult forward_partial(const NetworkSpec& spec, const Frame& frame,
                              const ActivationCache& cached, int reuse_layers);

}  // namespace lumen
