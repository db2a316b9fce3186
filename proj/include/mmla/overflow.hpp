#pragma once

#include <span>
#include <string>
#include <vector>

#include "mmla/gemm.hpp"
#include "mmla/tensor.hpp"

namespace mmla {

/// Per-layer overflow measurement at one accumulator width. A step is one
/// instruction-level accumulation into one output element (8 products); it
/// overflows when the exact running sum lies outside the width's signed range.
struct OverflowReport {
    std::string layer;
    int accumulator_width = 16;
    std::uint64_t total_steps = 0;
    std::uint64_t overflow_steps = 0;
    double overflow_pct = 0.0; // 100 * overflow_steps / total_steps, 0 when empty
    std::uint64_t reduction_depth = 0;
};

/// Synthetic operand model: activations from a half-normal (post-ReLU-like)
/// quantized to [0, 127] (or a full normal quantized to [-128, 127]), weights
/// from a normal quantized symmetrically to [-8, 7]. Deterministic per seed.
struct SyntheticDistSpec {
    double act_sigma = 50.0;
    bool act_nonneg = true;
    double weight_sigma = 3.0;
    std::uint64_t seed = 0;
};

struct Resnet18Layer {
    std::string name;
    ConvLayerSpec spec;
};

/// The eight 3x3 convolution layers of ResNet18's four stages, with stage
/// spatial sizes 56/28/14/7. Reduction depths: 576, 576, 1152, 1152, 2304,
/// 2304, 4608, 4608.
std::vector<Resnet18Layer> resnet18_layer_table();

/// Runs the asymmetric GEMM with exact tracking at acc_width-bit bounds over
/// a layer's lowered operands. Throws WidthError outside [8, 32].
OverflowReport analyze_layer(const std::string& layer_name, const I8Matrix& activations,
                             const I4MatrixPacked& weights, int acc_width);

/// One report per width (ascending, each in [8, 32]). Computed from a single
/// tracked run; counts are identical to calling analyze_layer per width.
std::vector<OverflowReport> sweep_widths(const std::string& layer_name,
                                         const I8Matrix& activations,
                                         const I4MatrixPacked& weights,
                                         std::span<const int> widths);

struct SyntheticLayerData {
    I8Matrix activations;  // (batch * out_h * out_w) x reduction_depth
    I4MatrixPacked weights; // reduction_depth x c_out
};

/// Generates deterministic operands shaped like the layer's lowered GEMM.
/// Activations come from im2col over synthetic input tensors.
SyntheticLayerData generate_synthetic(const SyntheticDistSpec& dist, const ConvLayerSpec& layer,
                                      int batch = 1);

/// Loads a tensor in the AQT1 container format.
Tensor load_tensors(const std::string& path);

/// Counts elements equal to -32768 or +32767 in a saturating-sticky output.
/// A legitimately computed extreme value counts too.
std::uint64_t sticky_scan(const I16Matrix& outputs);

/// CSV rows: layer,acc_width,reduction_depth,total_steps,overflow_steps,overflow_pct.
std::string reports_to_csv(std::span<const OverflowReport> reports);

/// JSON array mirroring the CSV columns.
std::string reports_to_json(std::span<const OverflowReport> reports);

/// The two aggregations of a report set; the choice matters, so both are
/// exposed and labeled.
struct AggregateSummary {
    double per_layer_mean_pct = 0.0;   // unweighted mean of overflow_pct
    double step_weighted_pct = 0.0;    // 100 * sum(overflow) / sum(steps)
};

AggregateSummary aggregate_reports(std::span<const OverflowReport> reports);

} // namespace mmla
