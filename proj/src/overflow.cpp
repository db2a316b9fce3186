#include "mmla/overflow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

namespace mmla {

namespace {

/// Standard-normal sampler: Box-Muller over mt19937_64 so streams are
/// reproducible across standard libraries.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : eng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform(); // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

int quantize_clamped(double v, int lo, int hi) {
    long r = std::lround(v);
    return static_cast<int>(std::clamp(r, static_cast<long>(lo), static_cast<long>(hi)));
}

OverflowReport report_from_tracked(const std::string& name, const TrackedGemmResult& tracked,
                                   int width, std::uint64_t depth) {
    OverflowReport r;
    r.layer = name;
    r.accumulator_width = width;
    r.total_steps = tracked.total_steps;
    r.overflow_steps = tracked.overflow_steps_at_width(width);
    r.overflow_pct = r.total_steps == 0
                         ? 0.0
                         : 100.0 * static_cast<double>(r.overflow_steps) /
                               static_cast<double>(r.total_steps);
    r.reduction_depth = depth;
    return r;
}

void check_width(int w) {
    if (w < 8 || w > 32) throw WidthError("accumulator width must be in [8, 32]");
}

} // namespace

std::vector<Resnet18Layer> resnet18_layer_table() {
    auto conv3x3 = [](int ch, int spatial) {
        return ConvLayerSpec{ch, ch, 3, 3, spatial, spatial, 1, 1};
    };
    return {
        {"conv2", conv3x3(64, 56)},  {"conv4", conv3x3(64, 56)},
        {"conv7", conv3x3(128, 28)}, {"conv9", conv3x3(128, 28)},
        {"conv12", conv3x3(256, 14)}, {"conv14", conv3x3(256, 14)},
        {"conv17", conv3x3(512, 7)}, {"conv19", conv3x3(512, 7)},
    };
}

OverflowReport analyze_layer(const std::string& layer_name, const I8Matrix& activations,
                             const I4MatrixPacked& weights, int acc_width) {
    check_width(acc_width);
    TrackedGemmResult tracked = gemm_asymmetric_tracked(activations, weights, acc_width);
    return report_from_tracked(layer_name, tracked, acc_width,
                               static_cast<std::uint64_t>(activations.cols));
}

std::vector<OverflowReport> sweep_widths(const std::string& layer_name,
                                         const I8Matrix& activations,
                                         const I4MatrixPacked& weights,
                                         std::span<const int> widths) {
    for (std::size_t i = 0; i < widths.size(); ++i) {
        check_width(widths[i]);
        if (i > 0 && widths[i] <= widths[i - 1])
            throw WidthError("widths must be strictly ascending");
    }
    std::vector<OverflowReport> out;
    if (widths.empty()) return out;
    // One tracked run serves every width: the histogram records the exact
    // width each running sum needs.
    TrackedGemmResult tracked = gemm_asymmetric_tracked(activations, weights, 16);
    out.reserve(widths.size());
    for (int w : widths)
        out.push_back(report_from_tracked(layer_name, tracked, w,
                                          static_cast<std::uint64_t>(activations.cols)));
    return out;
}

SyntheticLayerData generate_synthetic(const SyntheticDistSpec& dist, const ConvLayerSpec& layer,
                                      int batch) {
    if (batch < 1) throw ShapeError("batch must be positive");
    NormalSampler rng(dist.seed);

    const int depth = layer.reduction_depth();
    const int rows_per_item = layer.out_h() * layer.out_w();
    I8Matrix activations(batch * rows_per_item, depth);

    std::vector<std::int8_t> input(static_cast<std::size_t>(layer.c_in) * layer.in_h *
                                   layer.in_w);
    for (int bi = 0; bi < batch; ++bi) {
        for (auto& v : input) {
            double g = rng.next() * dist.act_sigma;
            v = dist.act_nonneg
                    ? static_cast<std::int8_t>(quantize_clamped(std::fabs(g), 0, 127))
                    : static_cast<std::int8_t>(quantize_clamped(g, -128, 127));
        }
        I8Matrix lowered = im2col(input, layer);
        std::copy(lowered.data.begin(), lowered.data.end(),
                  activations.data.begin() +
                      static_cast<std::size_t>(bi) * rows_per_item * depth);
    }

    std::vector<int> w(static_cast<std::size_t>(depth) * layer.c_out);
    for (auto& v : w) v = quantize_clamped(rng.next() * dist.weight_sigma, -8, 7);

    return {std::move(activations), pack_int4(w, depth, layer.c_out)};
}

Tensor load_tensors(const std::string& path) { return load_tensor(path); }

std::uint64_t sticky_scan(const I16Matrix& outputs) {
    std::uint64_t n = 0;
    for (std::int16_t v : outputs.data)
        if (v == std::numeric_limits<std::int16_t>::min() ||
            v == std::numeric_limits<std::int16_t>::max())
            ++n;
    return n;
}

std::string reports_to_csv(std::span<const OverflowReport> reports) {
    std::string out = "layer,acc_width,reduction_depth,total_steps,overflow_steps,overflow_pct\n";
    char line[256];
    for (const auto& r : reports) {
        std::snprintf(line, sizeof(line), "%s,%d,%llu,%llu,%llu,%.6f\n", r.layer.c_str(),
                      r.accumulator_width,
                      static_cast<unsigned long long>(r.reduction_depth),
                      static_cast<unsigned long long>(r.total_steps),
                      static_cast<unsigned long long>(r.overflow_steps), r.overflow_pct);
        out += line;
    }
    return out;
}

std::string reports_to_json(std::span<const OverflowReport> reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) {
        arr.push_back({{"layer", r.layer},
                       {"acc_width", r.accumulator_width},
                       {"reduction_depth", r.reduction_depth},
                       {"total_steps", r.total_steps},
                       {"overflow_steps", r.overflow_steps},
                       {"overflow_pct", r.overflow_pct}});
    }
    return arr.dump(2) + "\n";
}

AggregateSummary aggregate_reports(std::span<const OverflowReport> reports) {
    AggregateSummary s;
    if (reports.empty()) return s;
    std::uint64_t steps = 0, over = 0;
    for (const auto& r : reports) {
        s.per_layer_mean_pct += r.overflow_pct;
        steps += r.total_steps;
        over += r.overflow_steps;
    }
    s.per_layer_mean_pct /= static_cast<double>(reports.size());
    s.step_weighted_pct =
        steps == 0 ? 0.0 : 100.0 * static_cast<double>(over) / static_cast<double>(steps);
    return s;
}

} // namespace mmla
