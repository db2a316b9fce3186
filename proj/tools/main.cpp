// Command-line driver: experiments and reports over the instruction models,
// GEMM kernels, overflow harness, and systolic-array simulator.
//
// Exit codes: 0 success, 1 verification failure, 2 usage error.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "mmla/gemm.hpp"
#include "mmla/overflow.hpp"
#include "mmla/systolic.hpp"

using namespace mmla;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitUsage = 2;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open output file: " + path);
    out << content;
}

void emit(const std::string& content, const std::string& out_path) {
    if (out_path.empty())
        std::cout << content;
    else
        write_file(out_path, content);
}

// ---- isa-check ------------------------------------------------------------

// Scalar single-step checker, kept separate from the tile implementations.
struct ScalarCell {
    std::int64_t value = 0;
    std::int64_t exact = 0;
    bool sticky = false;
    std::uint32_t events = 0;

    void step(std::int64_t dot, AccMode mode, int bits) {
        const std::int64_t hi = (std::int64_t{1} << (bits - 1)) - 1;
        const std::int64_t lo = -(std::int64_t{1} << (bits - 1));
        const std::int64_t span = std::int64_t{1} << bits;
        exact += dot;
        switch (mode) {
            case AccMode::Wrapping: {
                value += dot;
                while (value > hi) value -= span;
                while (value < lo) value += span;
                break;
            }
            case AccMode::SaturatingSticky:
                if (sticky) return;
                value += dot;
                if (value > hi) value = hi, sticky = true;
                if (value < lo) value = lo, sticky = true;
                break;
            case AccMode::ExactTracking: {
                value += dot;
                while (value > hi) value -= span;
                while (value < lo) value += span;
                if (exact < lo || exact > hi) ++events;
                break;
            }
        }
    }
};

int run_isa_check(int samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> i8(-128, 127), i4(-8, 7), i16(-32768, 32767);
    std::uniform_int_distribution<std::int32_t> i32(-2147483647 - 1, 2147483647);

    std::uint64_t mismatches = 0;
    for (int iter = 0; iter < samples; ++iter) {
        AccMode mode = static_cast<AccMode>(iter % 3);

        OperandRegA a;
        for (auto& v : a.lanes) v = static_cast<std::int8_t>(i8(rng));

        // asymmetric path
        std::vector<int> wvals(32);
        for (auto& v : wvals) v = i4(rng);
        OperandRegB4 b4 = extract_reg_b4(pack_int4(wvals, 8, 4), 0, 0);

        AccTile16 t16;
        ScalarCell cells16[2][4];
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 4; ++j) {
                t16.acc[i][j] = static_cast<std::int16_t>(i16(rng));
                t16.exact[i][j] = t16.acc[i][j];
                cells16[i][j].value = t16.acc[i][j];
                cells16[i][j].exact = t16.acc[i][j];
            }
        AccTile16 r16 = ammla(t16, a, b4, mode);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 4; ++j) {
                std::int64_t dot = 0;
                for (int k = 0; k < 8; ++k) dot += a.a(i, k) * b4.w(k, j);
                cells16[i][j].step(dot, mode, 16);
                if (r16.acc[i][j] != cells16[i][j].value ||
                    r16.overflow_events[i][j] != cells16[i][j].events ||
                    static_cast<bool>(r16.sticky[i][j]) != cells16[i][j].sticky)
                    ++mismatches;
            }

        // symmetric path
        OperandRegB8 b8;
        for (auto& v : b8.lanes) v = static_cast<std::int8_t>(i8(rng));
        AccTile32 t32;
        ScalarCell cells32[2][2];
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                t32.acc[i][j] = i32(rng);
                t32.exact[i][j] = t32.acc[i][j];
                cells32[i][j].value = t32.acc[i][j];
                cells32[i][j].exact = t32.acc[i][j];
            }
        AccTile32 r32 = smmla(t32, a, b8, mode);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                std::int64_t dot = 0;
                for (int k = 0; k < 8; ++k) dot += a.a(i, k) * b8.b(k, j);
                cells32[i][j].step(dot, mode, 32);
                if (r32.acc[i][j] != cells32[i][j].value) ++mismatches;
            }

        // widening baseline equals smmla over widened weights
        std::vector<int> wide_vals(16);
        for (auto& v : wide_vals) v = i4(rng);
        I4MatrixPacked narrow = pack_int4(wide_vals, 8, 2);
        AccTile32 via = ammla_via_widening(AccTile32{}, a, narrow, 0, 0, AccMode::Wrapping);
        AccTile32 direct =
            smmla(AccTile32{}, a, extract_reg_b8(widen_int4_to_int8(narrow), 0, 0),
                  AccMode::Wrapping);
        if (via.acc != direct.acc) ++mismatches;

        if (!tile_equivalence_check(a, b4)) ++mismatches;
    }

    std::cout << "isa-check: " << samples << " samples, seed " << seed << ", "
              << mismatches << " mismatches\n";
    if (mismatches != 0) {
        std::cout << "FAIL\n";
        return kExitVerifyFail;
    }
    std::cout << "OK\n";
    return kExitOk;
}

// ---- throughput -----------------------------------------------------------

int run_throughput(int m, int k, int n, int rows, int cols, const std::string& format,
                   const std::string& out_path) {
    ThroughputReport rep = throughput_report(m, k, n);
    SaThroughput sa = throughput_compare(m, k, n, rows, cols);

    std::string content;
    if (format == "json") {
        nlohmann::json j{
            {"m", m},
            {"k", k},
            {"n", n},
            {"sym_instructions", rep.sym_instructions},
            {"asym_instructions", rep.asym_instructions},
            {"instruction_ratio", rep.ratio},
            {"sa_rows", rows},
            {"sa_cols", cols},
            {"sa_steady_sym_macs_per_cycle", sa.sym_macs_per_cycle},
            {"sa_steady_asym_macs_per_cycle", sa.asym_macs_per_cycle},
            {"sa_steady_ratio", sa.ratio},
            {"sa_steady_state_reached", sa.steady_state},
            {"sa_total_sym_macs_per_cycle", sa.sym_total_macs_per_cycle},
            {"sa_total_asym_macs_per_cycle", sa.asym_total_macs_per_cycle},
            {"sa_total_ratio", sa.total_ratio},
        };
        content = j.dump(2) + "\n";
    } else {
        std::ostringstream os;
        os << "metric,value\n";
        os << "sym_instructions," << rep.sym_instructions << "\n";
        os << "asym_instructions," << rep.asym_instructions << "\n";
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.6f", rep.ratio);
        os << "instruction_ratio," << buf << "\n";
        std::snprintf(buf, sizeof(buf), "%.6f", sa.ratio);
        os << "sa_steady_ratio," << buf << "\n";
        std::snprintf(buf, sizeof(buf), "%.6f", sa.total_ratio);
        os << "sa_total_ratio," << buf << "\n";
        content = os.str();
    }
    emit(content, out_path);

    std::cerr << "throughput " << m << "x" << k << "x" << n << ": sym "
              << rep.sym_instructions << " instr, asym " << rep.asym_instructions
              << " instr, ratio " << rep.ratio << "; SA steady macs/cycle "
              << sa.sym_macs_per_cycle << " vs " << sa.asym_macs_per_cycle << " (ratio "
              << sa.ratio << ")\n";
    return kExitOk;
}

// ---- overflow ---------------------------------------------------------------

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) throw WidthError("empty entry in list: " + csv);
        out.push_back(std::stoi(item));
    }
    if (out.empty()) throw WidthError("empty list");
    return out;
}

int run_overflow(const std::string& layers_arg, const std::string& widths_arg,
                 std::uint64_t seed, double act_sigma, double weight_sigma, bool signed_acts,
                 int batch, const std::string& acts_path, const std::string& weights_path,
                 const std::string& layer_name, const std::string& format,
                 const std::string& out_path) {
    std::vector<int> widths = parse_int_list(widths_arg);

    std::vector<OverflowReport> reports;
    if (!acts_path.empty() || !weights_path.empty()) {
        if (acts_path.empty() || weights_path.empty())
            throw FormatError("--activations and --weights must be given together");
        I8Matrix acts = load_tensors(acts_path).to_i8();
        I4MatrixPacked weights = load_tensors(weights_path).to_i4();
        auto rows = sweep_widths(layer_name, acts, weights, widths);
        reports.insert(reports.end(), rows.begin(), rows.end());
    } else {
        auto table = resnet18_layer_table();
        std::vector<Resnet18Layer> selected;
        if (layers_arg == "all") {
            selected = table;
        } else {
            std::stringstream ss(layers_arg);
            std::string name;
            while (std::getline(ss, name, ',')) {
                bool found = false;
                for (const auto& l : table)
                    if (l.name == name) {
                        selected.push_back(l);
                        found = true;
                    }
                if (!found) throw FormatError("unknown layer name: " + name);
            }
            if (selected.empty()) throw FormatError("empty layer selection");
        }

        SyntheticDistSpec dist;
        dist.act_sigma = act_sigma;
        dist.act_nonneg = !signed_acts;
        dist.weight_sigma = weight_sigma;
        for (const auto& layer : selected) {
            dist.seed = seed ^ std::hash<std::string>{}(layer.name);
            auto data = generate_synthetic(dist, layer.spec, batch);
            auto rows = sweep_widths(layer.name, data.activations, data.weights, widths);
            reports.insert(reports.end(), rows.begin(), rows.end());
        }
    }

    emit(format == "json" ? reports_to_json(reports) : reports_to_csv(reports), out_path);

    AggregateSummary agg = aggregate_reports(reports);
    std::cerr << "aggregate over " << reports.size()
              << " rows: per-layer mean overflow " << agg.per_layer_mean_pct
              << "%, step-weighted overflow " << agg.step_weighted_pct << "%\n"
              << "note: a step is one instruction-level accumulation into one output "
                 "element (8 products); a step overflows when the exact running sum "
                 "leaves the accumulator range\n";
    return kExitOk;
}

// ---- sa-sim -----------------------------------------------------------------

int run_sa_sim(int m, int k, int n, int rows, int cols, const std::string& pe_mode,
               const std::string& mode, std::uint64_t seed, const std::string& activity_path,
               const std::string& format, const std::string& out_path) {
    AccMode acc = mode == "sticky" ? AccMode::SaturatingSticky
                  : mode == "track" ? AccMode::ExactTracking
                                    : AccMode::Wrapping;
    SaConfig cfg{rows, cols,
                 pe_mode == "asym" ? SaPeMode::AsymmetricDual : SaPeMode::Symmetric, acc,
                 !activity_path.empty(), false};

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> i8(-128, 127), i4(-8, 7);
    I8Matrix a(m, k);
    for (auto& v : a.data) v = static_cast<std::int8_t>(i8(rng));

    SaTrace trace;
    bool matches_gemm = true;
    bool compared = true;
    if (cfg.pe_mode == SaPeMode::Symmetric) {
        I8Matrix b(k, n);
        for (auto& v : b.data) v = static_cast<std::int8_t>(i8(rng));
        trace = simulate(a, b, cfg);
        if (acc == AccMode::SaturatingSticky)
            compared = false; // the PE clamps per product, the kernel per 8-product dot
        else
            matches_gemm = trace.out32 == gemm_symmetric(a, b, acc).values;
    } else {
        std::vector<int> wvals(static_cast<std::size_t>(k) * n);
        for (auto& v : wvals) v = i4(rng);
        I4MatrixPacked b = pack_int4(wvals, k, n);
        trace = simulate(a, b, cfg);
        if (acc == AccMode::SaturatingSticky)
            compared = false;
        else
            matches_gemm = trace.out16 == gemm_asymmetric(a, b, acc).values;
    }

    std::uint64_t predicted = analytic_cycles(m, k, n, cfg);
    bool cycles_match = predicted == trace.cycles;
    double macs_per_cycle =
        static_cast<double>(trace.macs_performed) / static_cast<double>(trace.cycles);

    std::string content;
    if (format == "json") {
        nlohmann::json j{
            {"m", m},
            {"k", k},
            {"n", n},
            {"rows", rows},
            {"cols", cols},
            {"pe_mode", pe_mode},
            {"acc_mode", mode},
            {"cycles", trace.cycles},
            {"analytic_cycles", predicted},
            {"passes", trace.passes},
            {"macs_performed", trace.macs_performed},
            {"macs_per_cycle", macs_per_cycle},
            {"overflow_events", trace.overflow_events},
            {"gemm_compared", compared},
            {"matches_gemm", matches_gemm},
        };
        content = j.dump(2) + "\n";
    } else {
        std::ostringstream os;
        os << "metric,value\n";
        os << "cycles," << trace.cycles << "\n";
        os << "analytic_cycles," << predicted << "\n";
        os << "passes," << trace.passes << "\n";
        os << "macs_performed," << trace.macs_performed << "\n";
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.6f", macs_per_cycle);
        os << "macs_per_cycle," << buf << "\n";
        os << "overflow_events," << trace.overflow_events << "\n";
        os << "matches_gemm," << (compared ? (matches_gemm ? "yes" : "no") : "n/a") << "\n";
        content = os.str();
    }
    emit(content, out_path);

    if (!activity_path.empty()) {
        std::ostringstream os;
        os << "cycle,active_pes\n";
        for (std::size_t t = 0; t < trace.active_pes_per_cycle.size(); ++t)
            os << t << "," << trace.active_pes_per_cycle[t] << "\n";
        write_file(activity_path, os.str());
    }

    std::cerr << "sa-sim: " << trace.cycles << " cycles (analytic " << predicted << "), "
              << trace.macs_performed << " MACs, " << macs_per_cycle << " MACs/cycle, gemm "
              << (compared ? (matches_gemm ? "match" : "MISMATCH") : "not compared") << "\n";

    if (!cycles_match || (compared && !matches_gemm)) return kExitVerifyFail;
    return kExitOk;
}

// ---- pack -------------------------------------------------------------------

std::pair<int, int> parse_dims(const std::string& dims) {
    auto x = dims.find('x');
    if (x == std::string::npos) throw FormatError("--dims must look like ROWSxCOLS");
    int r = std::stoi(dims.substr(0, x));
    int c = std::stoi(dims.substr(x + 1));
    if (r < 0 || c < 0) throw FormatError("dims must be non-negative");
    return {r, c};
}

int run_pack(const std::string& dtype, const std::string& dims, const std::string& in_path,
             const std::string& out_path, const std::string& inspect_path) {
    if (!inspect_path.empty()) {
        Tensor t = load_tensor(inspect_path);
        const char* names[] = {"int8", "int4", "int16", "int32"};
        std::cout << "dtype " << names[static_cast<int>(t.dtype)] << ", dims";
        for (auto d : t.dims) std::cout << " " << d;
        std::cout << "\n";
        auto vals = t.values();
        std::size_t per_line = t.dims.size() == 2 ? t.dims.back() : vals.size();
        for (std::size_t i = 0; i < vals.size(); ++i) {
            std::cout << vals[i];
            std::cout << ((i + 1) % per_line == 0 ? '\n' : ' ');
        }
        return kExitOk;
    }

    if (dtype.empty() || dims.empty() || in_path.empty() || out_path.empty())
        throw FormatError("pack requires --dtype, --dims, --in and --out (or --inspect)");

    auto [rows, cols] = parse_dims(dims);
    std::ifstream in(in_path);
    if (!in) throw FormatError("cannot open values file: " + in_path);
    std::vector<long> vals;
    long v;
    while (in >> v) vals.push_back(v);
    if (vals.size() != static_cast<std::size_t>(rows) * cols)
        throw ShapeError("value count does not match dims");

    auto check_range = [&](long lo, long hi) {
        for (long x : vals)
            if (x < lo || x > hi) throw RangeError("value out of range: " + std::to_string(x));
    };

    Tensor t;
    if (dtype == "int4") {
        check_range(-8, 7);
        std::vector<int> iv(vals.begin(), vals.end());
        t = Tensor::from(pack_int4(iv, rows, cols));
    } else if (dtype == "int8") {
        check_range(-128, 127);
        I8Matrix m(rows, cols);
        for (std::size_t i = 0; i < vals.size(); ++i) m.data[i] = static_cast<std::int8_t>(vals[i]);
        t = Tensor::from(m);
    } else if (dtype == "int16") {
        check_range(-32768, 32767);
        I16Matrix m(rows, cols);
        for (std::size_t i = 0; i < vals.size(); ++i) m.data[i] = static_cast<std::int16_t>(vals[i]);
        t = Tensor::from(m);
    } else if (dtype == "int32") {
        check_range(-2147483648L, 2147483647L);
        I32Matrix m(rows, cols);
        for (std::size_t i = 0; i < vals.size(); ++i) m.data[i] = static_cast<std::int32_t>(vals[i]);
        t = Tensor::from(m);
    } else {
        throw FormatError("unknown dtype: " + dtype);
    }
    save_tensor(t, out_path);
    std::cerr << "packed " << vals.size() << " values into " << out_path << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"int8xint4 matrix MAC reference model"};
    app.require_subcommand(1);

    // isa-check
    auto* isa_cmd = app.add_subcommand("isa-check", "verify instruction semantics against a scalar oracle");
    int samples = 10000;
    std::uint64_t seed = 1;
    isa_cmd->add_option("--samples", samples, "random samples")->check(CLI::PositiveNumber);
    isa_cmd->add_option("--seed", seed, "rng seed");

    // throughput
    auto* thr_cmd = app.add_subcommand("throughput", "instruction counts and MAC throughput for both kernels");
    int m = 0, k = 0, n = 0, rows = 4, cols = 4;
    std::string format = "csv", out_path;
    thr_cmd->add_option("-m", m, "output rows")->required();
    thr_cmd->add_option("-k", k, "reduction depth")->required();
    thr_cmd->add_option("-n", n, "output cols")->required();
    thr_cmd->add_option("--rows", rows, "systolic array rows");
    thr_cmd->add_option("--cols", cols, "systolic array cols");
    thr_cmd->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    thr_cmd->add_option("--out", out_path, "output file (default stdout)");

    // overflow
    auto* ovf_cmd = app.add_subcommand("overflow", "accumulator-width overflow sweep over layer-shaped reductions");
    std::string layers = "all";
    std::string widths = "12,13,14,15,16,18,20,24,32";
    std::uint64_t ovf_seed = 1;
    double act_sigma = 50.0, weight_sigma = 3.0;
    bool signed_acts = false;
    int batch = 1;
    std::string acts_path, weights_path, layer_name = "tensor";
    std::string ovf_format = "csv", ovf_out;
    ovf_cmd->add_option("--layers", layers, "all or comma-separated layer names");
    ovf_cmd->add_option("--widths", widths, "comma-separated accumulator widths");
    ovf_cmd->add_option("--seed", ovf_seed, "rng seed");
    ovf_cmd->add_option("--act-sigma", act_sigma, "activation sigma before quantization");
    ovf_cmd->add_option("--weight-sigma", weight_sigma, "weight sigma before quantization");
    ovf_cmd->add_flag("--signed-acts", signed_acts, "full-normal activations in [-128,127]");
    ovf_cmd->add_option("--batch", batch, "synthetic batch size")->check(CLI::PositiveNumber);
    ovf_cmd->add_option("--activations", acts_path, "int8 tensor file (overrides synthetic)");
    ovf_cmd->add_option("--weights", weights_path, "int4 tensor file (overrides synthetic)");
    ovf_cmd->add_option("--layer-name", layer_name, "label for file-based analysis");
    ovf_cmd->add_option("--format", ovf_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    ovf_cmd->add_option("--out", ovf_out, "output file (default stdout)");

    // sa-sim
    auto* sa_cmd = app.add_subcommand("sa-sim", "cycle-level systolic array simulation");
    int sm = 0, sk = 0, sn = 0, sa_rows = 4, sa_cols = 4;
    std::string pe_mode = "sym", acc_mode = "wrap", activity_path;
    std::uint64_t sa_seed = 1;
    std::string sa_format = "csv", sa_out;
    sa_cmd->add_option("-m", sm, "output rows")->required();
    sa_cmd->add_option("-k", sk, "reduction depth")->required();
    sa_cmd->add_option("-n", sn, "output cols")->required();
    sa_cmd->add_option("--rows", sa_rows, "array rows")->check(CLI::PositiveNumber);
    sa_cmd->add_option("--cols", sa_cols, "array cols")->check(CLI::PositiveNumber);
    sa_cmd->add_option("--pe-mode", pe_mode, "sym or asym")->check(CLI::IsMember({"sym", "asym"}));
    sa_cmd->add_option("--mode", acc_mode, "wrap, sticky or track")
        ->check(CLI::IsMember({"wrap", "sticky", "track"}));
    sa_cmd->add_option("--seed", sa_seed, "rng seed");
    sa_cmd->add_option("--activity", activity_path, "per-cycle activity CSV dump");
    sa_cmd->add_option("--format", sa_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sa_cmd->add_option("--out", sa_out, "output file (default stdout)");

    // pack
    auto* pack_cmd = app.add_subcommand("pack", "tensor file pack/unpack utility");
    std::string dtype, dims, pack_in, pack_out, inspect;
    pack_cmd->add_option("--dtype", dtype, "int8, int4, int16 or int32");
    pack_cmd->add_option("--dims", dims, "ROWSxCOLS");
    pack_cmd->add_option("--in", pack_in, "whitespace-separated values file");
    pack_cmd->add_option("--out", pack_out, "tensor file to write");
    pack_cmd->add_option("--inspect", inspect, "tensor file to dump");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (isa_cmd->parsed()) return run_isa_check(samples, seed);
        if (thr_cmd->parsed()) return run_throughput(m, k, n, rows, cols, format, out_path);
        if (ovf_cmd->parsed())
            return run_overflow(layers, widths, ovf_seed, act_sigma, weight_sigma,
                                signed_acts, batch, acts_path, weights_path, layer_name,
                                ovf_format, ovf_out);
        if (sa_cmd->parsed())
            return run_sa_sim(sm, sk, sn, sa_rows, sa_cols, pe_mode, acc_mode, sa_seed,
                              activity_path, sa_format, sa_out);
        if (pack_cmd->parsed()) return run_pack(dtype, dims, pack_in, pack_out, inspect);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
