#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mmla/overflow.hpp"
#include "mmla/systolic.hpp"

namespace py = pybind11;
using namespace mmla;

namespace {

template <typename T>
py::array_t<T> matrix_to_numpy(const Matrix<T>& m) {
    py::array_t<T> arr({m.rows, m.cols});
    auto buf = arr.template mutable_unchecked<2>();
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c) buf(r, c) = m(r, c);
    return arr;
}

template <typename T>
Matrix<T> numpy_to_matrix(const py::array_t<T, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2) throw ShapeError("expected a 2-D array");
    Matrix<T> m(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)));
    auto buf = arr.template unchecked<2>();
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c) m(r, c) = buf(r, c);
    return m;
}

using I8Array = py::array_t<std::int8_t, py::array::c_style | py::array::forcecast>;

I4MatrixPacked numpy_to_i4(const I8Array& arr) {
    if (arr.ndim() != 2) throw ShapeError("expected a 2-D array");
    auto buf = arr.unchecked<2>();
    std::vector<int> vals(static_cast<std::size_t>(arr.shape(0)) * arr.shape(1));
    std::size_t i = 0;
    for (py::ssize_t r = 0; r < arr.shape(0); ++r)
        for (py::ssize_t c = 0; c < arr.shape(1); ++c) vals[i++] = buf(r, c);
    return pack_int4(vals, static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)));
}

AccMode parse_mode(const std::string& mode) {
    if (mode == "wrap") return AccMode::Wrapping;
    if (mode == "sticky") return AccMode::SaturatingSticky;
    if (mode == "track") return AccMode::ExactTracking;
    throw ModeMismatchError("mode must be wrap, sticky or track: " + mode);
}

} // namespace

PYBIND11_MODULE(_mmla, m) {
    m.doc() = "int8 x int4 matrix MAC reference model";

    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<RangeError>(m, "RangeError", PyExc_ValueError);
    py::register_exception<BoundsError>(m, "BoundsError", PyExc_IndexError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<WidthError>(m, "WidthError", PyExc_ValueError);
    py::register_exception<ModeMismatchError>(m, "ModeMismatchError", PyExc_ValueError);

    py::class_<I4MatrixPacked>(m, "I4MatrixPacked")
        .def_readonly("rows", &I4MatrixPacked::rows)
        .def_readonly("cols", &I4MatrixPacked::cols)
        .def_property_readonly("packed_bytes",
                               [](const I4MatrixPacked& p) {
                                   return py::bytes(
                                       reinterpret_cast<const char*>(p.data.data()),
                                       p.data.size());
                               })
        .def("to_numpy", [](const I4MatrixPacked& p) {
            return matrix_to_numpy(widen_int4_to_int8(p));
        });

    m.def("pack_int4", &numpy_to_i4, py::arg("values"),
          "Pack a 2-D array of values in [-8, 7] into nibble storage.");
    m.def("unpack_int4",
          [](const I4MatrixPacked& p) { return matrix_to_numpy(widen_int4_to_int8(p)); },
          py::arg("m"));
    m.def("widen_int4_to_int8",
          [](const I4MatrixPacked& p, bool sign_extend) {
              return matrix_to_numpy(widen_int4_to_int8(
                  p, sign_extend ? Int4Extension::Sign : Int4Extension::Zero));
          },
          py::arg("m"), py::arg("sign_extend") = true);

    // instruction-level tiles
    m.def(
        "ammla",
        [](py::array_t<std::int16_t, py::array::c_style | py::array::forcecast> acc,
           const I8Array& a, const I8Array& w, const std::string& mode) {
            if (acc.ndim() != 2 || acc.shape(0) != 2 || acc.shape(1) != 4)
                throw ShapeError("acc must be 2x4");
            if (a.ndim() != 2 || a.shape(0) != 2 || a.shape(1) != 8)
                throw ShapeError("a must be 2x8");
            if (w.ndim() != 2 || w.shape(0) != 8 || w.shape(1) != 4)
                throw ShapeError("w must be 8x4");
            AccTile16 tile;
            auto abuf = acc.unchecked<2>();
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 4; ++j) {
                    tile.acc[i][j] = abuf(i, j);
                    tile.exact[i][j] = abuf(i, j);
                }
            OperandRegA ra;
            auto av = a.unchecked<2>();
            for (int i = 0; i < 2; ++i)
                for (int k = 0; k < 8; ++k) ra.lanes[i * 8 + k] = av(i, k);
            OperandRegB4 rb = extract_reg_b4(numpy_to_i4(w), 0, 0);
            AccTile16 out = ammla(tile, ra, rb, parse_mode(mode));

            I16Matrix values(2, 4);
            U8Matrix sticky(2, 4);
            U32Matrix events(2, 4);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 4; ++j) {
                    values(i, j) = out.acc[i][j];
                    sticky(i, j) = out.sticky[i][j];
                    events(i, j) = out.overflow_events[i][j];
                }
            return py::make_tuple(matrix_to_numpy(values), matrix_to_numpy(sticky),
                                  matrix_to_numpy(events));
        },
        py::arg("acc"), py::arg("a"), py::arg("w"), py::arg("mode") = "wrap",
        "One asymmetric matrix MAC instruction: acc(2x4 int16) += a(2x8 int8) @ w(8x4 int4).");

    m.def(
        "smmla",
        [](py::array_t<std::int32_t, py::array::c_style | py::array::forcecast> acc,
           const I8Array& a, const I8Array& b, const std::string& mode) {
            if (acc.ndim() != 2 || acc.shape(0) != 2 || acc.shape(1) != 2)
                throw ShapeError("acc must be 2x2");
            if (a.ndim() != 2 || a.shape(0) != 2 || a.shape(1) != 8)
                throw ShapeError("a must be 2x8");
            if (b.ndim() != 2 || b.shape(0) != 8 || b.shape(1) != 2)
                throw ShapeError("b must be 8x2");
            AccTile32 tile;
            auto abuf = acc.unchecked<2>();
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    tile.acc[i][j] = abuf(i, j);
                    tile.exact[i][j] = abuf(i, j);
                }
            OperandRegA ra;
            auto av = a.unchecked<2>();
            for (int i = 0; i < 2; ++i)
                for (int k = 0; k < 8; ++k) ra.lanes[i * 8 + k] = av(i, k);
            OperandRegB8 rb = extract_reg_b8(numpy_to_matrix<std::int8_t>(b), 0, 0);
            AccTile32 out = smmla(tile, ra, rb, parse_mode(mode));
            I32Matrix values(2, 2);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) values(i, j) = out.acc[i][j];
            return matrix_to_numpy(values);
        },
        py::arg("acc"), py::arg("a"), py::arg("b"), py::arg("mode") = "wrap",
        "One symmetric matrix MAC instruction: acc(2x2 int32) += a(2x8 int8) @ b(8x2 int8).");

    py::class_<GemmCounters>(m, "GemmCounters")
        .def_readonly("mac_instructions", &GemmCounters::mac_instructions)
        .def_readonly("load_ops", &GemmCounters::load_ops)
        .def_readonly("macs", &GemmCounters::macs)
        .def_readonly("output_elements", &GemmCounters::output_elements)
        .def("__repr__", [](const GemmCounters& c) {
            return "GemmCounters(mac_instructions=" + std::to_string(c.mac_instructions) +
                   ", load_ops=" + std::to_string(c.load_ops) +
                   ", macs=" + std::to_string(c.macs) +
                   ", output_elements=" + std::to_string(c.output_elements) + ")";
        });

    py::class_<SymGemmResult>(m, "SymGemmResult")
        .def_property_readonly("values",
                               [](const SymGemmResult& r) { return matrix_to_numpy(r.values); })
        .def_property_readonly("sticky",
                               [](const SymGemmResult& r) { return matrix_to_numpy(r.sticky); })
        .def_property_readonly(
            "overflow_events",
            [](const SymGemmResult& r) { return matrix_to_numpy(r.overflow_events); })
        .def_readonly("counters", &SymGemmResult::counters);

    py::class_<AsymGemmResult>(m, "AsymGemmResult")
        .def_property_readonly(
            "values", [](const AsymGemmResult& r) { return matrix_to_numpy(r.values); })
        .def_property_readonly(
            "sticky", [](const AsymGemmResult& r) { return matrix_to_numpy(r.sticky); })
        .def_property_readonly(
            "overflow_events",
            [](const AsymGemmResult& r) { return matrix_to_numpy(r.overflow_events); })
        .def_readonly("total_steps", &AsymGemmResult::total_steps)
        .def_readonly("overflow_steps", &AsymGemmResult::overflow_steps)
        .def_readonly("counters", &AsymGemmResult::counters);

    m.def(
        "gemm_reference",
        [](const I8Array& a, const I8Array& b) {
            return matrix_to_numpy(
                gemm_reference(numpy_to_matrix<std::int8_t>(a), numpy_to_matrix<std::int8_t>(b)));
        },
        py::arg("a"), py::arg("b"), "Exact int32 triple-loop product.");

    m.def(
        "gemm_symmetric",
        [](const I8Array& a, const I8Array& b, const std::string& mode) {
            return gemm_symmetric(numpy_to_matrix<std::int8_t>(a),
                                  numpy_to_matrix<std::int8_t>(b), parse_mode(mode));
        },
        py::arg("a"), py::arg("b"), py::arg("mode") = "wrap");

    m.def(
        "gemm_asymmetric",
        [](const I8Array& a, const I8Array& w, const std::string& mode) {
            return gemm_asymmetric(numpy_to_matrix<std::int8_t>(a), numpy_to_i4(w),
                                   parse_mode(mode));
        },
        py::arg("a"), py::arg("w"), py::arg("mode") = "wrap",
        "Tiled int8 x int4 GEMM with 16-bit accumulators; w holds values in [-8, 7].");

    py::class_<ConvLayerSpec>(m, "ConvLayerSpec")
        .def(py::init([](int c_in, int c_out, int kw, int kh, int in_w, int in_h, int stride,
                         int padding) {
                 return ConvLayerSpec{c_in, c_out, kw, kh, in_w, in_h, stride, padding};
             }),
             py::arg("c_in"), py::arg("c_out"), py::arg("kw"), py::arg("kh"), py::arg("in_w"),
             py::arg("in_h"), py::arg("stride") = 1, py::arg("padding") = 0)
        .def_readwrite("c_in", &ConvLayerSpec::c_in)
        .def_readwrite("c_out", &ConvLayerSpec::c_out)
        .def_readwrite("kw", &ConvLayerSpec::kw)
        .def_readwrite("kh", &ConvLayerSpec::kh)
        .def_readwrite("in_w", &ConvLayerSpec::in_w)
        .def_readwrite("in_h", &ConvLayerSpec::in_h)
        .def_readwrite("stride", &ConvLayerSpec::stride)
        .def_readwrite("padding", &ConvLayerSpec::padding)
        .def_property_readonly("reduction_depth", &ConvLayerSpec::reduction_depth)
        .def_property_readonly("out_w", &ConvLayerSpec::out_w)
        .def_property_readonly("out_h", &ConvLayerSpec::out_h);

    m.def(
        "im2col",
        [](const py::array_t<std::int8_t, py::array::c_style | py::array::forcecast>& input,
           const ConvLayerSpec& spec) {
            if (input.ndim() != 3) throw ShapeError("input must be (c, h, w)");
            std::span<const std::int8_t> chw(input.data(),
                                             static_cast<std::size_t>(input.size()));
            return matrix_to_numpy(im2col(chw, spec));
        },
        py::arg("input_chw"), py::arg("spec"));

    py::class_<ThroughputReport>(m, "ThroughputReport")
        .def_readonly("sym_instructions", &ThroughputReport::sym_instructions)
        .def_readonly("asym_instructions", &ThroughputReport::asym_instructions)
        .def_readonly("ratio", &ThroughputReport::ratio);

    m.def("throughput_report", &throughput_report, py::arg("m"), py::arg("k"), py::arg("n"));

    py::class_<OverflowReport>(m, "OverflowReport")
        .def_readonly("layer", &OverflowReport::layer)
        .def_readonly("accumulator_width", &OverflowReport::accumulator_width)
        .def_readonly("total_steps", &OverflowReport::total_steps)
        .def_readonly("overflow_steps", &OverflowReport::overflow_steps)
        .def_readonly("overflow_pct", &OverflowReport::overflow_pct)
        .def_readonly("reduction_depth", &OverflowReport::reduction_depth)
        .def("__repr__", [](const OverflowReport& r) {
            return "OverflowReport(layer='" + r.layer +
                   "', width=" + std::to_string(r.accumulator_width) +
                   ", overflow_pct=" + std::to_string(r.overflow_pct) + ")";
        });

    py::class_<SyntheticDistSpec>(m, "SyntheticDistSpec")
        .def(py::init<>())
        .def_readwrite("act_sigma", &SyntheticDistSpec::act_sigma)
        .def_readwrite("act_nonneg", &SyntheticDistSpec::act_nonneg)
        .def_readwrite("weight_sigma", &SyntheticDistSpec::weight_sigma)
        .def_readwrite("seed", &SyntheticDistSpec::seed);

    py::class_<Resnet18Layer>(m, "Resnet18Layer")
        .def_readonly("name", &Resnet18Layer::name)
        .def_readonly("spec", &Resnet18Layer::spec);

    m.def("resnet18_layer_table", &resnet18_layer_table);

    m.def(
        "analyze_layer",
        [](const std::string& name, const I8Array& acts, const I8Array& weights, int width) {
            return analyze_layer(name, numpy_to_matrix<std::int8_t>(acts),
                                 numpy_to_i4(weights), width);
        },
        py::arg("name"), py::arg("activations"), py::arg("weights"), py::arg("acc_width"));

    m.def(
        "sweep_widths",
        [](const std::string& name, const I8Array& acts, const I8Array& weights,
           const std::vector<int>& widths) {
            return sweep_widths(name, numpy_to_matrix<std::int8_t>(acts),
                                numpy_to_i4(weights), widths);
        },
        py::arg("name"), py::arg("activations"), py::arg("weights"), py::arg("widths"));

    m.def(
        "generate_synthetic",
        [](const SyntheticDistSpec& dist, const ConvLayerSpec& layer, int batch) {
            auto data = generate_synthetic(dist, layer, batch);
            return py::make_tuple(matrix_to_numpy(data.activations),
                                  matrix_to_numpy(widen_int4_to_int8(data.weights)));
        },
        py::arg("dist"), py::arg("layer"), py::arg("batch") = 1,
        "Returns (activations int8, weights int8 holding int4 values).");

    m.def(
        "sticky_scan",
        [](const py::array_t<std::int16_t, py::array::c_style | py::array::forcecast>& out) {
            return sticky_scan(numpy_to_matrix<std::int16_t>(out));
        },
        py::arg("outputs"));

    // tensor container
    py::class_<Tensor>(m, "Tensor")
        .def_property_readonly("dtype",
                               [](const Tensor& t) {
                                   const char* names[] = {"int8", "int4", "int16", "int32"};
                                   return std::string(names[static_cast<int>(t.dtype)]);
                               })
        .def_property_readonly("dims", [](const Tensor& t) { return t.dims; })
        .def("to_numpy",
             [](const Tensor& t) -> py::object {
                 switch (t.dtype) {
                     case DType::Int8: return matrix_to_numpy(t.to_i8());
                     case DType::Int4Packed:
                         return matrix_to_numpy(widen_int4_to_int8(t.to_i4()));
                     case DType::Int16: return matrix_to_numpy(t.to_i16());
                     case DType::Int32: return matrix_to_numpy(t.to_i32());
                 }
                 throw FormatError("unknown dtype");
             })
        .def("save", [](const Tensor& t, const std::string& path) { save_tensor(t, path); },
             py::arg("path"));

    m.def("load_tensor", &load_tensor, py::arg("path"));
    m.def(
        "tensor_from_numpy",
        [](const py::array& arr, const std::string& dtype) -> Tensor {
            if (dtype == "int8")
                return Tensor::from(numpy_to_matrix<std::int8_t>(I8Array::ensure(arr)));
            if (dtype == "int4") return Tensor::from(numpy_to_i4(I8Array::ensure(arr)));
            if (dtype == "int16")
                return Tensor::from(numpy_to_matrix<std::int16_t>(
                    py::array_t<std::int16_t, py::array::c_style | py::array::forcecast>::ensure(
                        arr)));
            if (dtype == "int32")
                return Tensor::from(numpy_to_matrix<std::int32_t>(
                    py::array_t<std::int32_t, py::array::c_style | py::array::forcecast>::ensure(
                        arr)));
            throw FormatError("dtype must be int8, int4, int16 or int32");
        },
        py::arg("array"), py::arg("dtype"));

    // systolic array
    py::class_<SaConfig>(m, "SaConfig")
        .def(py::init([](int rows, int cols, const std::string& pe_mode,
                         const std::string& mode, bool record_activity) {
                 SaConfig cfg;
                 cfg.rows = rows;
                 cfg.cols = cols;
                 cfg.pe_mode =
                     pe_mode == "asym" ? SaPeMode::AsymmetricDual : SaPeMode::Symmetric;
                 cfg.acc_mode = parse_mode(mode);
                 cfg.record_activity = record_activity;
                 return cfg;
             }),
             py::arg("rows") = 4, py::arg("cols") = 4, py::arg("pe_mode") = "sym",
             py::arg("mode") = "wrap", py::arg("record_activity") = false)
        .def_readwrite("rows", &SaConfig::rows)
        .def_readwrite("cols", &SaConfig::cols);

    py::class_<SaTrace>(m, "SaTrace")
        .def_readonly("cycles", &SaTrace::cycles)
        .def_readonly("macs_performed", &SaTrace::macs_performed)
        .def_readonly("overflow_events", &SaTrace::overflow_events)
        .def_readonly("passes", &SaTrace::passes)
        .def_property_readonly("output",
                               [](const SaTrace& t) -> py::object {
                                   if (t.pe_mode == SaPeMode::Symmetric)
                                       return matrix_to_numpy(t.out32);
                                   return matrix_to_numpy(t.out16);
                               })
        .def_property_readonly(
            "sticky", [](const SaTrace& t) { return matrix_to_numpy(t.sticky); })
        .def_readonly("active_pes_per_cycle", &SaTrace::active_pes_per_cycle);

    m.def(
        "simulate",
        [](const I8Array& a, const I8Array& b, const SaConfig& cfg) {
            if (cfg.pe_mode == SaPeMode::Symmetric)
                return simulate(numpy_to_matrix<std::int8_t>(a),
                                numpy_to_matrix<std::int8_t>(b), cfg);
            return simulate(numpy_to_matrix<std::int8_t>(a), numpy_to_i4(b), cfg);
        },
        py::arg("a"), py::arg("b"), py::arg("config"),
        "Cycle-level output-stationary simulation; b holds int4 values in asym mode.");

    m.def(
        "analytic_cycles",
        [](int m_, int k, int n, const SaConfig& cfg) { return analytic_cycles(m_, k, n, cfg); },
        py::arg("m"), py::arg("k"), py::arg("n"), py::arg("config"));

    py::class_<SaThroughput>(m, "SaThroughput")
        .def_readonly("sym_macs_per_cycle", &SaThroughput::sym_macs_per_cycle)
        .def_readonly("asym_macs_per_cycle", &SaThroughput::asym_macs_per_cycle)
        .def_readonly("ratio", &SaThroughput::ratio)
        .def_readonly("steady_state", &SaThroughput::steady_state)
        .def_readonly("sym_total_macs_per_cycle", &SaThroughput::sym_total_macs_per_cycle)
        .def_readonly("asym_total_macs_per_cycle", &SaThroughput::asym_total_macs_per_cycle)
        .def_readonly("total_ratio", &SaThroughput::total_ratio);

    m.def("throughput_compare", &throughput_compare, py::arg("m"), py::arg("k"), py::arg("n"),
          py::arg("rows"), py::arg("cols"));

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "dev";
#endif
}
