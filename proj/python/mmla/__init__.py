"""int8 x int4 matrix MAC reference model: instruction semantics, tiled GEMM
kernels with instruction counters, an accumulator-overflow harness, and an
output-stationary systolic-array simulator."""

from ._mmla import (  # noqa: F401
    AsymGemmResult,
    ConvLayerSpec,
    GemmCounters,
    I4MatrixPacked,
    OverflowReport,
    Resnet18Layer,
    SaConfig,
    SaThroughput,
    SaTrace,
    SymGemmResult,
    SyntheticDistSpec,
    Tensor,
    ThroughputReport,
    __version__,
    ammla,
    analytic_cycles,
    analyze_layer,
    gemm_asymmetric,
    gemm_reference,
    gemm_symmetric,
    generate_synthetic,
    im2col,
    load_tensor,
    pack_int4,
    resnet18_layer_table,
    simulate,
    smmla,
    sticky_scan,
    sweep_widths,
    tensor_from_numpy,
    throughput_compare,
    throughput_report,
    unpack_int4,
    widen_int4_to_int8,
)

__all__ = [
    "AsymGemmResult",
    "ConvLayerSpec",
    "GemmCounters",
    "I4MatrixPacked",
    "OverflowReport",
    "Resnet18Layer",
    "SaConfig",
    "SaThroughput",
    "SaTrace",
    "SymGemmResult",
    "SyntheticDistSpec",
    "Tensor",
    "ThroughputReport",
    "ammla",
    "analytic_cycles",
    "analyze_layer",
    "gemm_asymmetric",
    "gemm_reference",
    "gemm_symmetric",
    "generate_synthetic",
    "im2col",
    "load_tensor",
    "pack_int4",
    "resnet18_layer_table",
    "simulate",
    "smmla",
    "sticky_scan",
    "sweep_widths",
    "tensor_from_numpy",
    "throughput_compare",
    "throughput_report",
    "unpack_int4",
    "widen_int4_to_int8",
]
