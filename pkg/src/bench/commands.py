"""Implementations of the CLI subcommands. Each takes parsed arguments and returns an exit code."""
import argparse
import logging
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from config import EXIT_OK, EXIT_VERIFY_MISMATCH, FORMATS, KERNELS
from bench.formats import CODECS, encode_as, load_encoded
from encoders import dcsr
from encoders.footprint import FootprintBreakdown
from engine.vector_engine import VectorEngine
from errors import FormatLimitError
from kernels.dcsr_kernels import dcsr_spmm_ib, dcsr_spmm_vb, dcsr_spmv
from kernels.dense import assert_matches_oracle, dense_spmm, dense_spmm_reference
from kernels.requant import RequantSpec
from kernels.ri_kernels import ri_spmm
from matrix.binary import load_matrix, store_dense_binary
from matrix.dense import DenseMatrixI8, QuantizationParams
from matrix.generator import GeneratorSpec, generate_activations, generate_uniform_sparse
from matrix.market import store_matrix_market
from reporting.report import KernelResult, Report, SweepPoint, write_report

logger = logging.getLogger(__name__)


def _matrix_from_args(args: argparse.Namespace, path: Optional[str]) -> Tuple[DenseMatrixI8, Dict]:
    """Load the matrix at ``path`` or generate one from --rows/--cols/--sparsity/--seed."""
    if path:
        m = load_matrix(path)
        descriptor = {"source": str(path)}
    else:
        if args.rows is None or args.cols is None or args.sparsity is None:
            raise ValueError("Give an input file or all of --rows, --cols and --sparsity")
        spec = GeneratorSpec(args.rows, args.cols, args.sparsity, args.seed)
        m = generate_uniform_sparse(spec)
        descriptor = {"source": None, "sparsity": spec.sparsity, "seed": spec.seed}
    descriptor.update({"rows": m.rows, "cols": m.cols, "nnz": m.nnz})
    return m, descriptor


def cmd_generate(args: argparse.Namespace) -> int:
    """Write a synthetic pruned matrix and print its non-zero count."""
    spec = GeneratorSpec(args.rows, args.cols, args.sparsity, args.seed)
    m = generate_uniform_sparse(spec)
    if args.binary:
        store_dense_binary(m, args.out)
    else:
        store_matrix_market(m, args.out)
    print(m.nnz)
    return EXIT_OK


def cmd_encode(args: argparse.Namespace) -> int:
    """Encode a matrix file, write the container and emit its footprint report."""
    m = load_matrix(args.input)
    encoded = encode_as(m, args.format, args.group_size, args.ri_bits)
    if args.format == "dcsr":
        blob = dcsr.serialize(encoded, with_crc=args.crc)
    else:
        blob = CODECS[args.format].serialize(encoded)
    Path(args.out).write_bytes(blob)
    logger.info(f"Wrote {args.format} container of {len(blob)} bytes to {args.out}")

    fp = CODECS[args.format].footprint(encoded)
    descriptor = {"source": str(args.input), "rows": m.rows, "cols": m.cols, "nnz": m.nnz}
    report = Report("encode", descriptor, footprints=[fp])
    write_report(report, args.report, args.report_out)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    """
    Decode an encoded file and compare it elementwise to the source matrix.

    Returns:
        0 when identical, 1 on the first mismatch (printed to stdout)
    """
    m = load_matrix(args.input)
    fmt, encoded = load_encoded(args.encoded)
    decoded = CODECS[fmt].decode(encoded)

    if (decoded.rows, decoded.cols) != (m.rows, m.cols):
        print(f"MISMATCH shape: source {m.rows}x{m.cols}, decoded {decoded.rows}x{decoded.cols}")
        return EXIT_VERIFY_MISMATCH
    diff = np.argwhere(m.data != decoded.data)
    if diff.size:
        r, c = (int(i) for i in diff[0])
        print(f"MISMATCH at ({r}, {c}): source {m.data[r, c]}, decoded {decoded.data[r, c]}")
        logger.error(f"{fmt} container differs from source in {len(diff)} entries")
        return EXIT_VERIFY_MISMATCH

    print(f"OK {fmt} {m.rows}x{m.cols} nnz={m.nnz}")
    return EXIT_OK


def _footprints(
    m: DenseMatrixI8, formats, group_size: int, ri_bits: int
) -> Tuple[List[FootprintBreakdown], Dict[str, str]]:
    """Footprints of ``m`` in each format; formats that hit a field-width limit go to skipped."""
    footprints, skipped = [], {}
    for fmt in formats:
        try:
            encoded = encode_as(m, fmt, group_size, ri_bits)
        except FormatLimitError as e:
            logger.warning(f"Skipping {fmt}: {e}")
            skipped[fmt] = str(e)
            continue
        fp = CODECS[fmt].footprint(encoded)
        logger.info(f"{fmt}: {fp.total_bytes} bytes, compression ratio {fp.compression_ratio:.3f}")
        footprints.append(fp)
    return footprints, skipped


def _sweep(args: argparse.Namespace, formats) -> Report:
    if args.input:
        raise ValueError("--sweep generates its own matrices and cannot be combined with --in")
    if args.rows is None or args.cols is None:
        raise ValueError("--sweep needs --rows and --cols")

    descriptor = {"source": None, "rows": args.rows, "cols": args.cols, "seed": args.seed,
                  "sparsities": list(args.sweep)}
    report = Report("footprint", descriptor)
    for sparsity in args.sweep:
        m = generate_uniform_sparse(GeneratorSpec(args.rows, args.cols, sparsity, args.seed))
        logger.info(f"Sparsity {sparsity}: {m.nnz} non-zeros")
        footprints, skipped = _footprints(m, formats, args.group_size, args.ri_bits)
        report.sweep.append(SweepPoint(sparsity, m.nnz, footprints, skipped))
    return report


def cmd_footprint(args: argparse.Namespace) -> int:
    """Report the footprint of one matrix, or of a sparsity sweep, in every requested format."""
    formats = FORMATS if args.all or not args.format else args.format
    if args.sweep:
        report = _sweep(args, formats)
    else:
        m, descriptor = _matrix_from_args(args, args.input)
        report = Report("footprint", descriptor)
        report.footprints, report.skipped = _footprints(m, formats, args.group_size, args.ri_bits)

    write_report(report, args.report, args.report_out)
    return EXIT_OK


def _kernel_runner(
    kernel: str, W: DenseMatrixI8, group_size: int, ri_bits: int
) -> Tuple[Optional[object], Callable]:
    """Encode W for ``kernel`` once and return (encoded, run(A, x_zp, rq, engine))."""
    if kernel == "dense":
        return None, lambda A, zp, rq, e: dense_spmm(W, A, zp, None, rq, e)
    if kernel == "ri":
        ri = encode_as(W, "ri", ri_bits=ri_bits)
        return ri, lambda A, zp, rq, e: ri_spmm(ri, A, zp, None, rq, e)

    d = encode_as(W, "dcsr", group_size=group_size)
    if kernel == "dcsr-vb":
        return d, lambda A, zp, rq, e: dcsr_spmm_vb(d, A, zp, None, rq, e)
    if kernel == "dcsr-ib":
        return d, lambda A, zp, rq, e: dcsr_spmm_ib(d, A, zp, None, rq, e)

    def spmv_per_pixel(A, zp, rq, e):
        return np.stack([dcsr_spmv(d, A[p], zp, None, rq, e) for p in range(A.shape[0])])

    return d, spmv_per_pixel


def cmd_bench(args: argparse.Namespace) -> int:
    """
    Run kernels on the vector engine, check each against the dense oracle and report counters.

    Raises:
        OracleMismatchError: A kernel output differs from the oracle; no report is written
    """
    W, descriptor = _matrix_from_args(args, args.weights)
    if args.activations:
        A = load_matrix(args.activations).data
        descriptor["activations"] = str(args.activations)
    else:
        A = generate_activations(args.pixels, W.cols, args.seed + 1).data
        descriptor["activations"] = None
    descriptor["pixels"] = int(A.shape[0])

    quant = QuantizationParams(
        input_zero_point=args.input_zero_point,
        output_zero_point=args.output_zero_point,
        multiplier=args.multiplier,
        shift=args.shift,
    )
    rq: Optional[RequantSpec] = None if args.raw else quant.requant_spec()
    oracle = dense_spmm_reference(W, A, quant.input_zero_point, None, rq)

    report = Report("bench", descriptor)
    kernels: List[str] = args.kernel or list(KERNELS)
    for kernel in kernels:
        encoded, run = _kernel_runner(kernel, W, args.group_size, args.ri_bits)
        if encoded is not None:
            fmt = "ri" if kernel == "ri" else "dcsr"
            if all(fp.format != fmt for fp in report.footprints):
                report.footprints.append(CODECS[fmt].footprint(encoded))

        durations, engine = [], None
        for _ in range(args.repeat):
            engine = VectorEngine(args.group_size)
            start = time.perf_counter()
            out = run(A, quant.input_zero_point, rq, engine)
            durations.append(time.perf_counter() - start)
            assert_matches_oracle(kernel, oracle, out)

        counters = engine.counters.snapshot()
        logger.info(f"{kernel}: oracle ok, {counters['mac_lanes']} MAC lanes, {min(durations):.3f}s")
        report.kernels.append(KernelResult(kernel, int(A.shape[0]), counters, durations))

    write_report(report, args.report, args.report_out)
    return EXIT_OK
