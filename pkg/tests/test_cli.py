import csv
import json

import numpy as np
import pytest

import bench.commands as commands
from main import main
from matrix.binary import load_matrix
from matrix.dense import DenseMatrixI8
from matrix.market import store_matrix_market
from reporting.report import flatten_report


def run_json(capsys, argv):
    code = main(argv)
    assert code == 0
    return json.loads(capsys.readouterr().out)


@pytest.fixture
def example_file(tmp_path, example_row_matrix):
    path = tmp_path / "example.mtx"
    store_matrix_market(example_row_matrix, path)
    return path


class TestGenerate:
    def test_dense_matrix(self, tmp_path, capsys):
        out = tmp_path / "m.mtx"
        assert main(["gen", "--rows", "4", "--cols", "4", "--sparsity", "0", "--out", str(out)]) == 0
        assert capsys.readouterr().out.strip() == "16"
        assert load_matrix(out).nnz == 16

    def test_pointwise_layer_count(self, tmp_path, capsys):
        out = tmp_path / "m.bin"
        argv = ["gen", "--rows", "276", "--cols", "276", "--sparsity", "0.9", "--seed", "7",
                "--out", str(out), "--binary"]
        assert main(argv) == 0
        assert capsys.readouterr().out.strip() == "7618"
        assert out.read_bytes()[:4] == b"DMI8"
        assert load_matrix(out).nnz == 7618

    def test_invalid_sparsity(self, tmp_path):
        argv = ["gen", "--rows", "4", "--cols", "4", "--sparsity", "1.5", "--out", str(tmp_path / "m")]
        assert main(argv) == 2

    def test_missing_flag(self, tmp_path):
        assert main(["gen", "--rows", "4", "--out", str(tmp_path / "m")]) == 2


class TestEncode:
    def test_dcsr_container_and_report(self, tmp_path, capsys, example_file, golden_bytes):
        out = tmp_path / "example.dcsr"
        report = run_json(capsys, ["encode", "--in", str(example_file), "--format", "dcsr",
                                   "--group-size", "4", "--out", str(out)])
        assert out.read_bytes() == golden_bytes
        fp = report["footprints"]["dcsr"]
        assert fp["values_bytes"] == 6
        assert fp["total_bytes"] == 32
        assert report["command"] == "encode"
        assert report["input"]["nnz"] == 6

    def test_crc_trailer(self, tmp_path, capsys, example_file):
        out = tmp_path / "example.dcsr"
        run_json(capsys, ["encode", "--in", str(example_file), "--group-size", "4", "--crc",
                          "--out", str(out)])
        assert len(out.read_bytes()) == 72

    def test_csr(self, tmp_path, capsys, small_matrix):
        source = tmp_path / "small.mtx"
        store_matrix_market(small_matrix, source)
        report = run_json(capsys, ["encode", "--in", str(source), "--format", "csr",
                                   "--out", str(tmp_path / "small.csr")])
        assert report["footprints"]["csr"]["total_bytes"] == 9

    def test_unknown_format(self, tmp_path, example_file):
        argv = ["encode", "--in", str(example_file), "--format", "coo", "--out", str(tmp_path / "x")]
        assert main(argv) == 2

    def test_missing_input(self, tmp_path):
        argv = ["encode", "--in", str(tmp_path / "absent.mtx"), "--out", str(tmp_path / "x")]
        assert main(argv) == 2


class TestVerify:
    @pytest.mark.parametrize("fmt", ["dcsr", "csr", "bcsr", "ri"])
    def test_identical(self, tmp_path, capsys, fmt):
        source = tmp_path / "m.mtx"
        main(["gen", "--rows", "20", "--cols", "50", "--sparsity", "0.8", "--out", str(source)])
        encoded = tmp_path / f"m.{fmt}"
        main(["encode", "--in", str(source), "--format", fmt, "--out", str(encoded)])
        capsys.readouterr()

        assert main(["verify", "--in", str(source), "--encoded", str(encoded)]) == 0
        assert capsys.readouterr().out.startswith(f"OK {fmt} 20x50")

    def test_mismatch(self, tmp_path, capsys, example_row_matrix):
        source = tmp_path / "m.mtx"
        store_matrix_market(example_row_matrix, source)
        encoded = tmp_path / "m.dcsr"
        main(["encode", "--in", str(source), "--group-size", "4", "--out", str(encoded)])

        changed = example_row_matrix.data.copy()
        changed[0, 9] = -4
        store_matrix_market(DenseMatrixI8(1, 16, changed), source)
        capsys.readouterr()

        assert main(["verify", "--in", str(source), "--encoded", str(encoded)]) == 1
        assert capsys.readouterr().out.strip() == "MISMATCH at (0, 9): source -4, decoded 4"

    def test_not_a_container(self, tmp_path, example_file):
        assert main(["verify", "--in", str(example_file), "--encoded", str(example_file)]) == 2

    def test_corrupt_container(self, tmp_path, example_file, golden_bytes):
        encoded = tmp_path / "m.dcsr"
        encoded.write_bytes(golden_bytes[:-8])
        assert main(["verify", "--in", str(example_file), "--encoded", str(encoded)]) == 2


class TestFootprint:
    def test_selected_formats(self, capsys):
        report = run_json(capsys, ["footprint", "--rows", "16", "--cols", "32", "--sparsity", "0",
                                   "--format", "csr", "--format", "bcsr"])
        assert set(report["footprints"]) == {"csr", "bcsr"}
        assert report["input"]["nnz"] == 512

    def test_dense_matrix_does_not_compress(self, capsys):
        report = run_json(capsys, ["footprint", "--rows", "16", "--cols", "32", "--sparsity", "0",
                                   "--format", "dcsr"])
        assert report["footprints"]["dcsr"]["compression_ratio"] < 1

    def test_all_zero_matrix(self, tmp_path, capsys):
        source = tmp_path / "zeros.mtx"
        store_matrix_market(DenseMatrixI8.zeros(4, 8), source)
        report = run_json(capsys, ["footprint", "--in", str(source), "--format", "dcsr"])
        fp = report["footprints"]["dcsr"]
        parts = fp["components"]
        assert fp["values_bytes"] == 0 and fp["padding_bytes"] == 0
        assert fp["metadata_bytes"] == parts["row_ptr"] + parts["mask_ptr"] + parts["slopes"]

    def test_format_limit_is_skipped(self, capsys):
        report = run_json(capsys, ["footprint", "--rows", "300", "--cols", "300", "--sparsity", "0",
                                   "--format", "csr"])
        assert report["footprints"] == {}
        assert "csr" in report["skipped"]

    def test_needs_a_matrix(self):
        assert main(["footprint", "--all"]) == 2

    def test_sweep(self, capsys):
        report = run_json(capsys, ["footprint", "--rows", "24", "--cols", "64", "--seed", "3",
                                   "--sweep", "0.5,0.8,0.95", "--format", "dcsr", "--format", "csr"])
        points = report["sweep"]
        assert [p["sparsity"] for p in points] == [0.5, 0.8, 0.95]
        assert report["input"]["sparsities"] == [0.5, 0.8, 0.95]
        assert points[0]["nnz"] > points[1]["nnz"] > points[2]["nnz"]
        assert all(set(p["footprints"]) == {"dcsr", "csr"} for p in points)
        assert report["footprints"] == {}
        for p in points:
            assert p["footprints"]["csr"]["total_bytes"] == p["nnz"] * 3 + 25 * 2

    def test_sweep_default_levels(self, capsys):
        report = run_json(capsys, ["footprint", "--rows", "8", "--cols", "32", "--sweep",
                                   "--format", "ri"])
        assert [p["sparsity"] for p in report["sweep"]] == [0.7, 0.75, 0.8, 0.85, 0.9, 0.95]

    def test_sweep_skips_per_point(self, capsys):
        report = run_json(capsys, ["footprint", "--rows", "300", "--cols", "300", "--sweep", "0,0.9",
                                   "--format", "csr"])
        dense_point, sparse_point = report["sweep"]
        assert "csr" in dense_point["skipped"] and dense_point["footprints"] == {}
        assert sparse_point["skipped"] == {} and "csr" in sparse_point["footprints"]

    def test_sweep_csv_keys(self, capsys):
        assert main(["footprint", "--rows", "8", "--cols", "32", "--sweep", "0.5,0.9",
                     "--format", "csr", "--report", "csv"]) == 0
        rows = dict(csv.reader(capsys.readouterr().out.splitlines()))
        assert rows["sweep.0.sparsity"] == "0.5"
        assert rows["sweep.1.sparsity"] == "0.9"
        assert "sweep.1.footprints.csr.total_bytes" in rows

    @pytest.mark.parametrize("argv", [
        ["--in", "layer.mtx", "--rows", "8", "--cols", "8", "--sweep", "0.5"],
        ["--rows", "8", "--sweep", "0.5"],
        ["--rows", "8", "--cols", "8", "--sweep", "0.5,x"],
        ["--rows", "8", "--cols", "8", "--sweep", "0.5,1.5"],
    ], ids=["with-input", "missing-cols", "not-a-number", "out-of-range"])
    def test_sweep_usage_errors(self, argv):
        assert main(["footprint", *argv]) == 2

    @pytest.mark.slow
    def test_ordering_on_pointwise_layer(self, capsys):
        report = run_json(capsys, ["footprint", "--rows", "276", "--cols", "276", "--sparsity", "0.9",
                                   "--seed", "7", "--all"])
        totals = {fmt: fp["total_bytes"] for fmt, fp in report["footprints"].items()}
        assert set(totals) == {"dcsr", "csr", "bcsr", "ri"}
        assert totals["dcsr"] < totals["csr"] < totals["bcsr"]
        assert report["footprints"]["csr"]["total_bytes"] == 7618 * 3 + 277 * 2


class TestBench:
    SHAPE = ["--rows", "8", "--cols", "40", "--sparsity", "0.8", "--pixels", "3"]

    def test_all_kernels_match_oracle(self, capsys):
        report = run_json(capsys, ["bench", *self.SHAPE])
        assert set(report["kernels"]) == {"dense", "dcsr-vb", "dcsr-ib", "dcsr-spmv", "ri"}
        assert all(k["oracle"] == "ok" for k in report["kernels"].values())
        assert set(report["footprints"]) == {"dcsr", "ri"}
        assert report["input"]["pixels"] == 3

        counters = {name: k["counters"] for name, k in report["kernels"].items()}
        assert counters["dcsr-vb"]["mac_lanes"] == counters["dense"]["mac_lanes"] == 8 * 40 * 3
        assert counters["dcsr-ib"]["mac_lanes"] < counters["dcsr-vb"]["mac_lanes"]

    def test_raw_accumulators_and_repeat(self, capsys):
        report = run_json(capsys, ["bench", *self.SHAPE, "--raw", "--repeat", "2",
                                   "--kernel", "dcsr-ib", "--input-zero-point", "5"])
        assert list(report["kernels"]) == ["dcsr-ib"]
        assert len(report["kernels"]["dcsr-ib"]["durations_s"]) == 2

    def test_weights_and_activations_from_files(self, tmp_path, capsys):
        weights, activations = tmp_path / "w.mtx", tmp_path / "a.mtx"
        main(["gen", "--rows", "6", "--cols", "24", "--sparsity", "0.7", "--out", str(weights)])
        main(["gen", "--rows", "2", "--cols", "24", "--sparsity", "0", "--out", str(activations)])
        capsys.readouterr()
        report = run_json(capsys, ["bench", "--weights", str(weights), "--activations", str(activations),
                                   "--group-size", "8"])
        assert report["input"]["pixels"] == 2
        assert len(report["kernels"]) == 5

    def test_activation_width_mismatch(self, tmp_path):
        activations = tmp_path / "a.mtx"
        main(["gen", "--rows", "2", "--cols", "7", "--sparsity", "0", "--out", str(activations)])
        assert main(["bench", *self.SHAPE, "--activations", str(activations)]) == 2

    def test_csv_matches_json(self, tmp_path, capsys):
        json_out, csv_out = tmp_path / "r.json", tmp_path / "r.csv"
        assert main(["bench", *self.SHAPE, "--report-out", str(json_out)]) == 0
        assert main(["bench", *self.SHAPE, "--report", "csv", "--report-out", str(csv_out)]) == 0

        def comparable(flat):
            return {k: str(v) for k, v in flat.items()
                    if k != "generated_at" and ".durations_s." not in k}

        from_json = comparable(flatten_report(json.loads(json_out.read_text())))
        with open(csv_out, newline="") as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["key", "value"]
        from_csv = comparable(dict(rows[1:]))
        assert from_csv == from_json

    def test_oracle_mismatch_exit_code(self, capsys, monkeypatch):
        def broken(d, A, zp, bias, rq, engine):
            return np.zeros((A.shape[0], d.rows), dtype=np.int64) + 12345

        monkeypatch.setattr(commands, "dcsr_spmm_ib", broken)
        code = main(["bench", *self.SHAPE, "--raw", "--kernel", "dcsr-ib"])
        assert code == 3
        assert capsys.readouterr().out == ""
