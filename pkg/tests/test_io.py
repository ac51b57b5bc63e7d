import struct

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fbmbound import io
from fbmbound.errors import DomainError, FormatError

finite_matrices = arrays(
    np.float64,
    st.tuples(st.integers(1, 20), st.integers(1, 6)),
    elements=st.floats(allow_nan=False, allow_infinity=False),
)
tmp_settings = settings(max_examples=40, suppress_health_check=[HealthCheck.function_scoped_fixture])


def raw_log(rows, cols, payload, magic=b"TRJL", version=1, dtype=1, reserved=0):
    return struct.pack("<4sBBHQQ", magic, version, dtype, reserved, rows, cols) + payload


class TestBinaryLog:
    @given(m=finite_matrices)
    @tmp_settings
    def test_round_trip_bit_exact(self, tmp_path, m):
        path = tmp_path / "m.trjl"
        io.write_log(m, path)
        back = io.read_log(path)
        assert back.shape == m.shape
        assert back.tobytes() == m.tobytes()

    def test_float32_quantized(self, tmp_path):
        m = np.random.default_rng(0).normal(size=(5, 3))
        io.write_log(m, tmp_path / "m.trjl", dtype=0)
        np.testing.assert_array_equal(io.read_log(tmp_path / "m.trjl"), m.astype(np.float32).astype(np.float64))

    def test_file_size(self, tmp_path):
        io.write_log(np.zeros((2, 3)), tmp_path / "z.trjl")
        assert (tmp_path / "z.trjl").stat().st_size == 24 + 48

    def test_header_layout(self, tmp_path):
        io.write_log(np.arange(6.0).reshape(2, 3), tmp_path / "a.trjl")
        raw = (tmp_path / "a.trjl").read_bytes()
        assert raw[:4] == b"TRJL"
        assert raw[4] == 1 and raw[5] == 1
        assert raw[6:8] == b"\x00\x00"
        assert int.from_bytes(raw[8:16], "little") == 2
        assert int.from_bytes(raw[16:24], "little") == 3
        np.testing.assert_array_equal(np.frombuffer(raw[24:], "<f8"), np.arange(6.0))

    def test_truncated_payload(self, tmp_path):
        io.write_log(np.ones((4, 4)), tmp_path / "t.trjl")
        raw = (tmp_path / "t.trjl").read_bytes()
        (tmp_path / "t.trjl").write_bytes(raw[:-5])
        with pytest.raises(FormatError, match="payload short") as info:
            io.read_log(tmp_path / "t.trjl")
        assert info.value.field == "payload"

    @pytest.mark.parametrize(
        "blob,field",
        [
            (b"TRJ", "header"),
            (raw_log(1, 1, b"\0" * 8, magic=b"TRJX"), "magic"),
            (raw_log(1, 1, b"\0" * 8, version=2), "version"),
            (raw_log(1, 1, b"\0" * 8, dtype=7), "dtype"),
            (raw_log(1, 1, b"\0" * 8, reserved=1), "reserved"),
            (raw_log(1, 1, b"\0" * 9), "payload"),
            (raw_log(1, 2, np.array([1.0, np.nan]).tobytes()), "payload"),
            (raw_log(1, 1, np.array([np.inf]).tobytes()), "payload"),
        ],
    )
    def test_corruption_named(self, tmp_path, blob, field):
        (tmp_path / "c.trjl").write_bytes(blob)
        with pytest.raises(FormatError) as info:
            io.read_log(tmp_path / "c.trjl")
        assert info.value.field == field

    def test_non_finite_write_rejected(self, tmp_path):
        with pytest.raises(DomainError):
            io.write_log(np.array([[np.nan]]), tmp_path / "n.trjl")

    def test_vector_written_as_column(self, tmp_path):
        io.write_log(np.arange(4.0), tmp_path / "v.trjl")
        assert io.read_log(tmp_path / "v.trjl").shape == (4, 1)


class TestCsvLog:
    @given(m=finite_matrices)
    @tmp_settings
    def test_round_trip(self, tmp_path, m):
        io.write_log(m, tmp_path / "m.csv")
        np.testing.assert_array_equal(io.read_log(tmp_path / "m.csv"), m)

    def test_header(self, tmp_path):
        io.write_log(np.zeros((1, 3)), tmp_path / "h.csv")
        assert (tmp_path / "h.csv").read_text().splitlines()[0] == "c0,c1,c2"

    @pytest.mark.parametrize("text", ["x,y\n1,2\n", "c0,c1\n1\n", "c0\nabc\n", "c0\nnan\n"])
    def test_malformed(self, tmp_path, text):
        (tmp_path / "b.csv").write_text(text)
        with pytest.raises(FormatError):
            io.read_log(tmp_path / "b.csv")


class TestWeights:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        layers = [rng.normal(size=(2, 16)), rng.normal(size=(16, 3))]
        io.write_weights(layers, tmp_path / "w.txt")
        back = io.read_weights(tmp_path / "w.txt")
        for a, b in zip(layers, back):
            np.testing.assert_array_equal(a, b)

    def test_header_lines(self, tmp_path):
        io.write_weights([np.eye(2)], tmp_path / "w.txt")
        assert (tmp_path / "w.txt").read_text().splitlines()[0] == "layer 0 2 2"

    @pytest.mark.parametrize("text", ["weights 0 1 1\n1\n", "layer 0 2 1\n1\n", "layer 0 1 2\n1\n"])
    def test_malformed(self, tmp_path, text):
        (tmp_path / "w.txt").write_text(text)
        with pytest.raises(FormatError):
            io.read_weights(tmp_path / "w.txt")


class TestKeyValue:
    def test_round_trip(self, tmp_path):
        io.write_kv({"a": 1, "b": 0.1, "c": None, "d": True}, tmp_path / "s.txt")
        assert io.read_kv(tmp_path / "s.txt") == {"a": "1", "b": "0.1", "c": "absent", "d": "true"}

    def test_float_repr_is_exact(self):
        x = 0.1 + 0.2
        assert float(io.format_value(x)) == x
        assert io.format_value(np.float64(x)) == repr(x)

    def test_malformed(self, tmp_path):
        (tmp_path / "s.txt").write_text("no separator\n")
        with pytest.raises(FormatError):
            io.read_kv(tmp_path / "s.txt")
