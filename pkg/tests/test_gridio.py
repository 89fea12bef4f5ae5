import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import array_shapes, arrays

from wigprop.gridio import GridFormatError, dumps, load, loads, save


def test_frozen_header_bytes():
    buf = dumps(np.zeros((2, 3), dtype=complex))
    expected = bytes.fromhex("57475244" "01000000" "01" "02" "0000"
                             "0200000000000000" "0300000000000000")
    assert buf[:len(expected)] == expected
    assert len(buf) == len(expected) + 6 * 16


def test_real_payload_layout():
    buf = dumps(np.array([1.5, -2.0]))
    assert buf[8] == 0 and buf[9] == 1
    assert np.frombuffer(buf[20:], "<f8").tolist() == [1.5, -2.0]


def test_roundtrip_file(tmp_path, rng):
    a = rng.normal(size=(4, 5)) + 1j * rng.normal(size=(4, 5))
    p = save(tmp_path / "a.wgrd", a)
    assert np.array_equal(load(p), a)


@pytest.mark.parametrize("buf", [b"WG", b"XXXX" + bytes(8), dumps(np.zeros(3))[:-1],
                                 b"WGRD" + (2).to_bytes(4, "little") + bytes(4)])
def test_malformed(buf):
    with pytest.raises(GridFormatError):
        loads(buf)


def test_bad_dtype():
    with pytest.raises(GridFormatError):
        dumps(np.array(["a"]))


@given(arrays(np.complex128, array_shapes(max_dims=4, max_side=5),
              elements=st.complex_numbers(allow_nan=False, allow_infinity=False)))
def test_roundtrip_property(a):
    assert np.array_equal(loads(dumps(a)), a)


@given(arrays(np.float64, array_shapes(max_dims=3, max_side=6),
              elements=st.floats(allow_nan=False)))
def test_real_roundtrip_property(a):
    b = loads(dumps(a))
    assert b.dtype == float and np.array_equal(b, a)
