import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dipolegate.errors import BasisMismatch, ConfigError, UnknownLabel, ZeroVector
from dipolegate.molecules import get_preset
from dipolegate.state import (
    HermitianOperator,
    LevelBasis,
    RegisterState,
    overlap,
    product_state,
    superpose,
)

BASIS = LevelBasis(("0", "1", "e"), ("0", "1", "e"))


def test_ordering_a_is_slow_index():
    assert BASIS.dim == 9
    assert BASIS.index("0", "0") == 0
    assert BASIS.index("0", "1") == 1
    assert BASIS.index("1", "0") == 3
    assert BASIS.index("e", "e") == 8
    for k in range(BASIS.dim):
        assert BASIS.index(*BASIS.labels(k)) == k
    assert BASIS.ket_labels()[5] == "|1e>"


def test_for_molecules():
    basis = LevelBasis.for_molecules(get_preset("NaCl"), get_preset("CO"))
    assert basis.dims == (3, 3)
    assert basis.index("e", "1") == 2 * 3 + 1
    assert LevelBasis(("0", "1"), ("0", "1", "e")).index("1", "e") == 5


def test_unknown_label():
    with pytest.raises(UnknownLabel):
        BASIS.index("2", "0")
    with pytest.raises(KeyError):
        product_state(BASIS, "0", "x")


def test_product_state_and_populations():
    s = product_state(BASIS, "1", "e")
    assert s.norm_squared == 1.0
    assert s.amplitude("1", "e") == 1.0
    assert s.level_population("A", "1") == 1.0
    assert s.level_population("B", "e") == 1.0
    assert s.level_population("B", "0") == 0.0
    with pytest.raises(ValueError):
        s.amplitudes[0] = 1.0


def test_superpose_normalises():
    bell = superpose([(1.0, product_state(BASIS, "0", "0")), (1j, product_state(BASIS, "1", "1"))])
    assert bell.norm_squared == pytest.approx(1.0, abs=1e-15)
    assert bell.amplitude("1", "1") == pytest.approx(1j / np.sqrt(2))
    assert bell.populations()[0, 0] == pytest.approx(0.5)


def test_superpose_errors():
    s = product_state(BASIS, "0", "0")
    with pytest.raises(ZeroVector):
        superpose([(1.0, s), (-1.0, s)])
    with pytest.raises(ZeroVector):
        superpose([])
    other = product_state(LevelBasis(("0", "1"), ("0", "1")), "0", "0")
    with pytest.raises(BasisMismatch):
        superpose([(1.0, s), (1.0, other)])
    with pytest.raises(BasisMismatch):
        overlap(s, other)


complex_st = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


@given(st.lists(complex_st, min_size=9, max_size=9), st.lists(complex_st, min_size=9, max_size=9), complex_st)
def test_overlap_sesquilinear(a, b, c):
    sa, sb = RegisterState(np.array(a), BASIS), RegisterState(np.array(b), BASIS)
    scaled = RegisterState(c * np.array(a), BASIS)
    assert overlap(scaled, sb) == pytest.approx(np.conj(c) * overlap(sa, sb), abs=1e-9)
    assert overlap(sb, sa) == pytest.approx(np.conj(overlap(sa, sb)), abs=1e-9)


def test_hermitian_operator_checks():
    h = np.diag(np.arange(9.0))
    op = HermitianOperator(h, BASIS)
    assert not op.has_decay
    np.testing.assert_array_equal(op.generator(), h)
    bad = h.astype(complex)
    bad[0, 1] = 1.0
    with pytest.raises(ConfigError):
        HermitianOperator(bad, BASIS)
    with pytest.raises(ConfigError):
        HermitianOperator(np.eye(4), BASIS)
    decaying = HermitianOperator(h, BASIS, np.full(9, 2.0))
    assert decaying.has_decay
    np.testing.assert_allclose(np.diag(decaying.generator()).imag, -1.0)
