import os
import subprocess
import sys
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heavenly import _kernel_py

try:
    from heavenly import _kernel
except ImportError:
    _kernel = None

SLOT = 16
NVARS = 4
GUARD = sum(1 << (SLOT * i + SLOT - 1) for i in range(NVARS))

BACKENDS = [pytest.param(_kernel_py, id="python")]
BACKENDS.append(pytest.param(_kernel, id="compiled",
                             marks=pytest.mark.skipif(_kernel is None, reason="extension not built")))


def pack(exps):
    return sum(e << (SLOT * i) for i, e in enumerate(exps))


def unpack(m):
    return [(m >> (SLOT * i)) & 0xFFFF for i in range(NVARS)]


exponents = st.lists(st.integers(0, 4), min_size=NVARS, max_size=NVARS)
coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=4).filter(bool)
polys = st.dictionaries(exponents.map(pack), coeffs, max_size=6)


@settings(max_examples=100)
@given(polys, polys)
def test_backends_agree_on_ring_operations(a, b):
    if _kernel is None:
        pytest.skip("extension not built")
    for name in ("add", "sub", "mul"):
        assert getattr(_kernel, name)(a, b) == getattr(_kernel_py, name)(a, b)
    assert _kernel.neg(a) == _kernel_py.neg(a)
    assert _kernel.scale(a, Fraction(2, 3)) == _kernel_py.scale(a, Fraction(2, 3))


@pytest.mark.parametrize("k", BACKENDS)
@settings(max_examples=60)
@given(a=polys, b=polys.filter(bool))
def test_exact_division_inverts_multiplication(k, a, b):
    assert k.div_exact(k.mul(a, b), b, GUARD) == a


@pytest.mark.parametrize("k", BACKENDS)
def test_inexact_division_returns_none(k):
    x, y = pack([1, 0, 0, 0]), pack([0, 1, 0, 0])
    a = {x: Fraction(1), 0: Fraction(1)}   # x + 1
    b = {y: Fraction(1)}                    # y
    assert k.div_exact(a, b, GUARD) is None


@pytest.mark.parametrize("k", BACKENDS)
@settings(max_examples=60)
@given(a=polys, var=st.integers(0, NVARS - 1))
def test_diff_matches_exponent_arithmetic(k, a, var):
    want = {}
    for m, c in a.items():
        e = unpack(m)
        if e[var]:
            n = e[var]
            e[var] -= 1
            want[pack(e)] = want.get(pack(e), 0) + c * n
    assert k.diff(a, SLOT * var) == {m: c for m, c in want.items() if c}


@pytest.mark.parametrize("k", BACKENDS)
@settings(max_examples=60)
@given(st.lists(exponents, min_size=1, max_size=5))
def test_mono_min_is_slotwise_minimum(k, ms):
    want = pack([min(col) for col in zip(*ms)])
    assert k.mono_min([pack(e) for e in ms], GUARD) == want


def backend_in_subprocess(env_extra):
    env = dict(os.environ)
    env.pop("HEAVENLY_PURE_PYTHON", None)
    env.update(env_extra)
    out = subprocess.run([sys.executable, "-c", "import heavenly; print(heavenly.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    return out.stdout.strip()


def test_environment_forces_python_backend():
    assert backend_in_subprocess({"HEAVENLY_PURE_PYTHON": "1"}) == "python"


@pytest.mark.skipif(_kernel is None, reason="extension not built")
def test_compiled_backend_is_default_when_built():
    assert backend_in_subprocess({}) == "compiled"
