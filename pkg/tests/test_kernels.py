import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from readlab import _kernels_py, kernels

compiled = pytest.importorskip("readlab._kernels")

floats = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@given(arrays(np.float64, (7, 3), elements=floats), arrays(np.float64, (5, 3), elements=floats),
       arrays(np.float64, 5, elements=st.floats(0, 1)))
def test_read_norm_backends_agree(X, V, r):
    np.testing.assert_allclose(compiled.read_norm_batch(X, V, r),
                               _kernels_py.read_norm_batch(X, V, r), rtol=1e-12, atol=1e-12)


@given(arrays(np.float64, (20, 4), elements=floats), arrays(np.float64, (6, 4), elements=floats))
def test_covering_radius_backends_agree(mesh, dirs):
    assert compiled.covering_radius(mesh, dirs) == pytest.approx(
        _kernels_py.covering_radius(mesh, dirs), rel=1e-12, abs=1e-12)


@given(arrays(np.float64, (6, 4), elements=floats), arrays(np.float64, 4, elements=floats))
def test_l1_distances_backends_agree(dirs, center):
    np.testing.assert_allclose(compiled.l1_distances(dirs, center),
                               _kernels_py.l1_distances(dirs, center), rtol=1e-12, atol=1e-12)


def test_read_norm_known_value():
    X = np.array([[1.0, 1.0]])
    V = np.eye(2)
    r = np.array([0.25, 0.125])
    assert kernels.read_norm_batch(X, V, r)[0] == 1.375


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")
