import os
import subprocess
import sys

import numpy as np
import pytest

import stefanst.kernels as kernels
from stefanst.kernels import pure
from stefanst.spacetime import ref_tables

try:
    from stefanst.kernels import _core
except ImportError:
    _core = None

needs_compiled = pytest.mark.skipif(_core is None,
                                    reason="compiled kernels unavailable")


def _random_elements(kind, ne, rng):
    if kind == "tri":
        base = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    else:
        base = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    jitter = rng.normal(0, 0.03, (ne, base.shape[0], 2))
    shift = rng.random((ne, 1, 2))
    return np.ascontiguousarray(0.1 * (base[None] + jitter) + shift)


@needs_compiled
@pytest.mark.parametrize("kind", ["tri", "quad"])
def test_scalar_slab_backends_agree(kind, rng):
    tab = ref_tables(kind)
    ns = 3 if kind == "tri" else 4
    ne = 7
    coords = _random_elements(kind, ne, rng)
    args = (coords, tab.Ns, tab.dNxi, tab.ws, tab.theta, tab.wt,
            rng.random((ne, ns)) + 1.0, rng.random((ne, ns)),
            rng.normal(0, 1, (ne, ns, 2)), rng.normal(0, 1, (ne, ns, 2)),
            rng.normal(0, 1, (ne, ns)), rng.random(ne), 0.25)
    A1, b1 = pure.scalar_slab(*args)
    A2, b2 = _core.scalar_slab(*args)
    assert np.allclose(A1, A2, rtol=0, atol=1e-13)
    assert np.allclose(b1, b2, rtol=0, atol=1e-13)


@needs_compiled
@pytest.mark.parametrize("kind", ["tri", "quad"])
def test_ns_slab_backends_agree(kind, rng):
    tab = ref_tables(kind)
    ns = 3 if kind == "tri" else 4
    ne = 7
    coords = _random_elements(kind, ne, rng)
    args = (coords, tab.Ns, tab.dNxi, tab.ws, tab.theta, tab.wt,
            rng.random((ne, ns)) + 1.0, rng.random((ne, ns)) + 0.1,
            rng.normal(0, 1, (ne, ns, 2)), rng.normal(0, 1, (ne, ns, 2)),
            rng.normal(0, 1, (ne, ns, 2)), np.array([0.3, -0.1]),
            rng.random(ne), rng.random(ne), 0.25)
    A1, b1 = pure.ns_slab(*args)
    A2, b2 = _core.ns_slab(*args)
    assert np.allclose(A1, A2, rtol=0, atol=1e-13)
    assert np.allclose(b1, b2, rtol=0, atol=1e-13)


@needs_compiled
def test_reinit_distance_backends_agree(rng):
    pts = np.ascontiguousarray(rng.random((40, 2)))
    sa = np.ascontiguousarray(rng.random((9, 2)))
    sb = np.ascontiguousarray(rng.random((9, 2)))
    cp = np.ascontiguousarray(rng.random((9, 2)))
    d1, n1 = pure.reinit_distance(pts, sa, sb, cp)
    d2, n2 = _core.reinit_distance(pts, sa, sb, cp)
    assert np.allclose(d1, d2, rtol=0, atol=1e-14)
    assert np.array_equal(np.asarray(n1), np.asarray(n2))


def test_reinit_distance_matches_direct_point_segment_oracle(rng):
    pts = rng.random((30, 2))
    sa = rng.random((5, 2))
    sb = rng.random((5, 2))
    cp = rng.random((5, 2))
    dist, nearest = pure.reinit_distance(
        np.ascontiguousarray(pts), np.ascontiguousarray(sa),
        np.ascontiguousarray(sb), np.ascontiguousarray(cp))
    # independent clamped-projection computation
    for k, p in enumerate(pts):
        d_seg = np.inf
        for a, b in zip(sa, sb):
            ab = b - a
            t = np.clip(np.dot(p - a, ab) / np.dot(ab, ab), 0.0, 1.0)
            d_seg = min(d_seg, np.linalg.norm(p - (a + t * ab)))
        d_pts = np.linalg.norm(cp - p, axis=1)
        assert dist[k] == pytest.approx(min(d_seg, d_pts.min()), abs=1e-13)
        assert nearest[k] == int(np.argmin(d_pts))


def test_backend_env_var_selects_pure_python():
    code = ("import stefanst.kernels as k; print(k.BACKEND)")
    env = dict(os.environ, STEFANST_KERNELS="python")
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_compiled
def test_default_backend_is_compiled():
    assert kernels.BACKEND == "cython"
