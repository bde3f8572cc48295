import os
import subprocess
import sys

import numpy as np
import pytest

from hessquot import kernels
from hessquot.kernels import layout as L
from hessquot.operator import quad_records, ratio_constant
from hessquot.sampling import sample_batch
from hessquot.symfunc import pair_newton_constant

needs_numba = pytest.mark.skipif(not kernels.HAS_NUMBA, reason="numba not importable")

# columns built from cancelling sums compare relative to the magnitude of their terms
MAG_OF = {
    L.I1P: L.GM_MAG,
    L.I2: L.GM_MAG,
    L.GM_LEFT: L.GM_MAG,
    L.GM_RIGHT: L.GM_MAG,
    L.I3: L.I3_MAG,
    L.I3_REWRITE: L.I3_MAG,
}
ALREADY_RELATIVE = (L.SIGRATIO_MIN, L.F1MONO_MIN)


def _magnitude(rec, col):
    if col in (L.TOTAL, L.TOTAL_SPLIT):
        return np.maximum(rec[:, L.TOTAL_MAG], rec[:, L.SPLIT_MAG])
    if col in ALREADY_RELATIVE:
        return np.ones(rec.shape[0])
    return np.abs(rec[:, MAG_OF.get(col, col)])


def _batch(n, size=400, seed=1):
    return sample_batch(np.random.default_rng([seed, n]), size, n, 1e4, adversarial=True)


@needs_numba
@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_backends_agree_on_tables(n):
    lam, _ = _batch(n)
    x = 1.0 / lam
    for fn in ("esp", "esp_deleted1", "esp_deleted2"):
        a = getattr(kernels, fn)(x, n, impl=kernels.loops)
        b = getattr(kernels, fn)(x, n, impl=kernels.vectorized)
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=0)


@needs_numba
@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_backends_agree_on_records(n):
    lam, xi = _batch(n)
    for k in range(1, n + 1):
        args = (lam, xi, k, pair_newton_constant(n, k), ratio_constant(n, k))
        a = kernels.quad_pieces(*args, impl=kernels.loops)
        b = kernels.quad_pieces(*args, impl=kernels.vectorized)
        for col in range(L.NFIELDS):
            mag = _magnitude(a, col)
            np.testing.assert_array_less(np.abs(a[:, col] - b[:, col]), 1e-12 * mag + 1e-300, err_msg=L.NAMES[col])
        ga = kernels.glz_pieces(lam, xi, k, impl=kernels.loops)
        gb = kernels.glz_pieces(lam, xi, k, impl=kernels.vectorized)
        np.testing.assert_allclose(ga, gb, rtol=1e-12, atol=1e-12 * np.abs(ga).max())


@pytest.mark.parametrize("impl", ["loops", "vectorized"])
@pytest.mark.parametrize("n", [1, 2, 4, 7])
def test_jacobi_eigensolver_against_lapack(impl, n, rng):
    a = rng.standard_normal((50, n, n)) * np.exp(rng.uniform(-3, 3, size=(50, 1, 1)))
    a = a + a.transpose(0, 2, 1)
    w, v, sweeps = kernels.eigh_jacobi(a, impl=getattr(kernels, impl))
    ref = np.linalg.eigvalsh(a)
    np.testing.assert_allclose(np.sort(w, axis=1), ref, rtol=0, atol=1e-12 * np.abs(a).max())
    recon = np.einsum("sij,sj,skj->sik", v, w, v)
    scale = 1.0 + np.abs(a).max(axis=(1, 2))
    assert (np.abs(recon - a).max(axis=(1, 2)) <= 1e-10 * scale).all()
    ortho = np.einsum("sji,sjk->sik", v, v) - np.eye(n)
    assert np.abs(ortho).max() <= 1e-12
    assert np.all(sweeps < kernels.JACOBI_MAX_SWEEPS)


def test_layout_names_match_fields():
    assert len(L.NAMES) == L.NFIELDS
    assert L.NAMES[L.TOTAL] == "TOTAL" or L.NAMES[L.TOTAL].lower() == "total"


def test_numpy_fallback_flag():
    code = "import hessquot; print(hessquot.BACKEND)"
    env = dict(os.environ, HESSQUOT_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_active_backend_matches_records():
    lam, xi = _batch(4, size=50)
    rec = quad_records(lam, xi, 2)
    assert rec.shape == (50, L.NFIELDS)
