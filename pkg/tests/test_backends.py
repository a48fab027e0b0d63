import json
import os
import subprocess
import sys

import numpy as np
import pytest

import oracles
from gdpmech import _kernels_py as pure
from gdpmech._backend import BACKEND
from gdpmech._parallel import chunk_plan, map_ordered, run_chunks

try:
    from gdpmech import _kernels as compiled
except ImportError:  # pragma: no cover
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled extension not built")
ALPHA = np.r_[0.0, np.linspace(1e-12, 1 - 1e-12, 2001), 1.0]


KERNELS = [pure] + ([compiled] if compiled is not None else [])


@pytest.mark.parametrize("k", KERNELS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_lower_lambert_branch(k):
    z = -np.exp(-1.0) * np.linspace(1e-12, 1 - 1e-6, 501)
    ref = [oracles.lambert_w(v, -1) for v in z]
    np.testing.assert_allclose(k.lambert_wm1_array(z), ref, rtol=1e-13)
    # near -1/e the residual w e^w - z cancels; error grows like eps / |1 + w|
    near = -np.exp(-1.0) * (1 - np.logspace(-6, -12, 7))
    ref = [oracles.lambert_w(v, -1) for v in near]
    np.testing.assert_allclose(k.lambert_wm1_array(near), ref, rtol=1e-9)
    assert k.lambert_wm1_array(np.array([-np.exp(-1.0)]))[0] == pytest.approx(-1.0, abs=1e-7)


@needs_compiled
class TestAgreement:
    def test_lambert(self):
        x = np.r_[0.0, np.logspace(-300, 300, 1201)]
        np.testing.assert_allclose(compiled.lambert_w0_array(x), pure.lambert_w0_array(x), rtol=4e-16)
        z = -np.exp(-1.0) * np.linspace(1e-9, 1.0, 2001)
        np.testing.assert_allclose(compiled.lambert_wm1_array(z), pure.lambert_wm1_array(z), rtol=1e-14)
        assert compiled.lambert_w0(2.5) == pytest.approx(pure.lambert_w0(2.5), rel=4e-16)

    @pytest.mark.parametrize("dof,tau", [(3, 0.0), (5, 12.5), (9, 800.0), (20.5, 3e4)])
    def test_inverse_moment(self, dof, tau):
        a = compiled.ncx2_inv_moment(dof, tau, 1e-13, 100_000)
        b = pure.ncx2_inv_moment(dof, tau, 1e-13, 100_000)
        assert a[0] == pytest.approx(b[0], rel=1e-14)
        assert a[1:] == b[1:]

    @pytest.mark.parametrize("d1,d2", [(1, 1), (3, 0.4), (0.2, 0.0), (6, 6)])
    def test_bilaplace(self, d1, d2):
        np.testing.assert_allclose(compiled.bilap_curve(ALPHA, d1, d2),
                                   pure.bilap_curve(ALPHA, d1, d2), atol=1e-15)

    @pytest.mark.parametrize("b", [0.1, 0.59, 1.0, 5.0, 100.0])
    def test_freq(self, b):
        np.testing.assert_allclose(compiled.freq_curve(ALPHA, b), pure.freq_curve(ALPHA, b), atol=1e-15)
        np.testing.assert_allclose(compiled.freq_lower(ALPHA[:900], b), pure.freq_lower(ALPHA[:900], b),
                                   atol=1e-15)

    def test_statistics(self):
        rng = np.random.default_rng(0)
        tables = rng.normal(100, 30, size=(500, 9))
        tables[0] = 0.0
        pi0 = np.r_[0.0, np.full(8, 1 / 8)]
        for a, b in zip(compiled.gof_stat_batch(tables, pi0), pure.gof_stat_batch(tables, pi0)):
            np.testing.assert_allclose(a, b, rtol=1e-13)
        t3 = rng.normal(50, 20, size=(300, 3, 5))
        for a, b in zip(compiled.hom_stat_batch(t3), pure.hom_stat_batch(t3)):
            np.testing.assert_allclose(a, b, rtol=1e-13)


def test_pure_python_switch():
    env = dict(os.environ, GDPMECH_PURE_PYTHON="1")
    code = ("import json; from gdpmech._backend import BACKEND; from gdpmech.calibrate import laplace_b_freq;"
            "print(json.dumps([BACKEND, laplace_b_freq(1.0).scale]))")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    backend, scale = json.loads(out.stdout)
    assert backend == "python"
    from gdpmech.calibrate import laplace_b_freq
    assert scale == pytest.approx(laplace_b_freq(1.0).scale, rel=1e-12)


def test_backend_reported():
    assert BACKEND in ("cython", "python")


class TestParallel:
    def test_chunk_plan(self):
        assert chunk_plan(10, 4) == [(0, 0, 4), (1, 4, 4), (2, 8, 2)]
        assert chunk_plan(0, 4) == []

    def test_run_chunks_order(self):
        fn = lambda i, start, n: np.arange(start, start + n)
        for threads in (1, 3):
            np.testing.assert_array_equal(run_chunks(fn, 10_000, threads, chunk=333), np.arange(10_000))

    def test_map_ordered(self):
        assert map_ordered(lambda x: x * x, range(50), 4) == [x * x for x in range(50)]
