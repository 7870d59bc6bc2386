import os
import random
import subprocess
import sys

import numpy as np
import pytest
from _gen import random_pnwt

from flowmc import _jit, kernels
from flowmc.ltlmc.stategraph import transition_masks


def test_pack_unpack():
    for idx in ([], [0], [3, 63, 64, 130]):
        W = kernels.n_words(131)
        assert kernels.unpack(kernels.pack(idx, W)) == idx


def _sorted(res):
    src, trans, succ, bad = res
    order = np.lexsort((trans, src))
    return src[order], trans[order], succ[order], bad >= 0


@pytest.mark.parametrize("seed", range(5))
def test_successor_paths_agree(seed):
    rng = random.Random(seed)
    for _ in range(40):
        net = random_pnwt(rng).net
        pre, post, inh = transition_masks(net)
        W = pre.shape[1]
        nrng = np.random.default_rng(seed)
        M = np.stack([kernels.pack([i for i in range(len(net.places)) if nrng.random() < 0.5], W) for _ in range(6)])
        a = _sorted(kernels.successors_numpy(M, pre, post, inh))
        b = _sorted(kernels.successors_jit(M, pre, post, inh))
        for x, y in zip(a, b):
            assert np.array_equal(x, y)


def _lasso_inputs(rng, Q=4, L=5):
    ok = rng.random((Q, L)) < 0.6
    acc_state = rng.integers(0, 4, Q).astype(np.int64)
    acc_pos = rng.integers(0, 2, L).astype(np.int64) << 2
    succ = [sorted(set(rng.integers(0, Q, 2).tolist())) for _ in range(Q)]
    ptr = np.zeros(Q + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(s) for s in succ])
    idx = np.array([q for s in succ for q in s], dtype=np.int64)
    return ok, acc_state, acc_pos, 3, ptr, idx, np.array([0], dtype=np.int64), int(rng.integers(0, L))


def test_lasso_paths_agree():
    rng = np.random.default_rng(3)
    results = []
    for _ in range(400):
        args = _lasso_inputs(rng)
        jit, py = bool(kernels.lasso_accepts(*args)), bool(kernels.lasso_accepts_py(*args))
        assert jit == py
        results.append(py)
    assert any(results) and not all(results)


def test_environment_switch():
    env = dict(os.environ, FLOWMC_DISABLE_NUMBA="1")
    code = "import flowmc._jit as j, flowmc.kernels as k; print(j.USE_NUMBA, k.successors is k.successors_numpy)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout
    assert out.split() == ["False", "True"]


@pytest.mark.skipif(not _jit.HAVE_NUMBA, reason="numba not installed")
def test_numba_enabled_by_default():
    env = {k: v for k, v in os.environ.items() if k != "FLOWMC_DISABLE_NUMBA"}
    out = subprocess.run(
        [sys.executable, "-c", "import flowmc._jit as j; print(j.USE_NUMBA)"], env=env, capture_output=True, text=True, check=True
    ).stdout
    assert out.strip() == "True"
