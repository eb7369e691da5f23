import os
import subprocess
import sys

import numpy as np
import pytest

from senstropy import _pykernels, kernels
from senstropy.measures import bernoulli, build_markov_measure
from senstropy.symbolic import full_shift

ck = pytest.importorskip("senstropy._ckernels")


def random_presentation(rng, n_states, k):
    succ = np.zeros((n_states, k), dtype=np.int64)
    for s in range(n_states):
        for a in range(k):
            if rng.random() < 0.6:
                succ[s, a] = int(rng.integers(1, 2**n_states))
    labels = np.array(
        [sum(1 << a for a in range(k) if succ[s, a]) for s in range(n_states)], dtype=np.int64
    )
    return succ, labels


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")
    assert ck.BACKEND == "cython" and _pykernels.BACKEND == "python"


def test_scan_branch_agrees():
    rng = np.random.default_rng(0)
    for trial in range(300):
        n, k = int(rng.integers(1, 9)), int(rng.integers(1, 4))
        succ, labels = random_presentation(rng, n, k)
        coords = rng.integers(0, k, size=int(rng.integers(0, 30))).astype(np.int64)
        states = int(rng.integers(0, 2**n))
        a = ck.scan_branch(succ, labels, states, coords)
        b = _pykernels.scan_branch(succ, labels, states, coords)
        assert tuple(map(int, a)) == tuple(map(int, b))


def test_cumulative_log_agrees():
    mu = bernoulli(["0.7", "0.3"], full_shift(2), mode="float")
    x = mu.sample_point(5000, seed=1)
    word = np.asarray(x.prefix(5000), dtype=np.int64)
    logs = np.log(mu.P_float, where=mu.P_float > 0, out=np.full((2, 2), -np.inf))
    lpi = np.log(mu.pi_float)
    a = ck.cumulative_log_markov(word, lpi, logs)
    b = _pykernels.cumulative_log_markov(word, lpi, logs)
    assert np.array_equal(a, b)  # bitwise


def test_pivot_and_ratio_test_agree():
    rng = np.random.default_rng(1)
    for _ in range(50):
        T = rng.normal(size=(6, 9))
        basis = np.arange(3, 9, dtype=np.int64)[:5]
        T1, T2 = T.copy(), T.copy()
        ck.pivot(T1, 2, 4)
        _pykernels.pivot(T2, 2, 4)
        assert np.array_equal(T1, T2)
        for c in range(8):
            assert ck.ratio_test(T[:5], c, 8, 1e-9, basis) == \
                _pykernels.ratio_test(T[:5], c, 8, 1e-9, basis)


def test_pure_python_backend_gives_identical_report(tmp_path):
    """The golden-mean scenario report is byte-identical under both backends."""
    from senstropy.harness import default_scenario_paths

    path = next(p for p in default_scenario_paths() if p.name == "golden_mean.yaml")
    outs = []
    for flag in ("0", "1"):
        d = tmp_path / flag
        env = dict(os.environ, SENSTROPY_PURE_PYTHON=flag)
        r = subprocess.run([sys.executable, "-m", "senstropy", "verify", str(path), "--out",
                            str(d)], env=env, capture_output=True, text=True)
        assert r.returncode == 0, r.stderr
        outs.append((d / "report.json").read_bytes())
    assert outs[0] == outs[1]
