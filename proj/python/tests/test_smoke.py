"""Smoke tests for the python bindings: determinism, cross-checks against
numpy's linear algebra, and a tiny end-to-end walk."""

import math
import sys

import numpy as np

import _sparse_spectra as ss


def test_version():
    assert ss.__version__


def test_sampler_determinism():
    e1, r1, c1 = ss.sample_iid(200, 3.0, seed=9)
    e2, r2, c2 = ss.sample_iid(200, 3.0, seed=9)
    assert (r1, c1) == (200, 200)
    assert np.array_equal(e1, e2)
    e3, _, _ = ss.sample_iid(200, 3.0, seed=10)
    assert not np.array_equal(e1, e3)


def test_poisson_tail_and_theta():
    assert ss.poisson_tail_eps(4.0, 0) == 1.0
    assert abs(ss.poisson_tail_eps(1.0, 1) - (1 - math.exp(-1))) < 1e-12
    th = ss.theta_root(1.0)
    assert abs(1 - th - math.exp(-2 * th)) < 1e-11


def dense_of(entries, rows, cols):
    a = np.zeros((rows, cols))
    a[entries[:, 0], entries[:, 1]] = 1.0
    return a


def test_singular_values_against_numpy():
    entries, n, _ = ss.sample_iid(60, 3.0, seed=4)
    z = 1.0 + 1.0j
    sv = ss.shifted_singular_values(entries, n, n, z)
    dense = dense_of(entries, n, n) - z * np.eye(n)
    ref = np.linalg.svd(dense, compute_uv=False)
    assert np.max(np.abs(sv - ref)) < 1e-9 * (ref[0] + 1)


def test_secular_update_against_numpy():
    rng = np.random.default_rng(7)
    m = rng.normal(size=(5, 6)) + 1j * rng.normal(size=(5, 6))
    row = rng.normal(size=6) + 1j * rng.normal(size=6)
    updated = ss.secular_append_row(m, row)
    ref = np.linalg.svd(np.vstack([m, row]), compute_uv=False)
    assert np.max(np.abs(updated - ref)) < 1e-8 * ref[0]


def test_log_potential_girko_identity():
    entries, n, _ = ss.sample_iid(40, 3.0, seed=11)
    z = 0.7 - 0.3j
    u_sv, u_det, singular = ss.log_potential(entries, n, z)
    assert not singular
    dense = dense_of(entries, n, n)
    lam = np.linalg.eigvals(dense)
    u_eig = -np.mean(np.log(np.abs(lam - z)))
    assert abs(u_sv - u_det) < 1e-8 * max(1.0, abs(u_sv))
    assert abs(u_sv - u_eig) < 1e-6 * max(1.0, abs(u_sv))


def test_trace_moment_is_ones_count():
    entries, n, _ = ss.sample_iid(100, 2.0, seed=5)
    val = ss.trace_moment(entries, n, [1, -1])
    assert abs(val - entries.shape[0] / n) < 1e-12


def test_graph_ops():
    # 3-cycle plus isolated vertex
    entries = np.array([[1, 0], [2, 1], [0, 2]], dtype=np.int32)
    summary = ss.scc_summary(entries, 4)
    assert summary["giant_size"] == 3
    assert summary["cycles"] == 1
    assert summary["singletons"] == 1
    assert ss.trivial_image_count(entries, 4) == 1

    # row 0 is in S with no ones in column 0; row 1 sees exactly one of S
    u = ss.unique_neighbors(entries, 4, 4, [0])
    assert u == [0, 1]


def test_walk_smoke():
    out = ss.run_walk(150, 4.0, 5, 1 + 1j, seed=3, tau_z=0.05)
    assert out["steps"] > 0
    assert out["all_products_ok"]
    assert out["x_final"] >= 0


def test_tail_mc():
    freq, bound, ok = ss.walk_tail_mc(0.01, 200, 4, 50000, seed=2)
    assert ok
    assert freq <= bound


def test_levy():
    samples = np.array([0.0] * 50 + [1.0] * 50, dtype=complex)
    l_t, l_2t, hw = ss.levy_estimate(samples, 0.1)
    assert abs(l_t - 0.5) < 1e-12
    assert l_2t >= l_t
    assert hw > 0


if __name__ == "__main__":
    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
                print(f"ok   {name}")
            except AssertionError as exc:
                failures += 1
                print(f"FAIL {name}: {exc}")
    sys.exit(1 if failures else 0)
