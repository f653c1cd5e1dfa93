"""Statistical validation suites for the guarantees the algorithms rest on.

Each suite draws its own seeded randomness, checks one probabilistic claim
at desk scale, and returns (name, passed, detail). The trial counts and
windows are part of the acceptance contract; tighten them only with care.
"""

import numpy as np

from lifelong_mc.datagen import NoiseSpec, apply_noise, gen_gaussian_lowrank
from lifelong_mc.linalg import (
    incoherence,
    numerical_rank,
    orthonormalize,
    principal_angle,
    project_residual,
)
from lifelong_mc.tracker import TrackerConfig, run_stream


def suite_orthonormalize_preserves_rank(seed=101, cases=200):
    """Orthonormalization keeps the numerical rank and returns orthonormal
    columns, across sizes and deliberately rank-deficient inputs."""
    rng = np.random.default_rng(seed)
    for i in range(cases):
        m = int(rng.integers(2, 30))
        n = int(rng.integers(1, 12))
        r = int(rng.integers(1, min(m, n) + 1))
        A = rng.standard_normal((m, r)) @ rng.standard_normal((r, n))
        Q = orthonormalize(A)
        if Q.shape[1] != numerical_rank(A):
            return ("orthonormalize-rank", False, f"case {i}: rank mismatch")
        if Q.shape[1] and not np.allclose(Q.T @ Q, np.eye(Q.shape[1]), atol=1e-9):
            return ("orthonormalize-rank", False, f"case {i}: not orthonormal")
    return ("orthonormalize-rank", True, f"{cases} cases")


def suite_subsampled_rank(seed=102, trials=500, m=400, delta=0.1):
    """Sampling d >= 8 mu k log(k/delta) rows of an incoherent rank-k basis
    keeps full column rank, with failure fraction at most delta."""
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(trials):
        k = int(rng.integers(1, 5))
        U = orthonormalize(rng.standard_normal((m, k)))
        mu = incoherence(U)
        d = int(min(m, np.ceil(8 * mu * k * np.log(k / delta))))
        rows = rng.choice(m, size=d, replace=True)
        if numerical_rank(U[rows, :]) < k:
            failures += 1
    ok = failures <= delta * trials
    return (
        "subsampled-rank",
        ok,
        f"{failures}/{trials} rank losses (allowed {int(delta * trials)})",
    )


def suite_angle_propagation(seed=103, cases=100, eps_values=(1e-4, 1e-3, 1e-2)):
    """The tracked basis stays within sqrt(20 k eps)/2 (in sine) of the true
    subspace after absorbing k noisy columns.

    The guarantee presumes the calibrated threshold constant is large
    enough; at this scale 1.0 admits marginal over-absorption (an in-span
    column crossing the cutoff adds a spurious direction and the angle
    degenerates), so the suite runs at 2.0 where the loop provably closes.
    """
    rng = np.random.default_rng(seed)
    checked = 0
    for eps in eps_values:
        for i in range(cases):
            r = int(rng.integers(1, 7))
            inst = gen_gaussian_lowrank(60, 80, r, seed=int(rng.integers(2**31)))
            noisy = apply_noise(
                inst, NoiseSpec("bounded", eps=eps), seed=int(rng.integers(2**31))
            )
            cfg = TrackerConfig(
                d=30, noise_level=eps, threshold_scale=2.0,
                seed=int(rng.integers(2**31)),
            )
            res = run_stream(noisy.M, cfg)
            k = res.report.basis_size
            if k == 0:
                return ("angle-propagation", False, f"eps={eps}: empty basis")
            theta = principal_angle(res.basis, inst.column_basis)
            bound = np.sqrt(20 * k * eps) / 2
            if np.sin(theta) > bound:
                return (
                    "angle-propagation",
                    False,
                    f"eps={eps} case {i}: sin {np.sin(theta):.3g} > {bound:.3g}",
                )
            checked += 1
    return ("angle-propagation", True, f"{checked} tracked bases within bound")


def suite_residual_sandwich(seed=104, trials=500, m=100, d=50, window=0.5):
    """The sampled squared residual concentrates around d/m times the full
    squared residual: within (1 +/- 0.5) of that for at least 90% of trials."""
    rng = np.random.default_rng(seed)
    inside = 0
    for _ in range(trials):
        k = int(rng.integers(1, 4))
        U = orthonormalize(rng.standard_normal((m, k)))
        w = rng.standard_normal(m)
        w = w - U @ (U.T @ w)
        w /= np.linalg.norm(w)
        v = U @ rng.standard_normal(k) + w
        rows = rng.choice(m, size=d, replace=True)
        sampled = project_residual(v[rows], U[rows, :]) ** 2
        ratio = sampled / (d / m)  # full squared residual is exactly 1
        if 1 - window < ratio < 1 + window:
            inside += 1
    ok = inside >= 0.9 * trials
    return ("residual-sandwich", ok, f"{inside}/{trials} inside the window")


def suite_bernoulli_sample_size(seed=105, trials=500, m=400, d=16):
    """Independent inclusion with probability d/m gives between d/2 and 2d
    sampled indices at least 90% of the time."""
    rng = np.random.default_rng(seed)
    inside = 0
    for _ in range(trials):
        size = int(np.sum(rng.random(m) < d / m))
        if d / 2 < size < 2 * d:
            inside += 1
    ok = inside >= 0.9 * trials
    return ("bernoulli-sample-size", ok, f"{inside}/{trials} inside (d/2, 2d)")


def suite_gaussian_general_position(seed=106, trials=1000):
    """Random Gaussian matrices with at least as many rows as columns are
    numerically full rank at a 1e-6 relative singular value cutoff; no
    failures allowed."""
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(trials):
        k = int(rng.integers(1, 11))
        m = k + int(rng.integers(1, 12))
        A = rng.standard_normal((m, k))
        if numerical_rank(A, tol=1e-6) < k:
            failures += 1
    return ("gaussian-general-position", failures == 0, f"{failures}/{trials} rank losses")


ALL_SUITES = (
    suite_orthonormalize_preserves_rank,
    suite_subsampled_rank,
    suite_angle_propagation,
    suite_residual_sandwich,
    suite_bernoulli_sample_size,
    suite_gaussian_general_position,
)


def run_all():
    return [suite() for suite in ALL_SUITES]
