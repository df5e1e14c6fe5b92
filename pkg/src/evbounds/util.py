"""Small shared helpers: the Japanese bracket and binomial intervals."""

from __future__ import annotations

import numpy as np

# 95% two-sided normal quantile, used by every Wilson interval in the package.
_Z95 = 1.959963984540054


def bracket(t):
    """Regularized magnitude <t> := 2 + |t|, elementwise on arrays."""
    return 2.0 + np.abs(t)


def wilson_interval(successes: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    Preferred over the Wald interval because it stays inside [0, 1] and
    behaves at zero counts, which tail studies hit routinely.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * np.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    # The exact interval touches p at zero and full counts; keep p inside
    # despite rounding so lower <= p <= upper holds verbatim.
    return (min(max(0.0, center - half), p), max(min(1.0, center + half), p))


def spectral_norm(matrix, tol: float = 1e-10, max_iter: int = 500) -> float:
    """Largest singular value via power iteration on A*A.

    Cheaper than a full SVD for the Monte Carlo loops where only the norm is
    needed.  Falls back to the dense SVD if the iteration stalls.
    """
    a = np.asarray(matrix)
    if a.size == 0:
        return 0.0
    n = a.shape[1]
    rng = np.random.default_rng(0x5EED)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    prev = 0.0
    for _ in range(max_iter):
        w = a @ v
        v = a.conj().T @ w
        s = np.linalg.norm(v)
        if s == 0.0:
            return 0.0
        v /= s
        cur = np.sqrt(s)
        if abs(cur - prev) <= tol * max(1.0, cur):
            return float(cur)
        prev = cur
    return float(np.linalg.norm(a, 2))
