"""Dependency-light numerical kernels: Jacobi eigensolver, Brent root
finding and natural cubic splines.

These are deliberately hand-rolled rather than pulled from a larger
library so that results are bitwise reproducible across platforms for
the small problem sizes this package deals with (chains of at most a
few tens of ions).
"""

from __future__ import annotations

import numpy as np


class ConvergenceError(RuntimeError):
    """An iterative kernel failed to reach its tolerance."""


def jacobi_eigh(matrix: np.ndarray, rel_tol: float = 1e-14, max_sweeps: int = 100):
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi sweeps.

    Returns (eigenvalues ascending, eigenvectors as columns). Sweeps stop
    once the off-diagonal Frobenius norm drops below ``rel_tol`` times the
    norm of the input.

    Raises
    ------
    ValueError if the input is not symmetric.
    ConvergenceError if the sweep limit is exhausted (not expected for
    well-formed inputs below ~100x100).
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise ValueError("matrix must be symmetric")

    v = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), v

    norm = np.linalg.norm(a)
    threshold = rel_tol * max(norm, np.finfo(float).tiny)

    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2) * 2.0)
        if off <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= threshold / (n * n):
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # rotate rows/columns p and q
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise ConvergenceError("Jacobi sweeps did not converge")

    w = a.diagonal().copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def brent(func, a: float, b: float, xtol: float, max_iter: int = 200) -> float:
    """Root of ``func`` inside the sign-change bracket [a, b] (Brent's method).

    ``func(a)`` and ``func(b)`` must have opposite signs. Terminates once
    the bracket shrinks below ``2*eps*|x| + xtol``.
    """
    fa = func(a)
    fb = func(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if np.sign(fa) == np.sign(fb):
        raise ValueError("brent requires a sign change across the bracket")

    c, fc = a, fa
    d = e = b - a
    eps = np.finfo(float).eps

    for _ in range(max_iter):
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol = 2.0 * eps * abs(b) + 0.5 * xtol
        m = 0.5 * (c - b)
        if abs(m) <= tol or fb == 0.0:
            return b
        if abs(e) < tol or abs(fa) <= abs(fb):
            d = e = m
        else:
            s = fb / fa
            if a == c:
                p = 2.0 * m * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0.0:
                q = -q
            else:
                p = -p
            s, e = e, d
            if 2.0 * p < 3.0 * m * q - abs(tol * q) and p < abs(0.5 * s * q):
                d = p / q
            else:
                d = e = m
        a, fa = b, fb
        if abs(d) > tol:
            b += d
        elif m > 0.0:
            b += tol
        else:
            b -= tol
        fb = func(b)
        if (fb > 0.0) == (fc > 0.0):
            c, fc = a, fa
            d = e = b - a
    raise ConvergenceError("brent exceeded the iteration limit")


def golden_section_min(func, a: float, b: float, xtol: float, max_iter: int = 200) -> float:
    """Location of a minimum of a unimodal ``func`` on [a, b]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = func(x1), func(x2)
    for _ in range(max_iter):
        if b - a <= xtol:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = func(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = func(x2)
    return 0.5 * (a + b)


class NaturalCubicSpline:
    """Natural cubic spline through (x, y) with zero end curvature.

    Evaluation clamps to the end intervals, so querying slightly outside
    [x[0], x[-1]] extrapolates the boundary cubics; callers that need
    compact support apply their own window.
    """

    def __init__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or x.size < 3:
            raise ValueError("need matching 1-d arrays with at least 3 knots")
        if np.any(np.diff(x) <= 0):
            raise ValueError("knots must be strictly increasing")
        self.x = x
        self.y = y
        self.m = self._second_derivatives(x, y)

    @staticmethod
    def _second_derivatives(x, y):
        n = x.size
        h = np.diff(x)
        # tridiagonal system for the interior second derivatives
        diag = 2.0 * (h[:-1] + h[1:])
        rhs = 6.0 * ((y[2:] - y[1:-1]) / h[1:] - (y[1:-1] - y[:-2]) / h[:-1])
        sub = h[:-1].copy()
        sup = h[1:].copy()
        # Thomas algorithm
        k = n - 2
        cp = np.zeros(k)
        dp = np.zeros(k)
        cp[0] = sup[0] / diag[0]
        dp[0] = rhs[0] / diag[0]
        for i in range(1, k):
            denom = diag[i] - sub[i] * cp[i - 1]
            cp[i] = sup[i] / denom
            dp[i] = (rhs[i] - sub[i] * dp[i - 1]) / denom
        interior = np.zeros(k)
        interior[-1] = dp[-1]
        for i in range(k - 2, -1, -1):
            interior[i] = dp[i] - cp[i] * interior[i + 1]
        m = np.zeros(n)
        m[1:-1] = interior
        return m

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.searchsorted(self.x, t, side="right") - 1, 0, self.x.size - 2)
        x0 = self.x[idx]
        x1 = self.x[idx + 1]
        h = x1 - x0
        a = (x1 - t) / h
        b = (t - x0) / h
        return (
            a * self.y[idx]
            + b * self.y[idx + 1]
            + ((a**3 - a) * self.m[idx] + (b**3 - b) * self.m[idx + 1]) * h**2 / 6.0
        )
