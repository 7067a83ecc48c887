"""Dense linear algebra with the conventions the QR method relies on.

The only nonstandard piece is ``qr_positive``: a QR factorization whose R
has a strictly positive diagonal, which makes the factorization unique and
the per-step logarithms of the diagonal well defined.  The factorizations
themselves are delegated to LAPACK via numpy; the sign normalization and
the rank check live here.
"""

import numpy as np


class LinalgError(ValueError):
    """Base class for dense linear algebra failures."""


class RankDeficiencyError(LinalgError):
    """Triangular factor numerically singular; ``index`` is the first
    offending diagonal position."""

    def __init__(self, index, value, scale):
        self.index = int(index)
        super().__init__(
            f"rank deficiency at diagonal {index}: |R_ii|={value:.3e} "
            f"<= 1e-14*|A|={scale:.3e}")


class SingularMatrixError(LinalgError):
    """Linear solve hit a (numerically) singular matrix."""


class EigenvalueError(LinalgError):
    """Eigenvalue iteration failed to converge."""


def _check_square(a, who):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise LinalgError(f"{who} expects a square 2-D matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise LinalgError(f"{who} got non-finite entries")
    return a


def qr_positive(a):
    """QR factorization with positive diagonal of R.

    Returns (Q, R) with Q orthogonal, R upper triangular, diag(R) > 0 and
    Q @ R == a.  Raises RankDeficiencyError when the factorization is
    numerically rank deficient (min |R_ii| <= 1e-14 * ||a||_F).
    """
    a = _check_square(a, "qr_positive")
    q, r = np.linalg.qr(a)
    scale = np.linalg.norm(a)
    d = np.diagonal(r).copy()
    small = np.abs(d) <= 1e-14 * scale
    if small.any():
        i = int(np.nonzero(small)[0][0])
        raise RankDeficiencyError(i, abs(d[i]), scale)
    s = np.sign(d)
    # flip the sign pattern into both factors; Q*S @ S*R leaves the product intact
    q = q * s[None, :]
    r = r * s[:, None]
    return q, r


def solve(a, b):
    """Solve a @ x = b for a square nonsingular a."""
    a = _check_square(a, "solve")
    b = np.asarray(b, dtype=float)
    try:
        return np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(str(exc)) from exc


def eigenvalues(a):
    """Full spectrum of a square matrix as a complex array (unordered)."""
    a = _check_square(a, "eigenvalues")
    try:
        return np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise EigenvalueError(str(exc)) from exc
