"""Eigenfrequency solvers for coupled photon-magnon systems.

Matrices live in linear-frequency units (Hz) with half-splitting
off-diagonals g/pi/2, so a resonant two-mode crossing splits by exactly
g/pi.  The rotating-wave solvers diagonalize those matrices directly; the
Bogoliubov solver keeps the counter-rotating coupling terms and is the one
to use once g/pi becomes a noticeable fraction of the mode frequency.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import TWO_PI, DomainError, HybridModel

__all__ = [
    "ModeCollapseError",
    "EigenResult",
    "MinimumSplitting",
    "rwa_two_mode",
    "rwa_three_mode",
    "bogoliubov_two_mode",
    "dispersion_branches",
    "follow_branches",
    "minimum_splitting",
]


class ModeCollapseError(DomainError):
    """Coupling so strong the lower Bogoliubov branch loses stability."""


@dataclass(frozen=True)
class EigenResult:
    """Eigenfrequencies (Hz, ascending) and bare-mode composition.

    ``weights[k, j]`` is the fraction of eigenmode k residing in bare mode
    j; each row sums to 1.
    """

    frequencies: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        f = np.asarray(self.frequencies, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if np.any(np.diff(f) < 0.0):
            raise DomainError("eigenfrequencies must be sorted ascending")
        if w.shape != (f.size, f.size):
            raise DomainError("weights must be square, one row per eigenmode")
        if np.any(w < -1e-12) or np.any(np.abs(w.sum(axis=1) - 1.0) > 1e-9):
            raise DomainError("each weight row must be a unit-sum composition")
        f.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "weights", w)

    @property
    def splitting(self) -> float:
        """Gap between the two lowest branches (Hz)."""
        return float(self.frequencies[1] - self.frequencies[0])


def _two_level(fc: float, fm: float, h: float) -> EigenResult:
    """Eigensystem of [[fc, h], [h, fm]] in closed form."""
    mean = 0.5 * (fc + fm)
    d = 0.5 * (fc - fm)
    s = math.hypot(d, h)
    if s == 0.0 or h == 0.0:
        # diagonal already; order by frequency
        lo, hi = sorted((fc, fm))
        w = np.eye(2) if fc <= fm else np.eye(2)[::-1]
        return EigenResult(np.array([lo, hi]), w)
    # eigenvector for the upper branch is (h, s - d), lower is (-(s - d), h)
    norm = h * h + (s - d) ** 2
    w_hi = np.array([h * h, (s - d) ** 2]) / norm
    w_lo = w_hi[::-1]
    return EigenResult(np.array([mean - s, mean + s]), np.vstack([w_lo, w_hi]))


def rwa_two_mode(fc: float, fm: float, g_over_pi: float) -> EigenResult:
    """Rotating-wave normal modes of one cavity and one magnon mode.

    f_pm = (fc + fm)/2 +- sqrt(((fc - fm)/2)^2 + (g_over_pi/2)^2); on
    resonance the branch gap equals g_over_pi exactly.
    """
    if not (fc > 0.0 and fm > 0.0):
        raise DomainError("mode frequencies must be > 0")
    if g_over_pi < 0.0:
        raise DomainError("g_over_pi must be >= 0")
    return _two_level(fc, fm, 0.5 * g_over_pi)


def rwa_three_mode(
    fc: float, fR: float, fL: float, gc_over_pi: float, gRL_over_pi: float
) -> EigenResult:
    """Normal modes of the cavity - magnon R - magnon L chain.

    The coupling matrix is tridiagonal: the cavity talks only to R, and R
    talks to L.  For the fully degenerate input fc = fR = fL the spectrum
    is (f0 - s, f0, f0 + s) with s = sqrt((gc/2)^2 + (gRL/2)^2); the
    central mode has zero weight on the bridging magnon R and a small
    cavity weight (gRL/2)^2/s^2, which is what keeps the spectator branch
    faintly visible in transmission.  That case is evaluated in closed form
    to dodge eigensolver noise at the triple degeneracy.
    """
    if not (fc > 0.0 and fR > 0.0 and fL > 0.0):
        raise DomainError("mode frequencies must be > 0")
    if gc_over_pi < 0.0 or gRL_over_pi < 0.0:
        raise DomainError("couplings must be >= 0")
    a = 0.5 * gc_over_pi
    b = 0.5 * gRL_over_pi
    if fc == fR == fL:
        s = math.hypot(a, b)
        if s == 0.0:
            return EigenResult(np.full(3, fc), np.eye(3))
        s2 = s * s
        outer = np.array([a * a / (2.0 * s2), 0.5, b * b / (2.0 * s2)])
        central = np.array([b * b / s2, 0.0, a * a / s2])
        return EigenResult(
            np.array([fc - s, fc, fc + s]), np.vstack([outer, central, outer])
        )
    m = np.array([[fc, a, 0.0], [a, fR, b], [0.0, b, fL]])
    vals, vecs = np.linalg.eigh(m)
    return EigenResult(vals, (vecs.T) ** 2)


def bogoliubov_two_mode(fc: float, fm: float, g_over_pi: float) -> EigenResult:
    """Normal modes keeping the counter-rotating coupling terms.

    Solves the quadratic two-oscillator problem with interaction
    g(a + a+)(b + b+), g = pi*g_over_pi in rad/s:

        Omega_pm^2 = (wc^2 + wm^2)/2 +- sqrt((wc^2 - wm^2)^2/4 + 4 g^2 wc wm)

    The pair is asymmetric about (fc + fm)/2, unlike the rotating-wave
    result, and the lower branch softens to zero at g_over_pi =
    sqrt(fc*fm), beyond which the system is unstable.
    """
    if not (fc > 0.0 and fm > 0.0):
        raise DomainError("mode frequencies must be > 0")
    if g_over_pi < 0.0:
        raise DomainError("g_over_pi must be >= 0")
    if g_over_pi >= math.sqrt(fc * fm):
        raise ModeCollapseError(
            "g_over_pi >= sqrt(fc*fm): lower branch frequency collapses to zero"
        )
    wc = TWO_PI * fc
    wm = TWO_PI * fm
    g = math.pi * g_over_pi
    # eigenvalues of the symmetric matrix [[wc^2, h], [h, wm^2]] are Omega^2
    h = 2.0 * g * math.sqrt(wc * wm)
    res2 = _two_level(wc * wc, wm * wm, h)
    return EigenResult(np.sqrt(res2.frequencies) / TWO_PI, res2.weights)


def dispersion_branches(model: HybridModel, B_grid) -> list[EigenResult]:
    """Eigenfrequencies of the model at each bias field.

    Magnon modes tune along their field slopes; cavity modes stay put.
    Raises with the offending B attached if a bare frequency is driven
    non-positive.
    """
    B_grid = np.atleast_1d(np.asarray(B_grid, dtype=float))
    if B_grid.size == 0:
        raise DomainError("B grid must be nonempty")
    if np.any(np.diff(B_grid) < 0.0):
        raise DomainError("B grid must be sorted ascending")
    out = []
    for B in B_grid:
        m = model.matrix_at(B)
        if np.any(np.diagonal(m) <= 0.0):
            raise DomainError(f"non-positive bare mode frequency at B = {B:.6g} T")
        vals, vecs = np.linalg.eigh(m)
        out.append(EigenResult(vals, (vecs.T) ** 2))
    return out


def follow_branches(results: list[EigenResult]) -> np.ndarray:
    """Continuity-ordered branch frequencies, shape (nB, n).

    Row 0 is ascending; each later row is permuted to maximize the overlap
    of bare-mode compositions with the previous row, so a branch keeps its
    identity through crossings instead of swapping labels.
    """
    if not results:
        return np.empty((0, 0))
    n = results[0].frequencies.size
    perms = list(itertools.permutations(range(n)))
    out = np.empty((len(results), n))
    out[0] = results[0].frequencies
    prev_w = results[0].weights
    for i, res in enumerate(results[1:], start=1):
        overlap = prev_w @ res.weights.T  # (prev branch, new branch)
        best = max(perms, key=lambda p: sum(overlap[k, p[k]] for k in range(n)))
        out[i] = res.frequencies[list(best)]
        prev_w = res.weights[list(best)]
    return out


@dataclass(frozen=True)
class MinimumSplitting:
    """Location and size of the smallest branch gap over a field range."""

    B: float
    splitting: float
    unimodal: bool


def _golden(fun, lo: float, hi: float, tol: float) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc_, fd_ = fun(c), fun(d)
    while b - a > tol:
        if fc_ < fd_:
            b, d, fd_ = d, c, fc_
            c = b - invphi * (b - a)
            fc_ = fun(c)
        else:
            a, c, fc_ = c, d, fd_
            d = a + invphi * (b - a)
            fd_ = fun(d)
    return 0.5 * (a + b)

def minimum_splitting(
    model: HybridModel,
    B_range: tuple[float, float],
    branches: tuple[int, int] = (0, 1),
    coarse: int = 512,
) -> MinimumSplitting:
    """Locate the avoided-crossing center: min over B of a branch gap.

    A coarse scan checks that the gap is unimodal; if it is, golden-section
    search refines the minimum.  A multi-valley gap (possible for chains
    near degeneracy) falls back to the global minimum of a dense 10^4-point
    scan, flagged with ``unimodal=False``.
    """
    lo, hi = float(B_range[0]), float(B_range[1])
    if not hi > lo:
        raise DomainError("B range must satisfy lo < hi")
    i, j = branches

    def gap(B: float) -> float:
        f = dispersion_branches(model, [B])[0].frequencies
        return float(f[j] - f[i])

    Bs = np.linspace(lo, hi, coarse)
    gaps = np.array([gap(B) for B in Bs])
    interior_min = np.nonzero(
        (gaps[1:-1] < gaps[:-2]) & (gaps[1:-1] <= gaps[2:])
    )[0]
    if interior_min.size > 1:
        Bd = np.linspace(lo, hi, 10_000)
        gd = np.array([gap(B) for B in Bd])
        k = int(np.argmin(gd))
        return MinimumSplitting(float(Bd[k]), float(gd[k]), unimodal=False)
    if interior_min.size == 1:
        k = int(interior_min[0]) + 1
        a, b = Bs[max(k - 1, 0)], Bs[min(k + 1, coarse - 1)]
    else:
        # monotone gap: the minimum sits at an endpoint
        k = int(np.argmin(gaps))
        a, b = Bs[max(k - 1, 0)], Bs[min(k + 1, coarse - 1)]
    B_min = _golden(gap, float(a), float(b), tol=1e-12 * max(abs(hi), 1.0))
    return MinimumSplitting(B_min, gap(B_min), unimodal=True)
