"""Hot numeric kernels with compiled and pure-numpy implementations.

Two computations dominate runtime: transmission-map synthesis (a small
complex linear solve per grid point) and midplane field-map construction
(subsampled quadrature cells along the post and wall circles).  Each has a
numba ``@njit`` implementation and an independent vectorized numpy one; the
compiled path is used when numba imports, and setting the environment
variable ``MAGCAV_DISABLE_NUMBA=1`` (checked once at import) forces the
numpy path.  ``benchmarks/bench_kernels.py`` times the two against each
other and asserts they agree.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("MAGCAV_DISABLE_NUMBA", "0").lower() not in (
    "1",
    "true",
    "yes",
)

# Subsamples per axis for cells cut by a post or the outer wall; 8x8 keeps
# the quadrature second-order despite the 1/rho field at the post surface.
SUBSAMPLE = 8

__all__ = [
    "HAVE_NUMBA",
    "USE_NUMBA",
    "SUBSAMPLE",
    "line_current_H",
    "response_map",
    "response_map_numpy",
    "response_map_numba",
    "field_cells",
    "field_cells_numpy",
    "field_cells_numba",
]


def line_current_H(
    points: np.ndarray,
    posts: np.ndarray,
    signs: np.ndarray,
    current: float = 1.0,
    r_post: float = 0.0,
) -> np.ndarray:
    """In-plane H (A/m) of signed infinite line currents at given points.

    Each post carries ``signs[p]*current`` along +z at ``posts[p]``; the
    azimuthal field I/(2*pi*rho) is superposed.  Points within ``r_post``
    of any post center get H = 0 (perfect-conductor interior).

    Parameters
    ----------
    points : (..., 2) array of x, y in m.
    posts : (npost, 2) array of post centers in m.
    signs : (npost,) array of current signs.

    Returns
    -------
    (..., 2) array of (Hx, Hy).
    """
    pts = np.asarray(points, dtype=float)
    out = np.zeros(pts.shape)
    inside = np.zeros(pts.shape[:-1], dtype=bool)
    for (px, py), s in zip(np.asarray(posts, dtype=float), np.asarray(signs, dtype=float)):
        dx = pts[..., 0] - px
        dy = pts[..., 1] - py
        r2 = dx * dx + dy * dy
        inside |= r2 < r_post * r_post
        with np.errstate(divide="ignore", invalid="ignore"):
            pref = s * current / (2.0 * np.pi * r2)
        out[..., 0] += np.where(r2 > 0.0, -pref * dy, 0.0)
        out[..., 1] += np.where(r2 > 0.0, pref * dx, 0.0)
    out[inside] = 0.0
    return out


# ---------------------------------------------------------------------------
# Transmission response: out[b, k] = amp * |(A^-1 e_drive)_drive| with
# A = i*(M(B_b) - f_k*I) + diag(linewidth)/2.


def response_map_numpy(
    freqs: np.ndarray,
    half_widths: np.ndarray,
    half_couplings: np.ndarray,
    drive: int,
    f_axis: np.ndarray,
    amplitude: float,
) -> np.ndarray:
    """Pure-numpy batched solve, one frequency-axis batch per field step."""
    freqs = np.asarray(freqs, dtype=float)
    f_axis = np.asarray(f_axis, dtype=float)
    nB, n = freqs.shape
    nf = f_axis.size
    offdiag = 1j * np.asarray(half_couplings, dtype=float)
    rhs = np.zeros((n, 1), dtype=complex)
    rhs[drive, 0] = 1.0
    rhs = np.broadcast_to(rhs, (nf, n, 1))
    idx = np.arange(n)
    out = np.empty((nB, nf))
    for b in range(nB):
        A = np.broadcast_to(offdiag, (nf, n, n)).copy()
        A[:, idx, idx] = half_widths + 1j * (freqs[b] - f_axis[:, None])
        try:
            sol = np.linalg.solve(A, rhs)
            out[b] = amplitude * np.abs(sol[:, drive, 0])
        except np.linalg.LinAlgError:
            # a lossless mode hit exact resonance; that point transmits 0
            for k in range(nf):
                try:
                    out[b, k] = amplitude * abs(np.linalg.solve(A[k], rhs[k])[drive, 0])
                except np.linalg.LinAlgError:
                    out[b, k] = 0.0
    return out


def _response_map_serial(freqs, half_widths, half_couplings, drive, f_axis, amplitude, out):
    """Gaussian elimination with partial pivoting per grid point."""
    nB, n = freqs.shape
    nf = f_axis.shape[0]
    A = np.empty((n, n), dtype=np.complex128)
    x = np.empty(n, dtype=np.complex128)
    for b in range(nB):
        for k in range(nf):
            f = f_axis[k]
            for i in range(n):
                for j in range(n):
                    A[i, j] = 1j * half_couplings[i, j]
                A[i, i] = half_widths[i] + 1j * (freqs[b, i] - f)
                x[i] = 0.0
            x[drive] = 1.0
            singular = False
            for col in range(n):
                piv = col
                best = abs(A[col, col])
                for r in range(col + 1, n):
                    v = abs(A[r, col])
                    if v > best:
                        best = v
                        piv = r
                if best == 0.0:
                    singular = True
                    break
                if piv != col:
                    for c in range(col, n):
                        tmp = A[col, c]
                        A[col, c] = A[piv, c]
                        A[piv, c] = tmp
                    tmp = x[col]
                    x[col] = x[piv]
                    x[piv] = tmp
                for r in range(col + 1, n):
                    m = A[r, col] / A[col, col]
                    if m != 0.0:
                        for c in range(col + 1, n):
                            A[r, c] -= m * A[col, c]
                        x[r] -= m * x[col]
            if singular:
                out[b, k] = 0.0
                continue
            for col in range(n - 1, -1, -1):
                acc = x[col]
                for c in range(col + 1, n):
                    acc -= A[col, c] * x[c]
                x[col] = acc / A[col, col]
            out[b, k] = amplitude * abs(x[drive])


if HAVE_NUMBA:
    _response_map_compiled = numba.njit(cache=True)(_response_map_serial)

    def response_map_numba(freqs, half_widths, half_couplings, drive, f_axis, amplitude):
        freqs = np.ascontiguousarray(freqs, dtype=np.float64)
        f_axis = np.ascontiguousarray(f_axis, dtype=np.float64)
        out = np.empty((freqs.shape[0], f_axis.size))
        _response_map_compiled(
            freqs,
            np.ascontiguousarray(half_widths, dtype=np.float64),
            np.ascontiguousarray(half_couplings, dtype=np.float64),
            drive,
            f_axis,
            amplitude,
            out,
        )
        return out

else:  # pragma: no cover
    response_map_numba = None


def response_map(freqs, half_widths, half_couplings, drive, f_axis, amplitude):
    """Dispatch to the compiled kernel unless disabled by environment."""
    if USE_NUMBA:
        return response_map_numba(freqs, half_widths, half_couplings, drive, f_axis, amplitude)
    return response_map_numpy(freqs, half_widths, half_couplings, drive, f_axis, amplitude)


# ---------------------------------------------------------------------------
# Field-map cells.  The integration domain is the cavity disk minus the post
# disks.  Cells fully inside the domain take the center-point field; cells
# cut by a circle are subsampled so the stored cell energy is the mean of
# |H|^2 over the covered fraction.


def _hx_hy(x, y, px, py, signs, current):
    hx = 0.0
    hy = 0.0
    for p in range(px.shape[0]):
        dx = x - px[p]
        dy = y - py[p]
        r2 = dx * dx + dy * dy
        if r2 > 0.0:
            pref = signs[p] * current / (2.0 * np.pi * r2)
            hx -= pref * dy
            hy += pref * dx
    return hx, hy


def _in_domain(x, y, px, py, r_post2, r_cav2):
    if x * x + y * y > r_cav2:
        return False
    for p in range(px.shape[0]):
        dx = x - px[p]
        dy = y - py[p]
        if dx * dx + dy * dy < r_post2:
            return False
    return True


def _field_cells_serial(
    xc, yc, dx, px, py, signs, current, r_post, r_cav, ss, Hx, Hy, energy, coverage
):
    nx = xc.shape[0]
    ny = yc.shape[0]
    r_post2 = r_post * r_post
    r_cav2 = r_cav * r_cav
    half = 0.5 * dx
    for i in range(nx):
        for j in range(ny):
            x = xc[i]
            y = yc[j]
            corners = 0
            for sx in (-1.0, 1.0):
                for sy in (-1.0, 1.0):
                    if _in_domain(x + sx * half, y + sy * half, px, py, r_post2, r_cav2):
                        corners += 1
            center_in = _in_domain(x, y, px, py, r_post2, r_cav2)
            if corners == 4:
                hx, hy = _hx_hy(x, y, px, py, signs, current)
                Hx[i, j] = hx
                Hy[i, j] = hy
                energy[i, j] = hx * hx + hy * hy
                coverage[i, j] = 1.0
            elif corners == 0 and not center_in:
                Hx[i, j] = 0.0
                Hy[i, j] = 0.0
                energy[i, j] = 0.0
                coverage[i, j] = 0.0
            else:
                cnt = 0
                acc = 0.0
                for a in range(ss):
                    xs = x - half + (a + 0.5) * dx / ss
                    for b in range(ss):
                        ys = y - half + (b + 0.5) * dx / ss
                        if _in_domain(xs, ys, px, py, r_post2, r_cav2):
                            hx, hy = _hx_hy(xs, ys, px, py, signs, current)
                            acc += hx * hx + hy * hy
                            cnt += 1
                coverage[i, j] = cnt / (ss * ss)
                energy[i, j] = acc / cnt if cnt > 0 else 0.0
                if center_in:
                    hx, hy = _hx_hy(x, y, px, py, signs, current)
                    Hx[i, j] = hx
                    Hy[i, j] = hy
                else:
                    Hx[i, j] = 0.0
                    Hy[i, j] = 0.0


if HAVE_NUMBA:
    _hx_hy = numba.njit(cache=True, inline="always")(_hx_hy)
    _in_domain = numba.njit(cache=True, inline="always")(_in_domain)
    _field_cells_compiled = numba.njit(cache=True)(_field_cells_serial)

    def field_cells_numba(xc, yc, posts, signs, current, r_post, r_cav, subsample=SUBSAMPLE):
        xc = np.ascontiguousarray(xc, dtype=np.float64)
        yc = np.ascontiguousarray(yc, dtype=np.float64)
        posts = np.asarray(posts, dtype=np.float64)
        shape = (xc.size, yc.size)
        Hx = np.empty(shape)
        Hy = np.empty(shape)
        energy = np.empty(shape)
        coverage = np.empty(shape)
        _field_cells_compiled(
            xc,
            yc,
            xc[1] - xc[0],
            np.ascontiguousarray(posts[:, 0]),
            np.ascontiguousarray(posts[:, 1]),
            np.ascontiguousarray(signs, dtype=np.float64),
            current,
            r_post,
            r_cav,
            subsample,
            Hx,
            Hy,
            energy,
            coverage,
        )
        return Hx, Hy, energy, coverage

else:  # pragma: no cover
    field_cells_numba = None


def field_cells_numpy(xc, yc, posts, signs, current, r_post, r_cav, subsample=SUBSAMPLE):
    """Vectorized cell classification and boundary-cell subsampling."""
    xc = np.asarray(xc, dtype=float)
    yc = np.asarray(yc, dtype=float)
    posts = np.asarray(posts, dtype=float)
    signs = np.asarray(signs, dtype=float)
    dx = xc[1] - xc[0]

    def in_domain(x, y):
        ok = x * x + y * y <= r_cav * r_cav
        for (px, py) in posts:
            ok &= (x - px) ** 2 + (y - py) ** 2 >= r_post * r_post
        return ok

    # corner lattice: one row/column more than cells
    cx = np.concatenate([xc - 0.5 * dx, [xc[-1] + 0.5 * dx]])
    cy = np.concatenate([yc - 0.5 * dx, [yc[-1] + 0.5 * dx]])
    CX, CY = np.meshgrid(cx, cy, indexing="ij")
    corner_in = in_domain(CX, CY)
    counts = (
        corner_in[:-1, :-1].astype(int)
        + corner_in[1:, :-1]
        + corner_in[:-1, 1:]
        + corner_in[1:, 1:]
    )

    X, Y = np.meshgrid(xc, yc, indexing="ij")
    center_in = in_domain(X, Y)
    H = line_current_H(np.stack([X, Y], axis=-1), posts, signs, current)
    Hx = np.where(center_in, H[..., 0], 0.0)
    Hy = np.where(center_in, H[..., 1], 0.0)

    full = counts == 4
    empty = (counts == 0) & ~center_in
    cut = ~full & ~empty

    energy = np.where(full, Hx * Hx + Hy * Hy, 0.0)
    coverage = full.astype(float)

    ci, cj = np.nonzero(cut)
    if ci.size:
        ss = subsample
        offs = (np.arange(ss) + 0.5) * dx / ss - 0.5 * dx
        sx = (X[ci, cj][:, None] + offs[None, :])[:, :, None]  # (m, ss, 1)
        sy = (Y[ci, cj][:, None] + offs[None, :])[:, None, :]  # (m, 1, ss)
        px_ = np.broadcast_to(sx, (ci.size, ss, ss)).reshape(ci.size, -1)
        py_ = np.broadcast_to(sy, (ci.size, ss, ss)).reshape(ci.size, -1)
        sub_in = in_domain(px_, py_)
        Hs = line_current_H(np.stack([px_, py_], axis=-1), posts, signs, current)
        e = (Hs[..., 0] ** 2 + Hs[..., 1] ** 2) * sub_in
        cnt = sub_in.sum(axis=1)
        with np.errstate(invalid="ignore"):
            cell_e = np.where(cnt > 0, e.sum(axis=1) / np.maximum(cnt, 1), 0.0)
        energy[ci, cj] = cell_e
        coverage[ci, cj] = cnt / (ss * ss)
    return Hx, Hy, energy, coverage


def field_cells(xc, yc, posts, signs, current, r_post, r_cav, subsample=SUBSAMPLE):
    """Dispatch to the compiled kernel unless disabled by environment."""
    if USE_NUMBA:
        return field_cells_numba(xc, yc, posts, signs, current, r_post, r_cav, subsample)
    return field_cells_numpy(xc, yc, posts, signs, current, r_post, r_cav, subsample)
