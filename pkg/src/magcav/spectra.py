"""Transmission synthesis: S21 lines, density maps, noise injection.

The response is the standard input-output form for one driven cavity mode
dressed by loss-laden magnon oscillators.  All rates are linear-frequency
Hz: the loaded cavity linewidth kappa splits as kappa = kappa0 (1 + beta1
+ beta2) into internal and per-port external parts, and

    S21(f) = sqrt(kappa1 kappa2) * [A(f)^-1]_cc,
    A(f)   = Gamma/2 + i (M - f I)

with M the frequency matrix (bare frequencies on the diagonal, g/pi/2 off
it).  For a star of magnons hanging off the cavity this reduces to the
usual sum of (g/2)^2 / (i (f_j - f) + gamma_j/2) terms in the denominator;
the matrix form also covers chained topologies where magnons couple to
each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .core import DomainError, HybridModel

__all__ = [
    "SingularResponseError",
    "PortCouplings",
    "DensityMap",
    "s21",
    "density_map",
    "lorentzian",
    "add_noise",
]


class SingularResponseError(DomainError):
    """The response has no damping to regularize it."""


@dataclass(frozen=True)
class PortCouplings:
    """Dimensionless input/output port couplings beta_i = kappa_i/kappa_0."""

    beta1: float = 0.01
    beta2: float = 0.01

    def __post_init__(self) -> None:
        if self.beta1 < 0.0 or self.beta2 < 0.0:
            raise DomainError("port couplings must be >= 0")
        if not self.beta1 + self.beta2 < 1.0:
            raise DomainError("beta1 + beta2 must stay below 1")

    def external_rates(self, kappa: float) -> tuple[float, float]:
        """(kappa1, kappa2) in Hz given the loaded linewidth kappa."""
        kappa0 = kappa / (1.0 + self.beta1 + self.beta2)
        return self.beta1 * kappa0, self.beta2 * kappa0

    def amplitude(self, kappa: float) -> float:
        """sqrt(kappa1 kappa2), the transmission numerator (Hz)."""
        k1, k2 = self.external_rates(kappa)
        return math.sqrt(k1 * k2)


def s21(f, model: HybridModel, ports: PortCouplings, B: float = 0.0):
    """Complex transmission at frequency f (Hz), scalar or array.

    The model is evaluated at bias ``B``; the driven and read-out mode is
    the model's cavity mode.
    """
    kappa = model.modes[model.cavity_index].linewidth
    if kappa <= 0.0:
        raise SingularResponseError("cavity linewidth must be positive")
    f_arr = np.atleast_1d(np.asarray(f, dtype=float))
    n = model.n_modes
    c = model.cavity_index
    M = model.matrix_at(B)
    A = np.broadcast_to(1j * M + np.diag(0.5 * model.linewidths), (f_arr.size, n, n)).copy()
    idx = np.arange(n)
    A[:, idx, idx] -= 1j * f_arr[:, None]
    rhs = np.zeros((n, 1), dtype=complex)
    rhs[c, 0] = 1.0
    sol = np.linalg.solve(A, np.broadcast_to(rhs, (f_arr.size, n, 1)))
    out = ports.amplitude(kappa) * sol[:, c, 0]
    return out[0] if np.isscalar(f) or np.ndim(f) == 0 else out


@dataclass(frozen=True, eq=False)
class DensityMap:
    """|S21| on a (B, f) grid, linear amplitude, with provenance strings."""

    B_axis: np.ndarray
    f_axis: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "B_axis", np.asarray(self.B_axis, dtype=float))
        object.__setattr__(self, "f_axis", np.asarray(self.f_axis, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.shape != (self.B_axis.size, self.f_axis.size):
            raise DomainError("values must be shaped (len(B_axis), len(f_axis))")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("map values must be finite")
        if np.any(self.values < 0.0):
            raise DomainError("map values are linear amplitudes, >= 0")

    def to_db(self, floor: float = -200.0) -> np.ndarray:
        """20 log10 |S21|, clipped below at ``floor`` to stay finite."""
        tiny = 10.0 ** (floor / 20.0)
        return 20.0 * np.log10(np.maximum(self.values, tiny))

    def write_csv(self, path) -> None:
        """Long-form rows B_T, f_Hz, s21_dB; B outer loop, f inner."""
        db = self.to_db()
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("B_T,f_Hz,s21_dB\n")
            for i, b in enumerate(self.B_axis):
                for j, fr in enumerate(self.f_axis):
                    fh.write(f"{b:.9e},{fr:.9e},{db[i, j]:.9e}\n")

    @classmethod
    def read_csv(cls, path) -> "DensityMap":
        """Rebuild a map from long-form CSV (grid must be complete)."""
        raw = np.loadtxt(path, delimiter=",", skiprows=1)
        if raw.ndim != 2 or raw.shape[1] != 3:
            raise DomainError("expected three columns: B_T, f_Hz, s21_dB")
        B_axis = np.unique(raw[:, 0])
        f_axis = np.unique(raw[:, 1])
        if raw.shape[0] != B_axis.size * f_axis.size:
            raise DomainError("CSV rows do not tile a complete (B, f) grid")
        values = np.empty((B_axis.size, f_axis.size))
        bi = np.searchsorted(B_axis, raw[:, 0])
        fj = np.searchsorted(f_axis, raw[:, 1])
        values[bi, fj] = 10.0 ** (raw[:, 2] / 20.0)
        return cls(B_axis, f_axis, values, {"source": str(path)})

    def write_pgm(self, path, db_min: float = -120.0, db_max: float = 0.0) -> None:
        """8-bit binary PGM, row = frequency (ascending), column = field.

        Grayscale is linear in dB between the clamps recorded in the
        header comment; values outside are saturated.
        """
        if not db_min < db_max:
            raise DomainError("db_min must lie below db_max")
        db = np.clip(self.to_db(), db_min, db_max)
        gray = np.rint((db - db_min) * (255.0 / (db_max - db_min))).astype(np.uint8)
        header = (
            f"P5\n# dB clamps [{db_min:g}, {db_max:g}]\n"
            f"{self.B_axis.size} {self.f_axis.size}\n255\n"
        )
        with open(path, "wb") as fh:
            fh.write(header.encode("ascii"))
            fh.write(gray.T.tobytes())  # row index runs along f


def density_map(
    model: HybridModel,
    B_axis,
    f_axis,
    ports: PortCouplings,
    metadata: dict | None = None,
) -> DensityMap:
    """Evaluate |s21| over the grid with the batched response kernel."""
    B_axis = np.asarray(B_axis, dtype=float)
    f_axis = np.asarray(f_axis, dtype=float)
    for name, ax in (("B_axis", B_axis), ("f_axis", f_axis)):
        if ax.ndim != 1 or ax.size == 0:
            raise DomainError(f"{name} must be a nonempty 1-D array")
        if ax.size > 1 and not np.all(np.diff(ax) > 0):
            raise DomainError(f"{name} must be strictly increasing")
    kappa = model.modes[model.cavity_index].linewidth
    if kappa <= 0.0:
        raise SingularResponseError("cavity linewidth must be positive")
    freqs = np.stack([model.frequencies_at(b) for b in B_axis])
    values = _kernels.response_map(
        freqs,
        0.5 * model.linewidths,
        0.5 * model.couplings,
        model.cavity_index,
        f_axis,
        ports.amplitude(kappa),
    )
    meta = {
        "modes": ";".join(
            f"{m.kind.value}:{m.f0:.9e}:{m.linewidth:.9e}" for m in model.modes
        ),
        "beta1": repr(ports.beta1),
        "beta2": repr(ports.beta2),
    }
    if metadata:
        meta.update(metadata)
    return DensityMap(B_axis, f_axis, values, meta)


def lorentzian(f, amplitude, f0, fwhm, baseline=0.0):
    """baseline + amplitude * (w/2)^2 / ((f - f0)^2 + (w/2)^2)."""
    if not fwhm > 0.0:
        raise DomainError("fwhm must be > 0")
    half2 = (0.5 * fwhm) ** 2
    return baseline + amplitude * half2 / ((np.asarray(f, dtype=float) - f0) ** 2 + half2)


def add_noise(dmap: DensityMap, seed: int, sigma: float) -> DensityMap:
    """Seeded Gaussian amplitude noise; magnitudes stay non-negative.

    The counter-based generator makes the draw a pure function of
    (seed, grid shape), independent of threading or platform.
    """
    if sigma < 0.0:
        raise DomainError("sigma must be >= 0")
    if sigma == 0.0:
        return replace(dmap, metadata=dict(dmap.metadata))
    rng = np.random.Generator(np.random.Philox(seed))
    noisy = np.abs(dmap.values + rng.normal(0.0, sigma, dmap.values.shape))
    meta = dict(dmap.metadata)
    meta.update({"noise_sigma": repr(sigma), "noise_seed": str(seed)})
    return DensityMap(dmap.B_axis, dmap.f_axis, noisy, meta)
