"""Dense non-Hermitian eigendecomposition and eigenvector analysis.

The eigensolver is the LAPACK general complex path (Hessenberg reduction +
shifted QR, zgeev) via numpy.  Every eigenpair is residual-checked against
the contract ||H v - E v|| <= 1e-10 ||H||_F and eigenvalues are returned in
lexicographic (Re, Im) order so downstream output files are stable.

Lead wavefunctions on the uniform part of a chain are superpositions
A z^j + B z^{-j} with z = e^{i k + beta}; fit_lead_wave recovers (k, beta,
A, B) by order-2 linear prediction and classifies the window as a
scattering wave (SS, beta ~ 0), a monotonic damping wave (MD, beta < 0 and
k in {0, pi}) or an oscillation damping wave (OD, beta < 0, k elsewhere).
OD windows are the fingerprint of complex energy levels.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "IM_TOL",
    "BETA_TOL",
    "K_TOL",
    "EigenSystem",
    "EigendecompositionError",
    "eigendecompose",
    "SpectrumClass",
    "classify_levels",
    "WaveKind",
    "LeadWaveClass",
    "NoSignalError",
    "fit_lead_wave",
    "ipr",
]

IM_TOL = 1e-8      # |Im E| above this (in units of J) counts as complex
BETA_TOL = 1e-6    # |beta| below this counts as a non-decaying wave
K_TOL = 1e-6       # distance of k from {0, pi} for the MD label


class EigendecompositionError(RuntimeError):
    def __init__(self, message: str, worst_residual: float):
        super().__init__(message)
        self.worst_residual = worst_residual


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues (sorted by (Re, Im)), unit-norm right eigenvectors as
    columns of `vectors`, and per-pair residuals ||H v - E v||."""

    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray

    @property
    def dimension(self) -> int:
        return len(self.values)


def eigendecompose(h) -> EigenSystem:
    """Full eigensystem of a HamiltonianMatrix with residual guarantee."""
    m = h.matrix
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    try:
        values, vectors = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise EigendecompositionError(f"QR iteration failed: {exc}", np.inf) from exc

    order = np.lexsort((values.imag, values.real))
    values = values[order]
    vectors = vectors[:, order]
    vectors = vectors / np.linalg.norm(vectors, axis=0)
    # fix the free phase: largest-modulus component made real and positive
    for c in range(vectors.shape[1]):
        i = int(np.argmax(np.abs(vectors[:, c])))
        ph = vectors[i, c]
        vectors[:, c] *= np.conj(ph) / abs(ph)

    residuals = np.linalg.norm(m @ vectors - vectors * values, axis=0)
    bound = 1e-10 * np.linalg.norm(m)
    worst = float(residuals.max())
    if worst > bound:
        raise EigendecompositionError(
            f"eigenpair residual {worst:.3e} exceeds contract {bound:.3e}", worst
        )
    return EigenSystem(values=values, vectors=vectors, residuals=residuals)


@dataclass(frozen=True)
class SpectrumClass:
    """Counts and conjugate-pair structure of a spectrum.

    pairs holds index pairs (i, j) with values[i] ~ conj(values[j]),
    Im values[i] > 0.  Complex levels without a partner within
    100*im_tol land in `unmatched` instead of being dropped.
    """

    n_real: int
    n_complex: int
    pairs: list
    unmatched: list


def classify_levels(es: EigenSystem, im_tol: float = IM_TOL) -> SpectrumClass:
    """Split levels into real and complex and match conjugate pairs."""
    im = es.values.imag
    ups = [i for i in range(es.dimension) if im[i] > im_tol]
    downs = [i for i in range(es.dimension) if im[i] < -im_tol]
    n_complex = len(ups) + len(downs)

    pairs = []
    unmatched = []
    remaining = list(downs)
    for i in ups:
        if remaining:
            dist = [abs(es.values[i] - np.conj(es.values[j])) for j in remaining]
            best = int(np.argmin(dist))
            if dist[best] <= 100 * im_tol:
                pairs.append((i, remaining.pop(best)))
                continue
        unmatched.append(i)
    unmatched.extend(remaining)

    return SpectrumClass(
        n_real=es.dimension - n_complex,
        n_complex=n_complex,
        pairs=pairs,
        unmatched=sorted(unmatched),
    )


class WaveKind(str, Enum):
    SS = "ss"
    MD = "md"
    OD = "od"


@dataclass(frozen=True)
class LeadWaveClass:
    kind: WaveKind
    k: float
    beta: float
    A: complex
    B: complex
    fit_residual: float


class NoSignalError(RuntimeError):
    pass


def _classify_wave(k: float, beta: float, beta_tol: float, k_tol: float) -> WaveKind:
    if abs(beta) < beta_tol:
        return WaveKind.SS
    dist_md = min(k, abs(k - np.pi), abs(k - 2 * np.pi))
    return WaveKind.MD if dist_md < k_tol else WaveKind.OD


def fit_lead_wave(
    v: np.ndarray,
    window: tuple,
    beta_tol: float = BETA_TOL,
    k_tol: float = K_TOL,
) -> LeadWaveClass:
    """Fit f(j) = A z^j + B z^{-j} on sites window=(lo, hi), 1-based inclusive.

    Linear prediction: solve f(j+2) = c1 f(j+1) + c0 f(j) in least squares
    and take the characteristic roots.  The root with |z| <= 1 is reported,
    so beta = -|ln|z|| <= 0 always; k = arg z mod 2pi.  A window carrying a
    single exponential makes the order-2 problem rank deficient, in which
    case an order-1 fit is used and B = 0.
    """
    v = np.asarray(v, dtype=np.complex128)
    lo, hi = int(window[0]), int(window[1])
    if not (1 <= lo < hi <= len(v)):
        raise ValueError(f"window {window} outside sites 1..{len(v)}")
    if hi - lo + 1 < 8:
        raise ValueError("window must contain at least 8 sites")
    f = v[lo - 1 : hi]
    peak = float(np.max(np.abs(f)))
    if peak == 0.0 or peak < 1e-12 * float(np.max(np.abs(v))):
        raise NoSignalError(f"window {window} carries no usable amplitude")

    m = np.column_stack([f[1:-1], f[:-2]])
    y = f[2:]
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    if s[1] < 1e-8 * s[0]:
        # single exponential: order-1 prediction f(j+1) = z f(j)
        z = complex(np.vdot(f[:-1], f[1:]) / np.vdot(f[:-1], f[:-1]))
        roots = [z]
    else:
        c = vt.conj().T @ ((u.conj().T @ y) / s)
        rts = np.roots([1.0, -c[0], -c[1]])
        roots = sorted(rts, key=abs)

    z = roots[0]
    if abs(z) > 1.0:
        z = 1.0 / z
    if z == 0.0:
        raise NoSignalError("degenerate window: predicted root is zero")
    k = float(np.angle(z) % (2 * np.pi))
    beta = -abs(np.log(abs(z)))

    # amplitudes on absolute site indices; solve with exponents shifted to
    # the window start for conditioning, then undo the shift
    j = np.arange(lo, hi + 1)
    cols = [z ** (j - lo)]
    if len(roots) > 1:
        cols.append((1.0 / z) ** (j - lo).astype(float))
    basis = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(basis, f, rcond=None)
    fit = basis @ coef
    residual = float(np.linalg.norm(f - fit) / np.linalg.norm(f))
    with np.errstate(over="ignore"):
        a = complex(coef[0] * z ** (-lo))
        b = complex(coef[1] * z ** lo) if len(coef) > 1 else 0j

    return LeadWaveClass(
        kind=_classify_wave(k, beta, beta_tol, k_tol),
        k=k,
        beta=beta,
        A=a,
        B=b,
        fit_residual=residual,
    )


def ipr(v: np.ndarray) -> float:
    """Inverse participation ratio sum|v|^4 / (sum|v|^2)^2 in [1/N, 1]."""
    a2 = np.abs(np.asarray(v)) ** 2
    total = a2.sum()
    if total == 0.0:
        raise ValueError("ipr of the zero vector is undefined")
    return float((a2 **  2).sum() / total ** 2)
