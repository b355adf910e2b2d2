"""Model specifications and dense Hamiltonians for four 1D chain families.

All chains are uniform tight-binding chains with hopping -J and a
non-Hermitian element at one or both ends:

  CP  semi-infinite chain with a complex on-site potential J e^{i theta}
      on site 1, hard-truncated to N sites.
  CC  semi-infinite chain whose first bond (1,2) carries the complex
      hopping -J kappa in both directions, truncated to N sites.
  H1  N-site chain with potentials J e^{i theta} on site 1 and
      J e^{-i theta*} on site N.
  H2  N-site chain with end bonds -J kappa (sites 1-2) and +J kappa*
      (sites N-1 - N), both directions each.

Sites are numbered 1..N as in the model equations; row/column i of the
matrix corresponds to site i+1-1 = i (0-based storage).  Energies are in
units of J, times in 1/J.

The truncation of the semi-infinite families is a hard wall at site N.
Callers doing dynamics must pick N > 2*J*T + margin for a run of duration
T (the fastest group velocity is 2J), so nothing reaches the wall.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "Family",
    "ModelSpec",
    "HamiltonianMatrix",
    "build_model",
    "apply_hamiltonian",
    "pt_image",
    "pt_residual",
]


class Family(str, Enum):
    CP = "cp"
    CC = "cc"
    H1 = "h1"
    H2 = "h2"

    @property
    def uses_theta(self) -> bool:
        return self in (Family.CP, Family.H1)


@dataclass(frozen=True)
class ModelSpec:
    """Which chain to build: family, size, and the one complex parameter.

    theta is the end-potential phase (CP/H1), kappa the end-bond hopping
    ratio (CC/H2).  Exactly the parameter belonging to the family must be
    given; the other must stay None.
    """

    family: Family
    N: int
    theta: complex | None = None
    kappa: complex | None = None
    J: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not isinstance(self.N, (int, np.integer)) or self.N < 4:
            raise ValueError(f"N must be an integer >= 4, got {self.N!r}")
        if not (math.isfinite(self.J) and self.J > 0):
            raise ValueError(f"J must be a positive finite real, got {self.J!r}")
        if self.family.uses_theta:
            if self.theta is None or self.kappa is not None:
                raise ValueError(f"{self.family.value} takes theta only")
        else:
            if self.kappa is None or self.theta is not None:
                raise ValueError(f"{self.family.value} takes kappa only")
        p = complex(self.param)
        if not (math.isfinite(p.real) and math.isfinite(p.imag)):
            raise ValueError(f"non-finite model parameter {p!r}")

    @property
    def param(self) -> complex:
        return self.theta if self.family.uses_theta else self.kappa  # type: ignore[return-value]

    def to_json_dict(self) -> dict:
        d: dict = {"family": self.family.value}
        p = complex(self.param)
        key = "theta" if self.family.uses_theta else "kappa"
        d[key] = {"re": p.real, "im": p.imag}
        d["J"] = self.J
        d["N"] = self.N
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "ModelSpec":
        family = Family(d["family"])
        kw: dict = {}
        for key in ("theta", "kappa"):
            if key in d and d[key] is not None:
                c = d[key]
                kw[key] = complex(c["re"], c["im"])
        return cls(family=family, N=int(d["N"]), J=float(d.get("J", 1.0)), **kw)


@dataclass(frozen=True)
class HamiltonianMatrix:
    """Dense complex matrix of a ModelSpec, entries in units of J."""

    matrix: np.ndarray
    spec: ModelSpec

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


def build_model(spec: ModelSpec) -> HamiltonianMatrix:
    """Assemble the tridiagonal matrix of the requested family."""
    N, J = spec.N, spec.J
    h = np.zeros((N, N), dtype=np.complex128)
    for i in range(N - 1):
        h[i, i + 1] = h[i + 1, i] = -J

    if spec.family is Family.CP:
        h[0, 0] = J * cmath.exp(1j * spec.theta)
    elif spec.family is Family.H1:
        h[0, 0] = J * cmath.exp(1j * spec.theta)
        h[N - 1, N - 1] = J * cmath.exp(-1j * np.conj(spec.theta))
    elif spec.family is Family.CC:
        h[0, 1] = h[1, 0] = -J * spec.kappa
    else:  # H2; right bond sign is +J kappa* as the model is written
        h[0, 1] = h[1, 0] = -J * spec.kappa
        h[N - 2, N - 1] = h[N - 1, N - 2] = +J * np.conj(spec.kappa)

    h.setflags(write=False)
    return HamiltonianMatrix(matrix=h, spec=spec)


def apply_hamiltonian(h: HamiltonianMatrix, amplitudes: np.ndarray) -> np.ndarray:
    """Matrix-vector product H @ psi with a dimension check."""
    psi = np.asarray(amplitudes, dtype=np.complex128)
    if psi.shape != (h.dimension,):
        raise ValueError(f"state length {psi.shape} does not match dimension {h.dimension}")
    return h.matrix @ psi


def _parity_signs(family: Family, N: int) -> np.ndarray:
    """Signs s_i of the antiunitary symmetry map entry (i,j) -> s_i s_j (P(i),P(j))*.

    For H1 the symmetry is plain site reflection plus conjugation.  For H2
    as written here (+J kappa* on the right bond) the plain reflection map
    sends the right bond to -J kappa, so the symmetry holds only composed
    with a sign flip of the two end basis states; that flip is a diagonal
    gauge, so the spectra and all gauge-invariant quantities are untouched.
    """
    s = np.ones(N)
    if family is Family.H2:
        s[0] = s[-1] = -1.0
    return s


def pt_image(h: HamiltonianMatrix) -> np.ndarray:
    """Image of the matrix under the family's parity-conjugation symmetry."""
    family = h.spec.family
    if family not in (Family.H1, Family.H2):
        raise ValueError("parity-conjugation symmetry is defined for h1/h2 only")
    s = _parity_signs(family, h.dimension)
    m = h.matrix.conj()[::-1, ::-1]
    return m * np.outer(s, s)


def pt_residual(h: HamiltonianMatrix) -> float:
    """Max-abs deviation of H from its parity-conjugation image (0 = symmetric)."""
    return float(np.max(np.abs(pt_image(h) - h.matrix)))
