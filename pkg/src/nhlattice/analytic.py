"""Closed-form results for the chain families and the finders built on them.

Reflection amplitudes on the uniform lead (momentum k, energy -2J cos k):

  end potential : R(k) = -(1 + e^{i(theta+k)}) / (1 + e^{i(theta-k)})
  end dimer     : R(k) = -((kappa^2-1) e^{2ik} - 1) / ((kappa^2-1) e^{-2ik} - 1)

Decaying lead solutions (complex k, Im k > 0) exist for the end-potential
chain iff Im(theta) < 0, with k = pi - theta, and for the end-dimer chain
iff |kappa|^4 - 2 Re(kappa^2) > 0, with k = (i/2) ln(kappa^2 - 1) and that
plus pi.  The two parameter-plane boundaries are the circle |e^{i theta}|=1
(theta real) and a lemniscate of Bernoulli in kappa.  On the boundary the
lead hosts unidirectional plane waves; ep_wave packages their momenta,
energies, currents and profiles.

The finite two-ended chains have real-k quantization functions (Gamma for
the potential pair, Delta for the dimer pair); their double roots in k are
the finite-size exceptional points, located here by a damped two-variable
Newton iteration with finite-difference derivatives.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .lattice import Family, ModelSpec

__all__ = [
    "ReflectionPole",
    "reflection_cp",
    "reflection_cc",
    "BoundState",
    "bound_state_cp",
    "bound_states_cc",
    "Region",
    "BoundaryKind",
    "PhaseReport",
    "phase_classify",
    "EpWave",
    "EpReport",
    "ep_wave",
    "ep_profile",
    "CriticalEqCoeffs",
    "critical_coeffs",
    "gamma_h1",
    "delta_h2",
    "critical_function",
    "find_real_roots",
    "NonConvergenceError",
    "find_exceptional_point",
    "optimal_reflectionless",
    "check_reciprocity",
]

POLE_TOL = 1e-14


class ReflectionPole(ArithmeticError):
    """Denominator underflow: the requested (k, parameter) sits on a resonance."""

    def __init__(self, message: str, k, param):
        super().__init__(message)
        self.k = k
        self.param = param


def reflection_cp(k: float, theta: complex) -> complex:
    """Reflection amplitude of the end-potential chain at real momentum k.

    The physical incident channel is k in (0, pi); the formula itself is
    valid for any real k, which the reciprocity check exploits.
    """
    num = 1 + cmath.exp(1j * (theta + k))
    den = 1 + cmath.exp(1j * (theta - k))
    if abs(den) <= POLE_TOL:
        raise ReflectionPole(f"reflection pole at k={k!r}, theta={theta!r}", k, theta)
    return -num / den


def reflection_cc(k: float, kappa: complex) -> complex:
    """Reflection amplitude of the end-dimer chain at real momentum k."""
    w = kappa * kappa - 1
    num = w * cmath.exp(2j * k) - 1
    den = w * cmath.exp(-2j * k) - 1
    if abs(den) <= POLE_TOL:
        raise ReflectionPole(f"reflection pole at k={k!r}, kappa={kappa!r}", k, kappa)
    return -num / den


@dataclass(frozen=True)
class BoundState:
    """Decaying lead solution: complex momentum with Im k > 0 and its energy."""

    k: complex
    energy: complex


def _fold_k(k: complex) -> complex:
    return complex(k.real % (2 * math.pi), k.imag)


def bound_state_cp(theta: complex, J: float = 1.0) -> BoundState | None:
    """The unique decaying solution k = pi - theta, present iff Im(theta) < 0."""
    if theta.imag >= 0:
        return None
    k = _fold_k(math.pi - theta)
    return BoundState(k=k, energy=-2 * J * cmath.cos(k))


def bound_states_cc(kappa: complex, J: float = 1.0) -> list:
    """Decaying solutions (i/2) ln(kappa^2-1) and that plus pi; zero or two.

    Both candidates share Im k = (1/2) ln|kappa^2-1|, so the list is empty
    exactly when |kappa|^4 - 2 Re(kappa^2) <= 0.
    """
    w = kappa * kappa - 1
    if w == 0:
        raise ValueError("kappa^2 = 1 is a branch point of the bound-state momenta")
    base = 0.5j * cmath.log(w)
    out = []
    for k in (base, base + math.pi):
        if k.imag > 0:
            k = _fold_k(k)
            out.append(BoundState(k=k, energy=-2 * J * cmath.cos(k)))
    return out


class Region(str, Enum):
    UNBROKEN = "unbroken"
    BROKEN = "broken"
    BOUNDARY = "boundary"


class BoundaryKind(str, Enum):
    CIRCLE = "circle"
    LEMNISCATE = "lemniscate"


@dataclass(frozen=True)
class PhaseReport:
    region: Region
    indicator: float
    boundary_kind: BoundaryKind


def phase_indicator(family: Family, param: complex) -> float:
    """Signed distance function: < 0 unbroken for theta families, > 0 broken."""
    if family in (Family.CP, Family.H1):
        return float(param.imag)
    return float(abs(param) ** 4 - 2 * (param * param).real)


def phase_classify(spec: ModelSpec, boundary_tol: float = 1e-9) -> PhaseReport:
    """Locate the parameter relative to the family's phase boundary.

    The two-ended families classify through the matching one-ended family
    (same boundary in the large-N limit).  Note the indicator convention
    differs per family: theta families break for indicator < 0, kappa
    families for indicator > 0.
    """
    family = spec.family
    ind = phase_indicator(family, spec.param)
    if family in (Family.CP, Family.H1):
        kind = BoundaryKind.CIRCLE
        broken = ind < -boundary_tol
        unbroken = ind > boundary_tol
    else:
        kind = BoundaryKind.LEMNISCATE
        broken = ind > boundary_tol
        unbroken = ind < -boundary_tol
    region = Region.BROKEN if broken else (Region.UNBROKEN if unbroken else Region.BOUNDARY)
    return PhaseReport(region=region, indicator=ind, boundary_kind=kind)


@dataclass(frozen=True)
class EpWave:
    k_c: float
    energy: float
    current: float


@dataclass(frozen=True)
class EpReport:
    """Unidirectional plane waves hosted on the lead at a boundary parameter.

    The end-potential chain has one wave (k_c = pi - theta_c); the
    end-dimer chain has two, at k_c = phi/2 and phi/2 + pi, where phi is
    fixed by kappa_c^2 - 1 = e^{-i phi}.  That branch of phi satisfies
    tan(phi) = -2 Im(kappa^2)/(|kappa|^4 - 2) and is the one whose waves
    solve the lattice equations (and zero the reflection amplitude);
    on the lobe through kappa^2 = 1+i it is 3pi/2, not pi/2.
    """

    family: Family
    param_c: complex
    k_c: float
    phi: float | None
    waves: tuple


class OffBoundaryError(ValueError):
    pass


def ep_wave(spec: ModelSpec, boundary_tol: float = 1e-9) -> EpReport:
    """Exceptional-point wave data; requires phase_classify -> BOUNDARY."""
    report = phase_classify(spec, boundary_tol)
    if report.region is not Region.BOUNDARY:
        raise OffBoundaryError(
            f"parameter {spec.param!r} is {report.region.value}, not on the boundary"
        )
    J = spec.J
    if spec.family in (Family.CP, Family.H1):
        theta_c = float(spec.param.real)
        k_c = (math.pi - theta_c) % (2 * math.pi)
        wave = EpWave(k_c=k_c, energy=-2 * J * math.cos(k_c), current=2 * J * math.sin(k_c))
        return EpReport(family=spec.family, param_c=theta_c, k_c=k_c, phi=None, waves=(wave,))

    kappa_c = complex(spec.param)
    phi = (-cmath.phase(kappa_c * kappa_c - 1)) % (2 * math.pi)
    waves = []
    for k_c in (phi / 2, phi / 2 + math.pi):
        k_c %= 2 * math.pi
        waves.append(EpWave(k_c=k_c, energy=-2 * J * math.cos(k_c), current=2 * J * math.sin(k_c)))
    return EpReport(family=spec.family, param_c=kappa_c, k_c=waves[0].k_c, phi=phi,
                    waves=tuple(waves))


def ep_profile(report: EpReport, n_sites: int, branch: int = 0) -> np.ndarray:
    """Materialize the plane-wave profile e^{i k_c j} on sites 1..n_sites.

    For the end-dimer families the site-1 amplitude is reduced by 1/kappa_c.
    """
    wave = report.waves[branch]
    j = np.arange(1, n_sites + 1)
    f = np.exp(1j * wave.k_c * j).astype(np.complex128)
    if report.family in (Family.CC, Family.H2):
        f[0] /= report.param_c
    return f


@dataclass(frozen=True)
class CriticalEqCoeffs:
    """chi1 = kappa^2 + kappa*^2 - 2 and chi2 = chi1 - |kappa|^4 + 1 (both real)."""

    chi1: float
    chi2: float


def critical_coeffs(kappa: complex) -> CriticalEqCoeffs:
    c1 = kappa * kappa + np.conj(kappa) ** 2 - 2
    c2 = c1 - abs(kappa) ** 4 + 1
    scale = max(1.0, abs(kappa) ** 4)
    if max(abs(c1.imag), abs(c2.imag)) > 1e-14 * scale:
        raise ValueError(f"critical coefficients not real: {c1!r}, {c2!r}")
    return CriticalEqCoeffs(chi1=float(c1.real), chi2=float(c2.real))


def gamma_h1(k: float, theta: complex, N: int) -> float:
    """Real-k quantization function of the two-ended potential chain."""
    if N < 2:
        raise ValueError("N must be >= 2")
    a, b = theta.real, theta.imag
    return (math.exp(-2 * b) * math.sin(k * (N - 1))
            + math.sin(k * (N + 1))
            + 2 * math.exp(-b) * math.cos(a) * math.sin(k * N))


def delta_h2(k: float, kappa: complex, N: int) -> float:
    """Real-k quantization function of the two-ended dimer chain."""
    if N < 4:
        raise ValueError("N must be >= 4")
    c = critical_coeffs(kappa)
    return (c.chi2 * math.sin(k * (N - 3))
            + c.chi1 * math.sin(k * (N - 1))
            - math.sin(k * (N + 1)))


def critical_function(family: Family, param: complex, N: int):
    """The family's quantization function as a real callable of k."""
    family = Family(family)
    if family is Family.H1:
        return lambda k: gamma_h1(k, param, N)
    if family is Family.H2:
        return lambda k: delta_h2(k, param, N)
    raise ValueError("critical functions exist for the two-ended families h1/h2")


def find_real_roots(f, interval: tuple, grid_n: int) -> list:
    """All sign-change roots of f on [lo, hi], refined by bisection to 1e-12.

    The grid must resolve every sign change; for the quantization functions
    (roots spaced ~ pi/N) use grid_n >= 20 N.  Returned ascending.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not (hi > lo) or grid_n < 2:
        raise ValueError("need hi > lo and grid_n >= 2")
    ks = np.linspace(lo, hi, int(grid_n))
    vals = np.array([f(k) for k in ks], dtype=float)
    roots = []
    for i in range(len(ks) - 1):
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            roots.append(float(ks[i]))
            continue
        if fa * fb < 0:
            a, b = float(ks[i]), float(ks[i + 1])
            for _ in range(100):
                m = 0.5 * (a + b)
                fm = f(m)
                if fa * fm <= 0:
                    b = m
                else:
                    a, fa = m, fm
                if b - a < 1e-12:
                    break
            roots.append(0.5 * (a + b))
    if len(vals) and vals[-1] == 0.0:
        roots.append(float(ks[-1]))
    return roots


class NonConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float, point: tuple):
        super().__init__(message)
        self.residual = residual
        self.point = point


def _secant_min_abs(g, x0: float, dx0: float = 1e-5, itmax: int = 80) -> float:
    """Secant iteration tracking the iterate of smallest |g|."""
    x1, x2 = x0, x0 + dx0
    g1, g2 = g(x1), g(x2)
    best = (abs(g1), x1)
    for _ in range(itmax):
        if g2 == g1:
            break
        x3 = x2 - g2 * (x2 - x1) / (g2 - g1)
        x1, g1 = x2, g2
        x2, g2 = x3, g(x3)
        if abs(g2) < best[0]:
            best = (abs(g2), x2)
        if abs(x2 - x1) < 1e-16 * (1 + abs(x2)):
            break
    return best[1]


def find_exceptional_point(
    family: Family,
    N: int,
    start: tuple,
    tol: float = 1e-10,
    itmax: int = 200,
    fd_step: float = 1e-6,
) -> tuple:
    """Double root (k_c, param_c) of the quantization function, param real.

    Solves F = (f, df/dk) = 0 by damped (Levenberg-regularized) Newton with
    central finite differences of step fd_step, followed by an alternating
    one-dimensional polish, starting from start = (k0, param0).  For h1 the
    real parameter is theta, for h2 it is kappa.  Convergence residual is
    max(|f|, |df/dk| / (N+1)); the derivative component is scale-normalized
    because |df/dk| grows like N and its finite-difference evaluation
    carries cancellation noise of order eps/fd_step.

    The start must lie in the basin of a double root (scan first).  Note
    the real-kappa exceptional points of h2 sit at the band edge, so starts
    there need k0 within the first momentum lobe, k0 < pi/N.
    """
    family = Family(family)
    if family is Family.H1:
        fval = lambda k, p: gamma_h1(k, p, N)
    elif family is Family.H2:
        fval = lambda k, p: delta_h2(k, p, N)
    else:
        raise ValueError("exceptional-point search applies to h1/h2")

    h = fd_step
    scale2 = N + 1

    def F(x):
        g = lambda kk: fval(kk, x[1])
        return np.array([g(x[0]), (g(x[0] + h) - g(x[0] - h)) / (2 * h)])

    def res(Fv) -> float:
        return max(abs(Fv[0]), abs(Fv[1]) / scale2)

    x = np.array(start, dtype=float)
    if x.shape != (2,):
        raise ValueError("start must be (k0, param0)")
    best = (np.inf, x.copy())

    for _ in range(itmax):
        Fv = F(x)
        r = res(Fv)
        if r < best[0]:
            best = (r, x.copy())
        if r < tol:
            return float(x[0]), float(x[1])
        Jm = np.zeros((2, 2))
        for c in range(2):
            xp = x.copy(); xm = x.copy()
            xp[c] += h; xm[c] -= h
            Jm[:, c] = (F(xp) - F(xm)) / (2 * h)
        n0 = np.linalg.norm(Fv)
        step = None
        mu = 0.0
        for _ in range(8):
            try:
                cand = np.linalg.solve(Jm.T @ Jm + mu * np.eye(2), -Jm.T @ Fv)
            except np.linalg.LinAlgError:
                mu = max(10 * mu, 1e-12)
                continue
            lam = 1.0
            accepted = False
            for _ in range(20):
                if np.linalg.norm(F(x + lam * cand)) < n0:
                    accepted = True
                    break
                lam /= 2
            if accepted:
                step = lam * cand
                break
            mu = max(10 * mu, 1e-8 * np.trace(Jm.T @ Jm))
        if step is None:
            break
        x = x + step

    # near coincidence roots the Jacobian degenerates; polish by
    # alternating 1D solves of df/dk = 0 in k and f = 0 in the parameter
    x = best[1].copy()
    for _ in range(300):
        x[0] = _secant_min_abs(
            lambda kk: (fval(kk + h, x[1]) - fval(kk - h, x[1])) / (2 * h), x[0])
        x[1] = _secant_min_abs(lambda pp: fval(x[0], pp), x[1])
        r = res(F(x))
        if r < best[0]:
            best = (r, x.copy())
        if r < tol:
            return float(x[0]), float(x[1])

    raise NonConvergenceError(
        f"no double root found from {tuple(start)!r}: residual {best[0]:.3e}",
        best[0], (float(best[1][0]), float(best[1][1])))


def _abs_reflection(family: Family, param: complex, k: float) -> float:
    r = reflection_cp(k, param) if family in (Family.CP, Family.H1) else reflection_cc(k, param)
    return abs(r)


def optimal_reflectionless(family: Family) -> tuple:
    """Parameter and momentum where |R| vanishes with a flat minimum.

    End potential: theta = pi/2 with k_c = pi/2.  End dimer: kappa^2 = 1-i
    (principal square root returned) with k_c = pi/4; the conjugate lobe
    kappa^2 = 1+i zeroes R at 3pi/4 instead.  Both stated conditions are
    verified numerically before returning.
    """
    family = Family(family)
    if family in (Family.CP, Family.H1):
        param: complex = math.pi / 2
        k_c = math.pi / 2
    else:
        param = cmath.sqrt(1 - 1j)
        k_c = math.pi / 4
    if _abs_reflection(family, param, k_c) >= 1e-12:
        raise RuntimeError("reflection zero check failed")
    h = 1e-6
    slope = (_abs_reflection(family, param, k_c + h)
             - _abs_reflection(family, param, k_c - h)) / (2 * h)
    if abs(slope) >= 1e-8:
        raise RuntimeError("reflection flatness check failed")
    return param, k_c


def check_reciprocity(family: Family, param: complex, k: float) -> float:
    """Residual |1/R(k) - R(-k)|, an exact identity for both families.

    Raises ReflectionPole when either momentum sits on a resonance, or when
    R(k) = 0 (which is a pole of the reciprocal); sweeps skip those draws.
    """
    family = Family(family)
    if family in (Family.CP, Family.H1):
        rp, rm = reflection_cp(k, param), reflection_cp(-k, param)
    else:
        rp, rm = reflection_cc(k, param), reflection_cc(-k, param)
    if abs(rp) <= POLE_TOL:
        raise ReflectionPole(f"R({k!r}) = 0: reciprocal diverges", k, param)
    return abs(1 / rp - rm)
