"""Simultaneous approximation of all complex roots of a rational polynomial.

Two entry points share one Aberth-Ehrlich driver:

* ``find_roots(f)`` works on the dense coefficient form, normalized exactly
  by the largest coefficient magnitude so float conversion never overflows.
* ``find_periodic_points(f, n)`` solves f^(n)(x) - x = 0 without ever
  materializing the iterate in floating point: values and derivatives come
  from the orbit (n short Horner steps plus the chain rule).  The dense form
  of a deep iterate can span hundreds of orders of magnitude between its
  coefficients and its values near the roots, so dense evaluation there is
  pure cancellation noise in any fixed precision; the orbit form stays
  conditioned.

Both start deg-many points equispaced on the escape-radius circle, rotated
by an irrational slot offset, walk them inward with log-space radial steps
(plain Aberth contracts |z| only by O(1/deg) per sweep from far away), then
run Aberth sweeps and a final Newton polish.  Requesting more than 53 bits
switches from the float64 backend to an mpmath backend with the same
iteration.  Exact rational coefficients are converted to floating form only
inside this module.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .errors import InputError, RootFindingError
from .polynomials import (
    DEFAULT_DEGREE_CAP,
    DegreeCapError,
    Polynomial,
    escape_radius,
)

#: Fractional offset of the initial points within one circle slot; irrational
#: so symmetric root configurations never align with the starting polygon.
_SLOT_OFFSET = (math.sqrt(5) - 1) / 2

_MAX_SWEEPS = 2500
_MP_MAX_SWEEPS = 300
_PRECISION_CEILING = 4096
_STALL_WINDOW = 25
_APPROACH_LOG_RESIDUAL = 30.0
#: Cap on one radial log-step; reassessing each sweep avoids overshooting
#: across the Julia set boundary where the local-degree model breaks down.
_MAX_RADIAL_STEP = 0.5
_EPS = 2.0**-52
#: Orbit values past this magnitude continue in log form; kept low enough
#: that one more map step of degree <= 10 stays inside float64 range.
_FAR = 1e30


@dataclass(frozen=True)
class ComplexApprox:
    """One approximate root with a certified working-precision residual."""

    real: object
    imag: object
    precision_bits: int
    residual_bound: float

    @property
    def value(self) -> complex:
        return complex(float(self.real), float(self.imag))

    def mp_value(self) -> mp.mpc:
        return mp.mpc(self.real, self.imag)


@dataclass(frozen=True)
class RootSet:
    roots: tuple[ComplexApprox, ...]
    defining_degree: int

    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.roots], dtype=complex)

    def max_residual(self) -> float:
        return max((r.residual_bound for r in self.roots), default=0.0)


def _initial_points(radius: float, count: int) -> np.ndarray:
    angles = 2.0 * np.pi * (np.arange(count) + _SLOT_OFFSET) / count
    return radius * np.exp(1j * angles)


def _pairwise_repulsion(z: np.ndarray, chunk: int = 256) -> np.ndarray:
    n = len(z)
    out = np.zeros(n, dtype=complex)
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        with np.errstate(all="ignore"):
            block = z[start:stop, None] - z[None, :]
            inv = 1.0 / block
        inv[~np.isfinite(inv)] = 0.0
        out[start:stop] = inv.sum(axis=1)
    return out


def _safe_log_abs(p: np.ndarray) -> np.ndarray:
    a = np.abs(p)
    return np.log(a, where=a > 0, out=np.full(p.shape, -np.inf))


# ----------------------------------------------------------------------
# Evaluation backends.  Each call returns, per point:
#   ratio      p/p'                  (zero where far is set)
#   log_resid  log|p|
#   local_deg  |z p'/p| clipped to >= 1, for radial log-space steps
#   noise      first-order bound on the float64 evaluation error of p
#   far        points tracked in log form (orbit backend only)
# ----------------------------------------------------------------------


class _DenseEval:
    def __init__(self, f: Polynomial):
        scale = max(abs(c) for c in f.coeffs)
        self.coeffs = np.array([float(c / scale) for c in f.coeffs], dtype=complex)
        self.degree = f.degree
        self.radius = float(escape_radius(f))

    def __call__(self, z: np.ndarray):
        coeffs, d = self.coeffs, self.degree
        ratio = np.zeros_like(z)
        log_resid = np.full(z.shape, -np.inf)
        noise = np.zeros(z.shape)
        inside = np.abs(z) <= 1.0
        with np.errstate(all="ignore"):
            if inside.any():
                zi = z[inside]
                p = np.zeros_like(zi)
                dp = np.zeros_like(zi)
                mag = np.zeros(zi.shape)
                azi = np.abs(zi)
                for c in coeffs[::-1]:
                    dp = dp * zi + p
                    p = p * zi + c
                    mag = mag * azi + abs(c)
                ratio[inside] = np.where(dp != 0, p / np.where(dp != 0, dp, 1), 0)
                log_resid[inside] = _safe_log_abs(p)
                noise[inside] = 2 * d * _EPS * mag
            outside = ~inside
            if outside.any():
                zo = z[outside]
                w = 1.0 / zo
                q = np.zeros_like(w)
                dq = np.zeros_like(w)
                mag = np.zeros(w.shape)
                aw = np.abs(w)
                for c in coeffs:  # reversed polynomial q(w) = p(z)/z^d
                    dq = dq * w + q
                    q = q * w + c
                    mag = mag * aw + abs(c)
                denom = d * q - w * dq
                r = zo * q / np.where(denom != 0, denom, 1)
                ratio[outside] = np.where(denom != 0, r, 0)
                log_scale = d * np.log(np.abs(zo))
                log_resid[outside] = log_scale + _safe_log_abs(q)
                noise[outside] = 2 * d * _EPS * mag * np.exp(np.minimum(log_scale, 700.0))
        ratio[~np.isfinite(ratio)] = 0.0
        local_deg = _local_degree(z, ratio)
        far = np.zeros(z.shape, dtype=bool)
        return ratio, log_resid, local_deg, noise, far


def _local_degree(z: np.ndarray, ratio: np.ndarray) -> np.ndarray:
    with np.errstate(all="ignore"):
        local = np.abs(z) / np.abs(np.where(ratio != 0, ratio, 1))
    return np.where(np.isfinite(local) & (local > 1) & (ratio != 0), local, 1.0)


class _OrbitEval:
    """Evaluate f^(n)(z) - z and its derivative through the orbit."""

    def __init__(self, f: Polynomial, n: int):
        self.fco = np.array([float(c) for c in f.coeffs], dtype=complex)
        self.d = f.degree
        self.n = n
        self.degree = self.d**n
        self.radius = float(escape_radius(f))
        self.log_d_lead = math.log(self.d) + math.log(abs(float(f.leading_coefficient)))
        self.log_lead = math.log(abs(float(f.leading_coefficient)))

    def __call__(self, z: np.ndarray):
        count = len(z)
        y = z.copy()
        deriv = np.ones_like(z)
        noise = np.zeros(count)
        far = np.zeros(count, dtype=bool)
        log_y = np.zeros(count)
        log_deriv = np.zeros(count)
        d = self.d
        with np.errstate(all="ignore"):
            for _ in range(self.n):
                if far.any():
                    # One map step in log form: f(y) ~ a y^d out here.
                    log_deriv[far] += self.log_d_lead + (d - 1) * log_y[far]
                    log_y[far] = self.log_lead + d * log_y[far]
                active = ~far
                if active.any():
                    ya = y[active]
                    p = np.zeros_like(ya)
                    dp = np.zeros_like(ya)
                    mag = np.zeros(ya.shape)
                    aya = np.abs(ya)
                    for c in self.fco[::-1]:
                        dp = dp * ya + p
                        p = p * ya + c
                        mag = mag * aya + abs(c)
                    noise[active] = np.abs(dp) * noise[active] + 2 * d * _EPS * mag
                    deriv[active] = deriv[active] * dp
                    y[active] = p
                    newly = np.zeros(count, dtype=bool)
                    newly[active] = (np.abs(y[active]) > _FAR) | (
                        np.abs(deriv[active]) > _FAR
                    )
                    if newly.any():
                        log_y[newly] = np.log(np.abs(y[newly]))
                        log_deriv[newly] = np.log(np.maximum(np.abs(deriv[newly]), 1.0))
                        far |= newly

        near = ~far
        ratio = np.zeros_like(z)
        log_resid = np.empty(count)
        local_deg = np.ones(count)
        if near.any():
            p = y[near] - z[near]
            dp = deriv[near] - 1.0
            r = np.where(dp != 0, p / np.where(dp != 0, dp, 1), 0)
            r[~np.isfinite(r)] = 0.0
            ratio[near] = r
            log_resid[near] = _safe_log_abs(p)
            noise[near] = noise[near] + _EPS * (np.abs(y[near]) + np.abs(z[near]))
        if far.any():
            log_resid[far] = log_y[far]
            with np.errstate(all="ignore"):
                exponent = np.minimum(
                    log_deriv[far] - log_y[far] + np.log(np.abs(z[far])), 700.0
                )
            local_deg[far] = np.maximum(np.exp(exponent), 1.0)
        local_deg[near] = _local_degree(z[near], ratio[near])
        return ratio, log_resid, local_deg, noise, far


# ----------------------------------------------------------------------
# float64 driver
# ----------------------------------------------------------------------


def _radial_step(log_resid, local_deg):
    raw = 0.95 * np.clip(log_resid, 0.0, None) / local_deg
    return np.minimum(raw, _MAX_RADIAL_STEP)


def _converged_mask(ratio, log_resid, noise, far, z, precision_bits):
    """A point counts as converged when its Newton step is negligible, or
    when its residual sits inside the propagated evaluation-error bound so
    no further progress is possible at this precision.

    Bare residual smallness is deliberately not accepted: near a root of
    multiplicity m the residual scales like distance^m and certifies
    nothing about the distance itself.  The noise clause additionally
    requires a small step so wandering points with large error bounds are
    never accepted.
    """
    root_tol = 2.0 ** (-precision_bits / 2 - 10)
    resid = np.exp(np.minimum(log_resid, 700.0))
    small_step = np.abs(ratio) <= root_tol * (1 + np.abs(z))
    at_noise_floor = (resid <= 4 * noise) & (np.abs(ratio) <= 1e-6 * (1 + np.abs(z)))
    return ~far & (small_step | at_noise_floor)


def _solve_f64(ev, precision_bits: int):
    count = ev.degree
    z = _initial_points(ev.radius * (1 + 1e-9), count)

    for _ in range(120):
        _, log_resid, local_deg, _, far = ev(z)
        if not far.any() and float(log_resid.max()) <= _APPROACH_LOG_RESIDUAL:
            break
        step = _radial_step(log_resid, local_deg)
        if float(step.max()) <= 0.02:
            break
        z = z * np.exp(-step)

    best_ok = -1
    best_worst = np.inf
    best_step = np.inf
    since_progress = 0
    for _ in range(_MAX_SWEEPS):
        ratio, log_resid, local_deg, noise, far = ev(z)
        ok = _converged_mask(ratio, log_resid, noise, far, z, precision_bits)
        n_ok = int(ok.sum())
        worst = float(log_resid.max())
        # Largest unconverged Newton step; contracts linearly for the ring
        # of points around a multiple root, which still counts as progress.
        pending = ~ok & ~far
        step_norm = float(np.abs(ratio[pending]).max()) if pending.any() else 0.0
        if ok.all():
            break
        progressed = (
            n_ok > best_ok
            or worst < best_worst - 0.02
            or step_norm < best_step * 0.99
        )
        best_ok = max(best_ok, n_ok)
        best_worst = min(best_worst, worst)
        best_step = min(best_step, step_norm) if step_norm else best_step
        if progressed:
            since_progress = 0
        else:
            since_progress += 1
            if since_progress >= _STALL_WINDOW:
                break
        repulsion = _pairwise_repulsion(z)
        with np.errstate(all="ignore"):
            denom = 1.0 - ratio * repulsion
            delta = ratio / np.where(denom != 0, denom, 1)
        delta[~np.isfinite(delta)] = 0.0
        if far.any():
            radial = z * (1 - np.exp(-_radial_step(log_resid, local_deg)))
            delta = np.where(far, radial, delta)
        # Freeze converged points; updating them with noise-level Newton
        # ratios would jitter them off their roots.
        delta = np.where(ok, 0.0, delta)
        z = z - delta

    # Local Newton polish, keeping only improvements.
    for _ in range(2):
        ratio, log_resid, _, _, far = ev(z)
        candidate = np.where(far, z, z - ratio)
        _, log_after, _, _, far_after = ev(candidate)
        better = ~far_after & (log_after <= log_resid)
        z = np.where(better, candidate, z)

    ratio, log_resid, _, noise, far = ev(z)
    resid = np.exp(np.minimum(log_resid, 700.0))
    converged = bool(_converged_mask(ratio, log_resid, noise, far, z, precision_bits).all())
    bounds = resid + 6 * noise + 1e-300
    return z, bounds, converged


# ----------------------------------------------------------------------
# mpmath backend (small degrees; same iteration, scalar loops)
# ----------------------------------------------------------------------


def _mp_eval_dense(coeffs, z):
    p = mp.mpc(0)
    dp = mp.mpc(0)
    for c in reversed(coeffs):
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _solve_mp(evaluate, count, radius, precision_bits: int, warm=None):
    with mp.workprec(precision_bits + 16):
        if warm is None:
            z = [
                mp.mpc(radius) * mp.exp(2j * mp.pi * (k + _SLOT_OFFSET) / count)
                for k in range(count)
            ]
        else:
            z = [mp.mpc(w) for w in warm]
        target = mp.mpf(2) ** (-precision_bits / 2)
        history = []
        for _ in range(_MP_MAX_SWEEPS):
            values = [evaluate(zj) for zj in z]
            worst = max(abs(p) for p, _ in values)
            history.append(worst)
            if worst <= target:
                break
            if (
                len(history) > _STALL_WINDOW
                and history[-_STALL_WINDOW] < worst * mp.mpf("1.02")
            ):
                break
            new_z = []
            for j, zj in enumerate(z):
                p, dp = values[j]
                ratio = p / dp if dp != 0 else mp.mpc(0)
                s = mp.mpc(0)
                for k, zk in enumerate(z):
                    if k != j and zj != zk:
                        s += 1 / (zj - zk)
                denom = 1 - ratio * s
                new_z.append(zj - (ratio / denom if denom != 0 else ratio))
            z = new_z
        residuals = [float(abs(evaluate(zj)[0])) for zj in z]
        return z, residuals


def _mp_roots(f: Polynomial, n: int | None, precision_bits: int, warm=None):
    """mpmath solve of f (dense, n is None) or of f^(n)(x)-x (orbit form)."""
    scale = max(abs(c) for c in f.coeffs)
    with mp.workprec(precision_bits + 16):
        if n is None:
            coeffs = [
                mp.mpf(c.numerator) / mp.mpf(c.denominator)
                for c in (c / scale for c in f.coeffs)
            ]
            evaluate = lambda z: _mp_eval_dense(coeffs, z)
            count = f.degree
        else:
            coeffs = [mp.mpf(c.numerator) / mp.mpf(c.denominator) for c in f.coeffs]

            def evaluate(z, _co=coeffs, _n=n):
                y = z
                deriv = mp.mpc(1)
                for _ in range(_n):
                    p, dp = _mp_eval_dense(_co, y)
                    deriv *= dp
                    y = p
                return y - z, deriv - 1

            count = f.degree**n
        radius = float(escape_radius(f)) if n is not None else float(escape_radius(f))
        return _solve_mp(evaluate, count, radius * (1 + 1e-9), precision_bits, warm=warm)


# ----------------------------------------------------------------------
# Public operations
# ----------------------------------------------------------------------


def _package_f64(z, bounds, precision_bits, degree) -> RootSet:
    roots = tuple(
        ComplexApprox(float(w.real), float(w.imag), precision_bits, float(b))
        for w, b in zip(z, bounds)
    )
    return RootSet(roots, degree)


def _package_mp(z, residuals, precision_bits, degree) -> RootSet:
    roots = tuple(
        ComplexApprox(w.real, w.imag, precision_bits, r * (1 + 1e-9) + 1e-300)
        for w, r in zip(z, residuals)
    )
    return RootSet(roots, degree)


def _escalate_mp(f, n, precision_bits, warm, degree) -> RootSet:
    if degree > 128:
        raise RootFindingError(
            f"no convergence at degree {degree}; too large for the "
            "arbitrary-precision fallback",
            best_roots=list(warm),
        )
    bits = max(2 * precision_bits, 106)
    target = 2.0 ** (-precision_bits / 2)
    while bits <= _PRECISION_CEILING:
        z, residuals = _mp_roots(f, n, bits, warm=warm)
        if max(residuals) <= target:
            return _package_mp(z, residuals, precision_bits, degree)
        warm, bits = z, 2 * bits
    raise RootFindingError(
        f"no convergence at degree {degree} after precision escalation",
        best_roots=list(warm),
        residuals=residuals,
    )


@functools.lru_cache(maxsize=64)
def find_roots(f: Polynomial, precision_bits: int = 53) -> RootSet:
    """All deg(f) roots by simultaneous iteration from the escape circle.

    Residual targets are relative to the polynomial normalized by its
    largest coefficient magnitude.  Deterministic: identical input and
    precision give identical output.  Raises RootFindingError (carrying the
    best iterates) when the target cannot be met even after the working
    precision escalates.
    """
    if f.degree < 1:
        raise InputError("root finding requires degree >= 1")
    if f.degree == 1:
        root = -f[0] / f[1]
        return RootSet(
            (ComplexApprox(float(root), 0.0, precision_bits, 0.0),), 1
        )
    if precision_bits <= 53:
        ev = _DenseEval(f)
        z, bounds, converged = _solve_f64(ev, precision_bits)
        if converged:
            return _package_f64(z, bounds, precision_bits, f.degree)
        return _escalate_mp(f, None, precision_bits, list(z), f.degree)
    z, residuals = _mp_roots(f, None, precision_bits)
    if max(residuals) <= 2.0 ** (-precision_bits / 2):
        return _package_mp(z, residuals, precision_bits, f.degree)
    return _escalate_mp(f, None, precision_bits, z, f.degree)


@functools.lru_cache(maxsize=32)
def find_periodic_points(
    f: Polynomial, n: int, precision_bits: int = 53
) -> RootSet:
    """All d^n roots of f^(n)(x) - x, evaluated through the orbit.

    Same contract as find_roots for the polynomial f^(n)(x) - x; residuals
    are absolute values of f^(n)(z) - z plus a propagated evaluation-error
    margin.
    """
    d = f.degree
    if d < 2:
        raise InputError("periodic points need a map of degree >= 2")
    if n < 1:
        raise InputError("period must be >= 1")
    if d**n > DEFAULT_DEGREE_CAP:
        raise DegreeCapError(d**n, DEFAULT_DEGREE_CAP)
    if precision_bits <= 53:
        ev = _OrbitEval(f, n)
        z, bounds, converged = _solve_f64(ev, precision_bits)
        if converged:
            return _package_f64(z, bounds, precision_bits, d**n)
        return _escalate_mp(f, n, precision_bits, list(z), d**n)
    z, residuals = _mp_roots(f, n, precision_bits)
    if max(residuals) <= 2.0 ** (-precision_bits / 2):
        return _package_mp(z, residuals, precision_bits, d**n)
    return _escalate_mp(f, n, precision_bits, z, d**n)


def cluster_roots(rs: RootSet, tol: float) -> list[tuple[ComplexApprox, int]]:
    """Partition the root list into tol-diameter clusters.

    Returns (centroid representative, multiplicity) pairs ordered by
    position; multiplicities sum to the defining degree.
    """
    if tol <= 0:
        raise InputError("cluster tolerance must be positive")
    n = len(rs.roots)
    if n == 0:
        return []
    values = rs.values()
    order = sorted(range(n), key=lambda i: (values[i].real, values[i].imag))
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    # Sweep by real part; only pairs within tol of each other can merge.
    for a in range(n):
        i = order[a]
        for b in range(a + 1, n):
            j = order[b]
            if values[j].real - values[i].real > tol:
                break
            if abs(values[i] - values[j]) <= tol:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj

    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)

    out = []
    for members in groups.values():
        pts = values[members]
        centroid = pts.mean()
        rep = ComplexApprox(
            float(centroid.real),
            float(centroid.imag),
            rs.roots[members[0]].precision_bits,
            max(rs.roots[i].residual_bound for i in members),
        )
        out.append((rep, len(members)))
    out.sort(key=lambda pair: (pair[0].real, pair[0].imag))
    return out


def exclude_point(rs: RootSet, q, tol: float) -> RootSet:
    """Drop all roots within tol of q (used when q itself is periodic)."""
    if tol <= 0:
        raise InputError("exclusion tolerance must be positive")
    q = complex(q)
    kept = tuple(r for r in rs.roots if abs(r.value - q) > tol)
    return RootSet(kept, rs.defining_degree)
