"""Hartogs-type extensions of the catalog domains and their scaled metrics.

A CHDomain over base Omega with fiber exponent mu > 0 is the set
{(z, w) : z in Omega, |w|^2 < N(z, z)^mu} with Kahler potential
D(z, w) = -log(N(z, z)^mu - |w|^2).  Coordinates are (z_1, ..., z_d, w).

Two independent expansions of e^{cD} - 1 = (N^mu - |w|^2)^{-c} - 1 are
provided: a direct (d+1)-variable series computation, and a block assembly
that never expands in w, using

    (N^mu - |w|^2)^{-c} = sum_m C(c+m-1, m) |w|^{2m} N^{-mu(c+m)}

so each w-degree m contributes the base-domain expansion at Wallach
parameter mu(c+m) scaled by the binomial prefactor.  Their agreement is a
cross-check of the whole series stack.

The closed-form inducibility verdict reduces to base-domain Wallach
membership of mu(c+m) for every integer m >= 0, which stabilizes once
mu(c+m) passes the continuous threshold.  einstein_residual probes the
Einstein property of the metric numerically with nested finite differences
on an arbitrary-precision potential evaluation (double precision cannot
survive the nested differencing at the required tolerances).
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from typing import Sequence

import mpmath as mp
import numpy as np

from . import series as hs
from .calabi import (
    CalabiMatrix,
    Verdict,
    bergman_diastasis_series,
    graded_blocks,
    psd_verdict,
)
from .domains import (
    WALLACH_SNAP_TOL,
    DomainModel,
    contains,
    generic_norm_eval,
    one_minus_norm,
    parse_domain,
    sample,
    wallach_contains,
)
from .series import HermitianSeries

DEFAULT_FD_STEP = 1e-3
DEFAULT_FD_DPS = 40
CONDITION_LIMIT = 1e8


class StencilError(Exception):
    """A finite-difference stencil point left the domain."""


@dataclass(frozen=True)
class CHDomain:
    base: DomainModel
    mu: float

    def __post_init__(self) -> None:
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")

    @property
    def n_vars(self) -> int:
        return self.base.d + 1

    @property
    def spec_string(self) -> str:
        return f"CHD({self.base.spec_string};mu={format(self.mu, '.17g')})"


def mu_einstein(base: DomainModel) -> float:
    """The fiber exponent that makes the extension Kahler-Einstein."""
    return base.gamma / (base.d + 1)


_CH_SPEC_RE = re.compile(r"^\s*CHD\(\s*([^;()]+?)\s*;\s*mu\s*=\s*([^()]+?)\s*\)\s*$", re.IGNORECASE)


def parse_ch_spec(spec: str) -> CHDomain:
    """Parse "CHD(<base-spec>;mu=<real|einstein>)"."""
    m = _CH_SPEC_RE.match(spec)
    if not m:
        raise ValueError(
            f"bad Hartogs spec {spec!r} (expected e.g. 'CHD(I:2,2;mu=einstein)')"
        )
    base = parse_domain(m.group(1))
    mu_token = m.group(2).strip().lower()
    mu = mu_einstein(base) if mu_token == "einstein" else float(mu_token)
    return CHDomain(base, mu)


def ch_contains(ch: CHDomain, zw: np.ndarray) -> bool:
    zw = np.asarray(zw, dtype=np.complex128).reshape(-1)
    if zw.shape[0] != ch.n_vars:
        raise ValueError(f"expected length-{ch.n_vars} vector (z..., w)")
    z, w = zw[:-1], zw[-1]
    if not contains(ch.base, z):
        return False
    nzz = generic_norm_eval(ch.base, z, z).real
    return abs(w) ** 2 < nzz**ch.mu


def ch_potential_eval(ch: CHDomain, zw: np.ndarray) -> float:
    """D(z, w) = -log(N(z,z)^mu - |w|^2); zero at the origin."""
    zw = np.asarray(zw, dtype=np.complex128).reshape(-1)
    if not ch_contains(ch, zw):
        raise ValueError("point is outside the Hartogs domain")
    z, w = zw[:-1], zw[-1]
    nzz = generic_norm_eval(ch.base, z, z).real
    return -math.log(nzz**ch.mu - abs(w) ** 2)


def ch_sample(
    ch: CHDomain,
    rng: int | np.random.Generator,
    z_radius_cap: float = 0.4,
    w_fiber_cap: float = 0.5,
) -> np.ndarray:
    """Interior point with z bounded away from the base boundary and
    |w| <= w_fiber_cap * N(z,z)^(mu/2); deterministic per seed."""
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    z = sample(ch.base, gen, z_radius_cap)
    nzz = generic_norm_eval(ch.base, z, z).real
    fiber = nzz ** (ch.mu / 2.0)
    w = w_fiber_cap * fiber * math.sqrt(gen.uniform()) * np.exp(2j * math.pi * gen.uniform())
    return np.concatenate([z, [w]])


# --- series paths -------------------------------------------------------------


def ch_direct_series(ch: CHDomain, c: float, cutoff: int) -> HermitianSeries:
    """(N^mu - |w|^2)^{-c} - 1 computed entirely in d+1 variables."""
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    if not c > 0:
        raise ValueError("c must be positive")
    base = ch.base
    # N^mu - 1 in the base variables, then embedded with w as the last variable.
    nmu_minus_1 = hs.inverse_power(one_minus_norm(base, cutoff), -ch.mu)
    q = hs.scale(hs.embed(nmu_minus_1, ch.n_vars, cutoff), -1.0)
    w_sq = hs.from_terms(
        ch.n_vars,
        cutoff,
        {(((0,) * base.d + (1,)), ((0,) * base.d + (1,))): 1.0},
    )
    q = hs.add(q, w_sq)  # Q' with N^mu - |w|^2 = 1 - Q'
    return hs.inverse_power(q, c)


def ch_assembled_series(ch: CHDomain, c: float, cutoff: int) -> HermitianSeries:
    """Same series via the per-w-degree assembly (no expansion in w)."""
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    if not c > 0:
        raise ValueError("c must be positive")
    base = ch.base
    d = base.d
    terms: dict[tuple[tuple[int, ...], tuple[int, ...]], float] = {}
    for m in range(cutoff + 1):
        prefactor = hs.generalized_binomial(c, m)
        if m >= 1:
            terms[((0,) * d + (m,), (0,) * d + (m,))] = prefactor
        base_cutoff = cutoff - m
        if base_cutoff < 1:
            continue
        base_series = bergman_diastasis_series(base, ch.mu * (c + m), base_cutoff)
        b = base_series.basis
        for (j, k), v in base_series.coeffs.items():
            hol = b[j].exponents + (m,)
            anti = b[k].exponents + (m,)
            terms[(hol, anti)] = prefactor * v
    return hs.from_terms(ch.n_vars, cutoff, terms)


def ch_block_assembly(ch: CHDomain, c: float, cutoff: int) -> CalabiMatrix:
    """Graded Calabi matrix of e^{cD} - 1 from the assembled series."""
    s = ch_assembled_series(ch, c, cutoff)
    return graded_blocks(s, domain_spec=ch.spec_string, lam=c)


def ch_truncated_verdict(
    ch: CHDomain,
    c: float,
    cutoff: int,
    tol_abs: float = 1e-10,
    tol_rel: float = 1e-9,
) -> Verdict:
    return psd_verdict(ch_block_assembly(ch, c, cutoff), tol_abs, tol_rel)


# --- closed-form verdict and threshold ----------------------------------------


@dataclass(frozen=True)
class CHInducedVerdict:
    induced: bool
    checked: tuple[tuple[int, float, bool], ...]  # (m, lambda_m, member)
    first_failure: tuple[int, float] | None
    stabilized_at: int  # smallest m with lambda_m beyond the continuous threshold


def ch_projectively_induced(ch: CHDomain, c: float) -> CHInducedVerdict:
    """Closed-form reduction: c g(mu) is induced iff mu(c+m) lies in the
    base Wallach set minus {0} for every integer m >= 0.

    Only finitely many m need checking: once mu(c+m) exceeds the continuous
    threshold (r-1)a/2 every later m lands in the continuous part.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    base = ch.base
    threshold = (base.r - 1) * base.a / 2.0
    checked = []
    first_failure = None
    m = 0
    while True:
        lam = ch.mu * (c + m)
        if lam > threshold:
            break
        member = wallach_contains(base, lam) and lam > WALLACH_SNAP_TOL
        checked.append((m, lam, member))
        if not member and first_failure is None:
            first_failure = (m, lam)
        m += 1
    return CHInducedVerdict(first_failure is None, tuple(checked), first_failure, m)


def thm1_threshold(base: DomainModel) -> float:
    """Smallest scale c for which c g(mu_einstein) is projectively induced."""
    return (base.r - 1) * (base.d + 1) * base.a / (2.0 * base.gamma)


# --- Einstein residual probe ----------------------------------------------------

# 4th-order first-derivative stencil in units of half the inner step:
# offsets 2h, h, -h, -2h with weights -1, 8, -8, 1 over 12h.
_D1_OFFSETS = (4, 2, -2, -4)
_D1_WEIGHTS = (-1, 8, -8, 1)


def _det_mp(mat: list[list[mp.mpc]]) -> mp.mpc:
    n = len(mat)
    if n == 1:
        return mat[0][0]
    if n == 2:
        return mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0]
    total = mp.mpc(0)
    for perm in itertools.permutations(range(n)):
        sign = 1
        seen = [False] * n
        for s in range(n):
            if seen[s]:
                continue
            ln, j = 0, s
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                ln += 1
            if ln % 2 == 0:
                sign = -sign
        prod = mp.mpc(1)
        for i in range(n):
            prod *= mat[i][perm[i]]
        total += sign * prod
    return total


def _norm_diag_mp(base: DomainModel, z: list[mp.mpc]) -> mp.mpf:
    """N(z, z) in arbitrary precision; real and positive inside the domain."""
    if base.kind == "I":
        p, q = base.params
        zm = [[z[i * q + k] for k in range(q)] for i in range(p)]
        mat = []
        for i in range(p):
            row = []
            for j in range(p):
                acc = mp.mpc(1 if i == j else 0)
                for k in range(q):
                    acc -= zm[i][k] * mp.conj(zm[j][k])
                row.append(acc)
            mat.append(row)
        return _det_mp(mat).real
    if base.kind == "III":
        (n,) = base.params
        idx = {}
        pos = 0
        for i in range(n):
            for j in range(i, n):
                idx[(i, j)] = pos
                idx[(j, i)] = pos
                pos += 1
        mat = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = mp.mpc(1 if i == j else 0)
                for k in range(n):
                    acc -= z[idx[(i, k)]] * mp.conj(z[idx[(j, k)]])
                row.append(acc)
            mat.append(row)
        return _det_mp(mat).real
    if base.kind == "IV":
        t = mp.mpf(0)
        s = mp.mpc(0)
        for zi in z:
            t += (zi * mp.conj(zi)).real
            s += zi * zi
        return 1 - 2 * t + (s * mp.conj(s)).real
    t = mp.mpf(0)
    for zi in z:
        t += (zi * mp.conj(zi)).real
    return 1 - t


class _PotentialGrid:
    """Cached arbitrary-precision potential evaluations on the stencil grid.

    Grid nodes are integer offset vectors in units of step/2 relative to the
    base point, which keeps cache keys exact.
    """

    def __init__(self, ch: CHDomain, center: np.ndarray, step: float, scale: float):
        self.ch = ch
        self.unit = mp.mpf(step) / 2
        self.scale = mp.mpf(scale)
        self.n = ch.n_vars
        zw = np.asarray(center, dtype=np.complex128).reshape(-1)
        self.base_coords = [
            mp.mpf(float(v)) for pair in zip(zw.real, zw.imag) for v in pair
        ]
        self.cache: dict[tuple[int, ...], mp.mpf] = {}

    def value(self, units: tuple[int, ...]) -> mp.mpf:
        cached = self.cache.get(units)
        if cached is not None:
            return cached
        coords = [b + k * self.unit for b, k in zip(self.base_coords, units)]
        z = [mp.mpc(coords[2 * i], coords[2 * i + 1]) for i in range(self.n)]
        nzz = _norm_diag_mp(self.ch.base, z[:-1])
        w = z[-1]
        arg = mp.power(nzz, self.ch.mu) - (w * mp.conj(w)).real
        if not (nzz > 0 and arg > 0):
            raise StencilError(f"stencil point at offsets {units} left the domain")
        val = -self.scale * mp.log(arg)
        self.cache[units] = val
        return val


def _metric_mp(grid: _PotentialGrid, node: tuple[int, ...]) -> list[list[mp.mpc]]:
    """Complex Hessian (d+1)x(d+1) of the potential at a grid node.

    4th-order central stencils on the real coordinates (inner step = 2 grid
    units), combined into Wirtinger derivatives.
    """
    n = grid.n
    nreal = 2 * n
    hsq = (2 * grid.unit) ** 2

    def shift(base: tuple[int, ...], coord: int, amount: int) -> tuple[int, ...]:
        out = list(base)
        out[coord] += amount
        return tuple(out)

    f0 = grid.value(node)
    hess = [[mp.mpf(0)] * nreal for _ in range(nreal)]
    for i in range(nreal):
        acc = -30 * f0
        for off, wgt in ((4, -1), (2, 16), (-2, 16), (-4, -1)):
            acc += wgt * grid.value(shift(node, i, off))
        hess[i][i] = acc / (12 * hsq)
    for i in range(nreal):
        for j in range(i + 1, nreal):
            acc = mp.mpf(0)
            for oi, wi in zip(_D1_OFFSETS, _D1_WEIGHTS):
                for oj, wj in zip(_D1_OFFSETS, _D1_WEIGHTS):
                    acc += wi * wj * grid.value(shift(shift(node, i, oi), j, oj))
            val = acc / (144 * hsq)
            hess[i][j] = val
            hess[j][i] = val
    quarter = mp.mpf(1) / 4
    g = []
    for a in range(n):
        row = []
        xa, ya = 2 * a, 2 * a + 1
        for b in range(n):
            xb, yb = 2 * b, 2 * b + 1
            re = hess[xa][xb] + hess[ya][yb]
            im = hess[xa][yb] - hess[ya][xb]
            row.append(quarter * mp.mpc(re, im))
        g.append(row)
    return g


def einstein_residual(
    ch: CHDomain,
    point: np.ndarray,
    step: float = DEFAULT_FD_STEP,
    dps: int = DEFAULT_FD_DPS,
    potential_scale: float = 1.0,
) -> tuple[float, float]:
    """Probe Ric(g) = k g at a point; returns (k_estimate, max residual).

    The metric is the complex Hessian of the potential; the Ricci matrix is
    minus the complex Hessian of log det g, formed by 2nd-order outer
    differencing (outer step = step/2) of 4th-order inner stencils.  The
    potential is evaluated in arbitrary precision because the nested
    difference quotient loses ~3 digits per squaring in double precision.

    k_estimate = trace(Ric g^{-1})/(d+1), residual = max |Ric - k g|.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    zw = np.asarray(point, dtype=np.complex128).reshape(-1)
    if zw.shape[0] != ch.n_vars:
        raise ValueError(f"expected length-{ch.n_vars} point")
    if not ch_contains(ch, zw):
        raise StencilError("base point is outside the Hartogs domain")
    # Stated margin precondition: 4*step of slack per real coordinate.
    nreal = 2 * ch.n_vars
    reals = np.array([v for pair in zip(zw.real, zw.imag) for v in pair])
    for i in range(nreal):
        for sign in (1.0, -1.0):
            shifted = reals.copy()
            shifted[i] += sign * 4.0 * step
            cand = shifted[0::2] + 1j * shifted[1::2]
            if not ch_contains(ch, cand):
                raise StencilError(
                    f"margin precondition failed on real coordinate {i} "
                    f"(need 4*step = {4 * step:g} of slack)"
                )

    with mp.workdps(dps):
        grid = _PotentialGrid(ch, zw, step, potential_scale)
        n = ch.n_vars

        f_cache: dict[tuple[int, ...], mp.mpf] = {}

        def logdet_at(node: tuple[int, ...]) -> mp.mpf:
            cached = f_cache.get(node)
            if cached is not None:
                return cached
            g = _metric_mp(grid, node)
            det = _det_mp(g)
            if not det.real > 0:
                raise StencilError(f"metric determinant not positive at offsets {node}")
            val = mp.log(det.real)
            f_cache[node] = val
            return val

        center = (0,) * nreal
        g_center_mp = _metric_mp(grid, center)
        g_center = np.array(
            [[complex(entry) for entry in row] for row in g_center_mp],
            dtype=np.complex128,
        )
        cond = float(np.linalg.cond(g_center))
        if cond > CONDITION_LIMIT:
            raise StencilError(f"metric condition number {cond:.3e} exceeds limit")

        def outer_shift(coord: int, amount: int) -> tuple[int, ...]:
            out = [0] * nreal
            out[coord] = amount
            return tuple(out)

        hsq_out = grid.unit**2
        f0 = logdet_at(center)
        fhess = [[mp.mpf(0)] * nreal for _ in range(nreal)]
        for i in range(nreal):
            fhess[i][i] = (
                logdet_at(outer_shift(i, 1)) - 2 * f0 + logdet_at(outer_shift(i, -1))
            ) / hsq_out
        for i in range(nreal):
            for j in range(i + 1, nreal):
                acc = mp.mpf(0)
                for si in (1, -1):
                    for sj in (1, -1):
                        node = [0] * nreal
                        node[i] = si
                        node[j] = sj
                        acc += si * sj * logdet_at(tuple(node))
                val = acc / (4 * hsq_out)
                fhess[i][j] = val
                fhess[j][i] = val

        ric = np.zeros((n, n), dtype=np.complex128)
        for a in range(n):
            xa, ya = 2 * a, 2 * a + 1
            for b in range(n):
                xb, yb = 2 * b, 2 * b + 1
                re = fhess[xa][xb] + fhess[ya][yb]
                im = fhess[xa][yb] - fhess[ya][xb]
                ric[a, b] = -0.25 * complex(mp.mpc(re, im))

    k = float(np.trace(ric @ np.linalg.inv(g_center)).real) / n
    residual = float(np.max(np.abs(ric - k * g_center)))
    return k, residual
