"""Superlevel-set concentration engine.

For a norm-one test function f and parameters (n, alpha) the level
density is

    u(z) = |f^{(n)}(z)|^2 * w(|z|^2),

with the mu-family weight

    w(t) = (1-t)^{2n+alpha} / (pi n! (alpha)_n P(t)),
    P(t) = F(1-alpha-n, -n; 1; t),

(equivalently w = 1 / (pi n! (alpha)_n F(n+1, n+alpha; 1; t))) and the
nu-family weight

    w(t) = (1-t)^{2n+alpha} Gamma(alpha) / (pi Gamma(alpha+2n-1)).

The engine computes the distribution function rho(level) = mu({u > level})
in hyperbolic measure, its inverse level u*(s), and the superlevel
integrals

    I_raw(s) = integral of u over {u > u*(s)} d(hyperbolic area),
    I_hat(s) = C * I_raw(s),   C = alpha+2n-1 (mu) or 1 (nu),

which the sharp comparison curve theta(s) = 1 - (1 + s/pi)^{1-X} bounds,
with X = (n+1)(n+alpha) (mu) or 2n+alpha (nu).  The same constant C turns
the plain-Lebesgue superlevel integral of u into the literal
measure-family quotient, reported alongside for transparency.

Geometry
--------
Everything runs in the signed area coordinate a = sign(r) r^2/(1-r^2):
the centered disc with |a| <= A has hyperbolic area exactly pi*A on each
half-line, and the measure of any section [a1, a2] of a full line through
the origin is simply (a2 - a1)/... integrated over angles in [0, pi).
Slicing along full lines (not half-rays) matters: u is smooth across the
origin, so level sets passing near 0 stay regular, whereas half-ray
sections would degenerate there.  Along each line, crossings of
u = level are located by sign changes on a dense grid and sharpened by
bisection.

For radial level densities (monomial data) a single ray is exact.  For
general data the angular integrand is analytic except at tangent-line
angles of the level curve, where sections appear, vanish or split with
square-root behavior.  Tangency angles are located by bisection on the
line-section count; each smooth arc between tangencies is integrated
under the substitution theta = a + (b-a)(1-cos(pi v))/2, whose endpoint
derivative zeroes absorb the square roots, using adaptive Gauss-Legendre
pairs for the error estimate.  Tangency-free level sets take the
periodic trapezoid rule, which is spectrally accurate there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import brentq

from .bergman import MU, NU, AnalyticPolynomial, SpaceParams
from .errors import NonConvergentError, UnboundedError, ViolationError
from .exact import as_exact, gamma_ratio, pochhammer
from .quadrature import Estimate
from .specfun import HypergeomParams, hypergeom_poly_coeffs

_GL_SMALL = 24
_GL_BIG = 48
_BISECT_ITERS = 52
_TANGENCY_WIDTH = 1e-12
_LINE_PERIOD = math.pi  # general sets are sliced along full lines through 0


@lru_cache(maxsize=32)
def _leggauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def hat_factor(params: SpaceParams, variant: str = MU) -> float:
    """Normalization constant C with I_hat = C * I_raw (and the same C for
    the literal quotient)."""
    if variant == MU:
        return float(params.alpha) + 2 * params.n - 1
    if variant == NU:
        return 1.0
    raise ValueError(f"unknown measure variant {variant!r}")


def theta_bound(params: SpaceParams, s: float, variant: str = MU) -> float:
    """Sharp comparison curve theta(s) = 1 - (1 + s/pi)^(1-X)."""
    x = float(params.exponent(variant))
    return 1.0 - (1.0 + s / math.pi) ** (1.0 - x)


def _weight_constants(params: SpaceParams, variant: str):
    a, n = params.alpha, params.n
    if variant == MU:
        lead = math.pi * math.factorial(n) * float(pochhammer(as_exact(a), n))
        p_coeffs = np.array([
            float(c) for c in hypergeom_poly_coeffs(
                HypergeomParams(1 - as_exact(a) - n, -n, 1))
        ])
    elif variant == NU:
        lead = math.pi * float(gamma_ratio(as_exact(a), 2 * n - 1))
        p_coeffs = np.array([1.0])
    else:
        raise ValueError(f"unknown measure variant {variant!r}")
    return lead, p_coeffs


class LevelResult(NamedTuple):
    level: float
    rho: float
    rho_error: float


class ProfileSample(NamedTuple):
    s: float
    level: float
    i_raw: float
    i_hat: float
    i_literal: float
    theta: float
    margin: float
    error: float


class _Arc(NamedTuple):
    theta_lo: float
    theta_hi: float
    window: tuple       # covers every section over the whole arc
    tang_lo: tuple      # refined hull at the opening tangency
    tang_hi: tuple      # refined hull at the closing tangency


class LevelSetEngine:
    """Distribution function, inverse and superlevel integrals of u.

    One engine serves one (f, n, alpha, variant) tuple; instances are
    independent and safe to use from separate workers.  Within an engine
    the cached level-set grid is shared by all queries, so drive a single
    engine from one worker (or share it read-only after warm-up).
    """

    def __init__(self, f: AnalyticPolynomial, params: SpaceParams, variant: str = MU,
                 tol: float = 1e-10, n_theta: int = 128, force_general: bool = False):
        self.params = params
        self.variant = variant
        self.tol = tol
        self.f = f.normalized(params.alpha)
        self.fn = self.f.derivative(params.n)
        self._lead, self._p_coeffs = _weight_constants(params, variant)
        self._c_exp = float(params.alpha) + 2 * params.n

        nz = np.nonzero(self.fn.coeffs)[0]
        self.fn_zero = nz.size == 0
        self.radial = (nz.size <= 1) and not force_general
        if self.radial and not self.fn_zero:
            self._mono_deg = int(nz[0])
            self._mono_sq = float(abs(self.fn.coeffs[nz[0]]) ** 2)

        # pointwise ceiling: 1/pi (mu) or (alpha+2n-1)/pi (nu) for norm one,
        # rigorous up to the float safety factor
        base = 1.0 / math.pi if variant == MU else hat_factor(params, MU) / math.pi
        self.ceiling = base * self.f.norm_sq(params.alpha) * (1.0 + 1e-9)

        self._n_theta = 1 if self.radial else n_theta
        self._a_max = 40.0
        self._grid_built = False

    # -- level density ------------------------------------------------------

    def weight(self, t):
        return (1.0 - t) ** self._c_exp / (self._lead * npoly.polyval(t, self._p_coeffs))

    def u_at(self, z):
        """u at complex disk points (arrays allowed)."""
        t = np.abs(np.asarray(z)) ** 2
        return np.abs(self.fn(z)) ** 2 * self.weight(t)

    def _u_ray(self, a, phase):
        """u along lines through 0: a is the signed area coordinate (the
        point is sign(a) sqrt(t) phase with t = |a|/(1+|a|))."""
        mag = np.abs(a)
        t = mag / (1.0 + mag)
        if self.fn_zero:
            return np.zeros_like(t)
        if self.radial:
            return self._mono_sq * t ** self._mono_deg * self.weight(t)
        z = np.sign(a) * np.sqrt(t) * phase
        return np.abs(self.fn(z)) ** 2 * self.weight(t)

    # -- cached coarse grid ---------------------------------------------------

    def _build_grid(self):
        if self.radial:
            n_a = int(min(200_000, max(4096, 64 * self._a_max)))
            self._a_grid = np.linspace(0.0, self._a_max, n_a)
            self._thetas = np.zeros(1)
            self._U = self._u_ray(self._a_grid, 1.0)[None, :]
        else:
            n_a = int(min(200_000, max(8192, 128 * self._a_max)))
            self._a_grid = np.linspace(-self._a_max, self._a_max, n_a)
            n = self._n_theta
            self._thetas = _LINE_PERIOD * np.arange(n) / n
            phases = np.exp(1j * self._thetas)
            self._U = self._u_ray(self._a_grid[None, :], phases[:, None])
        self._da = self._a_grid[1] - self._a_grid[0]
        self._grid_built = True

    def _cover_bound(self, level: float) -> float:
        """Area coordinate beyond which u < level for sure."""
        if self.fn_zero:
            return 1.0
        b_sq = float(np.sum(np.abs(self.fn.coeffs))) ** 2
        one_minus_t = (level * self._lead / b_sq) ** (1.0 / self._c_exp)
        one_minus_t = min(one_minus_t, 1.0)
        t_bound = 1.0 - one_minus_t
        return t_bound / (1.0 - t_bound) if t_bound < 1.0 else math.inf

    def _ensure_cover(self, level: float):
        need = self._cover_bound(level)
        if not math.isfinite(need):
            raise NonConvergentError("superlevel set cannot be confined to the grid")
        if not self._grid_built or need > self._a_max:
            self._a_max = max(self._a_max, 1.5 * need)
            self._build_grid()

    # -- coarse sections from the cached grid ----------------------------------

    def _grid_sections(self, level: float):
        """Per-grid-angle superlevel sections [(a_lo, a_hi), ...] in the
        signed area coordinate, plus the total bisection slack.

        Radial grids cover [0, a_max] (sections may start at the center);
        line grids cover [-a_max, a_max] and pair up interior crossings
        (the cover bound keeps both ends below the level).
        """
        self._ensure_cover(level)
        above = self._U > level
        rows, cols = np.nonzero(above[:, :-1] != above[:, 1:])
        lo = self._a_grid[cols]
        hi = self._a_grid[cols + 1]
        above_lo = above[rows, cols]
        if rows.size:
            phases = np.exp(1j * self._thetas[rows])
            lo, hi = self._bisect(lo, hi, above_lo, phases, level)
        crossing = 0.5 * (lo + hi)
        slack = float(np.sum(hi - lo))

        sections = [[] for _ in range(len(self._thetas))]
        for j in range(len(self._thetas)):
            pick = rows == j
            xs = list(np.sort(crossing[pick]))
            if self.radial and above[j, 0]:
                xs = [0.0] + xs
            for i in range(0, len(xs) - 1, 2):
                sections[j].append((xs[i], xs[i + 1]))
        return sections, slack

    def _bisect(self, lo, hi, above_lo, phases, level):
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            take_lo = (self._u_ray(mid, phases) > level) == above_lo
            lo = np.where(take_lo, mid, lo)
            hi = np.where(take_lo, hi, mid)
        return lo, hi

    @staticmethod
    def _trapezoid(row_values: np.ndarray) -> tuple[float, float]:
        """Periodic trapezoid mean over angles with a mesh-halving error
        estimate; exact (zero angular error) for a single angle."""
        n = len(row_values)
        full = math.pi * float(np.mean(row_values))
        if n == 1:
            return full, 0.0
        half = math.pi * float(np.mean(row_values[::2]))
        return full, abs(full - half)

    # -- ray sections at arbitrary angles ---------------------------------------

    def _ray_sections(self, phase, level, window, n_scan=1024, depth=3,
                      extra_window=None):
        """Sections along one ray by dense scan of a window + bisection.

        An extra window adds a second, finer-grained scan region (used near
        tangencies, where a section shrinks far below the main resolution).
        Returns (sections, slack, resolved); a window that clips the set is
        widened and rescanned, and on depth exhaustion the result is
        flagged unresolved.
        """
        a_lo, a_hi = window
        grid = np.linspace(a_lo, a_hi, n_scan)
        if extra_window is not None:
            fine = np.linspace(extra_window[0], extra_window[1], n_scan)
            grid = np.unique(np.concatenate([grid, fine]))
        u = self._u_ray(grid, phase)
        above = u > level
        lo_eff, hi_eff = float(grid[0]), float(grid[-1])
        clip_low = above[0] and lo_eff > -self._a_max
        clip_high = bool(above[-1]) and hi_eff < self._a_max
        if clip_low or clip_high:
            if depth <= 0:
                return [], (hi_eff - lo_eff), False
            span = hi_eff - lo_eff
            wider = (max(-self._a_max, lo_eff - span) if clip_low else lo_eff,
                     min(self._a_max, hi_eff + span) if clip_high else hi_eff)
            return self._ray_sections(phase, level, wider, n_scan, depth - 1,
                                      extra_window=extra_window)
        idx = np.nonzero(above[:-1] != above[1:])[0]
        lo, hi = grid[idx], grid[idx + 1]
        if idx.size:
            lo, hi = self._bisect(lo, hi, above[idx], np.full(idx.size, phase), level)
        xs = list(0.5 * (lo + hi))
        slack = float(np.sum(hi - lo))
        if above[0]:
            xs = [lo_eff] + xs
        if len(xs) % 2:
            xs = xs + [hi_eff]  # cover bound makes this unreachable; keep paired
        sections = [(xs[i], xs[i + 1]) for i in range(0, len(xs) - 1, 2)]
        return sections, slack, True

    def _count_at(self, theta: float, level: float, window) -> tuple[int, tuple]:
        """Section count along a ray, scanning the window densely; returns
        the count and the hull of what was found (for recursive narrowing)."""
        phase = complex(math.cos(theta), math.sin(theta))
        sections, _, _ = self._ray_sections(phase, level, window, n_scan=2048, depth=1)
        if not sections:
            return 0, window
        hull_lo = min(a for a, _ in sections)
        hull_hi = max(b for _, b in sections)
        pad = 0.25 * max(hull_hi - hull_lo, 4.0 * self._da)
        return len(sections), (max(-self._a_max, hull_lo - pad),
                               min(self._a_max, hull_hi + pad))

    def _locate_tangencies(self, level: float, sections):
        """Angles where the ray-section count changes, located by bisection
        on the count; each comes with the a-window of the affected region."""
        counts = [len(s) for s in sections]
        n = len(counts)
        tangencies = []

        def window_for(j):
            pieces = sections[j] + sections[(j + 1) % n]
            if not pieces:
                return (0.0, self._a_max)
            lo = min(a for a, _ in pieces)
            hi = max(b for _, b in pieces)
            pad = 0.25 * max(hi - lo, 4.0 * self._da)
            return (max(-self._a_max, lo - pad), min(self._a_max, hi + pad))

        budget = [800]  # probe budget guards against pathological flicker

        def refine(th_a, c_a, th_b, c_b, window):
            if c_a == c_b:
                return
            if th_b - th_a < _TANGENCY_WIDTH or budget[0] <= 0:
                tangencies.append((0.5 * (th_a + th_b), window))
                return
            budget[0] -= 1
            th_m = 0.5 * (th_a + th_b)
            c_m, w_m = self._count_at(th_m, level, window)
            refine(th_a, c_a, th_m, c_m, w_m if c_m != c_a else window)
            refine(th_m, c_m, th_b, c_b, w_m if c_m != c_b else window)

        step = _LINE_PERIOD / n
        for j in range(n):
            c1, c2 = counts[j], counts[(j + 1) % n]
            if c1 != c2:
                refine(self._thetas[j], c1, self._thetas[j] + step, c2, window_for(j))

        # sub-grid wedge hunt: when the level sits just above u(0), lines
        # near the tangent direction at the origin miss the set over an
        # angular width ~ sqrt(level - u(0)) that uniform grids cannot see;
        # that direction is computable, so probe it directly
        wedge = self._origin_wedge_angle(level)
        if wedge is not None:
            j = int(wedge // step) % n
            window = window_for(j)
            c_w, w_w = self._count_at(wedge, level, window)
            lo, hi = wedge - step, wedge + step
            c_lo, w_lo = self._count_at(lo, level, window)
            c_hi, w_hi = self._count_at(hi, level, window)
            found = []

            def keep(th, w):
                if all(abs(th - t0) > 1e-9 and abs(th - t0) < _LINE_PERIOD - 1e-9
                       for t0, _ in tangencies):
                    found.append((th % _LINE_PERIOD, w))

            before = len(tangencies)
            refine(lo, c_lo, wedge, c_w, w_w if c_w != c_lo else w_lo)
            refine(wedge, c_w, hi, c_hi, w_w if c_w != c_hi else w_hi)
            fresh = tangencies[before:]
            del tangencies[before:]
            for th, w in fresh:
                keep(th, w)
            tangencies.extend(found)
        return tangencies

    def _origin_wedge_angle(self, level: float):
        """Angle of the line tangent to the level curve at the origin, when
        the origin lies barely outside the superlevel set; None otherwise."""
        u0 = float(self.u_at(0.0))
        if not (u0 < level <= 1.05 * u0):
            return None
        c0 = complex(self.fn.coeffs[0]) if len(self.fn.coeffs) else 0.0
        c1 = complex(self.fn.coeffs[1]) if len(self.fn.coeffs) > 1 else 0.0
        if c0 == 0 or c1 == 0:
            return None
        ascent = -np.angle(c1 * np.conj(c0))
        return float((ascent + 0.5 * math.pi) % _LINE_PERIOD)

    # -- integrals over sections -------------------------------------------------

    @staticmethod
    def _panel_edges(a_lo: float, a_hi: float):
        """Composite panels with geometrically growing widths away from the
        origin: the integrands decay like powers of 1+|a|, so doubling
        panels keep the per-panel variation bounded.  Sections spanning 0
        split there (the integrands are only piecewise smooth in a at the
        origin)."""

        def one_sided(lo, hi):
            edges = [lo]
            width = min(1.0, hi - lo)
            while edges[-1] + width < hi:
                edges.append(edges[-1] + width)
                width *= 2.0
            edges.append(hi)
            return edges

        if a_lo >= 0.0:
            return one_sided(a_lo, a_hi)
        if a_hi <= 0.0:
            return [-e for e in reversed(one_sided(-a_hi, -a_lo))]
        neg = [-e for e in reversed(one_sided(0.0, -a_lo))]
        return neg + one_sided(0.0, a_hi)[1:]

    def _u_disk(self, r, phase):
        """u at signed radius r along a line (r is the Euclidean radius)."""
        t = r * r
        if self.fn_zero:
            return np.zeros_like(t)
        if self.radial:
            return self._mono_sq * t ** self._mono_deg * self.weight(t)
        return np.abs(self.fn(r * phase)) ** 2 * self.weight(t)

    def _batched_section_integrals(self, phases, section_lists):
        """Hyperbolic and Lebesgue integrals of u per line.

        phases[i] goes with section_lists[i]; all panels are evaluated in
        one flat batch per Gauss-Legendre order.  Panels touching a = 0 are
        integrated in the radius variable: |f^{(n)}(sqrt(t) e^{i theta})|^2
        carries half-integer powers of t at the origin (odd coefficient
        cross-terms), which would drop Gauss-Legendre in a to cubic order.
        Returns arrays of shape (2, n_rays): order-small and order-big
        results stacked.
        """
        p_lo, p_hi, p_phase, p_row = [], [], [], []
        r_lo, r_hi, r_phase, r_row = [], [], [], []
        for i, (phase, secs) in enumerate(zip(phases, section_lists)):
            for a_lo, a_hi in secs:
                edges = self._panel_edges(a_lo, a_hi)
                for e_lo, e_hi in zip(edges[:-1], edges[1:]):
                    if min(abs(e_lo), abs(e_hi)) < 1.0:
                        # near-origin panels run in the radius variable,
                        # where u is smooth; the half-integer powers of
                        # t = r^2 at the origin live inside these panels
                        # whenever a section starts near (not only at) 0
                        near, far = sorted((abs(e_lo), abs(e_hi)))
                        side = 1.0 if e_lo + e_hi > 0 else -1.0
                        r_lo.append(math.sqrt(near / (1.0 + near)))
                        r_hi.append(math.sqrt(far / (1.0 + far)))
                        r_phase.append(side * phase)
                        r_row.append(i)
                    else:
                        p_lo.append(e_lo)
                        p_hi.append(e_hi)
                        p_phase.append(phase)
                        p_row.append(i)
        n_rays = len(phases)
        hyp = np.zeros((2, n_rays))
        leb = np.zeros((2, n_rays))
        for order, gln in enumerate((_GL_SMALL, _GL_BIG)):
            x, w = _leggauss(gln)
            if p_lo:
                lo = np.array(p_lo)
                hi = np.array(p_hi)
                half = 0.5 * (hi - lo)
                a = 0.5 * (hi + lo)[:, None] + half[:, None] * x[None, :]
                u = self._u_ray(a, np.array(p_phase)[:, None])
                t = np.abs(a) / (1.0 + np.abs(a))
                np.add.at(hyp[order], np.array(p_row), half * (u @ w))
                np.add.at(leb[order], np.array(p_row),
                          half * ((u * (1.0 - t) ** 2) @ w))
            if r_hi:
                lo = np.array(r_lo)
                hi = np.array(r_hi)
                half = 0.5 * (hi - lo)
                r = 0.5 * (hi + lo)[:, None] + half[:, None] * x[None, :]
                u = self._u_disk(r, np.array(r_phase)[:, None])
                # da = 2r/(1-r^2)^2 dr and (1-t)^2 da = 2r dr
                hyp_g = u * 2.0 * r / (1.0 - r * r) ** 2
                leb_g = u * 2.0 * r
                np.add.at(hyp[order], np.array(r_row), half * (hyp_g @ w))
                np.add.at(leb[order], np.array(r_row), half * (leb_g @ w))
        return hyp, leb

    # -- precise measure and integrals -------------------------------------------

    def measure_integrals(self, level: float, want_integrals: bool = True):
        """(rho, I_hyperbolic, I_lebesgue) over {u > level} with error bars.

        Radial data and tangency-free level sets use the exact-ray /
        spectral-trapezoid path; otherwise smooth arcs between located
        tangency angles are integrated under the cosine substitution.
        """
        zero = Estimate(0.0, 0.0)
        if self.fn_zero or level >= self.ceiling:
            return zero, zero, zero
        if level <= 0.0:
            raise UnboundedError("superlevel quantities need level > 0")
        sections, slack = self._grid_sections(level)
        counts = [len(s) for s in sections]
        if self.radial or all(c == counts[0] for c in counts):
            tangencies = [] if self.radial else self._locate_tangencies(level, sections)
            if not tangencies:
                return self._smooth_path(level, sections, slack, want_integrals)
        else:
            tangencies = self._locate_tangencies(level, sections)
        if not tangencies:
            # count variation without a locatable tangency: fall back with
            # a slack-dominated error bar
            return self._smooth_path(level, sections, slack, want_integrals,
                                     extra_error=_LINE_PERIOD * self._da)
        return self._arc_path(level, tangencies, sections, want_integrals)

    def _smooth_path(self, level, sections, slack, want_integrals, extra_error=0.0):
        if self.radial:
            row_rho = np.array([sum(b - a for a, b in sec) for sec in sections])
            rho_val, _ = self._trapezoid(row_rho)
            slack_err = math.pi * slack
            rho_est = Estimate(rho_val, slack_err + extra_error)
            if not want_integrals:
                return rho_est, None, None
            phases = np.exp(1j * self._thetas)
            hyp_rows, leb_rows = self._batched_section_integrals(phases, sections)
            gl_h = math.pi * abs(hyp_rows[1, 0] - hyp_rows[0, 0])
            gl_l = math.pi * abs(leb_rows[1, 0] - leb_rows[0, 0])
            cross_err = level * (slack_err + extra_error)
            return (rho_est,
                    Estimate(math.pi * hyp_rows[1, 0], gl_h + cross_err),
                    Estimate(math.pi * leb_rows[1, 0], gl_l + cross_err))
        return self._smooth_adaptive(level, sections, want_integrals, extra_error)

    def _solve_rays(self, phases, level, window, n_scan=1024, extra_window=None):
        """Sections for a batch of rays: one matrix scan plus vectorized
        bisection.  Rays the window clips fall back to the widening
        single-ray solver."""
        grid = np.linspace(window[0], window[1], n_scan)
        if extra_window is not None:
            fine = np.linspace(extra_window[0], extra_window[1], n_scan)
            grid = np.unique(np.concatenate([grid, fine]))
        u_val = self._u_ray(grid[None, :], phases[:, None])
        above = u_val > level
        clipped = ((above[:, 0] & (grid[0] > -self._a_max))
                   | (above[:, -1] & (grid[-1] < self._a_max)))
        rows_idx, cols = np.nonzero(above[:, :-1] != above[:, 1:])
        keep = ~clipped[rows_idx]
        rows_idx, cols = rows_idx[keep], cols[keep]
        lo, hi = grid[cols], grid[cols + 1]
        if rows_idx.size:
            lo, hi = self._bisect(lo, hi, above[rows_idx, cols], phases[rows_idx], level)
        crossing = 0.5 * (lo + hi)
        slack = float(np.sum(hi - lo))
        section_lists = []
        for i in range(len(phases)):
            if clipped[i]:
                secs, s_i, ok = self._ray_sections(phases[i], level, window,
                                                   n_scan=n_scan,
                                                   extra_window=extra_window)
                slack += s_i if ok else (window[1] - window[0])
                section_lists.append(secs)
                continue
            xs = list(np.sort(crossing[rows_idx == i]))
            if above[i, 0]:
                xs = [float(grid[0])] + xs
            if len(xs) % 2:
                xs = xs + [float(grid[-1])]
            section_lists.append([(xs[k], xs[k + 1]) for k in range(0, len(xs) - 1, 2)])
        return section_lists, slack

    def _smooth_adaptive(self, level, sections, want_integrals, extra_error=0.0):
        """Tangency-free general path: periodic trapezoid over fresh ray
        solves, doubling the angular mesh (nodes nest) until the halving
        difference meets the engine tolerance."""
        pieces = [sec for col in sections for sec in col]
        if not pieces:
            zero = Estimate(0.0, extra_error)
            return zero, zero, zero
        pad = 4.0 * self._da
        window = (max(-self._a_max, min(a for a, _ in pieces) - pad),
                  min(self._a_max, max(b for _, b in pieces) + pad))
        target = max(self.tol, 1e-13)
        half_period = 0.5 * _LINE_PERIOD

        row_rho: list[float] = []
        row_hyp = np.zeros((2, 0))
        row_leb = np.zeros((2, 0))
        slack_total = 0.0
        n = 256
        prev = None
        while True:
            if not row_rho:
                thetas = _LINE_PERIOD * np.arange(n) / n
            else:  # midpoints of the current mesh double it in place
                thetas = _LINE_PERIOD * (np.arange(n // 2) + 0.5) / (n // 2)
            phases = np.exp(1j * thetas)
            new_sections, slack = self._solve_rays(phases, level, window)
            slack_total += slack
            row_rho.extend(sum(b - a for a, b in secs) for secs in new_sections)
            if want_integrals:
                hyp_new, leb_new = self._batched_section_integrals(phases, new_sections)
                row_hyp = np.concatenate([row_hyp, hyp_new], axis=1)
                row_leb = np.concatenate([row_leb, leb_new], axis=1)
            vals = [half_period * float(np.mean(row_rho))]
            if want_integrals:
                vals += [half_period * float(np.mean(row_hyp[1])),
                         half_period * float(np.mean(row_leb[1]))]
            if prev is not None:
                deltas = [abs(a - b) for a, b in zip(vals, prev)]
                if max(deltas) <= target or n >= 4096:
                    break
            prev = vals
            n *= 2
        ang_err = max(deltas) if prev is not None else 0.0
        slack_err = half_period * slack_total / max(1, len(row_rho))
        rho_est = Estimate(vals[0], ang_err + slack_err + extra_error)
        if not want_integrals:
            return rho_est, None, None
        gl_h = half_period * float(np.mean(np.abs(row_hyp[1] - row_hyp[0])))
        gl_l = half_period * float(np.mean(np.abs(row_leb[1] - row_leb[0])))
        cross = level * (slack_err + extra_error)
        return (rho_est,
                Estimate(vals[1], ang_err + gl_h + cross),
                Estimate(vals[2], ang_err + gl_l + cross))

    def _arc_path(self, level, tangencies, sections, want_integrals):
        thetas = sorted(th for th, _ in tangencies)
        windows = {th: w for th, w in tangencies}
        period = _LINE_PERIOD
        arcs = []
        for i, th in enumerate(thetas):
            th_wrap = thetas[(i + 1) % len(thetas)]
            th_next = th_wrap + (period if i + 1 == len(thetas) else 0.0)
            w1, w2 = windows[th], windows[th_wrap]
            # the main window must cover every section over the whole arc,
            # not just the shrinking ones near the tangencies
            pieces = [w1, w2]
            arc_span = th_next - th
            for j, col in enumerate(self._thetas):
                if arc_span >= period - 1e-9 or (col - th) % period < arc_span:
                    pieces.extend(sections[j])
            lo = min(a for a, _ in pieces)
            hi = max(b for _, b in pieces)
            pad = 4.0 * self._da
            window = (max(-self._a_max, lo - pad), min(self._a_max, hi + pad))
            arcs.append(_Arc(th, th_next, window, w1, w2))

        totals = np.zeros((2, 3))  # (order, quantity: rho/hyp/leb)
        slack_total = 0.0
        for arc in arcs:
            res = self._arc_quadrature(level, arc, want_integrals)
            if res is None:
                continue
            contrib, arc_slack = res
            totals += contrib
            slack_total += arc_slack
        rho_err = abs(totals[1, 0] - totals[0, 0]) + slack_total
        out_rho = Estimate(0.5 * totals[1, 0], 0.5 * rho_err + 1e-15 * abs(totals[1, 0]))
        if not want_integrals:
            return out_rho, None, None
        hyp_err = abs(totals[1, 1] - totals[0, 1]) + level * slack_total
        leb_err = abs(totals[1, 2] - totals[0, 2]) + level * slack_total
        return (out_rho,
                Estimate(0.5 * totals[1, 1], 0.5 * hyp_err),
                Estimate(0.5 * totals[1, 2], 0.5 * leb_err))

    def _arc_quadrature(self, level, arc: _Arc, want_integrals):
        """Adaptive composite Gauss-Legendre over one smooth arc under the
        cosine map theta(v) = lo + (hi-lo)(1-cos(pi v))/2, v in [0,1]
        (endpoint derivative zeroes absorb the square-root section behavior
        at tangencies); panels split until the order pair agrees."""
        contrib = np.zeros((2, 3))
        slack_total = 0.0
        populated = False
        panel_tol = 0.125 * max(self.tol, 1e-13)
        base = (0.0, 0.15, 0.5, 0.85, 1.0)
        # near-critical levels (the boundary grazing the origin) put narrow
        # angular features mid-arc; subdivision stays local, so a deep cap
        # costs little away from them
        stack = [(a, b, 10) for a, b in zip(base[:-1], base[1:])]
        while stack:
            v1, v2, depth = stack.pop()
            panel, pop_p, slack_p = self._arc_panel(level, arc, v1, v2, want_integrals)
            diff = float(np.max(np.abs(panel[1] - panel[0])))
            if diff > panel_tol and depth > 0:
                mid = 0.5 * (v1 + v2)
                stack.append((v1, mid, depth - 1))
                stack.append((mid, v2, depth - 1))
                continue
            contrib += panel
            slack_total += slack_p + diff
            populated = populated or pop_p
        if not populated:
            return None
        return contrib, slack_total

    def _arc_panel(self, level, arc: _Arc, v1, v2, want_integrals):
        """Gauss-Legendre pair on one v-panel of the cosine-mapped arc.

        Nodes near a tangency get a fine extra scan over the tangency hull
        (the section there shrinks far below the main window resolution);
        ray solves are batched per node group.
        """
        width = arc.theta_hi - arc.theta_lo
        panel = np.zeros((2, 3))
        slack_total = 0.0
        populated = False
        for order, gln in enumerate((_GL_SMALL, _GL_BIG)):
            x, gl_w = _leggauss(gln)
            v = 0.5 * (v1 + v2) + 0.5 * (v2 - v1) * x
            theta = arc.theta_lo + width * 0.5 * (1.0 - np.cos(math.pi * v))
            jac = (width * 0.5 * math.pi * np.sin(math.pi * v)
                   * 0.5 * (v2 - v1) * gl_w)
            phases = np.exp(1j * theta)
            section_lists = [None] * gln
            groups = ((v < 0.05, arc.tang_lo), (v > 0.95, arc.tang_hi),
                      ((v >= 0.05) & (v <= 0.95), None))
            for mask, extra in groups:
                if not np.any(mask):
                    continue
                secs_group, slack = self._solve_rays(
                    phases[mask], level, arc.window, extra_window=extra)
                for idx, secs in zip(np.nonzero(mask)[0], secs_group):
                    section_lists[idx] = secs
                if order == 1:  # count the slack once, on the fine rule
                    slack_total += slack * float(np.max(np.abs(jac))) * 2.0
            row_rho = np.array([sum(b - a for a, b in secs) for secs in section_lists])
            panel[order, 0] = float(np.dot(jac, row_rho))
            if any(section_lists):
                populated = True
            if want_integrals:
                hyp_rows, leb_rows = self._batched_section_integrals(phases, section_lists)
                # keep the same order pairing: small GL angular x small GL radial
                panel[order, 1] = float(np.dot(jac, hyp_rows[order]))
                panel[order, 2] = float(np.dot(jac, leb_rows[order]))
        return panel, populated, slack_total

    # -- public queries -------------------------------------------------------

    def rho(self, level: float) -> Estimate:
        """Hyperbolic measure of {u > level}."""
        if level <= 0.0:
            raise UnboundedError("superlevel measure at level <= 0 is infinite")
        est, _, _ = self.measure_integrals(level, want_integrals=False)
        return est

    def _rho_coarse(self, level: float) -> float:
        """Fast trapezoid value used only to bracket the inverse; its bias
        is corrected by one precise evaluation afterwards."""
        if self.fn_zero or level >= self.ceiling:
            return 0.0
        sections, _ = self._grid_sections(level)
        row = np.array([sum(b - a for a, b in sec) for sec in sections])
        return self._trapezoid(row)[0]

    def integrals_above(self, level: float) -> tuple[Estimate, Estimate]:
        """(hyperbolic, Lebesgue) integrals of u over {u > level}."""
        _, hyp, leb = self.measure_integrals(level, want_integrals=True)
        return hyp, leb

    def level_for_measure(self, s: float, hi: float | None = None) -> LevelResult:
        """The level t with rho(t) = s (u*), by monotone bisection of the
        coarse distribution; the returned rho is the precise value at the
        located level (first-order corrections use |rho - s|)."""
        if s <= 0.0:
            raise ValueError("need s > 0")
        if self.fn_zero:
            return LevelResult(0.0, 0.0, 0.0)
        hi = self.ceiling if hi is None else hi
        lo = 0.5 * hi
        for _ in range(2000):
            if self._rho_coarse(lo) > s:
                break
            hi = lo
            lo *= 0.5
        else:
            raise NonConvergentError(f"no level with measure > {s} found")
        level = float(brentq(lambda lev: self._rho_coarse(lev) - s, lo, hi,
                             xtol=1e-300, rtol=4.0 * np.finfo(float).eps))
        r = self.rho(level)
        return LevelResult(level, r.value, r.error)

    def sample_at(self, s: float, hi: float | None = None) -> ProfileSample:
        """One profile sample at prescribed superlevel measure s.

        The level is bracketed on the coarse distribution; the precise
        measure at that level differs from s by a small delta, which is
        absorbed to first order through dI/ds = level (exact), leaving an
        O(delta^2) remainder that the error bar covers.
        """
        factor = hat_factor(self.params, self.variant)
        theta = theta_bound(self.params, s, self.variant)
        if self.fn_zero:
            return ProfileSample(s, 0.0, 0.0, 0.0, 0.0, theta, theta, 0.0)
        res = self.level_for_measure(s, hi=hi)
        level = res.level
        delta = s - res.rho
        if abs(delta) > 1e-9 * max(1.0, s):
            # one Newton step against the precise measure: the coarse
            # bracketing bias can reach ~1e-4 near tangency levels, and the
            # second-order remainder of the measure correction goes as
            # delta^2
            eps = 1e-4 * level
            drho = (self._rho_coarse(level + eps) - self._rho_coarse(level - eps)) / (2 * eps)
            if drho < 0:
                level = min(self.ceiling, max(0.0, level + delta / drho))
        rho_p, hyp, leb = self.measure_integrals(level)
        delta = s - rho_p.value
        i_raw = hyp.value + level * delta
        i_literal = leb.value  # reported at the realized level set
        # remainder of the first-order correction is O(delta^2 du*/ds);
        # level/rho bounds the slope scale for the power-law-like tails here
        slope = level / max(rho_p.value, 1e-300)
        err = (hyp.error + level * rho_p.error + 0.5 * delta * delta * slope)
        i_hat = factor * i_raw
        # roundoff floor: the margin theta - I_hat is a float subtraction of
        # O(1) quantities, so a few ulps always sit on top of the quadrature
        err = factor * err + 1e-15 * max(1.0, abs(i_hat), abs(theta))
        return ProfileSample(
            s=s, level=level, i_raw=i_raw, i_hat=i_hat,
            i_literal=factor * i_literal, theta=theta,
            margin=theta - i_hat, error=err,
        )


@dataclass
class ConcentrationProfile:
    """Sampled concentration curve s -> (I_raw, I_hat, theta) with margins."""

    params: SpaceParams
    variant: str
    label: str
    samples: list[ProfileSample]
    engine: LevelSetEngine = field(repr=False)

    @property
    def exponent(self) -> float:
        return float(self.params.exponent(self.variant))


def level_density(f: AnalyticPolynomial, params: SpaceParams, z,
                  variant: str = MU):
    """u(z) for the norm-one representative of f (scalar or array z)."""
    engine = LevelSetEngine(f, params, variant)
    u = engine.u_at(z)
    return u.item() if np.ndim(u) == 0 else u


def distribution_rho(f: AnalyticPolynomial, params: SpaceParams, t: float,
                     variant: str = MU, force_general: bool = False) -> Estimate:
    """Hyperbolic measure of {u > t} (one-shot; profiles share an engine)."""
    return LevelSetEngine(f, params, variant, force_general=force_general).rho(t)


def u_star(f: AnalyticPolynomial, params: SpaceParams, s: float,
           variant: str = MU) -> LevelResult:
    """The inverse of the distribution function at measure s."""
    return LevelSetEngine(f, params, variant).level_for_measure(s)


def concentration_profile(f: AnalyticPolynomial, params: SpaceParams,
                          s_grid: Sequence[float], variant: str = MU,
                          tol: float = 1e-10, label: str = "",
                          force_general: bool = False,
                          n_theta: int = 128) -> ConcentrationProfile:
    """Profile I over an increasing grid of superlevel measures.

    Successive levels warm-start each other (u* is decreasing), so the
    grid must be strictly increasing.
    """
    s_grid = list(s_grid)
    if any(b <= a for a, b in zip(s_grid, s_grid[1:])):
        raise ValueError("s_grid must be strictly increasing")
    engine = LevelSetEngine(f, params, variant, tol=tol,
                            n_theta=n_theta, force_general=force_general)
    samples = []
    hi = None
    for s in s_grid:
        sample = engine.sample_at(s, hi=hi)
        samples.append(sample)
        hi = sample.level if sample.level > 0 else None
    return ConcentrationProfile(params=params, variant=variant, label=label,
                                samples=samples, engine=engine)


@dataclass(frozen=True)
class BoundReport:
    """Verdict-carrying margin report for one profile."""

    label: str
    margins: tuple
    errors: tuple
    worst_margin: float
    worst_s: float
    passed: bool
    strict: bool

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "VIOLATION"


def bound_report(profile: ConcentrationProfile) -> BoundReport:
    """Per-sample margins theta(s) - I_hat(s) with combined error bars.

    PASS when every margin >= -(error bar); `strict` additionally requires
    every margin > +(error bar), the expected outcome for n >= 1.
    """
    margins = tuple(smp.margin for smp in profile.samples)
    errors = tuple(smp.error for smp in profile.samples)
    worst_idx = min(range(len(margins)), key=lambda i: margins[i])
    passed = all(m >= -e for m, e in zip(margins, errors))
    strict = all(m > e for m, e in zip(margins, errors))
    return BoundReport(
        label=profile.label, margins=margins, errors=errors,
        worst_margin=margins[worst_idx], worst_s=profile.samples[worst_idx].s,
        passed=passed, strict=strict,
    )


def ode_convexity_check(profile: ConcentrationProfile, rel_step: float = 0.01,
                        n_uniform: int = 17) -> dict:
    """Finite-difference comparison checks satisfied by every profile.

    (i)  D^2 I + X * DI / (pi + s) at each interior sample (expected
         nonnegative up to tolerance), via a symmetric stencil of fresh
         evaluations with step h = rel_step * (pi + s);
    (ii) second differences of J(t) = I(T(t)) on a uniform t-grid, where
         T(t) = -pi + pi (1-t)^{1/(1-X)} inverts s -> theta(s); raw
         differences, no h^2 amplification (J is convex).
    """
    eng = profile.engine
    x = profile.exponent
    samples = profile.samples
    if eng.fn_zero:
        return {"min_ode_residual": 0.0, "min_second_difference": 0.0,
                "ode_points": 0, "convexity_points": 0}

    stencil = {}
    for smp in samples[1:-1]:
        h = rel_step * (math.pi + smp.s)
        if smp.s - h > 0:
            stencil[smp.s] = h

    t_lo = theta_bound(profile.params, samples[0].s, profile.variant)
    t_hi = theta_bound(profile.params, samples[-1].s, profile.variant)
    ts = np.linspace(t_lo, t_hi, n_uniform)
    ss_uniform = [-math.pi + math.pi * (1.0 - t) ** (1.0 / (1.0 - x)) for t in ts]

    # evaluate every needed s in increasing order so the inverse-level
    # brackets warm-start each other (u* is decreasing in s)
    wanted = sorted(set(
        [s0 + sgn * h for s0, h in stencil.items() for sgn in (1.0, -1.0)]
        + list(ss_uniform)
    ))
    i_hat = {smp.s: smp.i_hat for smp in samples}
    hi = None
    for s in wanted:
        if s not in i_hat:
            smp = eng.sample_at(s, hi=hi)
            i_hat[s] = smp.i_hat
            hi = smp.level if smp.level > 0 else hi

    min_resid = math.inf
    for smp in samples[1:-1]:
        if smp.s not in stencil:
            continue
        h = stencil[smp.s]
        ip, im = i_hat[smp.s + h], i_hat[smp.s - h]
        fd2 = (ip - 2.0 * smp.i_hat + im) / h ** 2
        fd1 = (ip - im) / (2.0 * h)
        min_resid = min(min_resid, fd2 + x * fd1 / (math.pi + smp.s))

    js = [i_hat[s] for s in ss_uniform]
    second = [js[i - 1] - 2.0 * js[i] + js[i + 1] for i in range(1, len(js) - 1)]
    return {
        "min_ode_residual": min_resid,
        "min_second_difference": min(second),
        "ode_points": len(stencil),
        "convexity_points": len(second),
    }


# ---------------------------------------------------------------------------
# log-curvature bound for the growth envelope


def curvature_margin_scan(n: int, alpha, points: int = 200,
                          t_max=Fraction(199, 200), tol: float = 1e-10) -> dict:
    """Margin scan of the growth-envelope curvature inequality

        H(t) = X (1-t)^{-2} F^2 - F F' - t F F'' + t (F')^2 >= 0,

    F = F(n+1, n+alpha; 1; t), X = (n+1)(n+alpha), on a uniform grid of
    [0, t_max].  Writing F = (1-t)^{-c} P with c = 2n+alpha and P the
    terminating polynomial F(1-alpha-n, -n; 1; t) gives

        H = (1-t)^{-2c-2} Ht(t),
        Ht = X P^2 - (1-t) P Q - t P R + t Q^2,
        Q = cP + (1-t)P',  R = c(c+1)P + 2c(1-t)P' + (1-t)^2 P'',

    a polynomial with rational coefficients: for rational alpha the sign
    verdict is exact, and H(0) = Ht(0) = 0 exactly.  Raises ViolationError
    when the margin drops below -tol (exact negativity always raises).
    """
    a = as_exact(alpha)
    te_max = as_exact(t_max)
    p = hypergeom_poly_coeffs(HypergeomParams(1 - a - n, -n, 1))
    dp = _exact_polyder(p)
    ddp = _exact_polyder(dp)
    c = 2 * n + a
    x = (n + 1) * (n + a)

    def ht_exact(t: Fraction) -> Fraction:
        pv = _exact_polyval(p, t)
        dpv = _exact_polyval(dp, t)
        ddpv = _exact_polyval(ddp, t)
        q = c * pv + (1 - t) * dpv
        r = c * (c + 1) * pv + 2 * c * (1 - t) * dpv + (1 - t) ** 2 * ddpv
        return x * pv * pv - (1 - t) * pv * q - t * pv * r + t * q * q

    min_h = math.inf
    argmin_t = Fraction(0)
    min_ht = None
    for j in range(points):
        t = te_max * j / (points - 1)
        ht = ht_exact(t)
        if ht < 0:
            raise ViolationError(
                f"curvature margin negative at n={n}, alpha={alpha}, t={t}: {ht}"
            )
        h = float(ht) * float(1 - t) ** (-2.0 * float(c) - 2.0)
        if h < min_h:
            min_h, argmin_t = h, t
        if min_ht is None or ht < min_ht:
            min_ht = ht
    if min_h < -tol:
        raise ViolationError(f"curvature margin below -{tol} at n={n}, alpha={alpha}")
    return {
        "n": n, "alpha": a, "points": points, "t_max": te_max,
        "min_margin": min_h, "argmin_t": argmin_t,
        "min_polynomial_margin": min_ht, "margin_at_zero": ht_exact(Fraction(0)),
    }


def _exact_polyder(coeffs):
    return [coeffs[j] * j for j in range(1, len(coeffs))] or [Fraction(0)]


def _exact_polyval(coeffs, t):
    acc = Fraction(0)
    for ck in reversed(coeffs):
        acc = acc * t + ck
    return acc
