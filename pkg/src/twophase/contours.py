"""Integration paths in the complex spectral plane and quadrature along them.

Paths are built from three segment kinds (lines, circular arcs, truncated
rays).  ``integrate_exp`` evaluates (1/2 pi i) * integral of e^{lambda t} f
with composite Gauss-Legendre panels, geometric grading where e^{lambda t}
sets a boundary layer, and whole-path refinement doubling as the error
estimate.  ``argument_principle_count`` turns a closed path into a winding
number / zero counter.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BoundaryZero, GeometryError, QuadratureFailure
from .params import DerivedConstants
from .symbols import zeta_arrays

_JOIN_TOL = 1e-12
_GL_NODES = 16
_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


# ---------------------------------------------------------------------------
# segments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Line:
    """Straight segment from start to end, parametrized on [0, 1]."""

    start: complex
    end: complex

    def at(self, s):
        return self.start + (self.end - self.start) * np.asarray(s)

    def deriv(self, s):
        return np.full(np.shape(s), self.end - self.start, dtype=complex)

    @property
    def param_range(self):
        return (0.0, 1.0)

    @property
    def first_point(self):
        return self.start

    @property
    def last_point(self):
        return self.end

    def to_json(self):
        return {"type": "line", "start": [self.start.real, self.start.imag],
                "end": [self.end.real, self.end.imag]}


@dataclass(frozen=True)
class Arc:
    """Circular arc center + radius e^{i s}, s from s_start to s_end (radians)."""

    center: complex
    radius: float
    s_start: float
    s_end: float

    def at(self, s):
        return self.center + self.radius * np.exp(1j * np.asarray(s))

    def deriv(self, s):
        return 1j * self.radius * np.exp(1j * np.asarray(s))

    @property
    def param_range(self):
        return (self.s_start, self.s_end)

    @property
    def first_point(self):
        return self.center + self.radius * cmath.exp(1j * self.s_start)

    @property
    def last_point(self):
        return self.center + self.radius * cmath.exp(1j * self.s_end)

    def to_json(self):
        return {"type": "arc", "center": [self.center.real, self.center.imag],
                "radius": self.radius, "s_start": self.s_start, "s_end": self.s_end}


@dataclass(frozen=True)
class Ray:
    """Ray start + s e^{i angle}; ``inward`` runs it from far field to start.

    ``s_max`` = None leaves the truncation to the integrator (requires t > 0
    and a leftward angle so that e^{lambda t} supplies the decay).
    """

    start: complex
    angle: float
    s_max: float | None = None
    inward: bool = False

    def at(self, s):
        return self.start + np.asarray(s) * cmath.exp(1j * self.angle)

    def deriv(self, s):
        return np.full(np.shape(s), cmath.exp(1j * self.angle), dtype=complex)

    @property
    def param_range(self):
        return (0.0, self.s_max if self.s_max is not None else math.inf)

    @property
    def first_point(self):
        if self.inward:
            return None  # at infinity
        return self.start

    @property
    def last_point(self):
        if self.inward:
            return self.start
        return None

    def leftward(self) -> bool:
        c = math.cos(self.angle)
        return c < 0.0

    def to_json(self):
        return {"type": "ray", "start": [self.start.real, self.start.imag],
                "angle": self.angle, "s_max": self.s_max, "inward": self.inward}


Segment = Line | Arc | Ray


def segment_from_json(d: dict) -> Segment:
    kind = d.get("type")
    if kind == "line":
        return Line(complex(*d["start"]), complex(*d["end"]))
    if kind == "arc":
        return Arc(complex(*d["center"]), d["radius"], d["s_start"], d["s_end"])
    if kind == "ray":
        return Ray(complex(*d["start"]), d["angle"], d.get("s_max"), d.get("inward", False))
    raise GeometryError(f"unknown segment type {kind!r}")


class ContourPath:
    """Ordered piecewise-analytic path; validates endpoint continuity."""

    def __init__(self, segments: Sequence[Segment], name: str = ""):
        segments = tuple(segments)
        if not segments:
            raise GeometryError("empty contour path")
        self.segments = segments
        self.name = name
        self._check_continuity()

    def _check_continuity(self):
        prev_end = None
        for seg in self.segments:
            first = seg.first_point
            if prev_end is not None and first is not None:
                scale = max(abs(prev_end), abs(first), 1.0)
                if abs(prev_end - first) > _JOIN_TOL * scale:
                    raise GeometryError(
                        f"segments do not join: {prev_end} -> {first} in path {self.name!r}"
                    )
            prev_end = seg.last_point

    @property
    def is_closed(self) -> bool:
        first = self.segments[0].first_point
        last = self.segments[-1].last_point
        if first is None or last is None:
            return False
        scale = max(abs(first), abs(last), 1.0)
        return abs(first - last) <= _JOIN_TOL * scale

    def to_json(self):
        return {"name": self.name, "segments": [s.to_json() for s in self.segments]}

    @classmethod
    def from_json(cls, d: dict) -> "ContourPath":
        return cls([segment_from_json(s) for s in d["segments"]], name=d.get("name", ""))

    def sample(self, per_segment: int = 256) -> np.ndarray:
        """Dense point sample along the path (rays need s_max set)."""
        pts = []
        for seg in self.segments:
            a, b = seg.param_range
            if not math.isfinite(b):
                raise GeometryError("cannot sample an untruncated ray")
            s = np.linspace(a, b, per_segment, endpoint=False)
            if isinstance(seg, Ray) and seg.inward:
                s = s[::-1]
            pts.append(seg.at(s))
        return np.concatenate(pts)


@dataclass(frozen=True)
class Region:
    """Named region of the spectral plane given by its closed boundary."""

    name: str
    boundary: ContourPath

    def __post_init__(self):
        if not self.boundary.is_closed:
            raise GeometryError(f"region {self.name!r} boundary is not closed")


# ---------------------------------------------------------------------------
# path builders
# ---------------------------------------------------------------------------

def gamma0_anchor(consts: DerivedConstants) -> float:
    return 2.0 * consts.lambda1 / math.sin(consts.theta1)


def build_gamma0(consts: DerivedConstants) -> ContourPath:
    """Main resolvent contour: two rays leaving the positive-real anchor."""
    anchor = gamma0_anchor(consts)
    ang = math.pi - consts.theta1
    return ContourPath(
        [Ray(anchor, -ang, inward=True), Ray(anchor, ang)],
        name="gamma0",
    )


def _ray_gamma0_intersection(consts: DerivedConstants, x: float) -> complex:
    """Intersection of the vertical line Re lambda = -x with the upper main ray."""
    anchor = gamma0_anchor(consts)
    c, s = math.cos(consts.theta1), math.sin(consts.theta1)
    r = (anchor + x) / c
    if r <= 0:
        raise GeometryError(f"vertical line Re = {-x} misses the main contour")
    return complex(-x, r * s)


@dataclass(frozen=True)
class LowPaths:
    """Everything the low-frequency band needs at one frequency A."""

    gamma1_plus: ContourPath
    gamma1_minus: ContourPath
    gamma2_plus: ContourPath
    gamma2_minus: ContourPath
    gamma3: ContourPath
    gamma4_plus: ContourPath
    gamma4_minus: ContourPath
    gamma5_plus: ContourPath
    gamma5_minus: ContourPath
    gamma_res_plus: ContourPath
    gamma_res_minus: ContourPath
    K: Region
    K_plus: Region
    K_minus: Region
    z1_plus: complex
    z1_minus: complex
    z2_plus: complex
    z2_minus: complex
    z3_plus: complex
    z3_minus: complex

    def tilde_paths(self):
        """The non-residue paths of the low-band decomposition."""
        return (self.gamma1_plus, self.gamma1_minus,
                self.gamma4_plus, self.gamma4_minus,
                self.gamma5_plus, self.gamma5_minus)

    def decomposition_paths(self):
        return (self.gamma_res_plus, self.gamma_res_minus) + self.tilde_paths()


def build_low_paths(consts: DerivedConstants, A: float) -> LowPaths:
    """All low-band paths and regions at tangential frequency A > 0."""
    if A <= 0:
        raise GeometryError(f"low-band paths need A > 0, got {A}")
    z0, lam1 = consts.z0, consts.lambda1
    th1, th2 = consts.theta1, consts.theta2
    center1 = complex(-(z0 / 2.0) * A * A, 0.0)
    r1 = (z0 / 4.0) * A * A
    z1p = center1 + 1j * r1
    z1m = center1 - 1j * r1
    z2p = lam1 * cmath.exp(1j * (math.pi - th2))
    z2m = lam1 * cmath.exp(-1j * (math.pi - th2))

    # z3: intersection of the diagonal arg = 3pi/4 with the upper main ray
    c1, s1 = math.cos(th1), math.sin(th1)
    if c1 <= s1:
        raise GeometryError("main-ray angle too steep for the diagonal intersection")
    anchor = gamma0_anchor(consts)
    r = anchor / (c1 - s1)
    z3p = anchor + r * cmath.exp(1j * (math.pi - th1))
    z3m = z3p.conjugate()

    gamma1_plus = ContourPath([Arc(center1, r1, 0.0, math.pi / 2.0)], "gamma1+")
    gamma1_minus = ContourPath([Arc(center1, r1, 0.0, -math.pi / 2.0)], "gamma1-")
    gamma2_plus = ContourPath([Line(z1p, z2p)], "gamma2+")
    gamma2_minus = ContourPath([Line(z1m, z2m)], "gamma2-")
    gamma3 = ContourPath([Arc(0.0, lam1, -(math.pi - th2), math.pi - th2)], "gamma3")
    gamma4_plus = ContourPath([Line(z1p, z3p)], "gamma4+")
    gamma4_minus = ContourPath([Line(z1m, z3m)], "gamma4-")
    gamma5_plus = ContourPath([Ray(z3p, math.pi - th1)], "gamma5+")
    gamma5_minus = ContourPath([Ray(z3m, -(math.pi - th1))], "gamma5-")

    zp, zm = zeta_arrays(consts, A)
    r_res = A ** 1.5
    gamma_res_plus = ContourPath([Arc(complex(zp), r_res, 0.0, 2.0 * math.pi)], "gamma_res+")
    gamma_res_minus = ContourPath([Arc(complex(zm), r_res, 0.0, 2.0 * math.pi)], "gamma_res-")

    # positively oriented boundary of K: big arc, upper spoke in, around the
    # small bite, lower spoke out
    k_boundary = ContourPath(
        [
            Arc(0.0, lam1, -(math.pi - th2), math.pi - th2),
            Line(z2p, z1p),
            Arc(center1, r1, math.pi / 2.0, 0.0),
            Arc(center1, r1, 0.0, -math.pi / 2.0),
            Line(z1m, z2m),
        ],
        "K-boundary",
    )
    return LowPaths(
        gamma1_plus=gamma1_plus, gamma1_minus=gamma1_minus,
        gamma2_plus=gamma2_plus, gamma2_minus=gamma2_minus, gamma3=gamma3,
        gamma4_plus=gamma4_plus, gamma4_minus=gamma4_minus,
        gamma5_plus=gamma5_plus, gamma5_minus=gamma5_minus,
        gamma_res_plus=gamma_res_plus, gamma_res_minus=gamma_res_minus,
        K=Region("K", k_boundary),
        K_plus=Region("K_plus", gamma_res_plus),
        K_minus=Region("K_minus", gamma_res_minus),
        z1_plus=z1p, z1_minus=z1m, z2_plus=complex(z2p), z2_minus=complex(z2m),
        z3_plus=z3p, z3_minus=z3m,
    )


@dataclass(frozen=True)
class HighPaths:
    gamma6: ContourPath
    gamma7_lower: ContourPath
    gamma7_upper: ContourPath
    combined: ContourPath
    y_top: float


def build_high_paths(consts: DerivedConstants, a0: float, y_top: float) -> HighPaths:
    """Vertical segment at Re = -a0 plus the two outgoing rays at +-(pi - theta1).

    The two rays form a disconnected union, hence come back as separate
    single-segment paths; ``combined`` chains everything bottom-to-top.
    """
    if not (0.0 < a0):
        raise GeometryError(f"a0 must be positive, got {a0}")
    if y_top <= 0:
        raise GeometryError(f"y_top must be positive, got {y_top}")
    lo = complex(-a0, -y_top)
    hi = complex(-a0, y_top)
    ang = math.pi - consts.theta1
    gamma6 = ContourPath([Line(lo, hi)], "gamma6")
    gamma7_lower = ContourPath([Ray(lo, -ang, inward=True)], "gamma7-")
    gamma7_upper = ContourPath([Ray(hi, ang)], "gamma7+")
    combined = ContourPath(
        [Ray(lo, -ang, inward=True), Line(lo, hi), Ray(hi, ang)], "gamma67"
    )
    return HighPaths(gamma6=gamma6, gamma7_lower=gamma7_lower,
                     gamma7_upper=gamma7_upper, combined=combined, y_top=y_top)


def high_rect_top(consts: DerivedConstants, a: float) -> float:
    """Imaginary part where Re lambda = -a meets the upper main ray."""
    return _ray_gamma0_intersection(consts, a).imag


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def _truncate_ray(seg: Ray, t: float, integrand, tol: float) -> float:
    """Pick s_max so the neglected tail of e^{lambda t} f is below tol."""
    if seg.s_max is not None:
        return seg.s_max
    if t <= 0:
        raise QuadratureFailure("untruncated ray requires t > 0")
    c = math.cos(seg.angle)
    if c >= 0:
        raise QuadratureFailure("ray does not point leftward; e^{lambda t} cannot decay")
    # crude magnitude probe for the integrand along the near part of the ray
    probes = seg.at(np.array([0.0, 1.0, 4.0, 16.0]))
    vals = np.asarray(integrand(probes))
    bound = float(np.max(np.abs(vals))) if vals.size else 1.0
    if not math.isfinite(bound) or bound <= 0:
        bound = 1.0
    log_target = math.log(tol) - math.log1p(bound)
    s_max = (log_target / t - seg.start.real) / c
    return max(s_max, 2.0)


def _panels(seg: Segment, t: float, a: float, b: float) -> list[tuple[float, float]]:
    """Initial panel layout on [a, b]; graded where e^{lambda t} is steep."""
    la = seg.at(a)
    lb = seg.at(b)
    if isinstance(seg, Arc):
        # phase and modulus of e^{lambda t} both vary on the scale radius * t
        n = int(np.clip(math.ceil((abs(seg.radius) * t + 4.0 * abs(b - a)) / 3.0), 4, 4096))
        edges = np.linspace(a, b, n + 1)
        return list(zip(edges[:-1], edges[1:]))
    # lines and rays: exponential variation along the parameter
    drop = (np.real(lb) - np.real(la)) * t  # negative when decaying toward b
    length = b - a
    if abs(drop) > 24.0:
        # geometric panels clustered at the end where |e^{lambda t}| peaks
        scale = length * 12.0 / abs(drop)
        edges = [0.0]
        w = scale
        while edges[-1] + w < length:
            edges.append(edges[-1] + w)
            w *= 2.0
        edges.append(length)
        rel = np.asarray(edges)
        if drop > 0:  # grows toward b: cluster near b
            rel = length - rel[::-1]
    else:
        rel = np.linspace(0.0, length, 9)
    rel = _refine_endpoints(rel, length)
    return [(a + u0, a + u1) for u0, u1 in zip(rel[:-1], rel[1:])]


def _refine_endpoints(rel: np.ndarray, length: float) -> np.ndarray:
    """Geometric subdivision toward both ends (handles endpoint branch points)."""
    out = set(float(u) for u in rel)
    w = 1e-7 * length
    while w < rel[1] - rel[0]:
        out.add(rel[0] + w)
        w *= 4.0
    w = 1e-7 * length
    while w < rel[-1] - rel[-2]:
        out.add(rel[-1] - w)
        w *= 4.0
    return np.array(sorted(out))


def _integrate_segment(seg: Segment, t: float, integrand, panels, nodes: int):
    """Returns (value, gross) where gross is the L1 bound of the sampled sum."""
    x, w = _gauss(nodes)
    total = None
    gross = 0.0
    for (u0, u1) in panels:
        half = 0.5 * (u1 - u0)
        mid = 0.5 * (u1 + u0)
        s = mid + half * x
        lam = np.asarray(seg.at(s))
        dlam = np.asarray(seg.deriv(s))
        f = np.asarray(integrand(lam))
        expf = np.exp(lam * t)
        core = expf * dlam
        if f.ndim > 1:
            core = core.reshape(core.shape + (1,) * (f.ndim - 1))
            ww = (w * half).reshape((-1,) + (1,) * (f.ndim - 1))
        else:
            ww = w * half
        terms = ww * core * f
        contrib = np.sum(terms, axis=0)
        gross = max(gross, float(np.max(np.sum(np.abs(terms), axis=0))))
        total = contrib if total is None else total + contrib
    return total, gross


def _split(panels):
    out = []
    for (u0, u1) in panels:
        um = 0.5 * (u0 + u1)
        out.append((u0, um))
        out.append((um, u1))
    return out


def integrate_exp(path: ContourPath, t: float, integrand: Callable, tol: float = 1e-10,
                  max_doublings: int = 12, full_output: bool = False):
    """(1/2 pi i) * integral over the path of e^{lambda t} integrand(lambda).

    ``integrand`` must accept a complex ndarray of nodes and return an array
    whose leading axis matches it (extra trailing axes ride along).  Panel
    counts double until two successive refinements agree to tol (relative to
    the running value); QuadratureFailure otherwise.
    """
    total = None
    reports = []
    for seg in path.segments:
        a, b = seg.param_range
        sign = 1.0
        if isinstance(seg, Ray):
            b = _truncate_ray(seg, t, integrand, tol)
            if seg.inward:
                sign = -1.0  # traversed from far field toward the start
        panels = _panels(seg, t, a, b)
        val, gross = _integrate_segment(seg, t, integrand, panels, _GL_NODES)
        converged = False
        level = 0
        for level in range(1, max_doublings + 1):
            panels = _split(panels)
            new, gross = _integrate_segment(seg, t, integrand, panels, _GL_NODES)
            scale = max(float(np.max(np.abs(new))), 1e-300)
            delta = float(np.max(np.abs(new - val)))
            val = new
            # second clause: cancellation noise floor, cannot refine past it
            if delta <= 0.5 * tol * scale or delta <= 32.0 * np.finfo(float).eps * gross:
                converged = True
                break
        if not converged:
            raise QuadratureFailure(
                f"panel refinement stalled on segment {seg} of {path.name!r}"
            )
        reports.append({"segment": seg.__class__.__name__,
                        "panels": len(panels), "levels": level})
        seg_val = sign * val
        total = seg_val if total is None else total + seg_val
    result = total / (2j * math.pi)
    if full_output:
        return result, reports
    return result


def argument_principle_count(region: Region | ContourPath, fn: Callable,
                             samples: int = 512) -> int:
    """Zero count of fn inside a closed path via the winding number.

    ``fn`` is evaluated on dense boundary samples (vectorized); the count is
    the total phase increment / 2 pi.  The sampling is doubled once for
    confirmation; disagreement doubles again before giving up.
    """
    path = region.boundary if isinstance(region, Region) else region
    if not path.is_closed:
        raise GeometryError("argument principle needs a closed path")

    def winding(n: int) -> int:
        pts = path.sample(n)
        vals = np.asarray(fn(pts))
        mags = np.abs(vals)
        floor = 1e-12 * float(np.median(mags))
        if float(np.min(mags)) <= floor:
            raise BoundaryZero(
                f"|fn| dips to {float(np.min(mags)):.3e} on the boundary (median {float(np.median(mags)):.3e})"
            )
        ratios = vals[np.r_[1:len(vals), 0]] / vals
        turns = float(np.sum(np.angle(ratios))) / (2.0 * math.pi)
        return int(round(turns))

    n = samples
    count = winding(n)
    for _ in range(3):
        confirm = winding(2 * n)
        if confirm == count:
            return count
        n *= 2
        count = confirm
    raise QuadratureFailure("winding number did not stabilize under sample doubling")
