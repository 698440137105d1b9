"""Exact dyadic-cube geometry.

All coordinates live on the global dyadic lattice of resolution 2**-RES_BITS
and are stored as scaled integers ("units"): the real coordinate is
``units / UNIT``.  Every membership, containment and adjacency predicate is
therefore bit-exact; only the fractional-power thresholds of the goodness
predicates are evaluated in floating point, with a fixed comparison margin
(ties resolve to "good").

A cube is half open: ``prod_k [lower_k, lower_k + side)``.  A truncated dyadic
grid holds cubes of side 2**-l for levels N <= l <= M (so N is the coarsest
level and M the finest) and is identified by its translation offset gamma,
one nonnegative multiple of 2**-M per axis, smaller than 2**-N.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterator, Sequence

RES_BITS = 24
UNIT = 1 << RES_BITS

# Margin (in units) for float comparisons against exact integer distances:
# 2**-40 in coordinate scale.
TIE_MARGIN = 2.0 ** (RES_BITS - 40)


def side_units(level: int) -> int:
    """Side length in units of a dyadic cube at `level` (side 2**-level)."""
    if level > RES_BITS:
        raise ValueError(f"level {level} finer than resolution 2**-{RES_BITS}")
    return (UNIT >> level) if level >= 0 else (UNIT << -level)


def to_units(x) -> int:
    """Snap a coordinate (float, Fraction or exact decimal string) to units."""
    f = Fraction(x)
    u = f * UNIT
    if u.denominator != 1:
        raise ValueError(f"{x} is not a dyadic rational at resolution 2**-{RES_BITS}")
    return int(u)


def units_to_str(u: int) -> str:
    """Exact decimal representation of the dyadic rational u / 2**RES_BITS."""
    sign = "-" if u < 0 else ""
    u = abs(u)
    whole, rem = divmod(u, UNIT)
    if rem == 0:
        return f"{sign}{whole}"
    digits = str(rem * 5**RES_BITS).rjust(RES_BITS, "0").rstrip("0")
    return f"{sign}{whole}.{digits}"


@dataclass(frozen=True, order=True)
class Cube:
    """Half-open axis-parallel cube; `lower` and `side` in lattice units."""

    lower: tuple[int, ...]
    side: int

    def __post_init__(self):
        if self.side <= 0:
            raise ValueError("cube side must be positive")

    @classmethod
    def at(cls, lower: Sequence, side) -> "Cube":
        return cls(tuple(to_units(x) for x in lower), to_units(side))

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def upper(self) -> tuple[int, ...]:
        return tuple(l + self.side for l in self.lower)

    @property
    def lower_float(self) -> tuple[float, ...]:
        return tuple(l / UNIT for l in self.lower)

    @property
    def side_float(self) -> float:
        return self.side / UNIT

    @property
    def center_float(self) -> tuple[float, ...]:
        return tuple((2 * l + self.side) / (2 * UNIT) for l in self.lower)

    def contains_point(self, p: Sequence[int]) -> bool:
        return all(l <= x < l + self.side for l, x in zip(self.lower, p))

    def contains_cube(self, other: "Cube") -> bool:
        return all(
            l <= ol and ol + other.side <= l + self.side
            for l, ol in zip(self.lower, other.lower)
        )

    def intersects(self, other: "Cube") -> bool:
        return all(
            max(l, ol) < min(l + self.side, ol + other.side)
            for l, ol in zip(self.lower, other.lower)
        )

    def dilate(self, factor: int = 3) -> "Cube":
        """Concentric integer dilation; factor must be odd to stay on lattice."""
        if factor % 2 != 1 or factor < 1:
            raise ValueError("dilation factor must be an odd positive integer")
        shift = (factor - 1) // 2 * self.side
        return Cube(tuple(l - shift for l in self.lower), factor * self.side)

    def as_json(self) -> dict:
        return {
            "lower": [units_to_str(l) for l in self.lower],
            "side": units_to_str(self.side),
        }

    @classmethod
    def from_json(cls, d: dict) -> "Cube":
        return cls.at(d["lower"], d["side"])


def cube_children(Q: Cube) -> list[Cube]:
    """The 2**n half-open dyadic children, in lexicographic order of lowers."""
    h, rem = divmod(Q.side, 2)
    if rem:
        raise ValueError("cube side not bisectable at the global resolution")
    out = []
    for bits in product((0, 1), repeat=Q.dim):
        out.append(Cube(tuple(l + b * h for l, b in zip(Q.lower, bits)), h))
    return out


def triadic_siblings(Q: Cube) -> list[Cube]:
    """The 3**n cubes of side l(Q) tiling 3Q, lexicographic; Q is one of them."""
    out = []
    for offs in product((-1, 0, 1), repeat=Q.dim):
        out.append(Cube(tuple(l + o * Q.side for l, o in zip(Q.lower, offs)), Q.side))
    return out


def dist_to_boundary(A: Cube, B: Cube) -> float:
    """Euclidean distance (units) from A to the boundary of B.

    Exact per-axis integer gaps; only the final square root rounds.  Zero when
    A straddles the boundary.
    """
    if B.contains_cube(A):
        g = min(
            min(al - bl, bl + B.side - (al + A.side))
            for al, bl in zip(A.lower, B.lower)
        )
        return float(g)
    if A.intersects(B):
        return 0.0
    s = 0
    for al, bl in zip(A.lower, B.lower):
        gap = max(0, bl - (al + A.side), al - (bl + B.side))
        s += gap * gap
    return float(s) ** 0.5


def _embed_threshold(side_inner: int, side_outer: int, eps: float) -> float:
    return 0.5 * float(side_inner) ** eps * float(side_outer) ** (1.0 - eps)


@dataclass(frozen=True)
class GoodnessParams:
    """Scale-gap and boundary-exponent parameters for the goodness predicates."""

    r: int = 6
    eps: float = 0.45
    rho: int = 9
    tau: int = 7
    strict_tau: bool = False

    def __post_init__(self):
        if not (0.0 < self.eps < 1.0):
            raise ValueError("eps must lie in (0, 1)")
        if self.r < 1 or self.rho <= self.r or self.tau < 1:
            raise ValueError("need rho > r >= 1 and tau >= 1")

    def widened(self) -> "GoodnessParams":
        """Variant with rho = 2r + 2, for runs needing rho > tau + r."""
        return GoodnessParams(self.r, self.eps, 2 * self.r + 2, self.tau, self.strict_tau)


def is_deeply_embedded(J: Cube, K: Cube, params: GoodnessParams) -> bool:
    """J inside K with scale gap >= r and boundary clearance >= the
    eps-interpolated threshold 0.5 * l(J)**eps * l(K)**(1-eps)."""
    if not K.contains_cube(J):
        return False
    if J.side << params.r > K.side:
        return False
    return dist_to_boundary(J, K) >= _embed_threshold(J.side, K.side, params.eps) - TIE_MARGIN


@dataclass(frozen=True)
class DyadicGrid:
    """Truncated dyadic grid on the 2**-M tiling, top side 2**-N, offset gamma."""

    dim: int
    M: int
    N: int
    gamma: tuple[int, ...]

    def __post_init__(self):
        if self.N > self.M:
            raise ValueError("need N <= M")
        if self.M > RES_BITS:
            raise ValueError(f"M must not exceed the resolution exponent {RES_BITS}")
        if len(self.gamma) != self.dim:
            raise ValueError("gamma length must equal dim")
        step = side_units(self.M)
        top = side_units(self.N)
        for g in self.gamma:
            if g % step != 0 or not (0 <= g < top):
                raise ValueError("gamma components must be multiples of 2**-M in [0, 2**-N)")

    def levels(self) -> range:
        return range(self.N, self.M + 1)

    def level_of(self, Q: Cube) -> int | None:
        """Level of Q if Q belongs to this grid, else None."""
        s = Q.side
        if s & (s - 1):
            return None
        level = RES_BITS - s.bit_length() + 1
        if not (self.N <= level <= self.M):
            return None
        for l, g in zip(Q.lower, self.gamma):
            if (l - g) % s != 0:
                return None
        return level

    def __contains__(self, Q: Cube) -> bool:
        return self.level_of(Q) is not None

    def cube_at(self, level: int, point: Sequence[int]) -> Cube:
        """The grid cube at `level` containing `point` (units)."""
        if not (self.N <= level <= self.M):
            raise ValueError("level outside grid range")
        s = side_units(level)
        lower = tuple(g + ((p - g) // s) * s for p, g in zip(point, self.gamma))
        return Cube(lower, s)

    def parent(self, Q: Cube) -> Cube | None:
        level = self.level_of(Q)
        if level is None:
            raise ValueError("not a grid cube")
        if level == self.N:
            return None
        return self.cube_at(level - 1, Q.lower)

    def ancestors(self, Q: Cube) -> Iterator[Cube]:
        """Proper grid ancestors of Q, finest first, up to the top level N."""
        level = self.level_of(Q)
        if level is None:
            raise ValueError("not a grid cube")
        for l in range(level - 1, self.N - 1, -1):
            yield self.cube_at(l, Q.lower)

    def cubes_in_box(self, level: int, lo: Sequence[int], hi: Sequence[int]) -> Iterator[Cube]:
        """Grid cubes at `level` meeting the half-open box [lo, hi)."""
        s = side_units(level)
        ranges = []
        for a, b, g in zip(lo, hi, self.gamma):
            k0 = (a - g) // s
            k1 = -((g - b) // s)  # ceil((b - g) / s)
            ranges.append(range(k0, k1))
        for ks in product(*ranges):
            yield Cube(tuple(g + k * s for k, g in zip(ks, self.gamma)), s)


def grid_from_translation(gamma: Sequence, M: int, N: int) -> DyadicGrid:
    """Grid obtained by translating the standard truncated grid by gamma."""
    g = tuple(to_units(x) for x in gamma)
    return DyadicGrid(len(g), M, N, g)


def grid_from_scales(beta: Sequence[Sequence[int]], M: int, N: int) -> DyadicGrid:
    """Grid from per-axis scale bits indexed by levels N..M (M-N+1 bits each).

    Bit j of an axis selects, at level N+j, which of the two coarsenings of the
    chosen level-(N+j+1) tiling to use.  The result is reported canonically as
    a translation offset; the level-N bit never affects the grid (there is no
    coarser level to discriminate), which is why there are only 2**(n(M-N))
    distinct grids.
    """
    nbits = M - N + 1
    g = []
    for axis_bits in beta:
        if len(axis_bits) != nbits:
            raise ValueError(f"expected {nbits} bits per axis, got {len(axis_bits)}")
        if any(b not in (0, 1) for b in axis_bits):
            raise ValueError("scale bits must be 0 or 1")
        acc = 0
        for j, b in enumerate(axis_bits):
            level = N + j
            if level > N and b:
                acc += side_units(level)
        g.append(acc)
    return DyadicGrid(len(g), M, N, tuple(g))


def enumerate_grids(M: int, N: int, dim: int, cap: int = 1 << 16) -> list[DyadicGrid]:
    """All 2**(n(M-N)) truncated grids, gamma in lexicographic order."""
    count = 1 << (dim * (M - N))
    if count > cap:
        raise ValueError(f"grid count {count} exceeds cap {cap}")
    step = side_units(M)
    per_axis = [k * step for k in range(1 << (M - N))]
    return [DyadicGrid(dim, M, N, g) for g in product(per_axis, repeat=dim)]


def sample_grid(seed: int, M: int, N: int, dim: int) -> DyadicGrid:
    """One grid drawn uniformly; deterministic given the seed."""
    from .util import rng_for

    rng = rng_for(seed)
    step = side_units(M)
    ks = rng.integers(0, 1 << (M - N), size=dim)
    return DyadicGrid(dim, M, N, tuple(int(k) * step for k in ks))


def is_good_cube(I: Cube, grid: DyadicGrid, params: GoodnessParams) -> bool:
    """Whether I keeps the eps-threshold clearance from the boundary of every
    grid ancestor at least r levels coarser (ancestors up to the top level)."""
    level = grid.level_of(I)
    if level is None:
        raise ValueError("I is not a cube of the grid")
    if params.strict_tau:
        plain = GoodnessParams(params.r, params.eps, params.rho, params.tau, False)
        if not is_good_cube(I, grid, plain):
            return False
        if level < grid.M:
            if not all(is_good_cube(c, grid, plain) for c in cube_children(I)):
                return False
        up = I
        for _ in range(params.tau):
            up = grid.parent(up)
            if up is None:
                break
            if not is_good_cube(up, grid, plain):
                return False
        return True
    for K in grid.ancestors(I):
        if K.side < I.side << params.r:
            continue
        if dist_to_boundary(I, K) < _embed_threshold(I.side, K.side, params.eps) - TIE_MARGIN:
            return False
    return True


def is_q_good_cube(I: Cube, Q: Cube, params: GoodnessParams) -> bool:
    """True when I is large relative to Q (no constraint) or keeps threshold
    clearance from the boundary of every triadic sibling of Q."""
    if I.side << params.rho > Q.side:
        return True
    for S in triadic_siblings(Q):
        if dist_to_boundary(I, S) < _embed_threshold(I.side, S.side, params.eps) - TIE_MARGIN:
            return False
    return True


def is_q_good_grid(grid: DyadicGrid, Q: Cube, params: GoodnessParams) -> bool:
    """Whether every triadic sibling of Q clears the boundary of every grid
    cube at least r levels coarser than Q (up to the grid's top level).

    Vacuously true, with a RuntimeWarning, when even the top level is less
    than r levels coarser than Q.
    """
    min_side = Q.side << params.r
    if min_side > side_units(grid.N):
        warnings.warn(
            "q-goodness is vacuous: 2**r l(Q) exceeds the top grid size",
            RuntimeWarning,
            stacklevel=2,
        )
        return True
    sibs = triadic_siblings(Q)
    for level in grid.levels():
        s = side_units(level)
        if s < min_side:
            break
        for S in sibs:
            thr = _embed_threshold(S.side, s, params.eps)
            pad = int(thr) + 2
            lo = tuple(l - pad for l in S.lower)
            hi = tuple(l + S.side + pad for l in S.lower)
            for I in grid.cubes_in_box(level, lo, hi):
                if dist_to_boundary(S, I) < thr - TIE_MARGIN:
                    return False
    return True


@dataclass(frozen=True)
class AxisInterval:
    """One axis of a box region, with explicit endpoint closure flags."""

    lo: Fraction
    hi: Fraction
    lo_closed: bool
    hi_closed: bool

    def contains(self, x: int) -> bool:
        if x < self.lo or (x == self.lo and not self.lo_closed):
            return False
        if x > self.hi or (x == self.hi and not self.hi_closed):
            return False
        return True

    def length(self) -> Fraction:
        return max(Fraction(0), self.hi - self.lo)


@dataclass(frozen=True)
class BoxRegion:
    """Product of axis intervals; membership exact on lattice points."""

    axes: tuple[AxisInterval, ...]

    def contains(self, p: Sequence[int]) -> bool:
        return all(ax.contains(x) for ax, x in zip(self.axes, p))

    def volume(self) -> float:
        v = Fraction(1)
        for ax in self.axes:
            v *= ax.length()
        return float(v / Fraction(UNIT) ** len(self.axes))


def _shave_width(J: Cube, lam: float) -> Fraction:
    if not (0.0 < lam < 0.5):
        raise ValueError("lambda must lie in (0, 1/2)")
    return Fraction(lam) * J.side


def shave(J: Cube, lam: float) -> BoxRegion:
    """The open cube of points of J farther than lam*l(J) from the boundary."""
    w = _shave_width(J, lam)
    return BoxRegion(
        tuple(
            AxisInterval(Fraction(l) + w, Fraction(l + J.side) - w, False, False)
            for l in J.lower
        )
    )


def corner_region(Jp: Cube, J: Cube, lam: float):
    """The set Jp minus the shaved cube of J, for a child Jp of J.

    Returns an object with exact `contains` (half-open in Jp, closed against
    the shaved cube) and Lebesgue `volume`.
    """
    if Jp not in cube_children(J):
        raise ValueError("Jp must be a dyadic child of J")
    inner = shave(J, lam)

    class _Corner:
        def contains(self, p: Sequence[int]) -> bool:
            return Jp.contains_point(p) and not inner.contains(p)

        def volume(self) -> float:
            w = _shave_width(J, lam)
            kept = Fraction(1)
            for l, jl in zip(Jp.lower, J.lower):
                lo = max(Fraction(l), Fraction(jl) + w)
                hi = min(Fraction(l + Jp.side), Fraction(jl + J.side) - w)
                kept *= max(Fraction(0), hi - lo)
            total = Fraction(Jp.side) ** Jp.dim
            return float((total - kept) / Fraction(UNIT) ** Jp.dim)

    return _Corner()


def faces(Jp: Cube, J: Cube, lam: float) -> list[BoxRegion]:
    """Partition of the corner region of child Jp into n width-lam*l(J) slabs.

    Slab k is parallel to the face of J that Jp touches on axis k; overlap at
    edges is resolved by assigning shared corners to the lexicographically
    first slab (earlier axes win).
    """
    if Jp not in cube_children(J):
        raise ValueError("Jp must be a dyadic child of J")
    w = _shave_width(J, lam)
    n = J.dim
    # Per axis: the collar of Jp within w of the J face that Jp shares (the
    # low face iff the child sits on the low half), and its complement in Jp.
    collar, rest = [], []
    for k in range(n):
        lo = Fraction(Jp.lower[k])
        hi = Fraction(Jp.lower[k] + Jp.side)
        if Jp.lower[k] == J.lower[k]:
            collar.append(AxisInterval(lo, lo + w, True, True))
            rest.append(AxisInterval(lo + w, hi, False, False))
        else:
            collar.append(AxisInterval(hi - w, hi, True, False))
            rest.append(AxisInterval(lo, hi - w, True, False))
    out = []
    for k in range(n):
        axes = []
        for i in range(n):
            if i < k:
                axes.append(rest[i])  # outside earlier collars
            elif i == k:
                axes.append(collar[i])
            else:
                axes.append(
                    AxisInterval(
                        Fraction(Jp.lower[i]), Fraction(Jp.lower[i] + Jp.side), True, False
                    )
                )
        out.append(BoxRegion(tuple(axes)))
    return out


def touching(Q: Cube, R: Cube) -> bool:
    """Closures intersect while interiors are disjoint (boundary contact only).

    For axis-parallel cubes this is equivalent to the closure intersection
    being nonempty and contained in the boundary of the larger cube.
    """
    point_contact = False
    for ql, rl in zip(Q.lower, R.lower):
        lo = max(ql, rl)
        hi = min(ql + Q.side, rl + R.side)
        if lo > hi:
            return False
        if lo == hi:
            point_contact = True
    return point_contact


def are_neighbours(K: Cube, Kp: Cube, grid: DyadicGrid) -> bool:
    """Both grid cubes, each inside the triple of the other minus the other."""
    if K not in grid or Kp not in grid:
        return False
    return (
        Kp.dilate(3).contains_cube(K)
        and not K.intersects(Kp)
        and K.dilate(3).contains_cube(Kp)
    )


def eta_close(K: Cube, L: Cube, eta: int, grid: DyadicGrid) -> bool:
    """Touching grid cubes with 2**-eta-comparable sides, one inside the
    other's triple."""
    if K not in grid or L not in grid:
        return False
    if not (K.side << eta >= L.side and L.side << eta >= K.side):
        return False
    if not touching(K, L):
        return False
    return L.dilate(3).contains_cube(K) or K.dilate(3).contains_cube(L)
