"""Exact windings and winding phases along corner loops.

Windings are counted in quarter turns, ``q = n_right - n_left``, so the
winding angle is ``q * pi/2``.  Unit complex numbers of the form
``exp(i k pi/4)`` are carried as the integer ``k`` mod 8.

The phase of an arc from corner ``a`` to corner ``b`` is::

    phi = sqrt(o(a) / o(b)) * exp(-i q pi/4)

with the square root taken as ``sqrt(o(a)) / sqrt(o(b))`` where
``sqrt(exp(i k pi/4)) = exp(i k pi/8)`` for the representative
``k in {1, 3, 5, 7}``.  That choice is multiplicative, so phases compose
exactly along a loop, and it reduces ``phi`` to ``(-1) ** ((k_a - k_b - 2 q) / 8)``.
"""

from __future__ import annotations

from dataclasses import dataclass
import cmath
import math

from .configuration import LoopSet


class WindingError(ValueError):
    """Corners that do not lie on a common loop, or an inconsistent winding."""


@dataclass(frozen=True)
class PhaseEighth:
    """The unit complex number ``exp(i * k * pi/4)``."""

    k: int

    def __post_init__(self):
        object.__setattr__(self, "k", self.k % 8)

    def __mul__(self, other: "PhaseEighth") -> "PhaseEighth":
        return PhaseEighth(self.k + other.k)

    def __truediv__(self, other: "PhaseEighth") -> "PhaseEighth":
        return PhaseEighth(self.k - other.k)

    def conjugate(self) -> "PhaseEighth":
        return PhaseEighth(-self.k)

    def __complex__(self) -> complex:
        return unit(self.k, 8)

    @property
    def sign(self) -> int:
        """+1 or -1 when the phase is real."""
        if self.k == 0:
            return 1
        if self.k == 4:
            return -1
        raise WindingError(f"phase exp(i {self.k} pi/4) is not real")


_UNIT_CACHE: dict[tuple[int, int], complex] = {}


def unit(k: int, n: int) -> complex:
    """``exp(2 pi i k / n)`` with exact zeros on the axes."""
    key = (k % n, n)
    value = _UNIT_CACHE.get(key)
    if value is None:
        k = key[0]
        if (4 * k) % n == 0:
            value = (1, 1j, -1, -1j)[4 * k // n]
        else:
            angle = 2 * math.pi * k / n
            value = complex(math.cos(angle), math.sin(angle))
        _UNIT_CACHE[key] = value
    return value


def orientation_eighth(c: int) -> int:
    return 2 * (c & 3) + 1


def sqrt_orientation(c: int) -> complex:
    """The fixed square root ``exp(i k pi/8)`` of ``o(c) = exp(i k pi/4)``."""
    return unit(orientation_eighth(c), 16)


def path_winding(loops: LoopSet, z1: int, z2: int) -> int:
    """Quarter turns (right minus left) walking the loop forward from z1 to z2."""
    if z1 == z2:
        raise WindingError("corners must be distinct")
    k = loops.loop_of[z1]
    if loops.loop_of[z2] != k:
        raise WindingError(f"corners {z1} and {z2} are not on the same loop")
    prefix = loops.turn_prefix[k]
    i1, i2 = loops.position[z1], loops.position[z2]
    if i2 > i1:
        return prefix[i2] - prefix[i1]
    return prefix[-1] - prefix[i1] + prefix[i2]


def phase_sign(a1: int, a2: int, q: int) -> int:
    m = a1 - a2 - 2 * q
    if m % 8:
        raise WindingError(f"winding {q} inconsistent with orientations {a1}, {a2}")
    return -1 if (m // 8) % 2 else 1


def winding_phase(loops: LoopSet, z1: int, z2: int) -> int:
    """The winding phase (a sign) of the forward arc from z1 to z2."""
    q = path_winding(loops, z1, z2)
    return phase_sign(orientation_eighth(z1), orientation_eighth(z2), q)


def loop_phase_table(loops: LoopSet, k: int) -> list[int]:
    """Phases of the arcs from the first corner of loop ``k`` to every corner on it.

    Entry 0 is +1 by convention (it is not an arc).  The phase of the arc
    between positions ``i < j`` is ``table[j] * table[i]`` and the arc from
    ``j`` back round to ``i`` has the opposite sign.
    """
    loop = loops.loops[k]
    prefix = loops.turn_prefix[k]
    a0 = orientation_eighth(loop[0])
    out = [1]
    for i in range(1, len(loop)):
        out.append(phase_sign(a0, orientation_eighth(loop[i]), prefix[i]))
    return out


def phase_complex(z1: int, z2: int, q: int) -> complex:
    """Direct complex evaluation of ``sqrt(o1/o2) exp(-i q pi/4)`` (cross-check)."""
    root = sqrt_orientation(z1) / sqrt_orientation(z2)
    return root * cmath.exp(-1j * q * math.pi / 4)
