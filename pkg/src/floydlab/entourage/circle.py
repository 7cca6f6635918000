"""Sampled boundary circle, Möbius maps and hyperbolic disks.

Upper half-plane maps are conjugated to the unit disk by the Cayley
transform ``w = (z - i)/(z + i)``, which sends ``inf`` to angle 0 and ``0``
to angle pi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["Circle", "MoebiusMap", "HyperbolicDisk", "cayley", "inverse_cayley",
           "disk_distance", "geodesic_distance_closed_form", "geodesic_distance_sampled",
           "DEFAULT_GENERATORS"]

_C = np.array([[1, -1j], [1, 1j]], dtype=complex)
_CINV = np.array([[1j, 1j], [-1, 1]], dtype=complex) / 2j


class Circle:
    """``N`` equally spaced points at angles ``2 pi j / N``."""

    def __init__(self, N: int = 512):
        N = int(N)
        if N < 8:
            raise ValueError("circle needs at least 8 points")
        self.N = N
        self.angles = 2 * np.pi * np.arange(N) / N
        self.points = np.exp(1j * self.angles)

    def __eq__(self, other):
        return isinstance(other, Circle) and other.N == self.N

    def __hash__(self):
        return hash(("Circle", self.N))

    def __repr__(self):
        return f"Circle({self.N})"

    def nearest(self, angle: float) -> int:
        return int(round((angle % (2 * np.pi)) / (2 * np.pi) * self.N)) % self.N

    def angular_distance(self, i, j):
        """Short angular distance between grid indices (vectorized)."""
        d = np.abs(np.asarray(i) - np.asarray(j)) % self.N
        return 2 * np.pi * np.minimum(d, self.N - d) / self.N


def cayley(z):
    """Upper half-plane to unit disk; ``inf`` maps to 1."""
    if z is None or (np.isscalar(z) and np.isinf(z)):
        return 1.0 + 0j
    z = np.asarray(z, dtype=complex)
    return (z - 1j) / (z + 1j)


def inverse_cayley(w):
    w = np.asarray(w, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        return 1j * (1 + w) / (1 - w)


class MoebiusMap:
    """``z -> (a z + b)/(c z + d)`` with real coefficients and ``ad - bc = 1``."""

    def __init__(self, a, b, c, d, name: str | None = None):
        det = a * d - b * c
        if det <= 0:
            raise ValueError("Möbius map needs positive determinant")
        s = math.sqrt(det)
        self.coeffs = (a / s, b / s, c / s, d / s)
        self.name = name
        self._disk = _C @ np.array([[self.coeffs[0], self.coeffs[1]],
                                    [self.coeffs[2], self.coeffs[3]]], dtype=complex) @ _CINV

    @classmethod
    def _from_disk(cls, m: np.ndarray, coeffs, name=None):
        obj = cls.__new__(cls)
        obj.coeffs = coeffs
        obj.name = name
        obj._disk = m
        return obj

    def __repr__(self):
        a, b, c, d = self.coeffs
        return f"MoebiusMap({a:g}, {b:g}, {c:g}, {d:g})"

    @property
    def determinant(self) -> float:
        a, b, c, d = self.coeffs
        return a * d - b * c

    @property
    def trace(self) -> float:
        return self.coeffs[0] + self.coeffs[3]

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        a, b, c, d = self.coeffs
        e, f, g, h = other.coeffs
        coeffs = (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
        return MoebiusMap._from_disk(self._disk @ other._disk, coeffs)

    def inverse(self) -> "MoebiusMap":
        a, b, c, d = self.coeffs
        name = None if self.name is None else self.name.swapcase()
        return MoebiusMap(d, -b, -c, a, name)

    @property
    def disk_matrix(self) -> np.ndarray:
        return self._disk

    def apply_upper(self, z):
        a, b, c, d = self.coeffs
        z = np.asarray(z, dtype=complex)
        return (a * z + b) / (c * z + d)

    def apply_disk(self, w):
        m = self._disk
        w = np.asarray(w, dtype=complex)
        out = (m[0, 0] * w + m[0, 1]) / (m[1, 0] * w + m[1, 1])
        return out

    def apply_angles(self, theta):
        out = self.apply_disk(np.exp(1j * np.asarray(theta)))
        return np.angle(out) % (2 * np.pi)

    def fixed_points_disk(self) -> list[complex]:
        """Fixed points on the closed disk (boundary points for parabolics)."""
        m = self._disk
        # c w^2 + (d - a) w - b = 0
        A, B, Cc = m[1, 0], m[1, 1] - m[0, 0], -m[0, 1]
        if abs(A) < 1e-14:
            return [complex(-Cc / B)] if abs(B) > 1e-14 else []
        disc = np.sqrt(B * B - 4 * A * Cc + 0j)
        roots = [(-B + disc) / (2 * A), (-B - disc) / (2 * A)]
        out = []
        for r in roots:
            if all(abs(r - o) > 1e-9 for o in out):
                out.append(complex(r))
        return out

    def is_parabolic(self, tol: float = 1e-9) -> bool:
        return abs(abs(self.trace) - 2) < tol


def disk_distance(w1, w2):
    """Hyperbolic distance in the Poincaré disk."""
    w1 = np.asarray(w1, dtype=complex)
    w2 = np.asarray(w2, dtype=complex)
    t = np.abs(w1 - w2) / np.abs(1 - np.conj(w1) * w2)
    return 2 * np.arctanh(np.minimum(t, 1 - 1e-16))


def moebius_to_origin(c: complex, w):
    """The disk isometry sending ``c`` to 0, applied to ``w``."""
    w = np.asarray(w, dtype=complex)
    return (w - c) / (1 - np.conj(c) * w)


def geodesic_distance_closed_form(center: complex, theta1, theta2):
    """Distance from ``center`` to the geodesic with ideal endpoints at the given angles."""
    u1 = moebius_to_origin(center, np.exp(1j * np.asarray(theta1)))
    u2 = moebius_to_origin(center, np.exp(1j * np.asarray(theta2)))
    gap = np.abs(np.angle(u1 * np.conj(u2)))
    s = np.sin(gap / 2)
    with np.errstate(divide="ignore"):
        return np.arccosh(np.maximum(1.0 / s, 1.0))


def geodesic_distance_sampled(center: complex, theta1: float, theta2: float,
                              samples: int = 64) -> float:
    """Sampling oracle: minimum distance to 64 points along the geodesic.

    Works in the upper half-plane after rotating so neither endpoint is at
    infinity; the geodesic is a Euclidean semicircle there.
    """
    rot = np.exp(-1j * (0.5 * (theta1 + theta2) + np.pi))
    e1, e2 = np.exp(1j * theta1) * rot, np.exp(1j * theta2) * rot
    c = center * rot
    x1, x2 = float(np.real(inverse_cayley(e1))), float(np.real(inverse_cayley(e2)))
    z0 = complex(inverse_cayley(c))
    mid, rad = 0.5 * (x1 + x2), 0.5 * abs(x1 - x2)
    # parametrize by hyperbolic arclength-ish angle, densest near the top
    t = np.linspace(0, np.pi, samples + 2)[1:-1]
    pts = mid + rad * np.cos(t) + 1j * rad * np.sin(t)
    d = np.arccosh(1 + np.abs(pts - z0) ** 2 / (2 * pts.imag * z0.imag))
    # refine around the best sample
    k = int(np.argmin(d))
    lo, hi = t[max(k - 1, 0)], t[min(k + 1, len(t) - 1)]
    for _ in range(60):
        m1, m2 = lo + (hi - lo) / 3, hi - (hi - lo) / 3
        p1 = mid + rad * np.cos(m1) + 1j * rad * np.sin(m1)
        p2 = mid + rad * np.cos(m2) + 1j * rad * np.sin(m2)
        d1 = np.arccosh(1 + abs(p1 - z0) ** 2 / (2 * p1.imag * z0.imag))
        d2 = np.arccosh(1 + abs(p2 - z0) ** 2 / (2 * p2.imag * z0.imag))
        if d1 < d2:
            hi = m2
        else:
            lo = m1
    p = mid + rad * np.cos(lo) + 1j * rad * np.sin(lo)
    return float(min(d.min(), np.arccosh(1 + abs(p - z0) ** 2 / (2 * p.imag * z0.imag))))


@dataclass(frozen=True)
class HyperbolicDisk:
    center: complex
    radius: float

    def image(self, g: MoebiusMap) -> "HyperbolicDisk":
        return HyperbolicDisk(complex(g.apply_disk(self.center)), self.radius)

    def distance_to(self, other: "HyperbolicDisk") -> float:
        return float(disk_distance(self.center, other.center))

    def intersects(self, other: "HyperbolicDisk") -> bool:
        return self.distance_to(other) <= self.radius + other.radius


# z -> z + 2 and z -> z / (2z + 1): free generators of the level-2 congruence group
DEFAULT_GENERATORS = (MoebiusMap(1, 2, 0, 1, "a"), MoebiusMap(1, 0, 2, 1, "b"))
