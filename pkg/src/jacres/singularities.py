"""Eigenvalue/resonance configurations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _sort_key(z: complex) -> tuple[float, float]:
    return (z.real, z.imag)


@dataclass(frozen=True)
class SingularityConfiguration:
    """Eigenvalues (real, simple) and resonances (complex, with multiplicity).

    Resonances are stored merged as ``(position, multiplicity)`` pairs sorted by
    real then imaginary part; eigenvalues are sorted ascending.
    """

    eigenvalues: tuple[float, ...] = ()
    resonances: tuple[tuple[complex, int], ...] = ()

    def __post_init__(self):
        eig = tuple(sorted(float(e) for e in self.eigenvalues))
        merged: dict[complex, int] = {}
        for item in self.resonances:
            if isinstance(item, tuple):
                z, m = complex(item[0]), int(item[1])
            else:
                z, m = complex(item), 1
            if m < 1:
                raise ValueError("multiplicities must be positive")
            merged[z] = merged.get(z, 0) + m
        res = tuple(sorted(merged.items(), key=lambda t: _sort_key(t[0])))
        object.__setattr__(self, "eigenvalues", eig)
        object.__setattr__(self, "resonances", res)

    @classmethod
    def from_lists(cls, eigenvalues=(), resonances=()) -> "SingularityConfiguration":
        """Build from plain lists; repeated resonance entries add multiplicity."""
        return cls(tuple(eigenvalues), tuple((complex(r), 1) for r in resonances))

    @property
    def N(self) -> int:
        return len(self.eigenvalues)

    @property
    def K(self) -> int:
        return sum(m for _, m in self.resonances)

    @property
    def total(self) -> int:
        return self.N + self.K

    def resonance_list(self) -> list[complex]:
        """Resonances repeated according to multiplicity."""
        return [z for z, m in self.resonances for _ in range(m)]

    def zeros(self) -> np.ndarray:
        """All singularities with multiplicity: the zeros of ``a(z)``."""
        return np.array(list(map(complex, self.eigenvalues)) + self.resonance_list(),
                        dtype=complex)

    def distinct_points(self) -> list[complex]:
        pts = [complex(e) for e in self.eigenvalues] + [z for z, _ in self.resonances]
        return sorted(set(pts), key=_sort_key)

    def min_separation(self) -> float:
        """Smallest distance between distinct singularities (``inf`` if < 2)."""
        pts = self.distinct_points()
        best = np.inf
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                best = min(best, abs(pts[i] - pts[j]))
        return float(best)

    def to_json(self) -> dict:
        return {
            "eigenvalues": list(self.eigenvalues),
            "resonances": [{"re": z.real, "im": z.imag, "mult": m}
                           for z, m in self.resonances],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SingularityConfiguration":
        res = []
        for r in obj.get("resonances", []):
            if isinstance(r, dict):
                res.append((complex(r["re"], r.get("im", 0.0)), int(r.get("mult", 1))))
            else:
                res.append((complex(r), 1))
        return cls(tuple(obj.get("eigenvalues", [])), tuple(res))

    def approx_equal(self, other: "SingularityConfiguration", tol: float) -> bool:
        """Same counts and positions within ``tol`` (multiplicities must match)."""
        if self.N != other.N or len(self.resonances) != len(other.resonances):
            return False
        if any(abs(x - y) > tol for x, y in zip(self.eigenvalues, other.eigenvalues)):
            return False
        for (z, m), (w, n) in zip(self.resonances, other.resonances):
            if m != n or abs(z - w) > tol:
                return False
        return True
