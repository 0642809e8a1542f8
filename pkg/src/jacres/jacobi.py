"""Eventually periodic Jacobi operators and the block form of ``Delta(J)``."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .periodic import BandSet, PeriodicBlock, bands_of, discriminant, random_block


@dataclass(frozen=True)
class EventuallyPeriodicOperator:
    """Jacobi operator equal to a periodic one from row ``s + 1`` on.

    Parameters
    ----------
    head_a, head_b : sequence of float
        ``a_1..a_s`` and ``b_1..b_s``.
    tail : PeriodicBlock
        Coefficients ``a_{s+1}..a_{s+p}``, ``b_{s+1}..b_{s+p}``, repeated.

    Notes
    -----
    The periodic background ``a_n^o, b_n^o`` is the tail continued backwards,
    so that ``a_n^o = a_n`` for ``n > s``.
    """

    head_a: tuple[float, ...]
    head_b: tuple[float, ...]
    tail: PeriodicBlock = field(default_factory=PeriodicBlock.free)

    def __post_init__(self):
        ha = tuple(float(x) for x in self.head_a)
        hb = tuple(float(x) for x in self.head_b)
        if len(ha) != len(hb):
            raise ValueError("head_a and head_b must have equal length")
        if ha and min(ha) <= 0:
            raise ValueError("off-diagonal coefficients must be positive")
        if not all(np.isfinite(ha + hb)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "head_a", ha)
        object.__setattr__(self, "head_b", hb)

    @classmethod
    def periodic(cls, block: PeriodicBlock) -> "EventuallyPeriodicOperator":
        return cls((), (), block)

    @classmethod
    def free(cls) -> "EventuallyPeriodicOperator":
        return cls((), (), PeriodicBlock.free())

    @property
    def s(self) -> int:
        return len(self.head_a)

    @property
    def p(self) -> int:
        return self.tail.p

    @cached_property
    def bands(self) -> BandSet:
        return bands_of(self.tail)

    @cached_property
    def discriminant(self) -> np.ndarray:
        return discriminant(self.tail)

    def background_a(self, n: int) -> float:
        """``a_n^o`` for any integer ``n`` (1-based)."""
        return self.tail.a[(n - self.s - 1) % self.p]

    def background_b(self, n: int) -> float:
        return self.tail.b[(n - self.s - 1) % self.p]

    def a(self, n: int) -> float:
        return self.head_a[n - 1] if 1 <= n <= self.s else self.background_a(n)

    def b(self, n: int) -> float:
        return self.head_b[n - 1] if 1 <= n <= self.s else self.background_b(n)

    @cached_property
    def class_index(self) -> int:
        """Position of the last aperiodic entry in ``b_1, a_1, b_2, a_2, ...``."""
        for n in range(self.s, 0, -1):
            if self.a(n) != self.background_a(n):
                return 2 * n
            if self.b(n) != self.background_b(n):
                return 2 * n - 1
        return 0

    def coefficients(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """First ``n`` entries of ``a`` and ``b``."""
        return (np.array([self.a(j) for j in range(1, n + 1)]),
                np.array([self.b(j) for j in range(1, n + 1)]))

    def matrix(self, n: int) -> np.ndarray:
        """Leading ``n x n`` section."""
        a, b = self.coefficients(n)
        return np.diag(b) + np.diag(a[:-1], 1) + np.diag(a[:-1], -1)

    def to_json(self) -> dict:
        return {"head_a": list(self.head_a), "head_b": list(self.head_b),
                "tail": self.tail.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "EventuallyPeriodicOperator":
        tail = PeriodicBlock.from_json(obj["tail"])
        hb = list(obj.get("head_b", []))
        ha = obj.get("head_a")
        if ha is None:
            # unspecified off-diagonals default to the periodic background
            s = len(hb)
            ha = [tail.a[(n - s - 1) % tail.p] for n in range(1, s + 1)]
        return cls(tuple(ha), tuple(hb), tail)


def _two_sided_section(op: EventuallyPeriodicOperator, lo: int, hi: int) -> np.ndarray:
    """Rows/columns ``lo..hi`` of ``J`` with the background continued to ``n <= 0``."""
    idx = range(lo, hi + 1)
    b = np.array([op.b(n) if n >= 1 else op.background_b(n) for n in idx])
    a = np.array([op.a(n) if n >= 1 else op.background_a(n) for n in idx])
    return np.diag(b) + np.diag(a[:-1], 1) + np.diag(a[:-1], -1)


def magic_check(op: EventuallyPeriodicOperator, n_max: int) -> np.ndarray:
    """Deviation of ``Delta(J)`` from ``S**p + S**-p`` in ``p x p`` block form.

    ``Delta(J)`` is assembled on the two-sided extension of ``J`` whose
    left half carries the periodic background, so that an operator in the
    isospectral torus gives exactly the shift structure in every block.

    Returns
    -------
    ndarray
        ``d_n = ||A_n - I||_2 + ||B_n||_2`` for ``n = 1..n_max``, where ``B_n``
        is the ``n``-th diagonal block and ``A_n`` the block above it.
    """
    p = op.p
    delta = op.discriminant
    lo = 1 - 2 * p
    hi = (n_max + 2) * p
    J = _two_sided_section(op, lo, hi)
    D = np.zeros_like(J)
    eye = np.eye(J.shape[0])
    for c in delta[::-1]:
        D = D @ J + c * eye
    out = np.empty(n_max)
    for n in range(1, n_max + 1):
        r0 = (n - 1) * p + 1 - lo
        Bn = D[r0:r0 + p, r0:r0 + p]
        An = D[r0:r0 + p, r0 + p:r0 + 2 * p]
        out[n - 1] = np.linalg.norm(An - np.eye(p), 2) + np.linalg.norm(Bn, 2)
    return out


def random_operator(rng: np.random.Generator, p: int, k: int,
                    min_gap: float = 0.05) -> EventuallyPeriodicOperator:
    """Random eventually periodic operator of period ``p`` and class index exactly ``k``.

    Head entries are drawn like the tail (``a`` in [0.5, 1.5], ``b`` in
    [-1, 1]); the last aperiodic entry is pushed at least 0.1 away from the
    background value.
    """
    tail, _ = random_block(rng, p, min_gap)
    s = (k + 1) // 2
    n = np.arange(1, s + 1)
    bg_a = np.array([tail.a[(j - s - 1) % p] for j in n])
    bg_b = np.array([tail.b[(j - s - 1) % p] for j in n])
    head_a = rng.uniform(0.5, 1.5, s)
    head_b = rng.uniform(-1.0, 1.0, s)
    if s:
        kick = rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 0.5)
        if k % 2 == 0:
            head_a[-1] = bg_a[-1] + kick
        else:
            head_a[-1] = bg_a[-1]
            head_b[-1] = bg_b[-1] + kick
    return EventuallyPeriodicOperator(tuple(head_a), tuple(head_b), tail)
