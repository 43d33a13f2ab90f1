"""Bigradings and generators."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

KIND_RANK = {"field": 0, "ghost": 1, "antifield": 2, "transport": 3, "parameter": 4}


@dataclass(frozen=True)
class Grading:
    deg: int
    gh: int

    def __post_init__(self):
        if self.deg < 0:
            raise ValueError(f"form degree must be >= 0, got {self.deg}")

    @property
    def total(self) -> int:
        return self.deg + self.gh

    def __add__(self, other: "Grading") -> "Grading":
        return Grading(self.deg + other.deg, self.gh + other.gh)


def koszul(deg1: int, gh1: int, deg2: int, gh2: int) -> int:
    """Exponent (mod 2) of the sign picked up when swapping two homogeneous factors."""
    return (deg1 * deg2 + gh1 * gh2) & 1


@dataclass(frozen=True)
class Generator:
    """A homogeneous generator of the bigraded algebra.

    ``level`` counts applications of the background covariant derivative; each
    one raises the form degree by one.  ``strand`` is only used by the loop
    calculus (imbedding/companion labels).
    """

    name: str
    base_deg: int
    gh: int
    kind: str = "field"
    algebra_valued: bool = True
    level: int = 0
    strand: str | None = None
    key: tuple = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.kind not in KIND_RANK:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.base_deg < 0 or self.level < 0:
            raise ValueError("degrees must be non-negative")
        if self.kind == "transport" and (self.base_deg, self.gh) != (0, 0):
            raise ValueError("transport segments have grading (0, 0)")
        object.__setattr__(
            self, "key", (KIND_RANK[self.kind], self.name, self.level, self.strand or ""))

    @property
    def deg(self) -> int:
        return self.base_deg + self.level

    @property
    def grading(self) -> Grading:
        return Grading(self.deg, self.gh)

    @property
    def total(self) -> int:
        return self.deg + self.gh

    @property
    def base(self) -> "Generator":
        if self.level == 0 and self.strand is None:
            return self
        return replace(self, level=0, strand=None)

    def raised(self) -> "Generator":
        return replace(self, level=self.level + 1)

    def on_strand(self, strand: str | None) -> "Generator":
        return replace(self, strand=strand)

    def label(self) -> str:
        s = "d" * self.level + self.name
        if self.strand:
            s += "@" + self.strand
        return s

    def __lt__(self, other: "Generator") -> bool:
        return self.key < other.key

    def __repr__(self) -> str:
        return f"{self.label()}({self.deg},{self.gh})"


def antifield_grading(n: int, deg: int, gh: int) -> Grading:
    """Grading of the antifield partner of a (deg, gh) field in dimension n."""
    return Grading(n - deg, -gh - 1)
