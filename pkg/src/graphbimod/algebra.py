"""Functions on a finite vertex set, used as the coefficient algebra.

Elements are complex-valued functions on the vertices with pointwise
operations and the sup norm.  The vertex order is fixed once (lexicographic
by label) and shared by every array in the package.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping

import numpy as np


class VertexSet:
    """Ordered, immutable set of vertex labels with index lookup."""

    __slots__ = ("labels", "_index")

    def __init__(self, labels: Iterable[str]):
        ordered = tuple(sorted(str(v) for v in labels))
        if len(set(ordered)) != len(ordered):
            raise ValueError("duplicate vertex labels")
        if not ordered:
            raise ValueError("vertex set is empty")
        self.labels = ordered
        self._index = {v: i for i, v in enumerate(ordered)}

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"unknown vertex {label!r}") from None

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def __contains__(self, label: object) -> bool:
        return label in self._index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, VertexSet) and self.labels == other.labels

    def __hash__(self) -> int:
        return hash(self.labels)

    def __repr__(self) -> str:
        return f"VertexSet({list(self.labels)!r})"


class AlgebraElement:
    """Complex function on a vertex set, pointwise algebra, sup norm."""

    __slots__ = ("vertices", "values")

    def __init__(self, vertices: VertexSet, values):
        arr = np.asarray(values, dtype=complex).reshape(-1).copy()
        if arr.shape != (len(vertices),):
            raise ValueError(
                f"expected {len(vertices)} values, got shape {arr.shape}"
            )
        arr.flags.writeable = False
        self.vertices = vertices
        self.values = arr

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, vertices: VertexSet) -> "AlgebraElement":
        return cls(vertices, np.zeros(len(vertices)))

    @classmethod
    def one(cls, vertices: VertexSet) -> "AlgebraElement":
        return cls(vertices, np.ones(len(vertices)))

    @classmethod
    def point_mass(cls, vertices: VertexSet, label: str) -> "AlgebraElement":
        vals = np.zeros(len(vertices))
        vals[vertices.index(label)] = 1.0
        return cls(vertices, vals)

    @classmethod
    def from_dict(cls, vertices: VertexSet, data: Mapping[str, complex]) -> "AlgebraElement":
        vals = np.zeros(len(vertices), dtype=complex)
        for label, value in data.items():
            vals[vertices.index(label)] = value
        return cls(vertices, vals)

    # -- access ---------------------------------------------------------

    def __getitem__(self, label: str) -> complex:
        return complex(self.values[self.vertices.index(label)])

    def as_dict(self) -> dict[str, complex]:
        return {v: complex(x) for v, x in zip(self.vertices, self.values)}

    # -- pointwise algebra ----------------------------------------------

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, AlgebraElement):
            if other.vertices != self.vertices:
                raise ValueError("mismatched vertex sets")
            return other.values
        return np.full(len(self.vertices), complex(other))

    def __add__(self, other) -> "AlgebraElement":
        return AlgebraElement(self.vertices, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other) -> "AlgebraElement":
        return AlgebraElement(self.vertices, self.values - self._coerce(other))

    def __rsub__(self, other) -> "AlgebraElement":
        return AlgebraElement(self.vertices, self._coerce(other) - self.values)

    def __mul__(self, other) -> "AlgebraElement":
        return AlgebraElement(self.vertices, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "AlgebraElement":
        return AlgebraElement(self.vertices, self.values / self._coerce(other))

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.vertices, -self.values)

    def adjoint(self) -> "AlgebraElement":
        return AlgebraElement(self.vertices, np.conj(self.values))

    def exp(self) -> "AlgebraElement":
        return AlgebraElement(self.vertices, np.exp(self.values))

    def log(self) -> "AlgebraElement":
        """Pointwise log, defined for strictly positive real elements."""
        vals = self.values
        if np.any(np.abs(vals.imag) > 0) or np.any(vals.real <= 0):
            raise ValueError("log requires a strictly positive element")
        return AlgebraElement(self.vertices, np.log(vals.real))

    def power(self, n: int) -> "AlgebraElement":
        return AlgebraElement(self.vertices, self.values**n)

    def inv(self) -> "AlgebraElement":
        if np.any(self.values == 0):
            raise ZeroDivisionError("element is not invertible")
        return AlgebraElement(self.vertices, 1.0 / self.values)

    # -- order and size -------------------------------------------------

    def norm(self) -> float:
        """Sup norm over vertices."""
        return float(np.max(np.abs(self.values)))

    def is_real(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.values.imag) <= tol))

    def is_positive(self, tol: float = 0.0) -> bool:
        """Positivity in the pointwise sense: real with values >= -tol."""
        return self.is_real(tol) and bool(np.all(self.values.real >= -tol))

    def isclose(self, other, tol: float = 1e-10) -> bool:
        return (self - other).norm() <= tol

    def __repr__(self) -> str:
        pairs = ", ".join(f"{v}: {x:.6g}" for v, x in self.as_dict().items())
        return f"AlgebraElement({{{pairs}}})"
