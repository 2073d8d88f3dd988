"""Cone handles and dense linear maps between cone ambient spaces.

These two types are shared by every other module, so they live here with no
internal dependencies.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_DUAL_KIND = {
    "lorentz": "lorentz",
    "psd": "psd",
    "ell1": "ellinf",
    "ellinf": "ell1",
    "simplex": "simplex",
}


@dataclass(frozen=True)
class ConeHandle:
    """A named proper cone.

    ``kind`` is one of ``lorentz`` (L_n in R^{n+1}), ``psd`` (d x d complex
    Hermitian PSD matrices in d^2 real coordinates), ``ell1`` / ``ellinf``
    (the cones {(t, x) : t >= ||x||} in R^{k+1}) and ``simplex`` (the
    nonnegative orthant of R^n).
    """

    kind: str
    param: int

    def __post_init__(self):
        if self.kind not in _DUAL_KIND:
            raise ValueError(f"unknown cone kind {self.kind!r}")
        if int(self.param) < (0 if self.kind != "psd" else 1):
            raise ValueError(f"invalid parameter {self.param} for {self.kind}")

    @property
    def ambient_dim(self) -> int:
        if self.kind == "psd":
            return self.param ** 2
        if self.kind == "simplex":
            return self.param
        return self.param + 1

    def dual(self) -> "ConeHandle":
        return ConeHandle(_DUAL_KIND[self.kind], self.param)

    def to_json(self) -> dict:
        return {"kind": self.kind, "param": int(self.param)}

    @classmethod
    def from_json(cls, obj: dict) -> "ConeHandle":
        return cls(obj["kind"], int(obj["param"]))


def lorentz(n: int) -> ConeHandle:
    return ConeHandle("lorentz", n)


def psd(d: int) -> ConeHandle:
    return ConeHandle("psd", d)


def ell1(k: int) -> ConeHandle:
    return ConeHandle("ell1", k)


def ellinf(k: int) -> ConeHandle:
    return ConeHandle("ellinf", k)


def simplex(n: int) -> ConeHandle:
    return ConeHandle("simplex", n)


@dataclass(frozen=True, eq=False)
class LinearMapDense:
    """Real matrix ``matrix`` acting from ``domain`` to ``codomain`` coordinates."""

    matrix: np.ndarray
    domain: ConeHandle
    codomain: ConeHandle

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if m.shape != (self.codomain.ambient_dim, self.domain.ambient_dim):
            raise ValueError(
                f"matrix shape {m.shape} does not match "
                f"{self.codomain.ambient_dim}x{self.domain.ambient_dim}"
            )

    def __call__(self, x):
        return self.matrix @ np.asarray(x, dtype=float)

    def adjoint(self) -> "LinearMapDense":
        return LinearMapDense(self.matrix.T, self.codomain, self.domain)

    def compose(self, other: "LinearMapDense") -> "LinearMapDense":
        """Return ``self o other``."""
        if other.codomain != self.domain:
            raise ValueError("cannot compose: codomain/domain mismatch")
        return LinearMapDense(self.matrix @ other.matrix, other.domain, self.codomain)

    def __matmul__(self, other):
        if isinstance(other, LinearMapDense):
            return self.compose(other)
        return self(other)

    def to_json(self) -> dict:
        return {
            "matrix": self.matrix.tolist(),
            "domain": self.domain.to_json(),
            "codomain": self.codomain.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "LinearMapDense":
        return cls(
            np.array(obj["matrix"], dtype=float),
            ConeHandle.from_json(obj["domain"]),
            ConeHandle.from_json(obj["codomain"]),
        )
