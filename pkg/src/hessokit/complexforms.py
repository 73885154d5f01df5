"""Small exterior algebra of complex differential forms with grid coefficients.

A form of total degree d on C^n (n <= 3 at desk scale) is stored as a mapping
from basis pairs (I, J) -- strictly increasing tuples of 0-based indices with
|I| + |J| = d -- to coefficient arrays on the real 2n-dimensional grid, the
form being  sum c_{I,J} dz_I ^ dzbar_J.  Mixed (p, q) types of equal total
degree may coexist, which is what d and d^c produce.

Conventions: d = del + delbar and d^c = (i/2)(delbar - del), so that
dd^c = i del delbar and dd^c |z|^2 equals beta = i sum dz_k ^ dzbar_k.
Derivatives of coefficients are second-order finite differences (central in
the interior of the bounding box, one-sided at its faces).

Top-degree forms convert to densities against beta^n, i.e. against the
Lebesgue volume of the grid; the normalization constant i^n n! is computed by
the algebra itself rather than hardcoded.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

__all__ = ["FormField", "zero_form", "scalar_form", "hermitian_form_field", "beta_form"]


def _merge_signed(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, tuple[int, ...]] | None:
    """Merge two strictly increasing index tuples; None on collision."""
    if set(a) & set(b):
        return None
    sign = 1
    arr = list(a)
    for x in b:
        pos = bisect_left(arr, x)
        if (len(arr) - pos) % 2:
            sign = -sign
        arr.insert(pos, x)
    return sign, tuple(arr)


@dataclass
class FormField:
    """A complex differential form with per-node coefficients."""

    n: int
    degree: int
    spacing: tuple[float, ...]
    coeffs: dict[tuple[tuple[int, ...], tuple[int, ...]], np.ndarray] = field(
        default_factory=dict
    )

    def copy(self) -> "FormField":
        return FormField(self.n, self.degree, self.spacing, {k: v.copy() for k, v in self.coeffs.items()})

    def _add_term(self, key, value) -> None:
        if key in self.coeffs:
            self.coeffs[key] = self.coeffs[key] + value
        else:
            self.coeffs[key] = np.asarray(value, dtype=complex) + 0j

    def __add__(self, other: "FormField") -> "FormField":
        if (self.n, self.degree) != (other.n, other.degree):
            raise ValueError("degree/dimension mismatch in form addition")
        out = self.copy()
        for k, v in other.coeffs.items():
            out._add_term(k, v)
        return out

    def __mul__(self, scalar) -> "FormField":
        out = FormField(self.n, self.degree, self.spacing)
        for k, v in self.coeffs.items():
            out.coeffs[k] = v * scalar
        return out

    __rmul__ = __mul__

    def __sub__(self, other: "FormField") -> "FormField":
        return self + (-1.0) * other

    def wedge(self, other: "FormField") -> "FormField":
        if self.n != other.n:
            raise ValueError("dimension mismatch in wedge product")
        out = FormField(self.n, self.degree + other.degree, self.spacing)
        if out.degree > 2 * self.n:
            return out
        for (i1, j1), c1 in self.coeffs.items():
            for (i2, j2), c2 in other.coeffs.items():
                mi = _merge_signed(i1, i2)
                if mi is None:
                    continue
                mj = _merge_signed(j1, j2)
                if mj is None:
                    continue
                # dzbar_{j1} crosses dz_{i2}
                sign = mi[0] * mj[0] * (-1 if (len(j1) * len(i2)) % 2 else 1)
                out._add_term((mi[1], mj[1]), sign * c1 * c2)
        return out

    def wedge_power(self, k: int) -> "FormField":
        if k < 0:
            raise ValueError("negative wedge power")
        out = scalar_form(self.n, 1.0, self.spacing)
        for _ in range(k):
            out = out.wedge(self)
        return out

    # -- derivatives ------------------------------------------------------

    def _dz(self, arr: np.ndarray, k: int) -> np.ndarray:
        """del/del z_k of a grid coefficient; axes (2k, 2k+1) are (x_k, y_k)."""
        arr = np.asarray(arr, dtype=complex)
        if arr.ndim == 0:
            return np.zeros(())
        eo = 2 if arr.shape[2 * k] >= 3 and arr.shape[2 * k + 1] >= 3 else 1
        gx = np.gradient(arr, self.spacing[2 * k], axis=2 * k, edge_order=eo)
        gy = np.gradient(arr, self.spacing[2 * k + 1], axis=2 * k + 1, edge_order=eo)
        return 0.5 * (gx - 1j * gy)

    def _dzbar(self, arr: np.ndarray, k: int) -> np.ndarray:
        arr = np.asarray(arr, dtype=complex)
        if arr.ndim == 0:
            return np.zeros(())
        eo = 2 if arr.shape[2 * k] >= 3 and arr.shape[2 * k + 1] >= 3 else 1
        gx = np.gradient(arr, self.spacing[2 * k], axis=2 * k, edge_order=eo)
        gy = np.gradient(arr, self.spacing[2 * k + 1], axis=2 * k + 1, edge_order=eo)
        return 0.5 * (gx + 1j * gy)

    def del_(self) -> "FormField":
        out = FormField(self.n, self.degree + 1, self.spacing)
        for (I, J), c in self.coeffs.items():
            for k in range(self.n):
                m = _merge_signed((k,), I)
                if m is None:
                    continue
                out._add_term((m[1], J), m[0] * self._dz(c, k))
        return out

    def delbar(self) -> "FormField":
        out = FormField(self.n, self.degree + 1, self.spacing)
        for (I, J), c in self.coeffs.items():
            sign_i = -1 if len(I) % 2 else 1
            for k in range(self.n):
                m = _merge_signed((k,), J)
                if m is None:
                    continue
                out._add_term((I, m[1]), sign_i * m[0] * self._dzbar(c, k))
        return out

    def d(self) -> "FormField":
        return self.del_() + self.delbar()

    def dc(self) -> "FormField":
        return 0.5j * (self.delbar() - self.del_())

    def ddc(self) -> "FormField":
        return self.dc().d()

    # -- evaluation -------------------------------------------------------

    def top_density(self) -> np.ndarray:
        """Density against beta^n (the Lebesgue volume) for top-degree forms."""
        if self.degree != 2 * self.n:
            raise ValueError("top_density needs a top-degree form")
        full = tuple(range(self.n))
        coeff = self.coeffs.get((full, full))
        if coeff is None:
            return np.zeros(())
        norm = beta_form(self.n, self.spacing).wedge_power(self.n).coeffs[(full, full)]
        return np.real(coeff / norm)


def zero_form(n: int, degree: int, spacing) -> FormField:
    return FormField(n, degree, tuple(spacing))


def scalar_form(n: int, values, spacing) -> FormField:
    f = FormField(n, 0, tuple(spacing))
    f.coeffs[((), ())] = np.asarray(values, dtype=complex) + 0j
    return f


def hermitian_form_field(n: int, matrices: np.ndarray, spacing) -> FormField:
    """(1,1)-form i sum A_ij dz_i ^ dzbar_j from per-node coefficient matrices.

    ``matrices`` has shape (..., n, n) (or (n, n) for a constant form).
    """
    matrices = np.asarray(matrices, dtype=complex)
    f = FormField(n, 2, tuple(spacing))
    for i in range(n):
        for j in range(n):
            f.coeffs[((i,), (j,))] = 1j * matrices[..., i, j]
    return f


def beta_form(n: int, spacing) -> FormField:
    return hermitian_form_field(n, np.eye(n), spacing)
