"""Inference-time sparse coefficients and their similarity measures.

At inference, coefficients are dense least-squares codes obtained by
multiplying with the dictionary's Moore-Penrose generalized inverse (no
greedy pursuit). Two codes are compared with a regularized ratio of twice
their inner product to the product of their norms; a small eta keeps the
ratio defined (and equal to 1) when both codes vanish.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dictlearn import Dictionary, SparseCode
from .errors import InvalidDictionaryError, InvalidInputError

DEFAULT_ETA = 1e-4

SIMILARITY_FORMS = ("as-written", "ssim-form")


@dataclass
class CodingOperator:
    """Generalized inverse of a dictionary's atom matrix (n_atoms x dim)."""

    kind: str
    key: tuple[int, int]
    matrix: np.ndarray
    dim: int
    n_atoms: int

    def encode_many(self, signals: np.ndarray) -> np.ndarray:
        """Codes for a batch: rows of signals (n, dim) -> rows of codes (n, n_atoms)."""
        signals = np.asarray(signals, dtype=np.float64)
        if signals.ndim != 2 or signals.shape[1] != self.dim:
            raise InvalidInputError(
                f"expected (n, {self.dim}) signals, got shape {signals.shape}"
            )
        return signals @ self.matrix.T


def make_operator(dictionary: Dictionary) -> CodingOperator:
    """SVD pseudo-inverse with singular values below rcond*sigma_max zeroed."""
    atoms = np.asarray(dictionary.atoms, dtype=np.float64)
    if atoms.size == 0:
        raise InvalidDictionaryError("empty dictionary")
    if not np.all(np.isfinite(atoms)):
        raise InvalidDictionaryError("dictionary atoms contain non-finite values")
    rcond = max(atoms.shape) * np.finfo(np.float64).eps
    pinv = np.linalg.pinv(atoms, rcond=rcond)
    return CodingOperator(
        kind=dictionary.kind,
        key=dictionary.key,
        matrix=pinv,
        dim=atoms.shape[0],
        n_atoms=atoms.shape[1],
    )


def penrose_errors(dictionary: Dictionary, operator: CodingOperator) -> tuple[float, float]:
    """Relative errors of the first two Penrose conditions (D D+ D = D, D+ D D+ = D+)."""
    d = dictionary.atoms
    p = operator.matrix
    scale_d = np.linalg.norm(d) or 1.0
    scale_p = np.linalg.norm(p) or 1.0
    err1 = np.linalg.norm(d @ p @ d - d) / scale_d
    err2 = np.linalg.norm(p @ d @ p - p) / scale_p
    return float(err1), float(err2)


def _encode(vector: np.ndarray, operator: CodingOperator) -> SparseCode:
    vec = np.asarray(vector, dtype=np.float64).ravel()
    if vec.shape[0] != operator.dim:
        raise InvalidInputError(
            f"vector length {vec.shape[0]} does not match operator dim {operator.dim}"
        )
    return SparseCode.from_dense(operator.matrix @ vec)


def encode_style(style_vec: np.ndarray, operator: CodingOperator) -> SparseCode:
    """Least-squares code of a layer's style vector."""
    return _encode(style_vec, operator)


def encode_content(patch: np.ndarray, operator: CodingOperator) -> SparseCode:
    """Least-squares code of one zero-mean content patch."""
    return _encode(patch, operator)


def _coeffs(code) -> np.ndarray:
    if isinstance(code, SparseCode):
        return code.coefficients
    return np.asarray(code, dtype=np.float64)


def _similarity(a: np.ndarray, b: np.ndarray, eta: float, form: str) -> float:
    if form not in SIMILARITY_FORMS:
        raise InvalidInputError(f"similarity form must be one of {SIMILARITY_FORMS}")
    num = 2.0 * float(a @ b) + eta
    if form == "as-written":
        den = float(np.linalg.norm(a) * np.linalg.norm(b)) + eta
    else:
        den = float(a @ a + b @ b) + eta
    return num / den


def style_similarity(s, ts, eta: float = DEFAULT_ETA, form: str = "as-written") -> float:
    """Similarity of two style codes; peaks near 2 at identity (as-written form)."""
    a, b = _coeffs(s), _coeffs(ts)
    if a.shape != b.shape:
        raise InvalidInputError("style codes must have equal length")
    if eta <= 0:
        raise InvalidInputError("eta must be positive")
    return _similarity(a, b, eta, form)


def content_similarity(
    c_patches, tc_patches, eta: float = DEFAULT_ETA, form: str = "as-written"
) -> float:
    """Mean per-patch code similarity over positionally aligned grids.

    Accepts lists of SparseCode or (n, n_atoms) coefficient arrays.
    """
    if eta <= 0:
        raise InvalidInputError("eta must be positive")
    a = _stack(c_patches)
    b = _stack(tc_patches)
    if a.shape != b.shape:
        raise InvalidInputError("patch grids must be positionally aligned and equal size")
    if a.shape[0] == 0:
        raise InvalidInputError("empty patch grid")
    num = 2.0 * np.einsum("ij,ij->i", a, b) + eta
    if form == "as-written":
        den = np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1) + eta
    elif form == "ssim-form":
        den = np.einsum("ij,ij->i", a, a) + np.einsum("ij,ij->i", b, b) + eta
    else:
        raise InvalidInputError(f"similarity form must be one of {SIMILARITY_FORMS}")
    return float(np.mean(num / den))


def _stack(patch_codes) -> np.ndarray:
    if isinstance(patch_codes, np.ndarray):
        arr = np.asarray(patch_codes, dtype=np.float64)
        return arr.reshape(arr.shape[0], -1) if arr.ndim == 2 else arr[None, :]
    rows = [_coeffs(code) for code in patch_codes]
    if not rows:
        return np.empty((0, 0))
    return np.vstack(rows)
