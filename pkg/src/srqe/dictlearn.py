"""Sparsity-bounded coding (OMP) and online dictionary learning.

Training alternates orthogonal matching pursuit over mini-batches with a
single Gauss-Seidel pass over atoms driven by accumulated sufficient
statistics (code covariance and sample/code cross products). Atoms are kept
at exactly unit norm; atoms never selected during an epoch are reseeded
from the worst-reconstructed samples so small corpora cannot collapse the
dictionary rank.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dog import (
    DEFAULT_SIGMAS,
    PatchSet,
    build_pyramid,
    extract_patches,
    select_training_patches,
)
from .errors import InvalidDictionaryError, InvalidInputError
from .imaging import to_grayscale

DIC_MAGIC = b"SRQEDIC1"
_KIND_CODES = {"style": 0, "content": 1}
_KIND_NAMES = {v: k for k, v in _KIND_CODES.items()}

DEFAULT_TAU = 8
DEFAULT_EPOCHS = 10
DEFAULT_BATCH = 256
DEFAULT_STYLE_ATOMS = (256, 256, 512, 1024, 1024)

_RESIDUAL_TOL = 1e-9


@dataclass
class SparseCode:
    """Coefficients over a dictionary's atoms; zeros everywhere off support."""

    coefficients: np.ndarray
    support: np.ndarray

    @classmethod
    def from_dense(cls, coefficients: np.ndarray) -> "SparseCode":
        coefficients = np.asarray(coefficients, dtype=np.float64)
        return cls(coefficients=coefficients, support=np.flatnonzero(coefficients))


@dataclass
class Dictionary:
    """Learned atom matrix (dim x n_atoms) plus its training context."""

    kind: str
    key: tuple[int, int]
    atoms: np.ndarray
    tau: int
    seed: int
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.atoms.shape[0]

    @property
    def n_atoms(self) -> int:
        return self.atoms.shape[1]

    def validate(self) -> "Dictionary":
        if not np.all(np.isfinite(self.atoms)):
            raise InvalidDictionaryError(f"dictionary {self.key} has non-finite atoms")
        norms = np.linalg.norm(self.atoms, axis=0)
        if norms.size and np.max(np.abs(norms - 1.0)) > 1e-5:
            raise InvalidDictionaryError(
                f"dictionary {self.key} has atoms off the unit sphere"
            )
        return self


def _omp_batch(signals: np.ndarray, atoms: np.ndarray, tau: int) -> np.ndarray:
    """OMP codes for every column of signals; returns (n_atoms, n_signals).

    Greedy selection by residual correlation with a least-squares refit on
    the growing support, stopping at tau atoms or residual norm below 1e-9.
    Correlations are computed from precomputed Gram products so each
    iteration is one matrix product.
    """
    y = np.asarray(signals, dtype=np.float64)
    dim, n_sig = y.shape
    n_atoms = atoms.shape[1]
    gram = atoms.T @ atoms
    proj = atoms.T @ y  # (n_atoms, n_sig)

    codes = np.zeros((n_atoms, n_sig))
    selected = np.zeros((n_atoms, n_sig), dtype=bool)
    supports: list[list[int]] = [[] for _ in range(n_sig)]
    resid_sq = np.einsum("ij,ij->j", y, y)
    active = resid_sq > _RESIDUAL_TOL**2

    for _ in range(tau):
        if not np.any(active):
            break
        corr = proj[:, active] - gram @ codes[:, active]
        corr_abs = np.abs(corr)
        corr_abs[selected[:, active]] = -1.0
        picks = np.argmax(corr_abs, axis=0)
        cols = np.flatnonzero(active)
        for local, col in enumerate(cols):
            j = int(picks[local])
            if corr_abs[j, local] <= 0.0:
                active[col] = False
                continue
            supports[col].append(j)
            selected[j, col] = True
            sup = supports[col]
            sub = gram[np.ix_(sup, sup)]
            rhs = proj[sup, col]
            try:
                sol = np.linalg.solve(sub, rhs)
            except np.linalg.LinAlgError:
                sol = np.linalg.lstsq(sub, rhs, rcond=None)[0]
            codes[:, col] = 0.0
            codes[sup, col] = sol
            # residual energy of the least-squares fit: ||y||^2 - alpha . proj_S
            resid_sq[col] = max(float(y[:, col] @ y[:, col] - sol @ rhs), 0.0)
            if resid_sq[col] <= _RESIDUAL_TOL**2:
                active[col] = False
    return codes


def omp_encode(signal: np.ndarray, dictionary: Dictionary, tau: int) -> SparseCode:
    """Sparse code of one signal with at most tau nonzero coefficients."""
    sig = np.asarray(signal, dtype=np.float64).ravel()
    if sig.shape[0] != dictionary.dim:
        raise InvalidInputError(
            f"signal length {sig.shape[0]} does not match dictionary dim {dictionary.dim}"
        )
    if tau < 1:
        raise InvalidInputError("tau must be at least 1")
    codes = _omp_batch(sig[:, None], dictionary.atoms, tau)
    return SparseCode.from_dense(codes[:, 0])


def _distinct_columns(samples: np.ndarray) -> np.ndarray:
    """Indices of the first occurrence of each distinct column."""
    seen: dict[bytes, int] = {}
    for idx in range(samples.shape[1]):
        key = samples[:, idx].tobytes()
        if key not in seen:
            seen[key] = idx
    return np.fromiter(seen.values(), dtype=np.intp)


def _init_atoms(samples: np.ndarray, n_atoms: int, rng: np.random.Generator) -> np.ndarray:
    dim = samples.shape[0]
    distinct = _distinct_columns(samples)
    take = min(n_atoms, distinct.size)
    chosen = rng.choice(distinct, size=take, replace=False)
    atoms = np.empty((dim, n_atoms))
    atoms[:, :take] = samples[:, chosen]
    if take < n_atoms:
        warnings.warn(
            f"only {distinct.size} distinct samples for {n_atoms} atoms; "
            "filling the remainder with random directions",
            stacklevel=3,
        )
        atoms[:, take:] = rng.standard_normal((dim, n_atoms - take))
    norms = np.linalg.norm(atoms, axis=0)
    for j in np.flatnonzero(norms < 1e-12):
        atoms[:, j] = rng.standard_normal(dim)
        norms[j] = np.linalg.norm(atoms[:, j])
    return atoms / norms


def _update_atoms(atoms, stat_aa, stat_ya) -> None:
    """One Gauss-Seidel pass over atoms given the sufficient statistics."""
    diag = stat_aa.diagonal()
    residual = stat_ya - atoms @ stat_aa
    for j in np.flatnonzero(diag > 1e-12):
        candidate = atoms[:, j] + residual[:, j] / diag[j]
        norm = np.linalg.norm(candidate)
        if norm < 1e-12:
            continue
        candidate /= norm
        delta = candidate - atoms[:, j]
        residual -= np.outer(delta, stat_aa[j])
        atoms[:, j] = candidate


def odl_train(
    samples: np.ndarray,
    n_atoms: int,
    tau: int,
    epochs: int = DEFAULT_EPOCHS,
    seed: int = 0,
    batch_size: int = DEFAULT_BATCH,
    kind: str = "content",
    key: tuple[int, int] = (0, 0),
    meta: dict | None = None,
) -> Dictionary:
    """Fit a dim x n_atoms dictionary to the sample columns.

    Deterministic for fixed (samples, hyperparameters, seed) in a
    single-threaded run. meta of the result records the per-epoch mean
    reconstruction error under the epoch's final atoms.
    """
    y = np.asarray(samples, dtype=np.float64)
    if y.ndim != 2 or y.size == 0:
        raise InvalidInputError("samples must be a non-empty dim x N matrix")
    if not np.all(np.isfinite(y)):
        raise InvalidInputError("samples contain non-finite values")
    if n_atoms < 1 or tau < 1 or epochs < 1:
        raise InvalidInputError("n_atoms, tau and epochs must be positive")
    n_samples = y.shape[1]
    if n_samples < n_atoms:
        warnings.warn(
            f"{n_samples} samples for {n_atoms} atoms; dictionary will be under-determined",
            stacklevel=2,
        )

    rng = np.random.default_rng(seed)
    atoms = _init_atoms(y, n_atoms, rng)
    stat_aa = np.zeros((n_atoms, n_atoms))
    stat_ya = np.zeros((y.shape[0], n_atoms))
    batch = max(1, min(batch_size, n_samples))
    epoch_errors: list[float] = []

    for epoch in range(epochs):
        order = rng.permutation(n_samples)
        used = np.zeros(n_atoms, dtype=bool)
        for start in range(0, n_samples, batch):
            cols = order[start : start + batch]
            codes = _omp_batch(y[:, cols], atoms, tau)
            stat_aa += codes @ codes.T
            stat_ya += y[:, cols] @ codes.T
            used |= np.any(codes != 0.0, axis=1)
            _update_atoms(atoms, stat_aa, stat_ya)

        codes = _omp_batch(y, atoms, tau)
        residual_norms = np.linalg.norm(y - atoms @ codes, axis=0)
        epoch_errors.append(float(residual_norms.mean()))

        # reseed atoms that went unused plus the later twin of any
        # near-parallel pair; duplicates starve some sample direction while
        # keeping both copies nominally "used"
        coherence = np.abs(atoms.T @ atoms)
        duplicate = np.zeros(n_atoms, dtype=bool)
        for i in range(n_atoms):
            if duplicate[i]:
                continue
            twins = np.flatnonzero(coherence[i, i + 1 :] > 0.999) + i + 1
            duplicate[twins] = True
        dead = np.flatnonzero(~used | duplicate)
        if dead.size and epoch < epochs - 1:
            worst = np.argsort(-residual_norms, kind="stable")
            cursor = 0
            for j in dead:
                replacement = None
                while cursor < worst.size:
                    cand = y[:, worst[cursor]]
                    cursor += 1
                    norm = np.linalg.norm(cand)
                    if norm > 1e-12:
                        replacement = cand / norm
                        break
                if replacement is None:
                    replacement = rng.standard_normal(atoms.shape[0])
                    replacement /= np.linalg.norm(replacement)
                atoms[:, j] = replacement
                stat_aa[j, :] = 0.0
                stat_aa[:, j] = 0.0
                stat_ya[:, j] = 0.0

    info = dict(meta or {})
    info["epoch_errors"] = epoch_errors
    info["under_sampled"] = n_samples < n_atoms
    return Dictionary(kind=kind, key=key, atoms=atoms, tau=tau, seed=seed, meta=info)


def train_style_dicts(
    style_matrices: list[np.ndarray],
    n_atoms=DEFAULT_STYLE_ATOMS,
    tau: int = DEFAULT_TAU,
    seed: int = 0,
    epochs: int = DEFAULT_EPOCHS,
    batch_size: int = DEFAULT_BATCH,
) -> list[Dictionary]:
    """One dictionary per layer from the per-layer style matrices."""
    if len(style_matrices) != 5 or len(n_atoms) != 5:
        raise InvalidInputError("expected five style matrices and five atom counts")
    dicts = []
    for layer, (matrix, atoms) in enumerate(zip(style_matrices, n_atoms), start=1):
        dicts.append(
            odl_train(
                matrix,
                int(atoms),
                tau,
                epochs=epochs,
                seed=seed + layer,
                batch_size=batch_size,
                kind="style",
                key=(layer, 0),
                meta={"layer_dim": int(np.asarray(matrix).shape[0])},
            )
        )
    return dicts


def train_content_dicts(
    images: list[np.ndarray],
    z_count: int,
    o_count: int,
    n_atoms: int = 256,
    patch_count: int = 1000,
    tau: int = DEFAULT_TAU,
    seed: int = 0,
    patch_size: int = 6,
    sigma_list=None,
    k: float = 1.6,
    train_stride: int | None = None,
    epochs: int = DEFAULT_EPOCHS,
    batch_size: int = DEFAULT_BATCH,
) -> dict[tuple[int, int], Dictionary]:
    """A (scale, octave)-keyed family of patch dictionaries.

    Patches come from every training image's pyramid signal at that key,
    overlapped (stride defaults to half the patch side), mean-removed, and
    the patch_count with the largest deviation are kept for training.
    """
    if not images:
        raise InvalidInputError("need at least one training image")
    sigma_list = DEFAULT_SIGMAS if sigma_list is None else sigma_list
    stride = max(1, patch_size // 2) if train_stride is None else train_stride

    pooled: dict[tuple[int, int], list[np.ndarray]] = {
        (z, o): [] for z in range(1, z_count + 1) for o in range(1, o_count + 1)
    }
    for image in images:
        gray = to_grayscale(image)
        pyramid = build_pyramid(
            gray, z_count, o_count, sigma_list, k, min_patch_size=patch_size
        )
        for grid_key, signal in pyramid.signals.items():
            pooled[grid_key].append(extract_patches(signal, patch_size, stride).patches)

    dicts: dict[tuple[int, int], Dictionary] = {}
    for idx, (grid_key, chunks) in enumerate(sorted(pooled.items())):
        stacked = np.vstack(chunks)
        merged = PatchSet(
            patch_size=patch_size,
            patches=stacked,
            positions=np.zeros((len(stacked), 2), dtype=np.intp),
            means=np.zeros(len(stacked)),
        )
        chosen = select_training_patches(merged, patch_count)
        dicts[grid_key] = odl_train(
            chosen.patches.T,
            n_atoms,
            tau,
            epochs=epochs,
            seed=seed + idx + 1,
            batch_size=batch_size,
            kind="content",
            key=grid_key,
            meta={"patch_size": patch_size},
        )
    return dicts


def save_dictionaries(path, dictionaries) -> None:
    """Write a family of same-kind dictionaries in the binary format.

    Layout: magic "SRQEDIC1" | u8 kind | u32 LE count | per sub-dictionary:
    two u32 LE key fields, u32 dim, u32 n_atoms, u32 tau, u64 seed and the
    f32 LE column-major atom payload. Saving then loading is bit-exact.
    """
    items = list(dictionaries.values()) if isinstance(dictionaries, dict) else list(dictionaries)
    if not items:
        raise InvalidInputError("nothing to save")
    kinds = {d.kind for d in items}
    if len(kinds) != 1 or next(iter(kinds)) not in _KIND_CODES:
        raise InvalidInputError(f"expected one kind of style/content, got {sorted(kinds)}")
    kind_code = _KIND_CODES[items[0].kind]
    items = sorted(items, key=lambda d: d.key)
    with open(path, "wb") as fh:
        fh.write(DIC_MAGIC)
        fh.write(struct.pack("<BI", kind_code, len(items)))
        for d in items:
            fh.write(struct.pack("<IIIIIQ", d.key[0], d.key[1], d.dim, d.n_atoms, d.tau, d.seed))
            fh.write(np.asarray(d.atoms, dtype="<f4").ravel(order="F").tobytes())


def load_dictionaries(path):
    """Read a dictionary file; returns a list (style) or (z,o)-keyed dict (content)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:8] != DIC_MAGIC:
        raise InvalidInputError(f"{path!r} is not a dictionary file (bad magic)")
    off = 8

    def take(n):
        nonlocal off
        if off + n > len(blob):
            raise InvalidInputError(f"truncated dictionary file {path!r}")
        out = blob[off : off + n]
        off += n
        return out

    kind_code, count = struct.unpack("<BI", take(5))
    if kind_code not in _KIND_NAMES:
        raise InvalidInputError(f"unknown dictionary kind code {kind_code}")
    kind = _KIND_NAMES[kind_code]
    items = []
    for _ in range(count):
        k0, k1, dim, n_atoms, tau, seed = struct.unpack("<IIIIIQ", take(28))
        payload = take(4 * dim * n_atoms)
        atoms = np.frombuffer(payload, dtype="<f4").reshape((dim, n_atoms), order="F")
        meta = {"patch_size": int(round(np.sqrt(dim)))} if kind == "content" else {}
        items.append(
            Dictionary(
                kind=kind,
                key=(k0, k1),
                atoms=atoms.astype(np.float64),
                tau=tau,
                seed=seed,
                meta=meta,
            ).validate()
        )
    if kind == "style":
        return sorted(items, key=lambda d: d.key)
    return {d.key: d for d in items}
