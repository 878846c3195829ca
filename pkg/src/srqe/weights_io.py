"""Binary weight bundles for the fixed VGG16 feature stack.

File layout ("SRQEWGT1"):

    magic "SRQEWGT1" (8 bytes)
    u32 LE   tensor count
    per tensor:
        u16 LE   name length
        UTF-8    name
        u8       ndim
        ndim x u32 LE   dims
        f32 LE   row-major payload

Tensor names are conv{block}_{idx}.weight / conv{block}_{idx}.bias for the
13 convolutions of the feature stack.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InvalidInputError

MAGIC = b"SRQEWGT1"

# (name, in_channels, out_channels) per conv, grouped in five blocks.
VGG16_BLOCKS = (
    (("conv1_1", 3, 64), ("conv1_2", 64, 64)),
    (("conv2_1", 64, 128), ("conv2_2", 128, 128)),
    (("conv3_1", 128, 256), ("conv3_2", 256, 256), ("conv3_3", 256, 256)),
    (("conv4_1", 256, 512), ("conv4_2", 512, 512), ("conv4_3", 512, 512)),
    (("conv5_1", 512, 512), ("conv5_2", 512, 512), ("conv5_3", 512, 512)),
)

LAYER_CHANNELS = (64, 128, 256, 512, 512)

# Per-channel standardization applied once before the first convolution.
NORMALIZE_MEAN = (0.485, 0.456, 0.406)
NORMALIZE_STD = (0.229, 0.224, 0.225)


def expected_tensor_shapes() -> dict[str, tuple[int, ...]]:
    """Names and shapes of the 26 tensors a complete bundle must hold."""
    shapes: dict[str, tuple[int, ...]] = {}
    for block in VGG16_BLOCKS:
        for name, c_in, c_out in block:
            shapes[f"{name}.weight"] = (c_out, c_in, 3, 3)
            shapes[f"{name}.bias"] = (c_out,)
    return shapes


@dataclass
class WeightBundle:
    """Immutable collection of named weight tensors."""

    tensors: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        for name, arr in self.tensors.items():
            if not np.all(np.isfinite(arr)):
                raise ConfigurationError(f"tensor {name!r} contains non-finite values")

    def validate_vgg16(self) -> "WeightBundle":
        """Check that every expected tensor is present with the exact shape."""
        for name, shape in expected_tensor_shapes().items():
            if name not in self.tensors:
                raise ConfigurationError(f"missing tensor {name!r}")
            got = tuple(self.tensors[name].shape)
            if got != shape:
                raise ConfigurationError(
                    f"tensor {name!r} has shape {got}, expected {shape}"
                )
        return self

    def conv(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        return self.tensors[f"{name}.weight"], self.tensors[f"{name}.bias"]


def write_weight_file(path, tensors: dict[str, np.ndarray]) -> None:
    """Serialize tensors in the bit-exact bundle format."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(tensors)))
        for name, arr in tensors.items():
            data = np.ascontiguousarray(arr, dtype="<f4")
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<B", data.ndim))
            fh.write(struct.pack(f"<{data.ndim}I", *data.shape))
            fh.write(data.tobytes())


def read_weight_file(path) -> WeightBundle:
    """Parse a bundle file; raises InvalidInputError on truncation or bad magic."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:8] != MAGIC:
        raise InvalidInputError(f"{path!r} is not a weight bundle (bad magic)")
    off = 8

    def take(n):
        nonlocal off
        if off + n > len(blob):
            raise InvalidInputError(f"truncated weight file {path!r}")
        out = blob[off : off + n]
        off += n
        return out

    (count,) = struct.unpack("<I", take(4))
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<H", take(2))
        name = take(name_len).decode("utf-8")
        (ndim,) = struct.unpack("<B", take(1))
        dims = struct.unpack(f"<{ndim}I", take(4 * ndim))
        n_values = int(np.prod(dims)) if ndim else 1
        payload = take(4 * n_values)
        tensors[name] = np.frombuffer(payload, dtype="<f4").reshape(dims).copy()
    return WeightBundle(tensors)


def random_weight_bundle(seed: int, scale: float = 1.0) -> WeightBundle:
    """He-initialized random bundle with the full VGG16 feature topology.

    Test utility: lets the whole pipeline run without pretrained weights.
    """
    rng = np.random.default_rng(seed)
    tensors: dict[str, np.ndarray] = {}
    for name, shape in expected_tensor_shapes().items():
        if name.endswith(".weight"):
            fan_in = shape[1] * shape[2] * shape[3]
            std = scale * np.sqrt(2.0 / fan_in)
            tensors[name] = rng.normal(0.0, std, size=shape).astype(np.float32)
        else:
            tensors[name] = rng.normal(0.0, 0.01, size=shape).astype(np.float32)
    return WeightBundle(tensors)


def xorshift32_sequence(seed: int, count: int) -> np.ndarray:
    """Deterministic uniform [0,1) stream shared with the weight exporter.

    Plain 32-bit xorshift (shifts 13, 17, 5); each state value is divided by
    2^32. Language independent, so fixtures can be verified across runtimes.
    """
    if not 0 < seed < 2**32:
        raise InvalidInputError("xorshift32 seed must be a nonzero u32")
    out = np.empty(count, dtype=np.float64)
    x = np.uint64(seed)
    mask = np.uint64(0xFFFFFFFF)
    for i in range(count):
        x ^= (x << np.uint64(13)) & mask
        x ^= x >> np.uint64(17)
        x ^= (x << np.uint64(5)) & mask
        out[i] = float(x) / 4294967296.0
    return out


def fixture_input(seed: int, height: int, width: int) -> np.ndarray:
    """The reference-activation fixture's input image (H, W, 3) in [0, 1)."""
    values = xorshift32_sequence(seed, height * width * 3)
    return values.reshape(height, width, 3)
