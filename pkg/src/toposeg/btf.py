"""Forward-only reference of the boundary-aware fusion algebra.

Two feature streams are fused under a per-channel attention scalar, a
boundary residue is extracted with an average-pool subtraction, and an
aggregation branch mixes that residue with the previous stage's output.
The two printed operator orders differ on purpose and are kept verbatim:
the attention path runs conv, then normalization, then relu; the
aggregation path runs relu, then normalization, then conv. Normalization
is inference-mode affine (positive scale, shift), convolutions are 3x3
cross-correlations with zero padding, and nothing here trains.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import json

import numpy as np
from scipy import ndimage

from .errors import FormatError, ShapeError, ValueRangeError
from .grid import FeatureMap, avg_pool_3x3, _freeze
from .io import read_tensor, write_tensor


def conv3x3(x: np.ndarray, kernels: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Multi-channel 3x3 cross-correlation with zero padding.

    ``x`` is (C_in, H, W), ``kernels`` is (C_out, C_in, 3, 3); output keeps
    the spatial shape.
    """
    x = np.asarray(x, np.float64)
    k = np.asarray(kernels, np.float64)
    b = np.asarray(bias, np.float64)
    if x.ndim != 3 or k.ndim != 4 or k.shape[2:] != (3, 3):
        raise ShapeError(f"conv expects (C,H,W) input and (O,C,3,3) kernels, got {x.shape} and {k.shape}")
    if k.shape[1] != x.shape[0]:
        raise ShapeError(f"kernel input channels {k.shape[1]} do not match input {x.shape[0]}")
    if b.shape != (k.shape[0],):
        raise ShapeError(f"bias shape {b.shape} does not match {k.shape[0]} output channels")
    out = np.empty((k.shape[0], x.shape[1], x.shape[2]))
    for o in range(k.shape[0]):
        acc = np.full(x.shape[1:], b[o])
        for c in range(x.shape[0]):
            acc += ndimage.correlate(x[c], k[o, c], mode="constant", cval=0.0)
        out[o] = acc
    return out


def _affine_norm(x: np.ndarray, scale: np.ndarray, shift: np.ndarray) -> np.ndarray:
    return x * scale[:, None, None] + shift[:, None, None]


@dataclass(frozen=True)
class BtfWeights:
    """Explicit weights for one fusion stage over C-channel streams.

    The fusion conv maps the 2C-channel concat down to C before its
    normalization; the aggregation path normalizes the 2C-channel concat
    first and its conv maps 2C to C afterwards.
    """

    fusion_kernels: np.ndarray
    fusion_bias: np.ndarray
    fusion_scale: np.ndarray
    fusion_shift: np.ndarray
    agg_kernels: np.ndarray
    agg_bias: np.ndarray
    agg_scale: np.ndarray
    agg_shift: np.ndarray

    def __post_init__(self):
        for name in (
            "fusion_kernels",
            "fusion_bias",
            "fusion_scale",
            "fusion_shift",
            "agg_kernels",
            "agg_bias",
            "agg_scale",
            "agg_shift",
        ):
            object.__setattr__(self, name, _freeze(np.asarray(getattr(self, name), np.float64)))
        c = self.channels
        expect = {
            "fusion_kernels": (c, 2 * c, 3, 3),
            "fusion_bias": (c,),
            "fusion_scale": (c,),
            "fusion_shift": (c,),
            "agg_kernels": (c, 2 * c, 3, 3),
            "agg_bias": (c,),
            "agg_scale": (2 * c,),
            "agg_shift": (2 * c,),
        }
        for name, shape in expect.items():
            got = getattr(self, name).shape
            if got != shape:
                raise ShapeError(f"{name} must have shape {shape}, got {got}")
        if self.fusion_scale.min() <= 0 or self.agg_scale.min() <= 0:
            raise ValueRangeError("normalization scale parameters must be > 0")
        for name in expect:
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueRangeError(f"{name} contains non-finite values")

    @property
    def channels(self) -> int:
        if self.fusion_kernels.ndim != 4:
            raise ShapeError(f"fusion kernels must be 4-d, got shape {self.fusion_kernels.shape}")
        return self.fusion_kernels.shape[0]

    @classmethod
    def identity(cls, channels: int) -> "BtfWeights":
        """Zero convs, unit norms: attention 0.5 and a vanishing aggregation."""
        c = channels
        return cls(
            fusion_kernels=np.zeros((c, 2 * c, 3, 3)),
            fusion_bias=np.zeros(c),
            fusion_scale=np.ones(c),
            fusion_shift=np.zeros(c),
            agg_kernels=np.zeros((c, 2 * c, 3, 3)),
            agg_bias=np.zeros(c),
            agg_scale=np.ones(2 * c),
            agg_shift=np.zeros(2 * c),
        )


_SLOTS = (
    "fusion_kernels",
    "fusion_bias",
    "fusion_scale",
    "fusion_shift",
    "agg_kernels",
    "agg_bias",
    "agg_scale",
    "agg_shift",
)


def save_weights(weights: BtfWeights, directory: str | Path) -> None:
    """One tensor file per slot plus a manifest recording true shapes."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {"channels": weights.channels, "slots": {}}
    for name in _SLOTS:
        a = getattr(weights, name)
        write_tensor(directory / f"{name}.tlm", a.reshape(1, 1, -1))
        manifest["slots"][name] = {"file": f"{name}.tlm", "shape": list(a.shape)}
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def load_weights(directory: str | Path) -> BtfWeights:
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.is_file():
        raise FormatError(f"missing weight manifest {manifest_path}")
    manifest = json.loads(manifest_path.read_text())
    fields = {}
    for name in _SLOTS:
        slot = manifest.get("slots", {}).get(name)
        if slot is None:
            raise FormatError(f"manifest lacks slot {name}")
        tensor = read_tensor(directory / slot["file"])
        fields[name] = tensor.reshape(slot["shape"])
    return BtfWeights(**fields)


def _check_pair_shapes(r: FeatureMap, d: FeatureMap) -> None:
    if r.data.shape != d.data.shape:
        raise ShapeError(f"feature streams differ in shape: {r.data.shape} vs {d.data.shape}")


def fused_attention(r: FeatureMap, d: FeatureMap, weights: BtfWeights) -> np.ndarray:
    """Per-channel attention scalars in (0,1) from the concatenated streams."""
    _check_pair_shapes(r, d)
    if weights.channels != r.channels:
        raise ShapeError(f"weights expect {weights.channels} channels, inputs have {r.channels}")
    cat = np.concatenate([d.data, r.data], axis=0)
    z = conv3x3(cat, weights.fusion_kernels, weights.fusion_bias)
    z = _affine_norm(z, weights.fusion_scale, weights.fusion_shift)
    z = np.maximum(z, 0.0)
    pooled = z.mean(axis=(1, 2))
    return 1.0 / (1.0 + np.exp(-pooled))


def primary_fusion(r: FeatureMap, d: FeatureMap, attention: np.ndarray) -> FeatureMap:
    """Attention-scaled sum of the two streams."""
    _check_pair_shapes(r, d)
    a = np.asarray(attention, np.float64)
    if a.shape != (r.channels,):
        raise ShapeError(f"attention must hold one scalar per channel, got shape {a.shape}")
    return FeatureMap((r.data + d.data) * a[:, None, None])


def boundary_map(fused: FeatureMap) -> FeatureMap:
    """Per-channel difference between a feature and its 3x3 neighborhood mean."""
    out = np.stack([fused.data[c] - avg_pool_3x3(fused.data[c]) for c in range(fused.channels)])
    return FeatureMap(out)


def btf_forward(
    r: FeatureMap, d: FeatureMap, f_prev: FeatureMap | None, weights: BtfWeights
) -> FeatureMap:
    """Full fusion stage; the aggregation branch is off at the first stage.

    With zero aggregation kernels and biases the output equals the primary
    fusion exactly, whatever the norm parameters: the branch's conv output
    is identically zero.
    """
    attention = fused_attention(r, d, weights)
    fhat = primary_fusion(r, d, attention)
    if f_prev is None:
        return fhat
    if f_prev.data.shape != fhat.data.shape:
        raise ShapeError(f"previous stage shape {f_prev.data.shape} does not match {fhat.data.shape}")
    boundary = boundary_map(fhat)
    cat = np.concatenate([boundary.data, f_prev.data], axis=0)
    z = np.maximum(cat, 0.0)
    z = _affine_norm(z, weights.agg_scale, weights.agg_shift)
    z = conv3x3(z, weights.agg_kernels, weights.agg_bias)
    return FeatureMap(fhat.data + z)
