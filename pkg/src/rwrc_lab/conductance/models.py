"""Conductance laws and the sampled conductance field."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from rwrc_lab.lattice import LatticeBox, Site


class TailModel(BaseModel):
    """I.i.d. conductances with log Pr(a ≤ ε) = −D ε^{−η}, capped at M.

    Sampled exactly as ``a = min((D/E)^{1/η}, M)`` with ``E ~ Exp(1)``.
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["tail"] = "tail"
    eta: float = Field(..., gt=0, description="Tail exponent η")
    D: float = Field(..., gt=0, description="Tail constant D")
    cap: float = Field(default=1.0, gt=0, description="Almost-sure upper bound M")

    @computed_field  # type: ignore[prop-decorator]
    @property
    def p(self) -> float:
        """Energy exponent p = 2η/(1+η)."""
        return 2.0 * self.eta / (1.0 + self.eta)

    def transform(self, exponentials: NDArray[np.float64]) -> NDArray[np.float64]:
        """Map Exp(1) draws to conductances."""
        with np.errstate(divide="ignore"):
            raw = (self.D / np.asarray(exponentials, dtype=float)) ** (1.0 / self.eta)
        return np.minimum(raw, self.cap)

    def draw(self, rng: np.random.Generator, size: Any) -> NDArray[np.float64]:
        """Draw conductances of the given shape."""
        return self.transform(rng.standard_exponential(size))

    def cdf(self, eps: Union[float, NDArray[np.float64]]) -> Union[float, NDArray[np.float64]]:
        """Exact Pr(a ≤ ε): exp(−D ε^{−η}) below the cap, 1 at or above it."""
        e = np.asarray(eps, dtype=float)
        safe = np.where(e > 0, e, 1.0)
        out = np.where(e > 0, np.exp(-self.D * safe ** (-self.eta)), 0.0)
        out = np.where(e >= self.cap, 1.0, out)
        return float(out) if out.ndim == 0 else out

    def lower_bound(self) -> float:
        return 0.0

    def upper_bound(self) -> float:
        return self.cap


class EllipticModel(BaseModel):
    """I.i.d. uniformly elliptic conductances supported in [λ, 1/λ]."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["elliptic"] = "elliptic"
    lam: float = Field(..., gt=0, lt=1, description="Ellipticity constant λ")
    law: Literal["uniform", "discrete"] = Field(
        default="uniform", description="uniform on [λ, 1/λ] or a discrete law"
    )
    values: Optional[List[float]] = Field(default=None, description="Atoms of the discrete law")
    probs: Optional[List[float]] = Field(default=None, description="Probabilities of the atoms")

    @model_validator(mode="after")
    def validate_law(self) -> "EllipticModel":
        """Discrete laws need atoms inside [λ, 1/λ] and probabilities summing to 1."""
        if self.law != "discrete":
            return self
        if not self.values:
            raise ValueError("values are required when law is 'discrete'")
        probs = self.probs or [1.0 / len(self.values)] * len(self.values)
        if len(probs) != len(self.values):
            raise ValueError("values and probs must have the same length")
        if any(q < 0 for q in probs) or abs(sum(probs) - 1.0) > 1e-12:
            raise ValueError("probs must be non-negative and sum to 1")
        lo, hi = self.lam, 1.0 / self.lam
        for v in self.values:
            if not lo <= v <= hi:
                raise ValueError(f"atom {v} lies outside [{lo}, {hi}]")
        return self

    def atoms(self) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Atoms and probabilities of the discrete law."""
        values = np.asarray(self.values, dtype=float)
        n = values.size
        probs = np.asarray(self.probs if self.probs else [1.0 / n] * n, dtype=float)
        return values, probs

    def draw(self, rng: np.random.Generator, size: Any) -> NDArray[np.float64]:
        """Draw conductances of the given shape."""
        if self.law == "uniform":
            return rng.uniform(self.lam, 1.0 / self.lam, size)
        values, probs = self.atoms()
        return values[rng.choice(values.size, size=size, p=probs)]

    def harmonic_mean(self) -> float:
        """Harmonic mean (E[1/a])^{-1} of the law."""
        if self.law == "uniform":
            lo, hi = self.lam, 1.0 / self.lam
            return float((hi - lo) / np.log(hi / lo))
        values, probs = self.atoms()
        return float(1.0 / np.sum(probs / values))

    def lower_bound(self) -> float:
        return self.lam

    def upper_bound(self) -> float:
        return 1.0 / self.lam


class ConstantModel(BaseModel):
    """Deterministic environment a ≡ value."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["constant"] = "constant"
    value: float = Field(default=1.0, gt=0, description="Conductance of every edge")

    def draw(self, rng: np.random.Generator, size: Any) -> NDArray[np.float64]:
        """Return the constant array (the generator is not advanced)."""
        return np.full(size, self.value, dtype=float)

    def harmonic_mean(self) -> float:
        return self.value

    def lower_bound(self) -> float:
        return self.value

    def upper_bound(self) -> float:
        return self.value


ConductanceModel = Annotated[
    Union[TailModel, EllipticModel, ConstantModel], Field(discriminator="kind")
]


@dataclass(frozen=True)
class ConductanceField:
    """Edge weights of a box.

    ``weights[i]`` has shape ``box.halo_shape``; entry ``k`` holds the weight of
    the edge ``(z, z + e_i)`` with ``z = box.halo_lower + k``. The halo grid is
    exactly the set of cells covering alpha*G, so every edge with an endpoint
    in the box is present, plus the cell edges needed to evaluate the rescaled
    field on all of G.

    Attributes:
        box: The lattice box.
        weights: Array of shape ``(d, *halo_shape)``.
        seed: Seed the field was drawn with (None for deterministic fields).
        model: Serialized law (``model_dump()``) or None.
        source: "sample", "profile", "constant" or "file".
    """

    box: LatticeBox
    weights: NDArray[np.float64]
    seed: Optional[int] = None
    model: Optional[Dict[str, Any]] = None
    source: str = "sample"
    _cache: Dict[str, Any] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        expected = (self.box.d, *self.box.halo_shape)
        if self.weights.shape != expected:
            raise ValueError(f"weights shape {self.weights.shape} != {expected}")
        self.weights.setflags(write=False)

    def weight(self, z: Site, axis: int) -> float:
        """Weight a(z, e_axis) of the edge (z, z + e_axis)."""
        k = tuple(int(c) - lo for c, lo in zip(z, self.box.halo_lower))
        if any(c < 0 or c >= n for c, n in zip(k, self.box.halo_shape)):
            raise IndexError(f"edge ({tuple(z)}, +e{axis + 1}) is outside the stored halo")
        return float(self.weights[(axis, *k)])

    def conductance(self, x: Site, y: Site) -> float:
        """Symmetric conductance a_{xy} of nearest neighbours x, y."""
        diff = [b - a for a, b in zip(x, y)]
        if sum(abs(c) for c in diff) != 1:
            raise ValueError(f"{tuple(x)} and {tuple(y)} are not nearest neighbours")
        axis = next(i for i, c in enumerate(diff) if c != 0)
        return self.weight(x if diff[axis] > 0 else y, axis)

    def forward(self, axis: int) -> NDArray[np.float64]:
        """Weights of the edges (z, z + e_axis) for z in the box, on the box grid."""
        return self.weights[(axis, *[slice(1, None)] * self.box.d)]

    def backward(self, axis: int) -> NDArray[np.float64]:
        """Weights of the edges (z − e_axis, z) for z in the box, on the box grid."""
        index = [slice(1, None)] * self.box.d
        index[axis] = slice(0, -1)
        return self.weights[(axis, *index)]

    @property
    def edge_mask(self) -> NDArray[np.bool_]:
        """Boolean mask (same shape as weights) of edges with an endpoint in the box."""
        if "edge_mask" not in self._cache:
            self._cache["edge_mask"] = touching_mask(self.box)
        mask: NDArray[np.bool_] = self._cache["edge_mask"]
        return mask

    def touching_weights(self) -> NDArray[np.float64]:
        """Flat array of the weights of all edges with an endpoint in the box."""
        return self.weights[self.edge_mask]

    def holding_rates(self) -> NDArray[np.float64]:
        """π_z = Σ_{y∼z} a_{zy} for every site, out-of-box edges included."""
        rates = np.zeros(self.box.shape)
        for axis in range(self.box.d):
            rates += self.forward(axis) + self.backward(axis)
        return rates.ravel()

    def scaled(self, factor: float) -> "ConductanceField":
        """Field with every weight multiplied by ``factor``."""
        return ConductanceField(
            box=self.box,
            weights=self.weights * factor,
            seed=self.seed,
            model=self.model,
            source=self.source,
        )


def touching_mask(box: LatticeBox) -> NDArray[np.bool_]:
    """Mask of halo edge slots whose edge has at least one endpoint in the box."""
    inside = np.zeros(box.halo_shape, dtype=bool)
    inside[tuple([slice(1, None)] * box.d)] = True
    masks = []
    for axis in range(box.d):
        shifted = np.zeros_like(inside)
        # z + e_axis in box  <=>  inside at k + e_axis
        src = [slice(None)] * box.d
        dst = [slice(None)] * box.d
        src[axis] = slice(1, None)
        dst[axis] = slice(0, -1)
        shifted[tuple(dst)] = inside[tuple(src)]
        masks.append(inside | shifted)
    return np.stack(masks)


def constant_field(box: LatticeBox, value: float = 1.0) -> ConductanceField:
    """The deterministic field a ≡ value."""
    return ConductanceField(
        box=box,
        weights=np.full((box.d, *box.halo_shape), float(value)),
        model=ConstantModel(value=value).model_dump(),
        source="constant",
    )
