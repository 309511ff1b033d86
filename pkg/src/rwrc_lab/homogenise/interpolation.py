"""Kuhn-simplex interpolation of lattice functions and the energy identities.

The unit cell z + [0,1)^d is split into d! simplices, one per permutation σ
of the axes: the simplex T_σ contains the points whose fractional
coordinates satisfy x_{σ1} ≥ x_{σ2} ≥ ... ≥ x_{σd}. Its vertices are
z, z + e_{σ1}, z + e_{σ1} + e_{σ2}, ..., z + (1, ..., 1).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from numpy.typing import NDArray

from rwrc_lab.conductance.models import ConductanceField
from rwrc_lab.conductance.profiles import unscaled_profile
from rwrc_lab.exceptions import DomainError
from rwrc_lab.lattice import LatticeBox, floor_scaled
from rwrc_lab.quadrature import DEFAULT_ORDER, Profile, as_profile, cube_rule
from rwrc_lab.spectrum.operator import dirichlet_form

FloatArray = NDArray[np.float64]

_MAX_KUHN_DIM = 4


@dataclass(frozen=True)
class InterpolatedFunction:
    """Continuous piecewise-linear extension f(y) of α^{d/2}·v(⌊αy⌋).

    Attributes:
        v: Site vector on the box.
        box: Lattice box (its α is the scale).
    """

    v: FloatArray
    box: LatticeBox
    _padded: FloatArray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        values = np.asarray(self.v, dtype=float).ravel()
        if values.size != self.box.size:
            raise DomainError(f"v has {values.size} entries, box has {self.box.size} sites")
        object.__setattr__(self, "_padded", np.pad(self.box.to_grid(values), 1))

    @property
    def alpha(self) -> float:
        return self.box.alpha

    def _locate(self, y: FloatArray):
        pts = np.atleast_2d(np.asarray(y, dtype=float))
        x = self.alpha * pts
        corner = floor_scaled(pts, self.alpha)
        frac = np.clip(x - corner, 0.0, 1.0)
        # padded grid index of the cell corner
        offset = corner - np.asarray(self.box.halo_lower)
        valid = np.all((offset >= 0) & (offset < np.asarray(self.box.halo_shape)), axis=1)
        return pts, offset, frac, valid

    def _values_at(self, offset: NDArray[np.int64]) -> FloatArray:
        shape = np.asarray(self._padded.shape)
        ok = np.all((offset >= 0) & (offset < shape), axis=1)
        out = np.zeros(offset.shape[0])
        if np.any(ok):
            out[ok] = self._padded[tuple(offset[ok].T)]
        return out

    def _walk(self, offset: NDArray[np.int64], order: NDArray[np.int64]):
        """Vertex values V(v_0), ..., V(v_d) along the Kuhn path given by ``order``."""
        m, d = offset.shape
        values = [self._values_at(offset)]
        current = offset.copy()
        rows = np.arange(m)
        for k in range(d):
            current[rows, order[:, k]] += 1
            values.append(self._values_at(current))
        return np.stack(values, axis=1)

    def __call__(self, y: Union[FloatArray, list]) -> FloatArray:
        """Evaluate at one point ``(d,)`` or many points ``(m, d)``."""
        single = np.asarray(y).ndim == 1
        pts, offset, frac, valid = self._locate(y)
        out = np.zeros(pts.shape[0])
        if np.any(valid):
            f = frac[valid]
            order = np.argsort(-f, axis=1, kind="stable")
            sorted_frac = np.take_along_axis(f, order, axis=1)
            weights = np.concatenate(
                [
                    1.0 - sorted_frac[:, :1],
                    sorted_frac[:, :-1] - sorted_frac[:, 1:],
                    sorted_frac[:, -1:],
                ],
                axis=1,
            )
            vertex = self._walk(offset[valid], order)
            out[valid] = np.sum(weights * vertex, axis=1)
        out *= self.alpha ** (self.box.d / 2.0)
        return out[0] if single else out

    def gradient(self, y: Union[FloatArray, list]) -> FloatArray:
        """True gradient of the interpolant (constant on every Kuhn simplex)."""
        single = np.asarray(y).ndim == 1
        pts, offset, frac, valid = self._locate(y)
        d = self.box.d
        out = np.zeros((pts.shape[0], d))
        if np.any(valid):
            order = np.argsort(-frac[valid], axis=1, kind="stable")
            vertex = self._walk(offset[valid], order)
            steps = np.diff(vertex, axis=1)
            grad = np.zeros((order.shape[0], d))
            np.put_along_axis(grad, order, steps, axis=1)
            out[valid] = grad
        out *= self.alpha ** (1.0 + d / 2.0)
        return out[0] if single else out

    def forward_gradient(self, y: Union[FloatArray, list]) -> FloatArray:
        """Cellwise α^{1+d/2}(v(⌊αy⌋ + e_i) − v(⌊αy⌋)) per axis."""
        single = np.asarray(y).ndim == 1
        pts, offset, _, _ = self._locate(y)
        d = self.box.d
        base = self._values_at(offset)
        out = np.zeros((pts.shape[0], d))
        for axis in range(d):
            shifted = offset.copy()
            shifted[:, axis] += 1
            out[:, axis] = self._values_at(shifted) - base
        out *= self.alpha ** (1.0 + d / 2.0)
        return out[0] if single else out


def kuhn_interpolate(v: FloatArray, box: LatticeBox) -> InterpolatedFunction:
    """Interpolate a site vector on the Kuhn triangulation at the box's scale."""
    return InterpolatedFunction(v=np.asarray(v, dtype=float).ravel(), box=box)


@dataclass(frozen=True)
class EnergyMatch:
    """Discrete energy α²⟨−Δ^{φ_t}v, v⟩ against the continuum energy of the interpolant.

    Attributes:
        discrete: α²·Σ_{z,e} φ_t(z,e)(v(z+e) − v(z))².
        continuum: Σ_i ∫ φ(y,e_i)(∂_i f)² dy with the cellwise forward gradient.
        kuhn: The same integral with the true simplex gradients (diagnostic).
    """

    discrete: float
    continuum: float
    kuhn: Optional[float]

    @property
    def residual(self) -> float:
        scale = max(abs(self.discrete), abs(self.continuum))
        return abs(self.discrete - self.continuum) / scale if scale > 0 else 0.0


def energy_match_check(
    v: FloatArray,
    phi: Union[float, Profile],
    box: LatticeBox,
    order: int = DEFAULT_ORDER,
) -> EnergyMatch:
    """Compare −α²(Δ^{φ_t}v, v) with I^c_φ of the interpolant.

    The continuum side integrates φ over every cell carrying the interpolant
    and multiplies by the squared forward gradient read off the interpolant
    at the cell centre. Both sides agree up to rounding.
    """
    profile = as_profile(phi)
    phi_t = unscaled_profile(profile, box, order)
    discrete = box.alpha**2 * dirichlet_form(phi_t, box, v)

    interp = kuhn_interpolate(v, box)
    cells = box.halo_cells.astype(float)
    centres = (cells + 0.5) / box.alpha
    grads = interp.forward_gradient(centres)
    nodes, weights = cube_rule(box.d, order)
    points = ((cells[:, None, :] + nodes[None, :, :]) / box.alpha).reshape(-1, box.d)
    volume = box.alpha ** (-box.d)
    continuum = 0.0
    for axis in range(box.d):
        phi_cell = np.asarray(profile(points, axis), dtype=float).reshape(cells.shape[0], -1) @ weights
        continuum += float(np.sum(volume * phi_cell * grads[:, axis] ** 2))

    kuhn = None
    if box.d <= _MAX_KUHN_DIM:
        kuhn = _kuhn_energy(interp, phi_t)
    return EnergyMatch(discrete=float(discrete), continuum=continuum, kuhn=kuhn)


def _kuhn_energy(interp: InterpolatedFunction, phi_t: ConductanceField) -> float:
    """Σ_cells Σ_σ |T_σ| Σ_k φ_t(z, e_{σk}) (∂_{σk} f)² with φ_t constant per cell."""
    box = interp.box
    d = box.d
    offset = box.halo_cells - np.asarray(box.halo_lower)
    m = offset.shape[0]
    volume = box.alpha ** (-d) / math.factorial(d)
    scale = box.alpha ** (2.0 + d)
    total = 0.0
    for perm in itertools.permutations(range(d)):
        order = np.tile(np.asarray(perm), (m, 1))
        steps = np.diff(interp._walk(offset, order), axis=1)
        for k, axis in enumerate(perm):
            total += float(np.sum(phi_t.weights[axis].ravel() * steps[:, k] ** 2))
    return total * volume * scale


@dataclass(frozen=True)
class InterpolationResidual:
    """‖Σ_i g_i(α·)‖₂² against m^{−1}Σ φ_t(z,e)(v(z+e) − v(z))²."""

    lhs: float
    bound: float
    energy: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.bound * (1.0 + 1e-12) + 1e-300

    @property
    def margin(self) -> float:
        return self.bound - self.lhs

    @property
    def relative(self) -> float:
        """lhs divided by the rescaled energy α²Σφ_t(Δv)²."""
        return self.lhs / self.energy if self.energy > 0 else 0.0


def interpolation_residual(
    v: FloatArray,
    field: ConductanceField,
    box: Optional[LatticeBox] = None,
    m: Optional[float] = None,
) -> InterpolationResidual:
    """Exact L² norm of the correction between the Kuhn interpolant and the step function.

    In lattice units the correction on T_σ is the linear function with vertex
    values L_k = V(v_k) − V(z); its squared integral is
    |T|·(Σ L_k² + (Σ L_k)²)/((d+1)(d+2)) with |T| = 1/d!.

    Raises:
        DomainError: If m exceeds the smallest touching conductance.
    """
    box = box or field.box
    floor = float(field.touching_weights().min())
    m = floor if m is None else float(m)
    if not 0 < m <= floor * (1.0 + 1e-12):
        raise DomainError(f"m must lie in (0, min phi_t = {floor}], got {m}")
    d = box.d
    if d > _MAX_KUHN_DIM:
        raise DomainError(f"interpolation_residual supports d <= {_MAX_KUHN_DIM}, got {d}")

    interp = kuhn_interpolate(v, box)
    offset = box.halo_cells - np.asarray(box.halo_lower)
    n = offset.shape[0]
    total = 0.0
    for perm in itertools.permutations(range(d)):
        vertex = interp._walk(offset, np.tile(np.asarray(perm), (n, 1)))
        lifts = vertex - vertex[:, :1]
        total += float(np.sum(np.sum(lifts**2, axis=1) + np.sum(lifts, axis=1) ** 2))
    lhs = total / (math.factorial(d) * (d + 1) * (d + 2))
    form = dirichlet_form(field, box, v)
    return InterpolationResidual(lhs=lhs, bound=form / m, energy=box.alpha**2 * form)
