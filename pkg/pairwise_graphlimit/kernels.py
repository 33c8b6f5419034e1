"""
kernels module - Model constants, influence kernels and sign maps

The influence a(x) = a(|x|)·x drives the opinions; the sign map s carries the weak
singularity of the weight equation. Both act on arrays whose last axis holds the
d components of a vector, so the same evaluators serve single vectors, particle
arrays and batched pair-difference tensors.

This module is licensed under the MIT License.
"""

import math
from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray

from pairwise_graphlimit.errors import ContractError, DomainError

FloatArray = NDArray[np.float64]
RadialProfile = Callable[[FloatArray], FloatArray]


class KernelKind(Enum):
    """Available influence kernels."""

    LINEAR = "linear"
    SATURATING = "saturating"
    CUSTOM_RADIAL = "custom-radial"


class SignKind(Enum):
    """
    Available sign maps.

    - SIGN: sign function in d=1, projection on the unit sphere in d>1
    - SMOOTH: Lipschitz odd variant tanh(|x|/width)·x/|x|
    """

    SIGN = "sign"
    SMOOTH = "smooth"


@dataclass(frozen=True)
class ModelParams:
    """
    Constants of the model hypotheses.

    Attributes:
        dim: Dimension d of the opinion space
        lip_a: Lipschitz constant L of the influence
        sign_bound: Sup bound S_inf of |s|
        sign_lip: One-sided Lipschitz constant S of s away from the origin
        mass_bound: M with initial masses in [1/M, M]
        pos_bound: X with |x0| <= X
        horizon: Final time T
    """

    dim: int
    lip_a: float
    sign_bound: float
    sign_lip: float
    mass_bound: float
    pos_bound: float
    horizon: float

    def __post_init__(self) -> None:
        if self.dim < 1:
            msg = f"dim must be >= 1, got {self.dim}"
            raise ContractError(msg)
        for name in ("lip_a", "sign_bound", "sign_lip", "mass_bound", "pos_bound", "horizon"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                msg = f"{name} must be a positive finite number, got {value}"
                raise ContractError(msg)
        if self.mass_bound <= 1:
            msg = f"mass_bound must exceed 1, got {self.mass_bound}"
            raise ContractError(msg)

    @classmethod
    def for_initial(
        cls,
        positions: FloatArray,
        masses: FloatArray,
        kernel: "InfluenceKernel",
        sign: "SignMap",
        horizon: float,
    ) -> "ModelParams":
        """The tightest constants admitted by given initial arrays (X and M slightly padded)."""
        radius = float(np.max(np.linalg.norm(positions, axis=-1)))
        spread = max(float(np.max(masses)), 1.0 / float(np.min(masses)))
        return cls(
            dim=int(positions.shape[-1]),
            lip_a=kernel.lipschitz,
            sign_bound=sign.bound,
            sign_lip=sign.lipschitz_constant,
            mass_bound=max(spread * (1.0 + 1e-12), 1.0 + 1e-12),
            pos_bound=max(radius * (1.0 + 1e-12), 1e-12),
            horizon=horizon,
        )

    @property
    def opinion_bound(self) -> float:
        """X·e^{2LT}, the uniform bound on |x_i(t)|."""
        return self.pos_bound * math.exp(2.0 * self.lip_a * self.horizon)

    @property
    def weight_rate(self) -> float:
        """Conservative log-rate 2·L·S_inf·X·e^{2LT} of the weight envelopes."""
        return 2.0 * self.lip_a * self.sign_bound * self.opinion_bound

    @property
    def weight_rate_unscaled(self) -> float:
        """Log-rate 2·X·e^{2LT} without the L·S_inf factor, reported alongside the conservative one."""
        return 2.0 * self.opinion_bound


class InfluenceKernel:
    """
    Radial influence a(x) = a(|x|)·x.

    Use the factory class methods rather than the constructor:

        >>> InfluenceKernel.linear()
        >>> InfluenceKernel.saturating()
        >>> InfluenceKernel.custom(lambda r: np.exp(-r), lipschitz=1.0)
    """

    def __init__(self, kind: KernelKind, profile: RadialProfile, lipschitz: float) -> None:
        if not (math.isfinite(lipschitz) and lipschitz >= 0):
            msg = f"lipschitz must be a non-negative finite number, got {lipschitz}"
            raise ContractError(msg)
        self.kind = kind
        self.profile = profile
        self.lipschitz = float(lipschitz)

    @classmethod
    def linear(cls) -> "InfluenceKernel":
        """a(x) = x, L = 1."""
        return cls(KernelKind.LINEAR, np.ones_like, 1.0)

    @classmethod
    def saturating(cls) -> "InfluenceKernel":
        """a(x) = x / (1 + |x|^2), L = 1."""
        return cls(KernelKind.SATURATING, lambda r: 1.0 / (1.0 + r * r), 1.0)

    @classmethod
    def custom(cls, profile: RadialProfile, lipschitz: float) -> "InfluenceKernel":
        """
        Kernel with a user supplied radial profile a(r).

        Args:
            profile: Vectorised map r -> a(r) on non-negative radii
            lipschitz: Declared Lipschitz constant of x -> a(|x|)·x
        """
        return cls(KernelKind.CUSTOM_RADIAL, profile, lipschitz)

    @classmethod
    def from_kind(cls, kind: KernelKind | str) -> "InfluenceKernel":
        """Build one of the library kernels by name."""
        kind = KernelKind(kind)
        if kind == KernelKind.LINEAR:
            return cls.linear()
        if kind == KernelKind.SATURATING:
            return cls.saturating()
        msg = "custom-radial kernels need a profile; use InfluenceKernel.custom"
        raise ContractError(msg)

    def evaluate(self, v: FloatArray) -> FloatArray:
        """Apply the kernel along the last axis of v (no input validation)."""
        radii = np.sqrt(np.sum(v * v, axis=-1, keepdims=True))
        return self.profile(radii) * v

    def check_lipschitz(self, dim: int, rng: np.random.Generator, samples: int = 2000, scale: float = 5.0) -> bool:
        """
        Probabilistic check of a(0) = 0 and |a(u) - a(v)| <= L·|u - v| on random pairs.

        Returns:
            True if no sampled pair violates the declared constant
        """
        origin = self.evaluate(np.zeros((1, dim)))
        if np.any(origin != 0.0):
            return False
        u = rng.uniform(-scale, scale, size=(samples, dim))
        v = rng.uniform(-scale, scale, size=(samples, dim))
        lhs = np.linalg.norm(self.evaluate(u) - self.evaluate(v), axis=-1)
        rhs = self.lipschitz * np.linalg.norm(u - v, axis=-1)
        return bool(np.all(lhs <= rhs * (1.0 + 1e-12) + 1e-15))

    def __repr__(self) -> str:
        return f"InfluenceKernel(kind={self.kind.value}, lipschitz={self.lipschitz})"


class SignMap:
    """
    Odd, bounded sign map s: R^d -> R^d with s(0) = 0.

    Kind SIGN is x/|x| (the sign function when d=1); kind SMOOTH multiplies it by
    tanh(|x|/width), which makes it globally Lipschitz with constant 1/width.
    """

    def __init__(self, dim: int, kind: SignKind | str = SignKind.SIGN, width: float = 0.1) -> None:
        if dim < 1:
            msg = f"dim must be >= 1, got {dim}"
            raise ContractError(msg)
        self.dim = dim
        self.kind = SignKind(kind)
        if self.kind == SignKind.SMOOTH and not (math.isfinite(width) and width > 0):
            msg = f"smooth sign width must be positive, got {width}"
            raise ContractError(msg)
        self.width = float(width)

    @property
    def bound(self) -> float:
        """S_inf."""
        return 1.0

    @property
    def lipschitz_constant(self) -> float:
        """
        Regularity constant S of the map.

        SMOOTH: global Lipschitz constant 1/width. SIGN in d=1: nominal 1.0 (the sign
        function is constant on each half-line). SIGN in d>1: the coefficient c of the
        locally integrable bound |s(x1) - s(x2)| <= (c/|x2|)·|x1 - x2|, which is 2.
        """
        if self.kind == SignKind.SMOOTH:
            return 1.0 / self.width
        return 1.0 if self.dim == 1 else 2.0

    def evaluate(self, v: FloatArray) -> FloatArray:
        """Apply the sign map along the last axis of v (no input validation)."""
        radii = np.sqrt(np.sum(v * v, axis=-1, keepdims=True))
        out = np.zeros_like(v)
        np.divide(v, radii, out=out, where=radii > 0)
        if self.kind == SignKind.SMOOTH:
            out *= np.tanh(radii / self.width)
        return out

    def check_odd(self, rng: np.random.Generator, samples: int = 2000, scale: float = 5.0) -> bool:
        """Probabilistic check of oddness, s(0) = 0 and |s| <= S_inf."""
        v = rng.uniform(-scale, scale, size=(samples, self.dim))
        values = self.evaluate(v)
        odd = np.array_equal(self.evaluate(-v), -values)
        bounded = bool(np.all(np.linalg.norm(values, axis=-1) <= self.bound + 1e-12))
        origin = bool(np.all(self.evaluate(np.zeros((1, self.dim))) == 0.0))
        return odd and bounded and origin

    def __repr__(self) -> str:
        return f"SignMap(dim={self.dim}, kind={self.kind.value})"


def _as_vector(v: ArrayLike) -> FloatArray:
    vector = np.atleast_1d(np.asarray(v, dtype=np.float64))
    if vector.ndim != 1:
        msg = f"expected a single vector, got shape {vector.shape}"
        raise ContractError(msg)
    return vector


def eval_influence(kernel: InfluenceKernel, v: ArrayLike) -> FloatArray:
    """
    Evaluate a(v) for a single vector.

    Args:
        kernel: Influence kernel
        v: Vector in R^d (a scalar is read as d=1)

    Returns:
        a(v); exactly zero at the origin

    Raises:
        DomainError: If v has non-finite components

    Examples:
        >>> eval_influence(InfluenceKernel.linear(), [2.0])            # array([2.])
        >>> eval_influence(InfluenceKernel.saturating(), [3.0, 4.0])   # array([3/26, 4/26])
    """
    vector = _as_vector(v)
    if not np.all(np.isfinite(vector)):
        msg = f"influence argument must be finite, got {vector}"
        raise DomainError(msg)
    return kernel.evaluate(vector)


def eval_sign(sign: SignMap, v: ArrayLike) -> FloatArray:
    """
    Evaluate s(v) for a single vector.

    Examples:
        >>> eval_sign(SignMap(1), [-2.0])       # array([-1.])
        >>> eval_sign(SignMap(2), [3.0, 4.0])   # array([0.6, 0.8])
        >>> eval_sign(SignMap(2), [0.0, 0.0])   # array([0., 0.])
    """
    return sign.evaluate(_as_vector(v))
