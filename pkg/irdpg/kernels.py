"""
irdpg/kernels.py

Latent domains, latent-position distributions and link-probability kernels,
together with their spectral representations: closed-form eigenvalues,
truncated feature maps and Nystrom surrogates of the Mercer map.
"""

from __future__ import annotations
import ast
import logging
import math
from typing import Callable, Dict, Literal, Optional, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.special
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.spatial.distance import cdist
from scipy.stats import norm, truncnorm

logger = logging.getLogger(__name__)

DomainKind = Literal["interval_symmetric", "interval_positive", "circle", "square", "sphere2"]
Distribution = Literal["truncated_gaussian", "gaussian", "uniform"]
KernelKind = Literal["gaussian_rbf", "circle_heat", "logistic", "graphon_constant"]

EXAMPLE_IDS = ("Ex1", "Ex2", "Ex3", "Ex4", "Logistic", "Square2D", "Graphon")

DEFAULT_SCALE_RULES: Dict[str, str] = {
    "Ex1": "n/2000",
    "Ex2": "n/2000",
    "Ex3": "n/10",
    "Ex4": "sqrt(n)/10",
    "Logistic": "3",
    "Square2D": "10",
    "Graphon": "1/n",
}

_AMBIENT_DIM = {
    "interval_symmetric": 1,
    "interval_positive": 1,
    "circle": 2,
    "square": 2,
    "sphere2": 3,
}

_INTRINSIC_DIM = {
    "interval_symmetric": 1,
    "interval_positive": 1,
    "circle": 1,
    "square": 2,
    "sphere2": 2,
}


# -------------------------------------------------------
# Domain types
# -------------------------------------------------------

class LatentModel(BaseModel):
    """
    A latent domain Z_n with its sampling distribution G_n.

    `scale` is sigma_n (Example 1), the radius r_n (circle, sphere), the
    length a_n (interval [0, a]) or the half-width a (square, logistic interval).
    """

    model_config = ConfigDict(frozen=True)

    domain_kind: DomainKind
    distribution: Distribution
    scale: float
    truncation: Optional[float] = None
    example_id: Optional[str] = None

    @model_validator(mode="after")
    def _check(self) -> "LatentModel":
        if not self.scale > 0 or not math.isfinite(self.scale):
            raise ValueError(f"scale must be a positive real, got {self.scale}")
        if self.distribution == "truncated_gaussian":
            if self.truncation is None or not self.truncation > 0:
                raise ValueError("truncated_gaussian requires a positive truncation")
            if self.example_id == "Ex1" and self.truncation != self.scale ** 2:
                raise ValueError("Example 1 requires truncation == scale**2")
        if self.distribution in ("truncated_gaussian", "gaussian") and self.domain_kind != "interval_symmetric":
            raise ValueError(f"{self.distribution} is only defined on interval_symmetric domains")
        return self

    @property
    def dim(self) -> int:
        return _INTRINSIC_DIM[self.domain_kind]

    @property
    def ambient_dim(self) -> int:
        return _AMBIENT_DIM[self.domain_kind]

    @property
    def bounds(self) -> Tuple[float, float]:
        """Support of the intrinsic coordinate for 1-D domains (angle for the circle)."""
        if self.domain_kind == "interval_symmetric":
            if self.distribution == "gaussian":
                return (-math.inf, math.inf)
            half = self.truncation if self.distribution == "truncated_gaussian" else self.scale
            return (-half, half)
        if self.domain_kind == "interval_positive":
            return (0.0, self.scale)
        if self.domain_kind == "circle":
            return (0.0, 2.0 * math.pi)
        raise ValueError(f"{self.domain_kind} has no 1-D intrinsic coordinate")

    @property
    def volume(self) -> float:
        """Intrinsic volume v_n (length or area) of the domain."""
        if self.domain_kind in ("interval_symmetric", "interval_positive"):
            lo, hi = self.bounds
            return hi - lo
        if self.domain_kind == "circle":
            return 2.0 * math.pi * self.scale
        if self.domain_kind == "square":
            return (2.0 * self.scale) ** 2
        return 4.0 * math.pi * self.scale ** 2

    @property
    def diameter(self) -> float:
        """Largest intrinsic distance between two points of the domain."""
        if self.domain_kind in ("circle", "sphere2"):
            return math.pi * self.scale
        if self.domain_kind == "square":
            return 2.0 * math.sqrt(2.0) * self.scale
        return self.volume

    def intrinsic_coordinates(self, positions: np.ndarray) -> np.ndarray:
        """Map ambient latent positions to intrinsic coordinates (angle on the circle)."""
        positions = np.asarray(positions, dtype=float)
        if self.domain_kind == "circle":
            return np.mod(np.arctan2(positions[:, 1], positions[:, 0]), 2.0 * math.pi)
        if self.ambient_dim == 1:
            return positions[:, 0]
        return positions

    def distances(self, positions: np.ndarray, center: np.ndarray) -> np.ndarray:
        """Intrinsic distance from each position to `center`: geodesic on curved domains."""
        positions = np.asarray(positions, dtype=float)
        center = np.asarray(center, dtype=float).reshape(1, -1)
        if self.domain_kind in ("circle", "sphere2"):
            cos = (positions @ center.T)[:, 0] / self.scale ** 2
            return self.scale * np.arccos(np.clip(cos, -1.0, 1.0))
        return cdist(positions, center)[:, 0]


class ClosedFormSpectrum(BaseModel):
    """Eigenvalues gamma_k = gamma_1 * ratio**(k-1) of the Gaussian RBF operator under N(0, sigma^2)."""

    model_config = ConfigDict(frozen=True)

    sigma: float
    gamma1: float
    ratio: float
    sum_cubes: float

    @model_validator(mode="after")
    def _check(self) -> "ClosedFormSpectrum":
        if not 0.0 < self.ratio < 1.0:
            raise ValueError(f"geometric ratio must lie in (0, 1), got {self.ratio}")
        return self

    @classmethod
    def from_sigma(cls, sigma: float) -> "ClosedFormSpectrum":
        if not sigma > 0:
            raise ValueError(f"sigma must be positive, got {sigma}")
        denom = 1.0 + 2.0 * sigma ** 2 + math.sqrt(1.0 + 4.0 * sigma ** 2)
        gamma1 = math.sqrt(2.0 / denom)
        ratio = 2.0 * sigma ** 2 / denom
        return cls(sigma=sigma, gamma1=gamma1, ratio=ratio, sum_cubes=gamma1 ** 3 / (1.0 - ratio ** 3))

    def gamma(self, k: Union[int, np.ndarray]) -> Union[float, np.ndarray]:
        """gamma_k for k >= 1 (scalar or array of indices)."""
        return self.gamma1 * np.power(self.ratio, np.asarray(k) - 1)


class KernelModel(BaseModel):
    """A symmetric link-probability kernel f on Z_n x Z_n."""

    model_config = ConfigDict(frozen=True)

    kind: KernelKind
    level: float = 1.0
    spectrum: Optional[ClosedFormSpectrum] = None

    @model_validator(mode="after")
    def _check(self) -> "KernelModel":
        if self.kind == "graphon_constant" and not 0.0 <= self.level <= 1.0:
            raise ValueError(f"graphon level must lie in [0, 1], got {self.level}")
        return self

    def gram(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """
        Kernel matrix between two point sets.

        Args:
            x: (m, d) latent points; a 1-D array is read as m points of dimension 1.
            y: (k, d) latent points.

        Returns:
            (m, k) matrix of link probabilities f(x_i, y_j).
        """
        x = _as_points(x)
        y = _as_points(y)
        if self.kind in ("gaussian_rbf", "circle_heat"):
            return np.exp(-0.5 * cdist(x, y, "sqeuclidean"))
        if self.kind == "logistic":
            return scipy.special.expit(x @ y.T)
        return np.full((x.shape[0], y.shape[0]), self.level)

    def evaluate(self, x, y) -> float:
        """f(x, y) for two single latent points."""
        return float(self.gram(np.reshape(np.asarray(x, dtype=float), (1, -1)),
                               np.reshape(np.asarray(y, dtype=float), (1, -1)))[0, 0])

    def paired(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """f(x_i, y_i) row by row for two equally long point sets."""
        x = _as_points(x)
        y = _as_points(y)
        if self.kind in ("gaussian_rbf", "circle_heat"):
            return np.exp(-0.5 * np.sum((x - y) ** 2, axis=1))
        if self.kind == "logistic":
            return scipy.special.expit(np.einsum("ij,ij->i", x, y))
        return np.full(x.shape[0], self.level)

    def diagonal(self, x: np.ndarray) -> np.ndarray:
        """f(x_i, x_i) for each point."""
        x = _as_points(x)
        if self.kind in ("gaussian_rbf", "circle_heat"):
            return np.ones(x.shape[0])
        if self.kind == "logistic":
            return scipy.special.expit(np.einsum("ij,ij->i", x, x))
        return np.full(x.shape[0], self.level)


class FeatureMap(BaseModel):
    """
    A truncated Mercer feature map: latent point -> first K coordinates of phi_n.
    `residual` is the operator tail mass sum_{k>K} gamma_k when it is known.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kernel: KernelModel
    latent: LatentModel
    trunc_dim: int
    eigenvalues: np.ndarray
    residual: Optional[float] = None
    method: Literal["closed_form", "nystrom"]
    transform: Callable[[np.ndarray], np.ndarray]

    def coordinates(self, points: np.ndarray) -> np.ndarray:
        return self.transform(_as_points(points))

    def gram(self, x: np.ndarray, y: Optional[np.ndarray] = None) -> np.ndarray:
        fx = self.coordinates(x)
        fy = fx if y is None else self.coordinates(y)
        return fx @ fy.T


def _as_points(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        return arr.reshape(1, 1)
    if arr.ndim == 1:
        return arr.reshape(-1, 1)
    return arr


# -------------------------------------------------------
# Scale rules
# -------------------------------------------------------

_ALLOWED_CALLS: Dict[str, Callable[[float], float]] = {
    "sqrt": math.sqrt,
    "log": math.log,
    "exp": math.exp,
}


def evaluate_scale_rule(rule: Union[str, float, int], n: int) -> float:
    """
    Evaluate a scale rule such as "n/2000" or "sqrt(n)/10" at node count n.

    Only arithmetic over `n`, numeric literals and sqrt/log/exp are accepted.
    """
    if isinstance(rule, (int, float)):
        return float(rule)
    try:
        tree = ast.parse(str(rule).strip(), mode="eval")
    except SyntaxError as e:
        raise ValueError(f"Invalid scale rule '{rule}': {e}")

    def _eval(node: ast.AST) -> float:
        if isinstance(node, ast.Expression):
            return _eval(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "n":
            return float(n)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            value = _eval(node.operand)
            return -value if isinstance(node.op, ast.USub) else value
        if isinstance(node, ast.BinOp):
            left, right = _eval(node.left), _eval(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                return left / right
            if isinstance(node.op, ast.Pow):
                return left ** right
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _ALLOWED_CALLS and len(node.args) == 1 and not node.keywords):
            return _ALLOWED_CALLS[node.func.id](_eval(node.args[0]))
        raise ValueError(f"Unsupported element in scale rule '{rule}': {ast.dump(node)}")

    try:
        return float(_eval(tree))
    except (ZeroDivisionError, OverflowError) as e:
        raise ValueError(f"Scale rule '{rule}' cannot be evaluated at n={n}: {e}")


# -------------------------------------------------------
# Model registry
# -------------------------------------------------------

def make_model(example_id: str, n: int, scale_rule: Union[str, float, None] = None) -> Tuple[LatentModel, KernelModel]:
    """
    Build the (latent model, kernel) pair of a named example.

    Args:
        example_id: one of Ex1, Ex2, Ex3, Ex4, Logistic, Square2D, Graphon.
        n: node count (>= 3); scale rules are evaluated at this n.
        scale_rule: expression over n; defaults to DEFAULT_SCALE_RULES[example_id].
            For Graphon the rule gives the sparsity factor rho_n.

    Returns:
        (LatentModel, KernelModel)

    Raises:
        ValueError: unknown example id, n < 3 or non-positive scale.
    """
    if example_id not in EXAMPLE_IDS:
        raise ValueError(f"Unknown example id '{example_id}'. Expected one of {EXAMPLE_IDS}")
    if n < 3:
        raise ValueError(f"n must be at least 3, got {n}")
    rule = DEFAULT_SCALE_RULES[example_id] if scale_rule is None else scale_rule
    scale = evaluate_scale_rule(rule, n)
    if not scale > 0:
        raise ValueError(f"Scale rule '{rule}' gives non-positive scale {scale} at n={n}")

    if example_id == "Ex1":
        latent = LatentModel(domain_kind="interval_symmetric", distribution="truncated_gaussian",
                             scale=scale, truncation=scale ** 2, example_id=example_id)
        kernel = KernelModel(kind="gaussian_rbf", spectrum=ClosedFormSpectrum.from_sigma(scale))
    elif example_id == "Ex2":
        latent = LatentModel(domain_kind="circle", distribution="uniform", scale=scale, example_id=example_id)
        kernel = KernelModel(kind="circle_heat")
    elif example_id == "Ex3":
        latent = LatentModel(domain_kind="interval_positive", distribution="uniform", scale=scale,
                             example_id=example_id)
        kernel = KernelModel(kind="gaussian_rbf")
    elif example_id == "Ex4":
        latent = LatentModel(domain_kind="sphere2", distribution="uniform", scale=scale, example_id=example_id)
        kernel = KernelModel(kind="gaussian_rbf")
    elif example_id == "Logistic":
        latent = LatentModel(domain_kind="interval_symmetric", distribution="uniform", scale=scale,
                             example_id=example_id)
        kernel = KernelModel(kind="logistic")
    elif example_id == "Square2D":
        latent = LatentModel(domain_kind="square", distribution="uniform", scale=scale, example_id=example_id)
        kernel = KernelModel(kind="gaussian_rbf")
    else:
        if scale > 1:
            raise ValueError(f"Graphon sparsity factor must be at most 1, got {scale}")
        latent = LatentModel(domain_kind="interval_positive", distribution="uniform", scale=1.0,
                             example_id=example_id)
        kernel = KernelModel(kind="graphon_constant", level=scale)

    logger.info("Built model %s at n=%d (scale=%.6g, volume=%.6g)", example_id, n, scale, latent.volume)
    return latent, kernel


def untruncated_reference(sigma: float) -> Tuple[LatentModel, KernelModel]:
    """Gaussian RBF under the untruncated N(0, sigma^2), the reference of the closed forms."""
    latent = LatentModel(domain_kind="interval_symmetric", distribution="gaussian", scale=sigma)
    return latent, KernelModel(kind="gaussian_rbf", spectrum=ClosedFormSpectrum.from_sigma(sigma))


# -------------------------------------------------------
# Spectra and feature maps
# -------------------------------------------------------

def rbf_eigenvalues(sigma: float, K: int) -> np.ndarray:
    """First K operator eigenvalues of exp(-|x-y|^2/2) under N(0, sigma^2), decreasing."""
    if K < 1:
        raise ValueError(f"K must be at least 1, got {K}")
    spectrum = ClosedFormSpectrum.from_sigma(sigma)
    return spectrum.gamma(np.arange(1, K + 1))


def circle_eigenvalues(r: float, modes: int) -> np.ndarray:
    """e^{-r^2} I_m(r^2) for m = 0..modes: the operator eigenvalue of Fourier mode m on the circle."""
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    return scipy.special.ive(np.arange(modes + 1), r ** 2)


def circle_feature_map(r: float, K: int) -> FeatureMap:
    """
    Closed-form truncated feature map of the circle kernel exp(-|x-y|^2/2) on S^1(r).

    Coordinates are e^{-r^2/2} (sqrt(I_0), sqrt(2 I_1) cos t, sqrt(2 I_1) sin t, ...),
    all Bessel functions evaluated at r^2, using the exponentially scaled `ive`.
    """
    if K < 3 or K % 2 == 0:
        raise ValueError(f"K must be odd and at least 3, got {K}")
    modes = (K - 1) // 2
    lam = circle_eigenvalues(r, modes)
    weights = np.sqrt(np.concatenate([[lam[0]], 2.0 * lam[1:]]))
    eigenvalues = np.concatenate([[lam[0]], np.repeat(lam[1:], 2)])
    orders = np.arange(1, modes + 1)

    def _transform(points: np.ndarray) -> np.ndarray:
        theta = np.arctan2(points[:, 1], points[:, 0])
        out = np.empty((points.shape[0], K))
        out[:, 0] = weights[0]
        out[:, 1::2] = weights[1:] * np.cos(np.outer(theta, orders))
        out[:, 2::2] = weights[1:] * np.sin(np.outer(theta, orders))
        return out

    latent = LatentModel(domain_kind="circle", distribution="uniform", scale=r)
    return FeatureMap(
        kernel=KernelModel(kind="circle_heat"),
        latent=latent,
        trunc_dim=K,
        eigenvalues=eigenvalues,
        residual=max(1.0 - float(eigenvalues.sum()), 0.0),
        method="closed_form",
        transform=_transform,
    )


def equal_mass_grid(latent: LatentModel, m: int) -> np.ndarray:
    """
    Deterministic grid of (about) m points carrying equal probability under G_n.

    Quantile midpoints for 1-D distributions, uniform angles on the circle, a tensor
    grid on the square (rounded to a perfect square) and a Fibonacci lattice on the sphere.
    """
    if m < 1:
        raise ValueError(f"grid size must be positive, got {m}")
    u = (np.arange(m) + 0.5) / m
    kind = latent.domain_kind
    if kind == "interval_symmetric":
        if latent.distribution == "truncated_gaussian":
            bound = latent.truncation / latent.scale
            x = truncnorm.ppf(u, -bound, bound, scale=latent.scale)
        elif latent.distribution == "gaussian":
            x = norm.ppf(u) * latent.scale
        else:
            x = -latent.scale + 2.0 * latent.scale * u
        return x.reshape(-1, 1)
    if kind == "interval_positive":
        return (latent.scale * u).reshape(-1, 1)
    if kind == "circle":
        theta = 2.0 * math.pi * u
        return latent.scale * np.column_stack([np.cos(theta), np.sin(theta)])
    if kind == "square":
        side = max(int(round(math.sqrt(m))), 1)
        if side * side != m:
            logger.info("Square grid rounded from %d to %d points", m, side * side)
        axis = -latent.scale + 2.0 * latent.scale * (np.arange(side) + 0.5) / side
        gx, gy = np.meshgrid(axis, axis, indexing="ij")
        return np.column_stack([gx.ravel(), gy.ravel()])
    z = 1.0 - 2.0 * u
    phi = math.pi * (1.0 + math.sqrt(5.0)) * np.arange(m)
    ring = np.sqrt(np.clip(1.0 - z ** 2, 0.0, None))
    return latent.scale * np.column_stack([ring * np.cos(phi), ring * np.sin(phi), z])


def nystrom_features(latent: LatentModel, kernel: KernelModel, grid_size: int, K: int,
                     eig_floor: float = 1e-12) -> FeatureMap:
    """
    Nystrom surrogate of the Mercer feature map.

    Builds the m x m Gram matrix on an equal-mass grid with weights 1/m,
    eigendecomposes it and extends the top-K eigenvectors out of sample:
    phi_k(x) = f(x, grid) v_k / sqrt(m lambda_k).

    Raises:
        ValueError: if not grid_size >= K >= 1.
        RuntimeError: if the Gram eigensolve fails.
    """
    if not grid_size >= K >= 1:
        raise ValueError(f"Require grid_size >= K >= 1, got grid_size={grid_size}, K={K}")
    grid = equal_mass_grid(latent, grid_size)
    m = grid.shape[0]
    if K > m:
        raise ValueError(f"K={K} exceeds the {m}-point grid")
    weighted = kernel.gram(grid, grid) / m
    try:
        values, vectors = scipy.linalg.eigh(weighted)
    except (scipy.linalg.LinAlgError, ValueError) as e:
        raise RuntimeError(f"Gram matrix eigensolve failed for {kernel.kind} on a {m}-point grid: {e}")
    order = np.argsort(values)[::-1]
    values, vectors = values[order], vectors[:, order]

    keep = values[:K] > eig_floor * max(values[0], 0.0)
    if not keep.all():
        logger.warning("Nystrom map keeps %d of %d requested coordinates above the eigenvalue floor",
                       int(keep.sum()), K)
    top_values = values[:K][keep]
    top_vectors = vectors[:, :K][:, keep]
    scale = 1.0 / np.sqrt(m * top_values)

    def _transform(points: np.ndarray) -> np.ndarray:
        return (kernel.gram(points, grid) @ top_vectors) * scale

    trace = float(np.trace(weighted))
    return FeatureMap(
        kernel=kernel,
        latent=latent,
        trunc_dim=int(top_values.size),
        eigenvalues=top_values,
        residual=max(trace - float(top_values.sum()), 0.0),
        method="nystrom",
        transform=_transform,
    )


# -------------------------------------------------------
# Non-distortion checks
# -------------------------------------------------------

def latent_path_length(polyline: np.ndarray) -> float:
    """Euclidean length of a polyline in latent space."""
    pts = _as_points(polyline)
    return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())


def path_length(feature_map: FeatureMap, polyline: np.ndarray) -> float:
    """Length of the image of a latent polyline under a truncated feature map."""
    coords = feature_map.coordinates(polyline)
    return float(np.linalg.norm(np.diff(coords, axis=0), axis=1).sum())


def exact_path_length(kernel: KernelModel, polyline: np.ndarray) -> float:
    """Feature-space polyline length under the full map: chords are sqrt(f(x,x) + f(y,y) - 2 f(x,y))."""
    pts = _as_points(polyline)
    a, b = pts[:-1], pts[1:]
    sq = kernel.diagonal(a) + kernel.diagonal(b) - 2.0 * kernel.paired(a, b)
    return float(np.sqrt(np.clip(sq, 0.0, None)).sum())
