"""
Scenario configuration and geometry-derived primitives.

A scenario file is YAML. Angles are given in degrees and SNRs / gains in
dB; :func:`load_scenario` converts everything to radians and linear scale.
Large-scale gains are entered directly as gain-times-SNR products with a
unit noise variance, so the default files use 0 dB training and data SNR.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np
import yaml

CORRELATION_MODELS = ("exponential", "lognormal_diag", "identity", "explicit")
ZS_MODES = ("plain", "cov_design", "los_projector")

# stream purpose tags (see rng_stream)
TAG_KAPPA = 1
TAG_THETA = 2
TAG_LOGNORMAL = 3


class ConfigError(ValueError):
    """Malformed or invalid scenario configuration."""


def rng_stream(base_seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator keyed by ``(base_seed, *key)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([base_seed, *key])))


@dataclass(frozen=True)
class CorrelationModel:
    kind: str = "exponential"
    r: float = 0.5
    sigma_c: float = 0.0
    matrices: np.ndarray | None = field(default=None, repr=False)


@dataclass(frozen=True)
class ScenarioConfig:
    """
    Full system parameterization.

    Array-valued fields use cell-major indexing: ``beta[j, l, k]`` is the
    gain from user ``k`` of cell ``l`` to base station ``j``;
    ``kappa[j, k]`` is the Rician factor of user ``k`` in cell ``j``;
    ``theta[j, l, k]`` is the angle of arrival in radians.
    """

    L: int
    K: int
    N: int
    T_c: int
    tau: int
    rho_tr: float
    rho_d: float
    beta: np.ndarray = field(repr=False)
    kappa: np.ndarray = field(repr=False)
    theta: np.ndarray = field(repr=False)
    corr_model: CorrelationModel = field(default_factory=CorrelationModel)
    base_seed: int = 0
    zs_mode: str = "plain"
    D_diag: np.ndarray | None = field(default=None, repr=False)
    eps: float | None = None

    def __post_init__(self):
        for name in ("beta", "kappa", "theta"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        validate(self)

    def replace(self, **changes) -> "ScenarioConfig":
        """Copy with some fields changed; ``sigma_c``/``r`` reach into the correlation model."""
        corr_changes = {k: changes.pop(k) for k in ("sigma_c", "r") if k in changes}
        if corr_changes:
            changes["corr_model"] = dataclasses.replace(self.corr_model, **corr_changes)
        return dataclasses.replace(self, **changes)

    @property
    def prelog(self) -> float:
        return 1.0 - self.tau / self.T_c

    @property
    def zs_eps(self) -> float:
        return 1e-6 * self.rho_d if self.eps is None else self.eps


def validate(cfg: ScenarioConfig) -> None:
    """Check every invariant; raise :class:`ConfigError` naming the first violation."""
    for name in ("L", "K", "N"):
        if int(getattr(cfg, name)) < 1:
            raise ConfigError(f"{name} must be >= 1")
    if cfg.tau < cfg.K:
        raise ConfigError("tau < K: orthogonal pilots need tau >= K")
    if not cfg.T_c > cfg.tau:
        raise ConfigError("T_c must exceed tau")
    if not (cfg.rho_tr > 0 and cfg.rho_d > 0):
        raise ConfigError("rho_tr and rho_d must be > 0")
    L, K = cfg.L, cfg.K
    shapes = {"beta": (L, L, K), "kappa": (L, K), "theta": (L, L, K)}
    for name, shape in shapes.items():
        if getattr(cfg, name).shape != shape:
            raise ConfigError(f"{name} must have shape {shape}, got {getattr(cfg, name).shape}")
    if not np.all(cfg.beta > 0):
        raise ConfigError("beta must be > 0")
    if not np.all(cfg.kappa >= 0):
        raise ConfigError("kappa must be >= 0")
    if not np.all(np.isfinite(cfg.theta)):
        raise ConfigError("theta must be finite")
    cm = cfg.corr_model
    if cm.kind not in CORRELATION_MODELS:
        raise ConfigError(f"unknown correlation model {cm.kind!r}")
    if cm.kind == "exponential" and not 0 <= cm.r < 1:
        raise ConfigError("r must lie in [0, 1)")
    if cm.kind == "lognormal_diag" and not cm.sigma_c >= 0:
        raise ConfigError("sigma_c must be >= 0")
    if cm.kind == "explicit":
        if cm.matrices is None or cm.matrices.shape != (L, L, K, cfg.N, cfg.N):
            raise ConfigError(f"explicit correlation matrices must have shape {(L, L, K, cfg.N, cfg.N)}")
    if cfg.zs_mode not in ZS_MODES:
        raise ConfigError(f"zs_mode must be one of {ZS_MODES}")
    if cfg.D_diag is not None:
        d = np.asarray(cfg.D_diag, dtype=float)
        if d.shape != (K,) or not np.all(d > 0):
            raise ConfigError("D_diag must hold K positive entries")
    if cfg.eps is not None and cfg.eps < 0:
        raise ConfigError("eps must be >= 0")


# ---------------------------------------------------------------------------
# geometry primitives

def build_exponential_correlation(r: float, theta: float, N: int) -> np.ndarray:
    """Exponential model: entry (m, n) is ``r**|m-n| * exp(1j*(m-n)*theta)``."""
    if not 0 <= r < 1:
        raise ValueError("r must lie in [0, 1)")
    d = np.subtract.outer(np.arange(N), np.arange(N))
    return np.power(r, np.abs(d)) * np.exp(1j * d * theta)


def build_lognormal_diag_correlation(sigma_c: float, N: int,
                                     stream: np.random.Generator) -> np.ndarray:
    """Diagonal matrix with entries ``10**(f/10)``, ``f ~ Normal(0, sigma_c**2)``."""
    if sigma_c < 0:
        raise ValueError("sigma_c must be >= 0")
    f = sigma_c * stream.standard_normal(N)
    return np.diag(10.0 ** (f / 10.0))


def build_los_steering(theta: float, N: int) -> np.ndarray:
    """ULA response with half-wavelength spacing: ``exp(-1j*n*pi*sin(theta))``."""
    return np.exp(-1j * np.pi * np.arange(N) * np.sin(theta))


def default_geometry(L: int = 4, K: int = 2, base_seed: int = 0,
                     kappa_range: tuple[float, float] = (0.0, 2.0)):
    """
    Four-cell, two-user layout with cell-edge users.

    Returns ``(beta, theta, kappa)`` tables. ``beta`` holds gain-times-SNR
    products: -6 dB for every intra-cell link and, for each cell, the
    ``(L-1)*K`` interfering links spaced evenly on [-11.5, -6.3] dB in link
    order (nearest neighbour cell first).

    Angles follow a 2 x 2 grid of base stations 300 m apart whose arrays
    face the grid center. User ``k`` of every cell sits at the cell edge
    (135 m) inside a 60 degree sector around broadside; each user index
    owns a sub-sector and same-pilot users of different cells are within
    2 degrees of each other as seen from their own base station. The
    angle of an interfering user seen from another base station follows
    from the positions.
    """
    if (L, K) != (4, 2):
        raise ConfigError(f"default geometry is defined for L=4, K=2 only, got L={L}, K={K}")
    beta_db = np.empty((L, L, K))
    inter_db = np.linspace(-6.3, -11.5, (L - 1) * K)
    for j in range(L):
        beta_db[j, j, :] = -6.0
        links = [((j + s) % L, k) for s in range(1, L) for k in range(K)]
        for (l, k), value in zip(links, inter_db):
            beta_db[j, l, k] = value

    rng = rng_stream(base_seed, TAG_THETA)
    width = 60.0 / K
    centers = -30.0 + width * (np.arange(K) + 0.5)
    base = centers + rng.uniform(-width / 4, width / 4, size=K)
    own_deg = base[None, :] + rng.uniform(-2.0, 2.0, size=(L, K))

    radius = 150.0
    bs = radius * np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]], dtype=float)
    facing = np.arctan2(-bs[:, 1], -bs[:, 0])
    heading = facing[:, None] + np.deg2rad(own_deg)
    users = bs[:, None, :] + 0.9 * radius * np.stack([np.cos(heading), np.sin(heading)], axis=-1)
    theta = np.empty((L, L, K))
    for j, l in np.ndindex(L, L):
        d = users[l] - bs[j]
        rel = np.arctan2(d[:, 1], d[:, 0]) - facing[j]
        theta[j, l] = np.angle(np.exp(1j * rel))
    theta[np.arange(L), np.arange(L)] = np.deg2rad(own_deg)

    kappa = sample_kappa(L, K, base_seed, kappa_range)
    return 10.0 ** (beta_db / 10.0), theta, kappa


def sample_kappa(L: int, K: int, base_seed: int,
                 kappa_range: tuple[float, float] = (0.0, 2.0)) -> np.ndarray:
    """Rician factors uniform on the half-open interval (lo, hi]."""
    lo, hi = kappa_range
    u = rng_stream(base_seed, TAG_KAPPA).uniform(size=(L, K))
    return hi - (hi - lo) * u


# ---------------------------------------------------------------------------
# file loading

def _table(value: Any, shape: tuple, name: str, intra_inter: bool = False) -> np.ndarray:
    if isinstance(value, dict) and intra_inter:
        try:
            intra, inter = float(value["intra"]), float(value["inter"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError(f"{name}: expected keys 'intra' and 'inter'") from None
        L = shape[0]
        out = np.full(shape, inter)
        out[np.arange(L), np.arange(L)] = intra
        return out
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected a number or nested list") from None
    if arr.ndim == 0:
        return np.full(shape, float(arr))
    if arr.shape != shape:
        raise ConfigError(f"{name} must have shape {shape}, got {arr.shape}")
    return arr


def _require(doc: dict, key: str):
    if key not in doc:
        raise ConfigError(f"missing required key {key!r}")
    return doc[key]


def scenario_from_dict(doc: dict, base_dir: Path | None = None) -> ScenarioConfig:
    """Build a validated :class:`ScenarioConfig` from a parsed document."""
    if not isinstance(doc, dict):
        raise ConfigError("scenario document must be a mapping")
    try:
        L, K, N = (int(_require(doc, k)) for k in ("L", "K", "N"))
        T_c, tau = int(_require(doc, "T_c")), int(_require(doc, "tau"))
        seed = int(doc.get("base_seed", 0))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad integer field: {exc}") from None
    if min(L, K, N) < 1:
        raise ConfigError("L, K and N must be >= 1")

    snr = doc.get("snr_db", {}) or {}
    rho_tr = 10.0 ** (float(snr.get("training", 0.0)) / 10.0)
    rho_d = 10.0 ** (float(snr.get("data", 0.0)) / 10.0)

    kappa_range = tuple(float(v) for v in doc.get("kappa_range", (0.0, 2.0)))
    beta_spec = doc.get("beta_db", "default")
    theta_spec = doc.get("theta_deg", "default")
    kappa_spec = doc.get("kappa", "uniform")

    if "default" in (beta_spec, theta_spec):
        d_beta, d_theta, _ = default_geometry(L, K, seed, kappa_range)
    if beta_spec == "default":
        beta = d_beta
    else:
        beta = 10.0 ** (_table(beta_spec, (L, L, K), "beta_db", intra_inter=True) / 10.0)
    if theta_spec == "default":
        theta = d_theta
    else:
        theta = np.deg2rad(_table(theta_spec, (L, L, K), "theta_deg", intra_inter=True))
    if kappa_spec == "uniform":
        kappa = sample_kappa(L, K, seed, kappa_range)
    else:
        kappa = _table(kappa_spec, (L, K), "kappa")

    corr = doc.get("correlation", {"model": "exponential", "r": 0.5}) or {}
    kind = corr.get("model", "exponential")
    matrices = None
    if kind == "explicit":
        path = Path(_require(corr, "path"))
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        try:
            matrices = np.load(path)
        except OSError as exc:
            raise ConfigError(f"cannot read correlation matrices: {exc}") from None
    corr_model = CorrelationModel(kind=kind, r=float(corr.get("r", 0.5)),
                                  sigma_c=float(corr.get("sigma_c", 0.0)), matrices=matrices)

    det = doc.get("detection", {}) or {}
    d_diag = det.get("D_diag")
    return ScenarioConfig(
        L=L, K=K, N=N, T_c=T_c, tau=tau, rho_tr=rho_tr, rho_d=rho_d,
        beta=beta, kappa=kappa, theta=theta, corr_model=corr_model, base_seed=seed,
        zs_mode=det.get("zs_mode", "plain"),
        D_diag=None if d_diag is None else np.asarray(d_diag, dtype=float),
        eps=None if det.get("eps") is None else float(det["eps"]),
    )


def load_scenario(path) -> ScenarioConfig:
    """Parse and validate a YAML scenario file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc}") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed scenario file {path}: {exc}") from None
    return scenario_from_dict(doc, base_dir=path.parent)


def builtin_scenario_path(name: str) -> Path:
    """Path of a bundled scenario file (``scenario1`` or ``scenario2``)."""
    return Path(str(resources.files("ricianmimo") / "data" / f"{name}.yaml"))


def correlation_matrices(cfg: ScenarioConfig) -> np.ndarray:
    """All Theta[j, l, k] as an ``(L, L, K, N, N)`` complex array."""
    L, K, N = cfg.L, cfg.K, cfg.N
    cm = cfg.corr_model
    out = np.empty((L, L, K, N, N), dtype=complex)
    if cm.kind == "explicit":
        out[...] = cm.matrices
        return out
    if cm.kind == "identity":
        out[...] = np.eye(N)
        return out
    if cm.kind == "exponential":
        for idx in np.ndindex(L, L, K):
            out[idx] = build_exponential_correlation(cm.r, cfg.theta[idx], N)
        return out
    for idx in np.ndindex(L, L, K):
        stream = rng_stream(cfg.base_seed, TAG_LOGNORMAL, *idx)
        out[idx] = build_lognormal_diag_correlation(cm.sigma_c, N, stream)
    return out
