"""Synthetic populations with known source parameters.

Two population families are supported:

* univariate: each source is a Gaussian.  Source means are drawn from a
  between-source Gaussian, a handful of initialisation tokens are drawn per
  source, and the saved source parameters are the sample mean and unbiased
  sample SD of those tokens.  The saved parameters are the ground truth that
  the rest of the package scores against.
* multivariate: each source is a Gaussian mixture.  Source centroids are drawn
  from between-source mixture components, every source shares one set of
  within-source component offsets, and each component's saved mean vector and
  covariance matrix are refitted from a small token sample.

Everything downstream (sample sets, suspects, offender grids) is derived from
a saved population spec plus a seed, never from fresh hidden state.
"""

from dataclasses import dataclass, field
import json

import numpy as np
from scipy.spatial.distance import pdist

from .rng import stream_rng


# ---------------------------------------------------------------------------
# univariate populations


@dataclass(frozen=True)
class UnivariateGenConfig:
    n_sources: int = 1000
    grand_mean: float = 0.0
    between_sd: float = 2.0
    within_sd: float = 1.0
    tokens_per_source_init: int = 10
    seed: int = 0

    def validate(self) -> None:
        if self.n_sources < 1:
            raise ValueError("n_sources must be >= 1")
        if self.tokens_per_source_init < 2:
            raise ValueError("tokens_per_source_init must be >= 2 (unbiased SD)")
        if self.between_sd <= 0 or self.within_sd <= 0:
            raise ValueError("between_sd and within_sd must be > 0")


@dataclass(frozen=True)
class SourceParams:
    mean: float
    sd: float


@dataclass
class UnivariatePopulationSpec:
    config: UnivariateGenConfig
    sources: list[SourceParams]

    # flat arrays of the saved parameters, for vectorised consumers
    means: np.ndarray = field(init=False, repr=False)
    sds: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.means = np.array([s.mean for s in self.sources], dtype=float)
        self.sds = np.array([s.sd for s in self.sources], dtype=float)

    @property
    def n_sources(self) -> int:
        return len(self.sources)

    def to_json(self) -> str:
        payload = {
            "kind": "univariate",
            "config": vars(self.config).copy(),
            "sources": [{"mean": s.mean, "sd": s.sd} for s in self.sources],
        }
        return json.dumps(payload, indent=None, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "UnivariatePopulationSpec":
        payload = json.loads(text)
        if payload.get("kind") != "univariate":
            raise ValueError("not a univariate population spec")
        config = UnivariateGenConfig(**payload["config"])
        sources = [SourceParams(float(s["mean"]), float(s["sd"]))
                   for s in payload["sources"]]
        return cls(config=config, sources=sources)


def build_univariate_population(config: UnivariateGenConfig) -> UnivariatePopulationSpec:
    """Generate sources and save their sample-estimated parameters."""
    config.validate()
    rng = stream_rng(config.seed, "population")
    initial_means = rng.normal(config.grand_mean, config.between_sd, config.n_sources)
    tokens = rng.normal(initial_means[:, None], config.within_sd,
                        (config.n_sources, config.tokens_per_source_init))
    means = tokens.mean(axis=1)
    sds = tokens.std(axis=1, ddof=1)
    sources = [SourceParams(float(m), float(s)) for m, s in zip(means, sds)]
    return UnivariatePopulationSpec(config=config, sources=sources)


# ---------------------------------------------------------------------------
# sample sets drawn from a saved population


@dataclass
class SampleSet:
    """Tokens freshly drawn from a subset of a population's sources."""

    source_indices: np.ndarray  # (n_sources,) indices into the population
    tokens: np.ndarray          # (n_sources, n_tokens)
    pooled_sd: float

    means: np.ndarray = field(init=False, repr=False)
    sds: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.source_indices = np.asarray(self.source_indices, dtype=int)
        self.tokens = np.asarray(self.tokens, dtype=float)
        if self.tokens.ndim != 2:
            raise ValueError("tokens must be a 2-D (sources x tokens) array")
        if self.tokens.shape[1] < 2:
            raise ValueError("need >= 2 tokens per source")
        self.means = self.tokens.mean(axis=1)
        self.sds = self.tokens.std(axis=1, ddof=1)

    @property
    def n_sources(self) -> int:
        return self.tokens.shape[0]

    @property
    def n_tokens(self) -> int:
        return self.tokens.shape[1]

    @classmethod
    def from_tokens(cls, tokens, source_indices=None) -> "SampleSet":
        tokens = np.asarray(tokens, dtype=float)
        if source_indices is None:
            source_indices = np.arange(tokens.shape[0])
        return cls(source_indices=source_indices, tokens=tokens,
                   pooled_sd=pooled_sd_of(tokens))


def pooled_sd_of(tokens: np.ndarray) -> float:
    """Root mean of the unbiased per-source variances."""
    tokens = np.asarray(tokens, dtype=float)
    if tokens.ndim != 2 or tokens.shape[1] < 2:
        raise ValueError("tokens must be (sources x tokens) with >= 2 tokens")
    return float(np.sqrt(np.mean(tokens.var(axis=1, ddof=1))))


def draw_sample_set(pop: UnivariatePopulationSpec, n_sources: int,
                    n_tokens: int, seed: int) -> SampleSet:
    """Sample sources without replacement, then fresh tokens from each."""
    if n_sources > pop.n_sources:
        raise ValueError("cannot sample more sources than the population holds")
    if n_tokens < 2:
        raise ValueError("need >= 2 tokens per source")
    rng = stream_rng(seed, "sample_set")
    idx = rng.choice(pop.n_sources, size=n_sources, replace=False)
    tokens = rng.normal(pop.means[idx][:, None], pop.sds[idx][:, None],
                        (n_sources, n_tokens))
    return SampleSet(source_indices=idx, tokens=tokens,
                     pooled_sd=pooled_sd_of(tokens))


# ---------------------------------------------------------------------------
# suspects and offender grids


@dataclass
class SuspectSpec:
    """A suspect source with fresh sample and control token draws.

    sample_tokens stand in for material collected from the suspect under
    controlled conditions; control_tokens are a second independent draw used
    by anchored methods.  The two draws come from distinct seed streams.
    """

    mean: float
    sd: float
    sample_tokens: np.ndarray
    control_tokens: np.ndarray


def draw_suspect(mean: float, sd: float, seed: int, label,
                 n_sample_tokens: int = 30,
                 n_control_tokens: int = 30) -> SuspectSpec:
    if sd <= 0:
        raise ValueError("suspect sd must be > 0")
    sample = stream_rng(seed, "suspect_sample", label).normal(mean, sd, n_sample_tokens)
    control = stream_rng(seed, "suspect_control", label).normal(mean, sd, n_control_tokens)
    return SuspectSpec(mean=mean, sd=sd, sample_tokens=sample, control_tokens=control)


@dataclass
class OffenderGrid:
    """Offender trace values placed at fixed offsets around a suspect mean.

    Offsets are kept separate from absolute values so that quantities which
    depend only on (x_q - suspect_mean) can be computed from the exact offset,
    keeping mirror-image grid points exactly symmetric in floating point.
    """

    suspect_mean: float
    offsets: np.ndarray

    @property
    def values(self) -> np.ndarray:
        return self.suspect_mean + self.offsets


def offender_grid(suspect_mean: float, half_width: float = 2.0,
                  step: float = 0.1) -> OffenderGrid:
    half_n = int(round(half_width / step))
    offsets = (np.arange(2 * half_n + 1) - half_n) * step
    return OffenderGrid(suspect_mean=suspect_mean, offsets=offsets)


# ---------------------------------------------------------------------------
# multivariate mixture populations


@dataclass(frozen=True)
class MultivariateGenConfig:
    dims: int = 2
    n_between_components: int = 4
    sources_per_between_component: int = 1000
    n_within_components: int = 3
    between_range: float = 4.0
    within_range: float = 2.0
    between_init_var: float = 1.0
    within_init_var: float = 0.25
    min_within_separation: float = 2.0
    tokens_per_component_factor: int = 6
    suspects_per_between_component: int = 12
    seed: int = 0

    def validate(self) -> None:
        if self.dims < 1:
            raise ValueError("dims must be >= 1")
        if self.n_between_components < 1 or self.n_within_components < 1:
            raise ValueError("component counts must be >= 1")
        if self.tokens_per_component_factor * self.dims < self.dims + 1:
            raise ValueError("too few tokens per component to fit a covariance")
        if min(self.between_init_var, self.within_init_var) <= 0:
            raise ValueError("initial variances must be > 0")

    @property
    def tokens_per_component(self) -> int:
        return self.tokens_per_component_factor * self.dims


@dataclass
class SourceGmm:
    """Saved parameters of one mixture source: equal-weight components."""

    means: np.ndarray  # (k, d)
    covs: np.ndarray   # (k, d, d)

    def __post_init__(self):
        self.means = np.asarray(self.means, dtype=float)
        self.covs = np.asarray(self.covs, dtype=float)

    @property
    def n_components(self) -> int:
        return self.means.shape[0]

    @property
    def dims(self) -> int:
        return self.means.shape[1]


@dataclass
class GmmPopulationSpec:
    config: MultivariateGenConfig
    between_means: np.ndarray   # (B, d) refitted between-component means
    between_covs: np.ndarray    # (B, d, d)
    within_offsets: np.ndarray  # (k, d) shared component offsets
    sources: list[SourceGmm]
    suspects: list[SourceGmm]

    @property
    def n_sources(self) -> int:
        return len(self.sources)

    @property
    def dims(self) -> int:
        return self.config.dims

    def to_json(self) -> str:
        payload = {
            "kind": "gmm",
            "config": vars(self.config).copy(),
            "between_means": self.between_means.tolist(),
            "between_covs": self.between_covs.tolist(),
            "within_offsets": self.within_offsets.tolist(),
            "sources": [{"means": s.means.tolist(), "covs": s.covs.tolist()}
                        for s in self.sources],
            "suspects": [{"means": s.means.tolist(), "covs": s.covs.tolist()}
                         for s in self.suspects],
        }
        return json.dumps(payload, indent=None, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "GmmPopulationSpec":
        payload = json.loads(text)
        if payload.get("kind") != "gmm":
            raise ValueError("not a mixture population spec")
        config = MultivariateGenConfig(**payload["config"])
        sources = [SourceGmm(np.array(s["means"]), np.array(s["covs"]))
                   for s in payload["sources"]]
        suspects = [SourceGmm(np.array(s["means"]), np.array(s["covs"]))
                    for s in payload["suspects"]]
        return cls(config=config,
                   between_means=np.array(payload["between_means"]),
                   between_covs=np.array(payload["between_covs"]),
                   within_offsets=np.array(payload["within_offsets"]),
                   sources=sources, suspects=suspects)


def _refit_gaussian(tokens: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sample mean and unbiased covariance of (n, d) tokens."""
    mean = tokens.mean(axis=0)
    dev = tokens - mean
    cov = dev.T @ dev / (tokens.shape[0] - 1)
    return mean, cov


def _draw_within_offsets(rng, config: MultivariateGenConfig,
                         max_attempts: int = 10000) -> np.ndarray:
    """Uniform offsets with pairwise separation >= min_within_separation.

    Rejection samples the whole offset set; the separation requirement keeps
    within-source components distinct rather than stacked on each other.
    """
    k, d = config.n_within_components, config.dims
    for _ in range(max_attempts):
        offsets = rng.uniform(-config.within_range, config.within_range, (k, d))
        if k == 1 or pdist(offsets).min() >= config.min_within_separation:
            return offsets
    raise RuntimeError("could not place within-source offsets with the "
                       "requested separation; loosen the config")


def _refit_source(centroid: np.ndarray, offsets: np.ndarray, init_sd: float,
                  n_tokens: int, rng) -> SourceGmm:
    k, d = offsets.shape
    tokens = rng.normal((centroid + offsets)[:, None, :], init_sd, (k, n_tokens, d))
    means = np.empty((k, d))
    covs = np.empty((k, d, d))
    for c in range(k):
        means[c], covs[c] = _refit_gaussian(tokens[c])
    return SourceGmm(means=means, covs=covs)


def build_gmm_population(config: MultivariateGenConfig) -> GmmPopulationSpec:
    """Generate a mixture population plus held-out suspect sources."""
    config.validate()
    rng = stream_rng(config.seed, "gmm_population")
    d = config.dims
    n_tok = config.tokens_per_component

    # between-source components: uniform initial means, then parameters
    # refitted from a token draw so the saved components are themselves
    # sample estimates
    between_means = np.empty((config.n_between_components, d))
    between_covs = np.empty((config.n_between_components, d, d))
    init_between = rng.uniform(-config.between_range, config.between_range,
                               (config.n_between_components, d))
    for b in range(config.n_between_components):
        tokens = rng.normal(init_between[b], np.sqrt(config.between_init_var),
                            (n_tok, d))
        between_means[b], between_covs[b] = _refit_gaussian(tokens)

    within_offsets = _draw_within_offsets(rng, config)
    within_sd = np.sqrt(config.within_init_var)

    def draw_source_set(count_per_component, stream) -> list[SourceGmm]:
        out = []
        for b in range(config.n_between_components):
            chol = np.linalg.cholesky(between_covs[b])
            z = stream.standard_normal((count_per_component, d))
            centroids = between_means[b] + z @ chol.T
            for centroid in centroids:
                out.append(_refit_source(centroid, within_offsets, within_sd,
                                         n_tok, stream))
        return out

    sources = draw_source_set(config.sources_per_between_component, rng)
    suspect_rng = stream_rng(config.seed, "gmm_population_suspects")
    suspects = draw_source_set(config.suspects_per_between_component, suspect_rng)

    return GmmPopulationSpec(config=config, between_means=between_means,
                             between_covs=between_covs,
                             within_offsets=within_offsets,
                             sources=sources, suspects=suspects)


def draw_source_tokens(source: SourceGmm, n_tokens: int, rng) -> np.ndarray:
    """Tokens from a saved mixture source: uniform component, then Gaussian."""
    k, d = source.means.shape
    comp = rng.integers(0, k, n_tokens)
    z = rng.standard_normal((n_tokens, d))
    chols = np.linalg.cholesky(source.covs)
    return source.means[comp] + np.einsum("nj,nij->ni", z, chols[comp])


@dataclass
class GmmSampleSet:
    source_indices: np.ndarray  # (n_sources,)
    tokens: np.ndarray          # (n_sources, n_tokens, d)

    @property
    def n_sources(self) -> int:
        return self.tokens.shape[0]

    @property
    def n_tokens(self) -> int:
        return self.tokens.shape[1]


def draw_gmm_sample_set(pop: GmmPopulationSpec, n_sources: int, n_tokens: int,
                        seed: int, label: str = "gmm_sample_set",
                        exclude=()) -> GmmSampleSet:
    """Sample mixture sources without replacement and draw fresh tokens.

    exclude lists population indices that must not be chosen, so a second,
    disjoint sample set can be drawn alongside a first one.
    """
    exclude = np.asarray(sorted(exclude), dtype=int)
    available = np.setdiff1d(np.arange(pop.n_sources), exclude)
    if n_sources > available.size:
        raise ValueError("not enough sources left to sample")
    rng = stream_rng(seed, label)
    idx = rng.choice(available, size=n_sources, replace=False)
    tokens = np.stack([draw_source_tokens(pop.sources[i], n_tokens, rng)
                       for i in idx])
    return GmmSampleSet(source_indices=idx, tokens=tokens)


def draw_batch_for_sources(pop: GmmPopulationSpec, indices: np.ndarray,
                           n_tokens: int, seed: int,
                           label: str = "gmm_batch") -> np.ndarray:
    """A fresh (len(indices), n_tokens, d) token batch from given sources."""
    rng = stream_rng(seed, label)
    return np.stack([draw_source_tokens(pop.sources[i], n_tokens, rng)
                     for i in indices])


def mv_offender_grid(suspect: SourceGmm, n_points: int = 12) -> np.ndarray:
    """Diagonal grid through a suspect's occupied region.

    Runs from the componentwise minimum of (mean - 1 SD) to the maximum of
    (mean + 1 SD), per dimension, so the trace sweeps from clearly typical to
    the far edge of the suspect's spread.
    """
    sds = np.sqrt(np.diagonal(suspect.covs, axis1=1, axis2=2))  # (k, d)
    lo = (suspect.means - sds).min(axis=0)
    hi = (suspect.means + sds).max(axis=0)
    t = np.linspace(0.0, 1.0, n_points)[:, None]
    return lo + t * (hi - lo)


# ---------------------------------------------------------------------------
# population spec file round trip


def save_population(spec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(spec.to_json())
        fh.write("\n")


def load_population(path):
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    text = json.dumps(payload)
    if payload.get("kind") == "univariate":
        return UnivariatePopulationSpec.from_json(text)
    if payload.get("kind") == "gmm":
        return GmmPopulationSpec.from_json(text)
    raise ValueError(f"unknown population kind {payload.get('kind')!r}")
