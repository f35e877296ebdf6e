"""End-to-end alignment, the beam-sweep baseline and the threshold-pair sweep."""

from __future__ import annotations

import csv
import logging
import math
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from polybeam.errors import (DegenerateSystemError, DomainError, EmptyTruncationError,
                             NonIsolatedRootsError)
from polybeam.model import (BeamAngles, ChannelMatrix, RateParams, data_rate,
                            exhaustive_search)
from polybeam.polytope import objective_value, root_bound_eta
from polybeam.series import TruncatedSeries, rate_series, series_partial
from polybeam.solver import SolverOptions, filter_real_domain, solve_system
from polybeam.truncate import approximation_error, normalize_magnitudes, threshold_select

log = logging.getLogger(__name__)

RESULT_COLUMNS = ["eps1", "eps2", "eta", "delta", "objective", "r_est", "r_exh",
                  "abs_diff", "n_real_roots", "status", "wall_ms"]

REFERENCE_PAIRS = ((0.6, 0.6), (0.7, 0.7), (0.7, 0.75), (0.8, 0.8))
DEFAULT_CENTER = BeamAngles(math.pi, math.pi)


@dataclass(frozen=True)
class AlignmentConfig:
    seed: int = 42
    n_tx: int = 2
    n_rx: int = 2
    alphas: RateParams = RateParams()
    degree_cap: int = 20
    centers: tuple = (DEFAULT_CENTER,)
    eps_pairs: tuple = REFERENCE_PAIRS
    grid_points: int = 360
    imag_tol: float = 1e-6
    residual_tol: float = 1e-8
    cluster_tol: float = 1e-7
    workers: int = 1
    record_timing: bool = False

    def __post_init__(self):
        if self.degree_cap < 2:
            raise DomainError("degree_cap must be >= 2")
        if self.grid_points < 2:
            raise DomainError("grid_points must be >= 2")
        if self.n_tx < 1 or self.n_rx < 1:
            raise DomainError("antenna counts must be >= 1")
        if not self.centers:
            raise DomainError("at least one expansion center is required")
        for e1, e2 in self.eps_pairs:
            if not (0 <= e1 < 1 and 0 <= e2 < 1):
                raise DomainError(f"threshold pair {(e1, e2)} outside [0, 1)")
        object.__setattr__(self, "centers",
                           tuple(BeamAngles(float(a), float(b)) for a, b in self.centers))
        object.__setattr__(self, "eps_pairs",
                           tuple((float(a), float(b)) for a, b in self.eps_pairs))

    @property
    def center(self) -> BeamAngles:
        return self.centers[0]

    def channel(self) -> ChannelMatrix:
        return ChannelMatrix.random(self.n_rx, self.n_tx, self.seed)

    def solver_options(self) -> SolverOptions:
        return SolverOptions(residual_tol=self.residual_tol, cluster_tol=self.cluster_tol,
                             axis_components="drop")


# -- config file ---------------------------------------------------------------

_ANGLE_RE = re.compile(r"^\s*([-+]?[0-9.eE+-]*)\s*\*?\s*pi\s*(?:/\s*([0-9.]+))?\s*$")


def parse_angle(text: str) -> float:
    """Parse ``1.2``, ``pi``, ``pi/2``, ``3pi/2`` or ``0.5*pi``."""
    text = text.strip()
    m = _ANGLE_RE.match(text)
    if m:
        coef = m.group(1)
        k = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
        return k * math.pi / (float(m.group(2)) if m.group(2) else 1.0)
    return float(text)


def parse_pairs(text: str, parse=float) -> tuple:
    """``"a:b,c:d"`` -> ((a, b), (c, d)); ``;`` is accepted as a separator too."""
    out = []
    for chunk in re.split(r"[,;]", text):
        if not chunk.strip():
            continue
        a, sep, b = chunk.partition(":")
        if not sep:
            raise DomainError(f"expected a:b, got {chunk.strip()!r}")
        out.append((parse(a), parse(b)))
    return tuple(out)


def load_config(path, **overrides) -> AlignmentConfig:
    """Read ``key = value`` lines; ``#`` starts a comment. Overrides win."""
    values: dict = {}
    alphas = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise DomainError(f"{path}:{lineno}: expected 'key = value'")
        key, val = key.strip().replace("-", "_"), val.strip()
        if key in ("alpha1", "alpha2", "alpha3"):
            alphas[key] = float(val)
        elif key in ("seed", "n_tx", "n_rx", "degree_cap", "grid_points", "workers"):
            values[key] = int(val)
        elif key in ("imag_tol", "residual_tol", "cluster_tol"):
            values[key] = float(val)
        elif key == "record_timing":
            values[key] = val.lower() in ("1", "true", "yes", "on")
        elif key in ("center", "centers"):
            values["centers"] = parse_pairs(val, parse_angle)
        elif key == "eps_pairs":
            values["eps_pairs"] = parse_pairs(val)
        else:
            raise DomainError(f"{path}:{lineno}: unknown key {key!r}")
    if alphas:
        values["alphas"] = RateParams(**alphas)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return AlignmentConfig(**values)


def config_lines(cfg: AlignmentConfig) -> list[str]:
    """Inverse of :func:`load_config`."""
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if f.name == "alphas":
            lines += [f"alpha1 = {v.alpha1!r}", f"alpha2 = {v.alpha2!r}", f"alpha3 = {v.alpha3!r}"]
        elif f.name in ("centers", "eps_pairs"):
            lines.append(f"{f.name} = " + ", ".join(f"{a!r}:{b!r}" for a, b in v))
        else:
            lines.append(f"{f.name} = {v!r}")
    return lines


# -- alignment -------------------------------------------------------------------

@dataclass(frozen=True)
class DerivativeSeries:
    """Taylor series of R and of its two partial derivatives about one center."""

    center: BeamAngles
    rate: TruncatedSeries
    f1: TruncatedSeries
    f2: TruncatedSeries


def prepare_series(H: ChannelMatrix, params: RateParams, cfg: AlignmentConfig) -> list:
    out = []
    for c in cfg.centers:
        r = rate_series(H, params, c, cfg.degree_cap)
        out.append(DerivativeSeries(c, r, series_partial(r, "rx"), series_partial(r, "tx")))
    return out


@dataclass
class AlignmentResult:
    best: BeamAngles
    r_est: float
    eta: int
    delta: float
    n_real_roots: int
    no_roots: bool
    candidates: list = field(default_factory=list)
    n_roots: int = 0
    dropped_components: int = 0


def align(H: ChannelMatrix, params: RateParams, eps1: float, eps2: float,
          cfg: AlignmentConfig, prepared: list | None = None) -> AlignmentResult:
    """Estimate the rate-maximizing beam pair from truncated derivative polynomials.

    Candidates are the real in-domain roots of every center's system plus the
    centers themselves; the one with the largest exact rate wins. With several
    centers, eta is summed and delta uses the magnitudes retained at all of them.
    """
    prepared = prepared if prepared is not None else prepare_series(H, params, cfg)
    opts = cfg.solver_options()
    eta = 0
    kept_mass = 0.0
    candidates: list[BeamAngles] = []
    n_real = n_roots = dropped = 0
    for ds in prepared:
        p1 = threshold_select(ds.f1, eps1)
        p2 = threshold_select(ds.f2, eps2)
        eta += root_bound_eta(p1.exponents, p2.exponents)
        kept_mass += 1.0 / approximation_error(p1, p2)
        rs = solve_system(p1, p2, opts)
        real = filter_real_domain(rs, cfg.imag_tol)
        n_roots += len(rs)
        n_real += len(real)
        dropped += rs.dropped_components
        candidates.extend(real)
    no_roots = not candidates
    candidates.extend(ds.center for ds in prepared)
    rates = [data_rate(H, params, c) for c in candidates]
    # first maximum wins: roots precede centers, then input order
    i_best = max(range(len(rates)), key=lambda i: (rates[i], -i))
    return AlignmentResult(candidates[i_best], rates[i_best], eta, 1.0 / kept_mass,
                           n_real, no_roots, candidates, n_roots, dropped)


# -- sweep -----------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentRecord:
    eps1: float
    eps2: float
    eta: int | None = None
    delta: float | None = None
    objective: float | None = None
    r_est: float | None = None
    r_exh: float | None = None
    abs_diff: float | None = None
    n_real_roots: int | None = None
    status: str = "ok"
    wall_ms: float | None = None

    def row(self) -> list[str]:
        out = []
        for name in RESULT_COLUMNS:
            v = getattr(self, name)
            out.append("" if v is None else repr(v) if isinstance(v, float) else str(v))
        return out


_ERRORS = (EmptyTruncationError, NonIsolatedRootsError, DegenerateSystemError)


def _run_pair(H, params, cfg, prepared, r_exh, pair) -> ExperimentRecord:
    eps1, eps2 = pair
    t0 = time.perf_counter()
    try:
        res = align(H, params, eps1, eps2, cfg, prepared)
    except _ERRORS as exc:
        log.info("pair %s failed: %s", pair, exc)
        wall = (time.perf_counter() - t0) * 1e3 if cfg.record_timing else None
        return ExperimentRecord(eps1, eps2, r_exh=r_exh, status=str(exc), wall_ms=wall)
    wall = (time.perf_counter() - t0) * 1e3 if cfg.record_timing else None
    status = "no_roots" if res.no_roots else "ok"
    return ExperimentRecord(eps1, eps2, res.eta, res.delta, objective_value(res.eta, res.delta),
                            res.r_est, r_exh, abs(res.r_est - r_exh), res.n_real_roots,
                            status, wall)


def run_sweep(cfg: AlignmentConfig, H: ChannelMatrix | None = None) -> list[ExperimentRecord]:
    """One record per threshold pair, in input order."""
    if not cfg.eps_pairs:
        raise DomainError("run_sweep needs at least one threshold pair")
    H = H if H is not None else cfg.channel()
    params = cfg.alphas
    _, r_exh = exhaustive_search(H, params, cfg.grid_points)
    prepared = prepare_series(H, params, cfg)
    job = lambda pair: _run_pair(H, params, cfg, prepared, r_exh, pair)
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(job, cfg.eps_pairs))
    return [job(pair) for pair in cfg.eps_pairs]


def write_results_csv(records, path) -> None:
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(RESULT_COLUMNS)
            for r in records:
                w.writerow(r.row())
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def read_results_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def dump_series_csv(cfg: AlignmentConfig, which: str, path, eps: float | None = None,
                    H: ChannelMatrix | None = None) -> int:
    """Write the normalized coefficient magnitudes of f1 or f2 (first center).

    Columns: ``index,deg_rx,deg_tx,coeff_real,coeff_imag,magnitude`` plus
    ``selected`` (0/1) when ``eps`` is given. Returns the number of rows.
    """
    if which not in ("f1", "f2"):
        raise DomainError("which must be 'f1' or 'f2'")
    H = H if H is not None else cfg.channel()
    r = rate_series(H, cfg.alphas, cfg.center, cfg.degree_cap)
    s = series_partial(r, "rx" if which == "f1" else "tx")
    mags = normalize_magnitudes(s)
    header = ["index", "deg_rx", "deg_tx", "coeff_real", "coeff_imag", "magnitude"]
    if eps is not None:
        header.append("selected")
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for i, (e, m) in enumerate(mags):
                c = s[e]
                row = [i, e[0], e[1], repr(c.real), repr(c.imag), repr(m)]
                if eps is not None:
                    row.append(int(m > eps and c.real != 0.0))
                w.writerow(row)
    except OSError as exc:
        raise OSError(f"cannot write series to {path}: {exc}") from exc
    return len(mags)


def with_overrides(cfg: AlignmentConfig, **kw) -> AlignmentConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
