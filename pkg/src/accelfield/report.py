"""Suite configuration, orchestration and JSON/CSV report emission."""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
import hashlib
import json
import os
from pathlib import Path
import platform
import time

import numpy as np
import scipy
import yaml

from . import __version__
from . import convergence as cv
from .confmap import (bogoliubov, doppler_experiment, make_map, perturbation_scaling,
                      rindler_planck_check)
from .fock import checks as fc
from .fock.basis import build_basis
from .fock.operators import realize
from .fock.states import gaussian_packet
from .grid import derivative_matrix, make_grid
from .quadform import QuadraticForm, qf_commutator, qf_pair_norm, qf_T_k
from .records import CheckRecord, exact_record, skip_record

SCHEMA_VERSION = "1"
WORKERS_ENV = "ACCELFIELD_WORKERS"
ALL_SUITES = ("quadform", "oracle", "invariance", "canonical", "position", "phase",
              "convergence", "bogoliubov", "doppler", "dual")


@dataclass
class Tolerances:
    exact: float = 1e-12
    slope_window: float = 0.3
    quadrature: float = 1e-8
    central_charge: float = 0.05
    doppler: float = 0.10
    doppler_position: float = 0.02


@dataclass
class SuiteConfig:
    M: int = 16
    domega: float = 0.5
    n_max: int = 4
    p: int = 2
    hbar: float = 1.0
    phase_convention: str = "susskind-glogower"
    tolerances: Tolerances = field(default_factory=Tolerances)
    suites: list = field(default_factory=lambda: list(ALL_SUITES))
    sweep: list = field(default_factory=lambda: [16, 32, 64])
    out_dir: str = "reports"
    seed: int = 1234
    dim_cap: int = 200_000
    packet_omega_c: float | None = None
    packet_sigma_omega: float = 0.5
    packet_u0: float = 0.8
    oracle_samples: int = 100

    def __post_init__(self):
        if isinstance(self.tolerances, dict):
            self.tolerances = Tolerances(**self.tolerances)
        for f in fields(self.tolerances):
            if getattr(self.tolerances, f.name) <= 0:
                raise ValueError(f"tolerance {f.name} must be positive")
        unknown = set(self.suites) - set(ALL_SUITES)
        if unknown:
            raise ValueError(f"unknown suites {sorted(unknown)}")
        s = list(self.sweep)
        if any(b <= a for a, b in zip(s, s[1:])):
            raise ValueError("sweep schedule must be strictly refining")

    @property
    def omega_max(self) -> float:
        return self.M * self.domega

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def load_config(path: str | os.PathLike | None = None, **overrides) -> SuiteConfig:
    data = {}
    if path is not None:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, dict):
            raise ValueError("config file must hold a mapping")
        known = {f.name for f in fields(SuiteConfig)}
        bad = set(data) - known
        if bad:
            raise ValueError(f"unknown config keys {sorted(bad)}")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return SuiteConfig(**data)


# --- suites ---------------------------------------------------------------

def _context(cfg: SuiteConfig):
    g = make_grid(cfg.M, cfg.domega, cfg.hbar)
    D = derivative_matrix(g, cfg.p)
    return g, D


def _packet(cfg, g, D, deep=False):
    wc = cfg.packet_omega_c if cfg.packet_omega_c is not None else 0.5 * g.omega_max
    support = D.deep_interior if deep else D.interior
    return gaussian_packet(g, wc, cfg.packet_sigma_omega, cfg.packet_u0, support=support, cut=1e-10)


def suite_quadform(cfg: SuiteConfig) -> list[CheckRecord]:
    g, D = _context(cfg)
    tol = cfg.tolerances.exact
    out = []
    T = {k: qf_T_k(g, k, D) for k in range(4)}
    for k in range(3):
        out.append(exact_record(f"quadform.T{k}_pair_free", "T_0, T_1, T_2 create no pairs",
                                qf_pair_norm(T[k]), np.linalg.norm(T[k].A), tol))
    scale = np.linalg.norm(T[3].A)
    pn = qf_pair_norm(T[3])
    out.append(CheckRecord("quadform.T3_pairs", "T_3 creates pairs", pn, 1e-6 * scale, None,
                           pn / scale, bool(pn >= 1e-6 * scale), kind="lower-bound", tolerance=1e-6))
    for k in range(4):
        h = np.linalg.norm(T[k].H - T[k].adjoint().H)
        out.append(exact_record(f"quadform.T{k}_hermitian", "generators are hermitian", h,
                                T[k].norm(), tol))
    _, r = cv.central_charge_ratios(cfg.M, g.omega_max)
    err = float(np.max(np.abs(r - 1)))
    out.append(CheckRecord("quadform.central_charge", "vacuum central term hbar^2 omega^3 / 12",
                           float(np.mean(r) / 12), 1 / 12, err / 12, err,
                           bool(err <= cfg.tolerances.central_charge), kind="convergence",
                           tolerance=cfg.tolerances.central_charge, note="middle-third modes"))
    return out


def suite_oracle(cfg: SuiteConfig) -> list[CheckRecord]:
    """Coefficient commutators against brute-force Fock commutators on random forms."""
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for _ in range(cfg.oracle_samples):
        M = 4
        n_max = int(rng.integers(1, 5))
        g = make_grid(M, float(rng.uniform(0.2, 2.0)), cfg.hbar)
        Q1, Q2 = (random_form(g, rng) for _ in range(2))
        worst = max(worst, oracle_residual(Q1, Q2, n_max))
    return [exact_record("oracle.commutator", "quadratic-form commutator equals Fock commutator",
                         worst, 1.0, 1e-10, note=f"{cfg.oracle_samples} samples, seed {cfg.seed}")]


def random_form(grid, rng, hermitian=False) -> QuadraticForm:
    M = grid.M
    z = lambda: rng.normal(size=(M, M)) + 1j * rng.normal(size=(M, M))
    A, B, C = z(), z(), z()
    if hermitian:
        A = 0.5 * (A + A.conj().T)
        C = B.conj()
    return QuadraticForm.from_blocks(grid, A, B, C, c=complex(rng.normal(), rng.normal()))


def oracle_residual(Q1, Q2, n_max) -> float:
    """Max entrywise difference on the ``n_max`` basis, commutator taken on ``n_max + 2``."""
    big = build_basis(Q1.grid, n_max + 2)
    small = build_basis(Q1.grid, n_max)
    X, Y = realize(Q1, big).matrix, realize(Q2, big).matrix
    brute = (X @ Y - Y @ X).toarray()
    keep = np.array([big.state_index(s) for s in small.states])
    brute = brute[np.ix_(keep, keep)]
    coef = realize(qf_commutator(Q1, Q2), small).matrix.toarray()
    return float(np.max(np.abs(brute - coef)))


def _basis_or_skip(cfg, g, name, need=1):
    if cfg.n_max < need:
        return None, [skip_record(f"{name}.sector", name)]
    return build_basis(g, cfg.n_max, cfg.dim_cap), None


def suite_invariance(cfg):
    g, D = _context(cfg)
    b, skip = _basis_or_skip(cfg, g, "invariance")
    if skip:
        return skip
    tol = cfg.tolerances.exact
    return (fc.invariance_checks(b, D, tol) + fc.hermiticity_checks(b, D, tol)
            + fc.number_redistribution_check(b, D, 0, tol=tol))


def suite_canonical(cfg):
    g, D = _context(cfg)
    b, skip = _basis_or_skip(cfg, g, "canonical")
    if skip:
        return skip
    return fc.canonical_checks(b, D, _packet(cfg, g, D), cfg.tolerances.exact)


def suite_position(cfg):
    g, D = _context(cfg)
    b, skip = _basis_or_skip(cfg, g, "position")
    if skip:
        return skip
    tol = cfg.tolerances.exact
    return (fc.position_ladder_check(b, D, tol) + fc.mn_commutator_check(b, D, tol)
            + fc.newton_wigner_checks(b, D, _packet(cfg, g, D, deep=True), tol))


def suite_phase(cfg):
    g, D = _context(cfg)
    b, skip = _basis_or_skip(cfg, g, "phase")
    if skip:
        return skip
    out = fc.phase_checks(b, tol=cfg.tolerances.exact)
    fine = make_grid(4 * cfg.M, cfg.domega / 4, cfg.hbar)
    Df = derivative_matrix(fine, cfg.p)
    out += fc.phase_time_checks(build_basis(fine, 2), Df, _packet(cfg, fine, Df),
                                 tol=cfg.tolerances.exact, convention=cfg.phase_convention)
    return out


def suite_dual(cfg):
    if cfg.n_max < 1:
        return [skip_record("dual.sector", "light-cone operators")]
    g, D = _context(cfg)
    n = min(cfg.n_max, 2)
    return fc.dual_sector_checks(build_basis(g, n, sector="phi"), build_basis(g, n, sector="psi"), D,
                                 cfg.tolerances.exact)


def sweeps(cfg) -> list:
    Ms, W, p = cfg.sweep, cfg.omega_max, cfg.p
    spec = cv.PacketSpec(cfg.packet_omega_c or 0.5 * W, cfg.packet_sigma_omega, cfg.packet_u0)
    return [cv.sweep_redistribution(1, Ms, W, p, spec), cv.sweep_redistribution(2, Ms, W, p, spec),
            cv.sweep_energy_position(Ms, W, p, spec), cv.sweep_position_number(Ms, W, p, spec),
            cv.sweep_phase_route(Ms, W, p, spec, convention=cfg.phase_convention), cv.sweep_virasoro(Ms, W, p),
            cv.sweep_central_charge(Ms, W)]


def suite_convergence(cfg):
    out = []
    w = cfg.tolerances.slope_window
    for s in sweeps(cfg):
        if s.name == "virasoro_T1_T2":
            out.append(cv.virasoro_record(s, window=w))
        elif s.name == "central_charge":
            e = np.asarray(s.err)
            ok = bool(np.all(np.diff(e) < 0) and e[-1] <= cfg.tolerances.central_charge)
            out.append(CheckRecord("converge.central_charge", s.ref, s.extra["ratio"], 1 / 12,
                                   float(e[-1]) / 12, float(e[-1]), ok, slope=s.slope,
                                   kind="convergence", tolerance=cfg.tolerances.central_charge,
                                   note="monotone over the sweep"))
        else:
            out.append(s.record(window=w))
    return out


def suite_bogoliubov(cfg):
    g, _ = _context(cfg)
    tq = cfg.tolerances.quadrature
    out = []
    for mp in (make_map("identity"), make_map("translation", b=1.3), make_map("dilation", lam=0.4)):
        bp = bogoliubov(mp, g)
        out.append(CheckRecord(f"bogoliubov.{mp.kind}_beta", "homographic maps keep the vacuum",
                               bp.beta_norm, 0.0, bp.beta_norm, None, bool(bp.beta_norm <= tq),
                               kind="quadrature", tolerance=tq,
                               note=f"quadrature error {bp.meta['quadrature_error']:.1e}"))
    for k, lo, hi in ((2, 1.9, np.inf), (3, 0.8, 1.2)):
        r = perturbation_scaling(k, [1e-4, 1e-3, 1e-2], g, cfg.p)
        out.append(CheckRecord(f"bogoliubov.perturbation_k{k}", f"pair creation under u + eps u^{k}",
                               r["beta"], [lo, hi], None, None, bool(lo <= r["slope"] <= hi),
                               slope=r["slope"], kind="convergence"))
    a = 1.0
    om = np.geomspace(0.1, 1.0, 10) * a
    r = rindler_planck_check(a, 2.0, om)
    worst = float(r["rel_err"].max())
    out.append(CheckRecord("bogoliubov.rindler_planck", "acceleration turns vacuum into a thermal bath "
                           "(oracle: exponential-map Mellin integral)", r["occupation"], r["planck"],
                           None, worst, bool(worst <= 0.05), kind="quadrature", tolerance=0.05,
                           note="one decade of Rindler frequency at fixed inertial frequency"))
    return out


def suite_doppler(cfg):
    M = max(cfg.sweep)
    g = make_grid(M, cfg.omega_max / M, cfg.hbar)
    D = derivative_matrix(g, cfg.p)
    pk = gaussian_packet(g, cfg.packet_omega_c or 0.5 * g.omega_max, cfg.packet_sigma_omega,
                         max(cfg.packet_u0, 1.5), support=D.interior, cut=1e-10)
    r = doppler_experiment(pk, 1e-2, build_basis(g, 1), D)
    tol = cfg.tolerances
    return [CheckRecord("doppler.shift", "acceleration shift proportional to position", r["rel_l2"], 0.0,
                        None, r["rel_l2"], bool(r["rel_l2"] <= tol.doppler), kind="discretization",
                        tolerance=tol.doppler, note=f"sigma_u Omega_max = {r['sigma_u_omega_max']:.3g}"),
            CheckRecord("doppler.position", "Newton-Wigner position of the packet", r["m_expectation"],
                        r["u0"], abs(r["m_expectation"] - r["u0"]), r["m_rel_err"],
                        bool(r["m_rel_err"] <= tol.doppler_position), kind="discretization",
                        tolerance=tol.doppler_position)]


SUITES = {"quadform": suite_quadform, "oracle": suite_oracle, "invariance": suite_invariance,
          "canonical": suite_canonical, "position": suite_position, "phase": suite_phase,
          "convergence": suite_convergence, "bogoliubov": suite_bogoliubov, "doppler": suite_doppler,
          "dual": suite_dual}


@dataclass
class VerificationReport:
    records: list
    config: SuiteConfig

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def environment(self) -> dict:
        return {"schema": SCHEMA_VERSION, "version": __version__, "config_hash": self.config.digest(),
                "python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__}

    def to_dict(self) -> dict:
        return {"environment": self.environment(), "config": self.config.to_dict(),
                "passed": self.passed, "records": [r.to_dict() for r in self.records]}

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "report.json"
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return path


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _run_one(name, cfg):
    t0 = time.perf_counter()
    recs = SUITES[name](cfg)
    dt = time.perf_counter() - t0
    for r in recs:
        if not r.runtime:
            r.runtime = dt / len(recs)
    return recs


def run_suite(cfg: SuiteConfig) -> VerificationReport:
    names = [s for s in ALL_SUITES if s in cfg.suites]
    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        results = list(pool.map(lambda n: _run_one(n, cfg), names))
    records = sorted((r for rs in results for r in rs), key=lambda r: r.check_id)
    return VerificationReport(records, cfg)


def converge(cfg: SuiteConfig, path=None) -> list:
    if len(cfg.sweep) < 3:
        raise ValueError("a sweep needs at least three refinements")
    res = sweeps(cfg)
    if path is not None:
        rows = [row for s in res for row in s.rows()]
        cols = ["identity", "M", "domega", "error", "slope", "ratio"]
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols, restval="")
            w.writeheader()
            w.writerows(rows)
    return res
