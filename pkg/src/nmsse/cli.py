"""Command-line entry point: ``nmsse {trajectory,ensemble,bohm,verify,convergence}``.

Runs are driven by a flat JSON config (see README for the keys).  All
output is CSV with 17 significant digits.  Exit codes: 0 success,
2 configuration error, 3 numerical failure (singularity, degenerate
state), 4 failed verification check.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .bath import BathSpec, sample_batch
from .bohm import bohmian_bundle
from .ensemble import compare, convergence_study, oracle_rho_series, run_ensemble
from .errors import ConfigError, DegenerateStateError, SingularityError, TrajectoryError
from .qcore import NORM_TOL, SystemState, bloch_array
from .sse import COEFFICIENTS, METHODS, MODES, IntegratorConfig, run_trajectory
from .verify import run_checks

log = logging.getLogger("nmsse")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECK = 0, 2, 3, 4


def fmt(value) -> str:
    return format(float(value), ".17g")


@dataclass
class RunConfig:
    """Flat run configuration; defaults reproduce the single-mode example
    (g = 1, dt = 1e-4, atom initially excited)."""

    bath: list = field(default_factory=lambda: [[1.0, 0.0, 0.0]])
    t0: float = 0.0
    amp_e: list = field(default_factory=lambda: [1.0, 0.0])
    amp_b: list = field(default_factory=lambda: [0.0, 0.0])
    dt: float = 1e-4
    horizon: float = 1.5
    method: str = "rk4"
    coefficients: str = "ode"
    blowup_threshold: float = 1e6
    N: int = 1000
    master_seed: int = 0
    mode: str = "nonlinear"
    stride: int = 100
    out_dir: str = "out"
    convergence_N: list = field(default_factory=lambda: [250, 1000, 4000])
    convergence_seeds: list = field(default_factory=lambda: list(range(8)))

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        cfg = cls(**raw)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be an object")
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return asdict(self)

    # -- derived objects --

    def bath_spec(self) -> BathSpec:
        return BathSpec.from_triples(self.bath, self.t0)

    def initial_state(self) -> SystemState:
        try:
            amp_e = complex(*map(float, self.amp_e))
            amp_b = complex(*map(float, self.amp_b))
        except (TypeError, ValueError) as exc:
            raise ConfigError("amp_e and amp_b must be [re, im] pairs") from exc
        norm_sq = abs(amp_e) ** 2 + abs(amp_b) ** 2
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ConfigError(f"initial state must be normalized (norm^2 = {norm_sq!r})")
        return SystemState(amp_e, amp_b)

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(
            dt=float(self.dt),
            horizon=float(self.horizon),
            method=self.method,
            blowup_threshold=float(self.blowup_threshold),
            stride=int(self.stride),
            coefficients=self.coefficients,
        )

    def validate(self):
        try:
            self._validate()
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed config value: {exc}") from exc

    def _validate(self):
        spec = self.bath_spec()
        self.initial_state()
        self.integrator()
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.method not in METHODS or self.coefficients not in COEFFICIENTS:
            raise ConfigError("bad method or coefficients")
        if int(self.N) != self.N or self.N < 1:
            raise ConfigError("N must be a positive integer")
        if int(self.master_seed) != self.master_seed or self.master_seed < 0:
            raise ConfigError("master_seed must be a non-negative integer")
        if spec.is_resonant_single_mode:
            reach = abs(spec.couplings[0]) * self.horizon
            if reach >= np.pi / 2:
                raise ConfigError(
                    f"|g| * horizon = {reach:.4g} >= pi/2: the ansatz coefficient "
                    "|g| tan(|g| t) has a pole there; shorten the horizon"
                )
        if self.coefficients == "analytic" and not spec.is_resonant_single_mode:
            raise ConfigError("analytic coefficients need a single resonant mode")


def _write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, (int, np.integer)) else fmt(v) for v in row])


def cmd_trajectory(cfg: RunConfig, jobs=1) -> list[Path]:
    spec = cfg.bath_spec()
    records = run_trajectory(spec, cfg.initial_state(), cfg.integrator(), cfg.master_seed, cfg.mode)
    header = ["t", "bloch_x", "bloch_y", "bloch_z"]
    header += [f"x_{k + 1}" for k in range(spec.K)] + ["re_z", "im_z", "weight"]
    rows = ([r.t, *r.bloch, *r.coords, r.re_z, r.im_z, r.weight] for r in records)
    path = Path(cfg.out_dir) / "trajectory.csv"
    _write_csv(path, header, rows)
    return [path]


def cmd_ensemble(cfg: RunConfig, jobs=1) -> list[Path]:
    spec, init = cfg.bath_spec(), cfg.initial_state()
    acc = run_ensemble(spec, init, cfg.integrator(), cfg.N, cfg.master_seed, cfg.mode, jobs)
    rho = acc.mean_rho()
    bl = bloch_array(rho)
    se = acc.bloch_stderr()
    out = Path(cfg.out_dir)
    ens_path = out / "ensemble.csv"
    _write_csv(
        ens_path,
        ["t", "bloch_x", "bloch_y", "bloch_z", "se_x", "se_y", "se_z",
         "rho_ee", "rho_bb", "re_rho_eb", "im_rho_eb", "mean_weight"],
        (
            [t, *b, *s, r[0, 0].real, r[1, 1].real, r[0, 1].real, r[0, 1].imag, w]
            for t, b, s, r, w in zip(acc.times, bl, se, rho, acc.mean_weight())
        ),
    )
    report = compare(acc, acc.times, oracle_rho_series(spec, init, acc.times, dt=cfg.integrator().step))
    cmp_path = out / "comparison.csv"
    _write_csv(cmp_path, ["t", "d_x", "d_y", "d_z", "max_entry_diff"], report.rows())
    log.info("N=%d  max Bloch diff %.4g  RMS %.4g", acc.count, report.max_bloch_diff, report.rms_bloch_diff)
    return [ens_path, cmp_path]


def cmd_bohm(cfg: RunConfig, jobs=1) -> list[Path]:
    spec = cfg.bath_spec()
    x0 = sample_batch(spec, cfg.master_seed, range(cfg.N))
    times, xs = bohmian_bundle(spec, cfg.initial_state(), x0, cfg.integrator())
    path = Path(cfg.out_dir) / "bohm.csv"
    header = ["traj", "t"] + [f"x_{k + 1}" for k in range(spec.K)]
    rows = ([j, t, *xs[m, j]] for j in range(xs.shape[1]) for m, t in enumerate(times))
    _write_csv(path, header, rows)
    return [path]


def cmd_verify(cfg: RunConfig, jobs=1) -> bool:
    results = run_checks(cfg.bath_spec(), cfg.initial_state(), cfg.integrator(), cfg.master_seed)
    for r in results:
        print(r.line())
    return all(r.passed for r in results)


def cmd_convergence(cfg: RunConfig, jobs=1) -> list[Path]:
    table = convergence_study(
        cfg.bath_spec(), cfg.initial_state(), cfg.integrator(),
        cfg.convergence_N, cfg.convergence_seeds, cfg.mode, jobs,
    )
    path = Path(cfg.out_dir) / "convergence.csv"
    _write_csv(path, ["N", "rms_error"], zip(table.N, table.rms_error))
    print(f"fitted log-log slope: {table.slope:.4f}")
    return [path]


COMMANDS = {
    "trajectory": cmd_trajectory,
    "ensemble": cmd_ensemble,
    "bohm": cmd_bohm,
    "verify": cmd_verify,
    "convergence": cmd_convergence,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nmsse", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="JSON run configuration (defaults if omitted)")
    ap.add_argument("--seed", type=int, help="override master_seed")
    ap.add_argument("--jobs", type=int, default=1, help="worker processes (results do not depend on it)")
    ap.add_argument("--out", help="override out_dir")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = RunConfig.load(args.config) if args.config else RunConfig()
        if args.seed is not None:
            cfg.master_seed = args.seed
        if args.out is not None:
            cfg.out_dir = args.out
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        cfg.validate()
        start = time.perf_counter()
        result = COMMANDS[args.command](cfg, args.jobs)
        log.info("%s finished in %.2f s", args.command, time.perf_counter() - start)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SingularityError as exc:
        where = f" at t={exc.t:.6g}" if exc.t is not None else ""
        print(f"numerical singularity{where}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DegenerateStateError, TrajectoryError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.command == "verify":
        return EXIT_OK if result else EXIT_CHECK
    for path in result:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
