"""Configuration-driven command line front end.

Commands: `run <config> [--plot] [--seed S] [--runs R]`, `check`, `version`.
Config files are flat `section.key = value` lines ('#' starts a comment).
CSV output is the contract: every float is printed with 17 significant
digits so files round-trip double precision and identical configs produce
byte-identical output.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    compare_models,
    distance_to_gibbs,
    equivalence_coupling,
    ratio_scan,
)
from .bath import build_bath_spec, partition_function
from .collisional import CollisionConfig, cm_evolve
from .linalg import herm_eig
from .metropolis import MetropolisConfig, kernel_backend, mc_evolve
from .model import (
    SpinChainParams,
    build_xxz,
    gibbs_state,
    transitions,
    uniform_superposition_state,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_NUMERIC = 4

ENGINES = (
    "cm_exact",
    "cm_second_order",
    "mc_trajectories",
    "mc_averaged",
    "compare",
    "ratio_scan",
)

_KNOWN_KEYS = {
    "model.n_sites",
    "model.coupling",
    "model.field",
    "model.anisotropy",
    "run.engine",
    "run.beta",
    "run.initial_state",
    "run.initial_diagonal",
    "output.dir",
    "collision.g",
    "collision.dt",
    "collision.ts",
    "collision.steps",
    "collision.include_free_evolution",
    "mc.steps",
    "mc.runs",
    "mc.seed",
    "scan.n_values",
    "scan.betas",
}


class ConfigParseError(Exception):
    """Malformed config file (exit 2)."""


class ValidationError(Exception):
    """Config violates an invariant (exit 3)."""


class NumericError(Exception):
    """Non-finite values produced mid-run (exit 4)."""


def _parse_lines(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"line {lineno}: expected 'section.key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigParseError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigParseError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigParseError(f"line {lineno}: empty value for {key!r}")
        values[key] = value
    return values


def _to_float(values: dict[str, str], key: str) -> float:
    try:
        return float(values[key])
    except ValueError:
        raise ConfigParseError(f"{key}: not a number: {values[key]!r}") from None


def _to_int(values: dict[str, str], key: str) -> int:
    try:
        return int(values[key])
    except ValueError:
        raise ConfigParseError(f"{key}: not an integer: {values[key]!r}") from None


def _to_bool(values: dict[str, str], key: str) -> bool:
    text = values[key].lower()
    if text in ("true", "yes", "1", "on"):
        return True
    if text in ("false", "no", "0", "off"):
        return False
    raise ConfigParseError(f"{key}: not a boolean: {values[key]!r}")


def _to_list(values: dict[str, str], key: str, conv) -> list:
    try:
        return [conv(part) for part in values[key].split(",") if part.strip()]
    except ValueError:
        raise ConfigParseError(f"{key}: not a comma-separated list: {values[key]!r}") from None


def _require(values: dict[str, str], key: str) -> None:
    if key not in values:
        raise ValidationError(f"missing required key {key!r}")


@dataclass
class ExperimentConfig:
    engine: str
    output: Path
    model: SpinChainParams | None = None
    beta: float | None = None
    initial_state: str = "uniform_superposition"
    initial_diagonal: np.ndarray | None = None
    collision: CollisionConfig | None = None
    mc: MetropolisConfig | None = None
    scan_n_values: list[int] | None = None
    scan_betas: list[float] | None = None


def load_config(
    path: str | Path,
    seed_override: int | None = None,
    runs_override: int | None = None,
) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigParseError(f"cannot read config: {exc}") from None
    values = _parse_lines(text)

    _require(values, "run.engine")
    engine = values["run.engine"]
    if engine not in ENGINES:
        raise ValidationError(f"unknown engine {engine!r}; expected one of {ENGINES}")
    _require(values, "output.dir")
    cfg = ExperimentConfig(engine=engine, output=Path(values["output.dir"]))

    if engine == "ratio_scan":
        _require(values, "scan.n_values")
        _require(values, "scan.betas")
        cfg.scan_n_values = _to_list(values, "scan.n_values", int)
        cfg.scan_betas = _to_list(values, "scan.betas", float)
        if not cfg.scan_n_values or not cfg.scan_betas:
            raise ValidationError("scan.n_values and scan.betas must be non-empty")
        if any(n < 2 for n in cfg.scan_n_values):
            raise ValidationError("scan.n_values entries must be >= 2")
        coupling = _to_float(values, "model.coupling") if "model.coupling" in values else 1.0
        field = _to_float(values, "model.field") if "model.field" in values else 1.0
        aniso = _to_float(values, "model.anisotropy") if "model.anisotropy" in values else 1.0
        cfg.model = SpinChainParams(2, coupling, field, aniso)  # couplings reused per N
        return cfg

    _require(values, "model.n_sites")
    _require(values, "run.beta")
    try:
        cfg.model = SpinChainParams(
            n_sites=_to_int(values, "model.n_sites"),
            coupling=_to_float(values, "model.coupling") if "model.coupling" in values else 1.0,
            field=_to_float(values, "model.field") if "model.field" in values else 1.0,
            anisotropy=_to_float(values, "model.anisotropy")
            if "model.anisotropy" in values
            else 1.0,
        )
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    cfg.beta = _to_float(values, "run.beta")
    if not (np.isfinite(cfg.beta) and cfg.beta >= 0):
        raise ValidationError(f"run.beta must be finite and >= 0, got {cfg.beta}")

    cfg.initial_state = values.get("run.initial_state", "uniform_superposition")
    if cfg.initial_state not in ("uniform_superposition", "ground", "gibbs", "custom"):
        raise ValidationError(f"unknown initial state {cfg.initial_state!r}")
    if cfg.initial_state == "custom":
        _require(values, "run.initial_diagonal")
        diag = np.array(_to_list(values, "run.initial_diagonal", float))
        if abs(diag.sum() - 1.0) > 1e-9:
            raise ValidationError(
                f"custom diagonal sums to {diag.sum()!r}, must be 1 within 1e-9"
            )
        if np.any(diag < 0):
            raise ValidationError("custom diagonal entries must be non-negative")
        cfg.initial_diagonal = diag

    try:
        if engine in ("cm_exact", "cm_second_order"):
            for key in ("collision.g", "collision.dt", "collision.ts", "collision.steps"):
                _require(values, key)
            cfg.collision = CollisionConfig(
                g=_to_float(values, "collision.g"),
                dt=_to_float(values, "collision.dt"),
                ts=_to_float(values, "collision.ts"),
                beta=cfg.beta,
                steps=_to_int(values, "collision.steps"),
                include_free_evolution=_to_bool(values, "collision.include_free_evolution")
                if "collision.include_free_evolution" in values
                else True,
            )
        else:  # mc_trajectories, mc_averaged, compare
            _require(values, "mc.steps")
            if engine != "mc_averaged":
                _require(values, "mc.runs")
                _require(values, "mc.seed")
            runs = _to_int(values, "mc.runs") if "mc.runs" in values else 1
            seed = _to_int(values, "mc.seed") if "mc.seed" in values else 0
            if runs_override is not None:
                runs = runs_override
            if seed_override is not None:
                seed = seed_override
            cfg.mc = MetropolisConfig(
                beta=cfg.beta, steps=_to_int(values, "mc.steps"), runs=runs, seed=seed
            )
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    return cfg


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _check_finite(states) -> None:
    for state in states:
        if not np.all(np.isfinite(np.asarray(state).view(np.float64))):
            raise NumericError("non-finite values detected mid-run")


def _initial_state(cfg: ExperimentConfig, energies: np.ndarray) -> np.ndarray:
    d = len(energies)
    if cfg.initial_state == "uniform_superposition":
        return uniform_superposition_state(d)
    if cfg.initial_state == "ground":
        rho = np.zeros((d, d), dtype=np.complex128)
        rho[0, 0] = 1.0
        return rho
    if cfg.initial_state == "gibbs":
        return gibbs_state(energies, cfg.beta)
    diag = cfg.initial_diagonal
    if len(diag) != d:
        raise ValidationError(f"custom diagonal has length {len(diag)}, expected {d}")
    return np.diag(diag).astype(np.complex128)


def run_experiment(cfg: ExperimentConfig, plot: bool = False) -> None:
    start = time.perf_counter()
    cfg.output.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    summary: list[str] = [f"engine           {cfg.engine}"]

    try:
        if cfg.engine == "ratio_scan":
            points = ratio_scan(
                cfg.scan_n_values,
                cfg.scan_betas,
                coupling=cfg.model.coupling,
                field=cfg.model.field,
                anisotropy=cfg.model.anisotropy,
            )
            path = cfg.output / "ratio.csv"
            _write_csv(
                path,
                ["n_sites", "beta", "za_over_l"],
                [[str(p.n_sites), _fmt(p.beta), _fmt(p.za_over_l)] for p in points],
            )
            written.append(path)
            summary.append(f"cells            {len(points)}")
            if plot:
                _plot_ratio(cfg.output, points)
        else:
            h_system = build_xxz(cfg.model)
            energies = herm_eig(h_system).values
            d = len(energies)
            spec = build_bath_spec(transitions(energies))
            z_a = partition_function(spec, cfg.beta)
            ratio = z_a / (d - 1)
            rho0 = _initial_state(cfg, energies)
            summary.extend(
                [
                    f"model            N={cfg.model.n_sites} J={cfg.model.coupling} "
                    f"h={cfg.model.field} anisotropy={cfg.model.anisotropy}",
                    f"beta             {_fmt(cfg.beta)}",
                    f"Z_a              {_fmt(z_a)}",
                    f"Z_a/L            {_fmt(ratio)}",
                ]
            )

            if cfg.engine == "compare":
                report = compare_models(
                    h_system,
                    cfg.beta,
                    cfg.mc.steps,
                    cfg.mc.runs,
                    cfg.mc.seed,
                    rho0=rho0,
                )
                _check_finite([report.trace_distance])
                path = cfg.output / "comparison.csv"
                _write_csv(
                    path,
                    ["n", "D", "min_eig_cm", "min_eig_mc"],
                    [
                        [
                            str(n),
                            _fmt(report.trace_distance[n]),
                            _fmt(report.min_eig_cm[n]),
                            _fmt(report.min_eig_mc[n]),
                        ]
                        for n in range(cfg.mc.steps + 1)
                    ],
                )
                written.append(path)
                summary.append(f"g dt             {_fmt(report.coupling_used)}")
                summary.append(f"runs             {report.runs}")
                if plot:
                    _plot_series(
                        cfg.output / "comparison.svg",
                        report.trace_distance,
                        "trace distance between engines",
                    )
            else:
                if cfg.engine == "cm_exact":
                    series = cm_evolve(h_system, cfg.collision, rho0, "exact")
                    g_dt = cfg.collision.g * cfg.collision.dt
                elif cfg.engine == "cm_second_order":
                    series = cm_evolve(h_system, cfg.collision, rho0, "second_order")
                    g_dt = cfg.collision.g * cfg.collision.dt
                elif cfg.engine == "mc_trajectories":
                    series = mc_evolve(energies, cfg.mc, rho0, "trajectories")
                    g_dt = equivalence_coupling(z_a, d)
                    summary.append(f"runs             {cfg.mc.runs}")
                    summary.append(f"seed             {cfg.mc.seed}")
                else:  # mc_averaged
                    series = mc_evolve(energies, cfg.mc, rho0, "averaged_map")
                    g_dt = equivalence_coupling(z_a, d)
                _check_finite(series.states)
                summary.append(f"g dt             {_fmt(g_dt)}")

                occ = series.occupations()
                path = cfg.output / "occupations.csv"
                _write_csv(
                    path,
                    ["n"] + [f"p_{k + 1}" for k in range(d)],
                    [[str(n)] + [_fmt(x) for x in occ[n]] for n in range(len(series))],
                )
                written.append(path)

                distances = distance_to_gibbs(series, h_system, cfg.beta)
                path = cfg.output / "tracedist.csv"
                _write_csv(
                    path,
                    ["n", "D"],
                    [[str(n), _fmt(distances[n])] for n in range(len(series))],
                )
                written.append(path)
                if plot:
                    _plot_occupations(cfg.output, occ, gibbs_state(energies, cfg.beta))
                    _plot_series(
                        cfg.output / "tracedist.svg", distances, "trace distance to Gibbs"
                    )
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"linear algebra failure mid-run: {exc}") from None

    elapsed = time.perf_counter() - start
    summary.append(f"wall time        {elapsed:.3f} s")
    summary.append("files            " + " ".join(str(p) for p in written))
    print("\n".join(summary))


def _plot_series(path: Path, values: np.ndarray, label: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.plot(range(len(values)), values, marker="o", ms=3)
    ax.set_xlabel("step n")
    ax.set_ylabel(label)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _plot_occupations(outdir: Path, occ: np.ndarray, gibbs: np.ndarray) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3.4))
    steps = range(occ.shape[0])
    for k in range(occ.shape[1]):
        (line,) = ax.plot(steps, occ[:, k], label=f"p_{k + 1}")
        ax.axhline(np.real(gibbs[k, k]), ls="--", lw=0.8, color=line.get_color())
    ax.set_xlabel("step n")
    ax.set_ylabel("occupation probability")
    if occ.shape[1] <= 8:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(outdir / "occupations.svg")
    plt.close(fig)


def _plot_ratio(outdir: Path, points) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3.4))
    betas = sorted({p.beta for p in points})
    for beta in betas:
        rows = [p for p in points if p.beta == beta]
        ax.plot(
            [p.n_sites for p in rows],
            [p.za_over_l for p in rows],
            marker="o",
            ms=3,
            label=f"beta={beta:g}",
        )
    floor_rows = sorted({(p.n_sites, p.nondegenerate_floor) for p in points})
    ax.plot(
        [n for n, _ in floor_rows],
        [f for _, f in floor_rows],
        "k:",
        label="non-degenerate floor",
    )
    ax.set_yscale("log")
    ax.set_xlabel("chain length N")
    ax.set_ylabel("Z_a / L")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(outdir / "ratio.svg")
    plt.close(fig)


def _run_checks() -> int:
    """Built-in property suites; one pass/fail line each."""
    from .collisional import cm_step_second_order
    from .metropolis import (
        TrajectoryState,
        acceptance_matrix,
        mc_averaged_map,
        mc_trajectory_step,
    )

    rng = np.random.default_rng(424242)

    def random_density(d: int) -> np.ndarray:
        x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        rho = x @ x.conj().T
        return rho / np.trace(rho).real

    failures = 0

    def report(name: str, ok: bool, detail: str) -> None:
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
        if not ok:
            failures += 1

    # Gibbs fixed points of both single-step maps
    worst = 0.0
    for n in (2, 3):
        energies = herm_eig(build_xxz(SpinChainParams(n))).values
        table = transitions(energies)
        spec = build_bath_spec(table)
        for beta in (0.2, 2.0, 20.0):
            gibbs = gibbs_state(energies, beta)
            z_a = partition_function(spec, beta)
            g_dt = float(np.sqrt(z_a / (2**n - 1)))
            out_cm = cm_step_second_order(gibbs, table, beta, g_dt, z_a)
            out_mc = mc_averaged_map(gibbs, energies, beta)
            worst = max(
                worst,
                float(np.max(np.abs(out_cm - gibbs))),
                float(np.max(np.abs(out_mc - gibbs))),
            )
    report("gibbs_fixed_points", worst <= 1e-12, f"max residual {worst:.2e}")

    # map equivalence at the matched coupling
    worst = 0.0
    for n in (2, 3):
        energies = herm_eig(build_xxz(SpinChainParams(n))).values
        table = transitions(energies)
        spec = build_bath_spec(table)
        for beta in (2.0, 20.0):
            z_a = partition_function(spec, beta)
            g_dt = float(np.sqrt(z_a / (2**n - 1)))
            for _ in range(100):
                rho = random_density(2**n)
                diff = cm_step_second_order(rho, table, beta, g_dt, z_a) - mc_averaged_map(
                    rho, energies, beta
                )
                worst = max(worst, float(np.max(np.abs(diff))))
    report("map_equivalence", worst <= 1e-12, f"max deviation {worst:.2e}")

    # unraveling: exhaustive expectation of the trajectory step
    energies = herm_eig(build_xxz(SpinChainParams(2))).values
    beta = 2.0
    alpha = acceptance_matrix(energies, beta)
    worst = 0.0

    class _Fixed:
        def __init__(self, draws):
            self._draws = list(draws)

        def random(self):
            return self._draws.pop(0)

    for _ in range(50):
        rho = random_density(4)
        d = 4
        populations = np.real(np.diag(rho))
        cum = np.cumsum(populations)
        expected = np.zeros_like(rho)
        for i in range(d):
            if populations[i] <= 0:
                continue
            lo = cum[i - 1] if i else 0.0
            u_source = (lo + cum[i]) / 2
            for jx in range(d - 1):
                j = jx + 1 if jx >= i else jx
                u_target = (jx + 0.5) / (d - 1)
                a = alpha[i, j]
                branches = [(a, a / 2)]
                if a < 1.0:
                    branches.append((1.0 - a, (1.0 + a) / 2))
                for probability, u_accept in branches:
                    step = mc_trajectory_step(
                        TrajectoryState(rho.copy()),
                        energies,
                        beta,
                        _Fixed([u_source, u_target, u_accept]),
                    )
                    expected += populations[i] / (d - 1) * probability * step.matrix
        worst = max(
            worst, float(np.max(np.abs(expected - mc_averaged_map(rho, energies, beta))))
        )
    report("unraveling_enumeration", worst <= 1e-12, f"max deviation {worst:.2e}")

    return EXIT_OK if failures == 0 else 1


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="qcollide",
        description="Collisional-model and eigenstate-jump Monte Carlo thermalization runs",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run an experiment from a config file")
    run_p.add_argument("config")
    run_p.add_argument("--plot", action="store_true", help="emit SVG plots next to CSVs")
    run_p.add_argument("--seed", type=int, default=None, help="override mc.seed")
    run_p.add_argument("--runs", type=int, default=None, help="override mc.runs")
    sub.add_parser("check", help="run the built-in property suites")
    sub.add_parser("version", help="print version and kernel backend")

    args = parser.parse_args(argv)
    if args.command == "version":
        print(f"qcollide {__version__} (kernel: {kernel_backend()})")
        return EXIT_OK
    if args.command == "check":
        return _run_checks()
    try:
        cfg = load_config(args.config, seed_override=args.seed, runs_override=args.runs)
        run_experiment(cfg, plot=args.plot)
    except ConfigParseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def console_entry() -> None:
    sys.exit(main())
