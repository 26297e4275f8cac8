"""Reproducibility front-end: every experiment as a shell command.

Each run writes its CSV next to a manifest (full configuration + seed +
version) sufficient to reproduce it byte-for-byte.  Physics parameters
(eta, w, rounds, ...) are never defaulted silently: commands that need
them fail loudly when they are absent.  Config files use flat
``key = value`` lines mirroring the long option names; command-line
flags override file values, and unknown keys are rejected.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import secrets
import sys
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import __version__
from .codes import build_code
from .colorings import (
    elongated_coloring,
    shor_density_coloring,
    surface_density_coloring,
    tailored_coloring,
)
from .harness import (
    CSV_HEADER,
    BatchConfig,
    batch_csv_row,
    estimate_threshold,
    run_batch,
    sweep_bias,
    write_csv,
)
from .noise import channel_from_bias, linear_profile_map, sample_pauli, uniform_map
from .rbim import RBIM_CSV_HEADER, critical_csv_rows, find_critical

COMMANDS = ("code", "sample", "threshold", "sweep-eta", "rbim", "tailored")


@dataclass
class ExperimentConfig:
    command: str
    params: dict
    out: str
    seed: int


class UsageError(Exception):
    pass


def parse_grid(text: str) -> np.ndarray:
    """Parse ``start:stop:count`` into a linspace grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be start:stop:count, got {text!r}")
    start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1:
        raise UsageError(f"grid count must be >= 1, got {count}")
    return np.linspace(start, stop, count)


def parse_sizes(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t]


def _build_parser(command: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog=f"compass {command}", add_help=False)
    p.add_argument("--config")
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    fam = command in ("code", "sample", "threshold")
    if fam:
        p.add_argument("--family", choices=("elongated", "surface-density", "shor-density", "tailored"))
        p.add_argument("--ell", type=int, default=None)
        p.add_argument("--q-surf", type=float, default=None)
        p.add_argument("--q-shor", type=float, default=None)
    if command in ("code", "sample", "tailored"):
        p.add_argument("--L", type=int, default=None)
    if command == "code":
        p.add_argument("--dump", action="store_true")
        p.add_argument("--p", type=float, default=None)
        p.add_argument("--w", type=float, default=None)
    if command == "sample":
        p.add_argument("--p", type=float, default=None)
        p.add_argument("--eta", type=float, default=None)
        p.add_argument("--w", type=float, default=None)
        p.add_argument("--noise", choices=("biased", "linear"), default=None)
        p.add_argument("--rounds", type=int, default=None)
    if command == "threshold":
        p.add_argument("--decoder", choices=("uf", "uf-unweighted", "mwpm"))
        p.add_argument("--boundary", choices=("open", "periodic"), default=None)
        p.add_argument("--eta", type=float, default=None)
        p.add_argument("--w", type=float, default=None)
        p.add_argument("--noise", choices=("biased", "linear", "random-uniform"), default=None)
        p.add_argument("--sizes")
        p.add_argument("--p-grid")
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--rounds", type=int, default=None)
        p.add_argument("--measure", choices=("both", "z", "x"), default=None)
    if command == "sweep-eta":
        p.add_argument("--ell", type=int, default=None)
        p.add_argument("--decoder", choices=("uf", "uf-unweighted", "mwpm"))
        p.add_argument("--boundary", choices=("open", "periodic"), default=None)
        p.add_argument("--sizes")
        p.add_argument("--eta-grid")
        p.add_argument("--z-grid")
        p.add_argument("--x-grid")
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--rounds", type=int, default=None)
        p.add_argument("--surface-ref", type=float, default=None)
    if command == "rbim":
        p.add_argument("--q-surf", type=float, default=None)
        p.add_argument("--sizes")
        p.add_argument("--p-grid")
        p.add_argument("--realizations", type=int, default=None)
        p.add_argument("--sweeps", type=int, default=None)
        p.add_argument("--therm", type=int, default=None)
    if command == "tailored":
        p.add_argument("--decoder", choices=("uf", "uf-unweighted", "mwpm"))
        p.add_argument("--boundary", choices=("open", "periodic"), default=None)
        p.add_argument("--w", type=float, default=None)
        p.add_argument("--p-grid")
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--rounds", type=int, default=None)
    return p


def _load_config_file(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{ln}: expected key = value")
            key, val = (t.strip() for t in line.split("=", 1))
            values[key.replace("-", "_")] = val
    return values


def parse_config(argv: list[str]) -> ExperimentConfig:
    """Parse command line (and optional config file) into a validated config."""
    if not argv or argv[0] in ("-h", "--help"):
        raise UsageError(
            "usage: compass {" + ",".join(COMMANDS) + "} [options]"
        )
    command = argv[0]
    if command not in COMMANDS:
        raise UsageError(f"unknown command {command!r}")
    parser = _build_parser(command)
    known = {a.dest for a in parser._actions}
    ns, extra = parser.parse_known_args(argv[1:])
    if extra:
        raise UsageError(f"unknown argument {extra[0]!r}")
    if ns.config:
        file_values = _load_config_file(ns.config)
        for key, val in file_values.items():
            if key not in known or key == "config":
                raise UsageError(f"unknown config key {key!r}")
        # Flags override file keys: re-parse with file values as defaults.
        defaults = {}
        for key, val in file_values.items():
            action = next(a for a in parser._actions if a.dest == key)
            if isinstance(action, argparse._StoreTrueAction):
                defaults[key] = val.lower() in ("1", "true", "yes")
            elif action.type is not None:
                defaults[key] = action.type(val)
            else:
                defaults[key] = val
        parser.set_defaults(**defaults)
        ns, _ = parser.parse_known_args(argv[1:])
    params = vars(ns)
    params.pop("config", None)
    seed = params.pop("seed", None)
    if seed is None:
        seed = secrets.randbits(48)
    out = params.pop("out", None) or f"{command}.csv"
    env_dir = os.environ.get("COMPASS_OUTPUT_DIR")
    if env_dir:
        out = os.path.join(env_dir, os.path.basename(out))
    _validate(command, params)
    return ExperimentConfig(command, params, out, int(seed))


def _require(params: dict, command: str, *keys: str) -> None:
    for key in keys:
        if params.get(key) is None:
            raise UsageError(f"{command!r} requires --{key.replace('_', '-')}")


def _validate(command: str, params: dict) -> None:
    fam = params.get("family")
    if fam is not None:
        allowed = {
            "elongated": {"ell"},
            "surface-density": {"q_surf"},
            "shor-density": {"q_shor"},
            "tailored": set(),
        }[fam]
        for key in ("ell", "q_surf", "q_shor"):
            if key not in allowed and params.get(key) is not None:
                raise UsageError(
                    f"--{key.replace('_', '-')} conflicts with --family {fam}"
                )
        if fam == "elongated":
            _require(params, command, "ell")
        if fam == "surface-density":
            _require(params, command, "q_surf")
        if fam == "shor-density":
            _require(params, command, "q_shor")
    if command == "code":
        _require(params, command, "family", "L")
    elif command == "sample":
        _require(params, command, "family", "L", "p", "noise", "rounds")
        if params["noise"] == "biased":
            _require(params, command, "eta")
        else:
            _require(params, command, "w")
    elif command == "threshold":
        _require(
            params, command, "family", "decoder", "boundary", "sizes",
            "p_grid", "trials", "rounds", "noise",
        )
        if params["noise"] == "biased":
            _require(params, command, "eta")
        if params["noise"] == "linear":
            _require(params, command, "w")
        if params.get("measure") is None:
            params["measure"] = "both"
    elif command == "sweep-eta":
        _require(
            params, command, "ell", "decoder", "boundary", "sizes",
            "eta_grid", "z_grid", "x_grid", "trials", "rounds",
        )
    elif command == "rbim":
        _require(
            params, command, "q_surf", "sizes", "p_grid", "realizations",
            "sweeps", "therm",
        )
    elif command == "tailored":
        _require(
            params, command, "decoder", "boundary", "L", "w", "p_grid",
            "trials", "rounds",
        )


def _write_manifest(cfg: ExperimentConfig) -> None:
    manifest = {
        "version": f"compasscodes-{__version__}",
        "command": cfg.command,
        "seed": cfg.seed,
        "out": cfg.out,
        "params": {
            k: (v if not isinstance(v, float) or math.isfinite(v) else str(v))
            for k, v in cfg.params.items()
        },
    }
    with open(cfg.out + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _make_coloring_cli(params: dict, L: int, rng, noise_map=None, p_tot=None):
    fam = params["family"]
    if fam == "elongated":
        return elongated_coloring(L, params["ell"])
    if fam == "surface-density":
        return surface_density_coloring(L, params["q_surf"], rng)
    if fam == "shor-density":
        return shor_density_coloring(L, params["q_shor"], rng)
    return tailored_coloring(noise_map, p_tot, rng)


def execute(cfg: ExperimentConfig) -> int:
    """Run the experiment, write artifacts, return an exit status."""
    params = cfg.params
    workers = params.get("workers") or os.cpu_count() or 1
    rng = np.random.default_rng(cfg.seed)

    if cfg.command == "code":
        L = params["L"]
        nm = None
        if params["family"] == "tailored":
            _require(params, "code", "p", "w")
            nm = linear_profile_map(L, params["p"], params["w"])
        coloring = _make_coloring_cli(params, L, rng, nm, params.get("p"))
        code = build_code(coloring)
        print(coloring.to_text(), end="")
        print(f"X-stabilizers: {code.n_x}")
        print(f"Z-stabilizers: {code.n_z}")
        if params.get("dump"):
            for i, s in enumerate(code.x_stabilizers):
                print(f"X {i}: {' '.join(map(str, s))}")
            for i, s in enumerate(code.z_stabilizers):
                print(f"Z {i}: {' '.join(map(str, s))}")
        return 0

    if cfg.command == "sample":
        L = params["L"]
        if params["noise"] == "biased":
            nm = uniform_map(L, channel_from_bias(params["p"], params["eta"]))
        else:
            nm = linear_profile_map(L, params["p"], params["w"])
        sample = sample_pauli(nm, params["rounds"], rng)
        with open(cfg.out, "w") as fh:
            fh.write(nm.to_csv())
        _write_manifest(cfg)
        print(f"z flips: {int(sample.z_flips.sum())}")
        print(f"x flips: {int(sample.x_flips.sum())}")
        print(f"noise map written to {cfg.out}")
        return 0

    if cfg.command == "threshold":
        base = BatchConfig(
            family=params["family"], decoder=params["decoder"],
            L=0 or parse_sizes(params["sizes"])[0], p=0.01, trials=1,
            master_seed=cfg.seed, boundary=params["boundary"],
            ell=params.get("ell"), q_surf=params.get("q_surf"),
            q_shor=params.get("q_shor"), w=params.get("w"),
            eta=params.get("eta"), rounds=params["rounds"],
            noise=params["noise"], measure=params["measure"], workers=workers,
        )
        est = estimate_threshold(
            base, parse_sizes(params["sizes"]), parse_grid(params["p_grid"]),
            params["trials"],
        )
        write_csv(est.all_batches, cfg.out)
        _write_manifest(cfg)
        if est.no_crossing:
            print("no crossing in scanned range")
        else:
            print(
                f"threshold p* = {est.p_star:.4f} "
                f"[{est.ci_low:.4f}, {est.ci_high:.4f}]"
            )
        print(f"results written to {cfg.out}")
        return 0

    if cfg.command == "sweep-eta":
        base = BatchConfig(
            family="elongated", decoder=params["decoder"],
            L=parse_sizes(params["sizes"])[0], p=0.01, trials=1,
            master_seed=cfg.seed, boundary=params["boundary"],
            ell=params["ell"], eta=0.5, rounds=params["rounds"],
            noise="biased", workers=workers,
        )
        sweep = sweep_bias(
            base, parse_grid(params["eta_grid"]), parse_sizes(params["sizes"]),
            parse_grid(params["z_grid"]), parse_grid(params["x_grid"]),
            params["trials"], params.get("surface_ref"),
        )
        write_csv(sweep.est_z.all_batches + sweep.est_x.all_batches, cfg.out)
        _write_manifest(cfg)
        print(f"m_z* = {sweep.m_z_star:.4f}  m_x* = {sweep.m_x_star:.4f}")
        print(f"eta_opt = {sweep.eta_opt:.3f}  p_thr = {sweep.p_thr_opt:.4f}")
        if sweep.eta_star is not None:
            print(f"eta_star = {sweep.eta_star:.3f}")
        print(f"results written to {cfg.out}")
        return 0

    if cfg.command == "rbim":
        sizes = parse_sizes(params["sizes"])
        est = find_critical(
            params["q_surf"], sizes, parse_grid(params["p_grid"]),
            params["realizations"], params["sweeps"], params["therm"],
            cfg.seed,
        )
        with open(cfg.out, "w") as fh:
            fh.write(RBIM_CSV_HEADER + "\n")
            for row in critical_csv_rows(params["q_surf"], est, sizes):
                fh.write(row + "\n")
        _write_manifest(cfg)
        if est.no_crossing:
            print("no crossing in scanned range")
        else:
            print(
                f"p_c = {est.p_c:.4f} [{est.ci_low:.4f}, {est.ci_high:.4f}]"
            )
        print(f"results written to {cfg.out}")
        return 0

    if cfg.command == "tailored":
        grid = parse_grid(params["p_grid"])
        batches = []
        for family in ("tailored", "elongated"):
            for pi, p in enumerate(grid):
                batches.append(run_batch(BatchConfig(
                    family=family, decoder=params["decoder"],
                    L=params["L"], p=float(p), trials=params["trials"],
                    master_seed=cfg.seed + pi, boundary=params["boundary"],
                    ell=2 if family == "elongated" else None,
                    w=params["w"], rounds=params["rounds"], noise="linear",
                    workers=workers,
                )))
        write_csv(batches, cfg.out)
        _write_manifest(cfg)
        print(f"results written to {cfg.out}")
        return 0

    raise UsageError(f"unknown command {cfg.command!r}")


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
        return execute(cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
