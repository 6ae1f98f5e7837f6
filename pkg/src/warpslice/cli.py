"""Command-line front end.

::

    warpslice profile check  --config run.cfg
    warpslice surface analyze --config run.cfg --out results/
    warpslice ineq verify    --config run.cfg --tol 1e-8
    warpslice rigidity run   --config run.cfg --seed 7

Exit status: 0 success, 1 check failed, 2 configuration error,
3 hypothesis violation (mean convexity or sigma_p > 0).
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .fiber import make_grid
from .inequalities import INEQ_TOL, HypothesisError, full_report, write_report_csv
from .profile import (
    ProfileDomainError,
    check_conditions,
    dump_profile,
    make_cosh,
    make_ds_schwarzschild,
    make_euclidean,
)
from .solver import rigidity_experiment, write_experiment_csv
from .surface import (
    SurfaceDomainError,
    ellipsoid_radius,
    export_surface_csv,
    graph_surface,
    height_hessian_at_max,
    make_perturbed,
    make_slice,
    second_fundamental_form,
)

log = logging.getLogger("warpslice")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_HYPOTHESIS = 0, 1, 2, 3


def build_profile(cfg):
    if cfg.profile == "euclidean":
        return make_euclidean(cfg.n, cfg.r_max)
    if cfg.profile == "cosh":
        return make_cosh(cfg.n, cfg.B, cfg.a, cfg.r_max)
    return make_ds_schwarzschild(cfg.n, cfg.m, cfg.kappa, cfg.r_max)


def _reference_radius(cfg, profile):
    if cfg.r0 is not None:
        return cfg.r0
    if cfg.lambda0 is not None:
        return profile.r_of_lambda(cfg.lambda0)
    return 0.5 * profile.r_max


def _read_radius_csv(path, grid):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    r = np.array([float(row["r"]) for row in rows])
    if r.size != grid.size:
        raise cfgmod.ConfigError(f"{path}: {r.size} radii for a grid of {grid.size} nodes")
    return r.reshape(grid.shape)


def build_surface(cfg, profile, grid):
    if cfg.surface == "ellipsoid":
        return graph_surface(profile, grid, ellipsoid_radius(grid, cfg.ellipsoid_a, cfg.ellipsoid_c))
    if cfg.surface == "csv":
        if not cfg.surface_csv:
            raise cfgmod.ConfigError("surface = csv needs surface_csv")
        return graph_surface(profile, grid, _read_radius_csv(cfg.surface_csv, grid))
    r0 = _reference_radius(cfg, profile)
    if cfg.surface == "slice":
        return make_slice(profile, grid, r0)
    return make_perturbed(profile, grid, r0, cfg.amplitude, cfg.seed, cfg.modes)


def _out_dir(cfg):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_profile_check(cfg) -> int:
    profile = build_profile(cfg)
    tol = 1e-10 if cfg.tol is None else cfg.tol
    try:
        report = check_conditions(profile, cfg.samples, tol)
    except ProfileDomainError as exc:
        print(f"profile evaluation failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    for line in report.lines():
        print(line)
    (_out_dir(cfg) / "profile.txt").write_text(dump_profile(profile), encoding="utf-8")
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_surface_analyze(cfg) -> int:
    profile = build_profile(cfg)
    grid = make_grid(cfg.grid_mode, cfg.n, cfg.N)
    try:
        surf = build_surface(cfg, profile, grid)
        curv = second_fundamental_form(surf)
    except (SurfaceDomainError, ProfileDomainError) as exc:
        print(f"surface outside the profile domain: {exc}", file=sys.stderr)
        return EXIT_FAIL
    with open(_out_dir(cfg) / "surface.csv", "w", newline="", encoding="utf-8") as fh:
        export_surface_csv(curv, fh)
    tol = 1e-6 if cfg.tol is None else cfg.tol
    rep = height_hessian_at_max(surf, curv, tol)
    for line in rep.lines():
        print(line)
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_ineq_verify(cfg) -> int:
    profile = build_profile(cfg)
    grid = make_grid(cfg.grid_mode, cfg.n, cfg.N)
    tol = INEQ_TOL if cfg.tol is None else cfg.tol
    try:
        surf = build_surface(cfg, profile, grid)
        curv = second_fundamental_form(surf)
    except (SurfaceDomainError, ProfileDomainError) as exc:
        print(f"surface outside the profile domain: {exc}", file=sys.stderr)
        return EXIT_FAIL
    rows = []
    try:
        for p in cfg.p:
            rows.append((cfg.label or cfg.surface, full_report(curv, p)))
    except HypothesisError as exc:
        print(f"hypothesis violated: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    with open(_out_dir(cfg) / "ineq.csv", "w", newline="", encoding="utf-8") as fh:
        write_report_csv(rows, fh)
    ok = True
    for _, rep in rows:
        print(f"p={rep.p}: hk_gap={rep.hk_gap:.6g} mk_gap={rep.mk_gap:.6g} "
              f"div_residual={rep.div_residual:.3g} ricci_term_max={rep.ricci_term_sign:.3g}")
        ok = ok and rep.ok(tol)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_rigidity(cfg) -> int:
    profile = build_profile(cfg)
    if cfg.grid_mode != "axisym":
        raise cfgmod.ConfigError("rigidity experiments need grid_mode = axisym")
    grid = make_grid("axisym", cfg.n, cfg.N)
    dev_tol = 1e-6 * profile.r_max if cfg.tol is None else cfg.tol
    r0 = _reference_radius(cfg, profile)
    rows = []
    for p in cfg.p:
        rows.extend(rigidity_experiment(profile, p, cfg.amplitudes, cfg.seed, grid, r0=r0,
                                        modes=cfg.modes))
    with open(_out_dir(cfg) / "rigidity.csv", "w", newline="", encoding="utf-8") as fh:
        write_experiment_csv(rows, fh)
    ok = True
    for row in rows:
        print(f"p={row.p} amplitude={row.amplitude:g} converged={row.converged} "
              f"iterations={row.iterations} dev={row.dev:.3g} r_star={row.r_star:.12g}")
        if row.converged and not row.dev <= dev_tol:
            ok = False
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    ("profile", "check"): cmd_profile_check,
    ("surface", "analyze"): cmd_surface_analyze,
    ("ineq", "verify"): cmd_ineq_verify,
    ("rigidity", "run"): cmd_rigidity,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value run configuration file")
    common.add_argument("--out", help="output directory for CSV files")
    common.add_argument("--tol", type=float, help="check tolerance (command specific)")
    common.add_argument("--seed", type=int)
    common.add_argument("--n", type=int, help="ambient dimension")
    common.add_argument("--grid", type=int, help="polar grid size N")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="warpslice", description=__doc__.split("\n")[0])
    groups = parser.add_subparsers(dest="group", required=True)
    by_group = {}
    for group, action in COMMANDS:
        if group not in by_group:
            sub = groups.add_parser(group)
            by_group[group] = sub.add_subparsers(dest="action", required=True)
        by_group[group].add_parser(action, parents=[common])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = cfgmod.load_config(args.config)
        for key, flag in (("out", args.out), ("tol", args.tol), ("seed", args.seed),
                          ("n", args.n), ("N", args.grid)):
            if flag is not None:
                cfgmod.set_value(cfg, key, flag)
        return COMMANDS[(args.group, args.action)](cfg)
    except cfgmod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # invalid parameter combinations (e.g. kappa too large, n < 3)
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
