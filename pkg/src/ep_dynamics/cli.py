"""Command-line interface: spectra, dynamics, sweeps, relaxation ratios, chains.

Every run reads an INI configuration, writes its data products (CSV/JSON,
optionally SVG plots) into the output directory, and always writes a
``run_manifest.json`` describing the run — also on failure, with an error
section.  Data files are deterministic: identical configurations produce
byte-identical CSV/JSON, and SVG output omits its timestamp metadata.

Exit codes: 0 success, 2 configuration/validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from . import analysis, bathsim, chains, heisenberg, lindblad
from .linalg import NumericalError, eigendecompose
from .model import (
    InitialConditions,
    RunConfig,
    TimeGrid,
    ValidationError,
    load_config,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _jsonable(obj):
    """Recursively convert numpy scalars/arrays and complex numbers for JSON.

    Complex values become two-element arrays [re, im].
    """
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    return obj


def _write_json(path: Path, payload: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(payload), fh, indent=2)
        fh.write("\n")


def _write_csv(path: Path, header: list[str], rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([
                _fmt(x) if isinstance(x, (float, np.floating)) else x
                for x in row
            ])


def _save_figure(fig, path: Path):
    # Date metadata omitted so reruns are binary-stable
    fig.savefig(path, format="svg", metadata={"Date": None})


def _new_figure():
    import matplotlib
    matplotlib.use("Agg")
    # fixed hash salt so element ids in the SVG are rerun-stable
    matplotlib.rcParams["svg.hashsalt"] = "ep-dynamics"
    import matplotlib.pyplot as plt
    return plt


def _peek_output_dir(config_path) -> str | None:
    """Best-effort read of [output] directory so the manifest has a home
    even when the configuration fails validation."""
    import configparser

    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        if cp.read(str(config_path)) and cp.has_option("output", "directory"):
            return cp.get("output", "directory")
    except configparser.Error:
        pass
    return None


# ---------------------------------------------------------------------------
# subcommands (each returns the list of files written)
# ---------------------------------------------------------------------------

def cmd_spectrum(cfg: RunConfig, out: Path, formats) -> list[Path]:
    params, specs = cfg.params, cfg.specs
    if params.n_dots == 2:
        a = heisenberg.build_evolution_matrix(params)
    else:
        a = chains.build_chain_matrix(params)
    he_decomp = eigendecompose(a)
    payload = {
        "n_dots": params.n_dots,
        "he_eigenvalues": he_decomp.eigenvalues,
        "he_defective": he_decomp.defective,
        "ep_couplings": chains.ep_couplings(
            params.n_dots, params.gamma[0],
            params.gamma[1] if params.n_dots > 1 else params.gamma[0],
        ),
    }
    if params.n_dots == 2 and params.resonant:
        ev = heisenberg.eta_he(params)
        payload["eta_squared"] = ev.eta_squared
        payload["eta"] = ev.eta
        payload["regime"] = heisenberg.classify(params).kind
        payload["g_critical"] = heisenberg.g_critical(params)
    if params.n_dots <= lindblad.MAX_DOTS_MANY_BODY:
        me = lindblad.liouvillian_spectrum(params, specs)
        payload["me_eigenvalues"] = me.eigenvalues
    path = out / "spectrum.json"
    _write_json(path, payload)
    return [path]


def cmd_dynamics(cfg: RunConfig, out: Path, formats, with_me=False,
                 with_oracle=False) -> list[Path]:
    params, specs, init = cfg.params, cfg.specs, cfg.init
    times = cfg.grid.times
    pops = heisenberg.transient_populations(params, specs, init, times,
                                            quad=cfg.quad)
    steady = heisenberg.steady_state_populations(params, specs, quad=cfg.quad)
    header = ["t", "N1_HE", "N2_HE"]
    columns = [times, pops[0], pops[1]]
    if with_me:
        me = lindblad.me_populations(params, specs, init, times)
        header += ["N1_ME", "N2_ME"]
        columns += [me[0], me[1]]
    if with_oracle:
        oracle_cfg = cfg.extras.get("oracle", {})
        n_modes = int(oracle_cfg.get("n_modes", bathsim.DEFAULT_MODES))
        bh = oracle_cfg.get("band_halfwidth")
        orc = bathsim.oracle_populations(
            params, specs, init, times, n_modes=n_modes,
            band_halfwidth=float(bh) if bh else None,
        )
        header += ["N1_oracle", "N2_oracle"]
        columns += [orc[0], orc[1]]
    header += ["N1_ss", "N2_ss"]
    columns += [np.full(times.size, steady[0]), np.full(times.size, steady[1])]

    written = []
    if "csv" in formats:
        path = out / "dynamics.csv"
        _write_csv(path, header, zip(*columns))
        written.append(path)
    if "json" in formats:
        path = out / "dynamics.json"
        _write_json(path, {name: col for name, col in zip(header, columns)})
        written.append(path)
    if "svg" in formats:
        plt = _new_figure()
        fig, ax = plt.subplots(figsize=(6, 4))
        for j in (0, 1):
            ax.plot(times, pops[j] / steady[j],
                    label=f"dot {j + 1} (exact)")
        if with_me:
            for j in (0, 1):
                ax.plot(times, columns[3 + j] / steady[j], "--",
                        label=f"dot {j + 1} (master equation)")
        ax.set_xlabel(r"$t\,[1/T_1]$")
        ax.set_ylabel(r"$\langle N_j(t)\rangle / \langle N_j\rangle_{ss}$")
        ax.legend()
        path = out / "dynamics.svg"
        _save_figure(fig, path)
        plt.close(fig)
        written.append(path)
    return written


def cmd_sweep(cfg: RunConfig, out: Path, formats) -> list[Path]:
    sweep_cfg = cfg.extras.get("sweep", {})
    try:
        det_lo = float(sweep_cfg.get("detuning_min", -1.0))
        det_hi = float(sweep_cfg.get("detuning_max", 1.0))
        g_lo = float(sweep_cfg.get("g_min", 0.0))
        g_hi = float(sweep_cfg.get("g_max", 0.5))
        res = int(sweep_cfg.get("resolution", 41))
    except ValueError as exc:
        raise ValidationError([f"malformed [sweep] section: {exc}"]) from exc
    grid = analysis.riemann_sweep(cfg.params, (det_lo, det_hi),
                                  (g_lo, g_hi), res)
    written = []
    if "csv" in formats:
        rows = []
        for i, det in enumerate(grid.detunings):
            for k, g in enumerate(grid.couplings):
                l1, l2 = grid.eigenvalues[i, k]
                rows.append([det, g, l1.real, l1.imag, l2.real, l2.imag,
                             int(grid.defective[i, k])])
        path = out / "sweep.csv"
        _write_csv(path, ["detuning", "g", "re_l1", "im_l1", "re_l2",
                          "im_l2", "defective"], rows)
        written.append(path)
    if "json" in formats:
        path = out / "sweep.json"
        _write_json(path, {
            "detunings": grid.detunings,
            "couplings": grid.couplings,
            "eigenvalues": grid.eigenvalues,
            "defective": grid.defective.astype(int),
        })
        written.append(path)
    if "svg" in formats:
        plt = _new_figure()
        fig, ax = plt.subplots(figsize=(6, 4))
        gg, dd = np.meshgrid(grid.couplings, grid.detunings)
        split = np.abs(grid.eigenvalues[:, :, 0] - grid.eigenvalues[:, :, 1])
        pcm = ax.pcolormesh(dd, gg, split, shading="auto")
        fig.colorbar(pcm, ax=ax, label=r"$|\lambda_+-\lambda_-|\,[T_1]$")
        if np.any(grid.defective):
            ii, kk = np.nonzero(grid.defective)
            ax.plot(grid.detunings[ii], grid.couplings[kk], "r.",
                    label="exceptional")
            ax.legend()
        ax.set_xlabel(r"detuning $[T_1]$")
        ax.set_ylabel(r"$g\,[T_1]$")
        path = out / "sweep.svg"
        _save_figure(fig, path)
        plt.close(fig)
        written.append(path)
    return written


def cmd_mpemba(cfg: RunConfig, out: Path, formats) -> list[Path]:
    mp = cfg.extras.get("mpemba", {})
    try:
        g_ep = float(mp["g_ep"]) if "g_ep" in mp else None
        g_over = float(mp["g_over"])
        n_ep = [float(x) for x in mp.get("n_ep", "1 1").split()]
        n_over = [float(x) for x in mp.get("n_over", "0.5 0.5").split()]
    except (KeyError, ValueError) as exc:
        raise ValidationError(
            [f"[mpemba] section needs g_over (and optionally g_ep, n_ep, "
             f"n_over): {exc}"]
        ) from exc
    base = cfg.params
    if g_ep is None:
        g_ep = heisenberg.g_critical(base)
    from dataclasses import replace
    p_ep = replace(base, g=g_ep)
    p_over = replace(base, g=g_over)
    report = analysis.mpemba_ratio(
        p_ep, p_over, cfg.specs,
        InitialConditions(n=n_ep), InitialConditions(n=n_over),
        cfg.grid, quad=cfg.quad,
    )
    written = []
    if "csv" in formats:
        rows = zip(report.times, report.ratio[0], report.ratio[1],
                   report.chi_numerator[0], report.chi_denominator[0],
                   report.chi_numerator[1], report.chi_denominator[1])
        path = out / "mpemba.csv"
        _write_csv(path, ["t", "R1", "R2", "chi_EP_1", "chi_over_1",
                          "chi_EP_2", "chi_over_2"], rows)
        written.append(path)
    if "json" in formats:
        path = out / "mpemba.json"
        payload = asdict(report)
        _write_json(path, payload)
        written.append(path)
    if "svg" in formats:
        plt = _new_figure()
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.semilogy(report.times, report.ratio[0], label=r"$R_1$")
        ax.axhline(1.0, color="gray", linestyle="--", linewidth=1)
        ax.set_xlabel(r"$t\,[1/T_1]$")
        ax.set_ylabel(r"$R_1(t)$")
        ax.legend()
        path = out / "mpemba.svg"
        _save_figure(fig, path)
        plt.close(fig)
        written.append(path)
    return written


def cmd_chain(cfg: RunConfig, out: Path, formats) -> list[Path]:
    params, specs = cfg.params, cfg.specs
    a = chains.build_chain_matrix(params)
    numeric = np.linalg.eigvals(a)
    numeric = numeric[np.lexsort((numeric.imag, -numeric.real))]
    closed = chains.closed_form_spectrum(params)
    max_dev = max(float(np.min(np.abs(numeric - c))) for c in closed)
    payload = {
        "n_dots": params.n_dots,
        "numerical_eigenvalues": numeric,
        "closed_form_eigenvalues": closed,
        "max_deviation": max_dev,
        "ep_couplings": chains.ep_couplings(
            params.n_dots, params.gamma[0], params.gamma[1]
        ),
    }
    if params.n_dots == 3:
        payload["liouvillian_containment"] = chains.three_dot_correspondence(
            params, specs
        )
    path = out / "chain.json"
    _write_json(path, payload)
    return [path]


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ep-dynamics",
        description="Exceptional-point dynamics of dissipative quantum-dot "
                    "chains: exact and master-equation routes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, descr in (
        ("spectrum", "eigenvalues, damping regime and EP locations"),
        ("dynamics", "transient and steady-state dot populations"),
        ("sweep", "eigenvalue sheets over (detuning, g)"),
        ("mpemba", "relaxation-distance ratio between EP and overdamped runs"),
        ("chain", "closed-form chain spectra and EP couplings"),
    ):
        sp = sub.add_parser(name, help=descr)
        sp.add_argument("--config", required=True, help="INI configuration file")
        sp.add_argument("--out", default=None,
                        help="output directory (default: from config)")
        sp.add_argument("--format", default="csv,json",
                        help="comma-separated outputs: csv,json,svg")
        sp.add_argument("--with-me", action="store_true",
                        help="include master-equation populations (dynamics)")
        sp.add_argument("--with-oracle", action="store_true",
                        help="include finite-bath oracle populations (dynamics)")
        sp.add_argument("--threads", type=int, default=1,
                        help="worker threads (reserved; evaluation is "
                             "deterministic and currently sequential)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    t_start = time.monotonic()
    manifest = {
        "command": args.command,
        "version": __version__,
        "config_file": str(args.config),
        "outputs": [],
    }
    out_dir = Path(args.out) if args.out else None
    try:
        cfg = load_config(args.config)
        if out_dir is None:
            out_dir = Path(cfg.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        formats = tuple(
            tok.strip() for tok in args.format.split(",") if tok.strip()
        )
        bad = [f for f in formats if f not in ("csv", "json", "svg")]
        if bad:
            raise ValidationError([f"unknown output format(s): {bad}"])
        manifest["config"] = {
            "params": asdict(cfg.params),
            "reservoirs": [asdict(s) for s in cfg.specs],
            "init": asdict(cfg.init),
            "grid": asdict(cfg.grid),
            "quadrature": asdict(cfg.quad),
        }
        handler = {
            "spectrum": lambda: cmd_spectrum(cfg, out_dir, formats),
            "dynamics": lambda: cmd_dynamics(
                cfg, out_dir, formats,
                with_me=args.with_me, with_oracle=args.with_oracle,
            ),
            "sweep": lambda: cmd_sweep(cfg, out_dir, formats),
            "mpemba": lambda: cmd_mpemba(cfg, out_dir, formats),
            "chain": lambda: cmd_chain(cfg, out_dir, formats),
        }[args.command]
        written = handler()
        manifest["outputs"] = [str(p) for p in written]
        code = EXIT_OK
    except ValidationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        manifest["error"] = {"type": "validation", "problems": exc.problems}
        code = EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        manifest["error"] = {"type": "numerical", "message": str(exc)}
        code = EXIT_NUMERICAL

    manifest["duration_seconds"] = time.monotonic() - t_start
    if out_dir is None:
        peeked = _peek_output_dir(args.config)
        out_dir = Path(peeked) if peeked else Path(".")
    if out_dir is not None:
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            _write_json(out_dir / "run_manifest.json", manifest)
        except OSError as exc:  # pragma: no cover - disk trouble
            print(f"cannot write manifest: {exc}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
