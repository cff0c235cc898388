"""Command-line front end: sweeps, CSV/JSON export, and figure emission.

Subcommands: reflection | response | emission | poles | hopfield.
Physics flags are dimensionless ratios by default; pass ``--si`` with the
raw circuit values to have them converted at the boundary.  Ranges are
``start:stop:count``; lists are comma-separated.  Every run appends one
JSON record to ``<out>/manifests.jsonl`` and names its artifacts after a
flag digest, so identical flags rewrite byte-identical CSVs.

Exit codes: 0 success, 2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import MirrorQEDError, ParameterError
from .params import TWO_PI, CircuitParams, derive, dimensionless, normalize
from .emission import EmissionConfig, dark_state_energy, integrate
from .fitting import analytic_resonances
from .hopfield import build, diagonalize, overlay
from .poles import find_poles, rabi_splitting_table
from .response import reflection_open, refine_grid, trapped_field
from .util import parallel_map

FLOAT_FMT = "%.12g"


# --- flag parsing helpers ----------------------------------------------------


def parse_range(text: str) -> np.ndarray:
    """Parse 'start:stop:count' into a linspace."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"range must be start:stop:count, got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad range {text!r}: {exc}") from exc
    if count < 2 or stop <= start:
        raise argparse.ArgumentTypeError(f"range needs stop > start and count >= 2, got {text!r}")
    return np.linspace(start, stop, count)


def parse_floats(text: str) -> list[float]:
    items = [s for s in text.split(",") if s.strip()]
    if not items:
        raise argparse.ArgumentTypeError("list must contain at least one value")
    try:
        return [float(s) for s in items]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad list {text!r}: {exc}") from exc


def resolve_params(args, need_mirror: bool) -> CircuitParams:
    """Build dimensionless CircuitParams from either ratio flags or --si values."""
    if getattr(args, "si", False):
        for name in ("cc", "cj", "lj", "z0"):
            if getattr(args, name, None) is None:
                raise ParameterError(f"--si requires --{name}")
        delay = getattr(args, "delay", None)
        raw = CircuitParams(c_c=args.cc, c_j=args.cj, l_j=args.lj, z_0=args.z0, delay=delay)
        params, _ = normalize(raw)
        if need_mirror:
            params.require_mirror()
        return params
    cc = args.cc_ratio
    if cc is None and getattr(args, "cc_frac", None) is not None:
        frac = args.cc_frac
        if not 0 < frac < 1:
            raise ParameterError(f"--cc-frac must lie in (0, 1), got {frac}")
        cc = frac / (1.0 - frac)
    if cc is None:
        raise ParameterError("one of --cc-ratio or --cc-frac is required")
    omega_c = getattr(args, "omega_c_ratio", None) if need_mirror else None
    if need_mirror and omega_c is None:
        omega_c = 1.0
    return dimensionless(cc, args.z0_ratio, omega_c_over_omega_j=omega_c,
                         n=getattr(args, "n", 1))


# --- output helpers ----------------------------------------------------------


def write_csv(path: Path, header: list[str], rows) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)   # RFC-4180: CRLF line endings, '.' decimal
        writer.writerow(header)
        for row in rows:
            writer.writerow([FLOAT_FMT % v if isinstance(v, float) else v for v in row])


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return {"start": float(value[0]), "stop": float(value[-1]), "count": int(value.size)}
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def run_id_for(command: str, args: argparse.Namespace) -> str:
    payload = {k: _jsonable(v) for k, v in sorted(vars(args).items())
               if k not in ("func", "out")}
    digest = hashlib.sha1(json.dumps(payload, sort_keys=True, default=str).encode()).hexdigest()
    return f"{command}-{digest[:10]}"


def append_manifest(out: Path, record: dict) -> None:
    with open(out / "manifests.jsonl", "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")


class Manifest:
    """Collects the resolved inputs and outputs of one CLI run."""

    def __init__(self, command: str, args: argparse.Namespace):
        self.command = command
        self.run_id = run_id_for(command, args)
        self.out = Path(args.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.started = time.monotonic()
        self.record = {
            "run_id": self.run_id,
            "command": command,
            "version": __version__,
            "created_utc": datetime.now(timezone.utc).isoformat(),
            "flags": {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k != "func"},
            "params": {},
            "grids": {},
            "outputs": [],
        }

    def path(self, suffix: str) -> Path:
        p = self.out / f"{self.run_id}__{suffix}"
        self.record["outputs"].append(p.name)
        return p

    def note_params(self, params: CircuitParams) -> None:
        self.record["params"] = dataclasses.asdict(params)

    def note_grid(self, name: str, grid: np.ndarray) -> None:
        self.record["grids"][name] = {
            "start": float(grid[0]), "stop": float(grid[-1]), "count": int(grid.size),
        }

    def finish(self) -> None:
        self.record["wall_time_s"] = round(time.monotonic() - self.started, 6)
        append_manifest(self.out, self.record)


def _plot_lines(path: Path, curves, xlabel: str, ylabel: str, logy=False, title=None):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for x, y, label in curves:
        ax.plot(x, y, label=label, linewidth=1.1)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(curves) > 1:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


# --- subcommands -------------------------------------------------------------


def cmd_reflection(args) -> int:
    """Open-line |r(omega)| for a family of impedance ratios."""
    manifest = Manifest("reflection", args)
    grid = args.grid
    manifest.note_grid("omega_over_omega_j", grid)
    curves = []
    for z0 in args.z0_ratios:
        sub = argparse.Namespace(cc_ratio=args.cc_ratio, cc_frac=args.cc_frac,
                                 z0_ratio=z0, si=False)
        params = resolve_params(sub, need_mirror=False)
        if not curves:
            manifest.note_params(params)
        resp = reflection_open(params, grid)
        path = manifest.path(f"z0_{FLOAT_FMT % z0}.csv")
        write_csv(path, ["omega_over_omega_j", "re_r", "im_r", "abs_r"],
                  zip(grid.tolist(), resp.values.real.tolist(),
                      resp.values.imag.tolist(), np.abs(resp.values).tolist()))
        curves.append((grid, np.abs(resp.values), f"z0/zj = {z0:g}"))
    _plot_lines(manifest.path("reflection.svg"), curves, "omega / omega_j", "|r|")
    manifest.finish()
    return 0


def cmd_response(args) -> int:
    """Trapped-field spectra: detuning family of |f|, or a delay-scan heatmap."""
    manifest = Manifest("response", args)
    if args.map:
        base = resolve_params(args, need_mirror=True)
        scan = args.scan
        grid = args.grid
        manifest.note_params(base)
        manifest.note_grid("omega_over_omega_j", grid)
        manifest.note_grid("omega_j_T", scan)
        result = overlay(base, args.n_modes, scan, grid)
        rows = []
        mag = []
        omega_j = derive(base).omega_j
        for wjt in scan:
            p_t = base.with_delay(wjt / omega_j)
            mag.append(np.abs(trapped_field(p_t, grid).values))
        for i, wjt in enumerate(scan):
            for j, w in enumerate(grid):
                rows.append((float(wjt), float(w), float(mag[i][j])))
        write_csv(manifest.path("map.csv"), ["omega_j_T", "omega_over_omega_j", "abs_f"], rows)
        eig_rows = []
        for sl in result.slices:
            for k, ev in enumerate(sl.eigenfrequencies):
                eig_rows.append((float(sl.omega_j_t), k, float(ev)))
        write_csv(manifest.path("eigenfrequencies.csv"),
                  ["omega_j_T", "alpha", "eigfreq"], eig_rows)
        _plot_map(manifest.path("map.svg"), grid, scan, np.array(mag), result)
    else:
        curves = []
        for det in args.detunings:
            sub = argparse.Namespace(cc_ratio=args.cc_ratio, cc_frac=None,
                                     z0_ratio=args.z0_ratio, omega_c_ratio=det,
                                     n=args.n, si=False)
            params = resolve_params(sub, need_mirror=True)
            if not curves:
                manifest.note_params(params)

            def evaluate(g, _p=params):
                return trapped_field(_p, g).values

            grid = refine_grid(evaluate, args.grid)
            resp = trapped_field(params, grid)
            path = manifest.path(f"detuning_{FLOAT_FMT % det}.csv")
            write_csv(path, ["omega_over_omega_j", "re_f", "im_f", "abs_f"],
                      zip(grid.tolist(), resp.values.real.tolist(),
                          resp.values.imag.tolist(), np.abs(resp.values).tolist()))
            curves.append((grid, np.abs(resp.values), f"omega_c/omega_j = {det:g}"))
        manifest.note_grid("omega_over_omega_j_base", args.grid)
        _plot_lines(manifest.path("response.svg"), curves, "omega / omega_j", "|f|", logy=True)
    manifest.finish()
    return 0


def _plot_map(path: Path, grid, scan, mag, result):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.colors import LogNorm

    fig, ax = plt.subplots(figsize=(7, 5))
    mesh = ax.pcolormesh(grid, scan, np.maximum(mag, 1e-3), norm=LogNorm(), shading="auto")
    for sl in result.slices:
        ax.plot(sl.eigenfrequencies, np.full_like(sl.eigenfrequencies, sl.omega_j_t),
                linestyle="none", marker=".", color="white", markersize=2)
    fig.colorbar(mesh, ax=ax, label="|f|")
    ax.set_xlabel("omega / omega_j")
    ax.set_ylabel("omega_j T")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def cmd_emission(args) -> int:
    """Spontaneous-emission energy traces with analytic envelope overlays."""
    manifest = Manifest("emission", args)
    if args.no_mirror:
        sub = argparse.Namespace(cc_ratio=args.cc_ratio, cc_frac=None,
                                 z0_ratio=args.z0_ratio, si=False)
        params = resolve_params(sub, need_mirror=False)
    else:
        params = resolve_params(args, need_mirror=True)
    manifest.note_params(params)
    scales = derive(params)
    t_max = args.t_max
    if t_max is None:
        t_max = (5 * TWO_PI / scales.rabi) if params.mirror else 5.0 / scales.gamma_j
    dt = args.dt
    if dt is None:
        dt = (params.delay / 256) if params.mirror else TWO_PI / (256 * scales.omega_j)
    config = EmissionConfig(t_max=t_max, dt=dt, initial_phi_j=args.phi0,
                            mirror=params.mirror)
    traj = integrate(params, config)
    stride = max(1, traj.t.size // args.max_rows)
    sl = slice(None, None, stride)
    write_csv(
        manifest.path("trajectory.csv"),
        ["t", "phi_j", "p_j", "p_0", "e_q", "e_r", "e_l", "e_total"],
        zip(traj.t[sl].tolist(), traj.phi_j[sl].tolist(), traj.p_j[sl].tolist(),
            traj.p_0[sl].tolist(), traj.e_q[sl].tolist(), traj.e_r[sl].tolist(),
            traj.e_l[sl].tolist(), traj.e_total[sl].tolist()),
    )
    e0 = traj.e_q[0]
    curves = [
        (traj.t[sl], traj.e_q[sl] / e0, "E_q"),
        (traj.t[sl], traj.e_r[sl] / e0, "E_r"),
        (traj.t[sl], traj.e_l[sl] / e0, "E_l"),
        (traj.t[sl], traj.e_total[sl] / e0, "total"),
    ]
    if params.mirror:
        curves.append((traj.t[sl], np.exp(-scales.gamma_j_mirror * traj.t[sl]), "exp(-gamma_j^m t)"))
        curves.append((
            traj.t[sl],
            np.exp(-scales.gamma_j_mirror * traj.t[sl] / 2)
            * np.cos(scales.rabi * traj.t[sl] / 2) ** 2,
            "envelope",
        ))
        cycles = scales.omega_0 * params.delay / TWO_PI
        if abs(cycles - round(cycles)) < 1e-6:
            ds = dark_state_energy(params)
            curves.append((traj.t[sl], np.full(traj.t[sl].size, ds), "dark-state level"))
    else:
        curves.append((traj.t[sl], np.exp(-scales.gamma_j * traj.t[sl]), "exp(-gamma_j t)"))
    _plot_lines(manifest.path("energies.svg"), curves, "t (units of 1/omega_j)",
                "energy / E_q(0)")
    manifest.finish()
    return 0


def cmd_poles(args) -> int:
    """Pole tables, and the numeric-vs-analytic splitting comparison."""
    manifest = Manifest("poles", args)
    wrote = False
    if args.cc_ratio is not None or args.cc_frac is not None:
        params = resolve_params(args, need_mirror=True)
        manifest.note_params(params)
        window = tuple(args.window) if args.window else None
        pole_set = find_poles(params, window=window)
        labels = _label_poles(params, pole_set)
        write_csv(
            manifest.path("poles.csv"),
            ["re", "im", "residue_phi_re", "residue_phi_im", "label"],
            [
                (float(z.real), float(z.imag), float(rp.real), float(rp.imag), lab)
                for z, rp, lab in zip(pole_set.poles, pole_set.residues["phi_j"], labels)
            ],
        )
        manifest.path("poles.json").write_text(json.dumps(
            {
                "window": list(pole_set.search_window),
                "convention": pole_set.convention,
                "method_report": pole_set.method_report,
                "poles": [
                    {"re": float(z.real), "im": float(z.imag), "label": lab}
                    for z, lab in zip(pole_set.poles, labels)
                ],
            }, indent=2, sort_keys=True))
        wrote = True
    if args.rabi_table:
        rows = rabi_splitting_table(args.cc_ratios, args.z0_ratios)
        write_csv(
            manifest.path("rabi_table.csv"),
            ["cc_over_cj", "z0_over_zj", "product", "omega_analytic",
             "omega_numeric", "relative_error", "resolved"],
            [
                (r.cc_over_cj, r.z0_over_zj, r.product, r.omega_analytic,
                 "" if r.omega_numeric is None else FLOAT_FMT % r.omega_numeric,
                 "" if r.relative_error is None else FLOAT_FMT % r.relative_error,
                 int(r.resolved))
                for r in rows
            ],
        )
        wrote = True
    if not wrote:
        raise ParameterError("nothing to do: give circuit flags and/or --rabi-table")
    manifest.finish()
    return 0


def _label_poles(params, pole_set) -> list[str]:
    names = []
    entries = [e for e in analytic_resonances(params, n_max=12) if e.label != "qubit"]
    scales = derive(params)
    for z in pole_set.poles:
        best = min(entries, key=lambda e: abs(e.center - z.real))
        if abs(best.center - z.real) < 0.05 * scales.omega_j:
            names.append(best.label)
        else:
            names.append("unassigned")
    return names


def cmd_hopfield(args) -> int:
    """Eigenfrequency/bosonicity export for one delay or a scan."""
    manifest = Manifest("hopfield", args)
    params = resolve_params(args, need_mirror=True)
    manifest.note_params(params)
    omega_j = derive(params).omega_j
    scan = args.scan if args.scan is not None else np.array([derive(params).omega_j * params.delay])

    def one(wjt):
        spectrum = diagonalize(build(params.with_delay(wjt / omega_j), args.n_modes))
        return wjt, spectrum

    rows = []
    for wjt, spectrum in parallel_map(one, scan.tolist()):
        for alpha, (ev, b) in enumerate(zip(spectrum.eigenfrequencies, spectrum.bosonicity)):
            rows.append((float(wjt), alpha, float(ev), float(b)))
    write_csv(manifest.path("spectrum.csv"),
              ["omega_j_T", "alpha", "eigfreq", "bosonicity"], rows)
    manifest.finish()
    return 0


# --- parser ------------------------------------------------------------------


def _add_circuit_flags(sub, mirror: bool, cc_frac: bool = True):
    sub.add_argument("--cc-ratio", type=float, default=None, help="C_c / C_J")
    if cc_frac:
        sub.add_argument("--cc-frac", type=float, default=None,
                         help="C_c / (C_c + C_J), alternative to --cc-ratio")
    sub.add_argument("--z0-ratio", type=float, default=None, help="Z_0 / Z_J")
    if mirror:
        sub.add_argument("--omega-c-ratio", type=float, default=1.0,
                         help="omega_c / omega_j (mirror placement)")
        sub.add_argument("--n", type=int, default=1, help="cavity resonance index")
    sub.add_argument("--si", action="store_true",
                     help="interpret --cc/--cj/--lj/--z0/--delay as raw SI values")
    sub.add_argument("--cc", type=float, default=None, help="C_c (SI, with --si)")
    sub.add_argument("--cj", type=float, default=None, help="C_J (SI, with --si)")
    sub.add_argument("--lj", type=float, default=None, help="L_J (SI, with --si)")
    sub.add_argument("--z0", type=float, default=None, help="Z_0 (SI, with --si)")
    sub.add_argument("--delay", type=float, default=None, help="T (SI, with --si)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mirrorqed",
        description="Transmon on a semi-infinite high-impedance line: "
                    "scattering, emission, poles, multimode spectra.",
    )
    parser.add_argument("--version", action="version", version=f"mirrorqed {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p_ref = subs.add_parser("reflection", help="open-line |r| curves")
    p_ref.add_argument("--cc-ratio", type=float, default=None, help="C_c / C_J")
    p_ref.add_argument("--cc-frac", type=float, default=None, help="C_c / (C_c + C_J)")
    p_ref.add_argument("--z0-ratios", type=parse_floats, required=True,
                       help="comma-separated Z_0/Z_J values")
    p_ref.add_argument("--grid", type=parse_range, default=np.linspace(0.8, 1.2, 4001),
                       help="omega/omega_j grid start:stop:count (default 0.8:1.2:4001)")
    p_ref.add_argument("--out", default="out")
    p_ref.set_defaults(func=cmd_reflection)

    p_resp = subs.add_parser("response", help="trapped-field |f| curves or delay-scan map")
    _add_circuit_flags(p_resp, mirror=True, cc_frac=False)
    p_resp.add_argument("--detunings", type=parse_floats,
                        default=[0.98, 0.99, 1.0, 1.01, 1.02],
                        help="omega_c/omega_j values for the line family")
    p_resp.add_argument("--map", action="store_true", help="emit the delay-scan heatmap instead")
    p_resp.add_argument("--scan", type=parse_range, default=np.linspace(4, 14, 51),
                        help="omega_j*T scan for --map (default 4:14:51)")
    p_resp.add_argument("--n-modes", type=int, default=8)
    p_resp.add_argument("--grid", type=parse_range, default=np.linspace(0.9, 1.1, 4001))
    p_resp.add_argument("--out", default="out")
    p_resp.set_defaults(func=cmd_response)

    p_em = subs.add_parser("emission", help="spontaneous-emission energy traces")
    _add_circuit_flags(p_em, mirror=True, cc_frac=False)
    p_em.add_argument("--no-mirror", action="store_true", help="open-line decay instead")
    p_em.add_argument("--t-max", type=float, default=None,
                      help="total time (default: 5 Rabi periods, or 5 decay times open-line)")
    p_em.add_argument("--dt", type=float, default=None,
                      help="step ceiling (default: T/256; snapped to T/m)")
    p_em.add_argument("--phi0", type=float, default=1.0, help="initial flux phi_j(0)")
    p_em.add_argument("--max-rows", type=int, default=20000,
                      help="decimate the CSV to at most this many rows")
    p_em.add_argument("--out", default="out")
    p_em.set_defaults(func=cmd_emission)

    p_pol = subs.add_parser("poles", help="pole tables and splitting comparison")
    _add_circuit_flags(p_pol, mirror=True, cc_frac=True)
    p_pol.add_argument("--window", type=float, nargs=4, default=None,
                       metavar=("RE_LO", "RE_HI", "IM_LO", "IM_HI"))
    p_pol.add_argument("--rabi-table", action="store_true")
    p_pol.add_argument("--cc-ratios", type=parse_floats, default=[0.01, 0.05, 0.3])
    p_pol.add_argument("--z0-ratios", type=parse_floats,
                       default=[316.22776601683796, 1000.0, 3162.2776601683795])
    p_pol.add_argument("--out", default="out")
    p_pol.set_defaults(func=cmd_poles)

    p_hop = subs.add_parser("hopfield", help="multimode-model spectrum export")
    _add_circuit_flags(p_hop, mirror=True, cc_frac=False)
    p_hop.add_argument("--n-modes", type=int, default=8)
    p_hop.add_argument("--scan", type=parse_range, default=None,
                       help="omega_j*T scan (default: single slice at the given delay)")
    p_hop.add_argument("--out", default="out")
    p_hop.set_defaults(func=cmd_hopfield)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        parser.exit(2, f"mirrorqed: usage error: {exc}\n")
    except MirrorQEDError as exc:
        print(f"mirrorqed: numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
