"""Command-line entry point: ``starkhcp <subcommand> ...``.

Exit status is 0 on success, 1 for configuration errors and 2 for
numerical failures.  Outputs are written atomically, so a failed run
leaves no partial file behind.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import characteristic_times, fourier_peaks, label_peaks
from .basis import BasisState, parse_l
from .config import RunConfig, load_config
from .dynamics import Carpet, lineout
from .errors import ConfigError, StarkHCPError
from .io import Table, read_csv, write_csv, write_ppm
from .pipeline import Simulation
from .selfcheck import run_all
from .stark import stark_map
from .units import au_to_cm1, vcm_to_au

log = logging.getLogger("starkhcp")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


# flag -> RunConfig field, for flags that override the config file
OVERRIDES = {
    "atom": "atom",
    "n_min": "n_min",
    "n_max": "n_max",
    "field_vcm": "field_vcm",
    "q_au": "q_au",
    "hcp_peak_kvcm": "hcp_peak_kvcm",
    "hcp_fs": "hcp_fs",
    "hcp_shape": "hcp_shape",
    "t_max_ps": "t_max_ps",
    "dt_ps": "dt_ps",
    "bins": "bins",
    "smear": "smear",
    "f_min": "f_min_vcm",
    "f_max": "f_max_vcm",
    "f_steps": "f_steps",
    "center_n": "center_n",
}


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="INI file, or an earlier output CSV; flags override it")
    p.add_argument("--atom", help="defect preset (cesium, hydrogen)")
    p.add_argument("--n-min", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--field-vcm", "--field", type=float, dest="field_vcm")
    p.add_argument("--center-n", type=float, help="excitation center n*")
    p.add_argument("--deterministic", action="store_true", help="omit the timestamp from headers")
    p.add_argument("--dump-radial", type=Path, metavar="CSV", help="also write u(r) of --dump-states")
    p.add_argument("--dump-states", default="", help="comma list like 26s,26p (default: launch state)")


def _kick_flags(p):
    p.add_argument("--q-au", type=float)
    p.add_argument("--hcp-peak-kvcm", type=float)
    p.add_argument("--hcp-fs", type=float)
    p.add_argument("--hcp-shape", choices=["rect", "halfsine"])


def _delay_flags(p):
    p.add_argument("--t-max-ps", type=float)
    p.add_argument("--dt-ps", type=float)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="starkhcp", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"starkhcp {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("starkmap", help="Stark map with excitation probabilities")
    _common(p)
    p.add_argument("--f-min", type=float)
    p.add_argument("--f-max", type=float)
    p.add_argument("--f-steps", type=int)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("carpet", help="SSFI signal versus HCP delay")
    _common(p)
    _kick_flags(p)
    _delay_flags(p)
    p.add_argument("--bins", type=int)
    p.add_argument("--smear", type=float, help="Gaussian bin smearing, sigma in bins")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--ppm", type=Path)

    p = sub.add_parser("lineout", help="one SSFI bin (or band) of a carpet versus delay")
    p.add_argument("--carpet", type=Path, required=True)
    p.add_argument("--fi-vcm", type=float, default=703.0)
    p.add_argument("--width-vcm", type=float, default=0.0, help="sum bins within this band")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--deterministic", action="store_true")

    p = sub.add_parser("spectrum", help="Fourier peaks of a line-out")
    p.add_argument("--in", dest="infile", type=Path, required=True)
    p.add_argument("--window", choices=["hann", "rect"], default="hann")
    p.add_argument("--threshold", type=float, default=0.05)
    p.add_argument("--n-peaks", type=int)
    p.add_argument("--tolerance", type=float, default=0.3, help="labeling tolerance, cm^-1")
    p.add_argument("--no-labels", action="store_true")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--deterministic", action="store_true")

    p = sub.add_parser("lcomp", help="angular-momentum composition of the free packet")
    _common(p)
    _delay_flags(p)
    p.add_argument("--manifold", type=int, help="restrict to Stark states of this manifold")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("times", help="Kepler, Stark and fractional revival times")
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--field-vcm", "--field", type=float, default=0.0, dest="field_vcm")

    p = sub.add_parser("selfcheck", help="built-in oracle suite")
    return ap


def resolve_config(args) -> RunConfig:
    path = getattr(args, "config", None)
    if path is None:
        cfg = RunConfig()
    elif path.suffix == ".csv":
        cfg = read_csv(path).config()  # rerun from a previous output's header
    else:
        cfg = load_config(path)
    changes = {}
    for flag, name in OVERRIDES.items():
        value = getattr(args, flag, None)
        if value is not None:
            changes[name] = value
    if changes.get("hcp_peak_kvcm") is not None and "q_au" not in changes:
        changes["q_au"] = None  # pulse parameters replace the default impulse
    try:
        return dataclasses.replace(cfg, **changes)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _dump_radial(args, sim: Simulation):
    names = [s for s in args.dump_states.split(",") if s.strip()]
    states = [sim.config.launch_state()] if not names else []
    for s in names:
        s = s.strip()
        try:
            states.append(BasisState(int(s[:-1]), parse_l(s[-1])))
        except ValueError:
            raise ConfigError(f"bad state label {s!r}") from None
    cache = sim.system.cache
    grid = cache.grid
    cols = ["r_au"] + [f"u_{s}" for s in states]
    data = np.column_stack([grid.r] + [cache.wavefunction(s).values for s in states])
    write_csv(args.dump_radial, "radial", cols, data, sim.config, deterministic=args.deterministic)


def cmd_starkmap(args) -> int:
    cfg = resolve_config(args)
    sim = Simulation(cfg)
    fields = cfg.fields_vcm()
    spec = cfg.excitation()

    def rows():
        for f_vcm, (_, w, prob) in zip(fields, stark_map(sim.system, vcm_to_au(fields), spec)):
            for k in range(w.size):
                yield (f_vcm, k, au_to_cm1(w[k]), prob[k])

    write_csv(args.out, "starkmap", ["field_vcm", "level", "energy_cm1", "probability"], rows(), cfg,
              deterministic=args.deterministic)
    if args.dump_radial:
        _dump_radial(args, sim)
    return 0


def carpet_columns(c: Carpet):
    return ["delay_ps"] + [format(f, ".6f") for f in c.field_bins] + ["below", "above"]


def cmd_carpet(args) -> int:
    cfg = resolve_config(args)
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    sim = Simulation(cfg)
    c = sim.carpet(workers=args.workers)
    data = np.column_stack([c.delays, c.signal, c.below, c.above])
    params = {"q_au": sim.kick.Q, "bin_edges_vcm": [float(e) for e in sim.bins.edges[[0, -1]]]}
    written = []
    try:
        write_csv(args.out, "carpet", carpet_columns(c), data, cfg, params, args.deterministic)
        written.append(args.out)
        if args.ppm:
            write_ppm(args.ppm, c.signal)
            written.append(args.ppm)
        if args.dump_radial:
            _dump_radial(args, sim)
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    log.info("carpet %s: %d delays x %d bins", args.out, *c.signal.shape)
    return 0


def read_carpet(path) -> tuple[Carpet, Table]:
    t = read_csv(path)
    if t.kind != "carpet":
        raise ConfigError(f"{path} is not a carpet file (kind {t.kind!r})")
    inner = t.columns[1:-2]
    fields = np.array([float(x) for x in inner])
    c = Carpet(t.data[:, 0], fields, t.data[:, 1:-2], t.data[:, -2], t.data[:, -1], t.meta)
    return c, t


def cmd_lineout(args) -> int:
    c, table = read_carpet(args.carpet)
    series = lineout(c, args.fi_vcm, args.width_vcm)
    params = {"source_kind": "carpet", "fi_vcm": args.fi_vcm, "width_vcm": args.width_vcm,
              "bin_center_vcm": float(c.field_bins[c.bin_index(args.fi_vcm)])}
    cfg = table.config() if "config" in table.meta else None
    write_csv(args.out, "lineout", ["delay_ps", "signal"], np.column_stack([c.delays, series]), cfg, params,
              args.deterministic)
    return 0


def cmd_spectrum(args) -> int:
    t = read_csv(args.infile)
    times, series = t.column("delay_ps"), t.column("signal")
    peaks = fourier_peaks(series, times, args.window, args.n_peaks, args.threshold)
    cfg = t.config() if "config" in t.meta else None
    labels = [None] * len(peaks)
    if cfg is not None and not args.no_labels and len(peaks):
        sim = Simulation(cfg)
        peaks = label_peaks(peaks, sim.stark_basis, sim.packet.populations, sim.defects, args.tolerance)
        labels = list(peaks.labels)
    rows = [
        (f, a, *(lab if lab else ("", "")))
        for f, a, lab in zip(peaks.frequencies, peaks.amplitudes, labels)
    ]
    params = {"window": args.window, "threshold": args.threshold, **t.params()}
    write_csv(args.out, "spectrum", ["frequency_cm1", "amplitude", "n_a", "n_b"], rows, cfg, params,
              args.deterministic)
    for f, a, lab in zip(peaks.frequencies, peaks.amplitudes, labels):
        print(f"{f:8.3f} cm^-1  {a:6.3f}  {'' if lab is None else f'{lab[0]}-{lab[1]}'}")
    return 0


def cmd_lcomp(args) -> int:
    cfg = resolve_config(args)
    sim = Simulation(cfg)
    lc = sim.l_composition(args.manifold)
    cols = ["time_ps"] + [f"P_l{l}" for l in range(lc.P.shape[1])]
    params = {"manifold": args.manifold}
    write_csv(args.out, "lcomp", cols, np.column_stack([lc.times, lc.P]), cfg, params, args.deterministic)
    if args.dump_radial:
        _dump_radial(args, sim)
    return 0


def cmd_times(args) -> int:
    ct = characteristic_times(args.n, args.field_vcm)
    print(f"n = {ct.n:g}, F = {args.field_vcm:g} V/cm")
    for name, formula, value in ct.rows():
        print(f"  {name:<11s} {formula:<16s} {value:10.2f} ps")
    return 0


def cmd_selfcheck(args) -> int:
    checks = run_all()
    for c in checks:
        print(c.line())
    ok = all(c.passed for c in checks)
    print(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed")
    return 0 if ok else 2


COMMANDS = {
    "starkmap": cmd_starkmap,
    "carpet": cmd_carpet,
    "lineout": cmd_lineout,
    "spectrum": cmd_spectrum,
    "lcomp": cmd_lcomp,
    "times": cmd_times,
    "selfcheck": cmd_selfcheck,
}


def main(argv=None) -> int:
    logging.basicConfig(format="%(levelname)s: %(message)s")
    warnings.simplefilter("default")
    warnings.formatwarning = lambda msg, cat, *a, **k: f"warning: {msg}\n"
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            log.setLevel(logging.INFO)
        return COMMANDS[args.command](args)
    except StarkHCPError as exc:
        print(f"starkhcp: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except FloatingPointError as exc:
        print(f"starkhcp: numerical error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
