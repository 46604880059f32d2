"""Command-line front end.

Every subcommand accepts ``--config FILE`` with one ``key = value`` per line
(``#`` starts a comment); keys are the long flag names with underscores.
Flags given on the command line override the file.  ``--dump-config FILE``
writes the fully resolved configuration and exits without computing.

Exit status: 0 on success, 1 on a runtime failure, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = ["RunConfig", "parse_args", "run", "main"]

log = logging.getLogger("swpclock")


def _float(s):
    v = float(s)
    if math.isnan(v):
        raise ValueError("nan")
    return v


def _bool(s):
    t = str(s).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(s)


def _positive(v):
    return None if v > 0 else "must be positive"


def _nonneg(v):
    return None if v >= 0 else "must be non-negative"


def _negative(v):
    return None if v < 0 else "must be negative"


def _at_least(n):
    return lambda v: None if v >= n else f"must be >= {n}"


@dataclass(frozen=True)
class Opt:
    name: str
    conv: object = _float
    help: str = ""
    default: object = None
    check: object = None
    choices: tuple | None = None
    flag: bool = False

    @property
    def option(self):
        return "--" + self.name.replace("_", "-")


def _potential_opts():
    return [
        Opt("potential", str, "barrier type", choices=("rect", "dd")),
        Opt("v0", _float, "rectangular barrier height", check=_nonneg),
        Opt("a", _float, "rectangular barrier width", check=_positive),
        Opt("gamma", _float, "delta strength", check=_nonneg),
        Opt("d", _float, "delta separation", check=_positive),
    ]


def _packet_opts():
    return [
        Opt("k0", _float, "mean wave number", check=_positive),
        Opt("sigma", _float, "spatial packet width", check=_positive),
        Opt("z0", _float, "initial centre (default -8 sigma)", check=_negative),
    ]


def _quad_opts():
    return [
        Opt("rel_tol", _float, "relative quadrature tolerance", 1e-9, _positive),
        Opt("window", _float, "k window half-width in units of dk", 12.0, _at_least(6)),
        Opt("max_depth", int, "maximum bisection depth", 40, _at_least(1)),
    ]


COMMON = [
    Opt("hbar", _float, "reduced Planck constant", 1.0, _positive),
    Opt("mu", _float, "particle mass", 1.0, _positive),
    Opt("verbose", int, "log level (0 warnings, 1 info, 2 debug)", 0, _nonneg),
]

COMMANDS = {
    "stationary": [
        *_potential_opts(),
        Opt("k", _float, "wave number", check=_positive),
        Opt("step", _float, "finite-difference step in energy (default automatic)", check=_positive),
    ],
    "average": [*_potential_opts(), *_packet_opts(), *_quad_opts()],
    "sweep": [
        Opt("kind", str, "swept quantity", choices=("width", "gamma", "separation")),
        Opt("v0", _float, "rectangular barrier height (width sweep)", check=_nonneg),
        Opt("gamma", _float, "delta strength (separation sweep)", check=_nonneg),
        Opt("d", _float, "delta separation (gamma sweep)", check=_positive),
        *_packet_opts(),
        Opt("start", _float, "first grid value"),
        Opt("stop", _float, "last grid value"),
        Opt("count", int, "grid points (default 60, or 40 for gamma)", check=_at_least(2)),
        Opt("scale", str, "grid spacing (default linear, or log for gamma)", choices=("linear", "log")),
        Opt("out", str, "CSV output path"),
        Opt("plot", str, "SVG output path"),
        Opt("logy", _bool, "log-scale time axis", False, flag=True),
        Opt("plot_scale", _float, "display factor for all curves but <t_T>", 1.0, _positive),
        Opt("workers", int, "worker processes", 1, _at_least(1)),
        *_quad_opts(),
    ],
    "spectrum": [
        Opt("gamma", _float, "delta strength", check=_nonneg),
        Opt("d", _float, "delta separation", check=_positive),
        *_packet_opts(),
        Opt("kmin", _float, "first wave number (default k0 - 6 dk)", check=_positive),
        Opt("kmax", _float, "last wave number (default k0 + 6 dk)", check=_positive),
        Opt("count", int, "grid points", 801, _at_least(2)),
        Opt("out", str, "CSV output path"),
        Opt("plot", str, "SVG output path"),
        *_quad_opts(),
    ],
    "resonances": [
        Opt("gamma", _float, "delta strength", check=_positive),
        Opt("d", _float, "delta separation", check=_positive),
        Opt("kmin", _float, "lower wave number", check=_positive),
        Opt("kmax", _float, "upper wave number", check=_positive),
    ],
    "propagate": [
        *_potential_opts(),
        *_packet_opts(),
        Opt("zmin", _float, "left grid edge"),
        Opt("zmax", _float, "right grid edge"),
        Opt("dz", _float, "grid spacing", check=_positive),
        Opt("dt", _float, "time step (default 0.5 mu dz^2 / hbar)", check=_positive),
        Opt("tmax", _float, "final time", check=_positive),
        Opt("snapshot_time", _float, "time of the density snapshot", check=_nonneg),
        Opt("snapshot_out", str, "CSV path for the density snapshot"),
    ],
}


def _required(sub, vals):
    """Keys that must be set given the values seen so far."""
    req = []
    if sub in ("stationary", "average", "propagate"):
        req.append("potential")
        pot = vals.get("potential")
        req += {"rect": ["v0", "a"], "dd": ["gamma", "d"]}.get(pot, [])
    if sub in ("average", "sweep", "spectrum", "propagate"):
        req += ["k0", "sigma"]
    if sub == "stationary":
        req.append("k")
    elif sub == "sweep":
        req += ["kind", "start", "stop", "out"]
        req += {"width": ["v0"], "gamma": ["d"], "separation": ["gamma"]}.get(vals.get("kind"), [])
    elif sub == "spectrum":
        req += ["gamma", "d"]
    elif sub == "resonances":
        req += ["gamma", "d", "kmin", "kmax"]
    elif sub == "propagate":
        req += ["zmin", "zmax", "dz", "tmax"]
        if "snapshot_time" in vals or "snapshot_out" in vals:
            req += ["snapshot_time", "snapshot_out"]
    return req


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    params: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.params[key]

    def get(self, key, default=None):
        v = self.params.get(key)
        return default if v is None else v

    def dump(self) -> str:
        lines = [f"# swpclock configuration; run with: swpclock {self.subcommand} --config <file>"]
        for key in sorted(self.params):
            v = self.params[key]
            if v is None:
                continue
            if isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{key} = {v}")
        return "\n".join(lines) + "\n"


def read_config(path):
    """Parse ``key = value`` lines; returns a dict of strings."""
    out = {}
    with open(path) as fh:
        for num, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{num}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            if not key:
                raise ValueError(f"{path}:{num}: empty key")
            out[key] = value
    return out


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="swpclock",
        description="Clock, dwell and post-selected average tunneling times (atomic units).",
    )
    subs = parser.add_subparsers(dest="subcommand", metavar="subcommand")
    subs.required = True
    for name, opts in COMMANDS.items():
        p = subs.add_parser(name, help=f"{name} calculation", argument_default=argparse.SUPPRESS)
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--dump-config", dest="dump_config", help="write the resolved configuration here ('-' for stdout) and exit")
        for o in opts + COMMON:
            if o.flag:
                p.add_argument(o.option, dest=o.name, action="store_const", const="true", help=o.help)
            else:
                p.add_argument(o.option, dest=o.name, help=o.help, choices=o.choices)
    return parser


def parse_args(argv=None) -> RunConfig:
    """Parse and validate; usage errors exit with status 2."""
    parser = _build_parser()
    ns = vars(parser.parse_args(argv))
    sub = ns.pop("subcommand")
    sp = parser._subparsers._group_actions[0].choices[sub]
    opts = {o.name: o for o in COMMANDS[sub] + COMMON}

    raw = {}
    cfg_path = ns.pop("config", None)
    dump = ns.pop("dump_config", None)
    if cfg_path is not None:
        try:
            file_vals = read_config(cfg_path)
        except (OSError, ValueError) as exc:
            sp.error(f"argument --config: {exc}")
        for key, value in file_vals.items():
            if key not in opts:
                sp.error(f"unknown configuration key {key!r} in {cfg_path}")
            raw[key] = value
    raw.update(ns)

    vals = {}
    for key, text in raw.items():
        o = opts[key]
        try:
            v = o.conv(text)
        except (TypeError, ValueError):
            sp.error(f"argument {o.option}: invalid value {text!r}")
        if o.choices and v not in o.choices:
            sp.error(f"argument {o.option}: invalid choice {v!r} (choose from {', '.join(o.choices)})")
        if o.check is not None:
            msg = o.check(v)
            if msg:
                sp.error(f"argument {o.option}: {msg}, got {text}")
        vals[key] = v

    for key in _required(sub, vals):
        if key not in vals:
            sp.error(f"the following argument is required: {opts[key].option}")
    for o in opts.values():
        vals.setdefault(o.name, o.default)

    config = RunConfig(sub, vals)
    try:
        _validate(config)
    except ValueError as exc:
        sp.error(str(exc))
    if dump is not None:
        text = config.dump()
        if dump == "-":
            sys.stdout.write(text)
        else:
            try:
                with open(dump, "w") as fh:
                    fh.write(text)
            except OSError as exc:
                sp.error(f"argument --dump-config: {exc}")
        raise SystemExit(0)
    return config


# ---------------------------------------------------------------- building


def _params(c):
    from .model import PhysicalParams

    return PhysicalParams(hbar=c["hbar"], mu=c["mu"])


def _potential(c):
    from .model import DoubleDelta, Rectangular

    if c["potential"] == "rect":
        return Rectangular(c["v0"], c["a"])
    return DoubleDelta(c["gamma"], c["d"])


def _packet(c):
    from .model import GaussianPacket

    z0 = c.get("z0", -8.0 * c["sigma"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return GaussianPacket(c["k0"], c["sigma"], z0)


def _quad(c):
    from .average import QuadratureOptions

    return QuadratureOptions(relTol=c["rel_tol"], window=c["window"], maxDepth=c["max_depth"])


def _sweep_spec(c):
    from .experiments import SWEEP_KINDS, SweepSpec, Variable

    kind = c["kind"]
    name, required = SWEEP_KINDS[kind]
    fixed = {k: c[k] for k in required}
    for k in ("z0", "hbar", "mu"):
        if c.get(k) is not None:
            fixed[k] = c[k]
    count = c.get("count", 40 if kind == "gamma" else 60)
    scale = c.get("scale", "log" if kind == "gamma" else "linear")
    return SweepSpec(kind, fixed, Variable(name, c["start"], c["stop"], count, scale), _quad(c))


def _spectrum_spec(c):
    from .experiments import SweepSpec, Variable

    fixed = {k: c[k] for k in ("gamma", "d", "k0", "sigma")}
    for k in ("z0", "hbar", "mu"):
        if c.get(k) is not None:
            fixed[k] = c[k]
    dk = 0.5 / c["sigma"]
    kmin = c.get("kmin", max(1e-6, c["k0"] - 6 * dk))
    kmax = c.get("kmax", c["k0"] + 6 * dk)
    return SweepSpec("spectrum", fixed, Variable("k", kmin, kmax, c["count"]), _quad(c))


def _validate(c):
    """Build every object the run needs so bad combinations fail up front."""
    sub = c.subcommand
    _params(c)
    if sub in ("stationary", "average", "propagate"):
        _potential(c)
    if sub in ("average", "propagate"):
        _packet(c)
    if sub == "average":
        _quad(c)
    if sub == "sweep":
        _sweep_spec(c)
    if sub == "spectrum":
        _spectrum_spec(c)
    if sub == "resonances" and not c["kmin"] < c["kmax"]:
        raise ValueError("argument --kmax: must exceed --kmin")
    if sub == "propagate":
        from .propagate import Grid1D

        if not c["zmin"] < c["zmax"]:
            raise ValueError("argument --zmax: must exceed --zmin")
        Grid1D.spanning(c["zmin"], c["zmax"], c["dz"])


# ----------------------------------------------------------------- running


def _num(v):
    if isinstance(v, complex):
        return f"{v.real:.12g}{v.imag:+.12g}j"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def _emit(stream, **values):
    for k, v in values.items():
        stream.write(f"{k}={_num(v)}\n")


def _provenance(c, out):
    from . import __version__

    out.write(f"# swpclock {__version__} {c.subcommand}\n")
    for key in sorted(c.params):
        v = c.params[key]
        if v is not None:
            out.write(f"# {key} = {v}\n")


def _run_stationary(c, out):
    from .clock import clock_estimate, stationary_dwell

    pot, params, k = _potential(c), _params(c), c["k"]
    est = clock_estimate(pot, params, np.array([k]), c.get("step"))
    T, R = complex(est.T[0]), complex(est.R[0])
    _emit(out, T=T, R=R, probT=abs(T) ** 2, probR=abs(R) ** 2,
          phiT=math.atan2(T.imag, T.real), phiR=math.atan2(R.imag, R.real),
          tauD=float(stationary_dwell(pot, params, np.array([k]))[0]),
          tT=float(est.tT[0]), tR=float(est.tR[0]), errT=float(est.errT[0]), errR=float(est.errR[0]))


def _run_average(c, out):
    from .average import averaged_times
    from .model import initial_right_probability

    pk = _packet(c)
    r = averaged_times(pk, _potential(c), _params(c), _quad(c))
    _emit(out, avgT=r.avgT, avgR=r.avgR, meanDwell=r.meanDwell, tFree=r.tFree, pT=r.pT, pR=r.pR,
          decompositionResidual=r.decomposition_residual, excludedMass=r.excludedMass,
          initialRightProbability=initial_right_probability(pk), panels=r.panels,
          **{f"err_{k}": v for k, v in r.errors.items()})


def _write_outputs(c, rows, style):
    from .experiments import emit_csv, emit_plot

    if c.get("out"):
        emit_csv(rows, c["out"])
        log.info("wrote %s", c["out"])
    if c.get("plot"):
        emit_plot(rows, style, c["plot"])
        log.info("wrote %s", c["plot"])


def _run_sweep(c, out):
    from .experiments import PlotStyle, run_sweep

    spec = _sweep_spec(c)
    rows = run_sweep(spec, workers=c["workers"])
    quantities = "probabilities" if spec.kind == "gamma" else "times"
    xlabel = {"width": "a (a.u.)", "gamma": "gamma (a.u.)", "separation": "d (a.u.)"}[spec.kind]
    _write_outputs(c, rows, PlotStyle(quantities, bool(c["logy"]), c["plot_scale"], xlabel))
    failed = [r for r in rows if r.status != "ok"]
    _emit(out, rows=len(rows), failed=len(failed), out=c["out"])
    for r in failed:
        log.warning("x=%g: %s", r.x, r.status)


def _run_spectrum(c, out):
    from .experiments import PlotStyle, run_sweep

    rows = run_sweep(_spectrum_spec(c))
    _write_outputs(c, rows, PlotStyle("spectrum"))
    if not c.get("out"):
        out.write("k,rhoInc,rhoT,transmitted,rhoR\n")
        for r in rows:
            out.write(",".join(_num(v) for v in (r.k, r.rhoInc, r.rhoT, r.transmitted, r.rhoR)) + "\n")
    else:
        _emit(out, rows=len(rows), out=c["out"])


def _run_resonances(c, out):
    from .resonance import find_resonances

    res = find_resonances(c["gamma"], c["d"], _params(c), c["kmin"], c["kmax"])
    out.write("n,kn,tauDn,width\n")
    for r in res:
        out.write(f"{r.n},{_num(r.kn)},{_num(r.tauDn)},{_num(r.widthEstimate)}\n")


def _run_propagate(c, out):
    from .propagate import Grid1D, evolve, write_snapshot_csv

    grid = Grid1D.spanning(c["zmin"], c["zmax"], c["dz"])
    times = [c["snapshot_time"]] if c.get("snapshot_time") is not None else []
    rep = evolve(_packet(c), _potential(c), _params(c), grid, c.get("dt"), c["tmax"], times)
    if times:
        (t, dens), = rep.snapshots.items()
        write_snapshot_csv(c["snapshot_out"], np.column_stack([grid.z, dens]))
        log.info("wrote snapshot at t=%g to %s", t, c["snapshot_out"])
    _emit(out, pT=rep.pT, pR=rep.pR, pInside=rep.pInside, normDrift=rep.normDrift,
          finalTime=rep.finalTime, dt=rep.dt, steps=rep.steps, nPoints=grid.nPoints,
          maxBoundaryDensity=rep.maxBoundaryDensity)


RUNNERS = {
    "stationary": _run_stationary,
    "average": _run_average,
    "sweep": _run_sweep,
    "spectrum": _run_spectrum,
    "resonances": _run_resonances,
    "propagate": _run_propagate,
}


def run(config: RunConfig, out=None) -> int:
    """Execute a parsed configuration; returns the exit status."""
    out = out or sys.stdout
    level = {0: logging.WARNING, 1: logging.INFO}.get(config["verbose"], logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s")
    log.setLevel(level)
    _provenance(config, out)
    try:
        with warnings.catch_warnings():
            if config["verbose"] == 0:
                warnings.simplefilter("ignore")
            RUNNERS[config.subcommand](config, out)
    except Exception as exc:  # one-line diagnostic, exit 1
        msg = " ".join(str(exc).split())
        print(f"swpclock {config.subcommand}: error: {msg}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    try:
        config = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
