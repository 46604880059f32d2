"""Parameter sweeps that regenerate the figure data, plus CSV and SVG output.

A sweep varies one parameter over a linear or logarithmic grid with all
others fixed.  Rows are computed independently (optionally in worker
processes) and always returned in grid order, so the emitted files do not
depend on the worker count.
"""

from __future__ import annotations

import csv
import dataclasses
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .average import QuadratureOptions, averaged_times, spectral_densities
from .model import DoubleDelta, GaussianPacket, PhysicalParams, Rectangular

__all__ = [
    "SWEEP_KINDS",
    "Variable",
    "SweepSpec",
    "SweepRow",
    "SpectrumRow",
    "PlotStyle",
    "run_sweep",
    "emit_csv",
    "read_csv",
    "emit_plot",
    "figure_spec",
]

# kind -> (swept parameter, required fixed keys)
SWEEP_KINDS = {
    "width": ("a", ("v0", "k0", "sigma")),
    "gamma": ("gamma", ("d", "k0", "sigma")),
    "separation": ("d", ("gamma", "k0", "sigma")),
    "spectrum": ("k", ("gamma", "d", "k0", "sigma")),
}
OPTIONAL_KEYS = ("z0", "hbar", "mu")
UNITS_LINE = "# atomic units (hbar = mu = 1 unless stated): lengths in bohr, times in hbar/Hartree, k in 1/bohr"


@dataclass(frozen=True)
class Variable:
    name: str
    start: float
    stop: float
    count: int
    scale: str = "linear"

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 2:
            raise ValueError(f"count must be an integer >= 2, got {self.count}")
        if not self.start < self.stop:
            raise ValueError(f"need start < stop, got {self.start}, {self.stop}")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"scale must be 'linear' or 'log', got {self.scale!r}")
        if self.scale == "log" and not self.start > 0:
            raise ValueError("log scale needs a positive start")

    def grid(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, int(self.count))
        return np.linspace(self.start, self.stop, int(self.count))


@dataclass(frozen=True)
class SweepSpec:
    kind: str
    fixed: dict
    variable: Variable
    quadrature: QuadratureOptions = field(default_factory=QuadratureOptions)

    def __post_init__(self):
        if self.kind not in SWEEP_KINDS:
            raise ValueError(f"unknown sweep kind {self.kind!r}; expected one of {sorted(SWEEP_KINDS)}")
        name, required = SWEEP_KINDS[self.kind]
        if self.variable.name != name:
            raise ValueError(f"{self.kind} sweep varies {name!r}, not {self.variable.name!r}")
        missing = [k for k in required if k not in self.fixed]
        if missing:
            raise ValueError(f"missing fixed parameter(s): {', '.join(missing)}")
        unknown = [k for k in self.fixed if k not in required + OPTIONAL_KEYS]
        if unknown:
            raise ValueError(f"unknown fixed parameter(s): {', '.join(unknown)}")
        object.__setattr__(self, "fixed", {k: float(v) for k, v in self.fixed.items()})
        # fail now rather than in a worker
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            self.packet()
            self.params()
            if self.kind != "spectrum":
                self.potential(self.variable.start)
                self.potential(self.variable.stop)
            else:
                self.potential()
                if self.variable.start <= 0:
                    raise ValueError("spectrum k grid must be positive")

    def params(self) -> PhysicalParams:
        return PhysicalParams(hbar=self.fixed.get("hbar", 1.0), mu=self.fixed.get("mu", 1.0))

    def packet(self) -> GaussianPacket:
        f = self.fixed
        return GaussianPacket(f["k0"], f["sigma"], f.get("z0", -8.0 * f["sigma"]))

    def potential(self, x: float | None = None):
        f = self.fixed
        if self.kind == "width":
            return Rectangular(f["v0"], x)
        if self.kind == "gamma":
            return DoubleDelta(x, f["d"])
        if self.kind == "separation":
            return DoubleDelta(f["gamma"], x)
        return DoubleDelta(f["gamma"], f["d"])


@dataclass(frozen=True)
class SweepRow:
    x: float
    avgT: float
    avgR: float
    meanDwell: float
    tFree: float
    pT: float
    pR: float
    errAvgT: float
    errAvgR: float
    errMeanDwell: float
    errPT: float
    unitarityResidual: float
    decompositionResidual: float
    excludedMass: float
    status: str = "ok"


@dataclass(frozen=True)
class SpectrumRow:
    k: float
    rhoInc: float
    rhoT: float
    transmitted: float
    rhoR: float


def _failed_row(x, exc) -> SweepRow:
    nan = math.nan
    msg = f"error: {type(exc).__name__}: {exc}".replace("\n", " ")
    return SweepRow(x, nan, nan, nan, nan, nan, nan, nan, nan, nan, nan, nan, nan, nan, msg)


def _compute_row(spec: SweepSpec, x: float) -> SweepRow:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            r = averaged_times(spec.packet(), spec.potential(x), spec.params(), spec.quadrature)
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        return _failed_row(x, exc)
    e = r.errors
    return SweepRow(
        x=float(x), avgT=r.avgT, avgR=r.avgR, meanDwell=r.meanDwell, tFree=r.tFree, pT=r.pT, pR=r.pR,
        errAvgT=e["avgT"], errAvgR=e["avgR"], errMeanDwell=e["meanDwell"], errPT=e["pT"],
        unitarityResidual=abs(r.pT + r.pR + r.excludedMass - 1.0),
        decompositionResidual=r.decomposition_residual, excludedMass=r.excludedMass,
    )


def _row_task(args):
    spec, x = args
    return _compute_row(spec, x)


def _spectrum(spec: SweepSpec) -> list[SpectrumRow]:
    k = spec.variable.grid()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        tab = spectral_densities(spec.packet(), spec.potential(), spec.params(), k, spec.quadrature)
    return [
        SpectrumRow(float(a), float(b), float(c), float(c * tab.pT), float(d))
        for a, b, c, d in zip(tab.k, tab.rho_inc, tab.rho_T, tab.rho_R)
    ]


def run_sweep(spec: SweepSpec, workers: int = 1) -> list:
    """Evaluate every grid point of ``spec``.

    Returns :class:`SweepRow` objects (or :class:`SpectrumRow` for the
    spectrum kind) in grid order.  A failing point yields a row of NaNs whose
    ``status`` holds the error; the sweep carries on.
    """
    if spec.kind == "spectrum":
        return _spectrum(spec)
    xs = [float(x) for x in spec.variable.grid()]
    if workers is None or workers <= 1:
        return [_compute_row(spec, x) for x in xs]
    with ProcessPoolExecutor(max_workers=int(workers)) as pool:
        return list(pool.map(_row_task, [(spec, x) for x in xs]))


def _fmt(v):
    if isinstance(v, str):
        return v
    return f"{v:.12g}"


def emit_csv(rows, path, row_type=None) -> None:
    """Write rows as CSV: a units comment line, a header, then one line per
    row with 12 significant digits and LF endings."""
    if row_type is None:
        row_type = type(rows[0]) if rows else SweepRow
    names = [f.name for f in dataclasses.fields(row_type)]
    try:
        with open(path, "w", newline="") as fh:
            fh.write(UNITS_LINE + "\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(names)
            for row in rows:
                w.writerow([_fmt(getattr(row, n)) for n in names])
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def read_csv(path, row_type=None) -> list:
    """Parse a file written by :func:`emit_csv` back into rows."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    if row_type is None:
        row_type = SpectrumRow if header and header[0] == "k" else SweepRow
    types = {f.name: f.type for f in dataclasses.fields(row_type)}
    out = []
    for rec in reader:
        vals = {h: (v if types[h] in ("str", str) else float(v)) for h, v in zip(header, rec)}
        out.append(row_type(**vals))
    return out


@dataclass(frozen=True)
class PlotStyle:
    """``quantities`` is 'times', 'probabilities' or 'spectrum'.  ``scale``
    multiplies every curve except the average transmission time (display
    only)."""

    quantities: str = "times"
    logy: bool = False
    scale: float = 1.0
    xlabel: str | None = None
    title: str | None = None

    def __post_init__(self):
        if self.quantities not in ("times", "probabilities", "spectrum"):
            raise ValueError(f"unknown quantities {self.quantities!r}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")


def _decade_label(v, _pos=None):
    e = math.log10(v) if v > 0 else math.nan
    if not math.isfinite(e) or abs(e - round(e)) > 1e-9:
        return ""
    return f"1e{int(round(e))}"


def emit_plot(rows, style: PlotStyle, path) -> None:
    """Write a standalone SVG of the sweep rows."""
    import matplotlib
    from matplotlib.backends.backend_svg import FigureCanvasSVG
    from matplotlib.figure import Figure
    from matplotlib.ticker import FuncFormatter, LogLocator

    if not rows:
        raise ValueError("nothing to plot")
    first = rows[0]
    if isinstance(first, SpectrumRow):
        x = np.array([r.k for r in rows])
    else:
        x = np.array([r.x for r in rows])

    def col(name):
        return np.array([getattr(r, name) for r in rows], dtype=float)

    s = style.scale
    tag = "" if s == 1 else f" (x{s:g})"
    if style.quantities == "times":
        curves = [
            (r"$\langle t_T\rangle$", col("avgT")),
            (r"$\langle t_R\rangle$" + tag, s * col("avgR")),
            (r"$\overline{\tau_D}$" + tag, s * col("meanDwell")),
            (r"$t_{free}$" + tag, s * col("tFree")),
        ]
        ylabel = "time (a.u.)"
    elif style.quantities == "probabilities":
        curves = [(r"$P_T$", col("pT")), (r"$P_R$" + tag, s * col("pR"))]
        ylabel = "probability"
    else:
        curves = [(r"$\rho_{inc}$", col("rhoInc")), (r"$\rho |T|^2$" + tag, s * col("transmitted"))]
        ylabel = "density"

    marker = "o" if len(rows) == 1 else None
    with matplotlib.rc_context({"svg.fonttype": "none", "svg.hashsalt": "swpclock"}):
        fig = Figure(figsize=(7.0, 4.2))
        FigureCanvasSVG(fig)
        ax = fig.add_subplot(1, 1, 1)
        for label, y in curves:
            ax.plot(x, y, marker=marker, label=label)
        if style.logy:
            ax.set_yscale("log")
            ax.yaxis.set_major_locator(LogLocator(base=10.0))
            ax.yaxis.set_major_formatter(FuncFormatter(_decade_label))
        ax.set_xlabel(style.xlabel or ("k (a.u.)" if style.quantities == "spectrum" else "x (a.u.)"))
        ax.set_ylabel(ylabel)
        if style.title:
            ax.set_title(style.title)
        ax.legend()
        fig.tight_layout()
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as exc:
            raise OSError(f"cannot write plot to {path}: {exc}") from exc


def figure_spec(name: str, quadrature: QuadratureOptions | None = None) -> SweepSpec:
    """Sweep specs for the figure parameter sets.

    ``fig1`` width sweep, ``fig2`` transmitted spectrum, ``fig3`` gamma
    sweep, ``fig4a``/``fig4b`` small and large separation sweeps.
    """
    q = quadrature or QuadratureOptions()
    if name == "fig1":
        return SweepSpec("width", {"v0": 0.5, "k0": 0.7, "sigma": 10.0, "z0": -80.0},
                         Variable("a", 1.0, 100.0, 60), q)
    if name == "fig2":
        return SweepSpec("spectrum", {"gamma": 16.0, "d": 50.0, "k0": 1.2, "sigma": 6.0, "z0": -48.0},
                         Variable("k", 0.8, 1.6, 2001), q)
    if name == "fig3":
        return SweepSpec("gamma", {"d": 5.0, "k0": 1.2, "sigma": 6.0, "z0": -48.0},
                         Variable("gamma", 1.0, 64.0, 40, "log"), q)
    if name == "fig4a":
        return SweepSpec("separation", {"gamma": 16.0, "k0": 1.2, "sigma": 20.0, "z0": -160.0},
                         Variable("d", 0.5, 12.0, 60), q)
    if name == "fig4b":
        return SweepSpec("separation", {"gamma": 16.0, "k0": 1.2, "sigma": 20.0, "z0": -160.0},
                         Variable("d", 1.0, 200.0, 60), q)
    raise ValueError(f"unknown figure {name!r}")
