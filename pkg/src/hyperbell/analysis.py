"""Fidelity and efficiency metrics, the parameter sweep, CSV/SVG output.

The sweep runs the full generation circuit at every grid point and
reports, per point: the closed-form efficiency |(r_h - r_o)/2|^8, the
simulated end-to-end success probability (they must agree to 1e-10),
the herald rate, the silent-leak share of the surviving weight, and the
fidelity of the surviving unleaked component against its target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .cavity import (
    CavityParams,
    DephasingParams,
    ReflectionPair,
    dephasing_penalty,
    reflection_coefficients,
)
from .errors import ConfigurationError
from .hilbert import HybridState, overlap
from .protocols import (
    HBSG_OUTPUT_RAILS,
    HBSG_OUTPUT_TABLE,
    HyperBellLabel,
    Bell,
    hbsa_full_circuit,
    hbsa_input,
    hbsg_circuit,
    hbsg_circuit_premeasure,
    hbsg_input,
    make_bell,
)
from .optics import run_circuit_tracked

CSV_COLUMNS = ("kappa_s_over_kappa,g_over_sum,r_o_re,r_o_im,r_h_re,r_h_im,"
               "eta_closed,eta_sim,herald_rate,leakage_rate,cond_fidelity")
_DEPHASING_COLUMNS = ",dephasing_penalty,cond_fidelity_dephased,cond_fidelity_exp_scaled"

_ZERO_WEIGHT = 1e-30


def fidelity(actual: HybridState, ideal: HybridState) -> float:
    """|<ideal|actual>|^2 with actual renormalized; ideal must be normalized."""
    if abs(ideal.norm2 - 1.0) > 1e-9:
        raise ConfigurationError("ideal state must be normalized")
    n2 = actual.norm2
    if n2 <= 0:
        raise ConfigurationError("actual state has zero norm")
    return abs(overlap(ideal, actual)) ** 2 / n2


def efficiency_closed_form(pair: ReflectionPair) -> float:
    """End-to-end success probability |(r_h - r_o)/2|^8.

    Eight lossy passages (two photons through two stages of either a QD
    arm or its matched corrector, squared); invariant under the overall
    sign convention.
    """
    return float(abs(pair.r_h - pair.r_o) / 2) ** 8


@dataclass(frozen=True)
class GenerationStats:
    """Aggregates of one full generation run."""

    eta_simulated: float
    herald_rate: float
    leakage_rate: float
    conditional_fidelity: float


@lru_cache(maxsize=1)
def _hbsg_ideal_premeasure() -> np.ndarray:
    """Unit-norm output of the lossless generation circuit, spins unmeasured."""
    circuit = hbsg_circuit_premeasure()
    from .cavity import IDEAL_PAIR

    run = run_circuit_tracked(circuit, hbsg_input(circuit), IDEAL_PAIR,
                              drop_clicked=True)
    amps = run.branches[0].layers[0]
    return amps / np.sqrt(np.sum(np.abs(amps) ** 2))


def hbsg_statistics(pair: ReflectionPair) -> GenerationStats:
    """Simulate the generation circuit and aggregate its statistics.

    The herald rate is the probability that at least one herald detector
    fires; eta and the leak share are conditioned on no click. The waveform
    correctors keep the unleaked component proportional to the lossless
    output, so conditional_fidelity (its fidelity against that output,
    equal to the per-branch post-measurement value) is 1 up to rounding;
    it is vacuously 1.0 when nothing unleaked survives (e.g. g = 0).
    """
    circuit = hbsg_circuit_premeasure()
    run = run_circuit_tracked(circuit, hbsg_input(circuit), pair, drop_clicked=True)
    herald_rate = sum(run.click_probability.values())
    if not run.branches:
        return GenerationStats(0.0, herald_rate, 1.0, 1.0)
    tb = run.branches[0]
    eta = tb.clean_weight
    leak = tb.leaked_weight
    survived = eta + leak
    leakage_rate = leak / survived if survived > _ZERO_WEIGHT else 1.0
    if eta > _ZERO_WEIGHT:
        fid = min(1.0, float(
            abs(np.vdot(_hbsg_ideal_premeasure(), tb.layers[0])) ** 2 / eta))
    else:
        fid = 1.0
    return GenerationStats(eta, herald_rate, leakage_rate, fid)


def hbsg_branch_report(pair: ReflectionPair) -> list[tuple[tuple[str, str], float, float]]:
    """Per spin branch: (spins, probability, clean-component target fidelity)."""
    circuit = hbsg_circuit()
    layout = circuit.layout()
    rows = []
    for tb in run_circuit_tracked(circuit, hbsg_input(circuit), pair).branches:
        if tb.heralds() or tb.clean_weight <= _ZERO_WEIGHT:
            continue
        spins = tb.spin_results()
        key = (spins["QD1"], spins["QD2"])
        label = HBSG_OUTPUT_TABLE[key]
        target = make_bell(label.pol, label.spatial, layout,
                           rails=HBSG_OUTPUT_RAILS, spins=key)
        fid = abs(overlap(target, tb.clean_state())) ** 2 / tb.clean_weight
        rows.append((key, tb.probability, fid))
    return rows


def hbsa_leakage_rate(pair: ReflectionPair,
                      label: HyperBellLabel = HyperBellLabel(Bell.PHI_PLUS, Bell.PHI_PLUS),
                      ) -> float:
    """Silent-leak share of the surviving weight for one analysis run."""
    clean = 0.0
    leak = 0.0
    for tb in run_circuit_tracked(hbsa_full_circuit(), hbsa_input(label), pair).branches:
        clean += tb.clean_weight
        leak += tb.leaked_weight
    survived = clean + leak
    return leak / survived if survived > _ZERO_WEIGHT else 1.0


def hbsa_misclassification_rate(pair: ReflectionPair, label: HyperBellLabel) -> float:
    """Probability weight of analysis branches classified to the wrong label."""
    from .protocols import run_hbsa

    wrong = 0.0
    total = 0.0
    for branch in run_hbsa(label, pair):
        total += branch.probability
        if branch.classified != label:
            wrong += branch.probability
    return wrong / total if total > _ZERO_WEIGHT else 0.0


# ---------------------------------------------------------------------------
# parameter sweep

@dataclass(frozen=True)
class SweepGrid:
    """Sweep axes: side leakage kappa_s/kappa and coupling g/(kappa_s+kappa)."""

    kappa_s_over_kappa: tuple[float, ...]
    g_over_sum: tuple[float, ...]
    gamma_over_kappa: float = 0.1
    detuning: float = 0.0

    def __post_init__(self):
        values = list(self.kappa_s_over_kappa) + list(self.g_over_sum)
        if not values:
            raise ConfigurationError("sweep grid must not be empty")
        if any(not math.isfinite(v) or v < 0 for v in values):
            raise ConfigurationError("grid values must be finite and non-negative")

    @staticmethod
    def regular(ks_min=0.0, ks_max=1.0, ks_steps=101,
                g_min=0.0, g_max=2.5, g_steps=101,
                gamma_over_kappa=0.1, detuning=0.0) -> "SweepGrid":
        return SweepGrid(
            tuple(np.linspace(ks_min, ks_max, ks_steps)),
            tuple(np.linspace(g_min, g_max, g_steps)),
            gamma_over_kappa, detuning)


@dataclass(frozen=True)
class SweepRecord:
    kappa_s_over_kappa: float
    g_over_sum: float
    r_o: complex
    r_h: complex
    eta_closed_form: float
    eta_simulated: float
    herald_rate: float
    leakage_rate: float
    conditional_fidelity: float


def sweep_point(kappa_s: float, g_over_sum: float, gamma_over_kappa: float = 0.1,
                detuning: float = 0.0) -> SweepRecord:
    """Coefficients plus full generation statistics at one grid point."""
    params = CavityParams(
        g=g_over_sum * (kappa_s + 1.0),
        kappa=1.0,
        kappa_s=kappa_s,
        gamma=gamma_over_kappa,
        omega=detuning,
    )
    pair = reflection_coefficients(params)
    stats = hbsg_statistics(pair)
    return SweepRecord(
        kappa_s_over_kappa=kappa_s,
        g_over_sum=g_over_sum,
        r_o=pair.r_o,
        r_h=pair.r_h,
        eta_closed_form=efficiency_closed_form(pair),
        eta_simulated=stats.eta_simulated,
        herald_rate=stats.herald_rate,
        leakage_rate=stats.leakage_rate,
        conditional_fidelity=stats.conditional_fidelity,
    )


def run_sweep(grid: SweepGrid) -> list[SweepRecord]:
    """Evaluate every grid point, row-major (kappa_s outer, coupling inner)."""
    return [
        sweep_point(ks, g, grid.gamma_over_kappa, grid.detuning)
        for ks in grid.kappa_s_over_kappa
        for g in grid.g_over_sum
    ]


# ---------------------------------------------------------------------------
# CSV

def _fmt(x: float) -> str:
    return repr(float(x))


def emit_csv(records: list[SweepRecord],
             dephasing: DephasingParams | None = None) -> str:
    """Render sweep records as CSV.

    With dephasing parameters supplied, three extra columns report the
    exciton-dephasing penalty 1 - exp(-tau/Gamma), the fidelity reduced
    by that amount (subtractive reading), and the multiplicative
    alternative exp(-tau/Gamma) * fidelity for comparison.
    """
    header = CSV_COLUMNS + (_DEPHASING_COLUMNS if dephasing is not None else "")
    lines = [header]
    penalty = dephasing_penalty(dephasing) if dephasing is not None else None
    for r in records:
        row = [
            _fmt(r.kappa_s_over_kappa), _fmt(r.g_over_sum),
            _fmt(r.r_o.real), _fmt(r.r_o.imag),
            _fmt(r.r_h.real), _fmt(r.r_h.imag),
            _fmt(r.eta_closed_form), _fmt(r.eta_simulated),
            _fmt(r.herald_rate), _fmt(r.leakage_rate),
            _fmt(r.conditional_fidelity),
        ]
        if penalty is not None:
            row += [
                _fmt(penalty),
                _fmt(r.conditional_fidelity - penalty),
                _fmt(r.conditional_fidelity * (1.0 - penalty)),
            ]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> list[SweepRecord]:
    """Inverse of emit_csv (extra dephasing columns are ignored)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith(CSV_COLUMNS.split(",")[0]):
        raise ConfigurationError("not a sweep CSV: missing header")
    records = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) < 11:
            raise ConfigurationError(f"short CSV row: {ln!r}")
        vals = [float(p) for p in parts[:11]]
        records.append(SweepRecord(
            kappa_s_over_kappa=vals[0], g_over_sum=vals[1],
            r_o=complex(vals[2], vals[3]), r_h=complex(vals[4], vals[5]),
            eta_closed_form=vals[6], eta_simulated=vals[7],
            herald_rate=vals[8], leakage_rate=vals[9],
            conditional_fidelity=vals[10],
        ))
    return records


# ---------------------------------------------------------------------------
# SVG heatmap

_VIRIDIS = (
    (0.0, (68, 1, 84)),
    (0.25, (59, 82, 139)),
    (0.5, (33, 145, 140)),
    (0.75, (94, 201, 98)),
    (1.0, (253, 231, 37)),
)

VALUE_COLUMNS = {
    "eta_closed": "eta_closed_form",
    "eta_sim": "eta_simulated",
    "herald_rate": "herald_rate",
    "leakage_rate": "leakage_rate",
    "cond_fidelity": "conditional_fidelity",
}

# heatmap geometry (pixels)
SVG_MARGIN_LEFT = 70
SVG_MARGIN_TOP = 30
SVG_MARGIN_RIGHT = 90
SVG_MARGIN_BOTTOM = 55
SVG_PLOT_SIZE = 480


def _color(t: float) -> str:
    t = min(max(t, 0.0), 1.0)
    for (t0, c0), (t1, c1) in zip(_VIRIDIS, _VIRIDIS[1:]):
        if t <= t1:
            f = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
            rgb = tuple(round(a + f * (b - a)) for a, b in zip(c0, c1))
            return "#{:02x}{:02x}{:02x}".format(*rgb)
    return "#ffffff"


def svg_cell_geometry(n_x: int, n_y: int) -> tuple[float, float]:
    """Cell width and height used by emit_svg_heatmap for an n_x x n_y grid."""
    return SVG_PLOT_SIZE / n_x, SVG_PLOT_SIZE / n_y


def emit_svg_heatmap(records: list[SweepRecord],
                     value_column: str = "eta_sim") -> str:
    """Self-contained SVG heatmap of one record column over the sweep grid.

    x axis: kappa_s/kappa (left to right), y axis: g/(kappa_s+kappa)
    (bottom to top). Cells are laid out on the unique sorted axis values.
    """
    if value_column not in VALUE_COLUMNS:
        raise ConfigurationError(
            f"unknown value column {value_column!r}; choose from {sorted(VALUE_COLUMNS)}")
    if not records:
        raise ConfigurationError("cannot plot an empty record list")
    attr = VALUE_COLUMNS[value_column]
    xs = sorted({r.kappa_s_over_kappa for r in records})
    ys = sorted({r.g_over_sum for r in records})
    x_index = {v: i for i, v in enumerate(xs)}
    y_index = {v: i for i, v in enumerate(ys)}
    values = {}
    for r in records:
        values[(x_index[r.kappa_s_over_kappa], y_index[r.g_over_sum])] = getattr(r, attr)
    finite = [v for v in values.values() if math.isfinite(v)]
    vmin = min(finite) if finite else 0.0
    vmax = max(finite) if finite else 1.0
    span = vmax - vmin
    cw, ch = svg_cell_geometry(len(xs), len(ys))
    width = SVG_MARGIN_LEFT + SVG_PLOT_SIZE + SVG_MARGIN_RIGHT
    height = SVG_MARGIN_TOP + SVG_PLOT_SIZE + SVG_MARGIN_BOTTOM
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        "<defs><linearGradient id=\"scale\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">",
    ]
    for t, _ in _VIRIDIS:
        out.append(f'<stop offset="{t}" stop-color="{_color(t)}"/>')
    out.append("</linearGradient></defs>")
    out.append(f'<rect width="{width}" height="{height}" fill="white"/>')
    for (ix, iy), v in sorted(values.items()):
        x = SVG_MARGIN_LEFT + ix * cw
        y = SVG_MARGIN_TOP + (len(ys) - 1 - iy) * ch
        if math.isfinite(v):
            fill = _color(0.5 if span == 0 else (v - vmin) / span)
        else:
            fill = "#888888"
        out.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{cw:.2f}" '
                   f'height="{ch:.2f}" fill="{fill}"/>')
    # axes and legend
    x0, y0 = SVG_MARGIN_LEFT, SVG_MARGIN_TOP + SVG_PLOT_SIZE
    out.append(f'<text x="{x0 + SVG_PLOT_SIZE / 2:.0f}" y="{y0 + 40}" '
               'text-anchor="middle" font-size="14">kappa_s / kappa</text>')
    out.append(f'<text x="18" y="{SVG_MARGIN_TOP + SVG_PLOT_SIZE / 2:.0f}" '
               'text-anchor="middle" font-size="14" '
               f'transform="rotate(-90 18 {SVG_MARGIN_TOP + SVG_PLOT_SIZE / 2:.0f})">'
               'g / (kappa_s + kappa)</text>')
    for v, anchor, pos in ((xs[0], "start", x0), (xs[-1], "end", x0 + SVG_PLOT_SIZE)):
        out.append(f'<text x="{pos}" y="{y0 + 18}" text-anchor="{anchor}" '
                   f'font-size="12">{v:g}</text>')
    for v, ypix in ((ys[0], y0), (ys[-1], SVG_MARGIN_TOP + ch)):
        out.append(f'<text x="{x0 - 6}" y="{ypix:.0f}" text-anchor="end" '
                   f'font-size="12">{v:g}</text>')
    lx = SVG_MARGIN_LEFT + SVG_PLOT_SIZE + 25
    out.append(f'<rect x="{lx}" y="{SVG_MARGIN_TOP}" width="18" '
               f'height="{SVG_PLOT_SIZE}" fill="url(#scale)"/>')
    out.append(f'<text x="{lx + 24}" y="{SVG_MARGIN_TOP + 12}" '
               f'font-size="12">{vmax:.4g}</text>')
    out.append(f'<text x="{lx + 24}" y="{y0}" font-size="12">{vmin:.4g}</text>')
    out.append(f'<text x="{lx}" y="{SVG_MARGIN_TOP - 10}" '
               f'font-size="13">{value_column}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
