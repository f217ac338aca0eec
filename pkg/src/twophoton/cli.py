"""Command line: energy scans, golden corpus checks and plot scripts.

Exit codes: 0 success, 1 validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DomainError,
    ModelError,
    ParseError,
    PoleError,
    ResonanceError,
    TwoPhotonError,
    ValidationError,
)
from .models import (
    AbstractTwoBody,
    ConstantBox,
    CoupledHarmonicPair,
    Coulomb,
    Hamiltonian,
    Harmonic,
    HarmonicCoupling,
    Morse,
    SymmetricLinear,
)
from .numerics import (
    Grid1D,
    HarmonicBasisState,
    ProductState,
    default_grid,
    solve_axis,
)
from .opalg import equal, parse_expr
from .oracle import SeparableSpectrum, oracle_amplitude
from .scattering import ScatteringGeometry, SeriesAmplitude, polarization_vectors
from .series import scattering_operator

VERSION = "0.1.0"
METHODS = ("series", "closed-form", "oracle", "all")
VARIANTS = ("box", "linear", "harmonic", "morse", "coupled_harmonic_pair")
HARMONIC_FAMILY = ("harmonic", "coupled_harmonic_pair")
ECHO = "#| "


# ---------------------------------------------------------------------------
# configuration


def _get(cp: configparser.ConfigParser, section: str, key: str, default=None, required=False) -> Optional[str]:
    if cp.has_option(section, key):
        return cp.get(section, key).strip()
    if required:
        raise ValidationError(f"[{section}] {key}: missing required field")
    return default


def _rational(section: str, key: str, text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"[{section}] {key}: expected a number, got {text!r}") from None


def _float(section: str, key: str, text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        try:
            return float(text)
        except ValueError:
            raise ValidationError(f"[{section}] {key}: expected a number, got {text!r}") from None


def _state(section: str, key: str, text: str) -> tuple[int, int, int]:
    try:
        parts = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise ValidationError(f"[{section}] {key}: expected comma-separated integers, got {text!r}") from None
    if len(parts) == 1:
        parts = (parts[0], 0, 0)
    if len(parts) != 3 or any(v < 0 for v in parts):
        raise ValidationError(f"[{section}] {key}: expected three nonnegative quantum numbers")
    return parts


@dataclass
class ScanConfig:
    text: str
    variant: str
    potential: object
    masses: tuple
    bindings: dict
    geometry: ScatteringGeometry
    initial: tuple
    finals: list
    elastic: bool
    energies: np.ndarray
    method: str
    order: int
    grid_bounds: Optional[tuple[float, float]]
    grid_points: int
    stencil: int
    guard: float
    damping: float
    output: Optional[str]
    plot_script: bool
    r_e: float = 1.0
    step: float = 0.0
    workers: int = 1


def _build_potential(cp) -> tuple[str, object, dict]:
    s = "potential"
    variant = _get(cp, s, "variant", required=True)
    if variant not in VARIANTS:
        raise ValidationError(f"[potential] variant: must be one of {', '.join(VARIANTS)}; got {variant!r}")
    num = lambda k, d=None: _rational(s, k, _get(cp, s, k, d, required=d is None))
    try:
        if variant == "box":
            a = _get(cp, s, "a", required=True)
            sizes = tuple(_rational(s, "a", v) for v in a.split(",")) if "," in a else _rational(s, "a", a)
            pot = ConstantBox(sizes, num("V0", "0"))
        elif variant == "linear":
            pot = SymmetricLinear(num("b_x"), num("b_y", "1"), num("b_z", "1"))
        elif variant == "harmonic":
            r0 = _get(cp, s, "r0", "0")
            r0v = tuple(_rational(s, "r0", v) for v in r0.split(",")) if "," in r0 else _rational(s, "r0", r0)
            pot = Harmonic(num("omega"), r0v)
        elif variant == "morse":
            pot = Morse(num("V0"), num("a"), num("x0", "0"), _get(cp, s, "transverse", "unspecified"))
        else:
            kind = _get(cp, s, "coupling", "abstract")
            if kind == "abstract":
                coupling = AbstractTwoBody(_get(cp, s, "coupling_name", "V"))
            elif kind == "harmonic":
                coupling = HarmonicCoupling(num("kappa"))
            elif kind == "coulomb":
                coupling = Coulomb(num("alpha"))
            else:
                raise ValidationError(f"[potential] coupling: must be abstract, harmonic or coulomb; got {kind!r}")
            pot = CoupledHarmonicPair(num("omega"), coupling)
    except ModelError as exc:
        raise ValidationError(f"[potential] {exc}") from None
    return variant, pot, {}


def load_config(text: str) -> ScanConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ValidationError(f"config syntax: {exc}") from None
    variant, pot, _ = _build_potential(cp)

    n_particles = int(_float("particles", "n", _get(cp, "particles", "n", str(pot.n_particles))))
    if n_particles != pot.n_particles:
        raise ValidationError(f"[particles] n: {variant} describes {pot.n_particles} particle(s), got {n_particles}")
    masses_text = _get(cp, "particles", "masses", "1")
    masses = tuple(_rational("particles", "masses", v) for v in masses_text.split(","))
    if len(masses) == 1:
        masses = masses * n_particles
    if len(masses) != n_particles or any(m <= 0 for m in masses):
        raise ValidationError("[particles] masses: need one positive mass per particle")

    bindings = {"m": masses[0]}
    for key in ("hbar", "c"):
        bindings[key] = _rational("units", key, _get(cp, "units", key, "1"))
    r_e = _float("units", "r_e", _get(cp, "units", "r_e", "1"))

    g = "geometry"
    try:
        geometry = ScatteringGeometry(
            _float(g, "theta", _get(cp, g, "theta", "0")),
            _float(g, "chi1", _get(cp, g, "chi1", "0")),
            _float(g, "chi2", _get(cp, g, "chi2", "0")),
        )
    except DomainError as exc:
        raise ValidationError(f"[geometry] theta: {exc}") from None

    initial = _state("states", "initial", _get(cp, "states", "initial", "0,0,0"))
    final_text = _get(cp, "states", "final", "elastic")
    elastic = final_text == "elastic"
    finals = [initial] if elastic else [_state("states", "final", t) for t in final_text.split(";") if t.strip()]
    if not finals:
        raise ValidationError("[states] final: empty final-state list")
    if variant == "box" and (min(initial) < 1 or any(min(f) < 1 for f in finals)):
        raise ValidationError("[states] box quantum numbers start at 1")

    e = "energies"
    e_min = _float(e, "e_min", _get(cp, e, "e_min", required=True))
    e_max = _float(e, "e_max", _get(cp, e, "e_max", required=True))
    points = int(_float(e, "points", _get(cp, e, "points", "100")))
    spacing = _get(cp, e, "spacing", "linear")
    if e_min <= 0:
        raise ValidationError("[energies] e_min: must be positive")
    if e_max <= e_min:
        raise ValidationError("[energies] e_max: must exceed e_min")
    if points < 2:
        raise ValidationError("[energies] points: need at least 2")
    if spacing == "linear":
        energies = np.linspace(e_min, e_max, points)
    elif spacing == "log":
        energies = np.geomspace(e_min, e_max, points)
    else:
        raise ValidationError(f"[energies] spacing: must be linear or log; got {spacing!r}")
    step = float(np.min(np.diff(energies)))

    method = _get(cp, "method", "method", "series")
    if method not in METHODS:
        raise ValidationError(f"[method] method: must be one of {', '.join(METHODS)}; got {method!r}")
    if method == "closed-form" and variant not in HARMONIC_FAMILY:
        raise ValidationError("[method] method: closed-form is only valid for harmonic-family potentials")
    order = int(_float("method", "order", _get(cp, "method", "order", "1")))
    if order < 1:
        raise ValidationError("[method] order: must be at least 1")
    if variant == "coupled_harmonic_pair" and method in ("oracle", "all"):
        raise ValidationError("[method] method: the grid oracle covers one-particle separable potentials only")

    nm = "numerics"
    bounds = None
    if cp.has_option(nm, "x_min") or cp.has_option(nm, "x_max"):
        bounds = (
            _float(nm, "x_min", _get(cp, nm, "x_min", required=True)),
            _float(nm, "x_max", _get(cp, nm, "x_max", required=True)),
        )
    grid_points = int(_float(nm, "points", _get(cp, nm, "points", "4096")))
    stencil = int(_float(nm, "stencil", _get(cp, nm, "stencil", "4")))
    guard = _float(nm, "guard", _get(cp, nm, "guard", "1e-6"))
    damping = _float(nm, "damping", _get(cp, nm, "damping", "0"))
    workers = int(_float(nm, "workers", _get(cp, nm, "workers", "1")))
    if workers < 1:
        raise ValidationError("[numerics] workers: must be at least 1")
    if damping < 0:
        raise ValidationError("[numerics] damping: must be nonnegative")

    output = _get(cp, "output", "path")
    plot_script = (_get(cp, "output", "plot_script", "false") or "false").lower() in ("1", "true", "yes")

    if variant == "morse":
        e1, e2 = polarization_vectors(geometry)
        if abs(e1[1]) > 1e-14 or abs(e1[2]) > 1e-14 or abs(e2[1]) > 1e-14 or abs(e2[2]) > 1e-14:
            raise ValidationError("[geometry] the Morse model only supports x polarizations (chi1 = chi2 = 0, theta = 0 or pi)")
    return ScanConfig(
        text, variant, pot, masses, bindings, geometry, initial, finals, elastic, energies, method, order,
        bounds, grid_points, stencil, guard, damping, output, plot_script, r_e, step, workers,
    )


# ---------------------------------------------------------------------------
# scan


def _poles(cfg: ScanConfig, E_res: float, lam: Optional[float]) -> list[tuple[float, str]]:
    poles = []
    if E_res > 0:
        poles.append((E_res, "pole:E2=0"))
    if lam is not None:
        w = math.sqrt(lam)
        poles.append((w, "pole:E1=resonance"))
        poles.append((E_res + w, "pole:E2=resonance"))
    return poles


class _Scenario:
    """Everything needed to evaluate one final state across the energy grid."""

    def __init__(self, cfg: ScanConfig, final: tuple, spectra):
        self.cfg = cfg
        self.final = final
        h = Hamiltonian(cfg.potential, cfg.masses)
        b = cfg.bindings
        self.series = None
        self.closed = None
        self.oracle = None
        self.lam = None
        if cfg.variant in HARMONIC_FAMILY:
            omega = float(cfg.potential.omega)
            mass = float(cfg.masses[0]) * cfg.potential.n_particles
            hbar = float(b["hbar"])
            to_state = lambda n: ProductState.harmonic(HarmonicBasisState(n, omega, mass, hbar))
            si, sf = to_state(cfg.initial), to_state(final)
            bind = dict(b, omega=cfg.potential.omega)
            self.lam = (hbar * omega) ** 2
            if cfg.method in ("series", "all"):
                self.series = SeriesAmplitude(h, si, sf, cfg.geometry, cfg.order, False, bind, damping=cfg.damping)
            if cfg.method in ("closed-form", "all"):
                self.closed = SeriesAmplitude(h, si, sf, cfg.geometry, 1, True, bind, damping=cfg.damping)
            self.E_res = sf.energy - si.energy
        else:
            spec = spectra
            si, sf = spec.product_state(self._indices(cfg.initial)), spec.product_state(self._indices(final))
            self.E_res = sf.energy - si.energy
            if cfg.method in ("series", "all"):
                self.series = SeriesAmplitude(h, si, sf, cfg.geometry, cfg.order, False, b, damping=cfg.damping)
            if cfg.method in ("oracle", "all"):
                self.oracle = spec
        self.main = self.closed or self.series

    def _indices(self, n: tuple) -> tuple:
        # box labels start at 1; grid indices start at 0
        off = 1 if self.cfg.variant == "box" else 0
        return tuple(None if k is None else k - off for k in self.cfg_axes(n))

    def cfg_axes(self, n):
        if self.cfg.variant == "morse":
            return (n[0], None, None)
        return n

    def evaluate(self, E1: float) -> dict:
        out: dict = {"flags": [], "open": True}
        E2 = E1 - self.E_res
        out["E2"] = E2
        for E, tag in _poles(self.cfg, self.E_res, self.lam):
            if abs(E1 - E) <= self.cfg.step / 2:
                out["flags"].append(tag)
        if E2 < 0:
            out["open"] = False
            return out
        if E2 == 0:
            return out
        try:
            if self.main is not None:
                bd = self.main.breakdown(E1)
                out["M"] = bd.total
            if self.series is not None:
                out["partials"] = self.series.breakdown(E1).partials
        except (PoleError, ZeroDivisionError):
            out["flags"].append("pole")
        if self.oracle is not None:
            cfg = self.cfg
            try:
                _, _, M = oracle_amplitude(
                    self._indices(self.final), self._indices(cfg.initial), self.oracle, cfg.geometry, E1,
                    float(cfg.masses[0]), 1, "sum", None, cfg.guard,
                )
                out["oracle"] = M
                if self.main is None:
                    out["M"] = M
            except ResonanceError as exc:
                out["flags"].append(f"resonance:{exc.state}")
        return out


def _spectra(cfg: ScanConfig) -> Optional[SeparableSpectrum]:
    if cfg.variant in HARMONIC_FAMILY:
        return None
    e1, e2 = polarization_vectors(cfg.geometry)
    axes = (0,) if cfg.variant == "morse" else (0, 1, 2)
    states = [cfg.initial] + cfg.finals
    off = 1 if cfg.variant == "box" else 0
    bases = {}
    for a in axes:
        polarized = abs(e1[a]) > 1e-14 or abs(e2[a]) > 1e-14
        full = polarized and cfg.method in ("oracle", "all")
        count = None if full else max(s[a] for s in states) - off + 1
        if cfg.grid_bounds is not None:
            grid = Grid1D(cfg.grid_bounds[0], cfg.grid_bounds[1], cfg.grid_points, cfg.stencil)
        else:
            grid = default_grid(cfg.potential, a, cfg.grid_points, cfg.bindings, cfg.masses[0], cfg.stencil)
        bases[a] = solve_axis(cfg.potential, grid, count, axis=a, mass=cfg.masses[0], bindings=cfg.bindings)
    return SeparableSpectrum(bases)


def _fmt(v: float) -> str:
    return "nan" if v is None or (isinstance(v, float) and math.isnan(v)) else repr(float(v))


def run_scan(cfg: ScanConfig) -> str:
    """Evaluate the configured scan and return the CSV text."""
    spectra = _spectra(cfg)
    scenarios = [_Scenario(cfg, f, spectra) for f in cfg.finals]
    want_orders = cfg.method in ("series", "all")
    want_oracle = cfg.method == "all"
    n_orders = cfg.order + 1 if want_orders else 0

    buf = io.StringIO()
    buf.write(f"# twophoton scan {VERSION}\n")
    buf.write(f"# method: {cfg.method}\n")
    buf.write(f"# final_states: {'elastic' if cfg.elastic else ';'.join(','.join(map(str, f)) for f in cfg.finals)}\n")
    buf.write(f"# damping: {cfg.damping!r} (pole softening, not part of the zero-width theory)\n")
    buf.write("# config-begin\n")
    for line in cfg.text.splitlines():
        buf.write(ECHO + line + "\n")
    buf.write("# config-end\n")
    cols = ["E1", "E2", "re_M", "im_M", "abs2_M"]
    cols += [f"abs2_M_{n}" for n in range(n_orders)]
    if want_oracle:
        cols += ["oracle_re_M", "oracle_im_M", "oracle_abs2_M"]
    cols.append("flag")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    single = len(scenarios) == 1
    energies = [float(E) for E in cfg.energies]
    evaluate = lambda E: [s.evaluate(E) for s in scenarios]
    if cfg.workers > 1:
        # map preserves input order, so the output does not depend on scheduling
        with ThreadPoolExecutor(cfg.workers) as pool:
            all_results = list(pool.map(evaluate, energies))
    else:
        all_results = [evaluate(E) for E in energies]
    for E1, results in zip(energies, all_results):
        flags = sorted({f for r in results for f in r["flags"]})
        # closed channels (E2 < 0) do not scatter
        results = [r for r in results if r["open"]] or results
        if not any(r["open"] for r in results):
            flags.append("closed-channel")
        Ms = [r.get("M") for r in results]
        row = [_fmt(E1), _fmt(results[0]["E2"]) if single else "nan"]
        if any(M is None for M in Ms):
            row += ["nan", "nan", "nan"]
        else:
            abs2 = sum(abs(M) ** 2 for M in Ms)
            row += [_fmt(Ms[0].real), _fmt(Ms[0].imag)] if single else ["nan", "nan"]
            row.append(_fmt(abs2))
        for n in range(n_orders):
            parts = [r.get("partials") for r in results]
            row.append("nan" if any(p is None for p in parts) else _fmt(sum(abs(p[n]) ** 2 for p in parts)))
        if want_oracle:
            orc = [r.get("oracle") for r in results]
            if any(o is None for o in orc):
                row += ["nan", "nan", "nan"]
            else:
                row += [_fmt(orc[0].real), _fmt(orc[0].imag)] if single else ["nan", "nan"]
                row.append(_fmt(sum(abs(o) ** 2 for o in orc)))
        row.append(";".join(flags))
        w.writerow(row)
    return buf.getvalue()


def extract_config(csv_text: str) -> str:
    """Recover the verbatim config echoed in a dataset header."""
    lines = []
    for line in csv_text.splitlines():
        if line.startswith(ECHO.rstrip()):
            lines.append(line[len(ECHO):] if line.startswith(ECHO) else "")
    return "\n".join(lines) + "\n"


def read_dataset(path: str) -> tuple[dict, list[str], list[list[str]]]:
    text = Path(path).read_text()
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            m = re.match(r"#\s*(\w+):\s*(.*)", line)
            if m:
                meta[m.group(1)] = m.group(2)
        elif line.strip():
            body.append(line)
    if not body:
        raise ValidationError(f"{path}: no CSV header")
    rows = list(csv.reader(body))
    return meta, rows[0], rows[1:]


# ---------------------------------------------------------------------------
# golden corpus


def _corpus_text(corpus: str) -> tuple[str, str]:
    p = Path(corpus)
    if p.suffix == ".txt" or p.exists():
        if not p.exists():
            raise ValidationError(f"corpus file {corpus!r} not found")
        return p.stem, p.read_text()
    try:
        return corpus, resources.files("twophoton").joinpath("corpus", f"{corpus}.txt").read_text()
    except FileNotFoundError:
        raise ValidationError(f"unknown corpus {corpus!r}") from None


def parse_corpus(text: str) -> tuple[dict, dict[int, str]]:
    header: dict[str, str] = {}
    sections: dict[int, list[str]] = {}
    current = None
    for line in text.splitlines():
        m = re.match(r"#\s*(\w+):\s*(.*)$", line)
        if m and current is None:
            header[m.group(1)] = m.group(2).strip()
            continue
        m = re.match(r"\[O(\d+)\]\s*$", line.strip())
        if m:
            current = int(m.group(1))
            sections[current] = []
        elif current is not None:
            sections[current].append(line)
    return header, {k: "\n".join(v) for k, v in sections.items()}


def run_golden(corpus: str) -> list[tuple[int, bool]]:
    """Compare engine O_k against a stored corpus; one (order, passed) per section."""
    name, text = _corpus_text(corpus)
    header, sections = parse_corpus(text)
    if not sections:
        raise ValidationError(f"corpus {name!r} has no [O<k>] sections")
    variant = header.get("potential")
    units = {k: Fraction(header[k]) for k in ("m", "hbar", "c") if k in header}
    if variant == "morse":
        pot = Morse(Fraction(header["V0"]), Fraction(header["a"]), Fraction(header.get("x0", "0")))
    elif variant == "box":
        pot = ConstantBox(Fraction(header.get("a", "1")), Fraction(header.get("V0", "0")))
    elif variant == "linear":
        pot = SymmetricLinear(Fraction(header["b_x"]), Fraction(header.get("b_y", "1")), Fraction(header.get("b_z", "1")))
    elif variant == "harmonic":
        pot = Harmonic(Fraction(header["omega"]))
    else:
        raise ValidationError(f"corpus {name!r}: unsupported potential {variant!r}")
    h = Hamiltonian(pot, (units.get("m", "m"),))
    axis = header.get("axis", "x")
    results = []
    for k in sorted(sections):
        try:
            stored = parse_expr(sections[k]).subs(units)
        except ParseError as exc:
            raise ValidationError(f"corpus {name!r} [O{k}]: {exc}") from None
        engine = scattering_operator(h, axis, k).subs(units)
        results.append((k, equal(engine, stored)))
    return results


# ---------------------------------------------------------------------------
# plotting


def _curve_label(column: str) -> str:
    if column == "abs2_M":
        return "|M|^2"
    if column == "oracle_abs2_M":
        return "oracle |M|^2"
    return f"|M^({column.rsplit('_', 1)[1]})|^2"


def emit_plot_script(dataset: str, out: Optional[str] = None) -> str:
    """Write a self-contained matplotlib script drawing |M|^2 and per-order overlays."""
    meta, cols, rows = read_dataset(dataset)
    if not rows:
        raise ValidationError(f"{dataset}: dataset has no rows")
    idx = {c: i for i, c in enumerate(cols)}
    num = lambda r, c: float(r[idx[c]]) if r[idx[c]] not in ("", "nan") else None
    E = [float(r[idx["E1"]]) for r in rows]
    curves = {"abs2_M": [num(r, "abs2_M") for r in rows]}
    for c in cols:
        if c.startswith("abs2_M_") or c == "oracle_abs2_M":
            curves[c] = [num(r, c) for r in rows]
    poles = [E[i] for i, r in enumerate(rows) if r[idx["flag"]]]
    labels = {c: _curve_label(c) for c in curves}
    vals = [v for ys in curves.values() for v in ys if v is not None and v > 0]
    log = bool(vals) and max(vals) / min(vals) > 100
    payload = json.dumps({"E1": E, "curves": curves, "labels": labels, "flagged": poles}, indent=None)
    script = f'''"""Plot generated from {Path(dataset).name} (method: {meta.get("method", "?")})."""
import json

import matplotlib.pyplot as plt

DATA = json.loads({payload!r})

fig, ax = plt.subplots(figsize=(7, 4.5))
for name, ys in DATA["curves"].items():
    pts = [(x, y) for x, y in zip(DATA["E1"], ys) if y is not None]
    if not pts:
        continue
    xs, vals = zip(*pts)
    style = dict(lw=2.0, color="k") if name == "abs2_M" else dict(lw=1.0, ls="--")
    ax.plot(xs, vals, label=DATA["labels"][name], **style)
for x in DATA["flagged"]:
    ax.axvline(x, color="r", lw=0.6, alpha=0.5)
ax.set_xlabel("E1")
ax.set_ylabel("|M|^2")
ax.set_yscale("{'log' if log else 'linear'}")
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig(__file__.rsplit(".", 1)[0] + ".png", dpi=150)
'''
    target = Path(out) if out else Path(dataset).with_suffix(".plot.py")
    target.write_text(script)
    return str(target)


# ---------------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twophoton", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("scan", help="run an energy scan from a config file")
    s.add_argument("config")
    s.add_argument("-o", "--output", help="CSV path (overrides [output] path; '-' for stdout)")
    g = sub.add_parser("golden", help="check O_1..O_n against a stored corpus")
    g.add_argument("corpus", help="corpus id (morse_reference, constant_box) or file path")
    pl = sub.add_parser("plot", help="emit a plotting script for a dataset")
    pl.add_argument("dataset")
    pl.add_argument("-o", "--output")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "scan":
            try:
                text = Path(args.config).read_text()
            except OSError as exc:
                raise ValidationError(f"cannot read config: {exc}") from None
            cfg = load_config(text)
            data = run_scan(cfg)
            target = args.output or cfg.output or "-"
            if target == "-":
                sys.stdout.write(data)
            else:
                Path(target).write_text(data)
                print(f"wrote {target} ({len(cfg.energies)} rows)", file=sys.stderr)
                if cfg.plot_script:
                    print(f"wrote {emit_plot_script(target)}", file=sys.stderr)
            return 0
        if args.command == "golden":
            results = run_golden(args.corpus)
            for k, ok in results:
                print(f"O{k}: {'PASS' if ok else 'FAIL'}")
            passed = sum(ok for _, ok in results)
            print(f"{passed}/{len(results)} orders match")
            return 0 if passed == len(results) else 2
        if args.command == "plot":
            print(emit_plot_script(args.dataset, args.output))
            return 0
    except (ValidationError, ParseError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1
    except (TwoPhotonError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    return 1


if __name__ == "__main__":
    sys.exit(main())
