"""Command-line front end: typed configs, experiment dispatch, CSV and gnuplot output.

Every subcommand accepts ``--config file.json`` (an object with an optional
``"parameters"`` map, or a flat map of parameters), ``--out``, ``--seed``
and ``--emit-plot``. Command-line flags override file values.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from . import experiments as ex
from . import region as rg
from . import surface as su
from .grid import INF, Field, make_grid
from .schatten import SpectrumError

EXIT_OK, EXIT_CONFIG, EXIT_FLAGGED, EXIT_NUMERIC = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# parameter types
# ---------------------------------------------------------------------------


def _real(key, v):
    if isinstance(v, bool):
        raise ConfigError(f"parameter '{key}': expected a number, got {v!r}")
    if isinstance(v, str):
        s = v.strip().lower()
        if s in ("inf", "infinity"):
            return INF
        try:
            v = float(Fraction(s)) if "/" in s else float(s)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"parameter '{key}': expected a number, got {v!r}") from None
    if not isinstance(v, (int, float)):
        raise ConfigError(f"parameter '{key}': expected a number, got {v!r}")
    v = float(v)
    if math.isnan(v):
        raise ConfigError(f"parameter '{key}': NaN is not allowed")
    return v


def _integer(key, v):
    x = _real(key, v)
    if not math.isfinite(x) or x != int(x):
        raise ConfigError(f"parameter '{key}': expected an integer, got {v!r}")
    return int(x)


def _listof(conv):
    def parse(key, v):
        if isinstance(v, str):
            v = [s for s in v.split(",") if s.strip()]
        if not isinstance(v, (list, tuple)) or not v:
            raise ConfigError(f"parameter '{key}': expected a non-empty list, got {v!r}")
        return [conv(key, x) for x in v]

    return parse


def _choice(*options):
    def parse(key, v):
        if v not in options:
            raise ConfigError(f"parameter '{key}': expected one of {options}, got {v!r}")
        return v

    return parse


def _flag(key, v):
    if isinstance(v, bool):
        return v
    if isinstance(v, str) and v.lower() in ("true", "false", "1", "0"):
        return v.lower() in ("true", "1")
    raise ConfigError(f"parameter '{key}': expected a boolean, got {v!r}")


@dataclass(frozen=True)
class Param:
    kind: object
    default: object = None
    positive: bool = False
    help: str = ""

    def convert(self, key, v):
        out = self.kind(key, v)
        if self.positive:
            vals = out if isinstance(out, list) else [out]
            for x in vals:
                if not x > 0:
                    raise ConfigError(f"parameter '{key}': must be positive, got {x!r}")
        return out


REAL, INT, REALS, INTS = _real, _integer, _listof(_real), _listof(_integer)

SCHEMAS: dict[str, dict[str, Param]] = {
    "decay": {
        "surface": Param(_choice("circle", "sphere", "flat"), "circle"),
        "K": Param(INT, 1024, True, "number of surface nodes"),
        "r_min": Param(REAL, 10.0, True),
        "r_max": Param(REAL, 100.0, True),
        "r_count": Param(INT, 12, True),
        "directions": Param(INT, 8, True),
    },
    "schatten-scan": {
        "K": Param(INT, 32, True),
        "radius": Param(REAL, 3.0, True, "circle radius"),
        "n": Param(INT, 32, True, "grid points per axis"),
        "L": Param(REAL, 8.0, True, "box half-width"),
        "width": Param(REAL, 2.0, True, "Gaussian weight width"),
        "alphas": Param(REALS, [1.0, 1.5, 2.0, 3.0], True),
    },
    "semiclassical": {
        "K": Param(INT, 2048, True),
        "h_list": Param(REALS, [1 / 8, 1 / 16, 1 / 32, 1 / 64, 1 / 128], True),
        "p": Param(REAL, 1.2, True),
    },
    "noncompact": {
        "n": Param(INT, 128, True),
        "L": Param(REAL, 16.0, True),
        "tau": Param(REAL, 0.5, True),
        "n_max": Param(INT, 8, True),
        "slices": Param(INT, 1024, True),
        "width": Param(REAL, 1.0, True),
    },
    "translate-scaling": {
        "n": Param(INT, 256, True),
        "L": Param(REAL, 128.0, True),
        "dt": Param(REAL, 0.125, True),
        "T_schedule": Param(REALS, [2.0, 4.0, 8.0, 16.0, 32.0], True),
        "N_list": Param(INTS, [1, 2, 4], True),
        "q": Param(REAL, 2.0, True),
    },
    "decoupling": {
        "n": Param(INT, 256, True),
        "L": Param(REAL, 128.0, True),
        "dt": Param(REAL, 0.125, True),
        "t_list": Param(REALS, [0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]),
    },
    "orthonormal": {
        "K": Param(INT, 2048, True),
        "M_list": Param(INTS, [1, 2, 4, 8, 16, 32, 64], True),
        "p": Param(REAL, 1.2, True),
        "radius": Param(REAL, 1000.0, True),
        "dr": Param(REAL, 0.25, True),
    },
    "refined": {
        "n": Param(INT, 128, True),
        "L": Param(REAL, 16.0, True),
        "count": Param(INT, 200, True),
        "band": Param(REAL, 8.0, True),
        "dt": Param(REAL, 1 / 128, True),
        "window": Param(REAL, 1.0, True),
        "p": Param(REAL, 6.0, True),
        "q": Param(REAL, 6.0, True),
    },
    "region": {
        "d": Param(INT, None, True, "spatial dimension"),
        "q": Param(REAL, None, True),
        "alpha": Param(REAL, None, True),
        "q_list": Param(REALS, None, True),
        "alpha_list": Param(REALS, None, True),
        "boundary": Param(_flag, False, help="also write the region polygon next to the CSV"),
    },
}

REQUIRED = {"region": ("d",)}


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------


@dataclass
class RunConfig:
    experiment: str
    parameters: dict = field(default_factory=dict)
    output_path: str | None = None
    emit_plot: bool = False
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "parameters": {k: _jsonable(v) for k, v in sorted(self.parameters.items())},
            "output_path": self.output_path,
            "emit_plot": self.emit_plot,
            "seed": self.seed,
        }


def _jsonable(v):
    if isinstance(v, list):
        return [_jsonable(x) for x in v]
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    return v


def emit_config(cfg: RunConfig) -> str:
    return json.dumps(cfg.to_dict(), sort_keys=True)


def config_from_dict(data: dict, experiment: str | None = None) -> RunConfig:
    """Validate a (possibly partial) config mapping; unknown keys are errors."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    data = dict(data)
    exp = data.pop("experiment", None) or experiment
    if experiment is not None and exp != experiment:
        raise ConfigError(f"config file is for experiment '{exp}', not '{experiment}'")
    if exp not in SCHEMAS:
        raise ConfigError(f"unknown experiment {exp!r}; choose from {sorted(SCHEMAS)}")
    schema = SCHEMAS[exp]
    params = data.pop("parameters", {})
    if not isinstance(params, dict):
        raise ConfigError("'parameters' must be an object")
    out = data.pop("output_path", None)
    plot = _flag("emit_plot", data.pop("emit_plot", False))
    seed = _seed(data.pop("seed", 0))
    for k, v in data.items():  # flat layout: parameters at top level
        if k not in schema:
            raise ConfigError(f"unknown key '{k}' for experiment '{exp}'")
        params[k] = v
    values = {}
    for k, v in params.items():
        if k not in schema:
            raise ConfigError(f"unknown key '{k}' for experiment '{exp}'")
        if v is not None:
            values[k] = schema[k].convert(k, v)
    return RunConfig(exp, values, out, plot, seed)


def _seed(v):
    # seeds are parsed exactly; going through float would lose bits above 2^53
    if isinstance(v, str) and v.strip().lstrip("+-").isdigit():
        s = int(v)
    elif isinstance(v, int) and not isinstance(v, bool):
        s = v
    else:
        s = _integer("seed", v)
    if not 0 <= s < 2**64:
        raise ConfigError(f"parameter 'seed': must be an unsigned 64-bit integer, got {v!r}")
    return s


def _resolved(cfg: RunConfig) -> dict:
    schema = SCHEMAS[cfg.experiment]
    vals = {k: p.default for k, p in schema.items()}
    vals.update(cfg.parameters)
    for k in REQUIRED.get(cfg.experiment, ()):
        if vals.get(k) is None:
            raise ConfigError(f"missing required key '{k}' for experiment '{cfg.experiment}'")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="schatten-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name, schema in SCHEMAS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--out", help="CSV output path (default: stdout)")
        sp.add_argument("--seed", help="unsigned 64-bit seed")
        sp.add_argument("--emit-plot", action="store_true", default=None, help="write a sibling .gp script")
        for key, p in schema.items():
            sp.add_argument(f"--{key}", dest=f"param_{key}", metavar=key.upper(), help=p.help or None)
    return parser


def parse_config(argv) -> RunConfig:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        raise ConfigError(f"invalid command line (argparse exit {exc.code})") from None
    data = {}
    if ns.config:
        try:
            data = json.loads(Path(ns.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {ns.config}: {exc}") from None
    cfg = config_from_dict(data, ns.experiment)
    schema = SCHEMAS[ns.experiment]
    for key, p in schema.items():
        v = getattr(ns, f"param_{key}")
        if v is not None:
            cfg.parameters[key] = p.convert(key, v)
    if ns.out is not None:
        cfg.output_path = ns.out
    if ns.seed is not None:
        cfg.seed = _seed(ns.seed)
    if ns.emit_plot:
        cfg.emit_plot = True
    return cfg


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def _circle(K, radius=1.0):
    q = su.circle_quadrature(K)
    if radius == 1.0:
        return q
    return su.SurfaceQuadrature(2, q.nodes * radius, q.weights * radius, q.kind, True, q.node_spacing * radius)


def run_experiment(cfg: RunConfig) -> ex.ExperimentReport:
    v = _resolved(cfg)
    name = cfg.experiment
    if name == "decay":
        if v["surface"] == "circle":
            quad, dirs = su.circle_quadrature(v["K"]), None
        elif v["surface"] == "sphere":
            quad, dirs = su.sphere_quadrature(v["K"]), None
        else:
            quad = su.flat_segment_quadrature(v["K"], 1.0)
            dirs = np.array([[1.0, 0.0]])
        radii = np.geomspace(v["r_min"], v["r_max"], v["r_count"])
        if dirs is None:
            dirs = su.default_directions(quad.ambient_dim, v["directions"])
        return ex.decay_report(quad, radii, dirs)
    if name == "schatten-scan":
        return ex.schatten_scan(_circle(v["K"], v["radius"]), make_grid(2, v["n"], v["L"]), v["alphas"],
                                v["width"], cfg.seed)
    if name == "semiclassical":
        return ex.semiclassical_scan(su.circle_quadrature(v["K"]), v["h_list"], v["p"])
    if name == "noncompact":
        g = make_grid(1, v["n"], v["L"])
        W = Field.from_function(g, lambda x: np.exp(-(x**2) / (2 * v["width"] ** 2)))
        phi = Field.from_function(g, lambda x: np.exp(-(x**2) / 2))
        phi = phi * (1 / phi.norm())
        return ex.noncompactness_probe(W, phi, range(v["n_max"] + 1), v["tau"], v["slices"])
    if name in ("translate-scaling", "decoupling"):
        g = make_grid(1, v["n"], v["L"])
        exp = ex.TranslationExperiment(ex.default_bump(g, v["dt"]))
        if name == "decoupling":
            return ex.decoupling_decay(exp, v["t_list"])
        return ex.translation_scaling(exp, v["T_schedule"], v["N_list"], v["q"])
    if name == "orthonormal":
        return ex.orthonormal_ratio(su.circle_quadrature(v["K"]), v["M_list"], v["p"], radius=v["radius"], dr=v["dr"])
    if name == "refined":
        return ex.refined_family(make_grid(1, v["n"], v["L"]), v["count"], cfg.seed, v["p"], v["q"], v["band"],
                                 v["window"], v["dt"])
    if name == "region":
        return region_report(v)
    raise ConfigError(f"unknown experiment {name!r}")


def _exact_or_inf(x):
    return INF if x == INF else Fraction(x).limit_denominator(10**6)


def region_report(v: dict) -> ex.ExperimentReport:
    d = v["d"]
    if v["q"] is not None and v["alpha"] is not None:
        pairs = [(v["q"], v["alpha"])]
    elif v["q_list"] is not None and v["alpha_list"] is not None:
        pairs = [(q, a) for q in v["q_list"] for a in v["alpha_list"]]
    else:
        raise ConfigError("region needs either both 'q' and 'alpha' or both 'q_list' and 'alpha_list'")
    if v.get("boundary") and d < 3:
        raise ConfigError(f"'boundary' is only drawn for d >= 3, got d={d}")
    rows = []
    for q, a in pairs:
        res = rg.classify_mixed(rg.ExponentQuery(d, _exact_or_inf(q), _exact_or_inf(a)))
        rows.append((d, _fmt(q), _fmt(a), res.verdict.value, res.reason))
    return ex.ExperimentReport("region", ["d", "q", "alpha", "verdict", "reason"], rows, {"d": d})


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


def render_csv(report: ex.ExperimentReport, cfg: RunConfig) -> str:
    buf = io.StringIO()
    buf.write(f"# schatten-lab {__version__}\n")
    buf.write(f"# experiment: {cfg.experiment}\n")
    buf.write(f"# seed: {cfg.seed}\n")
    buf.write(f"# config: {emit_config(cfg)}\n")
    for k in sorted(report.metadata):
        buf.write(f"# meta {k}: {_fmt(report.metadata[k])}\n")
    for k in sorted(report.fitted_exponents):
        s, e = report.fitted_exponents[k]
        buf.write(f"# fit {k}: {_fmt(s)} +/- {_fmt(e)}\n")
    for f in report.flags:
        buf.write(f"# FLAG {f}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(report.columns)
    for r in report.rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def gnuplot_script(report: ex.ExperimentReport, csv_path: str) -> str:
    cols = report.columns
    lines = [
        f"# gnuplot script for {csv_path}",
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key autotitle columnhead",
    ]
    numeric = [i for i, c in enumerate(cols) if all(isinstance(r[i], (int, float, np.number)) for r in report.rows)]
    if report.name == "region" or len(numeric) < 2:
        lines.append(f"plot '{csv_path}' using 2:3 with points")
    else:
        logscale = report.name in ("decay", "semiclassical", "orthonormal", "translate-scaling")
        if logscale:
            lines.append("set logscale xy")
        x = numeric[0] + 1
        plots = [f"'{csv_path}' using {x}:{i + 1} with linespoints" for i in numeric[1:]]
        lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def run(cfg: RunConfig, stdout=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    flagged = None
    try:
        report = run_experiment(cfg)
    except ex.FlaggedRunError as exc:
        flagged, report = exc, exc.report
    except (SpectrumError, ArithmeticError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError, IndexError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if report is not None:
        text = render_csv(report, cfg)
        if cfg.output_path:
            out = Path(cfg.output_path)
            out.write_text(text, encoding="utf-8")
            if cfg.emit_plot:
                out.with_suffix(".gp").write_text(gnuplot_script(report, out.name), encoding="utf-8")
            if report.name == "region" and cfg.parameters.get("boundary"):
                rg.write_gnuplot_polyline(rg.region_boundary(report.metadata["d"]), out.with_suffix(".boundary.dat"))
        else:
            stdout.write(text)
    if flagged is not None:
        print(f"flagged run: {flagged}", file=sys.stderr)
        return EXIT_FLAGGED
    return EXIT_OK


def main(argv=None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
