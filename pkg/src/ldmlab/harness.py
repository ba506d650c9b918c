"""Experiment dispatch: parameter validation, runners, persistent outputs.

Every run is described by an :class:`ExperimentSpec`; `dispatch` validates
it against the subcommand's schema, runs the computation, writes outputs
atomically (temp file + rename) and returns a :class:`RunRecord` that can
replay to a byte-identical payload.
"""

import json
import math
import os
import tempfile
import time
from dataclasses import asdict, dataclass, field

from . import analysis_fit, continuum_series, core_ldm, exact_recursion, fibonacci_model
from . import lambda_walk, rate_equation
from ._util import LN2

ARTIFACT_VERSION = "0.1.0"


class ValidationError(ValueError):
    """Bad spec or bad input file; exit code 2."""


class ResourceLimitError(RuntimeError):
    """Work refused because it exceeds a declared cap; exit code 3."""


@dataclass
class ExperimentSpec:
    subcommand: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    out: str = None
    format: str = None  # 'csv' | 'json' | None (subcommand default)

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


@dataclass
class RunRecord:
    spec: dict
    version: str
    wall_time: float
    payload: dict
    warnings: list
    output_files: list

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))

    def replay(self):
        return dispatch(ExperimentSpec(**self.spec))


# ---------------------------------------------------------------------------
# atomic output helpers


def atomic_write_text(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def table_to_csv(header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def payload_text(payload, fmt):
    """Serialize a runner payload; 'table' feeds csv, 'json' feeds json."""
    if fmt == "csv":
        if "table" not in payload:
            raise ValidationError("this subcommand has no csv form; use --format json")
        header, rows = payload["table"]
        return table_to_csv(header, rows)
    body = payload.get("json")
    if body is None:
        header, rows = payload["table"]
        body = [dict(zip(header, row)) for row in rows]
    return json.dumps(body, sort_keys=True, indent=1) + "\n"


# ---------------------------------------------------------------------------
# runners: (payload, extra_files, warnings)


def _run_ldm_sim(p, seed):
    cfg = core_ldm.SimConfig(n=p["n"], trials=p["trials"], bits=p["bits"], seed=seed)
    stats = core_ldm.sample_mean_ldm(cfg)
    header = ["n", "trials", "bits", "seed", "mean_L", "stderr_L"]
    row = [stats.n, stats.trials, stats.bits, stats.seed, stats.mean, stats.stderr]
    files = {}
    if p["hist_out"]:
        centers = 0.5 * (stats.hist_edges[1:] + stats.hist_edges[:-1])
        files[p["hist_out"]] = table_to_csv(
            ["bin_center", "density"],
            [[float(c), float(d)] for c, d in zip(centers, stats.hist_density)],
        )
    warnings = ["bit width too small: >1% of trials hit zero discrepancy"] if stats.low_bits_warning else []
    payload = {"table": (header, [row]), "json": dict(zip(header, row), neg_ln_mean=stats.neg_log_mean)}
    return payload, files, warnings


def _run_exact_pdf(p, seed):
    cap = exact_recursion.DEFAULT_MAX_N if not p["max_n_override"] else max(p["n"], exact_recursion.DEFAULT_MAX_N)
    if p["n"] > cap:
        raise ResourceLimitError("branch tree too large at n=%d; pass --max-n-override" % p["n"])
    mix = exact_recursion.enumerate_pdf(p["n"], max_n=cap)
    mean_lhat = exact_recursion.mixture_mean(mix)
    mean_l = mean_lhat / (p["n"] + 1)
    body = {
        "n": p["n"],
        "coeffs": {str(k): "%d/%d" % (a.numerator, a.denominator) for k, a in mix.coeffs.items()},
        "mean_Lhat": "%d/%d" % (mean_lhat.numerator, mean_lhat.denominator),
        "mean_L": "%d/%d" % (mean_l.numerator, mean_l.denominator),
    }
    return {"json": body}, {}, []


def _run_lambda_walk(p, seed):
    stats = lambda_walk.walk_ensemble(p["n"], p["trials"], seed=seed)
    header = ["n", "trials", "mean_lambda2", "stderr"]
    row = [stats.n, stats.trials, stats.mean_lambda2, stats.stderr]
    files = {}
    if p["hist_out"]:
        centers = 0.5 * (stats.hist_edges[1:] + stats.hist_edges[:-1])
        files[p["hist_out"]] = table_to_csv(
            ["bin_center", "density"],
            [[float(c), float(d)] for c, d in zip(centers, stats.hist_density)],
        )
    return {"table": (header, [row])}, files, []


def _run_rate_eq(p, seed):
    if p["field_out"]:
        if p["n"] > rate_equation.FIELD_CAP_N:
            raise ResourceLimitError("full field capped at n=%d" % rate_equation.FIELD_CAP_N)
        field = rate_equation.contour_field(p["n"])
        lam1 = float(field[-1][0])
        rows = rate_equation.log_field_rows(field)
        files = {p["field_out"]: table_to_csv(["t", "i", "ln_lambda"], rows)}
    else:
        lam1, _ = rate_equation.solve(p["n"])
        files = {}
    header = ["n", "lambda1_final", "log_lambda1"]
    return {"table": (header, [[p["n"], lam1, math.log(lam1)]])}, files, []


def _run_fibonacci(p, seed):
    if p["sample"] == "dyadic":
        targets = fibonacci_model.dyadic_targets(p["n_max"])
    else:
        try:
            targets = sorted({int(x) for x in p["sample"].split(",")})
        except ValueError as e:
            raise ValidationError("--sample must be 'dyadic' or a comma list of ints") from e
        if not targets or targets[-1] > p["n_max"]:
            raise ValidationError("sample points must lie in [1, n_max]")
    try:
        curve = fibonacci_model.fib_scaling_curve(targets)
    except MemoryError as e:
        raise ResourceLimitError(str(e)) from e
    header = ["n", "ln_F", "scaled_value"]
    return {"table": (header, [[n, lnF, sc] for n, lnF, sc in curve])}, {}, []


def _run_series(p, seed):
    ln_n = p["log2_n"] * LN2
    val = continuum_series.f_series(ln_n, precision_bits=p["precision"])
    ev = continuum_series.asympt_expansion(ln_n, precision_bits=p["precision"])
    scaled = float(val.scaled(ln_n))
    asympt = float(ev.expansion_scaled)
    header = ["log2_n", "ln_f", "scaled_value", "asympt_value", "residual"]
    row = [p["log2_n"], float(val.ln_value), scaled, asympt, abs(scaled - asympt)]
    return {"table": (header, [row])}, {}, []


def _run_gamma(p, seed):
    if p["k_max"] > 20:
        raise ResourceLimitError("gamma recursion checks capped at k=20")
    header = ["k", "max_residual"]
    rows = [[k, continuum_series.gamma_recursion_check(k, p["n"])] for k in range(p["k_max"] + 1)]
    return {"table": (header, rows)}, {}, []


def _parse_range(text):
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError as e:
        raise ValidationError("--range must look like nmin:nmax") from e


def _read_csv_columns(path):
    import csv as _csv

    try:
        with open(path, newline="") as f:
            reader = _csv.DictReader(f)
            rows = list(reader)
    except OSError as e:
        raise ValidationError("cannot read input csv: %s" % e) from e
    if not rows:
        raise ValidationError("input csv is empty")
    return rows


def _run_fit(p, seed):
    rows = _read_csv_columns(p["in"])
    nmin, nmax = _parse_range(p["range"]) if p["range"] else (2, None)
    kept = []
    for r in rows:
        n = int(float(r["n"]))
        if n < nmin or (nmax is not None and n > nmax):
            continue
        kept.append((n, r))
    if p["model"] == "fit":
        pts = []
        for n, r in kept:
            if "ln_Z" in r and r["ln_Z"] not in (None, ""):
                ln_z = float(r["ln_Z"])
            elif "ln_F" in r and r["ln_F"] not in (None, ""):
                ln_z = float(r["ln_F"])
            elif "scaled_value" in r and r["scaled_value"] not in (None, ""):
                ln_n = math.log(n)
                ln_z = float(r["scaled_value"]) * ln_n**2 - math.log(n + 1)
            else:
                raise ValidationError("fit input needs an ln_Z, ln_F or scaled_value column")
            pts.append(analysis_fit.ScalingPoint(n=n, ln_z=ln_z))
        try:
            res = analysis_fit.fit_loglog(pts)
        except ValueError as e:
            raise ValidationError(str(e)) from e
        body = {"c1": res.c1, "c2": res.c2, "c3": res.c3, "residual": res.residual_norm}
        return {"json": body}, {}, []
    # naive: straight line through (-ln mean_L, ln^2 n)
    pts = []
    for n, r in kept:
        if "neg_ln_mean" in r and r["neg_ln_mean"] not in (None, ""):
            pts.append((n, float(r["neg_ln_mean"])))
        elif "mean_L" in r and r["mean_L"] not in (None, ""):
            m = float(r["mean_L"])
            if m <= 0:
                raise ValidationError("mean_L must be positive for the naive fit")
            pts.append((n, -math.log(m)))
        else:
            raise ValidationError("naive fit input needs a neg_ln_mean or mean_L column")
    try:
        intercept, slope = analysis_fit.naive_fit(pts)
    except ValueError as e:
        raise ValidationError(str(e)) from e
    return {"json": {"intercept": intercept, "slope": slope}}, {}, []


# ---------------------------------------------------------------------------
# figure presets


def _sim_scaled_points(n_list, seed, scale):
    pts = []
    for n in n_list:
        trials = max(64, int((1 << 17) / n * scale)) if scale else 64
        cfg = core_ldm.SimConfig(n=n, trials=trials, bits="auto", seed=seed + n)
        stats = core_ldm.sample_mean_ldm(cfg)
        # Z = 1/<n L_n>  ->  ln Z = -ln<L> - ln n
        ln_z = stats.neg_log_mean - math.log(n)
        scaled = (ln_z + math.log(n + 1)) / math.log(n) ** 2
        pts.append((n, stats, scaled))
    return pts


def _run_figure(p, seed):
    name = p["name"]
    scale = p["scale"]
    files = {}
    payload_rows = []
    if name == "fig2":
        ns = [2**k for k in range(4, 13)]
        pts = _sim_scaled_points(ns, seed, scale)
        files["fig2_points.csv"] = table_to_csv(
            ["n", "trials", "mean_L", "stderr_L", "neg_ln_mean"],
            [[n, s.trials, s.mean, s.stderr, s.neg_log_mean] for n, s, _ in pts],
        )
        intercept, slope = analysis_fit.naive_fit([(n, s.neg_log_mean) for n, s, _ in pts])
        files["fig2_fit.json"] = json.dumps({"intercept": intercept, "slope": slope}, sort_keys=True) + "\n"
    elif name == "fig3":
        for n in (1000, 10000):
            trials = max(400, int(20000 * scale))
            cfg = core_ldm.SimConfig(n=n, trials=trials, bits="auto", seed=seed + n)
            stats = core_ldm.sample_mean_ldm(cfg)
            centers = 0.5 * (stats.hist_edges[1:] + stats.hist_edges[:-1])
            files["fig3_n%d.csv" % n] = table_to_csv(
                ["bin_center", "density"],
                [[float(c), float(d)] for c, d in zip(centers, stats.hist_density)],
            )
    elif name == "fig5":
        for n in (128, 512, 2048):
            trials = max(400, int(10000 * scale))
            stats = lambda_walk.walk_ensemble(n, trials, seed=seed + n)
            centers = 0.5 * (stats.hist_edges[1:] + stats.hist_edges[:-1])
            files["fig5_n%d.csv" % n] = table_to_csv(
                ["bin_center", "density"],
                [[float(c), float(d)] for c, d in zip(centers, stats.hist_density)],
            )
    elif name == "fig6":
        schema = ["n", "scaled_value"]
        ns = [2**k for k in range(6, 14)]
        sim = _sim_scaled_points(ns, seed, scale)
        files["fig6_simulation.csv"] = table_to_csv(schema, [[n, sc] for n, _, sc in sim])
        files["fig6_rate.csv"] = table_to_csv(
            schema, [[n, rate_equation.scaled_final(n)] for n in ns]
        )
        fib_ns = fibonacci_model.dyadic_targets(2**20)
        curve = fibonacci_model.fib_scaling_curve([n for n in fib_ns if n >= 8])
        files["fig6_fibonacci.csv"] = table_to_csv(schema, [[n, sc] for n, _, sc in curve])
        rows = []
        for log2n in (25, 50, 100, 200, 400):
            ln_n = log2n * LN2
            val = continuum_series.f_series(ln_n)
            rows.append([2**log2n, float(val.scaled(ln_n))])
        files["fig6_series.csv"] = table_to_csv(schema, rows)
    else:
        raise ValidationError("no preset named %r" % name)
    payload_rows = [[name, f] for f in sorted(files)]
    return {"table": (["figure", "file"], payload_rows)}, files, []


# ---------------------------------------------------------------------------
# schema registry and dispatch

_SCHEMAS = {
    "ldm-sim": (
        {"n": (int, True, None), "trials": (int, True, None), "bits": (("auto", int), False, "auto"),
         "hist_out": (str, False, None)},
        _run_ldm_sim, "csv",
    ),
    "exact-pdf": (
        {"n": (int, True, None), "max_n_override": (bool, False, False)},
        _run_exact_pdf, "json",
    ),
    "lambda-walk": (
        {"n": (int, True, None), "trials": (int, True, None), "hist_out": (str, False, None)},
        _run_lambda_walk, "csv",
    ),
    "rate-eq": (
        {"n": (int, True, None), "field_out": (str, False, None)},
        _run_rate_eq, "csv",
    ),
    "fibonacci": (
        {"n_max": (int, True, None), "sample": (str, False, "dyadic")},
        _run_fibonacci, "csv",
    ),
    "series": (
        {"log2_n": (int, True, None), "precision": (int, False, continuum_series.DEFAULT_PRECISION)},
        _run_series, "csv",
    ),
    "gamma": (
        {"n": (int, True, None), "k_max": (int, False, 8)},
        _run_gamma, "csv",
    ),
    "fit": (
        {"in": (str, True, None), "model": (("fit", "naive"), False, "fit"), "range": (str, False, None)},
        _run_fit, "json",
    ),
    "figure": (
        {"name": (str, True, None), "out_dir": (str, False, "."), "scale": (float, False, 1.0)},
        _run_figure, "csv",
    ),
}

SUBCOMMANDS = tuple(sorted(_SCHEMAS))


def _validate(spec):
    if spec.subcommand not in _SCHEMAS:
        raise ValidationError("unknown subcommand %r" % spec.subcommand)
    schema, runner, default_fmt = _SCHEMAS[spec.subcommand]
    params = dict(spec.params or {})
    unknown = [k for k in params if k not in schema]
    if unknown:
        raise ValidationError("unknown parameters: %s" % unknown)
    clean = {}
    for key, (kind, required, default) in schema.items():
        val = params.get(key)
        if val is None:
            if required:
                raise ValidationError("missing required parameter %r" % key)
            clean[key] = default
            continue
        if isinstance(kind, tuple) and all(isinstance(k, str) for k in kind):
            if val not in kind:
                raise ValidationError("parameter %r must be one of %s" % (key, list(kind)))
        elif isinstance(kind, tuple):
            # mixed literal/type alternatives, e.g. 'auto' or int
            ok = any(val == k if isinstance(k, str) else isinstance(val, k) for k in kind)
            if not ok:
                raise ValidationError("parameter %r has the wrong type" % key)
        elif kind is bool:
            if not isinstance(val, bool):
                raise ValidationError("parameter %r must be a flag" % key)
        elif kind is float:
            if not isinstance(val, (int, float)) or isinstance(val, bool):
                raise ValidationError("parameter %r must be a number" % key)
            val = float(val)
        elif not isinstance(val, kind) or isinstance(val, bool):
            raise ValidationError("parameter %r must be %s" % (key, kind.__name__))
        clean[key] = val
    fmt = spec.format or default_fmt
    if fmt not in ("csv", "json"):
        raise ValidationError("format must be csv or json")
    return clean, runner, fmt


def dispatch(spec):
    """Validate, run, persist, and return the run record."""
    clean, runner, fmt = _validate(spec)
    t0 = time.monotonic()
    try:
        payload, files, warnings = runner(clean, spec.seed)
    except MemoryError as e:
        raise ResourceLimitError(str(e)) from e
    wall = time.monotonic() - t0
    written = []
    out_dir = clean.get("out_dir")
    for rel, text in files.items():
        path = rel if os.path.isabs(rel) else os.path.join(out_dir or ".", rel)
        atomic_write_text(path, text)
        written.append(path)
    if spec.out:
        atomic_write_text(spec.out, payload_text(payload, fmt))
        written.append(spec.out)
    body = payload.get("json")
    if body is None:
        header, rows = payload["table"]
        body = [dict(zip(header, row)) for row in rows]
    return RunRecord(
        spec=asdict(spec),
        version=ARTIFACT_VERSION,
        wall_time=wall,
        payload=body,
        warnings=warnings,
        output_files=written,
    )


def figure_pipeline(name, out_dir=".", seed=0, scale=1.0):
    """Emit every CSV needed to redraw the named comparison figure."""
    spec = ExperimentSpec(
        subcommand="figure", params={"name": name, "out_dir": out_dir, "scale": scale}, seed=seed
    )
    return dispatch(spec)
