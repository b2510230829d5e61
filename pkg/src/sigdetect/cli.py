"""Command-line interface.

Every run prints its resolved configuration first (a ``# config: {...}`` line
for CSV, a ``config`` key for JSON).  Saving that JSON to a file and passing
it back with ``--config`` reproduces the run.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import approx, inference
from .exact import PrecisionError, boundary_u
from .gof import parse_domain, parse_family, statistic
from .inference import MethodChoice
from .models import ArwParams, MixtureModel, ModelError, Normal, PvalueSide, model_from_dict, null_of
from .montecarlo import SimConfig, default_threads, dump_samples, empirical_sf, sample_stats

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
PROB_FIELDS = {"pvalue", "cdf", "sf", "power", "empirical_sf", "se", "level"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---- parsing helpers ------------------------------------------------------------

def parse_h1(text: str | None, n: int | None):
    """``normalmix:eps=0.05,mu=2``, ``arw:alpha=0.9,r=0.5`` or ``null``."""
    if text is None or text == "null":
        return None
    kind, _, rest = text.partition(":")
    kv = {}
    for item in filter(None, rest.split(",")):
        k, sep, v = item.partition("=")
        if not sep:
            raise UsageError(f"bad --h1 item {item!r}; expected key=value")
        kv[k.strip()] = float(v)
    if kind == "normalmix":
        eps = kv.pop("eps", kv.pop("epsilon", None))
        mu = kv.pop("mu", None)
        if eps is None or mu is None or kv:
            raise UsageError("normalmix needs exactly eps=<real>,mu=<real>")
        return MixtureModel(eps, Normal(), Normal(mu, kv.pop("sigma", 1.0)))
    if kind == "arw":
        if n is None:
            raise UsageError("arw alternatives need --n")
        if set(kv) != {"alpha", "r"}:
            raise UsageError("arw needs exactly alpha=<real>,r=<real>")
        return ArwParams(kv["alpha"], kv["r"], n).mixture()
    raise UsageError(f"unknown --h1 kind {kind!r}; expected normalmix, arw or null")


def _model_from_args(cfg):
    if cfg.get("model") is not None:
        return model_from_dict(cfg["model"])
    return parse_h1(cfg.get("h1"), cfg.get("n"))


def _domain_text(a) -> str | None:
    if a.domain:
        return a.domain
    if a.k0 is None and a.k1 is None and a.alpha0 is None and a.alpha1 is None:
        return None
    s = f"{a.k0 or ''}:{a.k1 or ''}"
    if a.alpha0 is not None or a.alpha1 is not None:
        s += f",{a.alpha0 if a.alpha0 is not None else ''}:{a.alpha1 if a.alpha1 is not None else ''}"
    return s


def _floats(text):
    if text is None:
        return []
    if text.count(":") == 2:
        lo, hi, cnt = text.split(":")
        return np.linspace(float(lo), float(hi), int(cnt)).tolist()
    return [float(t) for t in text.split(",") if t.strip()]


def _read_pvalues(path):
    src = sys.stdin if path == "-" else open(path)
    try:
        vals = [float(line) for line in src if line.strip()]
    finally:
        if src is not sys.stdin:
            src.close()
    if not vals:
        raise UsageError("p-value file is empty")
    return np.array(vals)


# ---- resolved configuration -------------------------------------------------------

def resolve(a) -> dict:
    """Everything a run depends on, with defaults filled in."""
    cfg = {"command": a.command, "format": a.format}
    if a.command == "sweep":
        with open(a.grid) as fh:
            cfg["grid"] = json.load(fh)
        return cfg
    if a.command == "stat":
        p = _read_pvalues(a.pvalues)
        cfg["pvalues"] = p.tolist()
        n = p.size
    else:
        if a.n is None:
            raise UsageError("--n is required")
        n = a.n
    if n < 1:
        raise UsageError("--n must be >= 1")
    try:
        fam = parse_family(a.family)
        dom = parse_domain(_domain_text(a), n)
    except ValueError as e:
        raise UsageError(str(e)) from e
    cfg.update(family=fam.name, n=n, domain=dom.to_str())
    if a.command in ("pvalue", "cdf", "critical", "power"):
        m = MethodChoice.parse(a.method)
        if m.kind == "mc":
            if ":" not in a.method:
                m = MethodChoice("mc", a.reps, a.seed)
            cfg["method"] = f"mc:reps={m.reps},seed={m.seed}"
        else:
            cfg["method"] = m.kind
    if a.command in ("power", "cdf", "simulate", "boundary"):
        cfg["side"] = PvalueSide.parse(a.side).value
        cfg["h1"] = a.h1
        if a.model_json:
            with open(a.model_json) as fh:
                cfg["model"] = json.load(fh)
    if a.command == "pvalue":
        if a.observed is None:
            raise UsageError("--observed is required")
        cfg["observed"] = a.observed
    if a.command in ("critical", "power"):
        if a.level is None:
            raise UsageError("--level is required")
        cfg["level"] = a.level
    if a.command in ("cdf", "boundary"):
        bs = _floats(a.b)
        if not bs:
            raise UsageError("--b is required (list a,b,c or grid lo:hi:count)")
        cfg["b"] = bs
    if a.command == "simulate":
        cfg.update(reps=a.reps, seed=a.seed, chunk=a.chunk, b=_floats(a.b), dump=a.dump)
    return cfg


# ---- commands ---------------------------------------------------------------------

def _common(cfg):
    fam = parse_family(cfg["family"])
    dom = parse_domain(cfg["domain"], cfg["n"])
    return fam, dom


def run_config(cfg: dict, threads: int):
    """Rows (list of dicts) for a resolved configuration."""
    cmd = cfg["command"]
    if cmd == "sweep":
        rows = inference.power_sweep(cfg["grid"], threads=threads)
        for r in rows:
            if isinstance(r.get("model"), dict):
                r["model"] = json.dumps(r["model"], sort_keys=True)
        return rows
    fam, dom = _common(cfg)
    n = cfg["n"]
    if cmd == "stat":
        r = statistic(fam, cfg["pvalues"], dom)
        return [{"statistic": r.value, "argmax_index": r.argmax_index, "empty_domain": r.empty_domain}]
    method = MethodChoice.parse(cfg.get("method"))
    if cmd == "pvalue":
        return [{"observed": cfg["observed"],
                 "pvalue": inference.pvalue(fam, dom, n, cfg["observed"], method),
                 "method": method.label(dom, n)}]
    if cmd == "critical":
        return [{"level": cfg["level"],
                 "threshold": inference.critical_value(fam, dom, n, cfg["level"], method),
                 "method": method.label(dom, n)}]
    model = _model_from_args(cfg)
    side = PvalueSide.parse(cfg["side"])
    if cmd == "power":
        if model is None:
            raise UsageError("power needs --h1 or --model-json")
        return [{"level": cfg["level"],
                 "power": inference.power(fam, dom, n, cfg["level"], model, side, method, threads),
                 "method": method.label(dom, n)}]
    if cmd == "cdf":
        rows = []
        for b in cfg["b"]:
            sf = inference.sf_at(fam, dom, n, b, method, model, side, threads)
            rows.append({"b": b, "cdf": 1.0 - sf, "sf": sf})
        return rows
    if cmd == "boundary":
        rows = []
        f0 = null_of(model) if model is not None else None
        for b in cfg["b"]:
            bv = boundary_u(fam, n, b, dom, f0, model, side)
            for k in range(dom.k0, dom.k1 + 1):
                rows.append({"b": b, "k": k, "u": bv.at(k), "d": (n + 1) * bv.at(k)})
        return rows
    if cmd == "simulate":
        sim = SimConfig(cfg["reps"], cfg["seed"], cfg["chunk"])
        s = sample_stats(model if model is not None else Normal(), fam, dom, n, sim, side, threads)
        if cfg.get("dump"):
            dump_samples(cfg["dump"], s)
        if cfg["b"]:
            out = []
            for b in cfg["b"]:
                e = empirical_sf(s, b)
                out.append({"b": b, "empirical_sf": e.value, "se": e.se, "reps": e.reps})
            return out
        fin = s[np.isfinite(s)]
        q = np.quantile(fin, [0.5, 0.9, 0.95, 0.99]) if fin.size else [math.nan] * 4
        return [{"reps": s.size, "mean": float(fin.mean()) if fin.size else math.nan,
                 "q50": q[0], "q90": q[1], "q95": q[2], "q99": q[3]}]
    raise UsageError(f"unknown command {cmd!r}")


# ---- output -----------------------------------------------------------------------

def _fmt(key, v):
    if isinstance(v, bool) or v is None:
        return "" if v is None else str(v).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v) or math.isinf(v):
            return str(v)
        return f"{v:.11e}" if key in PROB_FIELDS else f"{v:.12g}"
    return str(v)


def _json_num(key, v):
    if isinstance(v, (np.floating, float)) and not isinstance(v, bool):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, np.integer):
        return int(v)
    return v


def render(cfg: dict, rows: list[dict]) -> str:
    header = json.dumps(cfg, sort_keys=True)
    if cfg["format"] == "json":
        clean = [{k: _json_num(k, v) for k, v in r.items()} for r in rows]
        return json.dumps({"config": cfg, "result": clean}, sort_keys=True, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(f"# config: {header}\n")
    if rows:
        w = csv.writer(buf, lineterminator="\n")
        cols = list(rows[0])
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(c, r.get(c)) for c in cols])
    return buf.getvalue()


def load_config(path) -> dict:
    """Accepts a bare JSON object, a ``# config:`` line, or a full JSON output."""
    with open(path) as fh:
        text = fh.read().strip()
    if text.startswith("# config:"):
        text = text.splitlines()[0][len("# config:"):]
    obj = json.loads(text)
    return obj["config"] if "config" in obj and "command" not in obj else obj


# ---- entry point --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sigdetect", description="Exact and approximate distributions of "
                "supremum goodness-of-fit statistics (HC, Berk-Jones, phi-divergence, KS).")
    p.add_argument("--config", help="rerun a printed resolved-config JSON")
    p.add_argument("--threads", type=int, help="worker threads (SIGDETECT_THREADS overrides)")
    sub = p.add_subparsers(dest="command")

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--family", default="hc2004", help="hc2004, hc2008, bj, rbj, ks, phi:s=<real>")
        sp.add_argument("--n", type=int)
        sp.add_argument("--domain", help="k0:k1[,a0:a1]; defaults 1:floor(n/2),0:1")
        sp.add_argument("--k0", type=int)
        sp.add_argument("--k1", type=int)
        sp.add_argument("--alpha0", type=float)
        sp.add_argument("--alpha1", type=float)
        sp.add_argument("--method", default="exact-auto",
                        help="exact-auto, index, pvalue, modified, general, gamma, poisson, mc[:reps=R,seed=S]")
        sp.add_argument("--side", default="two-sided")
        sp.add_argument("--h1", help="normalmix:eps=E,mu=M | arw:alpha=A,r=R | null")
        sp.add_argument("--model-json", help="model JSON file (family, params, epsilon, signal)")
        sp.add_argument("--format", choices=["csv", "json"], default="csv")
        sp.add_argument("--reps", type=int, default=5000)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--chunk", type=int, default=1000)
        return sp

    add("stat", "statistic of a p-value file").add_argument("--pvalues", required=True,
                                                             help="newline-delimited file or -")
    add("pvalue", "null p-value of an observed statistic").add_argument("--observed", type=float)
    add("cdf", "CDF/SF over thresholds").add_argument("--b", help="a,b,c or lo:hi:count")
    add("critical", "critical value at a level").add_argument("--level", type=float)
    add("power", "power at a level under --h1").add_argument("--level", type=float)
    sw = sub.add_parser("sweep", help="power sweep from a JSON grid")
    sw.add_argument("--grid", required=True, help="JSON sweep grid")
    sw.add_argument("--format", choices=["csv", "json"], default="csv")
    sim = add("simulate", "Monte Carlo statistic samples")
    sim.add_argument("--b", help="thresholds for empirical SF")
    sim.add_argument("--dump", help="write samples as little-endian float64")
    add("boundary", "boundary vector u_k").add_argument("--b", help="a,b,c or lo:hi:count")
    return p


def _error(kind, exc, stream):
    obj = {"error": {"type": kind, "class": type(exc).__name__, "message": str(exc)}}
    stream.write(json.dumps(obj) + "\n")


def main(argv=None, stdout=None) -> int:
    out = stdout or sys.stdout
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
        if a.config:
            cfg = load_config(a.config)
        elif a.command is None:
            raise UsageError("a subcommand is required")
        else:
            cfg = resolve(a)
        # the environment variable wins over the flag
        threads = a.threads if a.threads and not os.environ.get("SIGDETECT_THREADS") else default_threads()
        rows = run_config(cfg, threads)
        out.write(render(cfg, rows))
        return EXIT_OK
    except (UsageError, OSError, json.JSONDecodeError, KeyError) as e:
        _error("usage", e, out)
        return EXIT_USAGE
    except (ValueError, ArithmeticError, ModelError, approx.ConditionError, PrecisionError) as e:
        _error("numeric", e, out)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
