"""Batch command-line driver: JSON config in, CSV/JSON rows plus a run manifest out.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 data or
ingestion error.
"""
import argparse
import concurrent.futures as cf
import csv
import hashlib
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import (ConvergenceError, DomainError, GapError, InsufficientDataError, NoDataError,
                     ParseError, PoleError, ResourceError, ShiftconvError)

COMMANDS = ("kernel", "dseries", "poincare-check", "eisenstein-check", "zq", "shifted-scan", "amplify", "verify")
SUITES = ("kernel", "poincare", "eisenstein", "doubleseries", "sums", "amplifier")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_DATA = 0, 2, 3, 4


class ConfigError(Exception):
    pass


# ------------------------------------------------------------------ output

def _flatten(row):
    out = {}
    for k, v in row.items():
        if isinstance(v, (complex, np.complexfloating)):
            out[k + "_re"] = float(v.real)
            out[k + "_im"] = float(v.imag)
        else:
            out[k] = v
    return out


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else _fmt(v)
    return v


def emit(rows, fmt, path, columns=None):
    """Write rows (dicts) as CSV or JSON; complex values become <name>_re / <name>_im."""
    flat = [_flatten(r) for r in rows]
    if columns is None:
        columns = list(flat[0].keys()) if flat else []
    else:
        columns = list(columns)
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for r in flat:
                w.writerow([_fmt(r[c]) for c in columns])
    elif fmt == "json":
        with open(path, "w", encoding="utf-8") as fh:
            json.dump([{c: _jsonable(r[c]) for c in columns} for r in flat], fh, indent=1)
            fh.write("\n")
    else:
        raise ConfigError(f"unknown format {fmt!r}")
    return columns


def _parse_cell(s):
    for conv in (int, float):
        try:
            return conv(s)
        except ValueError:
            pass
    return {"true": True, "false": False}.get(s, s)


def parse(path, fmt="csv"):
    """Read back what emit wrote (flattened column names)."""
    if fmt == "json":
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        return [{c: _parse_cell(v) for c, v in zip(header, row)} for row in r]


# ------------------------------------------------------------------ helpers

def _cplx(v, name):
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        try:
            return complex(v.replace(" ", ""))
        except ValueError:
            pass
    raise ConfigError(f"{name}: expected a number or [re, im]")


def _table(params, need):
    from .forms import constant_table, delta_coefficients, load_coefficients
    src = params.get("form", "delta")
    if src == "delta":
        return delta_coefficients(need)
    if src == "constant":
        return constant_table(need)
    t = load_coefficients(src)
    t.require(need)
    return t


def _threads():
    try:
        return max(1, int(os.environ.get("SHIFTCONV_THREADS", "1")))
    except ValueError:
        raise ConfigError("SHIFTCONV_THREADS must be an integer") from None


def _map(fn, items):
    """Order-stable map, fanned out over SHIFTCONV_THREADS workers."""
    n = _threads()
    if n == 1:
        return [fn(x) for x in items]
    with cf.ThreadPoolExecutor(n) as ex:
        return list(ex.map(fn, items))


# ------------------------------------------------------------------ commands

def cmd_kernel(p, seed):
    from . import kernel as K
    pts = p.get("points")
    if pts is None:
        rng = np.random.default_rng(seed)
        n = int(p.get("n_random", 10))
        pts = [{"s": [float(rng.uniform(0.6, 2)), float(rng.uniform(-3, 3))],
                "z": [0.0, float(rng.uniform(-5, 5))], "delta": float(rng.uniform(0.1, 0.9))} for _ in range(n)]
    regimes = p.get("regimes", ["hypergeom", "barnes", "quadrature"])
    fns = {"hypergeom": K.m_hypergeom, "barnes": K.m_barnes, "quadrature": K.m_quadrature}
    for r in regimes:
        if r not in fns:
            raise ConfigError(f"unknown regime {r!r}")

    def one(pt):
        q = K.KernelQuery(_cplx(pt["s"], "s"), _cplx(pt.get("z", 0), "z"), float(pt.get("delta", 0.5)))
        out = []
        for r in regimes:
            v = fns[r](q)
            out.append({"s": q.s, "z": q.z, "delta": q.delta, "regime": r, "value": v.value,
                        "err_estimate": v.err_estimate})
        return out
    rows = [r for rs in _map(one, pts) for r in rs]
    return rows, {"regimes": regimes, "n_points": len(pts), "barnes_drop": 45.0}


def cmd_dseries(p, seed):
    from .dseries import DSeriesQuery, d_truncated
    from .poincare import ShiftParams
    sp = ShiftParams(int(p.get("h", 1)), int(p.get("l1", 1)), int(p.get("l2", 1)))
    M = int(p.get("M", 2000))
    delta = float(p.get("delta", 0.0))
    ss = [_cplx(v, "s") for v in p.get("s", [2.0])]
    f = _table(p, (sp.l2 * M + sp.h) // sp.l1 + 1)
    rows = []
    for s in ss:
        v = d_truncated(DSeriesQuery(s, sp, delta, M, f, f))
        rows.append({"s": s, "h": sp.h, "l1": sp.l1, "l2": sp.l2, "M": M, "delta": delta,
                     "value": v.value, "tail_bound": v.tail_bound})
    return rows, {"M": M, "delta": delta}


def cmd_poincare_check(p, seed):
    from .poincare import ShiftParams, TruncationWindow, poincare_array, poincare_fourier, poincare_fourier_quadrature
    sp = ShiftParams(int(p.get("h", 1)), N0=int(p.get("N0", 1)))
    w = TruncationWindow(float(p.get("Y", 10.0)), float(p.get("delta", 0.5)))
    s = _cplx(p.get("s", 2.0), "s")
    rng = np.random.default_rng(seed)
    rows = []
    tol_inv = float(p.get("tol_invariance", 1e-12))
    tol_four = float(p.get("tol_fourier", 1e-8))
    for _ in range(int(p.get("n_points", 5))):
        z = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.3, 1.5))
        # gamma = [[1, 1], [0, 1]] and an N-congruence matrix [[1, 0], [N, 1]]
        N = sp.N
        gz = z / (N * z + 1)
        v = poincare_array(np.array([z, z + 1, gz]), s, sp, w)
        dev = max(abs(v[0] - v[1]), abs(v[0] - v[2])) / max(abs(v[0]), 1e-300)
        rows.append({"check": "invariance", "z": z, "deviation": dev, "tol": tol_inv, "passed": dev <= tol_inv})
    for m in p.get("fourier_m", [-1, 1]):
        y = float(p.get("fourier_y", 0.8))
        fa = poincare_fourier(int(m), y, s, sp, w)
        fq = poincare_fourier_quadrature(int(m), y, s, sp, w)
        dev = abs(fa - fq) / max(abs(fq), 1e-300)
        rows.append({"check": f"fourier_m={int(m)}", "z": complex(0, y), "deviation": dev, "tol": tol_four,
                     "passed": dev <= tol_four})
    return rows, {"Y": w.Y, "delta": w.delta, "tol_invariance": tol_inv, "tol_fourier": tol_four}


def cmd_eisenstein_check(p, seed):
    from .eisenstein import cusps, rho_closed, rho_direct
    s = _cplx(p.get("s", 1.5), "s")
    C = int(p.get("C_max", 2000))
    tol = float(p.get("tol", 1e-6))
    ns = list(range(1, int(p.get("n_max", 10)) + 1))
    rows = []
    for N in p.get("N", [1, 6]):
        for c in cusps(int(N)):
            direct = rho_direct(s, ns, c, C_max=C)
            for n, dv in zip(ns, direct):
                cv = rho_closed(s, n, c)
                dev = abs(cv - dv.value)
                rows.append({"N": int(N), "w": c.w, "n": n, "closed": cv, "direct": dv.value,
                             "deviation": dev, "tol": tol, "passed": dev <= tol})
    return rows, {"C_max": C, "tol": tol}


def cmd_zq(p, seed):
    from .doubleseries import ZqQuery, zq_truncated
    from .poincare import ShiftParams
    sp = ShiftParams(1, int(p.get("l1", 1)), int(p.get("l2", 1)), 1, int(p.get("Q", 1)))
    M2, H = int(p.get("M2", 500)), int(p.get("H", 500))
    f = _table(p, (sp.l2 * M2 + H * sp.Q) // sp.l1 + 1)
    rows = []
    for s, w in p.get("points", [[2.0, 2.0]]):
        q = ZqQuery(_cplx(s, "s"), _cplx(w, "w"), sp, f, f, M2=M2, H=H)
        v = zq_truncated(q)
        rows.append({"s": q.s, "w": q.w, "sprime": q.sprime, "Q": sp.Q, "value": v.value, "tail_bound": v.tail_bound})
    return rows, {"M2": M2, "H": H}


def cmd_shifted_scan(p, seed):
    from .poincare import ShiftParams
    from .sums import ScanReport, cancellation_scan
    if "xs" in p:
        xs = [float(x) for x in p["xs"]]
    else:
        lo, hi = p.get("x_exponents", [10, 17])
        xs = [2.0 ** e for e in range(int(lo), int(hi) + 1)]
    hs = [int(h) for h in p.get("hs", [1])]
    sp = ShiftParams(1, int(p.get("l1", 1)), int(p.get("l2", 1)))
    f = _table(p, int(2 * max(xs) * sp.l2 + max(hs)) // sp.l1 + 2)
    rep = cancellation_scan(hs, xs, "single", sp, f, f)
    rows = [dict(zip(ScanReport.CSV_COLUMNS, r)) for r in rep.csv_rows()]
    return rows, {"columns": ScanReport.CSV_COLUMNS, "slope": rep.slope, "bootstrap_spread": rep.spread,
                  "n_used": rep.n_used, "n_zero": rep.n_zero, "bootstrap_samples": 200, "bootstrap_seed": 0}


def cmd_amplify(p, seed):
    from .amplifier import TrendReport, subconvexity_scan
    from .forms import primes_upto
    qs = p.get("Q_list")
    if qs is None:
        lo, hi = p.get("Q_range", [11, 101])
        qs = [int(q) for q in primes_upto(int(hi)) if q >= int(lo)]
    f = _table(p, 2 * max(qs) + 2)
    rep = subconvexity_scan(qs, f, chi=int(p.get("chi", 1)))
    rows = [dict(zip(TrendReport.CSV_COLUMNS, r)) for r in rep.csv_rows()]
    return rows, {"columns": TrendReport.CSV_COLUMNS, "slope": rep.slope, "bootstrap_spread": rep.spread,
                  "target": rep.target, "x_grid": "Q/8, Q/4, Q/2, Q", "amplifier_length": "Q^(1/4) log Q, primes in [L, 2L)"}


# --------------------------------------------------------------- verify

def _suite_kernel(seed):
    from . import kernel as K
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(8):
        q = K.KernelQuery(complex(rng.uniform(0.6, 2), rng.uniform(-2, 2)), 1j * rng.uniform(-5, 5), rng.uniform(0.1, 0.9))
        a, b = K.m_quadrature(q).value, K.m_hypergeom(q).value
        out.append(("quadrature_vs_hypergeom", abs(a - b) / (1 + abs(b)), 1e-8))
        c = K.m_barnes(q).value
        out.append(("barnes_vs_hypergeom", abs(c - b) / (1 + abs(b)), 1e-6))
    v = K.m_hypergeom(K.KernelQuery(2, 0, 2.0)).value
    out.append(("closed_form_delta_2", abs(v - math.pi ** 1.5 / (8 * math.sqrt(2))), 1e-10))
    e1 = K.m_hypergeom(K.KernelQuery(1.7, 0.4j, 0.3)).value
    e2 = K.m_hypergeom(K.KernelQuery(1.7, -0.4j, 0.3)).value
    out.append(("evenness", abs(e1 - e2), 1e-12))
    return out


def _suite_poincare(seed):
    rows, _ = cmd_poincare_check({"n_points": 3}, seed)
    return [(r["check"], r["deviation"], r["tol"]) for r in rows]


def _suite_eisenstein(seed):
    from .eisenstein import CuspLabel, rho_closed, rho_direct, zeta_aq_closed, zeta_aq_direct
    out = []
    for w in (1, 2, 3, 6):
        c = CuspLabel(w, 6)
        for n, d in zip(range(1, 4), rho_direct(1.5, [1, 2, 3], c, C_max=2000)):
            out.append((f"rho N=6 w={w} n={n}", abs(rho_closed(1.5, n, c) - d.value), 1e-6))
    c = CuspLabel(1, 1)
    a = zeta_aq_closed(3, 0.3, c, 5)
    b = zeta_aq_direct(3, 0.3, c, 5, H_max=20000).value
    out.append(("zeta_aQ Q=5", abs(a - b) / abs(a), 1e-4))
    return out


def _suite_doubleseries(seed):
    from .doubleseries import ZqQuery, s5_sieve_check
    from .forms import delta_coefficients
    from .poincare import ShiftParams
    f = delta_coefficients(1000)
    out = []
    for l1, l2, Q in ((1, 1, 5), (5, 7, 12)):
        q = ZqQuery(2.2, 0.3, ShiftParams(1, l1, l2, 1, Q), f, f, M2=50, H=50)
        r = s5_sieve_check(q, 1, box=1000)
        out.append((f"sieve Q={Q} l=({l1},{l2})", r.sieve_dev, 1e-10))
        out.append((f"characters Q={Q} l=({l1},{l2})", r.char_dev, 1e-10))
    return out


def _suite_sums(seed):
    from .sums import mellin_beta_identity
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(5):
        beta = complex(rng.uniform(1, 6), rng.uniform(-3, 3))
        t = float(rng.uniform(0.1, 5))
        g = float(rng.uniform(0.2, 0.8) * beta.real)
        lhs, rhs = mellin_beta_identity(beta, t, g)
        out.append(("mellin_beta", abs(lhs - rhs) / abs(rhs), 1e-10))
    return out


def _suite_amplifier(seed):
    from .amplifier import AmplifierConfig, amplified_s, amplified_s_congruence, parseval_decompose
    from .forms import delta_coefficients
    f = delta_coefficients(300)
    out = []
    for Q in (13, 31):
        cfg = AmplifierConfig(Q)
        _, _, dev = parseval_decompose(cfg, f)
        out.append((f"parseval Q={Q}", dev, 1e-10))
        S = amplified_s(cfg, f)
        out.append((f"congruence Q={Q}", abs(S - amplified_s_congruence(cfg, f)) / max(S, 1e-300), 1e-10))
    return out


def cmd_verify(p, seed):
    suite = p.get("suite", "kernel")
    suites = SUITES if suite == "all" else (suite,)
    rows = []
    for name in suites:
        fn = globals().get("_suite_" + name)
        if fn is None:
            raise ConfigError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all")
        for check, dev, tol in fn(seed):
            rows.append({"suite": name, "check": check, "deviation": float(dev), "tol": tol,
                         "passed": bool(dev <= tol)})
    return rows, {"columns": ("suite", "check", "deviation", "tol", "passed"), "suite": suite}


HANDLERS = {
    "kernel": cmd_kernel, "dseries": cmd_dseries, "poincare-check": cmd_poincare_check,
    "eisenstein-check": cmd_eisenstein_check, "zq": cmd_zq, "shifted-scan": cmd_shifted_scan,
    "amplify": cmd_amplify, "verify": cmd_verify,
}


# ------------------------------------------------------------------ driver

def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _coerce(v):
    try:
        return json.loads(v)
    except json.JSONDecodeError:
        return v


def build_config(args):
    cfg = load_config(args.config) if args.config else {}
    cfg = dict(cfg)
    cfg.setdefault("params", {})
    if not isinstance(cfg["params"], dict):
        raise ConfigError("params must be an object")
    cfg["params"] = dict(cfg["params"])
    if args.command:
        cfg["command"] = args.command
    if args.output:
        cfg["output_path"] = args.output
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.format:
        cfg["format"] = args.format
    if args.suite:
        cfg["params"]["suite"] = args.suite
    for kv in args.param or []:
        if "=" not in kv:
            raise ConfigError(f"--param expects key=value, got {kv!r}")
        k, v = kv.split("=", 1)
        cfg["params"][k] = _coerce(v)
    cmd = cfg.get("command")
    if cmd not in COMMANDS:
        raise ConfigError(f"command must be one of {', '.join(COMMANDS)}")
    cfg.setdefault("seed", 0)
    cfg.setdefault("format", "csv")
    cfg.setdefault("output_path", f"{cmd}.{cfg['format']}")
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    if not isinstance(cfg["seed"], int):
        raise ConfigError("seed must be an integer")
    return cfg


def config_hash(cfg):
    return hashlib.sha256(json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def run(cfg):
    """Execute one configured command; returns (exit code, manifest)."""
    t0 = time.perf_counter()
    rows, info = HANDLERS[cfg["command"]](cfg["params"], cfg["seed"])
    path = cfg["output_path"]
    # handlers with a fixed schema pass it along so an empty run still gets a header
    columns = emit(rows, cfg["format"], path, info.pop("columns", None))
    failed = [r for r in rows if r.get("passed") is False]
    manifest = {
        "command": cfg["command"],
        "config": cfg,
        "config_hash": config_hash(cfg),
        "version": __version__,
        "seed": cfg["seed"],
        "threads": _threads(),
        "parameters": {k: _jsonable(v) if not isinstance(v, (list, dict)) else v for k, v in info.items()},
        "rows": len(rows),
        "columns": columns,
        "failed_checks": len(failed),
        "output": path,
        "wall_time_s": time.perf_counter() - t0,
    }
    with open(path + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return (EXIT_NUMERIC if failed else EXIT_OK), manifest


def exit_code_for(exc):
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, (ParseError, NoDataError, GapError, ResourceError, InsufficientDataError, OSError)):
        return EXIT_DATA
    if isinstance(exc, (ConvergenceError, PoleError, ArithmeticError)):
        return EXIT_NUMERIC
    if isinstance(exc, (DomainError, KeyError, TypeError, ValueError)):
        return EXIT_CONFIG
    if isinstance(exc, ShiftconvError):
        return EXIT_NUMERIC
    return EXIT_NUMERIC


def make_parser():
    ap = argparse.ArgumentParser(prog="shiftconv", description="Shifted convolution numerics: batch runs and checks.")
    ap.add_argument("command", nargs="?", choices=COMMANDS, help="command (may instead come from the config)")
    ap.add_argument("--config", "-c", help="JSON config file")
    ap.add_argument("--output", "-o", help="output path (overrides config)")
    ap.add_argument("--seed", type=int, help="seed for generated test points")
    ap.add_argument("--format", choices=("csv", "json"))
    ap.add_argument("--suite", help="verify suite: " + ", ".join(SUITES) + " or all")
    ap.add_argument("--param", "-p", action="append", metavar="KEY=VALUE", help="override one params entry")
    return ap


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        code, man = run(cfg)
    except Exception as exc:  # noqa: BLE001 - mapped to exit codes
        code = exit_code_for(exc)
        print(f"shiftconv: error: {exc}", file=sys.stderr)
        return code
    print(f"wrote {man['rows']} rows to {man['output']} ({man['wall_time_s']:.2f} s)")
    if man["failed_checks"]:
        print(f"{man['failed_checks']} check(s) failed", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
