"""Command-line entry point.

Exit codes: 0 success, 2 usage error, 3 numeric or validation failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone

from . import analytic, experiments, reporting
from .config import load_config, parse_bool, split_list
from .noise import Category, ErrorModel, NoiseSpec

COMMANDS = ("shor-sweep", "adder", "modadd-sweep", "r-localize", "extra-qubits", "analytic", "fit")
SWEEPS = ("shor-sweep", "modadd-sweep", "r-localize", "extra-qubits")

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_IO = 0, 2, 3, 4

# per-command defaults, applied below config-file values
DEFAULTS = {
    "shor-sweep": {"n": "15", "base": "2", "delta_l": "0", "realizations": "100",
                   "sigma": ",".join(map(str, experiments.DEFAULT_SIGMAS))},
    "adder": {"sigma": "0", "model": "relative", "category": "typed-sym", "realizations": "1"},
    "modadd-sweep": {"sigma": "0.2", "delta_l": "0", "realizations": "1", "limit": "8192",
                     "min_per_band": "0", "model": "relative,absolute", "category": "typed-sym"},
    "r-localize": {"realizations": "20"},
    "extra-qubits": {"n": "15", "delta_l": "0,1,2,3", "realizations": "16", "model": "relative,absolute",
                     "category": "typed-sym", "sigma": ",".join(map(str, experiments.EXTRA_QUBIT_SIGMAS))},
    "analytic": {"sigma": "0.01", "l": "4", "x0": str(15 / 16), "window": "offset", "model": "relative"},
    "fit": {},
}
COMMON = {"seed": "0", "emit_svg": "false", "allow_large": "false"}


@dataclass
class RunConfig:
    command: str
    values: dict = field(default_factory=dict)
    workers: int | None = None

    def get(self, key, default=None):
        return self.values.get(key, default)

    @property
    def out(self):
        return self.values.get("out")

    def echo(self) -> dict:
        return {"command": self.command, **{k: v for k, v in sorted(self.values.items())}}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="symboost", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")
    subs = {}
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", metavar="FILE")
        sp.add_argument("--seed")
        sp.add_argument("--sigma", help="comma-separated list")
        sp.add_argument("--realizations")
        sp.add_argument("--delta-l", dest="delta_l", help="comma-separated list")
        sp.add_argument("--model", help="relative, absolute or a comma-separated list")
        sp.add_argument("--category", help="typed-sym, typed-asym, non-typed or a list")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--workers")
        sp.add_argument("--emit-svg", dest="emit_svg", action="store_const", const="true")
        subs[name] = sp
    for name in ("shor-sweep", "extra-qubits"):
        subs[name].add_argument("--N", dest="n")
    subs["shor-sweep"].add_argument("--base")
    subs["shor-sweep"].add_argument("--allow-large", dest="allow_large", action="store_const", const="true")
    subs["modadd-sweep"].add_argument("--limit")
    subs["modadd-sweep"].add_argument("--min-per-band", dest="min_per_band")
    for flag in ("--s", "--a", "--l"):
        subs["adder"].add_argument(flag)
    subs["analytic"].add_argument("--l")
    subs["analytic"].add_argument("--eta")
    subs["analytic"].add_argument("--x0")
    subs["analytic"].add_argument("--window", choices=analytic.WINDOWS)
    subs["fit"].add_argument("--input", required=True)
    p._subparsers_by_name = subs
    return p


def parse_cli(argv) -> RunConfig:
    """Parse ``argv`` and merge built-in defaults, config file and flags (in rising priority)."""
    parser = _parser()
    ns = parser.parse_args(argv)
    values = dict(COMMON)
    values.update(DEFAULTS[ns.command])
    if ns.config:
        values.update(load_config(ns.config, ns.command))
    values.update({k: v for k, v in vars(ns).items() if v is not None and k not in ("command", "config")})
    if ns.command in SWEEPS and not values.get("out"):
        parser._subparsers_by_name[ns.command].error("--out is required")
    if ns.command == "adder":
        missing = [f"--{k}" for k in ("s", "a", "l") if k not in values]
        if missing:
            parser._subparsers_by_name["adder"].error(f"missing {', '.join(missing)}")
    workers = int(values["workers"]) if "workers" in values else None
    cfg = RunConfig(ns.command, values, workers)
    validate(cfg)
    return cfg


_SCHEMA = {
    "seed": int, "realizations": int, "workers": int, "n": lambda v: _ints(v), "base": int,
    "limit": int, "min_per_band": int, "s": int, "a": int, "l": int, "eta": float, "x0": float,
    "sigma": lambda v: _floats(v), "delta_l": lambda v: _ints(v),
    "model": lambda v: [ErrorModel(m) for m in split_list(v)],
    "category": lambda v: [Category(c) for c in split_list(v)],
    "emit_svg": parse_bool, "allow_large": parse_bool,
}


def validate(cfg: RunConfig) -> None:
    """Check every value against its type and range; raises ValueError."""
    for key, conv in _SCHEMA.items():
        if key in cfg.values:
            try:
                conv(cfg.values[key])
            except ValueError:
                raise ValueError(f"invalid value for {key}: {cfg.values[key]!r}") from None
    if int(cfg.values.get("seed", 0)) < 0:
        raise ValueError("seed must be >= 0")
    if int(cfg.values.get("realizations", 1)) < 1:
        raise ValueError("realizations must be >= 1")
    if cfg.workers is not None and cfg.workers < 1:
        raise ValueError("workers must be >= 1")
    if any(x < 0 or not x == x for x in _floats(cfg.values.get("sigma", "0"))):
        raise ValueError("sigma must be >= 0")


# --- value coercion ---------------------------------------------------------

def _floats(v):
    return [float(x) for x in split_list(v)]


def _ints(v):
    return [int(x) for x in split_list(v)]


def _configs(cfg):
    models = [ErrorModel(m) for m in split_list(cfg.get("model", "relative,absolute"))]
    cats = [Category(c) for c in split_list(cfg.get("category", "typed-asym,non-typed,typed-sym"))]
    return tuple((m, c) for m in models for c in cats)


def _scenario(cfg, kind, **kw):
    return experiments.Scenario(
        kind,
        sigmas=tuple(_floats(cfg.get("sigma"))),
        configs=_configs(cfg),
        realizations=int(cfg.get("realizations")),
        master_seed=int(cfg.get("seed")),
        delta_Ls=tuple(_ints(cfg.get("delta_l", "0"))),
        **kw,
    )


# --- commands ----------------------------------------------------------------

def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _finish(cfg, files, started):
    manifest = os.path.join(cfg.out, "manifest.json")
    reporting.write_manifest(manifest, cfg.echo(), files, int(cfg.get("seed")), started, _now())
    for f in files + [manifest]:
        print(f"wrote {f}")


def _summary_rows(records):
    return [(s.model, s.category, s.N, s.L, s.delta_L, s.sigma, s.mean, s.se, s.count)
            for s in experiments.summarize(records)]


SUMMARY_COLUMNS = ("model", "category", "N", "L", "delta_L", "sigma", "mean", "se", "count")


def _curve_svg(records, path, xlabel, title, key=lambda s: s.sigma, xlog2=False):
    curves = {}
    for s in experiments.summarize(records):
        label = (s.model, s.category) if s.delta_L == 0 else (s.model, f"{s.category} dL={s.delta_L}")
        curves.setdefault(label, []).append((key(s), s.mean))
    series = [reporting.series_for_config(m, c, sorted(pts)) for (m, c), pts in curves.items()]
    reporting.emit_svg(series, reporting.Axes(xlabel, "F", xlog2=xlog2, ylim=(0, 1), title=title), path)


def cmd_shor_sweep(cfg):
    started = _now()
    sc = _scenario(cfg, "shor-sweep", Ns=tuple(_ints(cfg.get("n"))), base=int(cfg.get("base")),
                   allow_large=parse_bool(cfg.get("allow_large")))
    for N in sc.Ns:
        for d in sc.delta_Ls:
            n = experiments.CircuitContext(N, sc.base, d).n_qubits
            print(f"N={N} delta_L={d}: {n} qubits, ~{experiments.estimate_memory_bytes(n) / 2**20:.1f} MiB")
    records = experiments.run_sigma_sweep_shor(sc, cfg.workers)
    files = [os.path.join(cfg.out, "records.csv"), os.path.join(cfg.out, "summary.csv")]
    reporting.write_records(records, files[0])
    reporting.write_table(_summary_rows(records), SUMMARY_COLUMNS, files[1])
    if parse_bool(cfg.get("emit_svg")):
        files.append(os.path.join(cfg.out, "fidelity_vs_sigma.svg"))
        _curve_svg(records, files[-1], "sigma", f"Shor N={sc.Ns[0]}")
    _print_gammas(records)
    _finish(cfg, files, started)


def cmd_modadd_sweep(cfg):
    started = _now()
    sc = experiments.semiprime_scenario(
        int(cfg.get("limit")), sigmas=tuple(_floats(cfg.get("sigma"))), configs=_configs(cfg),
        realizations=int(cfg.get("realizations")), master_seed=int(cfg.get("seed")),
        delta_Ls=tuple(_ints(cfg.get("delta_l"))), min_per_band=int(cfg.get("min_per_band")))
    records = experiments.run_semiprime_sweep(sc, cfg.workers)
    files = [os.path.join(cfg.out, "records.csv"), os.path.join(cfg.out, "bands.csv")]
    reporting.write_records(records, files[0])
    rows, series = [], []
    for m, c in sc.configs:
        for d in sc.delta_Ls:
            for sigma in sc.sigmas:
                sel = [r for r in records if (r.model, r.category, r.delta_L, r.sigma) == (m.value, c.value, d, sigma)]
                bands = experiments.band_averages(sel)
                rows += [(m.value, c.value, d, sigma, b.j, b.x, b.mean, b.low, b.high, b.count) for b in bands]
                s = reporting.series_for_config(m.value, c.value, [(b.x, b.mean) for b in bands])
                s.label += f" sigma={sigma:g}" + (f" dL={d}" if d else "")
                series.append(s)
    reporting.write_table(rows, ("model", "category", "delta_L", "sigma", "j", "x", "mean", "min", "max", "count"),
                          files[1])
    for row in rows:
        print(f"{row[0]:9s} {row[1]:10s} dL={row[2]} sigma={row[3]:g} j={row[4]:2d} "
              f"mean={row[6]:.4f} n={row[9]}")
    if parse_bool(cfg.get("emit_svg")):
        files.append(os.path.join(cfg.out, "bands.svg"))
        reporting.emit_svg(series, reporting.Axes("N", "F", xlog2=True, title="modulo addition, s = a = 0"),
                           files[-1])
    _finish(cfg, files, started)


def cmd_extra_qubits(cfg):
    started = _now()
    sc = _scenario(cfg, "extra-qubits", Ns=tuple(_ints(cfg.get("n"))))
    records = experiments.run_extra_qubit_sweep(sc, cfg.workers)
    files = [os.path.join(cfg.out, "records.csv"), os.path.join(cfg.out, "summary.csv"),
             os.path.join(cfg.out, "crude_overlay.csv")]
    reporting.write_records(records, files[0])
    reporting.write_table(_summary_rows(records), SUMMARY_COLUMNS, files[1])
    overlay = []
    for N in sc.Ns:
        for m in dict.fromkeys(m for m, _ in sc.configs):
            for sigma in sc.sigmas:
                for d, f in experiments.crude_overlay(N, sc.delta_Ls, sigma, m, master_seed=sc.master_seed):
                    overlay.append((m.value, N, d, sigma, f))
    reporting.write_table(overlay, ("model", "N", "delta_L", "sigma", "f_ss_crude"), files[2])
    if parse_bool(cfg.get("emit_svg")):
        files.append(os.path.join(cfg.out, "fidelity_vs_L.svg"))
        curves = {}
        for s in experiments.summarize(records):
            curves.setdefault((s.model, s.sigma), []).append((s.L + s.delta_L, s.mean))
        series = []
        for (m, sigma), pts in curves.items():
            se = reporting.series_for_config(m, "typed-sym", sorted(pts))
            se.label = f"{m} sigma={sigma:g}"
            series.append(se)
        reporting.emit_svg(series, reporting.Axes("L", "F", ylim=(0, 1), title="extra qubits"), files[-1])
    _finish(cfg, files, started)


def cmd_r_localize(cfg):
    started = _now()
    sc = experiments.Scenario("r-localize", realizations=int(cfg.get("realizations")),
                              master_seed=int(cfg.get("seed")))
    recs = experiments.run_r_localization(sc, cfg.workers)
    path = os.path.join(cfg.out, "r_localization.csv")
    reporting.write_table([(r.kind, r.L, r.sigma, r.realization, r.offset, r.value) for r in recs],
                          ("kind", "L", "sigma", "realization", "offset", "value"), path)
    files = [path]
    print(f"log-increment slope per L: {experiments.increment_decay_slope(recs):.4f}")
    if parse_bool(cfg.get("emit_svg")):
        prof = {}
        for r in recs:
            if r.kind == "profile":
                prof.setdefault(r.offset, []).append(r.value)
        pts = [(d, sum(v) / len(v)) for d, v in sorted(prof.items())]
        files.append(os.path.join(cfg.out, "r_profile.svg"))
        reporting.emit_svg([reporting.Series("|R|^2 (relative, typed-sym)", pts, line=False)],
                           reporting.Axes("l - l_ideal", "|R|^2", title="R localization"), files[-1])
    _finish(cfg, files, started)


def cmd_adder(cfg):
    s, a, L = int(cfg.get("s")), int(cfg.get("a")), int(cfg.get("l"))
    sigma = _floats(cfg.get("sigma"))
    if len(sigma) != 1:
        raise ValueError("adder takes a single sigma")
    (model, category), *rest = _configs(cfg)
    if rest:
        raise ValueError("adder takes a single model and category")
    spec = NoiseSpec(model, category, sigma[0], int(cfg.get("seed")))
    n = int(cfg.get("realizations"))
    values = [experiments.adder_fidelity_sim(s, a, L, spec.with_realization(r)) for r in range(n)]
    # 12 decimals hide the last-bit drift of the noiseless kernels
    mean = round(sum(values) / n, 12)
    print(f"F = {mean!r}" if n == 1 else f"F = {mean!r} (mean of {n})")


def cmd_analytic(cfg):
    L = int(cfg.get("l"))
    sigma = _floats(cfg.get("sigma"))[0]
    model = ErrorModel(split_list(cfg.get("model"))[0])
    if "eta" in cfg.values:
        eta = float(cfg.get("eta"))
        print(f"eta = {eta:.6g} (given)")
    else:
        eta, r2 = experiments.calibrate_eta(sigma, model, master_seed=int(cfg.get("seed")))
        print(f"eta = {eta:.6g} (fit over L = 4..10, R^2 = {r2:.4f})")
    params = analytic.AnalyticParams(L, sigma, eta, float(cfg.get("x0")))
    window = cfg.get("window")
    print(f"F_adder          = {params.adder_fidelity:.6f}")
    print(f"P_remain         = {analytic.p_remain(params, window):.6f}")
    print(f"F_shor symmetric = {analytic.shor_fidelity_sym(params, window):.6f}")
    print(f"F_shor non-typed = {analytic.shor_fidelity_nontyped(params.adder_fidelity, L):.6f}")


def _print_gammas(records):
    print(f"{'model':9s} {'category':10s} {'N':>4s} {'dL':>3s} {'gamma':>12s} {'rss':>10s}")
    for model, cat, N, dL, gamma, rss in experiments.gamma_table(records):
        g = "n/a" if gamma is None else f"{gamma:.6g}"
        r = "n/a" if rss is None else f"{rss:.3g}"
        print(f"{model:9s} {cat:10s} {N:4d} {dL:3d} {g:>12s} {r:>10s}")


def cmd_fit(cfg):
    _print_gammas(reporting.read_records(cfg.get("input")))


HANDLERS = {
    "shor-sweep": cmd_shor_sweep, "adder": cmd_adder, "modadd-sweep": cmd_modadd_sweep,
    "r-localize": cmd_r_localize, "extra-qubits": cmd_extra_qubits, "analytic": cmd_analytic,
    "fit": cmd_fit,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_cli(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except OSError as exc:
        print(f"symboost: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"symboost: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        if cfg.out:
            os.makedirs(cfg.out, exist_ok=True)
        HANDLERS[cfg.command](cfg)
    except OSError as exc:
        print(f"symboost: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError) as exc:
        print(f"symboost: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
