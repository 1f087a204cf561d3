"""ses-forge command line.

Exit codes: 0 success, 2 contract violation, 3 numerical failure.
Output is CSV (default) or JSON, to stdout or ``--out``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import compiler, hhl, numerics, simulator
from .device import EPS0_HZ, GMAX_HZ, DeviceGraph, total_duration
from .errors import ContractViolation, InvalidInput, NumericalFailure

CNOT_COLUMNS = ("n", "eta_mhz", "tgate_ns", "omega_mhz", "g_mhz", "e_gate")
HHL_SUMMARY_COLUMNS = ("n", "m", "mean_e_algorithm", "stderr", "mean_p_postselect")


@dataclass(frozen=True)
class RunConfig:
    command: str
    n: tuple[int, ...]
    m: int
    trials: int
    seed: int | None
    gmax_hz: float
    eps0_hz: float
    eta_hz: tuple[float, ...] | None
    tgate_ns: tuple[float, ...] | None
    level: str | None
    out: str | None
    fmt: str

    def __post_init__(self):
        for name in ("gmax_hz", "eps0_hz"):
            if getattr(self, name) <= 0:
                raise InvalidInput(f"--{name.replace('_', '-')} must be positive")
        for name in ("eta_hz", "tgate_ns"):
            vals = getattr(self, name)
            if vals is not None and any(v <= 0 for v in vals):
                raise InvalidInput(f"--{name.replace('_', '-')} must be positive")
        if self.trials < 1:
            raise InvalidInput("--trials must be >= 1")
        if any(k < 1 for k in self.n):
            raise InvalidInput("--n must be >= 1")


def _int_list(text: str) -> tuple[int, ...]:
    """'4', '2,3,4' or '2-10'."""
    out = []
    for part in text.split(","):
        if "-" in part:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return tuple(out)


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def _emit(rows: list[dict], columns, cfg: RunConfig) -> None:
    if cfg.fmt == "json":
        text = json.dumps([{c: r[c] for c in columns} for r in rows], indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in columns])
        text = buf.getvalue()
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _need_seed(cfg: RunConfig) -> int:
    if cfg.seed is None:
        raise InvalidInput(f"{cfg.command} is stochastic; --seed is required")
    return cfg.seed


def _read_json(path: str):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def _complex_matrix(data) -> np.ndarray:
    a = np.array(data, dtype=float)
    if a.ndim == 3 and a.shape[-1] == 2:
        return a[..., 0] + 1j * a[..., 1]
    return a.astype(complex)


def cmd_aba_check(cfg: RunConfig, args) -> int:
    rows = []
    if args.input:
        V = numerics.check_unitary(_complex_matrix(_read_json(args.input)))
        res = numerics.aba_decompose(V)
        rows.append({"n": V.shape[0], "trials": 1, "max_residual": res.residual})
    else:
        seed = _need_seed(cfg)
        for n in cfg.n:
            rng = np.random.default_rng([seed, n])
            worst = 0.0
            for _ in range(cfg.trials):
                worst = max(worst, numerics.aba_decompose(numerics.haar_unitary(n, rng)).residual)
            rows.append({"n": n, "trials": cfg.trials, "max_residual": worst})
    _emit(rows, ("n", "trials", "max_residual"), cfg)
    bad = [r for r in rows if r["max_residual"] > 1e-9]
    if bad:
        raise NumericalFailure(f"ABA residual above 1e-9 for n={bad[0]['n']}")
    return 0


def cmd_compile(cfg: RunConfig, args) -> int:
    if not args.input:
        raise InvalidInput("compile needs --input with a real symmetric generator")
    A = numerics.check_real_symmetric(np.array(_read_json(args.input), dtype=float))
    graph = DeviceGraph.with_ancillas(A.shape[0], 0, cfg.eps0_hz, cfg.gmax_hz)
    sf = compiler.standard_form(A, cfg.gmax_hz)
    sched = compiler.schedule_sym_unitary(A, -1, graph)
    text = sched.to_json(indent=2) + "\n"
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    print(f"theta = {sf.theta:.6g}  c = {sf.c:.6g}  t = {sf.t * 1e9:.3f} ns", file=sys.stderr)
    return 0


def cmd_cu_verify(cfg: RunConfig, args) -> int:
    seed = _need_seed(cfg)
    level = {"abstract": "abstract", "device": "two_level", None: "abstract"}.get(cfg.level)
    if level is None:
        raise InvalidInput("cu-verify supports --level abstract or device")
    rows = []
    for n in cfg.n:
        graph = DeviceGraph.with_ancillas(n, 1, cfg.eps0_hz, cfg.gmax_hz)
        rng = np.random.default_rng([seed, n])
        for trial in range(cfg.trials):
            U = numerics.haar_unitary(n, rng)
            psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            psi /= np.linalg.norm(psi)
            ab = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            ab /= np.linalg.norm(ab)
            f = simulator.run_protocol_check(
                U, psi, ab[0], ab[1], graph, level, counter_rotating=args.counter_rotating, cnot_mode=args.cnot
            )
            rows.append({"n": n, "trial": trial, "fidelity": f})
    _emit(rows, ("n", "trial", "fidelity"), cfg)
    return 0


def cmd_cnot_bench(cfg: RunConfig, args) -> int:
    if cfg.level not in (None, "qutrit", "device"):
        raise InvalidInput("cnot-bench supports --level qutrit or device")
    levels = 2 if cfg.level == "device" else 3
    if args.n is None and cfg.eta_hz is None and cfg.tgate_ns is None:
        grid = [(n, eta, t * 1e9) for n, eta, t, _ in simulator.REFERENCE_CNOT_ROWS]
    else:
        grid = [
            (n, eta, t)
            for n in cfg.n
            for eta in (cfg.eta_hz or (300e6,))
            for t in (cfg.tgate_ns or (30.0,))
        ]
    rows = []
    for n, eta, t_ns in grid:
        params = compiler.EntanglerParams.from_timing(n, t_ns * 1e-9, cfg.eps0_hz, args.lb, eta)
        rep = simulator.cnot_gate_error(params, levels=levels)
        rows.append(
            {
                "n": n,
                "eta_mhz": eta / 1e6,
                "tgate_ns": t_ns,
                "omega_mhz": params.omega / 1e6,
                "g_mhz": params.g / 1e6,
                "e_gate": rep.e_gate,
            }
        )
    _emit(rows, CNOT_COLUMNS, cfg)
    for text, ok in simulator.table_orderings(rows):
        print(f"{'ok ' if ok else 'BAD'} {text}", file=sys.stderr)
    return 0


def cmd_hhl(cfg: RunConfig, args) -> int:
    level = {None: "abstract", "abstract": "abstract", "device": "two_level_device"}.get(cfg.level)
    if level is None:
        raise InvalidInput("hhl supports --level abstract or device")
    if args.schedule_only:
        level = "device_timing"
    if args.input:
        inst = hhl.HHLInstance.from_dict(_read_json(args.input))
        if level == "device_timing":
            res = hhl.run_hhl(inst)
            t = total_duration(hhl.compile_hhl_schedule(inst, cnot_mode=args.cnot))
        else:
            res = hhl.run_hhl(inst, level, cnot_mode=args.cnot)
            t = res.schedule_time
        row = {
            "n": inst.n,
            "m": inst.m,
            "trial": 0,
            "e_algorithm": res.e_algorithm,
            "p_postselect": res.p_postselect,
            "schedule_time_s": t,
        }
        _emit([row], hhl.TrialRow.COLUMNS, cfg)
        return 0
    seed = _need_seed(cfg)
    reject_m = args.reject_m
    rows = hhl.hhl_trials(cfg.n, cfg.m, cfg.trials, seed, level, reject_m, args.cnot)
    if args.summary:
        out = [
            {
                "n": r.n,
                "m": r.m,
                "mean_e_algorithm": r.mean_e_algorithm,
                "stderr": r.stderr,
                "mean_p_postselect": r.mean_p_postselect,
            }
            for r in hhl.summarize(rows)
        ]
        _emit(out, HHL_SUMMARY_COLUMNS, cfg)
    else:
        _emit([r.__dict__ for r in rows], hhl.TrialRow.COLUMNS, cfg)
    return 0


COMMANDS = {
    "aba-check": cmd_aba_check,
    "compile": cmd_compile,
    "cu-verify": cmd_cu_verify,
    "cnot-bench": cmd_cnot_bench,
    "hhl": cmd_hhl,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=_int_list, default=None, help="size(s): 4, 2,3,4 or 2-10")
    common.add_argument("--m", type=int, default=2, help="phase register qubits")
    common.add_argument("--trials", type=int, default=1)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--gmax-hz", type=float, default=GMAX_HZ)
    common.add_argument("--eps0-hz", type=float, default=EPS0_HZ)
    common.add_argument("--eta-hz", type=_float_list, default=None)
    common.add_argument("--tgate-ns", type=_float_list, default=None)
    common.add_argument("--level", choices=("abstract", "device", "qutrit"), default=None)
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("--input", default=None, help="JSON input file")

    p = argparse.ArgumentParser(prog="ses-forge", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("aba-check", parents=[common], help="ABA reconstruction residuals")
    sub.add_parser("compile", parents=[common], help="standard-form schedule for exp(-iA)")
    cu = sub.add_parser("cu-verify", parents=[common], help="controlled-unitary protocol fidelities")
    cu.add_argument("--counter-rotating", action="store_true", help="keep counter-rotating terms (device level)")
    cu.add_argument("--cnot", choices=("ideal", "pulsed"), default="ideal")
    cb = sub.add_parser("cnot-bench", parents=[common], help="multi-target CNOT gate error (reference rows by default)")
    cb.add_argument("--lb", type=int, default=2, help="Rabi cycles l_b")
    h = sub.add_parser("hhl", parents=[common], help="HHL run or sweep")
    h.add_argument("--summary", action="store_true", help="per-n means instead of per-trial rows")
    h.add_argument("--cnot", choices=("ideal", "pulsed"), default="ideal")
    h.add_argument("--reject-m", type=int, default=None, help="phase-bin width used to reject instances")
    h.add_argument("--schedule-only", action="store_true", help="abstract run plus compiled device schedule time")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        n = args.n
        if n is None:
            n = (4,) if args.command != "hhl" else (2,)
        cfg = RunConfig(
            args.command,
            n,
            args.m,
            args.trials,
            args.seed,
            args.gmax_hz,
            args.eps0_hz,
            args.eta_hz,
            args.tgate_ns,
            args.level,
            args.out,
            args.fmt,
        )
        return COMMANDS[args.command](cfg, args)
    except ContractViolation as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    except NumericalFailure as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
