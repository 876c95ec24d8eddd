"""mr-tau: resolvents, tau-structures and flows from the command line.

Exit codes: 0 success, 1 environment or model-data failure, 2 usage error,
3 verification failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, TextIO, Tuple

from . import goldens
from .kmrealize import ModelValidationError, get_model, model_catalog, pair, validate_model
from .psido import lax_residue, lax_residue_crosscheck, lax_operator, parse_power
from .resolvent import LaxOperator, basic_resolvent
from .series import NotDivisible, OutOfWindow
from .taustruct import (
    CheckReport,
    FlowSet,
    ResolventCache,
    conservation_check,
    derive_flows,
    flow_commutativity,
    flow_for_time,
    gauge_invariance_check,
    hamiltonian_check,
    loop_operator_check,
    npoint_coefficient,
    npoint_rhs,
    omega_multi,
    omega_table,
    prop_g_check,
    symmetry_check,
    tau_flow_compatibility,
    weight_check,
)

EXIT_OK, EXIT_DATA, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2, 3

SUITES = ("resolvent", "goldens", "tau", "loop", "npoint", "hamiltonian", "prop", "lax", "gauge")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    model: str = "sk"
    depth: int = 4
    format: str = "text"
    out: Optional[str] = None
    suite: str = "all"
    threads: int = field(default_factory=lambda: int(os.environ.get("MR_TAU_THREADS", "1") or 1))

    def validate(self) -> None:
        if self.depth < 1:
            raise UsageError("depth must be at least 1")
        if self.format not in ("text", "json"):
            raise UsageError("format must be text or json")
        if self.suite != "all" and self.suite not in SUITES:
            raise UsageError(f"unknown suite {self.suite!r}; choose all or one of {', '.join(SUITES)}")
        names = [m.name for m in model_catalog()]
        if self.model not in names:
            raise UsageError(f"unknown model {self.model!r}; available: {', '.join(names)}")


def _emit(cfg: RunConfig, text: str, data) -> str:
    return json.dumps(data, indent=2, sort_keys=False) + "\n" if cfg.format == "json" else text


# -- commands ------------------------------------------------------------------------


def cmd_models(cfg: RunConfig) -> str:
    rows = []
    data = []
    for m in model_catalog():
        rows.append(f"{m.name:<4} h={m.h} r={m.r} N={m.N} rh={m.rh} exponents={list(m.exponents)}  {m.title}")
        data.append({"name": m.name, "title": m.title, "h": m.h, "r": m.r, "N": m.N,
                     "rh": m.rh, "exponents": list(m.exponents)})
    return _emit(cfg, "\n".join(rows) + "\n", data)


def cmd_dump_model(cfg: RunConfig) -> str:
    d = get_model(cfg.model).dump()
    return json.dumps(d, indent=2) + "\n"


def cmd_resolvent(cfg: RunConfig, a: int) -> str:
    m = get_model(cfg.model)
    try:
        m.exponent_index(a)
    except IndexError as e:
        raise UsageError(str(e)) from None
    R = basic_resolvent(LaxOperator(m), a, cfg.depth)
    lines = [f"# R_{m.exponent_index(a)} of {m.name}, depth {cfg.depth}"]
    for s in m.slot_names:
        ser = R.element.part(s)
        for k, c in ser.items():
            lines.append(f"{s}[{k}] = {c.to_text()}")
        lines.append(f"{s}: known down to lambda^{ser.floor}")
    return _emit(cfg, "\n".join(lines) + "\n", R.to_json())


def cmd_omega(cfg: RunConfig) -> str:
    t = omega_table(get_model(cfg.model), cfg.depth, threads=cfg.threads)
    return _emit(cfg, t.to_text(), t.to_json())


def cmd_flow(cfg: RunConfig, time_: int) -> str:
    m = get_model(cfg.model)
    try:
        idx, rhs = flow_for_time(m, time_)
    except ValueError as e:
        raise UsageError(str(e)) from None
    data = {"model": m.name, "time": time_, "a": idx[0], "k": idx[1], "rhs": rhs.to_json()}
    return _emit(cfg, f"u_t{time_} = {rhs.to_text()}\n", data)


def parse_indices(text: str) -> List[Tuple[int, int]]:
    """'1,0;1,0;2,0' -> [(1, 0), (1, 0), (2, 0)]."""
    try:
        out = []
        for part in text.split(";"):
            a, k = part.split(",")
            out.append((int(a), int(k)))
        return out
    except ValueError:
        raise UsageError(f"bad --indices {text!r}; expected a,k;a,k;...") from None


def cmd_npoint(cfg: RunConfig, indices: Sequence[Tuple[int, int]]) -> str:
    m = get_model(cfg.model)
    if len(indices) not in (2, 3):
        raise UsageError("npoint supports 2 or 3 index pairs")
    for a, k in indices:
        if not 1 <= a <= m.n or k < 0:
            raise UsageError(f"index pair ({a},{k}) out of range")
    cache = ResolventCache(LaxOperator(m))
    F = npoint_rhs(cache, indices, sum(k for _, k in indices))
    val = npoint_coefficient(F, m, indices)
    label = ";".join(f"{a},{k}" for a, k in indices)
    data = {"model": m.name, "indices": [list(i) for i in indices], "value": val.to_json()}
    return _emit(cfg, f"Omega[{label}] = {val.to_text()}\n", data)


def cmd_psido_res(cfg: RunConfig, power: str) -> str:
    try:
        p, n = parse_power(power)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad --power {power!r}") from None
    try:
        _, order, _ = lax_operator(cfg.model)
    except KeyError as e:
        raise UsageError(str(e)) from None
    if n not in (1, order) or p <= 0:
        raise UsageError(f"power must be a positive multiple of 1/{order}")
    if n == 1:
        p *= order
    res = lax_residue(cfg.model, p)
    data = {"model": cfg.model, "power": f"{p}/{order}", "residue": res.to_json()}
    return _emit(cfg, f"Res L^({p}/{order}) = {res.to_text()}\n", data)


# -- verification ---------------------------------------------------------------------


def _goldens_report(name: str) -> CheckReport:
    rep = CheckReport(f"printed displays {name}", True)
    m = get_model(name)
    if not any(k[0] == name for k in goldens.RESOLVENTS):
        rep.fail("no printed displays for this model")
        return rep
    L = LaxOperator(m)
    for a in range(1, m.n + 1):
        R = basic_resolvent(L, a, 3)
        for s, d in goldens.resolvent_golden(name, a).items():
            for k, v in d.items():
                rep.checked += 1
                if R.element.part(s).coefficient(k) != v:
                    rep.fail(f"R_{m.exponent_index(a)} slot {s} at lambda^{k}")
    t = omega_table(m, 1)
    for a in range(1, m.n + 1):
        for l in range(2):
            rep.checked += 1
            if t.get(a, l, 1, 0) != goldens.omega_golden(name, a, l):
                rep.fail(f"Omega[{a},{l};1,0]")
    for (mn, time_), _ in goldens.FLOWS.items():
        if mn != name:
            continue
        rep.checked += 1
        if flow_for_time(m, time_)[1] != goldens.flow_golden(name, time_):
            rep.fail(f"flow t_{time_}")
    return rep


def _resolvent_report(name: str, depth: int) -> CheckReport:
    """[ℒ, R_a] = 0, (R_a|R_b) = δ h λ^N and (∂_λR_a|R_b) = δ (m_a N/r) λ^{N-1}."""
    m = get_model(name)
    rep = CheckReport(f"resolvent identities {name}", True)
    L = LaxOperator(m)
    Rs = {a: basic_resolvent(L, a, depth) for a in range(1, m.n + 1)}
    for a, R in Rs.items():
        rep.checked += 1
        if not L.commutator(R.element).is_zero():
            rep.fail(f"[L, R_{a}] != 0")
    for a in Rs:
        for b in Rs:
            dual = a + b == m.n + 1
            want = {m.N: Fraction(m.h)} if dual else {}
            rep.checked += 1
            if _constant_items(pair(Rs[a].element, Rs[b].element)) != want:
                rep.fail(f"pair(R_{a}, R_{b})")
            want = {m.N - 1: Fraction(m.exponent_index(a) * m.N, m.r)} if dual else {}
            rep.checked += 1
            if _constant_items(pair(Rs[a].element.d_lambda(), Rs[b].element)) != want:
                rep.fail(f"pair(d R_{a}, R_{b})")
    return rep


def _constant_items(p) -> Optional[Dict[int, Fraction]]:
    out = {}
    for k, c in p.items():
        if c.jets():
            return None
        out[k] = c.constant_term()
    return out


def run_suite(name: str, suite: str, depth: int) -> List[CheckReport]:
    m = get_model(name)
    wanted = SUITES if suite == "all" else (suite,)
    reps: List[CheckReport] = []
    cache = ResolventCache(LaxOperator(m))
    table = None
    flows: Optional[FlowSet] = None

    def tf():
        nonlocal table, flows
        if table is None:
            table = omega_table(cache, depth)
            flows = derive_flows(table)
        return table, flows

    for s in wanted:
        if s == "resolvent":
            reps.append(_resolvent_report(name, depth))
        elif s == "goldens":
            if any(k[0] == name for k in goldens.RESOLVENTS):
                reps.append(_goldens_report(name))
        elif s == "tau":
            t, f = tf()
            reps += [symmetry_check(t), weight_check(t), tau_flow_compatibility(t, f),
                     conservation_check(t, f), flow_commutativity(f)]
        elif s == "loop":
            _, f = tf()
            for a in range(1, m.n + 1):
                for b in range(1, m.n + 1):
                    reps.append(loop_operator_check(cache, a, b, f, min(depth, 2)))
        elif s == "npoint":
            t, f = tf()
            rep = CheckReport(f"n-point {name}", True)
            for a in range(1, m.n + 1):
                for b in range(1, m.n + 1):
                    F = npoint_rhs(cache, [(a, 0), (b, 0)], depth)
                    for l in range(depth + 1):
                        for k in range(depth + 1 - l):
                            rep.checked += 1
                            if npoint_coefficient(F, m, [(a, l), (b, k)]) != t.get(a, l, b, k):
                                rep.fail(f"N=2 ({a},{l}),({b},{k})")
            for idx in ([(1, 0)] * 3, [(1, 0), (1, 0), (m.n, 0)]):
                F = npoint_rhs(cache, idx, 0)
                rep.checked += 1
                if npoint_coefficient(F, m, idx) != omega_multi(t, f, idx):
                    rep.fail(f"N=3 {idx}")
            reps.append(rep)
        elif s == "hamiltonian":
            t, f = tf()
            reps.append(hamiltonian_check(t, f))
        elif s == "prop":
            reps.append(prop_g_check(cache, min(depth, 2)))
        elif s == "lax":
            t, _ = tf()
            try:
                reps.append(lax_residue_crosscheck(m, t))
            except KeyError:
                pass
        elif s == "gauge":
            reps.append(gauge_invariance_check(m, Fraction(-3, 7), 1))
    return reps


def cmd_verify(cfg: RunConfig, stream: TextIO) -> int:
    validate_model(get_model(cfg.model))
    ok = True
    for rep in run_suite(cfg.model, cfg.suite, cfg.depth):
        stream.write(str(rep) + "\n")
        ok = ok and rep.ok
    stream.write(("ALL PASS" if ok else "FAILURES") + "\n")
    return EXIT_OK if ok else EXIT_VERIFY


# -- entry point ----------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mr-tau", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, depth=True):
        sp.add_argument("--model", default="sk")
        if depth:
            sp.add_argument("--depth", type=int, default=4)
        sp.add_argument("--format", choices=("text", "json"), default="text")
        sp.add_argument("--out")
        return sp

    common(sub.add_parser("models", help="list shipped models"), depth=False)
    common(sub.add_parser("dump-model", help="print all stored model data"), depth=False)
    sp = common(sub.add_parser("resolvent", help="basic resolvent R_{m_a}"))
    sp.add_argument("--a", type=int, required=True, help="1-based exponent index")
    common(sub.add_parser("omega", help="tau-structure table"))
    sp = common(sub.add_parser("flow", help="flow right-hand side"), depth=False)
    sp.add_argument("--time", type=int, required=True)
    sp = common(sub.add_parser("npoint", help="N-point coefficient, N = 2 or 3"), depth=False)
    sp.add_argument("--indices", required=True, help="a,k;a,k[;a,k]")
    sp = common(sub.add_parser("psido-res", help="residue of a fractional power of L"), depth=False)
    sp.add_argument("--power", required=True, help="e.g. 5/3")
    sp = common(sub.add_parser("verify", help="run invariant suites"))
    sp.add_argument("--suite", default="all")
    return p


def main(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    cfg = RunConfig(model=args.model, depth=getattr(args, "depth", 4), format=args.format,
                    out=args.out, suite=getattr(args, "suite", "all"))
    try:
        cfg.validate()
        if args.command == "verify":
            if cfg.out:
                with open(cfg.out, "w") as fh:
                    return cmd_verify(cfg, fh)
            return cmd_verify(cfg, stdout)
        if args.command == "models":
            text = cmd_models(cfg)
        elif args.command == "dump-model":
            text = cmd_dump_model(cfg)
        elif args.command == "resolvent":
            text = cmd_resolvent(cfg, args.a)
        elif args.command == "omega":
            text = cmd_omega(cfg)
        elif args.command == "flow":
            text = cmd_flow(cfg, args.time)
        elif args.command == "npoint":
            text = cmd_npoint(cfg, parse_indices(args.indices))
        else:
            text = cmd_psido_res(cfg, args.power)
    except UsageError as e:
        sys.stderr.write(f"mr-tau: error: {e}\n")
        return EXIT_USAGE
    except (ModelValidationError, OSError) as e:
        sys.stderr.write(f"mr-tau: data error: {e}\n")
        return EXIT_DATA
    except (NotDivisible, OutOfWindow, ArithmeticError) as e:
        sys.stderr.write(f"mr-tau: computation failed: {e}\n")
        return EXIT_DATA
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
