#!/usr/bin/env python3
"""Print the computed resolvent, tau-structure and flow displays next to the printed ones."""
import argparse

from mrtau import goldens
from mrtau.kmrealize import get_model
from mrtau.resolvent import LaxOperator, basic_resolvent
from mrtau.taustruct import derive_flows, omega_table


def report(name: str) -> bool:
    m = get_model(name)
    L = LaxOperator(m)
    ok = True

    def line(label, got, want):
        nonlocal ok
        same = got == want
        ok = ok and same
        print(f"  {'ok  ' if same else 'DIFF'} {label}: {got.to_text()}")

    print(f"== {m.title}")
    for a in range(1, m.n + 1):
        R = basic_resolvent(L, a, 3).element
        for slot, d in goldens.resolvent_golden(name, a).items():
            for k, want in sorted(d.items(), reverse=True):
                line(f"R_{m.exponent_index(a)} {slot}[λ^{k}]", R.part(slot).coefficient(k), want)
    t = omega_table(L, 2)
    for a in (1, 2):
        for l in (0, 1):
            line(f"Ω_{{{a},{l};1,0}}", t.get(a, l, 1, 0), goldens.omega_golden(name, a, l))
    f = derive_flows(t)
    for time_ in (1, 5, 7, 11):
        printed = goldens.PRINTED_FLOW_LABEL.get((name, time_), time_)
        tag = f" (printed as t_{printed})" if printed != time_ else ""
        line(f"u_t{time_}{tag}", f.by_time(time_), goldens.flow_golden(name, time_))
    return ok


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("models", nargs="*", default=["sk", "kk"])
    args = p.parse_args()
    results = [report(n) for n in args.models]
    return 0 if all(results) else 1


if __name__ == "__main__":
    raise SystemExit(main())
