"""Reference polynomials for the shipped models, transcribed in LaTeX-lite form.

Each entry is ``(prefactor, body)``; ``parse_latex_poly`` reads bodies such as
``-7u^4+42u^2u_{2x}`` with integer or ``\\frac{a}{b}`` coefficients.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Dict, Tuple

from .exactalg import ONE, ZERO, DiffPoly, u

_TOKEN = re.compile(
    r"\s*(?:(?P<frac>\\frac\{(?P<fn>\d+)\}\{(?P<fd>\d+)\})"
    r"|(?P<int>\d+)"
    r"|(?P<jet>u(?:_\{\s*(?P<ord>\d*)\s*(?P<xs>x+)\s*\})?)"
    r"|(?P<pow>\^(?:\{(?P<pb>\d+)\}|(?P<pd>\d)))"
    r"|(?P<sign>[+-])"
    r"|(?P<mul>\*))"
)


def parse_latex_poly(text: str) -> DiffPoly:
    """Parse a sum of monomials in u and its x-derivatives."""
    s = text.replace("−", "-").replace("{-}", "-").replace("\\!", "")
    s = re.sub(r"\\(big|Big|left|right)[()]?", "", s).strip()
    pos = 0
    out = ZERO
    sign = 1
    coef = None
    mono = ONE
    started = False
    last = None

    def flush():
        nonlocal out, sign, coef, mono, started
        if started:
            c = Fraction(sign) * (coef if coef is not None else 1)
            out = out + mono.scale(c)
        sign, coef, mono, started = 1, None, ONE, False

    while pos < len(s):
        m = _TOKEN.match(s, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse {s[pos:pos + 20]!r}")
        pos = m.end()
        if m.group("sign"):
            if started:
                flush()
            if m.group("sign") == "-":
                sign = -sign
            continue
        if m.group("mul"):
            continue
        started = True
        if m.group("frac"):
            c = Fraction(int(m.group("fn")), int(m.group("fd")))
            coef = c if coef is None else coef * c
            last = None
        elif m.group("int"):
            c = Fraction(int(m.group("int")))
            coef = c if coef is None else coef * c
            last = None
        elif m.group("jet"):
            if m.group("xs"):
                k = int(m.group("ord")) if m.group("ord") else len(m.group("xs"))
            else:
                k = 0
            last = u(k)
            mono = mono * last
        elif m.group("pow"):
            if last is None:
                raise ValueError("exponent without a base")
            e = int(m.group("pb") or m.group("pd"))
            mono = mono * last ** (e - 1)
            last = None
    flush()
    return out


def golden(entry: Tuple[Fraction, str]) -> DiffPoly:
    pre, body = entry
    return parse_latex_poly(body).scale(pre)


F = Fraction

# basic resolvents: (model, a) -> slot -> λ-power -> (prefactor, body)
RESOLVENTS: Dict[Tuple[str, int], Dict[str, Dict[int, Tuple[Fraction, str]]]] = {
    ("sk", 1): {
        "b1": {
            -1: (F(-1, 3), "u"),
            -5: (F(1, 243), r"-7u^4+42u^2u_{2x}+21u u_{x}^2-21uu_{4x}-21u_{2x}^2-21u_{x}u_{3x}+3u_{6x}"),
        },
        "p": {
            0: (F(1), "1"),
            -4: (F(1, 81), r"4u^3-9u_{x}^2-18uu_{2x}+6u_{4x}"),
            -8: (F(1, 6561),
                 r"-18 u_{10x}+162 uu_{8x}-522 u^2u_{6x}+798 u^3u_{4x}+1395 u_{4x}^2-3456 u u_{3x}^2"
                 r"-630 u_{2x}u^4+3591 u^2 u_{2x}^2-3252 u_{2x}^3-1260 u^3 u_{x}^2+1134 u_{x}^4"
                 r"+648 u_{x}u_{7x}+1548 u_{2x}u_{6x}+2376 u_{3x}u_{5x}-3132 u u_{x}u_{5x}"
                 r"-6066 u u_{2x}u_{4x}-4428 u_{x}^2u_{4x}+4788 u^2 u_{x}u_{3x}+9324 u u_{x}^2 u_{2x}"
                 r"-14184 u_{x} u_{2x}u_{3x}+35 u^6"),
        },
    },
    ("sk", 2): {
        "b1": {
            3: (F(1), "1"),
            -1: (F(1, 81), r"5u^3-15uu_{2x}+3u_{4x}"),
            -5: (F(1, 6561),
                 r"-9 u_{10x}+99 uu_{8x}-396 u^2u_{6x}+726 u^3u_{4x}+693 u_{4x}^2-2079 uu_{3x}^2"
                 r"-660 u^4 u_{2x}+2772 u^2 u_{2x}^2-1716 u_{2x}^3-990 u^3 u_{x}^2+297 u_{x}^4"
                 r"+297 u_{x}u_{7x}+792 u_{2x}u_{6x}+1188 u_{3x}u_{5x}-1782 uu_{x }u_{5x}"
                 r"-3762 uu_{2x}u_{4x}-1782 u_{x}^2u_{4x}+3366 u^2u_{x}u_{3x}+4950 u u_{x}^2 u_{2x}"
                 r"-6732 u_{x}u_{2x}u_{3x}+44 u^6"),
        },
        "p": {
            0: (F(1, 9), r"2u_{2x}-u^2"),
            -4: (F(1, 729),
                 r"-6 u_{8x}+42 uu_{6x}-96 u^2u_{4x}+117 u_{3x}^2+100 u^3 u_{2x}-288 u u_{2x}^2"
                 r"+150 u^2 u_{x}^2+126 u_{x}u_{5x}+222 u_{2x}u_{4x}-384 uu_{x}u_{3x}"
                 r"-396 u_{x}^2 u_{2x}-8 u^5"),
        },
    },
    ("kk", 1): {
        "p": {
            -1: (F(-2, 3), "u"),
            -3: (F(1, 243), r"6 u_{6x}-84 uu_{4x}+336 u^2 u_{2x}-147 u_{2x}^2+420 u u_{x}^2"
                            r"-210 u_{x}u_{3x}-112 u^4"),
        },
        "b1": {
            0: (F(1), "1"),
            -2: (F(1, 81), r"32u^3-18u_{x}^2-36uu_{2x}+3u_{4x}"),
            -4: (F(1, 6561),
                 r"-9 u_{10x}+216 uu_{8x}-1908 u^2u_{6x}+7728 u^3u_{4x}+2718 u_{4x}^2"
                 r"-15174 u u_{3x}^2-15120 u^4 u_{2x}+34776 u^2 u_{2x}^2-11463 u_{2x}^3"
                 r"-30240 u^3 u_{x}^2+7749 u_{x}^4+864 u_{x}u_{7x}+2493 u_{2x}u_{6x}"
                 r"+4455 u_{3x}u_{5x}-11448 uu_{x}u_{5x}-24714 uu_{2x}u_{4x}-14067 u_{x}^2u_{4x}"
                 r"+46368 u^2u_{x}u_{3x}+77364 u u_{x}^2 u_{2x}-48456 u_{x}u_{2x}u_{3x}+2240 u^6"),
        },
    },
    ("kk", 2): {
        "p": {
            1: (F(1), "1"),
            -1: (F(1, 81), r"40u^3-45u_{x}^2-60uu_{2x}+6u_{4x}"),
            -3: (F(1, 6561),
                 r"150480 u u_{x}^2 u_{2x}-100188 u_{x} u_{2x}u_{3x}-47520 u^3 u_{x}^2"
                 r"+77616 u^2 u_{x}u_{3x}-21384 u u_{x}u_{5x}+19602 u_{x}^4-30888 u_{x}^2u_{4x}"
                 r"+1782 u_{x}u_{7x}-21120 u^4 u_{2x}+56232 u^2 u_{2x}^2-44352 u u_{2x}u_{4x}"
                 r"-22044 u_{2x}^3+4950 u_{2x}u_{6x}+11616 u^3u_{4x}-3168 u^2u_{6x}"
                 r"-27324 u u_{3x}^2+396 u u_{8x}+5445 u_{4x}^2+8910 u_{3x} u_{5x}-18 u_{10x}"
                 r"+2816 u^6"),
        },
        "b1": {
            0: (F(1, 9), r"u_{2x}-4u^2"),
            -2: (F(1, 729),
                 r"-3 u_{8x}+60 uu_{6x}-408 u^2u_{4x}+252 u_{3x}^2+1120 u^3 u_{2x}"
                 r"-1224 u u_{2x}^2+1680 u^2 u_{x}^2+180 u_{x}u_{5x}+402 u_{2x}u_{4x}"
                 r"-1632 uu_{x}u_{3x}-1188 u_{x}^2 u_{2x}-256 u^5"),
        },
    },
}

# tau-structure: (model, a, l) -> Ω_{a,l;1,0}, as printed
OMEGA: Dict[Tuple[str, int, int], Tuple[Fraction, str]] = {
    ("sk", 1, 0): (F(-2, 3), "u"),
    ("sk", 1, 1): (F(2, 243), r"-7u^4+42u^2u_{2x}+21uu_{x}^2-21uu_{4x}-21u_{2x}^2-21u_{x}u_{3x}+3u_{6x}"),
    ("sk", 2, 0): (F(2, 81), r"5u^3-15uu_{2x}+3u_{4x}"),
    ("sk", 2, 1): (F(2, 6561),
                   r"-9 u_{10x}+99 uu_{8x}-396 u^2u_{6x}+726 u^3u_{4x}+693 u_{4x}^2-2079 uu_{3x}^2"
                   r"-660 u^4 u_{2x}+2772 u^2 u_{2x}^2-1716 u_{2x}^3 -990 u^3 u_{x}^2+297 u_{x}^4"
                   r"+297 u_{x}u_{7x}+792 u_{2x}u_{6x}+1188 u_{3x}u_{5x}-1782 uu_{x}u_{5x}"
                   r"-3762 uu_{2x}u_{4x}-1782 u_{x}^2u_{4x}+3366 u^2u_{x}u_{3x}"
                   r"+4950 u u_{x}^2 u_{2x}-6732 u_{x}u_{x}u_{3x}+44 u^6"),
    ("kk", 1, 0): (F(-2, 3), "u"),
    ("kk", 1, 1): (F(1, 243), r"6 u_{6x}-84 uu_{4x}+336 u^2 u_{2x}-147 u_{2x}^2+420 u u_{x}^2"
                              r"-210 u_{x}u_{3x}-112 u^4"),
    ("kk", 2, 0): (F(1, 81), r"40u^3-45u_{x}^2-60uu_{2x}+6u_{4x}"),
    ("kk", 2, 1): (F(1, 6561),
                   r"150480 u u_{x}^2 u_{2x}-100188 u_{x} u_{2x}u_{3x}-47520 u^3 u_{x}^2"
                   r"+77616 u^2 u_{x}u_{3x}-21384 u u_{x}u_{5x}+19602 u_{x}^4-30888 u_{x}^2u_{4x}"
                   r"+1782 u_{x}u_{7x}-21120 u^4 u_{2x}+56232 u^2 u_{2x}^2-44352 u u_{2x}u_{4x}"
                   r"-22044 u_{2x}^3+4950 u_{2x}u_{6x}+11616 u^3u_{4x}-3168 u^2u_{6x}"
                   r"-27324 u_{3x}^2 u+396 u u_{8x}+5445 u_{4x}^2+8910 u_{3x} u_{5x}-18 u_{10x}"
                   r"+2816 u^6"),
}

# The printed SK Ω_{2,1;1,0} has u_x u_x u_3x where the resolvent display it is
# derived from (twice the b1 coefficient at λ^-5) has u_x u_2x u_3x.
OMEGA_ERRATA: Dict[Tuple[str, int, int], Tuple[str, str]] = {
    ("sk", 2, 1): (r"-6732 u_{x}u_{x}u_{3x}", r"-6732 u_{x}u_{2x}u_{3x}"),
}


def omega_golden(model: str, a: int, l: int, corrected: bool = True) -> DiffPoly:
    pre, body = OMEGA[(model, a, l)]
    if corrected and (model, a, l) in OMEGA_ERRATA:
        bad, good = OMEGA_ERRATA[(model, a, l)]
        body = body.replace(bad, good)
    return parse_latex_poly(body).scale(pre)


# flows: (model, time) -> rhs, as printed.  The KK list labels t_7 as "t_6".
FLOWS: Dict[Tuple[str, int], str] = {
    ("sk", 1): r"-u_{x}",
    ("sk", 7): (r"\frac{1}{27} u_{7x}-\frac{7}{27} uu_{5x}+\frac{14}{27} u^2u_{3x}-\frac{28}{81} u^3 u_{x}"
                r"+\frac{7}{27} u_{x}^3-\frac{14}{27} u_{x}u_{4x}-\frac{7}{9} u_{2x}u_{3x}"
                r"+\frac{14}{9} u u_{x}u_{2x}"),
    ("sk", 5): r"\frac{1}{9} u_{5x}-\frac{5}{9} u_{x} u_{2x}-\frac{5}{9} uu_{3x}+\frac{5}{9} u^2 u_{x}",
    ("sk", 11): (r"-\frac{1}{243} u_{11x}+\frac{11}{243} uu_{9x}-\frac{44}{243} u^2u_{7x}"
                 r"+\frac{242}{729} u^3u_{5x}-\frac{220}{729} u^4u_{3x}+\frac{88}{729} u^5 u_{x}"
                 r"-\frac{110}{81} u^2 u_{x}^3+\frac{44}{243} u_{x}u_{8x}+\frac{121}{243} u_{2x}u_{7x}"
                 r"+\frac{220}{243} u_{3x}u_{6x}-\frac{286}{243} uu_{x}u_{6x}+\frac{286}{243} u_{4x}u_{5x}"
                 r"-\frac{616}{243} uu_{2x}u_{5x}-\frac{44}{27} u_{x}^2u_{5x}-\frac{880}{243} uu_{3x}u_{4x}"
                 r"+\frac{616}{243} u^2u_{x}u_{4x}+\frac{110}{27} u^2u_{2x}u_{3x}"
                 r"-\frac{440}{81} u_{2x}^2u_{3x}+\frac{1298}{243} uu_{x}^2u_{3x}-\frac{979}{243} u_{x}u_{3x}^2"
                 r"-\frac{1540}{729} u^3 u_{x} u_{2x}+\frac{572}{81} u u_{x} u_{2x}^2"
                 r"+\frac{682}{243} u_{x}^3 u_{2x}-\frac{1562}{243} u_{x}u_{2x}u_{4x}"),
    ("kk", 1): r"-u_{x}",
    ("kk", 7): (r"\frac{1}{27} u_{7x}-\frac{14}{27} uu_{5x}+\frac{56}{27} u^2u_{3x}-\frac{224}{81} u^3 u_{x}"
                r"+\frac{70}{27} u_{x}^3\!-\frac{49}{27} u_{x}u_{4x}\!-\frac{28}{9} u_{2x}u_{3x}\!"
                r"+\frac{28}{3} u u_{x}u_{2x}"),
    ("kk", 5): r"\frac{1}{9} u_{5x}-\frac{25}{9} u_{x} u_{2x}-\frac{10}{9} uu_{3x}+\frac{20}{9} u^2 u_{x}",
    ("kk", 11): (r"-\frac{1}{243} u_{11x}+\frac{22}{243} uu_{9x}-\frac{176}{243} u^2u_{7x}"
                 r"+\frac{1936}{729} u^3u_{5x}-\frac{3520}{729} u^4u_{3x}+\frac{2816}{729} u^5 u_{x}"
                 r"-\frac{880}{27} u^2 u_{x}^3+\frac{121}{243} u_{x}u_{8x}+\frac{374}{243} u_{2x}u_{7x}"
                 r"+\frac{770}{243} u_{3x}u_{6x}-\frac{1540}{243} uu_{x}u_{6x}+\frac{1100}{243} u_{4x}u_{5x}"
                 r"-\frac{3652}{243} uu_{2x}u_{5x}-\frac{968}{81} u_{x}^2u_{5x}"
                 r"-\frac{5500}{243} uu_{3x}u_{4x}+\frac{6248}{243} u^2u_{x}u_{4x}"
                 r"+\frac{3520}{81} u^2u_{2x}u_{3x}-\frac{3080}{81} u_{2x}^2u_{3x}"
                 r"+\frac{16984}{243} u u_{x}^2u_{3x}-\frac{7084}{243} u_{x} u_{3x}^2"
                 r"-\frac{29920}{729} u^3 u_{x} u_{2x}+\frac{2552}{27} u u_{x} u_{2x}^2"
                 r"+\frac{12716}{243}u_{x}^3 u_{2x}-\frac{11462}{243} u_{x}u_{2x}u_{4x}"),
}

PRINTED_FLOW_LABEL = {("kk", 7): 6}


def flow_golden(model: str, time: int) -> DiffPoly:
    return parse_latex_poly(FLOWS[(model, time)])


def resolvent_golden(model: str, a: int) -> Dict[str, Dict[int, DiffPoly]]:
    return {s: {k: golden(e) for k, e in d.items()} for s, d in RESOLVENTS[(model, a)].items()}
