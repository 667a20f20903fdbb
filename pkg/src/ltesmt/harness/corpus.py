"""Synthetic benchmark families written as ``.lte.smt2`` files."""
from __future__ import annotations

from pathlib import Path

CHAIN_SIZES = (2, 4, 8, 16, 32)

MONOTONE = """\
(set-logic UFLIA)
(declare-const a Int)
(declare-const b Int)
(declare-fun f (Int) Int :extension)
(assert (= (+ a b) 1))
(assert (= (+ (f a) (f b)) 0))
(assert (forall ((x Int) (y Int)) (=> (<= x y) (<= (f x) (f y)))))
(check-sat)
"""

INJECTIVE_PSI = """\
(declare-sort S 0)
(declare-const a S)
(declare-const b S)
(declare-fun f (S) S :extension)
(declare-fun g (S) S :extension)
(declare-psi-rule ((x S)) (g (f x)))
(assert (= (f a) (f b)))
(assert (not (= a b)))
(assert (forall ((x S) (y S)) (=> (= (f x) y) (= (g y) x))))
(check-sat)
"""

INJECTIVE_NO_PSI = INJECTIVE_PSI.replace("(declare-psi-rule ((x S)) (g (f x)))\n", "")


def monotone_chain(n: int) -> str:
    """``n`` increasing integer constants, ``n`` applications of a monotone ``f``."""
    lines = ["(set-logic UFLIA)"]
    lines += [f"(declare-const c{i} Int)" for i in range(1, n + 1)]
    lines.append("(declare-fun f (Int) Int :extension)")
    lines += [f"(assert (< c{i} c{i + 1}))" for i in range(1, n)]
    lines += [f"(assert (<= 0 (f c{i})))" for i in range(1, n + 1)]
    lines.append(f"(assert (>= (f c1) (f c{n})))")
    lines.append("(assert (forall ((x Int) (y Int)) (=> (<= x y) (<= (f x) (f y)))))")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def injective_chain(n: int, sat: bool) -> str:
    """``f(c1) = f(c2) = ... = f(cn)`` with ``f`` injective; unsat unless all ``ci`` may coincide."""
    lines = ["(declare-sort S 0)"]
    lines += [f"(declare-const c{i} S)" for i in range(1, n + 1)]
    lines.append("(declare-fun f (S) S :extension)")
    lines += [f"(assert (= (f c{i}) (f c{i + 1})))" for i in range(1, n)]
    if not sat:
        lines.append(f"(assert (not (= c1 c{n})))")
    lines.append("(assert (forall ((x S) (y S)) (=> (= (f x) (f y)) (= x y))))")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def epr_family(n: int, sat: bool) -> str:
    """Predicate axioms whose variables sit under no function symbol, plus one
    axiom mixing an extension pattern with an EPR-style variable."""
    lines = ["(declare-sort S 0)"]
    lines += [f"(declare-const c{i} S)" for i in range(1, n + 1)]
    lines += ["(declare-fun p (S) Bool)", "(declare-fun q (S) Bool)",
              "(declare-fun f (S) S :extension)"]
    lines.append("(assert (p c1))")
    lines += [f"(assert (= (f c{i}) c{i + 1}))" for i in range(1, n)]
    lines.append("(assert (forall ((x S)) (=> (p x) (q x))))")
    lines.append("(assert (forall ((x S) (y S)) (=> (and (q x) (= (f x) y)) (p y))))")
    lines.append(f"(assert {'(q c' + str(n) + ')' if sat else '(not (q c' + str(n) + '))'})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def idempotent(sat: bool) -> str:
    lines = [
        "(declare-sort S 0)", "(declare-const a S)", "(declare-const b S)",
        "(declare-fun f (S) S :extension)",
        "(assert (= (f a) b))",
        "(assert (not (= (f b) b)))" if not sat else "(assert (not (= a b)))",
        "(assert (forall ((x S)) (= (f (f x)) (f x))))",
        "(check-sat)",
    ]
    return "\n".join(lines) + "\n"


def corpus() -> dict[str, str]:
    """File name to text for every bundled benchmark."""
    files = {
        "monotone_example.lte.smt2": MONOTONE,
        "injective_psi.lte.smt2": INJECTIVE_PSI,
        "injective_nopsi.lte.smt2": INJECTIVE_NO_PSI,
        "idempotent_sat.lte.smt2": idempotent(True),
        "idempotent_unsat.lte.smt2": idempotent(False),
    }
    for n in CHAIN_SIZES:
        files[f"mono_chain_{n:02d}.lte.smt2"] = monotone_chain(n)
    for n in (2, 4, 8):
        files[f"inj_chain_{n:02d}_sat.lte.smt2"] = injective_chain(n, True)
        files[f"inj_chain_{n:02d}_unsat.lte.smt2"] = injective_chain(n, False)
        files[f"epr_{n:02d}_sat.lte.smt2"] = epr_family(n, True)
        files[f"epr_{n:02d}_unsat.lte.smt2"] = epr_family(n, False)
    return files


def write_corpus(directory) -> list[Path]:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, text in sorted(corpus().items()):
        p = out / name
        p.write_text(text, encoding="utf-8")
        paths.append(p)
    return paths
