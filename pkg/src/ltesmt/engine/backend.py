"""External SMT solver process used for ground checks with arithmetic."""
from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
from dataclasses import dataclass
from typing import Optional, Sequence

from ..core import Term, to_text
from ..frontend import Atom, ParseError, SList, read_sexprs


class BackendError(Exception):
    pass


@dataclass
class BackendResult:
    status: str                       # sat | unsat | unknown
    values: dict[Term, bool]
    output: str = ""


@dataclass
class ExternalBackend:
    """Runs ``command`` once per check.

    The command is split shell-style.  A ``{file}`` placeholder receives the
    path of a temporary script; otherwise the script is piped to stdin.
    The first output line must be ``sat``, ``unsat`` or ``unknown``.
    """

    command: str
    timeout: float = 30.0

    def argv(self, path: Optional[str] = None) -> list[str]:
        parts = shlex.split(self.command)
        if not parts:
            raise BackendError("empty backend command")
        if path is not None:
            parts = [p.replace("{file}", path) for p in parts]
        return parts

    @property
    def uses_file(self) -> bool:
        return "{file}" in self.command

    def run(self, script: str, timeout: Optional[float] = None) -> str:
        timeout = self.timeout if timeout is None else timeout
        path = None
        try:
            if self.uses_file:
                fd, path = tempfile.mkstemp(suffix=".smt2")
                with os.fdopen(fd, "w", encoding="utf-8") as fh:
                    fh.write(script)
                proc = subprocess.run(self.argv(path), capture_output=True, text=True, timeout=timeout)
            else:
                proc = subprocess.run(self.argv(), input=script, capture_output=True, text=True,
                                      timeout=timeout)
        except FileNotFoundError as exc:
            raise BackendError(f"backend not found: {exc.filename}") from None
        except subprocess.TimeoutExpired:
            raise BackendError(f"backend timed out after {timeout:g}s") from None
        finally:
            if path is not None:
                os.unlink(path)
        return proc.stdout

    def check(self, script: str, atoms: Sequence[Term] = (),
              timeout: Optional[float] = None) -> BackendResult:
        """Check ``script`` (without ``check-sat``); on sat, read atom values."""
        text = script + "(check-sat)\n"
        if atoms:
            text += "(get-value (" + " ".join(to_text(a) for a in atoms) + "))\n"
        out = self.run(text, timeout)
        lines = out.strip().splitlines()
        status = lines[0].strip() if lines else ""
        if status not in ("sat", "unsat", "unknown"):
            raise BackendError(f"unexpected backend output: {out.strip()[:200]!r}")
        values: dict[Term, bool] = {}
        if status == "sat" and atoms:
            values = _read_values("\n".join(lines[1:]), atoms)
        return BackendResult(status, values, out)


def _read_values(text: str, atoms: Sequence[Term]) -> dict[Term, bool]:
    try:
        exprs = read_sexprs(text)
    except ParseError as exc:
        raise BackendError(f"cannot read get-value answer: {exc}") from None
    if len(exprs) != 1 or not isinstance(exprs[0], SList) or len(exprs[0]) != len(atoms):
        raise BackendError(f"malformed get-value answer: {text.strip()[:200]!r}")
    values = {}
    for atom, pair in zip(atoms, exprs[0]):
        v = pair[1] if isinstance(pair, SList) and len(pair) == 2 else None
        if not isinstance(v, Atom) or v not in ("true", "false"):
            raise BackendError(f"non-Boolean value for {to_text(atom)}")
        values[atom] = v == "true"
    return values
