"""Backtrackable congruence closure with a disequality store.

Union-find without path compression (union by size, ties toward the lower
term id) so that every mutation can be undone exactly from the trail.
Terms whose head carries an interpreted value (numerals, ``true``/``false``)
are pairwise distinct: merging two of them is a conflict.
"""
from __future__ import annotations

from typing import Iterator, Optional

from .core import Symbol, Term


class EGraphError(Exception):
    pass


class UnregisteredTerm(EGraphError, KeyError):
    pass


class EGraph:
    def __init__(self) -> None:
        self.terms: dict[int, Term] = {}
        self._parent: dict[int, int] = {}
        self._size: dict[int, int] = {}
        self._next: dict[int, int] = {}     # circular member lists
        self._uses: dict[int, list[int]] = {}
        self._table: dict[tuple, int] = {}
        self._apps: dict[Symbol, list[int]] = {}
        self._value: dict[int, int] = {}    # root -> id of its value term
        self._diseqs: list[tuple[int, int]] = []
        self._trail: list[tuple] = []
        self._marks: list[int] = []
        self.inconsistent = False
        # bumped on every mutation; lets callers cache per-state results
        self.generation = 0

    # -- queries ----------------------------------------------------------

    def _find(self, x: int) -> int:
        parent = self._parent
        while True:
            p = parent[x]
            if p == x:
                return x
            x = p

    def _id(self, t: Term) -> int:
        if t.id not in self._parent:
            raise UnregisteredTerm(f"term {t!r} is not registered")
        return t.id

    def __contains__(self, t: Term) -> bool:
        return t.id in self._parent

    def find(self, t: Term) -> Term:
        return self.terms[self._find(self._id(t))]

    def find_id(self, t: Term) -> int:
        return self._find(self._id(t))

    def are_equal(self, t: Term, u: Term) -> bool:
        return self._find(self._id(t)) == self._find(self._id(u))

    def are_disequal(self, t: Term, u: Term) -> bool:
        """Entailed disequality: stored pair or distinct interpreted values."""
        a, b = self._find(self._id(t)), self._find(self._id(u))
        if a == b:
            return False
        va, vb = self._value.get(a), self._value.get(b)
        if va is not None and vb is not None:
            return True
        find = self._find
        for x, y in self._diseqs:
            rx, ry = find(x), find(y)
            if (rx == a and ry == b) or (rx == b and ry == a):
                return True
        return False

    def class_reps(self) -> list[Term]:
        return [self.terms[i] for i in sorted(self._parent) if self._parent[i] == i]

    def terms_in_class(self, t: Term) -> list[Term]:
        start = self._id(t)
        out = [start]
        x = self._next[start]
        while x != start:
            out.append(x)
            x = self._next[x]
        return [self.terms[i] for i in sorted(out)]

    def apps_of(self, f: Symbol) -> list[Term]:
        return [self.terms[i] for i in self._apps.get(f, ())]

    def registered(self) -> list[Term]:
        return [self.terms[i] for i in sorted(self._parent)]

    def diseqs(self) -> list[tuple[Term, Term]]:
        return [(self.terms[a], self.terms[b]) for a, b in self._diseqs]

    # -- registration -----------------------------------------------------

    def register(self, t: Term) -> bool:
        """Add ``t`` and its subterms; returns consistency."""
        if t.id in self._parent:
            return not self.inconsistent
        if not t.ground:
            raise EGraphError(f"cannot register non-ground term {t!r}")
        pending: list[tuple[int, int]] = []
        self._register(t, pending)
        if pending:
            self._merge_all(pending)
        return not self.inconsistent

    def _register(self, t: Term, pending: list) -> None:
        for a in t.args:
            if a.id not in self._parent:
                self._register(a, pending)
        i = t.id
        self.terms[i] = t
        self._parent[i] = i
        self._size[i] = 1
        self._next[i] = i
        self._uses[i] = []
        self._apps.setdefault(t.head, []).append(i)
        if t.head.value is not None:
            self._value[i] = i
        self._trail.append(("reg", i))
        self.generation += 1
        if t.args:
            sig = (t.head, tuple(self._find(a.id) for a in t.args))
            other = self._table.get(sig)
            if other is None:
                self._set_table(sig, i)
            else:
                pending.append((i, other))
            seen = set()
            for a in t.args:
                r = self._find(a.id)
                if r not in seen:
                    seen.add(r)
                    self._trail.append(("uses", r, len(self._uses[r])))
                    self._uses[r].append(i)

    def _set_table(self, sig: tuple, i: int) -> None:
        self._trail.append(("table", sig, self._table.get(sig)))
        self._table[sig] = i

    # -- assertions -------------------------------------------------------

    def assert_eq(self, t: Term, u: Term) -> bool:
        """Merge the classes of ``t`` and ``u``; ``False`` signals a conflict."""
        a, b = self._id(t), self._id(u)
        self._merge_all([(a, b)])
        return not self.inconsistent

    def assert_diseq(self, t: Term, u: Term) -> bool:
        a, b = self._id(t), self._id(u)
        self._trail.append(("diseq",))
        self._diseqs.append((a, b))
        self.generation += 1
        if self._find(a) == self._find(b):
            self._set_inconsistent()
        return not self.inconsistent

    def _set_inconsistent(self) -> None:
        if not self.inconsistent:
            self._trail.append(("bad",))
            self.inconsistent = True

    def _merge_all(self, pending: list[tuple[int, int]]) -> None:
        find = self._find
        size = self._size
        merged = False
        while pending:
            x, y = pending.pop()
            rx, ry = find(x), find(y)
            if rx == ry:
                continue
            if size[rx] > size[ry] or (size[rx] == size[ry] and rx < ry):
                root, child = rx, ry
            else:
                root, child = ry, rx
            vr, vc = self._value.get(root), self._value.get(child)
            if vr is not None and vc is not None:
                if self.terms[vr].head.value != self.terms[vc].head.value:
                    self._set_inconsistent()
            self._trail.append(("union", root, child, len(self._uses[root]), vr is None and vc is not None))
            self._parent[child] = root
            size[root] += size[child]
            self._next[root], self._next[child] = self._next[child], self._next[root]
            if vr is None and vc is not None:
                self._value[root] = vc
            uses_root = self._uses[root]
            for p in self._uses[child]:
                term = self.terms[p]
                sig = (term.head, tuple(find(a.id) for a in term.args))
                q = self._table.get(sig)
                if q is None:
                    self._set_table(sig, p)
                elif find(q) != find(p):
                    pending.append((p, q))
            uses_root.extend(self._uses[child])
            merged = True
        if merged:
            self.generation += 1
            for a, b in self._diseqs:
                if find(a) == find(b):
                    self._set_inconsistent()
                    break

    # -- backtracking -----------------------------------------------------

    def push(self) -> None:
        self._marks.append(len(self._trail))

    def pop(self, n: int = 1) -> None:
        for _ in range(n):
            if not self._marks:
                raise EGraphError("pop without matching push")
            self._undo_to(self._marks.pop())
        self.generation += 1

    @property
    def level(self) -> int:
        return len(self._marks)

    def _undo_to(self, mark: int) -> None:
        trail = self._trail
        while len(trail) > mark:
            entry = trail.pop()
            kind = entry[0]
            if kind == "union":
                _, root, child, uses_len, took_value = entry
                self._parent[child] = child
                self._size[root] -= self._size[child]
                self._next[root], self._next[child] = self._next[child], self._next[root]
                del self._uses[root][uses_len:]
                if took_value:
                    del self._value[root]
            elif kind == "table":
                _, sig, old = entry
                if old is None:
                    del self._table[sig]
                else:
                    self._table[sig] = old
            elif kind == "uses":
                _, r, n = entry
                del self._uses[r][n:]
            elif kind == "diseq":
                self._diseqs.pop()
            elif kind == "bad":
                self.inconsistent = False
            elif kind == "reg":
                i = entry[1]
                t = self.terms.pop(i)
                del self._parent[i], self._size[i], self._next[i], self._uses[i]
                self._value.pop(i, None)
                apps = self._apps[t.head]
                apps.pop()
                if not apps:
                    del self._apps[t.head]

    # -- inspection -------------------------------------------------------

    def snapshot(self) -> tuple:
        """Complete internal state, for exact-restore tests."""
        return (
            tuple(sorted(self._parent.items())),
            tuple(sorted(self._size.items())),
            tuple(sorted(self._next.items())),
            tuple(sorted((k, tuple(v)) for k, v in self._uses.items())),
            tuple(sorted(((s[0].name, id(s[0]), s[1]), v) for s, v in self._table.items())),
            tuple(sorted((id(k), tuple(v)) for k, v in self._apps.items())),
            tuple(sorted(self._value.items())),
            tuple(self._diseqs),
            self.inconsistent,
        )

    def dump(self) -> str:
        """One line per class, ``{t1, t2, ...}``, ordered by smallest member id."""
        classes: dict[int, list[int]] = {}
        for i in self._parent:
            classes.setdefault(self._find(i), []).append(i)
        lines = []
        for members in sorted((sorted(m) for m in classes.values()), key=lambda m: m[0]):
            lines.append("{" + ", ".join(repr(self.terms[i]) for i in members) + "}")
        return "\n".join(lines)

    def canonical_key(self, images) -> tuple[int, ...]:
        """Class-representative tuple for a sequence of ground terms."""
        return tuple(self._find(self._id(t)) for t in images)

    def value_of(self, t: Term) -> Optional[Term]:
        v = self._value.get(self._find(self._id(t)))
        return None if v is None else self.terms[v]

    def iter_class_roots(self) -> Iterator[int]:
        return (i for i, p in self._parent.items() if i == p)
