"""Derivation trees certifying that a gadget is safe along some edges.

A tree is checked from its own content only.  Leaves record a
monochromatic odd cycle or clique with some uncolored edges (or name a
construction lemma); inner nodes record gluings over labels that the
children declare safe.
"""

from __future__ import annotations

from dataclasses import dataclass, field

LEAF = "leaf"
LEMMA = "lemma"
GLUE = "glue"
SIMULTANEOUS = "simultaneous"
CLOSURE = "closure"
RENAME = "rename"

KNOWN_LEMMAS = frozenset({"dneg"})


@dataclass(frozen=True)
class SafetyCertificate:
    rule: str
    safe: tuple[str, ...]
    children: tuple["SafetyCertificate", ...] = ()
    glue: tuple[tuple[str, str, str], ...] = ()
    fact: dict = field(default_factory=dict)

    # -- constructors ----------------------------------------------------

    @classmethod
    def leaf(cls, shape: str, n: int, color: int, uncolored: int, safe: tuple[str, ...]):
        return cls(LEAF, tuple(safe), fact={"shape": shape, "n": n, "color": color, "uncolored": uncolored})

    @classmethod
    def lemma(cls, name: str, safe: tuple[str, ...], **fact):
        return cls(LEMMA, tuple(safe), fact={"name": name, **fact})

    @classmethod
    def glued(cls, left, right, pairs, safe, rule=GLUE, **fact):
        return cls(rule, tuple(safe), (left, right), tuple(tuple(p) for p in pairs), dict(fact))

    # -- checking --------------------------------------------------------

    def problems(self) -> list[str]:
        out: list[str] = []
        self._check(out, "root")
        return out

    def is_valid(self) -> bool:
        return not self.problems()

    def _check(self, out: list[str], where: str) -> None:
        if not self.safe:
            out.append(f"{where}: no safe edges declared")
        if self.rule == LEAF:
            f = self.fact
            shape, n, unc = f.get("shape"), f.get("n", 0), f.get("uncolored", 0)
            if shape == "cycle" and not (n >= 3 and n % 2 == 1):
                out.append(f"{where}: cycle leaf must be odd with at least 3 vertices")
            elif shape == "clique" and n < 2:
                out.append(f"{where}: clique leaf too small")
            elif shape not in ("cycle", "clique"):
                out.append(f"{where}: unknown leaf shape {shape!r}")
            if unc < 1:
                out.append(f"{where}: leaf has no uncolored edge")
            if len(self.safe) > unc:
                out.append(f"{where}: more safe labels than uncolored edges")
            if not isinstance(f.get("color"), int):
                out.append(f"{where}: leaf color missing")
            return
        if self.rule == LEMMA:
            if self.fact.get("name") not in KNOWN_LEMMAS:
                out.append(f"{where}: unknown lemma {self.fact.get('name')!r}")
            return
        if self.rule == RENAME:
            mapping = self.fact.get("map", {})
            if len(self.children) != 1:
                out.append(f"{where}: rename needs exactly one child")
                return
            (child,) = self.children
            images = {mapping.get(s, s) for s in child.safe}
            for lab in self.safe:
                if lab not in images:
                    out.append(f"{where}: renamed label {lab!r} has no source")
            child._check(out, f"{where}.0")
            return
        if self.rule == CLOSURE:
            if not self.fact.get("hypothesis"):
                out.append(f"{where}: closure step must state its hypothesis")
            for k, ch in enumerate(self.children):
                ch._check(out, f"{where}.{k}")
            return
        if self.rule not in (GLUE, SIMULTANEOUS):
            out.append(f"{where}: unknown rule {self.rule!r}")
            return
        if len(self.children) != 2:
            out.append(f"{where}: gluing needs two children")
            return
        left, right = self.children
        if not self.glue:
            out.append(f"{where}: empty gluing")
        if self.rule == GLUE and len(self.glue) != 1:
            out.append(f"{where}: single-edge rule used with {len(self.glue)} pairs")
        if self.rule == SIMULTANEOUS:
            d, size = self.fact.get("d"), self.fact.get("max_obstruction")
            if not (isinstance(d, int) and isinstance(size, int) and d > size):
                out.append(f"{where}: simultaneous gluing needs d above the largest obstruction")
        available = set(left.safe) | set(right.safe)
        for a, b, res in self.glue:
            if a not in left.safe:
                out.append(f"{where}: {a!r} is not safe in the left child")
            if b not in right.safe:
                out.append(f"{where}: {b!r} is not safe in the right child")
            available.add(res)
        for lab in self.safe:
            if lab not in available:
                out.append(f"{where}: declares {lab!r} safe without support")
        left._check(out, f"{where}.0")
        right._check(out, f"{where}.1")

    def leaves(self):
        if self.rule in (LEAF, LEMMA):
            yield self
        for ch in self.children:
            yield from ch.leaves()

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        doc = {"rule": self.rule, "safe": list(self.safe)}
        if self.children:
            doc["children"] = [c.to_dict() for c in self.children]
        if self.glue:
            doc["glue"] = [list(p) for p in self.glue]
        if self.fact:
            doc["fact"] = dict(self.fact)
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "SafetyCertificate":
        return cls(
            doc["rule"],
            tuple(doc.get("safe", ())),
            tuple(cls.from_dict(c) for c in doc.get("children", ())),
            tuple(tuple(p) for p in doc.get("glue", ())),
            dict(doc.get("fact", {})),
        )

    def relabel(self, mapping: dict[str, str]) -> "SafetyCertificate":
        return SafetyCertificate(
            RENAME,
            tuple(mapping.get(s, s) for s in self.safe),
            (self,),
            fact={"map": dict(mapping)},
        )
