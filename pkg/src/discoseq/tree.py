"""Constituent trees over possibly discontinuous yields.

A constituent is a labeled node whose children are word positions (plain
ints) or other constituents.  The yield of a node is the set of sentence
positions it covers; a node is discontinuous when that set has gaps.
Children are stored sorted by the smallest position they cover, so
structural equality is canonical: two trees over the same sentence are
equal exactly when they contain the same labeled yields arranged the
same way.  Values are immutable.
"""

from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

Child = Union["Constituent", int]

_EMPTY_SORT_KEY = float("inf")  # empty children sort last; validate() flags them


def _min_position(child: Child) -> float:
    if isinstance(child, int):
        return child
    return min(child.positions) if child.positions else _EMPTY_SORT_KEY


@dataclass(frozen=True)
class Constituent:
    """A labeled node; children are word positions or nested constituents."""

    label: str
    children: tuple[Child, ...]
    positions: frozenset[int] = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        kids = tuple(sorted(self.children, key=_min_position))
        covered: set[int] = set()
        for child in kids:
            if isinstance(child, int):
                covered.add(child)
            else:
                covered |= child.positions
        object.__setattr__(self, "children", kids)
        object.__setattr__(self, "positions", frozenset(covered))

    def constituents(self) -> Iterator["Constituent"]:
        """Pre-order iteration over this node and all nested constituents."""
        yield self
        for child in self.children:
            if isinstance(child, Constituent):
                yield from child.constituents()

    def leaves(self) -> Iterator[int]:
        """Word positions in depth-first order (not sorted)."""
        for child in self.children:
            if isinstance(child, int):
                yield child
            else:
                yield from child.leaves()

    @property
    def is_continuous(self) -> bool:
        return yield_is_consecutive(self.positions)


@dataclass(frozen=True)
class ConstituentTree:
    """A sentence plus a root constituent covering every position."""

    sentence: tuple[str, ...]
    root: Constituent

    def __post_init__(self) -> None:
        object.__setattr__(self, "sentence", tuple(self.sentence))

    def __len__(self) -> int:
        return len(self.sentence)

    def constituents(self) -> Iterator[Constituent]:
        return self.root.constituents()


@dataclass(frozen=True)
class Violation:
    """First invariant broken by a tree, with the offending node."""

    rule: str
    detail: str


def yield_is_consecutive(positions: frozenset[int]) -> bool:
    if not positions:
        return True
    return max(positions) - min(positions) + 1 == len(positions)


def is_continuous(tree: ConstituentTree) -> bool:
    """True when every constituent covers a consecutive block of positions."""
    return all(yield_is_consecutive(c.positions) for c in tree.constituents())


def discontinuous_constituents(tree: ConstituentTree) -> list[Constituent]:
    """All constituents with a gapped yield, in pre-order."""
    return [c for c in tree.constituents() if not yield_is_consecutive(c.positions)]


def canonical_leaf_order(tree: ConstituentTree) -> tuple[int, ...]:
    """Word positions in depth-first traversal order.

    This is the identity permutation for continuous trees.  Relabeling
    each leaf by its rank in this order always produces a continuous
    tree, because a depth-first traversal emits every subtree's leaves
    as one consecutive run.
    """
    return tuple(tree.root.leaves())


def permute_leaves(tree: ConstituentTree, permutation: Sequence[int]) -> ConstituentTree:
    """Relabel leaf p as permutation[p], moving words along with positions."""
    n = len(tree.sentence)
    if sorted(permutation) != list(range(n)):
        raise ValueError("permutation must rearrange exactly the positions 0..n-1")

    def rebuild(node: Constituent) -> Constituent:
        kids: list[Child] = []
        for child in node.children:
            if isinstance(child, int):
                kids.append(permutation[child])
            else:
                kids.append(rebuild(child))
        return Constituent(node.label, tuple(kids))

    sentence = [""] * n
    for old, new in enumerate(permutation):
        sentence[new] = tree.sentence[old]
    return ConstituentTree(tuple(sentence), rebuild(tree.root))


def reorder_canonical(tree: ConstituentTree) -> ConstituentTree:
    """Relabel leaves by canonical order rank; the result is continuous."""
    order = canonical_leaf_order(tree)
    rank = {position: i for i, position in enumerate(order)}
    return permute_leaves(tree, [rank[p] for p in range(len(tree.sentence))])


def validate(tree: ConstituentTree) -> Violation | None:
    """Check tree invariants; return the first violation, or None if all hold.

    Construction normalizes child order but deliberately does not reject
    bad shapes, so hand-built or repaired trees can be inspected here:
    non-empty constituents, pairwise disjoint child yields, leaf
    positions inside the sentence, and a root that covers every word.
    """
    n = len(tree.sentence)
    for node in tree.constituents():
        if not node.children:
            return Violation("empty-constituent", f"constituent {node.label!r} has no children")
        seen: set[int] = set()
        for child in node.children:
            child_positions = {child} if isinstance(child, int) else child.positions
            overlap = seen & child_positions
            if overlap:
                return Violation(
                    "overlapping-children",
                    f"children of {node.label!r} both claim position "
                    f"{min(overlap)}",
                )
            seen |= child_positions
        for p in node.positions:
            if not 0 <= p < n:
                return Violation(
                    "leaf-out-of-range",
                    f"constituent {node.label!r} covers position {p}, "
                    f"but the sentence has {n} words",
                )
    if tree.root.positions != frozenset(range(n)):
        missing = sorted(frozenset(range(n)) - tree.root.positions)
        return Violation(
            "incomplete-root",
            f"root {tree.root.label!r} does not cover positions {missing}",
        )
    return None
