"""Semantic lexicon loading: directed word-pair sets over vocabulary ids.

Relation files are UTF-8 TSV with one `relation<TAB>head<TAB>tail` pair per
line. Pairs are directed; symmetry is never assumed and must be requested
explicitly via symmetrize().
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .corpus import Vocabulary
from .errors import ParseError


@dataclass(frozen=True)
class RelationSet:
    """Directed pair set for one semantic relation, restricted to a vocabulary."""

    relation_name: str
    pairs: frozenset[tuple[int, int]]
    vocab_size: int
    skipped: int = 0
    out_edges: dict[int, tuple[int, ...]] = field(default=None, compare=False, repr=False)
    in_edges: dict[int, tuple[int, ...]] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        for i, j in self.pairs:
            if not (0 <= i < self.vocab_size and 0 <= j < self.vocab_size):
                raise ValueError(f"pair ({i}, {j}) outside vocabulary of size {self.vocab_size}")
        out: dict[int, list[int]] = {}
        inc: dict[int, list[int]] = {}
        for i, j in sorted(self.pairs):
            out.setdefault(i, []).append(j)
            inc.setdefault(j, []).append(i)
        object.__setattr__(self, "out_edges", {i: tuple(js) for i, js in out.items()})
        object.__setattr__(self, "in_edges", {j: tuple(sorted(is_)) for j, is_ in inc.items()})

    def __len__(self) -> int:
        return len(self.pairs)

    def indicator(self, i: int, j: int) -> int:
        """R(i, j): 1 iff the directed pair (i, j) is in the set."""
        return 1 if (i, j) in self.pairs else 0


def empty_relation_set(relation_name: str, vocab_size: int) -> RelationSet:
    return RelationSet(relation_name, frozenset(), vocab_size)


def load_relations(path, relation_filter: str, vocab: Vocabulary) -> RelationSet:
    """Load all pairs with the given relation label and both words in vocab.

    Pairs with an out-of-vocabulary word are skipped and counted in the
    returned set's `skipped` field. Malformed lines raise ParseError.
    """
    pairs = set()
    skipped = 0
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ParseError(
                    f"{path}: line {lineno}: expected 3 tab-separated fields, got {len(fields)}",
                    line_number=lineno,
                )
            relation, head, tail = fields
            if relation != relation_filter:
                continue
            if head in vocab and tail in vocab:
                pairs.add((vocab.id_of(head), vocab.id_of(tail)))
            else:
                skipped += 1
    if not pairs:
        logging.getLogger(__name__).warning(
            "no %r pairs survived vocabulary filtering in %s (%d skipped); "
            "training reduces to the corpus-only objective",
            relation_filter,
            path,
            skipped,
        )
    return RelationSet(relation_filter, frozenset(pairs), len(vocab), skipped)


def relation_indicator(rel: RelationSet, i: int, j: int) -> int:
    return rel.indicator(i, j)


def symmetrize(rel: RelationSet) -> RelationSet:
    """Close the pair set under reversal. Idempotent."""
    closed = frozenset(rel.pairs | {(j, i) for i, j in rel.pairs})
    return RelationSet(rel.relation_name, closed, rel.vocab_size, rel.skipped)
