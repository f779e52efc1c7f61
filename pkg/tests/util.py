"""Shared helpers for randomized suites."""

import random
import string

from regionminer.eventlog import EventLog, prefix_closure, use_transform
from regionminer.filtering import build_graph, make_kappa_max, sef_bfs
from regionminer.regions import build_constraint_system, instantiate_causal_ilp


def random_log(
    rng: random.Random,
    max_alphabet: int = 6,
    max_variants: int = 8,
    max_length: int = 6,
    max_multiplicity: int = 20,
) -> EventLog:
    size = rng.randint(2, max_alphabet)
    letters = list(string.ascii_lowercase[:size])
    variants = rng.randint(1, max_variants)
    pairs = []
    for _ in range(variants):
        length = rng.randint(1, max_length)
        trace = tuple(rng.choice(letters) for _ in range(length))
        pairs.append((trace, rng.randint(1, max_multiplicity)))
    return EventLog.from_pairs(pairs)


def random_use_system(rng: random.Random, alpha: float | None = None, **kwargs):
    """Random USE log, its closure and constraint system (optionally filtered)."""
    log = random_log(rng, **kwargs)
    use, start, end = use_transform(log)
    pc = prefix_closure(use, start, end)
    if alpha is None:
        return pc, build_constraint_system(pc)
    graph = build_graph(pc)
    retained = sef_bfs(graph, make_kappa_max(graph, alpha))
    return pc, build_constraint_system(pc, retained)


def admissible_pairs(pc):
    """Every pair allowed to seed a place: anything but leaving the end
    activity or entering the start activity."""
    alphabet = pc.ordered_alphabet()
    start, end = alphabet[0], alphabet[-1]
    return [(a, b) for a in alphabet if a != end for b in alphabet if b != start]


def random_instance(rng: random.Random):
    """Region-form instance: random system, random admissible pair, and
    sometimes an aggressive filter to exercise infeasible cases."""
    alpha = rng.choice([None, None, None, 0.9, 0.5, 0.1])
    pc, cs = random_use_system(
        rng,
        alpha=alpha,
        max_alphabet=4,
        max_variants=5,
        max_length=5,
        max_multiplicity=9,
    )
    a, b = rng.choice(admissible_pairs(pc))
    return instantiate_causal_ilp(cs, a, b)
