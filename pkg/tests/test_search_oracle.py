"""Randomized equivalence between store.search and an independent full scan."""

import random

import pytest

from dms.bench import CLEAN_PROFILE, generate_dataset
from dms.model import normalize
from dms.store import Predicate, Query

import oracles


def build_fixture(store, kind, n, seed):
    """Load n clean rows, then archive some and update some for variety.

    Returns the oracle's own copy of what the store must now contain.
    """
    rng = random.Random(seed)
    dataset = generate_dataset(kind, n, CLEAN_PROFILE, seed)
    mirror = []
    for row in dataset.rows:
        record = normalize(kind, row)
        store.put(kind, record)
        mirror.append(record)
    for record in rng.sample(mirror, n // 10):
        field, value = oracles.ARCHIVED_MARK[kind]
        store.archive(kind, record[oracles.KEY_FIELD[kind]])
        record[field] = value
        if kind == "inventory":
            record["issued_to"] = ""
    return mirror


@pytest.mark.parametrize("kind", ["students", "staff", "inventory"])
def test_search_equals_full_scan(store, kind):
    mirror = build_fixture(store, kind, 400, seed=11)
    rng = random.Random(99)
    for round_no in range(120):
        predicates = oracles.random_predicates(rng, kind, mirror)
        offset, limit = oracles.random_page(rng, len(mirror))
        include_archived = rng.random() < 0.3
        want_total, want_rows = oracles.full_scan(
            kind, mirror, predicates, include_archived, offset, limit
        )
        page = store.search(
            Query(
                kind=kind,
                predicates=tuple(Predicate(*p) for p in predicates),
                offset=offset,
                limit=limit,
                include_archived=include_archived,
            )
        )
        got_rows = [r.record for r in page.records]
        assert page.total_matches == want_total, (round_no, predicates)
        assert got_rows == want_rows, (round_no, predicates, offset, limit)


def test_results_ordered_by_key_and_within_limit(store):
    mirror = build_fixture(store, "students", 250, seed=5)
    rng = random.Random(6)
    for _ in range(40):
        predicates = oracles.random_predicates(rng, "students", mirror)
        offset, limit = oracles.random_page(rng, len(mirror))
        page = store.search(
            Query(
                kind="students",
                predicates=tuple(Predicate(*p) for p in predicates),
                offset=offset,
                limit=limit,
            )
        )
        keys = [r.record["reg_no"] for r in page.records]
        assert keys == sorted(keys)
        assert len(keys) <= limit
        for stored in page.records:
            for field, op, value in predicates:
                assert oracles.matches_one("students", stored.record, (field, op, value))
