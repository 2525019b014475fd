"""Independent brute-force reference implementations.

These reimplement search and report semantics from the documented contracts,
on plain lists and tuples, without touching the store's matching code.  They
exist so the engine can be checked against something that cannot share its
bugs.
"""

import random

INT_FIELDS = {
    "students": {"intake_year"},
    "staff": set(),
    "inventory": {"quantity"},
}
TEXT_FIELDS = {
    "students": ["reg_no", "full_name", "program", "email", "phone", "status"],
    "staff": ["employee_id", "full_name", "designation", "category", "email", "phone", "status"],
    "inventory": ["asset_id", "kind", "title", "location", "condition", "issued_to"],
}
ALL_FIELDS = {kind: TEXT_FIELDS[kind] + sorted(INT_FIELDS[kind]) for kind in TEXT_FIELDS}
KEY_FIELD = {"students": "reg_no", "staff": "employee_id", "inventory": "asset_id"}
ARCHIVED_MARK = {
    "students": ("status", "archived"),
    "staff": ("status", "archived"),
    "inventory": ("condition", "written_off"),
}


def is_archived(kind, record):
    field, value = ARCHIVED_MARK[kind]
    return record[field] == value


def matches_one(kind, record, pred):
    field, op, value = pred
    actual = record[field]
    if op == "eq":
        if field in INT_FIELDS[kind]:
            return isinstance(actual, int) and actual == int(value)
        return str(actual) == str(value)
    if op == "prefix":
        return str(actual).casefold().startswith(str(value).casefold())
    if op == "contains":
        return str(value).casefold() in str(actual).casefold()
    if op == "range":
        low, high = value
        if field in INT_FIELDS[kind]:
            return isinstance(actual, int) and int(low) <= actual <= int(high)
        return str(low) <= str(actual) <= str(high)
    raise AssertionError(f"oracle got unknown op {op}")


def full_scan(kind, records, predicates, include_archived, offset, limit):
    """Filter + sort + paginate the slow, obvious way."""
    kept = []
    for record in records:
        if not include_archived and is_archived(kind, record):
            continue
        if all(matches_one(kind, record, p) for p in predicates):
            kept.append(record)
    kept.sort(key=lambda r: r[KEY_FIELD[kind]])
    return len(kept), kept[offset : offset + limit]


def group_fold(records, group_by, aggs):
    """aggs: list of ("count", None) or ("sum", field).  Returns sorted group
    rows and the total row, both as tuples."""
    groups = {}
    for record in records:
        key = tuple(record[g] for g in group_by)
        acc = groups.setdefault(key, [0] * len(aggs))
        for i, (op, field) in enumerate(aggs):
            acc[i] += 1 if op == "count" else record[field]
    rows = tuple(key + tuple(acc) for key, acc in sorted(groups.items()))
    totals = [0] * len(aggs)
    for record in records:
        for i, (op, field) in enumerate(aggs):
            totals[i] += 1 if op == "count" else record[field]
    return rows, tuple(totals)


def random_predicates(rng: random.Random, kind, records):
    """Draw 0-3 well-formed predicates, biased toward values that hit."""
    predicates = []
    for _ in range(rng.randint(0, 3)):
        field = rng.choice(ALL_FIELDS[kind])
        if field in INT_FIELDS[kind]:
            op = rng.choice(["eq", "range", "range"])
            sample = records and rng.choice(records)[field] or 2000
            if not isinstance(sample, int):
                sample = 2000
            if op == "eq":
                predicates.append((field, "eq", str(sample + rng.randint(-1, 1))))
            else:
                low = sample - rng.randint(0, 10)
                high = sample + rng.randint(0, 10)
                predicates.append((field, "range", (str(low), str(high))))
        else:
            op = rng.choice(["eq", "prefix", "contains", "range"])
            value = str(rng.choice(records)[field]) if records else "x"
            if op == "eq":
                predicates.append((field, "eq", value if rng.random() < 0.7 else value.lower()))
            elif op == "prefix":
                cut = rng.randint(0, min(4, len(value)))
                text = value[:cut] or "z"
                predicates.append((field, "prefix", text.swapcase() if rng.random() < 0.3 else text))
            elif op == "contains":
                if value and rng.random() < 0.8:
                    start = rng.randrange(len(value))
                    text = value[start : start + rng.randint(1, 3)]
                else:
                    text = rng.choice(["an", "AST", "xyz", "0"])
                predicates.append((field, "contains", text))
            else:
                bounds = sorted([value, str(rng.choice(records)[field]) if records else "y"])
                predicates.append((field, "range", (bounds[0], bounds[1])))
    return predicates


def random_page(rng: random.Random, total_hint):
    offset = rng.choice([0, 0, 0, 1, 2, rng.randint(0, max(1, total_hint))])
    limit = rng.choice([1, 2, 5, 10, 100, 1000])
    return offset, limit
