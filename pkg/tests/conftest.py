import shutil
import tempfile

import pytest

from dms.store import open_store


@pytest.fixture
def store_root(tmp_path):
    return tmp_path / "store"


@pytest.fixture
def store(store_root):
    s = open_store(store_root)
    yield s
    s.close()


def make_student(i=1, **overrides):
    record = {
        "reg_no": f"2014/PS/{i:03d}",
        "full_name": "Amara Silva",
        "program": "PS",
        "intake_year": 2014,
        "email": f"amara.{i}@uni.lk",
        "phone": "0771234567",
        "status": "active",
    }
    record.update(overrides)
    return record


def make_staff(i=1, **overrides):
    record = {
        "employee_id": f"EMP{i:03d}",
        "full_name": "Nimal Perera",
        "designation": "Lecturer",
        "category": "academic",
        "email": f"nimal.{i}@uni.lk",
        "phone": "0712345678",
        "status": "active",
    }
    record.update(overrides)
    return record


def make_item(i=1, **overrides):
    record = {
        "asset_id": f"AST{i:03d}",
        "kind": "book",
        "title": "Physics handbook",
        "quantity": 3,
        "location": "Library",
        "condition": "available",
        "issued_to": "",
    }
    record.update(overrides)
    return record


MAKERS = {"students": make_student, "staff": make_staff, "inventory": make_item}
