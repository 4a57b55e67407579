import pytest

from conceptq.evaluation import fixture_f1, fixture_f1_records


@pytest.fixture
def f1():
    return fixture_f1()


@pytest.fixture
def f1_records():
    return fixture_f1_records()


@pytest.fixture
def f1_path(tmp_path):
    lines = [f"{r.concept}\t{r.entity}\t{r.count}" for r in fixture_f1_records()]
    path = tmp_path / "f1.tsv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
