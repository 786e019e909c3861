from pathlib import Path

import pytest

from app.config import Settings
from app.database import Database
from app.services.gender_swap import load_dictionary
from app.services.report_store import ReportStore

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def canonical_text() -> str:
    return (FIXTURES / "canonical.conll").read_text(encoding="utf-8")


@pytest.fixture
def settings() -> Settings:
    return Settings()


@pytest.fixture
def bundled_dictionary(settings):
    return load_dictionary(settings.dictionary_file)


@pytest.fixture
def report_store(tmp_path):
    store = ReportStore(Database(tmp_path / "reports.db"))
    yield store
    store.db.close()
