import os

import pytest
import requests

from src.data.downloader import MnistDownloader
from src.error_handling.error_handling import ErrorCode, IngestionError
from src.util.config import Config


class FakeResponse:
    def __init__(self, status_code, content=b""):
        self.status_code = status_code
        self.content = content


class FakeSession:
    def __init__(self, responses):
        self.responses = list(responses)
        self.urls = []

    def get(self, url, timeout=None):
        self.urls.append(url)
        response = self.responses.pop(0)
        if isinstance(response, Exception):
            raise response
        return response


@pytest.fixture(autouse=True)
def no_sleep(monkeypatch):
    monkeypatch.setattr(Config, "RETRY_DELAY", 0)


def test_retries_then_succeeds(tmp_path, db):
    session = FakeSession([requests.ConnectionError("reset"), FakeResponse(503), FakeResponse(200, b"idx")])
    downloader = MnistDownloader(db=db, data_dir=str(tmp_path), mirror="https://mirror.test/mnist/", session=session)
    assert downloader.make_request("https://mirror.test/mnist/x.gz", max_retries=2) == b"idx"
    assert len(session.urls) == 3
    rows = db.execute_query("SELECT code_response FROM download_log ORDER BY id").fetchall()
    assert [r[0] for r in rows] == [0, 503, 200]


def test_gives_up(tmp_path):
    session = FakeSession([FakeResponse(404), FakeResponse(404)])
    downloader = MnistDownloader(data_dir=str(tmp_path), session=session)
    with pytest.raises(IngestionError) as exc:
        downloader.make_request("https://mirror.test/missing.gz", max_retries=1)
    assert exc.value.code == ErrorCode.DOWNLOAD_FAILED


def test_fetch_all_skips_existing(tmp_path):
    names = list(Config.MNIST_FILES.values())
    with open(os.path.join(tmp_path, names[0]), "wb") as f:
        f.write(b"already here")
    session = FakeSession([FakeResponse(200, name.encode()) for name in names[1:]])
    paths = MnistDownloader(data_dir=str(tmp_path), mirror="https://mirror.test/mnist", session=session).fetch_all()
    assert set(paths) == set(Config.MNIST_FILES)
    assert session.urls == [f"https://mirror.test/mnist/{name}" for name in names[1:]]
    with open(paths["test_labels"], "rb") as f:
        assert f.read() == Config.MNIST_FILES["test_labels"].encode()
