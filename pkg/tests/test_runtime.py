import pytest

from snb.core.errors import ConfigError
from snb.utils.runtime import JOBS_ENV, ensure_output_dir, ordered_map, resolve_jobs


def square(value):
    return value * value


class TestResolveJobs:
    def test_default_is_one(self, monkeypatch):
        monkeypatch.delenv(JOBS_ENV, raising=False)
        assert resolve_jobs() == 1

    def test_environment(self, monkeypatch):
        monkeypatch.setenv(JOBS_ENV, "3")
        assert resolve_jobs() == 3

    def test_explicit_request_wins(self, monkeypatch):
        monkeypatch.setenv(JOBS_ENV, "3")
        assert resolve_jobs(2) == 2

    @pytest.mark.parametrize("raw", ["many", "0", "-2"])
    def test_bad_environment(self, monkeypatch, raw):
        monkeypatch.setenv(JOBS_ENV, raw)
        with pytest.raises(ConfigError, match=JOBS_ENV):
            resolve_jobs()

    def test_bad_request(self):
        with pytest.raises(ConfigError):
            resolve_jobs(0)


class TestOrderedMap:
    def test_serial(self):
        assert ordered_map(square, range(5)) == [0, 1, 4, 9, 16]

    def test_pool_keeps_order(self):
        assert ordered_map(square, range(12), jobs=2) == [v * v for v in range(12)]

    def test_empty(self):
        assert ordered_map(square, [], jobs=4) == []


def test_ensure_output_dir(tmp_path):
    path = ensure_output_dir(tmp_path / "a" / "b" / "out.csv")
    assert path.parent.is_dir()
    assert not path.exists()
