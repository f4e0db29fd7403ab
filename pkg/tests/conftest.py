import pytest

_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("SPECMEASURE_CACHE", str(tmp_path / "cache"))
    return tmp_path / "cache"


@pytest.fixture
def criterion(request):
    """Record one acceptance verdict; returns the verdict for asserting."""
    log = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(number, label, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {label} -- {detail}"
        log.append((number, line))
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(_ACCEPTANCE, [])
    if log:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(log):
            terminalreporter.write_line(line)
