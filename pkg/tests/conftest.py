import json
from collections import defaultdict
from pathlib import Path

import pytest

from polyvector import CRFB, SYNTHETIC_NORM, Embedder, ProviderConfig, parse_document, synthetic_statute

FIXTURES = Path(__file__).parent / "fixtures"

_criteria: dict[int, dict] = defaultdict(lambda: {"title": "", "outcomes": []})


@pytest.fixture(scope="session")
def appendix():
    return json.loads((FIXTURES / "appendix_tables.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def excerpt_text():
    return (FIXTURES / "crfb_excerpt.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def excerpt(excerpt_text):
    tree, report = parse_document(excerpt_text, CRFB)
    return tree, report


@pytest.fixture(scope="session")
def synthetic():
    tree, report = parse_document(synthetic_statute(30), SYNTHETIC_NORM)
    return tree, report


@pytest.fixture
def embedder():
    return Embedder(ProviderConfig())


def unit_by_fragment(tree, norm, fragment):
    from polyvector import build_urn, enumerate_units, UnitKind

    for u in enumerate_units(tree, set(UnitKind)):
        if build_urn(u, tree, norm).fragment == fragment:
            return u
    raise KeyError(fragment)


# --- acceptance summary -----------------------------------------------------


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number = marker.args[0]
    entry = _criteria[number]
    entry["title"] = marker.args[1] if len(marker.args) > 1 else ""
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        reason = ""
        if rep.skipped and isinstance(rep.longrepr, tuple):
            reason = rep.longrepr[2]
        entry["outcomes"].append((item.name, rep.outcome, reason))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        outcomes = [o for _, o, _ in entry["outcomes"]]
        if any(o == "failed" for o in outcomes):
            status = "FAIL"
        elif outcomes and all(o == "skipped" for o in outcomes):
            status = "SKIP"
        elif outcomes:
            status = "PASS"
        else:
            status = "NOT RUN"
        skipped = [f"{name}: {reason}" for name, o, reason in entry["outcomes"] if o == "skipped"]
        note = f"  (skipped: {'; '.join(skipped)})" if skipped else ""
        terminalreporter.write_line(f"criterion {number} {status}: {entry['title']}{note}")
