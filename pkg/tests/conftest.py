"""Shared fixtures and the acceptance-summary terminal section."""

import pytest

from epimine.corpus import ClassLabel, Corpus, Document


@pytest.fixture
def tiny_labeled_corpus() -> Corpus:
    """Two classes, three documents, two terms; the smallest useful training set."""
    return Corpus(
        [
            Document(id="a1", raw_text="x x", gold_label=ClassLabel.NEWS, tokens=("x", "x")),
            Document(id="a2", raw_text="x", gold_label=ClassLabel.NEWS, tokens=("x",)),
            Document(id="b1", raw_text="y", gold_label=ClassLabel.JOKE, tokens=("y",)),
        ]
    )


@pytest.fixture
def four_class_corpus() -> Corpus:
    """Every class twice, disjoint single-term vocabularies."""
    docs = []
    terms = {
        ClassLabel.NEWS: "casos",
        ClassLabel.JOKE: "piada",
        ClassLabel.MOSQUITO_FOCUS: "foco",
        ClassLabel.SICKNESS: "febre",
    }
    for label, term in terms.items():
        for i in range(2):
            docs.append(
                Document(
                    id=f"{label.value}-{i}",
                    raw_text=term,
                    gold_label=label,
                    tokens=(term, term),
                )
            )
    return Corpus(docs)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    entries = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py::test_criterion" in nodeid:
                entries.append((nodeid.split("::")[-1], outcome))
    if entries:
        terminalreporter.write_sep("=", "acceptance criteria")
        for name, outcome in sorted(entries):
            status = "PASS" if outcome == "passed" else "FAIL"
            terminalreporter.write_line(f"{status}  {name}")
