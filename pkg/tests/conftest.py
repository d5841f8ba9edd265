import json
from pathlib import Path

import pytest

from ofc.gateway import CostMeter, ModelGateway, prompt_hash

FIXTURES = Path(__file__).parent / "fixtures"


def write_transcripts(directory: Path, transcripts: dict[str, str], default: str | None = None) -> None:
    """Record prompt -> reply pairs as hash-keyed mock transcript files."""
    directory.mkdir(parents=True, exist_ok=True)
    for prompt, reply in transcripts.items():
        (directory / f"{prompt_hash(prompt)}.txt").write_text(reply, encoding="utf-8")
    if default is not None:
        (directory / "default.txt").write_text(default, encoding="utf-8")


@pytest.fixture
def mock_gateway(tmp_path):
    """Build a scripted-mock gateway from a prompt -> reply mapping."""

    def factory(transcripts: dict[str, str], default: str | None = None, meter: CostMeter | None = None) -> ModelGateway:
        tdir = tmp_path / "transcripts"
        write_transcripts(tdir, transcripts, default)
        return ModelGateway(backend="scripted_mock", transcript_dir=tdir, meter=meter)

    return factory


@pytest.fixture
def segmentation_fixture():
    with (FIXTURES / "sentence_segmentation.json").open(encoding="utf-8") as fh:
        return json.load(fh)


# Acceptance reporting: collect pass/fail per criterion test and print one
# line each at the end of the run.
_acceptance_results: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    if "test_acceptance" in report.nodeid:
        _acceptance_results[report.nodeid.split("::")[-1]] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in sorted(_acceptance_results.items()):
        status = "PASS" if outcome == "passed" else outcome.upper()
        terminalreporter.write_line(f"{status}  {name}")
