import json

import pytest

from rwnca.io import (FingerprintMismatch, SolutionFile, SolutionFormatError, load_solution, parse_report,
                      reference_solution_text, render_report)
from rwnca.model import Solution
from rwnca.topology import load_topology


def test_json_round_trip(ref5):
    assert SolutionFile.from_json(ref5.to_json()) == ref5
    assert SolutionFile.from_json(reference_solution_text(5)).to_json() == reference_solution_text(5)


def test_fingerprint_mismatch_refused(cost):
    other = load_topology(cost.to_text() + "1 5\n")
    with pytest.raises(FingerprintMismatch):
        load_solution(reference_solution_text(5), other)
    inst, sf = load_solution(reference_solution_text(5), cost)
    assert len(inst.wavelengths) == 3 and inst.destinations == {3}


def test_wrong_destination_refused(cost):
    doc = json.loads(reference_solution_text(5))
    doc["fingerprint"]["destination"] = 6
    with pytest.raises(FingerprintMismatch):
        load_solution(json.dumps(doc), cost)


@pytest.mark.parametrize("mangle", [
    lambda t: t[: len(t) // 2],
    lambda t: "[]",
    lambda t: t.replace('"wavelength": 2', '"wavelength": "two"', 1),
    lambda t: t.replace('"configuration": "client-side"', '"configuration": "network-side"', 1),
    lambda t: t.replace("rwnca-solution/1", "other/2"),
])
def test_malformed_files(mangle):
    with pytest.raises(SolutionFormatError):
        SolutionFile.from_json(mangle(reference_solution_text(5)))


def test_report_row_for_client_side_demand(ref5):
    rows = [[c.strip() for c in line.strip("|").split("|")]
            for line in render_report(ref5).splitlines() if line.startswith("| 10→3")]
    assert rows == [["10→3", "(10-3)", "λ2", "(10-2-3)", "λ1", "Client-side"]]


def test_report_coding_table_has_five_pairs(ref4):
    text = render_report(ref4)
    coding = text.split("### Coding", 1)[1]
    assert sum(1 for line in coding.splitlines() if "⊕" in line) == 5


def test_uncoded_report_has_empty_coding_table(ref5):
    sf = SolutionFile(ref5.fingerprint, Solution(ref5.solution.provisions, ()), 2)
    coding = render_report(sf).split("### Coding", 1)[1]
    assert [l for l in coding.splitlines() if l.startswith("|")][2:] == []
    assert parse_report(render_report(sf)) == sf


@pytest.mark.parametrize("fmt", ["markdown", "csv"])
@pytest.mark.parametrize("design", [4, 5])
def test_report_parses_back(fmt, design, ref4, ref5):
    sf = ref4 if design == 4 else ref5
    assert parse_report(render_report(sf, fmt)) == sf


def test_report_needs_instance_line(ref5):
    text = render_report(ref5).split("\n", 1)[1]
    with pytest.raises(SolutionFormatError):
        parse_report(text)
