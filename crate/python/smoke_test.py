"""Smoke test for the xca extension module.

Build it with `cargo build -p xca-py --features extension-module`, then copy
target/debug/libxca.so next to this file as xca.so (or install with maturin).
"""

import json
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import xca  # noqa: E402

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def fixture(name):
    with open(os.path.join(ROOT, "fixtures", f"{name}.json"), encoding="utf-8") as f:
        return xca.DeviceProfile.from_json(f.read())


def main():
    kb = xca.KnowledgeBase.default()
    assert len(kb.goal_ids()) == 11 and len(kb.method_ids()) == 23
    assert len(kb.fingerprint) == 64
    assert xca.validate_kb(kb.to_json()) == []

    rns = xca.analyze(fixture("rns"), kb)
    assert rns.applicable == ["MDR", "AIA", "GDPR"], rns.applicable
    assert rns.manual_goals == ["C", "J"]
    assert rns.covers[0] == ["MA-1"] and rns.min_cover_size == 1
    assert "## Manual Actions" in rns.to_markdown()
    again = xca.AnalysisReport.from_json(rns.to_json())
    assert again.to_json() == rns.to_json()

    scs = fixture("scs")
    assert "GDPR" not in xca.analyze(scs).applicable
    closed = scs.with_overrides({"loop_type": "closed"})
    delta = json.loads(xca.diff(scs, closed))
    assert delta["goals_added"] == ["C", "D", "E", "G"]
    assert delta["addressable_added"] == ["D", "E", "G"]

    try:
        scs.with_overrides({"colour": "red"})
    except ValueError:
        pass
    else:
        raise AssertionError("unknown field accepted")

    try:
        xca.DeviceProfile.from_json('{"device": {}}')
    except ValueError as e:
        assert "E_SCHEMA" in str(e)
    else:
        raise AssertionError("incomplete profile accepted")

    covers = xca.minimal_covers({"x": ["A"], "y": ["B"], "z": ["A", "B"]}, ["A", "B"])
    assert covers == [["z"]], covers

    print("python smoke test passed")


if __name__ == "__main__":
    main()
