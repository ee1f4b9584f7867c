"""The console's scripted eating sequence and the headless fsm-demo replay
must agree: the vitest suite pins gestures -> commands == the committed
fixture, and this test pins fixture -> state trace.  Together they make a
manual console run comparable against the CLI replay."""

import json
from pathlib import Path

import pytest

from vsarm.logs import SESSION_COLUMNS
from vsarm.session import load_event_script, run_batch

FIXTURE = Path(__file__).parent.parent / "frontend" / "test" / "fixtures" \
    / "eating_script.jsonl"


def test_fixture_exists_and_is_a_valid_event_script():
    events = load_event_script(FIXTURE)
    assert [e["t"] for e in events] == [0.5, 8, 9, 10, 14, 15.5, 17]
    buttons = [(e.get("button"), e.get("value")) for e in events if "button" in e]
    assert buttons == [("B1", True), ("B2", True), ("B2", False),
                       ("B3", True), ("B3", False), ("B1", False)]
    commands = [e["command"] for e in events if "command" in e]
    assert commands == [{"type": "set_target", "x_mm": -80, "y_mm": 640}]


def test_fixture_replay_walks_the_full_eating_sequence(config):
    session, log = run_batch(config, 27.0, load_event_script(FIXTURE))
    idx = {name: i for i, name in enumerate(SESSION_COLUMNS)}
    phases = []
    for row in log.rows:
        p = row[idx["fsm_state"]]
        if not phases or phases[-1] != p:
            phases.append(p)
    assert phases == ["S1", "S2", "S3", "S2", "S4", "S2", "S1"]
    knife_states = {row[idx["fsm_state"]] for row in log.rows
                    if row[idx["knife"]] == "1"}
    assert knife_states == {"S4"}
    assert session.task.phase.value == "S1"
    assert not session.task.faulted
