from __future__ import annotations

import pytest

from qsim.engine import SimulationTrace
from qsim.specfile import load_spec

HANDS = ("left_hand", "right_hand")
BALLS = ("ball1", "ball2", "ball3")

# who holds each ball, state by state: the cascade drawn for the juggling
# example, looping back to the third state
CASCADE = (
    {"ball1": "left_hand", "ball2": "left_hand", "ball3": "right_hand"},
    {"ball1": None, "ball2": "left_hand", "ball3": "right_hand"},
    {"ball1": None, "ball2": "left_hand", "ball3": None},
    {"ball1": "right_hand", "ball2": None, "ball3": None},
    {"ball1": None, "ball2": None, "ball3": "left_hand"},
    {"ball1": None, "ball2": "right_hand", "ball3": None},
    {"ball1": "left_hand", "ball2": None, "ball3": None},
    {"ball1": None, "ball2": None, "ball3": "right_hand"},
)
CASCADE_LOOP = 3


def cascade_state(holder: dict[str, str | None]) -> dict:
    objs = HANDS + BALLS
    rel = {}
    for a in objs:
        for b in objs:
            if a == b:
                r = "equal"
            elif a in HANDS and b in HANDS:
                r = "disjoint"
            elif a in BALLS and b in BALLS:
                same = holder[a] is not None and holder[a] == holder[b]
                r = "meet" if same else "disjoint"
            else:
                hand, ball = (a, b) if a in HANDS else (b, a)
                r = "meet" if holder[ball] == hand else "disjoint"
            rel[(a, b)] = r
    return {"Q": rel}


def cascade_trace(order=None, loop: int = CASCADE_LOOP) -> SimulationTrace:
    holders = CASCADE if order is None else [CASCADE[i] for i in order]
    states = tuple(cascade_state(h) for h in holders)
    return SimulationTrace(len(states), loop, states)


@pytest.fixture(scope="session")
def juggling():
    return load_spec("juggling")


@pytest.fixture(scope="session")
def navigation():
    return load_spec("navigation")


@pytest.fixture
def cascade():
    return cascade_trace()


# --------------------------------------------------------------------------
# acceptance results, echoed at the end of the run

ACCEPTANCE: dict[int, str] = {}


def record_criterion(number: int, ok: bool, text: str) -> str:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {text}"
    ACCEPTANCE[number] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
