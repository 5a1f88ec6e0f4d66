from __future__ import annotations

from typing import Dict, Optional, Sequence, Tuple

import pytest

from consentlens.harness.capture import cookie_from_browser, dom_from_snapshot
from consentlens.harness.clickpath import Action, UIState, shortest_path
from consentlens.harness.robots import check_robots, is_allowed, parse_robots
from consentlens.model import Position, RenderBox, SameSite, Stage

# -- robots -------------------------------------------------------------------------------


@pytest.mark.parametrize(
    "body, path, allowed",
    [
        ("User-agent: *\nDisallow: /", "/", False),
        ("", "/", True),
        ("User-agent: *\nDisallow: /private", "/", True),
        ("User-agent: *\nDisallow: /private", "/private/x", False),
        ("User-agent: *\nDisallow: /\nAllow: /news", "/news/today", True),
        ("User-agent: *\nAllow: /\nDisallow: /news", "/news", False),
        ("User-agent: *\nDisallow:\n", "/anything", True),
        ("User-agent: *\nDisallow: /*.pdf$", "/a/b.pdf", False),
        ("User-agent: *\nDisallow: /*.pdf$", "/a/b.pdf?x", True),
        ("User-agent: other\nDisallow: /\n\nUser-agent: *\nAllow: /", "/", True),
        ("User-agent: consentlens\nDisallow: /\n\nUser-agent: *\nAllow: /", "/", False),
    ],
)
def test_robots_rules(body, path, allowed):
    assert is_allowed(parse_robots(body), "consentlens", path) is allowed


def test_check_robots_fetch_outcomes():
    assert not check_robots("https://a.example/page", lambda u: (200, "User-agent: *\nDisallow: /")).allowed
    missing = check_robots("https://a.example/", lambda u: (404, ""))
    assert missing.allowed and "404" in missing.note

    def broken(url):
        raise OSError("refused")

    assert check_robots("https://a.example/", broken).allowed
    seen = []
    check_robots("https://a.example:8080/x?q=1", lambda u: (seen.append(u), (200, ""))[1])
    assert seen == ["https://a.example:8080/robots.txt"]


# -- click path search --------------------------------------------------------------------


def act(label, category, toggle_on=None, essential=False):
    return Action(f"//*[@id='{label}']", label, category, toggle_on=toggle_on, essential=essential)


class Graph:
    """States keyed by name; transitions keyed by (state, action label)."""

    def __init__(self, states: Dict[str, Tuple[bool, Tuple[Action, ...]]], edges: Dict[Tuple[str, str], str], start="banner"):
        self.states, self.edges, self.start = states, edges, start
        self.probes = 0

    def _state(self, name: str) -> UIState:
        open_, actions = self.states[name]
        return UIState(name, open_, actions)

    def initial(self) -> Optional[UIState]:
        return self._state(self.start)

    def step(self, path: Sequence[Action]) -> Optional[UIState]:
        self.probes += 1
        name = self.start
        for a in path:
            name = self.edges.get((name, a.label))
            if name is None:
                return None
        return self._state(name)


ACCEPT = act("Accept all", "OptIn")
REJECT = act("Reject all", "OptOut")
SETTINGS = act("Settings", "MoreOptions")
SAVE = act("Save", "MoreOptions")


def prefs(marketing_on: bool):
    return (True, (act("Necessary", "PreferenceSlider", True, True), act("Marketing", "PreferenceSlider", marketing_on), SAVE))


def test_direct_reject_is_one_click():
    g = Graph({"banner": (True, (ACCEPT, REJECT)), "done": (False, ())}, {("banner", "Accept all"): "done", ("banner", "Reject all"): "done"})
    r = shortest_path(g, "opt_out")
    assert [a.label for a in r.path] == ["Reject all"]
    assert [a.label for a in shortest_path(g, "opt_in").path] == ["Accept all"]


def test_settings_toggle_save_is_three_clicks():
    states = {"banner": (True, (ACCEPT, SETTINGS)), "prefs_on": prefs(True), "prefs_off": prefs(False), "done": (False, ())}
    edges = {
        ("banner", "Accept all"): "done",
        ("banner", "Settings"): "prefs_on",
        ("prefs_on", "Marketing"): "prefs_off",
        ("prefs_on", "Save"): "done",
        ("prefs_off", "Save"): "done",
    }
    r = shortest_path(Graph(states, edges), "opt_out")
    assert [a.label for a in r.path] == ["Settings", "Marketing", "Save"]


def test_saving_with_purposes_on_is_not_refusal():
    states = {"banner": (True, (ACCEPT, SETTINGS)), "prefs_on": prefs(True), "done": (False, ())}
    edges = {("banner", "Settings"): "prefs_on", ("prefs_on", "Save"): "done", ("banner", "Accept all"): "done"}
    r = shortest_path(Graph(states, edges), "opt_out")
    assert not r.found and r.exhausted


def test_unreachable_and_depth_limit():
    chain = {f"s{i}": (True, (act("Next", "MoreOptions"),)) for i in range(6)}
    chain["s6"] = (True, (REJECT,))
    chain["done"] = (False, ())
    edges = {(f"s{i}", "Next"): f"s{i + 1}" for i in range(6)}
    edges[("s6", "Reject all")] = "done"
    g = Graph(chain, edges, start="s0")
    limited = shortest_path(g, "opt_out", max_depth=4)
    assert not limited.found and not limited.exhausted
    assert len(shortest_path(g, "opt_out", max_depth=8).path) == 7
    no_dialog = Graph({"banner": (False, ())}, {})
    assert shortest_path(no_dialog, "opt_in").path is None
    with pytest.raises(ValueError):
        shortest_path(no_dialog, "sideways")


def test_revisited_states_are_not_expanded():
    states = {"banner": (True, (SETTINGS,)), "prefs": (True, (act("Back", "MoreOptions"),))}
    edges = {("banner", "Settings"): "prefs", ("prefs", "Back"): "banner"}
    g = Graph(states, edges)
    r = shortest_path(g, "opt_out", max_depth=10)
    assert not r.found and r.exhausted and r.probes == 2


# -- browser payload conversion ------------------------------------------------------------


def test_dom_from_snapshot_offsets_frames():
    doc = {
        "t": "div",
        "l": "/html[1]/body[1]/div[1]",
        "a": [["id", "cmp"]],
        "s": {"z": 10, "p": "fixed", "bg": [300, 10, -4], "dn": 0},
        "b": [1, 2, 30, 40],
        "c": [{"t": "button", "x": "OK", "l": "/html[1]/body[1]/div[1]/button[1]"}],
    }
    n = dom_from_snapshot(doc, frame_id=2, offset=(100, 50), prefix="//iframe[1]|")
    assert n.box == RenderBox(101, 52, 30, 40)
    assert n.style.position is Position.FIXED and n.style.z_index == 10 and n.style.background_rgb == (255, 10, 0)
    assert n.locator == "//iframe[1]|/html[1]/body[1]/div[1]" and n.frame_id == 2
    assert n.children[0].text == "OK" and n.children[0].box is None


def test_cookie_from_browser_shapes():
    cdp = {"name": "IDE", "value": "x", "domain": ".DoubleClick.net", "path": "/", "expires": 1.8e9, "secure": True,
           "httpOnly": True, "sameSite": "None", "session": False}
    c = cookie_from_browser(cdp, Stage.OPT_IN)
    assert (c.host, c.expiry, c.same_site, c.secure, c.http_only, c.observed_stage) == (".doubleclick.net", 1_800_000_000, SameSite.NONE, True, True, Stage.OPT_IN)
    session = cookie_from_browser({"name": "s", "value": "1", "expires": -1}, Stage.INITIAL, "www.example.com")
    assert session.expiry is None and session.host == "www.example.com" and session.same_site is SameSite.UNSET
    w3c = cookie_from_browser({"name": "t", "value": 5, "domain": "a.com", "expiry": 1700000123, "sameSite": "Lax"}, Stage.CLOSE)
    assert w3c.expiry == 1700000123 and w3c.value == "5" and w3c.same_site is SameSite.LAX
