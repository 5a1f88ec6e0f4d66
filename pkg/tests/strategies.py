"""Hypothesis strategies shared by the property tests."""

from __future__ import annotations

from hypothesis import strategies as st

from consentlens.model import (
    CookieRecord,
    CrawlRecord,
    DomNode,
    InteractionEvent,
    Position,
    RenderBox,
    RevocationInfo,
    RevocationSource,
    SameSite,
    Screenshot,
    Stage,
    StageCapture,
    StyleSubset,
    Subpage,
)

NOW = 1_700_000_000

hosts = st.sampled_from(
    [
        "www.example.com",
        ".example.com",
        "example.com",
        "static.example.com",
        ".doubleclick.net",
        "ads.other-site.co.uk",
        "example.co.uk",
        ".google-analytics.com",
        "cdn.example.org",
        "192.0.2.7",
    ]
)
cookie_names = st.sampled_from(["sid", "uid", "_ga", "IDE", "consent", "theme", "lang", "tid", "x", "_fbp"])
cookie_values = st.one_of(
    st.sampled_from(["1", "true", "yes", "en", "accepted"]),
    st.text(alphabet="abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-_.", min_size=0, max_size=40),
)
expiries = st.one_of(st.none(), st.integers(min_value=NOW - 86400, max_value=NOW + 3 * 365 * 86400))


@st.composite
def cookies(draw, stage: Stage = Stage.INITIAL, key=None):
    name, host, path = key if key is not None else (draw(cookie_names), draw(hosts), draw(st.sampled_from(["/", "/a"])))
    return CookieRecord(
        name=name,
        value=draw(cookie_values),
        host=host,
        path=path,
        secure=draw(st.booleans()),
        http_only=draw(st.booleans()),
        same_site=draw(st.sampled_from(list(SameSite))),
        expiry=draw(expiries),
        observed_stage=stage,
    )


@st.composite
def jars(draw, stage: Stage = Stage.INITIAL, max_size: int = 50):
    """Jars with unique (name, host, path) keys."""
    keys = draw(
        st.lists(
            st.tuples(cookie_names, hosts, st.sampled_from(["/", "/a", "/b"])),
            max_size=max_size,
            unique=True,
        )
    )
    return [draw(cookies(stage, key=k)) for k in keys]


rgb = st.tuples(*[st.integers(0, 255)] * 3)
safe_text = st.text(alphabet=st.characters(blacklist_categories=("Cs", "Cc")), max_size=30)


@st.composite
def styles(draw):
    return StyleSubset(
        z_index=draw(st.one_of(st.none(), st.integers(-10, 100_000))),
        position=draw(st.sampled_from(list(Position))),
        display_none=draw(st.booleans()),
        visibility_hidden=draw(st.booleans()),
        background_rgb=draw(st.one_of(st.none(), rgb)),
        color_rgb=draw(st.one_of(st.none(), rgb)),
    )


@st.composite
def boxes(draw):
    return RenderBox(
        draw(st.integers(-50, 1200)),
        draw(st.integers(-50, 900)),
        draw(st.integers(0, 1200)),
        draw(st.integers(0, 900)),
    )


def dom_trees(max_leaves: int = 8):
    leaf = st.builds(
        DomNode,
        tag=st.sampled_from(["p", "span", "button", "a", "input", "div"]),
        attributes=st.lists(st.tuples(st.sampled_from(["id", "class", "role", "href"]), safe_text), max_size=2, unique_by=lambda t: t[0]).map(tuple),
        text=safe_text,
        style=styles(),
        box=st.one_of(st.none(), boxes()),
        frame_id=st.integers(0, 3),
        locator=st.one_of(st.none(), st.just("/html[1]/body[1]/div[1]")),
    )
    return st.recursive(
        leaf,
        lambda kids: st.builds(
            DomNode,
            tag=st.sampled_from(["div", "section", "body"]),
            children=st.lists(kids, max_size=3).map(tuple),
            style=styles(),
            box=st.one_of(st.none(), boxes()),
        ),
        max_leaves=max_leaves,
    )


@st.composite
def screenshots(draw):
    w, h = draw(st.integers(1, 6)), draw(st.integers(1, 6))
    data = draw(st.binary(min_size=w * h * 3, max_size=w * h * 3))
    return Screenshot(w, h, data)


@st.composite
def stage_captures(draw, stage: Stage):
    actions = tuple(
        InteractionEvent(stage, f"/html[1]/body[1]/button[{i + 1}]", draw(safe_text), i + 1, draw(st.sampled_from(["click", "scroll"])), draw(st.one_of(st.none(), st.just("OptIn"))))
        for i in range(draw(st.integers(0, 3)))
    )
    return StageCapture(
        stage=stage,
        dom=draw(dom_trees()),
        screenshot=draw(screenshots()),
        cookies=tuple(draw(jars(stage, max_size=8))),
        captured_at=draw(st.integers(NOW, NOW + 10_000)),
        actions=actions,
    )


@st.composite
def revocations(draw):
    src = draw(st.sampled_from(list(RevocationSource)))
    if src is RevocationSource.NOT_FOUND:
        return RevocationInfo(src, None, None, draw(st.booleans()))
    return RevocationInfo(src, draw(st.one_of(st.none(), st.integers(1, 5))), draw(st.one_of(st.none(), st.integers(1, 5))), draw(st.booleans()))


@st.composite
def crawl_records(draw):
    load_ok = draw(st.booleans())
    if not load_ok:
        return CrawlRecord("https://down.example/", "https://down.example/", False, notes=(draw(safe_text),))
    extra = draw(st.lists(st.sampled_from([Stage.OPT_IN, Stage.OPT_OUT, Stage.CLOSE]), unique=True))
    stages = {s: draw(stage_captures(s)) for s in [Stage.INITIAL, *extra]}
    omitted = {s: "control absent" for s in Stage if s not in stages}
    return CrawlRecord(
        requested_url="https://www.example.com/",
        final_url=draw(st.sampled_from(["https://www.example.com/", "https://example.com/home"])),
        load_ok=True,
        stages=stages,
        robots_allowed=True,
        detected_language=draw(st.one_of(st.none(), st.sampled_from(["en", "de", "fr"]))),
        translation_applied=draw(st.booleans()),
        revocation=draw(st.one_of(st.none(), revocations())),
        clicks_opt_in=draw(st.one_of(st.none(), st.integers(1, 4))),
        clicks_opt_out=draw(st.one_of(st.none(), st.integers(1, 4))),
        opt_out_reachable=draw(st.one_of(st.none(), st.booleans())),
        omitted_stages=omitted,
        subpages=tuple(Subpage(f"https://www.example.com/p{i}", draw(safe_text), draw(st.booleans())) for i in range(draw(st.integers(0, 2)))),
        notes=tuple(draw(st.lists(safe_text, max_size=2))),
    )
