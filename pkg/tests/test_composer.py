"""Template, scheduling, and rewriter-guard tests."""

from __future__ import annotations

import asyncio
import math
import random
from decimal import ROUND_HALF_UP, Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wayfinder.composer import (
    DedupEntry,
    DedupMemory,
    Instruction,
    Priority,
    compose,
    compose_one,
    filter_and_schedule,
    guard_passes,
    llm_rewrite,
    round_half_up,
    step_count,
)
from wayfinder.interpreter import Direction, NavCue, SignClass


def cue(sign_class, direction, distance):
    return NavCue(sign_class=sign_class, direction=direction, distance_m=distance, confidence=0.9)


class TestRounding:
    def test_half_up_vs_floor_oracle(self):
        # independent oracle: floor(x + 0.5) on a 0.01 grid, where both
        # formulations are exact
        rng = random.Random(41)
        for _ in range(500):
            value = rng.randrange(0, 10_000) / 100.0
            assert round_half_up(value) == math.floor(value + 0.5)

    def test_exact_halves_go_up(self):
        assert round_half_up(2.5) == 3
        assert round_half_up(0.5) == 1
        assert round_half_up(9.5) == 10

    def test_matches_decimal_semantics(self):
        for value in (3.05 * 3.2808, 1.9 * 3.2808, 3.5 / 0.7, 0.49, 10.501):
            want = int(Decimal(repr(value)).quantize(Decimal("1"), rounding=ROUND_HALF_UP))
            assert round_half_up(value) == want


class TestCompose:
    def test_exit_door_ten_feet_right(self):
        # 3.05 m x 3.2808 ft/m = 10.00644 ft -> 10
        assert round_half_up(3.05 * 3.2808) == 10
        [inst] = compose([cue(SignClass.EXIT_DOOR, Direction.RIGHT, 3.05)], "feet", 7)
        assert inst.text == "There's an exit door 10 feet ahead on your right"
        assert inst.priority is Priority.GUIDANCE
        assert inst.dedup_key == "EXIT_DOOR:right"
        assert inst.frame_seq == 7
        assert inst.rewritten is False

    def test_stairs_caution_five_steps(self):
        assert 3.5 / 0.7 == pytest.approx(5.0)
        [inst] = compose([cue(SignClass.STAIRS, Direction.AHEAD, 3.5)])
        assert inst.text == "Caution: stairs approaching in 5 steps"
        assert inst.priority is Priority.CAUTION

    def test_empty_cues(self):
        assert compose([]) == []

    def test_null_distance_omits_distance_phrase(self):
        [inst] = compose([cue(SignClass.EXIT_DOOR, Direction.AHEAD, None)])
        assert inst.text == "There's an exit door straight ahead"
        assert inst.distance_m is None

    def test_meters_units(self):
        [inst] = compose([cue(SignClass.ELEVATOR, Direction.LEFT, 3.2)], "meters")
        assert inst.text == "There's an elevator 3 meters ahead on your left"

    def test_article_selection(self):
        [elevator] = compose([cue(SignClass.ELEVATOR, Direction.AHEAD, None)])
        assert elevator.text.startswith("There's an elevator")
        [restroom] = compose([cue(SignClass.RESTROOM, Direction.AHEAD, None)])
        assert restroom.text.startswith("There's a restroom")

    def test_obstacle_caution_without_distance(self):
        [inst] = compose([cue(SignClass.OBSTACLE, Direction.AHEAD, None)])
        assert inst.text == "Caution: obstacle straight ahead"
        assert inst.priority is Priority.CAUTION

    def test_stairs_without_distance_still_warns(self):
        [inst] = compose([cue(SignClass.STAIRS, Direction.LEFT, None)])
        assert inst.text == "Caution: stairs on your left"
        assert inst.priority is Priority.CAUTION

    def test_step_count_floor_is_one(self):
        assert step_count(0.1) == 1
        assert step_count(0.7) == 1
        assert step_count(3.5) == 5

    def test_bad_units_rejected(self):
        with pytest.raises(ValueError):
            compose([], units="furlongs")

    @settings(max_examples=300, deadline=None)
    @given(
        sign_class=st.sampled_from(list(SignClass)),
        direction=st.sampled_from(list(Direction)),
        distance=st.one_of(st.none(), st.floats(min_value=0.1, max_value=500)),
        units=st.sampled_from(["feet", "meters"]),
    )
    def test_template_totality(self, sign_class, direction, distance, units):
        c = NavCue(sign_class=sign_class, direction=direction, distance_m=distance, confidence=0.5)
        inst = compose_one(c, units, 1)
        assert inst.text
        assert (inst.priority is Priority.CAUTION) == c.hazard
        assert inst.dedup_key == f"{sign_class.value}:{direction.value}"


def inst(key="EXIT_DOOR:right", priority=Priority.GUIDANCE, distance=3.0, seq=1, text="t"):
    return Instruction(
        text=text, priority=priority, dedup_key=key, distance_m=distance, frame_seq=seq
    )


class TestScheduler:
    def test_repeat_within_window_dropped(self):
        memory = DedupMemory()
        first = filter_and_schedule([inst()], memory, now=1000.0)
        assert len(first) == 1
        second = filter_and_schedule([inst(seq=2)], memory, now=4000.0)
        assert second == []

    def test_repeat_after_window_dispatched(self):
        memory = DedupMemory()
        filter_and_schedule([inst()], memory, now=0.0)
        again = filter_and_schedule([inst(seq=2)], memory, now=5000.0)
        assert len(again) == 1

    def test_distance_change_over_20_percent_reopens(self):
        memory = DedupMemory()
        filter_and_schedule([inst(distance=3.0)], memory, now=0.0)
        # 3.0 -> 2.0 is a 33% change: dispatched despite the window
        moved = filter_and_schedule([inst(distance=2.0, seq=2)], memory, now=3000.0)
        assert len(moved) == 1

    def test_distance_change_at_exactly_20_percent_stays_quiet(self):
        memory = DedupMemory()
        filter_and_schedule([inst(distance=3.0)], memory, now=0.0)
        same = filter_and_schedule([inst(distance=2.4, seq=2)], memory, now=3000.0)
        assert same == []
        moved = filter_and_schedule([inst(distance=2.39, seq=3)], memory, now=3100.0)
        assert len(moved) == 1

    def test_caution_ordered_before_guidance(self):
        memory = DedupMemory()
        batch = [
            inst(key="EXIT_DOOR:left", priority=Priority.GUIDANCE, distance=2.0),
            inst(key="STAIRS:ahead", priority=Priority.CAUTION, distance=3.0, text="c"),
        ]
        out = filter_and_schedule(batch, memory, now=0.0)
        assert [i.priority for i in out] == [Priority.CAUTION, Priority.GUIDANCE]

    def test_priority_ties_sorted_by_nearer_distance(self):
        memory = DedupMemory()
        batch = [
            inst(key="DOOR:left", distance=5.0),
            inst(key="DOOR:right", distance=2.0),
            inst(key="ELEVATOR:left", distance=None),
        ]
        out = filter_and_schedule(batch, memory, now=0.0)
        assert [i.dedup_key for i in out] == ["DOOR:right", "DOOR:left", "ELEVATOR:left"]

    def test_stable_order_on_full_tie(self):
        memory = DedupMemory()
        batch = [
            inst(key="DOOR:left", distance=2.0),
            inst(key="DOOR:right", distance=2.0),
        ]
        out = filter_and_schedule(batch, memory, now=0.0)
        assert [i.dedup_key for i in out] == ["DOOR:left", "DOOR:right"]

    def test_gap_blocks_guidance(self):
        memory = DedupMemory()
        filter_and_schedule([inst(key="DOOR:left")], memory, now=0.0)
        blocked = filter_and_schedule([inst(key="DOOR:right", seq=2)], memory, now=1500.0)
        assert blocked == []
        # the blocked item was not remembered, so it fires once the gap opens
        opened = filter_and_schedule([inst(key="DOOR:right", seq=3)], memory, now=2000.0)
        assert len(opened) == 1

    def test_gap_boundary_is_inclusive(self):
        memory = DedupMemory()
        filter_and_schedule([inst(key="DOOR:left")], memory, now=0.0)
        out = filter_and_schedule([inst(key="DOOR:right")], memory, now=2000.0)
        assert len(out) == 1

    def test_caution_preempts_gap(self):
        memory = DedupMemory()
        filter_and_schedule([inst(key="DOOR:left")], memory, now=0.0)
        out = filter_and_schedule(
            [inst(key="STAIRS:ahead", priority=Priority.CAUTION)], memory, now=300.0
        )
        assert len(out) == 1

    def test_batch_internal_duplicate_key_fires_once(self):
        memory = DedupMemory()
        batch = [inst(), inst(seq=2)]
        out = filter_and_schedule(batch, memory, now=0.0)
        assert len(out) == 1

    def test_memory_untouched_when_nothing_dispatched(self):
        memory = DedupMemory()
        filter_and_schedule([inst(key="DOOR:left")], memory, now=0.0)
        filter_and_schedule([inst(key="DOOR:right")], memory, now=100.0)
        assert "DOOR:right" not in memory.entries
        assert memory.last_dispatch_ms == 0.0

    def test_dedup_soundness_over_random_streams(self):
        # two dispatches of one key, equal priority, <=20% apart in distance
        # must be >= dedup_window apart in time
        rng = random.Random(1234)
        for _ in range(40):
            memory = DedupMemory()
            history: list[tuple[float, Instruction]] = []
            now = 0.0
            for step in range(60):
                now += rng.uniform(0, 1500)
                batch = [
                    inst(
                        key=rng.choice(["DOOR:left", "DOOR:right", "STAIRS:ahead"]),
                        priority=rng.choice([Priority.GUIDANCE, Priority.CAUTION]),
                        distance=rng.choice([None, rng.uniform(1, 10)]),
                        seq=step,
                    )
                    for _ in range(rng.randint(0, 3))
                ]
                for item in filter_and_schedule(batch, memory, now):
                    history.append((now, item))
            by_key: dict[str, list[tuple[float, Instruction]]] = {}
            for t, item in history:
                by_key.setdefault(item.dedup_key, []).append((t, item))
            for events in by_key.values():
                for (t1, a), (t2, b) in zip(events, events[1:]):
                    if a.priority != b.priority:
                        continue  # priority bump legitimately reopens
                    if (a.distance_m is None) != (b.distance_m is None):
                        continue  # distance appearing/vanishing reopens
                    if a.distance_m is None:
                        unchanged = True
                    else:
                        unchanged = abs(b.distance_m - a.distance_m) <= 0.2 * a.distance_m
                    if unchanged:
                        assert t2 - t1 >= 5000.0, (t1, t2, a, b)

    def test_no_guidance_before_caution_in_any_batch(self):
        rng = random.Random(8)
        memory = DedupMemory()
        now = 0.0
        for step in range(100):
            now += rng.uniform(0, 4000)
            batch = [
                inst(
                    key=f"{rng.choice(['DOOR', 'STAIRS', 'EXIT_DOOR'])}:{rng.choice(['left', 'right', 'ahead'])}",
                    priority=rng.choice(list(Priority)),
                    distance=rng.choice([None, rng.uniform(1, 10)]),
                    seq=step,
                )
                for _ in range(rng.randint(0, 4))
            ]
            out = filter_and_schedule(batch, memory, now)
            seen_non_caution = False
            for item in out:
                if item.priority is not Priority.CAUTION:
                    seen_non_caution = True
                else:
                    assert not seen_non_caution, "caution ordered after guidance"


class FakeResponse:
    def __init__(self, status_code=200, body=None):
        self.status_code = status_code
        self._body = body

    def json(self):
        if self._body is None:
            raise ValueError("not json")
        return self._body


class FakeClient:
    def __init__(self, handler):
        self._handler = handler

    async def post(self, url, **kwargs):
        result = self._handler(url, kwargs)
        if asyncio.iscoroutine(result):
            result = await result
        if isinstance(result, Exception):
            raise result
        return result


TEMPLATE = Instruction(
    text="There's an exit door 10 feet ahead on your right",
    priority=Priority.GUIDANCE,
    dedup_key="EXIT_DOOR:right",
    distance_m=3.05,
    frame_seq=4,
)


class TestRewriter:
    def run(self, handler, instruction=TEMPLATE, timeout_ms=300.0):
        client = FakeClient(handler)
        return asyncio.run(
            llm_rewrite(instruction, client, "http://rw/v1/rewrite", timeout_ms)
        )

    def test_offline_falls_back(self):
        out = self.run(lambda u, k: ConnectionError("refused"))
        assert out.text == TEMPLATE.text
        assert out.rewritten is False

    def test_missing_number_keeps_template(self):
        out = self.run(
            lambda u, k: FakeResponse(body={"text": "Exit door ten steps to your right"})
        )
        assert out.text == TEMPLATE.text
        assert out.rewritten is False

    def test_echo_counts_as_rewritten(self):
        out = self.run(lambda u, k: FakeResponse(body={"text": TEMPLATE.text}))
        assert out.text == TEMPLATE.text
        assert out.rewritten is True

    def test_valid_rewrite_adopted(self):
        text = "The exit door is 10 feet ahead, on your right."
        out = self.run(lambda u, k: FakeResponse(body={"text": text}))
        assert out.text == text
        assert out.rewritten is True
        assert out.dedup_key == TEMPLATE.dedup_key

    def test_guard_is_case_insensitive(self):
        text = "EXIT DOOR in 10 feet on your RIGHT"
        out = self.run(lambda u, k: FakeResponse(body={"text": text}))
        assert out.rewritten is True

    def test_dropping_direction_keeps_template(self):
        out = self.run(lambda u, k: FakeResponse(body={"text": "Exit door 10 feet away"}))
        assert out.rewritten is False

    def test_timeout_falls_back(self):
        async def slow(url, kwargs):
            await asyncio.sleep(1.0)
            return FakeResponse(body={"text": TEMPLATE.text})

        out = self.run(lambda u, k: slow(u, k), timeout_ms=30.0)
        assert out.rewritten is False

    def test_http_error_falls_back(self):
        out = self.run(lambda u, k: FakeResponse(status_code=500))
        assert out.rewritten is False

    def test_garbage_body_falls_back(self):
        out = self.run(lambda u, k: FakeResponse(body=None))
        assert out.rewritten is False
        out = self.run(lambda u, k: FakeResponse(body={"nope": 1}))
        assert out.rewritten is False

    def test_stairs_template_needs_no_direction_word(self):
        stairs = Instruction(
            text="Caution: stairs approaching in 5 steps",
            priority=Priority.CAUTION,
            dedup_key="STAIRS:ahead",
            distance_m=3.5,
            frame_seq=9,
        )
        out = self.run(
            lambda u, k: FakeResponse(body={"text": "Careful, stairs coming up in 5 steps"}),
            instruction=stairs,
        )
        assert out.rewritten is True

    def test_guard_requires_template_direction_word(self):
        assert guard_passes(TEMPLATE, "exit door 10 right")
        assert not guard_passes(TEMPLATE, "exit door 10")
