"""Interpreter tests: classification against an independent edit-distance
oracle, thirds partition, pinhole arithmetic, and evidence fusion."""

from __future__ import annotations

import functools
import random
import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wayfinder.backends import RawObservation, TextRegion, VqaAnswer
from wayfinder.interpreter import (
    Calibration,
    Direction,
    NavCue,
    SignClass,
    classify_signage,
    estimate_direction,
    estimate_distance,
    interpret,
    levenshtein,
    load_lexicon,
    parse_lexicon,
    quad_height_px,
)


def oracle_distance(a: str, b: str) -> int:
    """Plain recursive edit distance; independent of the shipped DP version."""

    @functools.lru_cache(maxsize=None)
    def rec(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        return min(
            rec(i - 1, j) + 1,
            rec(i, j - 1) + 1,
            rec(i - 1, j - 1) + (a[i - 1] != b[j - 1]),
        )

    return rec(len(a), len(b))


LEXICON = load_lexicon()


def rect(x0: float, y0: float, x1: float, y1: float):
    return ((x0, y0), (x1, y0), (x1, y1), (x0, y1))


CAL = Calibration(focal_length_px=800.0, real_heights_m={SignClass.EXIT_DOOR: 0.19})


class TestLevenshtein:
    def test_matches_oracle_on_random_pairs(self):
        rng = random.Random(11)
        alphabet = string.ascii_lowercase[:6]
        for _ in range(400):
            a = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 8)))
            b = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 8)))
            assert levenshtein(a, b) == oracle_distance(a, b)

    def test_known_values(self):
        assert levenshtein("exit", "exit") == 0
        assert levenshtein("exit", "ex1t") == 1
        assert levenshtein("", "abc") == 3
        assert levenshtein("kitten", "sitting") == 3


class TestClassify:
    def test_exit_exact(self):
        assert classify_signage("EXIT", LEXICON) == (SignClass.EXIT_DOOR, 1.0)

    def test_one_typo(self):
        # the oracle confirms the premise: EX1T is exactly one edit from EXIT
        assert oracle_distance("ex1t", "exit") == 1
        assert classify_signage("EX1T", LEXICON) == (SignClass.EXIT_DOOR, 0.7)

    def test_empty_string(self):
        assert classify_signage("", LEXICON) == (SignClass.UNKNOWN_SIGN, 0.0)
        assert classify_signage("   ", LEXICON) == (SignClass.UNKNOWN_SIGN, 0.0)

    def test_case_and_whitespace_insensitive(self):
        assert classify_signage("  exit \n", LEXICON) == (SignClass.EXIT_DOOR, 1.0)
        assert classify_signage("Stairs", LEXICON) == (SignClass.STAIRS, 1.0)

    def test_garbage(self):
        assert classify_signage("q9@@zz!!", LEXICON) == (SignClass.UNKNOWN_SIGN, 0.0)

    def test_lexicon_round_trip(self):
        for keyword, sign_class in LEXICON.items():
            assert classify_signage(keyword, LEXICON) == (sign_class, 1.0)
            assert classify_signage(keyword.upper(), LEXICON) == (sign_class, 1.0)

    def test_random_inputs_match_reference(self):
        def reference(text):
            needle = text.casefold().strip()
            if not needle:
                return (SignClass.UNKNOWN_SIGN, 0.0)
            if needle in LEXICON:
                return (LEXICON[needle], 1.0)
            for keyword, sign_class in LEXICON.items():
                if oracle_distance(needle, keyword) == 1:
                    return (sign_class, 0.7)
            return (SignClass.UNKNOWN_SIGN, 0.0)

        rng = random.Random(23)
        keywords = list(LEXICON)
        samples = []
        for _ in range(300):
            base = rng.choice(keywords)
            mode = rng.randrange(4)
            if mode == 0:
                samples.append(base)
            elif mode == 1:  # one random substitution
                i = rng.randrange(len(base))
                samples.append(base[:i] + rng.choice(string.ascii_lowercase) + base[i + 1 :])
            elif mode == 2:  # one insertion
                i = rng.randrange(len(base) + 1)
                samples.append(base[:i] + rng.choice(string.ascii_lowercase) + base[i:])
            else:
                samples.append(
                    "".join(rng.choice(string.ascii_lowercase) for _ in range(rng.randint(0, 9)))
                )
        for text in samples:
            assert classify_signage(text, LEXICON) == reference(text)

    def test_total_and_deterministic(self):
        for text in ("", "EXIT", "\0\0", "漢字", "a" * 500):
            first = classify_signage(text, LEXICON)
            assert classify_signage(text, LEXICON) == first


class TestLexiconParsing:
    def test_duplicate_keyword_rejected(self):
        from wayfinder.errors import ConfigError

        with pytest.raises(ConfigError):
            parse_lexicon("EXIT\tEXIT_DOOR\nexit\tDOOR\n")

    def test_unknown_class_rejected(self):
        from wayfinder.errors import ConfigError

        with pytest.raises(ConfigError):
            parse_lexicon("EXIT\tNOT_A_CLASS\n")

    def test_missing_tab_rejected(self):
        from wayfinder.errors import ConfigError

        with pytest.raises(ConfigError):
            parse_lexicon("EXIT EXIT_DOOR\n")

    def test_comments_and_blanks_skipped(self):
        table = parse_lexicon("# header\n\nEXIT\tEXIT_DOOR\n")
        assert table == {"exit": SignClass.EXIT_DOOR}


class TestDirection:
    W = 640

    def test_center_is_ahead(self):
        assert estimate_direction(rect(300, 0, 340, 40), self.W) is Direction.AHEAD

    def test_right_tenth(self):
        q = rect(0.9 * self.W - 5, 0, 0.9 * self.W + 5, 10)
        assert estimate_direction(q, self.W) is Direction.RIGHT

    def test_left_third(self):
        assert estimate_direction(rect(0, 0, 20, 20), self.W) is Direction.LEFT

    def test_boundaries_are_ahead(self):
        third = self.W / 3
        on_first = rect(third - 5, 0, third + 5, 10)  # centroid exactly W/3
        assert estimate_direction(on_first, self.W) is Direction.AHEAD
        on_second = rect(2 * third - 5, 0, 2 * third + 5, 10)
        assert estimate_direction(on_second, self.W) is Direction.AHEAD

    @settings(max_examples=300, deadline=None)
    @given(cx=st.floats(min_value=0, max_value=640), width=st.just(640))
    def test_partition_is_total(self, cx, width):
        q = ((cx, 0.0), (cx, 0.0), (cx, 10.0), (cx, 10.0))
        direction = estimate_direction(q, width)
        if cx < width / 3:
            assert direction is Direction.LEFT
        elif cx > 2 * width / 3:
            assert direction is Direction.RIGHT
        else:
            assert direction is Direction.AHEAD


class TestDistance:
    def test_pinhole_arithmetic(self):
        cal = Calibration(focal_length_px=800.0, real_heights_m={SignClass.DOOR: 0.25})
        q = rect(0, 0, 100, 40)  # h_px = 40
        assert estimate_distance(q, SignClass.DOOR, cal) == pytest.approx(5.0)

    def test_tiny_quad_untrusted(self):
        q = rect(0, 0, 100, 2)  # h_px = 2 < 4
        assert estimate_distance(q, SignClass.EXIT_DOOR, CAL) is None

    def test_uncalibrated_class(self):
        q = rect(0, 0, 100, 40)
        assert estimate_distance(q, SignClass.STAIRS, CAL) is None

    def test_doubling_height_halves_distance(self):
        rng = random.Random(3)
        for _ in range(100):
            h = rng.uniform(4.0, 200.0)
            q1 = rect(0, 0, 100, h)
            q2 = rect(0, 0, 100, 2 * h)
            d1 = estimate_distance(q1, SignClass.EXIT_DOOR, CAL)
            d2 = estimate_distance(q2, SignClass.EXIT_DOOR, CAL)
            assert d1 == pytest.approx(2 * d2)

    def test_scale_invariance(self):
        rng = random.Random(9)
        for _ in range(100):
            h = rng.uniform(4.0, 100.0)
            k = rng.uniform(1.1, 5.0)
            base = estimate_distance(rect(0, 0, 50, h), SignClass.EXIT_DOOR, CAL)
            scaled_cal = Calibration(
                focal_length_px=CAL.focal_length_px * k,
                real_heights_m=dict(CAL.real_heights_m),
            )
            scaled = estimate_distance(rect(0, 0, 50, h * k), SignClass.EXIT_DOOR, scaled_cal)
            assert scaled == pytest.approx(base)

    def test_height_is_mean_of_side_edges(self):
        trapezoid = ((0.0, 0.0), (100.0, 10.0), (100.0, 50.0), (0.0, 30.0))
        assert quad_height_px(trapezoid) == pytest.approx((30.0 + 40.0) / 2)

    def test_calibration_validation(self):
        with pytest.raises(ValueError):
            Calibration(focal_length_px=0.0)
        with pytest.raises(ValueError):
            Calibration(real_heights_m={SignClass.EXIT_DOOR: -1.0})


DIMS = (640, 480)


def observation(regions=(), answers=()):
    return RawObservation(
        frame_seq=1,
        text_regions=tuple(regions),
        vqa_answers=tuple(answers),
        backend_name="stub",
    )


class TestInterpret:
    def test_exit_region_right_third(self):
        # stepwise cross-check: the cue must equal the composition of the
        # three single-purpose estimators
        region = TextRegion(rect(500, 100, 620, 150), score=0.95, text="EXIT")
        [cue] = interpret(observation([region]), DIMS, CAL, LEXICON)
        assert cue.sign_class is SignClass.EXIT_DOOR
        assert cue.direction is estimate_direction(region.quad, 640)
        assert cue.direction is Direction.RIGHT
        assert cue.distance_m == pytest.approx(
            estimate_distance(region.quad, SignClass.EXIT_DOOR, CAL)
        )
        assert cue.distance_m == pytest.approx(800 * 0.19 / 50)
        assert cue.hazard is False
        assert cue.confidence == pytest.approx(0.95)

    def test_empty_observation(self):
        assert interpret(observation(), DIMS, CAL, LEXICON) == []

    def test_vilt_style_contradiction_region_wins(self):
        # region reads EXIT at full confidence, the VQA model calls it a
        # stop sign at 0.6: the text region carries the day
        region = TextRegion(rect(200, 100, 440, 180), score=1.0, text="EXIT")
        vqa = VqaAnswer("Is this an exit sign?", "stop sign", 0.6)
        cues = interpret(observation([region], [vqa]), DIMS, CAL, LEXICON)
        assert [c.sign_class for c in cues] == [SignClass.EXIT_DOOR]
        assert cues[0].confidence == pytest.approx(1.0)

    def test_confident_denial_beats_weak_region(self):
        region = TextRegion(rect(200, 100, 440, 180), score=1.0, text="EX1T")  # 0.7
        vqa = VqaAnswer("Is this an exit sign?", "no", 0.9)
        cues = interpret(observation([region], [vqa]), DIMS, CAL, LEXICON)
        assert all(c.sign_class is not SignClass.EXIT_DOOR for c in cues)

    def test_tie_goes_to_region(self):
        region = TextRegion(rect(200, 100, 440, 180), score=0.6, text="EXIT")  # 0.6
        vqa = VqaAnswer("Is this an exit sign?", "no", 0.6)
        cues = interpret(observation([region], [vqa]), DIMS, CAL, LEXICON)
        assert [c.sign_class for c in cues] == [SignClass.EXIT_DOOR]

    def test_affirmative_vqa_without_regions(self):
        vqa = VqaAnswer("Is this an exit sign?", "yes", 0.9)
        [cue] = interpret(observation([], [vqa]), DIMS, CAL, LEXICON)
        assert cue.sign_class is SignClass.EXIT_DOOR
        assert cue.direction is Direction.AHEAD
        assert cue.distance_m is None
        assert cue.confidence == pytest.approx(0.9)

    def test_affirmative_vqa_anchors_to_dominant_region(self):
        # the unread region localizes the sign; VQA supplies the class
        region = TextRegion(rect(520, 100, 620, 150), score=0.9, text=None)
        vqa = VqaAnswer("Is this an exit sign?", "yes", 0.8)
        [cue] = interpret(observation([region], [vqa]), DIMS, CAL, LEXICON)
        assert cue.sign_class is SignClass.EXIT_DOOR
        assert cue.direction is Direction.RIGHT
        assert cue.distance_m == pytest.approx(800 * 0.19 / 50)
        assert cue.source_region is region

    def test_affirmative_vqa_does_not_duplicate_region_cue(self):
        region = TextRegion(rect(500, 100, 620, 150), score=0.95, text="EXIT")
        vqa = VqaAnswer("Is this an exit sign?", "yes", 0.9)
        cues = interpret(observation([region], [vqa]), DIMS, CAL, LEXICON)
        assert len([c for c in cues if c.sign_class is SignClass.EXIT_DOOR]) == 1

    def test_summary_triggers_obstacle(self):
        vqa = VqaAnswer("Give a summary of the image", "a person standing in a hallway", 0.8)
        [cue] = interpret(observation([], [vqa]), DIMS, CAL, LEXICON)
        assert cue.sign_class is SignClass.OBSTACLE
        assert cue.direction is Direction.AHEAD
        assert cue.distance_m is None
        assert cue.hazard is True

    def test_multiple_triggers_one_obstacle_cue(self):
        answers = [
            VqaAnswer("Give a summary of the image", "a chair by the wall", 0.5),
            VqaAnswer("label", "person", 0.97),
        ]
        cues = interpret(observation([], answers), DIMS, CAL, LEXICON)
        obstacles = [c for c in cues if c.sign_class is SignClass.OBSTACLE]
        assert len(obstacles) == 1
        assert obstacles[0].confidence == pytest.approx(0.97)

    def test_unclassifiable_and_unread_regions_skipped(self):
        regions = [
            TextRegion(rect(0, 0, 50, 20), score=0.9, text="zzzzzz"),
            TextRegion(rect(0, 0, 50, 20), score=0.9, text=None),
        ]
        assert interpret(observation(regions), DIMS, CAL, LEXICON) == []

    def test_stairs_cue_is_hazard(self):
        region = TextRegion(rect(300, 200, 400, 240), score=0.9, text="STAIRS")
        [cue] = interpret(observation([region]), DIMS, CAL, LEXICON)
        assert cue.sign_class is SignClass.STAIRS
        assert cue.hazard is True

    def test_nav_cue_rejects_nonpositive_distance(self):
        with pytest.raises(ValueError):
            NavCue(SignClass.DOOR, Direction.AHEAD, 0.0, 0.5)
        with pytest.raises(ValueError):
            NavCue(SignClass.DOOR, Direction.AHEAD, -2.0, 0.5)

    @settings(max_examples=200, deadline=None)
    @given(
        texts=st.lists(
            st.sampled_from(["EXIT", "STAIRS", "LIFT", "junk", "WC", None, "EX1T"]),
            max_size=4,
        ),
        answers=st.lists(
            st.tuples(
                st.sampled_from(
                    ["Is this an exit sign?", "Give a summary of the image", "label"]
                ),
                st.sampled_from(["yes", "no", "a person", "stop sign", "empty hallway", "cart"]),
                st.floats(min_value=0.0, max_value=1.0),
            ),
            max_size=3,
        ),
        scores=st.data(),
    )
    def test_hazard_flag_invariant(self, texts, answers, scores):
        regions = []
        for i, text in enumerate(texts):
            score = scores.draw(st.floats(min_value=0.05, max_value=1.0))
            regions.append(TextRegion(rect(i * 50, 0, i * 50 + 40, 30), score, text))
        obs = observation(regions, [VqaAnswer(q, a, c) for q, a, c in answers])
        for cue in interpret(obs, DIMS, CAL, LEXICON):
            assert cue.hazard == (cue.sign_class in (SignClass.STAIRS, SignClass.OBSTACLE))
            if cue.distance_m is not None:
                assert cue.distance_m > 0
            assert 0.0 <= cue.confidence <= 1.0
