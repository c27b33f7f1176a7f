"""Benchmark task definitions: validation, serialization, content hashes,
and the geometric properties the benchmarks rely on."""

import json

import pytest

from beliefplan.geom2d import Pose2, contacts
from beliefplan.tasks import (
    FORMAT,
    builtin_names,
    builtin_task,
    load_task,
    resolve_task,
    save_task,
    task_from_dict,
    task_hash,
    task_to_dict,
    validate_task,
)

ALL = ("peg2d", "rail2d", "puzzle2d")


def max_depth(task, pose):
    worst = 0.0
    for shape in task.part:
        for obstacle, opose in task.scene:
            for c in contacts(shape, pose, obstacle, opose):
                worst = max(worst, c.depth)
    return worst


class TestBuiltins:
    def test_names(self):
        assert builtin_names() == sorted(ALL)

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="peg2d"):
            builtin_task("nosuch")

    @pytest.mark.parametrize("name", ALL)
    def test_validates(self, name):
        task = builtin_task(name)
        validate_task(task)  # must not raise
        assert task.name == name
        assert task.dt == 1e-3

    @pytest.mark.parametrize("name", ALL)
    def test_start_and_goal_at_most_touch(self, name):
        task = builtin_task(name)
        assert max_depth(task, task.start) <= task.contact.slop
        assert max_depth(task, task.goal.pose) <= task.contact.slop

    @pytest.mark.parametrize("name", ALL)
    def test_fresh_instances(self, name):
        a = builtin_task(name)
        b = builtin_task(name)
        assert a is not b
        assert task_hash(a) == task_hash(b)


class TestSerialization:
    @pytest.mark.parametrize("name", ALL)
    def test_dict_roundtrip_exact(self, name):
        task = builtin_task(name)
        d = task_to_dict(task)
        back = task_from_dict(d)
        assert task_to_dict(back) == d
        assert task_hash(back) == task_hash(task)

    def test_file_roundtrip_exact(self, tmp_path, peg_task):
        p = tmp_path / "task.json"
        save_task(peg_task, str(p))
        loaded = load_task(str(p))
        assert task_to_dict(loaded) == task_to_dict(peg_task)
        assert task_hash(loaded) == task_hash(peg_task)

    def test_json_is_fully_roundtrippable_text(self, tmp_path, rail_task):
        # Shortest-roundtrip float repr: dump -> load -> dump is a fixpoint.
        p = tmp_path / "t.json"
        save_task(rail_task, str(p))
        text1 = p.read_text()
        save_task(load_task(str(p)), str(p))
        assert p.read_text() == text1

    def test_format_tag_required(self, peg_task):
        d = task_to_dict(peg_task)
        d["format"] = "something/else"
        with pytest.raises(ValueError, match="not a task document"):
            task_from_dict(d)
        d.pop("format")
        with pytest.raises(ValueError, match="not a task document"):
            task_from_dict(d)
        assert task_to_dict(peg_task)["format"] == FORMAT

    def test_hash_sensitive_to_content(self, peg_task):
        base = task_hash(peg_task)
        d = task_to_dict(peg_task)
        d["goal"]["radius"] *= 2.0
        assert task_hash(task_from_dict(d)) != base
        d2 = task_to_dict(peg_task)
        d2["planner"]["budget"] += 1
        assert task_hash(task_from_dict(d2)) != base

    def test_penetrating_start_rejected(self, peg_task):
        d = task_to_dict(peg_task)
        d["start"] = [-0.09, -0.0125, 0.0]  # inside the left shoulder
        with pytest.raises(ValueError, match="start pose penetrates"):
            task_from_dict(d)

    def test_penetrating_goal_rejected(self, peg_task):
        d = task_to_dict(peg_task)
        d["goal"]["pose"] = [-0.09, -0.0125, 0.0]
        with pytest.raises(ValueError, match="goal pose penetrates"):
            task_from_dict(d)


class TestResolve:
    def test_builtin_name(self):
        assert resolve_task("rail2d").name == "rail2d"

    def test_path(self, tmp_path, puzzle_task):
        p = tmp_path / "puzzle.json"
        save_task(puzzle_task, str(p))
        t = resolve_task(str(p))
        assert task_hash(t) == task_hash(puzzle_task)

    def test_missing_path(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            resolve_task(str(tmp_path / "absent.json"))


class TestPegGeometry:
    def test_slot_is_five_percent_wider_than_peg(self, peg_task):
        (peg,) = peg_task.part
        xs = [v[0] for v in peg.vertices]
        peg_w = max(xs) - min(xs)
        left, right, _base = (poly for poly, _ in peg_task.scene)
        slot_w = min(v[0] for v in right.vertices) - max(
            v[0] for v in left.vertices
        )
        assert slot_w == pytest.approx(1.05 * peg_w, rel=1e-12)

    def test_slot_depth_matches_peg_length(self, peg_task):
        (peg,) = peg_task.part
        ys = [v[1] for v in peg.vertices]
        left = peg_task.scene[0][0]
        depth = max(v[1] for v in left.vertices) - min(
            v[1] for v in left.vertices
        )
        assert depth == pytest.approx((max(ys) - min(ys)) / 2, rel=1e-12)

    def test_goal_inside_slot_start_above(self, peg_task):
        (peg,) = peg_task.part
        left = peg_task.scene[0][0]
        table_top = max(v[1] for v in left.vertices)
        peg_bottom = min(v[1] for v in peg.vertices)
        assert peg_task.goal.pose.y + peg_bottom < table_top
        assert peg_task.start.y + peg_bottom > table_top


class TestRailGeometry:
    def test_zero_nominal_clearance(self, rail_task):
        llobe, rlobe = rail_task.part
        gap = min(v[0] for v in rlobe.vertices) - max(
            v[0] for v in llobe.vertices
        )
        crown = rail_task.scene[0][0]
        crown_w = max(v[0] for v in crown.vertices) - min(
            v[0] for v in crown.vertices
        )
        assert gap == pytest.approx(crown_w, abs=0.0)

    def test_seated_goal_rests_on_plate(self, rail_task):
        # At the goal pose the lobe bottoms coincide with the plate top.
        llobe, _ = rail_task.part
        plate = rail_task.scene[1][0]
        plate_top = max(v[1] for v in plate.vertices)
        lobe_bottom = min(v[1] for v in llobe.vertices) + rail_task.goal.pose.y
        assert lobe_bottom == pytest.approx(plate_top, abs=1e-12)

    def test_chamfers_present(self, rail_task):
        # The crown profile is a hexagon (two 45 degree top corners cut),
        # the lobes pentagons (inner tip corner cut).
        crown = rail_task.scene[0][0]
        assert len(crown.vertices) == 6
        for lobe in rail_task.part:
            assert len(lobe.vertices) == 5


class TestPuzzleGeometry:
    def test_straight_line_descent_blocked(self, puzzle_task):
        # The naive start-to-goal segment must collide hard somewhere,
        # otherwise the task would not need the dog-leg.
        s, g = puzzle_task.start, puzzle_task.goal.pose
        worst = 0.0
        for i in range(1, 64):
            f = i / 64
            pose = Pose2(
                s.x + f * (g.x - s.x), s.y + f * (g.y - s.y), 0.0
            )
            worst = max(worst, max_depth(puzzle_task, pose))
        assert worst > 1e-3

    def test_goal_under_overhang(self, puzzle_task):
        overhang = puzzle_task.scene[0][0]
        bottom = min(v[1] for v in overhang.vertices)
        assert puzzle_task.goal.pose.y < bottom
