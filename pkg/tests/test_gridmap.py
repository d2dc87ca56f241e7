import pytest

from planrl.errors import ParseError, ValidationError
from planrl.grid.gridmap import load_map, serialize_map


def test_default_findtreasure_map_topology(ft_map):
    # two rooms, one lever, one trap, one treasure
    assert len(ft_map.levers) == 1
    assert len(ft_map.traps) == 1
    assert len(ft_map.treasures) == 1
    assert len(ft_map.gates) == 1
    assert "upper" in ft_map.named_regions and "lower" in ft_map.named_regions
    assert ft_map.named_regions["upper"].isdisjoint(ft_map.named_regions["lower"])
    assert ft_map.box_start is None


def test_default_movebox_map_topology(mb_map):
    assert mb_map.box_start == (4, 7)
    assert len(mb_map.goals) == 3
    assert len(mb_map.traps) == 3
    assert set(mb_map.key_spots) == {"1", "2", "3"}
    # trap cells are excluded from the mid zone on purpose
    assert mb_map.named_regions["mid_zone"].isdisjoint(mb_map.traps)


def test_roundtrip_serialize_load(ft_map_text, mb_map_text):
    for text in (ft_map_text, mb_map_text):
        m1 = load_map(text)
        m2 = load_map(serialize_map(m1))
        assert m1 == m2


def test_missing_agent_start_rejected():
    text = "#####\n#...#\n#####\n"
    with pytest.raises(ValidationError, match="agent starts"):
        load_map(text)


def test_unknown_character_rejected():
    text = "#####\n#r?b#\n#####\n"
    with pytest.raises(ParseError, match="unknown cell"):
        load_map(text)


def test_ragged_rows_rejected():
    text = "#####\n#rb#\n#####\n"
    with pytest.raises(ParseError, match="width"):
        load_map(text)


def test_two_box_starts_rejected():
    text = "######\n#rBBb#\n######\n"
    with pytest.raises(ValidationError, match="box"):
        load_map(text)


def test_region_on_wall_rejected():
    text = "#####\n#r.b#\n#####\n\n[regions]\nbad: (0,0)-(1,1)\n"
    with pytest.raises(ValidationError, match="wall"):
        load_map(text)


def test_region_out_of_bounds_rejected():
    text = "#####\n#r.b#\n#####\n\n[regions]\nbad: (2,1)-(9,1)\n"
    with pytest.raises(ValidationError, match="bounds"):
        load_map(text)


def test_gate_must_separate_two_areas():
    # gate in the middle of one open room separates nothing
    text = "#####\n#rCb#\n#.. #".replace(" ", ".") + "\n#####\n"
    with pytest.raises(ValidationError, match="separate"):
        load_map(text)


def test_bad_region_line_location():
    text = "#####\n#r.b#\n#####\n\n[regions]\nnot a region\n"
    with pytest.raises(ParseError) as err:
        load_map(text)
    assert err.value.line == 6
