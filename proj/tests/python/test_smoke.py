import pytest

import collapsekit as ck


def test_module_metadata():
    assert ck.__version__
    assert "ray-bucket" in ck.gallery_names()


def test_three_simplex_collapses_in_seven_steps():
    out = ck.collapse({"simplices": [[0, 1, 2, 3]]})
    assert out["status"] == "found"
    assert out["steps"] == 7


def test_triangle_boundary_is_not_collapsible():
    out = ck.collapse({"simplices": [[0, 1], [1, 2], [0, 2]]})
    assert out["status"] == "not-found-proven"


def test_gallery_round_trip():
    sys = ck.build("ray-endpoint", depth=5)
    assert sys.depth == 5
    again = ck.System(sys.to_dict())
    assert again.to_dict() == sys.to_dict()


def test_insulation_verdicts():
    assert ck.insulation(ck.build("ray-endpoint", depth=8))["verdict"] == "CERTIFIED-to-depth"
    assert ck.insulation(ck.build("ray-bucket", depth=8))["verdict"] == "COUNTEREXAMPLE-candidate"


def test_endpoint_remainder_is_one_region():
    rep = ck.sample_limit(ck.build("ray-endpoint", depth=8))
    assert rep["remainder_components"] == 1


def test_binary_tree_ends():
    assert ck.tree_ends(ck.build("tree-balls", depth=4), 4)["classes"] == 16


def test_thread_of_point():
    thread = ck.thread_of(ck.build("ray-endpoint", depth=3), [0.5], 3)
    assert [p["coords"][0] for p in thread] == [0.0, 0.5, 0.5, 0.5]


def test_bad_spec_raises():
    with pytest.raises(ValueError):
        ck.build("no-such-system")
