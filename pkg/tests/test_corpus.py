import pytest

from keyrel import (
    InputError,
    corpus_get,
    generate,
    linear_relation,
    punctured_cube,
    quasigroup5,
    random_relation,
)


def test_entry_sizes():
    assert len(corpus_get("E1").relation) == 12
    e2 = corpus_get("E2").relation
    assert len(e2) == 16
    for z in (0, 2):
        assert sum(1 for t in e2.members if t[2] == z) == 8
    assert len(corpus_get("E3").relation) == 18
    with pytest.raises(InputError):
        corpus_get("E4")


def test_generators():
    assert len(linear_relation(3, 3)) == 9
    assert len(punctured_cube(3)) == 7
    assert len(punctured_cube(3, extra_hole=True)) == 6
    assert len(quasigroup5()) == 25

    twisted = linear_relation(3, 3, seed=5)
    assert twisted == linear_relation(3, 3, seed=5)
    assert len(twisted) == 9

    r1 = random_relation(3, 3, density=0.4, seed=7)
    assert r1 == random_relation(3, 3, density=0.4, seed=7)
    assert r1 != random_relation(3, 3, density=0.4, seed=8)

    with pytest.raises(InputError):
        linear_relation(3, 3, twists=[[0, 1, 1]] * 3)
    with pytest.raises(InputError):
        punctured_cube(1, extra_hole=True)


def test_generate_dispatcher():
    assert generate({"family": "linear", "k": 3, "n": 3}) == linear_relation(3, 3)
    assert generate({"family": "puncturedCube", "n": 3}) == punctured_cube(3)
    assert generate({"family": "quasigroup5"}) == quasigroup5()
    with pytest.raises(InputError):
        generate({"family": "unknown"})
