import pytest

from dfrgrad.memory import BENCHMARK_SHAPES, benchmark_table, memory_counts

# Reference storage totals (naive, truncated, rounded reduction in %) at N_x = 30.
REFERENCE = {
    "ARAB": (13030, 10300, 21),
    "AUS": (93455, 89435, 4),
    "CHAR": (25700, 19610, 24),
    "CMU": (20192, 2852, 86),
    "ECG": (7352, 2852, 61),
    "JPVOW": (10179, 9369, 8),
    "KICK": (28022, 2852, 90),
    "LIB": (16245, 14955, 8),
    "NET": (42853, 13093, 69),
    "UWAV": (17828, 8438, 53),
    "WAF": (8732, 2852, 67),
    "WALK": (60332, 2852, 95),
}


@pytest.mark.parametrize("name", sorted(REFERENCE))
def test_reference_rows(name):
    r = benchmark_table()[name]
    naive, simplified, pct = REFERENCE[name]
    assert (r.naive, r.simplified, round(100 * r.reduction)) == (naive, simplified, pct)


def test_shapes_are_the_unique_inversion():
    # simplified fixes N_y; naive then fixes T
    for name, (naive, simplified, _) in REFERENCE.items():
        nys = [ny for ny in range(1, 200) if memory_counts(1, 30, ny).simplified == simplified]
        assert len(nys) == 1
        Ts = [T for T in range(1, 5000) if memory_counts(T, 30, nys[0]).naive == naive]
        assert [(Ts[0], nys[0])] == [BENCHMARK_SHAPES[name]] and len(Ts) == 1


def test_worked_example():
    r = memory_counts(500, 30, 3)
    assert (r.naive, r.simplified) == (18723, 3783)
    assert round(100 * r.reduction, 1) == 79.8


def test_monotonicity():
    red = [memory_counts(T, 30, 3).reduction for T in (1, 10, 100, 1000)]
    assert red == sorted(red)
    red = [memory_counts(200, 30, ny).reduction for ny in (2, 5, 20, 90)]
    assert red == sorted(red, reverse=True)
    assert all(0 <= memory_counts(T, 30, 2).reduction < 1 for T in (2, 3, 5000))


def test_single_step_series_has_negative_reduction():
    # one stored state in the naive count versus two in the truncated one
    r = memory_counts(1, 30, 2)
    assert r.naive - r.simplified == -30 and r.reduction < 0


def test_validation():
    with pytest.raises(ValueError):
        memory_counts(0, 30, 2)
    assert memory_counts(152, 30, 2).to_dict()["naive"] == 7352
