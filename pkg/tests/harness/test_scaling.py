import pytest

from halognn import errors
from halognn.gnn import GnnConfig
from halognn.harness import ScalingConfig, ScalingReport, ScalingRow, choose_mesh, estimate_memory, weak_scaling
from halognn.harness import scaling
from halognn.harness.scaling import available_memory
from halognn.mesh import MeshConfig


@pytest.mark.parametrize(
    "loading, R, expected",
    [
        (125, 1, MeshConfig(1, 4)),
        (1000, 8, MeshConfig(6, 3)),
        (729, 2, MeshConfig(2, 5)),
    ],
)
def test_choose_mesh(loading, R, expected):
    assert choose_mesh(loading, R) == expected


def test_choose_mesh_respects_order_cap():
    config = choose_mesh(10**6, 1, max_order=2)
    assert config.poly_order <= 2
    assert abs(config.num_unique_nodes - 10**6) / 10**6 < 0.05


def test_estimate_memory_grows():
    mesh = MeshConfig(4, 3)
    small, large = GnnConfig.preset("small"), GnnConfig.preset("large")
    assert 0 < estimate_memory(mesh, small) < estimate_memory(mesh, large)
    assert estimate_memory(mesh, small) < estimate_memory(MeshConfig(8, 3), small)


@pytest.fixture(scope="module")
def report():
    return weak_scaling(ScalingConfig(loading=64, ranks=(1, 2), iterations=1, warmup=0))


def test_weak_scaling_rows(report):
    assert len(report.rows) == 6
    for row in report.rows:
        assert row.nodes > 0 and row.seconds_per_iteration > 0
        if row.num_ranks == 1:
            assert row.efficiency == pytest.approx(1.0)
        if row.mode == "none":
            assert row.bytes_halo == 0 and row.halo_calls == 0
            assert row.relative_throughput == 1.0
        else:
            # small preset: 4 layers, forward and backward
            assert row.halo_calls == 8
    assert report.find(1, "small", "na2a").bytes_halo == 0
    assert report.find(2, "small", "na2a").bytes_halo > 0
    assert report.find(2, "small", "na2a").neighbors_max == 1
    assert report.byte_violations() == []


def test_find_missing(report):
    with pytest.raises(KeyError):
        report.find(4, "small", "na2a")


def test_memory_guard():
    with pytest.raises(errors.SizeError):
        weak_scaling(ScalingConfig(loading=64, ranks=(1,), max_memory_bytes=1.0))


@pytest.mark.parametrize("kwargs", [{"loading": 0, "ranks": (1,)}, {"loading": 8, "ranks": ()}, {"loading": 8, "ranks": (1,), "iterations": 0}])
def test_invalid_scaling_config(kwargs):
    with pytest.raises(errors.SizeError):
        ScalingConfig(**kwargs)


@pytest.mark.parametrize("loading, R, order, expected", [(1000, 8, 3, MeshConfig(6, 3)), (1000, 8, 1, MeshConfig(18, 1))])
def test_choose_mesh_fixed_order(loading, R, order, expected):
    assert choose_mesh(loading, R, order=order) == expected


def test_choose_mesh_invalid_order():
    with pytest.raises(errors.SizeError):
        choose_mesh(1000, 8, order=0)
    with pytest.raises(errors.SizeError):
        choose_mesh(1000, 8, max_order=3, order=4)


def test_sweep_keeps_order(report):
    assert len({row.order for row in report.rows}) == 1


def test_available_memory():
    assert available_memory() > 0


def test_memory_guard_checks_before_building(monkeypatch):
    def build(*args, **kwargs):
        raise AssertionError("graphs built before the memory check")

    monkeypatch.setattr(scaling, "available_memory", lambda: 1.0)
    monkeypatch.setattr(scaling, "prepare_graphs", build)
    with pytest.raises(errors.SizeError, match="available"):
        weak_scaling(ScalingConfig(loading=64, ranks=(1, 2)))


def row(**overrides):
    values = dict(
        num_ranks=2,
        model="small",
        mode="na2a",
        elements=2,
        order=1,
        nodes=18,
        seconds_per_iteration=1.0,
        throughput=18.0,
        efficiency=0.9,
        relative_throughput=0.8,
        halo_min=9,
        halo_max=9,
        halo_avg=9.0,
        neighbors_min=1,
        neighbors_max=1,
        neighbors_avg=1.0,
        halo_calls=8,
        bytes_halo=100,
        bytes_allreduce=100,
    )
    return ScalingRow(**{**values, **overrides})


def test_bound_violations():
    config = ScalingConfig(loading=64, ranks=(2,))
    assert ScalingReport(config, (row(), row(mode="none", relative_throughput=float("nan")))).bound_violations() == []
    assert len(ScalingReport(config, (row(efficiency=1.2),)).bound_violations()) == 1
    assert len(ScalingReport(config, (row(efficiency=0.0, relative_throughput=1.06),)).bound_violations()) == 2
