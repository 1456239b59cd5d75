import numpy as np
import pytest

from halognn import errors
from halognn.comm import RankRuntime, SimClock, all_reduce_sum, comm_report


def test_fresh_runtime_reports_zero():
    report = RankRuntime(3).report()
    assert report.num_ranks == 3
    assert not report.calls.any() and not report.bytes.any()
    assert report.steps == 0


def test_superstep_delivers_in_rank_order():
    runtime = RankRuntime(3)
    for rank in (2, 0, 1):
        runtime.post(rank, "gather", rank * 10)
    assert runtime.complete("gather") == [0, 10, 20]


def test_missing_rank():
    runtime = RankRuntime(2)
    runtime.post(0, "all_reduce", 1.0)
    with pytest.raises(errors.CollectiveError):
        runtime.complete("all_reduce")


def test_mismatched_collectives():
    runtime = RankRuntime(2)
    runtime.post(0, "all_reduce", 1.0)
    runtime.post(1, "a2a", 1.0)
    with pytest.raises(errors.CollectiveError):
        runtime.complete("all_reduce")


def test_double_post():
    runtime = RankRuntime(2)
    runtime.post(0, "all_reduce", 1.0)
    with pytest.raises(errors.CollectiveError):
        runtime.post(0, "na2a", 1.0)


def test_invalid_ranks():
    with pytest.raises(errors.CollectiveError):
        RankRuntime(0)
    with pytest.raises(errors.CollectiveError):
        RankRuntime(2).post(2, "all_reduce", 1.0)
    with pytest.raises(errors.CollectiveError):
        RankRuntime(2).exchange("all_reduce", [1.0])


def test_report_snapshot_and_reset():
    runtime = RankRuntime(2)
    all_reduce_sum(runtime, [np.ones(2), np.ones(2)])
    runtime.advance_step()
    before = comm_report(runtime)
    all_reduce_sum(runtime, [1.0, 2.0])
    delta = runtime.report().diff(before)
    assert delta.calls_of("all_reduce") == 2 and delta.bytes_of("all_reduce", 1) == 8
    assert before.calls_of("all_reduce", 0) == 1 and before.steps == 1
    with pytest.raises(ValueError):
        before.calls[0, 0] = 5
    runtime.reset()
    assert not runtime.report().calls.any() and runtime.steps == 0
    with pytest.raises(errors.CollectiveError):
        RankRuntime(3).report().diff(before)


def test_report_csv(tmp_path):
    runtime = RankRuntime(2)
    all_reduce_sum(runtime, [np.zeros(3), np.zeros(3)])
    text = runtime.report().to_csv(tmp_path / "comm.csv")
    lines = text.splitlines()
    assert lines[0] == "rank,collective,calls,bytes"
    assert lines[1] == "0,all_reduce,1,24"
    assert len(lines) == 1 + 2 * 3
    assert (tmp_path / "comm.csv").read_text() == text


def test_sim_clock_barrier():
    clock = SimClock(3)
    clock.charge(0, 1.0)
    clock.charge(1, 3.0)
    clock.charge(1, 0.5)
    assert clock.total() == 3.5
    clock.barrier(0.25)
    assert clock.elapsed == 3.75 and clock.communication == 0.25
    clock.charge(2, 1.0)
    assert clock.total() == 4.75
    clock.reset()
    assert clock.total() == 0.0
