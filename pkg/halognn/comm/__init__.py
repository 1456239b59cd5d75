from halognn.comm.clock import SimClock
from halognn.comm.collectives import EXCHANGE_MODES, ExchangeMode, all_reduce_sum, all_to_all, parse_mode
from halognn.comm.exchange import all_reduce_vars, halo_exchange, max_buffer_rows
from halognn.comm.report import COLLECTIVE_KINDS, CollectiveKind, CommReport
from halognn.comm.runtime import RankRuntime


def comm_report(runtime: RankRuntime) -> CommReport:
    """Immutable snapshot of the runtime's per-rank call and byte counters."""
    return runtime.report()
