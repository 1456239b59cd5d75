from abc import ABC


class HaloGnnError(Exception, ABC):
    ...


# errors raised by / related to mesh generation and partitioning
class MeshError(HaloGnnError):
    ...


class MeshConfigError(MeshError):
    ...


class InvalidOrderError(MeshConfigError):
    ...


class PartitionError(MeshError):
    ...


# errors raised by / related to distributed graph construction
class GraphError(HaloGnnError):
    ...


class EmptyPartitionError(GraphError):
    ...


class IntegrityError(GraphError):
    ...


class UninitializedError(GraphError):
    ...


# errors raised by the numerical core
class NumericsError(HaloGnnError):
    ...


class ShapeError(NumericsError):
    ...


class OptimizerError(NumericsError):
    ...


class CheckpointError(NumericsError):
    ...


# errors raised by the simulated rank runtime
class CommError(HaloGnnError):
    ...


class CollectiveError(CommError):
    ...


class ExchangeModeError(CommError):
    ...


# errors raised by / related to the gnn model and training
class ModelError(HaloGnnError):
    ...


class ModelConfigError(ModelError):
    ...


class DivergenceError(ModelError):
    ...


# errors raised by verification and benchmarking
class HarnessError(HaloGnnError):
    ...


class SizeError(HarnessError):
    ...


class VerificationError(HarnessError):
    ...


# errors related to the command line
class UsageError(HaloGnnError):
    ...
