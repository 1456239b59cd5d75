from halognn.harness.consistency import (
    ConsistencyReport,
    ConsistencyRow,
    EquivalenceReport,
    GradientReport,
    compare_outputs,
    training_equivalence,
    verify_consistency,
    verify_gradients,
)
from halognn.harness.data import prepare_graphs, rescale_to_tgv_box, tgv_features, tgv_field
from halognn.harness.report import (
    PUBLISHED_PARAMETER_COUNTS,
    format_parameter_report,
    parameter_report,
    render_csv,
    write_consistency_csv,
    write_equivalence_csv,
    write_scaling_csv,
)
from halognn.harness.scaling import ScalingConfig, ScalingReport, ScalingRow, choose_mesh, estimate_memory, weak_scaling
