from kfoldpi.inference.conformal import (
    ConformalModel,
    IntervalOptions,
    PredictionInterval,
    conformal_quantile,
    kfold_conformal,
    predict_interval,
    predict_intervals,
    split_conformal,
)
from kfoldpi.inference.harness import (
    AggregateSummary,
    Aggregator,
    MethodSpec,
    RealDataRunner,
    SimulationRunner,
    aggregate,
    parse_method,
    run_real_dataset,
    run_scenario,
    run_simulation,
)
from kfoldpi.inference.mlp import (
    REAL_DATA_MLP_CONFIG,
    SIMULATION_MLP_CONFIG,
    MlpConfig,
    MlpRegressor,
    MlpTrainer,
    train,
)
from kfoldpi.inference.report import ReportWriter, emit_boxplot_svg, summary_table
from kfoldpi.inference.rng import RngStream, derive_stream
from kfoldpi.inference.simulator import ScenarioSpec, generate_dataset, paper_scenario_grid
