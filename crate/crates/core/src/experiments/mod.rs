//! Transfer runs, parameter sweeps and model cross-checks.

mod checks;
mod sweep;
mod system;

pub use checks::{
    compare_effective_vs_full, exponential_product, oracle_equivalence, oracle_report, EffectiveComparison,
    OracleOptions, OracleReport, ORACLE_LIMIT, SECTOR_LIMIT,
};
pub use sweep::{
    linear_grid, run_sweep, sweep_b, sweep_r, ConditionFlag, SweepPlan, SweepRecord, SweepResult, SweepVariable,
};
pub use system::{param_hash, run_transfer, CouplingSpec, CrosstalkSpec, SystemSpec, TransferRun};

#[cfg(test)]
mod tests;
