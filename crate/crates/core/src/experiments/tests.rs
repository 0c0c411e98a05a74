use super::*;
use crate::device::{effective_params, DecoherenceParams};
use crate::dynamics::EvolveOptions;
use crate::error::Error;

fn single_pair(b: f64) -> SystemSpec {
    let mut s = SystemSpec::reference(b, 0.0);
    s.detunings.truncate(1);
    s
}

#[test]
fn grid_hits_nominal_points() {
    let g = linear_grid(0.85, 1.15, 0.01).unwrap();
    assert_eq!(g.len(), 31);
    assert!(g.contains(&1.0));
    assert_eq!(*g.last().unwrap(), 1.15);
    assert_eq!(linear_grid(5.0, 15.0, 0.5).unwrap().len(), 21);
    assert!(linear_grid(1.0, 0.0, 0.1).is_err());
    assert!(linear_grid(0.0, 1.0, 0.0).is_err());
}

#[test]
fn plan_validation() {
    let mut plan = SweepPlan::fidelity_vs_b();
    plan.values.clear();
    assert!(matches!(plan.validate(), Err(Error::Config(m)) if m.contains("empty")));
    plan.values = vec![0.5, 2.0];
    assert!(matches!(plan.validate(), Err(Error::InvalidRegime(_))));
    plan.values = vec![3.0, 2.0];
    assert!(matches!(plan.validate(), Err(Error::Config(_))));
    let mut plan = SweepPlan::fidelity_vs_r();
    plan.values = vec![0.0, 1.0];
    assert!(matches!(plan.validate(), Err(Error::Domain(_))));
    assert!(sweep_r(&SweepPlan::fidelity_vs_b(), 1).is_err());
}

#[test]
fn hash_tracks_parameters() {
    let a = SystemSpec::reference(9.0, 0.01);
    let b = SystemSpec::reference(9.0, 0.1);
    assert_eq!(param_hash(&a), param_hash(&a.clone()));
    assert_ne!(param_hash(&a), param_hash(&b));
    assert_eq!(param_hash(&a).len(), 64);
}

#[test]
fn system_coupling_scale() {
    let s = SystemSpec::reference(9.0, 0.0);
    assert!((s.b().unwrap() - 9.0).abs() < 1e-12);
    let mut bad = s.clone();
    bad.coupling = CouplingSpec::B(-1.0);
    assert!(matches!(bad.g1(), Err(Error::Domain(_))));
    let mut broken = s.clone();
    broken.r = 1.05;
    let d = broken.device().unwrap();
    let m = broken.matched_device().unwrap();
    assert_eq!(d.g, m.g);
}

#[test]
fn effective_gap_shrinks_deeper_in_dispersive_regime() {
    let opts = EvolveOptions { samples: 200, ..EvolveOptions::with_tolerance(1e-10) };
    let dev = |b: f64| single_pair(b).matched_device().unwrap();
    let t = |b: f64| effective_params(&dev(b)).unwrap().transfer_time().unwrap();
    let near = compare_effective_vs_full(&dev(9.0), t(9.0), &opts).unwrap();
    let far = compare_effective_vs_full(&dev(20.0), t(20.0), &opts).unwrap();
    assert!(far.max_fidelity_deviation < near.max_fidelity_deviation);
    assert!(near.max_fidelity_deviation < 0.1);
    assert!((near.final_fidelity_closed_form - 1.0).abs() < 1e-12);
}

#[test]
fn oracle_agrees_on_single_pair() {
    let params = single_pair(9.0).matched_device().unwrap();
    let horizon = effective_params(&params).unwrap().transfer_time().unwrap();
    let options = OracleOptions { micro_steps: 2000, samples: 21, tol: 1e-10 };
    let report = oracle_report(&params, &DecoherenceParams::reference(1), horizon, &options).unwrap();
    assert_eq!(report.full_dim, 108);
    assert!(report.integrator_vs_oracle < ORACLE_LIMIT, "{report:?}");
    assert!(report.closed_sector_vs_full < ORACLE_LIMIT, "{report:?}");
    assert!(report.lindblad_sector_vs_full < SECTOR_LIMIT, "{report:?}");
}

#[test]
fn oracle_rejects_bad_requests() {
    let params = SystemSpec::reference(9.0, 0.0).matched_device().unwrap();
    let d = DecoherenceParams::reference(3);
    assert!(matches!(oracle_report(&params, &d, 1e-8, &OracleOptions::default()), Err(Error::Config(_))));
    let single = single_pair(9.0).matched_device().unwrap();
    let odd = OracleOptions { micro_steps: 1001, ..OracleOptions::default() };
    assert!(oracle_report(&single, &DecoherenceParams::reference(1), 1e-8, &odd).is_err());
}

#[test]
fn verify_reports_offending_check() {
    let report = OracleReport {
        horizon: 1.0,
        sector_dim: 6,
        full_dim: 108,
        closed_sector_vs_full: 0.0,
        closed_fidelity_sector_vs_full: 0.0,
        integrator_vs_oracle: 1e-3,
        lindblad_sector_vs_full: 0.0,
    };
    match report.verify() {
        Err(Error::Equivalence { check, distance, .. }) => {
            assert!(check.contains("integrator"));
            assert_eq!(distance, 1e-3);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn sweep_is_worker_independent() {
    let mut plan = SweepPlan::fidelity_vs_r();
    plan.base = single_pair(9.0);
    plan.decoherence = DecoherenceParams::reference(1);
    plan.values = vec![0.95, 1.0, 1.05];
    plan.options = EvolveOptions { samples: 50, ..EvolveOptions::default() };
    let one = run_sweep(&plan, 1).unwrap();
    let many = run_sweep(&plan, 3).unwrap();
    assert!(one.same_outcome(&many));
    assert_eq!(one.config_hash, many.config_hash);
    assert_eq!(one.records.len(), 3);
    assert!(one.records.iter().all(|r| r.fidelity > 0.9 && r.fidelity <= 1.0));
    assert!(one.records.windows(2).all(|w| w[0].t_transfer == w[1].t_transfer));
}
