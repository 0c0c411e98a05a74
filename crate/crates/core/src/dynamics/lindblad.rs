//! Dissipator channels and the master-equation right-hand side.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::device::DecoherenceParams;
use crate::error::{Error, Result};
use crate::hamiltonians::CompiledHamiltonian;
use crate::layout::Layout;
use crate::quantum::local::{embed, lowering, projector, sigma_minus, transition};
use crate::quantum::operator::{same_basis, sparse_times_dense};
use crate::quantum::{CompositeBasis, SparseOperator, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelForm {
    /// `LρL† − ½{L†L, ρ}`.
    Standard,
    /// `PρP − ½{P, ρ}` with `P` a projector.
    Dephasing,
}

#[derive(Debug, Clone)]
pub struct Channel {
    pub label: String,
    /// rad/s.
    pub rate: f64,
    pub op: SparseOperator,
    pub form: ChannelForm,
}

#[derive(Debug, Clone)]
pub struct LindbladSpec {
    basis: Arc<CompositeBasis>,
    channels: Vec<Channel>,
}

impl LindbladSpec {
    pub fn new(basis: Arc<CompositeBasis>) -> Self {
        Self { basis, channels: Vec::new() }
    }

    pub fn basis(&self) -> &Arc<CompositeBasis> {
        &self.basis
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn push(&mut self, label: impl Into<String>, rate: f64, op: SparseOperator, form: ChannelForm) -> Result<()> {
        let label = label.into();
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::Domain(format!("rate of channel {label} must be non-negative, got {rate}")));
        }
        if !same_basis(&self.basis, op.basis()) {
            return Err(Error::IncompatibleBasis);
        }
        if form == ChannelForm::Dephasing {
            let idempotency = op.multiply(&op)?.sub(&op)?.max_abs();
            if !op.is_hermitian(1e-12) || idempotency > 1e-12 {
                return Err(Error::Config(format!("dephasing operator of {label} is not a projector")));
            }
        }
        self.channels.push(Channel { label, rate, op, form });
        Ok(())
    }
}

/// One channel per nonzero rate: cavity loss `a_k`, qutrit relaxation
/// `|0><1|`, `|1><2|`, `|0><2|` and dephasing of `|1>` and `|2>`. The cavity
/// count fixes `n`. Channels involving `|2>` are skipped on two-level qutrits.
pub fn build_lindblad_spec(decoherence: &DecoherenceParams, basis: &Arc<CompositeBasis>) -> Result<LindbladSpec> {
    let n = decoherence.kappa.len() / 2;
    decoherence.validate(n)?;
    let layout = Layout { n, qutrit_levels: 3, cavity_levels: 2 };
    let mut spec = LindbladSpec::new(basis.clone());

    for (k, &kappa) in decoherence.kappa.iter().enumerate() {
        let label = layout.cavity_label(k);
        if kappa > 0.0 {
            let a = lowering(basis.mode(&label)?.levels);
            spec.push(format!("kappa {label}"), kappa, embed(&a, &label, basis)?, ChannelForm::Standard)?;
        }
    }

    let labels = (0..layout.sites()).map(|k| layout.qubit_label(k)).chain([layout.coupler_label().to_string()]);
    for (label, rates) in labels.zip(&decoherence.qutrits) {
        let levels = basis.mode(&label)?.levels;
        let mut add = |name: &str, rate: f64, local: Option<nalgebra::DMatrix<C64>>, form| -> Result<()> {
            if rate == 0.0 {
                return Ok(());
            }
            match local {
                Some(m) => spec.push(format!("{name} {label}"), rate, embed(&m, &label, basis)?, form),
                None => {
                    log::warn!("{label} has {levels} levels; skipping {name}");
                    Ok(())
                }
            }
        };
        let three = levels > 2;
        add("gamma", rates.gamma, Some(sigma_minus(levels)), ChannelForm::Standard)?;
        add("gamma21", rates.gamma21, three.then(|| transition(levels, 1, 2)), ChannelForm::Standard)?;
        add("gamma20", rates.gamma20, three.then(|| transition(levels, 0, 2)), ChannelForm::Standard)?;
        add("gamma_phi1", rates.gamma_phi1, Some(projector(levels, 1)), ChannelForm::Dephasing)?;
        add("gamma_phi2", rates.gamma_phi2, three.then(|| projector(levels, 2)), ChannelForm::Dephasing)?;
    }
    Ok(spec)
}

/// Right-hand sides for flat column-major density matrices and state vectors.
pub(crate) struct Generator {
    dim: usize,
    hamiltonian: CompiledHamiltonian,
    pattern: Vec<(usize, usize, usize)>,
    /// `½ Σ γ L†L`.
    damping: Vec<(usize, usize, C64)>,
    jumps: Vec<(f64, SparseOperator)>,
    vals: Vec<C64>,
    scratch: Vec<C64>,
    tmp: Vec<C64>,
}

impl Generator {
    pub(crate) fn new(hamiltonian: CompiledHamiltonian, spec: Option<&LindbladSpec>) -> Result<Self> {
        let dim = hamiltonian.dim();
        let pattern = hamiltonian.pattern().collect();
        let mut damping = Vec::new();
        let mut jumps = Vec::new();
        if let Some(spec) = spec {
            let mut sum = SparseOperator::zero(spec.basis.clone());
            for ch in spec.channels.iter().filter(|c| c.rate > 0.0 && !c.op.is_zero()) {
                let ltl = ch.op.adjoint().multiply(&ch.op)?;
                sum = sum.add(&ltl.scale(C64::new(0.5 * ch.rate, 0.0)))?;
                jumps.push((ch.rate, ch.op.clone()));
            }
            damping = sum.iter().collect();
        }
        let zero = C64::new(0.0, 0.0);
        Ok(Self {
            dim,
            hamiltonian,
            pattern,
            damping,
            jumps,
            vals: Vec::new(),
            scratch: vec![zero; dim * dim],
            tmp: vec![zero; dim * dim],
        })
    }

    /// `dρ/dt = M + M† + Σ γ LρL†` with `M = −iHρ − ½ Σ γ L†L ρ`.
    pub(crate) fn lindblad(&mut self, t: f64, rho: &[C64], out: &mut [C64]) {
        let d = self.dim;
        self.hamiltonian.values_at(t, &mut self.vals);
        let m = &mut self.scratch;
        m.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
        let minus_i = C64::new(0.0, -1.0);
        for &(r, c, k) in &self.pattern {
            let v = minus_i * self.vals[k];
            for col in 0..d {
                m[r + col * d] += v * rho[c + col * d];
            }
        }
        for &(r, c, v) in &self.damping {
            for col in 0..d {
                m[r + col * d] -= v * rho[c + col * d];
            }
        }
        for c in 0..d {
            for r in 0..d {
                out[r + c * d] = m[r + c * d] + m[c + r * d].conj();
            }
        }
        for (rate, op) in &self.jumps {
            sparse_times_dense(op, rho, d, &mut self.tmp);
            // (L B†)[r, col] = Σ_k L[r, k] conj(B[col, k]) with B = Lρ
            for (r, k, l) in op.iter() {
                let v = *rate * l;
                for col in 0..d {
                    out[r + col * d] += v * self.tmp[col + k * d].conj();
                }
            }
        }
    }

    /// `dψ/dt = −iHψ`.
    pub(crate) fn schrodinger(&mut self, t: f64, psi: &[C64], out: &mut [C64]) {
        self.hamiltonian.values_at(t, &mut self.vals);
        self.hamiltonian.apply_vector(&self.vals, psi, out);
        for x in out.iter_mut() {
            *x *= C64::new(0.0, -1.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{DecoherenceRates, DecoherenceParams};
    use crate::quantum::ModeSpec;

    #[test]
    fn reference_inventory() {
        let basis = Layout::standard(3).unwrap().basis(Some(1)).unwrap();
        let spec = build_lindblad_spec(&DecoherenceParams::reference(3), &basis).unwrap();
        assert_eq!(spec.len(), 41);
        let kappas = spec.channels().iter().filter(|c| c.label.starts_with("kappa")).count();
        assert_eq!(kappas, 6);
        for ch in spec.channels() {
            let second_level = ["gamma21", "gamma20", "gamma_phi2"].iter().any(|p| ch.label.starts_with(p));
            assert_eq!(ch.op.is_zero(), second_level, "{}", ch.label);
            assert_eq!(ch.op.leaks_above(1), 0.0);
        }
        let dephasing = spec.channels().iter().filter(|c| c.form == ChannelForm::Dephasing).count();
        assert_eq!(dephasing, 14);
    }

    #[test]
    fn zero_rates_give_empty_spec() {
        let basis = Layout::standard(2).unwrap().basis(Some(1)).unwrap();
        assert!(build_lindblad_spec(&DecoherenceParams::none(2), &basis).unwrap().is_empty());
    }

    #[test]
    fn negative_rate_rejected() {
        let basis = Layout::standard(1).unwrap().basis(Some(1)).unwrap();
        let mut d = DecoherenceParams::reference(1);
        d.kappa[1] = -1.0;
        assert!(matches!(build_lindblad_spec(&d, &basis), Err(Error::Domain(_))));
        let mut spec = LindbladSpec::new(basis.clone());
        let op = SparseOperator::identity(basis);
        assert!(spec.push("x", -0.1, op.clone(), ChannelForm::Standard).is_err());
        assert!(spec.push("x", 0.1, op.scale(C64::new(2.0, 0.0)), ChannelForm::Dephasing).is_err());
    }

    #[test]
    fn two_level_qutrits_skip_third_level_channels() {
        let basis = Layout::new(1, 2, 2).unwrap().basis(None).unwrap();
        let spec = build_lindblad_spec(&DecoherenceParams::reference(1), &basis).unwrap();
        // 2 cavities + 3 qutrits × (γ, γ_φ1)
        assert_eq!(spec.len(), 8);
    }

    #[test]
    fn unrestricted_operators_match_sector() {
        let full = Layout::standard(1).unwrap().basis(None).unwrap();
        let spec = build_lindblad_spec(&DecoherenceParams::reference(1), &full).unwrap();
        assert_eq!(spec.len(), 17);
        assert!(spec.channels().iter().all(|c| !c.op.is_zero()));
    }

    #[test]
    fn generator_is_trace_free_and_hermitian() {
        let basis = Arc::new(CompositeBasis::new(vec![ModeSpec::qutrit("q", 3), ModeSpec::cavity("c", 3)], None).unwrap());
        let mut spec = LindbladSpec::new(basis.clone());
        spec.push("a", 0.3, embed(&lowering(3), "c", &basis).unwrap(), ChannelForm::Standard).unwrap();
        spec.push("s", 0.7, embed(&transition(3, 0, 2), "q", &basis).unwrap(), ChannelForm::Standard).unwrap();
        spec.push("p", 0.2, embed(&projector(3, 1), "q", &basis).unwrap(), ChannelForm::Dephasing).unwrap();
        let mut h = crate::hamiltonians::TermSet::new(basis.clone());
        let x = embed(&lowering(3), "c", &basis).unwrap();
        h.push_pair(crate::hamiltonians::Family::Crosstalk, C64::new(0.4, 0.1), x, 2.0).unwrap();
        let mut g = Generator::new(h.compile(), Some(&spec)).unwrap();

        let d = basis.dim();
        let v: Vec<C64> = (0..d).map(|i| C64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let rho: Vec<C64> = (0..d * d).map(|i| v[i % d] * v[i / d].conj() / norm).collect();
        let mut out = vec![C64::new(0.0, 0.0); d * d];
        g.lindblad(0.37, &rho, &mut out);
        let trace: C64 = (0..d).map(|i| out[i + i * d]).sum();
        assert!(trace.norm() < 1e-14);
        for r in 0..d {
            for c in 0..d {
                assert!((out[r + c * d] - out[c + r * d].conj()).norm() < 1e-14);
            }
        }

        // against dense −i[H,ρ] + Σ γ(LρL† − ½{L†L,ρ})
        let mut vals = Vec::new();
        h.compile().values_at(0.37, &mut vals);
        let hd = h.compile().to_dense(&vals);
        let rd = nalgebra::DMatrix::from_column_slice(d, d, &rho);
        let i = C64::new(0.0, 1.0);
        let mut expect = (&hd * &rd - &rd * &hd) * (-i);
        for ch in spec.channels() {
            let l = ch.op.to_dense();
            let ltl = l.adjoint() * &l;
            expect += (&l * &rd * l.adjoint() - (&ltl * &rd + &rd * &ltl) * C64::new(0.5, 0.0)) * C64::new(ch.rate, 0.0);
        }
        let got = nalgebra::DMatrix::from_column_slice(d, d, &out);
        assert!((got - expect).map(|z| z.norm()).max() < 1e-14);
    }

    #[test]
    fn rates_helper_used() {
        let r = DecoherenceRates { gamma: 1.0, ..DecoherenceRates::zero() };
        let d = DecoherenceParams::uniform(1, 0.0, r);
        let basis = Layout::standard(1).unwrap().basis(Some(1)).unwrap();
        assert_eq!(build_lindblad_spec(&d, &basis).unwrap().len(), 3);
    }
}
