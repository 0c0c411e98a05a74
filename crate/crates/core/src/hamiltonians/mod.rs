//! Interaction-picture Hamiltonians of the cavity network and the
//! second-order effective model.
//!
//! All builders address modes by the labels of [`Layout`]; the basis may be
//! unrestricted or sector-restricted. Multi-mode summands are embedded as
//! tensor products.

mod termset;

use std::sync::Arc;

use nalgebra::DMatrix;

pub use termset::{CompiledHamiltonian, Family, Term, TermSet};

use crate::device::{check_conditions, effective_params, ConditionId, DeviceParams, Thresholds};
use crate::error::{Error, Result};
use crate::layout::{Layout, Side};
use crate::quantum::local::{embed, embed_product, lowering, projector, sigma_minus, sigma_plus, transition};
use crate::quantum::{CompositeBasis, SparseOperator, C64};

fn layout_of(params: &DeviceParams) -> Layout {
    // levels are read from the basis; the layout is only used for labels
    Layout { n: params.n, qutrit_levels: 3, cavity_levels: 2 }
}

fn levels(basis: &CompositeBasis, label: &str) -> Result<usize> {
    Ok(basis.mode(label)?.levels)
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// The wanted interaction: every qubit and the coupler exchange virtual
/// photons with the cavities,
/// `Σ_k g_k (e^{iδ_k t} a_k σ_k⁺ + h.c.) + Σ_k g_Ak (e^{iδ_Ak t} a_k σ_A⁺ + h.c.)`.
/// Families are emitted unprimed qubit, unprimed coupler, primed qubit,
/// primed coupler; `8n` terms in total.
pub fn interaction_hamiltonian(params: &DeviceParams, basis: &Arc<CompositeBasis>) -> Result<TermSet> {
    let layout = layout_of(params);
    let coupler = layout.coupler_label();
    let coupler_levels = levels(basis, coupler)?;
    let mut set = TermSet::new(basis.clone());
    for side in [Side::Unprimed, Side::Primed] {
        for j in 1..=params.n {
            let k = layout.site(j, side);
            let (q, c) = (layout.qubit_label(k), layout.cavity_label(k));
            let a = lowering(levels(basis, &c)?);
            let op = embed_product(&[(c.as_str(), &a), (q.as_str(), &sigma_plus(levels(basis, &q)?))], basis)?;
            set.push_pair(Family::Qubit(side), real(params.g[k]), op, params.delta(k))?;
        }
        for j in 1..=params.n {
            let k = layout.site(j, side);
            let c = layout.cavity_label(k);
            let a = lowering(levels(basis, &c)?);
            let op = embed_product(&[(c.as_str(), &a), (coupler, &sigma_plus(coupler_levels))], basis)?;
            set.push_pair(Family::Coupler(side), real(params.g_coupler[k]), op, params.delta_coupler(k))?;
        }
    }
    Ok(set)
}

/// Unwanted terms: the `|1> ↔ |2>` transitions of every qutrit driven by the
/// cavities, and direct crosstalk `g_kl (e^{−iΔ_kl t} a_k a_l⁺ + h.c.)` over
/// unordered cavity pairs with nonzero coupling. On two-level qutrits the
/// `|1> ↔ |2>` families are skipped.
pub fn unwanted_hamiltonian(params: &DeviceParams, basis: &Arc<CompositeBasis>) -> Result<TermSet> {
    let layout = layout_of(params);
    let coupler = layout.coupler_label();
    let coupler_levels = levels(basis, coupler)?;
    let mut set = TermSet::new(basis.clone());
    for side in [Side::Unprimed, Side::Primed] {
        for j in 1..=params.n {
            let k = layout.site(j, side);
            let (q, c) = (layout.qubit_label(k), layout.cavity_label(k));
            let ql = levels(basis, &q)?;
            if ql < 3 {
                log::warn!("qutrit {q} has {ql} levels; skipping its |1>-|2> coupling");
                continue;
            }
            let a = lowering(levels(basis, &c)?);
            let op = embed_product(&[(c.as_str(), &a), (q.as_str(), &transition(ql, 2, 1))], basis)?;
            set.push_pair(Family::QubitTwoPhoton(side), real(params.g_tilde[k]), op, params.delta_tilde(k))?;
        }
        if coupler_levels < 3 {
            log::warn!("coupler has {coupler_levels} levels; skipping its |1>-|2> coupling");
            continue;
        }
        for j in 1..=params.n {
            let k = layout.site(j, side);
            let c = layout.cavity_label(k);
            let a = lowering(levels(basis, &c)?);
            let op = embed_product(&[(c.as_str(), &a), (coupler, &transition(coupler_levels, 2, 1))], basis)?;
            set.push_pair(
                Family::CouplerTwoPhoton(side),
                real(params.g_tilde_coupler[k]),
                op,
                params.delta_tilde_coupler(k),
            )?;
        }
    }
    let m = params.sites();
    for k in 0..m {
        for l in k + 1..m {
            let g = params.crosstalk[k][l];
            if g == 0.0 {
                continue;
            }
            let (ck, cl) = (layout.cavity_label(k), layout.cavity_label(l));
            let ak = lowering(levels(basis, &ck)?);
            let al_dag = lowering(levels(basis, &cl)?).adjoint();
            let op = embed_product(&[(ck.as_str(), &ak), (cl.as_str(), &al_dag)], basis)?;
            set.push_pair(Family::Crosstalk, real(g), op, -params.cavity_difference(k, l))?;
        }
    }
    Ok(set)
}

/// Wanted plus unwanted interaction.
pub fn full_interaction_hamiltonian(params: &DeviceParams, basis: &Arc<CompositeBasis>) -> Result<TermSet> {
    interaction_hamiltonian(params, basis)?.concat(&unwanted_hamiltonian(params, basis)?)
}

fn require_matching(params: &DeviceParams) -> Result<()> {
    let report = check_conditions(params, &Thresholds::default());
    let detuning = report.get(ConditionId::DetuningMatch).expect("always reported");
    if !detuning.pass {
        return Err(Error::ConditionViolation {
            condition: "detuning_match",
            detail: format!("detunings mismatch by {:.3e} relative", detuning.worst),
        });
    }
    Ok(())
}

/// Second-order dispersive Hamiltonian: photon-number-conditioned shifts of
/// every qutrit (with the `a a⁺` ordering on the excited branch), the
/// coupler-mediated qubit exchange with rates `λ_k`, and the cavity-cavity
/// exchange `μ_j (a_j⁺ a_j' + h.c.)(|1><1|_A − |0><0|_A)`.
pub fn effective_hamiltonian(params: &DeviceParams, basis: &Arc<CompositeBasis>) -> Result<SparseOperator> {
    require_matching(params)?;
    let layout = layout_of(params);
    let coupler = layout.coupler_label();
    let al = levels(basis, coupler)?;
    let mut h = SparseOperator::zero(basis.clone());

    let shift = |q: &str, c: &str, strength: f64| -> Result<SparseOperator> {
        let ql = levels(basis, q)?;
        let a = lowering(levels(basis, c)?);
        let n_op = a.adjoint() * &a;
        let anti = &a * a.adjoint();
        let ground = embed_product(&[(q, &projector(ql, 0)), (c, &n_op)], basis)?;
        let excited = embed_product(&[(q, &projector(ql, 1)), (c, &anti)], basis)?;
        Ok(ground.sub(&excited)?.scale(real(-strength)))
    };

    for side in [Side::Unprimed, Side::Primed] {
        for j in 1..=params.n {
            let k = layout.site(j, side);
            let (q, c) = (layout.qubit_label(k), layout.cavity_label(k));
            h = h.add(&shift(&q, &c, params.chi(k))?)?;
        }
        for j in 1..=params.n {
            let k = layout.site(j, side);
            let c = layout.cavity_label(k);
            h = h.add(&shift(coupler, &c, params.chi_coupler(k))?)?;
        }
    }
    for k in 0..params.sites() {
        let q = layout.qubit_label(k);
        let ql = levels(basis, &q)?;
        let up = embed_product(&[(q.as_str(), &sigma_plus(ql)), (coupler, &sigma_minus(al))], basis)?;
        h = h.add(&up.add(&up.adjoint())?.scale(real(params.lambda(k))))?;
    }
    let n = params.n;
    let parity = projector(al, 1) - projector(al, 0);
    for j in 0..n {
        let (c, cp) = (layout.cavity_label(j), layout.cavity_label(n + j));
        let a = lowering(levels(basis, &c)?);
        let ap = lowering(levels(basis, &cp)?);
        let mu = params.g[j] * params.g[n + j] / params.delta(j);
        let hop = embed_product(&[(c.as_str(), &a.adjoint()), (cp.as_str(), &ap), (coupler, &parity)], basis)?;
        h = h.add(&hop.add(&hop.adjoint())?.scale(real(mu)))?;
    }
    Ok(h)
}

/// Vacuum-cavity reduction of the effective model: the diagonal shifts `H₀`
/// and the exchange `H_int = Σ_k λ_k (σ_k⁺ σ_A + σ_k σ_A⁺)`.
pub fn vacuum_split(params: &DeviceParams, basis: &Arc<CompositeBasis>) -> Result<(SparseOperator, SparseOperator)> {
    let layout = layout_of(params);
    let coupler = layout.coupler_label();
    let al = levels(basis, coupler)?;
    let mut h0 = SparseOperator::zero(basis.clone());
    let mut hint = SparseOperator::zero(basis.clone());
    let coupler_shift: f64 = (0..params.sites()).map(|k| params.chi_coupler(k)).sum();
    h0 = h0.add(&embed(&projector(al, 1), coupler, basis)?.scale(real(coupler_shift)))?;
    for k in 0..params.sites() {
        let q = layout.qubit_label(k);
        let ql = levels(basis, &q)?;
        h0 = h0.add(&embed(&projector(ql, 1), &q, basis)?.scale(real(params.chi(k))))?;
        let up = embed_product(&[(q.as_str(), &sigma_plus(ql)), (coupler, &sigma_minus(al))], basis)?;
        hint = hint.add(&up.add(&up.adjoint())?.scale(real(params.lambda(k))))?;
    }
    Ok((h0, hint))
}

/// Collective form `λ(J₊σ_A + J₋σ_A⁺) + λ(J'₊σ_A + J'₋σ_A⁺)`, built from the
/// collective spin operators. Requires a uniform exchange rate.
pub fn collective_exchange(params: &DeviceParams, basis: &Arc<CompositeBasis>) -> Result<SparseOperator> {
    let lambda = effective_params(params)?.lambda_common;
    let layout = layout_of(params);
    let coupler = layout.coupler_label();
    let al = levels(basis, coupler)?;
    let sigma_a = embed(&sigma_minus(al), coupler, basis)?;
    let mut total = SparseOperator::zero(basis.clone());
    for side in [Side::Unprimed, Side::Primed] {
        let mut j_plus = SparseOperator::zero(basis.clone());
        for j in 1..=params.n {
            let q = layout.qubit_label(layout.site(j, side));
            j_plus = j_plus.add(&embed(&sigma_plus(levels(basis, &q)?), &q, basis)?)?;
        }
        // J₋σ_A⁺ as (J₊σ_A)†
        let exchange = j_plus.multiply(&sigma_a)?;
        let half = exchange.add(&exchange.adjoint())?;
        total = total.add(&half.scale(real(lambda)))?;
    }
    Ok(total)
}

/// `max|e^{iH₀t} H e^{−iH₀t} − H| / max|H|` for diagonal `H₀`.
pub fn interaction_frame_residual(h0: &SparseOperator, h: &SparseOperator, t: f64) -> Result<f64> {
    if !h0.is_diagonal() {
        return Err(Error::Domain("H0 must be diagonal".into()));
    }
    let e = h0.diagonal_values();
    let scale = h.max_abs();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let worst = h
        .iter()
        .map(|(r, c, v)| {
            let phase = C64::from_polar(1.0, (e[r].re - e[c].re) * t);
            (v * phase - v).norm()
        })
        .fold(0.0, f64::max);
    Ok(worst / scale)
}

/// Dense `e^{−iHt}` for a static Hamiltonian.
pub fn propagator(h: &SparseOperator, t: f64) -> DMatrix<C64> {
    (h.to_dense() * C64::new(0.0, -t)).exp()
}

#[cfg(test)]
mod tests;
