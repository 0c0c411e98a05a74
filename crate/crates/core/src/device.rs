//! Physical parameters of the cavity network, the matching conditions that
//! make the transfer work, and a few hardware formulas.
//!
//! Every detuning is derived from transition and cavity frequencies and kept
//! signed: for the reference device all detunings are negative, so the
//! dispersive shift `χ` and exchange rate `λ` are negative too.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{Layout, Side};
use crate::units;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Qutrit {
    /// |0> ↔ |1> transition, rad/s.
    pub omega10: f64,
    /// |1> ↔ |2> transition, rad/s.
    pub omega21: f64,
}

/// Frequencies and couplings of the 2n-cavity device. Site vectors have
/// length `2n` and follow [`Layout`]'s site order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    pub n: usize,
    pub qubits: Vec<Qutrit>,
    pub coupler: Qutrit,
    pub cavity_omega: Vec<f64>,
    /// Qubit k to its own cavity k.
    pub g: Vec<f64>,
    /// Coupler to cavity k.
    pub g_coupler: Vec<f64>,
    /// |1> ↔ |2> analogues of `g` and `g_coupler`.
    pub g_tilde: Vec<f64>,
    pub g_tilde_coupler: Vec<f64>,
    /// Symmetric cavity-cavity crosstalk, zero diagonal.
    pub crosstalk: Vec<Vec<f64>>,
}

impl DeviceParams {
    pub fn sites(&self) -> usize {
        2 * self.n
    }

    pub fn delta(&self, k: usize) -> f64 {
        self.qubits[k].omega10 - self.cavity_omega[k]
    }

    pub fn delta_coupler(&self, k: usize) -> f64 {
        self.coupler.omega10 - self.cavity_omega[k]
    }

    pub fn delta_tilde(&self, k: usize) -> f64 {
        self.qubits[k].omega21 - self.cavity_omega[k]
    }

    pub fn delta_tilde_coupler(&self, k: usize) -> f64 {
        self.coupler.omega21 - self.cavity_omega[k]
    }

    /// `Δ_kl = ω_c_k − ω_c_l`.
    pub fn cavity_difference(&self, k: usize, l: usize) -> f64 {
        self.cavity_omega[k] - self.cavity_omega[l]
    }

    /// Dispersive shift `g_k²/δ_k`.
    pub fn chi(&self, k: usize) -> f64 {
        self.g[k] * self.g[k] / self.delta(k)
    }

    /// Coupler-side shift `g_Ak²/δ_Ak`.
    pub fn chi_coupler(&self, k: usize) -> f64 {
        self.g_coupler[k] * self.g_coupler[k] / self.delta_coupler(k)
    }

    /// Coupler-mediated exchange `g_k g_Ak / δ_k`.
    pub fn lambda(&self, k: usize) -> f64 {
        self.g[k] * self.g_coupler[k] / self.delta(k)
    }

    /// `max_k g_Ak`.
    pub fn g_max(&self) -> f64 {
        self.g_coupler.iter().cloned().fold(0.0, f64::max)
    }

    pub fn set_uniform_crosstalk(&mut self, value: f64) {
        let m = self.sites();
        self.crosstalk = (0..m).map(|k| (0..m).map(|l| if k == l { 0.0 } else { value }).collect()).collect();
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.sites();
        let lens = [
            ("qubits", self.qubits.len()),
            ("cavity_omega", self.cavity_omega.len()),
            ("g", self.g.len()),
            ("g_coupler", self.g_coupler.len()),
            ("g_tilde", self.g_tilde.len()),
            ("g_tilde_coupler", self.g_tilde_coupler.len()),
            ("crosstalk", self.crosstalk.len()),
        ];
        for (name, len) in lens {
            if len != m {
                return Err(Error::Config(format!("{name} has {len} entries, expected {m}")));
            }
        }
        let freqs = self
            .qubits
            .iter()
            .chain(std::iter::once(&self.coupler))
            .flat_map(|q| [q.omega10, q.omega21])
            .chain(self.cavity_omega.iter().cloned());
        for f in freqs {
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::Domain(format!("frequency {f} must be positive")));
            }
        }
        let couplings = self.g.iter().chain(&self.g_coupler).chain(&self.g_tilde).chain(&self.g_tilde_coupler);
        for &g in couplings.chain(self.crosstalk.iter().flatten()) {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(Error::Domain(format!("coupling {g} must be non-negative")));
            }
        }
        for (k, row) in self.crosstalk.iter().enumerate() {
            if row.len() != m {
                return Err(Error::Config(format!("crosstalk row {k} has {} entries", row.len())));
            }
            if row[k] != 0.0 {
                return Err(Error::Domain(format!("crosstalk diagonal entry {k} must be zero")));
            }
            for l in 0..m {
                if row[l] != self.crosstalk[l][k] {
                    return Err(Error::Domain(format!("crosstalk is not symmetric at ({k}, {l})")));
                }
            }
        }
        Ok(())
    }
}

/// Builds a device satisfying all matching conditions from a list of `n`
/// detunings and the first coupling `g_1`.
///
/// Cavity `j` and `j'` share frequency `ω_10 − δ_j`; qubit couplings follow
/// `g_j = g_1 sqrt(δ_j/δ_1)` so every `g_j²/δ_j` is equal; coupler couplings
/// are `g_j/sqrt(2n)`; two-photon-transition couplings are `sqrt(2)` times the
/// corresponding `g`.
pub fn derive_params(deltas: &[f64], g1: f64, n: usize, omega10: f64, anharmonicity: f64) -> Result<DeviceParams> {
    if n < 1 {
        return Err(Error::Config("n must be at least 1".into()));
    }
    if deltas.len() != n {
        return Err(Error::Config(format!("expected {n} detunings, got {}", deltas.len())));
    }
    if deltas.iter().any(|&d| d == 0.0 || !d.is_finite()) {
        return Err(Error::InvalidRegime("detunings must be finite and nonzero".into()));
    }
    let sign = deltas[0].signum();
    if deltas.iter().any(|d| d.signum() != sign) {
        return Err(Error::InvalidRegime("detunings must all have the same sign".into()));
    }
    if !(g1 > 0.0 && g1.is_finite()) {
        return Err(Error::Domain(format!("g_1 must be positive, got {g1}")));
    }

    let two_n = (2 * n) as f64;
    let qutrit = Qutrit { omega10, omega21: omega10 + anharmonicity };
    let half_g: Vec<f64> = deltas.iter().map(|d| g1 * (d / deltas[0]).sqrt()).collect();
    let half_cav: Vec<f64> = deltas.iter().map(|d| omega10 - d).collect();
    let g: Vec<f64> = half_g.iter().chain(&half_g).cloned().collect();
    let g_coupler: Vec<f64> = g.iter().map(|x| x / two_n.sqrt()).collect();
    let sqrt2 = std::f64::consts::SQRT_2;

    let mut params = DeviceParams {
        n,
        qubits: vec![qutrit; 2 * n],
        coupler: qutrit,
        cavity_omega: half_cav.iter().chain(&half_cav).cloned().collect(),
        g_tilde: g.iter().map(|x| sqrt2 * x).collect(),
        g_tilde_coupler: g_coupler.iter().map(|x| sqrt2 * x).collect(),
        g,
        g_coupler,
        crosstalk: Vec::new(),
    };
    params.set_uniform_crosstalk(0.0);
    params.validate()?;
    Ok(params)
}

/// Reference working point: three pairs with `δ = −2π·{0.5, 1.0, 1.5}` GHz,
/// `ω_10 = 2π·6.5` GHz, anharmonicity `−2π·400` MHz and `g_1 = |δ_1|/b`.
pub fn reference_params(b: f64) -> Result<DeviceParams> {
    if !(b > 0.0) {
        return Err(Error::Domain(format!("b must be positive, got {b}")));
    }
    let deltas = [units::ghz(-0.5), units::ghz(-1.0), units::ghz(-1.5)];
    derive_params(&deltas, deltas[0].abs() / b, 3, units::ghz(6.5), units::mhz(-400.0))
}

/// Detunes the primed half so that `δ_j' = δ_Aj' = r·δ_j`, shifting only the
/// primed cavity frequencies. Couplings are kept.
pub fn apply_breakage(params: &DeviceParams, r: f64) -> Result<DeviceParams> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("breakage ratio must be positive, got {r}")));
    }
    let mut out = params.clone();
    let n = params.n;
    for j in 0..n {
        // δ_j' → δ_j' + (r − 1) δ_j, which is r δ_j when the pair was matched
        out.cavity_omega[n + j] -= (r - 1.0) * params.delta(j);
    }
    out.validate()?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceRates {
    /// |1> → |0> relaxation.
    pub gamma: f64,
    /// |2> → |1>.
    pub gamma21: f64,
    /// |2> → |0>.
    pub gamma20: f64,
    /// Dephasing of |1> and |2>.
    pub gamma_phi1: f64,
    pub gamma_phi2: f64,
}

impl DecoherenceRates {
    pub fn zero() -> Self {
        Self { gamma: 0.0, gamma21: 0.0, gamma20: 0.0, gamma_phi1: 0.0, gamma_phi2: 0.0 }
    }

    fn all(&self) -> [f64; 5] {
        [self.gamma, self.gamma21, self.gamma20, self.gamma_phi1, self.gamma_phi2]
    }
}

/// Loss rates in rad/s. `qutrits` has `2n + 1` entries, coupler last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceParams {
    pub kappa: Vec<f64>,
    pub qutrits: Vec<DecoherenceRates>,
}

impl DecoherenceParams {
    pub fn uniform(n: usize, kappa: f64, rates: DecoherenceRates) -> Self {
        Self { kappa: vec![kappa; 2 * n], qutrits: vec![rates; 2 * n + 1] }
    }

    pub fn none(n: usize) -> Self {
        Self::uniform(n, 0.0, DecoherenceRates::zero())
    }

    /// `κ⁻¹ = 5 µs`, `γ⁻¹ = 10 µs`, `γ_21⁻¹ = 5 µs`, `γ_20⁻¹ = 25 µs`,
    /// `γ_φ1⁻¹ = γ_φ2⁻¹ = 5 µs`.
    pub fn reference(n: usize) -> Self {
        let r = units::rate_from_lifetime_us;
        Self::uniform(
            n,
            r(5.0),
            DecoherenceRates { gamma: r(10.0), gamma21: r(5.0), gamma20: r(25.0), gamma_phi1: r(5.0), gamma_phi2: r(5.0) },
        )
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.kappa.len() != 2 * n || self.qutrits.len() != 2 * n + 1 {
            return Err(Error::Config("decoherence rate vectors have the wrong length".into()));
        }
        let rates = self.kappa.iter().cloned().chain(self.qutrits.iter().flat_map(|q| q.all()));
        for x in rates {
            if !(x >= 0.0 && x.is_finite()) {
                return Err(Error::Domain(format!("decay rate {x} must be non-negative")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    /// `λ_k = g_k g_Ak / δ_k` per site.
    pub lambda: Vec<f64>,
    /// `μ_j = g_j g_j' / δ_j` per pair.
    pub mu: Vec<f64>,
    /// Common (signed) exchange rate.
    pub lambda_common: f64,
    /// Common dispersive shift `g_1²/δ_1`.
    pub chi: f64,
    /// Collective rate `sqrt(2n)|λ|`.
    pub big_lambda: f64,
}

impl EffectiveParams {
    /// `π/Λ`, seconds.
    pub fn transfer_time(&self) -> Result<f64> {
        transfer_time_from_rate(self.big_lambda)
    }
}

pub const EQUALITY_TOL: f64 = 1e-9;

/// Second-order rates of the dispersive theory. Requires uniform `λ`.
pub fn effective_params(params: &DeviceParams) -> Result<EffectiveParams> {
    let m = params.sites();
    let lambda: Vec<f64> = (0..m).map(|k| params.lambda(k)).collect();
    let mismatch = relative_spread(&lambda);
    if mismatch > EQUALITY_TOL {
        return Err(Error::ConditionViolation {
            condition: "uniform_exchange",
            detail: format!("exchange rates differ by {mismatch:.3e} relative"),
        });
    }
    let n = params.n;
    let mu = (0..n).map(|j| params.g[j] * params.g[n + j] / params.delta(j)).collect();
    let big_lambda = ((2 * n) as f64).sqrt() * lambda[0].abs();
    Ok(EffectiveParams { lambda_common: lambda[0], lambda, mu, chi: params.chi(0), big_lambda })
}

fn transfer_time_from_rate(big_lambda: f64) -> Result<f64> {
    if !(big_lambda > 0.0) {
        return Err(Error::DegenerateCoupling);
    }
    Ok(std::f64::consts::PI / big_lambda)
}

/// `max_k |x_k − x_0| / |x_0|`.
fn relative_spread(xs: &[f64]) -> f64 {
    let x0 = xs[0];
    let worst = xs.iter().map(|x| (x - x0).abs()).fold(0.0, f64::max);
    if worst == 0.0 {
        0.0
    } else if x0 == 0.0 {
        f64::INFINITY
    } else {
        worst / x0.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConditionId {
    /// Adjacent cavities decoupled from each other through the coupler.
    CavityIsolation,
    /// Detuning matching `δ_j = δ_Aj = δ_Aj' = δ_j'`.
    DetuningMatch,
    /// Equal dispersive shifts.
    EqualShifts,
    /// Qubit shift equals the summed coupler shift.
    CouplerShift,
    /// Uniform exchange rate.
    UniformExchange,
    /// `|δ|/g` for every qubit-cavity and coupler-cavity pair.
    Dispersive,
}

impl ConditionId {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConditionId::CavityIsolation => "cavity_isolation",
            ConditionId::DetuningMatch => "detuning_match",
            ConditionId::EqualShifts => "equal_shifts",
            ConditionId::CouplerShift => "coupler_shift",
            ConditionId::UniformExchange => "uniform_exchange",
            ConditionId::Dispersive => "dispersive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Criterion {
    /// Pass when every measured ratio is at least the threshold.
    AtLeast,
    /// Pass when every relative mismatch is at most the threshold.
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionEntry {
    pub id: ConditionId,
    pub measured: Vec<f64>,
    /// Minimum ratio (inequalities) or maximum mismatch (equalities).
    pub worst: f64,
    pub threshold: f64,
    pub criterion: Criterion,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub entries: Vec<ConditionEntry>,
}

impl ConditionReport {
    pub fn get(&self, id: ConditionId) -> Option<&ConditionEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failed(&self) -> Vec<ConditionId> {
        self.entries.iter().filter(|e| !e.pass).map(|e| e.id).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub equality_tol: f64,
    pub isolation_min_ratio: f64,
    pub dispersive_min_ratio: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { equality_tol: EQUALITY_TOL, isolation_min_ratio: 10.0, dispersive_min_ratio: 5.0 }
    }
}

pub fn check_conditions(params: &DeviceParams, thresholds: &Thresholds) -> ConditionReport {
    let n = params.n;
    let m = params.sites();
    let mut entries = Vec::new();

    let inequality = |id, measured: Vec<f64>, threshold: f64| {
        let worst = measured.iter().cloned().fold(f64::INFINITY, f64::min);
        ConditionEntry { id, pass: worst >= threshold, worst, measured, threshold, criterion: Criterion::AtLeast }
    };
    let equality = |id, measured: Vec<f64>, threshold: f64| {
        let worst = measured.iter().cloned().fold(0.0, f64::max);
        ConditionEntry { id, pass: worst <= threshold, worst, measured, threshold, criterion: Criterion::AtMost }
    };

    // adjacent cavities within each half
    let mut isolation = Vec::new();
    for side in [Side::Unprimed, Side::Primed] {
        let layout = Layout { n, qutrit_levels: 3, cavity_levels: 2 };
        for j in 1..n {
            let (k, l) = (layout.site(j, side), layout.site(j + 1, side));
            let (dk, dl) = (params.delta_coupler(k), params.delta_coupler(l));
            let lhs = (dl - dk).abs() / (1.0 / dk + 1.0 / dl);
            let rhs = params.g_coupler[k] * params.g_coupler[l];
            isolation.push((lhs / rhs).abs());
        }
    }
    if !isolation.is_empty() {
        entries.push(inequality(ConditionId::CavityIsolation, isolation, thresholds.isolation_min_ratio));
    }

    let detuning = (0..n)
        .map(|j| {
            let d = params.delta(j);
            [params.delta_coupler(j), params.delta_coupler(n + j), params.delta(n + j)]
                .iter()
                .map(|x| (x - d).abs() / d.abs())
                .fold(0.0, f64::max)
        })
        .collect();
    entries.push(equality(ConditionId::DetuningMatch, detuning, thresholds.equality_tol));

    let chi: Vec<f64> = (0..m).map(|k| params.chi(k)).collect();
    let shifts = chi.iter().map(|c| (c - chi[0]).abs() / chi[0].abs()).collect();
    entries.push(equality(ConditionId::EqualShifts, shifts, thresholds.equality_tol));

    let coupler_total: f64 = (0..m).map(|k| params.chi_coupler(k)).sum();
    let coupler = chi.iter().map(|c| (c - coupler_total).abs() / c.abs()).collect();
    entries.push(equality(ConditionId::CouplerShift, coupler, thresholds.equality_tol));

    let lambda: Vec<f64> = (0..m).map(|k| params.lambda(k)).collect();
    let exchange = lambda.iter().map(|l| (l - lambda[0]).abs() / lambda[0].abs()).collect();
    entries.push(equality(ConditionId::UniformExchange, exchange, thresholds.equality_tol));

    let mut dispersive = Vec::new();
    for k in 0..m {
        dispersive.push(params.delta(k).abs() / params.g[k]);
        dispersive.push(params.delta_coupler(k).abs() / params.g_coupler[k]);
    }
    entries.push(inequality(ConditionId::Dispersive, dispersive, thresholds.dispersive_min_ratio));

    ConditionReport { entries }
}

/// Capacitive crosstalk `g_kl = max(g_Ak C_l, g_Al C_k) / C_Σ` with
/// `C_Σ = Σ C_k + C_q`.
pub fn crosstalk_estimate(capacitances: &[f64], c_self: f64, g_coupler: &[f64]) -> Result<Vec<Vec<f64>>> {
    if capacitances.len() != g_coupler.len() {
        return Err(Error::Shape { expected: g_coupler.len(), got: capacitances.len() });
    }
    if capacitances.iter().any(|&c| !(c > 0.0)) || !(c_self > 0.0) {
        return Err(Error::Domain("capacitances must be positive".into()));
    }
    let total: f64 = capacitances.iter().sum::<f64>() + c_self;
    let m = capacitances.len();
    Ok((0..m)
        .map(|k| {
            (0..m)
                .map(|l| {
                    if k == l {
                        0.0
                    } else {
                        (g_coupler[k] * capacitances[l]).max(g_coupler[l] * capacitances[k]) / total
                    }
                })
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityLifetime {
    /// Seconds; infinite when some cavity is lossless.
    pub seconds: f64,
    pub unbounded: bool,
}

/// `T_cav = min_k κ_k⁻¹ / (2n)`. Lossless cavities do not constrain the
/// minimum; if every cavity is lossless the lifetime is unbounded.
pub fn cavity_lifetime(kappa: &[f64], n: usize) -> Result<CavityLifetime> {
    if n < 1 || kappa.is_empty() {
        return Err(Error::Config("need at least one cavity".into()));
    }
    if kappa.iter().any(|&k| !(k >= 0.0)) {
        return Err(Error::Domain("cavity decay rates must be non-negative".into()));
    }
    let min_life = kappa.iter().map(|&k| if k == 0.0 { f64::INFINITY } else { 1.0 / k }).fold(f64::INFINITY, f64::min);
    let seconds = min_life / (2 * n) as f64;
    Ok(CavityLifetime { seconds, unbounded: seconds.is_infinite() })
}

/// `Q = ω_c / κ`; infinite for a lossless cavity.
pub fn quality_factor(omega_c: f64, kappa: f64) -> f64 {
    if kappa == 0.0 {
        f64::INFINITY
    } else {
        omega_c / kappa
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{ghz, mhz, to_mhz, us};
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn reference_couplings_at_b9() {
        let p = reference_params(9.0).unwrap();
        let g: Vec<f64> = p.g[..3].iter().map(|&x| to_mhz(x)).collect();
        let ga: Vec<f64> = p.g_coupler[..3].iter().map(|&x| to_mhz(x)).collect();
        for (got, want) in g.iter().zip([55.6, 78.6, 96.2]) {
            assert!((got - want).abs() < 0.05, "{got} vs {want}");
        }
        for (got, want) in ga.iter().zip([22.7, 32.1, 39.3]) {
            assert!((got - want).abs() < 0.05, "{got} vs {want}");
        }
        assert_eq!(&p.g[..3], &p.g[3..]);
        assert_eq!(&p.g_coupler[..3], &p.g_coupler[3..]);
        let cav: Vec<f64> = p.cavity_omega.iter().map(|&w| crate::units::to_ghz(w)).collect();
        for (got, want) in cav.iter().zip([7.0, 7.5, 8.0, 7.0, 7.5, 8.0]) {
            assert!((got - want).abs() < 1e-9);
        }
        assert!(close(p.delta_tilde(0), ghz(-0.5) - mhz(400.0), 1e-12));
    }

    #[test]
    fn single_pair_coupler_ratio() {
        let p = derive_params(&[ghz(-0.5)], mhz(37.0), 1, ghz(6.5), mhz(-400.0)).unwrap();
        assert!(close(p.g_coupler[0], p.g[0] / 2f64.sqrt(), 1e-15));
    }

    #[test]
    fn derived_shifts_are_identical() {
        let p = reference_params(9.0).unwrap();
        let chi0 = p.g[0] * p.g[0] / p.delta(0);
        let worst = (0..6).map(|k| (p.chi(k) - chi0).abs()).fold(0.0, f64::max);
        assert!(worst <= 8.0 * f64::EPSILON * chi0.abs(), "{worst}");
    }

    #[test]
    fn derive_errors() {
        assert!(matches!(derive_params(&[ghz(-0.5), ghz(1.0)], 1.0, 2, ghz(6.5), 0.0), Err(Error::InvalidRegime(_))));
        assert!(matches!(derive_params(&[], 1.0, 0, ghz(6.5), 0.0), Err(Error::Config(_))));
        assert!(derive_params(&[ghz(-0.5)], 0.0, 1, ghz(6.5), 0.0).is_err());
    }

    #[test]
    fn transfer_time_at_b9() {
        let e = effective_params(&reference_params(9.0).unwrap()).unwrap();
        assert!(close(e.transfer_time().unwrap(), 0.081e-6, 0.01), "{}", e.transfer_time().unwrap());
        // |λ| = |δ_1| / (sqrt(6) * 81)
        assert!(close(e.lambda_common.abs(), ghz(0.5) / (6f64.sqrt() * 81.0), 1e-12));
        assert!((to_mhz(e.lambda_common.abs()) - 2.52).abs() < 0.005);
        assert!((to_mhz(e.big_lambda) - 6.17).abs() < 0.005);
        assert!(e.lambda_common < 0.0 && e.chi < 0.0);
        assert_eq!(e.transfer_time().unwrap() * e.big_lambda, std::f64::consts::PI);
    }

    #[test]
    fn doubling_couplings_quarters_time() {
        let p = reference_params(9.0).unwrap();
        let mut q = p.clone();
        q.g.iter_mut().for_each(|g| *g *= 2.0);
        q.g_coupler.iter_mut().for_each(|g| *g *= 2.0);
        let (a, b) = (effective_params(&p).unwrap(), effective_params(&q).unwrap());
        assert!(close(b.transfer_time().unwrap(), a.transfer_time().unwrap() / 4.0, 1e-12));
    }

    #[test]
    fn nonuniform_lambda_is_rejected() {
        let mut p = reference_params(9.0).unwrap();
        p.g_coupler[1] *= 1.01;
        match effective_params(&p) {
            Err(Error::ConditionViolation { condition, .. }) => assert_eq!(condition, "uniform_exchange"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reference_conditions() {
        let p = reference_params(9.0).unwrap();
        let rep = check_conditions(&p, &Thresholds::default());
        for id in [ConditionId::DetuningMatch, ConditionId::EqualShifts, ConditionId::CouplerShift, ConditionId::UniformExchange] {
            let e = rep.get(id).unwrap();
            assert!(e.pass && e.worst <= 16.0 * f64::EPSILON, "{id:?} {}", e.worst);
        }
        assert_eq!(rep.get(ConditionId::DetuningMatch).unwrap().worst, 0.0);
        let disp = rep.get(ConditionId::Dispersive).unwrap();
        assert!((disp.worst - 9.0).abs() < 1e-12);
        assert!(rep.get(ConditionId::CavityIsolation).unwrap().pass);
        assert!(rep.all_pass());
    }

    #[test]
    fn breakage_fails_matching() {
        let p = reference_params(9.0).unwrap();
        let b = apply_breakage(&p, 1.1).unwrap();
        assert!(close(b.delta(3), ghz(-0.55), 1e-12));
        assert!(close(b.delta_coupler(3), ghz(-0.55), 1e-12));
        assert_eq!(b.g, p.g);
        assert_eq!(b.g_coupler, p.g_coupler);
        let rep = check_conditions(&b, &Thresholds::default());
        let detuning = rep.get(ConditionId::DetuningMatch).unwrap();
        assert!(!detuning.pass);
        assert!((detuning.worst - 0.1).abs() < 1e-12);
        assert!(!rep.get(ConditionId::EqualShifts).unwrap().pass);
        assert!(!rep.get(ConditionId::UniformExchange).unwrap().pass);
    }

    #[test]
    fn breakage_identity_and_domain() {
        let p = reference_params(9.0).unwrap();
        assert_eq!(apply_breakage(&p, 1.0).unwrap(), p);
        assert!(apply_breakage(&p, 0.0).is_err());
        assert!(apply_breakage(&p, -1.0).is_err());
        let b = apply_breakage(&p, 0.9).unwrap();
        assert!(close(b.delta(5), 0.9 * p.delta(2), 1e-12));
    }

    #[test]
    fn capacitive_crosstalk() {
        let ga = vec![mhz(22.7), mhz(32.1), mhz(39.3), mhz(22.7), mhz(32.1), mhz(39.3)];
        let caps = vec![1e-15; 6];
        let x = crosstalk_estimate(&caps, 94e-15, &ga).unwrap();
        for k in 0..6 {
            for l in 0..6 {
                if k != l {
                    assert!(close(x[k][l], 0.01 * ga[k].max(ga[l]), 1e-12));
                    assert_eq!(x[k][l], x[l][k]);
                }
            }
        }
        // C_l → 0 with g_Al → 0 (a coupler that is barely attached)
        let mut tiny = caps.clone();
        tiny[2] = 1e-30;
        let mut ga_tiny = vec![mhz(30.0); 6];
        ga_tiny[2] = 0.0;
        let y = crosstalk_estimate(&tiny, 94e-15, &ga_tiny).unwrap();
        assert!(y[0][2] < 1e-14 * mhz(30.0));
        let u = crosstalk_estimate(&caps, 94e-15, &vec![mhz(30.0); 6]).unwrap();
        let v = u[0][1];
        assert!(u.iter().enumerate().all(|(k, row)| row.iter().enumerate().all(|(l, &x)| k == l || x == v)));
        assert!(crosstalk_estimate(&[0.0], 1.0, &[1.0]).is_err());
    }

    #[test]
    fn lifetime_and_quality() {
        let t = cavity_lifetime(&[1.0 / us(5.0); 6], 3).unwrap();
        assert!(close(t.seconds, us(5.0) / 6.0, 1e-12));
        assert!(!t.unbounded);
        assert!(cavity_lifetime(&[0.0; 2], 1).unwrap().unbounded);
        let q1 = quality_factor(ghz(7.0), 1.0 / us(5.0));
        let q2 = quality_factor(ghz(7.5), 1.0 / us(5.0));
        let q3 = quality_factor(ghz(8.0), 1.0 / us(5.0));
        assert!((q1 / 1e5 - 2.2).abs() < 0.05, "{q1}");
        assert!((q2 / 1e5 - 2.4).abs() < 0.05, "{q2}");
        assert!((q3 / 1e5 - 2.5).abs() < 0.05, "{q3}");
        assert!(quality_factor(ghz(7.0), 0.0).is_infinite());
    }

    #[test]
    fn reference_decoherence_is_valid() {
        let d = DecoherenceParams::reference(3);
        d.validate(3).unwrap();
        assert!(close(d.kappa[0], 2e5, 1e-12));
        let mut bad = d.clone();
        bad.kappa[0] = -1.0;
        assert!(bad.validate(3).is_err());
    }

    proptest! {
        #[test]
        fn derived_params_satisfy_matching(
            d in proptest::collection::vec(0.2f64..3.0, 1..5),
            b in 3.0f64..40.0,
            negative in any::<bool>(),
        ) {
            let sign = if negative { -1.0 } else { 1.0 };
            let deltas: Vec<f64> = d.iter().map(|x| sign * ghz(*x)).collect();
            let n = deltas.len();
            let p = derive_params(&deltas, deltas[0].abs() / b, n, ghz(6.5), mhz(-400.0)).unwrap();
            let rep = check_conditions(&p, &Thresholds::default());
            for id in [ConditionId::DetuningMatch, ConditionId::EqualShifts, ConditionId::CouplerShift, ConditionId::UniformExchange] {
                prop_assert!(rep.get(id).unwrap().worst < 1e-14);
            }
            let e = effective_params(&p).unwrap();
            prop_assert!((e.transfer_time().unwrap() * e.big_lambda - std::f64::consts::PI).abs() < 1e-15);
        }

        #[test]
        fn unit_breakage_keeps_detunings(b in 3.0f64..40.0) {
            let p = reference_params(b).unwrap();
            let q = apply_breakage(&p, 1.0).unwrap();
            for k in 0..6 {
                prop_assert_eq!(p.delta(k), q.delta(k));
                prop_assert_eq!(p.delta_coupler(k), q.delta_coupler(k));
            }
        }

        #[test]
        fn lifetime_and_q_monotone(k1 in 1e3f64..1e7, k2 in 1e3f64..1e7, w1 in 1e9f64..1e11, w2 in 1e9f64..1e11, n in 1usize..6) {
            let (ka, kb) = if k1 <= k2 { (k1, k2) } else { (k2, k1) };
            let (wa, wb) = if w1 <= w2 { (w1, w2) } else { (w2, w1) };
            // Q increases with ω and with κ⁻¹
            prop_assert!(quality_factor(wa, kb) <= quality_factor(wb, kb));
            prop_assert!(quality_factor(wa, kb) <= quality_factor(wa, ka));
            let t1 = cavity_lifetime(&vec![ka; 2 * n], n).unwrap().seconds;
            let t2 = cavity_lifetime(&vec![ka; 2 * (n + 1)], n + 1).unwrap().seconds;
            prop_assert!(t2 < t1);
        }
    }
}
