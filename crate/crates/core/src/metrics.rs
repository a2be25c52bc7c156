//! Noise, disturbance, distance and covariance quantities.
//!
//! Where a quantity has more than one route (composite-space expectation versus
//! reduced moment-operator form, joint-distribution statistics versus operator
//! expectations) each route is computed independently so callers can compare
//! them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, anticommutator, op_norm, CMatrix, Tolerance};
use crate::observables::{
    noise_operator, spanning_states, spectral_measure, DiscretePovm, HermitianObservable, PureState,
    SpectralMeasure,
};
use crate::schemes::{
    distorted_observable, heisenberg_in, heisenberg_out, total_channel, Factor, MeasurementScheme,
    QuantumChannel,
};

/// Probabilities over real outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    outcomes: Vec<f64>,
    probabilities: Vec<f64>,
}

impl OutcomeDistribution {
    /// Probabilities in `[-atol, 0)` are clipped to zero; anything lower is
    /// rejected, as is a total mass further than `atol` from one.
    pub fn new(outcomes: Vec<f64>, probabilities: Vec<f64>, tol: Tolerance) -> Result<Self> {
        if outcomes.len() != probabilities.len() {
            return Err(Error::LengthMismatch {
                what: "probabilities",
                expected: outcomes.len(),
                found: probabilities.len(),
            });
        }
        if outcomes.iter().chain(&probabilities).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut clipped = Vec::with_capacity(probabilities.len());
        for (&x, &p) in outcomes.iter().zip(&probabilities) {
            if p < -tol.atol {
                return Err(Error::NegativeProbability { outcome: x, value: p });
            }
            clipped.push(p.max(0.0));
        }
        let total: f64 = clipped.iter().sum();
        if (total - 1.0).abs() > tol.atol {
            return Err(Error::InvalidArgument(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self {
            outcomes,
            probabilities: clipped,
        })
    }

    pub fn point_mass(x: f64) -> Self {
        Self {
            outcomes: vec![x],
            probabilities: vec![1.0],
        }
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.outcomes.iter().copied().zip(self.probabilities.iter().copied())
    }

    pub fn expectation(&self) -> f64 {
        self.iter().map(|(x, p)| x * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.expectation();
        self.iter().map(|(x, p)| p * (x - m) * (x - m)).sum()
    }
}

/// `p_k = <psi|E(x_k) psi>`.
pub fn distribution(e: &DiscretePovm, psi: &PureState, tol: Tolerance) -> Result<OutcomeDistribution> {
    check_state(psi, e.dim())?;
    let probabilities = e.effects().iter().map(|eff| psi.expect(eff)).collect();
    OutcomeDistribution::new(e.outcomes().to_vec(), probabilities, tol)
}

pub fn expectation(d: &OutcomeDistribution) -> f64 {
    d.expectation()
}

pub fn variance(d: &OutcomeDistribution) -> f64 {
    d.variance()
}

fn check_state(psi: &PureState, dim: usize) -> Result<()> {
    if psi.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: psi.dim(),
        });
    }
    Ok(())
}

/// `sqrt(<psi|(E[2] - A^2) psi>)`.
///
/// Only meaningful for unbiased measures; a noise-operator expectation below
/// `-atol` is an error, values in `[-atol, 0)` give zero.
pub fn eps_n(e: &DiscretePovm, a: &HermitianObservable, psi: &PureState, tol: Tolerance) -> Result<f64> {
    check_state(psi, e.dim())?;
    let n = noise_operator(e, a)?;
    let value = n.expect(psi);
    if value < -tol.atol {
        return Err(Error::NegativeNoiseSquare { value });
    }
    Ok(value.max(0.0).sqrt())
}

/// Both sides of `Var(E_psi) = Var(E^A_psi) + eps_n^2` with `A = E[1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceSplit {
    /// Variance of the measured distribution.
    pub measured: f64,
    /// Variance of the spectral measure of `E[1]`.
    pub intrinsic: f64,
    pub noise_square: f64,
    pub residual: f64,
}

pub fn variance_split(e: &DiscretePovm, psi: &PureState, tol: Tolerance) -> Result<VarianceSplit> {
    check_state(psi, e.dim())?;
    let first = e.moment(1);
    let measured = distribution(e, psi, tol)?.variance();
    let intrinsic = distribution(spectral_measure(&first, tol)?.povm(), psi, tol)?.variance();
    let noise_square = noise_operator(e, &first)?.expect(psi);
    Ok(VarianceSplit {
        measured,
        intrinsic,
        noise_square,
        residual: (measured - intrinsic - noise_square).abs(),
    })
}

/// The two nonnegative terms of the reduced noise formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseTerms {
    /// `<psi|(E[2] - E[1]^2) psi>`.
    pub spread: f64,
    /// `<psi|(E[1] - A)^2 psi>`.
    pub bias: f64,
}

impl NoiseTerms {
    pub fn square(&self) -> f64 {
        self.spread + self.bias
    }

    pub fn value(&self) -> f64 {
        self.square().sqrt()
    }
}

/// Reduced form of the root-mean-square noise, computed from the first and
/// second moment operators of `e`.
pub fn ozawa_noise(e: &DiscretePovm, a: &HermitianObservable, psi: &PureState) -> Result<NoiseTerms> {
    check_state(psi, e.dim())?;
    linalg::check_dim(a.matrix(), e.dim())?;
    Ok(moment_noise_terms(
        e.moment(1).matrix(),
        e.moment(2).matrix(),
        a.matrix(),
        psi,
    ))
}

fn moment_noise_terms(first: &CMatrix, second: &CMatrix, target: &CMatrix, psi: &PureState) -> NoiseTerms {
    let spread = (psi.expect(second) - psi.expect(&(first * first))).max(0.0);
    let bias = ((first - target) * psi.amplitudes()).norm_squared();
    NoiseTerms { spread, bias }
}

/// `<psi (x) xi|(M_out - A_in)^2 psi (x) xi>` evaluated on the composite space.
pub fn ozawa_noise_composite_square(s: &MeasurementScheme, a: &HermitianObservable, psi: &PureState) -> Result<f64> {
    let m_out = heisenberg_out(s, Factor::Pointer, s.pointer())?;
    let a_in = heisenberg_in(s, Factor::System, a)?;
    let v = s.initial_composite(psi)?;
    Ok(((m_out - a_in) * v).norm_squared())
}

pub fn ozawa_noise_composite(s: &MeasurementScheme, a: &HermitianObservable, psi: &PureState) -> Result<f64> {
    Ok(ozawa_noise_composite_square(s, a, psi)?.sqrt())
}

/// Total variation distance `sum |p - q|` of two atomic distributions. Atoms
/// within `align` of each other are treated as the same point.
pub fn tv_distance(p: &OutcomeDistribution, q: &OutcomeDistribution, align: f64) -> f64 {
    let mut atoms: Vec<(f64, f64)> = p.iter().chain(q.iter().map(|(x, w)| (x, -w))).collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut anchor = f64::NEG_INFINITY;
    let mut net = 0.0;
    for (x, w) in atoms {
        if x - anchor > align {
            total += f64::abs(net);
            anchor = x;
            net = 0.0;
        }
        net += w;
    }
    total += f64::abs(net);
    total.clamp(0.0, 2.0)
}

/// `<psi|(a b + b a) psi> / 2`.
pub fn symmetrized_product(a: &CMatrix, b: &CMatrix, psi: &PureState) -> f64 {
    0.5 * psi.expect(&anticommutator(a, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Covariance {
    pub value: f64,
    /// Whether `e` commutes with the spectral measure of `a`, i.e. whether the
    /// value is the covariance of an actual joint distribution.
    pub commutes: bool,
    pub commutator_residual: f64,
}

/// `<psi|(A E[1] + E[1] A) psi>/2 - <A><E[1]>`.
pub fn symmetrized_covariance(
    e: &DiscretePovm,
    a: &HermitianObservable,
    psi: &PureState,
    tol: Tolerance,
) -> Result<Covariance> {
    check_state(psi, e.dim())?;
    linalg::check_dim(a.matrix(), e.dim())?;
    let e1 = e.moment(1);
    let value = symmetrized_product(a.matrix(), e1.matrix(), psi) - a.expect(psi) * e1.expect(psi);
    let residual = commutation_residual(&spectral_measure(a, tol)?, e);
    Ok(Covariance {
        value,
        commutes: residual <= tol.atol,
        commutator_residual: residual,
    })
}

fn commutation_residual(a_spec: &SpectralMeasure, e: &DiscretePovm) -> f64 {
    let mut worst: f64 = 0.0;
    for p in a_spec.projections() {
        worst = worst.max(e.commutator_residual(p));
    }
    worst
}

/// Joint distribution of a sharp observable and a commuting POVM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    /// Outcomes of the sharp observable.
    pub rows: Vec<f64>,
    /// Outcomes of the POVM.
    pub cols: Vec<f64>,
    pub probabilities: Vec<Vec<f64>>,
}

impl JointDistribution {
    fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.rows.iter().enumerate().flat_map(move |(i, &x)| {
            self.cols
                .iter()
                .enumerate()
                .map(move |(j, &y)| (x, y, self.probabilities[i][j]))
        })
    }

    pub fn row_marginal(&self) -> Vec<f64> {
        self.probabilities.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_marginal(&self) -> Vec<f64> {
        (0..self.cols.len())
            .map(|j| self.probabilities.iter().map(|r| r[j]).sum())
            .collect()
    }

    /// `integral x y dmu`.
    pub fn product_moment(&self) -> f64 {
        self.cells().map(|(x, y, p)| x * y * p).sum()
    }

    /// `integral (x - y)^2 dmu`.
    pub fn mean_square_difference(&self) -> f64 {
        self.cells().map(|(x, y, p)| (x - y) * (x - y) * p).sum()
    }

    pub fn row_distribution(&self) -> OutcomeDistribution {
        OutcomeDistribution {
            outcomes: self.rows.clone(),
            probabilities: self.row_marginal(),
        }
    }

    pub fn col_distribution(&self) -> OutcomeDistribution {
        OutcomeDistribution {
            outcomes: self.cols.clone(),
            probabilities: self.col_marginal(),
        }
    }

    pub fn covariance(&self) -> f64 {
        self.product_moment() - self.row_distribution().expectation() * self.col_distribution().expectation()
    }
}

/// `mu(x, y) = <psi|P_x E(y) psi>`, defined only when `e` commutes with the
/// spectral measure (`max |[P_x, E(y)]| <= atol`).
pub fn joint_distribution(
    a_spec: &SpectralMeasure,
    e: &DiscretePovm,
    psi: &PureState,
    tol: Tolerance,
) -> Result<JointDistribution> {
    check_state(psi, e.dim())?;
    linalg::check_dim(&a_spec.projections()[0], e.dim())?;
    let residual = commutation_residual(a_spec, e);
    if residual > tol.atol {
        return Err(Error::NotCommuting { residual });
    }
    let mut probabilities = Vec::with_capacity(a_spec.outcomes().len());
    for p in a_spec.projections() {
        let mut row = Vec::with_capacity(e.len());
        for (y, eff) in e.iter() {
            let value = psi.expect(&(p * eff));
            if value < -tol.atol {
                return Err(Error::NegativeProbability { outcome: y, value });
            }
            row.push(value.max(0.0));
        }
        probabilities.push(row);
    }
    Ok(JointDistribution {
        rows: a_spec.outcomes().to_vec(),
        cols: e.outcomes().to_vec(),
        probabilities,
    })
}

/// Both sides of the covariance decomposition of the squared noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cov4Check {
    /// Squared noise from the moment operators.
    pub noise_square: f64,
    /// `(dExp)^2 + (sqrt Var_M - sqrt Var_A)^2 + 2 (sqrt(Var_M Var_A) - Cov)`
    /// from the joint distribution.
    pub decomposition: f64,
    /// `integral (x - y)^2 dmu`.
    pub mean_square_difference: f64,
    /// `integral x y dmu`.
    pub product_moment: f64,
    /// `<psi|(A E[1] + E[1] A) psi> / 2`.
    pub symmetrized_product: f64,
    pub residual: f64,
}

pub fn verify_cov4(
    a_spec: &SpectralMeasure,
    e: &DiscretePovm,
    psi: &PureState,
    tol: Tolerance,
) -> Result<Cov4Check> {
    let joint = joint_distribution(a_spec, e, psi, tol)?;
    let a = a_spec.source();
    let noise_square = ozawa_noise(e, a, psi)?.square();

    let da = joint.row_distribution();
    let dm = joint.col_distribution();
    let (var_a, var_m) = (da.variance().max(0.0), dm.variance().max(0.0));
    let d_exp = dm.expectation() - da.expectation();
    let decomposition = d_exp * d_exp
        + (var_m.sqrt() - var_a.sqrt()).powi(2)
        + 2.0 * ((var_m * var_a).sqrt() - joint.covariance());
    let mean_square_difference = joint.mean_square_difference();
    let product_moment = joint.product_moment();
    let sym = symmetrized_product(a.matrix(), e.moment(1).matrix(), psi);
    let residual = [
        (noise_square - decomposition).abs(),
        (noise_square - mean_square_difference).abs(),
        (product_moment - sym).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(Cov4Check {
        noise_square,
        decomposition,
        mean_square_difference,
        product_moment,
        symmetrized_product: sym,
        residual,
    })
}

/// Root-mean-square disturbance of `B` by both routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disturbance {
    /// `sqrt <psi (x) xi|(B_out - B_in)^2 psi (x) xi>`.
    pub composite: f64,
    /// From the distorted observable's moments, `I*(B)` and `I*(B^2)`.
    pub reduced: f64,
    pub terms: NoiseTerms,
    /// `|composite^2 - reduced^2|`.
    pub residual: f64,
}

pub fn disturbance_composite_square(s: &MeasurementScheme, b: &HermitianObservable, psi: &PureState) -> Result<f64> {
    let b_out = heisenberg_out(s, Factor::System, b)?;
    let b_in = heisenberg_in(s, Factor::System, b)?;
    let v = s.initial_composite(psi)?;
    Ok(((b_out - b_in) * v).norm_squared())
}

/// Reduced disturbance terms for a channel, via its distorted observable.
pub fn disturbance_reduced(
    c: &QuantumChannel,
    b: &HermitianObservable,
    psi: &PureState,
    tol: Tolerance,
) -> Result<NoiseTerms> {
    let distorted = distorted_observable(c, &spectral_measure(b, tol)?, tol)?;
    ozawa_noise(&distorted, b, psi)
}

pub fn disturbance(s: &MeasurementScheme, b: &HermitianObservable, psi: &PureState) -> Result<Disturbance> {
    let tol = s.tolerance();
    let composite_square = disturbance_composite_square(s, b, psi)?;
    let channel = total_channel(s)?;
    let terms = disturbance_reduced(&channel, b, psi, tol)?;
    Ok(Disturbance {
        composite: composite_square.sqrt(),
        reduced: terms.value(),
        terms,
        residual: (composite_square - terms.square()).abs(),
    })
}

/// Largest noise over the spanning-state protocol.
pub fn max_noise_over_spanning_states(e: &DiscretePovm, a: &HermitianObservable) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for psi in spanning_states(e.dim()) {
        worst = worst.max(ozawa_noise(e, a, &psi)?.value());
    }
    Ok(worst)
}

/// Largest reduced disturbance over the spanning-state protocol.
pub fn max_disturbance_over_spanning_states(
    c: &QuantumChannel,
    b: &HermitianObservable,
    tol: Tolerance,
) -> Result<f64> {
    let distorted = distorted_observable(c, &spectral_measure(b, tol)?, tol)?;
    max_noise_over_spanning_states(&distorted, b)
}

/// Per-state summary of the noise measures.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseReport {
    pub eps_n: Option<f64>,
    pub eps_n_error: Option<String>,
    pub eps_ozawa_reduced: Option<f64>,
    pub eps_ozawa_composite: Option<f64>,
    pub ozawa_route_residual: Option<f64>,
    pub tv_distance: Option<f64>,
    pub covariance_term: Option<f64>,
}

/// Every noise measure of `e` against `a` in `psi`. The composite route is
/// evaluated only when the scheme producing `e` is supplied.
pub fn noise_report(
    e: &DiscretePovm,
    a: &HermitianObservable,
    psi: &PureState,
    scheme: Option<&MeasurementScheme>,
    tol: Tolerance,
) -> Result<NoiseReport> {
    let mut report = NoiseReport::default();
    match eps_n(e, a, psi, tol) {
        Ok(v) => report.eps_n = Some(v),
        Err(err @ Error::NegativeNoiseSquare { .. }) => report.eps_n_error = Some(err.to_string()),
        Err(err) => return Err(err),
    }
    let reduced = ozawa_noise(e, a, psi)?;
    report.eps_ozawa_reduced = Some(reduced.value());
    if let Some(s) = scheme {
        let composite = ozawa_noise_composite_square(s, a, psi)?;
        report.eps_ozawa_composite = Some(composite.sqrt());
        report.ozawa_route_residual = Some((composite - reduced.square()).abs());
    }
    let target = distribution(spectral_measure(a, tol)?.povm(), psi, tol)?;
    let measured = distribution(e, psi, tol)?;
    report.tv_distance = Some(tv_distance(&measured, &target, tol.atol));
    report.covariance_term = Some(symmetrized_covariance(e, a, psi, tol)?.value);
    Ok(report)
}

/// A state where the noise-operator expectation vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroNoiseCandidate {
    pub state: PureState,
    pub noise_square: f64,
    pub tv_distance: f64,
}

/// Searches the (numerical) kernel of `E[2] - A^2` for an unbiased `e` and
/// reports every kernel state together with the total variation distance
/// between the measured and target distributions there. Nonzero distances
/// would be states with vanishing noise but different statistics.
pub fn zero_noise_candidates(
    e: &DiscretePovm,
    a: &HermitianObservable,
    kernel_threshold: f64,
    tol: Tolerance,
) -> Result<Vec<ZeroNoiseCandidate>> {
    let bias = op_norm(&(e.moment(1).matrix() - a.matrix()));
    if bias > tol.atol.max(tol.rtol * linalg::max_abs(a.matrix())) {
        return Err(Error::InvalidArgument(format!(
            "measure is biased (|E[1] - A| = {bias:e})"
        )));
    }
    let n = noise_operator(e, a)?;
    let eig = n.eigen();
    let target = spectral_measure(a, tol)?;
    let kernel: Vec<usize> = (0..eig.values.len())
        .filter(|&k| eig.values[k].abs() <= kernel_threshold)
        .collect();
    let mut states = Vec::new();
    for &k in &kernel {
        states.push(PureState::normalized(eig.vectors.column(k).into_owned())?);
    }
    for (i, &j) in kernel.iter().enumerate() {
        for &k in &kernel[i + 1..] {
            states.push(PureState::normalized(eig.vectors.column(j) + eig.vectors.column(k))?);
        }
    }
    states
        .into_iter()
        .map(|state| {
            let measured = distribution(e, &state, tol)?;
            let ideal = distribution(target.povm(), &state, tol)?;
            Ok(ZeroNoiseCandidate {
                noise_square: n.expect(&state),
                tv_distance: tv_distance(&measured, &ideal, tol.atol),
                state,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{smeared_grid_position, spin_observable, SmearingKernel};
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn distribution_by_hand() {
        let a = HermitianObservable::diagonal(&[0.5, -0.5]).unwrap();
        let sm = spectral_measure(&a, tol()).unwrap();
        let psi = PureState::from_real(&[-3.0, 1.0]).unwrap();
        let d = distribution(sm.povm(), &psi, tol()).unwrap();
        assert_eq!(d.outcomes(), &[-0.5, 0.5]);
        assert_abs_diff_eq!(d.probabilities()[0], 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(d.probabilities()[1], 0.9, epsilon = 1e-15);
    }

    #[test]
    fn moments_of_simple_distributions() {
        let d = OutcomeDistribution::point_mass(2.5);
        assert_eq!((expectation(&d), variance(&d)), (2.5, 0.0));
        let d = OutcomeDistribution::new(vec![-0.5, 0.5], vec![0.5, 0.5], tol()).unwrap();
        assert_eq!((expectation(&d), variance(&d)), (0.0, 0.25));
        assert!(matches!(
            OutcomeDistribution::new(vec![0.0, 1.0], vec![-0.1, 1.1], tol()),
            Err(Error::NegativeProbability { .. })
        ));
        let clipped = OutcomeDistribution::new(vec![0.0, 1.0], vec![-1e-12, 1.0], tol()).unwrap();
        assert_eq!(clipped.probabilities()[0], 0.0);
    }

    #[test]
    fn tv_examples() {
        let p = OutcomeDistribution::new(vec![0.0, 1.0], vec![0.9, 0.1], tol()).unwrap();
        let q = OutcomeDistribution::new(vec![0.0, 1.0], vec![0.2, 0.8], tol()).unwrap();
        assert_abs_diff_eq!(tv_distance(&p, &q, 1e-9), 1.4, epsilon = 1e-15);
        assert_eq!(tv_distance(&p, &p, 1e-9), 0.0);
        let r = OutcomeDistribution::new(vec![2.0, 3.0], vec![0.5, 0.5], tol()).unwrap();
        assert_abs_diff_eq!(tv_distance(&p, &r, 1e-9), 2.0, epsilon = 1e-15);
        // atoms within the alignment tolerance are merged
        let shifted = OutcomeDistribution::new(vec![1e-12, 1.0 + 1e-12], vec![0.9, 0.1], tol()).unwrap();
        assert!(tv_distance(&p, &shifted, 1e-9) < 1e-15);
    }

    #[test]
    fn eps_n_examples() {
        let a = spin_observable([0.0, 0.0, 1.0]).unwrap();
        let sm = spectral_measure(&a, tol()).unwrap();
        let psi = PureState::from_real(&[0.3, 0.7]).unwrap();
        assert!(eps_n(sm.povm(), &a, &psi, tol()).unwrap() < 1e-7);

        let grid: Vec<f64> = (0..5).map(f64::from).collect();
        let k = SmearingKernel::new(vec![-1.0, 0.0, 1.0], vec![0.25, 0.5, 0.25], tol()).unwrap();
        let e = smeared_grid_position(&grid, &k, tol()).unwrap();
        let q = HermitianObservable::diagonal(&grid).unwrap();
        for psi in spanning_states(5) {
            assert_abs_diff_eq!(eps_n(&e, &q, &psi, tol()).unwrap(), 0.5f64.sqrt(), epsilon = 1e-14);
        }

        // C = diag(1, 0), A = diag(0, 2): noise operator diag(1, -4)
        let c = HermitianObservable::diagonal(&[1.0, 0.0]).unwrap();
        let a = HermitianObservable::diagonal(&[0.0, 2.0]).unwrap();
        let e = spectral_measure(&c, tol()).unwrap().into_povm();
        let down = PureState::basis(2, 1).unwrap();
        assert!(matches!(
            eps_n(&e, &a, &down, tol()),
            Err(Error::NegativeNoiseSquare { .. })
        ));
    }

    #[test]
    fn ozawa_noise_spectral_case() {
        let a = spin_observable([0.0, 0.0, 1.0]).unwrap();
        let c = spin_observable([1.0, 0.0, 0.0]).unwrap();
        let e = spectral_measure(&c, tol()).unwrap().into_povm();
        let psi = PureState::from_real(&[0.6, 0.8]).unwrap();
        let terms = ozawa_noise(&e, &a, &psi).unwrap();
        let diff = c.sub(&a).unwrap();
        let direct = psi.expect(&(diff.matrix() * diff.matrix()));
        assert_abs_diff_eq!(terms.square(), direct, epsilon = 1e-14);
        assert_abs_diff_eq!(terms.square(), 0.5, epsilon = 1e-14);
        assert!(terms.spread < 1e-14);

        let own = spectral_measure(&a, tol()).unwrap().into_povm();
        assert!(ozawa_noise(&own, &a, &psi).unwrap().square() < 1e-28);
    }

    #[test]
    fn covariance_cases() {
        let a = HermitianObservable::diagonal(&[1.0, 2.0, 4.0]).unwrap();
        let e = smeared_grid_position(
            &[1.0, 2.0, 4.0],
            &SmearingKernel::new(vec![0.0, 1.0], vec![0.5, 0.5], tol()).unwrap(),
            tol(),
        )
        .unwrap();
        let psi = PureState::from_real(&[1.0, 1.0, 2.0]).unwrap();
        let cov = symmetrized_covariance(&e, &a, &psi, tol()).unwrap();
        assert!(cov.commutes);
        // classical: Y = X + 1/2 on average, so Cov = Var(X)
        let p = [1.0 / 6.0, 1.0 / 6.0, 4.0 / 6.0];
        let x = [1.0, 2.0, 4.0];
        let mean: f64 = p.iter().zip(&x).map(|(p, x)| p * x).sum();
        let var: f64 = p.iter().zip(&x).map(|(p, x)| p * (x - mean) * (x - mean)).sum();
        assert_abs_diff_eq!(cov.value, var, epsilon = 1e-14);

        let sm = spectral_measure(&a, tol()).unwrap();
        let own = symmetrized_covariance(sm.povm(), &a, &psi, tol()).unwrap();
        assert_abs_diff_eq!(own.value, a.variance(&psi), epsilon = 1e-14);

        let sx = spin_observable([1.0, 0.0, 0.0]).unwrap();
        let sz = spectral_measure(&spin_observable([0.0, 0.0, 1.0]).unwrap(), tol()).unwrap();
        let psi2 = PureState::from_real(&[1.0, 0.0]).unwrap();
        assert!(!symmetrized_covariance(sz.povm(), &sx, &psi2, tol()).unwrap().commutes);
    }

    #[test]
    fn joint_distribution_cases() {
        let a = HermitianObservable::diagonal(&[0.0, 1.0, 2.0]).unwrap();
        let sm = spectral_measure(&a, tol()).unwrap();
        let psi = PureState::from_real(&[1.0, 2.0, 3.0]).unwrap();
        let joint = joint_distribution(&sm, sm.povm(), &psi, tol()).unwrap();
        let d = distribution(sm.povm(), &psi, tol()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { d.probabilities()[i] } else { 0.0 };
                assert_abs_diff_eq!(joint.probabilities[i][j], expected, epsilon = 1e-15);
            }
        }
        let check = verify_cov4(&sm, sm.povm(), &psi, tol()).unwrap();
        assert!(check.noise_square.abs() < 1e-14 && check.decomposition.abs() < 1e-12);

        let sx = spectral_measure(&spin_observable([1.0, 0.0, 0.0]).unwrap(), tol()).unwrap();
        let sz = spectral_measure(&spin_observable([0.0, 0.0, 1.0]).unwrap(), tol()).unwrap();
        let psi = PureState::basis(2, 0).unwrap();
        assert!(matches!(
            joint_distribution(&sx, sz.povm(), &psi, tol()),
            Err(Error::NotCommuting { .. })
        ));
    }

    #[test]
    fn cov4_on_diagonal_smearing() {
        let grid = [0.0, 1.0, 2.0, 3.0];
        let k = SmearingKernel::new(vec![-0.5, 0.25, 1.0], vec![0.2, 0.5, 0.3], tol()).unwrap();
        let e = smeared_grid_position(&grid, &k, tol()).unwrap();
        let sm = spectral_measure(&HermitianObservable::diagonal(&grid).unwrap(), tol()).unwrap();
        for psi in spanning_states(4) {
            let check = verify_cov4(&sm, &e, &psi, tol()).unwrap();
            assert!(check.residual <= 1e-10, "{check:?}");
        }
    }

    #[test]
    fn zero_noise_search_on_partially_sharp_povm() {
        // smearing only the top grid point: the lower levels have zero noise
        let q = HermitianObservable::diagonal(&[0.0, 1.0, 2.0]).unwrap();
        let effects = vec![
            linalg::diagonal(&[1.0, 0.0, 0.0]),
            linalg::diagonal(&[0.0, 1.0, 0.5]),
            linalg::diagonal(&[0.0, 0.0, 0.0]),
            linalg::diagonal(&[0.0, 0.0, 0.5]),
        ];
        let e = DiscretePovm::new(vec![0.0, 1.0, 2.0, 3.0], effects, tol()).unwrap();
        let found = zero_noise_candidates(&e, &q, 1e-9, tol()).unwrap();
        assert_eq!(found.len(), 3);
        assert!(found.iter().all(|c| c.tv_distance < 1e-12));
    }
}
