//! Observables: pure states, Hermitian operators, discrete POVMs and the
//! standard observable builders.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg::{
    self, check_finite, check_square, hermitian_residual, hermitize_mut, max_abs,
    max_abs_diff, CMatrix, CVector, HermitianEigen, Tolerance, MAX_DIM,
};

/// Largest truncation accepted by [`phase_space_theta_moment`].
pub const THETA_MOMENT_MAX_N: usize = 60;

/// A normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        Self::with_tolerance(amplitudes, Tolerance::default())
    }

    pub fn with_tolerance(amplitudes: CVector, tol: Tolerance) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidArgument("state has no amplitudes".into()));
        }
        if amplitudes.len() > MAX_DIM {
            return Err(Error::DimensionLimit {
                dim: amplitudes.len(),
                limit: MAX_DIM,
            });
        }
        if !amplitudes.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > tol.atol {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(v: CVector) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() {
            return Err(Error::NonFinite);
        }
        if norm == 0.0 {
            return Err(Error::NotNormalized { norm });
        }
        Self::new(v.unscale(norm))
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::normalized(CVector::from_iterator(
            values.len(),
            values.iter().map(|&x| Complex64::new(x, 0.0)),
        ))
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut v = CVector::zeros(dim);
        v[index] = linalg::ONE;
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn projector(&self) -> CMatrix {
        linalg::outer(&self.amplitudes, &self.amplitudes)
    }

    /// `self (x) other` in the system-major convention.
    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }

    pub fn expect(&self, m: &CMatrix) -> f64 {
        linalg::real_expectation(m, &self.amplitudes)
    }
}

/// The computational basis plus every equal-weight pairwise superposition with
/// relative phase 1 and i. Two Hermitian forms agreeing on this set agree
/// everywhere (polarization).
pub fn spanning_states(dim: usize) -> Vec<PureState> {
    let mut states = Vec::with_capacity(dim * dim);
    for k in 0..dim {
        let mut v = CVector::zeros(dim);
        v[k] = linalg::ONE;
        states.push(PureState { amplitudes: v });
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..dim {
        for k in (j + 1)..dim {
            for phase in [linalg::ONE, linalg::I] {
                let mut v = CVector::zeros(dim);
                v[j] = Complex64::new(s, 0.0);
                v[k] = phase * s;
                states.push(PureState { amplitudes: v });
            }
        }
    }
    states
}

/// A validated Hermitian operator with a lazily computed spectral decomposition.
#[derive(Debug, Clone)]
pub struct HermitianObservable {
    matrix: CMatrix,
    eigen: OnceLock<HermitianEigen>,
}

impl PartialEq for HermitianObservable {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl HermitianObservable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, Tolerance::default())
    }

    pub fn with_tolerance(mut matrix: CMatrix, tol: Tolerance) -> Result<Self> {
        check_square(&matrix)?;
        check_finite(&matrix)?;
        let residual = hermitian_residual(&matrix);
        if residual > tol.atol {
            return Err(Error::NotHermitian { residual });
        }
        hermitize_mut(&mut matrix);
        Ok(Self::from_hermitian(matrix))
    }

    /// Wraps a matrix that is Hermitian by construction (symmetrized here).
    pub(crate) fn from_hermitian(mut matrix: CMatrix) -> Self {
        hermitize_mut(&mut matrix);
        Self {
            matrix,
            eigen: OnceLock::new(),
        }
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::new(linalg::diagonal(values))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_hermitian(linalg::identity(dim))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigen(&self) -> &HermitianEigen {
        self.eigen.get_or_init(|| linalg::eig_symmetrized(&self.matrix))
    }

    pub fn squared(&self) -> HermitianObservable {
        Self::from_hermitian(&self.matrix * &self.matrix)
    }

    pub fn expect(&self, psi: &PureState) -> f64 {
        psi.expect(&self.matrix)
    }

    pub fn variance(&self, psi: &PureState) -> f64 {
        let mean = self.expect(psi);
        (psi.expect(&(&self.matrix * &self.matrix)) - mean * mean).max(0.0)
    }

    pub fn sub(&self, other: &HermitianObservable) -> Result<HermitianObservable> {
        linalg::check_dim(&other.matrix, self.dim())?;
        Ok(Self::from_hermitian(&self.matrix - &other.matrix))
    }
}

/// A finite-outcome positive operator valued measure.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePovm {
    outcomes: Vec<f64>,
    effects: Vec<CMatrix>,
}

impl DiscretePovm {
    pub fn new(outcomes: Vec<f64>, effects: Vec<CMatrix>, tol: Tolerance) -> Result<Self> {
        if let Some(err) = Self::violations(&outcomes, &effects, tol).into_iter().next() {
            return Err(err);
        }
        let effects = effects
            .into_iter()
            .map(|mut e| {
                hermitize_mut(&mut e);
                e
            })
            .collect();
        Ok(Self { outcomes, effects })
    }

    /// Every invariant violation of a candidate POVM. Empty means valid.
    pub fn violations(outcomes: &[f64], effects: &[CMatrix], tol: Tolerance) -> Vec<Error> {
        let mut out = Vec::new();
        if effects.is_empty() {
            out.push(Error::InvalidArgument("POVM has no effects".into()));
            return out;
        }
        if outcomes.len() != effects.len() {
            out.push(Error::LengthMismatch {
                what: "outcomes",
                expected: effects.len(),
                found: outcomes.len(),
            });
        }
        if outcomes.iter().any(|x| !x.is_finite()) {
            out.push(Error::NonFinite);
        }
        if let Some(index) = outcomes.windows(2).position(|w| w[1] <= w[0]) {
            out.push(Error::OutcomesNotIncreasing { index: index + 1 });
        }
        let dim = match check_square(&effects[0]) {
            Ok(d) => d,
            Err(e) => {
                out.push(e);
                return out;
            }
        };
        let mut sum = CMatrix::zeros(dim, dim);
        for (index, e) in effects.iter().enumerate() {
            if let Err(err) = linalg::check_dim(e, dim) {
                out.push(err);
                return out;
            }
            if let Err(err) = check_finite(e) {
                out.push(err);
                return out;
            }
            let residual = hermitian_residual(e);
            if residual > tol.atol {
                out.push(Error::NotHermitian { residual });
            }
            let min_eigenvalue = linalg::min_eigenvalue(e);
            if min_eigenvalue < -tol.scaled(max_abs(e)) {
                out.push(Error::NotPositive {
                    index,
                    min_eigenvalue,
                });
            }
            sum += e;
        }
        let residual = max_abs_diff(&sum, &linalg::identity(dim));
        if residual > tol.atol {
            out.push(Error::NotComplete { residual });
        }
        out
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].nrows()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &CMatrix)> {
        self.outcomes.iter().copied().zip(self.effects.iter())
    }

    /// The effect at outcome `x`, matched within `tol`.
    pub fn effect_at(&self, x: f64, tol: f64) -> Option<&CMatrix> {
        self.iter()
            .find(|(y, _)| (y - x).abs() <= tol)
            .map(|(_, e)| e)
    }

    /// `sum_j x_j^k E(x_j)`.
    pub fn moment(&self, k: u32) -> HermitianObservable {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for (x, e) in self.iter() {
            m += e * Complex64::new(x.powi(k as i32), 0.0);
        }
        HermitianObservable::from_hermitian(m)
    }

    /// Largest idempotency defect `max_x |E(x)^2 - E(x)|`.
    pub fn projection_residual(&self) -> f64 {
        self.effects
            .iter()
            .map(|e| max_abs_diff(&(e * e), e))
            .fold(0.0, f64::max)
    }

    /// Largest `|[E(x), m]|` in spectral norm.
    pub fn commutator_residual(&self, m: &CMatrix) -> f64 {
        self.effects
            .iter()
            .map(|e| linalg::op_norm(&linalg::commutator(e, m)))
            .fold(0.0, f64::max)
    }

    /// Effectwise distance after aligning outcomes within `align`; outcomes
    /// present in only one POVM are compared against the zero operator.
    pub fn effect_distance(&self, other: &DiscretePovm, align: f64) -> Result<f64> {
        linalg::check_dim(&other.effects[0], self.dim())?;
        let zero = CMatrix::zeros(self.dim(), self.dim());
        let mut worst: f64 = 0.0;
        let mut matched = vec![false; other.len()];
        for (x, e) in self.iter() {
            let hit = other
                .outcomes
                .iter()
                .enumerate()
                .find(|&(j, y)| !matched[j] && (y - x).abs() <= align)
                .map(|(j, _)| j);
            let f = match hit {
                Some(j) => {
                    matched[j] = true;
                    &other.effects[j]
                }
                None => &zero,
            };
            worst = worst.max(max_abs_diff(e, f));
        }
        for (j, f) in other.effects.iter().enumerate() {
            if !matched[j] {
                worst = worst.max(max_abs(f));
            }
        }
        Ok(worst)
    }
}

/// `E[k] = sum_j x_j^k E(x_j)`.
pub fn moment_operator(e: &DiscretePovm, k: u32) -> Result<HermitianObservable> {
    if k == 0 {
        return Err(Error::InvalidArgument("moment order must be >= 1".into()));
    }
    Ok(e.moment(k))
}

/// `N(E, A) = E[2] - A^2`. Not necessarily positive.
pub fn noise_operator(e: &DiscretePovm, a: &HermitianObservable) -> Result<HermitianObservable> {
    linalg::check_dim(a.matrix(), e.dim())?;
    let a2 = a.matrix() * a.matrix();
    Ok(HermitianObservable::from_hermitian(
        e.moment(2).matrix() - a2,
    ))
}

/// A projection valued POVM together with the operator it decomposes.
#[derive(Debug, Clone)]
pub struct SpectralMeasure {
    povm: DiscretePovm,
    source: HermitianObservable,
}

impl SpectralMeasure {
    pub fn povm(&self) -> &DiscretePovm {
        &self.povm
    }

    pub fn source(&self) -> &HermitianObservable {
        &self.source
    }

    pub fn projections(&self) -> &[CMatrix] {
        self.povm.effects()
    }

    pub fn outcomes(&self) -> &[f64] {
        self.povm.outcomes()
    }

    pub fn into_povm(self) -> DiscretePovm {
        self.povm
    }
}

/// Spectral measure of `a`. Eigenvalues closer than `atol * max(1, |a|_max)`
/// share one outcome whose effect is the projection onto the merged eigenspace.
pub fn spectral_measure(a: &HermitianObservable, tol: Tolerance) -> Result<SpectralMeasure> {
    let eig = a.eigen();
    let groups = eig.groups(tol.scaled(max_abs(a.matrix())));
    let outcomes: Vec<f64> = groups.iter().map(|g| g.value).collect();
    let effects: Vec<CMatrix> = groups.iter().map(|g| eig.projection(&g.indices)).collect();
    let povm = DiscretePovm::new(outcomes, effects, tol)?;
    Ok(SpectralMeasure {
        povm,
        source: a.clone(),
    })
}

fn pauli() -> [CMatrix; 3] {
    let o = linalg::ZERO;
    let one = linalg::ONE;
    let i = linalg::I;
    [
        CMatrix::from_row_slice(2, 2, &[o, one, one, o]),
        CMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        CMatrix::from_row_slice(2, 2, &[one, o, o, -one]),
    ]
}

/// Spin-1/2 component along a unit axis: `(a . sigma) / 2`.
pub fn spin_observable(axis: [f64; 3]) -> Result<HermitianObservable> {
    spin_observable_with(axis, Tolerance::default())
}

pub fn spin_observable_with(axis: [f64; 3], tol: Tolerance) -> Result<HermitianObservable> {
    if axis.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let norm = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > tol.atol {
        return Err(Error::NotUnitVector { norm });
    }
    let mut m = CMatrix::zeros(2, 2);
    for (s, &a) in pauli().iter().zip(axis.iter()) {
        m += s * Complex64::new(0.5 * a, 0.0);
    }
    Ok(HermitianObservable::from_hermitian(m))
}

/// The +1/2 eigenvector of the spin component along `axis`.
pub fn spin_up_state(axis: [f64; 3]) -> Result<PureState> {
    let s = spin_observable(axis)?;
    let eig = s.eigen();
    PureState::normalized(eig.vectors.column(1).into_owned())
}

/// A discrete probability kernel used to smear a sharp grid observable.
#[derive(Debug, Clone, PartialEq)]
pub struct SmearingKernel {
    offsets: Vec<f64>,
    weights: Vec<f64>,
}

impl SmearingKernel {
    pub fn new(offsets: Vec<f64>, weights: Vec<f64>, tol: Tolerance) -> Result<Self> {
        if offsets.is_empty() {
            return Err(Error::InvalidKernel("no offsets".into()));
        }
        if offsets.len() != weights.len() {
            return Err(Error::LengthMismatch {
                what: "kernel weights",
                expected: offsets.len(),
                found: weights.len(),
            });
        }
        if offsets.iter().chain(weights.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        if offsets.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidKernel(
                "offsets must be strictly increasing".into(),
            ));
        }
        if let Some(w) = weights.iter().find(|&&w| w < 0.0) {
            return Err(Error::InvalidKernel(format!("negative weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > tol.atol {
            return Err(Error::InvalidKernel(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(Self { offsets, weights })
    }

    /// Unit mass at offset zero.
    pub fn delta() -> Self {
        Self {
            offsets: vec![0.0],
            weights: vec![1.0],
        }
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self) -> f64 {
        self.offsets
            .iter()
            .zip(&self.weights)
            .map(|(o, w)| o * w)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.offsets
            .iter()
            .zip(&self.weights)
            .map(|(o, w)| w * (o - m) * (o - m))
            .sum()
    }
}

/// Grid position smeared by a kernel: the effect at outcome `y` is
/// `sum_j f(y - q_j) |j><j|`. Coinciding sums `q_j + offset` (within `atol`)
/// form a single outcome.
pub fn smeared_grid_position(
    grid_values: &[f64],
    kernel: &SmearingKernel,
    tol: Tolerance,
) -> Result<DiscretePovm> {
    let d = grid_values.len();
    if d == 0 {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    if d > MAX_DIM {
        return Err(Error::DimensionLimit { dim: d, limit: MAX_DIM });
    }
    if grid_values.iter().any(|q| !q.is_finite()) {
        return Err(Error::NonFinite);
    }
    // (value, grid index, weight)
    let mut atoms: Vec<(f64, usize, f64)> = Vec::with_capacity(d * kernel.offsets.len());
    for (j, &q) in grid_values.iter().enumerate() {
        for (&o, &w) in kernel.offsets.iter().zip(&kernel.weights) {
            let y = q + o;
            if !y.is_finite() {
                return Err(Error::KernelOverflow(format!(
                    "grid point {q} shifted by {o} is not finite"
                )));
            }
            atoms.push((y, j, w));
        }
    }
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut outcomes: Vec<f64> = Vec::new();
    let mut diagonals: Vec<Vec<f64>> = Vec::new();
    let mut anchor = f64::NEG_INFINITY;
    for (y, j, w) in atoms {
        if y - anchor > tol.atol {
            if outcomes.len() == MAX_DIM {
                return Err(Error::KernelOverflow(format!(
                    "more than {MAX_DIM} distinct outcomes"
                )));
            }
            anchor = y;
            outcomes.push(y);
            diagonals.push(vec![0.0; d]);
        }
        diagonals.last_mut().expect("pushed above")[j] += w;
    }
    let effects = diagonals.iter().map(|diag| linalg::diagonal(diag)).collect();
    DiscretePovm::new(outcomes, effects, tol)
}

/// Canonical phase POVM on Fock levels `0..=n_max`, binned into `n_bins` equal
/// arcs of `[0, 2pi)`. Outcomes are the bin midpoints and every effect is the
/// exact integral of the phase density over its arc.
pub fn truncated_canonical_phase(n_max: usize, n_bins: usize) -> Result<DiscretePovm> {
    if n_bins < 2 {
        return Err(Error::InvalidArgument("n_bins must be at least 2".into()));
    }
    let d = n_max + 1;
    if d > MAX_DIM {
        return Err(Error::DimensionLimit { dim: d, limit: MAX_DIM });
    }
    let width = 2.0 * PI / n_bins as f64;
    let mut outcomes = Vec::with_capacity(n_bins);
    let mut effects = Vec::with_capacity(n_bins);
    for b in 0..n_bins {
        let alpha = b as f64 * width;
        let beta = (b + 1) as f64 * width;
        outcomes.push(alpha + 0.5 * width);
        let e = CMatrix::from_fn(d, d, |n, m| {
            if n == m {
                Complex64::new(width / (2.0 * PI), 0.0)
            } else {
                let k = n as f64 - m as f64;
                let num = Complex64::from_polar(1.0, k * beta) - Complex64::from_polar(1.0, k * alpha);
                num / (linalg::I * (2.0 * PI * k))
            }
        });
        effects.push(e);
    }
    DiscretePovm::new(outcomes, effects, Tolerance::default())
}

/// First moment of the angle marginal of the phase space observable generated
/// by the oscillator ground state, truncated to Fock levels `0..=n_max`.
///
/// Off-diagonal entries are `i Gamma((n+m)/2 + 1) / (sqrt(n! m!) (m - n))`;
/// the diagonal is `pi`.
pub fn phase_space_theta_moment(n_max: usize) -> Result<HermitianObservable> {
    if n_max > THETA_MOMENT_MAX_N {
        return Err(Error::Overflow {
            n_max,
            limit: THETA_MOMENT_MAX_N,
        });
    }
    let d = n_max + 1;
    let ln_fact = |n: usize| ln_gamma(n as f64 + 1.0);
    let m = CMatrix::from_fn(d, d, |n, m| {
        if n == m {
            Complex64::new(PI, 0.0)
        } else {
            let log_mag = ln_gamma((n + m) as f64 / 2.0 + 1.0) - 0.5 * (ln_fact(n) + ln_fact(m));
            linalg::I * (log_mag.exp() / (m as f64 - n as f64))
        }
    });
    Ok(HermitianObservable::from_hermitian(m))
}

/// Number operator `diag(0, 1, ..., dim-1)`.
pub fn number_observable(dim: usize) -> HermitianObservable {
    let values: Vec<f64> = (0..dim).map(|n| n as f64).collect();
    HermitianObservable::from_hermitian(linalg::diagonal(&values))
}

/// Lowest value of `<psi|(E[2] - A^2) psi>` over unit vectors, with a
/// minimizing state. This is the smallest eigenvalue of the noise operator.
pub fn minimize_noise_square(
    e: &DiscretePovm,
    a: &HermitianObservable,
) -> Result<(f64, PureState)> {
    let n = noise_operator(e, a)?;
    let eig = n.eigen();
    let state = PureState::normalized(eig.vectors.column(0).into_owned())?;
    Ok((eig.values[0], state))
}

/// Orthonormality check used by tests and the CLI.
pub fn is_projection(p: &CMatrix, tol: f64) -> bool {
    max_abs_diff(&(p * p), p) <= tol && hermitian_residual(p) <= tol
}
