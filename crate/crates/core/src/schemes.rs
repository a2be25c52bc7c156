//! Measurement schemes `<K, xi, M, U>`, the observable they induce, and the
//! total channel they apply to the measured system.

use crate::error::{Error, Result};
use crate::linalg::{
    self, check_composite, check_dim, check_finite, kron, max_abs_diff, op_norm, CMatrix, CVector,
    Tolerance,
};
use crate::observables::{spectral_measure, DiscretePovm, HermitianObservable, PureState, SpectralMeasure};

/// A measurement process: probe space of dimension `probe_dim`, initial probe
/// state, coupling unitary on `system (x) probe` (system-major) and pointer.
#[derive(Debug, Clone)]
pub struct MeasurementScheme {
    system_dim: usize,
    probe_dim: usize,
    probe_state: PureState,
    coupling: CMatrix,
    pointer: HermitianObservable,
    tol: Tolerance,
}

impl MeasurementScheme {
    pub fn new(
        system_dim: usize,
        probe_dim: usize,
        probe_state: PureState,
        coupling: CMatrix,
        pointer: HermitianObservable,
        tol: Tolerance,
    ) -> Result<Self> {
        if let Some(err) = Self::violations(system_dim, probe_dim, &probe_state, &coupling, &pointer, tol)
            .into_iter()
            .next()
        {
            return Err(err);
        }
        Ok(Self {
            system_dim,
            probe_dim,
            probe_state,
            coupling,
            pointer,
            tol,
        })
    }

    /// Every invariant violation of a candidate scheme. Empty means valid.
    pub fn violations(
        system_dim: usize,
        probe_dim: usize,
        probe_state: &PureState,
        coupling: &CMatrix,
        pointer: &HermitianObservable,
        tol: Tolerance,
    ) -> Vec<Error> {
        let mut out = Vec::new();
        let dim = match check_composite(system_dim, probe_dim) {
            Ok(d) => d,
            Err(e) => return vec![e],
        };
        if probe_state.dim() != probe_dim {
            out.push(Error::DimensionMismatch {
                expected: probe_dim,
                found: probe_state.dim(),
            });
        }
        if pointer.dim() != probe_dim {
            out.push(Error::DimensionMismatch {
                expected: probe_dim,
                found: pointer.dim(),
            });
        }
        if let Err(e) = check_dim(coupling, dim).and_then(|_| check_finite(coupling)) {
            out.push(e);
            return out;
        }
        let residual = max_abs_diff(&(coupling.adjoint() * coupling), &linalg::identity(dim));
        if residual > tol.atol {
            out.push(Error::NotUnitary { residual });
        }
        out
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn probe_dim(&self) -> usize {
        self.probe_dim
    }

    pub fn composite_dim(&self) -> usize {
        self.system_dim * self.probe_dim
    }

    pub fn probe_state(&self) -> &PureState {
        &self.probe_state
    }

    pub fn coupling(&self) -> &CMatrix {
        &self.coupling
    }

    pub fn pointer(&self) -> &HermitianObservable {
        &self.pointer
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }

    /// `I (x) |xi>` as a `(d*p) x d` matrix.
    pub fn probe_embedding(&self) -> CMatrix {
        let xi = CMatrix::from_column_slice(self.probe_dim, 1, self.probe_state.amplitudes().as_slice());
        linalg::identity(self.system_dim).kronecker(&xi)
    }

    /// The isometry `psi -> U (psi (x) xi)`.
    pub fn isometry(&self) -> CMatrix {
        &self.coupling * self.probe_embedding()
    }

    /// `psi (x) xi`.
    pub fn initial_composite(&self, psi: &PureState) -> Result<CVector> {
        if psi.dim() != self.system_dim {
            return Err(Error::DimensionMismatch {
                expected: self.system_dim,
                found: psi.dim(),
            });
        }
        Ok(psi.tensor(&self.probe_state).amplitudes().clone())
    }

    /// `I (x) P[xi]` on the composite space.
    pub fn probe_projector(&self) -> CMatrix {
        linalg::identity(self.system_dim).kronecker(&self.probe_state.projector())
    }
}

/// A channel given by Kraus operators, `rho -> sum D rho D^H`.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    kraus: Vec<CMatrix>,
    dim: usize,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<CMatrix>, tol: Tolerance) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidArgument("channel has no Kraus operators".into()))?;
        let dim = linalg::check_square(first)?;
        let mut sum = CMatrix::zeros(dim, dim);
        for d in &kraus {
            check_dim(d, dim)?;
            check_finite(d)?;
            sum += d.adjoint() * d;
        }
        let residual = max_abs_diff(&sum, &linalg::identity(dim));
        if residual > tol.atol {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(Self { kraus, dim })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus: vec![linalg::identity(dim)],
            dim,
        }
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Schroedinger picture: `sum D rho D^H`.
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        check_dim(rho, self.dim)?;
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for d in &self.kraus {
            out += d * rho * d.adjoint();
        }
        Ok(out)
    }

    /// Heisenberg picture on an arbitrary square matrix: `sum D^H b D`.
    pub fn dual_apply_matrix(&self, b: &CMatrix) -> Result<CMatrix> {
        check_dim(b, self.dim)?;
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for d in &self.kraus {
            out += d.adjoint() * b * d;
        }
        Ok(out)
    }
}

/// The observable actually measured by the scheme: for every pointer outcome
/// `x` with spectral projection `P_x`, the effect `V^H (I (x) P_x) V` with
/// `V psi = U (psi (x) xi)`. Outcomes whose effect has norm below `atol` are
/// dropped.
pub fn induced_observable(s: &MeasurementScheme) -> Result<DiscretePovm> {
    let tol = s.tolerance();
    let pointer = spectral_measure(s.pointer(), tol)?;
    let v = s.isometry();
    let vh = v.adjoint();
    let id = linalg::identity(s.system_dim());
    let mut outcomes = Vec::new();
    let mut effects = Vec::new();
    for (x, p) in pointer.povm().iter() {
        let lifted = kron(&id, p)?;
        let e = &vh * lifted * &v;
        if op_norm(&e) < tol.atol {
            continue;
        }
        outcomes.push(x);
        effects.push(e);
    }
    DiscretePovm::new(outcomes, effects, tol)
}

/// Kraus operators `D_i = (I (x) <b_i|) U (I (x) |xi>)` over the computational
/// probe basis. Kraus operators identically zero are omitted.
pub fn total_channel(s: &MeasurementScheme) -> Result<QuantumChannel> {
    let v = s.isometry();
    let (d, p) = (s.system_dim(), s.probe_dim());
    let mut kraus = Vec::with_capacity(p);
    for i in 0..p {
        let k = CMatrix::from_fn(d, d, |row, col| v[(row * p + i, col)]);
        if linalg::max_abs(&k) > 0.0 {
            kraus.push(k);
        }
    }
    QuantumChannel::new(kraus, s.tolerance())
}

/// `I(R)*(B) = sum D^H B D`.
pub fn dual_apply(c: &QuantumChannel, b: &HermitianObservable) -> Result<HermitianObservable> {
    Ok(HermitianObservable::from_hermitian(c.dual_apply_matrix(b.matrix())?))
}

/// Post-measurement state `sum D |psi><psi| D^H`.
pub fn post_state(s: &MeasurementScheme, psi: &PureState) -> Result<CMatrix> {
    let c = total_channel(s)?;
    c.apply(&psi.projector())
}

/// Post-measurement state obtained by tracing the probe out of
/// `U (psi (x) xi)(psi (x) xi)^H U^H`.
pub fn post_state_partial_trace(s: &MeasurementScheme, psi: &PureState) -> Result<CMatrix> {
    let out = s.coupling() * s.initial_composite(psi)?;
    linalg::partial_trace_probe(&linalg::outer(&out, &out), s.system_dim(), s.probe_dim())
}

/// The image of a spectral measure under the dual channel.
pub fn distorted_observable(c: &QuantumChannel, b_spec: &SpectralMeasure, tol: Tolerance) -> Result<DiscretePovm> {
    let effects = b_spec
        .projections()
        .iter()
        .map(|p| c.dual_apply_matrix(p))
        .collect::<Result<Vec<_>>>()?;
    DiscretePovm::new(b_spec.outcomes().to_vec(), effects, tol)
}

/// Residuals and verdicts for the invariance conditions of an observable `B`
/// under a channel.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InvarianceReport {
    /// `|I*(B) - B|`.
    pub first_moment_residual: f64,
    /// `|I*(B^2) - B^2|`.
    pub second_moment_residual: f64,
    /// `max_X |I*(E^B(X)) - E^B(X)|`.
    pub spectral_residual: f64,
    /// `max_i |B D_i - D_i B|`.
    pub kraus_commutator_residual: f64,
    /// `I*(B) = B` and `I*(B^2) = B^2`.
    pub fixes_moments: bool,
    /// `I*(E^B(X)) = E^B(X)` for every outcome.
    pub fixes_spectral_measure: bool,
    /// Every Kraus operator commutes with `B`.
    pub kraus_commute: bool,
    pub threshold: f64,
}

impl InvarianceReport {
    pub fn consistent(&self) -> bool {
        self.fixes_moments == self.fixes_spectral_measure && self.fixes_moments == self.kraus_commute
    }
}

/// Evaluates the invariance conditions at `threshold` (spectral norm residuals).
///
/// Whether the Kraus operators commute with `B` does not depend on the Kraus
/// representation once `I*(B) = B` and `I*(B^2) = B^2`, since
/// `sum [B, D_i]^H [B, D_i] = I*(B^2) - B I*(B) - I*(B) B + B^2`.
pub fn invariance_conditions(
    c: &QuantumChannel,
    b: &HermitianObservable,
    threshold: f64,
    tol: Tolerance,
) -> Result<InvarianceReport> {
    check_dim(b.matrix(), c.dim())?;
    let bm = b.matrix();
    let b2 = bm * bm;
    let first_moment_residual = op_norm(&(c.dual_apply_matrix(bm)? - bm));
    let second_moment_residual = op_norm(&(c.dual_apply_matrix(&b2)? - &b2));
    let spec = spectral_measure(b, tol)?;
    let mut spectral_residual: f64 = 0.0;
    for p in spec.projections() {
        spectral_residual = spectral_residual.max(op_norm(&(c.dual_apply_matrix(p)? - p)));
    }
    let kraus_commutator_residual = c
        .kraus()
        .iter()
        .map(|d| op_norm(&linalg::commutator(bm, d)))
        .fold(0.0, f64::max);
    Ok(InvarianceReport {
        first_moment_residual,
        second_moment_residual,
        spectral_residual,
        kraus_commutator_residual,
        fixes_moments: first_moment_residual.max(second_moment_residual) <= threshold,
        fixes_spectral_measure: spectral_residual <= threshold,
        kraus_commute: kraus_commutator_residual <= threshold,
        threshold,
    })
}

/// Which tensor factor an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    System,
    Pointer,
}

/// Input picture lift: `op (x) I` or `I (x) op`.
pub fn heisenberg_in(s: &MeasurementScheme, which: Factor, op: &HermitianObservable) -> Result<CMatrix> {
    match which {
        Factor::System => {
            check_dim(op.matrix(), s.system_dim())?;
            kron(op.matrix(), &linalg::identity(s.probe_dim()))
        }
        Factor::Pointer => {
            check_dim(op.matrix(), s.probe_dim())?;
            kron(&linalg::identity(s.system_dim()), op.matrix())
        }
    }
}

/// Output picture: `U^H (op (x) I) U` or `U^H (I (x) op) U`.
pub fn heisenberg_out(s: &MeasurementScheme, which: Factor, op: &HermitianObservable) -> Result<CMatrix> {
    let lifted = heisenberg_in(s, which, op)?;
    let mut out = s.coupling().adjoint() * lifted * s.coupling();
    linalg::hermitize_mut(&mut out);
    Ok(out)
}

/// Both sides of the spectral-measure characterization of a scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheck {
    /// Every induced effect is idempotent.
    pub is_projection_valued: bool,
    /// `I (x) P[xi]` commutes with every `U^H (I (x) P_x) U`.
    pub commutes: bool,
    pub projection_residual: f64,
    pub commutator_residual: f64,
}

impl LemmaCheck {
    pub fn agrees(&self) -> bool {
        self.is_projection_valued == self.commutes
    }
}

pub fn projection_valued_lemma_check(s: &MeasurementScheme, threshold: f64) -> Result<LemmaCheck> {
    let tol = s.tolerance();
    let induced = induced_observable(s)?;
    let projection_residual = induced.projection_residual();

    let pointer = spectral_measure(s.pointer(), tol)?;
    let xi_proj = s.probe_projector();
    let id = linalg::identity(s.system_dim());
    let u = s.coupling();
    let mut commutator_residual: f64 = 0.0;
    for p in pointer.projections() {
        let out = u.adjoint() * kron(&id, p)? * u;
        commutator_residual = commutator_residual.max(op_norm(&linalg::commutator(&xi_proj, &out)));
    }
    Ok(LemmaCheck {
        is_projection_valued: projection_residual <= threshold,
        commutes: commutator_residual <= threshold,
        projection_residual,
        commutator_residual,
    })
}

/// `<psi (x) xi| U^H (I (x) P_x) U |psi (x) xi>` for every pointer outcome.
pub fn pointer_probabilities(s: &MeasurementScheme, psi: &PureState) -> Result<Vec<(f64, f64)>> {
    let pointer = spectral_measure(s.pointer(), s.tolerance())?;
    let out = s.coupling() * s.initial_composite(psi)?;
    let id = linalg::identity(s.system_dim());
    pointer
        .povm()
        .iter()
        .map(|(x, p)| {
            let lifted = kron(&id, p)?;
            Ok((x, linalg::real_expectation(&lifted, &out)))
        })
        .collect()
}

/// Scheme with a trivial coupling: the probe never learns anything.
pub fn decoupled_scheme(system_dim: usize, probe_state: PureState, pointer: HermitianObservable) -> Result<MeasurementScheme> {
    let p = probe_state.dim();
    let dim = check_composite(system_dim, p)?;
    MeasurementScheme::new(system_dim, p, probe_state, linalg::identity(dim), pointer, Tolerance::default())
}
