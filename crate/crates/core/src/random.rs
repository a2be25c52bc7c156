//! Seeded random instances for property tests and batch evaluation.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linalg::{self, CMatrix, CVector, Tolerance};
use crate::observables::{DiscretePovm, HermitianObservable, PureState};
use crate::schemes::{MeasurementScheme, QuantumChannel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-distributed unit vector.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> PureState {
    let v = CVector::from_fn(dim, |_, _| gaussian(rng));
    PureState::normalized(v).expect("gaussian vector is nonzero")
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianObservable {
    let g = ginibre(rng, dim, dim);
    HermitianObservable::from_hermitian((&g + g.adjoint()) * Complex64::new(0.5, 0.0))
}

/// Haar unitary from the QR decomposition of a Ginibre matrix, with the
/// phases of `R`'s diagonal absorbed into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let qr = ginibre(rng, dim, dim).qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { linalg::ONE };
        for i in 0..dim {
            q[(i, k)] *= phase;
        }
    }
    q
}

pub fn random_unit_axis<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Random POVM: positive matrices `G_k = X_k X_k^H` normalized as
/// `S^{-1/2} G_k S^{-1/2}` with `S = sum G_k`. Outcomes are sorted normal draws.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, dim: usize, n_outcomes: usize) -> Result<DiscretePovm> {
    let tol = Tolerance::default();
    let mut outcomes: Vec<f64> = (0..n_outcomes).map(|_| rng.sample::<f64, _>(StandardNormal) * 2.0).collect();
    outcomes.sort_by(f64::total_cmp);
    outcomes.dedup();
    let grams: Vec<CMatrix> = (0..outcomes.len())
        .map(|_| {
            let x = ginibre(rng, dim, dim);
            &x * x.adjoint()
        })
        .collect();
    let sum: CMatrix = grams.iter().sum();
    let s = linalg::inverse_sqrt_psd(&linalg::hermitize(&sum), tol)?;
    let effects = grams.iter().map(|g| linalg::hermitize(&(&s * g * &s))).collect();
    DiscretePovm::new(outcomes, effects, tol)
}

/// Channel with `n_kraus` Kraus operators cut from the first `dim` columns of a
/// Haar unitary on `dim * n_kraus`.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, dim: usize, n_kraus: usize) -> Result<QuantumChannel> {
    let u = random_unitary(rng, dim * n_kraus);
    let kraus = (0..n_kraus)
        .map(|i| CMatrix::from_fn(dim, dim, |r, c| u[(i * dim + r, c)]))
        .collect();
    QuantumChannel::new(kraus, Tolerance::default())
}

/// Channel whose Kraus operators all commute with `b`: on each eigenspace of
/// `b` (dimension `g`) the blocks are cut from a random isometry
/// `C^g -> C^{g * n_kraus}`.
pub fn random_commuting_channel<R: Rng + ?Sized>(
    rng: &mut R,
    b: &HermitianObservable,
    n_kraus: usize,
) -> Result<QuantumChannel> {
    let tol = Tolerance::default();
    let d = b.dim();
    let eig = b.eigen();
    let mut kraus = vec![CMatrix::zeros(d, d); n_kraus];
    for group in eig.groups(tol.scaled(linalg::max_abs(b.matrix()))) {
        let g = group.indices.len();
        let v = CMatrix::from_fn(d, g, |i, j| eig.vectors[(i, group.indices[j])]);
        let w = random_unitary(rng, g * n_kraus);
        for (i, k) in kraus.iter_mut().enumerate() {
            let block = CMatrix::from_fn(g, g, |r, c| w[(i * g + r, c)]);
            *k += &v * block * v.adjoint();
        }
    }
    QuantumChannel::new(kraus, tol)
}

/// Scheme with Haar coupling, random probe state and a random pointer.
pub fn random_scheme<R: Rng + ?Sized>(rng: &mut R, system_dim: usize, probe_dim: usize) -> Result<MeasurementScheme> {
    let u = random_unitary(rng, system_dim * probe_dim);
    let xi = random_state(rng, probe_dim);
    let pointer = random_hermitian(rng, probe_dim);
    MeasurementScheme::new(system_dim, probe_dim, xi, u, pointer, Tolerance::default())
}
