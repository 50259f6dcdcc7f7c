use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};
use crate::jacobi::HessianPair;
use crate::linalg::{self, Matrix};
use crate::manifold::{ManifoldModel, Point, SymBilinear};
use crate::report::sample_rng;
use crate::scalar::Real;

/// Eigenvalue margin below which a matrix inequality counts as violated.
const STAR_TOLERANCE: f64 = 1e-10;
const LQ_TOLERANCE: f64 = 1e-9;

/// `−(1/ε + ‖A_α‖) I ≤ diag(P, −Q) ≤ A_α + ε A_α²`, with `P` at `x` and
/// `Q` at `y` written in the canonical frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarCondition<T> {
    pub a_alpha: HessianPair<T>,
    pub epsilon: T,
    pub p: SymBilinear<T>,
    pub q: SymBilinear<T>,
}

impl<T: Real> StarCondition<T> {
    /// Uses the canonical `ε = 1/(2(1 + ‖A_α‖))`.
    pub fn canonical(a_alpha: HessianPair<T>, p: SymBilinear<T>, q: SymBilinear<T>) -> Self {
        let epsilon = canonical_epsilon(&a_alpha);
        Self { a_alpha, epsilon, p, q }
    }
}

pub fn canonical_epsilon<T: Real>(a: &HessianPair<T>) -> T {
    T::one() / (T::lit(2.0) * (T::one() + a.norm()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarVerdict {
    pub holds: bool,
    /// `λ_min(diag(P,−Q) + (1/ε + ‖A‖) I)`.
    pub lower_margin: f64,
    /// `λ_min(A + εA² − diag(P,−Q))`.
    pub upper_margin: f64,
}

fn a_plus_eps_sq<T: Real>(a: &Matrix<T>, eps: T) -> Matrix<T> {
    a.add(&a.matmul(a).scale(eps)).symmetrized()
}

pub fn verify_condition_star<T: Real>(sc: &StarCondition<T>) -> Result<StarVerdict> {
    let n = sc.a_alpha.dim();
    if sc.p.matrix.rows() != n || sc.q.matrix.rows() != n {
        return Err(arg("P and Q must match the half-dimension of A_α"));
    }
    if !(sc.epsilon > T::zero()) {
        return Err(arg("epsilon must be positive"));
    }
    let a = &sc.a_alpha.form;
    let middle = Matrix::block_diag(&sc.p.matrix, &sc.q.matrix.scale(-T::one()));
    let lower = middle.shift(T::one() / sc.epsilon + sc.a_alpha.norm());
    let upper = a_plus_eps_sq(a, sc.epsilon).sub(&middle);
    let lower_margin = linalg::min_eigenvalue(&lower.symmetrized()).to_f64_lossy();
    let upper_margin = linalg::min_eigenvalue(&upper.symmetrized()).to_f64_lossy();
    Ok(StarVerdict {
        holds: lower_margin >= -STAR_TOLERANCE && upper_margin >= -STAR_TOLERANCE,
        lower_margin,
        upper_margin,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarCandidates<T> {
    pub epsilon: T,
    pub pairs: Vec<(SymBilinear<T>, SymBilinear<T>)>,
    pub requested: usize,
    pub skipped: usize,
}

/// Samples pairs `(P, Q)` satisfying condition (*) for `A_α` and `ε`.
///
/// With `B = A_α + εA_α²` the candidates are `P = B₁₁ − sI` and
/// `Q = −(B₂₂ − sI)`, where `s = 2‖B₁₂‖ + slack` for a uniform slack in
/// `[0, 1)`. Then `B − diag(P, −Q) = [[sI, B₁₂], [B₂₁, sI]]` is positive
/// semidefinite as soon as `s ≥ ‖B₁₂‖`. The shift is clipped so the lower
/// bound still holds; a sample is skipped if clipping pushes `s` below
/// `‖B₁₂‖`.
pub fn generate_star_candidates<T: Real>(
    a_alpha: &HessianPair<T>,
    epsilon: T,
    n: usize,
    seed: u64,
) -> Result<StarCandidates<T>> {
    if !(epsilon > T::zero()) {
        return Err(arg("epsilon must be positive"));
    }
    let d = a_alpha.dim();
    let b = a_plus_eps_sq(&a_alpha.form, epsilon);
    let b11 = b.block(0, 0, d, d);
    let b22 = b.block(d, d, d, d);
    let b12 = linalg::operator_norm(&b.block(0, d, d, d));
    let a_norm = a_alpha.norm();
    let lam1 = linalg::min_eigenvalue(&b11);
    let lam2 = linalg::min_eigenvalue(&b22);
    let mut pairs = Vec::with_capacity(n);
    let mut skipped = 0;
    for k in 0..n {
        let mut rng = sample_rng(seed, k as u64);
        let slack = T::lit(rng.gen_range(0.0..1.0));
        let s_max = T::one() / epsilon + a_norm + lam1.min(lam2);
        let s = (T::lit(2.0) * b12 + slack).min(s_max);
        if s < b12 {
            skipped += 1;
            continue;
        }
        let p = b11.shift(-s);
        let q = b22.shift(-s).scale(-T::one());
        pairs.push((SymBilinear::new(a_alpha.x.clone(), p)?, SymBilinear::new(a_alpha.y.clone(), q)?));
    }
    Ok(StarCandidates { epsilon, pairs, requested: n, skipped })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LqCheck {
    pub holds: bool,
    /// `λ_min(L_yx(Q) + slack·I − P)`.
    pub margin: f64,
}

/// Checks `P ≤ L_yx(Q) + slack·I`, where `L_yx(Q)(v, v) = Q(Lv, Lv)` pulls
/// `Q` back along the geodesic from `x` to `y`.
pub fn check_p_leq_lq<T: Real>(
    m: &ManifoldModel<T>,
    x: &Point<T>,
    y: &Point<T>,
    p: &SymBilinear<T>,
    q: &SymBilinear<T>,
    slack: T,
) -> Result<LqCheck> {
    if p.matrix.rows() != m.dim() || q.matrix.rows() != m.dim() {
        return Err(arg("P and Q must be forms on the model's tangent spaces"));
    }
    let t = m.transport_matrix(x, y)?;
    let pulled = t.transpose().matmul(&q.matrix).matmul(&t);
    let diff = pulled.shift(slack).sub(&p.matrix).symmetrized();
    let margin = linalg::min_eigenvalue(&diff).to_f64_lossy();
    Ok(LqCheck { holds: margin >= -LQ_TOLERANCE, margin })
}

/// One row of a [`StarSweepReport`]; the field names are the CSV columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarSample {
    pub index: usize,
    pub alpha: f64,
    pub ell: f64,
    /// `min(lower_margin, upper_margin)` of the (*) check.
    pub star_margin: f64,
    /// Margin of `P ≤ L_yx(Q) + (3/2)K₀αd² I`.
    pub lq_margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarSweepReport {
    pub model: String,
    /// `K₀ = max(0, −inf K)`; the slack is `(3/2)K₀αd²`.
    pub k0: f64,
    pub requested: usize,
    /// Samples where the generator could not produce a candidate.
    pub skipped: usize,
    pub failures: usize,
    pub min_lq_margin: f64,
    pub records: Vec<StarSample>,
}

impl StarSweepReport {
    pub fn pass(&self) -> bool {
        self.failures == 0 && self.records.len() + self.skipped == self.requested
    }
}

/// Draws `samples` configurations `(x, y, α)` with `d(x, y)` in
/// `[0.05, min(0.9·i(M), 3)]` and `α ∈ [1, 16)`, generates one (*)
/// candidate for `A_α = (α/2) d²(d²)` with the canonical `ε`, and checks
/// both (*) and its consequence `P ≤ L_yx(Q) + (3/2)K₀αd² I`. With
/// nonnegative curvature `K₀ = 0` and the slack vanishes.
pub fn star_consequence_sweep<T: Real>(m: &ManifoldModel<T>, samples: usize, seed: u64) -> Result<StarSweepReport> {
    use rayon::prelude::*;
    let (klo, _) = m.curvature_bounds();
    let k0 = (-klo).max(T::zero());
    let hi = (0.9 * m.global_injectivity_radius().to_f64_lossy()).min(3.0);
    let rows: Vec<Option<StarSample>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let x = m.random_point(&mut rng);
            let ell = rng.gen_range(0.05..hi);
            let alpha = rng.gen_range(1.0..16.0);
            let y = m.random_point_at_distance(&x, T::lit(ell), &mut rng);
            let a = crate::jacobi::hessian_distance_sq(m, &x, &y)?.scaled(T::lit(0.5 * alpha));
            let eps = canonical_epsilon(&a);
            let c = generate_star_candidates(&a, eps, 1, rng.gen())?;
            let Some((p, q)) = c.pairs.into_iter().next() else {
                return Ok(None);
            };
            let d = m.distance(&x, &y)?;
            let slack = T::lit(1.5 * alpha) * k0 * d * d;
            let star = verify_condition_star(&StarCondition { a_alpha: a, epsilon: eps, p: p.clone(), q: q.clone() })?;
            let lq = check_p_leq_lq(m, &x, &y, &p, &q, slack)?;
            Ok(Some(StarSample {
                index: i,
                alpha,
                ell: d.to_f64_lossy(),
                star_margin: star.lower_margin.min(star.upper_margin),
                lq_margin: lq.margin,
                pass: star.holds && lq.holds,
            }))
        })
        .collect::<Result<_>>()?;
    let skipped = rows.iter().filter(|r| r.is_none()).count();
    let records: Vec<StarSample> = rows.into_iter().flatten().collect();
    Ok(StarSweepReport {
        model: m.name(),
        k0: k0.to_f64_lossy(),
        requested: samples,
        skipped,
        failures: records.iter().filter(|r| !r.pass).count(),
        min_lq_margin: records.iter().map(|r| r.lq_margin).fold(f64::INFINITY, f64::min),
        records,
    })
}
