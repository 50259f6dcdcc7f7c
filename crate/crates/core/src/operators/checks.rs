use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{detplus_of, OperatorSpec};
use crate::error::{arg, Error, Result};
use crate::linalg::{self, Matrix};
use crate::manifold::{ManifoldModel, Point};
use crate::report::{sample_rng, CheckReport};
use crate::scalar::Real;

/// Product of the nonnegative eigenvalues; `1` when there are none.
pub fn detplus<T: Real>(a: &Matrix<T>) -> T {
    detplus_of(&linalg::sym_eigenvalues(a))
}

/// Values of `r` used by the sampled checks.
const R_RANGE: (f64, f64) = (0.0, 2.0);
const ELLIPTICITY_TOLERANCE: f64 = 1e-10;

fn gauss<T: Real>(rng: &mut ChaCha8Rng) -> T {
    T::lit(rng.sample::<f64, _>(rand_distr::StandardNormal))
}

fn random_vec<T: Real>(n: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    (0..n).map(|_| gauss(rng)).collect()
}

fn random_sym<T: Real>(n: usize, rng: &mut ChaCha8Rng) -> Matrix<T> {
    let scale = T::lit(rng.gen_range(0.1..3.0));
    let g = Matrix::from_fn(n, n, |_, _| gauss::<T>(rng));
    g.add(&g.transpose()).scale(scale / T::lit(2.0))
}

/// A positive semidefinite matrix of random rank and size.
fn random_psd<T: Real>(n: usize, rng: &mut ChaCha8Rng) -> Matrix<T> {
    let rank = rng.gen_range(1..=n);
    let g = Matrix::from_fn(n, rank, |_, _| gauss::<T>(rng));
    let scale = T::lit(10f64.powf(rng.gen_range(-3.0..0.5)));
    g.matmul(&g.transpose()).symmetrized().scale(scale)
}

fn random_r<T: Real>(rng: &mut ChaCha8Rng) -> T {
    T::lit(rng.gen_range(R_RANGE.0..R_RANGE.1))
}

/// A pair of points at distance at most `dmax` (and below the injectivity
/// radius), returned with the frame transport matrix from `x` to `y`.
fn pair_within<T: Real>(m: &ManifoldModel<T>, dmax: f64, rng: &mut ChaCha8Rng) -> Result<(Point<T>, Point<T>, Matrix<T>)> {
    let cap = 0.9 * m.global_injectivity_radius().to_f64_lossy();
    let d = dmax.min(cap) * (1.0 - rng.gen_range(0.0..1.0));
    let x = m.random_point(rng);
    let y = m.random_point_at_distance(&x, T::lit(d), rng);
    let t = m.transport_matrix(&x, &y)?;
    Ok((x, y, t))
}

/// `T A Tᵀ`: the form `A` at `x` written in the frame at `y`.
fn push<T: Real>(t: &Matrix<T>, a: &Matrix<T>) -> Matrix<T> {
    t.matmul(a).matmul(&t.transpose()).symmetrized()
}

/// `Tᵀ Q T`: the form `Q` at `y` pulled back to the frame at `x`.
fn pull<T: Real>(t: &Matrix<T>, q: &Matrix<T>) -> Matrix<T> {
    t.transpose().matmul(q).matmul(t).symmetrized()
}

fn to_f64(m: &Matrix<impl Real>) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).iter().map(|v| v.to_f64_lossy()).collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticityWitness {
    pub x: Vec<f64>,
    pub r: f64,
    pub zeta: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    /// `F(B) − F(A)`.
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticityReport {
    pub operator: String,
    pub summary: CheckReport,
    pub witness: Option<EllipticityWitness>,
}

/// Samples `A ≤ B = A + (random PSD)` and reports the largest
/// `F(x,r,ζ,B) − F(x,r,ζ,A)`; PASS iff it is at most `1e−10`.
pub fn ellipticity_check<T: Real>(
    op: &OperatorSpec<T>,
    m: &ManifoldModel<T>,
    n_samples: usize,
    seed: u64,
) -> Result<EllipticityReport> {
    let n = m.dim();
    let results: Vec<(f64, EllipticityWitness)> = (0..n_samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = sample_rng(seed, k as u64);
            let x = m.random_point(&mut rng);
            let r = random_r::<T>(&mut rng);
            let zeta = random_vec::<T>(n, &mut rng);
            let a = random_sym::<T>(n, &mut rng);
            let b = a.add(&random_psd(n, &mut rng));
            let fa = op.eval_frame(&x.coords, r, &zeta, &a)?;
            let fb = op.eval_frame(&x.coords, r, &zeta, &b)?;
            let v = (fb - fa).to_f64_lossy();
            let w = EllipticityWitness {
                x: x.coords.iter().map(|c| c.to_f64_lossy()).collect(),
                r: r.to_f64_lossy(),
                zeta: zeta.iter().map(|c| c.to_f64_lossy()).collect(),
                a: to_f64(&a),
                b: to_f64(&b),
                violation: v,
            };
            Ok((v, w))
        })
        .collect::<Result<_>>()?;
    let worst = results.into_iter().fold(None, |acc: Option<(f64, EllipticityWitness)>, (v, w)| match acc {
        Some((bv, _)) if bv >= v || v.is_nan() && !bv.is_nan() => acc,
        _ => Some((v, w)),
    });
    let max_violation = worst.as_ref().map_or(0.0, |w| w.0.max(0.0));
    let summary = CheckReport::from_violation(m.name(), n_samples, max_violation, ELLIPTICITY_TOLERANCE);
    let witness = worst.filter(|(v, _)| *v > ELLIPTICITY_TOLERANCE).map(|(_, w)| w);
    Ok(EllipticityReport { operator: op.name.clone(), summary, witness })
}

/// `γ̂ = min (F(x,r,ζ,A) − F(x,s,ζ,A)) / (r − s)` over samples with
/// `s < r` in `r_range`.
pub fn monotonicity_estimate<T: Real>(
    op: &OperatorSpec<T>,
    m: &ManifoldModel<T>,
    r_range: (f64, f64),
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    let (lo, hi) = r_range;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(arg("r_range must be a bounded nonempty interval"));
    }
    let n = m.dim();
    let quotients: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = sample_rng(seed, k as u64);
            let x = m.random_point(&mut rng);
            let zeta = random_vec::<T>(n, &mut rng);
            let a = random_sym::<T>(n, &mut rng);
            let (mut r, mut s) = (rng.gen_range(lo..hi), rng.gen_range(lo..hi));
            if r < s {
                std::mem::swap(&mut r, &mut s);
            }
            if r - s < 1e-6 * (hi - lo) {
                s = lo;
                r = hi;
            }
            let fr = op.eval_frame(&x.coords, T::lit(r), &zeta, &a)?;
            let fs = op.eval_frame(&x.coords, T::lit(s), &zeta, &a)?;
            Ok((fr - fs).to_f64_lossy() / (r - s))
        })
        .collect::<Result<_>>()?;
    Ok(quotients.into_iter().fold(f64::INFINITY, f64::min))
}

/// `max |F(y, r, L_xy ζ, L_xy A) − F(x, r, ζ, A)|` over sampled pairs; only
/// meaningful for operators without explicit `x` dependence.
pub fn invariance_check<T: Real>(
    op: &OperatorSpec<T>,
    m: &ManifoldModel<T>,
    n_samples: usize,
    tolerance: f64,
    seed: u64,
) -> Result<CheckReport> {
    if op.x_dependent {
        return Err(Error::Precondition(format!("{} depends on x", op.name)));
    }
    let n = m.dim();
    let diffs: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = sample_rng(seed, k as u64);
            let (x, y, t) = pair_within(m, 3.0, &mut rng)?;
            let r = random_r::<T>(&mut rng);
            let zeta = random_vec::<T>(n, &mut rng);
            let a = random_sym::<T>(n, &mut rng);
            let fx = op.eval_frame(&x.coords, r, &zeta, &a)?;
            let fy = op.eval_frame(&y.coords, r, &t.matvec(&zeta), &push(&t, &a))?;
            Ok((fy - fx).abs().to_f64_lossy())
        })
        .collect::<Result<_>>()?;
    let max = diffs.into_iter().fold(0.0, f64::max);
    Ok(CheckReport::from_violation(m.name(), n_samples, max, tolerance))
}

/// Empirical modulus table indexed by an increasing list of thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusTable {
    pub bins: Vec<f64>,
    /// Running maximum over bins, so the table is nondecreasing.
    pub values: Vec<f64>,
    pub tolerance: f64,
    /// The value at the smallest bin is within tolerance.
    pub pass: bool,
}

fn check_bins(bins: &[f64]) -> Result<()> {
    if bins.is_empty() || bins.windows(2).any(|w| !(w[1] > w[0])) || !(bins[0] > 0.0) {
        return Err(arg("bins must be positive and strictly increasing"));
    }
    Ok(())
}

fn running_max(v: &mut [f64]) {
    for j in 1..v.len() {
        v[j] = v[j].max(v[j - 1]);
    }
}

/// Estimates `ω(t) ≥ sup_{d(x,y) ≤ t} |F(y, r, η, Q) − F(x, r, L_yx η, L_yx Q)|`
/// with `η`, `Q` sampled at `y`.
pub fn intrinsic_modulus_estimate<T: Real>(
    op: &OperatorSpec<T>,
    m: &ManifoldModel<T>,
    bins: &[f64],
    n_samples: usize,
    tolerance: f64,
    seed: u64,
) -> Result<ModulusTable> {
    check_bins(bins)?;
    let n = m.dim();
    let mut values = bins
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let diffs: Vec<f64> = (0..n_samples)
                .into_par_iter()
                .map(|k| {
                    let mut rng = sample_rng(seed, (j * n_samples + k) as u64);
                    let (x, y, tm) = pair_within(m, t, &mut rng)?;
                    let r = random_r::<T>(&mut rng);
                    let eta = random_vec::<T>(n, &mut rng);
                    let q = random_sym::<T>(n, &mut rng);
                    let fy = op.eval_frame(&y.coords, r, &eta, &q)?;
                    let fx = op.eval_frame(&x.coords, r, &tm.transpose().matvec(&eta), &pull(&tm, &q))?;
                    Ok((fy - fx).abs().to_f64_lossy())
                })
                .collect::<Result<_>>()?;
            Ok(diffs.into_iter().fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?;
    running_max(&mut values);
    Ok(ModulusTable { bins: bins.to_vec(), pass: values[0] <= tolerance, values, tolerance })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoFlatTable {
    pub deltas: Vec<f64>,
    pub distances: Vec<f64>,
    /// `values[i][j]`: sup of `F(y, r, L_xy ζ, Q) − F(x, r, ζ, P)` over
    /// samples with `P − L_yx Q ⪯ δᵢ I` and `d(x,y) ≤ dⱼ`; nondecreasing in
    /// both indices.
    pub values: Vec<Vec<f64>>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Samples `(P, Q)` with `P = L_yx Q + δI − R`, `R ⪰ 0` (so
/// `P − L_yx Q ⪯ δI`), and tabulates the largest increase of `F`.
pub fn twoflat_modulus_estimate<T: Real>(
    op: &OperatorSpec<T>,
    m: &ManifoldModel<T>,
    deltas: &[f64],
    distances: &[f64],
    n_samples: usize,
    tolerance: f64,
    seed: u64,
) -> Result<TwoFlatTable> {
    check_bins(deltas)?;
    check_bins(distances)?;
    let n = m.dim();
    let nd = distances.len();
    let mut values = vec![vec![0.0; nd]; deltas.len()];
    for (i, &delta) in deltas.iter().enumerate() {
        for (j, &dist) in distances.iter().enumerate() {
            let cell = ((i * nd + j) * n_samples) as u64;
            let eps: Vec<f64> = (0..n_samples)
                .into_par_iter()
                .map(|k| {
                    let mut rng = sample_rng(seed, cell + k as u64);
                    let (x, y, tm) = pair_within(m, dist, &mut rng)?;
                    let r = random_r::<T>(&mut rng);
                    let zeta = random_vec::<T>(n, &mut rng);
                    let q = random_sym::<T>(n, &mut rng);
                    let slack = if k % 4 == 0 { Matrix::zeros(n, n) } else { random_psd(n, &mut rng) };
                    let p = pull(&tm, &q).shift(T::lit(delta)).sub(&slack);
                    let fy = op.eval_frame(&y.coords, r, &tm.matvec(&zeta), &q)?;
                    let fx = op.eval_frame(&x.coords, r, &zeta, &p)?;
                    Ok((fy - fx).to_f64_lossy())
                })
                .collect::<Result<_>>()?;
            values[i][j] = eps.into_iter().fold(f64::NEG_INFINITY, f64::max);
        }
    }
    for i in 0..values.len() {
        running_max(&mut values[i]);
        if i > 0 {
            for j in 0..nd {
                values[i][j] = values[i][j].max(values[i - 1][j]);
            }
        }
    }
    Ok(TwoFlatTable {
        deltas: deltas.to_vec(),
        distances: distances.to_vec(),
        pass: values[0][0] <= tolerance,
        values,
        tolerance,
    })
}
