//! Gradient and Hessian of `φ(x, y) = d(x, y)²` on `M × M`, and the sampled
//! sign and curvature-bound checks for `d²φ(x, y)(v, L_xy v)²`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{cs_sn, JacobiMethod, JacobiSolver};
use crate::error::{arg, Result};
use crate::linalg::{self, Matrix};
use crate::manifold::{ManifoldModel, Point, TangentVector};
use crate::report::{sample_rng, CheckReport};
use crate::scalar::Real;

/// `(∂φ/∂x, ∂φ/∂y) = (−2 exp_x⁻¹(y), −2 exp_y⁻¹(x))`.
pub fn grad_distance_sq<T: Real>(
    m: &ManifoldModel<T>,
    x: &Point<T>,
    y: &Point<T>,
) -> Result<(TangentVector<T>, TangentVector<T>)> {
    let gx = m.log(x, y)?.scale(-T::lit(2.0));
    let gy = m.log(y, x)?.scale(-T::lit(2.0));
    Ok((gx, gy))
}

/// Second derivative of `φ` at `(x, y)`, as a symmetric `2n × 2n` matrix in
/// the canonical frames: rows/columns `0..n` are the frame at `x`, `n..2n`
/// the frame at `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HessianPair<T> {
    pub x: Point<T>,
    pub y: Point<T>,
    pub form: Matrix<T>,
}

impl<T: Real> HessianPair<T> {
    pub fn dim(&self) -> usize {
        self.form.rows() / 2
    }

    pub fn block_xx(&self) -> Matrix<T> {
        let n = self.dim();
        self.form.block(0, 0, n, n)
    }

    pub fn block_xy(&self) -> Matrix<T> {
        let n = self.dim();
        self.form.block(0, n, n, n)
    }

    pub fn block_yy(&self) -> Matrix<T> {
        let n = self.dim();
        self.form.block(n, n, n, n)
    }

    /// `d²φ(x,y)(v, w)²` for frame coefficient vectors `cv` at `x`, `cw` at `y`.
    pub fn quadratic_coeffs(&self, cv: &[T], cw: &[T]) -> T {
        let mut z = cv.to_vec();
        z.extend_from_slice(cw);
        self.form.bilinear(&z, &z)
    }

    /// `d²φ(x,y)(v, w)²` for tangent vectors `v ∈ T_x M`, `w ∈ T_y M`.
    pub fn quadratic(&self, m: &ManifoldModel<T>, v: &TangentVector<T>, w: &TangentVector<T>) -> Result<T> {
        if !v.base.same_as(&self.x) || !w.base.same_as(&self.y) {
            return Err(arg("vectors must be based at the Hessian's base pair"));
        }
        Ok(self.quadratic_coeffs(&m.to_frame(v), &m.to_frame(w)))
    }

    /// The Hessian of `s·φ`, e.g. `s = α/2` for `φ_α = (α/2) d²`.
    pub fn scaled(&self, s: T) -> Self {
        Self { x: self.x.clone(), y: self.y.clone(), form: self.form.scale(s) }
    }

    /// `‖A‖ = sup |λ|` over eigenvalues.
    pub fn norm(&self) -> T {
        linalg::spectral_norm_sym(&self.form)
    }
}

/// Hessian of `d²` via Jacobi fields: the quadratic form at `(v, w)` is
/// `2ℓ(⟨X(ℓ),X′(ℓ)⟩ − ⟨X(0),X′(0)⟩)` for the Jacobi field with
/// `X(0) = v`, `X(ℓ) = w`, polarized to a bilinear form.
pub fn hessian_distance_sq<T: Real>(m: &ManifoldModel<T>, x: &Point<T>, y: &Point<T>) -> Result<HessianPair<T>> {
    hessian_distance_sq_with(m, x, y, JacobiMethod::Auto)
}

pub fn hessian_distance_sq_with<T: Real>(
    m: &ManifoldModel<T>,
    x: &Point<T>,
    y: &Point<T>,
    method: JacobiMethod,
) -> Result<HessianPair<T>> {
    let seg = m.geodesic_segment(x, y)?;
    let solver = JacobiSolver::new(&seg, method)?;
    let k = solver.boundary_matrix();
    let n = m.dim();
    // segment-frame coefficients of the canonical frame vectors
    let fx = m.frame_raw(&x.coords);
    let fy = m.frame_raw(&y.coords);
    let e1 = seg.frame_raw_at(seg.length);
    let c = Matrix::from_fn(2 * n, 2 * n, |r, col| match (r < n, col < n) {
        (true, true) => m.inner_raw(&seg.frame[r], &fx[col]),
        (false, false) => m.inner_raw(&e1[r - n], &fy[col - n]),
        _ => T::zero(),
    });
    let form = c.transpose().matmul(&k).matmul(&c).symmetrized().scale(T::lit(2.0) * seg.length);
    Ok(HessianPair { x: x.clone(), y: y.clone(), form })
}

/// `d²φ(x,y)(v, L_xy v)²`.
pub fn hessian_on_parallel_pair<T: Real>(
    m: &ManifoldModel<T>,
    x: &Point<T>,
    y: &Point<T>,
    v: &TangentVector<T>,
) -> Result<T> {
    if !v.base.same_as(x) {
        return Err(arg("v must be based at x"));
    }
    let seg = m.geodesic_segment(x, y)?;
    let solver = JacobiSolver::new(&seg, JacobiMethod::Auto)?;
    // a parallel field has the same frame coefficients at both ends
    let a = seg.coeffs_at(T::zero(), &v.components);
    let mut z = a.clone();
    z.extend_from_slice(&a);
    Ok(T::lit(2.0) * seg.length * solver.boundary_matrix().bilinear(&z, &z))
}

/// Closed form of `d²φ(x,y)(v, L_xy v)²` for a unit vector `v` normal to
/// the geodesic on a model of constant curvature `k`:
/// `4ℓ(c_k(ℓ) − 1)/s_k(ℓ)`.
pub fn parallel_pair_closed_form<T: Real>(k: T, ell: T) -> T {
    let (cs, sn) = cs_sn(k, ell);
    T::lit(4.0) * ell * (cs - T::one()) / sn
}

/// Second central differences of `(s, t) ↦ φ(exp_x(Σ sᵢEᵢ), exp_y(Σ tⱼFⱼ))`
/// in the canonical frames, with step `h`.
pub fn fd_hessian_distance_sq<T: Real>(m: &ManifoldModel<T>, x: &Point<T>, y: &Point<T>, h: T) -> Matrix<T> {
    let n = m.dim();
    let fx = m.frame_raw(&x.coords);
    let fy = m.frame_raw(&y.coords);
    let dir = |i: usize| -> (Vec<T>, Vec<T>) {
        let zero = vec![T::zero(); m.ambient_dim()];
        if i < n {
            (fx[i].clone(), zero)
        } else {
            (zero, fy[i - n].clone())
        }
    };
    let phi = |sv: &[T], sw: &[T]| {
        let px = m.exp_raw(&x.coords, sv);
        let py = m.exp_raw(&y.coords, sw);
        let d = m.dist_raw(&px, &py);
        d * d
    };
    let eval = |terms: &[(usize, T)]| {
        let mut sv = vec![T::zero(); m.ambient_dim()];
        let mut sw = vec![T::zero(); m.ambient_dim()];
        for &(i, s) in terms {
            let (a, b) = dir(i);
            sv = linalg::axpy(&sv, s, &a);
            sw = linalg::axpy(&sw, s, &b);
        }
        phi(&sv, &sw)
    };
    let f0 = eval(&[]);
    let mut out = Matrix::zeros(2 * n, 2 * n);
    for i in 0..2 * n {
        let d2 = (eval(&[(i, h)]) - T::lit(2.0) * f0 + eval(&[(i, -h)])) / (h * h);
        out[(i, i)] = d2;
        for j in 0..i {
            let v = (eval(&[(i, h), (j, h)]) - eval(&[(i, h), (j, -h)]) - eval(&[(i, -h), (j, h)])
                + eval(&[(i, -h), (j, -h)]))
                / (T::lit(4.0) * h * h);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Sampling configuration for [`check_sign_condition`] and
/// [`check_curvature_bound`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignCheckOptions {
    pub samples: usize,
    /// Range of `ℓ = d(x, y)`. Defaults to `[0.05, min(0.9·i(M), 3)]`.
    pub ell_range: Option<(f64, f64)>,
    /// Restrict `v` to the normal space of the geodesic.
    pub normal_only: bool,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SignCheckOptions {
    fn default() -> Self {
        Self { samples: 1000, ell_range: None, normal_only: false, tolerance: 1e-8, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignSample {
    pub ell: f64,
    pub value: f64,
    pub v_norm_sq: f64,
    /// `‖v⊥‖²` times the constant-curvature closed form, when available.
    pub closed_form: Option<f64>,
    /// `2K₀ℓ²‖v‖²` for curvature-bound checks.
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignReport {
    pub summary: CheckReport,
    /// `"nonpositive"`, `"nonnegative"` or `"zero"` (flat).
    pub expected_sign: String,
    pub min_value: f64,
    pub max_value: f64,
    /// Largest relative deviation from the closed form.
    pub max_closed_form_error: Option<f64>,
    pub records: Vec<SignSample>,
}

fn sample_pairs<T: Real>(m: &ManifoldModel<T>, opts: &SignCheckOptions) -> Result<Vec<SignSample>> {
    let (lo, hi) = match opts.ell_range {
        Some(r) => r,
        None => (0.05, (0.9 * m.global_injectivity_radius().to_f64_lossy()).min(3.0)),
    };
    if !(lo > 0.0 && hi >= lo) {
        return Err(arg("invalid range for the geodesic length"));
    }
    if T::lit(hi) >= m.global_injectivity_radius() {
        return Err(crate::error::domain("sampled lengths must stay below the injectivity radius"));
    }
    let k = m.constant_curvature();
    (0..opts.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(opts.seed, i as u64);
            let x = m.random_point(&mut rng);
            let ell = T::lit(if hi > lo { rng.gen_range(lo..hi) } else { lo });
            let u = m.random_unit_tangent(&x, &mut rng);
            let y = Point::new(m.exp_raw(&x.coords, &linalg::scaled(&u.components, ell)));
            let mut v = m.random_tangent(&x, &mut rng);
            let along = m.inner_raw(&v.components, &u.components);
            if opts.normal_only {
                v.components = linalg::axpy(&v.components, -along, &u.components);
            }
            let value = hessian_on_parallel_pair(m, &x, &y, &v)?;
            let nv = m.inner_raw(&v.components, &v.components);
            let normal_sq = if opts.normal_only { nv } else { nv - along * along };
            let closed_form = k.map(|k| (parallel_pair_closed_form(k, ell) * normal_sq).to_f64_lossy());
            Ok(SignSample {
                ell: ell.to_f64_lossy(),
                value: value.to_f64_lossy(),
                v_norm_sq: nv.to_f64_lossy(),
                closed_form,
                bound: None,
            })
        })
        .collect()
}

fn closed_form_error(records: &[SignSample]) -> Option<f64> {
    records
        .iter()
        .map(|r| {
            r.closed_form.map(|c| {
                let diff = (r.value - c).abs();
                if c.abs() > 1e-12 {
                    diff / c.abs()
                } else {
                    diff
                }
            })
        })
        .try_fold(0.0f64, |acc, e| e.map(|e| acc.max(e)))
}

/// Samples `d²φ(x,y)(v, L_xy v)²` and checks its sign: `≤ tol` when all
/// sectional curvatures are nonnegative, `≥ −tol` when all are nonpositive.
pub fn check_sign_condition<T: Real>(m: &ManifoldModel<T>, opts: &SignCheckOptions) -> Result<SignReport> {
    let (klo, khi) = m.curvature_bounds();
    let nonneg = klo >= T::zero();
    let nonpos = khi <= T::zero();
    if !nonneg && !nonpos {
        return Err(arg("sign check needs curvature of one sign; mixed-sign products have no sign claim"));
    }
    let records = sample_pairs(m, opts)?;
    let max_value = records.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);
    let min_value = records.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
    let mut worst = f64::NEG_INFINITY;
    for r in &records {
        if nonneg {
            worst = worst.max(r.value);
        }
        if nonpos {
            worst = worst.max(-r.value);
        }
    }
    let expected_sign = match (nonneg, nonpos) {
        (true, true) => "zero",
        (true, false) => "nonpositive",
        _ => "nonnegative",
    };
    let samples = records.len();
    let worst = if samples == 0 { 0.0 } else { worst };
    Ok(SignReport {
        summary: CheckReport::from_violation(m.name(), samples, worst, opts.tolerance),
        expected_sign: expected_sign.into(),
        min_value,
        max_value,
        max_closed_form_error: closed_form_error(&records),
        records,
    })
}

/// Checks `d²φ(x,y)(v, L_xy v)² ≤ 2K₀ d(x,y)² ‖v‖²` on a model whose
/// sectional curvature is bounded below by `−K₀`.
pub fn check_curvature_bound<T: Real>(m: &ManifoldModel<T>, k0: T, opts: &SignCheckOptions) -> Result<SignReport> {
    if k0 < T::zero() {
        return Err(arg("K0 must be nonnegative"));
    }
    let (klo, _) = m.curvature_bounds();
    if klo < -k0 - T::lit(1e-12) {
        return Err(arg("model curvature is not bounded below by -K0"));
    }
    let mut records = sample_pairs(m, opts)?;
    let mut worst = if records.is_empty() { 0.0 } else { f64::NEG_INFINITY };
    for r in &mut records {
        let b = 2.0 * k0.to_f64_lossy() * r.ell * r.ell * r.v_norm_sq;
        r.bound = Some(b);
        worst = worst.max(r.value - b);
    }
    let max_value = records.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);
    let min_value = records.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
    Ok(SignReport {
        summary: CheckReport::from_violation(m.name(), records.len(), worst, opts.tolerance),
        expected_sign: "bounded".into(),
        min_value,
        max_value,
        max_closed_form_error: closed_form_error(&records),
        records,
    })
}
