//! The index form `I(X, X) = ∫ ‖X′‖² − ⟨R(X, γ′)γ′, X⟩ dt` and the check that
//! Jacobi fields minimize it among fields with the same boundary values.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{JacobiField, JacobiMethod, JacobiSolver};
use crate::error::Result;
use crate::linalg;
use crate::manifold::{GeodesicSegment, TangentVector};
use crate::report::{sample_rng, CheckReport};
use crate::scalar::Real;

/// Composite Simpson intervals used by [`index_form`].
pub const SIMPSON_INTERVALS: usize = 2048;

/// A piecewise smooth vector field along a segment, given by its
/// coefficients in the parallel frame.
pub trait FieldAlong<T: Real>: Sync {
    fn value(&self, t: T) -> Vec<T>;
    /// Derivative of the coefficients. At a breakpoint, `from_right`
    /// selects the one-sided derivative.
    fn derivative(&self, t: T, from_right: bool) -> Vec<T>;
    /// Interior points where the derivative may jump.
    fn breakpoints(&self) -> Vec<T> {
        Vec::new()
    }
}

impl<T: Real> FieldAlong<T> for JacobiField<T> {
    fn value(&self, t: T) -> Vec<T> {
        self.eval(t).0
    }

    fn derivative(&self, t: T, _from_right: bool) -> Vec<T> {
        self.eval(t).1
    }
}

/// `f(t) = a + (t/ℓ)(b − a)`. With `a = b` this is a parallel field.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearField<T> {
    pub a: Vec<T>,
    pub b: Vec<T>,
    pub length: T,
}

impl<T: Real> FieldAlong<T> for LinearField<T> {
    fn value(&self, t: T) -> Vec<T> {
        let s = t / self.length;
        self.a.iter().zip(&self.b).map(|(&a, &b)| a + s * (b - a)).collect()
    }

    fn derivative(&self, _t: T, _from_right: bool) -> Vec<T> {
        self.a.iter().zip(&self.b).map(|(&a, &b)| (b - a) / self.length).collect()
    }
}

/// A base field plus perturbations vanishing at both endpoints: sine modes
/// `sin(kπt/ℓ)·c` and piecewise linear hats rising on `[lo, mid]` and
/// falling on `[mid, hi]`.
pub struct Perturbed<'a, T> {
    pub base: &'a dyn FieldAlong<T>,
    pub length: T,
    pub sines: Vec<(usize, Vec<T>)>,
    pub hats: Vec<Hat<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hat<T> {
    pub lo: T,
    pub mid: T,
    pub hi: T,
    pub coeffs: Vec<T>,
}

impl<T: Real> Hat<T> {
    fn value(&self, t: T) -> T {
        if t > self.lo && t <= self.mid {
            (t - self.lo) / (self.mid - self.lo)
        } else if t > self.mid && t < self.hi {
            (self.hi - t) / (self.hi - self.mid)
        } else {
            T::zero()
        }
    }

    fn slope(&self, t: T, from_right: bool) -> T {
        let up = T::one() / (self.mid - self.lo);
        let down = -T::one() / (self.hi - self.mid);
        if from_right {
            if t >= self.lo && t < self.mid {
                up
            } else if t >= self.mid && t < self.hi {
                down
            } else {
                T::zero()
            }
        } else if t > self.lo && t <= self.mid {
            up
        } else if t > self.mid && t <= self.hi {
            down
        } else {
            T::zero()
        }
    }
}

impl<T: Real> FieldAlong<T> for Perturbed<'_, T> {
    fn value(&self, t: T) -> Vec<T> {
        let mut f = self.base.value(t);
        for (k, c) in &self.sines {
            let s = (T::from_usize_lossy(*k) * T::PI() * t / self.length).sin();
            f = linalg::axpy(&f, s, c);
        }
        for h in &self.hats {
            f = linalg::axpy(&f, h.value(t), &h.coeffs);
        }
        f
    }

    fn derivative(&self, t: T, from_right: bool) -> Vec<T> {
        let mut f = self.base.derivative(t, from_right);
        for (k, c) in &self.sines {
            let w = T::from_usize_lossy(*k) * T::PI() / self.length;
            f = linalg::axpy(&f, w * (w * t).cos(), c);
        }
        for h in &self.hats {
            f = linalg::axpy(&f, h.slope(t, from_right), &h.coeffs);
        }
        f
    }

    fn breakpoints(&self) -> Vec<T> {
        let mut b = self.base.breakpoints();
        for h in &self.hats {
            b.extend([h.lo, h.mid, h.hi]);
        }
        b
    }
}

/// `I(X, X)` by composite Simpson quadrature on [`SIMPSON_INTERVALS`]
/// intervals, split at the breakpoints of `field`.
pub fn index_form<T: Real>(seg: &GeodesicSegment<T>, field: &dyn FieldAlong<T>) -> T {
    index_form_with(seg, field, SIMPSON_INTERVALS)
}

pub fn index_form_with<T: Real>(seg: &GeodesicSegment<T>, field: &dyn FieldAlong<T>, intervals: usize) -> T {
    let ell = seg.length;
    let m = seg.jacobi_operator();
    let tol = ell * T::lit(1e-12);
    let mut knots: Vec<T> = field.breakpoints().into_iter().filter(|&b| b > tol && b < ell - tol).collect();
    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    knots.dedup_by(|a, b| (*a - *b).abs() <= tol);
    let mut edges = vec![T::zero()];
    edges.extend(knots);
    edges.push(ell);
    let integrand = |t: T, from_right: bool| {
        let f = field.value(t);
        let df = field.derivative(t, from_right);
        linalg::dot(&df, &df) - m.bilinear(&f, &f)
    };
    let mut total = T::zero();
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let share = ((hi - lo) / ell * T::from_usize_lossy(intervals)).round().to_usize().unwrap_or(2);
        let k = (share.max(2) + 1) / 2 * 2;
        let h = (hi - lo) / T::from_usize_lossy(k);
        let mut s = integrand(lo, true) + integrand(hi, false);
        for j in 1..k {
            let t = lo + h * T::from_usize_lossy(j);
            let wgt = if j % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) };
            s = s + wgt * integrand(t, true);
        }
        total = total + s * h / T::lit(3.0);
    }
    total
}

/// Outcome of [`index_minimality_check`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimalityReport {
    pub summary: CheckReport,
    /// `I(X, X)` for the Jacobi field.
    pub jacobi_value: f64,
    /// Endpoint expression `⟨X(ℓ),X′(ℓ)⟩ − ⟨X(0),X′(0)⟩`.
    pub boundary_value: f64,
    pub min_competitor: f64,
    /// `I(P, P)` for the field interpolating the boundary values linearly in
    /// the parallel frame (a parallel field when `w = L_xy v`).
    pub interpolant_value: f64,
    pub violations: usize,
}

/// Compares `I(X, X)` for the Jacobi field `X` with `X(0) = v`, `X(ℓ) = w`
/// against `n_trials` random piecewise smooth competitors with the same
/// boundary values, and against the linear interpolant.
pub fn index_minimality_check<T: Real>(
    seg: &GeodesicSegment<T>,
    v: &TangentVector<T>,
    w: &TangentVector<T>,
    n_trials: usize,
    seed: u64,
) -> Result<MinimalityReport> {
    let tolerance = T::lit(1e-8);
    let solver = JacobiSolver::new(seg, JacobiMethod::Auto)?;
    let x = solver.solve(v, w)?;
    let ell = seg.length;
    let n = seg.dim();
    let ix = index_form(seg, &x);
    let scale = T::one() + linalg::norm(&x.coeffs[0]) + linalg::norm(&x.coeffs[x.coeffs.len() - 1]);
    let competitors: Vec<T> = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let (sines, hats) = competitor_terms(&mut rng, n, ell, scale);
            let z = Perturbed { base: &x, length: ell, sines, hats };
            index_form(seg, &z)
        })
        .collect();
    let p = LinearField { a: x.coeffs[0].clone(), b: x.coeffs[x.coeffs.len() - 1].clone(), length: ell };
    let ip = index_form(seg, &p);
    let mut worst = ix - ip;
    let mut violations = usize::from(ix > ip + tolerance);
    let mut min_c = T::infinity();
    for &iz in &competitors {
        worst = worst.max(ix - iz);
        min_c = min_c.min(iz);
        if ix > iz + tolerance {
            violations += 1;
        }
    }
    let model = seg.model.name();
    let mut summary =
        CheckReport::from_violation(model, n_trials + 1, worst.to_f64_lossy(), tolerance.to_f64_lossy());
    summary.pass = violations == 0;
    Ok(MinimalityReport {
        summary,
        jacobi_value: ix.to_f64_lossy(),
        boundary_value: x.boundary_term().to_f64_lossy(),
        min_competitor: min_c.to_f64_lossy(),
        interpolant_value: ip.to_f64_lossy(),
        violations,
    })
}

/// Random perturbation vanishing at the endpoints: either six sine modes
/// or up to three hats with knots on the grid `ℓ/8`.
pub(crate) fn competitor_terms<T: Real, R: Rng>(
    rng: &mut R,
    n: usize,
    ell: T,
    scale: T,
) -> (Vec<(usize, Vec<T>)>, Vec<Hat<T>>) {
    let amp = scale * T::lit(10f64.powf(rng.gen_range(-2.0..0.5)));
    let mut sines = Vec::new();
    let mut hats = Vec::new();
    let gauss = |rng: &mut R, s: T| -> Vec<T> {
        (0..n).map(|_| T::lit(rng.sample::<f64, _>(StandardNormal)) * s).collect()
    };
    if rng.gen_bool(0.5) {
        let knot = |j: usize| ell * T::from_usize_lossy(j) / T::lit(8.0);
        for _ in 0..rng.gen_range(1..=3) {
            let j = rng.gen_range(1..8usize);
            let left = rng.gen_range(1..=j);
            let right = rng.gen_range(1..=8 - j);
            let coeffs = gauss(rng, amp);
            hats.push(Hat { lo: knot(j - left), mid: knot(j), hi: knot(j + right), coeffs });
        }
    } else {
        for k in 1..=6 {
            let c = gauss(rng, amp / T::from_usize_lossy(k));
            sines.push((k, c));
        }
    }
    (sines, hats)
}
