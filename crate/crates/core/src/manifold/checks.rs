//! Sampled invariant suites for a model: transport isometry, exp/log
//! round trips and curvature.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ManifoldModel, Point};
use crate::error::Result;
use crate::linalg;
use crate::report::{sample_rng, CheckReport};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: String,
    pub report: CheckReport,
}

/// Lengths are sampled in `(0, min(0.9·i(M), 3)]`.
fn reach<T: Real>(m: &ManifoldModel<T>) -> f64 {
    (0.9 * m.global_injectivity_radius().to_f64_lossy()).min(3.0)
}

fn run<T: Real>(
    m: &ManifoldModel<T>,
    suite: &str,
    samples: usize,
    tolerance: f64,
    seed: u64,
    f: impl Fn(&mut rand_chacha::ChaCha8Rng) -> Result<f64> + Sync,
) -> Result<SuiteResult> {
    let worst = (0..samples)
        .into_par_iter()
        .map(|i| f(&mut sample_rng(seed, i as u64)))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(SuiteResult { suite: suite.into(), report: CheckReport::from_violation(m.name(), samples, worst, tolerance) })
}

impl<T: Real> ManifoldModel<T> {
    /// Runs the transport, exp/log and curvature suites.
    pub fn geometry_suites(&self, samples: usize, tolerance: f64, seed: u64) -> Result<Vec<SuiteResult>> {
        let m = self;
        let r = reach(m);
        let mut out = Vec::new();
        out.push(run(m, "transport_isometry", samples, tolerance, seed, |rng| {
            let x = m.random_point(rng);
            let y = m.random_point_at_distance(&x, T::lit(r * rand::Rng::gen_range(rng, 0.01..1.0)), rng);
            let v = m.random_tangent(&x, rng);
            let w = m.random_tangent(&x, rng);
            let lv = m.transport_raw(&x.coords, &y.coords, &v.components)?;
            let lw = m.transport_raw(&x.coords, &y.coords, &w.components)?;
            let before = m.inner_raw(&v.components, &w.components);
            let after = m.inner_raw(&lv, &lw);
            let scale = T::one() + m.norm_raw(&v.components) * m.norm_raw(&w.components);
            Ok(((after - before).abs() / scale).to_f64_lossy())
        })?);
        out.push(run(m, "exp_log_round_trip", samples, tolerance, seed.wrapping_add(1), |rng| {
            let x = m.random_point(rng);
            let ell = T::lit(r * rand::Rng::gen_range(rng, 0.01..1.0));
            let y = m.random_point_at_distance(&x, ell, rng);
            let v = m.log_raw(&x.coords, &y.coords)?;
            let back = m.exp_raw(&x.coords, &v);
            let d = m.dist_raw(&x.coords, &y.coords);
            let err = m.dist_raw(&back, &y.coords).max((m.norm_raw(&v) - d).abs()).max((d - ell).abs());
            Ok(err.to_f64_lossy())
        })?);
        out.push(run(m, "distance_symmetry", samples, tolerance, seed.wrapping_add(2), |rng| {
            let x = m.random_point(rng);
            let y = m.random_point(rng);
            let z = m.random_point(rng);
            let (dxy, dyx) = (m.dist_raw(&x.coords, &y.coords), m.dist_raw(&y.coords, &x.coords));
            let tri = dxy - m.dist_raw(&x.coords, &z.coords) - m.dist_raw(&z.coords, &y.coords);
            Ok((dxy - dyx).abs().to_f64_lossy().max(tri.to_f64_lossy()))
        })?);
        let (klo, khi) = m.curvature_bounds();
        out.push(run(m, "sectional_curvature", samples, tolerance, seed.wrapping_add(3), |rng| {
            let x: Point<T> = m.random_point(rng);
            if m.dim() < 2 {
                return Ok(0.0);
            }
            let u = m.random_unit_tangent(&x, rng);
            let v = m.random_tangent(&x, rng);
            let vp = linalg::axpy(&v.components, -m.inner_raw(&v.components, &u.components), &u.components);
            let n = m.norm_raw(&vp);
            if n < T::lit(1e-3) {
                return Ok(0.0);
            }
            let vp = linalg::scaled(&vp, T::one() / n);
            let sec = m.inner_raw(&m.curvature_raw(&u.components, &vp, &vp), &u.components);
            let err = match m.constant_curvature() {
                Some(k) => (sec - k).abs(),
                None => (klo - sec).max(sec - khi).max(T::zero()),
            };
            Ok(err.to_f64_lossy())
        })?);
        Ok(out)
    }
}
