//! Minimizing unit-speed geodesic segments with a parallel orthonormal frame.

use serde::{Deserialize, Serialize};

use super::{ManifoldModel, Point, TangentVector};
use crate::error::{domain, Result};
use crate::linalg;
use crate::scalar::Real;

/// `γ : [0, ℓ] → M` with `γ(0) = start`, `γ(ℓ) = end`, `|γ′| = 1`.
///
/// `frame[0]` is `γ′(0)`; the remaining vectors complete an orthonormal
/// basis of `T_start M`. The frame at time `t` is their parallel transport.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicSegment<T> {
    pub model: ManifoldModel<T>,
    pub start: Point<T>,
    pub end: Point<T>,
    pub length: T,
    pub velocity: Vec<T>,
    pub frame: Vec<Vec<T>>,
}

impl<T: Real> ManifoldModel<T> {
    /// The minimizing geodesic from `x` to `y`.
    pub fn geodesic_segment(&self, x: &Point<T>, y: &Point<T>) -> Result<GeodesicSegment<T>> {
        let log = self.log(x, y)?;
        let ell = self.norm(&log);
        let scale = T::one() + linalg::norm(&x.coords);
        if ell <= T::lit(1e-12) * scale {
            return Err(domain("degenerate geodesic segment: x = y"));
        }
        let velocity = linalg::scaled(&log.components, T::one() / ell);
        let mut seeds = vec![velocity.clone()];
        seeds.extend(self.frame_raw(&x.coords));
        let frame = self.gram_schmidt(&x.coords, &seeds, self.dim());
        Ok(GeodesicSegment { model: self.clone(), start: x.clone(), end: y.clone(), length: ell, velocity, frame })
    }
}

impl<T: Real> GeodesicSegment<T> {
    pub fn dim(&self) -> usize {
        self.frame.len()
    }

    pub(crate) fn point_raw(&self, t: T) -> Vec<T> {
        if t == self.length {
            return self.end.coords.clone();
        }
        self.model.exp_raw(&self.start.coords, &linalg::scaled(&self.velocity, t))
    }

    /// `γ(t)`.
    pub fn point_at(&self, t: T) -> Point<T> {
        Point::new(self.point_raw(t))
    }

    /// Transport of a vector at `γ(0)` to `γ(t)` along the segment.
    pub(crate) fn transport_from_start(&self, t: T, v: &[T]) -> Vec<T> {
        if t == T::zero() {
            return v.to_vec();
        }
        let p = self.point_raw(t);
        self.model
            .transport_raw(&self.start.coords, &p, v)
            .expect("points on a minimizing segment are within the injectivity radius")
    }

    /// `γ′(t)`.
    pub fn velocity_at(&self, t: T) -> TangentVector<T> {
        TangentVector::new(self.point_at(t), self.transport_from_start(t, &self.velocity))
    }

    /// The parallel frame `E_1(t), …, E_n(t)` with `E_1 = γ′`.
    pub fn frame_at(&self, t: T) -> Vec<TangentVector<T>> {
        let p = self.point_at(t);
        self.frame_raw_at(t)
            .into_iter()
            .map(|e| TangentVector::new(p.clone(), e))
            .collect()
    }

    pub(crate) fn frame_raw_at(&self, t: T) -> Vec<Vec<T>> {
        if t == T::zero() {
            return self.frame.clone();
        }
        let p = self.point_raw(t);
        self.frame
            .iter()
            .map(|e| {
                self.model
                    .transport_raw(&self.start.coords, &p, e)
                    .expect("points on a minimizing segment are within the injectivity radius")
            })
            .collect()
    }

    /// Frame coefficients of a vector at `γ(t)` in the parallel frame.
    pub(crate) fn coeffs_at(&self, t: T, v: &[T]) -> Vec<T> {
        self.frame_raw_at(t).iter().map(|e| self.model.inner_raw(v, e)).collect()
    }

    /// Vector at `γ(t)` from parallel-frame coefficients.
    pub(crate) fn vector_at(&self, t: T, c: &[T]) -> Vec<T> {
        let frame = self.frame_raw_at(t);
        let mut out = vec![T::zero(); self.model.ambient_dim()];
        for (e, &ci) in frame.iter().zip(c) {
            for (o, &ei) in out.iter_mut().zip(e) {
                *o = *o + ci * ei;
            }
        }
        out
    }

    /// Matrix `M_ij = ⟨R(E_j, γ′)γ′, E_i⟩` of the Jacobi operator in the
    /// parallel frame at `γ(0)`. The models are locally symmetric, so this
    /// matrix does not depend on `t`.
    pub fn jacobi_operator(&self) -> linalg::Matrix<T> {
        self.operator_from(&self.frame, &self.velocity)
    }

    /// The Jacobi operator matrix evaluated at `γ(t)` from the transported frame.
    pub fn jacobi_operator_at(&self, t: T) -> linalg::Matrix<T> {
        let frame = self.frame_raw_at(t);
        let vel = self.transport_from_start(t, &self.velocity);
        self.operator_from(&frame, &vel)
    }

    fn operator_from(&self, frame: &[Vec<T>], vel: &[T]) -> linalg::Matrix<T> {
        let n = frame.len();
        let cols: Vec<Vec<T>> = frame.iter().map(|e| self.model.curvature_raw(e, vel, vel)).collect();
        linalg::Matrix::from_fn(n, n, |i, j| self.model.inner_raw(&cols[j], &frame[i])).symmetrized()
    }
}
