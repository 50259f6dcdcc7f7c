//! Seeded random sampling of points and tangent vectors.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{ManifoldModel, Point, TangentVector};
use crate::linalg;
use crate::scalar::Real;

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

impl<T: Real> ManifoldModel<T> {
    /// A random point. Non-compact models draw from a Gaussian of unit
    /// scale (in units of the curvature radius for the hyperboloid).
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point<T> {
        Point::new(self.random_point_raw(rng))
    }

    pub(crate) fn random_point_raw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        match self {
            Self::Euclidean { dim } => (0..*dim).map(|_| gaussian(rng)).collect(),
            Self::Sphere { dim, radius } => loop {
                let g: Vec<T> = (0..=*dim).map(|_| gaussian(rng)).collect();
                let n = linalg::norm(&g);
                if n > T::lit(1e-6) {
                    break linalg::scaled(&g, *radius / n);
                }
            },
            Self::Hyperbolic { dim, k0 } => {
                let r = T::one() / k0.sqrt();
                let spatial: Vec<T> = (0..*dim).map(|_| gaussian::<T, _>(rng) * r).collect();
                self.hyperbolic_point(&spatial).expect("dimension matches").coords
            }
            Self::FlatTorus { periods } => {
                periods.iter().map(|&p| T::lit(rng.gen::<f64>()) * p).collect()
            }
            Self::Product(f) => f.iter().flat_map(|m| m.random_point_raw(rng)).collect(),
        }
    }

    /// A tangent vector at `x` with i.i.d. standard normal frame coefficients.
    pub fn random_tangent<R: Rng + ?Sized>(&self, x: &Point<T>, rng: &mut R) -> TangentVector<T> {
        let c: Vec<T> = (0..self.dim()).map(|_| gaussian(rng)).collect();
        self.from_frame(x, &c)
    }

    /// A uniformly distributed unit tangent vector at `x`.
    pub fn random_unit_tangent<R: Rng + ?Sized>(&self, x: &Point<T>, rng: &mut R) -> TangentVector<T> {
        loop {
            let v = self.random_tangent(x, rng);
            let n = self.norm(&v);
            if n > T::lit(1e-6) {
                return v.scale(T::one() / n);
            }
        }
    }

    /// The point `exp_x(ℓ u)` for a random unit vector `u`.
    pub fn random_point_at_distance<R: Rng + ?Sized>(&self, x: &Point<T>, ell: T, rng: &mut R) -> Point<T> {
        let u = self.random_unit_tangent(x, rng);
        Point::new(self.exp_raw(&x.coords, &linalg::scaled(&u.components, ell)))
    }
}
