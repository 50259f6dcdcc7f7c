//! Closed-form Riemannian primitives on constant-curvature model manifolds
//! and their products.
//!
//! Coordinates:
//! * `Euclidean(n)`: chart coordinates in `Rⁿ`.
//! * `Sphere(n, r)`: embedding coordinates in `Rⁿ⁺¹` with `‖x‖ = r`.
//! * `Hyperbolic(n, K₀)`: hyperboloid model in Minkowski space `R^{1,n}`,
//!   `−x₀² + x₁² + … + xₙ² = −1/K₀`, `x₀ > 0`. Sectional curvature is `−K₀`.
//! * `FlatTorus(periods)`: chart coordinates reduced modulo the periods.
//! * `Product(factors)`: concatenated factor coordinates.
//!
//! Tangent vectors (and covectors, identified through the metric) are stored
//! by their ambient components. Symmetric bilinear forms are stored as
//! matrices in the canonical orthonormal frame of their base point, see
//! [`ManifoldModel::frame`].

mod checks;
mod sample;
mod segment;
mod spec;

pub use checks::SuiteResult;
pub use segment::GeodesicSegment;
pub use spec::ModelSpec;

use serde::{Deserialize, Serialize};

use crate::error::{arg, domain, Result};
use crate::linalg::{self, Matrix};
use crate::scalar::{sinc, sinhc, Real};

/// Angular distance to the antipode below which a sphere pair counts as cut.
const CUT_LOCUS_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ManifoldModel<T> {
    Euclidean { dim: usize },
    Sphere { dim: usize, radius: T },
    /// Hyperbolic space with constant sectional curvature `−k0`.
    Hyperbolic { dim: usize, k0: T },
    FlatTorus { periods: Vec<T> },
    Product(Vec<ManifoldModel<T>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point<T> {
    pub coords: Vec<T>,
}

impl<T: Real> Point<T> {
    pub fn new(coords: Vec<T>) -> Self {
        Self { coords }
    }

    pub(crate) fn same_as(&self, other: &Point<T>) -> bool {
        if self.coords.len() != other.coords.len() {
            return false;
        }
        let scale = T::one() + linalg::norm(&self.coords);
        self.coords
            .iter()
            .zip(&other.coords)
            .all(|(&a, &b)| (a - b).abs() <= T::lit(1e-10) * scale)
    }
}

/// A tangent vector at `base`, or a covector through the metric identification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentVector<T> {
    pub base: Point<T>,
    pub components: Vec<T>,
}

impl<T: Real> TangentVector<T> {
    pub fn new(base: Point<T>, components: Vec<T>) -> Self {
        Self { base, components }
    }

    pub fn zero(base: &Point<T>) -> Self {
        Self { base: base.clone(), components: vec![T::zero(); base.coords.len()] }
    }

    pub fn scale(&self, s: T) -> Self {
        Self { base: self.base.clone(), components: linalg::scaled(&self.components, s) }
    }
}

/// Symmetric bilinear form on `T_base M`, stored in the canonical frame at `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymBilinear<T> {
    pub base: Point<T>,
    pub matrix: Matrix<T>,
}

impl<T: Real> SymBilinear<T> {
    pub fn new(base: Point<T>, matrix: Matrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(arg("bilinear form matrix must be square"));
        }
        let tol = T::lit(1e-12) * (T::one() + matrix.max_abs());
        if matrix.asymmetry() > tol {
            return Err(arg("bilinear form matrix must be symmetric"));
        }
        Ok(Self { base, matrix: matrix.symmetrized() })
    }

    pub fn identity(base: Point<T>, n: usize) -> Self {
        Self { base, matrix: Matrix::identity(n) }
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        linalg::sym_eigenvalues(&self.matrix)
    }

    pub fn trace(&self) -> T {
        self.matrix.trace()
    }

    /// `sup |λ|` over the eigenvalues.
    pub fn norm(&self) -> T {
        linalg::spectral_norm_sym(&self.matrix)
    }
}

impl<T: Real> ManifoldModel<T> {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(arg("dimension must be at least 1"));
        }
        Ok(Self::Euclidean { dim })
    }

    pub fn sphere(dim: usize, radius: T) -> Result<Self> {
        if dim == 0 {
            return Err(arg("dimension must be at least 1"));
        }
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(arg("sphere radius must be positive"));
        }
        Ok(Self::Sphere { dim, radius })
    }

    /// Hyperbolic space of sectional curvature `−k0`.
    pub fn hyperbolic(dim: usize, k0: T) -> Result<Self> {
        if dim == 0 {
            return Err(arg("dimension must be at least 1"));
        }
        if !(k0 > T::zero()) || !k0.is_finite() {
            return Err(arg("hyperbolic curvature parameter K0 must be positive"));
        }
        Ok(Self::Hyperbolic { dim, k0 })
    }

    pub fn flat_torus(periods: Vec<T>) -> Result<Self> {
        if periods.is_empty() {
            return Err(arg("torus needs at least one period"));
        }
        if periods.iter().any(|&p| !(p > T::zero()) || !p.is_finite()) {
            return Err(arg("torus periods must be positive"));
        }
        Ok(Self::FlatTorus { periods })
    }

    pub fn product(factors: Vec<ManifoldModel<T>>) -> Result<Self> {
        if factors.is_empty() {
            return Err(arg("product needs at least one factor"));
        }
        Ok(Self::Product(factors))
    }

    pub fn name(&self) -> String {
        match self {
            Self::Euclidean { dim } => format!("euclidean({dim})"),
            Self::Sphere { dim, radius } => format!("sphere({dim}, r={radius})"),
            Self::Hyperbolic { dim, k0 } => format!("hyperbolic({dim}, K=-{k0})"),
            Self::FlatTorus { periods } => {
                let p: Vec<String> = periods.iter().map(|p| p.to_string()).collect();
                format!("torus({})", p.join(","))
            }
            Self::Product(f) => {
                let names: Vec<String> = f.iter().map(Self::name).collect();
                names.join(" x ")
            }
        }
    }

    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        match self {
            Self::Euclidean { dim } | Self::Sphere { dim, .. } | Self::Hyperbolic { dim, .. } => *dim,
            Self::FlatTorus { periods } => periods.len(),
            Self::Product(f) => f.iter().map(Self::dim).sum(),
        }
    }

    /// Length of coordinate and tangent component vectors.
    pub fn ambient_dim(&self) -> usize {
        match self {
            Self::Euclidean { dim } => *dim,
            Self::Sphere { dim, .. } | Self::Hyperbolic { dim, .. } => dim + 1,
            Self::FlatTorus { periods } => periods.len(),
            Self::Product(f) => f.iter().map(Self::ambient_dim).sum(),
        }
    }

    /// The constant sectional curvature, or `None` for products.
    pub fn constant_curvature(&self) -> Option<T> {
        match self {
            Self::Euclidean { .. } | Self::FlatTorus { .. } => Some(T::zero()),
            Self::Sphere { radius, .. } => Some(T::one() / (*radius * *radius)),
            Self::Hyperbolic { k0, .. } => Some(-*k0),
            Self::Product(f) if f.len() == 1 => f[0].constant_curvature(),
            Self::Product(_) => None,
        }
    }

    /// Bounds `(min, max)` on sectional curvature.
    pub fn curvature_bounds(&self) -> (T, T) {
        match self {
            Self::Product(f) => {
                // mixed planes in a product are flat
                let mut lo = if f.len() > 1 { T::zero() } else { T::infinity() };
                let mut hi = if f.len() > 1 { T::zero() } else { T::neg_infinity() };
                for m in f {
                    let (a, b) = m.curvature_bounds();
                    lo = lo.min(a);
                    hi = hi.max(b);
                }
                (lo, hi)
            }
            _ => {
                let k = self.constant_curvature().unwrap_or(T::zero());
                (k, k)
            }
        }
    }

    fn factor_ranges(&self) -> Vec<(usize, usize, &ManifoldModel<T>)> {
        match self {
            Self::Product(f) => {
                let mut off = 0;
                f.iter()
                    .map(|m| {
                        let a = m.ambient_dim();
                        let r = (off, off + a, m);
                        off += a;
                        r
                    })
                    .collect()
            }
            _ => vec![(0, self.ambient_dim(), self)],
        }
    }

    fn check_len(&self, v: &[T], what: &str) -> Result<()> {
        if v.len() != self.ambient_dim() {
            return Err(arg(format!(
                "{what} has {} components, model {} expects {}",
                v.len(),
                self.name(),
                self.ambient_dim()
            )));
        }
        Ok(())
    }

    fn check_base(&self, x: &Point<T>, v: &TangentVector<T>) -> Result<()> {
        self.check_len(&x.coords, "point")?;
        self.check_len(&v.components, "tangent vector")?;
        if !v.base.same_as(x) {
            return Err(arg("tangent vector is not based at the given point"));
        }
        Ok(())
    }

    /// Validates coordinates and returns the point (torus coordinates reduced,
    /// sphere/hyperboloid constraints checked to 1e-9 relative).
    pub fn point(&self, coords: Vec<T>) -> Result<Point<T>> {
        self.check_len(&coords, "point")?;
        let projected = self.project_point_raw(&coords);
        let scale = T::one() + linalg::norm(&coords);
        if linalg::norm(&linalg::sub(&projected, &coords)) > T::lit(1e-9) * scale {
            return Err(arg(format!("coordinates do not lie on {}", self.name())));
        }
        Ok(Point::new(projected))
    }

    /// Point on the hyperboloid with the given spatial coordinates.
    pub fn hyperbolic_point(&self, spatial: &[T]) -> Result<Point<T>> {
        match self {
            Self::Hyperbolic { dim, k0 } if spatial.len() == *dim => {
                let r2 = T::one() / *k0;
                let x0 = (r2 + linalg::dot(spatial, spatial)).sqrt();
                let mut c = Vec::with_capacity(dim + 1);
                c.push(x0);
                c.extend_from_slice(spatial);
                Ok(Point::new(c))
            }
            _ => Err(arg("hyperbolic_point needs a hyperbolic model and n spatial coordinates")),
        }
    }

    pub(crate) fn project_point_raw(&self, x: &[T]) -> Vec<T> {
        match self {
            Self::Euclidean { .. } => x.to_vec(),
            Self::Sphere { radius, .. } => {
                let n = linalg::norm(x);
                linalg::scaled(x, *radius / n)
            }
            Self::Hyperbolic { k0, .. } => {
                let r2 = T::one() / *k0;
                let mut c = x.to_vec();
                c[0] = (r2 + linalg::dot(&x[1..], &x[1..])).sqrt();
                c
            }
            Self::FlatTorus { periods } => x
                .iter()
                .zip(periods)
                .map(|(&c, &p)| {
                    let r = c % p;
                    let r = if r < T::zero() { r + p } else { r };
                    if r >= p {
                        r - p
                    } else {
                        r
                    }
                })
                .collect(),
            Self::Product(_) => self.map_factors(x, |m, xs| m.project_point_raw(xs)),
        }
    }

    fn map_factors(&self, x: &[T], f: impl Fn(&ManifoldModel<T>, &[T]) -> Vec<T>) -> Vec<T> {
        let mut out = Vec::with_capacity(x.len());
        for (a, b, m) in self.factor_ranges() {
            out.extend(f(m, &x[a..b]));
        }
        out
    }

    fn map_factors2(
        &self,
        x: &[T],
        v: &[T],
        f: impl Fn(&ManifoldModel<T>, &[T], &[T]) -> Result<Vec<T>>,
    ) -> Result<Vec<T>> {
        let mut out = Vec::with_capacity(x.len());
        for (a, b, m) in self.factor_ranges() {
            out.extend(f(m, &x[a..b], &v[a..b])?);
        }
        Ok(out)
    }

    /// Orthogonal projection of an ambient vector onto `T_x M`.
    pub(crate) fn project_tangent_raw(&self, x: &[T], v: &[T]) -> Vec<T> {
        match self {
            Self::Euclidean { .. } | Self::FlatTorus { .. } => v.to_vec(),
            Self::Sphere { radius, .. } => {
                let c = linalg::dot(x, v) / (*radius * *radius);
                linalg::axpy(v, -c, x)
            }
            Self::Hyperbolic { k0, .. } => {
                let c = minkowski(x, v) * *k0;
                linalg::axpy(v, c, x)
            }
            Self::Product(_) => self.map_factors2(x, v, |m, xs, vs| Ok(m.project_tangent_raw(xs, vs))).unwrap(),
        }
    }

    pub fn project_tangent(&self, x: &Point<T>, ambient: &[T]) -> Result<TangentVector<T>> {
        self.check_len(&x.coords, "point")?;
        self.check_len(ambient, "vector")?;
        Ok(TangentVector::new(x.clone(), self.project_tangent_raw(&x.coords, ambient)))
    }

    pub(crate) fn inner_raw(&self, v: &[T], w: &[T]) -> T {
        match self {
            Self::Hyperbolic { .. } => minkowski(v, w),
            Self::Product(_) => self
                .factor_ranges()
                .into_iter()
                .map(|(a, b, m)| m.inner_raw(&v[a..b], &w[a..b]))
                .sum(),
            _ => linalg::dot(v, w),
        }
    }

    pub(crate) fn norm_raw(&self, v: &[T]) -> T {
        self.inner_raw(v, v).max(T::zero()).sqrt()
    }

    /// Riemannian metric `⟨v, w⟩_x`.
    pub fn metric(&self, x: &Point<T>, v: &TangentVector<T>, w: &TangentVector<T>) -> Result<T> {
        self.check_base(x, v)?;
        self.check_base(x, w)?;
        Ok(self.inner_raw(&v.components, &w.components))
    }

    pub fn norm(&self, v: &TangentVector<T>) -> T {
        self.norm_raw(&v.components)
    }

    pub(crate) fn exp_raw(&self, x: &[T], v: &[T]) -> Vec<T> {
        match self {
            Self::Euclidean { .. } => linalg::add(x, v),
            Self::FlatTorus { .. } => self.project_point_raw(&linalg::add(x, v)),
            Self::Sphere { radius, .. } => {
                let nv = linalg::norm(v);
                let th = nv / *radius;
                let y: Vec<T> = x
                    .iter()
                    .zip(v)
                    .map(|(&xi, &vi)| xi * th.cos() + vi * sinc(th))
                    .collect();
                self.project_point_raw(&y)
            }
            Self::Hyperbolic { k0, .. } => {
                let nv = minkowski(v, v).max(T::zero()).sqrt();
                let th = nv * k0.sqrt();
                let y: Vec<T> = x
                    .iter()
                    .zip(v)
                    .map(|(&xi, &vi)| xi * th.cosh() + vi * sinhc(th))
                    .collect();
                self.project_point_raw(&y)
            }
            Self::Product(_) => self.map_factors2(x, v, |m, xs, vs| Ok(m.exp_raw(xs, vs))).unwrap(),
        }
    }

    /// Exponential map `exp_x(v)`.
    pub fn exp(&self, x: &Point<T>, v: &TangentVector<T>) -> Result<Point<T>> {
        self.check_base(x, v)?;
        Ok(Point::new(self.exp_raw(&x.coords, &v.components)))
    }

    /// Geodesic angle `θ = d/r` on the sphere or `d·√K₀` on the hyperboloid.
    fn angle(&self, x: &[T], y: &[T]) -> T {
        match self {
            Self::Sphere { radius, .. } => {
                let a = linalg::norm(&linalg::sub(x, y));
                let b = linalg::norm(&linalg::add(x, y));
                let _ = radius;
                T::lit(2.0) * a.atan2(b)
            }
            Self::Hyperbolic { k0, .. } => {
                let d = linalg::sub(x, y);
                let chord = minkowski(&d, &d).max(T::zero()).sqrt();
                T::lit(2.0) * (chord * k0.sqrt() / T::lit(2.0)).asinh()
            }
            _ => unreachable!("angle only defined for sphere and hyperboloid"),
        }
    }

    fn torus_delta(periods: &[T], x: &[T], y: &[T]) -> Vec<T> {
        x.iter()
            .zip(y)
            .zip(periods)
            .map(|((&a, &b), &p)| {
                let mut d = (b - a) % p;
                let half = p / T::lit(2.0);
                if d >= half {
                    d = d - p;
                } else if d < -half {
                    d = d + p;
                }
                d
            })
            .collect()
    }

    pub(crate) fn dist_raw(&self, x: &[T], y: &[T]) -> T {
        match self {
            Self::Euclidean { .. } => linalg::norm(&linalg::sub(y, x)),
            Self::FlatTorus { periods } => linalg::norm(&Self::torus_delta(periods, x, y)),
            Self::Sphere { radius, .. } => *radius * self.angle(x, y),
            Self::Hyperbolic { k0, .. } => self.angle(x, y) / k0.sqrt(),
            Self::Product(_) => self
                .factor_ranges()
                .into_iter()
                .map(|(a, b, m)| {
                    let d = m.dist_raw(&x[a..b], &y[a..b]);
                    d * d
                })
                .sum::<T>()
                .sqrt(),
        }
    }

    /// Geodesic distance.
    pub fn distance(&self, x: &Point<T>, y: &Point<T>) -> Result<T> {
        self.check_len(&x.coords, "point")?;
        self.check_len(&y.coords, "point")?;
        Ok(self.dist_raw(&x.coords, &y.coords))
    }

    pub(crate) fn log_raw(&self, x: &[T], y: &[T]) -> Result<Vec<T>> {
        match self {
            Self::Euclidean { .. } => Ok(linalg::sub(y, x)),
            Self::FlatTorus { periods } => {
                let d = Self::torus_delta(periods, x, y);
                for (di, &p) in d.iter().zip(periods) {
                    if di.abs() >= p / T::lit(2.0) * (T::one() - T::lit(1e-12)) {
                        return Err(domain("torus points are at the cut locus"));
                    }
                }
                Ok(d)
            }
            Self::Sphere { radius, .. } => {
                let th = self.angle(x, y);
                if th >= T::PI() - T::lit(CUT_LOCUS_GUARD) {
                    return Err(domain("antipodal sphere points are at the cut locus"));
                }
                let c = linalg::dot(x, y) / (*radius * *radius);
                let w = linalg::axpy(y, -c, x);
                Ok(linalg::scaled(&w, T::one() / sinc(th)))
            }
            Self::Hyperbolic { k0, .. } => {
                let th = self.angle(x, y);
                let c = -minkowski(x, y) * *k0;
                let w = linalg::axpy(y, -c, x);
                let w = self.project_tangent_raw(x, &w);
                Ok(linalg::scaled(&w, T::one() / sinhc(th)))
            }
            Self::Product(_) => self.map_factors2(x, y, |m, xs, ys| m.log_raw(xs, ys)),
        }
    }

    /// Inverse exponential map `exp_x⁻¹(y)`; fails at the cut locus.
    pub fn log(&self, x: &Point<T>, y: &Point<T>) -> Result<TangentVector<T>> {
        self.check_len(&x.coords, "point")?;
        self.check_len(&y.coords, "point")?;
        Ok(TangentVector::new(x.clone(), self.log_raw(&x.coords, &y.coords)?))
    }

    pub(crate) fn transport_raw(&self, x: &[T], y: &[T], v: &[T]) -> Result<Vec<T>> {
        match self {
            Self::Euclidean { .. } => Ok(v.to_vec()),
            Self::FlatTorus { periods } => {
                let _ = periods;
                self.log_raw(x, y)?;
                Ok(v.to_vec())
            }
            Self::Sphere { radius, .. } => {
                if self.angle(x, y) >= T::PI() - T::lit(CUT_LOCUS_GUARD) {
                    return Err(domain("antipodal sphere points are at the cut locus"));
                }
                let denom = *radius * *radius + linalg::dot(x, y);
                let c = linalg::dot(y, v) / denom;
                let s = linalg::add(x, y);
                Ok(linalg::axpy(v, -c, &s))
            }
            Self::Hyperbolic { k0, .. } => {
                let r2 = T::one() / *k0;
                let denom = r2 - minkowski(x, y);
                let c = minkowski(y, v) / denom;
                let s = linalg::add(x, y);
                Ok(linalg::axpy(v, c, &s))
            }
            Self::Product(_) => {
                let mut out = Vec::with_capacity(v.len());
                for (a, b, m) in self.factor_ranges() {
                    out.extend(m.transport_raw(&x[a..b], &y[a..b], &v[a..b])?);
                }
                Ok(out)
            }
        }
    }

    /// Parallel translation `L_xy v` along the minimizing geodesic.
    pub fn parallel_transport_vec(
        &self,
        x: &Point<T>,
        y: &Point<T>,
        v: &TangentVector<T>,
    ) -> Result<TangentVector<T>> {
        self.check_base(x, v)?;
        self.check_len(&y.coords, "point")?;
        Ok(TangentVector::new(y.clone(), self.transport_raw(&x.coords, &y.coords, &v.components)?))
    }

    /// Matrix of `L_xy` from the canonical frame at `x` to the one at `y`:
    /// entry `(i, j) = ⟨E^y_i, L_xy E^x_j⟩`.
    pub fn transport_matrix(&self, x: &Point<T>, y: &Point<T>) -> Result<Matrix<T>> {
        let fx = self.frame_raw(&x.coords);
        let fy = self.frame_raw(&y.coords);
        let n = self.dim();
        let mut cols = Vec::with_capacity(n);
        for e in &fx {
            cols.push(self.transport_raw(&x.coords, &y.coords, e)?);
        }
        Ok(Matrix::from_fn(n, n, |i, j| self.inner_raw(&fy[i], &cols[j])))
    }

    /// `L_xy(A)` with `⟨L_xy(A)v, v⟩_y = ⟨A L_yx v, L_yx v⟩_x`.
    pub fn parallel_transport_bilinear(
        &self,
        x: &Point<T>,
        y: &Point<T>,
        a: &SymBilinear<T>,
    ) -> Result<SymBilinear<T>> {
        self.check_len(&x.coords, "point")?;
        if !a.base.same_as(x) {
            return Err(arg("bilinear form is not based at the given point"));
        }
        if a.matrix.rows() != self.dim() {
            return Err(arg("bilinear form has the wrong dimension"));
        }
        let t = self.transport_matrix(x, y)?;
        let m = t.matmul(&a.matrix).matmul(&t.transpose()).symmetrized();
        Ok(SymBilinear { base: y.clone(), matrix: m })
    }

    pub(crate) fn curvature_raw(&self, u: &[T], v: &[T], w: &[T]) -> Vec<T> {
        match self {
            Self::Product(_) => {
                let mut out = Vec::with_capacity(u.len());
                for (a, b, m) in self.factor_ranges() {
                    out.extend(m.curvature_raw(&u[a..b], &v[a..b], &w[a..b]));
                }
                out
            }
            _ => {
                let k = self.constant_curvature().unwrap_or(T::zero());
                let vw = self.inner_raw(v, w);
                let uw = self.inner_raw(u, w);
                u.iter().zip(v).map(|(&ui, &vi)| k * (vw * ui - uw * vi)).collect()
            }
        }
    }

    /// Curvature operator `R(u, v)w`, normalized so that
    /// `⟨R(u,v)v, u⟩ = K (‖u‖²‖v‖² − ⟨u,v⟩²)` for constant curvature `K`.
    pub fn curvature_operator(
        &self,
        x: &Point<T>,
        u: &TangentVector<T>,
        v: &TangentVector<T>,
        w: &TangentVector<T>,
    ) -> Result<TangentVector<T>> {
        self.check_base(x, u)?;
        self.check_base(x, v)?;
        self.check_base(x, w)?;
        Ok(TangentVector::new(x.clone(), self.curvature_raw(&u.components, &v.components, &w.components)))
    }

    pub fn sectional_curvature(&self, x: &Point<T>, u: &TangentVector<T>, v: &TangentVector<T>) -> Result<T> {
        self.check_base(x, u)?;
        self.check_base(x, v)?;
        let (u, v) = (&u.components, &v.components);
        let uu = self.inner_raw(u, u);
        let vv = self.inner_raw(v, v);
        let uv = self.inner_raw(u, v);
        let area = uu * vv - uv * uv;
        if area <= T::lit(1e-12) * uu * vv || area <= T::zero() {
            return Err(domain("sectional curvature needs linearly independent vectors"));
        }
        let r = self.curvature_raw(u, v, v);
        Ok(self.inner_raw(&r, u) / area)
    }

    /// Injectivity radius at `x`; [`Real::infinite_radius`] when infinite.
    pub fn injectivity_radius(&self, _x: &Point<T>) -> T {
        self.global_injectivity_radius()
    }

    /// The models are homogeneous, so `i_M(x)` does not depend on `x`.
    pub fn global_injectivity_radius(&self) -> T {
        match self {
            Self::Euclidean { .. } | Self::Hyperbolic { .. } => T::infinite_radius(),
            Self::Sphere { radius, .. } => T::PI() * *radius,
            Self::FlatTorus { periods } => {
                periods.iter().fold(T::infinity(), |m, &p| m.min(p)) / T::lit(2.0)
            }
            Self::Product(f) => f
                .iter()
                .map(Self::global_injectivity_radius)
                .fold(T::infinite_radius(), |a, b| a.min(b)),
        }
    }

    /// Canonical orthonormal frame at `x` (ambient components).
    ///
    /// Deterministic Gram–Schmidt seeded from the coordinate axes. On the
    /// sphere the axes are taken in order of increasing `|xᵢ|` so the axis most
    /// aligned with the normal is the one dropped.
    pub fn frame(&self, x: &Point<T>) -> Vec<TangentVector<T>> {
        self.frame_raw(&x.coords)
            .into_iter()
            .map(|c| TangentVector::new(x.clone(), c))
            .collect()
    }

    pub(crate) fn frame_raw(&self, x: &[T]) -> Vec<Vec<T>> {
        match self {
            Self::Euclidean { dim } => axes(*dim),
            Self::FlatTorus { periods } => axes(periods.len()),
            Self::Sphere { dim, .. } => {
                let mut order: Vec<usize> = (0..=*dim).collect();
                order.sort_by(|&i, &j| {
                    x[i].abs().partial_cmp(&x[j].abs()).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(&j))
                });
                let seeds: Vec<Vec<T>> = order
                    .into_iter()
                    .map(|k| {
                        let mut e = vec![T::zero(); dim + 1];
                        e[k] = T::one();
                        e
                    })
                    .collect();
                self.gram_schmidt(x, &seeds, *dim)
            }
            Self::Hyperbolic { dim, .. } => {
                let seeds: Vec<Vec<T>> = (1..=*dim)
                    .map(|k| {
                        let mut e = vec![T::zero(); dim + 1];
                        e[k] = T::one();
                        e
                    })
                    .collect();
                self.gram_schmidt(x, &seeds, *dim)
            }
            Self::Product(_) => {
                let total = self.ambient_dim();
                let mut out = Vec::new();
                for (a, b, m) in self.factor_ranges() {
                    for f in m.frame_raw(&x[a..b]) {
                        let mut e = vec![T::zero(); total];
                        e[a..b].copy_from_slice(&f);
                        out.push(e);
                    }
                }
                out
            }
        }
    }

    /// Gram–Schmidt of the tangent projections of `seeds`, keeping `count` vectors.
    pub(crate) fn gram_schmidt(&self, x: &[T], seeds: &[Vec<T>], count: usize) -> Vec<Vec<T>> {
        let mut out: Vec<Vec<T>> = Vec::with_capacity(count);
        for s in seeds {
            if out.len() == count {
                break;
            }
            let mut v = self.project_tangent_raw(x, s);
            for _ in 0..2 {
                for e in &out {
                    let c = self.inner_raw(&v, e);
                    v = linalg::axpy(&v, -c, e);
                }
            }
            let nv = self.norm_raw(&v);
            if nv > T::lit(1e-6) {
                out.push(linalg::scaled(&v, T::one() / nv));
            }
        }
        out
    }

    /// Components `⟨v, E_i⟩` in the canonical frame at `x`.
    pub fn to_frame(&self, v: &TangentVector<T>) -> Vec<T> {
        self.to_frame_raw(&v.base.coords, &v.components)
    }

    pub(crate) fn to_frame_raw(&self, x: &[T], v: &[T]) -> Vec<T> {
        self.frame_raw(x).iter().map(|e| self.inner_raw(v, e)).collect()
    }

    /// Tangent vector `Σ cᵢ E_i` in the canonical frame at `x`.
    pub fn from_frame(&self, x: &Point<T>, c: &[T]) -> TangentVector<T> {
        TangentVector::new(x.clone(), self.from_frame_raw(&x.coords, c))
    }

    pub(crate) fn from_frame_raw(&self, x: &[T], c: &[T]) -> Vec<T> {
        let frame = self.frame_raw(x);
        let mut out = vec![T::zero(); self.ambient_dim()];
        for (e, &ci) in frame.iter().zip(c) {
            for (o, &ei) in out.iter_mut().zip(e) {
                *o = *o + ci * ei;
            }
        }
        out
    }

    /// Smooth global vector fields spanning every tangent space (projected
    /// coordinate axes); used to test convergence of jets along sequences.
    pub(crate) fn spanning_fields(&self, x: &[T]) -> Vec<Vec<T>> {
        let n = self.ambient_dim();
        (0..n)
            .map(|k| {
                let mut e = vec![T::zero(); n];
                e[k] = T::one();
                self.project_tangent_raw(x, &e)
            })
            .collect()
    }
}

fn axes<T: Real>(n: usize) -> Vec<Vec<T>> {
    (0..n)
        .map(|k| {
            let mut e = vec![T::zero(); n];
            e[k] = T::one();
            e
        })
        .collect()
}

/// Minkowski product `−a₀b₀ + Σ aᵢbᵢ`.
#[inline]
pub(crate) fn minkowski<T: Real>(a: &[T], b: &[T]) -> T {
    -a[0] * b[0] + linalg::dot(&a[1..], &b[1..])
}
