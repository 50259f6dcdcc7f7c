//! Jacobi fields along minimizing geodesics, the index form, and the
//! Hessian of the squared distance `φ(x, y) = d(x, y)²`.
//!
//! All fields are expressed by their coefficients in the parallel
//! orthonormal frame of the segment, where the Jacobi equation reads
//! `f″ + M f = 0` with `M_ij = ⟨R(E_j, γ′)γ′, E_i⟩`.

mod hessian;
mod index;

pub use hessian::{
    check_curvature_bound, check_sign_condition, fd_hessian_distance_sq, grad_distance_sq,
    hessian_distance_sq, hessian_distance_sq_with, hessian_on_parallel_pair, parallel_pair_closed_form,
    HessianPair, SignCheckOptions, SignReport, SignSample,
};
pub use index::{
    index_form, index_form_with, index_minimality_check, FieldAlong, Hat, LinearField, MinimalityReport, Perturbed,
    SIMPSON_INTERVALS,
};

use std::sync::Arc;

use crate::error::{arg, Error, Result};
use crate::linalg::{self, Matrix};
use crate::manifold::{GeodesicSegment, TangentVector};
use crate::scalar::{sinc, sinhc, Real};

/// Number of uniform steps used by the shooting integrator and by the
/// sampled representation of a Jacobi field.
pub const SHOOTING_STEPS: usize = 2048;

/// How the boundary value problem is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JacobiMethod {
    /// Closed form on constant-curvature models, shooting on products.
    #[default]
    Auto,
    /// Modal closed form, valid whenever `M` is constant along the segment.
    ClosedForm,
    /// RK4 shooting on the fundamental matrix solution.
    Shooting,
}

/// `(c_κ(t), s_κ(t))`: the solutions of `f″ + κ f = 0` with
/// `(f, f′)(0) = (1, 0)` and `(0, 1)`.
pub(crate) fn cs_sn<T: Real>(kappa: T, t: T) -> (T, T) {
    if kappa > T::zero() {
        let r = kappa.sqrt();
        ((r * t).cos(), t * sinc(r * t))
    } else if kappa < T::zero() {
        let r = (-kappa).sqrt();
        ((r * t).cosh(), t * sinhc(r * t))
    } else {
        (T::one(), t)
    }
}

enum Core<T> {
    Modal {
        q: Matrix<T>,
        kappa: Vec<T>,
    },
    Shooting {
        /// `[F | F′]` at every node for the `2n` unit initial conditions.
        phi: Vec<Matrix<T>>,
        dphi: Vec<Matrix<T>>,
        m_nodes: Vec<Matrix<T>>,
    },
}

/// Solution operator of the Jacobi boundary value problem on one segment.
///
/// Construction does all the work (eigen-decomposition or fundamental
/// solutions); individual boundary value problems are then linear algebra.
pub struct JacobiSolver<T> {
    segment: GeodesicSegment<T>,
    core: Arc<Core<T>>,
    /// `X′(0) = d00 a + d01 b`, `X′(ℓ) = d10 a + d11 b` for `X(0) = a`, `X(ℓ) = b`.
    d: [Matrix<T>; 4],
}

impl<T: Real> JacobiSolver<T> {
    pub fn new(segment: &GeodesicSegment<T>, method: JacobiMethod) -> Result<Self> {
        let method = match method {
            JacobiMethod::Auto if segment.model.constant_curvature().is_some() => JacobiMethod::ClosedForm,
            JacobiMethod::Auto => JacobiMethod::Shooting,
            m => m,
        };
        let ell = segment.length;
        let n = segment.dim();
        let singular = || Error::Singular("conjugate endpoints: Jacobi boundary value problem is singular".into());
        let (core, d) = match method {
            JacobiMethod::ClosedForm | JacobiMethod::Auto => {
                let eig = linalg::sym_eigen(&segment.jacobi_operator());
                let q = eig.vectors;
                let kappa = eig.values;
                let mut diag = [vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]];
                for (i, &k) in kappa.iter().enumerate() {
                    let (cs, sn) = cs_sn(k, ell);
                    if sn.abs() <= T::lit(1e-10) * ell {
                        return Err(singular());
                    }
                    diag[0][i] = -cs / sn;
                    diag[1][i] = T::one() / sn;
                    diag[2][i] = -T::one() / sn;
                    diag[3][i] = cs / sn;
                }
                let conj = |dg: &[T]| q.matmul(&Matrix::diagonal(dg)).matmul(&q.transpose());
                let d = [conj(&diag[0]), conj(&diag[1]), conj(&diag[2]), conj(&diag[3])];
                (Core::Modal { q, kappa }, d)
            }
            JacobiMethod::Shooting => {
                let (phi, dphi, m_nodes) = shoot(segment);
                let last = SHOOTING_STEPS;
                let f = &phi[last];
                let g = &dphi[last];
                let fa = f.block(0, 0, n, n);
                let fs = f.block(0, n, n, n);
                let ga = g.block(0, 0, n, n);
                let gs = g.block(0, n, n, n);
                let fs_inv = linalg::inverse(&fs).map_err(|_| singular())?;
                let d00 = fs_inv.matmul(&fa).scale(-T::one());
                let d01 = fs_inv.clone();
                let d10 = ga.add(&gs.matmul(&d00));
                let d11 = gs.matmul(&fs_inv);
                (Core::Shooting { phi, dphi, m_nodes }, [d00, d01, d10, d11])
            }
        };
        Ok(Self { segment: segment.clone(), core: Arc::new(core), d })
    }

    pub fn segment(&self) -> &GeodesicSegment<T> {
        &self.segment
    }

    /// Endpoint derivative coefficients `(X′(0), X′(ℓ))` for boundary
    /// coefficients `a = X(0)`, `b = X(ℓ)` in the parallel frame.
    pub fn endpoint_derivatives(&self, a: &[T], b: &[T]) -> (Vec<T>, Vec<T>) {
        let [d00, d01, d10, d11] = &self.d;
        let s0 = linalg::add(&d00.matvec(a), &d01.matvec(b));
        let s1 = linalg::add(&d10.matvec(a), &d11.matvec(b));
        (s0, s1)
    }

    /// The `2n × 2n` matrix `K` with `⟨X(ℓ),X′(ℓ)⟩ − ⟨X(0),X′(0)⟩ = [a;b]ᵀ K [a;b]`.
    pub fn boundary_matrix(&self) -> Matrix<T> {
        let n = self.segment.dim();
        let [d00, d01, d10, d11] = &self.d;
        Matrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => -d00[(i, j)],
            (true, false) => -d01[(i, j - n)],
            (false, true) => d10[(i - n, j)],
            (false, false) => d11[(i - n, j - n)],
        })
    }

    /// Solves for the Jacobi field with frame coefficients `a` at `γ(0)`
    /// and `b` at `γ(ℓ)`.
    pub fn solve_coeffs(&self, a: &[T], b: &[T]) -> Result<JacobiField<T>> {
        let n = self.segment.dim();
        if a.len() != n || b.len() != n {
            return Err(arg("boundary coefficients have the wrong dimension"));
        }
        let (s0, _) = self.endpoint_derivatives(a, b);
        let ell = self.segment.length;
        let h = ell / T::from_usize_lossy(SHOOTING_STEPS);
        let mut times = Vec::with_capacity(SHOOTING_STEPS + 1);
        let mut coeffs = Vec::with_capacity(SHOOTING_STEPS + 1);
        let mut derivs = Vec::with_capacity(SHOOTING_STEPS + 1);
        let eval = match &*self.core {
            Core::Modal { q, kappa } => {
                let g = q.transpose().matvec(a);
                let s = q.transpose().matvec(&s0);
                FieldEval::Modal { q: q.clone(), kappa: kappa.clone(), g, s }
            }
            Core::Shooting { m_nodes, .. } => FieldEval::Sampled { m_nodes: m_nodes.clone(), step: h },
        };
        let mut c = a.to_vec();
        c.extend_from_slice(&s0);
        for k in 0..=SHOOTING_STEPS {
            let t = if k == SHOOTING_STEPS { ell } else { h * T::from_usize_lossy(k) };
            times.push(t);
            match (&*self.core, &eval) {
                (Core::Shooting { phi, dphi, .. }, _) => {
                    coeffs.push(phi[k].matvec(&c));
                    derivs.push(dphi[k].matvec(&c));
                }
                (_, e) => {
                    let (f, df) = e.modal(t);
                    coeffs.push(f);
                    derivs.push(df);
                }
            }
        }
        let seg = &self.segment;
        let to_vec = |t: T, c: &[T]| TangentVector::new(seg.point_at(t), seg.vector_at(t, c));
        Ok(JacobiField {
            x0: to_vec(T::zero(), &coeffs[0]),
            x_ell: to_vec(ell, &coeffs[SHOOTING_STEPS]),
            dx0: to_vec(T::zero(), &derivs[0]),
            dx_ell: to_vec(ell, &derivs[SHOOTING_STEPS]),
            segment: self.segment.clone(),
            times,
            coeffs,
            derivs,
            eval,
        })
    }

    /// Solves for the Jacobi field with `X(0) = v`, `X(ℓ) = w`.
    pub fn solve(&self, v: &TangentVector<T>, w: &TangentVector<T>) -> Result<JacobiField<T>> {
        let seg = &self.segment;
        if !v.base.same_as(&seg.start) || !w.base.same_as(&seg.end) {
            return Err(arg("boundary vectors must be based at the segment endpoints"));
        }
        let a = seg.coeffs_at(T::zero(), &v.components);
        let b = seg.coeffs_at(seg.length, &w.components);
        self.solve_coeffs(&a, &b)
    }
}

/// RK4 integration of `F″ = −M(t) F` for the `2n` unit initial conditions.
fn shoot<T: Real>(seg: &GeodesicSegment<T>) -> (Vec<Matrix<T>>, Vec<Matrix<T>>, Vec<Matrix<T>>) {
    let n = seg.dim();
    let steps = SHOOTING_STEPS;
    let h = seg.length / T::from_usize_lossy(steps);
    let half = h / T::lit(2.0);
    // operator on the half-step grid
    let m_half: Vec<Matrix<T>> =
        (0..=2 * steps).map(|j| seg.jacobi_operator_at(half * T::from_usize_lossy(j))).collect();
    let mut f = Matrix::from_fn(n, 2 * n, |i, j| if i == j { T::one() } else { T::zero() });
    let mut g = Matrix::from_fn(n, 2 * n, |i, j| if j == i + n { T::one() } else { T::zero() });
    let mut phi = Vec::with_capacity(steps + 1);
    let mut dphi = Vec::with_capacity(steps + 1);
    phi.push(f.clone());
    dphi.push(g.clone());
    for k in 0..steps {
        let (m0, mh, m1) = (&m_half[2 * k], &m_half[2 * k + 1], &m_half[2 * k + 2]);
        let k1f = g.clone();
        let k1g = m0.matmul(&f).scale(-T::one());
        let f2 = f.add(&k1f.scale(half));
        let k2f = g.add(&k1g.scale(half));
        let k2g = mh.matmul(&f2).scale(-T::one());
        let f3 = f.add(&k2f.scale(half));
        let k3f = g.add(&k2g.scale(half));
        let k3g = mh.matmul(&f3).scale(-T::one());
        let f4 = f.add(&k3f.scale(h));
        let k4f = g.add(&k3g.scale(h));
        let k4g = m1.matmul(&f4).scale(-T::one());
        let sixth = h / T::lit(6.0);
        let two = T::lit(2.0);
        f = f.add(&k1f.add(&k2f.scale(two)).add(&k3f.scale(two)).add(&k4f).scale(sixth));
        g = g.add(&k1g.add(&k2g.scale(two)).add(&k3g.scale(two)).add(&k4g).scale(sixth));
        phi.push(f.clone());
        dphi.push(g.clone());
    }
    let m_nodes = m_half.into_iter().step_by(2).collect();
    (phi, dphi, m_nodes)
}

#[derive(Clone)]
enum FieldEval<T> {
    Modal { q: Matrix<T>, kappa: Vec<T>, g: Vec<T>, s: Vec<T> },
    Sampled { m_nodes: Vec<Matrix<T>>, step: T },
}

impl<T: Real> FieldEval<T> {
    fn modal(&self, t: T) -> (Vec<T>, Vec<T>) {
        match self {
            Self::Modal { q, kappa, g, s } => {
                let mut f = Vec::with_capacity(g.len());
                let mut df = Vec::with_capacity(g.len());
                for i in 0..g.len() {
                    let (cs, sn) = cs_sn(kappa[i], t);
                    f.push(g[i] * cs + s[i] * sn);
                    df.push(-kappa[i] * g[i] * sn + s[i] * cs);
                }
                (q.matvec(&f), q.matvec(&df))
            }
            Self::Sampled { .. } => unreachable!("sampled fields are evaluated by interpolation"),
        }
    }
}

/// A Jacobi field along a segment, with endpoint data and samples of its
/// frame coefficients on a uniform grid of `[0, ℓ]`.
#[derive(Clone)]
pub struct JacobiField<T> {
    pub segment: GeodesicSegment<T>,
    pub times: Vec<T>,
    /// `coeffs[k][i]` is the `E_i` coefficient of `X(times[k])`.
    pub coeffs: Vec<Vec<T>>,
    pub derivs: Vec<Vec<T>>,
    pub x0: TangentVector<T>,
    pub x_ell: TangentVector<T>,
    pub dx0: TangentVector<T>,
    pub dx_ell: TangentVector<T>,
    eval: FieldEval<T>,
}

impl<T: Real> std::fmt::Debug for JacobiField<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("JacobiField")
            .field("length", &self.segment.length)
            .field("x0", &self.x0.components)
            .field("x_ell", &self.x_ell.components)
            .field("dx0", &self.dx0.components)
            .field("dx_ell", &self.dx_ell.components)
            .finish()
    }
}

impl<T: Real> JacobiField<T> {
    /// Frame coefficients of `(X(t), X′(t))`.
    pub fn eval(&self, t: T) -> (Vec<T>, Vec<T>) {
        match &self.eval {
            e @ FieldEval::Modal { .. } => e.modal(t),
            FieldEval::Sampled { m_nodes, step } => {
                let last = self.times.len() - 1;
                let pos = (t / *step).max(T::zero());
                let k = pos.floor().to_usize().unwrap_or(0).min(last - 1);
                let s = (t - self.times[k]) / *step;
                let (s2, s3) = (s * s, s * s * s);
                let two = T::lit(2.0);
                let three = T::lit(3.0);
                let h00 = two * s3 - three * s2 + T::one();
                let h10 = s3 - two * s2 + s;
                let h01 = -two * s3 + three * s2;
                let h11 = s3 - s2;
                let acc0 = m_nodes[k].matvec(&self.coeffs[k]);
                let acc1 = m_nodes[k + 1].matvec(&self.coeffs[k + 1]);
                let n = self.coeffs[k].len();
                let mut f = Vec::with_capacity(n);
                let mut df = Vec::with_capacity(n);
                for i in 0..n {
                    let (f0, f1) = (self.coeffs[k][i], self.coeffs[k + 1][i]);
                    let (d0, d1) = (self.derivs[k][i], self.derivs[k + 1][i]);
                    f.push(h00 * f0 + h10 * *step * d0 + h01 * f1 + h11 * *step * d1);
                    df.push(h00 * d0 - h10 * *step * acc0[i] + h01 * d1 - h11 * *step * acc1[i]);
                }
                (f, df)
            }
        }
    }

    /// `X(t)` as a tangent vector at `γ(t)`.
    pub fn vector_at(&self, t: T) -> TangentVector<T> {
        let (c, _) = self.eval(t);
        TangentVector::new(self.segment.point_at(t), self.segment.vector_at(t, &c))
    }

    /// `⟨X(ℓ), X′(ℓ)⟩ − ⟨X(0), X′(0)⟩`.
    pub fn boundary_term(&self) -> T {
        let last = self.times.len() - 1;
        linalg::dot(&self.coeffs[last], &self.derivs[last]) - linalg::dot(&self.coeffs[0], &self.derivs[0])
    }

    /// `max ‖X″ + R(X, γ′)γ′‖` over interior sample points, with `X″` from a
    /// fourth-order central difference of `X′`.
    pub fn equation_residual(&self) -> T {
        let m = self.segment.jacobi_operator();
        let n = self.times.len() - 1;
        let h = self.segment.length / T::from_usize_lossy(n);
        let mut worst = T::zero();
        for k in (2..=n - 2).step_by(8) {
            let t = self.times[k];
            let d = |j: i32| self.eval(t + h * T::lit(j as f64)).1;
            let (p2, p1, m1, m2) = (d(2), d(1), d(-1), d(-2));
            let (f, _) = self.eval(t);
            let mf = m.matvec(&f);
            let r: Vec<T> = (0..f.len())
                .map(|i| (-p2[i] + T::lit(8.0) * p1[i] - T::lit(8.0) * m1[i] + m2[i]) / (T::lit(12.0) * h) + mf[i])
                .collect();
            worst = worst.max(linalg::norm(&r));
        }
        worst
    }
}

/// Solves `X″ + R(X, γ′)γ′ = 0`, `X(0) = v`, `X(ℓ) = w` along `seg`.
pub fn solve_jacobi_bvp<T: Real>(
    seg: &GeodesicSegment<T>,
    v: &TangentVector<T>,
    w: &TangentVector<T>,
) -> Result<JacobiField<T>> {
    JacobiSolver::new(seg, JacobiMethod::Auto)?.solve(v, w)
}
