//! Evaluable operators `F(x, r, ζ, A)` and sampled structural checks.
//!
//! `ζ` and `A` are passed as coefficients in the canonical orthonormal frame
//! at `x`. Flags on an [`OperatorSpec`] are claims; the checks in this
//! module test them by sampling.

mod checks;
mod config;
mod field;

pub use checks::{
    detplus, ellipticity_check, intrinsic_modulus_estimate, invariance_check, monotonicity_estimate,
    twoflat_modulus_estimate, EllipticityReport, ModulusTable, TwoFlatTable,
};
pub use config::OperatorConfig;
pub use field::ScalarField;

use std::fmt;
use std::sync::Arc;

use crate::error::{arg, domain, Result};
use crate::linalg::{self, Matrix};
use crate::manifold::{ManifoldModel, Point, SymBilinear, TangentVector};
use crate::scalar::Real;

/// `(x, r, ζ, A) ↦ F`, with `x` as ambient coordinates and `ζ`, `A` in the
/// canonical frame at `x`.
pub type EvalFn<T> = dyn Fn(&[T], T, &[T], &Matrix<T>) -> Result<T> + Send + Sync;

#[derive(Clone)]
pub struct OperatorSpec<T> {
    pub name: String,
    eval: Arc<EvalFn<T>>,
    /// Claimed: `A ≤ B ⇒ F(B) ≤ F(A)`.
    pub degenerate_elliptic: bool,
    /// Claimed: degenerate elliptic and nondecreasing in `r`.
    pub proper: bool,
    /// Claimed strong monotonicity constant; `0` when unknown.
    pub gamma: T,
    /// Whether `F` depends on the base point.
    pub x_dependent: bool,
}

impl<T> fmt::Debug for OperatorSpec<T>
where
    T: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorSpec")
            .field("name", &self.name)
            .field("degenerate_elliptic", &self.degenerate_elliptic)
            .field("proper", &self.proper)
            .field("gamma", &self.gamma)
            .field("x_dependent", &self.x_dependent)
            .finish()
    }
}

impl<T: Real> OperatorSpec<T> {
    /// Wraps an arbitrary evaluation function. All flags start as `false`.
    pub fn custom(
        name: impl Into<String>,
        eval: impl Fn(&[T], T, &[T], &Matrix<T>) -> Result<T> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            degenerate_elliptic: false,
            proper: false,
            gamma: T::zero(),
            x_dependent: true,
        }
    }

    pub fn with_flags(mut self, degenerate_elliptic: bool, proper: bool, gamma: T, x_dependent: bool) -> Self {
        self.degenerate_elliptic = degenerate_elliptic;
        self.proper = proper;
        self.gamma = gamma;
        self.x_dependent = x_dependent;
        self
    }

    /// Evaluates on frame coefficients.
    #[inline]
    pub fn eval_frame(&self, x: &[T], r: T, zeta: &[T], a: &Matrix<T>) -> Result<T> {
        (self.eval)(x, r, zeta, a)
    }

    /// Evaluates on intrinsic arguments based at `x`.
    pub fn eval(
        &self,
        m: &ManifoldModel<T>,
        x: &Point<T>,
        r: T,
        zeta: &TangentVector<T>,
        a: &SymBilinear<T>,
    ) -> Result<T> {
        if !zeta.base.same_as(x) || !a.base.same_as(x) {
            return Err(arg("ζ and A must be based at x"));
        }
        self.eval_frame(&x.coords, r, &m.to_frame(zeta), &a.matrix)
    }
}

fn eig<T: Real>(a: &Matrix<T>) -> Vec<T> {
    linalg::sym_eigenvalues(a)
}

/// `−trace(A)`.
pub fn neg_trace<T: Real>() -> OperatorSpec<T> {
    OperatorSpec::custom("neg_trace", |_, _, _, a: &Matrix<T>| Ok(-a.trace())).with_flags(true, true, T::zero(), false)
}

/// `−det₊(A)`, the negated product of the nonnegative eigenvalues.
///
/// Flagged degenerate elliptic as commonly claimed; note that the sampled
/// check refutes it (e.g. `diag(−1,2) ≤ diag(0.1,2)` raises `−det₊` from
/// `−2` to `−0.2`).
pub fn neg_detplus<T: Real>() -> OperatorSpec<T> {
    OperatorSpec::custom("neg_detplus", |_, _, _, a: &Matrix<T>| Ok(-detplus(a))).with_flags(true, true, T::zero(), false)
}

/// `−λ_min(A)`.
pub fn neg_min_eigenvalue<T: Real>() -> OperatorSpec<T> {
    OperatorSpec::custom("neg_min_eigenvalue", |_, _, _, a: &Matrix<T>| Ok(-linalg::min_eigenvalue(a)))
        .with_flags(true, true, T::zero(), false)
}

/// `−λ_max(A)`.
pub fn neg_max_eigenvalue<T: Real>() -> OperatorSpec<T> {
    OperatorSpec::custom("neg_max_eigenvalue", |_, _, _, a: &Matrix<T>| Ok(-linalg::max_eigenvalue(a)))
        .with_flags(true, true, T::zero(), false)
}

/// `S(x)·r`.
pub fn scalar_term<T: Real>(s: ScalarField<T>) -> OperatorSpec<T> {
    let lower = s.constant_value();
    let proper = lower.map_or(false, |c| c >= T::zero());
    let gamma = lower.map_or(T::zero(), |c| c.max(T::zero()));
    let x_dependent = lower.is_none();
    OperatorSpec::custom(format!("scalar_term({s})"), move |x, r, _, _| Ok(s.eval(x) * r))
        .with_flags(true, proper, gamma, x_dependent)
}

/// `F = r`.
pub fn value<T: Real>() -> OperatorSpec<T> {
    OperatorSpec::custom("value", |_, r, _, _| Ok(r)).with_flags(true, true, T::one(), false)
}

/// `−f(x)`, a source term.
pub fn source<T: Real>(f: ScalarField<T>) -> OperatorSpec<T> {
    let x_dependent = f.constant_value().is_none();
    OperatorSpec::custom(format!("source({f})"), move |x, _, _, _| Ok(-f.eval(x))).with_flags(true, true, T::zero(), x_dependent)
}

/// `−a(x)·trace(A)`; degenerate elliptic when `a ≥ 0`.
pub fn weighted_neg_trace<T: Real>(a: ScalarField<T>) -> OperatorSpec<T> {
    let x_dependent = a.constant_value().is_none();
    OperatorSpec::custom(format!("weighted_neg_trace({a})"), move |x, _, _, m: &Matrix<T>| Ok(-a.eval(x) * m.trace()))
        .with_flags(true, true, T::zero(), x_dependent)
}

fn combine<T: Real>(
    name: &str,
    ops: Vec<OperatorSpec<T>>,
    gamma: T,
    fold: impl Fn(T, T) -> T + Send + Sync + 'static,
) -> Result<OperatorSpec<T>> {
    if ops.is_empty() {
        return Err(arg("a combinator needs at least one operator"));
    }
    let names: Vec<String> = ops.iter().map(|o| o.name.clone()).collect();
    let de = ops.iter().all(|o| o.degenerate_elliptic);
    let proper = ops.iter().all(|o| o.proper);
    let xd = ops.iter().any(|o| o.x_dependent);
    let fns: Vec<Arc<EvalFn<T>>> = ops.into_iter().map(|o| o.eval).collect();
    Ok(OperatorSpec::custom(format!("{name}({})", names.join(", ")), move |x, r, z, a| {
        let mut acc = fns[0](x, r, z, a)?;
        for f in &fns[1..] {
            acc = fold(acc, f(x, r, z, a)?);
        }
        Ok(acc)
    })
    .with_flags(de, proper, gamma, xd))
}

pub fn sum<T: Real>(ops: Vec<OperatorSpec<T>>) -> Result<OperatorSpec<T>> {
    let gamma = ops.iter().fold(T::zero(), |g, o| g + o.gamma);
    combine("sum", ops, gamma, |a, b| a + b)
}

pub fn max<T: Real>(ops: Vec<OperatorSpec<T>>) -> Result<OperatorSpec<T>> {
    let gamma = ops.iter().map(|o| o.gamma).fold(T::infinity(), T::min);
    combine("max", ops, gamma, T::max)
}

pub fn min<T: Real>(ops: Vec<OperatorSpec<T>>) -> Result<OperatorSpec<T>> {
    let gamma = ops.iter().map(|o| o.gamma).fold(T::infinity(), T::min);
    combine("min", ops, gamma, T::min)
}

/// `c·F` for `c ≥ 0`.
pub fn scaled<T: Real>(c: T, op: OperatorSpec<T>) -> Result<OperatorSpec<T>> {
    if !(c >= T::zero()) {
        return Err(arg("scaling factor must be nonnegative"));
    }
    let inner = op.eval.clone();
    Ok(OperatorSpec::custom(format!("scaled({}, {})", c.to_f64_lossy(), op.name), move |x, r, z, a| {
        Ok(c * inner(x, r, z, a)?)
    })
    .with_flags(op.degenerate_elliptic, op.proper, c * op.gamma, op.x_dependent))
}

/// `g ∘ F` for a nondecreasing `g`; the flags of `F` carry over, `γ` does not.
pub fn compose<T: Real>(
    name: &str,
    g: impl Fn(T) -> T + Send + Sync + 'static,
    op: OperatorSpec<T>,
) -> OperatorSpec<T> {
    let inner = op.eval.clone();
    OperatorSpec::custom(format!("{name}({})", op.name), move |x, r, z, a| Ok(g(inner(x, r, z, a)?)))
        .with_flags(op.degenerate_elliptic, op.proper, T::zero(), op.x_dependent)
}

/// Exponents of the max-type example operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Example53Exponents {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    pub k: u32,
}

impl Default for Example53Exponents {
    fn default() -> Self {
        Self { p: 1, q: 0, r: 1, k: 0 }
    }
}

/// `max{ r − λ₁(A)‖ζ‖^p − (tr A)^{2q+1}‖ζ‖^{r′} − det₊(A)^{2k+1} f(x)², r − g(x) }`.
pub fn example_5_3<T: Real>(f: ScalarField<T>, g: ScalarField<T>) -> OperatorSpec<T> {
    example_5_3_with(f, g, Example53Exponents::default())
}

pub fn example_5_3_with<T: Real>(f: ScalarField<T>, g: ScalarField<T>, e: Example53Exponents) -> OperatorSpec<T> {
    let name = format!("example_5_3({f}, {g})");
    OperatorSpec::custom(name, move |x, r, z, a: &Matrix<T>| {
        let nz = linalg::norm(z);
        let ev = eig(a);
        let lam1 = ev[0];
        let fx = f.eval(x);
        let first = r
            - lam1 * nz.powi(e.p as i32)
            - a.trace().powi(2 * e.q as i32 + 1) * nz.powi(e.r as i32)
            - detplus_of(&ev).powi(2 * e.k as i32 + 1) * fx * fx;
        Ok(first.max(r - g.eval(x)))
    })
    .with_flags(true, true, T::zero(), true)
}

/// `S(x) r − S′ r^{(n+2)/(n−2)} − 4(n−1)/(n−2) · trace(A)`.
///
/// Proper with `γ = min S` for constant `S > 0` and `S′ ≤ 0` (on `r ≥ 0`).
/// For `r < 0` with a non-integer exponent the evaluation is a domain error.
pub fn yamabe<T: Real>(n: usize, s: ScalarField<T>, s_prime: T) -> Result<OperatorSpec<T>> {
    if n < 3 {
        return Err(arg("the Yamabe operator needs n ≥ 3"));
    }
    let num = n + 2;
    let den = n - 2;
    let integer_power = (num % den == 0).then(|| (num / den) as i32);
    let p = T::from_usize_lossy(num) / T::from_usize_lossy(den);
    let c = T::lit(4.0) * T::from_usize_lossy(n - 1) / T::from_usize_lossy(den);
    let s_const = s.constant_value();
    let proper = s_const.map_or(false, |v| v > T::zero()) && s_prime <= T::zero();
    let gamma = if proper { s_const.unwrap_or_else(T::zero) } else { T::zero() };
    let x_dependent = s_const.is_none();
    let name = format!("yamabe(n={n}, S={s}, S'={})", s_prime.to_f64_lossy());
    Ok(OperatorSpec::custom(name, move |x, r, _, a: &Matrix<T>| {
        let pow = match integer_power {
            Some(k) => r.powi(k),
            None if r >= T::zero() => r.powf(p),
            None => return Err(domain("negative value with a non-integer Yamabe exponent")),
        };
        Ok(s.eval(x) * r - s_prime * pow - c * a.trace())
    })
    .with_flags(true, proper, gamma, x_dependent))
}

fn detplus_of<T: Real>(eigenvalues: &[T]) -> T {
    eigenvalues.iter().filter(|&&l| l >= T::zero()).fold(T::one(), |p, &l| p * l)
}
