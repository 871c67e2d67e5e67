//! Polynomial-in-λ Lax pairs and their zero-curvature residuals.
//!
//! A pair of matrix pencils U(λ) = Σⱼ Uⱼ λʲ and V(λ) = Σⱼ Vⱼ λʲ on a 2-d
//! grid (x = axis 0, y = axis 1), together with a scalar flow polynomial
//! a(λ), defines the zero-curvature form
//!
//! ```text
//! R(λ) = ∂ₜU − a(λ) ∂_y U − ∂ₓV + [U, V],
//! ```
//!
//! again polynomial in λ.  Each builder below packages the pencil of one
//! reduced system so that the λ-coefficients of R collapse to linear
//! combinations of that system's scalar residuals.  These are algebraic
//! identities in the sampled fields — they hold for *arbitrary* smooth data,
//! not merely for solutions — so checking them verifies the pencil algebra
//! itself, with the equations entering only through their residuals.
//!
//! The module also carries the quadratic two-operator pencil of the
//! four-coordinate self-dual system, the scalar operator identity behind the
//! KP flow, the gauge map linking the hierarchy system to the
//! derivative-coupling system, and rational spectral-parameter profiles
//! whose drift identities close pointwise.

use num_complex::Complex64;
use thiserror::Error;

use crate::algebra::{pauli1, pauli2, pauli3, ComplexMatrix};
use crate::connections::{ConnectionError, ConnectionSet};
use crate::equations::{
    reconstruct_m22q_potentials, EquationError, FieldMap, ResidualComponent,
};
use crate::fields::{DerivativeScheme, FieldError, Grid, MatrixField, ScalarField};
use crate::residuals::{MAccum, MatrixResidual, ResidualError};
use crate::vector3::{self, Vec3Field};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn im(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

/// Errors from pencil assembly and evaluation.
#[derive(Debug, Error)]
pub enum LaxError {
    /// Field-level failure (grid mismatch, derivative precondition, ...).
    #[error(transparent)]
    Field(#[from] FieldError),
    /// Failure inside a scalar residual evaluation.
    #[error(transparent)]
    Equation(#[from] EquationError),
    /// Failure inside a connection operation.
    #[error(transparent)]
    Connection(#[from] ConnectionError),
    /// Failure while accumulating matrix residuals.
    #[error(transparent)]
    Residual(#[from] ResidualError),
    /// Structurally invalid input.
    #[error("invalid input for {context}: {detail}")]
    BadParameter {
        /// Operation that rejected the input.
        context: &'static str,
        /// What was wrong with it.
        detail: String,
    },
}

// ---------------------------------------------------------------------------
// The pencil type and its zero-curvature residual.
// ---------------------------------------------------------------------------

/// A Lax pair with polynomial λ-dependence.
///
/// Coefficients are stored in ascending λ-powers; `u_t` holds the
/// λ-coefficients of ∂ₜU assembled from the supplied time-derivative fields,
/// so the residual needs no time axis on the grid.
#[derive(Debug, Clone)]
pub struct LaxPair {
    /// Which reduction the pencil encodes.
    pub label: &'static str,
    /// λ-coefficients of U.
    pub u: Vec<MatrixField>,
    /// λ-coefficients of ∂ₜU (same length as `u`).
    pub u_t: Vec<MatrixField>,
    /// λ-coefficients of V.
    pub v: Vec<MatrixField>,
    /// Coefficients of the scalar flow polynomial a(λ).
    pub a: Vec<Complex64>,
}

impl LaxPair {
    /// Degree of the zero-curvature residual polynomial.
    pub fn residual_degree(&self) -> usize {
        let n_u = self.u.len();
        let mut deg = n_u.saturating_sub(1);
        if !self.a.is_empty() {
            deg = deg.max(self.a.len() - 1 + n_u.saturating_sub(1));
        }
        if !self.v.is_empty() {
            deg = deg.max(self.v.len() - 1).max(n_u.saturating_sub(1) + self.v.len() - 1);
        }
        deg
    }
}

/// λ-coefficients of R(λ) = ∂ₜU − a(λ)∂_yU − ∂ₓV + [U, V], ascending.
///
/// Exactly zero coefficients of a(λ) contribute no term at all, so a pencil
/// specialised by zeroing parameters reproduces the specialised form bit for
/// bit.
pub fn zero_curvature_residual(pair: &LaxPair) -> Result<Vec<MatrixResidual>, LaxError> {
    let n_u = pair.u.len();
    if n_u == 0 {
        return Err(LaxError::BadParameter {
            context: "zero_curvature_residual",
            detail: "the pencil U has no coefficients".into(),
        });
    }
    if pair.u_t.len() != n_u {
        return Err(LaxError::BadParameter {
            context: "zero_curvature_residual",
            detail: format!("U has {} coefficients but U_t has {}", n_u, pair.u_t.len()),
        });
    }
    let grid = pair.u[0].grid().clone();
    if grid.ndim() < 2 {
        return Err(LaxError::BadParameter {
            context: "zero_curvature_residual",
            detail: "the pencil needs x and y axes (a grid with at least 2 axes)".into(),
        });
    }
    let dim = pair.u[0].dim();
    let n_v = pair.v.len();

    let u_y = pair
        .u
        .iter()
        .map(|f| f.derivative(1, DerivativeScheme::Spectral))
        .collect::<Result<Vec<_>, _>>()?;
    let v_x = pair
        .v
        .iter()
        .map(|f| f.derivative(0, DerivativeScheme::Spectral))
        .collect::<Result<Vec<_>, _>>()?;

    let zero = Complex64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(pair.residual_degree() + 1);
    for m in 0..=pair.residual_degree() {
        let mut acc = MAccum::new(&grid, dim);
        if m < n_u {
            acc = acc.add(&pair.u_t[m])?;
        }
        for (j, &aj) in pair.a.iter().enumerate() {
            if aj == zero || m < j {
                continue;
            }
            let k = m - j;
            if k < n_u {
                acc = acc.sub(&u_y[k].scale(aj))?;
            }
        }
        if m < n_v {
            acc = acc.sub(&v_x[m])?;
        }
        for j in 0..n_u.min(m + 1) {
            let k = m - j;
            if k < n_v {
                acc = acc.add(&pair.u[j].commutator(&pair.v[k])?)?;
            }
        }
        out.push(acc.finish(format!("lambda^{m}")));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Constant matrices and small assembly helpers.
// ---------------------------------------------------------------------------

fn sigma3_field(grid: &Grid) -> MatrixField {
    MatrixField::constant(grid, &pauli3())
}

/// Off-diagonal 2×2 matrix field [[0, upper], [lower, 0]].
fn off_diagonal(upper: &ScalarField, lower: &ScalarField) -> Result<MatrixField, LaxError> {
    let grid = upper.grid();
    let zero = ScalarField::zeros(grid);
    Ok(MatrixField::from_entries(
        2,
        vec![zero.clone(), upper.clone(), lower.clone(), zero],
    )?)
}

// ---------------------------------------------------------------------------
// Pencil builders.
// ---------------------------------------------------------------------------

/// Pencil of the (2+1) Zakharov system.
///
/// U = (iλ/2)σ₃ + G with G = [[0, φ], [−r²φ̄, 0]], a(λ) = λ, and
/// V = i(G_y − ½vI)σ₃.  The residual grades as
///
/// * λ²: exactly zero (the leading coefficient is constant),
/// * λ¹: zero bit for bit — the flow and commutator terms cancel,
/// * λ⁰: entries (−iZ₁, −ir²Z̄₁) off the diagonal and (i/2)Z₂σ₃ on it,
///
/// for the scalar residuals Z₁ = iφ_t − φ_xy − vφ, Z₂ = v_x − 2r²(|φ|²)_y
/// and real v.
pub fn build_ze_lax(
    phi: &ScalarField,
    phi_t: &ScalarField,
    v: &ScalarField,
    r2: f64,
) -> Result<LaxPair, LaxError> {
    let grid = phi.grid().clone();
    let g = off_diagonal(phi, &phi.conj().scale(c(-r2)))?;
    let g_t = off_diagonal(phi_t, &phi_t.conj().scale(c(-r2)))?;
    let g_y = g.derivative(1, DerivativeScheme::Spectral)?;

    let ident = ComplexMatrix::identity(2).expect("2x2 identity");
    let half_v = MatrixField::constant(&grid, &ident).scale_by(&v.scale(c(0.5)))?;
    let v0 = g_y.sub(&half_v)?.matmul(&sigma3_field(&grid))?.scale(I);

    Ok(LaxPair {
        label: "zakharov",
        u: vec![g, sigma3_field(&grid).scale(im(0.5))],
        u_t: vec![g_t, MatrixField::zeros(&grid, 2)],
        v: vec![v0],
        a: vec![c(0.0), c(1.0)],
    })
}

/// Pencil of the (2+1) spin flow.
///
/// U = (iλ/2)S with S = s⃗·σ⃗, a(λ) = λ, and V = (iλ/2)(s⃗×s⃗_y + u s⃗)·σ⃗.
/// The residual grades as
///
/// * λ²: −(i/2)(s⃗·s⃗_y)(s⃗·σ⃗), which vanishes for unit spins,
/// * λ¹: (i/2)E⃗·σ⃗ with E⃗ = s⃗_t − (s⃗×s⃗_y + u s⃗)_x,
/// * λ⁰: exactly zero (every term carries λ).
pub fn build_mi_lax(
    s: &Vec3Field,
    s_t: &Vec3Field,
    u: &ScalarField,
) -> Result<LaxPair, LaxError> {
    let grid = s[0].grid().clone();
    let sigma = [pauli1(), pauli2(), pauli3()];
    let as_su2 = |v: &Vec3Field| -> Result<MatrixField, FieldError> {
        MatrixField::combine(&grid, &[(&v[0], &sigma[0]), (&v[1], &sigma[1]), (&v[2], &sigma[2])])
    };

    let s_y = vector3::derivative(s, 1, DerivativeScheme::Spectral)?;
    let flux = vector3::add(&vector3::cross(s, &s_y)?, &vector3::scale_field(s, u)?)?;

    let zeros = MatrixField::zeros(&grid, 2);
    Ok(LaxPair {
        label: "m1_spin",
        u: vec![zeros.clone(), as_su2(s)?.scale(im(0.5))],
        u_t: vec![zeros.clone(), as_su2(s_t)?.scale(im(0.5))],
        v: vec![zeros, as_su2(&flux)?.scale(im(0.5))],
        a: vec![c(0.0), c(1.0)],
    })
}

/// Pencil of the derivative-coupling system with coefficients (c, d).
///
/// U = i[(cλ² + dλ)σ₃ + (2cλ + d)G] with G = [[0, q], [p, 0]],
/// a(λ) = 2(cλ² + dλ), and V = B₂λ² + B₁λ + B₀ with
///
/// ```text
/// B₂ = −2ic²vσ₃,
/// B₁ = −2icdvσ₃ + 2cσ₃G_y − 4ic²vG,
/// B₀ = −(i/2)d²vσ₃ + dσ₃G_y − 2icdvG.
/// ```
///
/// The residual grades as λ⁴ = λ³ = 0, λ² = 2ic²Z_vσ₃,
/// λ¹ = 2cZ_q·e₁₂ + 2cZ_p·e₂₁ + 2icdZ_vσ₃ and
/// λ⁰ = dZ_q·e₁₂ + dZ_p·e₂₁ + (i/2)d²Z_vσ₃, where (Z_q, Z_p, Z_v) are the
/// system's scalar residuals.
pub fn build_m3q_lax(
    q: &ScalarField,
    p: &ScalarField,
    v: &ScalarField,
    q_t: &ScalarField,
    p_t: &ScalarField,
    cc: f64,
    dd: f64,
) -> Result<LaxPair, LaxError> {
    let grid = q.grid().clone();
    let g = off_diagonal(q, p)?;
    let g_t = off_diagonal(q_t, p_t)?;
    let g_y = g.derivative(1, DerivativeScheme::Spectral)?;
    let sig3 = sigma3_field(&grid);

    let v_sig3 = sig3.scale_by(v)?;
    let v_g = g.scale_by(v)?;
    let sig3_gy = sig3.matmul(&g_y)?;

    let u0 = g.scale(im(dd));
    let u1 = sig3.scale(im(dd)).add(&g.scale(im(2.0 * cc)))?;
    let u2 = sig3.scale(im(cc));

    let b2 = v_sig3.scale(im(-2.0 * cc * cc));
    let b1 = v_sig3
        .scale(im(-2.0 * cc * dd))
        .add(&sig3_gy.scale(c(2.0 * cc)))?
        .add(&v_g.scale(im(-4.0 * cc * cc)))?;
    let b0 = v_sig3
        .scale(im(-0.5 * dd * dd))
        .add(&sig3_gy.scale(c(dd)))?
        .add(&v_g.scale(im(-2.0 * cc * dd)))?;

    Ok(LaxPair {
        label: "m3q",
        u: vec![u0, u1, u2],
        u_t: vec![g_t.scale(im(dd)), g_t.scale(im(2.0 * cc)), MatrixField::zeros(&grid, 2)],
        v: vec![b0, b1, b2],
        a: vec![c(0.0), c(2.0 * dd), c(2.0 * cc)],
    })
}

/// Pencil of the hierarchy flow: the derivative-coupling pencil with d = 0.
///
/// The restriction is structural — zero coefficients of a(λ) drop out of the
/// residual term by term — so this pencil's residuals reproduce
/// [`build_m3q_lax`] at d = 0 bit for bit.
pub fn build_strachan_lax(
    q: &ScalarField,
    p: &ScalarField,
    v: &ScalarField,
    q_t: &ScalarField,
    p_t: &ScalarField,
    cc: f64,
) -> Result<LaxPair, LaxError> {
    let mut pair = build_m3q_lax(q, p, v, q_t, p_t, cc, 0.0)?;
    pair.label = "strachan";
    Ok(pair)
}

/// Pencil of the hierarchy system with two potentials.
///
/// U = −i(λ² − pq/4)σ₃ + λQ with Q = [[0, q], [−p, 0]], a(λ) = 2λ², and
/// V = B₂λ² + B₁λ + B₀ with
///
/// ```text
/// B₂ = (i/2)v₁σ₃,
/// B₁ = iσ₃Q_y − ½v₁Q,
/// B₀ = [¼v₂ − (i/8)pqv₁]σ₃.
/// ```
///
/// The residual grades as λ⁴ = λ³ = 0, λ² = −(i/2)Z_v1σ₃,
/// λ¹ = −iZ_q·e₁₂ + iZ_p·e₂₁ and
/// λ⁰ = [¼pZ_q + ¼qZ_p − ¼Z_v2 − (i/8)pqZ_v1]σ₃, where
/// (Z_q, Z_p, Z_v1, Z_v2) are the system's scalar residuals.
pub fn build_m22q_lax(
    q: &ScalarField,
    p: &ScalarField,
    v1: &ScalarField,
    v2: &ScalarField,
    q_t: &ScalarField,
    p_t: &ScalarField,
) -> Result<LaxPair, LaxError> {
    let grid = q.grid().clone();
    let big_q = off_diagonal(q, &p.scale(c(-1.0)))?;
    let big_q_t = off_diagonal(q_t, &p_t.scale(c(-1.0)))?;
    let big_q_y = big_q.derivative(1, DerivativeScheme::Spectral)?;
    let sig3 = sigma3_field(&grid);

    let pq = p.mul(q)?;
    let pq_t = p_t.mul(q)?.add(&p.mul(q_t)?)?;

    let u0 = sig3.scale_by(&pq)?.scale(im(0.25));
    let u2 = sig3.scale(im(-1.0));

    let b2 = sig3.scale_by(v1)?.scale(im(0.5));
    let b1 = sig3.matmul(&big_q_y)?.scale(I).add(&big_q.scale_by(v1)?.scale(c(-0.5)))?;
    let b0_scalar = v2.scale(c(0.25)).sub(&pq.mul(v1)?.scale(im(0.125)))?;
    let b0 = sig3.scale_by(&b0_scalar)?;

    Ok(LaxPair {
        label: "m22q",
        u: vec![u0, big_q, u2],
        u_t: vec![
            sig3.scale_by(&pq_t)?.scale(im(0.25)),
            big_q_t,
            MatrixField::zeros(&grid, 2),
        ],
        v: vec![b0, b1, b2],
        a: vec![c(0.0), c(0.0), c(2.0)],
    })
}

// ---------------------------------------------------------------------------
// The two-operator pencil of the four-coordinate system.
// ---------------------------------------------------------------------------

/// Zero-curvature residual of the two-operator pencil
/// V₁ = A₁ − λA₃, V₂ = A₂ − λA₄:
///
/// ```text
/// R(λ) = (∂₂ − λ∂₄)V₁ − (∂₁ − λ∂₃)V₂ + [V₁, V₂].
/// ```
///
/// Its coefficients reproduce the three curvature components of the
/// self-dual system bit for bit: λ⁰ = −F₁₂, λ¹ = −(F₄₁ − F₃₂), λ² = −F₃₄
/// (the terms are accumulated in the exact negated order the curvature
/// components use).
pub fn two_operator_residual(conn: &ConnectionSet) -> Result<Vec<MatrixResidual>, LaxError> {
    let grid = conn.grid();
    let dim = conn.dim();
    let lam0 = MAccum::new(grid, dim)
        .sub(&conn.xi_derivative(0, 1)?)?
        .add(&conn.xi_derivative(1, 0)?)?
        .sub(&conn.potential(1).commutator(conn.potential(0))?)?
        .finish("lambda^0");
    let lam1 = MAccum::new(grid, dim)
        .sub(&conn.xi_derivative(3, 0)?)?
        .add(&conn.xi_derivative(0, 3)?)?
        .sub(&conn.potential(0).commutator(conn.potential(3))?)?
        .add(&conn.xi_derivative(2, 1)?)?
        .sub(&conn.xi_derivative(1, 2)?)?
        .add(&conn.potential(1).commutator(conn.potential(2))?)?
        .finish("lambda^1");
    let lam2 = MAccum::new(grid, dim)
        .sub(&conn.xi_derivative(2, 3)?)?
        .add(&conn.xi_derivative(3, 2)?)?
        .sub(&conn.potential(3).commutator(conn.potential(2))?)?
        .finish("lambda^2");
    Ok(vec![lam0, lam1, lam2])
}

// ---------------------------------------------------------------------------
// The scalar operator identity of the KP flow.
// ---------------------------------------------------------------------------

/// Apply L = α∂_y + ∂ₓ² + k to a test function.
fn kp_l_apply(
    k: &ScalarField,
    alpha: f64,
    f: &ScalarField,
) -> Result<ScalarField, FieldError> {
    let spectral = DerivativeScheme::Spectral;
    f.derivative(1, spectral)?
        .scale(c(alpha))
        .add(&f.derivative(0, spectral)?.derivative(0, spectral)?)?
        .add(&k.mul(f)?)
}

/// Apply B = 4∂ₓ³ + 6k∂ₓ + 3(k_x − αm₃) to a test function.
fn kp_b_apply(
    k: &ScalarField,
    m3: &ScalarField,
    alpha: f64,
    f: &ScalarField,
) -> Result<ScalarField, FieldError> {
    let spectral = DerivativeScheme::Spectral;
    let f_x = f.derivative(0, spectral)?;
    let f_xxx = f_x.derivative(0, spectral)?.derivative(0, spectral)?;
    let mult = k.derivative(0, spectral)?.scale(c(3.0)).sub(&m3.scale(c(3.0 * alpha)))?;
    f_xxx
        .scale(c(4.0))
        .add(&k.mul(&f_x)?.scale(c(6.0)))?
        .add(&mult.mul(f)?)
}

/// Residual of the operator identity behind the KP flow, applied to an
/// arbitrary test function ψ:
///
/// ```text
/// (∂ₜL − [L, B]) ψ = (Z_k + 3α(Z_m)_x) ψ + 6α Z_m ψ_x,
/// ```
///
/// with L = α∂_y + ∂ₓ² + k, B = 4∂ₓ³ + 6k∂ₓ + 3(k_x − αm₃),
/// Z_k = k_t + 6kk_x + k_xxx + 3α²(m₃)_y and Z_m = (m₃)_x − k_y.  The
/// identity holds for arbitrary fields k, k_t, m₃ and test functions ψ; the
/// returned component is the difference of the two sides.
pub fn kp_lax_residual(
    k: &ScalarField,
    k_t: &ScalarField,
    m3: &ScalarField,
    alpha: f64,
    psi: &ScalarField,
) -> Result<ResidualComponent, LaxError> {
    let spectral = DerivativeScheme::Spectral;
    let lb = kp_l_apply(k, alpha, &kp_b_apply(k, m3, alpha, psi)?)?;
    let bl = kp_b_apply(k, m3, alpha, &kp_l_apply(k, alpha, psi)?)?;
    let kt_psi = k_t.mul(psi)?;

    let k_x = k.derivative(0, spectral)?;
    let z_k = k_t
        .add(&k.mul(&k_x)?.scale(c(6.0)))?
        .add(&k_x.derivative(0, spectral)?.derivative(0, spectral)?)?
        .add(&m3.derivative(1, spectral)?.scale(c(3.0 * alpha * alpha)))?;
    let z_m = m3.derivative(0, spectral)?.sub(&k.derivative(1, spectral)?)?;
    let rhs = z_k
        .add(&z_m.derivative(0, spectral)?.scale(c(3.0 * alpha)))?
        .mul(psi)?
        .add(&z_m.mul(&psi.derivative(0, spectral)?)?.scale(c(6.0 * alpha)))?;

    let field = kt_psi.sub(&lb)?.add(&bl)?.sub(&rhs)?;
    let scale = [&kt_psi, &lb, &bl, &rhs].iter().map(|f| f.norms().l2).fold(0.0, f64::max);
    Ok(ResidualComponent { name: "operator_closure".into(), field, scale })
}

// ---------------------------------------------------------------------------
// Gauge map from the two-potential hierarchy system to the hierarchy flow.
// ---------------------------------------------------------------------------

/// Gauge phase θ = ½∂ₓ⁻¹(pq).
///
/// With `mean_subtract` false the product pq must be exactly x-mean-free
/// (e.g. q and p drawn with positive-x spectra); with true the x-mean is
/// projected out first.
pub fn gauge_phase(
    q: &ScalarField,
    p: &ScalarField,
    mean_subtract: bool,
) -> Result<ScalarField, LaxError> {
    Ok(p.mul(q)?.scale(c(0.5)).antiderivative_x(mean_subtract)?)
}

/// Diagonal gauge factor diag(e^{−iθ/2}, e^{iθ/2}).
///
/// Its determinant is identically one; for real θ it is unitary.
pub fn gauge_factor(theta: &ScalarField) -> MatrixField {
    let grid = theta.grid();
    let upper = theta.map(|t| (im(-0.5) * t).exp());
    let lower = theta.map(|t| (im(0.5) * t).exp());
    let zero = ScalarField::zeros(grid);
    MatrixField::from_entries(2, vec![upper, zero.clone(), zero, lower])
        .expect("entries share the grid")
}

/// The gauge image of a two-potential hierarchy configuration.
///
/// Produced by [`m22q_to_strachan`]: the mapped fields (q̃, p̃, ṽ) =
/// (qe^{−iθ}, pe^{iθ}, v₁) feed the hierarchy flow with coupling E = 1, and
/// `q_t`/`p_t` carry the chain-rule time derivatives.
#[derive(Debug, Clone)]
pub struct GaugeEquivalence {
    /// Gauge phase θ = ½∂ₓ⁻¹(pq).
    pub theta: ScalarField,
    /// Time derivative θ_t = ½∂ₓ⁻¹(p_t q + p q_t).
    pub theta_t: ScalarField,
    /// First reconstructed potential v₁ = ∂ₓ⁻¹(pq)_y.
    pub v1: ScalarField,
    /// Second reconstructed potential v₂ = ∂ₓ⁻¹(p_xy q − p q_xy).
    pub v2: ScalarField,
    /// Mapped field q̃ = q e^{−iθ}.
    pub q: ScalarField,
    /// Mapped field p̃ = p e^{iθ}.
    pub p: ScalarField,
    /// Mapped time derivative q̃_t = (q_t − iθ_t q) e^{−iθ}.
    pub q_t: ScalarField,
    /// Mapped time derivative p̃_t = (p_t + iθ_t p) e^{iθ}.
    pub p_t: ScalarField,
}

impl GaugeEquivalence {
    /// The mapped configuration as named fields of the hierarchy flow
    /// (q, p, v, q_t, p_t) with v = v₁.
    pub fn strachan_fields(&self) -> FieldMap {
        let mut fields = FieldMap::new();
        fields.insert("q", self.q.clone());
        fields.insert("p", self.p.clone());
        fields.insert("v", self.v1.clone());
        fields.insert("q_t", self.q_t.clone());
        fields.insert("p_t", self.p_t.clone());
        fields
    }

    /// The diagonal gauge factor diag(e^{−iθ/2}, e^{iθ/2}) for this phase.
    pub fn factor(&self) -> MatrixField {
        gauge_factor(&self.theta)
    }
}

/// Map a two-potential hierarchy configuration to the hierarchy flow.
///
/// The potentials are reconstructed from (q, p) — the map's residual
/// identity needs them consistent with the constraint components — and the
/// phase is θ = ½∂ₓ⁻¹(pq), so all x-antiderivatives must be exact: draw q
/// and p with positive-x spectra (then every product involved is exactly
/// x-mean-free).
///
/// The pointwise product is invariant, q̃p̃ = qp, and the scalar residuals
/// map as
///
/// ```text
/// S_q(q̃, p̃, ṽ) = e^{−iθ}(Z_q + qΔ),   S_p(q̃, p̃, ṽ) = e^{iθ}(Z_p − pΔ),
/// ```
///
/// with Δ = θ_t + (i/2)v₂ + ¼pqv₁ = −(i/2)∂ₓ⁻¹(pZ_q + qZ_p) (see
/// [`gauge_defect`]).  In particular on-shell data stays on-shell.
pub fn m22q_to_strachan(
    q: &ScalarField,
    p: &ScalarField,
    q_t: &ScalarField,
    p_t: &ScalarField,
) -> Result<GaugeEquivalence, LaxError> {
    let (v1, v2) = reconstruct_m22q_potentials(q, p, false)?;
    let theta = gauge_phase(q, p, false)?;
    let theta_t =
        p_t.mul(q)?.add(&p.mul(q_t)?)?.scale(c(0.5)).antiderivative_x(false)?;

    let phase_minus = theta.map(|t| (-I * t).exp());
    let phase_plus = theta.map(|t| (I * t).exp());

    let q_m = q.mul(&phase_minus)?;
    let p_m = p.mul(&phase_plus)?;
    let q_m_t = q_t.sub(&theta_t.mul(q)?.scale(I))?.mul(&phase_minus)?;
    let p_m_t = p_t.add(&theta_t.mul(p)?.scale(I))?.mul(&phase_plus)?;

    Ok(GaugeEquivalence { theta, theta_t, v1, v2, q: q_m, p: p_m, q_t: q_m_t, p_t: p_m_t })
}

/// Residual defect Δ = −(i/2)∂ₓ⁻¹(pZ_q + qZ_p) carried by the gauge map.
///
/// The combination pZ_q + qZ_p must be exactly x-mean-free, which holds for
/// positive-x draws.
pub fn gauge_defect(
    q: &ScalarField,
    p: &ScalarField,
    z_q: &ScalarField,
    z_p: &ScalarField,
) -> Result<ScalarField, LaxError> {
    Ok(p.mul(z_q)?.add(&q.mul(z_p)?)?.antiderivative_x(false)?.scale(im(-0.5)))
}

// ---------------------------------------------------------------------------
// Rational spectral-parameter profiles and their drift identities.
// ---------------------------------------------------------------------------

/// Coefficients of a rational spectral-parameter profile.
#[derive(Debug, Clone, Copy)]
pub struct SpectralDrift {
    /// Coefficient pairing the first and third coordinates.
    pub n1: f64,
    /// Constant offset in the numerator.
    pub n3: f64,
    /// Constant offset in the denominator.
    pub n4: f64,
    /// Coefficient pairing the second and fourth coordinates.
    pub m1: f64,
}

/// A non-constant spectral parameter on the four-coordinate space,
/// λ = (n₁ξ₃ + n₃ + m₁ξ₄) / (n₄ − n₁ξ₁ − m₁ξ₂), sampled on a 3-axis grid
/// covering (ξ₁, ξ₃, ξ₄) at a fixed slice ξ₂, with its four closed-form
/// partial derivatives.
#[derive(Debug, Clone)]
pub struct LambdaFull {
    /// The sampled profile.
    pub lambda: ScalarField,
    /// ∂λ/∂ξ₁ (closed form).
    pub d1: ScalarField,
    /// ∂λ/∂ξ₂ (closed form).
    pub d2: ScalarField,
    /// ∂λ/∂ξ₃ (closed form).
    pub d3: ScalarField,
    /// ∂λ/∂ξ₄ (closed form).
    pub d4: ScalarField,
}

/// Sample the four-coordinate profile and its derivatives.
///
/// Grid axes are (ξ₁, ξ₃, ξ₄); `xi2` fixes the remaining coordinate.  The
/// drift identities λ_{ξ₁} = λλ_{ξ₃} and λ_{ξ₂} = λλ_{ξ₄} then close
/// pointwise.  Rejects parameter choices whose denominator comes within
/// 10⁻⁶ of zero on the grid.
pub fn lambda_full(
    grid: &Grid,
    xi2: f64,
    drift: &SpectralDrift,
) -> Result<LambdaFull, LaxError> {
    if grid.ndim() != 3 {
        return Err(LaxError::BadParameter {
            context: "lambda_full",
            detail: format!("needs a 3-axis grid for (xi1, xi3, xi4), got {} axes", grid.ndim()),
        });
    }
    let den_at = |x1: f64| drift.n4 - drift.n1 * x1 - drift.m1 * xi2;
    for i in 0..grid.size(0) {
        let den = den_at(grid.coord(0, i));
        if den.abs() < 1e-6 {
            return Err(LaxError::BadParameter {
                context: "lambda_full",
                detail: format!("denominator {den:.3e} at xi1 = {} is too close to zero", grid.coord(0, i)),
            });
        }
    }
    let num_at = |x3: f64, x4: f64| drift.n1 * x3 + drift.n3 + drift.m1 * x4;
    let lambda =
        ScalarField::from_fn(grid, |pt| c(num_at(pt[1], pt[2]) / den_at(pt[0])));
    let d1 = ScalarField::from_fn(grid, |pt| {
        let den = den_at(pt[0]);
        c(drift.n1 * num_at(pt[1], pt[2]) / (den * den))
    });
    let d2 = ScalarField::from_fn(grid, |pt| {
        let den = den_at(pt[0]);
        c(drift.m1 * num_at(pt[1], pt[2]) / (den * den))
    });
    let d3 = ScalarField::from_fn(grid, |pt| c(drift.n1 / den_at(pt[0])));
    let d4 = ScalarField::from_fn(grid, |pt| c(drift.m1 / den_at(pt[0])));
    Ok(LambdaFull { lambda, d1, d2, d3, d4 })
}

/// Drift residuals R₁ = λ_{ξ₁} − λλ_{ξ₃} and R₂ = λ_{ξ₂} − λλ_{ξ₄} of a
/// sampled four-coordinate profile.
pub fn lambda_full_residuals(l: &LambdaFull) -> Result<Vec<ResidualComponent>, LaxError> {
    let r1_prod = l.lambda.mul(&l.d3)?;
    let r2_prod = l.lambda.mul(&l.d4)?;
    let r1 = l.d1.sub(&r1_prod)?;
    let r2 = l.d2.sub(&r2_prod)?;
    Ok(vec![
        ResidualComponent {
            name: "R1".into(),
            scale: l.d1.norms().l2.max(r1_prod.norms().l2),
            field: r1,
        },
        ResidualComponent {
            name: "R2".into(),
            scale: l.d2.norms().l2.max(r2_prod.norms().l2),
            field: r2,
        },
    ])
}

/// The reduced-profile analogue on an (x, y) grid at a fixed time,
/// λ = (n₁y + n₃)/(n₄ − n₁t): constant in x, drifting as λ_t = λλ_y.
#[derive(Debug, Clone)]
pub struct LambdaReduced {
    /// The sampled profile (a function of y alone).
    pub lambda: ScalarField,
    /// ∂λ/∂x ≡ 0 (closed form).
    pub dx: ScalarField,
    /// ∂λ/∂y (closed form).
    pub dy: ScalarField,
    /// ∂λ/∂t (closed form).
    pub dt: ScalarField,
}

/// Sample the reduced profile at time `t` on a 2-axis grid (x, y).
pub fn lambda_reduced(
    grid: &Grid,
    t: f64,
    drift: &SpectralDrift,
) -> Result<LambdaReduced, LaxError> {
    if grid.ndim() != 2 {
        return Err(LaxError::BadParameter {
            context: "lambda_reduced",
            detail: format!("needs a 2-axis grid (x, y), got {} axes", grid.ndim()),
        });
    }
    let den = drift.n4 - drift.n1 * t;
    if den.abs() < 1e-6 {
        return Err(LaxError::BadParameter {
            context: "lambda_reduced",
            detail: format!("denominator {den:.3e} at t = {t} is too close to zero"),
        });
    }
    let num_at = |y: f64| drift.n1 * y + drift.n3;
    Ok(LambdaReduced {
        lambda: ScalarField::from_fn(grid, |pt| c(num_at(pt[1]) / den)),
        dx: ScalarField::zeros(grid),
        dy: ScalarField::from_fn(grid, |_| c(drift.n1 / den)),
        dt: ScalarField::from_fn(grid, |pt| c(drift.n1 * num_at(pt[1]) / (den * den))),
    })
}

/// Drift residual R = λ_t − λλ_y of a sampled reduced profile (its x-drift
/// is zero by construction and asserted separately via [`LambdaReduced::dx`]).
pub fn lambda_reduced_residual(l: &LambdaReduced) -> Result<ResidualComponent, LaxError> {
    let prod = l.lambda.mul(&l.dy)?;
    Ok(ResidualComponent {
        name: "Rt".into(),
        scale: l.dt.norms().l2.max(prod.norms().l2),
        field: l.dt.sub(&prod)?,
    })
}

/// Largest deviation of an interior fourth-order central difference along
/// `axis` from the supplied exact derivative.
///
/// The stencil f′(xᵢ) ≈ [f(xᵢ₋₂) − 8f(xᵢ₋₁) + 8f(xᵢ₊₁) − f(xᵢ₊₂)]/(12h)
/// is evaluated only where all five points lie inside the axis range
/// (`margin` ≥ 2 cells from each boundary), so non-periodic samples such as
/// the rational spectral profiles can be differenced without wrap-around.
pub fn central4_interior_deviation(
    f: &ScalarField,
    axis: usize,
    exact: &ScalarField,
    margin: usize,
) -> Result<f64, LaxError> {
    let grid = f.grid();
    if margin < 2 {
        return Err(LaxError::BadParameter {
            context: "central4_interior_deviation",
            detail: format!("margin must be at least 2, got {margin}"),
        });
    }
    if axis >= grid.ndim() {
        return Err(LaxError::BadParameter {
            context: "central4_interior_deviation",
            detail: format!("axis {axis} out of range for {} axes", grid.ndim()),
        });
    }
    if exact.grid() != grid {
        return Err(LaxError::Field(FieldError::GridMismatch));
    }
    let n = grid.size(axis);
    if n < 2 * margin + 1 {
        return Err(LaxError::BadParameter {
            context: "central4_interior_deviation",
            detail: format!("axis size {n} leaves no interior at margin {margin}"),
        });
    }
    let stride = grid.strides()[axis];
    let h = grid.spacing(axis);
    let data = f.data();
    let exact_data = exact.data();
    let mut worst = 0.0f64;
    for flat in 0..grid.total_points() {
        let i = grid.multi_index(flat)[axis];
        if i < margin || i + margin >= n {
            continue;
        }
        let stencil = (data[flat - 2 * stride] - data[flat + 2 * stride]
            + (data[flat + stride] - data[flat - stride]).scale(8.0))
            / (12.0 * h);
        worst = worst.max((stencil - exact_data[flat]).norm());
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Tests.
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connections::{build_spin_connection, build_zakharov_connection, SpinField};
    use crate::equations::{pde_residual, system_relative, EquationId, EquationParams};
    use crate::residuals::sdym_residual;
    use crate::sampling::FieldSampler;
    use std::f64::consts::TAU;

    fn grid2(n: usize) -> Grid {
        Grid::new(&[n, n], &[TAU, TAU]).expect("valid grid")
    }

    fn e01() -> ComplexMatrix {
        ComplexMatrix::from_rows(
            2,
            vec![c(0.0), c(1.0), c(0.0), c(0.0)],
        )
        .expect("2x2 matrix")
    }

    fn e10() -> ComplexMatrix {
        ComplexMatrix::from_rows(
            2,
            vec![c(0.0), c(0.0), c(1.0), c(0.0)],
        )
        .expect("2x2 matrix")
    }

    /// Relative difference between a graded residual coefficient and the
    /// matrix assembled from scalar residual components.
    fn map_mismatch(coefficient: &MatrixResidual, expected: &MatrixField) -> f64 {
        let diff = coefficient.field.sub(expected).expect("grids match");
        diff.l2_norm() / coefficient.scale.max(crate::residuals::RESIDUAL_SCALE_FLOOR)
    }

    #[test]
    fn zakharov_pencil_grades_into_the_scalar_system() {
        for (seed, r2) in [(0x1a0u64, 1.0), (0x1a1, -1.0)] {
            let grid = grid2(64);
            let mut smp = FieldSampler::new(seed);
            let phi = smp.complex_field(&grid, 0.45);
            let phi_t = smp.complex_field(&grid, 0.40);
            let v = smp.real_field(&grid, 0.50);

            let pair = build_ze_lax(&phi, &phi_t, &v, r2).expect("pencil builds");
            let res = zero_curvature_residual(&pair).expect("residual evaluates");
            assert_eq!(res.len(), 3, "quadratic residual polynomial");

            assert_eq!(
                res[2].l2(),
                0.0,
                "lambda^2 term differentiates a constant coefficient and must vanish exactly"
            );
            assert_eq!(
                res[1].l2(),
                0.0,
                "lambda^1 flow and commutator terms are the same bits and must cancel exactly"
            );

            let mut fields = FieldMap::new();
            fields.insert("phi", phi.clone());
            fields.insert("phi_t", phi_t.clone());
            fields.insert("v", v.clone());
            let params = EquationParams { r2, ..EquationParams::default() };
            let z = pde_residual(EquationId::Zakharov, &fields, &params).expect("residuals");

            let expected = MatrixField::combine(
                &grid,
                &[
                    (&z[0].field, &e01().scale(im(-1.0))),
                    (&z[0].field.conj(), &e10().scale(im(-r2))),
                    (&z[1].field, &pauli3().scale(im(0.5))),
                ],
            )
            .expect("assembly");
            let rel = map_mismatch(&res[0], &expected);
            assert!(
                rel < 1e-10,
                "lambda^0 must assemble the scalar residuals (r2 = {r2}, rel = {rel:.3e})"
            );
        }
    }

    #[test]
    fn spin_pencil_grades_into_the_flow_residual() {
        let grid = grid2(64);
        let mut smp = FieldSampler::new(0x1b0);
        let s = smp.unit_spin(&grid, 0.6);
        let s_t: Vec3Field = [
            smp.real_field(&grid, 0.4),
            smp.real_field(&grid, 0.3),
            smp.real_field(&grid, 0.35),
        ];
        let u = smp.real_field(&grid, 0.4);

        let pair = build_mi_lax(&s, &s_t, &u).expect("pencil builds");
        let res = zero_curvature_residual(&pair).expect("residual evaluates");
        assert_eq!(res.len(), 3, "quadratic residual polynomial");

        assert_eq!(res[0].l2(), 0.0, "every pencil term carries lambda, so lambda^0 is zero");
        assert!(
            res[2].relative() < 1e-9,
            "lambda^2 is -(i/2)(s.s_y)(s.sigma) and must vanish for unit spins, got {:.3e}",
            res[2].relative()
        );

        let mut fields = FieldMap::new();
        for (j, name) in ["s1", "s2", "s3"].iter().enumerate() {
            fields.insert(*name, s[j].clone());
            fields.insert(format!("{name}_t"), s_t[j].clone());
        }
        fields.insert("u", u.clone());
        let e = pde_residual(EquationId::M1Spin, &fields, &EquationParams::default())
            .expect("residuals");

        let expected = MatrixField::combine(
            &grid,
            &[
                (&e[0].field, &pauli1().scale(im(0.5))),
                (&e[1].field, &pauli2().scale(im(0.5))),
                (&e[2].field, &pauli3().scale(im(0.5))),
            ],
        )
        .expect("assembly");
        let rel = map_mismatch(&res[1], &expected);
        assert!(rel < 1e-10, "lambda^1 must equal (i/2) E.sigma, rel = {rel:.3e}");
    }

    #[test]
    fn derivative_coupling_pencil_grades_into_the_scalar_system() {
        let grid = grid2(64);
        let mut smp = FieldSampler::new(0x1c0);
        let q = smp.complex_field(&grid, 0.45);
        let p = smp.complex_field(&grid, 0.40);
        let v = smp.complex_field(&grid, 0.35);
        let q_t = smp.complex_field(&grid, 0.30);
        let p_t = smp.complex_field(&grid, 0.30);
        let (cc, dd) = (0.65, 0.40);

        let pair = build_m3q_lax(&q, &p, &v, &q_t, &p_t, cc, dd).expect("pencil builds");
        let res = zero_curvature_residual(&pair).expect("residual evaluates");
        assert_eq!(res.len(), 5, "quartic residual polynomial");

        assert_eq!(
            res[4].l2(),
            0.0,
            "lambda^4 differentiates a constant and commutes diagonal factors: exactly zero"
        );
        assert!(
            res[3].relative() < 1e-12,
            "lambda^3 cancels between flow and commutator terms, got {:.3e}",
            res[3].relative()
        );

        let mut fields = FieldMap::new();
        fields.insert("q", q.clone());
        fields.insert("p", p.clone());
        fields.insert("v", v.clone());
        fields.insert("q_t", q_t.clone());
        fields.insert("p_t", p_t.clone());
        let params = EquationParams { c: cc, d: dd, ..EquationParams::default() };
        let z = pde_residual(EquationId::M3q, &fields, &params).expect("residuals");

        let cases: [(usize, Complex64, Complex64, Complex64); 3] = [
            // (coefficient index, weight on Z_q / Z_p / Z_v)
            (2, c(0.0), c(0.0), im(2.0 * cc * cc)),
            (1, c(2.0 * cc), c(2.0 * cc), im(2.0 * cc * dd)),
            (0, c(dd), c(dd), im(0.5 * dd * dd)),
        ];
        for (idx, wq, wp, wv) in cases {
            let expected = MatrixField::combine(
                &grid,
                &[
                    (&z[0].field, &e01().scale(wq)),
                    (&z[1].field, &e10().scale(wp)),
                    (&z[2].field, &pauli3().scale(wv)),
                ],
            )
            .expect("assembly");
            let rel = map_mismatch(&res[idx], &expected);
            assert!(
                rel < 1e-10,
                "lambda^{idx} must assemble the scalar residuals, rel = {rel:.3e}"
            );
        }
    }

    #[test]
    fn hierarchy_pencil_is_the_derivative_coupling_pencil_at_d_zero_bitwise() {
        let grid = grid2(32);
        let mut smp = FieldSampler::new(0x1d0);
        let q = smp.complex_field(&grid, 0.45);
        let p = smp.complex_field(&grid, 0.40);
        let v = smp.complex_field(&grid, 0.35);
        let q_t = smp.complex_field(&grid, 0.30);
        let p_t = smp.complex_field(&grid, 0.30);
        let cc = 0.8;

        let restricted = build_strachan_lax(&q, &p, &v, &q_t, &p_t, cc).expect("builds");
        let general = build_m3q_lax(&q, &p, &v, &q_t, &p_t, cc, 0.0).expect("builds");
        assert_eq!(restricted.label, "strachan");
        assert_eq!(restricted.a, general.a, "flow polynomials must agree exactly");
        for (lhs, rhs) in restricted.u.iter().zip(&general.u) {
            assert_eq!(lhs.sub(rhs).expect("grids match").max_norm(), 0.0);
        }
        for (lhs, rhs) in restricted.v.iter().zip(&general.v) {
            assert_eq!(lhs.sub(rhs).expect("grids match").max_norm(), 0.0);
        }

        let res_r = zero_curvature_residual(&restricted).expect("residual");
        let res_g = zero_curvature_residual(&general).expect("residual");
        for (lhs, rhs) in res_r.iter().zip(&res_g) {
            assert_eq!(
                lhs.field.sub(&rhs.field).expect("grids match").max_norm(),
                0.0,
                "the d = 0 restriction must be structural, reproducing residuals bit for bit"
            );
        }
    }

    #[test]
    fn two_potential_pencil_grades_into_the_scalar_system() {
        let grid = grid2(64);
        let mut smp = FieldSampler::new(0x1e0);
        let q = smp.complex_field(&grid, 0.45);
        let p = smp.complex_field(&grid, 0.40);
        let v1 = smp.complex_field(&grid, 0.35);
        let v2 = smp.complex_field(&grid, 0.30);
        let q_t = smp.complex_field(&grid, 0.30);
        let p_t = smp.complex_field(&grid, 0.25);

        let pair = build_m22q_lax(&q, &p, &v1, &v2, &q_t, &p_t).expect("pencil builds");
        let res = zero_curvature_residual(&pair).expect("residual evaluates");
        assert_eq!(res.len(), 5, "quartic residual polynomial");

        assert_eq!(
            res[4].l2(),
            0.0,
            "lambda^4 differentiates a constant and commutes diagonal factors: exactly zero"
        );
        assert!(
            res[3].relative() < 1e-12,
            "lambda^3 cancels between flow and commutator terms, got {:.3e}",
            res[3].relative()
        );

        let mut fields = FieldMap::new();
        fields.insert("q", q.clone());
        fields.insert("p", p.clone());
        fields.insert("v1", v1.clone());
        fields.insert("v2", v2.clone());
        fields.insert("q_t", q_t.clone());
        fields.insert("p_t", p_t.clone());
        let z = pde_residual(EquationId::M22q, &fields, &EquationParams::default())
            .expect("residuals");

        // lambda^2 = -(i/2) Z_v1 sigma3.
        let expected2 = MatrixField::combine(&grid, &[(&z[2].field, &pauli3().scale(im(-0.5)))])
            .expect("assembly");
        let rel2 = map_mismatch(&res[2], &expected2);
        assert!(rel2 < 1e-10, "lambda^2 must be -(i/2) Zv1 sigma3, rel = {rel2:.3e}");

        // lambda^1 = -i Z_q e01 + i Z_p e10.
        let expected1 = MatrixField::combine(
            &grid,
            &[(&z[0].field, &e01().scale(im(-1.0))), (&z[1].field, &e10().scale(I))],
        )
        .expect("assembly");
        let rel1 = map_mismatch(&res[1], &expected1);
        assert!(rel1 < 1e-10, "lambda^1 must carry -iZq / +iZp, rel = {rel1:.3e}");

        // lambda^0 = [p Zq/4 + q Zp/4 - Zv2/4 - (i/8) pq Zv1] sigma3.
        let pq = p.mul(&q).expect("product");
        let diag = p
            .mul(&z[0].field)
            .expect("product")
            .scale(c(0.25))
            .add(&q.mul(&z[1].field).expect("product").scale(c(0.25)))
            .expect("sum")
            .sub(&z[2].field.mul(&pq).expect("product").scale(im(0.125)))
            .expect("sum")
            .sub(&z[3].field.scale(c(0.25)))
            .expect("sum");
        let expected0 =
            MatrixField::combine(&grid, &[(&diag, &pauli3())]).expect("assembly");
        let rel0 = map_mismatch(&res[0], &expected0);
        assert!(rel0 < 1e-10, "lambda^0 must assemble the diagonal combination, rel = {rel0:.3e}");
    }

    #[test]
    fn two_operator_pencil_reproduces_the_curvature_components_bitwise() {
        let grid = grid2(32);
        let mut smp = FieldSampler::new(0x1f0);

        // One connection per reduced gauge, both carrying a Time coordinate.
        let phi = smp.complex_field(&grid, 0.5);
        let phi_t = smp.complex_field(&grid, 0.4);
        let v = smp.real_field(&grid, 0.5);
        let zak = build_zakharov_connection(&phi, &phi_t, &v, 1.0).expect("connection");

        let s = smp.unit_spin(&grid, 0.5);
        let s_t: Vec3Field = [
            smp.real_field(&grid, 0.3),
            smp.real_field(&grid, 0.25),
            smp.real_field(&grid, 0.2),
        ];
        let u = smp.real_field(&grid, 0.4);
        let spin = build_spin_connection(
            &SpinField::new(s).expect("unit spin"),
            &s_t,
            &u,
            1.0,
        )
        .expect("connection");

        for conn in [zak, spin] {
            let pencil = two_operator_residual(&conn).expect("pencil residual");
            let curv = sdym_residual(&conn).expect("curvature");
            let pairs = [
                (&pencil[0], &curv.f12, "lambda^0 vs -F12"),
                (&pencil[1], &curv.f41_minus_f32, "lambda^1 vs -(F41-F32)"),
                (&pencil[2], &curv.f34, "lambda^2 vs -F34"),
            ];
            for (coeff, component, what) in pairs {
                let sum = coeff.field.add(&component.field).expect("grids match");
                assert_eq!(
                    sum.max_norm(),
                    0.0,
                    "{what}: the pencil coefficient must be the negated component bit for bit"
                );
            }
        }
    }

    #[test]
    fn kp_operator_identity_holds_off_shell() {
        let grid = Grid::new(&[64, 32], &[32.0, 16.0]).expect("valid grid");
        for (seed, alpha) in [(0x200u64, 1.0), (0x201, 1.3)] {
            let mut smp = FieldSampler::new(seed);
            let k = smp.real_field(&grid, 0.7);
            let k_t = smp.real_field(&grid, 0.3);
            let m3 = smp.real_field(&grid, 0.5);
            let psi = smp.complex_field(&grid, 1.0);

            let res = kp_lax_residual(&k, &k_t, &m3, alpha, &psi).expect("identity evaluates");
            assert!(
                res.relative() < 1e-11,
                "operator identity must close on arbitrary fields (alpha = {alpha}), got {:.3e}",
                res.relative()
            );
        }
    }

    #[test]
    fn gauge_map_sends_solutions_to_solutions() {
        let grid = grid2(128);
        let mut smp = FieldSampler::new(0x210);
        let q = smp.complex_field_positive_x_deep(&grid, 0.40);
        let p = smp.complex_field_positive_x_deep(&grid, 0.35);

        // Choose time derivatives that put the configuration on-shell:
        // with q_t = p_t = 0 the residual is i*0 + (spatial part), so
        // q_t := i * (spatial part) cancels it.
        let mut fields = FieldMap::new();
        fields.insert("q", q.clone());
        fields.insert("p", p.clone());
        fields.insert("q_t", ScalarField::zeros(&grid));
        fields.insert("p_t", ScalarField::zeros(&grid));
        let z0 = pde_residual(EquationId::M22q, &fields, &EquationParams::default())
            .expect("residuals");
        let q_t = z0[0].field.scale(I);
        let p_t = z0[1].field.scale(I);

        // Confirm the configuration is now on-shell.
        fields.insert("q_t", q_t.clone());
        fields.insert("p_t", p_t.clone());
        let z = pde_residual(EquationId::M22q, &fields, &EquationParams::default())
            .expect("residuals");
        assert!(system_relative(&z) < 1e-13, "constructed data must be on-shell");

        let ge = m22q_to_strachan(&q, &p, &q_t, &p_t).expect("gauge map");
        let mapped = pde_residual(
            EquationId::Strachan,
            &ge.strachan_fields(),
            &EquationParams { e: 1.0, ..EquationParams::default() },
        )
        .expect("mapped residuals");
        let rel = system_relative(&mapped);
        assert!(rel < 1e-9, "gauge image of a solution must solve the hierarchy flow, got {rel:.3e}");

        // The pointwise product q p is invariant under the map.
        let before = p.mul(&q).expect("product");
        let after = ge.p.mul(&ge.q).expect("product");
        let drift = after.sub(&before).expect("grids match").linf();
        assert!(
            drift < 1e-13 * before.linf().max(1.0),
            "q p must be pointwise invariant, drifted by {drift:.3e}"
        );

        // The gauge factor has unit determinant everywhere.
        let f = ge.factor();
        let det = f.entry(0, 0).mul(f.entry(1, 1)).expect("product");
        let det_err = det.map(|z| z - c(1.0)).linf();
        assert!(det_err < 1e-13, "gauge factor determinant must be one, off by {det_err:.3e}");
    }

    #[test]
    fn gauge_map_carries_residuals_by_the_defect_formula() {
        let grid = grid2(128);
        let mut smp = FieldSampler::new(0x220);
        let q = smp.complex_field_positive_x_deep(&grid, 0.40);
        let p = smp.complex_field_positive_x_deep(&grid, 0.35);
        let q_t = smp.complex_field_positive_x_deep(&grid, 0.30);
        let p_t = smp.complex_field_positive_x_deep(&grid, 0.30);

        let ge = m22q_to_strachan(&q, &p, &q_t, &p_t).expect("gauge map");

        let mut fields = FieldMap::new();
        fields.insert("q", q.clone());
        fields.insert("p", p.clone());
        fields.insert("q_t", q_t.clone());
        fields.insert("p_t", p_t.clone());
        fields.insert("v1", ge.v1.clone());
        fields.insert("v2", ge.v2.clone());
        let z = pde_residual(EquationId::M22q, &fields, &EquationParams::default())
            .expect("residuals");

        // The defect has a closed form in the potentials.
        let delta = gauge_defect(&q, &p, &z[0].field, &z[1].field).expect("defect");
        let pq = p.mul(&q).expect("product");
        let closed = ge
            .theta_t
            .add(&ge.v2.scale(im(0.5)))
            .expect("sum")
            .add(&pq.mul(&ge.v1).expect("product").scale(c(0.25)))
            .expect("sum");
        let delta_scale = delta.norms().l2.max(closed.norms().l2).max(1e-14);
        let agreement = delta.sub(&closed).expect("grids match").norms().l2 / delta_scale;
        assert!(
            agreement < 1e-10,
            "integral and closed forms of the defect must agree, got {agreement:.3e}"
        );

        // Mapped residuals follow the defect formula exactly, off-shell.
        let mapped = pde_residual(
            EquationId::Strachan,
            &ge.strachan_fields(),
            &EquationParams { e: 1.0, ..EquationParams::default() },
        )
        .expect("mapped residuals");
        let phase_minus = ge.theta.map(|t| (-I * t).exp());
        let phase_plus = ge.theta.map(|t| (I * t).exp());
        let predicted_q = z[0]
            .field
            .add(&q.mul(&delta).expect("product"))
            .expect("sum")
            .mul(&phase_minus)
            .expect("product");
        let predicted_p = z[1]
            .field
            .sub(&p.mul(&delta).expect("product"))
            .expect("sum")
            .mul(&phase_plus)
            .expect("product");
        for (actual, predicted, name) in
            [(&mapped[0], &predicted_q, "S_q"), (&mapped[1], &predicted_p, "S_p")]
        {
            let rel = actual.field.sub(predicted).expect("grids match").norms().l2
                / actual.scale.max(1e-14);
            assert!(rel < 1e-10, "{name} must follow the defect formula, got {rel:.3e}");
        }

        // The constraint residual is invariant: v = v1 and (pq)_y is shared.
        let rel_v = system_relative(&mapped[2..3].to_vec());
        assert!(rel_v < 1e-12, "mapped constraint residual must stay zero, got {rel_v:.3e}");
    }

    #[test]
    fn unitary_gauge_factor_for_conjugate_pairs() {
        let grid = grid2(64);
        let mut smp = FieldSampler::new(0x230);
        let q = smp.complex_field(&grid, 0.5);
        let p = q.conj();
        // pq = |q|^2 has an x-mean, so the phase needs explicit projection.
        let theta = gauge_phase(&q, &p, true).expect("phase");
        assert!(theta.max_imag() < 1e-14, "phase of a conjugate pair is real");
        let f = gauge_factor(&theta);
        let unit = f.matmul(&f.adjoint()).expect("product");
        let ident = MatrixField::constant(&grid, &ComplexMatrix::identity(2).expect("identity"));
        let dev = unit.sub(&ident).expect("grids match").max_norm();
        assert!(dev < 1e-14, "factor must be unitary for a real phase, off by {dev:.3e}");
    }

    #[test]
    fn four_coordinate_profile_drifts_along_both_pairings() {
        let grid = Grid::new(&[64, 8, 8], &[1.0, 1.0, 1.0]).expect("valid grid");
        let drift = SpectralDrift { n1: 0.3, n3: 0.7, n4: 2.0, m1: 0.2 };
        let l = lambda_full(&grid, 0.4, &drift).expect("profile samples");
        let res = lambda_full_residuals(&l).expect("residuals");
        for r in &res {
            assert!(
                r.relative() < 1e-12,
                "{} must close pointwise, got {:.3e}",
                r.name,
                r.relative()
            );
        }

        // Numerical differencing along each realized axis agrees with the
        // closed forms: genuinely fourth-order along xi1, exact (the stencil
        // is exact on affine functions) along xi3 and xi4.
        let dev1 = central4_interior_deviation(&l.lambda, 0, &l.d1, 2).expect("stencil");
        assert!(dev1 < 1e-6, "interior differencing along xi1 must confirm d1, off by {dev1:.3e}");
        let dev3 = central4_interior_deviation(&l.lambda, 1, &l.d3, 2).expect("stencil");
        assert!(dev3 < 1e-12, "differencing along xi3 must confirm d3, off by {dev3:.3e}");
        let dev4 = central4_interior_deviation(&l.lambda, 2, &l.d4, 2).expect("stencil");
        assert!(dev4 < 1e-12, "differencing along xi4 must confirm d4, off by {dev4:.3e}");
    }

    #[test]
    fn reduced_profile_is_x_constant_and_drifts_in_time() {
        let grid = Grid::new(&[16, 64], &[1.0, 1.0]).expect("valid grid");
        let drift = SpectralDrift { n1: 0.5, n3: 0.8, n4: 2.0, m1: 0.0 };
        let t0 = 0.3;
        let l = lambda_reduced(&grid, t0, &drift).expect("profile samples");

        assert_eq!(l.dx.linf(), 0.0, "closed-form x-derivative is zero");
        let dx_spectral = l.lambda.derivative(0, DerivativeScheme::Spectral).expect("derivative");
        assert_eq!(
            dx_spectral.norms().l2,
            0.0,
            "spectral x-derivative of an x-constant profile is exactly zero"
        );

        let res = lambda_reduced_residual(&l).expect("residual");
        assert!(res.relative() < 1e-14, "drift identity must close, got {:.3e}", res.relative());

        // Five-point differencing in time confirms the closed-form lambda_t.
        let dt = 1e-2;
        let sample = |j: i32| {
            lambda_reduced(&grid, t0 + f64::from(j) * dt, &drift).expect("profile samples").lambda
        };
        let stencil = sample(-2)
            .sub(&sample(2))
            .expect("grids")
            .add(&sample(1).sub(&sample(-1)).expect("grids").scale(c(8.0)))
            .expect("grids")
            .scale(c(1.0 / (12.0 * dt)));
        let dev = stencil.sub(&l.dt).expect("grids").linf();
        assert!(dev < 1e-10, "time differencing must confirm dt, off by {dev:.3e}");
    }

    #[test]
    fn degenerate_profiles_and_pencils_are_rejected() {
        let grid3 = Grid::new(&[16, 8, 8], &[1.0, 1.0, 1.0]).expect("valid grid");
        let singular = SpectralDrift { n1: 2.0, n3: 0.7, n4: 1.0, m1: 0.0 };
        assert!(
            matches!(lambda_full(&grid3, 0.0, &singular), Err(LaxError::BadParameter { .. })),
            "a denominator crossing zero on the grid must be rejected"
        );
        let grid2d = Grid::new(&[16, 16], &[1.0, 1.0]).expect("valid grid");
        assert!(
            matches!(lambda_full(&grid2d, 0.0, &singular), Err(LaxError::BadParameter { .. })),
            "the four-coordinate profile needs a 3-axis grid"
        );

        let zeros = MatrixField::zeros(&grid2d, 2);
        let pair = LaxPair {
            label: "broken",
            u: vec![zeros.clone()],
            u_t: vec![zeros.clone(), zeros],
            v: vec![],
            a: vec![],
        };
        assert!(
            matches!(zero_curvature_residual(&pair), Err(LaxError::BadParameter { .. })),
            "mismatched U and U_t lengths must be rejected"
        );
    }
}
