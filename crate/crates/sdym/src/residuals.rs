//! Curvature residuals and their structural restrictions.
//!
//! The curvature of a connection set, F_ik = ∂ᵢA_k − ∂ₖAᵢ + [A_k, Aᵢ], is
//! the master object: the self-dual system is the vanishing of the three
//! components {F₁₂, F₃₄, F₄₁ − F₃₂}, its three-coordinate and triple-field
//! restrictions drop structurally absent terms, and the catalogued
//! reductions identify curvature entries with scalar equation residuals
//! through invertible constant maps.  Every identity here is checked
//! off-shell: it holds for arbitrary sampled fields, not just solutions, so
//! a single random draw is a complete test of the algebra.

use num_complex::Complex64;
use thiserror::Error;

use crate::algebra::determinant;
use crate::connections::{
    build_spin_connection, build_zakharov_connection, ConnectionError, ConnectionSet,
    CoordinateRole, GaugeTag, SpinField,
};
use crate::equations::{
    pde_residual, EquationError, EquationId, EquationParams, FieldMap,
};
use crate::fields::{DerivativeScheme, FieldError, MatrixField, ScalarField};

/// Scale floor protecting relative norms of identically-zero systems.
pub const RESIDUAL_SCALE_FLOOR: f64 = 1e-14;

/// Errors from residual evaluation.
#[derive(Debug, Error)]
pub enum ResidualError {
    /// Underlying field operation failed.
    #[error(transparent)]
    Field(#[from] FieldError),
    /// Underlying connection operation failed.
    #[error(transparent)]
    Connection(#[from] ConnectionError),
    /// Underlying scalar-equation evaluation failed.
    #[error(transparent)]
    Equation(#[from] EquationError),
    /// A coordinate has the time role but the evaluator has no time data.
    #[error("coordinate ξ{0} has the time role, which this evaluator does not support")]
    TimeRole(usize),
    /// The requested gauge-restricted form does not match the connection.
    #[error("form requires gauge {required:?}, connection is tagged {actual:?}")]
    GaugeMismatch { required: &'static str, actual: GaugeTag },
    /// A named reduction is not in the catalogue.
    #[error("unknown reduction '{0}' (known: zakharov, m1-spin)")]
    UnknownReduction(String),
    /// A required field is missing from the map.
    #[error("reduction '{reduction}' requires field '{field}'")]
    MissingField { reduction: &'static str, field: &'static str },
}

/// A named matrix-valued residual with the largest term norm as its scale.
#[derive(Debug, Clone)]
pub struct MatrixResidual {
    /// Component label within its system.
    pub name: String,
    /// The residual field itself.
    pub field: MatrixField,
    /// Largest L² norm among the summed terms.
    pub scale: f64,
}

impl MatrixResidual {
    /// L² norm of the residual.
    pub fn l2(&self) -> f64 {
        self.field.l2_norm()
    }

    /// Max norm of the residual.
    pub fn linf(&self) -> f64 {
        self.field.max_norm()
    }

    /// Residual L² relative to the largest term.
    pub fn relative(&self) -> f64 {
        self.l2() / self.scale.max(RESIDUAL_SCALE_FLOOR)
    }
}

/// Largest residual L² across a system of matrix residuals, relative to the
/// largest term scale across the same system (see
/// [`crate::equations::system_relative`] for the rationale).
pub fn matrix_system_relative(components: &[MatrixResidual]) -> f64 {
    let worst = components.iter().map(|c| c.l2()).fold(0.0, f64::max);
    let scale = components.iter().map(|c| c.scale).fold(RESIDUAL_SCALE_FLOOR, f64::max);
    worst / scale
}

/// Accumulates a matrix residual as a signed sum of terms, tracking the
/// largest term norm.  Terms are folded strictly left to right so that
/// gauge-restricted forms that skip structurally-zero terms reproduce the
/// general form bit for bit.
pub(crate) struct MAccum {
    sum: MatrixField,
    scale: f64,
    started: bool,
}

impl MAccum {
    pub(crate) fn new(grid: &crate::fields::Grid, dim: usize) -> Self {
        Self { sum: MatrixField::zeros(grid, dim), scale: 0.0, started: false }
    }

    pub(crate) fn push(mut self, term: &MatrixField, sign: f64) -> Result<Self, ResidualError> {
        self.scale = self.scale.max(term.l2_norm());
        let signed =
            if sign < 0.0 { term.scale(Complex64::new(-1.0, 0.0)) } else { term.clone() };
        self.sum = if self.started { self.sum.add(&signed)? } else { signed };
        self.started = true;
        Ok(self)
    }

    pub(crate) fn add(self, term: &MatrixField) -> Result<Self, ResidualError> {
        self.push(term, 1.0)
    }

    pub(crate) fn sub(self, term: &MatrixField) -> Result<Self, ResidualError> {
        self.push(term, -1.0)
    }

    pub(crate) fn finish(self, name: impl Into<String>) -> MatrixResidual {
        MatrixResidual { name: name.into(), field: self.sum, scale: self.scale }
    }
}

/// Curvature component F_ik = ∂ᵢA_k − ∂ₖAᵢ + [A_k, Aᵢ] of a connection set,
/// with zero-based coordinate indices i, k.
pub fn curvature(conn: &ConnectionSet, i: usize, k: usize) -> Result<MatrixResidual, ResidualError> {
    let di_ak = conn.xi_derivative(i, k)?;
    let dk_ai = conn.xi_derivative(k, i)?;
    let bracket = conn.potential(k).commutator(conn.potential(i))?;
    MAccum::new(conn.grid(), conn.dim())
        .add(&di_ak)?
        .sub(&dk_ai)?
        .add(&bracket)
        .map(|acc| acc.finish(format!("F{}{}", i + 1, k + 1)))
}

/// The three curvature components whose vanishing is the self-dual system.
#[derive(Debug, Clone)]
pub struct SdymResidual {
    /// F₁₂.
    pub f12: MatrixResidual,
    /// F₃₄.
    pub f34: MatrixResidual,
    /// F₄₁ − F₃₂.
    pub f41_minus_f32: MatrixResidual,
}

impl SdymResidual {
    /// The three components in catalogue order.
    pub fn components(&self) -> [&MatrixResidual; 3] {
        [&self.f12, &self.f34, &self.f41_minus_f32]
    }

    /// Worst per-component relative residual.
    pub fn max_relative(&self) -> f64 {
        self.components().iter().map(|c| c.relative()).fold(0.0, f64::max)
    }
}

/// Evaluate the self-dual system {F₁₂, F₃₄, F₄₁ − F₃₂} on a connection set.
pub fn sdym_residual(conn: &ConnectionSet) -> Result<SdymResidual, ResidualError> {
    let f12 = curvature(conn, 0, 1)?;
    let f34 = curvature(conn, 2, 3)?;
    // F₄₁ − F₃₂ term by term: ∂₄A₁ − ∂₁A₄ + [A₁,A₄] − ∂₃A₂ + ∂₂A₃ − [A₂,A₃].
    let f41_minus_f32 = MAccum::new(conn.grid(), conn.dim())
        .add(&conn.xi_derivative(3, 0)?)?
        .sub(&conn.xi_derivative(0, 3)?)?
        .add(&conn.potential(0).commutator(conn.potential(3))?)?
        .sub(&conn.xi_derivative(2, 1)?)?
        .add(&conn.xi_derivative(1, 2)?)?
        .sub(&conn.potential(1).commutator(conn.potential(2))?)?
        .finish("F41-F32");
    Ok(SdymResidual { f12, f34, f41_minus_f32 })
}

/// Gauge-restricted forms of the three-coordinate self-dual system
/// (coordinate ξ₃ absent).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThreeDForm {
    /// All terms kept.
    General,
    /// A₄ ≡ 0: its derivative and bracket terms are dropped.
    A4Zero,
    /// A₄ ≡ 0 and A₃ constant: additionally drops ∂ₜA₃.
    A4ZeroA3Const,
    /// A₁ ≡ A₂ ≡ 0 (spin gauge): F₁₂ is dropped entirely and only the
    /// surviving terms of the remaining two components are formed.
    SpinGauge,
}

/// Evaluate the three-coordinate self-dual system on a connection whose
/// third coordinate is absent, in the given structural form.
///
/// The general form is the full system {F₁₂, F₃₄, F₄₁ − F₃₂} with every
/// ∂₃ term vanishing through the coordinate role.  The restricted forms
/// skip terms that their gauge makes structurally zero; on power-of-two
/// grids the skipped terms are exact zero fields, so restricted and general
/// forms agree bit for bit — which the tests assert.
pub fn sdym3_residual(
    conn: &ConnectionSet,
    form: ThreeDForm,
) -> Result<Vec<MatrixResidual>, ResidualError> {
    if conn.roles()[2] != CoordinateRole::Absent {
        return Err(ResidualError::GaugeMismatch {
            required: "a connection with coordinate ξ3 absent",
            actual: conn.gauge(),
        });
    }
    let gauge_ok = match form {
        ThreeDForm::General => true,
        ThreeDForm::A4Zero => {
            matches!(conn.gauge(), GaugeTag::A4Zero | GaugeTag::A4ZeroA3Const)
        }
        ThreeDForm::A4ZeroA3Const => conn.gauge() == GaugeTag::A4ZeroA3Const,
        ThreeDForm::SpinGauge => conn.gauge() == GaugeTag::A1A2Zero,
    };
    if !gauge_ok {
        return Err(ResidualError::GaugeMismatch {
            required: match form {
                ThreeDForm::A4Zero => "A4Zero (or stricter)",
                ThreeDForm::A4ZeroA3Const => "A4ZeroA3Const",
                ThreeDForm::SpinGauge => "A1A2Zero",
                ThreeDForm::General => unreachable!(),
            },
            actual: conn.gauge(),
        });
    }

    let grid = conn.grid();
    let dim = conn.dim();
    let mut out = Vec::with_capacity(3);

    // e1 = F₁₂ = ∂₁A₂ − ∂₂A₁ + [A₂,A₁]  (absent in the spin gauge).
    if form != ThreeDForm::SpinGauge {
        out.push(
            MAccum::new(grid, dim)
                .add(&conn.xi_derivative(0, 1)?)?
                .sub(&conn.xi_derivative(1, 0)?)?
                .add(&conn.potential(1).commutator(conn.potential(0))?)?
                .finish("e1"),
        );
    }

    // e2 = F₃₄ with ∂₃ absent: −∂₄A₃ + [A₄,A₃]; the bracket drops when
    // A₄ ≡ 0.
    let e2 = match form {
        ThreeDForm::General | ThreeDForm::SpinGauge => MAccum::new(grid, dim)
            .sub(&conn.xi_derivative(3, 2)?)?
            .add(&conn.potential(3).commutator(conn.potential(2))?)?
            .finish("e2"),
        ThreeDForm::A4Zero | ThreeDForm::A4ZeroA3Const => MAccum::new(grid, dim)
            .sub(&conn.xi_derivative(3, 2)?)?
            .finish("e2"),
    };
    out.push(e2);

    // e3 = F₄₁ − F₃₂ with ∂₃ absent:
    // ∂₄A₁ − ∂₁A₄ + [A₁,A₄] + ∂₂A₃ − [A₂,A₃].
    let e3 = match form {
        ThreeDForm::General => MAccum::new(grid, dim)
            .add(&conn.xi_derivative(3, 0)?)?
            .sub(&conn.xi_derivative(0, 3)?)?
            .add(&conn.potential(0).commutator(conn.potential(3))?)?
            .add(&conn.xi_derivative(1, 2)?)?
            .sub(&conn.potential(1).commutator(conn.potential(2))?)?
            .finish("e3"),
        ThreeDForm::A4Zero => MAccum::new(grid, dim)
            .add(&conn.xi_derivative(3, 0)?)?
            .add(&conn.xi_derivative(1, 2)?)?
            .sub(&conn.potential(1).commutator(conn.potential(2))?)?
            .finish("e3"),
        ThreeDForm::A4ZeroA3Const => MAccum::new(grid, dim)
            .add(&conn.xi_derivative(3, 0)?)?
            .sub(&conn.potential(1).commutator(conn.potential(2))?)?
            .finish("e3"),
        ThreeDForm::SpinGauge => MAccum::new(grid, dim)
            .sub(&conn.xi_derivative(0, 3)?)?
            .add(&conn.xi_derivative(1, 2)?)?
            .finish("e3"),
    };
    out.push(e3);
    Ok(out)
}

/// Derivative of a loose matrix field along a coordinate role (absent
/// coordinates differentiate to zero; the time role is not available here).
fn role_derivative(
    f: &MatrixField,
    role: CoordinateRole,
    coordinate: usize,
) -> Result<MatrixField, ResidualError> {
    match role {
        CoordinateRole::Axis(ax) => Ok(f.derivative(ax, DerivativeScheme::Spectral)?),
        CoordinateRole::Absent => Ok(MatrixField::zeros(f.grid(), f.dim())),
        CoordinateRole::Time => Err(ResidualError::TimeRole(coordinate + 1)),
    }
}

/// Quadruple-field system with matrix-valued multipliers A, C:
///
/// q1 = A·∂₃D − C·∂₄B + ∂₂B − ∂₁D + [B, D]
/// q2 = ∂₂A − C·∂₄A + [A, D]
/// q3 = [A, C]
/// q4 = ∂₁C − A·∂₃C + [C, B]
pub fn mlxx_full(
    a: &MatrixField,
    b: &MatrixField,
    c: &MatrixField,
    d: &MatrixField,
    roles: [CoordinateRole; 4],
) -> Result<Vec<MatrixResidual>, ResidualError> {
    let grid = b.grid();
    let dim = b.dim();
    let q1 = MAccum::new(grid, dim)
        .add(&a.matmul(&role_derivative(d, roles[2], 2)?)?)?
        .sub(&c.matmul(&role_derivative(b, roles[3], 3)?)?)?
        .add(&role_derivative(b, roles[1], 1)?)?
        .sub(&role_derivative(d, roles[0], 0)?)?
        .add(&b.commutator(d)?)?
        .finish("q1");
    let q2 = MAccum::new(grid, dim)
        .add(&role_derivative(a, roles[1], 1)?)?
        .sub(&c.matmul(&role_derivative(a, roles[3], 3)?)?)?
        .add(&a.commutator(d)?)?
        .finish("q2");
    let q3 = MAccum::new(grid, dim).add(&a.commutator(c)?)?.finish("q3");
    let q4 = MAccum::new(grid, dim)
        .add(&role_derivative(c, roles[0], 0)?)?
        .sub(&a.matmul(&role_derivative(c, roles[2], 2)?)?)?
        .add(&c.commutator(b)?)?
        .finish("q4");
    Ok(vec![q1, q2, q3, q4])
}

/// Scalar-multiplier form of [`mlxx_full`]: with A = αI and C = γI constant
/// only the first component survives,
/// q1 = α·∂₃D − γ·∂₄B + ∂₂B − ∂₁D + [B, D].
pub fn mlxx_scalar(
    alpha: Complex64,
    gamma: Complex64,
    b: &MatrixField,
    d: &MatrixField,
    roles: [CoordinateRole; 4],
) -> Result<Vec<MatrixResidual>, ResidualError> {
    let q1 = MAccum::new(b.grid(), b.dim())
        .add(&role_derivative(d, roles[2], 2)?.scale(alpha))?
        .sub(&role_derivative(b, roles[3], 3)?.scale(gamma))?
        .add(&role_derivative(b, roles[1], 1)?)?
        .sub(&role_derivative(d, roles[0], 0)?)?
        .add(&b.commutator(d)?)?
        .finish("q1");
    Ok(vec![q1])
}

/// Three-coordinate restriction of [`mlxx_scalar`]: the ∂₃ term is dropped
/// structurally, q1 = −γ·∂₄B + ∂₂B − ∂₁D + [B, D].
pub fn mlxx_three(
    gamma: Complex64,
    b: &MatrixField,
    d: &MatrixField,
    roles: [CoordinateRole; 4],
) -> Result<Vec<MatrixResidual>, ResidualError> {
    let q1 = MAccum::new(b.grid(), b.dim())
        .sub(&role_derivative(b, roles[3], 3)?.scale(gamma))?
        .add(&role_derivative(b, roles[1], 1)?)?
        .sub(&role_derivative(d, roles[0], 0)?)?
        .add(&b.commutator(d)?)?
        .finish("q1");
    Ok(vec![q1])
}

/// Triple-field curvature system on three coordinates:
///
/// c1 = ∂₂A − ∂₁B + [A, B]
/// c2 = ∂₃A − ∂₁C + [A, C]
/// c3 = ∂₂C − ∂₃B + [C, B]
pub fn mlxii_residual(
    a: &MatrixField,
    b: &MatrixField,
    c: &MatrixField,
    roles: [CoordinateRole; 3],
) -> Result<Vec<MatrixResidual>, ResidualError> {
    let grid = a.grid();
    let dim = a.dim();
    let c1 = MAccum::new(grid, dim)
        .add(&role_derivative(a, roles[1], 1)?)?
        .sub(&role_derivative(b, roles[0], 0)?)?
        .add(&a.commutator(b)?)?
        .finish("c1");
    let c2 = MAccum::new(grid, dim)
        .add(&role_derivative(a, roles[2], 2)?)?
        .sub(&role_derivative(c, roles[0], 0)?)?
        .add(&a.commutator(c)?)?
        .finish("c2");
    let c3 = MAccum::new(grid, dim)
        .add(&role_derivative(c, roles[1], 1)?)?
        .sub(&role_derivative(b, roles[2], 2)?)?
        .add(&c.commutator(b)?)?
        .finish("c3");
    Ok(vec![c1, c2, c3])
}

/// The triple-field system extended by a scalar-potential field Ψ:
///
/// b1 = c1 + ∂₃Ψ + [Ψ, C]
/// b2 = c2 + ∂₂Ψ + [Ψ, B]
/// b3 = c3 + ∂₁Ψ + [Ψ, A]
///
/// At Ψ ≡ 0 this reproduces [`mlxii_residual`] bit for bit.
pub fn bogomolny_residual(
    a: &MatrixField,
    b: &MatrixField,
    c: &MatrixField,
    psi: &MatrixField,
    roles: [CoordinateRole; 3],
) -> Result<Vec<MatrixResidual>, ResidualError> {
    let base = mlxii_residual(a, b, c, roles)?;
    let mut out = Vec::with_capacity(3);
    for (component, (partner, role_idx)) in
        base.into_iter().zip([(c, 2usize), (b, 1usize), (a, 0usize)])
    {
        let scale0 = component.scale;
        let name = component.name.replace('c', "b");
        let extended = MAccum { sum: component.field, scale: scale0, started: true }
            .add(&role_derivative(psi, roles[role_idx], role_idx)?)?
            .add(&psi.commutator(partner)?)?
            .finish(name);
        out.push(extended);
    }
    Ok(out)
}

/// How a reduced scalar system sits inside the curvature components: the
/// identities that vanish off-shell, the entry-by-entry matches between the
/// remaining component and mapped scalar residuals, and the determinant of
/// the constant matrix mapping scalar residuals to curvature entries.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    /// Which reduction was checked.
    pub reduction: String,
    /// Curvature components that must vanish identically off-shell.
    pub identities: Vec<MatrixResidual>,
    /// Entry-by-entry agreement between curvature and mapped residuals.
    pub matches: Vec<MatchReport>,
    /// Determinant of the scalar-residual-to-entry map (nonzero ⇔ the
    /// curvature components carry exactly the scalar system).
    pub map_determinant: Complex64,
}

impl EquivalenceReport {
    /// Worst relative norm among the vanishing identities.
    pub fn max_identity_relative(&self) -> f64 {
        self.identities.iter().map(|c| c.relative()).fold(0.0, f64::max)
    }

    /// Worst relative mismatch among the entry matches.
    pub fn max_match_relative(&self) -> f64 {
        self.matches.iter().map(|m| m.relative()).fold(0.0, f64::max)
    }
}

/// One curvature entry compared against its mapped scalar combination.
#[derive(Debug, Clone)]
pub struct MatchReport {
    /// Entry label, e.g. "F12(0,1)".
    pub name: String,
    /// L² norm of (entry − mapped combination).
    pub difference: f64,
    /// Larger of the two sides' L² norms.
    pub scale: f64,
}

impl MatchReport {
    /// Mismatch relative to the larger side.
    pub fn relative(&self) -> f64 {
        self.difference / self.scale.max(RESIDUAL_SCALE_FLOOR)
    }
}

fn match_entry(
    name: impl Into<String>,
    entry: &ScalarField,
    mapped: &ScalarField,
) -> Result<MatchReport, ResidualError> {
    let difference = entry.sub(mapped)?.norms().l2;
    let scale = entry.norms().l2.max(mapped.norms().l2);
    Ok(MatchReport { name: name.into(), difference, scale })
}

/// Check that a catalogued reduction's curvature components carry exactly
/// its scalar residuals, off-shell, on the supplied fields.
///
/// Known reductions: `"zakharov"` (fields `phi`, `phi_t`, `v`; parameter
/// r² = ±1) and `"m1-spin"` (fields `s1..s3`, `s1_t..s3_t`, `u`; parameter
/// r = ±1 taken from `params.r2`).
pub fn reduction_equivalence(
    reduction: &str,
    fields: &FieldMap,
    params: &EquationParams,
) -> Result<EquivalenceReport, ResidualError> {
    match reduction {
        "zakharov" => zakharov_equivalence(fields, params),
        "m1-spin" => m1_spin_equivalence(fields, params),
        other => Err(ResidualError::UnknownReduction(other.to_string())),
    }
}

fn require<'m>(
    fields: &'m FieldMap,
    reduction: &'static str,
    name: &'static str,
) -> Result<&'m ScalarField, ResidualError> {
    fields.get_opt(name).ok_or(ResidualError::MissingField { reduction, field: name })
}

/// Zakharov reduction: with a = i(φ − r²φ̄), b = φ + r²φ̄ the component F₁₂
/// carries the system through
///   F₁₂(0,1) = −(Z₁ + r²Z̄₁),  F₁₂(0,2) = i(Z₁ − r²Z̄₁),  F₁₂(1,2) = Z₂,
/// while F₃₄ and F₄₁ − F₃₂ vanish identically for arbitrary fields.
fn zakharov_equivalence(
    fields: &FieldMap,
    params: &EquationParams,
) -> Result<EquivalenceReport, ResidualError> {
    const RED: &str = "zakharov";
    let phi = require(fields, RED, "phi")?;
    let phi_t = require(fields, RED, "phi_t")?;
    let v = require(fields, RED, "v")?;
    let r2 = params.r2;
    let conn = build_zakharov_connection(phi, phi_t, v, r2)?;
    let sd = sdym_residual(&conn)?;

    let scalars = pde_residual(EquationId::Zakharov, fields, params)?;
    let z1 = &scalars[0].field;
    let z2 = &scalars[1].field;
    let z1c = z1.conj();
    let r2c = Complex64::new(r2, 0.0);
    let i = Complex64::new(0.0, 1.0);

    let combo01 = z1.add(&z1c.scale(r2c))?.scale(Complex64::new(-1.0, 0.0));
    let combo02 = z1.sub(&z1c.scale(r2c))?.scale(i);
    let combo12 = z2.clone();

    let f12 = &sd.f12.field;
    let matches = vec![
        match_entry("F12(0,1)", f12.entry(0, 1), &combo01)?,
        match_entry("F12(0,2)", f12.entry(0, 2), &combo02)?,
        match_entry("F12(1,2)", f12.entry(1, 2), &combo12)?,
    ];

    // Map (Z₁, Z̄₁, Z₂) → (entry(0,1), entry(0,2), entry(1,2)).
    let neg1 = Complex64::new(-1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let map = [neg1, -r2c, zero, i, -i * r2c, zero, zero, zero, one];
    let map_determinant = determinant(3, &map);

    Ok(EquivalenceReport {
        reduction: RED.to_string(),
        identities: vec![sd.f34, sd.f41_minus_f32],
        matches,
        map_determinant,
    })
}

/// Spin reduction: with t = −(s₃, r s₂, r s₁) the component F₄₁ − F₃₂
/// carries the flow through
///   (F₄₁−F₃₂)(0,1) = r E₁,  (F₄₁−F₃₂)(0,2) = −r E₂,  (F₄₁−F₃₂)(1,2) = E₃,
/// while F₁₂ and F₃₄ vanish identically for arbitrary unit spins and u.
fn m1_spin_equivalence(
    fields: &FieldMap,
    params: &EquationParams,
) -> Result<EquivalenceReport, ResidualError> {
    const RED: &str = "m1-spin";
    let s1 = require(fields, RED, "s1")?;
    let s2 = require(fields, RED, "s2")?;
    let s3 = require(fields, RED, "s3")?;
    let s1_t = require(fields, RED, "s1_t")?;
    let s2_t = require(fields, RED, "s2_t")?;
    let s3_t = require(fields, RED, "s3_t")?;
    let u = require(fields, RED, "u")?;
    let r = params.r2;

    let spin = SpinField::new([s1.clone(), s2.clone(), s3.clone()])?;
    let s_t = [s1_t.clone(), s2_t.clone(), s3_t.clone()];
    let conn = build_spin_connection(&spin, &s_t, u, r)?;
    let sd = sdym_residual(&conn)?;

    let scalars = pde_residual(EquationId::M1Spin, fields, params)?;
    let e1 = &scalars[0].field;
    let e2 = &scalars[1].field;
    let e3 = &scalars[2].field;
    let rc = Complex64::new(r, 0.0);

    let m = &sd.f41_minus_f32.field;
    let matches = vec![
        match_entry("F41-F32(0,1)", m.entry(0, 1), &e1.scale(rc))?,
        match_entry("F41-F32(0,2)", m.entry(0, 2), &e2.scale(-rc))?,
        match_entry("F41-F32(1,2)", m.entry(1, 2), e3)?,
    ];

    // Map (E₁, E₂, E₃) → (entry(0,1), entry(0,2), entry(1,2)).
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let map = [rc, zero, zero, zero, -rc, zero, zero, zero, one];
    let map_determinant = determinant(3, &map);

    Ok(EquivalenceReport {
        reduction: RED.to_string(),
        identities: vec![sd.f12, sd.f34],
        matches,
        map_determinant,
    })
}
