//! Scalar residual evaluators for the reduced (2+1)-dimensional systems.
//!
//! Every evaluator is off-shell: it takes sampled fields — with time
//! derivatives supplied explicitly as companion fields named `*_t` — and
//! returns the residual of each equation of the system as a field, together
//! with the largest term norm entering it so callers can judge relative
//! size.  Residuals vanish on exact solutions and measure the defect
//! otherwise; nothing here assumes the inputs solve anything.
//!
//! Auxiliary potentials that are fixed by an x-derivative constraint
//! (`v`, `u`, `m3`, …) may be omitted from the field map, in which case they
//! are reconstructed by the zero-mean antiderivative ∂ₓ⁻¹ of the constraint
//! right-hand side.  Potentials fixed by second-order constraints (the
//! Davey–Stewartson `v`, the Ishimori `u`) must always be supplied.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::fields::{DerivativeScheme, FieldError, Grid, ScalarField};
use crate::vector3::{self, Vec3Field};

/// Floor under residual scales so relative sizes stay finite.
pub const SCALE_FLOOR: f64 = 1e-14;

/// Reconstructed real potentials may carry at most this much imaginary dust.
pub const RECONSTRUCTION_REALITY_TOL: f64 = 1e-11;

/// Spin inputs must be unit length to this tolerance.
pub const SPIN_UNIT_TOL: f64 = 1e-8;

/// Errors from residual evaluation.
#[derive(Debug, Error)]
pub enum EquationError {
    /// A required field is absent from the map.
    #[error("equation {equation} requires field `{field}`")]
    MissingField { equation: &'static str, field: String },
    /// Underlying field-arithmetic failure.
    #[error(transparent)]
    Field(#[from] FieldError),
    /// A parameter is outside its admissible range.
    #[error("bad parameter for {equation}: {detail}")]
    BadParameter { equation: &'static str, detail: String },
    /// A reconstructed potential that must be real carries imaginary content.
    #[error("reconstructed `{field}` must be real: max |Im| = {max_imag:.3e}")]
    ReconstructionNotReal { field: &'static str, max_imag: f64 },
    /// A spin input is not unit length.
    #[error("spin input must be unit length: max | |s|^2 - 1 | = {max_dev:.3e}")]
    SpinNotUnit { max_dev: f64 },
    /// The equation name is not recognized.
    #[error("unknown equation name `{0}`")]
    UnknownEquation(String),
}

/// The reduced systems with packaged residual evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationId {
    /// (2+1) Zakharov system: wave field φ with potential v.
    Zakharov,
    /// Cubic nonlinear Schrödinger equation (1+1).
    Nls,
    /// n-component Zakharov system.
    NZakharov,
    /// (2+1) spin flow with nonlocal scalar u.
    M1Spin,
    /// Landau–Lifshitz spin chain (1+1).
    LandauLifshitz,
    /// Complex modified KdV system in (2+1) with two potentials.
    MkdvComplex,
    /// Real modified KdV system in (2+1).
    MkdvReal,
    /// Strachan-type system: q, p with potential v.
    Strachan,
    /// Derivative-coupling family with parameters c, d.
    M3q,
    /// Quadratic-potential family with two potentials v1, v2.
    M22q,
    /// Derivative NLS pair, variant with (p q²)ₓ coupling.
    DnlsA,
    /// Derivative NLS pair, variant with p q qₓ coupling.
    DnlsB,
    /// Ishimori spin model with elliptic/hyperbolic scalar u.
    Ishimori,
    /// Davey–Stewartson system.
    Ds,
    /// Kadomtsev–Petviashvili equation with auxiliary m3.
    Kp,
    /// Curvature-density spin flow: k·S_t = ω₃·S_x in cleared form.
    MX,
    /// Zakharov system with general second-order operators M₁, M₂.
    ZakharovGeneral,
    /// Plane-frame compatibility system for (k, m3, ω₃).
    MlxiiPlane,
}

impl EquationId {
    /// Every packaged equation.
    pub const ALL: [EquationId; 18] = [
        EquationId::Zakharov,
        EquationId::Nls,
        EquationId::NZakharov,
        EquationId::M1Spin,
        EquationId::LandauLifshitz,
        EquationId::MkdvComplex,
        EquationId::MkdvReal,
        EquationId::Strachan,
        EquationId::M3q,
        EquationId::M22q,
        EquationId::DnlsA,
        EquationId::DnlsB,
        EquationId::Ishimori,
        EquationId::Ds,
        EquationId::Kp,
        EquationId::MX,
        EquationId::ZakharovGeneral,
        EquationId::MlxiiPlane,
    ];

    /// Stable lowercase name used by the CLI and in reports.
    pub fn as_str(&self) -> &'static str {
        match self {
            EquationId::Zakharov => "zakharov",
            EquationId::Nls => "nls",
            EquationId::NZakharov => "n_zakharov",
            EquationId::M1Spin => "m1_spin",
            EquationId::LandauLifshitz => "landau_lifshitz",
            EquationId::MkdvComplex => "mkdv_complex",
            EquationId::MkdvReal => "mkdv_real",
            EquationId::Strachan => "strachan",
            EquationId::M3q => "m3q",
            EquationId::M22q => "m22q",
            EquationId::DnlsA => "dnls_a",
            EquationId::DnlsB => "dnls_b",
            EquationId::Ishimori => "ishimori",
            EquationId::Ds => "ds",
            EquationId::Kp => "kp",
            EquationId::MX => "m_x",
            EquationId::ZakharovGeneral => "zakharov_general",
            EquationId::MlxiiPlane => "mlxii_plane",
        }
    }

    /// Fields that must be present in the map (time derivatives included).
    pub fn required_fields(&self, params: &EquationParams) -> Vec<String> {
        let owned = |names: &[&str]| names.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        match self {
            EquationId::Zakharov => owned(&["phi", "phi_t"]),
            EquationId::Nls => owned(&["phi", "phi_t"]),
            EquationId::NZakharov => {
                let mut v = Vec::new();
                for j in 1..=params.n {
                    v.push(format!("phi{j}"));
                    v.push(format!("phi{j}_t"));
                }
                v
            }
            EquationId::M1Spin => owned(&["s1", "s2", "s3", "s1_t", "s2_t", "s3_t"]),
            EquationId::LandauLifshitz => owned(&["s1", "s2", "s3", "s1_t", "s2_t", "s3_t"]),
            EquationId::MkdvComplex => owned(&["q", "q_t"]),
            EquationId::MkdvReal => owned(&["q", "q_t"]),
            EquationId::Strachan => owned(&["q", "p", "q_t", "p_t"]),
            EquationId::M3q => owned(&["q", "p", "q_t", "p_t"]),
            EquationId::M22q => owned(&["q", "p", "q_t", "p_t"]),
            EquationId::DnlsA | EquationId::DnlsB => owned(&["q", "p", "q_t", "p_t"]),
            EquationId::Ishimori => {
                owned(&["s1", "s2", "s3", "s1_t", "s2_t", "s3_t", "u"])
            }
            EquationId::Ds => owned(&["q", "p", "q_t", "p_t", "v"]),
            EquationId::Kp => owned(&["k", "k_t"]),
            EquationId::MX => owned(&["s1", "s2", "s3", "s1_t", "s2_t", "s3_t", "k"]),
            EquationId::ZakharovGeneral => owned(&["q", "p", "q_t", "p_t", "v"]),
            EquationId::MlxiiPlane => owned(&["k", "k_t", "m3", "m3_t", "omega3"]),
        }
    }

    /// Auxiliary fields that are reconstructed by ∂ₓ⁻¹ when absent.
    pub fn optional_fields(&self) -> Vec<&'static str> {
        match self {
            EquationId::Zakharov | EquationId::NZakharov => vec!["v"],
            EquationId::M1Spin => vec!["u"],
            EquationId::MkdvComplex => vec!["v1", "v2"],
            EquationId::MkdvReal => vec!["v1"],
            EquationId::Strachan | EquationId::M3q => vec!["v"],
            EquationId::M22q => vec!["v1", "v2"],
            EquationId::Kp => vec!["m3"],
            EquationId::MX => vec!["m3"],
            _ => vec![],
        }
    }
}

impl fmt::Display for EquationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EquationId {
    type Err = EquationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EquationId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| EquationError::UnknownEquation(s.to_string()))
    }
}

/// Parameters shared across the equation families.  Unused entries are
/// ignored by each evaluator.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct EquationParams {
    /// Sign of the cubic coupling (±1 in the packaged reductions).
    pub r2: f64,
    /// Coupling sign E for the mKdV and Strachan families.
    pub e: f64,
    /// First coefficient of the derivative-coupling family.
    pub c: f64,
    /// Second coefficient of the derivative-coupling family.
    pub d: f64,
    /// Anisotropy parameter α (KP, DS, Ishimori, m_x).
    pub alpha: f64,
    /// Operator parameter a of the general Zakharov system.
    pub a: f64,
    /// Operator parameter b of the general Zakharov system.
    pub b: f64,
    /// Reserved frame parameter of the plane-frame system.
    pub beta: f64,
    /// Component count of the n-component Zakharov system.
    pub n: usize,
}

impl Default for EquationParams {
    fn default() -> Self {
        Self {
            r2: 1.0,
            e: 1.0,
            c: 1.0,
            d: 1.0,
            alpha: 1.0,
            a: 0.5,
            b: 1.0,
            beta: 0.0,
            n: 2,
        }
    }
}

/// Named scalar fields feeding an evaluator.
#[derive(Debug, Clone, Default)]
pub struct FieldMap {
    entries: BTreeMap<String, ScalarField>,
}

impl FieldMap {
    /// Empty map.
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert (or replace) a named field.
    pub fn insert(&mut self, name: impl Into<String>, field: ScalarField) {
        self.entries.insert(name.into(), field);
    }

    /// Look a field up without failing.
    pub fn get_opt(&self, name: &str) -> Option<&ScalarField> {
        self.entries.get(name)
    }

    /// Whether the map holds a field of this name.
    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    /// Names in sorted order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    fn require(&self, equation: &'static str, name: &str) -> Result<&ScalarField, EquationError> {
        self.entries.get(name).ok_or_else(|| EquationError::MissingField {
            equation,
            field: name.to_string(),
        })
    }

    fn spin(
        &self,
        equation: &'static str,
        suffix: &str,
    ) -> Result<Vec3Field, EquationError> {
        Ok([
            self.require(equation, &format!("s1{suffix}"))?.clone(),
            self.require(equation, &format!("s2{suffix}"))?.clone(),
            self.require(equation, &format!("s3{suffix}"))?.clone(),
        ])
    }
}

/// One named residual field with the largest term norm that entered it.
#[derive(Debug, Clone)]
pub struct ResidualComponent {
    /// Equation label within its system (e.g. "Z1", "E2").
    pub name: String,
    /// The residual field itself.
    pub field: ScalarField,
    /// Largest L² norm among the summed terms.
    pub scale: f64,
}

impl ResidualComponent {
    /// L² norm of the residual.
    pub fn l2(&self) -> f64 {
        self.field.norms().l2
    }

    /// Max norm of the residual.
    pub fn linf(&self) -> f64 {
        self.field.linf()
    }

    /// Residual L² norm relative to the largest constituent term.
    pub fn relative(&self) -> f64 {
        self.l2() / self.scale.max(SCALE_FLOOR)
    }
}

/// Largest residual L² across a system, relative to the largest term scale
/// across the same system.
///
/// Per-component [`ResidualComponent::relative`] is meaningless for a
/// component whose every term vanishes identically: the residual then equals
/// its own largest roundoff-level term and the ratio saturates at one. The
/// system-wide ratio measures each component against the problem's actual
/// magnitude instead.
pub fn system_relative(components: &[ResidualComponent]) -> f64 {
    let worst = components.iter().map(|c| c.l2()).fold(0.0, f64::max);
    let scale = components.iter().map(|c| c.scale).fold(SCALE_FLOOR, f64::max);
    worst / scale
}

/// Accumulates a residual as a signed sum of terms, tracking term norms.
struct Accum {
    sum: ScalarField,
    scale: f64,
}

impl Accum {
    fn new(grid: &Grid) -> Self {
        Self { sum: ScalarField::zeros(grid), scale: 0.0 }
    }

    fn add(mut self, term: &ScalarField) -> Result<Self, EquationError> {
        self.scale = self.scale.max(term.norms().l2);
        self.sum = self.sum.add(term)?;
        Ok(self)
    }

    fn sub(mut self, term: &ScalarField) -> Result<Self, EquationError> {
        self.scale = self.scale.max(term.norms().l2);
        self.sum = self.sum.sub(term)?;
        Ok(self)
    }

    fn finish(self, name: impl Into<String>) -> ResidualComponent {
        ResidualComponent { name: name.into(), field: self.sum, scale: self.scale }
    }
}

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn dx(f: &ScalarField) -> Result<ScalarField, EquationError> {
    Ok(f.derivative(0, DerivativeScheme::Spectral)?)
}

fn dy(f: &ScalarField) -> Result<ScalarField, EquationError> {
    Ok(f.derivative(1, DerivativeScheme::Spectral)?)
}

fn dxx(f: &ScalarField) -> Result<ScalarField, EquationError> {
    dx(&dx(f)?)
}

fn dyy(f: &ScalarField) -> Result<ScalarField, EquationError> {
    dy(&dy(f)?)
}

fn dxy(f: &ScalarField) -> Result<ScalarField, EquationError> {
    dy(&dx(f)?)
}

fn dxxx(f: &ScalarField) -> Result<ScalarField, EquationError> {
    dx(&dxx(f)?)
}

fn check_unit_spin(s: &Vec3Field) -> Result<(), EquationError> {
    let norm2 = vector3::dot(s, s)?;
    let max_dev = norm2.map(|z| z - 1.0).linf();
    if max_dev > SPIN_UNIT_TOL {
        return Err(EquationError::SpinNotUnit { max_dev });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Reconstruction of x-constrained potentials.
// ---------------------------------------------------------------------------

/// v = 2 r² ∂ₓ⁻¹ ∂_y Σ|φⱼ|² for the (n-component) Zakharov system.
pub fn reconstruct_zakharov_v(
    phis: &[&ScalarField],
    r2: f64,
    mean_subtract: bool,
) -> Result<ScalarField, EquationError> {
    let grid = phis
        .first()
        .ok_or(EquationError::BadParameter {
            equation: "zakharov",
            detail: "need at least one wave field".into(),
        })?
        .grid()
        .clone();
    let mut total = ScalarField::zeros(&grid);
    for phi in phis {
        total = total.add(&phi.modulus_squared())?;
    }
    Ok(dy(&total)?.antiderivative_x(mean_subtract)?.scale(c(2.0 * r2)))
}

/// u = −∂ₓ⁻¹ [ s·(s_x × s_y) ] for the (2+1) spin flow, checked real.
pub fn reconstruct_spin_u(
    s: &Vec3Field,
    mean_subtract: bool,
) -> Result<ScalarField, EquationError> {
    let sx = vector3::derivative(s, 0, DerivativeScheme::Spectral)?;
    let sy = vector3::derivative(s, 1, DerivativeScheme::Spectral)?;
    let triple = vector3::dot(s, &vector3::cross(&sx, &sy)?)?;
    let u = triple.antiderivative_x(mean_subtract)?.scale(c(-1.0));
    let max_imag = u.max_imag();
    if max_imag > RECONSTRUCTION_REALITY_TOL {
        return Err(EquationError::ReconstructionNotReal { field: "u", max_imag });
    }
    Ok(u)
}

/// m3 = ∂ₓ⁻¹ k_y for the KP and m_x systems.
pub fn reconstruct_kp_m3(
    k: &ScalarField,
    mean_subtract: bool,
) -> Result<ScalarField, EquationError> {
    Ok(dy(k)?.antiderivative_x(mean_subtract)?)
}

/// v = 2 ∂ₓ⁻¹ (p q)_y for the derivative-coupling family.
pub fn reconstruct_m3q_v(
    q: &ScalarField,
    p: &ScalarField,
    mean_subtract: bool,
) -> Result<ScalarField, EquationError> {
    Ok(dy(&p.mul(q)?)?.antiderivative_x(mean_subtract)?.scale(c(2.0)))
}

/// v = E ∂ₓ⁻¹ (p q)_y for the Strachan-type system.
pub fn reconstruct_strachan_v(
    q: &ScalarField,
    p: &ScalarField,
    e: f64,
    mean_subtract: bool,
) -> Result<ScalarField, EquationError> {
    Ok(dy(&p.mul(q)?)?.antiderivative_x(mean_subtract)?.scale(c(e)))
}

/// (v1, v2) = (∂ₓ⁻¹ (p q)_y, ∂ₓ⁻¹ (p_xy q − p q_xy)) for the
/// quadratic-potential family.
pub fn reconstruct_m22q_potentials(
    q: &ScalarField,
    p: &ScalarField,
    mean_subtract: bool,
) -> Result<(ScalarField, ScalarField), EquationError> {
    let v1 = dy(&p.mul(q)?)?.antiderivative_x(mean_subtract)?;
    let w = dxy(p)?.mul(q)?.sub(&p.mul(&dxy(q)?)?)?;
    let v2 = w.antiderivative_x(mean_subtract)?;
    Ok((v1, v2))
}

/// (v1, v2) = (2E ∂ₓ⁻¹ (q̄q)_y, 2E ∂ₓ⁻¹ (q̄ q_xy − q̄_xy q)) for the
/// complex mKdV system.
pub fn reconstruct_mkdv_potentials(
    q: &ScalarField,
    e: f64,
    mean_subtract: bool,
) -> Result<(ScalarField, ScalarField), EquationError> {
    let v1 = dy(&q.modulus_squared())?
        .antiderivative_x(mean_subtract)?
        .scale(c(2.0 * e));
    let qc = q.conj();
    let w = qc.mul(&dxy(q)?)?.sub(&dxy(&qc)?.mul(q)?)?;
    let v2 = w.antiderivative_x(mean_subtract)?.scale(c(2.0 * e));
    Ok((v1, v2))
}

/// v1 = 2E ∂ₓ⁻¹ (q²)_y for the real mKdV system.
pub fn reconstruct_mkdv_real_v1(
    q: &ScalarField,
    e: f64,
    mean_subtract: bool,
) -> Result<ScalarField, EquationError> {
    Ok(dy(&q.mul(q)?)?.antiderivative_x(mean_subtract)?.scale(c(2.0 * e)))
}

/// ω₃ = −k_xx − 3k² − 3α² ∂ₓ⁻¹ ∂_y m3 for the curvature-density spin flow.
pub fn reconstruct_mx_omega3(
    k: &ScalarField,
    m3: &ScalarField,
    alpha: f64,
    mean_subtract: bool,
) -> Result<ScalarField, EquationError> {
    let nonlocal = dy(m3)?.antiderivative_x(mean_subtract)?;
    Ok(dxx(k)?
        .scale(c(-1.0))
        .sub(&k.mul(k)?.scale(c(3.0)))?
        .sub(&nonlocal.scale(c(3.0 * alpha * alpha)))?)
}

/// Second-order operator M₁ = α²∂yy + 4α(b−a)∂xy + 4(a²−2ab−b)∂xx.
pub fn m1_operator(
    f: &ScalarField,
    alpha: f64,
    a: f64,
    b: f64,
) -> Result<ScalarField, EquationError> {
    Ok(dyy(f)?
        .scale(c(alpha * alpha))
        .add(&dxy(f)?.scale(c(4.0 * alpha * (b - a))))?
        .add(&dxx(f)?.scale(c(4.0 * (a * a - 2.0 * a * b - b))))?)
}

/// Second-order operator M₂ = α²∂yy − 2α(2a+1)∂xy + 4a(a+1)∂xx.
pub fn m2_operator(
    f: &ScalarField,
    alpha: f64,
    a: f64,
) -> Result<ScalarField, EquationError> {
    Ok(dyy(f)?
        .scale(c(alpha * alpha))
        .sub(&dxy(f)?.scale(c(2.0 * alpha * (2.0 * a + 1.0))))?
        .add(&dxx(f)?.scale(c(4.0 * a * (a + 1.0))))?)
}

// ---------------------------------------------------------------------------
// Residual evaluation.
// ---------------------------------------------------------------------------

/// Evaluate the residuals of `id` on the supplied fields.
pub fn pde_residual(
    id: EquationId,
    fields: &FieldMap,
    params: &EquationParams,
) -> Result<Vec<ResidualComponent>, EquationError> {
    match id {
        EquationId::Zakharov => zakharov(fields, params),
        EquationId::Nls => nls(fields, params),
        EquationId::NZakharov => n_zakharov(fields, params),
        EquationId::M1Spin => m1_spin(fields, params),
        EquationId::LandauLifshitz => landau_lifshitz(fields),
        EquationId::MkdvComplex => mkdv_complex(fields, params),
        EquationId::MkdvReal => mkdv_real(fields, params),
        EquationId::Strachan => strachan(fields, params),
        EquationId::M3q => m3q(fields, params),
        EquationId::M22q => m22q(fields, params),
        EquationId::DnlsA => dnls(fields, true),
        EquationId::DnlsB => dnls(fields, false),
        EquationId::Ishimori => ishimori(fields, params),
        EquationId::Ds => ds(fields, params),
        EquationId::Kp => kp(fields, params),
        EquationId::MX => m_x(fields, params),
        EquationId::ZakharovGeneral => zakharov_general(fields, params),
        EquationId::MlxiiPlane => mlxii_plane(fields),
    }
}

/// Z1 = iφ_t − φ_xy − vφ,  Z2 = v_x − 2r² (|φ|²)_y.
fn zakharov(
    fields: &FieldMap,
    params: &EquationParams,
) -> Result<Vec<ResidualComponent>, EquationError> {
    const EQ: &str = "zakharov";
    let phi = fields.require(EQ, "phi")?;
    let phi_t = fields.require(EQ, "phi_t")?;
    let v = match fields.get_opt("v") {
        Some(v) => v.clone(),
        None => reconstruct_zakharov_v(&[phi], params.r2, false)?,
    };
    let grid = phi.grid();
    let z1 = Accum::new(grid)
        .add(&phi_t.scale(I))?
        .sub(&dxy(phi)?)?
        .sub(&v.mul(phi)?)?
        .finish("Z1");
    let z2 = Accum::new(grid)
        .add(&dx(&v)?)?
        .sub(&dy(&phi.modulus_squared())?.scale(c(2.0 * params.r2)))?
        .finish("Z2");
    Ok(vec![z1, z2])
}

/// R = iφ_t − φ_xx − 2r² |φ|² φ.
fn nls(
    fields: &FieldMap,
    params: &EquationParams,
) -> Result<Vec<ResidualComponent>, EquationError> {
    const EQ: &str = "nls";
    let phi = fields.require(EQ, "phi")?;
    let phi_t = fields.require(EQ, "phi_t")?;
    let r = Accum::new(phi.grid())
        .add(&phi_t.scale(I))?
        .sub(&dxx(phi)?)?
        .sub(&phi.modulus_squared().mul(phi)?.scale(c(2.0 * params.r2)))?
        .finish("R");
    Ok(vec![r])
}

/// Zⱼ = iφⱼ_t − φⱼ_xy − vφⱼ,  Zv = v_x − 2r² (Σ|φⱼ|²)_y.
fn n_zakharov(
    fields: &FieldMap,
    params: &EquationParams,
) -> Result<Vec<ResidualComponent>, EquationError> {
    const EQ: &str = "n_zakharov";
    if params.n == 0 {
        return Err(EquationError::BadParameter {
            equation: EQ,
            detail: "component count n must be at least 1".into(),
        });
    }
    let mut phis = Vec::with_capacity(params.n);
    let mut phi_ts = Vec::with_capacity(params.n);
    for j in 1..=params.n {
        phis.push(fields.require(EQ, &format!("phi{j}"))?);
        phi_ts.push(fields.require(EQ, &format!("phi{j}_t"))?);
    }
    let v = match fields.get_opt("v") {
        Some(v) => v.clone(),
        None => reconstruct_zakharov_v(&phis, params.r2, false)?,
    };
    let grid = phis[0].grid();
    let mut out = Vec::with_capacity(params.n + 1);
    for (j, (phi, phi_t)) in phis.iter().zip(&phi_ts).enumerate() {
        out.push(
            Accum::new(grid)
                .add(&phi_t.scale(I))?
                .sub(&dxy(phi)?)?
                .sub(&v.mul(phi)?)?
                .finish(format!("Z{}", j + 1)),
        );
    }
    let mut total = ScalarField::zeros(grid);
    for phi in &phis {
        total = total.add(&phi.modulus_squared())?;
    }
    out.push(
        Accum::new(grid)
            .add(&dx(&v)?)?
            .sub(&dy(&total)?.scale(c(2.0 * params.r2)))?
            .finish("Zv"),
    );
    Ok(out)
}

/// E⃗ = s_t − (s × s_y + u s)_x,  e_u = u_x + s·(s_x × s_y).
fn m1_spin(
    fields: &FieldMap,
    _params: &EquationParams,
) -> Result<Vec<ResidualComponent>, EquationError> {
    const EQ: &str = "m1_spin";
    let s = fields.spin(EQ, "")?;
    let s_t = fields.spin(EQ, "_t")?;
    check_unit_spin(&s)?;
    let u = match fields.get_opt("u") {
        Some(u) => u.clone(),
        None => reconstruct_spin_u(&s, false)?,
    };
    let grid = s[0].grid();
    let s_y = vector3::derivative(&s, 1, DerivativeScheme::Spectral)?;
    let s_x = vector3::derivative(&s, 0, DerivativeScheme::Spectral)?;
    let flux = vector3::add(&vector3::cross(&s, &s_y)?, &vector3::scale_field(&s, &u)?)?;
    let flux_x = vector3::derivative(&flux, 0, DerivativeScheme::Spectral)?;
    let mut out = Vec::with_capacity(4);
    for j in 0..3 {
        out.push(
            Accum::new(grid)
                .add(&s_t[j])?
                .sub(&flux_x[j])?
                .finish(format!("E{}", j + 1)),
        );
    }
    out.push(
        Accum::new(grid)
            .add(&dx(&u)?)?
            .add(&vector3::dot(&s, &vector3::cross(&s_x, &s_y)?)?)?
            .finish("e_u"),
    );
    Ok(out)
}

/// E⃗ = s_t − s × s_xx.
fn landau_lifshitz(fields: &FieldMap) -> Result<Vec<ResidualComponent>, EquationError> {
    const EQ: &str = "landau_lifshitz";
    let s = fields.spin(EQ, "")?;
    let s_t = fields.spin(EQ, "_t")?;
    check_unit_spin(&s)?;
    let grid = s[0].grid();
    let s_xx: Vec3Field = [dxx(&s[0])?, dxx(&s[1])?, dxx(&s[2])?];
    let torque = vector3::cross(&s, &s_xx)?;
    let mut out = Vec::with_capacity(3);
    for j in 0..3 {
        out.push(
            Accum::new(grid)
                .add(&s_t[j])?
                .sub(&torque[j])?
                .finish(format!("E{}", j + 1)),
        );
    }
    Ok(out)
}

/// Zq = q_t + q_xxy − (q v1)_x − q v2,  Zv1 = v1_x − 2E (q̄q)_y,
/// Zv2 = v2_x − 2E (q̄ q_xy − q̄_xy q).
fn mkdv_complex(
    fields: &FieldMap,
    params: &EquationParams,
) -> Result<Vec<ResidualComponent>, EquationError> {
    const EQ: &str = "mkdv_complex";
    let q = fields.require(EQ, "q")?;
    let q_t = fields.require(EQ, "q_t")?;
    let (v1, v2) = match (fields.get_opt("v1"), fields.get_opt("v2")) {
        (Some(v1), Some(v2)) => (v1.clone(), v2.clone()),
        (v1_opt, v2_opt) => {
            let (r1, r2) = reconstruct_mkdv_potentials(q, params.e, false)?;
            (v1_opt.cloned().unwrap_or(r1), v2_opt.cloned().unwrap_or(r2))
        }
    };
    let grid = q.grid();
    let zq = Accum::new(grid)
        .add(q_t)?
        .add(&dy(&dxx(q)?)?)?
        .sub(&dx(&q.mul(&v1)?)?)?
        .sub(&q.mul(&v2)?)?
        .finish("Zq");
    let zv1 = Accum::new(grid)
        .add(&dx(&v1)?)?
        .sub(&dy(&q.modulus_squared())?.scale(c(2.0 * params.e)))?
        .finish("Zv1");
    let qc = q.conj();
    let w = qc.mul(&dxy(q)?)?.sub(&dxy(&qc)?.mul(q)?)?;
    let zv2 = Accum::new(grid)
        .add(&dx(&v2)?)?
        .sub(&w.scale(c(2.0 * params.e)))?
        .finish("Zv2");
    Ok(vec![zq, zv1, zv2])
}

/// Zq = q_t + q_xxy − (q v1)_x,  Zv1 = v1_x − 4E q q_y, for real q.
fn mkdv_real(
    fields: &FieldMap,
    params: &EquationParams,
) -> Result<Vec<ResidualComponent>, EquationError> {
    const EQ: &str = "mkdv_real";
    let q = fields.require(EQ, "q")?;
    let q_t = fields.require(EQ, "q_t")?;
    let max_imag = q.max_imag();
    if max_imag > 1e-10 * q.linf().max(1.0) {
        return Err(EquationError::BadParameter {
            equation: EQ,
            detail: format!("q must be real (max |Im| = {max_imag:.3e})"),
        });
    }
    let v1 = match fields.get_opt("v1") {
        Some(v1) => v1.clone(),
        None => reconstruct_mkdv_real_v1(q, params.e, false)?,
    };
    let grid = q.grid();
    let zq = Accum::new(grid)
        .add(q_t)?
        .add(&dy(&dxx(q)?)?)?
        .sub(&dx(&q.mul(&v1)?)?)?
        .finish("Zq");
    let zv1 = Accum::new(grid)
        .add(&dx(&v1)?)?
        .sub(&q.mul(&dy(q)?)?.scale(c(4.0 * params.e)))?
        .finish("Zv1");
    Ok(vec![zq, zv1])
}

/// Sq = iq_t + q_xy + i(vq)_x,  Sp = ip_t − p_xy + i(vp)_x,
/// Sv = v_x − E (pq)_y.
fn strachan(
    fields: &FieldMap,
    params: &EquationParams,
) -> Result<Vec<ResidualComponent>, EquationError> {
    const EQ: &str = "strachan";
    let q = fields.require(EQ, "q")?;
    let p = fields.require(EQ, "p")?;
    let q_t = fields.require(EQ, "q_t")?;
    let p_t = fields.require(EQ, "p_t")?;
    let v = match fields.get_opt("v") {
        Some(v) => v.clone(),
        None => reconstruct_strachan_v(q, p, params.e, false)?,
    };
    let grid = q.grid();
    let sq = Accum::new(grid)
        .add(&q_t.scale(I))?
        .add(&dxy(q)?)?
        .add(&dx(&v.mul(q)?)?.scale(I))?
        .finish("Sq");
    let sp = Accum::new(grid)
        .add(&p_t.scale(I))?
        .sub(&dxy(p)?)?
        .add(&dx(&v.mul(p)?)?.scale(I))?
        .finish("Sp");
    let sv = Accum::new(grid)
        .add(&dx(&v)?)?
        .sub(&dy(&p.mul(q)?)?.scale(c(params.e)))?
        .finish("Sv");
    Ok(vec![sq, sp, sv])
}

/// Zq = iq_t − q_xy + 2ic(vq)_x − d²vq,
/// Zp = ip_t + p_xy + 2ic(vp)_x + d²vp,  Zv = v_x − 2(pq)_y.
fn m3q(
    fields: &FieldMap,
    params: &EquationParams,
) -> Result<Vec<ResidualComponent>, EquationError> {
    const EQ: &str = "m3q";
    let q = fields.require(EQ, "q")?;
    let p = fields.require(EQ, "p")?;
    let q_t = fields.require(EQ, "q_t")?;
    let p_t = fields.require(EQ, "p_t")?;
    let v = match fields.get_opt("v") {
        Some(v) => v.clone(),
        None => reconstruct_m3q_v(q, p, false)?,
    };
    let (cc, dd) = (params.c, params.d);
    let grid = q.grid();
    let zq = Accum::new(grid)
        .add(&q_t.scale(I))?
        .sub(&dxy(q)?)?
        .add(&dx(&v.mul(q)?)?.scale(c(2.0 * cc) * I))?
        .sub(&v.mul(q)?.scale(c(dd * dd)))?
        .finish("Zq");
    let zp = Accum::new(grid)
        .add(&p_t.scale(I))?
        .add(&dxy(p)?)?
        .add(&dx(&v.mul(p)?)?.scale(c(2.0 * cc) * I))?
        .add(&v.mul(p)?.scale(c(dd * dd)))?
        .finish("Zp");
    let zv = Accum::new(grid)
        .add(&dx(&v)?)?
        .sub(&dy(&p.mul(q)?)?.scale(c(2.0)))?
        .finish("Zv");
    Ok(vec![zq, zp, zv])
}

/// Zq = iq_t + q_xy + (i/2)[(v1 q)_x − v2 q − p q q_y],
/// Zp = ip_t − p_xy + (i/2)[(v1 p)_x + v2 p − p q p_y],
/// Zv1 = v1_x − (pq)_y,  Zv2 = v2_x − (p_xy q − p q_xy).
fn m22q(
    fields: &FieldMap,
    _params: &EquationParams,
) -> Result<Vec<ResidualComponent>, EquationError> {
    const EQ: &str = "m22q";
    let q = fields.require(EQ, "q")?;
    let p = fields.require(EQ, "p")?;
    let q_t = fields.require(EQ, "q_t")?;
    let p_t = fields.require(EQ, "p_t")?;
    let (v1, v2) = match (fields.get_opt("v1"), fields.get_opt("v2")) {
        (Some(v1), Some(v2)) => (v1.clone(), v2.clone()),
        (v1_opt, v2_opt) => {
            let (r1, r2) = reconstruct_m22q_potentials(q, p, false)?;
            (v1_opt.cloned().unwrap_or(r1), v2_opt.cloned().unwrap_or(r2))
        }
    };
    let grid = q.grid();
    let half_i = Complex64::new(0.0, 0.5);
    let pq = p.mul(q)?;
    let zq = Accum::new(grid)
        .add(&q_t.scale(I))?
        .add(&dxy(q)?)?
        .add(&dx(&v1.mul(q)?)?.scale(half_i))?
        .sub(&v2.mul(q)?.scale(half_i))?
        .sub(&pq.mul(&dy(q)?)?.scale(half_i))?
        .finish("Zq");
    let zp = Accum::new(grid)
        .add(&p_t.scale(I))?
        .sub(&dxy(p)?)?
        .add(&dx(&v1.mul(p)?)?.scale(half_i))?
        .add(&v2.mul(p)?.scale(half_i))?
        .sub(&pq.mul(&dy(p)?)?.scale(half_i))?
        .finish("Zp");
    let zv1 = Accum::new(grid)
        .add(&dx(&v1)?)?
        .sub(&dy(&pq)?)?
        .finish("Zv1");
    let zv2 = Accum::new(grid)
        .add(&dx(&v2)?)?
        .sub(&dxy(p)?.mul(q)?.sub(&p.mul(&dxy(q)?)?)?)?
        .finish("Zv2");
    Ok(vec![zq, zp, zv1, zv2])
}

/// Derivative-NLS pairs.  Variant A couples through i(pq²)_x / i(qp²)_x;
/// variant B through i p q q_x / i p q p_x.
fn dnls(fields: &FieldMap, variant_a: bool) -> Result<Vec<ResidualComponent>, EquationError> {
    let eq: &'static str = if variant_a { "dnls_a" } else { "dnls_b" };
    let q = fields.require(eq, "q")?;
    let p = fields.require(eq, "p")?;
    let q_t = fields.require(eq, "q_t")?;
    let p_t = fields.require(eq, "p_t")?;
    let grid = q.grid();
    let (nq, np) = if variant_a {
        (dx(&p.mul(&q.mul(q)?)?)?, dx(&q.mul(&p.mul(p)?)?)?)
    } else {
        (p.mul(q)?.mul(&dx(q)?)?, p.mul(q)?.mul(&dx(p)?)?)
    };
    let zq = Accum::new(grid)
        .add(&q_t.scale(I))?
        .add(&dxx(q)?)?
        .add(&nq.scale(I))?
        .finish("Zq");
    let zp = Accum::new(grid)
        .add(&p_t.scale(I))?
        .sub(&dxx(p)?)?
        .add(&np.scale(I))?
        .finish("Zp");
    Ok(vec![zq, zp])
}

/// E⃗ = s_t − s × (s_xx + α² s_yy) − u_x s_y − u_y s_x,
/// e_u = u_xx − α² u_yy + 2α² s·(s_x × s_y).
fn ishimori(
    fields: &FieldMap,
    params: &EquationParams,
) -> Result<Vec<ResidualComponent>, EquationError> {
    const EQ: &str = "ishimori";
    let s = fields.spin(EQ, "")?;
    let s_t = fields.spin(EQ, "_t")?;
    check_unit_spin(&s)?;
    let u = fields.require(EQ, "u")?;
    let a2 = params.alpha * params.alpha;
    let grid = s[0].grid();
    let s_x = vector3::derivative(&s, 0, DerivativeScheme::Spectral)?;
    let s_y = vector3::derivative(&s, 1, DerivativeScheme::Spectral)?;
    let lap: Vec3Field = [
        dxx(&s[0])?.add(&dyy(&s[0])?.scale(c(a2)))?,
        dxx(&s[1])?.add(&dyy(&s[1])?.scale(c(a2)))?,
        dxx(&s[2])?.add(&dyy(&s[2])?.scale(c(a2)))?,
    ];
    let torque = vector3::cross(&s, &lap)?;
    let u_x = dx(u)?;
    let u_y = dy(u)?;
    let mut out = Vec::with_capacity(4);
    for j in 0..3 {
        out.push(
            Accum::new(grid)
                .add(&s_t[j])?
                .sub(&torque[j])?
                .sub(&u_x.mul(&s_y[j])?)?
                .sub(&u_y.mul(&s_x[j])?)?
                .finish(format!("E{}", j + 1)),
        );
    }
    out.push(
        Accum::new(grid)
            .add(&dxx(u)?)?
            .sub(&dyy(u)?.scale(c(a2)))?
            .add(&vector3::dot(&s, &vector3::cross(&s_x, &s_y)?)?.scale(c(2.0 * a2)))?
            .finish("e_u"),
    );
    Ok(out)
}

/// Zq = iq_t + q_xx + α²q_yy + vq,  Zp = −ip_t + p_xx + α²p_yy + vp,
/// Zv = v_xx − α²v_yy + 2[(pq)_xx + α²(pq)_yy].
fn ds(
    fields: &FieldMap,
    params: &EquationParams,
) -> Result<Vec<ResidualComponent>, EquationError> {
    const EQ: &str = "ds";
    let q = fields.require(EQ, "q")?;
    let p = fields.require(EQ, "p")?;
    let q_t = fields.require(EQ, "q_t")?;
    let p_t = fields.require(EQ, "p_t")?;
    let v = fields.require(EQ, "v")?;
    let a2 = params.alpha * params.alpha;
    let grid = q.grid();
    let zq = Accum::new(grid)
        .add(&q_t.scale(I))?
        .add(&dxx(q)?)?
        .add(&dyy(q)?.scale(c(a2)))?
        .add(&v.mul(q)?)?
        .finish("Zq");
    let zp = Accum::new(grid)
        .sub(&p_t.scale(I))?
        .add(&dxx(p)?)?
        .add(&dyy(p)?.scale(c(a2)))?
        .add(&v.mul(p)?)?
        .finish("Zp");
    let pq = p.mul(q)?;
    let zv = Accum::new(grid)
        .add(&dxx(v)?)?
        .sub(&dyy(v)?.scale(c(a2)))?
        .add(&dxx(&pq)?.scale(c(2.0)))?
        .add(&dyy(&pq)?.scale(c(2.0 * a2)))?
        .finish("Zv");
    Ok(vec![zq, zp, zv])
}

/// Zk = k_t + 6kk_x + k_xxx + 3α² m3_y,  Zm = m3_x − k_y.
fn kp(
    fields: &FieldMap,
    params: &EquationParams,
) -> Result<Vec<ResidualComponent>, EquationError> {
    const EQ: &str = "kp";
    let k = fields.require(EQ, "k")?;
    let k_t = fields.require(EQ, "k_t")?;
    let m3 = match fields.get_opt("m3") {
        Some(m3) => m3.clone(),
        None => reconstruct_kp_m3(k, false)?,
    };
    let grid = k.grid();
    let zk = Accum::new(grid)
        .add(k_t)?
        .add(&k.mul(&dx(k)?)?.scale(c(6.0)))?
        .add(&dxxx(k)?)?
        .add(&dy(&m3)?.scale(c(3.0 * params.alpha * params.alpha)))?
        .finish("Zk");
    let zm = Accum::new(grid)
        .add(&dx(&m3)?)?
        .sub(&dy(k)?)?
        .finish("Zm");
    Ok(vec![zk, zm])
}

/// Cleared-form spin flow: Rⱼ = k·s_tⱼ − ω₃·s_xⱼ with
/// ω₃ = −k_xx − 3k² − 3α²∂ₓ⁻¹m3_y, plus the constraint Zm = m3_x − k_y.
///
/// The cleared form multiplies the flow by k so soliton tails, where k
/// vanishes, stay well defined: s_x is itself proportional to k there.
fn m_x(
    fields: &FieldMap,
    params: &EquationParams,
) -> Result<Vec<ResidualComponent>, EquationError> {
    const EQ: &str = "m_x";
    let s = fields.spin(EQ, "")?;
    let s_t = fields.spin(EQ, "_t")?;
    check_unit_spin(&s)?;
    let k = fields.require(EQ, "k")?;
    let m3 = match fields.get_opt("m3") {
        Some(m3) => m3.clone(),
        None => reconstruct_kp_m3(k, false)?,
    };
    let omega3 = reconstruct_mx_omega3(k, &m3, params.alpha, false)?;
    let grid = k.grid();
    let s_x = vector3::derivative(&s, 0, DerivativeScheme::Spectral)?;
    let mut out = Vec::with_capacity(4);
    for j in 0..3 {
        out.push(
            Accum::new(grid)
                .add(&k.mul(&s_t[j])?)?
                .sub(&omega3.mul(&s_x[j])?)?
                .finish(format!("R{}", j + 1)),
        );
    }
    out.push(
        Accum::new(grid)
            .add(&dx(&m3)?)?
            .sub(&dy(k)?)?
            .finish("Zm"),
    );
    Ok(out)
}

/// Z1 = iq_t + M₁q + vq,  Z2 = ip_t − M₁p − vp,  Z3 = M₂v + 2M₁(pq).
fn zakharov_general(
    fields: &FieldMap,
    params: &EquationParams,
) -> Result<Vec<ResidualComponent>, EquationError> {
    const EQ: &str = "zakharov_general";
    let q = fields.require(EQ, "q")?;
    let p = fields.require(EQ, "p")?;
    let q_t = fields.require(EQ, "q_t")?;
    let p_t = fields.require(EQ, "p_t")?;
    let v = fields.require(EQ, "v")?;
    let (alpha, a, b) = (params.alpha, params.a, params.b);
    let grid = q.grid();
    let z1 = Accum::new(grid)
        .add(&q_t.scale(I))?
        .add(&m1_operator(q, alpha, a, b)?)?
        .add(&v.mul(q)?)?
        .finish("Z1");
    let z2 = Accum::new(grid)
        .add(&p_t.scale(I))?
        .sub(&m1_operator(p, alpha, a, b)?)?
        .sub(&v.mul(p)?)?
        .finish("Z2");
    let z3 = Accum::new(grid)
        .add(&m2_operator(v, alpha, a)?)?
        .add(&m1_operator(&p.mul(q)?, alpha, a, b)?.scale(c(2.0)))?
        .finish("Z3");
    Ok(vec![z1, z2, z3])
}

/// R1 = k_y − m3_x,  R2 = k_t − ω₃_x,  R3 = m3_t − ω₃_y.
fn mlxii_plane(fields: &FieldMap) -> Result<Vec<ResidualComponent>, EquationError> {
    const EQ: &str = "mlxii_plane";
    let k = fields.require(EQ, "k")?;
    let k_t = fields.require(EQ, "k_t")?;
    let m3 = fields.require(EQ, "m3")?;
    let m3_t = fields.require(EQ, "m3_t")?;
    let omega3 = fields.require(EQ, "omega3")?;
    let grid = k.grid();
    let r1 = Accum::new(grid)
        .add(&dy(k)?)?
        .sub(&dx(m3)?)?
        .finish("R1");
    let r2 = Accum::new(grid)
        .add(k_t)?
        .sub(&dx(omega3)?)?
        .finish("R2");
    let r3 = Accum::new(grid)
        .add(m3_t)?
        .sub(&dy(omega3)?)?
        .finish("R3");
    Ok(vec![r1, r2, r3])
}
