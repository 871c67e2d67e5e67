//! Gauge potentials on four background coordinates and the specific
//! connection families whose curvature components reproduce reduced
//! (2+1)-dimensional equations.
//!
//! A [`ConnectionSet`] holds four matrix potentials A₁..A₄ together with a
//! role for each background coordinate ξ₁..ξ₄: realized by a grid axis,
//! realized by time (derivatives along it must be supplied explicitly as
//! fields), or absent (the fields do not depend on it).  A gauge tag records
//! structural normalizations — potentials that vanish identically or are
//! spatially constant — and is enforced bit-exactly at construction.
//!
//! The two reduction builders package the known dictionary between scalar
//! fields and so(3)-valued potentials: `build_zakharov_connection` maps a
//! complex wave field φ, a real potential v, and a sign r² into potentials
//! whose surviving self-duality components are linear images of the
//! (2+1)-dimensional Zakharov residuals, and `build_spin_connection` does
//! the same for the (2+1) spin flow with its nonlocal scalar u.

use num_complex::Complex64;
use thiserror::Error;

use crate::algebra::{so3_l1, so3_l2, so3_l3, ComplexMatrix, MatrixTag};
use crate::fields::{DerivativeScheme, FieldError, Grid, MatrixField, ScalarField};
use crate::vector3::{self, Vec3Field};

/// Tolerance for reality checks on fields that must be real (v, u, spins).
pub const REALITY_TOL: f64 = 1e-12;

/// Tolerance for the unit-length check on spin fields.
pub const UNIT_TOL: f64 = 1e-10;

/// Errors from connection construction and use.
#[derive(Debug, Error)]
pub enum ConnectionError {
    /// Underlying field failure.
    #[error(transparent)]
    Field(#[from] FieldError),
    /// A coordinate realized by time was differentiated without a supplied
    /// time-derivative potential.
    #[error("time derivative of potential A{0} required but not supplied")]
    MissingTimeDerivative(usize),
    /// The potentials violate the declared gauge tag.
    #[error("gauge tag {tag:?} violated: {detail}")]
    GaugeViolation { tag: GaugeTag, detail: String },
    /// A field that must be real carries imaginary content.
    #[error("field {name} must be real: max |Im| = {max_imag:.3e} exceeds {REALITY_TOL:.0e}")]
    NotReal { name: &'static str, max_imag: f64 },
    /// A spin field is not unit length.
    #[error("spin field must be unit length: max deviation {max_dev:.3e} exceeds {UNIT_TOL:.0e}")]
    NotUnit { max_dev: f64 },
    /// A parameter is outside its domain.
    #[error("bad parameter: {0}")]
    BadParameter(String),
    /// An operation needs a matrix dimension this implementation lacks.
    #[error("unsupported matrix dimension {0} for this operation")]
    UnsupportedDim(usize),
    /// Matrix-algebra failure.
    #[error(transparent)]
    Algebra(#[from] crate::algebra::AlgebraError),
}

/// How a background coordinate ξᵢ is realized on the sampled grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CoordinateRole {
    /// Realized by a grid axis.
    Axis(usize),
    /// Realized by time: derivatives along it come from supplied fields.
    Time,
    /// The fields do not depend on this coordinate.
    Absent,
}

/// Structural normalization of the potentials, enforced bit-exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum GaugeTag {
    /// No normalization.
    General,
    /// A₄ ≡ 0.
    A4Zero,
    /// A₄ ≡ 0 and A₃ spatially constant with no time dependence.
    A4ZeroA3Const,
    /// A₁ ≡ A₂ ≡ 0.
    A1A2Zero,
}

/// Four matrix potentials with coordinate roles and a gauge tag.
#[derive(Debug, Clone)]
pub struct ConnectionSet {
    a: [MatrixField; 4],
    a_t: [Option<MatrixField>; 4],
    roles: [CoordinateRole; 4],
    gauge: GaugeTag,
}

impl ConnectionSet {
    /// Validated constructor.  `a_t[k]` is ∂ₜA_{k+1}, needed whenever a
    /// residual differentiates A_{k+1} along a coordinate with role `Time`.
    pub fn new(
        a: [MatrixField; 4],
        a_t: [Option<MatrixField>; 4],
        roles: [CoordinateRole; 4],
        gauge: GaugeTag,
    ) -> Result<Self, ConnectionError> {
        let grid = a[0].grid().clone();
        let dim = a[0].dim();
        for pot in &a {
            if pot.grid() != &grid {
                return Err(ConnectionError::Field(FieldError::GridMismatch));
            }
            if pot.dim() != dim {
                return Err(ConnectionError::Field(FieldError::DimMismatch(dim, pot.dim())));
            }
        }
        for role in roles {
            if let CoordinateRole::Axis(ax) = role {
                if ax >= grid.ndim() {
                    return Err(ConnectionError::Field(FieldError::AxisOutOfRange {
                        axis: ax,
                        ndim: grid.ndim(),
                    }));
                }
            }
        }
        let set = Self { a, a_t, roles, gauge };
        set.enforce_gauge()?;
        Ok(set)
    }

    fn enforce_gauge(&self) -> Result<(), ConnectionError> {
        let exactly_zero = |m: &MatrixField| m.max_norm() == 0.0;
        match self.gauge {
            GaugeTag::General => Ok(()),
            GaugeTag::A4Zero => {
                if !exactly_zero(&self.a[3]) {
                    return Err(ConnectionError::GaugeViolation {
                        tag: self.gauge,
                        detail: "A4 is not identically zero".into(),
                    });
                }
                Ok(())
            }
            GaugeTag::A4ZeroA3Const => {
                if !exactly_zero(&self.a[3]) {
                    return Err(ConnectionError::GaugeViolation {
                        tag: self.gauge,
                        detail: "A4 is not identically zero".into(),
                    });
                }
                let a3 = &self.a[2];
                for i in 0..a3.dim() {
                    for j in 0..a3.dim() {
                        let data = a3.entry(i, j).data();
                        if data.iter().any(|&z| z != data[0]) {
                            return Err(ConnectionError::GaugeViolation {
                                tag: self.gauge,
                                detail: format!("A3 entry ({i},{j}) is not spatially constant"),
                            });
                        }
                    }
                }
                if let Some(a3t) = &self.a_t[2] {
                    if !exactly_zero(a3t) {
                        return Err(ConnectionError::GaugeViolation {
                            tag: self.gauge,
                            detail: "A3 declared constant but has a time derivative".into(),
                        });
                    }
                }
                Ok(())
            }
            GaugeTag::A1A2Zero => {
                for (k, name) in [(0usize, "A1"), (1usize, "A2")] {
                    if !exactly_zero(&self.a[k]) {
                        return Err(ConnectionError::GaugeViolation {
                            tag: self.gauge,
                            detail: format!("{name} is not identically zero"),
                        });
                    }
                }
                Ok(())
            }
        }
    }

    /// Potential A_{k+1} (k = 0..4).
    pub fn potential(&self, k: usize) -> &MatrixField {
        &self.a[k]
    }

    /// Supplied time derivative of A_{k+1}, if any.
    pub fn potential_t(&self, k: usize) -> Option<&MatrixField> {
        self.a_t[k].as_ref()
    }

    /// Coordinate roles (ξ₁..ξ₄).
    pub fn roles(&self) -> [CoordinateRole; 4] {
        self.roles
    }

    /// Gauge tag.
    pub fn gauge(&self) -> GaugeTag {
        self.gauge
    }

    /// Shared grid.
    pub fn grid(&self) -> &Grid {
        self.a[0].grid()
    }

    /// Matrix dimension of the potentials.
    pub fn dim(&self) -> usize {
        self.a[0].dim()
    }

    /// ∂_{ξ_{i+1}} A_{k+1}: spectral derivative along a realized axis, the
    /// supplied field for a time coordinate, zero for an absent one.
    pub fn xi_derivative(&self, i: usize, k: usize) -> Result<MatrixField, ConnectionError> {
        match self.roles[i] {
            CoordinateRole::Axis(ax) => {
                Ok(self.a[k].derivative(ax, DerivativeScheme::Spectral)?)
            }
            CoordinateRole::Time => self.a_t[k]
                .clone()
                .ok_or(ConnectionError::MissingTimeDerivative(k + 1)),
            CoordinateRole::Absent => Ok(MatrixField::zeros(self.grid(), self.dim())),
        }
    }

    /// Conjugate the whole set by a group-valued field:
    /// A ↦ h A h⁻¹ + (∂h) h⁻¹ along each realized coordinate (time
    /// derivatives transform with the supplied ∂ₜh).
    ///
    /// This is the gauge action matching the curvature convention
    /// F_ik = ∂ᵢA_k − ∂ₖAᵢ + [A_k, Aᵢ]: curvature transforms covariantly,
    /// F ↦ h F h⁻¹, and the zero connection maps to the flat pure gauge
    /// (∂h) h⁻¹.
    pub fn conjugate(
        &self,
        h: &MatrixField,
        h_t: Option<&MatrixField>,
    ) -> Result<Self, ConnectionError> {
        if h.dim() != 2 {
            return Err(ConnectionError::UnsupportedDim(h.dim()));
        }
        let h_inv = h.inverse2()?;
        let mut new_a: Vec<MatrixField> = Vec::with_capacity(4);
        let mut new_at: Vec<Option<MatrixField>> = Vec::with_capacity(4);
        for i in 0..4 {
            let conjugated = h.matmul(&self.a[i])?.matmul(&h_inv)?;
            let inhom = match self.roles[i] {
                CoordinateRole::Axis(ax) => {
                    h.derivative(ax, DerivativeScheme::Spectral)?.matmul(&h_inv)?
                }
                CoordinateRole::Time => match h_t {
                    Some(ht) => ht.matmul(&h_inv)?,
                    None => MatrixField::zeros(self.grid(), self.dim()),
                },
                CoordinateRole::Absent => MatrixField::zeros(self.grid(), self.dim()),
            };
            new_a.push(conjugated.add(&inhom)?);
            // Time derivatives of conjugated potentials are only propagated
            // when h is static; callers needing moving frames supply them.
            new_at.push(match (&self.a_t[i], h_t) {
                (Some(at), None) => Some(h.matmul(at)?.matmul(&h_inv)?),
                _ => None,
            });
        }
        let a: [MatrixField; 4] = new_a.try_into().expect("exactly four potentials");
        let a_t: [Option<MatrixField>; 4] = new_at.try_into().expect("exactly four potentials");
        ConnectionSet::new(a, a_t, self.roles, GaugeTag::General)
    }
}

/// A unit-length real 3-component spin field.
#[derive(Debug, Clone)]
pub struct SpinField {
    components: Vec3Field,
}

impl SpinField {
    /// Validate reality (each component) and pointwise unit length.
    pub fn new(components: Vec3Field) -> Result<Self, ConnectionError> {
        for (c, name) in components.iter().zip(["s1", "s2", "s3"]) {
            let imag = c.max_imag();
            if imag > REALITY_TOL {
                return Err(ConnectionError::NotReal { name: match name {
                    "s1" => "s1",
                    "s2" => "s2",
                    _ => "s3",
                }, max_imag: imag });
            }
        }
        let norm2 = vector3::dot(&components, &components)?;
        let max_dev = norm2.map(|z| z - 1.0).linf();
        if max_dev > UNIT_TOL {
            return Err(ConnectionError::NotUnit { max_dev });
        }
        Ok(Self { components })
    }

    /// The component fields.
    pub fn components(&self) -> &Vec3Field {
        &self.components
    }

    /// Grid shared by the components.
    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }
}

/// Assemble v·L from so(3) coefficients (v₁, v₂, v₃):
/// the antisymmetric matrix with (2,3) = −v₁, (1,3) = v₂, (1,2) = −v₃.
pub fn so3_from_components(v: &Vec3Field) -> Result<MatrixField, ConnectionError> {
    Ok(MatrixField::combine(
        v[0].grid(),
        &[(&v[0], &so3_l1()), (&v[1], &so3_l2()), (&v[2], &so3_l3())],
    )?)
}

/// The standard coordinate roles of the reduced (2+1) systems:
/// ξ₁ = x (axis 0), ξ₂ = t (time), ξ₃ absent, ξ₄ = y (axis 1).
pub fn reduced_roles() -> [CoordinateRole; 4] {
    [CoordinateRole::Axis(0), CoordinateRole::Time, CoordinateRole::Absent, CoordinateRole::Axis(1)]
}

/// Connection of the (2+1) Zakharov system.
///
/// With a = i(φ − r²φ̄) and b = φ + r²φ̄ the potentials are
/// A₁ = (0, b, −a)·L, A₂ = (−v, −a_y, −b_y)·L, A₃ = −L₁, A₄ = 0, in the
/// gauge with A₄ ≡ 0 and A₃ constant.  The supplied φₜ feeds ∂ₜA₁, the only
/// time derivative the surviving self-duality components use.  Requires
/// r² ∈ {+1, −1} and v real.
pub fn build_zakharov_connection(
    phi: &ScalarField,
    phi_t: &ScalarField,
    v: &ScalarField,
    r2: f64,
) -> Result<ConnectionSet, ConnectionError> {
    if r2 != 1.0 && r2 != -1.0 {
        return Err(ConnectionError::BadParameter(format!("r2 must be +1 or -1, got {r2}")));
    }
    let v_imag = v.max_imag();
    if v_imag > REALITY_TOL * v.linf().max(1.0) {
        return Err(ConnectionError::NotReal { name: "v", max_imag: v_imag });
    }
    let grid = phi.grid().clone();
    if grid.ndim() != 2 {
        return Err(ConnectionError::BadParameter(format!(
            "Zakharov connection needs a 2-d grid, got {} axes",
            grid.ndim()
        )));
    }
    let i = Complex64::new(0.0, 1.0);
    let r2c = Complex64::new(r2, 0.0);

    let pair = |f: &ScalarField| -> Result<(ScalarField, ScalarField), ConnectionError> {
        let fc = f.conj();
        let a = f.sub(&fc.scale(r2c))?.scale(i);
        let b = f.add(&fc.scale(r2c))?;
        Ok((a, b))
    };
    let (a_f, b_f) = pair(phi)?;
    let (a_tf, b_tf) = pair(phi_t)?;
    let a_y = a_f.derivative(1, DerivativeScheme::Spectral)?;
    let b_y = b_f.derivative(1, DerivativeScheme::Spectral)?;

    let zero = ScalarField::zeros(&grid);
    let neg = Complex64::new(-1.0, 0.0);

    let a1 = so3_from_components(&[zero.clone(), b_f.clone(), a_f.scale(neg)])?;
    let a1_t = so3_from_components(&[zero.clone(), b_tf.clone(), a_tf.scale(neg)])?;
    let a2 = so3_from_components(&[v.scale(neg), a_y.scale(neg), b_y.scale(neg)])?;
    let a3 = MatrixField::constant(&grid, &so3_l1().scale(neg));
    let a4 = MatrixField::zeros(&grid, 3);

    // A3 is constant and A4 vanishes, so their time derivatives are exactly
    // zero; recording them keeps every curvature component computable.
    ConnectionSet::new(
        [a1, a2, a3, a4],
        [
            Some(a1_t),
            None,
            Some(MatrixField::zeros(&grid, 3)),
            Some(MatrixField::zeros(&grid, 3)),
        ],
        reduced_roles(),
        GaugeTag::A4ZeroA3Const,
    )
}

/// Connection of the (2+1) spin flow.
///
/// With t = −(s₃, r·s₂, r·s₁) the potentials are A₃ = t·L and
/// A₄ = (t × t_y + u·t)·L in the gauge A₁ ≡ A₂ ≡ 0.  The supplied spin time
/// derivative feeds ∂ₜA₃.  Requires r ∈ {+1, −1}, a unit spin field, and
/// real u.
pub fn build_spin_connection(
    s: &SpinField,
    s_t: &Vec3Field,
    u: &ScalarField,
    r: f64,
) -> Result<ConnectionSet, ConnectionError> {
    if r != 1.0 && r != -1.0 {
        return Err(ConnectionError::BadParameter(format!("r must be +1 or -1, got {r}")));
    }
    let u_imag = u.max_imag();
    if u_imag > REALITY_TOL * u.linf().max(1.0) {
        return Err(ConnectionError::NotReal { name: "u", max_imag: u_imag });
    }
    let grid = s.grid().clone();
    if grid.ndim() != 2 {
        return Err(ConnectionError::BadParameter(format!(
            "spin connection needs a 2-d grid, got {} axes",
            grid.ndim()
        )));
    }
    let neg = Complex64::new(-1.0, 0.0);
    let rc = Complex64::new(r, 0.0);
    let sc = s.components();
    let tvec: Vec3Field =
        [sc[2].scale(neg), sc[1].scale(neg * rc), sc[0].scale(neg * rc)];
    let tvec_t: Vec3Field =
        [s_t[2].scale(neg), s_t[1].scale(neg * rc), s_t[0].scale(neg * rc)];
    let t_y = vector3::derivative(&tvec, 1, DerivativeScheme::Spectral)?;
    let f = vector3::add(&vector3::cross(&tvec, &t_y)?, &vector3::scale_field(&tvec, u)?)?;

    let a1 = MatrixField::zeros(&grid, 3);
    let a2 = MatrixField::zeros(&grid, 3);
    let a3 = so3_from_components(&tvec)?;
    let a3_t = so3_from_components(&tvec_t)?;
    let a4 = so3_from_components(&f)?;

    // A1 and A2 vanish identically, so their time derivatives are exactly
    // zero; recording them keeps every curvature component computable.
    ConnectionSet::new(
        [a1, a2, a3, a4],
        [
            Some(MatrixField::zeros(&grid, 3)),
            Some(MatrixField::zeros(&grid, 3)),
            Some(a3_t),
            None,
        ],
        reduced_roles(),
        GaugeTag::A1A2Zero,
    )
}

/// Pure-gauge connection A_i = (∂_{ξᵢ} g) g⁻¹ for a group-valued field g,
/// along the given coordinate roles (absent coordinates get A = 0).
///
/// With the curvature convention F_ik = ∂ᵢA_k − ∂ₖAᵢ + [A_k, Aᵢ] used
/// throughout, it is this right-invariant combination whose curvature
/// vanishes identically for any smooth g.
pub fn pure_gauge_connection(
    g: &MatrixField,
    roles: [CoordinateRole; 4],
) -> Result<ConnectionSet, ConnectionError> {
    if g.dim() != 2 {
        return Err(ConnectionError::UnsupportedDim(g.dim()));
    }
    let g_inv = g.inverse2()?;
    let grid = g.grid().clone();
    let mut pots: Vec<MatrixField> = Vec::with_capacity(4);
    for role in roles {
        let a = match role {
            CoordinateRole::Axis(ax) => {
                g.derivative(ax, DerivativeScheme::Spectral)?.matmul(&g_inv)?
            }
            CoordinateRole::Absent => MatrixField::zeros(&grid, 2),
            CoordinateRole::Time => {
                return Err(ConnectionError::BadParameter(
                    "pure-gauge connections are built on static grids".into(),
                ))
            }
        };
        pots.push(a);
    }
    let a: [MatrixField; 4] = pots.try_into().expect("exactly four roles");
    ConnectionSet::new(a, [None, None, None, None], roles, GaugeTag::General)
}

/// so(3) → su(2) Lie-algebra isomorphism: the generator of rotations about
/// axis j maps to −(i/2)σⱼ.  Input must be so(3) to working precision.
pub fn so3_su2_map(m: &ComplexMatrix) -> Result<ComplexMatrix, ConnectionError> {
    m.check_tag(MatrixTag::So3)?;
    // Components in the rotation-generator basis.
    let alpha = -m.get(1, 2);
    let beta = m.get(0, 2);
    let gamma = m.get(1, 0);
    let half = Complex64::new(0.0, -0.5);
    let mut out = ComplexMatrix::zeros(2)?;
    // −(i/2)(ασ₁ + βσ₂ + γσ₃)
    out.set(0, 0, half * gamma);
    out.set(0, 1, half * (alpha - Complex64::new(0.0, 1.0) * beta));
    out.set(1, 0, half * (alpha + Complex64::new(0.0, 1.0) * beta));
    out.set(1, 1, -half * gamma);
    Ok(out)
}

/// Inverse isomorphism su(2) → so(3).  Input must be su(2) to working
/// precision.
pub fn su2_so3_map(x: &ComplexMatrix) -> Result<ComplexMatrix, ConnectionError> {
    x.check_tag(MatrixTag::Su2)?;
    let two_i = Complex64::new(0.0, 2.0);
    let gamma = two_i * x.get(0, 0);
    let a_minus_ib = two_i * x.get(0, 1);
    let a_plus_ib = two_i * x.get(1, 0);
    let alpha = (a_plus_ib + a_minus_ib) * 0.5;
    let beta = (a_plus_ib - a_minus_ib) * Complex64::new(0.0, -0.5);
    let mut out = ComplexMatrix::zeros(3)?;
    out.set(1, 2, -alpha);
    out.set(2, 1, alpha);
    out.set(0, 2, beta);
    out.set(2, 0, -beta);
    out.set(0, 1, -gamma);
    out.set(1, 0, gamma);
    Ok(out)
}

/// Apply the so(3) → su(2) isomorphism pointwise to a matrix field.
pub fn so3_su2_map_field(m: &MatrixField) -> Result<MatrixField, ConnectionError> {
    if m.dim() != 3 {
        return Err(ConnectionError::UnsupportedDim(m.dim()));
    }
    let grid = m.grid().clone();
    // Components: α = −m23, β = m13, γ = m21 (entry-linear, so fieldwise).
    let alpha = m.entry(1, 2).scale(Complex64::new(-1.0, 0.0));
    let beta = m.entry(0, 2).clone();
    let gamma = m.entry(1, 0).clone();
    let half = Complex64::new(0.0, -0.5);
    let i = Complex64::new(0.0, 1.0);
    let mut out = MatrixField::zeros(&grid, 2);
    out.set_entry(0, 0, gamma.scale(half));
    out.set_entry(0, 1, alpha.sub(&beta.scale(i))?.scale(half));
    out.set_entry(1, 0, alpha.add(&beta.scale(i))?.scale(half));
    out.set_entry(1, 1, gamma.scale(-half));
    Ok(out)
}

/// Names of the packaged reductions whose curvature components are verified
/// linear images of scalar residuals.
pub fn ledger_entries() -> Vec<&'static str> {
    vec!["zakharov", "m1-spin"]
}
