//! Dense complex matrices and matrix-valued polynomials in a spectral
//! parameter λ.
//!
//! The gauge potentials that appear throughout this crate take values in a
//! matrix Lie algebra — typically su(2) (2×2 anti-Hermitian traceless) or
//! so(3) (3×3 real antisymmetric) — and the linear-problem coefficients are
//! polynomials U(λ) = Σₖ Uₖ λᵏ with matrix coefficients.  This module
//! provides both layers: [`ComplexMatrix`] with optional algebra tags, and
//! [`LambdaMatrix`] with ring operations and evaluation.

use num_complex::Complex64;
use thiserror::Error;

/// Smallest and largest supported matrix dimension.
pub const MIN_DIM: usize = 2;
/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 8;

/// Tolerance used when validating algebra membership tags.
pub const TAG_TOL: f64 = 1e-12;

/// Errors produced by matrix and λ-polynomial operations.
#[derive(Debug, Error)]
pub enum AlgebraError {
    /// Requested dimension is outside the supported range.
    #[error("matrix dimension {0} outside supported range {MIN_DIM}..={MAX_DIM}")]
    BadDimension(usize),
    /// Data length does not match dim × dim.
    #[error("data length {got} does not match {dim}x{dim} matrix")]
    BadLength { dim: usize, got: usize },
    /// Two operands have incompatible dimensions.
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    /// A matrix failed the membership test for its declared algebra.
    #[error("matrix violates {tag:?} membership: deviation {deviation:.3e} exceeds {TAG_TOL:.0e}")]
    TagViolation { tag: MatrixTag, deviation: f64 },
    /// A linear solve met a numerically singular matrix.
    #[error("singular linear system")]
    Singular,
}

/// Lie-algebra membership tag carried by a matrix.
///
/// `Su2` means 2×2 anti-Hermitian and traceless; `So3` means 3×3 real
/// antisymmetric; `General` carries no constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum MatrixTag {
    /// No algebra constraint.
    General,
    /// 2×2 anti-Hermitian traceless.
    Su2,
    /// 3×3 real antisymmetric.
    So3,
}

/// Dense square complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Zero matrix of dimension `dim`.
    pub fn zeros(dim: usize) -> Result<Self, AlgebraError> {
        if !(MIN_DIM..=MAX_DIM).contains(&dim) {
            return Err(AlgebraError::BadDimension(dim));
        }
        Ok(Self { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] })
    }

    /// Identity matrix of dimension `dim`.
    pub fn identity(dim: usize) -> Result<Self, AlgebraError> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Ok(m)
    }

    /// Build from row-major data.
    pub fn from_rows(dim: usize, data: Vec<Complex64>) -> Result<Self, AlgebraError> {
        if !(MIN_DIM..=MAX_DIM).contains(&dim) {
            return Err(AlgebraError::BadDimension(dim));
        }
        if data.len() != dim * dim {
            return Err(AlgebraError::BadLength { dim, got: data.len() });
        }
        Ok(Self { dim, data })
    }

    /// Build from real row-major data.
    pub fn from_real_rows(dim: usize, data: &[f64]) -> Result<Self, AlgebraError> {
        Self::from_rows(dim, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Matrix dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major entries.
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Entry at (row, col).
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    /// Set entry at (row, col).
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    /// How far the matrix is from satisfying `tag` membership
    /// (max entry deviation; 0 for `General`).
    pub fn tag_deviation(&self, tag: MatrixTag) -> f64 {
        match tag {
            MatrixTag::General => 0.0,
            MatrixTag::Su2 => {
                if self.dim != 2 {
                    return f64::INFINITY;
                }
                // Anti-Hermitian: M + M† = 0; traceless: tr M = 0.
                let mut dev: f64 = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        dev = dev.max((self.get(i, j) + self.get(j, i).conj()).norm());
                    }
                }
                dev.max((self.get(0, 0) + self.get(1, 1)).norm())
            }
            MatrixTag::So3 => {
                if self.dim != 3 {
                    return f64::INFINITY;
                }
                let mut dev: f64 = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        dev = dev.max(self.get(i, j).im.abs());
                        dev = dev.max((self.get(i, j) + self.get(j, i)).norm());
                    }
                }
                dev
            }
        }
    }

    /// Validate `tag` membership to [`TAG_TOL`].
    pub fn check_tag(&self, tag: MatrixTag) -> Result<(), AlgebraError> {
        let deviation = self.tag_deviation(tag);
        if deviation > TAG_TOL {
            return Err(AlgebraError::TagViolation { tag, deviation });
        }
        Ok(())
    }

    fn assert_same_dim(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.dim != other.dim {
            return Err(AlgebraError::DimensionMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    /// Element-wise sum.
    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.assert_same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    /// Element-wise difference.
    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.assert_same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    /// Scalar multiple.
    pub fn scale(&self, s: Complex64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|a| a * s).collect() }
    }

    /// Matrix product.
    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.assert_same_dim(other)?;
        let n = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let aik = self.data[i * n + k];
                if aik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += aik * other.data[k * n + j];
                }
            }
        }
        Ok(Self { dim: n, data: out })
    }

    /// Commutator [self, other] = self·other − other·self.
    pub fn commutator(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                out[j * n + i] = self.data[i * n + j].conj();
            }
        }
        Self { dim: n, data: out }
    }

    /// Trace.
    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Matrix exponential by scaling-and-squaring with a Taylor core.
///
/// The argument is scaled by 2⁻ˢ until its Frobenius norm is ≤ 0.5, the
/// series is summed until terms fall below machine precision, and the result
/// is squared back s times.  Accurate to ~1e-15 for the moderate-norm
/// matrices used in this crate.
pub fn matrix_exp(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.dim;
    let norm = m.frobenius_norm();
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = m.scale(Complex64::new(2f64.powi(-(s as i32)), 0.0));

    let mut result = ComplexMatrix::identity(n).expect("dim validated by caller’s matrix");
    let mut term = ComplexMatrix::identity(n).expect("dim validated by caller’s matrix");
    let mut k = 1u32;
    loop {
        term = term.mul(&scaled).expect("same dim").scale(Complex64::new(1.0 / k as f64, 0.0));
        result = result.add(&term).expect("same dim");
        if term.frobenius_norm() < 1e-18 * result.frobenius_norm().max(1.0) || k > 40 {
            break;
        }
        k += 1;
    }
    for _ in 0..s {
        result = result.mul(&result).expect("same dim");
    }
    result
}

/// Pauli matrix σ₁.
pub fn pauli1() -> ComplexMatrix {
    ComplexMatrix::from_rows(
        2,
        vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ],
    )
    .expect("2x2")
}

/// Pauli matrix σ₂.
pub fn pauli2() -> ComplexMatrix {
    ComplexMatrix::from_rows(
        2,
        vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 0.0),
        ],
    )
    .expect("2x2")
}

/// Pauli matrix σ₃.
pub fn pauli3() -> ComplexMatrix {
    ComplexMatrix::from_rows(
        2,
        vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ],
    )
    .expect("2x2")
}

/// so(3) generator L₁ (rotation about the first axis): [L₁,L₂] = L₃ cyclically.
pub fn so3_l1() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(3, &[0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0]).expect("3x3")
}

/// so(3) generator L₂.
pub fn so3_l2() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0]).expect("3x3")
}

/// so(3) generator L₃.
pub fn so3_l3() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).expect("3x3")
}

/// Matrix-valued polynomial in λ, coefficients stored dense from λ⁰ upward.
#[derive(Debug, Clone)]
pub struct LambdaMatrix {
    dim: usize,
    coeffs: Vec<ComplexMatrix>,
}

impl LambdaMatrix {
    /// Build from coefficient list (λ⁰ first).  Must be nonempty and of a
    /// single dimension.
    pub fn new(coeffs: Vec<ComplexMatrix>) -> Result<Self, AlgebraError> {
        let dim = coeffs.first().map(ComplexMatrix::dim).ok_or(AlgebraError::BadDimension(0))?;
        for c in &coeffs {
            if c.dim() != dim {
                return Err(AlgebraError::DimensionMismatch(dim, c.dim()));
            }
        }
        Ok(Self { dim, coeffs })
    }

    /// Zero polynomial of given dimension and number of coefficients.
    pub fn zeros(dim: usize, n_coeffs: usize) -> Result<Self, AlgebraError> {
        let z = ComplexMatrix::zeros(dim)?;
        Ok(Self { dim, coeffs: vec![z; n_coeffs.max(1)] })
    }

    /// Matrix dimension of every coefficient.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coefficient of λᵏ (zero matrix if k exceeds stored degree).
    pub fn coeff(&self, k: usize) -> ComplexMatrix {
        self.coeffs.get(k).cloned().unwrap_or_else(|| ComplexMatrix::zeros(self.dim).expect("dim"))
    }

    /// All stored coefficients, λ⁰ first.
    pub fn coeffs(&self) -> &[ComplexMatrix] {
        &self.coeffs
    }

    /// Largest k with a stored (possibly zero) coefficient.
    pub fn stored_degree(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// Sum of two λ-polynomials.
pub fn lm_add(a: &LambdaMatrix, b: &LambdaMatrix) -> Result<LambdaMatrix, AlgebraError> {
    if a.dim != b.dim {
        return Err(AlgebraError::DimensionMismatch(a.dim, b.dim));
    }
    let len = a.coeffs.len().max(b.coeffs.len());
    let mut coeffs = Vec::with_capacity(len);
    for k in 0..len {
        coeffs.push(a.coeff(k).add(&b.coeff(k))?);
    }
    LambdaMatrix::new(coeffs)
}

/// Difference of two λ-polynomials.
pub fn lm_sub(a: &LambdaMatrix, b: &LambdaMatrix) -> Result<LambdaMatrix, AlgebraError> {
    lm_add(a, &LambdaMatrix::new(b.coeffs.iter().map(|c| c.scale(Complex64::new(-1.0, 0.0))).collect())?)
}

/// Product of two λ-polynomials (Cauchy convolution of coefficients).
pub fn lm_mul(a: &LambdaMatrix, b: &LambdaMatrix) -> Result<LambdaMatrix, AlgebraError> {
    if a.dim != b.dim {
        return Err(AlgebraError::DimensionMismatch(a.dim, b.dim));
    }
    let len = a.coeffs.len() + b.coeffs.len() - 1;
    let mut coeffs = vec![ComplexMatrix::zeros(a.dim)?; len];
    for (i, ca) in a.coeffs.iter().enumerate() {
        for (j, cb) in b.coeffs.iter().enumerate() {
            coeffs[i + j] = coeffs[i + j].add(&ca.mul(cb)?)?;
        }
    }
    LambdaMatrix::new(coeffs)
}

/// Commutator [a, b] = a·b − b·a of λ-polynomials.
pub fn lm_commutator(a: &LambdaMatrix, b: &LambdaMatrix) -> Result<LambdaMatrix, AlgebraError> {
    lm_sub(&lm_mul(a, b)?, &lm_mul(b, a)?)
}

/// Solve a small dense complex linear system by Gaussian elimination with
/// partial pivoting.  `a` is n×n row-major; returns x with a·x = b.
pub fn solve_linear(n: usize, a: &[Complex64], b: &[Complex64]) -> Result<Vec<Complex64>, AlgebraError> {
    if a.len() != n * n || b.len() != n {
        return Err(AlgebraError::BadLength { dim: n, got: a.len() });
    }
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                m[i * n + col].norm().partial_cmp(&m[j * n + col].norm()).expect("finite")
            })
            .expect("nonempty range");
        if m[pivot * n + col].norm() == 0.0 {
            return Err(AlgebraError::Singular);
        }
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
            rhs.swap(col, pivot);
        }
        for row in col + 1..n {
            let factor = m[row * n + col] / m[col * n + col];
            for k in col..n {
                let sub = factor * m[col * n + k];
                m[row * n + k] -= sub;
            }
            let sub = factor * rhs[col];
            rhs[row] -= sub;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc -= m[row * n + k] * x[k];
        }
        x[row] = acc / m[row * n + row];
    }
    Ok(x)
}

/// Determinant of a small dense complex matrix (Gaussian elimination).
pub fn determinant(n: usize, a: &[Complex64]) -> Complex64 {
    let mut m = a.to_vec();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                m[i * n + col].norm().partial_cmp(&m[j * n + col].norm()).expect("finite")
            })
            .expect("nonempty range");
        if m[pivot * n + col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
            det = -det;
        }
        det *= m[col * n + col];
        for row in col + 1..n {
            let factor = m[row * n + col] / m[col * n + col];
            for k in col..n {
                let sub = factor * m[col * n + k];
                m[row * n + k] -= sub;
            }
        }
    }
    det
}

/// Evaluate the polynomial at a value of λ (Horner scheme).
pub fn lm_eval(p: &LambdaMatrix, lambda: Complex64) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(p.dim).expect("validated dim");
    for c in p.coeffs.iter().rev() {
        acc = acc.scale(lambda).add(c).expect("same dim");
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_is_multiplicative_unit() {
        let i2 = ComplexMatrix::identity(2).unwrap();
        let a = ComplexMatrix::from_rows(2, vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 1.0), c(3.0, -1.0)])
            .unwrap();
        assert_eq!(a.mul(&i2).unwrap(), a, "right identity must not change the matrix");
        assert_eq!(i2.mul(&a).unwrap(), a, "left identity must not change the matrix");
    }

    #[test]
    fn dimension_bounds_are_enforced() {
        assert!(ComplexMatrix::zeros(1).is_err(), "dim 1 is below the supported range");
        assert!(ComplexMatrix::zeros(9).is_err(), "dim 9 is above the supported range");
        assert!(ComplexMatrix::zeros(8).is_ok(), "dim 8 is the inclusive upper bound");
    }

    #[test]
    fn pauli_commutator_closes_with_structure_constant_2i() {
        // [σ₁, σ₂] = 2iσ₃ and cyclic permutations.
        let lhs = pauli1().commutator(&pauli2()).unwrap();
        let rhs = pauli3().scale(c(0.0, 2.0));
        assert!(
            lhs.sub(&rhs).unwrap().max_norm() < 1e-15,
            "[sigma1, sigma2] must equal 2i sigma3"
        );
        let lhs = pauli2().commutator(&pauli3()).unwrap();
        let rhs = pauli1().scale(c(0.0, 2.0));
        assert!(lhs.sub(&rhs).unwrap().max_norm() < 1e-15, "[sigma2, sigma3] must equal 2i sigma1");
    }

    #[test]
    fn so3_generators_close_cyclically() {
        // [L₁, L₂] = L₃ and cyclic permutations.
        for (a, b, expect) in [
            (so3_l1(), so3_l2(), so3_l3()),
            (so3_l2(), so3_l3(), so3_l1()),
            (so3_l3(), so3_l1(), so3_l2()),
        ] {
            let lhs = a.commutator(&b).unwrap();
            assert!(
                lhs.sub(&expect).unwrap().max_norm() < 1e-15,
                "so(3) generators must close cyclically with unit structure constants"
            );
        }
    }

    #[test]
    fn tags_accept_members_and_reject_violations() {
        // −(i/2)σ₃ is anti-Hermitian traceless.
        let su2 = pauli3().scale(c(0.0, -0.5));
        assert!(su2.check_tag(MatrixTag::Su2).is_ok(), "-(i/2) sigma3 lies in su(2)");
        // σ₃ itself is Hermitian, not anti-Hermitian.
        assert!(pauli3().check_tag(MatrixTag::Su2).is_err(), "sigma3 is not in su(2)");
        assert!(so3_l2().check_tag(MatrixTag::So3).is_ok(), "L2 lies in so(3)");
        let mut bad = so3_l2();
        bad.set(0, 0, c(1e-6, 0.0));
        assert!(bad.check_tag(MatrixTag::So3).is_err(), "diagonal entry breaks antisymmetry");
    }

    #[test]
    fn commutator_is_antisymmetric_and_satisfies_jacobi() {
        let a = ComplexMatrix::from_rows(2, vec![c(0.3, 1.0), c(2.0, -0.7), c(0.1, 0.4), c(-1.0, 0.2)])
            .unwrap();
        let b = ComplexMatrix::from_rows(2, vec![c(1.5, 0.0), c(0.0, 0.9), c(-0.3, 0.0), c(0.8, -1.1)])
            .unwrap();
        let d = ComplexMatrix::from_rows(2, vec![c(0.0, 0.2), c(1.0, 1.0), c(0.5, -0.5), c(0.7, 0.0)])
            .unwrap();
        let anti = a.commutator(&b).unwrap().add(&b.commutator(&a).unwrap()).unwrap();
        assert!(anti.max_norm() < 1e-14, "[a,b] + [b,a] must vanish");
        let jacobi = a
            .commutator(&b.commutator(&d).unwrap())
            .unwrap()
            .add(&b.commutator(&d.commutator(&a).unwrap()).unwrap())
            .unwrap()
            .add(&d.commutator(&a.commutator(&b).unwrap()).unwrap())
            .unwrap();
        assert!(jacobi.max_norm() < 1e-13, "Jacobi identity must hold");
    }

    #[test]
    fn matrix_exp_reproduces_rotation_about_third_axis() {
        // exp(θL₃) is the planar rotation by θ in the (1,2) block.
        let theta = 0.7343;
        let expm = matrix_exp(&so3_l3().scale(c(theta, 0.0)));
        let expected = ComplexMatrix::from_real_rows(
            3,
            &[
                theta.cos(),
                -theta.sin(),
                0.0,
                theta.sin(),
                theta.cos(),
                0.0,
                0.0,
                0.0,
                1.0,
            ],
        )
        .unwrap();
        assert!(
            expm.sub(&expected).unwrap().max_norm() < 1e-14,
            "exp(theta L3) must be the rotation matrix by theta"
        );
    }

    #[test]
    fn matrix_exp_of_diagonal_gives_entrywise_phases() {
        // exp(iθσ₃) = diag(e^{iθ}, e^{−iθ}).
        let theta = 1.9;
        let expm = matrix_exp(&pauli3().scale(c(0.0, theta)));
        let expected = ComplexMatrix::from_rows(
            2,
            vec![Complex64::from_polar(1.0, theta), c(0.0, 0.0), c(0.0, 0.0), Complex64::from_polar(1.0, -theta)],
        )
        .unwrap();
        assert!(
            expm.sub(&expected).unwrap().max_norm() < 1e-13,
            "exp(i theta sigma3) must be a diagonal phase matrix"
        );
    }

    #[test]
    fn matrix_exp_inverse_is_exp_of_negation() {
        let a = ComplexMatrix::from_rows(2, vec![c(0.1, 0.9), c(1.2, -0.3), c(-0.4, 0.6), c(-0.1, -0.9)])
            .unwrap();
        let prod = matrix_exp(&a).mul(&matrix_exp(&a.scale(c(-1.0, 0.0)))).unwrap();
        let dev = prod.sub(&ComplexMatrix::identity(2).unwrap()).unwrap().max_norm();
        assert!(dev < 1e-13, "exp(A) exp(-A) must be the identity, deviation {dev:.3e}");
    }

    #[test]
    fn lambda_product_expands_difference_of_squares() {
        // (I + λσ₁)(I − λσ₁) = I − λ²I because σ₁² = I.
        let i2 = ComplexMatrix::identity(2).unwrap();
        let p = LambdaMatrix::new(vec![i2.clone(), pauli1()]).unwrap();
        let q = LambdaMatrix::new(vec![i2.clone(), pauli1().scale(c(-1.0, 0.0))]).unwrap();
        let prod = lm_mul(&p, &q).unwrap();
        assert!(prod.coeff(0).sub(&i2).unwrap().max_norm() < 1e-15, "constant term must be I");
        assert!(prod.coeff(1).max_norm() < 1e-15, "linear term must cancel");
        assert!(
            prod.coeff(2).add(&i2).unwrap().max_norm() < 1e-15,
            "quadratic term must be minus the identity"
        );
    }

    #[test]
    fn lambda_eval_agrees_with_coefficient_sum() {
        let p = LambdaMatrix::new(vec![pauli1(), pauli2(), pauli3()]).unwrap();
        let lam = c(0.7, -0.2);
        let direct = pauli1()
            .add(&pauli2().scale(lam))
            .unwrap()
            .add(&pauli3().scale(lam * lam))
            .unwrap();
        let horner = lm_eval(&p, lam);
        assert!(
            horner.sub(&direct).unwrap().max_norm() < 1e-15,
            "Horner evaluation must match the explicit power sum"
        );
    }

    #[test]
    fn lambda_commutator_of_commuting_polynomials_vanishes() {
        let p = LambdaMatrix::new(vec![pauli3(), pauli3().scale(c(2.0, 0.0))]).unwrap();
        let q = LambdaMatrix::new(vec![ComplexMatrix::identity(2).unwrap(), pauli3()]).unwrap();
        let comm = lm_commutator(&p, &q).unwrap();
        for k in 0..=comm.stored_degree() {
            assert!(
                comm.coeff(k).max_norm() < 1e-15,
                "polynomials in sigma3 alone must commute at every power"
            );
        }
    }
}
