//! Triples of scalar fields treated as sampled 3-vectors.
//!
//! Spin systems work with unit vectors S = (s₁, s₂, s₃) and need pointwise
//! cross and dot products alongside component-wise calculus.  A `Vec3Field`
//! is just an array of three scalar fields with those operations.

use num_complex::Complex64;

use crate::fields::{DerivativeScheme, FieldError, ScalarField};

/// Three scalar fields forming a sampled vector field.
pub type Vec3Field = [ScalarField; 3];

/// Pointwise cross product a × b.
pub fn cross(a: &Vec3Field, b: &Vec3Field) -> Result<Vec3Field, FieldError> {
    Ok([
        a[1].mul(&b[2])?.sub(&a[2].mul(&b[1])?)?,
        a[2].mul(&b[0])?.sub(&a[0].mul(&b[2])?)?,
        a[0].mul(&b[1])?.sub(&a[1].mul(&b[0])?)?,
    ])
}

/// Pointwise dot product a · b.
pub fn dot(a: &Vec3Field, b: &Vec3Field) -> Result<ScalarField, FieldError> {
    a[0].mul(&b[0])?.add(&a[1].mul(&b[1])?)?.add(&a[2].mul(&b[2])?)
}

/// Component-wise sum.
pub fn add(a: &Vec3Field, b: &Vec3Field) -> Result<Vec3Field, FieldError> {
    Ok([a[0].add(&b[0])?, a[1].add(&b[1])?, a[2].add(&b[2])?])
}

/// Component-wise difference.
pub fn sub(a: &Vec3Field, b: &Vec3Field) -> Result<Vec3Field, FieldError> {
    Ok([a[0].sub(&b[0])?, a[1].sub(&b[1])?, a[2].sub(&b[2])?])
}

/// Multiply every component by a scalar field.
pub fn scale_field(a: &Vec3Field, f: &ScalarField) -> Result<Vec3Field, FieldError> {
    Ok([a[0].mul(f)?, a[1].mul(f)?, a[2].mul(f)?])
}

/// Multiply every component by a constant.
pub fn scale(a: &Vec3Field, s: Complex64) -> Vec3Field {
    [a[0].scale(s), a[1].scale(s), a[2].scale(s)]
}

/// Component-wise derivative.
pub fn derivative(
    a: &Vec3Field,
    axis: usize,
    scheme: DerivativeScheme,
) -> Result<Vec3Field, FieldError> {
    Ok([
        a[0].derivative(axis, scheme)?,
        a[1].derivative(axis, scheme)?,
        a[2].derivative(axis, scheme)?,
    ])
}

/// Largest component sup-norm.
pub fn linf(a: &Vec3Field) -> f64 {
    a.iter().map(ScalarField::linf).fold(0.0, f64::max)
}

/// Root of summed squared component L² norms.
pub fn l2(a: &Vec3Field) -> f64 {
    a.iter().map(|f| f.norms().l2.powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid;
    use crate::sampling::FieldSampler;

    #[test]
    fn cross_product_is_orthogonal_to_both_factors() {
        let g = Grid::new(&[16, 16], &[1.0, 1.0]).unwrap();
        let mut s = FieldSampler::new(4);
        let a = [s.real_field(&g, 1.0), s.real_field(&g, 1.0), s.real_field(&g, 1.0)];
        let b = [s.real_field(&g, 1.0), s.real_field(&g, 1.0), s.real_field(&g, 1.0)];
        let c = cross(&a, &b).unwrap();
        assert!(dot(&a, &c).unwrap().linf() < 1e-14, "a x b must be orthogonal to a");
        assert!(dot(&b, &c).unwrap().linf() < 1e-14, "a x b must be orthogonal to b");
    }

    #[test]
    fn scalar_triple_product_is_cyclic() {
        let g = Grid::new(&[8, 8], &[1.0, 1.0]).unwrap();
        let mut s = FieldSampler::new(6);
        let a = [s.real_field(&g, 1.0), s.real_field(&g, 1.0), s.real_field(&g, 1.0)];
        let b = [s.real_field(&g, 1.0), s.real_field(&g, 1.0), s.real_field(&g, 1.0)];
        let c = [s.real_field(&g, 1.0), s.real_field(&g, 1.0), s.real_field(&g, 1.0)];
        let abc = dot(&a, &cross(&b, &c).unwrap()).unwrap();
        let bca = dot(&b, &cross(&c, &a).unwrap()).unwrap();
        assert!(
            abc.sub(&bca).unwrap().linf() < 1e-14,
            "triple product must be invariant under cyclic permutation"
        );
    }
}
