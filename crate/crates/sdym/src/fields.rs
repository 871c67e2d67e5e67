//! Periodic sampled fields on 1-, 2-, or 3-dimensional rectangular grids.
//!
//! Every field in this crate lives on a torus: `Grid` fixes the sizes and
//! physical periods, `ScalarField` holds complex samples in C (row-major)
//! order, and `MatrixField` is a square matrix of scalar fields.  Partial
//! derivatives are available spectrally (exact for band-limited data, with
//! the Nyquist mode of odd-order multipliers zeroed) or as 2nd/4th-order
//! centered differences.  The x-antiderivative inverts ∂ₓ in the zero-mean
//! gauge: it requires the integrand to be mean-free along x (or subtracts
//! the mean when asked) and returns the primitive with zero x-mean.

use num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

/// Minimum points per axis.
pub const MIN_SIZE: usize = 8;

/// Relative tolerance for the mean-free precondition of [`ScalarField::antiderivative_x`].
pub const MEAN_TOL: f64 = 1e-10;

/// Sup-norm below which a field counts as numerically zero; such fields skip
/// the mean-free precondition of [`ScalarField::antiderivative_x`].
pub const ZERO_FLOOR: f64 = 1e-13;

/// Errors produced by grid and field operations.
#[derive(Debug, Error)]
pub enum FieldError {
    /// Grid construction rejected the requested shape.
    #[error("invalid grid: {0}")]
    BadGrid(String),
    /// Two operands live on different grids.
    #[error("grid mismatch between operands")]
    GridMismatch,
    /// Axis index exceeds the grid dimension.
    #[error("axis {axis} out of range for {ndim}-dimensional grid")]
    AxisOutOfRange { axis: usize, ndim: usize },
    /// The x-antiderivative was asked for a field with a nonzero x-mean.
    #[error(
        "x-mean violation: max |mean_x| = {max_mean:.3e} exceeds {MEAN_TOL:.0e} x linf = {threshold:.3e}; \
         pass mean_subtract to project onto the zero-mean gauge"
    )]
    MeanViolation { max_mean: f64, threshold: f64 },
    /// Data length does not match the grid.
    #[error("data length {got} does not match grid with {expected} points")]
    BadLength { expected: usize, got: usize },
    /// A matrix-field operation saw inconsistent matrix dimensions.
    #[error("matrix dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
}

/// Finite-difference / spectral scheme selector for [`ScalarField::derivative`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeScheme {
    /// Exact differentiation of the trigonometric interpolant.
    Spectral,
    /// 2nd-order centered difference.
    Central2,
    /// 4th-order centered difference.
    Central4,
}

/// L¹/L²/L∞ norms of a sampled field (L¹ and L² are measure-weighted).
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct FieldNorms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Rectangular periodic grid: per-axis point counts and physical periods.
///
/// Axis 0 is x, axis 1 is y, axis 2 is the auxiliary third coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    sizes: Vec<usize>,
    lengths: Vec<f64>,
}

impl Grid {
    /// Validated constructor: 1 to 3 axes, each with ≥ [`MIN_SIZE`] points
    /// and a positive period.
    pub fn new(sizes: &[usize], lengths: &[f64]) -> Result<Self, FieldError> {
        if sizes.is_empty() || sizes.len() > 3 {
            return Err(FieldError::BadGrid(format!("{} axes (need 1..=3)", sizes.len())));
        }
        if sizes.len() != lengths.len() {
            return Err(FieldError::BadGrid("sizes/lengths count differ".into()));
        }
        for (&n, &l) in sizes.iter().zip(lengths) {
            if n < MIN_SIZE {
                return Err(FieldError::BadGrid(format!("axis size {n} below minimum {MIN_SIZE}")));
            }
            if !(l > 0.0) || !l.is_finite() {
                return Err(FieldError::BadGrid(format!("axis length {l} must be positive")));
            }
        }
        Ok(Self { sizes: sizes.to_vec(), lengths: lengths.to_vec() })
    }

    /// Number of axes.
    pub fn ndim(&self) -> usize {
        self.sizes.len()
    }

    /// Points along `axis`.
    pub fn size(&self, axis: usize) -> usize {
        self.sizes[axis]
    }

    /// All axis sizes.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Physical period along `axis`.
    pub fn length(&self, axis: usize) -> f64 {
        self.lengths[axis]
    }

    /// All axis periods.
    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Grid spacing along `axis`.
    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.sizes[axis] as f64
    }

    /// Total number of points.
    pub fn total_points(&self) -> usize {
        self.sizes.iter().product()
    }

    /// Volume of one cell (product of spacings).
    pub fn cell_volume(&self) -> f64 {
        (0..self.ndim()).map(|a| self.spacing(a)).product()
    }

    /// C-order strides.
    pub fn strides(&self) -> Vec<usize> {
        let nd = self.ndim();
        let mut s = vec![1usize; nd];
        for a in (0..nd.saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.sizes[a + 1];
        }
        s
    }

    /// Coordinate of point `i` along `axis`.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        i as f64 * self.spacing(axis)
    }

    /// Angular wavenumbers along `axis` in FFT order (0, 1, …, −1 times 2π/L).
    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        let n = self.sizes[axis];
        let base = 2.0 * std::f64::consts::PI / self.lengths[axis];
        (0..n)
            .map(|m| {
                let m_signed = if m <= n / 2 { m as isize } else { m as isize - n as isize };
                base * m_signed as f64
            })
            .collect()
    }

    /// Decompose a flat C-order index into per-axis indices.
    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let strides = self.strides();
        let mut rem = flat;
        strides
            .iter()
            .map(|&s| {
                let i = rem / s;
                rem %= s;
                i
            })
            .collect()
    }

    /// Coordinates of a flat index.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat).iter().enumerate().map(|(a, &i)| self.coord(a, i)).collect()
    }

    fn check_axis(&self, axis: usize) -> Result<(), FieldError> {
        if axis >= self.ndim() {
            return Err(FieldError::AxisOutOfRange { axis, ndim: self.ndim() });
        }
        Ok(())
    }

    /// Flat base indices of every lane along `axis` (points with axis index 0).
    fn lane_bases(&self, axis: usize) -> Vec<usize> {
        let strides = self.strides();
        let mut bases = Vec::with_capacity(self.total_points() / self.sizes[axis]);
        let nd = self.ndim();
        let mut idx = vec![0usize; nd];
        loop {
            if idx[axis] == 0 {
                let flat: usize = idx.iter().zip(&strides).map(|(&i, &s)| i * s).sum();
                bases.push(flat);
            }
            // Odometer increment skipping the lane axis.
            let mut a = nd;
            loop {
                if a == 0 {
                    return bases;
                }
                a -= 1;
                if a == axis {
                    continue;
                }
                idx[a] += 1;
                if idx[a] < self.sizes[a] {
                    break;
                }
                idx[a] = 0;
            }
            if idx.iter().all(|&i| i == 0) {
                return bases;
            }
        }
    }
}

/// Complex scalar samples on a [`Grid`], C order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    data: Vec<Complex64>,
}

impl ScalarField {
    /// All-zero field.
    pub fn zeros(grid: &Grid) -> Self {
        Self { grid: grid.clone(), data: vec![Complex64::new(0.0, 0.0); grid.total_points()] }
    }

    /// Constant field.
    pub fn constant(grid: &Grid, value: Complex64) -> Self {
        Self { grid: grid.clone(), data: vec![value; grid.total_points()] }
    }

    /// Sample a closure of the coordinates.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(grid.total_points());
        for flat in 0..grid.total_points() {
            data.push(f(&grid.point(flat)));
        }
        Self { grid: grid.clone(), data }
    }

    /// Wrap existing data.
    pub fn from_data(grid: &Grid, data: Vec<Complex64>) -> Result<Self, FieldError> {
        if data.len() != grid.total_points() {
            return Err(FieldError::BadLength { expected: grid.total_points(), got: data.len() });
        }
        Ok(Self { grid: grid.clone(), data })
    }

    /// The underlying grid.
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Raw samples.
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Mutable raw samples.
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    fn check_same_grid(&self, other: &Self) -> Result<(), FieldError> {
        if self.grid != other.grid {
            return Err(FieldError::GridMismatch);
        }
        Ok(())
    }

    /// Apply a pointwise map.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { grid: self.grid.clone(), data: self.data.iter().map(|&z| f(z)).collect() }
    }

    /// Combine two fields pointwise.
    pub fn zip_map(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self, FieldError> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Pointwise sum.
    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.zip_map(other, |a, b| a + b)
    }

    /// Pointwise difference.
    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.zip_map(other, |a, b| a - b)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.zip_map(other, |a, b| a * b)
    }

    /// Scalar multiple.
    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    /// Complex conjugate.
    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    /// Pointwise |f|² as a real-valued field.
    pub fn modulus_squared(&self) -> Self {
        self.map(|z| Complex64::new(z.norm_sqr(), 0.0))
    }

    /// Mean over the whole grid.
    pub fn mean(&self) -> Complex64 {
        self.data.iter().sum::<Complex64>() / self.data.len() as f64
    }

    /// Max |Im| over the grid — distance from being a real field.
    pub fn max_imag(&self) -> f64 {
        self.data.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Max modulus over the grid.
    pub fn linf(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Measure-weighted L¹/L²/L∞ norms.
    pub fn norms(&self) -> FieldNorms {
        let dv = self.grid.cell_volume();
        let l1 = self.data.iter().map(|z| z.norm()).sum::<f64>() * dv;
        let l2 = (self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * dv).sqrt();
        FieldNorms { l1, l2, linf: self.linf() }
    }

    /// In-place FFT along one axis.  `forward = false` applies the inverse
    /// transform including the 1/n normalization.
    pub(crate) fn fft_axis(&mut self, axis: usize, forward: bool) {
        let n = self.grid.size(axis);
        let stride = self.grid.strides()[axis];
        let mut planner = FftPlanner::<f64>::new();
        let fft =
            if forward { planner.plan_fft_forward(n) } else { planner.plan_fft_inverse(n) };
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let scale = if forward { 1.0 } else { 1.0 / n as f64 };
        for base in self.grid.lane_bases(axis) {
            for (j, b) in buf.iter_mut().enumerate() {
                *b = self.data[base + j * stride];
            }
            fft.process(&mut buf);
            for (j, b) in buf.iter().enumerate() {
                self.data[base + j * stride] = b * scale;
            }
        }
    }

    /// Apply a per-mode multiplier along one axis (forward FFT, multiply,
    /// inverse FFT).
    fn apply_axis_multiplier(&self, axis: usize, mult: &[Complex64]) -> Self {
        let mut out = self.clone();
        out.fft_axis(axis, true);
        let stride = out.grid.strides()[axis];
        let n = out.grid.size(axis);
        for base in out.grid.lane_bases(axis) {
            for j in 0..n {
                out.data[base + j * stride] *= mult[j];
            }
        }
        out.fft_axis(axis, false);
        out
    }

    /// First partial derivative along `axis`.
    pub fn derivative(&self, axis: usize, scheme: DerivativeScheme) -> Result<Self, FieldError> {
        self.grid.check_axis(axis)?;
        match scheme {
            DerivativeScheme::Spectral => {
                let n = self.grid.size(axis);
                let ks = self.grid.wavenumbers(axis);
                let mult: Vec<Complex64> = (0..n)
                    .map(|m| {
                        // Zero the unpaired Nyquist mode of this odd-order operator.
                        if n % 2 == 0 && m == n / 2 {
                            Complex64::new(0.0, 0.0)
                        } else {
                            Complex64::new(0.0, ks[m])
                        }
                    })
                    .collect();
                Ok(self.apply_axis_multiplier(axis, &mult))
            }
            DerivativeScheme::Central2 => self.centered_difference(axis, &[(1, 0.5), (-1, -0.5)]),
            DerivativeScheme::Central4 => self.centered_difference(
                axis,
                &[(1, 8.0 / 12.0), (-1, -8.0 / 12.0), (2, -1.0 / 12.0), (-2, 1.0 / 12.0)],
            ),
        }
    }

    /// Periodic centered difference with (offset, weight/h) pairs.
    fn centered_difference(&self, axis: usize, stencil: &[(isize, f64)]) -> Result<Self, FieldError> {
        let n = self.grid.size(axis) as isize;
        let stride = self.grid.strides()[axis];
        let h = self.grid.spacing(axis);
        let mut out = ScalarField::zeros(&self.grid);
        for base in self.grid.lane_bases(axis) {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(off, w) in stencil {
                    let jj = (j + off).rem_euclid(n) as usize;
                    acc += self.data[base + jj * stride] * (w / h);
                }
                out.data[base + j as usize * stride] = acc;
            }
        }
        Ok(out)
    }

    /// Largest per-lane mean modulus along x (axis 0).
    pub fn x_mean_max(&self) -> f64 {
        let n = self.grid.size(0);
        let stride = self.grid.strides()[0];
        let mut worst: f64 = 0.0;
        for base in self.grid.lane_bases(0) {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                s += self.data[base + j * stride];
            }
            worst = worst.max((s / n as f64).norm());
        }
        worst
    }

    /// Subtract the per-lane x-mean (projection onto x-mean-free fields).
    pub fn subtract_x_mean(&self) -> Self {
        let n = self.grid.size(0);
        let stride = self.grid.strides()[0];
        let mut out = self.clone();
        for base in self.grid.lane_bases(0) {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                s += self.data[base + j * stride];
            }
            let mean = s / n as f64;
            for j in 0..n {
                out.data[base + j * stride] -= mean;
            }
        }
        out
    }

    /// Inverse of ∂ₓ in the zero-mean gauge.
    ///
    /// Requires max |mean_x| ≤ [`MEAN_TOL`]·‖f‖∞ unless `mean_subtract` is
    /// set, in which case the per-lane x-mean is removed first.  The result
    /// has zero x-mean on every lane and satisfies ∂ₓ(result) = f − mean_x(f).
    pub fn antiderivative_x(&self, mean_subtract: bool) -> Result<Self, FieldError> {
        // Fields at roundoff level are treated as zero: their lane means are
        // equally at roundoff level and carry no meaningful obstruction.
        let linf = self.linf();
        let threshold = MEAN_TOL * linf.max(f64::MIN_POSITIVE);
        let max_mean = self.x_mean_max();
        if !mean_subtract && linf > ZERO_FLOOR && max_mean > threshold {
            return Err(FieldError::MeanViolation { max_mean, threshold });
        }
        let n = self.grid.size(0);
        let ks = self.grid.wavenumbers(0);
        let mult: Vec<Complex64> = (0..n)
            .map(|m| {
                if m == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(1.0, 0.0) / Complex64::new(0.0, ks[m])
                }
            })
            .collect();
        Ok(self.apply_axis_multiplier(0, &mult))
    }

    /// Apply a multiplier over the full wavevector: transform along every
    /// axis, scale each mode by `mult(&k)`, transform back.
    ///
    /// Wavenumbers arrive in FFT order with the unpaired Nyquist mode of an
    /// even-sized axis reported at its positive value.  Exact phase factors
    /// for constant-coefficient evolution operators — e^{ik²t}, integrating
    /// factors, spectral translations, dealiasing masks — are all instances.
    pub fn spectral_map(&self, mult: impl Fn(&[f64]) -> Complex64) -> Self {
        let nd = self.grid.ndim();
        let tables: Vec<Vec<f64>> = (0..nd).map(|a| self.grid.wavenumbers(a)).collect();
        let mut out = self.clone();
        for axis in 0..nd {
            out.fft_axis(axis, true);
        }
        // C-order odometer over the data, last axis fastest.
        let mut idx = vec![0usize; nd];
        let mut k: Vec<f64> = tables.iter().map(|t| t[0]).collect();
        for v in out.data.iter_mut() {
            *v *= mult(&k);
            let mut a = nd;
            while a > 0 {
                a -= 1;
                idx[a] += 1;
                if idx[a] < self.grid.sizes[a] {
                    k[a] = tables[a][idx[a]];
                    break;
                }
                idx[a] = 0;
                k[a] = tables[a][0];
            }
        }
        for axis in 0..nd {
            out.fft_axis(axis, false);
        }
        out
    }
}

/// Square matrix of scalar fields on a common grid (entry-major storage).
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixField {
    dim: usize,
    entries: Vec<ScalarField>,
}

impl MatrixField {
    /// Zero matrix field.
    pub fn zeros(grid: &Grid, dim: usize) -> Self {
        Self { dim, entries: vec![ScalarField::zeros(grid); dim * dim] }
    }

    /// Spatially constant matrix field.
    pub fn constant(grid: &Grid, m: &crate::algebra::ComplexMatrix) -> Self {
        let mut out = Self::zeros(grid, m.dim());
        for i in 0..m.dim() {
            for j in 0..m.dim() {
                out.entries[i * m.dim() + j] = ScalarField::constant(grid, m.get(i, j));
            }
        }
        out
    }

    /// Build from entry fields in row-major order.
    pub fn from_entries(dim: usize, entries: Vec<ScalarField>) -> Result<Self, FieldError> {
        if entries.len() != dim * dim {
            return Err(FieldError::BadLength { expected: dim * dim, got: entries.len() });
        }
        for e in &entries[1..] {
            if e.grid() != entries[0].grid() {
                return Err(FieldError::GridMismatch);
            }
        }
        Ok(Self { dim, entries })
    }

    /// Linear combination Σ fieldᵢ ⊗ matrixᵢ of scalar fields against
    /// constant matrices — the natural way to build Lie-algebra-valued
    /// potentials from component fields.
    pub fn combine(
        grid: &Grid,
        terms: &[(&ScalarField, &crate::algebra::ComplexMatrix)],
    ) -> Result<Self, FieldError> {
        let dim = terms.first().map(|(_, m)| m.dim()).unwrap_or(2);
        let mut out = Self::zeros(grid, dim);
        for (f, m) in terms {
            if m.dim() != dim {
                return Err(FieldError::DimMismatch(dim, m.dim()));
            }
            if f.grid() != grid {
                return Err(FieldError::GridMismatch);
            }
            for i in 0..dim {
                for j in 0..dim {
                    let c = m.get(i, j);
                    if c != Complex64::new(0.0, 0.0) {
                        out.entries[i * dim + j] =
                            out.entries[i * dim + j].add(&f.scale(c))?;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Matrix dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Grid shared by all entries.
    pub fn grid(&self) -> &Grid {
        self.entries[0].grid()
    }

    /// Entry (i, j).
    pub fn entry(&self, i: usize, j: usize) -> &ScalarField {
        &self.entries[i * self.dim + j]
    }

    /// Replace entry (i, j).
    pub fn set_entry(&mut self, i: usize, j: usize, f: ScalarField) {
        self.entries[i * self.dim + j] = f;
    }

    fn check_compatible(&self, other: &Self) -> Result<(), FieldError> {
        if self.dim != other.dim {
            return Err(FieldError::DimMismatch(self.dim, other.dim));
        }
        if self.grid() != other.grid() {
            return Err(FieldError::GridMismatch);
        }
        Ok(())
    }

    /// Pointwise sum.
    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.check_compatible(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { dim: self.dim, entries })
    }

    /// Pointwise difference.
    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.check_compatible(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { dim: self.dim, entries })
    }

    /// Scalar multiple.
    pub fn scale(&self, s: Complex64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|e| e.scale(s)).collect() }
    }

    /// Multiply every entry by a scalar field.
    pub fn scale_by(&self, f: &ScalarField) -> Result<Self, FieldError> {
        let entries =
            self.entries.iter().map(|e| e.mul(f)).collect::<Result<Vec<_>, _>>()?;
        Ok(Self { dim: self.dim, entries })
    }

    /// Pointwise matrix product.
    pub fn matmul(&self, other: &Self) -> Result<Self, FieldError> {
        self.check_compatible(other)?;
        let d = self.dim;
        let grid = self.grid().clone();
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = ScalarField::zeros(&grid);
                for k in 0..d {
                    acc = acc.add(&self.entry(i, k).mul(other.entry(k, j))?)?;
                }
                entries.push(acc);
            }
        }
        Ok(Self { dim: d, entries })
    }

    /// Pointwise commutator [self, other].
    pub fn commutator(&self, other: &Self) -> Result<Self, FieldError> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// Pointwise conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                entries.push(self.entry(j, i).conj());
            }
        }
        Self { dim: d, entries }
    }

    /// Pointwise trace.
    pub fn trace(&self) -> ScalarField {
        let mut acc = ScalarField::zeros(self.grid());
        for i in 0..self.dim {
            acc = acc.add(self.entry(i, i)).expect("same grid");
        }
        acc
    }

    /// Entrywise derivative along `axis`.
    pub fn derivative(&self, axis: usize, scheme: DerivativeScheme) -> Result<Self, FieldError> {
        let entries = self
            .entries
            .iter()
            .map(|e| e.derivative(axis, scheme))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { dim: self.dim, entries })
    }

    /// Matrix value at one grid point.
    pub fn at_point(&self, flat: usize) -> crate::algebra::ComplexMatrix {
        let mut m = crate::algebra::ComplexMatrix::zeros(self.dim).expect("validated dim");
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.set(i, j, self.entry(i, j).data()[flat]);
            }
        }
        m
    }

    /// Max entry modulus over all entries and points.
    pub fn max_norm(&self) -> f64 {
        self.entries.iter().map(ScalarField::linf).fold(0.0, f64::max)
    }

    /// Root of the summed squared L² norms of the entries.
    pub fn l2_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norms().l2.powi(2)).sum::<f64>().sqrt()
    }

    /// Pointwise matrix exponential.
    pub fn exp(&self) -> Self {
        let grid = self.grid().clone();
        let mut out = Self::zeros(&grid, self.dim);
        for flat in 0..grid.total_points() {
            let e = crate::algebra::matrix_exp(&self.at_point(flat));
            for i in 0..self.dim {
                for j in 0..self.dim {
                    out.entries[i * self.dim + j].data_mut()[flat] = e.get(i, j);
                }
            }
        }
        out
    }

    /// Pointwise inverse for dim-2 fields via the adjugate formula.
    pub fn inverse2(&self) -> Result<Self, FieldError> {
        if self.dim != 2 {
            return Err(FieldError::DimMismatch(self.dim, 2));
        }
        let a = self.entry(0, 0);
        let b = self.entry(0, 1);
        let c = self.entry(1, 0);
        let d = self.entry(1, 1);
        let det = a.mul(d)?.sub(&b.mul(c)?)?;
        let inv_det = det.map(|z| Complex64::new(1.0, 0.0) / z);
        let mut out = Self::zeros(self.grid(), 2);
        out.set_entry(0, 0, d.mul(&inv_det)?);
        out.set_entry(0, 1, b.scale(Complex64::new(-1.0, 0.0)).mul(&inv_det)?);
        out.set_entry(1, 0, c.scale(Complex64::new(-1.0, 0.0)).mul(&inv_det)?);
        out.set_entry(1, 1, a.mul(&inv_det)?);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid1(n: usize, l: f64) -> Grid {
        Grid::new(&[n], &[l]).unwrap()
    }

    #[test]
    fn grid_rejects_bad_shapes() {
        assert!(Grid::new(&[4], &[1.0]).is_err(), "size below minimum must be rejected");
        assert!(Grid::new(&[8, 8, 8, 8], &[1.0; 4]).is_err(), "more than 3 axes must be rejected");
        assert!(Grid::new(&[8], &[0.0]).is_err(), "zero length must be rejected");
        assert!(Grid::new(&[8, 16], &[1.0, 2.0]).is_ok(), "valid 2-d grid must be accepted");
    }

    #[test]
    fn spectral_derivative_differentiates_trig_exactly() {
        let l = 2.0 * PI;
        let g = grid1(64, l);
        let f = ScalarField::from_fn(&g, |x| c((3.0 * x[0]).sin(), 0.0));
        let expect = ScalarField::from_fn(&g, |x| c(3.0 * (3.0 * x[0]).cos(), 0.0));
        let d = f.derivative(0, DerivativeScheme::Spectral).unwrap();
        let err = d.sub(&expect).unwrap().linf();
        assert!(err < 1e-12, "spectral derivative of sin(3x) must be 3cos(3x), err {err:.3e}");
    }

    #[test]
    fn centered_schemes_converge_at_their_orders() {
        let l = 2.0 * PI;
        let exact_err = |n: usize, scheme: DerivativeScheme| {
            let g = grid1(n, l);
            let f = ScalarField::from_fn(&g, |x| c((2.0 * x[0]).sin(), 0.0));
            let expect = ScalarField::from_fn(&g, |x| c(2.0 * (2.0 * x[0]).cos(), 0.0));
            f.derivative(0, scheme).unwrap().sub(&expect).unwrap().linf()
        };
        let r2 = exact_err(32, DerivativeScheme::Central2) / exact_err(64, DerivativeScheme::Central2);
        let r4 = exact_err(32, DerivativeScheme::Central4) / exact_err(64, DerivativeScheme::Central4);
        assert!(
            r2 > 3.6 && r2 < 4.4,
            "2nd-order scheme must quarter its error when halving h (ratio {r2:.2})"
        );
        assert!(
            r4 > 14.0 && r4 < 18.0,
            "4th-order scheme must cut error 16x when halving h (ratio {r4:.2})"
        );
    }

    #[test]
    fn derivative_along_second_axis_sees_only_y_variation() {
        let g = Grid::new(&[16, 32], &[2.0 * PI, 2.0 * PI]).unwrap();
        let f = ScalarField::from_fn(&g, |p| c((p[0]).cos() * (2.0 * p[1]).sin(), 0.0));
        let expect = ScalarField::from_fn(&g, |p| c((p[0]).cos() * 2.0 * (2.0 * p[1]).cos(), 0.0));
        let d = f.derivative(1, DerivativeScheme::Spectral).unwrap();
        assert!(
            d.sub(&expect).unwrap().linf() < 1e-12,
            "y-derivative must act on the y factor only"
        );
    }

    #[test]
    fn antiderivative_inverts_derivative_in_zero_mean_gauge() {
        let g = Grid::new(&[64, 16], &[2.0 * PI, 2.0 * PI]).unwrap();
        // Mean-free along x by construction.
        let f = ScalarField::from_fn(&g, |p| {
            c((2.0 * p[0]).cos() * (p[1]).sin() + (5.0 * p[0]).sin(), 0.0)
        });
        let prim = f.antiderivative_x(false).unwrap();
        let back = prim.derivative(0, DerivativeScheme::Spectral).unwrap();
        assert!(
            back.sub(&f).unwrap().linf() < 1e-12,
            "d/dx of the x-antiderivative must reproduce the field"
        );
        assert!(prim.x_mean_max() < 1e-13, "antiderivative must be x-mean-free on every lane");
    }

    #[test]
    fn antiderivative_rejects_biased_field_unless_asked_to_project() {
        let g = grid1(32, 2.0 * PI);
        let f = ScalarField::from_fn(&g, |x| c(1.0 + (x[0]).sin(), 0.0));
        assert!(
            matches!(f.antiderivative_x(false), Err(FieldError::MeanViolation { .. })),
            "nonzero x-mean must be rejected without the projection flag"
        );
        let prim = f.antiderivative_x(true).unwrap();
        let back = prim.derivative(0, DerivativeScheme::Spectral).unwrap();
        let expect = ScalarField::from_fn(&g, |x| c((x[0]).sin(), 0.0));
        assert!(
            back.sub(&expect).unwrap().linf() < 1e-12,
            "projection must integrate the mean-free part"
        );
    }

    #[test]
    fn norms_match_closed_forms_for_a_plane_wave() {
        let g = grid1(128, 2.0 * PI);
        let f = ScalarField::from_fn(&g, |x| Complex64::from_polar(2.0, 3.0 * x[0]));
        let norms = f.norms();
        // |f| = 2 everywhere: l1 = 2·2π, l2 = 2·√(2π), linf = 2.
        assert!((norms.l1 - 4.0 * PI).abs() < 1e-12, "plane-wave L1 must equal 4 pi");
        assert!(
            (norms.l2 - 2.0 * (2.0 * PI).sqrt()).abs() < 1e-12,
            "plane-wave L2 must equal 2 sqrt(2 pi)"
        );
        assert!((norms.linf - 2.0).abs() < 1e-15, "plane-wave Linf must equal 2");
    }

    #[test]
    fn matrix_product_and_commutator_act_pointwise() {
        let g = grid1(8, 1.0);
        let s1 = crate::algebra::pauli1();
        let s2 = crate::algebra::pauli2();
        let a = MatrixField::constant(&g, &s1);
        let b = MatrixField::constant(&g, &s2);
        let comm = a.commutator(&b).unwrap();
        let expect = MatrixField::constant(&g, &crate::algebra::pauli3().scale(c(0.0, 2.0)));
        assert!(
            comm.sub(&expect).unwrap().max_norm() < 1e-15,
            "constant-field commutator must reproduce the matrix commutator"
        );
    }

    #[test]
    fn combine_assembles_component_fields_against_basis_matrices() {
        let g = grid1(16, 2.0 * PI);
        let fx = ScalarField::from_fn(&g, |x| c(x[0].cos(), 0.0));
        let m = MatrixField::combine(&g, &[(&fx, &crate::algebra::pauli3())]).unwrap();
        assert_eq!(m.entry(0, 0).data()[3], fx.data()[3], "(0,0) entry must carry +f");
        assert_eq!(m.entry(1, 1).data()[3], -fx.data()[3], "(1,1) entry must carry -f");
        assert_eq!(m.entry(0, 1).data()[3], c(0.0, 0.0), "off-diagonal must stay zero");
    }

    #[test]
    fn pointwise_inverse_and_exp_are_mutually_consistent() {
        let g = grid1(8, 2.0 * PI);
        let theta = ScalarField::from_fn(&g, |x| c(0.0, 0.3 * x[0].sin()));
        // Anti-Hermitian exponent -> unitary exp with unit determinant.
        let exponent = MatrixField::combine(&g, &[(&theta, &crate::algebra::pauli1())]).unwrap();
        let u = exponent.exp();
        let uinv = u.inverse2().unwrap();
        let prod = u.matmul(&uinv).unwrap();
        let id = MatrixField::constant(&g, &crate::algebra::ComplexMatrix::identity(2).unwrap());
        assert!(
            prod.sub(&id).unwrap().max_norm() < 1e-13,
            "exp(A) times its pointwise inverse must be the identity"
        );
    }

    #[test]
    fn three_axis_grid_indexing_is_c_order() {
        let g = Grid::new(&[8, 8, 8], &[1.0, 2.0, 4.0]).unwrap();
        assert_eq!(g.strides(), vec![64, 8, 1], "C-order strides");
        assert_eq!(g.multi_index(8 * 64 - 1), vec![7, 7, 7], "last point decomposes to maxima");
        let f = ScalarField::from_fn(&g, |p| c(p[0] + 10.0 * p[1] + 100.0 * p[2], 0.0));
        let idx = 3 * 64 + 5 * 8 + 2;
        let expect = g.coord(0, 3) + 10.0 * g.coord(1, 5) + 100.0 * g.coord(2, 2);
        assert!((f.data()[idx].re - expect).abs() < 1e-14, "from_fn must follow C-order layout");
    }

    #[test]
    fn spectral_map_reproduces_composed_derivatives() {
        let g = Grid::new(&[32, 16], &[2.0 * PI, PI]).unwrap();
        let f = ScalarField::from_fn(&g, |p| {
            c((2.0 * p[0]).sin() * (4.0 * p[1]).cos(), (p[0] - 2.0 * p[1]).cos())
        });
        let mixed = f.spectral_map(|k| c(0.0, k[0]) * c(0.0, k[1]));
        let step_by_step = f
            .derivative(0, DerivativeScheme::Spectral)
            .unwrap()
            .derivative(1, DerivativeScheme::Spectral)
            .unwrap();
        let dev = mixed.sub(&step_by_step).unwrap().linf();
        assert!(dev < 1e-12, "ik_x * ik_y multiplier must equal d/dx then d/dy, off by {dev:.3e}");
    }

    #[test]
    fn spectral_map_translates_by_whole_cells_exactly() {
        let g = Grid::new(&[16, 8], &[2.0, 1.0]).unwrap();
        let f = ScalarField::from_fn(&g, |p| c((p[0] * 2.1).sin(), (p[1] * 0.7).cos()));
        let h = g.spacing(0);
        let shifted = f.spectral_map(|k| Complex64::from_polar(1.0, -k[0] * h));
        // Shifting by one cell must reproduce the data rotated by one index.
        let mut worst: f64 = 0.0;
        for i in 0..g.size(0) {
            for j in 0..g.size(1) {
                let src = f.data()[((i + g.size(0) - 1) % g.size(0)) * 8 + j];
                let got = shifted.data()[i * 8 + j];
                worst = worst.max((got - src).norm());
            }
        }
        assert!(worst < 1e-13, "one-cell spectral shift must rotate the samples, off by {worst:.3e}");
    }

    #[test]
    fn spectral_map_identity_multiplier_is_a_round_trip() {
        let g = grid1(64, 2.0 * PI);
        let f = ScalarField::from_fn(&g, |x| c((5.0 * x[0]).cos(), (3.0 * x[0]).sin()));
        let back = f.spectral_map(|_| c(1.0, 0.0));
        let dev = back.sub(&f).unwrap().linf();
        assert!(dev < 1e-14, "unit multiplier must round-trip the field, off by {dev:.3e}");
    }
}
