//! Pseudospectral time integration of four reduced flows.
//!
//! Each solver advances one of the packaged systems on a periodic grid,
//! records uniformly spaced state frames, and samples conserved quantities
//! alongside:
//!
//! * [`solve_nls`] — cubic Schrödinger equation iφ_t = φ_xx + 2r²|φ|²φ in
//!   1-d, by Strang splitting with exact linear and exact nonlinear factors.
//! * [`solve_zakharov`] — the (2+1) extension iφ_t = φ_xy + vφ with
//!   v = 2r²∂ₓ⁻¹(|φ|²)_y, by Strang splitting with an exact mixed-derivative
//!   phase factor.
//! * [`solve_kp`] — u_t + 6uu_x + u_xxx + 3α²∂ₓ⁻¹u_yy = 0, by
//!   integrating-factor Runge–Kutta (exact dispersion, 2/3-rule dealiasing,
//!   x-mean modes held fixed).
//! * [`solve_mi`] — the (2+1) spin flow s_t = (s×s_y + us)_x with
//!   u = −∂ₓ⁻¹[s·(s_x×s_y)], by a projected Runge–Kutta scheme that
//!   renormalizes |s| = 1 pointwise after every step.
//!
//! The frame layout matches the residual evaluators' field names, so a
//! recorded evolution can be checked against its own equation by
//! differencing frames in time ([`time_derivative5`]) and feeding the result
//! straight back to the residual catalog.

use num_complex::Complex64;
use thiserror::Error;

use crate::equations::{EquationError, EquationId, FieldMap};
use crate::fields::{DerivativeScheme, FieldError, Grid, ScalarField};
use crate::sampling::normalize_spin;
use crate::vector3::{self, Vec3Field};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Errors from solver configuration and time stepping.
#[derive(Debug, Error)]
pub enum SolverError {
    /// Field-level failure during stepping.
    #[error(transparent)]
    Field(#[from] FieldError),
    /// Failure inside an equation-support routine.
    #[error(transparent)]
    Equation(#[from] EquationError),
    /// The run configuration or initial state is unusable.
    #[error("invalid solver input for {context}: {detail}")]
    BadConfig {
        /// Which solver or check rejected the input.
        context: &'static str,
        /// What was wrong.
        detail: String,
    },
    /// The state left the solver's domain of validity mid-run.
    #[error("{equation} run aborted at t = {t}: {detail}")]
    Blowup {
        /// Which flow was being integrated.
        equation: &'static str,
        /// Simulation time of the abort.
        t: f64,
        /// What was detected.
        detail: String,
    },
}

// ---------------------------------------------------------------------------
// Run configuration and recorded output.
// ---------------------------------------------------------------------------

/// Time-stepping plan: step size, final time, and number of stored frames.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Time step.
    pub dt: f64,
    /// Final time; must be an integer number of steps.
    pub t_end: f64,
    /// Stored states including the initial one; the remaining frames split
    /// the run evenly, so `frames - 1` must divide the step count.
    pub frames: usize,
}

impl SolverConfig {
    /// Total step count and the step interval between stored frames.
    pub fn plan(&self) -> Result<(usize, usize), SolverError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(SolverError::BadConfig {
                context: "solver config",
                detail: format!("dt must be positive and finite, got {}", self.dt),
            });
        }
        let raw = self.t_end / self.dt;
        let steps = raw.round();
        if !(steps >= 1.0 && (raw - steps).abs() <= 1e-9 * steps.max(1.0)) {
            return Err(SolverError::BadConfig {
                context: "solver config",
                detail: format!(
                    "t_end = {} is not a whole number of dt = {} steps",
                    self.t_end, self.dt
                ),
            });
        }
        let steps = steps as usize;
        if self.frames < 2 {
            return Err(SolverError::BadConfig {
                context: "solver config",
                detail: format!("need at least 2 frames (initial and final), got {}", self.frames),
            });
        }
        if steps % (self.frames - 1) != 0 {
            return Err(SolverError::BadConfig {
                context: "solver config",
                detail: format!(
                    "{} frames need {} intervals to divide {} steps evenly",
                    self.frames,
                    self.frames - 1,
                    steps
                ),
            });
        }
        Ok((steps, steps / (self.frames - 1)))
    }
}

/// One stored state of an evolution.
#[derive(Debug, Clone)]
pub struct Frame {
    /// Simulation time.
    pub t: f64,
    /// Named state fields, keyed as the residual evaluators expect them.
    pub fields: FieldMap,
}

/// A conserved (or monitored) scalar sampled at every frame time.
#[derive(Debug, Clone)]
pub struct ConservedSeries {
    /// Quantity name.
    pub name: String,
    /// (time, value) samples.
    pub samples: Vec<(f64, f64)>,
}

impl ConservedSeries {
    /// Largest absolute excursion from the initial value.
    pub fn drift(&self) -> f64 {
        let first = self.samples.first().map_or(0.0, |s| s.1);
        self.samples.iter().map(|s| (s.1 - first).abs()).fold(0.0, f64::max)
    }
}

/// A recorded evolution: frames, conserved-quantity series, and run stats.
#[derive(Debug, Clone)]
pub struct Evolution {
    /// Which flow was integrated.
    pub equation: EquationId,
    /// Stored states, uniformly spaced in time, initial state first.
    pub frames: Vec<Frame>,
    /// Monitored scalars sampled at frame times.
    pub conserved: Vec<ConservedSeries>,
    /// Scalar diagnostics accumulated over the whole run.
    pub diagnostics: Vec<(String, f64)>,
    /// Steps taken.
    pub steps: usize,
}

impl Evolution {
    /// Look up a conserved series by name.
    pub fn series(&self, name: &str) -> Option<&ConservedSeries> {
        self.conserved.iter().find(|s| s.name == name)
    }

    /// Look up a diagnostic by name.
    pub fn diagnostic(&self, name: &str) -> Option<f64> {
        self.diagnostics.iter().find(|d| d.0 == name).map(|d| d.1)
    }

    /// Uniform time spacing between consecutive frames.
    pub fn frame_spacing(&self) -> f64 {
        if self.frames.len() < 2 {
            0.0
        } else {
            (self.frames[self.frames.len() - 1].t - self.frames[0].t)
                / (self.frames.len() - 1) as f64
        }
    }
}

/// ∫ f over the grid (real part), i.e. mean × total volume.
fn integral(f: &ScalarField) -> f64 {
    let grid = f.grid();
    f.mean().re * grid.cell_volume() * grid.total_points() as f64
}

/// Fourth-order five-point estimate of ∂ₜf at the middle sample:
/// [f(t−2h) − 8f(t−h) + 8f(t+h) − f(t+2h)] / (12h).
pub fn time_derivative5(
    minus2: &ScalarField,
    minus1: &ScalarField,
    plus1: &ScalarField,
    plus2: &ScalarField,
    h: f64,
) -> Result<ScalarField, SolverError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(SolverError::BadConfig {
            context: "time differencing",
            detail: format!("sample spacing must be positive, got {h}"),
        });
    }
    Ok(minus2
        .sub(plus2)?
        .add(&plus1.sub(minus1)?.scale(c(8.0)))?
        .scale(c(1.0 / (12.0 * h))))
}

// ---------------------------------------------------------------------------
// Cubic Schrödinger equation in one dimension.
// ---------------------------------------------------------------------------

/// Integrate iφ_t = φ_xx + 2r²|φ|²φ on a 1-d periodic grid.
///
/// Strang splitting with both factors exact: the linear half-flow multiplies
/// each Fourier mode by e^{ik²dt}, and the nonlinear half-flow rotates each
/// point by e^{−2ir²|φ|²τ} (|φ|² is pointwise invariant under it).  Both
/// factors are unimodular, so ∫|φ|² is conserved to rounding accuracy.
pub fn solve_nls(
    phi0: &ScalarField,
    r2: f64,
    config: &SolverConfig,
) -> Result<Evolution, SolverError> {
    let grid = phi0.grid().clone();
    if grid.ndim() != 1 {
        return Err(SolverError::BadConfig {
            context: "solve_nls",
            detail: format!("needs a 1-d grid, got {} axes", grid.ndim()),
        });
    }
    let (steps, interval) = config.plan()?;
    let dt = config.dt;
    let half = 0.5 * dt;

    let mut frames = Vec::with_capacity(config.frames);
    let mut mass = ConservedSeries { name: "mass".into(), samples: Vec::new() };
    let record = |frames: &mut Vec<Frame>, mass: &mut ConservedSeries, t: f64, phi: &ScalarField| {
        mass.samples.push((t, integral(&phi.modulus_squared())));
        let mut fields = FieldMap::new();
        fields.insert("phi", phi.clone());
        frames.push(Frame { t, fields });
    };

    let mut phi = phi0.clone();
    record(&mut frames, &mut mass, 0.0, &phi);
    for step in 1..=steps {
        phi = phi.map(|z| z * Complex64::from_polar(1.0, -2.0 * r2 * z.norm_sqr() * half));
        phi = phi.spectral_map(|k| Complex64::from_polar(1.0, k[0] * k[0] * dt));
        phi = phi.map(|z| z * Complex64::from_polar(1.0, -2.0 * r2 * z.norm_sqr() * half));
        if step % interval == 0 {
            let t = step as f64 * dt;
            if !phi.linf().is_finite() {
                return Err(SolverError::Blowup {
                    equation: "nls",
                    t,
                    detail: "non-finite field values".into(),
                });
            }
            record(&mut frames, &mut mass, t, &phi);
        }
    }
    Ok(Evolution {
        equation: EquationId::Nls,
        frames,
        conserved: vec![mass],
        diagnostics: Vec::new(),
        steps,
    })
}

// ---------------------------------------------------------------------------
// The (2+1) extension with a nonlocal potential.
// ---------------------------------------------------------------------------

/// Nonlocal potential v = 2r²∂ₓ⁻¹(|φ|²)_y, x-mean-free, real by construction.
fn zakharov_potential(phi: &ScalarField, r2: f64) -> Result<ScalarField, SolverError> {
    let v = phi
        .modulus_squared()
        .derivative(1, DerivativeScheme::Spectral)?
        .antiderivative_x(true)?
        .scale(c(2.0 * r2));
    // |φ|² is real, so the imaginary content of v is transform roundoff;
    // dropping it keeps the nonlinear phase factor exactly unimodular.
    Ok(v.map(|z| c(z.re)))
}

/// Integrate iφ_t = φ_xy + vφ, v = 2r²∂ₓ⁻¹(|φ|²)_y on a 2-d periodic grid.
///
/// Strang splitting: the mixed-derivative half-flow multiplies each mode by
/// e^{ik_xk_y dt} exactly, and the potential half-flow rotates each point by
/// e^{−iv dt} (v is real and depends on φ only through the invariant |φ|²).
/// The potential's x-mean obstruction is projected out, which fixes the
/// gauge freedom v ↦ v + const(y,t).
pub fn solve_zakharov(
    phi0: &ScalarField,
    r2: f64,
    config: &SolverConfig,
) -> Result<Evolution, SolverError> {
    let grid = phi0.grid().clone();
    if grid.ndim() != 2 {
        return Err(SolverError::BadConfig {
            context: "solve_zakharov",
            detail: format!("needs a 2-d grid, got {} axes", grid.ndim()),
        });
    }
    let (steps, interval) = config.plan()?;
    let dt = config.dt;
    let half = 0.5 * dt;
    let kick = |phi: &ScalarField, v: &ScalarField, tau: f64| {
        phi.zip_map(v, |p, vv| p * Complex64::from_polar(1.0, -vv.re * tau))
            .expect("state and potential share the grid")
    };

    let mut frames = Vec::with_capacity(config.frames);
    let mut mass = ConservedSeries { name: "mass".into(), samples: Vec::new() };
    let record = |frames: &mut Vec<Frame>,
                      mass: &mut ConservedSeries,
                      t: f64,
                      phi: &ScalarField|
     -> Result<(), SolverError> {
        mass.samples.push((t, integral(&phi.modulus_squared())));
        let mut fields = FieldMap::new();
        fields.insert("phi", phi.clone());
        fields.insert("v", zakharov_potential(phi, r2)?);
        frames.push(Frame { t, fields });
        Ok(())
    };

    let mut phi = phi0.clone();
    record(&mut frames, &mut mass, 0.0, &phi)?;
    for step in 1..=steps {
        let v = zakharov_potential(&phi, r2)?;
        phi = kick(&phi, &v, half);
        phi = phi.spectral_map(|k| Complex64::from_polar(1.0, k[0] * k[1] * dt));
        let v = zakharov_potential(&phi, r2)?;
        phi = kick(&phi, &v, half);
        if step % interval == 0 {
            let t = step as f64 * dt;
            if !phi.linf().is_finite() {
                return Err(SolverError::Blowup {
                    equation: "zakharov",
                    t,
                    detail: "non-finite field values".into(),
                });
            }
            record(&mut frames, &mut mass, t, &phi)?;
        }
    }
    Ok(Evolution {
        equation: EquationId::Zakharov,
        frames,
        conserved: vec![mass],
        diagnostics: Vec::new(),
        steps,
    })
}

// ---------------------------------------------------------------------------
// The Kadomtsev–Petviashvili equation.
// ---------------------------------------------------------------------------

/// Integrate u_t + 6uu_x + u_xxx + 3α²∂ₓ⁻¹u_yy = 0 on a 2-d periodic grid.
///
/// Classical integrating-factor Runge–Kutta: the full linear flow
/// e^{i(k_x³ − 3α²k_y²/k_x)t} is applied exactly in Fourier space and the
/// advection term N(u) = −3(u²)_x is advanced with fourth-order stages.
/// The quadratic product is dealiased by the 2/3 rule (the initial state is
/// truncated once, and every N evaluation re-truncates), and the k_x = 0
/// modes — where the nonlocal operator is undefined — are pinned to their
/// initial values after every step, so per-lane x-means never drift.
///
/// The initial state must satisfy the solvability constraint of the
/// nonlocal term: the x-mean of u_y has to vanish.
pub fn solve_kp(
    u0: &ScalarField,
    alpha: f64,
    config: &SolverConfig,
) -> Result<Evolution, SolverError> {
    let grid = u0.grid().clone();
    if grid.ndim() != 2 {
        return Err(SolverError::BadConfig {
            context: "solve_kp",
            detail: format!("needs a 2-d grid, got {} axes", grid.ndim()),
        });
    }
    let (steps, interval) = config.plan()?;
    let dt = config.dt;

    let constraint = u0.derivative(1, DerivativeScheme::Spectral)?.x_mean_max();
    let constraint_cap = 1e-10 * u0.linf().max(1e-30);
    if constraint > constraint_cap {
        return Err(SolverError::BadConfig {
            context: "solve_kp",
            detail: format!(
                "x-mean of u_y is {constraint:.3e} (limit {constraint_cap:.3e}); \
                 the nonlocal term needs per-lane x-means constant in y"
            ),
        });
    }

    // 2/3-rule cutoffs (a tiny slack absorbs wavenumber rounding).
    let kx_cut = 2.0 * std::f64::consts::PI / grid.length(0) * (grid.size(0) as f64 / 3.0 + 1e-9);
    let ky_cut = 2.0 * std::f64::consts::PI / grid.length(1) * (grid.size(1) as f64 / 3.0 + 1e-9);
    let masked = move |k: &[f64]| k[0].abs() <= kx_cut && k[1].abs() <= ky_cut;
    let a2 = alpha * alpha;
    // Exact linear factor over time tau; the unpaired k_x = 0 modes are left
    // untouched (multiplier exactly one).
    let linear = move |f: &ScalarField, tau: f64| {
        f.spectral_map(|k| {
            if k[0] == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, (k[0] * k[0] * k[0] - 3.0 * a2 * k[1] * k[1] / k[0]) * tau)
            }
        })
    };
    // Dealiased N(u) = −3(u²)_x; the multiplier carries a factor k_x, so the
    // k_x = 0 modes of the increment are exactly zero.
    let nonlinear = move |f: &ScalarField| -> Result<ScalarField, FieldError> {
        Ok(f.mul(f)?.spectral_map(|k| {
            if masked(k) {
                Complex64::new(0.0, -3.0 * k[0])
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    };

    let mut u = u0.spectral_map(|k| if masked(k) { c(1.0) } else { c(0.0) });
    // Per-lane x-means of the initial state, to re-pin after every step.
    let lane_means = u.sub(&u.subtract_x_mean())?;

    let mut frames = Vec::with_capacity(config.frames);
    let mut mean = ConservedSeries { name: "mean".into(), samples: Vec::new() };
    let mut momentum = ConservedSeries { name: "momentum".into(), samples: Vec::new() };
    let record = |frames: &mut Vec<Frame>,
                      mean: &mut ConservedSeries,
                      momentum: &mut ConservedSeries,
                      t: f64,
                      u: &ScalarField|
     -> Result<(), SolverError> {
        mean.samples.push((t, integral(u)));
        momentum.samples.push((t, 0.5 * integral(&u.mul(u)?)));
        let mut fields = FieldMap::new();
        fields.insert("k", u.clone());
        fields.insert("m3", u.derivative(1, DerivativeScheme::Spectral)?.antiderivative_x(true)?);
        frames.push(Frame { t, fields });
        Ok(())
    };

    record(&mut frames, &mut mean, &mut momentum, 0.0, &u)?;
    let (h2, h6) = (c(0.5 * dt), c(dt / 6.0));
    for step in 1..=steps {
        let n1 = nonlinear(&u)?;
        let s2 = linear(&u.add(&n1.scale(h2))?, 0.5 * dt);
        let n2 = nonlinear(&s2)?;
        let eu = linear(&u, 0.5 * dt);
        let s3 = eu.add(&n2.scale(h2))?;
        let n3 = nonlinear(&s3)?;
        let e2u = linear(&eu, 0.5 * dt);
        let en3 = linear(&n3, 0.5 * dt);
        let s4 = e2u.add(&en3.scale(c(dt)))?;
        let n4 = nonlinear(&s4)?;
        u = e2u
            .add(&linear(&n1, dt).scale(h6))?
            .add(&linear(&n2, 0.5 * dt).scale(h6).scale(c(2.0)))?
            .add(&en3.scale(h6).scale(c(2.0)))?
            .add(&n4.scale(h6))?;
        // Pin the k_x = 0 modes: the update leaves them untouched in exact
        // arithmetic, so this only removes accumulated transform roundoff.
        u = u.subtract_x_mean().add(&lane_means)?;
        if step % interval == 0 {
            let t = step as f64 * dt;
            if !u.linf().is_finite() {
                return Err(SolverError::Blowup {
                    equation: "kp",
                    t,
                    detail: "non-finite field values".into(),
                });
            }
            record(&mut frames, &mut mean, &mut momentum, t, &u)?;
        }
    }
    Ok(Evolution {
        equation: EquationId::Kp,
        frames,
        conserved: vec![mean, momentum],
        diagnostics: Vec::new(),
        steps,
    })
}

// ---------------------------------------------------------------------------
// The (2+1) spin flow.
// ---------------------------------------------------------------------------

/// Flow velocity of the spin system: (s×s_y + us)_x with
/// u = −∂ₓ⁻¹[s·(s_x×s_y)] in the x-mean-free gauge.
fn mi_rhs(s: &Vec3Field) -> Result<(Vec3Field, ScalarField), SolverError> {
    let s_x = vector3::derivative(s, 0, DerivativeScheme::Spectral)?;
    let s_y = vector3::derivative(s, 1, DerivativeScheme::Spectral)?;
    let triple = vector3::dot(s, &vector3::cross(&s_x, &s_y)?)?;
    let u = triple.antiderivative_x(true)?.scale(c(-1.0)).map(|z| c(z.re));
    let flux = vector3::add(&vector3::cross(s, &s_y)?, &vector3::scale_field(s, &u)?)?;
    Ok((vector3::derivative(&flux, 0, DerivativeScheme::Spectral)?, u))
}

/// Integrate s_t = (s×s_y + us)_x, u = −∂ₓ⁻¹[s·(s_x×s_y)] for a unit spin
/// field on a 2-d periodic grid.
///
/// Classical Runge–Kutta stages on the raw components followed by a
/// pointwise renormalization to |s| = 1 (the flow preserves the constraint
/// exactly, so the projection only removes the integrator's own
/// fourth-order drift, which is recorded as a diagnostic).  The run aborts
/// if any |s| falls below 1/2 before renormalization.
pub fn solve_mi(s0: &Vec3Field, config: &SolverConfig) -> Result<Evolution, SolverError> {
    let grid = s0[0].grid().clone();
    if grid.ndim() != 2 {
        return Err(SolverError::BadConfig {
            context: "solve_mi",
            detail: format!("needs a 2-d grid, got {} axes", grid.ndim()),
        });
    }
    let norm_dev = vector3::dot(s0, s0)?.map(|z| z - c(1.0)).linf();
    if norm_dev > 1e-10 {
        return Err(SolverError::BadConfig {
            context: "solve_mi",
            detail: format!("initial spin norms deviate from 1 by {norm_dev:.3e}"),
        });
    }
    let (steps, interval) = config.plan()?;
    let dt = config.dt;

    let mut frames = Vec::with_capacity(config.frames);
    let mut s3_total = ConservedSeries { name: "s3_total".into(), samples: Vec::new() };
    let record = |frames: &mut Vec<Frame>,
                      s3_total: &mut ConservedSeries,
                      t: f64,
                      s: &Vec3Field|
     -> Result<(), SolverError> {
        s3_total.samples.push((t, integral(&s[2])));
        let (_, u) = mi_rhs(s)?;
        let mut fields = FieldMap::new();
        fields.insert("s1", s[0].clone());
        fields.insert("s2", s[1].clone());
        fields.insert("s3", s[2].clone());
        fields.insert("u", u);
        frames.push(Frame { t, fields });
        Ok(())
    };

    let mut s = normalize_spin(&s0[0], &s0[1], &s0[2]);
    record(&mut frames, &mut s3_total, 0.0, &s)?;
    let mut max_norm_drift: f64 = 0.0;
    for step in 1..=steps {
        let (k1, _) = mi_rhs(&s)?;
        let (k2, _) = mi_rhs(&vector3::add(&s, &vector3::scale(&k1, c(0.5 * dt)))?)?;
        let (k3, _) = mi_rhs(&vector3::add(&s, &vector3::scale(&k2, c(0.5 * dt)))?)?;
        let (k4, _) = mi_rhs(&vector3::add(&s, &vector3::scale(&k3, c(dt)))?)?;
        let mut increment = vector3::add(&k1, &vector3::scale(&k2, c(2.0)))?;
        increment = vector3::add(&increment, &vector3::scale(&k3, c(2.0)))?;
        increment = vector3::add(&increment, &k4)?;
        let raw = vector3::add(&s, &vector3::scale(&increment, c(dt / 6.0)))?;

        let t = step as f64 * dt;
        let norm2 = vector3::dot(&raw, &raw)?;
        let mut min_norm2 = f64::INFINITY;
        let mut max_dev: f64 = 0.0;
        for z in norm2.data() {
            min_norm2 = min_norm2.min(z.re);
            max_dev = max_dev.max((z.re - 1.0).abs());
        }
        max_norm_drift = max_norm_drift.max(max_dev);
        if !(min_norm2.is_finite() && min_norm2 > 0.25) {
            return Err(SolverError::Blowup {
                equation: "m1_spin",
                t,
                detail: format!("spin norm fell to {:.3e} before projection", min_norm2.max(0.0).sqrt()),
            });
        }
        // Strip transform roundoff from the imaginary parts, then project
        // back to the unit sphere.
        let cleaned: Vec3Field = [
            raw[0].map(|z| c(z.re)),
            raw[1].map(|z| c(z.re)),
            raw[2].map(|z| c(z.re)),
        ];
        s = normalize_spin(&cleaned[0], &cleaned[1], &cleaned[2]);
        if step % interval == 0 {
            record(&mut frames, &mut s3_total, t, &s)?;
        }
    }
    Ok(Evolution {
        equation: EquationId::M1Spin,
        frames,
        conserved: vec![s3_total],
        diagnostics: vec![("max_norm_sq_drift_per_step".into(), max_norm_drift)],
        steps,
    })
}

// ---------------------------------------------------------------------------
// Reference states.
// ---------------------------------------------------------------------------

/// Wrap a coordinate offset into [−l/2, l/2).
fn wrap(x: f64, l: f64) -> f64 {
    x - l * (x / l).round()
}

/// Check that a soliton speed keeps e^{−i(c/2)x} periodic on length `l`.
fn check_speed(context: &'static str, speed: f64, l: f64) -> Result<(), SolverError> {
    let turns = 0.5 * speed * l / (2.0 * std::f64::consts::PI);
    if (turns - turns.round()).abs() > 1e-9 {
        return Err(SolverError::BadConfig {
            context,
            detail: format!(
                "speed {speed} gives a non-periodic carrier phase; \
                 c·L/(4π) = {turns} must be an integer"
            ),
        });
    }
    Ok(())
}

/// Plane-wave state of the cubic Schrödinger equation at time `t`:
/// φ = A e^{i(kx − Ωt)} with k the given integer mode and Ω = −k² + 2r²A².
pub fn nls_plane_wave(
    grid: &Grid,
    amplitude: f64,
    mode: i32,
    r2: f64,
    t: f64,
) -> Result<ScalarField, SolverError> {
    if grid.ndim() != 1 {
        return Err(SolverError::BadConfig {
            context: "nls_plane_wave",
            detail: format!("needs a 1-d grid, got {} axes", grid.ndim()),
        });
    }
    let k = 2.0 * std::f64::consts::PI / grid.length(0) * f64::from(mode);
    let omega = -k * k + 2.0 * r2 * amplitude * amplitude;
    Ok(ScalarField::from_fn(grid, |x| {
        Complex64::from_polar(amplitude, k * x[0] - omega * t)
    }))
}

/// Travelling soliton of iφ_t = φ_xx + 2|φ|²φ at time `t` (the focusing
/// sign r² = +1):
/// φ = A sech(A(x − x₀ − ct)) e^{i[−(c/2)(x − x₀) + (c²/4 − A²)t]},
/// centered at x₀ = L/2.  The speed must satisfy cL/(4π) ∈ ℤ so the carrier
/// phase is periodic.
pub fn nls_soliton(
    grid: &Grid,
    amplitude: f64,
    speed: f64,
    t: f64,
) -> Result<ScalarField, SolverError> {
    if grid.ndim() != 1 {
        return Err(SolverError::BadConfig {
            context: "nls_soliton",
            detail: format!("needs a 1-d grid, got {} axes", grid.ndim()),
        });
    }
    let l = grid.length(0);
    check_speed("nls_soliton", speed, l)?;
    let x0 = 0.5 * l;
    let beta = 0.25 * speed * speed - amplitude * amplitude;
    Ok(ScalarField::from_fn(grid, |x| {
        let xi = wrap(x[0] - x0 - speed * t, l);
        let env = amplitude / (amplitude * xi).cosh();
        Complex64::from_polar(env, -0.5 * speed * (x[0] - x0) + beta * t)
    }))
}

/// Line soliton of the (2+1) extension (r² = +1) at time `t`, travelling
/// along ξ = x + y on a square torus.
///
/// The envelope is the 1-d soliton in ξ; because the solver fixes the
/// potential's x-mean to zero, the phase picks up an extra uniform rotation
/// 2ρt, where ρ is the grid mean of the squared envelope.  Requires equal
/// axis lengths and cL/(4π) ∈ ℤ.
pub fn zakharov_soliton(
    grid: &Grid,
    amplitude: f64,
    speed: f64,
    t: f64,
) -> Result<ScalarField, SolverError> {
    if grid.ndim() != 2 {
        return Err(SolverError::BadConfig {
            context: "zakharov_soliton",
            detail: format!("needs a 2-d grid, got {} axes", grid.ndim()),
        });
    }
    let l = grid.length(0);
    if (grid.length(1) - l).abs() > 1e-12 * l {
        return Err(SolverError::BadConfig {
            context: "zakharov_soliton",
            detail: "needs equal axis lengths so ξ = x + y is periodic".into(),
        });
    }
    check_speed("zakharov_soliton", speed, l)?;
    let xi0 = l;
    let envelope = ScalarField::from_fn(grid, |x| {
        let xi = wrap(x[0] + x[1] - xi0 - speed * t, l);
        c(amplitude / (amplitude * xi).cosh())
    });
    let rho = envelope.mul(&envelope).expect("same grid").mean().re;
    let beta = 0.25 * speed * speed - amplitude * amplitude + 2.0 * rho;
    Ok(ScalarField::from_fn(grid, |x| {
        let xi = wrap(x[0] + x[1] - xi0 - speed * t, l);
        let env = amplitude / (amplitude * xi).cosh();
        Complex64::from_polar(env, -0.5 * speed * (x[0] + x[1] - xi0) + beta * t)
    }))
}

/// Line soliton of the Kadomtsev–Petviashvili flow at time `t` (exact for
/// any α since it is y-independent): u = 2κ² sech²(κ(x − x₀ − 4κ²t)).
pub fn kp_line_soliton(grid: &Grid, kappa: f64, t: f64) -> Result<ScalarField, SolverError> {
    if grid.ndim() != 2 {
        return Err(SolverError::BadConfig {
            context: "kp_line_soliton",
            detail: format!("needs a 2-d grid, got {} axes", grid.ndim()),
        });
    }
    let l = grid.length(0);
    let x0 = 0.5 * l;
    Ok(ScalarField::from_fn(grid, |x| {
        let xi = wrap(x[0] - x0 - 4.0 * kappa * kappa * t, l);
        let sech = 1.0 / (kappa * xi).cosh();
        c(2.0 * kappa * kappa * sech * sech)
    }))
}

/// Unit-spin line profile for the (2+1) spin flow, built by inverse
/// stereographic projection of w = A sech(Aξ) e^{−i(c/2)ξ}, ξ = x + y:
/// s = (2Re w, 2Im w, 1 − |w|²)/(1 + |w|²).  Requires a square torus and
/// cL/(4π) ∈ ℤ.
pub fn mi_soliton(grid: &Grid, amplitude: f64, speed: f64) -> Result<Vec3Field, SolverError> {
    if grid.ndim() != 2 {
        return Err(SolverError::BadConfig {
            context: "mi_soliton",
            detail: format!("needs a 2-d grid, got {} axes", grid.ndim()),
        });
    }
    let l = grid.length(0);
    if (grid.length(1) - l).abs() > 1e-12 * l {
        return Err(SolverError::BadConfig {
            context: "mi_soliton",
            detail: "needs equal axis lengths so ξ = x + y is periodic".into(),
        });
    }
    check_speed("mi_soliton", speed, l)?;
    let xi0 = l;
    let component = |pick: fn(Complex64, f64) -> f64| {
        ScalarField::from_fn(grid, |x| {
            let xi = wrap(x[0] + x[1] - xi0, l);
            let w = Complex64::from_polar(amplitude / (amplitude * xi).cosh(), -0.5 * speed * xi);
            c(pick(w, 1.0 + w.norm_sqr()))
        })
    };
    Ok([
        component(|w, d| 2.0 * w.re / d),
        component(|w, d| 2.0 * w.im / d),
        component(|_, d| (2.0 - d) / d),
    ])
}
