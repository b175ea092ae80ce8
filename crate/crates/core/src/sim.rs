//! Direct time integration of the reaction-diffusion model
//! `∂ₜC = ∂ₓₓC + N(C) + σ(x)` and of its linearization about a periodic
//! steady state, `∂ₜδC = ∂ₓₓδC + s(x)δC` with `s = N′(C₀)`.
//!
//! The line is approximated by a periodic super-domain of `n_periods`
//! copies of the source period `L`, which samples Bloch wavenumbers at
//! spacing `κ/n_periods`; a compactly supported initial bump then contains
//! the `p = 0` mode whose decay rate is `λ₀₀`. Steps use a first-order
//! IMEX split, reaction explicit and diffusion exact per Fourier mode:
//!
//! ```text
//! Ĉ⁺ = (Ĉ + dt · F[N(C) + σ]) / (1 + dt k²)
//! ```
//!
//! so the stiff diffusion term imposes no timestep restriction. A run
//! started exactly on a manufactured steady state is a fixed point of this
//! map up to roundoff, because `F[N(C₀) + σ] = -F[C₀″] = k²Ĉ₀` termwise for
//! band-limited data. Decay rates are least-squares slopes of `ln‖δC‖₂`
//! over the final half of a run, where the ground Bloch mode dominates.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex;

use crate::fft::Fft;
use crate::periodic::PeriodicFunction;
use crate::scalar::{flt, Scalar};
use crate::{Error, Result};

/// Grid resolution per source period. The potentials in scope are
/// band-limited to a few harmonics, so this is spectrally exact.
pub const SAMPLES_PER_PERIOD: usize = 64;

/// Default super-domain size in periods.
pub const DEFAULT_N_PERIODS: usize = 8;

const RESIDUAL_TOL: f64 = 1e-8;

/// A reaction term `N` with its first two derivatives.
#[derive(Clone)]
pub struct Reaction<T> {
    f: Arc<dyn Fn(T) -> T + Send + Sync>,
    df: Arc<dyn Fn(T) -> T + Send + Sync>,
    d2f: Arc<dyn Fn(T) -> T + Send + Sync>,
}

impl<T> fmt::Debug for Reaction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Reaction { .. }")
    }
}

impl<T: Scalar> Reaction<T> {
    pub fn new(
        f: impl Fn(T) -> T + Send + Sync + 'static,
        df: impl Fn(T) -> T + Send + Sync + 'static,
        d2f: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Self {
        Self {
            f: Arc::new(f),
            df: Arc::new(df),
            d2f: Arc::new(d2f),
        }
    }

    /// `N(c)`.
    pub fn eval(&self, c: T) -> T {
        (self.f)(c)
    }

    /// `N′(c)`.
    pub fn slope(&self, c: T) -> T {
        (self.df)(c)
    }

    /// `N″(c)`.
    pub fn curvature(&self, c: T) -> T {
        (self.d2f)(c)
    }
}

/// A reaction-diffusion problem with a known periodic steady state.
#[derive(Debug, Clone)]
pub struct RDProblem<T: Scalar> {
    reaction: Reaction<T>,
    sigma: PeriodicFunction<T>,
    base_state: PeriodicFunction<T>,
    source: PeriodicFunction<T>,
    n_periods: usize,
}

impl<T: Scalar> RDProblem<T> {
    /// Builds a problem and verifies that `C₀` really is a steady state:
    /// `‖C₀″ + N(C₀) + σ‖∞ < 1e-8` on the grid. A violation signals an
    /// algebra error in the manufactured solution, not a tolerance issue.
    ///
    /// `n_periods` sets the simulation super-domain (a power of two, so
    /// the spectral grid stays FFT-friendly at any per-period resolution).
    pub fn new(
        reaction: Reaction<T>,
        sigma: PeriodicFunction<T>,
        base_state: PeriodicFunction<T>,
        n_periods: usize,
    ) -> Result<Self> {
        if sigma.len() != base_state.len()
            || (sigma.period() - base_state.period()).abs()
                > flt::<T>(1e-12) * base_state.period()
        {
            return Err(Error::GridMismatch);
        }
        if n_periods == 0 || !n_periods.is_power_of_two() {
            return Err(Error::InvalidParameter {
                name: "n_periods",
                reason: "must be a power of two >= 1".into(),
            });
        }

        let c0dd = base_state.derivative().derivative();
        let mut residual = T::zero();
        for ((&c, &cdd), &sg) in base_state
            .samples()
            .iter()
            .zip(c0dd.samples())
            .zip(sigma.samples())
        {
            residual = residual.max((cdd + reaction.eval(c) + sg).abs());
        }
        let tol = flt::<T>(RESIDUAL_TOL);
        if residual >= tol {
            return Err(Error::SteadyStateResidual {
                residual: residual.to_f64().unwrap_or(f64::NAN),
                tol: RESIDUAL_TOL,
            });
        }

        let df = |x: T| reaction.slope(base_state.eval(x));
        let source =
            PeriodicFunction::from_fn(df, base_state.period(), base_state.len())?;

        Ok(Self {
            reaction,
            sigma,
            base_state,
            source,
            n_periods,
        })
    }

    pub fn reaction(&self) -> &Reaction<T> {
        &self.reaction
    }

    pub fn sigma(&self) -> &PeriodicFunction<T> {
        &self.sigma
    }

    pub fn base_state(&self) -> &PeriodicFunction<T> {
        &self.base_state
    }

    /// `s = N′(C₀)`, the potential the spectral machinery analyzes.
    pub fn linearized_source(&self) -> &PeriodicFunction<T> {
        &self.source
    }

    pub fn n_periods(&self) -> usize {
        self.n_periods
    }

    pub fn period(&self) -> T {
        self.base_state.period()
    }
}

/// The Allen-Cahn benchmark with a manufactured steady state `C₀ = sin(κx)`:
/// `N(C) = (β - α)C - (2/3)βC³` (integration constant zero) with the source
///
/// ```text
/// σ(x) = (α + κ² - β/2) sin(κx) - (β/6) sin(3κx)
/// ```
///
/// obtained by integrating `σ′ = [α - β cos(2κx)]κ cos(κx) + κ³ cos(κx)`
/// with zero mean. The linearization about `C₀` is exactly the cosine
/// potential: `N′(sin κx) = (β - α) - 2β sin²(κx) = -α + β cos(2κx)`.
pub fn allen_cahn_problem<T: Scalar>(
    alpha: T,
    beta: T,
    kappa: T,
    n_periods: usize,
) -> Result<RDProblem<T>> {
    if !(alpha.is_finite() && alpha > T::zero()) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: "must be finite and positive".into(),
        });
    }
    if !(beta.is_finite() && beta >= T::zero()) {
        return Err(Error::InvalidParameter {
            name: "beta",
            reason: "must be finite and nonnegative".into(),
        });
    }
    if !(kappa.is_finite() && kappa > T::zero()) {
        return Err(Error::InvalidParameter {
            name: "kappa",
            reason: "must be finite and positive".into(),
        });
    }

    let period = (T::PI() + T::PI()) / kappa;
    let two_thirds = flt::<T>(2.0) / flt::<T>(3.0);
    let (a, b) = (alpha, beta);
    let reaction = Reaction::new(
        move |c| (b - a) * c - two_thirds * b * c * c * c,
        move |c| (b - a) - flt::<T>(2.0) * b * c * c,
        move |c| -flt::<T>(4.0) * b * c,
    );

    let half = flt::<T>(0.5);
    let sixth = T::one() / flt::<T>(6.0);
    let sigma = PeriodicFunction::from_fn(
        |x| {
            (alpha + kappa * kappa - half * beta) * (kappa * x).sin()
                - sixth * beta * (flt::<T>(3.0) * kappa * x).sin()
        },
        period,
        SAMPLES_PER_PERIOD,
    )?;
    let base = PeriodicFunction::from_fn(|x| (kappa * x).sin(), period, SAMPLES_PER_PERIOD)?;

    let problem = RDProblem::new(reaction, sigma, base, n_periods)?;

    // The linearization must reproduce the cosine potential exactly.
    let mut dev = T::zero();
    for (&s, &c0) in problem
        .source
        .samples()
        .iter()
        .zip(problem.base_state.samples())
    {
        let x_free = -alpha + beta - flt::<T>(2.0) * beta * c0 * c0;
        dev = dev.max((s - x_free).abs());
    }
    assert!(
        dev < flt(1e-10),
        "linearized source deviates from -alpha + beta cos(2 kappa x)"
    );
    Ok(problem)
}

/// Which equation a run integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    /// The full model for `C`.
    Nonlinear,
    /// The linearization for `δC` about the steady state.
    Linearized,
}

impl fmt::Display for SimMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimMode::Nonlinear => write!(f, "nonlinear"),
            SimMode::Linearized => write!(f, "linearized"),
        }
    }
}

impl FromStr for SimMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nonlinear" => Ok(SimMode::Nonlinear),
            "linearized" => Ok(SimMode::Linearized),
            other => Err(Error::InvalidParameter {
                name: "mode",
                reason: format!("expected \"nonlinear\" or \"linearized\", got \"{other}\""),
            }),
        }
    }
}

/// Run parameters. `dt = None` picks `0.1 / max(1, s₀ + |⟨s⟩|)`.
#[derive(Debug, Clone, Copy)]
pub struct SimConfig<T> {
    pub mode: SimMode,
    pub dt: Option<T>,
    pub t_final: T,
    pub samples_per_period: usize,
    pub record_every: usize,
}

impl<T: Scalar> SimConfig<T> {
    pub fn new(mode: SimMode, t_final: T) -> Self {
        Self {
            mode,
            dt: None,
            t_final,
            samples_per_period: SAMPLES_PER_PERIOD,
            record_every: 1,
        }
    }
}

/// One `(t, sup_norm, l2_norm)` sample of the deviation from the steady
/// state (the field itself in linearized mode).
#[derive(Debug, Clone, Copy)]
pub struct HistoryPoint<T> {
    pub t: T,
    pub sup_norm: T,
    pub l2_norm: T,
}

/// A running integration: the field on the super-domain grid plus its
/// recorded norm history and the linearization-validity monitor.
pub struct Simulation<T: Scalar> {
    problem: RDProblem<T>,
    mode: SimMode,
    dt: T,
    t_final: T,
    t: T,
    steps: usize,
    record_every: usize,
    dx: T,
    field: Vec<T>,
    c0: Vec<T>,
    s: Vec<T>,
    sigma: Vec<T>,
    dfactor: Vec<T>,
    fft: Fft<T>,
    buf: Vec<Complex<T>>,
    history: Vec<HistoryPoint<T>>,
    validity: T,
    max_validity: T,
}

impl<T: Scalar> Simulation<T> {
    /// Starts a run from `C₀ + δC₀` (nonlinear) or `δC₀` (linearized).
    /// The perturbation must be sampled on the super-domain grid of
    /// `n_periods · samples_per_period` points.
    pub fn new(
        problem: &RDProblem<T>,
        perturbation: &[T],
        config: &SimConfig<T>,
    ) -> Result<Self> {
        if config.samples_per_period < 8 || !config.samples_per_period.is_power_of_two() {
            return Err(Error::InvalidParameter {
                name: "samples_per_period",
                reason: "must be a power of two >= 8".into(),
            });
        }
        if config.record_every == 0 {
            return Err(Error::InvalidParameter {
                name: "record_every",
                reason: "must be >= 1".into(),
            });
        }
        let n = problem.n_periods() * config.samples_per_period;
        if perturbation.len() != n {
            return Err(Error::GridMismatch);
        }
        if perturbation.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "perturbation",
                reason: "must be finite".into(),
            });
        }

        let source = problem.linearized_source();
        let dt = match config.dt {
            Some(dt) => {
                if !(dt.is_finite() && dt > T::zero()) {
                    return Err(Error::InvalidParameter {
                        name: "dt",
                        reason: "must be finite and positive".into(),
                    });
                }
                dt
            }
            None => {
                let scale = T::one().max(source.max_value() + source.mean().abs());
                flt::<T>(0.1) / scale
            }
        };
        if !(config.t_final.is_finite() && config.t_final >= dt) {
            return Err(Error::InvalidParameter {
                name: "t_final",
                reason: "must be finite and at least one step long".into(),
            });
        }

        let period = problem.period();
        let dx = period / flt(config.samples_per_period as f64);
        let total_len = period * flt(problem.n_periods() as f64);

        let mut c0 = Vec::with_capacity(n);
        let mut s = Vec::with_capacity(n);
        let mut sigma = Vec::with_capacity(n);
        for j in 0..n {
            let x = dx * flt(j as f64);
            let c = problem.base_state().eval(x);
            c0.push(c);
            s.push(problem.reaction().slope(c));
            sigma.push(problem.sigma().eval(x));
        }

        // 1/(1 + dt k²) per FFT bin; the two Nyquist half-bins share |k|.
        let two_pi = T::PI() + T::PI();
        let dfactor: Vec<T> = (0..n)
            .map(|m| {
                let signed = if m <= n / 2 { m as i64 } else { m as i64 - n as i64 };
                let k = two_pi * flt(signed as f64) / total_len;
                T::one() / (T::one() + dt * k * k)
            })
            .collect();

        let field: Vec<T> = match config.mode {
            SimMode::Nonlinear => c0
                .iter()
                .zip(perturbation)
                .map(|(&c, &d)| c + d)
                .collect(),
            SimMode::Linearized => perturbation.to_vec(),
        };

        let mut sim = Self {
            problem: problem.clone(),
            mode: config.mode,
            dt,
            t_final: config.t_final,
            t: T::zero(),
            steps: 0,
            record_every: config.record_every,
            dx,
            field,
            c0,
            s,
            sigma,
            dfactor,
            fft: Fft::new(n)?,
            buf: vec![Complex::new(T::zero(), T::zero()); n],
            history: Vec::new(),
            validity: T::zero(),
            max_validity: T::zero(),
        };
        sim.update_monitors();
        sim.record();
        Ok(sim)
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn mode(&self) -> SimMode {
        self.mode
    }

    pub fn field(&self) -> &[T] {
        &self.field
    }

    pub fn history(&self) -> &[HistoryPoint<T>] {
        &self.history
    }

    /// Latest value of the linearization-validity monitor
    /// `max|δC·N″(C₀)| / max|N′(C₀)|` (small means the linearization is
    /// trustworthy).
    pub fn validity(&self) -> T {
        self.validity
    }

    /// Worst validity-monitor value seen so far.
    pub fn max_validity(&self) -> T {
        self.max_validity
    }

    /// Deviation from the steady state on the super grid.
    pub fn deviation(&self) -> Vec<T> {
        match self.mode {
            SimMode::Nonlinear => self
                .field
                .iter()
                .zip(&self.c0)
                .map(|(&c, &c0)| c - c0)
                .collect(),
            SimMode::Linearized => self.field.clone(),
        }
    }

    fn deviation_norms(&self) -> (T, T) {
        let mut sup = T::zero();
        let mut sum_sq = T::zero();
        match self.mode {
            SimMode::Nonlinear => {
                for (&c, &c0) in self.field.iter().zip(&self.c0) {
                    let d = c - c0;
                    sup = sup.max(d.abs());
                    sum_sq += d * d;
                }
            }
            SimMode::Linearized => {
                for &d in &self.field {
                    sup = sup.max(d.abs());
                    sum_sq += d * d;
                }
            }
        }
        (sup, (sum_sq * self.dx).sqrt())
    }

    fn update_monitors(&mut self) {
        let mut num = T::zero();
        let mut den = T::zero();
        match self.mode {
            SimMode::Nonlinear => {
                for (&c, &c0) in self.field.iter().zip(&self.c0) {
                    let d = c - c0;
                    num = num.max((d * self.problem.reaction().curvature(c0)).abs());
                    den = den.max(self.problem.reaction().slope(c0).abs());
                }
            }
            SimMode::Linearized => {
                for (&d, &c0) in self.field.iter().zip(&self.c0) {
                    num = num.max((d * self.problem.reaction().curvature(c0)).abs());
                    den = den.max(self.problem.reaction().slope(c0).abs());
                }
            }
        }
        self.validity = if den > T::zero() { num / den } else { T::zero() };
        self.max_validity = self.max_validity.max(self.validity);
    }

    fn record(&mut self) {
        let (sup, l2) = self.deviation_norms();
        self.history.push(HistoryPoint {
            t: self.t,
            sup_norm: sup,
            l2_norm: l2,
        });
    }

    /// Advances one IMEX step. Fails with the time and location of the
    /// first non-finite value if the field blows up.
    pub fn step(&mut self) -> Result<()> {
        let n = self.field.len();
        match self.mode {
            SimMode::Nonlinear => {
                for j in 0..n {
                    let rhs = self.problem.reaction().eval(self.field[j]) + self.sigma[j];
                    self.buf[j] = Complex::new(self.field[j] + self.dt * rhs, T::zero());
                }
            }
            SimMode::Linearized => {
                for j in 0..n {
                    let rhs = self.s[j] * self.field[j];
                    self.buf[j] = Complex::new(self.field[j] + self.dt * rhs, T::zero());
                }
            }
        }
        self.fft.forward_in_place(&mut self.buf);
        for (b, &f) in self.buf.iter_mut().zip(&self.dfactor) {
            *b = *b * f;
        }
        self.fft.inverse_in_place(&mut self.buf);
        for j in 0..n {
            self.field[j] = self.buf[j].re;
        }

        self.steps += 1;
        self.t = self.dt * flt(self.steps as f64);

        if let Some(j) = self.field.iter().position(|v| !v.is_finite()) {
            return Err(Error::BlowUp {
                t: self.t.to_f64().unwrap_or(f64::NAN),
                x: (self.dx * flt(j as f64)).to_f64().unwrap_or(f64::NAN),
            });
        }
        self.update_monitors();
        if self.steps % self.record_every == 0 {
            self.record();
        }
        Ok(())
    }

    /// Steps until `t_final`, recording the final state even when it falls
    /// between sampling points.
    pub fn run(&mut self) -> Result<()> {
        while self.t + self.dt / flt(2.0) < self.t_final {
            self.step()?;
        }
        if self.steps % self.record_every != 0 {
            self.record();
        }
        Ok(())
    }

    /// Like [`run`](Self::run), but stops early once the deviation norm has
    /// grown by `cap_factor` or the field blows up, reporting `true` in
    /// either case. Rate fits treat a capped run as observed growth rather
    /// than an error.
    pub fn run_capped(&mut self, cap_factor: T) -> Result<bool> {
        let cap = self
            .history
            .first()
            .map(|p| p.l2_norm * cap_factor)
            .unwrap_or(T::infinity());
        while self.t + self.dt / flt(2.0) < self.t_final {
            match self.step() {
                Ok(()) => {}
                Err(Error::BlowUp { .. }) => return Ok(true),
                Err(e) => return Err(e),
            }
            if self.history.last().map(|p| p.l2_norm > cap).unwrap_or(false) {
                return Ok(true);
            }
        }
        if self.steps % self.record_every != 0 {
            self.record();
        }
        Ok(false)
    }

    /// Writes the norm history as `t,sup_norm,l2_norm` rows.
    pub fn write_history_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,sup_norm,l2_norm")?;
        for p in &self.history {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e}",
                p.t.to_f64().unwrap_or(f64::NAN),
                p.sup_norm.to_f64().unwrap_or(f64::NAN),
                p.l2_norm.to_f64().unwrap_or(f64::NAN)
            )?;
        }
        Ok(())
    }

    /// Writes the current field as `x,value` rows.
    pub fn write_snapshot_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,value")?;
        for (j, &v) in self.field.iter().enumerate() {
            writeln!(
                w,
                "{:.16e},{:.16e}",
                (self.dx * flt(j as f64)).to_f64().unwrap_or(f64::NAN),
                v.to_f64().unwrap_or(f64::NAN)
            )?;
        }
        Ok(())
    }
}

/// A compactly supported Gaussian bump of width `L/4` centered
/// mid-domain, the default probe for decay-rate runs: broad enough to
/// contain every sampled Bloch wavenumber including `p = 0`.
pub fn gaussian_bump<T: Scalar>(
    problem: &RDProblem<T>,
    samples_per_period: usize,
    amplitude: T,
) -> Vec<T> {
    let n = problem.n_periods() * samples_per_period;
    let period = problem.period();
    let dx = period / flt(samples_per_period as f64);
    let total = period * flt(problem.n_periods() as f64);
    let center = total / flt(2.0);
    let width = period / flt(4.0);
    (0..n)
        .map(|j| {
            let z = (dx * flt(j as f64) - center) / width;
            amplitude * (-z * z / flt(2.0)).exp()
        })
        .collect()
}

/// Deterministic uniform noise in `[-amplitude, amplitude)`, seeded; for
/// reproducible rough initial data without a RNG dependency.
pub fn seeded_noise<T: Scalar>(n: usize, amplitude: T, seed: u64) -> Vec<T> {
    let mut state = seed;
    let mut next = move || {
        // SplitMix64: the standard finalizer constants.
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    };
    (0..n)
        .map(|_| {
            let u = (next() >> 11) as f64 / (1u64 << 53) as f64;
            amplitude * (flt::<T>(2.0) * flt(u) - T::one())
        })
        .collect()
}

/// A fitted decay rate: `δC ~ e^{-rate·t}`, so positive means stable and
/// the rate estimates `λ₀₀`.
#[derive(Debug, Clone, Copy)]
pub struct DecayRate<T> {
    pub rate: T,
    /// Set when the norm grew (rate is then negative).
    pub growth: bool,
    /// Decades of norm change observed over the whole run.
    pub decades: T,
    pub fit_points: usize,
}

/// Fits a decay rate to a recorded norm history: least-squares slope of
/// `ln(l2_norm)` over the final half of the observed interval.
///
/// `capped` relaxes the dynamic-range check: a run stopped early for
/// runaway growth has demonstrated its instability already.
pub fn fit_decay_rate<T: Scalar>(history: &[HistoryPoint<T>], capped: bool) -> Result<DecayRate<T>> {
    let (start, end) = match (history.first(), history.last()) {
        (Some(a), Some(b)) if a.l2_norm > T::zero() => (a, b),
        _ => {
            return Err(Error::InvalidParameter {
                name: "history",
                reason: "needs a nonzero starting norm".into(),
            })
        }
    };
    let decades = (end.l2_norm / start.l2_norm).log10().abs();
    if !capped && decades < flt(2.0) {
        return Err(Error::InsufficientDynamicRange {
            decades: decades.to_f64().unwrap_or(f64::NAN),
            required: 2.0,
        });
    }

    let t_mid = end.t / flt(2.0);
    let window: Vec<(T, T)> = history
        .iter()
        .filter(|p| p.t >= t_mid && p.l2_norm > T::zero())
        .map(|p| (p.t, p.l2_norm.ln()))
        .collect();
    if window.len() < 2 {
        return Err(Error::InsufficientDynamicRange {
            decades: decades.to_f64().unwrap_or(f64::NAN),
            required: 2.0,
        });
    }

    let m = flt::<T>(window.len() as f64);
    let mut t_bar = T::zero();
    let mut y_bar = T::zero();
    for &(t, y) in &window {
        t_bar += t;
        y_bar += y;
    }
    t_bar /= m;
    y_bar /= m;
    let mut num = T::zero();
    let mut den = T::zero();
    for &(t, y) in &window {
        num += (t - t_bar) * (y - y_bar);
        den += (t - t_bar) * (t - t_bar);
    }
    let slope = num / den;

    Ok(DecayRate {
        rate: -slope,
        growth: slope > T::zero(),
        decades,
        fit_points: window.len(),
    })
}

/// Runs the linearization from `perturbation` and fits the decay rate of
/// `‖δC‖₂` over the final half of the horizon.
///
/// Requires at least two decades of norm change over the run. A blow-up
/// mid-run is not an error here: the fit uses the history up to the last
/// finite step and reports growth.
pub fn measure_decay_rate<T: Scalar>(
    problem: &RDProblem<T>,
    perturbation: &[T],
    config: &SimConfig<T>,
) -> Result<DecayRate<T>> {
    if config.mode != SimMode::Linearized {
        return Err(Error::InvalidParameter {
            name: "mode",
            reason: "decay rates are fit on the linearized equation".into(),
        });
    }
    let mut sim = Simulation::new(problem, perturbation, config)?;
    if !(sim.history[0].l2_norm > T::zero()) {
        return Err(Error::InvalidParameter {
            name: "perturbation",
            reason: "must be nonzero to have a measurable norm".into(),
        });
    }
    let capped = sim.run_capped(flt(1e14))?;
    fit_decay_rate(sim.history(), capped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::lambda00;

    fn zero_problem(n_periods: usize) -> RDProblem<f64> {
        let reaction = Reaction::new(|_| 0.0, |_| 0.0, |_| 0.0);
        let zero = PeriodicFunction::from_fn(|_x: f64| 0.0, 2.0 * std::f64::consts::PI, 64)
            .unwrap();
        RDProblem::new(reaction, zero.clone(), zero, n_periods).unwrap()
    }

    #[test]
    fn allen_cahn_satisfies_the_steady_state_identity() {
        let p = allen_cahn_problem(1.0f64, 0.5, 1.0, 8).unwrap();
        // Residual was checked at construction; spot-check the source too.
        let s = p.linearized_source();
        assert!((s.mean() + 1.0).abs() < 1e-12);
        assert!((s.max_value() - (-1.0 + 0.5)).abs() < 1e-9);

        // β = 0 degenerates to a linear reaction with s ≡ -α.
        let p = allen_cahn_problem(0.7f64, 0.0, 1.0, 2).unwrap();
        for &v in p.linearized_source().samples() {
            assert!((v + 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn wrong_sigma_is_rejected_as_a_residual_violation() {
        let reaction = Reaction::new(|c: f64| -c, |_| -1.0, |_| 0.0);
        let period = 2.0 * std::f64::consts::PI;
        let c0 = PeriodicFunction::from_fn(|x: f64| x.sin(), period, 64).unwrap();
        let sigma = PeriodicFunction::from_fn(|_x: f64| 0.0, period, 64).unwrap();
        // C₀″ + N(C₀) = -2 sin x, not cancelled by σ = 0.
        match RDProblem::new(reaction, sigma, c0, 8) {
            Err(Error::SteadyStateResidual { residual, .. }) => {
                assert!((residual - 2.0).abs() < 1e-10)
            }
            other => panic!("expected residual violation, got {other:?}"),
        }
    }

    #[test]
    fn stationary_start_stays_put() {
        let p = allen_cahn_problem(1.0f64, 0.5, 1.0, 8).unwrap();
        let mut config = SimConfig::new(SimMode::Nonlinear, 1.0);
        config.dt = Some(0.01);
        let zero = vec![0.0; 8 * SAMPLES_PER_PERIOD];
        let mut sim = Simulation::new(&p, &zero, &config).unwrap();
        sim.run().unwrap();
        let drift = sim
            .history()
            .iter()
            .map(|h| h.sup_norm)
            .fold(0.0f64, f64::max);
        assert!(drift < 1e-12, "drift {drift:e}");
    }

    #[test]
    fn single_mode_decay_matches_the_scheme_factor() {
        let alpha = 0.8;
        let reaction = Reaction::new(move |c: f64| -alpha * c, move |_| -alpha, |_| 0.0);
        let period = 2.0 * std::f64::consts::PI;
        let zero = PeriodicFunction::from_fn(|_x: f64| 0.0, period, 64).unwrap();
        let problem = RDProblem::new(reaction, zero.clone(), zero, 4).unwrap();

        // One Bloch mode p = κ·2/4 on the super domain.
        let n = 4 * SAMPLES_PER_PERIOD;
        let dx = period / SAMPLES_PER_PERIOD as f64;
        let p_wave = 0.5;
        let delta: Vec<f64> = (0..n).map(|j| 1e-3 * (p_wave * dx * j as f64).cos()).collect();

        let dt = 1e-3;
        let mut config = SimConfig::new(SimMode::Linearized, 10.0 * dt);
        config.dt = Some(dt);
        let mut sim = Simulation::new(&problem, &delta, &config).unwrap();
        let before = sim.history()[0].l2_norm;
        sim.step().unwrap();
        let after = sim.history().last().unwrap().l2_norm;

        let scheme = (1.0 - alpha * dt) / (1.0 + p_wave * p_wave * dt);
        assert!((after / before - scheme).abs() < 1e-12);
        // And the scheme factor is the exact decay up to O(dt²).
        let exact = (-(alpha + p_wave * p_wave) * dt).exp();
        assert!((scheme - exact).abs() < dt * dt);
    }

    #[test]
    fn zero_field_and_mean_conservation() {
        let problem = zero_problem(2);
        let n = 2 * SAMPLES_PER_PERIOD;
        let mut config = SimConfig::new(SimMode::Linearized, 0.5);
        config.dt = Some(0.01);

        let mut sim = Simulation::new(&problem, &vec![0.0; n], &config).unwrap();
        sim.run().unwrap();
        assert!(sim.field().iter().all(|&v| v == 0.0));

        // Pure diffusion conserves the mean of zero-mean noise exactly.
        let mut noise = seeded_noise(n, 0.1, 42);
        let mean = noise.iter().sum::<f64>() / n as f64;
        for v in &mut noise {
            *v -= mean;
        }
        let mut sim = Simulation::new(&problem, &noise, &config).unwrap();
        sim.run().unwrap();
        let drift = sim.field().iter().sum::<f64>() / n as f64;
        assert!(drift.abs() < 1e-12, "mean drift {drift:e}");
    }

    #[test]
    fn decay_rate_matches_lambda00_inside_the_stable_region() {
        let problem = allen_cahn_problem(1.0f64, 0.5, 1.0, 8).unwrap();
        let lam = lambda00(problem.linearized_source()).unwrap().value;
        assert!(lam > 0.0);

        let bump = gaussian_bump(&problem, SAMPLES_PER_PERIOD, 1e-4);
        let mut config = SimConfig::new(SimMode::Linearized, 14.0);
        config.dt = Some(0.01);
        let fit = measure_decay_rate(&problem, &bump, &config).unwrap();
        assert!(!fit.growth);
        assert!(fit.decades >= 2.0);
        let rel = (fit.rate - lam).abs() / lam;
        assert!(rel < 0.05, "rate {} vs lambda00 {lam}, rel {rel}", fit.rate);
    }

    #[test]
    fn growth_is_flagged_outside_the_region() {
        let problem = allen_cahn_problem(0.05f64, 2.0, 1.0, 8).unwrap();
        let lam = lambda00(problem.linearized_source()).unwrap().value;
        assert!(lam < 0.0);

        let bump = gaussian_bump(&problem, SAMPLES_PER_PERIOD, 1e-4);
        let mut config = SimConfig::new(SimMode::Linearized, 24.0);
        config.dt = Some(0.005);
        let fit = measure_decay_rate(&problem, &bump, &config).unwrap();
        assert!(fit.growth);
        assert!(fit.rate < 0.0);
        let rel = (fit.rate - lam).abs() / lam.abs();
        assert!(rel < 0.10, "rate {} vs lambda00 {lam}, rel {rel}", fit.rate);
    }

    #[test]
    fn short_runs_lack_dynamic_range() {
        let problem = allen_cahn_problem(1.0f64, 0.5, 1.0, 8).unwrap();
        let bump = gaussian_bump(&problem, SAMPLES_PER_PERIOD, 1e-4);
        let mut config = SimConfig::new(SimMode::Linearized, 0.5);
        config.dt = Some(0.01);
        match measure_decay_rate(&problem, &bump, &config) {
            Err(Error::InsufficientDynamicRange { decades, .. }) => assert!(decades < 2.0),
            other => panic!("expected dynamic-range error, got {other:?}"),
        }
    }

    #[test]
    fn nonlinear_run_tracks_the_linearization() {
        let problem = allen_cahn_problem(1.0f64, 0.5, 1.0, 4).unwrap();
        let n = 4 * SAMPLES_PER_PERIOD;
        let eps = 1e-6;
        let shape = gaussian_bump(&problem, SAMPLES_PER_PERIOD, 1.0);

        let mut config = SimConfig::new(SimMode::Linearized, 1.0);
        config.dt = Some(0.01);
        let mut lin = Simulation::new(&problem, &shape, &config).unwrap();
        lin.run().unwrap();

        let scaled: Vec<f64> = shape.iter().map(|v| v * eps).collect();
        config.mode = SimMode::Nonlinear;
        let mut non = Simulation::new(&problem, &scaled, &config).unwrap();
        non.run().unwrap();
        assert!(non.max_validity() < 10.0 * eps, "{:e}", non.max_validity());

        let dev = non.deviation();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for j in 0..n {
            worst = worst.max((dev[j] / eps - lin.field()[j]).abs());
            scale = scale.max(lin.field()[j].abs());
        }
        assert!(worst / scale < 10.0 * eps, "relative gap {:e}", worst / scale);
    }

    #[test]
    fn halving_dt_and_dx_barely_moves_the_rate() {
        let problem = allen_cahn_problem(1.0f64, 0.5, 1.0, 8).unwrap();
        let lam = lambda00(problem.linearized_source()).unwrap().value;

        let mut rates = Vec::new();
        for (dt, spp) in [(0.02, 64), (0.01, 64), (0.02, 128)] {
            let bump = gaussian_bump(&problem, spp, 1e-4);
            let mut config = SimConfig::new(SimMode::Linearized, 14.0);
            config.dt = Some(dt);
            config.samples_per_period = spp;
            rates.push(measure_decay_rate(&problem, &bump, &config).unwrap().rate);
        }
        let dt_shift = (rates[1] - rates[0]).abs() / lam;
        let dx_shift = (rates[2] - rates[0]).abs() / lam;
        assert!(dt_shift < 0.01, "dt sensitivity {dt_shift}");
        assert!(dx_shift < 0.01, "dx sensitivity {dx_shift}");
    }

    #[test]
    fn history_and_snapshot_csv_round_trip() {
        let problem = allen_cahn_problem(1.0f64, 0.5, 1.0, 2).unwrap();
        let bump = gaussian_bump(&problem, SAMPLES_PER_PERIOD, 1e-4);
        let mut config = SimConfig::new(SimMode::Linearized, 0.1);
        config.dt = Some(0.01);
        config.record_every = 5;
        let mut sim = Simulation::new(&problem, &bump, &config).unwrap();
        sim.run().unwrap();

        let mut buf = Vec::new();
        sim.write_history_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,sup_norm,l2_norm\n"));
        // Steps 0, 5, 10: three records plus the header.
        assert_eq!(text.lines().count(), 4);

        let mut buf = Vec::new();
        sim.write_snapshot_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,value\n"));
        assert_eq!(text.lines().count(), 1 + 2 * SAMPLES_PER_PERIOD);
    }
}
