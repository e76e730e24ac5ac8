//! Cut-off Gamow states on the plateau, their decay under the propagator
//! and superpositions of low modes truncated to the plateau.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gamow::{lifetime, solve_mode, Eigenfunction, GamowMode, PlateauSpec, SolverConfig};
use crate::grid::Grid;
use crate::tdse::{DecayTimeSeries, Evolution, PropagationReport, PropagatorConfig};
use crate::wavefunction::WaveFunction;

/// Threshold for "≪ 1" in the discrepancy integrals.
pub const DISCREPANCY_THRESHOLD: f64 = 0.05;

/// Half-width reserved beyond the escape front, in units of the cutoff
/// width.
pub const FRONT_MARGIN: f64 = 8.0;

/// A Gamow eigenfunction kept on the plateau and damped outside by
/// Gaussians of width `sigma_cut`, normalised on its grid.
#[derive(Debug, Clone)]
pub struct MetastableState {
    pub mode: GamowMode,
    pub eigenfunction: Eigenfunction,
    pub sigma_cut: f64,
    /// Normalisation constant: φ = A_n ψ on the plateau.
    pub a_n: Complex64,
    pub psi0: WaveFunction,
    /// 1 - ∫_{-a}^{a}|φ|² on the grid.
    pub off_plateau_mass: f64,
}

impl MetastableState {
    /// A_n ψ_n(x) e^{-iZt/ħ}.
    pub fn reference(&self, x: f64, t: f64) -> Complex64 {
        self.a_n * self.eigenfunction.eval_t(x, t)
    }

    /// Off-plateau mass times α², the constant in 1 - P(0) ≈ c/α².
    pub fn off_plateau_constant(&self) -> f64 {
        self.off_plateau_mass * self.mode.alpha * self.mode.alpha
    }
}

/// Unnormalised cut-off eigenfunction.
fn cut_off(ef: &Eigenfunction, sigma: f64, x: f64) -> Complex64 {
    let a = ef.a;
    if x.abs() <= a {
        ef.interior(x)
    } else {
        let d = x.abs() - a;
        ef.exterior(x) * (-d * d / (4.0 * sigma * sigma)).exp()
    }
}

fn half_width(grid: &Grid) -> f64 {
    (-grid.x_min()).min(grid.x_max())
}

pub fn build_metastable(mode: &GamowMode, spec: &PlateauSpec, sigma_cut: f64, grid: &Grid) -> Result<MetastableState> {
    if !(sigma_cut > 0.0) || !sigma_cut.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "cutoff width must be positive, got {sigma_cut}"
        )));
    }
    let required = spec.a + FRONT_MARGIN * sigma_cut;
    let available = half_width(grid);
    if available < required {
        return Err(Error::GridTooSmall { available, required });
    }
    let ef = Eigenfunction::new(mode, spec);
    let mut psi0 = WaveFunction::from_fn(*grid, |x| cut_off(&ef, sigma_cut, x));
    let n2 = psi0.norm_sqr();
    if !(n2 > 0.0) || !n2.is_finite() {
        return Err(Error::ZeroNorm);
    }
    let a_n = Complex64::new(1.0 / n2.sqrt(), 0.0);
    psi0.scale(a_n);
    let off_plateau_mass = 1.0 - psi0.region_probability(-spec.a, spec.a)?;
    Ok(MetastableState {
        mode: mode.clone(),
        eigenfunction: ef,
        sigma_cut,
        a_n,
        psi0,
        off_plateau_mass,
    })
}

/// Off-plateau share of the cut-off state, by quadrature and independent
/// of any propagation grid.
pub fn off_plateau_mass(mode: &GamowMode, spec: &PlateauSpec, sigma_cut: f64) -> f64 {
    let ef = Eigenfunction::new(mode, spec);
    let inside = ef.plateau_norm();
    let beta = mode.beta;
    let tail = |b: Complex64| {
        // ∫_0^∞ |b|² e^{2βy - y²/2σ²} dy by composite Simpson.
        let top = 2.0 * beta * sigma_cut * sigma_cut + 14.0 * sigma_cut;
        let n = 20_000;
        let h = top / n as f64;
        let f = |y: f64| (2.0 * beta * y - y * y / (2.0 * sigma_cut * sigma_cut)).exp();
        let mut s = f(0.0) + f(top);
        for i in 1..n {
            s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        b.norm_sqr() * s * h / 3.0
    };
    let outside = tail(ef.b_right) + tail(ef.b_left);
    outside / (inside + outside)
}

/// Off-plateau masses over several α at fixed n, with the log–log slope.
#[derive(Debug, Clone, PartialEq)]
pub struct OffPlateauScaling {
    pub alphas: Vec<f64>,
    pub masses: Vec<f64>,
    pub slope: f64,
    /// Mean of mass·α².
    pub constant: f64,
}

pub fn off_plateau_scaling(
    base: &PlateauSpec,
    alphas: &[f64],
    n: i64,
    sigma_over_a: f64,
    solver: &SolverConfig,
) -> Result<OffPlateauScaling> {
    let mut masses = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let spec = PlateauSpec::from_alpha(alpha, base.a, base.params)?;
        let mode = solve_mode(&spec, n, solver)?;
        masses.push(off_plateau_mass(&mode, &spec, sigma_over_a * spec.a));
    }
    let lx: Vec<f64> = alphas.iter().map(|a| a.ln()).collect();
    let ly: Vec<f64> = masses.iter().map(|m| m.ln()).collect();
    let (slope, _) = linear_fit(&lx, &ly)
        .ok_or_else(|| Error::InvalidParameter("need at least two distinct alpha values".to_string()))?;
    let constant = alphas.iter().zip(&masses).map(|(a, m)| m * a * a).sum::<f64>() / alphas.len() as f64;
    Ok(OffPlateauScaling {
        alphas: alphas.to_vec(),
        masses,
        slope,
        constant,
    })
}

/// Least-squares line through (x, y): (slope, intercept).
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let sxx: f64 = x[..n].iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = x[..n].iter().zip(&y[..n]).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Decay rate from a least-squares fit of ln P(t) over `lo ≤ t ≤ hi`.
pub fn fit_decay_rate(times: &[f64], probs: &[f64], lo: f64, hi: f64) -> Option<f64> {
    let (t, lp): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(probs)
        .filter(|(t, p)| **t >= lo && **t <= hi && **p > 0.0)
        .map(|(t, p)| (*t, p.ln()))
        .unzip();
    linear_fit(&t, &lp).map(|(slope, _)| -slope)
}

/// Smallest half-width keeping escaped probability away from the walls
/// until `horizon`: a + v·horizon + 8σ.
pub fn required_half_width(a: f64, speed: f64, horizon: f64, sigma: f64) -> f64 {
    a + speed * horizon + FRONT_MARGIN * sigma
}

/// Symmetric grid with spacing `a/points_per_a` wide enough for a run to
/// `horizon`. The front of the escaping wave spreads like a free packet of
/// width σ, so the margin uses the spread width at the horizon.
pub fn decay_grid(
    mode: &GamowMode,
    spec: &PlateauSpec,
    sigma_cut: f64,
    horizon: f64,
    points_per_a: usize,
) -> Result<Grid> {
    let p = &spec.params;
    let spread = p.hbar * horizon / (2.0 * p.mass * sigma_cut * sigma_cut);
    let sigma_t = sigma_cut * (1.0 + spread * spread).sqrt();
    let hw = required_half_width(spec.a, mode.escape_speed, horizon, sigma_t);
    aligned_grid(spec.a, hw, points_per_a)
}

/// Grid whose nodes include ±a.
fn aligned_grid(a: f64, half_width: f64, points_per_a: usize) -> Result<Grid> {
    if points_per_a < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 points per plateau half-width, got {points_per_a}"
        )));
    }
    let dx = a / points_per_a as f64;
    let cells = (half_width / dx).ceil();
    Grid::symmetric(cells * dx, dx)
}

/// Integral of |ψ - f|² over `[lo, hi]` clipped to the grid.
fn discrepancy(psi: &WaveFunction, lo: f64, hi: f64, f: impl Fn(f64) -> Complex64) -> Result<f64> {
    let grid = psi.grid();
    let lo = lo.max(grid.x_min());
    let hi = hi.min(grid.x_max());
    let range = grid.index_range(lo, hi);
    let mut d = vec![0.0; grid.len()];
    // Cover the partial cells at the ends too.
    let start = range.start.saturating_sub(1);
    let end = (range.end + 1).min(grid.len());
    for (i, (di, c)) in d.iter_mut().zip(psi.amplitudes()).enumerate().take(end).skip(start) {
        *di = (c - f(grid.x(i))).norm_sqr();
    }
    grid.integrate(&d, lo, hi)
}

/// Quantities sampled along a metastable run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecaySample {
    pub time: f64,
    /// ∫_{-a}^{a}|φ_t|².
    pub plateau_prob: f64,
    /// ∫_{-a}^{a}|φ_t - A_nψ_{n,t}|².
    pub plateau_discrepancy: f64,
    /// Same over [-a-vt, a+vt].
    pub region_discrepancy: f64,
    /// Same over [-a-2vt, a+2vt].
    pub doubled_region_discrepancy: f64,
}

fn check_walls(state: &MetastableState, spec: &PlateauSpec, horizon: f64) -> Result<f64> {
    let available = half_width(state.psi0.grid());
    let required = required_half_width(spec.a, state.mode.escape_speed, horizon, state.sigma_cut);
    if available <= required {
        return Err(Error::WallReturn {
            horizon,
            available,
            required,
        });
    }
    Ok(available)
}

fn track(
    state: &MetastableState,
    spec: &PlateauSpec,
    cfg: &PropagatorConfig,
    times: &[f64],
) -> Result<(Vec<DecaySample>, PropagationReport)> {
    if times.windows(2).any(|w| !(w[1] > w[0])) || times.first().is_some_and(|t| *t < 0.0) {
        return Err(Error::InvalidParameter(
            "sample times must be non-negative and increasing".to_string(),
        ));
    }
    let horizon = times.last().copied().unwrap_or(0.0);
    let available = check_walls(state, spec, horizon)?;
    let mut evo = Evolution::new(state.psi0.clone(), &spec.potential(), cfg)?;
    let a = spec.a;
    let v = state.mode.escape_speed;
    let mut samples = Vec::with_capacity(times.len());
    for &t in times {
        evo.advance_to(t);
        let t = evo.time();
        let psi = evo.psi();
        let reference = |x: f64| state.reference(x, t);
        samples.push(DecaySample {
            time: t,
            plateau_prob: psi.region_probability(-a, a)?,
            plateau_discrepancy: discrepancy(psi, -a, a, reference)?,
            region_discrepancy: discrepancy(psi, -a - v * t, a + v * t, reference)?,
            doubled_region_discrepancy: discrepancy(psi, -a - 2.0 * v * t, a + 2.0 * v * t, reference)?,
        });
    }
    let report = *evo.report();
    if let Some(contact) = report.wall_contact {
        if contact <= horizon {
            return Err(Error::WallReturn {
                horizon,
                available,
                required: available * horizon / contact.max(f64::MIN_POSITIVE),
            });
        }
    }
    Ok((samples, report))
}

/// Outcome of a single-mode decay run.
#[derive(Debug, Clone)]
pub struct DecayReport {
    pub samples: Vec<DecaySample>,
    /// Rate fitted over [0.1τ, t] for each sample time t (None before
    /// two points are available).
    pub fitted_rate_so_far: Vec<Option<f64>>,
    /// Rate fitted over [0.1τ, min(τ, horizon)].
    pub fitted_rate: f64,
    /// -2 Im Z/ħ.
    pub expected_rate: f64,
    pub tau: f64,
    pub tau_cl: f64,
    pub survival_at_horizon: f64,
    pub report: PropagationReport,
}

impl DecayReport {
    pub fn rate_error(&self) -> f64 {
        (self.fitted_rate - self.expected_rate).abs() / self.expected_rate
    }

    pub fn fitted_tau(&self) -> f64 {
        1.0 / self.fitted_rate
    }

    pub fn max_plateau_discrepancy(&self) -> f64 {
        self.samples.iter().map(|s| s.plateau_discrepancy).fold(0.0, f64::max)
    }

    pub fn max_region_discrepancy(&self) -> f64 {
        self.samples.iter().map(|s| s.region_discrepancy).fold(0.0, f64::max)
    }

    pub fn max_doubled_region_discrepancy(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.doubled_region_discrepancy)
            .fold(0.0, f64::max)
    }

    pub fn series(&self) -> DecayTimeSeries {
        DecayTimeSeries {
            times: self.samples.iter().map(|s| s.time).collect(),
            plateau_prob: self.samples.iter().map(|s| s.plateau_prob).collect(),
            region_discrepancy: Some(self.samples.iter().map(|s| s.region_discrepancy).collect()),
        }
    }
}

/// `count` equally spaced times in (0, horizon], preceded by 0.
pub fn sample_times(horizon: f64, count: usize) -> Vec<f64> {
    (0..=count).map(|j| horizon * j as f64 / count as f64).collect()
}

/// Propagate the cut-off state to `horizon` (at most τ), sampling
/// `samples` times. The step is shrunk so the samples land on steps.
pub fn decay_experiment(
    state: &MetastableState,
    spec: &PlateauSpec,
    cfg: &PropagatorConfig,
    horizon: f64,
    samples: usize,
) -> Result<DecayReport> {
    let tau = state.mode.tau;
    if !(horizon > 0.0) || horizon > tau * (1.0 + 1e-9) {
        return Err(Error::InvalidParameter(format!(
            "horizon {horizon} must lie in (0, tau = {tau}]"
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    let times = sample_times(horizon, samples);
    let cfg = aligned_step(cfg, horizon / samples as f64);
    let (samples, report) = track(state, spec, &cfg, &times)?;
    let t: Vec<f64> = samples.iter().map(|s| s.time).collect();
    let p: Vec<f64> = samples.iter().map(|s| s.plateau_prob).collect();
    let lo = 0.1 * tau;
    let fitted_rate_so_far = t.iter().map(|&hi| fit_decay_rate(&t, &p, lo, hi)).collect();
    let fitted_rate = fit_decay_rate(&t, &p, lo, horizon.min(tau) * (1.0 + 1e-12))
        .ok_or_else(|| Error::InvalidParameter("too few samples inside [0.1 tau, horizon]".to_string()))?;
    let lifetimes = lifetime(spec, &state.mode)?;
    Ok(DecayReport {
        fitted_rate_so_far,
        fitted_rate,
        expected_rate: 1.0 / tau,
        tau,
        tau_cl: lifetimes.tau_cl,
        survival_at_horizon: *p.last().unwrap_or(&1.0),
        report,
        samples,
    })
}

/// Discrepancy on [-a-vt, a+vt] and on the doubled region at the given
/// times.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowingRegionCheck {
    pub times: Vec<f64>,
    pub discrepancy: Vec<f64>,
    pub doubled: Vec<f64>,
}

impl GrowingRegionCheck {
    pub fn within_threshold(&self) -> bool {
        self.discrepancy.iter().all(|d| *d <= DISCREPANCY_THRESHOLD)
    }
}

pub fn growing_region_check(
    state: &MetastableState,
    spec: &PlateauSpec,
    cfg: &PropagatorConfig,
    times: &[f64],
) -> Result<GrowingRegionCheck> {
    let (samples, _) = track(state, spec, cfg, times)?;
    Ok(GrowingRegionCheck {
        times: samples.iter().map(|s| s.time).collect(),
        discrepancy: samples.iter().map(|s| s.region_discrepancy).collect(),
        doubled: samples.iter().map(|s| s.doubled_region_discrepancy).collect(),
    })
}

/// Shrinks dt so that `interval` is a whole number of steps.
fn aligned_step(cfg: &PropagatorConfig, interval: f64) -> PropagatorConfig {
    let steps = (interval / cfg.dt - 1e-9).ceil().max(1.0);
    let mut cfg = *cfg;
    cfg.dt = interval / steps;
    cfg
}

/// Coefficients c_n of a plateau superposition Σ c_n ψ_n.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperpositionSpec {
    pub terms: Vec<(i64, Complex64)>,
}

impl SuperpositionSpec {
    pub fn new(terms: Vec<(i64, Complex64)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParameter("superposition has no terms".to_string()));
        }
        for (i, (n, c)) in terms.iter().enumerate() {
            if *n < 1 {
                return Err(Error::InvalidParameter(format!("mode index must be >= 1, got {n}")));
            }
            if terms[..i].iter().any(|(m, _)| m == n) {
                return Err(Error::InvalidParameter(format!("mode {n} listed twice")));
            }
            if !(c.norm() > 0.0) || !c.is_finite() {
                return Err(Error::InvalidParameter(format!("bad coefficient for mode {n}")));
            }
        }
        Ok(Self { terms })
    }

    pub fn single(n: i64) -> Result<Self> {
        Self::new(vec![(n, Complex64::new(1.0, 0.0))])
    }

    pub fn n_max(&self) -> i64 {
        self.terms.iter().map(|(n, _)| *n).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub struct SuperpositionRun {
    pub modes: Vec<GamowMode>,
    /// Factor applied to the c_n so that the truncated state has unit norm.
    pub normalization: f64,
    pub times: Vec<f64>,
    pub plateau_prob: Vec<f64>,
    /// ∫_{-a}^{a}|ψ_t - Σ c_n ψ_{n,t}|².
    pub discrepancy: Vec<f64>,
    pub min_tau: f64,
    /// Lifetime from a fit of ln P over [0.1, 1]·horizon.
    pub fitted_tau: f64,
    pub report: PropagationReport,
}

impl SuperpositionRun {
    pub fn max_discrepancy(&self) -> f64 {
        self.discrepancy.iter().copied().fold(0.0, f64::max)
    }

    pub fn series(&self) -> DecayTimeSeries {
        DecayTimeSeries {
            times: self.times.clone(),
            plateau_prob: self.plateau_prob.clone(),
            region_discrepancy: Some(self.discrepancy.clone()),
        }
    }
}

/// Grid for a superposition run: the fastest mode's front plus 8a.
pub fn superposition_grid(
    spec: &PlateauSpec,
    coeffs: &SuperpositionSpec,
    horizon: f64,
    points_per_a: usize,
    solver: &SolverConfig,
) -> Result<Grid> {
    let mut speed: f64 = 0.0;
    for (n, _) in &coeffs.terms {
        speed = speed.max(solve_mode(spec, *n, solver)?.escape_speed);
    }
    aligned_grid(
        spec.a,
        required_half_width(spec.a, speed, horizon, spec.a) * 1.01,
        points_per_a,
    )
}

/// Propagate Σ c_n ψ_n truncated to the plateau and compare with the
/// superposition of decaying eigenfunctions there.
pub fn superposition_experiment(
    spec: &PlateauSpec,
    coeffs: &SuperpositionSpec,
    cfg: &PropagatorConfig,
    grid: &Grid,
    horizon: f64,
    samples: usize,
    solver: &SolverConfig,
) -> Result<SuperpositionRun> {
    let mut modes = Vec::with_capacity(coeffs.terms.len());
    for (n, _) in &coeffs.terms {
        modes.push(solve_mode(spec, *n, solver)?);
    }
    let min_tau = modes.iter().map(|m| m.tau).fold(f64::INFINITY, f64::min);
    if !(horizon > 0.0) || horizon > min_tau * (1.0 + 1e-9) {
        return Err(Error::InvalidParameter(format!(
            "horizon {horizon} must lie in (0, min tau = {min_tau}]"
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    let speed = modes.iter().map(|m| m.escape_speed).fold(0.0, f64::max);
    let available = half_width(grid);
    let required = required_half_width(spec.a, speed, horizon, spec.a);
    if available <= required {
        return Err(Error::WallReturn {
            horizon,
            available,
            required,
        });
    }
    let a = spec.a;
    let parts: Vec<(Eigenfunction, Complex64)> = modes
        .iter()
        .zip(&coeffs.terms)
        .map(|(m, (_, c))| (Eigenfunction::new(m, spec), *c))
        .collect();
    let combined = |x: f64, t: f64| -> Complex64 { parts.iter().map(|(ef, c)| c * ef.eval_t(x, t)).sum() };
    let initial = WaveFunction::from_fn(*grid, |x| {
        if x.abs() <= a {
            combined(x, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let n2 = initial.norm_sqr();
    if !(n2 > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let normalization = 1.0 / n2.sqrt();
    let initial = {
        let mut psi = initial;
        psi.scale(Complex64::new(normalization, 0.0));
        psi
    };

    let times = sample_times(horizon, samples);
    let cfg = aligned_step(cfg, horizon / samples as f64);
    let mut evo = Evolution::new(initial, &spec.potential(), &cfg)?;
    let mut out_t = Vec::with_capacity(times.len());
    let mut prob = Vec::with_capacity(times.len());
    let mut disc = Vec::with_capacity(times.len());
    for &t in &times {
        evo.advance_to(t);
        let t = evo.time();
        let psi = evo.psi();
        out_t.push(t);
        prob.push(psi.region_probability(-a, a)?);
        disc.push(discrepancy(psi, -a, a, |x| combined(x, t) * normalization)?);
    }
    let report = *evo.report();
    if let Some(contact) = report.wall_contact {
        if contact <= horizon {
            return Err(Error::WallReturn {
                horizon,
                available,
                required: available * horizon / contact.max(f64::MIN_POSITIVE),
            });
        }
    }
    let rate = fit_decay_rate(&out_t, &prob, 0.1 * horizon, horizon * (1.0 + 1e-12))
        .ok_or_else(|| Error::InvalidParameter("too few samples to fit a rate".to_string()))?;
    Ok(SuperpositionRun {
        modes,
        normalization,
        times: out_t,
        plateau_prob: prob,
        discrepancy: disc,
        min_tau,
        fitted_tau: 1.0 / rate,
        report,
    })
}
