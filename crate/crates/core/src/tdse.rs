//! Crank–Nicolson propagation on a hard-walled grid, the scattering
//! experiment and the coarse-mesh reflection demonstration.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::packet::{build_gaussian, GaussianPacketSpec};
use crate::potential::Potential;
use crate::stationary::{Provenance, ScatteringCoefficients};
use crate::units::PhysicalParams;
use crate::wavefunction::WaveFunction;

/// Density at the outermost free nodes above which a run is flagged as
/// having touched a wall.
pub const WALL_CONTACT_DENSITY: f64 = 1e-8;

/// Largest allowed dt·(|⟨H⟩| + 3ΔH)/ħ.
pub const MAX_PHASE_PER_STEP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    CrankNicolson,
}

/// Finite-difference stencil for the second derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stencil {
    #[default]
    ThreePoint,
    FivePoint,
    SevenPoint,
}

impl Stencil {
    pub fn from_order(order: usize) -> Result<Self> {
        match order {
            2 => Ok(Self::ThreePoint),
            4 => Ok(Self::FivePoint),
            6 => Ok(Self::SevenPoint),
            _ => Err(Error::InvalidParameter(format!(
                "stencil order must be 2, 4 or 6, got {order}"
            ))),
        }
    }

    pub fn order(self) -> usize {
        2 * self.half_width()
    }

    pub fn half_width(self) -> usize {
        match self {
            Self::ThreePoint => 1,
            Self::FivePoint => 2,
            Self::SevenPoint => 3,
        }
    }

    /// Second-derivative weights for offsets 0..=half_width, times dx².
    pub fn weights(self) -> &'static [f64] {
        match self {
            Self::ThreePoint => &[-2.0, 1.0],
            Self::FivePoint => &[-5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0],
            Self::SevenPoint => &[-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0],
        }
    }
}

/// Components below this magnitude are set to zero during a step. The
/// implicit solve spreads exponentially small tails over the whole grid,
/// and subnormal arithmetic on them is very slow.
const FLUSH_BELOW: f64 = 1e-150;

#[inline(always)]
fn flush(c: Complex64) -> Complex64 {
    Complex64::new(
        if c.re.abs() < FLUSH_BELOW { 0.0 } else { c.re },
        if c.im.abs() < FLUSH_BELOW { 0.0 } else { c.im },
    )
}

/// Time stepping parameters. The walls are the ends of the grid plus any
/// nodes where the potential is infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub stencil: Stencil,
    pub params: PhysicalParams,
}

impl PropagatorConfig {
    pub fn new(dt: f64, params: PhysicalParams) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        Ok(Self {
            dt,
            scheme: Scheme::CrankNicolson,
            stencil: Stencil::ThreePoint,
            params,
        })
    }

    pub fn with_stencil(mut self, stencil: Stencil) -> Self {
        self.stencil = stencil;
        self
    }
}

/// Finite-difference Hamiltonian with Dirichlet ends. Pinned nodes hold
/// zero and are dropped from every stencil, so H stays symmetric.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    grid: Grid,
    /// Diagonal on free nodes (kinetic part plus V_i).
    diag: Vec<f64>,
    /// Couplings to neighbours at distance 1..=half_width.
    off: Vec<f64>,
    pinned: Vec<bool>,
}

impl Hamiltonian {
    pub fn new(grid: &Grid, potential: &Potential, params: &PhysicalParams) -> Result<Self> {
        Self::with_stencil(grid, potential, params, Stencil::ThreePoint)
    }

    pub fn with_stencil(grid: &Grid, potential: &Potential, params: &PhysicalParams, stencil: Stencil) -> Result<Self> {
        potential.validate()?;
        let n = grid.len();
        let c = params.kinetic_coefficient() / (grid.dx() * grid.dx());
        let w = stencil.weights();
        let v = potential.sample(grid.points());
        let pinned: Vec<bool> = (0..n).map(|i| i == 0 || i + 1 == n || !v[i].is_finite()).collect();
        let diag = (0..n).map(|i| if pinned[i] { 0.0 } else { -c * w[0] + v[i] }).collect();
        Ok(Self {
            grid: *grid,
            diag,
            off: w[1..].iter().map(|wj| -c * wj).collect(),
            pinned,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn half_width(&self) -> usize {
        self.off.len()
    }

    pub fn is_pinned(&self, i: usize) -> bool {
        self.pinned[i]
    }

    /// First and last free node.
    pub fn free_range(&self) -> (usize, usize) {
        let first = self.pinned.iter().position(|p| !p).unwrap_or(0);
        let last = self.pinned.iter().rposition(|p| !p).unwrap_or(0);
        (first, last)
    }

    #[inline]
    fn row(&self, psi: &[Complex64], i: usize) -> Complex64 {
        let zero = Complex64::new(0.0, 0.0);
        if self.pinned[i] {
            return zero;
        }
        let n = psi.len();
        let val = |j: usize| if self.pinned[j] { zero } else { psi[j] };
        let mut acc = self.diag[i] * psi[i];
        for (d, &o) in self.off.iter().enumerate() {
            let d = d + 1;
            let mut s = zero;
            if i >= d {
                s += val(i - d);
            }
            if i + d < n {
                s += val(i + d);
            }
            acc += o * s;
        }
        acc
    }

    /// Hψ with ψ taken to vanish on pinned nodes.
    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        (0..psi.len()).map(|i| self.row(psi, i)).collect()
    }

    /// (⟨H⟩, ΔH) in the discrete inner product.
    pub fn moments(&self, psi: &[Complex64]) -> (f64, f64) {
        let h = self.apply(psi);
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        let mean: f64 = psi.iter().zip(&h).map(|(a, b)| (a.conj() * b).re).sum::<f64>() / norm;
        let second: f64 = h.iter().map(|c| c.norm_sqr()).sum::<f64>() / norm;
        (mean, (second - mean * mean).max(0.0).sqrt())
    }

    pub fn energy(&self, psi: &WaveFunction) -> f64 {
        self.moments(psi.amplitudes()).0
    }
}

/// One Crank–Nicolson step (I + iτH)ψ' = (I - iτH)ψ with τ = dt/2ħ.
/// The banded LU factorisation of the left-hand side is computed once.
/// No pivoting: the Hermitian part of I + iτH is the identity.
#[derive(Debug, Clone)]
pub struct CrankNicolson {
    h: Hamiltonian,
    dt: f64,
    tau: f64,
    /// Row i holds L[i][i-p..i] then U[i][i+1..=i+p], p = half width.
    factors: Vec<Complex64>,
    inv_pivot: Vec<Complex64>,
    pinned_nodes: Vec<usize>,
    scratch: Vec<Complex64>,
}

impl CrankNicolson {
    pub fn new(grid: &Grid, potential: &Potential, cfg: &PropagatorConfig) -> Result<Self> {
        let h = Hamiltonian::with_stencil(grid, potential, &cfg.params, cfg.stencil)?;
        let tau = cfg.dt / (2.0 * cfg.params.hbar);
        let n = grid.len();
        let p = h.half_width();
        let w = 2 * p;
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let i_tau = Complex64::new(0.0, tau);
        // Band of A = I + iτH: entry (i, i+d) for d in -p..=p lives at
        // factors[i*w + ..] (off-diagonal) or pivot[i] (diagonal).
        let couple = |i: usize, j: usize| -> Complex64 {
            if h.pinned[i] || h.pinned[j] {
                zero
            } else {
                i_tau * h.off[i.abs_diff(j) - 1]
            }
        };
        let mut factors = vec![zero; n * w];
        let mut pivot = vec![zero; n];
        for i in 0..n {
            pivot[i] = if h.pinned[i] { one } else { one + i_tau * h.diag[i] };
            for d in 1..=p {
                if i >= d {
                    factors[i * w + (p - d)] = couple(i, i - d);
                }
                if i + d < n {
                    factors[i * w + p + d - 1] = couple(i, i + d);
                }
            }
        }
        // Doolittle elimination inside the band.
        let mut inv_pivot = vec![zero; n];
        for k in 0..n {
            inv_pivot[k] = one / pivot[k];
            for r in 1..=p.min(n - 1 - k) {
                let i = k + r;
                let a_ik = factors[i * w + (p - r)];
                if a_ik == zero {
                    continue;
                }
                let l = a_ik * inv_pivot[k];
                factors[i * w + (p - r)] = l;
                for c in 1..=p.min(n - 1 - k) {
                    let u_kj = factors[k * w + p + c - 1];
                    let j = k + c;
                    // Column j relative to row i.
                    if j == i {
                        pivot[i] -= l * u_kj;
                    } else if j > i {
                        factors[i * w + p + (j - i) - 1] -= l * u_kj;
                    } else {
                        factors[i * w + (p - (i - j))] -= l * u_kj;
                    }
                }
            }
        }
        let pinned_nodes = (0..n).filter(|&i| h.pinned[i]).collect();
        Ok(Self {
            h,
            dt: cfg.dt,
            tau,
            factors,
            inv_pivot,
            pinned_nodes,
            scratch: vec![zero; n],
        })
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.h
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Rejects a step that does not resolve the phase the state actually
    /// accumulates: dt·(|⟨H⟩| + 3ΔH)/ħ must stay below 0.5.
    pub fn check_step(&self, psi: &[Complex64]) -> Result<()> {
        let (mean, spread) = self.h.moments(psi);
        let rate = (mean.abs() + 3.0 * spread) * (2.0 * self.tau / self.dt);
        let product = self.dt * rate;
        if !(product < MAX_PHASE_PER_STEP) {
            return Err(Error::UnstableStep {
                dt: self.dt,
                rate,
                product,
            });
        }
        Ok(())
    }

    /// Advance `psi` by one step. Entries on pinned nodes are set to zero.
    pub fn step(&mut self, psi: &mut [Complex64]) {
        match self.h.half_width() {
            1 => self.step_banded::<1>(psi),
            2 => self.step_banded::<2>(psi),
            _ => self.step_banded::<3>(psi),
        }
    }

    fn step_banded<const P: usize>(&mut self, psi: &mut [Complex64]) {
        let n = psi.len();
        let w = 2 * P;
        let zero = Complex64::new(0.0, 0.0);
        for &i in &self.pinned_nodes {
            psi[i] = zero;
        }
        let h = &self.h;
        let m_tau = Complex64::new(0.0, -self.tau);
        let off: [f64; P] = std::array::from_fn(|d| h.off[d]);
        // Pinned entries are zero, so interior rows need no masking.
        for i in 0..n {
            self.scratch[i] = if i < P || i + P >= n {
                psi[i] + m_tau * h.row(psi, i)
            } else {
                let mut acc = h.diag[i] * psi[i];
                for d in 0..P {
                    acc += off[d] * (psi[i - d - 1] + psi[i + d + 1]);
                }
                psi[i] + m_tau * acc
            };
        }
        for &i in &self.pinned_nodes {
            self.scratch[i] = zero;
        }
        let f = &self.factors;
        for i in 1..n {
            let row = &f[i * w..i * w + P];
            let mut acc = self.scratch[i];
            if i >= P {
                for d in 1..=P {
                    acc -= row[P - d] * self.scratch[i - d];
                }
            } else {
                for d in 1..=i {
                    acc -= row[P - d] * self.scratch[i - d];
                }
            }
            self.scratch[i] = flush(acc);
        }
        for i in (0..n).rev() {
            let row = &f[i * w + P..i * w + w];
            let mut acc = self.scratch[i];
            if i + P < n {
                for d in 1..=P {
                    acc -= row[d - 1] * psi[i + d];
                }
            } else {
                for d in 1..n - i {
                    acc -= row[d - 1] * psi[i + d];
                }
            }
            psi[i] = flush(acc * self.inv_pivot[i]);
        }
    }

    /// Density at the outermost free nodes.
    pub fn wall_density(&self, psi: &[Complex64]) -> f64 {
        let (first, last) = self.h.free_range();
        psi[first].norm_sqr().max(psi[last].norm_sqr())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PropagationReport {
    pub steps: usize,
    pub time: f64,
    /// Largest |‖ψ(t)‖² - ‖ψ(0)‖²| seen.
    pub norm_drift: f64,
    /// Largest change of ‖ψ‖² in a single step.
    pub max_step_drift: f64,
    /// First time the wall density exceeded the contact threshold.
    pub wall_contact: Option<f64>,
}

impl PropagationReport {
    fn record(&mut self, cn: &CrankNicolson, psi: &[Complex64], n0: f64, prev: f64) -> f64 {
        let n2 = psi.iter().map(|c| c.norm_sqr()).sum::<f64>();
        self.norm_drift = self.norm_drift.max((n2 - n0).abs() / n0);
        self.max_step_drift = self.max_step_drift.max((n2 - prev).abs() / n0);
        if self.wall_contact.is_none() && cn.wall_density(psi) > WALL_CONTACT_DENSITY {
            self.wall_contact = Some(self.time);
        }
        n2
    }
}

/// A propagator bundled with its running time and bookkeeping.
#[derive(Debug, Clone)]
pub struct Evolution {
    cn: CrankNicolson,
    psi: WaveFunction,
    report: PropagationReport,
    norm0: f64,
    last_norm: f64,
}

impl Evolution {
    pub fn new(psi: WaveFunction, potential: &Potential, cfg: &PropagatorConfig) -> Result<Self> {
        let cn = CrankNicolson::new(psi.grid(), potential, cfg)?;
        let mut psi = psi;
        for (i, c) in psi.amplitudes_mut().iter_mut().enumerate() {
            if cn.h.pinned[i] {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        cn.check_step(psi.amplitudes())?;
        let norm0: f64 = psi.amplitudes().iter().map(|c| c.norm_sqr()).sum();
        if !(norm0 > 0.0) {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            cn,
            psi,
            report: PropagationReport::default(),
            norm0,
            last_norm: norm0,
        })
    }

    pub fn time(&self) -> f64 {
        self.report.time
    }

    pub fn steps(&self) -> usize {
        self.report.steps
    }

    pub fn psi(&self) -> &WaveFunction {
        &self.psi
    }

    pub fn report(&self) -> &PropagationReport {
        &self.report
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        self.cn.hamiltonian()
    }

    pub fn step(&mut self) {
        self.cn.step(self.psi.amplitudes_mut());
        self.report.steps += 1;
        self.report.time = self.report.steps as f64 * self.cn.dt;
        self.last_norm = self
            .report
            .record(&self.cn, self.psi.amplitudes(), self.norm0, self.last_norm);
    }

    pub fn advance(&mut self, steps: usize) {
        for _ in 0..steps {
            self.step();
        }
    }

    /// Step until the step counter reaches `round(t/dt)`.
    pub fn advance_to(&mut self, t: f64) {
        let target = (t / self.cn.dt).round() as usize;
        while self.report.steps < target {
            self.step();
        }
    }

    pub fn into_parts(self) -> (WaveFunction, PropagationReport) {
        (self.psi, self.report)
    }
}

/// Evolve `psi` for time `t`. The step is shrunk so that a whole number
/// of steps lands exactly on `t`.
pub fn propagate(
    psi: &WaveFunction,
    potential: &Potential,
    cfg: &PropagatorConfig,
    t: f64,
) -> Result<(WaveFunction, PropagationReport)> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    let steps = (t / cfg.dt - 1e-9).ceil().max(0.0) as usize;
    let mut cfg = *cfg;
    if steps > 0 {
        cfg.dt = t / steps as f64;
    }
    let mut evo = Evolution::new(psi.clone(), potential, &cfg)?;
    evo.advance(steps);
    Ok(evo.into_parts())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    FixedTime(f64),
    /// Stop once the probability within `gap` of the step is below
    /// [`SEPARATION_ZONE_PROBABILITY`] and the currents on the two sides
    /// point away from it; give up at `max_time`.
    PacketsSeparated {
        gap: f64,
        max_time: f64,
    },
}

pub const SEPARATION_ZONE_PROBABILITY: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringRun {
    pub initial: GaussianPacketSpec,
    /// A step inside a hard box.
    pub potential: Potential,
    pub grid: Grid,
    pub config: PropagatorConfig,
    pub stop_rule: StopRule,
    /// Times at which to keep a copy of the state.
    pub snapshot_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub psi: WaveFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringOutcome {
    pub coefficients: ScatteringCoefficients,
    pub stop_time: f64,
    pub snapshots: Vec<Snapshot>,
    pub report: PropagationReport,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationState {
    pub zone_probability: f64,
    pub incoming_current: f64,
    pub far_current: f64,
    pub separated: bool,
}

fn separation(
    psi: &WaveFunction,
    params: &PhysicalParams,
    center: f64,
    gap: f64,
    from_left: bool,
) -> Result<SeparationState> {
    let grid = psi.grid();
    let lo = (center - gap).max(grid.x_min());
    let hi = (center + gap).min(grid.x_max());
    let zone_probability = psi.region_probability(lo, hi)?;
    let left = psi.integrated_current(params, grid.x_min(), center);
    let right = psi.integrated_current(params, center, grid.x_max());
    let (incoming_current, far_current) = if from_left { (left, right) } else { (right, left) };
    let p_left = psi.region_probability(grid.x_min(), center)?;
    let p_right = psi.region_probability(center, grid.x_max())?;
    let (p_in, p_far) = if from_left {
        (p_left, p_right)
    } else {
        (p_right, p_left)
    };
    let sign = if from_left { 1.0 } else { -1.0 };
    // A side that holds (almost) nothing has no direction to check.
    let empty = |p: f64| p < SEPARATION_ZONE_PROBABILITY;
    let separated = zone_probability < SEPARATION_ZONE_PROBABILITY
        && (sign * incoming_current < 0.0 || empty(p_in))
        && (sign * far_current > 0.0 || empty(p_far));
    Ok(SeparationState {
        zone_probability,
        incoming_current,
        far_current,
        separated,
    })
}

impl ScatteringRun {
    pub fn run(&self) -> Result<ScatteringOutcome> {
        run_scattering(self)
    }
}

/// Propagate a packet against a step and read off R and T as the
/// probability on either side once the packets have separated.
pub fn run_scattering(run: &ScatteringRun) -> Result<ScatteringOutcome> {
    let center = run
        .potential
        .step_center()
        .ok_or_else(|| Error::UnsupportedPotential(format!("no step in {:?}", run.potential)))?;
    let spec = &run.initial;
    let five_sigma = 5.0 * spec.sigma;
    let (wall_lo, wall_hi) = match &run.potential {
        Potential::HardBox { lo, hi, .. } => (lo.max(run.grid.x_min()), hi.min(run.grid.x_max())),
        _ => (run.grid.x_min(), run.grid.x_max()),
    };
    if spec.mu - wall_lo < five_sigma || wall_hi - spec.mu < five_sigma || (spec.mu - center).abs() < five_sigma {
        return Err(Error::InvalidParameter(format!(
            "packet at {} must be 5 sigma from the walls [{wall_lo}, {wall_hi}] and the step at {center}",
            spec.mu
        )));
    }
    let from_left = spec.mu < center;
    if (spec.k0 > 0.0) != from_left {
        return Err(Error::InvalidParameter("packet must move towards the step".into()));
    }

    let psi0 = build_gaussian(spec, &run.grid)?;
    let params = run.config.params;
    let mut evo = Evolution::new(psi0.clone(), &run.potential, &run.config)?;
    let dt = run.config.dt;

    let mut snap_steps: Vec<(usize, f64)> = run
        .snapshot_times
        .iter()
        .map(|&t| ((t / dt).round() as usize, t))
        .collect();
    snap_steps.sort_by_key(|s| s.0);
    let mut snapshots = Vec::new();
    let mut next_snap = 0;
    let mut take_snaps = |evo: &Evolution, snapshots: &mut Vec<Snapshot>| {
        while next_snap < snap_steps.len() && snap_steps[next_snap].0 <= evo.steps() {
            snapshots.push(Snapshot {
                time: snap_steps[next_snap].1,
                psi: evo.psi().clone(),
            });
            next_snap += 1;
        }
    };
    take_snaps(&evo, &mut snapshots);

    let (gap, end_time, stop_on_separation) = match run.stop_rule {
        StopRule::FixedTime(t) => (3.0 * run.potential.step_width().unwrap_or(0.0), t, false),
        StopRule::PacketsSeparated { gap, max_time } => (gap, max_time, true),
    };
    let gap = if gap > 0.0 { gap } else { 3.0 * spec.sigma };
    let end_step = (end_time / dt).round() as usize;
    let check_every = ((spec.sigma / spec.k0.abs().max(1e-300) * params.mass / params.hbar) / dt / 4.0)
        .floor()
        .max(1.0) as usize;

    let mut measured: Option<(f64, WaveFunction)> = None;
    while measured.is_none() {
        evo.step();
        take_snaps(&evo, &mut snapshots);
        let at_end = evo.steps() >= end_step;
        if !(at_end || (stop_on_separation && evo.steps() % check_every == 0)) {
            continue;
        }
        let state = separation(evo.psi(), &params, center, gap, from_left)?;
        if state.separated && (stop_on_separation || at_end) {
            measured = Some((evo.time(), evo.psi().clone()));
        } else if at_end {
            return Err(Error::PacketsNotSeparated {
                time: evo.time(),
                zone_probability: state.zone_probability,
            });
        }
    }
    let (stop_time, psi_stop) = measured.expect("loop exits with a measurement");
    if let Some(&(last, _)) = snap_steps.last() {
        if last > evo.steps() {
            let remaining = last - evo.steps();
            for _ in 0..remaining {
                evo.step();
                take_snaps(&evo, &mut snapshots);
            }
        }
    }

    let grid = psi_stop.grid();
    let left = psi_stop.region_probability(grid.x_min(), center)?;
    let right = psi_stop.region_probability(center, grid.x_max())?;
    let (r, t) = if from_left { (left, right) } else { (right, left) };
    Ok(ScatteringOutcome {
        coefficients: ScatteringCoefficients {
            r,
            t,
            provenance: Provenance::Propagation,
        },
        stop_time,
        snapshots,
        report: *evo.report(),
    })
}

/// Time series recorded while a state leaks off the plateau.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecayTimeSeries {
    pub times: Vec<f64>,
    pub plateau_prob: Vec<f64>,
    pub region_discrepancy: Option<Vec<f64>>,
}

/// Rows `(x, Re ψ, Im ψ, |ψ|², V(x)·scale)` for export. Infinite
/// potential values are written as NaN.
pub fn snapshot_rows(psi: &WaveFunction, potential: &Potential, scale: f64) -> Vec<[f64; 5]> {
    psi.grid()
        .points()
        .zip(psi.amplitudes())
        .map(|(x, c)| {
            let v = potential.eval(x);
            let v = if v.is_finite() { v * scale } else { f64::NAN };
            [x, c.re, c.im, c.norm_sqr(), v]
        })
        .collect()
}

/// Setup for the coarse-mesh demonstration: a packet sent into the
/// inverted parabola `-curvature_factor·k0²·(x - center)²` inside a box.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshPathologyConfig {
    pub packet: GaussianPacketSpec,
    pub curvature_factor: f64,
    pub center: f64,
    pub box_lo: f64,
    pub box_hi: f64,
    pub dt: f64,
    pub t_max: f64,
    /// Record ⟨x⟩ every this many steps.
    pub sample_every: usize,
    pub params: PhysicalParams,
}

impl Default for MeshPathologyConfig {
    fn default() -> Self {
        Self {
            packet: GaussianPacketSpec {
                mu: 0.1,
                sigma: 0.01,
                k0: 200.0 * std::f64::consts::PI,
            },
            curvature_factor: 50.0,
            center: 0.3,
            box_lo: 0.0,
            box_hi: 1.0,
            dt: 1e-7,
            t_max: 3e-4,
            sample_every: 5,
            params: PhysicalParams::default(),
        }
    }
}

impl MeshPathologyConfig {
    pub fn potential(&self) -> Potential {
        Potential::Parabola {
            curvature: self.curvature_factor * self.packet.k0 * self.packet.k0,
            center: self.center,
        }
        .hard_box(self.box_lo, self.box_hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshRun {
    pub n_points: usize,
    pub times: Vec<f64>,
    pub mean_x: Vec<f64>,
    /// Time of the first maximum of ⟨x⟩, refined by a parabola through the
    /// neighbouring samples.
    pub turnaround: Option<f64>,
    pub wall_contact: Option<f64>,
}

/// First local maximum of a sampled series, with parabolic refinement.
pub fn first_maximum(times: &[f64], values: &[f64]) -> Option<f64> {
    (1..values.len().saturating_sub(1))
        .find(|&i| values[i] >= values[i - 1] && values[i] > values[i + 1])
        .map(|i| {
            let (y0, y1, y2) = (values[i - 1], values[i], values[i + 1]);
            let h = times[i + 1] - times[i];
            let denom = y0 - 2.0 * y1 + y2;
            if denom == 0.0 {
                times[i]
            } else {
                times[i] + 0.5 * h * (y0 - y2) / denom
            }
        })
}

/// Track ⟨x⟩(t) on meshes of `n_points` nodes. The packet is sampled
/// without the resolution check: coarse meshes are the point here.
pub fn mesh_run(n_points: usize, potential: &Potential, cfg: &MeshPathologyConfig) -> Result<MeshRun> {
    let grid = Grid::new(cfg.box_lo, cfg.box_hi, n_points)?;
    let spec = cfg.packet;
    let psi = WaveFunction::from_fn(grid, |x| spec.amplitude(x)).normalized()?;
    let pcfg = PropagatorConfig::new(cfg.dt, cfg.params)?;
    let mut evo = Evolution::new(psi, potential, &pcfg)?;
    let steps = (cfg.t_max / cfg.dt).round() as usize;
    let every = cfg.sample_every.max(1);
    let mut times = vec![0.0];
    let mut mean_x = vec![evo.psi().mean_position()];
    while evo.steps() < steps {
        evo.advance(every.min(steps - evo.steps()));
        times.push(evo.time());
        mean_x.push(evo.psi().mean_position());
    }
    Ok(MeshRun {
        n_points,
        turnaround: first_maximum(&times, &mean_x),
        times,
        mean_x,
        wall_contact: evo.report().wall_contact,
    })
}

pub fn mesh_pathology_demo(n_values: &[usize], cfg: &MeshPathologyConfig) -> Result<Vec<MeshRun>> {
    let v = cfg.potential();
    n_values.iter().map(|&n| mesh_run(n, &v, cfg)).collect()
}

/// The same packet with no potential inside the box.
pub fn free_reference(n_points: usize, cfg: &MeshPathologyConfig) -> Result<MeshRun> {
    mesh_run(n_points, &Potential::Free.hard_box(cfg.box_lo, cfg.box_hi), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const P: PhysicalParams = PhysicalParams { hbar: 1.0, mass: 1.0 };

    fn packet(grid: &Grid, mu: f64, sigma: f64, k0: f64) -> WaveFunction {
        build_gaussian(&GaussianPacketSpec::new(mu, sigma, k0).unwrap(), grid).unwrap()
    }

    #[test]
    fn steps_preserve_the_norm() {
        let grid = Grid::new(0.0, 1.0, 2001).unwrap();
        let psi = packet(&grid, 0.3, 0.03, 80.0);
        let v = Potential::soft_step(5e3, 0.02).hard_box(0.0, 1.0);
        let cfg = PropagatorConfig::new(2e-5, P).unwrap();
        let mut evo = Evolution::new(psi, &v, &cfg).unwrap();
        evo.advance(500);
        assert!(evo.report().max_step_drift < 1e-12);
        assert!(evo.report().norm_drift < 1e-10);
    }

    #[test]
    fn discrete_energy_is_conserved() {
        let grid = Grid::new(-1.0, 1.0, 1001).unwrap();
        let psi = packet(&grid, -0.4, 0.05, 30.0);
        let v = Potential::soft_step(200.0, 0.05);
        let cfg = PropagatorConfig::new(1e-4, P).unwrap();
        let h = Hamiltonian::new(&grid, &v, &P).unwrap();
        let e0 = h.energy(&psi);
        let (psi_t, _) = propagate(&psi, &v, &cfg, 0.02).unwrap();
        assert!(((h.energy(&psi_t) - e0) / e0).abs() < 1e-8);
    }

    #[test]
    fn free_packet_follows_ehrenfest_and_spreads() {
        let (mu, sigma, k0) = (-2.0, 0.2, 10.0);
        let grid = Grid::new(-6.0, 6.0, 24001).unwrap();
        let psi = packet(&grid, mu, sigma, k0);
        let cfg = PropagatorConfig::new(2e-4, P).unwrap();
        let t = 0.3;
        let (psi_t, report) = propagate(&psi, &Potential::Free, &cfg, t).unwrap();
        assert!(report.wall_contact.is_none());
        let expected_x = mu + k0 * t;
        assert!((psi_t.mean_position() - expected_x).abs() < 1e-3 * expected_x.abs());
        let width2 = sigma * sigma * (1.0 + (t / (2.0 * sigma * sigma)).powi(2));
        assert!((psi_t.position_variance() / width2 - 1.0).abs() < 5e-3);
    }

    #[test]
    fn banded_step_solves_the_linear_system() {
        let grid = Grid::new(-3.0, 3.0, 601).unwrap();
        let v = Potential::SoftStep {
            center: 0.5,
            width: 0.3,
            depth: 40.0,
        };
        for stencil in [Stencil::ThreePoint, Stencil::FivePoint, Stencil::SevenPoint] {
            let cfg = PropagatorConfig::new(1e-3, P).unwrap().with_stencil(stencil);
            let mut cn = CrankNicolson::new(&grid, &v, &cfg).unwrap();
            let psi0 = packet(&grid, -1.0, 0.3, 4.0);
            let mut psi = psi0.amplitudes().to_vec();
            cn.step(&mut psi);
            let tau = Complex64::new(0.0, cfg.dt / 2.0);
            let lhs = cn.hamiltonian().apply(&psi);
            let rhs = cn.hamiltonian().apply(psi0.amplitudes());
            let worst = (1..grid.len() - 1)
                .map(|i| ((psi[i] + tau * lhs[i]) - (psi0.amplitudes()[i] - tau * rhs[i])).norm())
                .fold(0.0, f64::max);
            assert!(worst < 1e-12, "{stencil:?}: {worst}");
        }
    }

    #[test]
    fn wider_stencils_cut_the_dispersion_error() {
        let (mu, sigma, k0, t) = (-3.0, 0.5, 10.0, 0.4);
        let grid = Grid::new(-8.0, 8.0, 321).unwrap();
        let exact = |x: f64| {
            let s = Complex64::new(sigma * sigma, t / 2.0);
            let norm = (2.0 * PI * sigma * sigma).powf(-0.25);
            let phase = Complex64::new(0.0, k0 * (x - k0 * t / 2.0)).exp();
            norm * (sigma * sigma / s).sqrt() * phase * (-(x - mu - k0 * t).powi(2) / (4.0 * s)).exp()
        };
        let psi = packet(&grid, mu, sigma, k0);
        let error = |stencil| {
            let cfg = PropagatorConfig::new(5e-4, P).unwrap().with_stencil(stencil);
            let (psi_t, _) = propagate(&psi, &Potential::Free, &cfg, t).unwrap();
            let diff = WaveFunction::from_fn(grid, exact);
            let d: Vec<f64> = psi_t
                .amplitudes()
                .iter()
                .zip(diff.amplitudes())
                .map(|(a, b)| (a - b).norm_sqr())
                .collect();
            grid.trapezoid(&d).sqrt()
        };
        let e2 = error(Stencil::ThreePoint);
        let e4 = error(Stencil::FivePoint);
        let e6 = error(Stencil::SevenPoint);
        assert!(e2 > 0.3, "{e2}");
        assert!(e4 < e2 / 5.0 && e6 < e4 / 3.0, "{e2} {e4} {e6}");
        assert!(e6 < 0.02, "{e6}");
    }

    #[test]
    fn stencil_orders_round_trip() {
        for order in [2, 4, 6] {
            assert_eq!(Stencil::from_order(order).unwrap().order(), order);
        }
        assert!(Stencil::from_order(3).is_err());
        // Each stencil annihilates constants.
        for s in [Stencil::ThreePoint, Stencil::FivePoint, Stencil::SevenPoint] {
            let w = s.weights();
            let sum = w[0] + 2.0 * w[1..].iter().sum::<f64>();
            assert!(sum.abs() < 1e-14);
        }
    }

    #[test]
    fn time_step_error_is_second_order() {
        let grid = Grid::new(0.0, 1.0, 1001).unwrap();
        let psi = packet(&grid, 0.3, 0.04, 60.0);
        let v = Potential::soft_step(4e3, 0.03).hard_box(0.0, 1.0);
        let t = 4e-3;
        let run = |dt: f64| {
            propagate(&psi, &v, &PropagatorConfig::new(dt, P).unwrap(), t)
                .unwrap()
                .0
        };
        let reference = run(1e-5 / 8.0);
        let err = |dt: f64| {
            let d = run(dt);
            d.amplitudes()
                .iter()
                .zip(reference.amplitudes())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
        };
        let order = (err(2e-5) / err(1e-5)).log2();
        assert!((order - 2.0).abs() < 0.3, "order {order}");
    }

    #[test]
    fn oversized_steps_are_rejected() {
        let grid = Grid::new(0.0, 1.0, 1001).unwrap();
        let psi = packet(&grid, 0.3, 0.04, 200.0);
        let cfg = PropagatorConfig::new(1e-3, P).unwrap();
        assert!(matches!(
            propagate(&psi, &Potential::Free, &cfg, 1e-2),
            Err(Error::UnstableStep { .. })
        ));
    }

    #[test]
    fn infinite_potential_nodes_stay_empty() {
        let grid = Grid::new(-1.0, 1.0, 801).unwrap();
        let psi = packet(&grid, 0.0, 0.05, 40.0);
        let v = Potential::Free.hard_box(-0.5, 0.5);
        let cfg = PropagatorConfig::new(1e-4, P).unwrap();
        let (psi_t, report) = propagate(&psi, &v, &cfg, 0.05).unwrap();
        assert!(report.wall_contact.is_some());
        assert!(psi_t.region_probability(0.51, 1.0).unwrap() == 0.0);
        assert!((psi_t.norm_sqr() - psi.norm_sqr()).abs() < 1e-10);
    }

    fn run_for(depth_ratio: f64, width: f64, mirrored: bool) -> ScatteringOutcome {
        let k0 = 200.0 * PI;
        let e = P.energy(k0);
        let mut v = Potential::SoftStep {
            depth: depth_ratio * e,
            width,
            center: 0.35,
        };
        let (mu, k) = if mirrored {
            v = v.mirrored(0.5);
            (0.85, -k0)
        } else {
            (0.15, k0)
        };
        ScatteringRun {
            initial: GaussianPacketSpec::new(mu, 0.01, k).unwrap(),
            potential: v.hard_box(0.0, 1.0),
            grid: Grid::new(0.0, 1.0, 16001).unwrap(),
            config: PropagatorConfig::new(2e-7, P).unwrap(),
            stop_rule: StopRule::PacketsSeparated {
                gap: 3.0 * width.max(0.01),
                max_time: 2e-3,
            },
            snapshot_times: vec![0.0, 1e-4],
        }
        .run()
        .unwrap()
    }

    #[test]
    fn no_step_means_full_transmission() {
        let out = run_for(0.0, 0.01, false);
        assert!((out.coefficients.t - 1.0).abs() < 1e-6);
        assert_eq!(out.snapshots.len(), 2);
    }

    #[test]
    fn scattering_is_mirror_symmetric_and_matches_momentum_average() {
        let direct = run_for(18.4, 0.002, false);
        let mirrored = run_for(18.4, 0.002, true);
        let c = direct.coefficients;
        assert!((c.r + c.t - 1.0).abs() < 1e-6);
        assert!((c.r - mirrored.coefficients.r).abs() < 1e-3);

        let grid = Grid::new(0.0, 1.0, 16001).unwrap();
        let psi = packet(&grid, 0.15, 0.01, 200.0 * PI);
        let v = Potential::soft_step(18.4 * P.energy(200.0 * PI), 0.002);
        let spectral = crate::spectral::packet_reflection(&psi, &v, &P).unwrap();
        assert!((c.r - spectral.r).abs() < 5e-3, "{} vs {}", c.r, spectral.r);
    }

    #[test]
    fn fixed_time_before_separation_is_an_error() {
        let k0 = 100.0 * PI;
        let run = ScatteringRun {
            initial: GaussianPacketSpec::new(0.2, 0.02, k0).unwrap(),
            potential: Potential::SoftStep {
                depth: 18.4 * P.energy(k0),
                width: 0.01,
                center: 0.4,
            }
            .hard_box(0.0, 1.0),
            grid: Grid::new(0.0, 1.0, 2001).unwrap(),
            config: PropagatorConfig::new(1e-6, P).unwrap(),
            stop_rule: StopRule::FixedTime(1e-4),
            snapshot_times: vec![],
        };
        assert!(matches!(run.run(), Err(Error::PacketsNotSeparated { .. })));
    }

    #[test]
    fn first_maximum_refines_a_parabola() {
        let t: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|t| -(t - 0.73f64).powi(2)).collect();
        assert!((first_maximum(&t, &y).unwrap() - 0.73).abs() < 1e-12);
        assert_eq!(first_maximum(&t, &t), None);
    }
}
