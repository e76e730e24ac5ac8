//! Stationary scattering at downward steps: closed forms, the
//! dimensionless surface R(u, v) and a transfer-matrix solver for
//! arbitrary profiles.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::units::PhysicalParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedFormRect,
    ClosedFormSoft,
    TransferMatrix,
    SpectralIntegral,
    Propagation,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::ClosedFormRect => "closed-form-rect",
            Provenance::ClosedFormSoft => "closed-form-soft",
            Provenance::TransferMatrix => "transfer-matrix",
            Provenance::SpectralIntegral => "spectral-integral",
            Provenance::Propagation => "propagation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringCoefficients {
    pub r: f64,
    pub t: f64,
    pub provenance: Provenance,
}

impl ScatteringCoefficients {
    fn closed(r: f64, provenance: Provenance) -> Self {
        Self {
            r,
            t: 1.0 - r,
            provenance,
        }
    }
}

/// Wave numbers on the incoming (upper) and lower side of the step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveNumbers {
    pub k1: f64,
    pub k2: f64,
}

impl WaveNumbers {
    pub fn new(energy: f64, depth: f64, params: &PhysicalParams) -> Result<Self> {
        check_energy(energy, depth)?;
        Ok(Self {
            k1: params.wavenumber(energy),
            k2: params.wavenumber(energy + depth),
        })
    }

    /// Lower-side wave number for incoming `k1`.
    pub fn from_k1(k1: f64, depth: f64, params: &PhysicalParams) -> Self {
        let k2 = (k1 * k1 + 2.0 * params.mass * depth / (params.hbar * params.hbar)).sqrt();
        Self { k1, k2 }
    }

    pub fn matching(&self) -> MatchCoefficients {
        let s = self.k1 + self.k2;
        MatchCoefficients {
            a: Complex64::new(2.0 * self.k1 / s, 0.0),
            b: Complex64::new((self.k1 - self.k2) / s, 0.0),
        }
    }
}

/// Transmitted (`a`) and reflected (`b`) amplitudes for unit incidence on
/// the rectangular step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchCoefficients {
    pub a: Complex64,
    pub b: Complex64,
}

fn check_energy(energy: f64, depth: f64) -> Result<()> {
    if !(energy > 0.0) || !energy.is_finite() {
        return Err(Error::NonpositiveEnergy(energy));
    }
    if !(depth >= 0.0) || !depth.is_finite() {
        return Err(Error::InvalidParameter(format!("step depth must be >= 0, got {depth}")));
    }
    Ok(())
}

/// ((k2 - k1)/(k1 + k2))².
pub fn rect_reflection(k1: f64, k2: f64) -> f64 {
    ((k2 - k1) / (k1 + k2)).powi(2)
}

/// sinh(p)/sinh(q) for 0 ≤ p ≤ q, q > 0.
pub fn sinh_ratio(p: f64, q: f64) -> f64 {
    if q < 30.0 {
        p.sinh() / q.sinh()
    } else {
        (p - q).exp() * (-2.0 * p).exp_m1() / (-2.0 * q).exp_m1()
    }
}

/// (sinh(π/2 (k2-k1) L) / sinh(π/2 (k2+k1) L))².
pub fn soft_reflection(k1: f64, k2: f64, width: f64) -> f64 {
    let p = FRAC_PI_2 * (k2 - k1) * width;
    let q = FRAC_PI_2 * (k2 + k1) * width;
    sinh_ratio(p, q).powi(2)
}

pub fn rect_step_r(energy: f64, depth: f64, params: &PhysicalParams) -> Result<ScatteringCoefficients> {
    let k = WaveNumbers::new(energy, depth, params)?;
    Ok(ScatteringCoefficients::closed(
        rect_reflection(k.k1, k.k2),
        Provenance::ClosedFormRect,
    ))
}

pub fn soft_step_r(energy: f64, depth: f64, width: f64, params: &PhysicalParams) -> Result<ScatteringCoefficients> {
    let k = WaveNumbers::new(energy, depth, params)?;
    if !(width > 0.0) {
        return Err(Error::NonpositiveWidth(width));
    }
    Ok(ScatteringCoefficients::closed(
        soft_reflection(k.k1, k.k2, width),
        Provenance::ClosedFormSoft,
    ))
}

/// Reflection of a step of the given shape for incoming wave number `k1`.
/// Only rectangular and soft steps have closed forms.
pub fn step_reflection_k(step: &Potential, k1: f64, params: &PhysicalParams) -> Result<f64> {
    let (depth, width) = match step.step() {
        Some(Potential::RectStep { depth, .. }) => (*depth, 0.0),
        Some(Potential::SoftStep { depth, width, .. }) => (*depth, *width),
        _ => {
            return Err(Error::UnsupportedPotential(format!(
                "expected a rectangular or soft step, got {step:?}"
            )))
        }
    };
    let k = WaveNumbers::from_k1(k1, depth, params);
    Ok(if width == 0.0 {
        rect_reflection(k.k1, k.k2)
    } else {
        soft_reflection(k.k1, k.k2, width)
    })
}

/// The step in units where only u = (π/2)k1·L and v = (π/2)√(2mΔE)·L/ħ
/// matter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessStep {
    pub u: f64,
    pub v: f64,
}

impl DimensionlessStep {
    pub fn new(u: f64, v: f64) -> Result<Self> {
        if !(u >= 0.0 && v >= 0.0) {
            return Err(Error::InvalidParameter(format!("need u, v >= 0, got ({u}, {v})")));
        }
        if u == 0.0 && v == 0.0 {
            return Err(Error::DegenerateInput);
        }
        Ok(Self { u, v })
    }

    pub fn from_physical(energy: f64, depth: f64, width: f64, params: &PhysicalParams) -> Result<Self> {
        check_energy(energy, depth)?;
        if !(width > 0.0) {
            return Err(Error::NonpositiveWidth(width));
        }
        Self::new(
            FRAC_PI_2 * params.wavenumber(energy) * width,
            FRAC_PI_2 * params.wavenumber(depth) * width,
        )
    }

    pub fn reflection(&self) -> f64 {
        let s = self.u.hypot(self.v);
        sinh_ratio(s - self.u, s + self.u).powi(2)
    }

    /// First-order expansion 1 - 2u/tanh(v) of √R in u.
    pub fn taylor_sqrt_r(&self) -> f64 {
        1.0 - 2.0 * self.u / self.v.tanh()
    }
}

pub fn r_uv(u: f64, v: f64) -> Result<f64> {
    Ok(DimensionlessStep::new(u, v)?.reflection())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionThresholds {
    pub inverse_k1_l: f64,
    pub energy_ratio: f64,
    pub sigma_k1: f64,
}

impl Default for RegionThresholds {
    fn default() -> Self {
        Self {
            inverse_k1_l: 10.0,
            energy_ratio: 10.0,
            sigma_k1: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionMargins {
    /// 1/(k1·L)
    pub inverse_k1_l: f64,
    /// ΔE/E
    pub energy_ratio: f64,
    /// σ·k1
    pub sigma_k1: f64,
    pub in_region: bool,
}

/// Where reflection at a downward step is nearly certain: a sudden drop,
/// a deep drop, and a packet much wider than its wavelength.
pub fn paradoxical_region(
    k1: f64,
    width: f64,
    depth: f64,
    sigma: f64,
    params: &PhysicalParams,
    thresholds: &RegionThresholds,
) -> RegionMargins {
    let energy = params.energy(k1);
    let inverse_k1_l = 1.0 / (k1 * width);
    let energy_ratio = depth / energy;
    let sigma_k1 = sigma * k1;
    RegionMargins {
        inverse_k1_l,
        energy_ratio,
        sigma_k1,
        in_region: inverse_k1_l > thresholds.inverse_k1_l
            && energy_ratio > thresholds.energy_ratio
            && sigma_k1 > thresholds.sigma_k1,
    }
}

/// Principal complex wave number √(2m(E - V))/ħ, with i√|·| below the
/// potential.
fn local_wavenumber(total: f64, v: f64, params: &PhysicalParams) -> Complex64 {
    let q2 = 2.0 * params.mass * (total - v) / (params.hbar * params.hbar);
    if q2 >= 0.0 {
        Complex64::new(q2.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-q2).sqrt())
    }
}

type Mat2 = [[Complex64; 2]; 2];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// Map of (ψ, ψ') across a slab of width `d` with local wave number `q`.
fn slab(q: Complex64, d: f64) -> Mat2 {
    let qd = q * d;
    let (c, s) = (qd.cos(), qd.sin());
    let sinc = if qd.norm() < 1e-8 {
        Complex64::new(d, 0.0) * (1.0 - qd * qd / 6.0)
    } else {
        s / q
    };
    [[c, sinc], [-q * s, c]]
}

/// Reflection and transmission for a wave incident from the left with
/// kinetic energy `energy`, slicing `[x_lo, x_hi]` into `n_slices` slabs
/// of constant potential sampled at their midpoints. Outside the interval
/// the potential is taken to be its asymptotic value.
pub fn transfer_matrix_r(
    potential: &Potential,
    energy: f64,
    x_lo: f64,
    x_hi: f64,
    n_slices: usize,
    params: &PhysicalParams,
) -> Result<ScatteringCoefficients> {
    if n_slices < 1 {
        return Err(Error::SliceCountTooSmall(n_slices));
    }
    if !(x_lo < x_hi) {
        return Err(Error::InvalidParameter(format!(
            "need x_lo < x_hi, got [{x_lo}, {x_hi}]"
        )));
    }
    if !(energy > 0.0) {
        return Err(Error::NonpositiveEnergy(energy));
    }
    let (v_left, v_right) = potential
        .asymptotes()
        .ok_or_else(|| Error::UnsupportedPotential(format!("{potential:?} has no constant asymptotes")))?;
    let total = energy + v_left;
    if total - v_right <= 0.0 {
        return Err(Error::EvanescentAsymptote {
            side: "right",
            kinetic: total - v_right,
        });
    }
    let k_left = local_wavenumber(total, v_left, params);
    let k_right = local_wavenumber(total, v_right, params);

    let d = (x_hi - x_lo) / n_slices as f64;
    let mut m: Mat2 = [
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    ];
    for j in 0..n_slices {
        let xm = x_lo + (j as f64 + 0.5) * d;
        let q = local_wavenumber(total, potential.eval(xm), params);
        m = mat_mul(&slab(q, d), &m);
    }

    let i = Complex64::i();
    // Left: e^{ik(x-x_lo)} + r e^{-ik(x-x_lo)}; right: t e^{ik'(x-x_hi)}.
    let mu = [m[0][0] + m[0][1] * i * k_left, m[1][0] + m[1][1] * i * k_left];
    let mw = [m[0][0] - m[0][1] * i * k_left, m[1][0] - m[1][1] * i * k_left];
    let r = (i * k_right * mu[0] - mu[1]) / (mw[1] - i * k_right * mw[0]);
    let t = mu[0] + r * mw[0];
    Ok(ScatteringCoefficients {
        r: r.norm_sqr(),
        t: k_right.re / k_left.re * t.norm_sqr(),
        provenance: Provenance::TransferMatrix,
    })
}
