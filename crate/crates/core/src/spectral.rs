//! Momentum decomposition of packets and packet-level reflection as an
//! average of the stationary R(k) over the momentum density.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::stationary::{step_reflection_k, Provenance, ScatteringCoefficients};
use crate::units::PhysicalParams;
use crate::wavefunction::WaveFunction;

/// Default tolerance for the probability carried by k < 0 in a packet
/// that is supposed to move right.
pub const LEFT_MASS_TOLERANCE: f64 = 1e-6;

/// |ψ̂(k)|² on the FFT grid, sorted by k and normalized to unit integral.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumDensity {
    pub k: Vec<f64>,
    pub density: Vec<f64>,
    pub dk: f64,
}

/// ψ̂(k) = dx/√(2π) Σ ψ_j e^{-ik x_j} on the grid k = 2π·fftfreq/dx,
/// returned in FFT order.
pub fn fourier_transform(psi: &WaveFunction) -> (Vec<f64>, Vec<Complex64>) {
    let grid = psi.grid();
    let n = grid.len();
    let dx = grid.dx();
    let mut buf = psi.amplitudes().to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = dx / (2.0 * PI).sqrt();
    let k: Vec<f64> = (0..n)
        .map(|j| {
            let f = if j < n.div_ceil(2) {
                j as f64
            } else {
                j as f64 - n as f64
            };
            2.0 * PI * f / (n as f64 * dx)
        })
        .collect();
    let x0 = grid.x_min();
    let hat = buf
        .into_iter()
        .zip(&k)
        .map(|(c, &k)| c * scale * Complex64::from_polar(1.0, -k * x0))
        .collect();
    (k, hat)
}

pub fn momentum_density(psi: &WaveFunction) -> MomentumDensity {
    let (k, hat) = fourier_transform(psi);
    let n = k.len();
    let dk = 2.0 * PI / (n as f64 * psi.grid().dx());
    let mut pairs: Vec<(f64, f64)> = k.into_iter().zip(hat.iter().map(|c| c.norm_sqr())).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum::<f64>() * dk;
    MomentumDensity {
        k: pairs.iter().map(|p| p.0).collect(),
        density: pairs.iter().map(|p| p.1 / total).collect(),
        dk,
    }
}

impl MomentumDensity {
    pub fn total(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.dk
    }

    /// Probability carried by k < 0.
    pub fn left_mass(&self) -> f64 {
        self.k
            .iter()
            .zip(&self.density)
            .filter(|(k, _)| **k < 0.0)
            .map(|(_, d)| d)
            .sum::<f64>()
            * self.dk
    }

    pub fn mean(&self) -> f64 {
        self.k.iter().zip(&self.density).map(|(k, d)| k * d).sum::<f64>() * self.dk
    }

    pub fn std_dev(&self) -> f64 {
        let m = self.mean();
        let var: f64 = self
            .k
            .iter()
            .zip(&self.density)
            .map(|(k, d)| (k - m).powi(2) * d)
            .sum::<f64>()
            * self.dk;
        var.sqrt()
    }

    /// Trapezoid weights on the k > 0 nodes, rescaled to sum to one.
    fn right_weights(&self) -> Vec<(f64, f64)> {
        let pos: Vec<(f64, f64)> = self
            .k
            .iter()
            .zip(&self.density)
            .filter(|(k, _)| **k > 0.0)
            .map(|(&k, &d)| (k, d))
            .collect();
        let last = pos.len().saturating_sub(1);
        let raw: Vec<(f64, f64)> = pos
            .iter()
            .enumerate()
            .map(|(i, &(k, d))| {
                let w = if i == 0 || i == last { 0.5 } else { 1.0 };
                (k, w * d * self.dk)
            })
            .collect();
        let total: f64 = raw.iter().map(|p| p.1).sum();
        raw.into_iter().map(|(k, w)| (k, w / total)).collect()
    }
}

fn check_right_moving(density: &MomentumDensity, tolerance: f64) -> Result<()> {
    let mass = density.left_mass();
    if mass > tolerance {
        return Err(Error::LeftMovingPacket { mass });
    }
    Ok(())
}

/// R = ∫_{k>0} R(k)|ψ̂(k)|² dk and T likewise with T(k) = 1 - R(k).
pub fn packet_reflection(
    psi_in: &WaveFunction,
    step: &Potential,
    params: &PhysicalParams,
) -> Result<ScatteringCoefficients> {
    density_reflection(&momentum_density(psi_in), step, params, LEFT_MASS_TOLERANCE)
}

pub fn density_reflection(
    density: &MomentumDensity,
    step: &Potential,
    params: &PhysicalParams,
    left_tolerance: f64,
) -> Result<ScatteringCoefficients> {
    step_reflection_k(step, 1.0, params)?;
    check_right_moving(density, left_tolerance)?;
    let (mut r, mut t) = (0.0, 0.0);
    for (k, w) in density.right_weights() {
        let rk = step_reflection_k(step, k, params)?;
        r += w * rk;
        t += w * (1.0 - rk);
    }
    Ok(ScatteringCoefficients {
        r,
        t,
        provenance: Provenance::SpectralIntegral,
    })
}

/// `(k, density, R(k))` rows over k > 0, for export.
pub fn reflection_profile(
    density: &MomentumDensity,
    step: &Potential,
    params: &PhysicalParams,
) -> Result<Vec<(f64, f64, f64)>> {
    density
        .k
        .iter()
        .zip(&density.density)
        .filter(|(k, _)| **k > 0.0)
        .map(|(&k, &d)| Ok((k, d, step_reflection_k(step, k, params)?)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsDeltaBound {
    pub eps: f64,
    /// Momentum mass on which R(k) ≤ 1 - ε.
    pub delta: f64,
    /// 1 - ε - δ.
    pub bound: f64,
    /// The bound says nothing (it is not positive).
    pub vacuous: bool,
}

/// If R(k) > 1 - ε on all but a mass δ of the momentum density, the packet
/// reflects with probability at least 1 - ε - δ.
pub fn epsilon_delta_bound(
    density: &MomentumDensity,
    step: &Potential,
    eps: f64,
    params: &PhysicalParams,
) -> Result<EpsDeltaBound> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("need 0 < eps < 1, got {eps}")));
    }
    let mut good = 0.0;
    for (k, w) in density.right_weights() {
        if step_reflection_k(step, k, params)? > 1.0 - eps {
            good += w;
        }
    }
    let delta = (1.0 - good).max(0.0);
    let bound = 1.0 - eps - delta;
    Ok(EpsDeltaBound {
        eps,
        delta,
        bound,
        vacuous: bound <= 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::packet::{build_gaussian, GaussianPacketSpec};
    use crate::stationary::rect_step_r;
    use proptest::prelude::*;

    const P: PhysicalParams = PhysicalParams { hbar: 1.0, mass: 1.0 };

    fn fig3_packet(n: usize) -> WaveFunction {
        let grid = Grid::new(0.0, 1.0, n).unwrap();
        build_gaussian(&GaussianPacketSpec::new(0.1, 0.01, 200.0 * PI).unwrap(), &grid).unwrap()
    }

    #[test]
    fn parseval_for_the_plain_sum() {
        let psi = fig3_packet(2001);
        let (_, hat) = fourier_transform(&psi);
        let n = hat.len();
        let dk = 2.0 * PI / (n as f64 * psi.grid().dx());
        let lhs: f64 = hat.iter().map(|c| c.norm_sqr()).sum::<f64>() * dk;
        let rhs: f64 = psi.amplitudes().iter().map(|c| c.norm_sqr()).sum::<f64>() * psi.grid().dx();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn gaussian_density_moments() {
        let psi = fig3_packet(4001);
        let d = momentum_density(&psi);
        assert!((d.total() - 1.0).abs() < 1e-8);
        assert!((d.mean() / (200.0 * PI) - 1.0).abs() < 1e-3);
        assert!((d.std_dev() / 50.0 - 1.0).abs() < 1e-2);
        assert!(d.left_mass() < 1e-6);
    }

    #[test]
    fn transform_matches_analytic_gaussian() {
        // ψ̂(k) = (2σ²/π)^{1/4} e^{-σ²(k-k0)²} e^{-i(k-k0)μ}
        let (mu, sigma, k0) = (0.3, 0.5, 4.0);
        let grid = Grid::new(-12.0, 12.0, 4097).unwrap();
        let psi = WaveFunction::from_fn(grid, |x| GaussianPacketSpec { mu, sigma, k0 }.amplitude(x));
        let (k, hat) = fourier_transform(&psi);
        for (k, h) in k.iter().zip(&hat) {
            let exact = (2.0 * sigma * sigma / PI).powf(0.25)
                * (-(sigma * (k - k0)).powi(2)).exp()
                * Complex64::from_polar(1.0, -(k - k0) * mu);
            assert!((h - exact).norm() < 1e-10, "k = {k}");
        }
    }

    #[test]
    fn symmetric_packet_has_symmetric_density() {
        let grid = Grid::new(-10.0, 10.0, 1001).unwrap();
        let psi = build_gaussian(&GaussianPacketSpec::new(0.0, 1.0, 0.0).unwrap(), &grid).unwrap();
        let d = momentum_density(&psi);
        let n = d.k.len();
        // Odd n: the grid is symmetric about k = 0.
        for i in 0..n / 2 {
            assert!((d.k[i] + d.k[n - 1 - i]).abs() < 1e-9);
            assert!((d.density[i] - d.density[n - 1 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_depth_reflects_nothing() {
        let psi = fig3_packet(2001);
        let c = packet_reflection(&psi, &Potential::soft_step(0.0, 0.01), &P).unwrap();
        assert_eq!(c.r, 0.0);
        assert!((c.t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sharp_momentum_recovers_stationary_value() {
        let (k1, sigma) = (1.0, 1e4);
        let grid = Grid::new(-8.0 * sigma, 8.0 * sigma, 320_001).unwrap();
        let psi = build_gaussian(&GaussianPacketSpec::new(0.0, sigma, k1).unwrap(), &grid).unwrap();
        let de = 18.4 * P.energy(k1);
        let c = packet_reflection(&psi, &Potential::rect_step(de), &P).unwrap();
        let exact = rect_step_r(P.energy(k1), de, &P).unwrap().r;
        assert!((c.r - exact).abs() < 1e-4);
        assert!((c.r + c.t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fig3_packet_reflects_like_the_sharp_step() {
        let psi = fig3_packet(4001);
        let k1 = 200.0 * PI;
        let de = 18.4 * P.energy(k1);
        let c = packet_reflection(&psi, &Potential::rect_step(de), &P).unwrap();
        assert!((c.r - 0.396_825_6).abs() < 0.02);
    }

    #[test]
    fn left_moving_packets_are_rejected() {
        let grid = Grid::new(0.0, 1.0, 2001).unwrap();
        let psi = build_gaussian(&GaussianPacketSpec::new(0.5, 0.05, -50.0).unwrap(), &grid).unwrap();
        assert!(matches!(
            packet_reflection(&psi, &Potential::rect_step(1.0), &P),
            Err(Error::LeftMovingPacket { .. })
        ));
        assert!(matches!(
            packet_reflection(&fig3_packet(2001), &Potential::plateau(1.0, 1.0), &P),
            Err(Error::UnsupportedPotential(_))
        ));
    }

    #[test]
    fn eps_delta_extremes() {
        let psi = fig3_packet(2001);
        let d = momentum_density(&psi);
        // Every k sees R(k) = 1 on an infinitely deep step only in the limit;
        // a huge depth gets R(k) > 1 - ε everywhere the packet lives.
        let deep = Potential::rect_step(1e14);
        let b = epsilon_delta_bound(&d, &deep, 0.01, &P).unwrap();
        assert!(b.delta < 1e-12 && (b.bound - 0.99).abs() < 1e-12 && !b.vacuous);
        let flat = Potential::rect_step(0.0);
        let b = epsilon_delta_bound(&d, &flat, 0.01, &P).unwrap();
        assert!((b.delta - 1.0).abs() < 1e-12 && b.vacuous);
        assert!((b.bound + 0.01).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn bound_never_exceeds_reflection(
            k0 in 100.0f64..400.0,
            depth_ratio in 0.1f64..1e4,
            width in 0.0f64..0.02,
            eps in 0.001f64..0.5,
        ) {
            let grid = Grid::new(0.0, 1.0, 4001).unwrap();
            let psi = build_gaussian(&GaussianPacketSpec::new(0.3, 0.03, k0).unwrap(), &grid).unwrap();
            let d = momentum_density(&psi);
            let de = depth_ratio * P.energy(k0);
            let step = if width == 0.0 { Potential::rect_step(de) } else { Potential::soft_step(de, width) };
            let r = density_reflection(&d, &step, &P, LEFT_MASS_TOLERANCE).unwrap();
            let b = epsilon_delta_bound(&d, &step, eps, &P).unwrap();
            prop_assert!(b.bound <= r.r + 1e-8);
            prop_assert!((r.r + r.t - 1.0).abs() < 1e-10);
        }
    }
}
