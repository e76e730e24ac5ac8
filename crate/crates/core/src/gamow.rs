//! Decay (Gamow) eigenvalues of the plateau potential: the fixed-point
//! equation for κ, mode enumeration, closed-form asymptotics, lifetimes
//! and the eigenfunctions themselves.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::potential::Potential;
use crate::units::PhysicalParams;
use crate::wavefunction::WaveFunction;

/// Smallest α for which the enumeration is guaranteed.
pub const VERIFIED_ALPHA: f64 = 10.0;

/// Census radius on |κ|, i.e. |Z| ≤ ΔE/4.
pub const CENSUS_RADIUS: f64 = 0.5;

/// Square root with Re √ζ > 0, and √ζ = i√|ζ| on the closed negative axis.
pub fn branch_sqrt(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        return if z.re > 0.0 {
            Complex64::new(z.re.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-z.re).sqrt())
        };
    }
    let r = z.norm();
    if z.re >= 0.0 {
        let t = (0.5 * (r + z.re)).sqrt();
        Complex64::new(t, z.im / (2.0 * t))
    } else {
        let t = (0.5 * (r - z.re)).sqrt();
        Complex64::new(z.im.abs() / (2.0 * t), t.copysign(z.im))
    }
}

/// Logarithm with imaginary part in (-π, π].
pub fn branch_ln(z: Complex64) -> Complex64 {
    let mut arg = z.im.atan2(z.re);
    if arg <= -PI {
        arg = PI;
    }
    Complex64::new(z.norm().ln(), arg)
}

/// Plateau of half-width `a` and depth `de` on both sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateauSpec {
    pub a: f64,
    pub de: f64,
    pub params: PhysicalParams,
}

impl PlateauSpec {
    pub fn new(a: f64, de: f64, params: PhysicalParams) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "plateau half-width must be > 0, got {a}"
            )));
        }
        if !(de > 0.0 && de.is_finite()) {
            return Err(Error::InvalidParameter(format!("plateau depth must be > 0, got {de}")));
        }
        Ok(Self { a, de, params })
    }

    /// The plateau whose width is `alpha` de Broglie wavelengths of the depth.
    pub fn from_alpha(alpha: f64, a: f64, params: PhysicalParams) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
        }
        let p = PI * alpha * params.hbar / a;
        Self::new(a, p * p / (2.0 * params.mass), params)
    }

    /// λ0 = 2πħ/√(2mΔE).
    pub fn lambda0(&self) -> f64 {
        2.0 * PI * self.params.hbar / (2.0 * self.params.mass * self.de).sqrt()
    }

    /// α = 2a/λ0.
    pub fn alpha(&self) -> f64 {
        2.0 * self.a / self.lambda0()
    }

    pub fn potential(&self) -> Potential {
        Potential::plateau(self.de, self.a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub max_iter: usize,
    pub tol: f64,
    pub radius: f64,
    /// Solve below α = 10 as well, flagging the result.
    pub allow_unverified: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iter: 200,
            tol: 1e-14,
            radius: FRAC_1_SQRT_2,
            allow_unverified: false,
        }
    }
}

impl SolverConfig {
    /// Bound K = 1/(πα√(1 - r²)) on |F'| in the disk of radius r.
    pub fn contraction_bound(&self, alpha: f64) -> f64 {
        1.0 / (PI * alpha * (1.0 - self.radius * self.radius).sqrt())
    }
}

/// F(κ) = n/2α - (i/πα)·ln(κ + √(1 + κ²)).
pub fn fixed_point_map(kappa: Complex64, n: i64, alpha: f64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let w = kappa + branch_sqrt(one + kappa * kappa);
    Complex64::new(n as f64 / (2.0 * alpha), 0.0) - Complex64::i() / (PI * alpha) * branch_ln(w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KappaSolution {
    pub n: i64,
    pub kappa: Complex64,
    pub residual: f64,
    /// κ⁽ʲ⁾ for j = 0, 1, … up to the returned root.
    pub iterates: Vec<Complex64>,
    pub contraction_bound: f64,
}

/// Iterate κ ← F(κ) from κ = 0 until |F(κ) - κ| < tol.
pub fn solve_kappa(alpha: f64, n: i64, cfg: &SolverConfig) -> Result<KappaSolution> {
    let bound = cfg.contraction_bound(alpha);
    if !(bound < 1.0) {
        return Err(Error::NotContracting { bound });
    }
    let mut kappa = Complex64::new(0.0, 0.0);
    let mut iterates = vec![kappa];
    for _ in 0..cfg.max_iter {
        let next = fixed_point_map(kappa, n, alpha);
        let residual = (next - kappa).norm();
        iterates.push(next);
        kappa = next;
        if residual < cfg.tol {
            let residual = (fixed_point_map(kappa, n, alpha) - kappa).norm();
            return Ok(KappaSolution {
                n,
                kappa,
                residual,
                iterates,
                contraction_bound: bound,
            });
        }
    }
    Err(Error::NoConvergence {
        n,
        residual: (fixed_point_map(kappa, n, alpha) - kappa).norm(),
        iterations: cfg.max_iter,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// Odd n: cosine on the plateau, even in x.
    Cos,
    /// Even n: sine on the plateau, odd in x.
    Sin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GamowMode {
    pub n: i64,
    pub alpha: f64,
    pub kappa: Complex64,
    /// Complex eigenvalue κ²ΔE.
    pub z: Complex64,
    pub k: Complex64,
    pub k_tilde: Complex64,
    pub parity: Parity,
    /// Exterior amplitude at the plateau edge, iⁿκ.
    pub b: Complex64,
    /// -ħ/(2 Im Z).
    pub tau: f64,
    /// ħ Re k̃ / m.
    pub escape_speed: f64,
    /// -Im k̃.
    pub beta: f64,
    pub residual: f64,
    pub iterations: usize,
    /// |κ| > 1/2: outside the |Z| ≤ ΔE/4 census.
    pub outside_census: bool,
    /// α below the verified regime.
    pub unverified: bool,
    pub iterates: Vec<Complex64>,
}

pub fn solve_mode(spec: &PlateauSpec, n: i64, cfg: &SolverConfig) -> Result<GamowMode> {
    let alpha = spec.alpha();
    let unverified = alpha < VERIFIED_ALPHA;
    if unverified && !cfg.allow_unverified {
        return Err(Error::UnverifiedRegime { alpha });
    }
    if (n as f64) > alpha + 2.0 {
        return Err(Error::InvalidParameter(format!(
            "n = {n} exceeds alpha + 2 = {}",
            alpha + 2.0
        )));
    }
    let sol = solve_kappa(alpha, n, cfg)?;
    let kappa = sol.kappa;
    if !(kappa.re > 0.0) {
        return Err(Error::NonDecayRoot {
            n,
            re: kappa.re,
            im: kappa.im,
        });
    }
    let scale = 2.0 * PI / spec.lambda0();
    let one = Complex64::new(1.0, 0.0);
    let k = scale * kappa;
    let k_tilde = scale * branch_sqrt(one + kappa * kappa);
    let z = kappa * kappa * spec.de;
    let p = &spec.params;
    Ok(GamowMode {
        n,
        alpha,
        kappa,
        z,
        k,
        k_tilde,
        parity: if n % 2 != 0 { Parity::Cos } else { Parity::Sin },
        b: Complex64::i().powi(n as i32) * kappa,
        tau: -p.hbar / (2.0 * z.im),
        escape_speed: p.hbar * k_tilde.re / p.mass,
        beta: -k_tilde.im,
        residual: sol.residual,
        iterations: sol.iterates.len() - 1,
        outside_census: kappa.norm() > CENSUS_RADIUS,
        unverified,
        iterates: sol.iterates,
    })
}

/// Largest index considered: n ≤ α + 2.
pub fn max_index(alpha: f64) -> i64 {
    (alpha + 2.0).floor() as i64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Census {
    pub alpha: f64,
    /// Modes with |κ| ≤ 1/2, sorted by n.
    pub modes: Vec<GamowMode>,
    /// Modes solved but outside the census radius.
    pub excluded: Vec<GamowMode>,
}

impl Census {
    pub fn count(&self) -> usize {
        self.modes.len()
    }

    /// α - 2 < N ≤ α + 2.
    pub fn count_in_bounds(&self) -> bool {
        let n = self.count() as f64;
        self.alpha - 2.0 < n && n <= self.alpha + 2.0
    }
}

pub fn enumerate_modes(spec: &PlateauSpec, cfg: &SolverConfig) -> Result<Census> {
    let alpha = spec.alpha();
    let mut modes = Vec::new();
    let mut excluded = Vec::new();
    for n in 1..=max_index(alpha) {
        let mode = solve_mode(spec, n, cfg)?;
        if mode.outside_census {
            excluded.push(mode);
        } else {
            modes.push(mode);
        }
    }
    Ok(Census { alpha, modes, excluded })
}

/// Z_n ≈ (n²ΔE/4α²)(1 - 2i/(πα)).
pub fn asymptotic_z(spec: &PlateauSpec, n: i64) -> Complex64 {
    let alpha = spec.alpha();
    let nu = n as f64 / (2.0 * alpha);
    nu * nu * spec.de * Complex64::new(1.0, -2.0 / (PI * alpha))
}

/// Second iterate ν - (i/πα)ln(ν + √(1+ν²)), ν = n/2α.
pub fn second_iterate(alpha: f64, n: i64) -> Complex64 {
    let nu = n as f64 / (2.0 * alpha);
    Complex64::new(nu, -(nu + (1.0 + nu * nu).sqrt()).ln() / (PI * alpha))
}

/// Infinite-well level ħ²π²n²/(8ma²).
pub fn infinite_well_level(spec: &PlateauSpec, n: i64) -> f64 {
    let p = &spec.params;
    (p.hbar * PI * n as f64).powi(2) / (8.0 * p.mass * spec.a * spec.a)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lifetimes {
    /// a√(2m/E).
    pub tau_cl: f64,
    /// (1/4)√(ΔE/E)·τ_cl.
    pub tau_qu: f64,
    /// -ħ/(2 Im Z).
    pub tau_z: f64,
    /// Leading-order transmission 4√(E/ΔE) at each passage over the edge.
    pub t_step: f64,
}

pub fn lifetime(spec: &PlateauSpec, mode: &GamowMode) -> Result<Lifetimes> {
    let e = mode.z.re;
    if !(e > 0.0) {
        return Err(Error::NonpositiveEnergy(e));
    }
    let tau_cl = spec.a * (2.0 * spec.params.mass / e).sqrt();
    Ok(Lifetimes {
        tau_cl,
        tau_qu: 0.25 * (spec.de / e).sqrt() * tau_cl,
        tau_z: mode.tau,
        t_step: 4.0 * (e / spec.de).sqrt(),
    })
}

/// Coefficients of the eigenfunction with A₊ = 1/2 in the form
/// A₊e^{ikx} + A₋e^{-ikx} on the plateau, B₊e^{ik̃x} for x > a and
/// B₋e^{-ik̃x} for x < -a.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GamowCoefficients {
    pub a_plus: Complex64,
    pub a_minus: Complex64,
    pub b_plus: Complex64,
    pub b_minus: Complex64,
}

impl GamowCoefficients {
    pub fn new(mode: &GamowMode, a: f64) -> Self {
        let (k, kt) = (mode.k, mode.k_tilde);
        let i = Complex64::i();
        let a_plus = Complex64::new(0.5, 0.0);
        Self {
            a_plus,
            a_minus: (i * 2.0 * a * k).exp() * (k - kt) / (k + kt) * a_plus,
            b_plus: (i * a * (k - kt)).exp() * 2.0 * k / (k + kt) * a_plus,
            b_minus: (-i * a * (k + kt)).exp() * 2.0 * k / (k - kt) * a_plus,
        }
    }
}

/// Piecewise closed-form eigenfunction. On the plateau it is
/// A₊e^{ikx} + A₋e^{-ikx}; outside it is written relative to the edges,
/// B_R e^{ik̃(x-a)} and B_L e^{-ik̃(x+a)}.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenfunction {
    pub a: f64,
    pub k: Complex64,
    pub k_tilde: Complex64,
    pub z: Complex64,
    pub de: f64,
    pub params: PhysicalParams,
    pub coefficients: GamowCoefficients,
    /// B₊e^{iak̃}
    pub b_right: Complex64,
    /// B₋e^{iak̃}
    pub b_left: Complex64,
}

impl Eigenfunction {
    pub fn new(mode: &GamowMode, spec: &PlateauSpec) -> Self {
        let c = GamowCoefficients::new(mode, spec.a);
        let phase = (Complex64::i() * spec.a * mode.k_tilde).exp();
        Self {
            a: spec.a,
            k: mode.k,
            k_tilde: mode.k_tilde,
            z: mode.z,
            de: spec.de,
            params: spec.params,
            coefficients: c,
            b_right: c.b_plus * phase,
            b_left: c.b_minus * phase,
        }
    }

    pub fn interior(&self, x: f64) -> Complex64 {
        let e = (Complex64::i() * self.k * x).exp();
        self.coefficients.a_plus * e + self.coefficients.a_minus / e
    }

    pub fn interior_derivative(&self, x: f64) -> Complex64 {
        let e = (Complex64::i() * self.k * x).exp();
        Complex64::i() * self.k * (self.coefficients.a_plus * e - self.coefficients.a_minus / e)
    }

    /// Exterior branch continued to any x (right branch for x ≥ 0).
    pub fn exterior(&self, x: f64) -> Complex64 {
        let i = Complex64::i();
        if x >= 0.0 {
            self.b_right * (i * self.k_tilde * (x - self.a)).exp()
        } else {
            self.b_left * (-i * self.k_tilde * (x + self.a)).exp()
        }
    }

    pub fn exterior_derivative(&self, x: f64) -> Complex64 {
        let i = Complex64::i();
        if x >= 0.0 {
            i * self.k_tilde * self.exterior(x)
        } else {
            -i * self.k_tilde * self.exterior(x)
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        if x.abs() <= self.a {
            self.interior(x)
        } else {
            self.exterior(x)
        }
    }

    /// ψ(x)e^{-iZt/ħ}.
    pub fn eval_t(&self, x: f64, t: f64) -> Complex64 {
        self.eval(x) * (-Complex64::i() * self.z * t / self.params.hbar).exp()
    }

    /// e^{2 Im Z t/ħ}, the factor by which |ψ|² shrinks everywhere.
    pub fn decay_factor(&self, t: f64) -> f64 {
        (2.0 * self.z.im * t / self.params.hbar).exp()
    }

    /// Largest relative jump of ψ and ψ' across ±a.
    pub fn matching_error(&self) -> f64 {
        let rel = |a: Complex64, b: Complex64| (a - b).norm() / a.norm().max(b.norm());
        [self.a, -self.a]
            .iter()
            .map(|&x| {
                rel(self.interior(x), self.exterior(x))
                    .max(rel(self.interior_derivative(x), self.exterior_derivative(x)))
            })
            .fold(0.0, f64::max)
    }

    /// |-(ħ²/2m)ψ'' + (V - Z)ψ| / (|V - Z||ψ|) at `x`, with ψ'' from a
    /// sixth-order seven-point stencil of spacing `h` on the piece that
    /// contains `x`.
    pub fn ode_residual(&self, x: f64, h: f64) -> f64 {
        const W: [f64; 7] = [
            1.0 / 90.0,
            -3.0 / 20.0,
            3.0 / 2.0,
            -49.0 / 18.0,
            3.0 / 2.0,
            -3.0 / 20.0,
            1.0 / 90.0,
        ];
        let inside = x.abs() <= self.a;
        let f = |y: f64| if inside { self.interior(y) } else { self.exterior(y) };
        let d2: Complex64 = W
            .iter()
            .enumerate()
            .map(|(j, w)| f(x + (j as f64 - 3.0) * h) * *w)
            .sum::<Complex64>()
            / (h * h);
        let v = if inside { 0.0 } else { -self.de };
        let psi = f(x);
        let r = -self.params.kinetic_coefficient() * d2 + (v - self.z) * psi;
        r.norm() / ((v - self.z).norm() * psi.norm())
    }

    /// ∫_{-a}^{a} |ψ|² in closed form.
    pub fn plateau_norm(&self) -> f64 {
        let (kr, ki) = (self.k.re, self.k.im);
        let a = self.a;
        let c = self.coefficients;
        // |A₊e^{ikx} + A₋e^{-ikx}|² = |A₊|²e^{-2k_i x} + |A₋|²e^{2k_i x}
        //   + 2 Re(A₊ A₋* e^{2ik_r x}).
        // The first two terms are not separately symmetric, but their sum
        // integrates to (|A₊|² + |A₋|²)·sinh(2k_i a)/k_i.
        let growth = if ki.abs() < 1e-12 {
            2.0 * a
        } else {
            (2.0 * ki * a).sinh() / ki
        };
        let cross = (2.0 * kr * a).sin() / kr;
        (c.a_plus.norm_sqr() + c.a_minus.norm_sqr()) * growth + 2.0 * (c.a_plus * c.a_minus.conj()).re * cross
    }

    pub fn sample(&self, grid: &Grid) -> WaveFunction {
        WaveFunction::from_fn(*grid, |x| self.eval(x))
    }
}
