//! Scalar information functionals of grid densities: differential entropy,
//! Fisher information, conditional variance / MMSE over Gaussian channels,
//! mutual informations, entropy power, and non-Gaussianness deficits.
//!
//! Everything is trapezoid quadrature over `GridDensity` grids (all
//! logarithms natural, entropies in nats). The Gaussian-channel machinery
//! works in the additive parameterization Var(X | X + s·Z): the signal-side
//! channel Y = √t·X + Z is the same conditioning after dividing the
//! observation by √t, i.e. Var(X | √t·X + Z) = Var(X | X + √(1/t)·Z).

use crate::density::analytic::AnalyticDensity;
use crate::density::grid::{GridDensity, GridPolicy};
use crate::density::score::score;
use crate::density::transform::{gaussian_smooth, refine_to_step, scale};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub(crate) const HALF_LN_2PI_E: f64 = 1.4189385332046727;

/// A (λ, t) parameter point of the variance-preserving channel sweeps, with
/// the derived noise splits α = √(t·λ) and β = √(t·(1−λ)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelPoint {
    pub lambda: f64,
    pub t: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl ChannelPoint {
    pub fn new(lambda: f64, t: f64) -> Result<ChannelPoint> {
        if !(0.0..=1.0).contains(&lambda) || !lambda.is_finite() {
            return Err(Error::LambdaOutOfRange(lambda));
        }
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::BadChannelParameter { expected: "finite and ≥ 0", got: t });
        }
        Ok(ChannelPoint {
            lambda,
            t,
            alpha: (t * lambda).sqrt(),
            beta: (t * (1.0 - lambda)).sqrt(),
        })
    }
}

/// Differential entropy h(X) = −∫ p ln p in nats. Samples below the density
/// floor contribute zero.
pub fn entropy(p: &GridDensity) -> f64 {
    entropy_floored(p, GridPolicy::default().floor_eps)
}

pub fn entropy_floored(p: &GridDensity, floor_eps: f64) -> f64 {
    p.quad(|_, v| if v >= floor_eps { -v * v.ln() } else { 0.0 })
}

/// Entropy power exp(2·h(X)).
pub fn entropy_power(p: &GridDensity) -> f64 {
    (2.0 * entropy(p)).exp()
}

/// Fisher information J(X) = ∫ S(x)² p(x) dx with S = p'/p.
///
/// Errors with `ScoreUndefined` for kinked densities; see
/// [`fisher_information_extrapolated`] for the vanishing-smoothing estimate.
pub fn fisher_information(p: &GridDensity, policy: &GridPolicy) -> Result<f64> {
    let s = score(p, policy)?;
    Ok(p.quad(|x, v| {
        if v >= policy.floor_eps {
            let i = ((x - p.lo()) / p.step()).round() as usize;
            s[i] * s[i] * v
        } else {
            0.0
        }
    }))
}

/// J(X) for kinked densities by vanishing-smoothing extrapolation:
/// J(X + √ε·Z) is evaluated on a shrinking ε ladder and extrapolated to
/// ε → 0 with a quadratic fit in √ε (the kink contributes a √ε correction).
///
/// Only meaningful when the density itself is continuous (derivative kinks,
/// like the Laplace median). Jump discontinuities (uniform endpoints) have
/// genuinely infinite J and the extrapolation will not converge.
pub fn fisher_information_extrapolated(p: &GridDensity, policy: &GridPolicy) -> Result<f64> {
    let eps = [1e-3, 2.5e-4, 6.25e-5];
    let mut u = [0.0; 3];
    let mut j = [0.0; 3];
    for (k, &e) in eps.iter().enumerate() {
        let smoothed = gaussian_smooth(p, e, policy)?;
        u[k] = e.sqrt();
        j[k] = fisher_information(&smoothed, policy)?;
    }
    // exact quadratic through (u, J): value at u = 0
    let l0 = (u[1] * u[2]) / ((u[0] - u[1]) * (u[0] - u[2]));
    let l1 = (u[0] * u[2]) / ((u[1] - u[0]) * (u[1] - u[2]));
    let l2 = (u[0] * u[1]) / ((u[2] - u[0]) * (u[2] - u[1]));
    Ok(j[0] * l0 + j[1] * l1 + j[2] * l2)
}

/// Posterior of X given one observation y of the channel Y = √t·X + Z.
#[derive(Debug, Clone)]
pub struct Posterior {
    pub y: f64,
    /// Posterior density over x, on the prior's grid.
    pub density: GridDensity,
    pub mean: f64,
    pub variance: f64,
}

/// Posterior p(x | y) ∝ p(x)·exp(−(y − √t·x)²/2) on the prior's grid.
pub fn posterior(p: &GridDensity, t: f64, y: f64) -> Result<Posterior> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::BadChannelParameter { expected: "finite and > 0", got: t });
    }
    let rt = t.sqrt();
    let weights: Vec<f64> = (0..p.n())
        .map(|i| {
            let d = y - rt * p.x_at(i);
            p.values()[i] * (-0.5 * d * d).exp()
        })
        .collect();
    let mass = crate::density::grid::trap_sum(p.step(), &weights);
    if !(mass > 1e-290) {
        return Err(Error::OutOfSupportObservation { y });
    }
    let values: Vec<f64> = weights.iter().map(|w| w / mass).collect();
    let density = GridDensity::from_values(p.lo(), p.step(), values, p.is_smooth(), None)?;
    let (mean, variance) = density.moments();
    Ok(Posterior { y, density, mean, variance })
}

/// Conditional statistics of X given the additive observation W = X + s·Z,
/// tabulated on a lattice of observation points.
pub struct ConditionalTable {
    pub w_lo: f64,
    pub w_step: f64,
    /// Unnormalized observation density on the w lattice.
    pub weights: Vec<f64>,
    /// Posterior mean E[X | W = w_j].
    pub means: Vec<f64>,
    /// Weight-averaged posterior variance: Var(X | X + s·Z).
    pub mmse: f64,
}

impl ConditionalTable {
    /// Linear interpolation of the posterior mean at an observation w.
    pub fn mean_at(&self, w: f64) -> f64 {
        let t = (w - self.w_lo) / self.w_step;
        if t <= 0.0 {
            return self.means[0];
        }
        let last = self.means.len() - 1;
        if t >= last as f64 {
            return self.means[last];
        }
        let i = t.floor() as usize;
        let f = t - i as f64;
        self.means[i] * (1.0 - f) + self.means[i + 1] * f
    }
}

/// Build the conditional table for W = X + s·Z, s² = `noise_var`.
///
/// Two regimes: a lattice regime (observation nodes aligned with the prior
/// grid, posterior moments by three spectral convolutions against the
/// Gaussian kernel) when the kernel is narrow, and a direct-quadrature
/// regime on a coarse observation grid when the kernel is wide relative to
/// the prior support. The prior grid is refined when the kernel would be
/// under-resolved.
pub fn conditional_table(
    p: &GridDensity,
    noise_var: f64,
    policy: &GridPolicy,
) -> Result<ConditionalTable> {
    if !(noise_var > 0.0) || !noise_var.is_finite() {
        return Err(Error::BadChannelParameter { expected: "finite and > 0", got: noise_var });
    }
    let s = noise_var.sqrt();
    let width = p.hi() - p.lo();
    if s >= 0.025 * width {
        conditional_direct(p, s)
    } else {
        conditional_lattice(p, s, policy)
    }
}

fn posterior_stats(m0: f64, m1: f64, m2: f64, center: f64) -> (f64, f64) {
    let mean_c = m1 / m0;
    let var = (m2 / m0 - mean_c * mean_c).max(0.0);
    (mean_c + center, var)
}

fn table_from_moments(
    w_lo: f64,
    w_step: f64,
    m0: Vec<f64>,
    m1: &[f64],
    m2: &[f64],
    center: f64,
) -> ConditionalTable {
    let peak = m0.iter().cloned().fold(0.0, f64::max);
    let cutoff = peak * 1e-280;
    let mut means = vec![0.0; m0.len()];
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..m0.len() {
        if m0[j] > cutoff {
            let (mean, var) = posterior_stats(m0[j], m1[j], m2[j], center);
            means[j] = mean;
            let w = if j == 0 || j == m0.len() - 1 { 0.5 } else { 1.0 };
            num += w * m0[j] * var;
            den += w * m0[j];
        }
    }
    ConditionalTable { w_lo, w_step, weights: m0, means, mmse: num / den }
}

/// Narrow-kernel regime: observation lattice shares the prior step, so the
/// Gaussian weights depend only on index differences and the three posterior
/// moment sums are linear convolutions.
fn conditional_lattice(p: &GridDensity, s: f64, policy: &GridPolicy) -> Result<ConditionalTable> {
    let work = refine_to_step(p, s / 2.5, policy)?;
    let h = work.step();
    let m = ((8.5 * s) / h).ceil() as usize;
    let needed = work.n() + 2 * m;
    if needed > policy.max_n {
        return Err(Error::ResolutionOverflow { required: needed, max: policy.max_n });
    }
    let kernel: Vec<f64> = (0..=2 * m)
        .map(|i| {
            let x = (i as f64 - m as f64) * h;
            (-0.5 * x * x / (s * s)).exp()
        })
        .collect();
    let center = work.moments().0;
    let pv = work.values();
    let xp: Vec<f64> = (0..work.n()).map(|i| (work.x_at(i) - center) * pv[i]).collect();
    let x2p: Vec<f64> = (0..work.n())
        .map(|i| {
            let xc = work.x_at(i) - center;
            xc * xc * pv[i]
        })
        .collect();
    let kinks = work.kinks();
    let m0 = crate::fft::convolve_trapezoid(pv, &kernel, h, kinks, &[]);
    let m1 = crate::fft::convolve_trapezoid(&xp, &kernel, h, kinks, &[]);
    let m2 = crate::fft::convolve_trapezoid(&x2p, &kernel, h, kinks, &[]);
    Ok(table_from_moments(work.lo() - m as f64 * h, h, m0, &m1, &m2, center))
}

/// Wide-kernel regime: the posterior weight varies on the noise scale, so a
/// coarse observation grid with direct quadrature over the prior grid is
/// both cheap and spectrally accurate.
fn conditional_direct(p: &GridDensity, s: f64) -> Result<ConditionalTable> {
    let w_lo = p.lo() - 8.5 * s;
    let w_hi = p.hi() + 8.5 * s;
    let hw = s / 2.5;
    let nw = ((w_hi - w_lo) / hw).ceil() as usize + 1;
    let center = p.moments().0;
    let n = p.n();
    let inv2s2 = 0.5 / (s * s);
    let mut m0 = vec![0.0; nw];
    let mut m1 = vec![0.0; nw];
    let mut m2 = vec![0.0; nw];
    for j in 0..nw {
        let w = w_lo + hw * j as f64;
        let (mut a0, mut a1, mut a2) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let pv = p.values()[i];
            if pv == 0.0 {
                continue;
            }
            let x = p.x_at(i);
            let d = w - x;
            let g = (-d * d * inv2s2).exp();
            let tw = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            let base = tw * pv * g;
            let xc = x - center;
            a0 += base;
            a1 += base * xc;
            a2 += base * xc * xc;
        }
        m0[j] = a0 * p.step();
        m1[j] = a1 * p.step();
        m2[j] = a2 * p.step();
    }
    Ok(table_from_moments(w_lo, hw, m0, &m1, &m2, center))
}

/// MMSE of the signal channel: Var(X | √t·X + Z). t = 0 returns Var(X).
pub fn mmse_signal(p: &GridDensity, t: f64, policy: &GridPolicy) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::BadChannelParameter { expected: "finite and ≥ 0", got: t });
    }
    if t == 0.0 {
        return Ok(p.moments().1);
    }
    Ok(conditional_table(p, 1.0 / t, policy)?.mmse)
}

/// Conditional variance in the additive channel: Var(X | X + √t·Z).
///
/// t = 0 is rejected: the value is trivially 0 but conditioning on X itself
/// is outside the numerical contract.
pub fn cond_var_additive(p: &GridDensity, t: f64, policy: &GridPolicy) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::BadChannelParameter { expected: "finite and > 0", got: t });
    }
    Ok(conditional_table(p, t, policy)?.mmse)
}

/// I(X + √t·Z; Z) = h(X + √t·Z) − h(X).
pub fn mi_noise(p: &GridDensity, t: f64, policy: &GridPolicy) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::BadChannelParameter { expected: "finite and ≥ 0", got: t });
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let smoothed = gaussian_smooth(p, t, policy)?;
    Ok(entropy_floored(&smoothed, policy.floor_eps) - entropy_floored(p, policy.floor_eps))
}

/// I(X; √t·X + Z) = h(√t·X + Z) − h(Z).
pub fn mi_signal(p: &GridDensity, t: f64, policy: &GridPolicy) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::BadChannelParameter { expected: "finite and ≥ 0", got: t });
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let scaled = scale(p, t.sqrt())?;
    let out = gaussian_smooth(&scaled, 1.0, policy)?;
    Ok(entropy_floored(&out, policy.floor_eps) - HALF_LN_2PI_E)
}

/// I(X; X + √t·Z) = h(X + √t·Z) − h(√t·Z); the reverse-channel mutual
/// information of the additive observation.
pub fn mi_additive(p: &GridDensity, t: f64, policy: &GridPolicy) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::BadChannelParameter { expected: "finite and > 0", got: t });
    }
    let smoothed = gaussian_smooth(p, t, policy)?;
    Ok(entropy_floored(&smoothed, policy.floor_eps) - HALF_LN_2PI_E - 0.5 * t.ln())
}

/// Non-Gaussianness deficits of X against a Gaussian reference of variance
/// `sigma2_ref` (in nats, 1/x², and x² respectively).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeficitPoint {
    /// D_h = h(X_G) − h(X).
    pub d_h: f64,
    /// D_J = J(X) − J(X_G); `None` when the score of X is undefined.
    pub d_j: Option<f64>,
    /// D_V = Var(X_G | √t·X_G + Z) − Var(X | √t·X + Z).
    pub d_v: f64,
    pub sigma2_ref: f64,
}

/// Deficits at channel parameter t with explicit Gaussian reference variance.
/// With `sigma2_ref = Var(X)` all three are nonnegative; the right-hand sides
/// of the integral representations do not depend on the choice.
pub fn deficits(
    p: &GridDensity,
    t: f64,
    sigma2_ref: f64,
    policy: &GridPolicy,
) -> Result<DeficitPoint> {
    if !(sigma2_ref > 0.0) || !sigma2_ref.is_finite() {
        return Err(Error::invalid("sigma2_ref", "must be finite and > 0"));
    }
    let d_h = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * sigma2_ref).ln()
        - entropy_floored(p, policy.floor_eps);
    let d_j = match fisher_information(p, policy) {
        Ok(j) => Some(j - 1.0 / sigma2_ref),
        Err(Error::ScoreUndefined) => None,
        Err(e) => return Err(e),
    };
    let d_v = sigma2_ref / (t * sigma2_ref + 1.0) - mmse_signal(p, t, policy)?;
    Ok(DeficitPoint { d_h, d_j, d_v, sigma2_ref })
}
