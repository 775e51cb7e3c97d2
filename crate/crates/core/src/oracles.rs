//! Independent cross-checks: closed-form values, seeded Monte Carlo
//! estimators, and grid-convergence studies.
//!
//! Everything here deliberately avoids the trapezoid-grid code path it is
//! used to validate: closed forms are exact, the Monte Carlo estimators
//! sample the analytic families directly (Marsaglia polar for normals,
//! inverse cdf elsewhere, ChaCha8 stream seeded from one u64), and the
//! auxiliary quadrature oracle is a composite Simpson rule.

use crate::density::analytic::{normal_cdf, AnalyticDensity};
use crate::density::grid::{discretize, GridPolicy};
use crate::error::{Error, Result};
use crate::functionals::conditional_table;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Closed-form Gaussian reference: every functional of N(0, σ²) the
/// workbench computes numerically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianOracle {
    pub sigma2: f64,
}

impl GaussianOracle {
    pub fn new(sigma2: f64) -> GaussianOracle {
        GaussianOracle { sigma2 }
    }

    /// h = ½·ln(2πe·σ²).
    pub fn entropy(&self) -> f64 {
        0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * self.sigma2).ln()
    }

    /// J = 1/σ².
    pub fn fisher(&self) -> f64 {
        1.0 / self.sigma2
    }

    /// Var(X | √t·X + Z) = σ²/(1 + t·σ²).
    pub fn mmse_signal(&self, t: f64) -> f64 {
        self.sigma2 / (1.0 + t * self.sigma2)
    }

    /// I(X; √t·X + Z) = ½·ln(1 + t·σ²).
    pub fn mi_signal(&self, t: f64) -> f64 {
        0.5 * (1.0 + t * self.sigma2).ln()
    }

    /// I(X + √t·Z; Z) = ½·ln(1 + t/σ²).
    pub fn mi_noise(&self, t: f64) -> f64 {
        0.5 * (1.0 + t / self.sigma2).ln()
    }

    /// Correlation factor between X and X + Z: √(σ²/(σ² + 1)).
    pub fn rho_additive(&self) -> f64 {
        (self.sigma2 / (self.sigma2 + 1.0)).sqrt()
    }
}

/// Quantities available through [`closed_form`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantity {
    Entropy,
    Fisher,
    MmseSignal { t: f64 },
    MiSignal { t: f64 },
    MiNoise { t: f64 },
}

impl Quantity {
    fn name(&self) -> &'static str {
        match self {
            Quantity::Entropy => "entropy",
            Quantity::Fisher => "fisher_information",
            Quantity::MmseSignal { .. } => "mmse_signal",
            Quantity::MiSignal { .. } => "mi_signal",
            Quantity::MiNoise { .. } => "mi_noise",
        }
    }
}

/// Exact closed-form value of a functional, where one exists.
///
/// Entropy: all families except the Gaussian mixture (which has no closed
/// form). Fisher information: Gaussian and Laplace. Channel quantities:
/// Gaussian only. Every other (family, quantity) pair is an explicit
/// [`Error::Unsupported`].
pub fn closed_form(d: &AnalyticDensity, q: Quantity) -> Result<f64> {
    let unsupported = || Error::Unsupported {
        family: d.label(),
        quantity: q.name().to_string(),
    };
    match q {
        Quantity::Entropy => match d {
            AnalyticDensity::Gaussian { var, .. } => Ok(GaussianOracle::new(*var).entropy()),
            AnalyticDensity::Uniform { lo, hi } => Ok((hi - lo).ln()),
            AnalyticDensity::Laplace { scale, .. } => Ok(1.0 + (2.0 * scale).ln()),
            AnalyticDensity::Exponential { scale } => Ok(1.0 + scale.ln()),
            AnalyticDensity::GaussianMixture { .. } => Err(unsupported()),
        },
        Quantity::Fisher => match d {
            AnalyticDensity::Gaussian { var, .. } => Ok(1.0 / var),
            AnalyticDensity::Laplace { scale, .. } => Ok(1.0 / (scale * scale)),
            _ => Err(unsupported()),
        },
        Quantity::MmseSignal { t } => match d {
            AnalyticDensity::Gaussian { var, .. } => Ok(GaussianOracle::new(*var).mmse_signal(t)),
            _ => Err(unsupported()),
        },
        Quantity::MiSignal { t } => match d {
            AnalyticDensity::Gaussian { var, .. } => Ok(GaussianOracle::new(*var).mi_signal(t)),
            _ => Err(unsupported()),
        },
        Quantity::MiNoise { t } => match d {
            AnalyticDensity::Gaussian { var, .. } => Ok(GaussianOracle::new(*var).mi_noise(t)),
            _ => Err(unsupported()),
        },
    }
}

/// Monte Carlo configuration: sample count and the 64-bit seed of the
/// ChaCha8 stream. Identical configs give bit-identical estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_samples: usize,
    pub seed: u64,
}

impl McConfig {
    pub fn new(n_samples: usize, seed: u64) -> McConfig {
        McConfig { n_samples, seed }
    }
}

fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Monte Carlo differential entropy: −E[ln p(X)] over i.i.d. samples.
pub fn mc_entropy(d: &AnalyticDensity, cfg: McConfig) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let samples: Vec<f64> = (0..cfg.n_samples)
        .map(|_| -d.ln_pdf(d.sample(&mut rng)))
        .collect();
    mean_and_se(&samples)
}

/// Monte Carlo MMSE of the channel Y = √t·X + Z: sample (X, Y) pairs and
/// average (X − E[X|Y])², with the posterior mean taken from the
/// quadrature conditional table (linearly interpolated in the observation).
pub fn mc_mmse(
    d: &AnalyticDensity,
    t: f64,
    cfg: McConfig,
    policy: &GridPolicy,
) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::BadChannelParameter { expected: "finite and > 0", got: t });
    }
    let grid = discretize(d, policy)?;
    let table = conditional_table(&grid, 1.0 / t, policy)?;
    let rt = t.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let samples: Vec<f64> = (0..cfg.n_samples)
        .map(|_| {
            let x = d.sample(&mut rng);
            let z = crate::density::analytic::standard_normal(&mut rng);
            let y = rt * x + z;
            let m = table.mean_at(y / rt);
            (x - m) * (x - m)
        })
        .collect();
    Ok(mean_and_se(&samples))
}

/// Closed-form density of Laplace(0, b) + N(0, s²); an independent oracle
/// for the smoothing path.
pub fn laplace_gauss_pdf(b: f64, s2: f64, w: f64) -> f64 {
    let s = s2.sqrt();
    let right = (-w / b).exp() * normal_cdf((w - s2 / b) / s);
    let left = (w / b).exp() * normal_cdf(-(w + s2 / b) / s);
    (s2 / (2.0 * b * b)).exp() / (2.0 * b) * (right + left)
}

/// Composite Simpson quadrature on [lo, hi] with n (odd) points; an
/// independent rule for oracle-side integrals.
pub fn simpson<F: Fn(f64) -> f64>(lo: f64, hi: f64, n: usize, f: F) -> f64 {
    assert!(n >= 3 && n % 2 == 1, "Simpson needs an odd point count");
    let h = (hi - lo) / (n - 1) as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..n - 1 {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + h * i as f64);
    }
    acc * h / 3.0
}

/// One row of a grid-convergence study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub value: f64,
    /// |value − previous value|; `None` on the first row.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    /// Deltas decrease monotonically (within a 1.5× noise allowance).
    pub monotone: bool,
    pub final_delta: f64,
}

/// Evaluate a functional across increasing grid sizes and report the
/// successive deltas. `f` maps a grid size to the quantity under study.
pub fn convergence_study<F: Fn(usize) -> Result<f64>>(
    grid_sizes: &[usize],
    f: F,
) -> Result<ConvergenceStudy> {
    if grid_sizes.len() < 3 {
        return Err(Error::invalid("grid_sizes", "need at least 3 increasing sizes"));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(grid_sizes.len());
    for &n in grid_sizes {
        let value = f(n)?;
        let delta = rows.last().map(|prev: &ConvergenceRow| (value - prev.value).abs());
        rows.push(ConvergenceRow { n, value, delta });
    }
    let deltas: Vec<f64> = rows.iter().filter_map(|r| r.delta).collect();
    // genuine decay, with a floor so fp-noise-level deltas still count
    let monotone = deltas.windows(2).all(|w| w[1] <= 0.9 * w[0] + 1e-12);
    Ok(ConvergenceStudy { monotone, final_delta: *deltas.last().unwrap(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::grid::GridDensity;
    use crate::functionals::{entropy, mmse_signal};

    fn policy() -> GridPolicy {
        GridPolicy::default()
    }

    #[test]
    fn gaussian_oracle_complementary_exact() {
        for v in [0.25, 1.0, 4.0] {
            let o = GaussianOracle::new(v);
            // J of the unit-smoothed variable plus the additive MMSE sum to 1
            let j_smoothed = 1.0 / (v + 1.0);
            let mmse_additive = v / (v + 1.0);
            assert!((j_smoothed + mmse_additive - 1.0).abs() < 1e-15);
            assert!((o.rho_additive().powi(2) - v / (v + 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_forms() {
        let g = AnalyticDensity::gaussian(0.0, 1.0).unwrap();
        assert_eq!(closed_form(&g, Quantity::Fisher).unwrap(), 1.0);
        let u = AnalyticDensity::uniform(0.0, 1.0).unwrap();
        assert_eq!(closed_form(&u, Quantity::Entropy).unwrap(), 0.0);
        let l = AnalyticDensity::laplace(0.0, 1.0).unwrap();
        assert!((closed_form(&l, Quantity::Entropy).unwrap() - (1.0 + 2.0_f64.ln())).abs() < 1e-15);
        assert!(matches!(
            closed_form(&u, Quantity::Fisher),
            Err(Error::Unsupported { .. })
        ));
        let mix = AnalyticDensity::gaussian_mixture(vec![
            crate::density::analytic::MixtureComponent { weight: 0.5, mean: -1.0, var: 1.0 },
            crate::density::analytic::MixtureComponent { weight: 0.5, mean: 1.0, var: 1.0 },
        ])
        .unwrap();
        assert!(matches!(
            closed_form(&mix, Quantity::Entropy),
            Err(Error::Unsupported { .. })
        ));
    }

    #[test]
    fn mc_entropy_gaussian_within_three_se() {
        let d = AnalyticDensity::gaussian(0.0, 1.0).unwrap();
        let (est, se) = mc_entropy(&d, McConfig::new(1_000_000, 7));
        assert!(se > 0.0 && se < 1e-3);
        assert!((est - 1.4189385332046727).abs() < 3.0 * se);
    }

    #[test]
    fn mc_entropy_uniform_zero_se() {
        let d = AnalyticDensity::uniform(0.0, 1.0).unwrap();
        let (est, se) = mc_entropy(&d, McConfig::new(100_000, 7));
        assert_eq!(se, 0.0);
        assert!(est.abs() < 1e-12);
    }

    #[test]
    fn mc_determinism() {
        let d = AnalyticDensity::laplace(0.0, 1.0).unwrap();
        let a = mc_entropy(&d, McConfig::new(50_000, 42));
        let b = mc_entropy(&d, McConfig::new(50_000, 42));
        assert_eq!(a, b);
        let m1 = mc_mmse(&d, 1.0, McConfig::new(50_000, 42), &policy()).unwrap();
        let m2 = mc_mmse(&d, 1.0, McConfig::new(50_000, 42), &policy()).unwrap();
        assert_eq!(m1, m2);
    }

    #[test]
    fn mc_mmse_gaussian_unit() {
        let d = AnalyticDensity::gaussian(0.0, 1.0).unwrap();
        let (est, se) = mc_mmse(&d, 1.0, McConfig::new(1_000_000, 11), &policy()).unwrap();
        assert!((est - 0.5).abs() < 3.0 * se, "est={est} se={se}");
        let (hi_snr, _) = mc_mmse(&d, 1e4, McConfig::new(100_000, 11), &policy()).unwrap();
        assert!(hi_snr < 2e-4);
    }

    #[test]
    fn mc_mmse_uniform_brackets_quadrature() {
        let d = AnalyticDensity::uniform(0.0, 1.0).unwrap();
        let g = discretize(&d, &policy()).unwrap();
        let quad = mmse_signal(&g, 1.0, &policy()).unwrap();
        let (est, se) = mc_mmse(&d, 1.0, McConfig::new(1_000_000, 13), &policy()).unwrap();
        assert!((est - quad).abs() < 3.0 * se, "quad={quad} est={est} se={se}");
    }

    #[test]
    fn laplace_gauss_pdf_matches_grid_convolution() {
        let d = AnalyticDensity::laplace(0.0, 1.0).unwrap();
        let g = discretize(&d, &policy()).unwrap();
        let s = crate::density::transform::gaussian_smooth(&g, 1.0, &policy()).unwrap();
        let sup = (0..s.n())
            .step_by(7)
            .map(|i| (s.values()[i] - laplace_gauss_pdf(1.0, 1.0, s.x_at(i))).abs())
            .fold(0.0, f64::max);
        assert!(sup < 1e-9, "sup={sup}");
    }

    #[test]
    fn smoothed_laplace_entropy_against_simpson_oracle() {
        // independent path: closed-form pdf + Simpson rule
        let oracle = simpson(-40.0, 40.0, 40001, |w| {
            let p = laplace_gauss_pdf(1.0, 1.0, w);
            if p > 0.0 {
                -p * p.ln()
            } else {
                0.0
            }
        });
        let d = AnalyticDensity::laplace(0.0, 1.0).unwrap();
        let g = discretize(&d, &policy()).unwrap();
        let s = crate::density::transform::gaussian_smooth(&g, 1.0, &policy()).unwrap();
        let quad = entropy(&s);
        assert!((quad - oracle).abs() < 1e-5, "quad={quad} oracle={oracle}");
    }

    #[test]
    fn convergence_of_gaussian_entropy() {
        let d = AnalyticDensity::gaussian(0.0, 1.0).unwrap();
        let study = convergence_study(&[512, 1024, 2048, 4096, 8192], |n| {
            let g = crate::density::grid::discretize_n(&d, n, &policy())?;
            Ok(entropy(&g))
        })
        .unwrap();
        assert!(study.monotone);
        assert!(study.final_delta < 1e-9);
    }

    #[test]
    fn convergence_flags_non_convergent() {
        let study = convergence_study(&[512, 1024, 2048, 4096], |n| {
            // oscillating by construction
            Ok(if n.trailing_zeros() % 2 == 0 { 1.0 } else { 0.0 })
        })
        .unwrap();
        assert!(!study.monotone);
    }

    #[test]
    fn quadrature_gaussian_matches_oracle_battery() {
        for v in [0.25, 1.0, 4.0] {
            let o = GaussianOracle::new(v);
            let g: GridDensity =
                discretize(&AnalyticDensity::gaussian(0.0, v).unwrap(), &policy()).unwrap();
            assert!((entropy(&g) - o.entropy()).abs() / o.entropy().abs() < 1e-6);
            let j = crate::functionals::fisher_information(&g, &policy()).unwrap();
            assert!((j - o.fisher()).abs() / o.fisher() < 1e-6);
        }
    }
}
