//! Closed-form density families with exact moments.
//!
//! These are the reference inputs of the workbench: every numerical grid
//! starts from one of these families, and the oracle module checks grid
//! results against their exact moments and (where known) exact entropies.

use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

pub(crate) const SQRT_2PI: f64 = 2.5066282746310002;

/// Standard normal pdf.
pub(crate) fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Standard normal cdf via erfc (accurate in both tails).
pub(crate) fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// One Gaussian component of a mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub var: f64,
}

/// A one-dimensional density with closed-form parameterization.
///
/// All supported families have finite variance; constructors reject
/// anything else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum AnalyticDensity {
    Gaussian { mean: f64, var: f64 },
    Uniform { lo: f64, hi: f64 },
    Laplace { loc: f64, scale: f64 },
    Exponential { scale: f64 },
    GaussianMixture { components: Vec<MixtureComponent> },
}

impl AnalyticDensity {
    pub fn gaussian(mean: f64, var: f64) -> Result<Self> {
        if !(var > 0.0) || !var.is_finite() || !mean.is_finite() {
            return Err(Error::invalid("var", "variance must be finite and > 0"));
        }
        Ok(AnalyticDensity::Gaussian { mean, var })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid("hi", "need finite lo < hi"));
        }
        Ok(AnalyticDensity::Uniform { lo, hi })
    }

    pub fn laplace(loc: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() || !loc.is_finite() {
            return Err(Error::invalid("scale", "scale must be finite and > 0"));
        }
        Ok(AnalyticDensity::Laplace { loc, scale })
    }

    pub fn exponential(scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::invalid("scale", "scale must be finite and > 0"));
        }
        Ok(AnalyticDensity::Exponential { scale })
    }

    /// Mixture weights must be positive and sum to 1 within 1e-12.
    pub fn gaussian_mixture(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("components", "mixture must be non-empty"));
        }
        let mut wsum = 0.0;
        for c in &components {
            if !(c.weight > 0.0) || !(c.var > 0.0) || !c.mean.is_finite() {
                return Err(Error::invalid(
                    "components",
                    "weights and variances must be > 0, means finite",
                ));
            }
            wsum += c.weight;
        }
        if (wsum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "components",
                format!("weights sum to {wsum}, expected 1 within 1e-12"),
            ));
        }
        Ok(AnalyticDensity::GaussianMixture { components })
    }

    /// Exact mean.
    pub fn mean(&self) -> f64 {
        match self {
            AnalyticDensity::Gaussian { mean, .. } => *mean,
            AnalyticDensity::Uniform { lo, hi } => 0.5 * (lo + hi),
            AnalyticDensity::Laplace { loc, .. } => *loc,
            AnalyticDensity::Exponential { scale } => *scale,
            AnalyticDensity::GaussianMixture { components } => {
                components.iter().map(|c| c.weight * c.mean).sum()
            }
        }
    }

    /// Exact variance (law of total variance for mixtures).
    pub fn variance(&self) -> f64 {
        match self {
            AnalyticDensity::Gaussian { var, .. } => *var,
            AnalyticDensity::Uniform { lo, hi } => (hi - lo) * (hi - lo) / 12.0,
            AnalyticDensity::Laplace { scale, .. } => 2.0 * scale * scale,
            AnalyticDensity::Exponential { scale } => scale * scale,
            AnalyticDensity::GaussianMixture { components } => {
                let m = self.mean();
                components
                    .iter()
                    .map(|c| c.weight * (c.var + (c.mean - m) * (c.mean - m)))
                    .sum()
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            AnalyticDensity::Gaussian { mean, var } => {
                let s = var.sqrt();
                normal_pdf((x - mean) / s) / s
            }
            AnalyticDensity::Uniform { lo, hi } => {
                if x >= *lo && x <= *hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            AnalyticDensity::Laplace { loc, scale } => {
                (-(x - loc).abs() / scale).exp() / (2.0 * scale)
            }
            AnalyticDensity::Exponential { scale } => {
                if x >= 0.0 {
                    (-x / scale).exp() / scale
                } else {
                    0.0
                }
            }
            AnalyticDensity::GaussianMixture { components } => components
                .iter()
                .map(|c| {
                    let s = c.var.sqrt();
                    c.weight * normal_pdf((x - c.mean) / s) / s
                })
                .sum(),
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        match self {
            AnalyticDensity::Gaussian { mean, var } => {
                let z = (x - mean) / var.sqrt();
                -0.5 * z * z - 0.5 * (2.0 * std::f64::consts::PI * var).ln()
            }
            AnalyticDensity::Laplace { loc, scale } => {
                -(x - loc).abs() / scale - (2.0 * scale).ln()
            }
            AnalyticDensity::Exponential { scale } => {
                if x >= 0.0 {
                    -x / scale - scale.ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            _ => self.pdf(x).ln(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            AnalyticDensity::Gaussian { mean, var } => normal_cdf((x - mean) / var.sqrt()),
            AnalyticDensity::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            AnalyticDensity::Laplace { loc, scale } => {
                let z = (x - loc) / scale;
                if z < 0.0 {
                    0.5 * z.exp()
                } else {
                    1.0 - 0.5 * (-z).exp()
                }
            }
            AnalyticDensity::Exponential { scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -((-x / scale).exp_m1())
                }
            }
            AnalyticDensity::GaussianMixture { components } => components
                .iter()
                .map(|c| c.weight * normal_cdf((x - c.mean) / c.var.sqrt()))
                .sum(),
        }
    }

    /// Inverse cdf. Closed form where available, bisection for mixtures and
    /// Gaussians (bisection keeps deep-tail quantiles accurate in x).
    pub fn quantile(&self, q: f64) -> f64 {
        debug_assert!(q > 0.0 && q < 1.0);
        match self {
            AnalyticDensity::Uniform { lo, hi } => lo + q * (hi - lo),
            AnalyticDensity::Laplace { loc, scale } => {
                if q < 0.5 {
                    loc + scale * (2.0 * q).ln()
                } else {
                    loc - scale * (2.0 * (1.0 - q)).ln()
                }
            }
            AnalyticDensity::Exponential { scale } => -scale * (-q).ln_1p(),
            _ => {
                let sd = self.variance().sqrt();
                let (mut a, mut b) = (self.mean() - 12.0 * sd - 1.0, self.mean() + 12.0 * sd + 1.0);
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if self.cdf(m) < q {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                0.5 * (a + b)
            }
        }
    }

    /// Whether the density is differentiable everywhere on its support, so
    /// that the score p'/p (and hence Fisher information) is well defined.
    pub fn is_smooth(&self) -> bool {
        matches!(
            self,
            AnalyticDensity::Gaussian { .. } | AnalyticDensity::GaussianMixture { .. }
        )
    }

    /// Analytic score p'(x)/p(x), for smooth families only.
    pub fn score(&self, x: f64) -> Option<f64> {
        match self {
            AnalyticDensity::Gaussian { mean, var } => Some(-(x - mean) / var),
            AnalyticDensity::GaussianMixture { components } => {
                let mut num = 0.0;
                let mut den = 0.0;
                for c in components {
                    let s = c.var.sqrt();
                    let w = c.weight * normal_pdf((x - c.mean) / s) / s;
                    den += w;
                    num += w * (-(x - c.mean) / c.var);
                }
                if den > 0.0 {
                    Some(num / den)
                } else {
                    Some(0.0)
                }
            }
            _ => None,
        }
    }

    /// Density of c·X for c ≠ 0, when it stays inside the family set.
    pub fn scaled(&self, c: f64) -> Option<AnalyticDensity> {
        match self {
            AnalyticDensity::Gaussian { mean, var } => Some(AnalyticDensity::Gaussian {
                mean: c * mean,
                var: c * c * var,
            }),
            AnalyticDensity::Uniform { lo, hi } => {
                let (a, b) = (c * lo, c * hi);
                Some(AnalyticDensity::Uniform {
                    lo: a.min(b),
                    hi: a.max(b),
                })
            }
            AnalyticDensity::Laplace { loc, scale } => Some(AnalyticDensity::Laplace {
                loc: c * loc,
                scale: c.abs() * scale,
            }),
            AnalyticDensity::Exponential { scale } => {
                if c > 0.0 {
                    Some(AnalyticDensity::Exponential { scale: c * scale })
                } else {
                    None
                }
            }
            AnalyticDensity::GaussianMixture { components } => {
                Some(AnalyticDensity::GaussianMixture {
                    components: components
                        .iter()
                        .map(|k| MixtureComponent {
                            weight: k.weight,
                            mean: c * k.mean,
                            var: c * c * k.var,
                        })
                        .collect(),
                })
            }
        }
    }

    /// Density of X + dx.
    pub fn shifted(&self, dx: f64) -> Option<AnalyticDensity> {
        match self {
            AnalyticDensity::Gaussian { mean, var } => Some(AnalyticDensity::Gaussian {
                mean: mean + dx,
                var: *var,
            }),
            AnalyticDensity::Uniform { lo, hi } => Some(AnalyticDensity::Uniform {
                lo: lo + dx,
                hi: hi + dx,
            }),
            AnalyticDensity::Laplace { loc, scale } => Some(AnalyticDensity::Laplace {
                loc: loc + dx,
                scale: *scale,
            }),
            AnalyticDensity::Exponential { .. } => None,
            AnalyticDensity::GaussianMixture { components } => {
                Some(AnalyticDensity::GaussianMixture {
                    components: components
                        .iter()
                        .map(|k| MixtureComponent {
                            weight: k.weight,
                            mean: k.mean + dx,
                            var: k.var,
                        })
                        .collect(),
                })
            }
        }
    }

    /// Draw one sample (inverse cdf for Uniform/Laplace/Exponential,
    /// Box–Muller polar for Gaussians; see the oracle module docs).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            AnalyticDensity::Gaussian { mean, var } => mean + var.sqrt() * standard_normal(rng),
            AnalyticDensity::Uniform { lo, hi } => lo + (hi - lo) * rng.gen::<f64>(),
            AnalyticDensity::Laplace { loc, scale } => {
                let u: f64 = rng.gen::<f64>() - 0.5;
                loc - scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
            AnalyticDensity::Exponential { scale } => -scale * (1.0 - rng.gen::<f64>()).ln(),
            AnalyticDensity::GaussianMixture { components } => {
                let mut u: f64 = rng.gen();
                for c in components {
                    if u < c.weight {
                        return c.mean + c.var.sqrt() * standard_normal(rng);
                    }
                    u -= c.weight;
                }
                let c = components.last().unwrap();
                c.mean + c.var.sqrt() * standard_normal(rng)
            }
        }
    }

    /// Short display label, e.g. `gaussian(0;1)`. Comma-free so labels can
    /// sit in CSV fields unquoted.
    pub fn label(&self) -> String {
        match self {
            AnalyticDensity::Gaussian { mean, var } => format!("gaussian({mean};{var})"),
            AnalyticDensity::Uniform { lo, hi } => format!("uniform({lo};{hi})"),
            AnalyticDensity::Laplace { loc, scale } => format!("laplace({loc};{scale})"),
            AnalyticDensity::Exponential { scale } => format!("exponential({scale})"),
            AnalyticDensity::GaussianMixture { components } => {
                let parts: Vec<String> = components
                    .iter()
                    .map(|c| format!("{}*n({};{})", c.weight, c.mean, c.var))
                    .collect();
                format!("mixture({})", parts.join("+"))
            }
        }
    }
}

/// Marsaglia polar method for a standard normal variate.
pub(crate) fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u = 2.0 * rng.gen::<f64>() - 1.0;
        let v = 2.0 * rng.gen::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}
