//! Uniform-grid densities: the universal numerical carrier.
//!
//! A `GridDensity` is a nonnegative function sampled on a uniform grid and
//! normalized to unit trapezoid mass. All functionals in this crate are
//! trapezoid-rule quadratures over these grids; truncated supports are chosen
//! so the excluded analytic tail mass stays below `GridPolicy::mass_tol`.

use crate::density::analytic::AnalyticDensity;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Grid construction policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPolicy {
    /// Number of grid points for discretized analytic densities (power of two).
    pub n: usize,
    /// Analytic tail mass excluded when choosing support endpoints.
    pub mass_tol: f64,
    /// Density floor below which points are excluded from log/score quadrature.
    pub floor_eps: f64,
    /// Hard cap on any intermediate or refined grid size.
    pub max_n: usize,
}

impl Default for GridPolicy {
    fn default() -> Self {
        GridPolicy {
            n: 4096,
            mass_tol: 1e-12,
            floor_eps: 1e-300,
            max_n: 1 << 21,
        }
    }
}

impl GridPolicy {
    pub fn with_n(n: usize) -> Self {
        GridPolicy { n, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 64 || !self.n.is_power_of_two() {
            return Err(Error::invalid("n", "grid size must be a power of two ≥ 64"));
        }
        if !(self.mass_tol > 0.0 && self.mass_tol < 1e-3) {
            return Err(Error::invalid("mass_tol", "must lie in (0, 1e-3)"));
        }
        if !(self.floor_eps > 0.0) {
            return Err(Error::invalid("floor_eps", "must be > 0"));
        }
        if self.max_n < self.n {
            return Err(Error::invalid("max_n", "must be ≥ n"));
        }
        Ok(())
    }
}

/// A density sampled on a uniform grid, normalized to unit trapezoid mass.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    lo: f64,
    step: f64,
    values: Vec<f64>,
    /// Differentiable everywhere on the support (score well defined).
    smooth: bool,
    /// Analytic origin, kept while transforms stay inside the closed-form
    /// family set; used for analytic scores and exact re-discretization.
    origin: Option<AnalyticDensity>,
    /// Node indices where the density has a derivative kink (e.g. the
    /// Laplace median). Discretization aligns kinks onto nodes so quadrature
    /// can correct for them.
    kinks: Vec<usize>,
}

pub(crate) fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

/// Trapezoid mass of uniformly sampled values.
pub(crate) fn trap_sum(step: f64, values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner: f64 = values.iter().sum();
    step * (inner - 0.5 * (values[0] + values[values.len() - 1]))
}

impl GridDensity {
    /// Wrap raw samples; clamps negative rounding ripple to zero, renormalizes,
    /// and requires a power-of-two point count.
    pub fn from_values(
        lo: f64,
        step: f64,
        mut values: Vec<f64>,
        smooth: bool,
        origin: Option<AnalyticDensity>,
    ) -> Result<GridDensity> {
        if values.len() < 2 || !values.len().is_power_of_two() {
            return Err(Error::invalid("values", "need a power-of-two count ≥ 2"));
        }
        if !(step > 0.0) || !lo.is_finite() {
            return Err(Error::invalid("step", "need finite lo and step > 0"));
        }
        for v in values.iter_mut() {
            if !v.is_finite() {
                return Err(Error::invalid("values", "non-finite density sample"));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let mass = trap_sum(step, &values);
        if !(mass.is_finite() && (mass - 1.0).abs() < 1e-3) {
            return Err(Error::MassDrift { mass });
        }
        for v in values.iter_mut() {
            *v /= mass;
        }
        Ok(GridDensity { lo, step, values, smooth, origin, kinks: Vec::new() })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.lo + self.step * (self.values.len() - 1) as f64
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_smooth(&self) -> bool {
        self.smooth
    }

    pub fn origin(&self) -> Option<&AnalyticDensity> {
        self.origin.as_ref()
    }

    pub fn x_at(&self, i: usize) -> f64 {
        self.lo + self.step * i as f64
    }

    /// Corrected-quadrature mass (consistent with [`GridDensity::quad`], so
    /// normalized densities integrate to 1 under the same rule every
    /// functional uses).
    pub fn mass(&self) -> f64 {
        self.corrected_integral(&self.values)
    }

    /// Support where the density is actually nonzero (trailing power-of-two
    /// padding is zero-valued and not part of the effective support).
    pub fn effective_support(&self) -> (f64, f64) {
        let first = self.values.iter().position(|&v| v > 0.0).unwrap_or(0);
        let last = self
            .values
            .iter()
            .rposition(|&v| v > 0.0)
            .unwrap_or(self.values.len() - 1);
        (self.x_at(first), self.x_at(last))
    }

    /// Density value at x: analytic origins evaluate exactly (interpolation
    /// across a kink or jump would leak an O(step²) bias); plain grids use
    /// cubic interpolation. Zero outside the grid.
    pub fn pdf(&self, x: f64) -> f64 {
        let t = (x - self.lo) / self.step;
        if t < 0.0 || t > (self.values.len() - 1) as f64 {
            return 0.0;
        }
        if let Some(origin) = &self.origin {
            return origin.pdf(x);
        }
        catmull_rom(&self.values, t).max(0.0)
    }

    /// Trapezoid mean and central second moment.
    pub fn moments(&self) -> (f64, f64) {
        let mean = self.quad(|x, p| x * p);
        let var = self.quad(|x, p| (x - mean) * (x - mean) * p);
        (mean, var)
    }

    /// Quadrature of f(x, p(x)) over the grid: trapezoid rule with
    /// Euler–Maclaurin derivative corrections at the grid endpoints and at
    /// any kink nodes, which restores O(h⁴) accuracy for piecewise-smooth
    /// integrands. Corrections use one-sided second-order stencils, so the
    /// rule stays purely sample-based.
    pub fn quad<F: Fn(f64, f64) -> f64>(&self, f: F) -> f64 {
        let samples: Vec<f64> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &p)| f(self.x_at(i), p))
            .collect();
        self.corrected_integral(&samples)
    }

    pub(crate) fn corrected_integral(&self, f: &[f64]) -> f64 {
        let n = f.len();
        let h = self.step;
        let mut acc = trap_sum(h, f);
        if n < 4 {
            return acc;
        }
        let h2_12 = h * h / 12.0;
        let d_left = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
        let d_right = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
        acc -= h2_12 * (d_right - d_left);
        for &k in &self.kinks {
            if k >= 2 && k + 2 < n {
                let d_plus = (-3.0 * f[k] + 4.0 * f[k + 1] - f[k + 2]) / (2.0 * h);
                let d_minus = (3.0 * f[k] - 4.0 * f[k - 1] + f[k - 2]) / (2.0 * h);
                acc += h2_12 * (d_plus - d_minus);
            }
        }
        acc
    }

    /// Trapezoid mass currently sitting below the density floor; recorded in
    /// check metadata (floored points contribute zero to log quadratures).
    pub fn floored_mass(&self, floor_eps: f64) -> f64 {
        self.quad(|_, p| if p > 0.0 && p < floor_eps { p } else { 0.0 })
    }

    /// Translate the grid by dx (exact: node relabeling only).
    pub fn translated(&self, dx: f64) -> GridDensity {
        GridDensity {
            lo: self.lo + dx,
            step: self.step,
            values: self.values.clone(),
            smooth: self.smooth,
            origin: self.origin.as_ref().and_then(|o| o.shifted(dx)),
            kinks: self.kinks.clone(),
        }
    }

    pub fn kinks(&self) -> &[usize] {
        &self.kinks
    }

    pub(crate) fn set_kinks(&mut self, kinks: Vec<usize>) {
        self.kinks = kinks;
    }

    pub(crate) fn renormalize(&mut self) {
        let mass = self.mass();
        if mass > 0.0 {
            for v in self.values.iter_mut() {
                *v /= mass;
            }
        }
    }

    pub(crate) fn set_smooth(&mut self, smooth: bool) {
        self.smooth = smooth;
    }

    pub(crate) fn set_origin(&mut self, origin: Option<AnalyticDensity>) {
        self.origin = origin;
    }

    pub(crate) fn values_mut(&mut self) -> &mut Vec<f64> {
        &mut self.values
    }
}

/// Discretize an analytic density on `policy.n` points.
///
/// Support covers all but `mass_tol` of the analytic mass (half excluded per
/// tail); compact supports are kept exact. The samples are renormalized to
/// unit trapezoid mass.
pub fn discretize(d: &AnalyticDensity, policy: &GridPolicy) -> Result<GridDensity> {
    policy.validate()?;
    discretize_n(d, policy.n, policy)
}

/// Discretize with an explicit power-of-two point count (grid refinement for
/// narrow channel kernels goes through here).
pub(crate) fn discretize_n(
    d: &AnalyticDensity,
    n: usize,
    policy: &GridPolicy,
) -> Result<GridDensity> {
    if n > policy.max_n {
        return Err(Error::ResolutionOverflow { required: n, max: policy.max_n });
    }
    let (mut lo, hi) = support_for(d, policy.mass_tol);
    let step = (hi - lo) / (n - 1) as f64;

    // slide the grid so interior derivative kinks sit exactly on nodes
    let kink_xs = kink_points(d);
    let mut kinks = Vec::new();
    if let Some(&c) = kink_xs.first() {
        if c > lo && c < hi {
            let k = ((c - lo) / step).round() as usize;
            lo = c - k as f64 * step;
            kinks.push(k);
        }
    }

    let values: Vec<f64> = (0..n).map(|i| d.pdf(lo + step * i as f64)).collect();
    let mut g = GridDensity::from_values(lo, step, values, d.is_smooth(), Some(d.clone()))?;
    g.set_kinks(kinks);
    g.renormalize();
    Ok(g)
}

/// Interior points where the density's derivative jumps. Uniform and
/// exponential discontinuities fall on grid boundary nodes already.
fn kink_points(d: &AnalyticDensity) -> Vec<f64> {
    match d {
        AnalyticDensity::Laplace { loc, .. } => vec![*loc],
        _ => Vec::new(),
    }
}

/// Refine an analytic density to a grid whose step is at most `max_step`,
/// keeping the point count a power of two.
pub(crate) fn discretize_max_step(
    d: &AnalyticDensity,
    max_step: f64,
    policy: &GridPolicy,
) -> Result<GridDensity> {
    let (lo, hi) = support_for(d, policy.mass_tol);
    let needed = ((hi - lo) / max_step).ceil() as usize + 1;
    let n = next_pow2(needed.max(policy.n));
    discretize_n(d, n, policy)
}

/// Support endpoints excluding at most 0.4·mass_tol per tail (the 20%
/// headroom keeps the captured-mass invariant safe under grid alignment
/// shifts and floating-point rounding).
pub(crate) fn support_for(d: &AnalyticDensity, mass_tol: f64) -> (f64, f64) {
    let q = 0.4 * mass_tol;
    match d {
        AnalyticDensity::Uniform { lo, hi } => (*lo, *hi),
        AnalyticDensity::Exponential { scale } => {
            (0.0, d.quantile(1.0 - q).max(scale * 2.0))
        }
        _ => (d.quantile(q), d.quantile(1.0 - q)),
    }
}

/// Catmull-Rom cubic interpolation on uniformly indexed samples.
pub(crate) fn catmull_rom(values: &[f64], t: f64) -> f64 {
    let n = values.len();
    let i = (t.floor() as usize).min(n - 2);
    let f = t - i as f64;
    let vm = values[i.saturating_sub(1)];
    let v0 = values[i];
    let v1 = values[i + 1];
    let vp = values[(i + 2).min(n - 1)];
    let a = 0.5 * (-vm + 3.0 * v0 - 3.0 * v1 + vp);
    let b = vm - 2.5 * v0 + 2.0 * v1 - 0.5 * vp;
    let c = 0.5 * (v1 - vm);
    ((a * f + b) * f + c) * f + v0
}

/// Resample raw samples onto a new uniform grid by cubic interpolation.
/// Points outside the source grid are zero.
pub(crate) fn resample_values(
    src_lo: f64,
    src_step: f64,
    src: &[f64],
    dst_lo: f64,
    dst_step: f64,
    dst_n: usize,
) -> Vec<f64> {
    let max_t = (src.len() - 1) as f64;
    (0..dst_n)
        .map(|j| {
            let x = dst_lo + dst_step * j as f64;
            let t = (x - src_lo) / src_step;
            if t < -1e-9 || t > max_t + 1e-9 {
                0.0
            } else {
                catmull_rom(src, t.clamp(0.0, max_t)).max(0.0)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn policy() -> GridPolicy {
        GridPolicy::default()
    }

    #[test]
    fn gaussian_grid_mass_and_variance() {
        let d = AnalyticDensity::gaussian(0.0, 1.0).unwrap();
        let g = discretize(&d, &policy()).unwrap();
        assert!((g.mass() - 1.0).abs() < 1e-8);
        let (mean, var) = g.moments();
        assert!(mean.abs() < 1e-9);
        assert!((var - 1.0).abs() < 1e-6);
        assert!(g.n().is_power_of_two());
    }

    #[test]
    fn uniform_support_exact() {
        let d = AnalyticDensity::uniform(0.0, 1.0).unwrap();
        let g = discretize(&d, &policy()).unwrap();
        assert_eq!(g.lo(), 0.0);
        assert_eq!(g.hi(), 1.0);
        assert!((g.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn laplace_support_covers_tails() {
        // per-side tail mass_tol/2 = 5e-13 ⇒ |endpoint| = ln(1e12) ≥ ln(5e11)
        let d = AnalyticDensity::laplace(0.0, 1.0).unwrap();
        let g = discretize(&d, &policy()).unwrap();
        assert!(g.lo().abs() >= (5e11_f64).ln());
        assert!(g.hi() >= (5e11_f64).ln());
        assert!(d.cdf(g.lo()) <= 1e-12);
        assert!(1.0 - d.cdf(g.hi()) <= 1e-12);
    }

    #[test]
    fn grid_moments_examples() {
        let g = discretize(&AnalyticDensity::gaussian(3.0, 4.0).unwrap(), &policy()).unwrap();
        let (m, v) = g.moments();
        assert!((m - 3.0).abs() < 1e-6);
        assert!((v - 4.0).abs() < 1e-6);

        let u = discretize(&AnalyticDensity::uniform(0.0, 1.0).unwrap(), &policy()).unwrap();
        let (m, v) = u.moments();
        assert!((m - 0.5).abs() < 1e-8);
        assert!((v - 1.0 / 12.0).abs() < 1e-8);

        let mix = AnalyticDensity::gaussian_mixture(vec![
            crate::density::analytic::MixtureComponent { weight: 0.5, mean: -1.0, var: 1.0 },
            crate::density::analytic::MixtureComponent { weight: 0.5, mean: 1.0, var: 1.0 },
        ])
        .unwrap();
        let g = discretize(&mix, &policy()).unwrap();
        let (m, v) = g.moments();
        assert!(m.abs() < 1e-6);
        assert!((v - 2.0).abs() < 1e-6);
    }

    #[test]
    fn captured_mass_at_least_one_minus_tol() {
        for d in [
            AnalyticDensity::gaussian(0.0, 0.25).unwrap(),
            AnalyticDensity::laplace(0.0, 1.0).unwrap(),
            AnalyticDensity::exponential(1.0).unwrap(),
        ] {
            let g = discretize(&d, &policy()).unwrap();
            let captured = d.cdf(g.hi()) - d.cdf(g.lo());
            assert!(captured >= 1.0 - 1e-12, "{}", d.label());
        }
    }

    #[test]
    fn policy_validation() {
        let mut p = GridPolicy::default();
        p.n = 100;
        assert!(p.validate().is_err());
        p.n = 32;
        assert!(p.validate().is_err());
        let mut p = GridPolicy::default();
        p.mass_tol = 0.1;
        assert!(p.validate().is_err());
    }

    #[test]
    fn resample_roundtrip_smooth() {
        let d = AnalyticDensity::gaussian(0.0, 1.0).unwrap();
        let g = discretize(&d, &policy()).unwrap();
        let out = resample_values(g.lo(), g.step(), g.values(), g.lo(), g.step() / 3.0, 3 * (g.n() - 1) + 1);
        for (j, v) in out.iter().enumerate().step_by(97) {
            let x = g.lo() + g.step() / 3.0 * j as f64;
            assert!((v - d.pdf(x)).abs() < 1e-8, "x={x}");
        }
    }
}
