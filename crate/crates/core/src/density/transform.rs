//! Density transformations: scaling, convolution, Gaussian smoothing, and
//! the variance-preserving combination W = √λ·X + √(1−λ)·Y.
//!
//! Convolution is spectral multiplication on zero-padded grids (linear, not
//! circular). Gaussian smoothing runs as a cascade: smooth a little at the
//! current resolution, decimate onto aligned coarser nodes, repeat. Each
//! stage's kernel is wide enough for its grid, so aliasing stays at the
//! 1e-13 level across the whole t range instead of degrading for noise
//! scales far from the source grid step.

use crate::density::analytic::AnalyticDensity;
use crate::density::grid::{
    discretize_max_step, next_pow2, resample_values, trap_sum, GridDensity, GridPolicy,
};
use crate::error::{Error, Result};
use crate::fft::convolve_trapezoid;

/// Density of c·X. Exact node relabeling; no interpolation.
pub fn scale(p: &GridDensity, c: f64) -> Result<GridDensity> {
    if c == 0.0 || !c.is_finite() {
        return Err(Error::DegenerateScale);
    }
    if c == 1.0 {
        return Ok(p.clone());
    }
    let n = p.n();
    let inv = 1.0 / c.abs();
    let values: Vec<f64> = if c > 0.0 {
        p.values().iter().map(|&v| v * inv).collect()
    } else {
        p.values().iter().rev().map(|&v| v * inv).collect()
    };
    let lo = if c > 0.0 { c * p.lo() } else { c * p.hi() };
    let mut out = GridDensity::from_values(
        lo,
        c.abs() * p.step(),
        values,
        p.is_smooth(),
        p.origin().and_then(|o| o.scaled(c)),
    )?;
    debug_assert_eq!(out.n(), n);
    out.set_kinks(
        p.kinks()
            .iter()
            .map(|&k| if c > 0.0 { k } else { n - 1 - k })
            .collect(),
    );
    out.renormalize();
    Ok(out)
}

/// Density of X + Y for independent X ⊥ Y.
///
/// Both inputs are brought to their common (finer) step, convolved by FFT
/// with trapezoid endpoint weights, then decimated back so the output step
/// never exceeds the coarser input's. High ends are zero-padded up to a
/// power-of-two point count.
pub fn convolve(p: &GridDensity, q: &GridDensity, policy: &GridPolicy) -> Result<GridDensity> {
    let h = p.step().min(q.step());
    let fine_n = |g: &GridDensity| -> usize {
        if g.step() == h {
            g.n()
        } else {
            (((g.hi() - g.lo()) / h).floor() as usize) + 1
        }
    };
    let (np, nq) = (fine_n(p), fine_n(q));
    let needed = np + nq - 1;
    if needed > policy.max_n {
        return Err(Error::ResolutionOverflow { required: needed, max: policy.max_n });
    }

    // analytic origins are sampled exactly on the fine lattice; cubic
    // interpolation across a kink would leak an O(step²) bias
    let to_fine = |g: &GridDensity, n: usize| -> Vec<f64> {
        if g.step() == h {
            g.values().to_vec()
        } else if let Some(origin) = g.origin() {
            (0..n).map(|i| origin.pdf(g.lo() + h * i as f64)).collect()
        } else {
            resample_values(g.lo(), g.step(), g.values(), g.lo(), h, n)
        }
    };
    let pv = to_fine(p, np);
    let qv = to_fine(q, nq);

    // kink corrections only apply on the native (unresampled) lattice where
    // kink nodes are exact; analytic resampling leaves mid-cell kinks whose
    // residual bias is O(h_fine²), already negligible
    let pk: Vec<usize> = if p.step() == h { p.kinks().to_vec() } else { Vec::new() };
    let qk: Vec<usize> = if q.step() == h { q.kinks().to_vec() } else { Vec::new() };
    let mut values = convolve_trapezoid(&pv, &qv, h, &pk, &qk);
    let lo = p.lo() + q.lo();
    let mut step = h;

    // decimate to the coarser input's resolution (aligned nodes, no interpolation)
    let target = p.step().max(q.step());
    let k = ((target / h) + 1e-9).floor() as usize;
    if k >= 2 {
        values = values.into_iter().step_by(k).collect();
        step = h * k as f64;
    }

    let n = next_pow2(values.len());
    values.resize(n, 0.0);

    let mut out = GridDensity::from_values(
        lo,
        step,
        values,
        p.is_smooth() || q.is_smooth(),
        convolved_origin(p.origin(), q.origin()),
    )?;
    out.renormalize();
    Ok(out)
}

/// Origin tracking through convolution: Gaussians and Gaussian mixtures are
/// closed under independent addition.
fn convolved_origin(
    a: Option<&AnalyticDensity>,
    b: Option<&AnalyticDensity>,
) -> Option<AnalyticDensity> {
    use crate::density::analytic::MixtureComponent;
    let comps = |d: &AnalyticDensity| -> Option<Vec<MixtureComponent>> {
        match d {
            AnalyticDensity::Gaussian { mean, var } => {
                Some(vec![MixtureComponent { weight: 1.0, mean: *mean, var: *var }])
            }
            AnalyticDensity::GaussianMixture { components } => Some(components.clone()),
            _ => None,
        }
    };
    let ca = comps(a?)?;
    let cb = comps(b?)?;
    if ca.len() * cb.len() > 64 {
        return None;
    }
    let mut out = Vec::with_capacity(ca.len() * cb.len());
    for x in &ca {
        for y in &cb {
            out.push(MixtureComponent {
                weight: x.weight * y.weight,
                mean: x.mean + y.mean,
                var: x.var + y.var,
            });
        }
    }
    if out.len() == 1 {
        AnalyticDensity::gaussian(out[0].mean, out[0].var).ok()
    } else {
        AnalyticDensity::gaussian_mixture(out).ok()
    }
}

/// Gaussian kernel sampled on `step`, truncated at 8.5σ (tail mass ~1e-17).
fn gaussian_kernel(sigma: f64, step: f64) -> (Vec<f64>, usize) {
    let m = ((8.5 * sigma) / step).ceil() as usize;
    let norm = 1.0 / (sigma * crate::density::analytic::SQRT_2PI);
    let values: Vec<f64> = (0..=2 * m)
        .map(|i| {
            let x = (i as f64 - m as f64) * step;
            norm * (-0.5 * x * x / (sigma * sigma)).exp()
        })
        .collect();
    (values, m)
}

/// Raw working state for the smoothing cascade. Kink nodes are consumed by
/// the first convolution stage (its output is smooth).
struct Raw {
    lo: f64,
    step: f64,
    values: Vec<f64>,
    kinks: Vec<usize>,
}

fn conv_kernel(w: Raw, sigma: f64, max_n: usize) -> Result<Raw> {
    let (kernel, m) = gaussian_kernel(sigma, w.step);
    let needed = w.values.len() + 2 * m;
    if needed > max_n {
        return Err(Error::ResolutionOverflow { required: needed, max: max_n });
    }
    let values = convolve_trapezoid(&w.values, &kernel, w.step, &w.kinks, &[]);
    Ok(Raw { lo: w.lo - m as f64 * w.step, step: w.step, values, kinks: Vec::new() })
}

/// Density of X + √t·Z with Z standard normal.
///
/// t = 0 returns the input unchanged. Supports grow by the kernel width at
/// every stage, which keeps more than 6 post-smoothing standard deviations
/// of padding around the smoothed mass.
pub fn gaussian_smooth(p: &GridDensity, t: f64, policy: &GridPolicy) -> Result<GridDensity> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::BadChannelParameter { expected: "finite and ≥ 0", got: t });
    }
    if t == 0.0 {
        return Ok(p.clone());
    }
    let sigma_total = t.sqrt();

    // smoothing below fp noise: density change is O(t·p''), invisible at 1e-16
    if sigma_total < 1e-8 * p.step() {
        return Ok(p.clone());
    }

    // the kernel must be resolvable on the working grid
    let work = if sigma_total < 2.5 * p.step() {
        refine_to_step(p, sigma_total / 2.5, policy)?
    } else {
        p.clone()
    };

    let mut cur = Raw {
        lo: work.lo(),
        step: work.step(),
        values: work.values().to_vec(),
        kinks: work.kinks().to_vec(),
    };
    let mut rem_var = t;
    // final-stage resolution target so score and log quadratures stay sharp
    let h_final = sigma_total / 12.0;

    loop {
        let sigma_rem = rem_var.sqrt();
        if sigma_rem <= 40.0 * cur.step {
            cur = conv_kernel(cur, sigma_rem, policy.max_n)?;
            break;
        }
        let a = 20.0 * cur.step;
        cur = conv_kernel(cur, a, policy.max_n)?;
        rem_var -= a * a;
        let k = ((h_final / cur.step).floor() as usize).clamp(1, 8);
        if k >= 2 {
            cur.values = cur.values.into_iter().step_by(k).collect();
            cur.step *= k as f64;
        }
    }

    let n = next_pow2(cur.values.len());
    cur.values.resize(n, 0.0);

    let origin = match p.origin() {
        Some(AnalyticDensity::Gaussian { mean, var }) => {
            Some(AnalyticDensity::Gaussian { mean: *mean, var: var + t })
        }
        Some(AnalyticDensity::GaussianMixture { components }) => {
            Some(AnalyticDensity::GaussianMixture {
                components: components
                    .iter()
                    .map(|c| crate::density::analytic::MixtureComponent {
                        weight: c.weight,
                        mean: c.mean,
                        var: c.var + t,
                    })
                    .collect(),
            })
        }
        _ => None,
    };

    let mut out = GridDensity::from_values(cur.lo, cur.step, cur.values, true, origin)?;
    out.renormalize();
    Ok(out)
}

/// Rebuild a density on a grid with step ≤ `max_step`: analytic origins are
/// re-discretized exactly, plain grids are cubically upsampled on aligned
/// nodes.
pub(crate) fn refine_to_step(
    p: &GridDensity,
    max_step: f64,
    policy: &GridPolicy,
) -> Result<GridDensity> {
    if p.step() <= max_step {
        return Ok(p.clone());
    }
    if let Some(origin) = p.origin() {
        return discretize_max_step(origin, max_step, policy);
    }
    let k = (p.step() / max_step).ceil() as usize;
    let raw_n = (p.n() - 1) * k + 1;
    let n = next_pow2(raw_n);
    if n > policy.max_n {
        return Err(Error::ResolutionOverflow { required: n, max: policy.max_n });
    }
    let step = p.step() / k as f64;
    let mut values = resample_values(p.lo(), p.step(), p.values(), p.lo(), step, raw_n);
    values.resize(n, 0.0);
    let mut out = GridDensity::from_values(p.lo(), step, values, p.is_smooth(), None)?;
    out.set_kinks(p.kinks().iter().map(|&i| i * k).collect());
    out.renormalize();
    Ok(out)
}

/// Density of W = √λ·X + √(1−λ)·Y for independent X ⊥ Y, λ ∈ [0, 1].
///
/// Endpoints degenerate exactly to one input; otherwise this is literally
/// convolve(scale(p, √λ), scale(q, √(1−λ))).
pub fn combine_vp(
    p: &GridDensity,
    q: &GridDensity,
    lambda: f64,
    policy: &GridPolicy,
) -> Result<GridDensity> {
    if !(0.0..=1.0).contains(&lambda) || !lambda.is_finite() {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    if lambda == 0.0 {
        return Ok(q.clone());
    }
    if lambda == 1.0 {
        return Ok(p.clone());
    }
    let sp = scale(p, lambda.sqrt())?;
    let sq = scale(q, (1.0 - lambda).sqrt())?;
    convolve(&sp, &sq, policy)
}
