//! Numerical verification of the equalities relating entropy, Fisher
//! information, and MMSE: the complementary relation, Blachman's conditional
//! mean representation, the law-of-total-variance step, de Bruijn's identity
//! and its I-MMSE dual, the two integral representations of differential
//! entropy, and the coincidence of the FI and MMSE non-Gaussianness
//! deficits.
//!
//! Every check produces a [`Residual`] carrying both sides, the tolerance it
//! was judged against, and method metadata (grid sizes, derivative steps,
//! integration ranges) so a failure is diagnosable without rerunning.

use crate::density::grid::{GridDensity, GridPolicy};
use crate::density::score::score;
use crate::density::transform::gaussian_smooth;
use crate::error::{Error, Result};
use crate::functionals::{
    cond_var_additive, entropy_floored, fisher_information, mi_signal, mmse_signal,
};
use serde::{Deserialize, Serialize};

/// A signed discrepancy of one identity at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tol: f64,
    pub method: String,
    pub passed: bool,
}

impl Residual {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64, method: String) -> Residual {
        let residual = lhs - rhs;
        Residual {
            name: name.into(),
            lhs,
            rhs,
            residual,
            tol,
            method,
            passed: residual.abs() <= tol,
        }
    }
}

/// Outcome of a check whose improper-integral tail may be too large to
/// judge: inconclusive is distinct from failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RepOutcome {
    Conclusive(Residual),
    Inconclusive {
        name: String,
        tail_estimate: f64,
        tail_uncertainty: f64,
        tol: f64,
        method: String,
    },
}

fn grid_meta(p: &GridDensity, policy: &GridPolicy) -> String {
    format!(
        "n={}, step={:.3e}, floor_eps={:.1e}, floored_mass={:.1e}",
        p.n(),
        p.step(),
        policy.floor_eps,
        p.floored_mass(policy.floor_eps)
    )
}

/// Complementary relation for standard Gaussian perturbation:
/// J(X + Z) + Var(X | X + Z) = 1.
pub fn complementary(p: &GridDensity, policy: &GridPolicy, tol: f64) -> Result<Residual> {
    let mut r = complementary_general(p, 1.0, policy, tol)?;
    r.name = "complementary".to_string();
    Ok(r)
}

/// Generalized complementary relation for Z ~ N(0, vz):
/// Var(Z)·J(X + Z) + J(Z)·Var(X | X + Z) = 1.
pub fn complementary_general(
    p: &GridDensity,
    vz: f64,
    policy: &GridPolicy,
    tol: f64,
) -> Result<Residual> {
    if !(vz > 0.0) {
        return Err(Error::invalid("vz", "noise variance must be > 0"));
    }
    let smoothed = gaussian_smooth(p, vz, policy)?;
    let j = fisher_information(&smoothed, policy)?;
    let cv = cond_var_additive(p, vz, policy)?;
    let lhs = vz * j + (1.0 / vz) * cv;
    Ok(Residual::new(
        "complementary_general",
        lhs,
        1.0,
        tol,
        format!("vz={vz}, J-grid: {}; {}", grid_meta(&smoothed, policy), grid_meta(p, policy)),
    ))
}

/// Blachman's representation at probe points w:
/// S(X + Z)(w) = E{S(Z) | X + Z = w} = −E{Z | X + Z = w}, Z ~ N(0, 1).
///
/// The left side interpolates the score of the smoothed density. The right
/// side evaluates the conditional mean of the noise through the posterior
/// over x on the prior's grid (E{Z | w} = w − E{X | w}; the posterior of Z
/// at w is the reflection of the posterior of X), which keeps support
/// endpoints and kink nodes exactly on quadrature nodes. The residual is
/// the sup over probes; probes with underflowing posterior mass are skipped
/// and recorded in the method string.
pub fn blachman(
    p: &GridDensity,
    probes: &[f64],
    policy: &GridPolicy,
    tol: f64,
) -> Result<Residual> {
    let smoothed = gaussian_smooth(p, 1.0, policy)?;
    let s = score(&smoothed, policy)?;
    let score_at = |w: f64| -> Option<f64> {
        let t = (w - smoothed.lo()) / smoothed.step();
        if t < 2.0 || t > (smoothed.n() - 3) as f64 {
            return None;
        }
        Some(crate::density::grid::catmull_rom(&s, t))
    };

    let mut sup: Option<(f64, f64, f64)> = None;
    let mut skipped = Vec::new();
    for &w in probes {
        let num = p.quad(|x, pv| {
            let d = w - x;
            x * pv * (-0.5 * d * d).exp()
        });
        let den = p.quad(|x, pv| {
            let d = w - x;
            pv * (-0.5 * d * d).exp()
        });
        let lhs = score_at(w);
        if den < 1e-290 || lhs.is_none() {
            skipped.push(w);
            continue;
        }
        // E{S(Z) | w} = −E{Z | w} = E{X | w} − w
        let rhs = num / den - w;
        let lhs = lhs.unwrap();
        if sup.is_none() || (lhs - rhs).abs() > sup.unwrap().0 {
            sup = Some(((lhs - rhs).abs(), lhs, rhs));
        }
    }
    let (_, lhs, rhs) = sup.ok_or(Error::OutOfSupportObservation {
        y: probes.first().copied().unwrap_or(f64::NAN),
    })?;
    Ok(Residual::new(
        "blachman",
        lhs,
        rhs,
        tol,
        format!(
            "sup over {} probes (skipped: {:?}), noise posterior by reflection; {}",
            probes.len() - skipped.len(),
            skipped,
            grid_meta(&smoothed, policy)
        ),
    ))
}

/// Law-of-total-variance step for standard Gaussian Z:
/// J(X + Z) = J(Z) − Var{S(Z) | X + Z} = 1 − Var{Z | X + Z}.
///
/// Var{Z | X + Z = w} equals Var{X | X + Z = w} pointwise (z = w − x is a
/// reflection of the posterior), so the conditional-variance machinery is
/// shared with the complementary relation by that substitution.
pub fn total_variance_step(p: &GridDensity, policy: &GridPolicy, tol: f64) -> Result<Residual> {
    let smoothed = gaussian_smooth(p, 1.0, policy)?;
    let j = fisher_information(&smoothed, policy)?;
    let var_z_given_w = cond_var_additive(p, 1.0, policy)?;
    Ok(Residual::new(
        "total_variance",
        j,
        1.0 - var_z_given_w,
        tol,
        format!("Var(Z|X+Z) via posterior reflection; {}", grid_meta(&smoothed, policy)),
    ))
}

/// Derivative step sizes: dt = max(1e−4, t·1e−3), Richardson-extrapolated
/// once. Rejects t too small for the step.
fn derivative_step(t: f64) -> Result<f64> {
    let dt = (t * 1e-3).max(1e-4);
    if dt > t / 2.0 {
        return Err(Error::DtTooLarge { dt, t });
    }
    Ok(dt)
}

fn richardson<F: FnMut(f64) -> Result<f64>>(t: f64, dt: f64, mut f: F) -> Result<f64> {
    let d1 = (f(t + dt)? - f(t - dt)?) / (2.0 * dt);
    let half = dt / 2.0;
    let d2 = (f(t + half)? - f(t - half)?) / (2.0 * half);
    Ok((4.0 * d2 - d1) / 3.0)
}

/// De Bruijn's identity for Gaussian Z ~ N(0, vz):
/// d/dt h(X + √t·Z) = ½·J(X + √t·Z)·Var(Z).
pub fn debruijn_direct(
    p: &GridDensity,
    t: f64,
    vz: f64,
    policy: &GridPolicy,
    tol: f64,
) -> Result<Residual> {
    if !(t > 0.0) || !(vz > 0.0) {
        return Err(Error::BadChannelParameter { expected: "t > 0 and vz > 0", got: t.min(vz) });
    }
    let dt = derivative_step(t)?;
    let lhs = richardson(t, dt, |u| {
        Ok(entropy_floored(&gaussian_smooth(p, u * vz, policy)?, policy.floor_eps))
    })?;
    let smoothed = gaussian_smooth(p, t * vz, policy)?;
    let rhs = 0.5 * fisher_information(&smoothed, policy)? * vz;
    Ok(Residual::new(
        "debruijn",
        lhs,
        rhs,
        tol,
        format!("t={t}, vz={vz}, dt={dt:.3e} (Richardson once); {}", grid_meta(&smoothed, policy)),
    ))
}

/// The I-MMSE derivative identity (the dual form of de Bruijn):
/// d/dt I(X; √t·X + Z) = ½·Var(X | √t·X + Z).
pub fn i_mmse_identity(
    p: &GridDensity,
    t: f64,
    policy: &GridPolicy,
    tol: f64,
) -> Result<Residual> {
    if !(t > 0.0) {
        return Err(Error::BadChannelParameter { expected: "finite and > 0", got: t });
    }
    let dt = derivative_step(t)?;
    let lhs = richardson(t, dt, |u| mi_signal(p, u, policy))?;
    let rhs = 0.5 * mmse_signal(p, t, policy)?;
    Ok(Residual::new(
        "i_mmse",
        lhs,
        rhs,
        tol,
        format!("t={t}, dt={dt:.3e} (Richardson once); {}", grid_meta(p, policy)),
    ))
}

/// FI and MMSE non-Gaussianness deficits coincide after a standard Gaussian
/// perturbation: D_J(X + Z) = D_V(X | X + Z).
pub fn deficit_coincidence(p: &GridDensity, policy: &GridPolicy, tol: f64) -> Result<Residual> {
    let var = p.moments().1;
    let smoothed = gaussian_smooth(p, 1.0, policy)?;
    let d_j = fisher_information(&smoothed, policy)? - 1.0 / (var + 1.0);
    let d_v = var / (var + 1.0) - cond_var_additive(p, 1.0, policy)?;
    Ok(Residual::new(
        "deficit_coincidence",
        d_j,
        d_v,
        tol,
        format!("sigma2=Var(X)={var:.6e}; {}", grid_meta(&smoothed, policy)),
    ))
}

/// Shared frame for the two integral representations of differential
/// entropy. The improper t-integral is evaluated by the midpoint rule on
/// the doubly-graded substitution t = σ²·(exp(v²) − 1) (dense near 0,
/// logarithmic towards t_max), and the tail beyond t_max is estimated by
/// fitting c₁·t^{−3/2} + c₂·t^{−2} + c₃·t^{−5/2} to the last quadrature
/// samples. The t^{−3/2} term is required for densities with jump
/// discontinuities, whose smoothed Fisher information diverges like
/// t^{−1/2}; the t^{−5/2} term is the next-order correction and its tail
/// contribution (plus the observed fit scatter) is reported as the tail
/// uncertainty.
struct TailFit {
    estimate: f64,
    uncertainty: f64,
}

fn fit_tail(samples: &[(f64, f64)], t_max: f64) -> TailFit {
    let basis = |t: f64| [t.powf(-1.5), t.powi(-2), t.powf(-2.5)];
    let mut a = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for &(t, g) in samples {
        let f = basis(t);
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += f[i] * f[j];
            }
            b[i] += f[i] * g;
        }
    }
    // 3×3 Gaussian elimination with partial pivoting
    let mut c = [0.0; 3];
    let mut m = a;
    let mut rhs = b;
    let mut singular = false;
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        if m[piv][col].abs() < 1e-300 {
            singular = true;
            break;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for j in col..3 {
                m[row][j] -= f * m[col][j];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    if !singular {
        for col in (0..3).rev() {
            let mut acc = rhs[col];
            for j in col + 1..3 {
                acc -= m[col][j] * c[j];
            }
            c[col] = acc / m[col][col];
        }
    }
    let rms = (samples
        .iter()
        .map(|&(t, g)| {
            let f = basis(t);
            let fit = c[0] * f[0] + c[1] * f[1] + c[2] * f[2];
            (g - fit) * (g - fit)
        })
        .sum::<f64>()
        / samples.len() as f64)
        .sqrt();
    // ∫_{t_max}^∞ of each basis term
    let tails = [
        2.0 / t_max.sqrt(),
        1.0 / t_max,
        2.0 / (3.0 * t_max.powf(1.5)),
    ];
    let estimate = c[0] * tails[0] + c[1] * tails[1] + c[2] * tails[2];
    // the next-order basis contribution bounds the extrapolation bias; the
    // scatter term propagates fit noise as if it decayed like the slowest mode
    let uncertainty = 3.0 * (c[2] * tails[2]).abs() + 4.0 * rms * t_max * tails[0] + 1e-9;
    TailFit { estimate, uncertainty }
}

fn integrate_graded<F: FnMut(f64) -> Result<f64>>(
    sigma2: f64,
    t_max: f64,
    n_points: usize,
    mut integrand: F,
) -> Result<(f64, TailFit)> {
    let v_max = (1.0 + t_max / sigma2).ln().sqrt();
    let hv = v_max / n_points as f64;
    let mut acc = 0.0;
    let mut tail_samples: Vec<(f64, f64)> = Vec::new();
    let tail_window = 12.min(n_points / 4);
    for k in 0..n_points {
        let v = hv * (k as f64 + 0.5);
        let ev = (v * v).exp();
        let t = sigma2 * (ev - 1.0);
        let g = integrand(t)?;
        acc += g * sigma2 * ev * 2.0 * v * hv;
        if k >= n_points - tail_window {
            tail_samples.push((t, g));
        }
    }
    Ok((acc, fit_tail(&tail_samples, t_max)))
}

const REP_POINTS: usize = 112;

/// FI integral representation of differential entropy:
/// h(X) = ½·ln(2πe·σ²) − ½·∫₀^∞ [J(X + √t·Z) − 1/(σ² + t)] dt,
/// verified against the direct quadrature entropy. σ² is any positive
/// reference variance; the right-hand side does not depend on it.
pub fn fi_representation(
    p: &GridDensity,
    sigma2_ref: f64,
    t_max: f64,
    policy: &GridPolicy,
    tol: f64,
) -> Result<RepOutcome> {
    rep_common(p, sigma2_ref, t_max, policy, tol, "fi_representation", &mut |t| {
        let smoothed = gaussian_smooth(p, t, policy)?;
        Ok(fisher_information(&smoothed, policy)? - 1.0 / (sigma2_ref + t))
    })
}

/// MMSE integral representation of differential entropy:
/// h(X) = ½·ln(2πe·σ²) − ½·∫₀^∞ [σ²/(1 + t·σ²) − Var(X | √t·X + Z)] dt.
pub fn mmse_representation(
    p: &GridDensity,
    sigma2_ref: f64,
    t_max: f64,
    policy: &GridPolicy,
    tol: f64,
) -> Result<RepOutcome> {
    rep_common(p, sigma2_ref, t_max, policy, tol, "mmse_representation", &mut |t| {
        Ok(sigma2_ref / (1.0 + t * sigma2_ref) - mmse_signal(p, t, policy)?)
    })
}

fn rep_common(
    p: &GridDensity,
    sigma2_ref: f64,
    t_max: f64,
    policy: &GridPolicy,
    tol: f64,
    name: &str,
    integrand: &mut dyn FnMut(f64) -> Result<f64>,
) -> Result<RepOutcome> {
    if !(sigma2_ref > 0.0) {
        return Err(Error::invalid("sigma2_ref", "must be > 0"));
    }
    if !(t_max > 1.0) {
        return Err(Error::invalid("t_max", "must be > 1"));
    }
    let (integral, tail) = integrate_graded(sigma2_ref, t_max, REP_POINTS, integrand)?;
    let method = format!(
        "graded midpoint t=sigma2(e^(v^2)-1), {REP_POINTS} points, t_max={t_max:.1e}, \
         tail_est={:.3e}, tail_unc={:.3e}, sigma2_ref={sigma2_ref:.6e}; {}",
        tail.estimate,
        tail.uncertainty,
        grid_meta(p, policy)
    );
    if tail.uncertainty > tol {
        return Ok(RepOutcome::Inconclusive {
            name: name.to_string(),
            tail_estimate: tail.estimate,
            tail_uncertainty: tail.uncertainty,
            tol,
            method,
        });
    }
    let h_quad = entropy_floored(p, policy.floor_eps);
    let rhs = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * sigma2_ref).ln()
        - 0.5 * (integral + tail.estimate);
    Ok(RepOutcome::Conclusive(Residual::new(name, h_quad, rhs, tol, method)))
}
