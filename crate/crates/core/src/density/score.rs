//! Score function S(x) = p'(x)/p(x) on grid densities.
//!
//! Densities carrying a smooth analytic origin use the exact score formula;
//! smooth grid densities fall back to fourth-order central differences of
//! ln p. Kinked densities (uniform, raw Laplace, exponential) are rejected:
//! their Fisher information diverges and must surface as an error, not a
//! large number. Pre-smoothing with `gaussian_smooth` makes them admissible.

use crate::density::grid::{GridDensity, GridPolicy};
use crate::error::{Error, Result};

/// Score samples on the grid nodes. Points where the density sits below
/// `policy.floor_eps` (and the outermost two nodes of the numeric stencil)
/// report zero; they carry no quadrature weight.
pub fn score(p: &GridDensity, policy: &GridPolicy) -> Result<Vec<f64>> {
    if let Some(origin) = p.origin() {
        if origin.is_smooth() {
            return Ok((0..p.n())
                .map(|i| origin.score(p.x_at(i)).unwrap_or(0.0))
                .collect());
        }
    }
    if !p.is_smooth() {
        return Err(Error::ScoreUndefined);
    }
    numeric_score(p, policy)
}

/// Fourth-order central difference of ln p:
/// S_i ≈ (-L_{i+2} + 8 L_{i+1} - 8 L_{i-1} + L_{i-2}) / (12 h).
/// Exact for log-quadratic (Gaussian) densities.
fn numeric_score(p: &GridDensity, policy: &GridPolicy) -> Result<Vec<f64>> {
    let n = p.n();
    let v = p.values();
    let ln = |x: f64| -> f64 {
        if x >= policy.floor_eps {
            x.ln()
        } else {
            f64::NAN
        }
    };
    let mut out = vec![0.0; n];
    for i in 2..n - 2 {
        if v[i] < policy.floor_eps {
            continue;
        }
        let (lm2, lm1, lp1, lp2) = (ln(v[i - 2]), ln(v[i - 1]), ln(v[i + 1]), ln(v[i + 2]));
        let s = if lm2.is_nan() || lm1.is_nan() || lp1.is_nan() || lp2.is_nan() {
            // neighbor under the floor: drop to a first-order one-sided guess
            match (lm1.is_nan(), lp1.is_nan()) {
                (false, false) => (lp1 - lm1) / (2.0 * p.step()),
                (true, false) => (lp1 - ln(v[i])) / p.step(),
                (false, true) => (ln(v[i]) - lm1) / p.step(),
                (true, true) => 0.0,
            }
        } else {
            (-lp2 + 8.0 * lp1 - 8.0 * lm1 + lm2) / (12.0 * p.step())
        };
        out[i] = s;
    }
    Ok(out)
}

/// E{S(X)} under p-weighted trapezoid quadrature; zero for admissible scores.
pub fn score_mean(p: &GridDensity, policy: &GridPolicy) -> Result<f64> {
    let s = score(p, policy)?;
    Ok(p.quad(|x, pv| {
        let i = ((x - p.lo()) / p.step()).round() as usize;
        if pv >= policy.floor_eps {
            s[i] * pv
        } else {
            0.0
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::analytic::{AnalyticDensity, MixtureComponent};
    use crate::density::grid::discretize;
    use crate::density::transform::gaussian_smooth;

    fn policy() -> GridPolicy {
        GridPolicy::default()
    }

    #[test]
    fn standard_normal_score_is_minus_x() {
        let g = discretize(&AnalyticDensity::gaussian(0.0, 1.0).unwrap(), &policy()).unwrap();
        let s = score(&g, &policy()).unwrap();
        let sup = (0..g.n())
            .filter(|&i| g.x_at(i).abs() <= 5.0)
            .map(|i| (s[i] + g.x_at(i)).abs())
            .fold(0.0, f64::max);
        assert!(sup < 1e-6);
    }

    #[test]
    fn scaled_normal_score() {
        let v = 4.0;
        let g = discretize(&AnalyticDensity::gaussian(0.0, v).unwrap(), &policy()).unwrap();
        let s = score(&g, &policy()).unwrap();
        for i in (0..g.n()).step_by(211) {
            assert!((s[i] + g.x_at(i) / v).abs() < 1e-8);
        }
    }

    #[test]
    fn numeric_score_matches_analytic_on_mixture() {
        let d = AnalyticDensity::gaussian_mixture(vec![
            MixtureComponent { weight: 0.5, mean: -1.0, var: 1.0 },
            MixtureComponent { weight: 0.5, mean: 1.0, var: 1.0 },
        ])
        .unwrap();
        let mut g = discretize(&d, &policy()).unwrap();
        // force the numeric path by dropping the origin
        g.set_origin(None);
        let s = score(&g, &policy()).unwrap();
        let sup = (2..g.n() - 2)
            .filter(|&i| g.values()[i] > 1e-12)
            .map(|i| (s[i] - d.score(g.x_at(i)).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(sup < 1e-6, "sup={sup}");
    }

    #[test]
    fn kinked_densities_rejected_unless_smoothed() {
        let u = discretize(&AnalyticDensity::uniform(0.0, 1.0).unwrap(), &policy()).unwrap();
        assert!(matches!(score(&u, &policy()), Err(Error::ScoreUndefined)));
        let lap = discretize(&AnalyticDensity::laplace(0.0, 1.0).unwrap(), &policy()).unwrap();
        assert!(matches!(score(&lap, &policy()), Err(Error::ScoreUndefined)));

        let smoothed = gaussian_smooth(&u, 0.01, &policy()).unwrap();
        assert!(score(&smoothed, &policy()).is_ok());
    }

    #[test]
    fn score_zero_mean() {
        for g in [
            discretize(&AnalyticDensity::gaussian(0.3, 2.0).unwrap(), &policy()).unwrap(),
            gaussian_smooth(
                &discretize(&AnalyticDensity::uniform(0.0, 1.0).unwrap(), &policy()).unwrap(),
                0.5,
                &policy(),
            )
            .unwrap(),
        ] {
            assert!(score_mean(&g, &policy()).unwrap().abs() < 1e-5);
        }
    }
}
