//! Run configuration, the check runner, and machine-readable reports.
//!
//! A [`RunConfig`] (human-writable TOML) names the test distributions, the
//! (λ, t) grids, per-check tolerances, and the check selection. [`run`]
//! executes every selected check over the grids and assembles a [`Report`]
//! whose entries carry full method metadata; [`sweep_csv`] renders the same
//! entries as one CSV row per (check, pair, λ, t). Reports are byte-stable:
//! entries are sorted by key before emission and no wall-clock data is
//! recorded unless explicitly requested.

use crate::density::analytic::AnalyticDensity;
use crate::density::grid::{discretize, GridDensity, GridPolicy};
use crate::density::transform::gaussian_smooth;
use crate::error::Result as CoreResult;
use crate::functionals::ChannelPoint;
use crate::identities::{self, RepOutcome, Residual};
use crate::inequalities::{self, DiscretePmf, SlackReport};
use crate::oracles::McConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Mutex;

pub const SCHEMA_VERSION: u32 = 1;

/// Full list of check names, in the order they are reported.
pub const ALL_CHECKS: &[&str] = &[
    "complementary",
    "complementary_general",
    "blachman",
    "total_variance",
    "debruijn",
    "i_mmse",
    "fi_representation",
    "mmse_representation",
    "deficit_coincidence",
    "epi",
    "epi_concave",
    "mi_convexity",
    "convexity_gap",
    "fisher_info_ineq",
    "fi_convexity",
    "mmse_convexity",
    "fi_convexity_smoothed",
    "discrete_epi",
    "epi_limit",
    "mc_entropy",
    "mc_mmse",
];

/// Default tolerance per check; all overridable from the config.
pub fn default_tolerances() -> BTreeMap<String, f64> {
    [
        ("complementary", 1e-4),
        ("complementary_general", 1e-4),
        ("blachman", 1e-4),
        ("total_variance", 1e-4),
        ("debruijn", 1e-5),
        ("i_mmse", 1e-5),
        ("fi_representation", 1e-3),
        ("mmse_representation", 1e-3),
        ("deficit_coincidence", 2e-4),
        ("epi", 1e-4),
        ("epi_concave", 1e-4),
        ("mi_convexity", 1e-4),
        ("convexity_gap", 1e-4),
        ("fisher_info_ineq", 1e-4),
        ("fi_convexity", 1e-4),
        ("mmse_convexity", 1e-4),
        ("fi_convexity_smoothed", 1e-4),
        ("discrete_epi", 1e-9),
        ("epi_limit", 1e-5),
        ("mc_entropy", 3.0),
        ("mc_mmse", 3.0),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// The t grid: explicit list or geometric progression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TGridSpec {
    Explicit(Vec<f64>),
    Geometric { lo: f64, hi: f64, points: usize },
}

impl TGridSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            TGridSpec::Explicit(v) => v.clone(),
            TGridSpec::Geometric { lo, hi, points } => {
                if *points == 1 {
                    return vec![*lo];
                }
                let ratio = (hi / lo).ln() / (*points as f64 - 1.0);
                (0..*points).map(|k| lo * (ratio * k as f64).exp()).collect()
            }
        }
    }
}

fn default_lambda_grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

fn default_t_grid() -> TGridSpec {
    TGridSpec::Geometric { lo: 1e-3, hi: 1e4, points: 9 }
}

fn default_checks() -> Vec<String> {
    vec!["all".to_string()]
}

fn default_mc_samples() -> usize {
    1_000_000
}

/// One run of the suite: distributions, grids, tolerances, check selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridPolicy,
    pub distributions: Vec<AnalyticDensity>,
    #[serde(default = "default_lambda_grid")]
    pub lambda_grid: Vec<f64>,
    #[serde(default = "default_t_grid")]
    pub t_grid: TGridSpec,
    #[serde(default = "default_tolerances")]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default = "default_checks")]
    pub checks: Vec<String>,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
}

/// A config problem, with the offending field path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error at `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    /// The default full suite over the five test families.
    pub fn default_suite() -> RunConfig {
        use crate::density::analytic::MixtureComponent;
        RunConfig {
            seed: 20240601,
            grid: GridPolicy::default(),
            distributions: vec![
                AnalyticDensity::Gaussian { mean: 0.0, var: 1.0 },
                AnalyticDensity::Uniform { lo: 0.0, hi: 1.0 },
                AnalyticDensity::Laplace { loc: 0.0, scale: 1.0 },
                AnalyticDensity::Exponential { scale: 1.0 },
                AnalyticDensity::GaussianMixture {
                    components: vec![
                        MixtureComponent { weight: 0.5, mean: -1.0, var: 1.0 },
                        MixtureComponent { weight: 0.5, mean: 1.0, var: 1.0 },
                    ],
                },
            ],
            lambda_grid: default_lambda_grid(),
            t_grid: default_t_grid(),
            tolerances: default_tolerances(),
            checks: default_checks(),
            mc_samples: default_mc_samples(),
        }
    }

    pub fn from_toml(text: &str) -> Result<RunConfig, ConfigError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| ConfigError {
            field: e
                .span()
                .map(|s| format!("offset {}..{}", s.start, s.end))
                .unwrap_or_else(|| "<root>".to_string()),
            message: e.message().to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |field: &str, message: String| Err(ConfigError { field: field.to_string(), message });
        if let Err(e) = self.grid.validate() {
            return err("grid", e.to_string());
        }
        if self.distributions.is_empty() {
            return err("distributions", "need at least one distribution".to_string());
        }
        for (i, d) in self.distributions.iter().enumerate() {
            if let Err(e) = validate_density(d) {
                return err(&format!("distributions[{i}]"), e.to_string());
            }
        }
        if self.lambda_grid.is_empty() {
            return err("lambda_grid", "must be non-empty".to_string());
        }
        for (i, &l) in self.lambda_grid.iter().enumerate() {
            if !(0.0..=1.0).contains(&l) {
                return err(&format!("lambda_grid[{i}]"), format!("λ = {l} outside [0, 1]"));
            }
        }
        let ts = self.t_grid.values();
        if ts.is_empty() {
            return err("t_grid", "must be non-empty".to_string());
        }
        for (i, &t) in ts.iter().enumerate() {
            if !(t >= 0.0) || !t.is_finite() {
                return err(&format!("t_grid[{i}]"), format!("t = {t} must be finite and ≥ 0"));
            }
        }
        for (name, &tol) in &self.tolerances {
            if !(tol > 0.0) {
                return err(&format!("tolerances.{name}"), format!("tolerance {tol} must be > 0"));
            }
        }
        for (i, c) in self.checks.iter().enumerate() {
            if c != "all" && !ALL_CHECKS.contains(&c.as_str()) {
                return err(
                    &format!("checks[{i}]"),
                    format!("unknown check `{c}`; known: all, {}", ALL_CHECKS.join(", ")),
                );
            }
        }
        if self.mc_samples < 10_000 {
            return err("mc_samples", "need at least 1e4 samples for acceptance-grade checks".to_string());
        }
        Ok(())
    }

    fn selected(&self) -> Vec<&'static str> {
        if self.checks.iter().any(|c| c == "all") {
            ALL_CHECKS.to_vec()
        } else {
            ALL_CHECKS
                .iter()
                .copied()
                .filter(|c| self.checks.iter().any(|s| s == c))
                .collect()
        }
    }

    fn tol(&self, check: &str) -> f64 {
        self.tolerances
            .get(check)
            .copied()
            .unwrap_or_else(|| default_tolerances().get(check).copied().unwrap_or(1e-4))
    }
}

fn validate_density(d: &AnalyticDensity) -> CoreResult<()> {
    match d {
        AnalyticDensity::Gaussian { mean, var } => {
            AnalyticDensity::gaussian(*mean, *var).map(|_| ())
        }
        AnalyticDensity::Uniform { lo, hi } => AnalyticDensity::uniform(*lo, *hi).map(|_| ()),
        AnalyticDensity::Laplace { loc, scale } => {
            AnalyticDensity::laplace(*loc, *scale).map(|_| ())
        }
        AnalyticDensity::Exponential { scale } => {
            AnalyticDensity::exponential(*scale).map(|_| ())
        }
        AnalyticDensity::GaussianMixture { components } => {
            AnalyticDensity::gaussian_mixture(components.clone()).map(|_| ())
        }
    }
}

/// One reported check outcome at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub check: String,
    pub family_x: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub family_y: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lhs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equality_expected: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
    Error,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
            Status::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: RunConfig,
    pub entries: Vec<Entry>,
    pub summary: Summary,
    pub meta: Meta,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Report> {
        serde_json::from_str(text)
    }

    /// Exit status semantics: 0 all-pass (inconclusive allowed), 1 any
    /// failure or per-check error.
    pub fn exit_code(&self) -> i32 {
        if self.summary.failed == 0 && self.summary.errors == 0 {
            0
        } else {
            1
        }
    }
}

struct EntryBuilder {
    check: &'static str,
    family_x: String,
    family_y: String,
    lambda: Option<f64>,
    t: Option<f64>,
}

impl EntryBuilder {
    fn new(check: &'static str, fx: &str) -> EntryBuilder {
        EntryBuilder {
            check,
            family_x: fx.to_string(),
            family_y: String::new(),
            lambda: None,
            t: None,
        }
    }

    fn pair(mut self, fy: &str) -> EntryBuilder {
        self.family_y = fy.to_string();
        self
    }

    fn lambda(mut self, l: f64) -> EntryBuilder {
        self.lambda = Some(l);
        self
    }

    fn t(mut self, t: f64) -> EntryBuilder {
        self.t = Some(t);
        self
    }

    fn base(&self) -> Entry {
        Entry {
            check: self.check.to_string(),
            family_x: self.family_x.clone(),
            family_y: self.family_y.clone(),
            lambda: self.lambda,
            t: self.t,
            status: Status::Error,
            value: None,
            tol: None,
            lhs: None,
            rhs: None,
            equality_expected: None,
            detail: None,
        }
    }

    fn residual(self, r: CoreResult<Residual>) -> Entry {
        let mut e = self.base();
        match r {
            Ok(res) => {
                e.status = if res.passed { Status::Pass } else { Status::Fail };
                e.value = Some(res.residual);
                e.tol = Some(res.tol);
                e.lhs = Some(res.lhs);
                e.rhs = Some(res.rhs);
                e.detail = Some(res.method);
            }
            Err(err) => e.detail = Some(err.to_string()),
        }
        e
    }

    fn slack(self, r: CoreResult<SlackReport>) -> Entry {
        let mut e = self.base();
        match r {
            Ok(s) => {
                e.status = if s.passed { Status::Pass } else { Status::Fail };
                e.value = Some(s.slack);
                e.tol = Some(s.tol);
                e.equality_expected = Some(s.equality_expected);
                if let Some(pt) = s.point {
                    e.lambda = Some(pt.lambda);
                    e.t = Some(pt.t);
                }
            }
            Err(err) => e.detail = Some(err.to_string()),
        }
        e
    }

    fn rep(self, r: CoreResult<RepOutcome>) -> Entry {
        let mut e = self.base();
        match r {
            Ok(RepOutcome::Conclusive(res)) => {
                e.status = if res.passed { Status::Pass } else { Status::Fail };
                e.value = Some(res.residual);
                e.tol = Some(res.tol);
                e.lhs = Some(res.lhs);
                e.rhs = Some(res.rhs);
                e.detail = Some(res.method);
            }
            Ok(RepOutcome::Inconclusive { tail_estimate, tail_uncertainty, tol, method, .. }) => {
                e.status = Status::Inconclusive;
                e.tol = Some(tol);
                e.detail = Some(format!(
                    "tail estimate {tail_estimate:.3e} has uncertainty {tail_uncertainty:.3e} above tol; {method}"
                ));
            }
            Err(err) => e.detail = Some(err.to_string()),
        }
        e
    }
}

/// Shared state for one run: discretized densities plus a cache of
/// pre-smoothed variants for the score-based checks.
struct Ctx {
    policy: GridPolicy,
    labels: Vec<String>,
    dens: Vec<GridDensity>,
    /// Lightly smoothed versions (t = 0.01), used where raw scores are
    /// undefined; kinked families enter the J-based checks through these.
    smoothed: Vec<GridDensity>,
}

impl Ctx {
    fn smoothed_label(&self, i: usize) -> String {
        if self.dens[i].is_smooth() {
            self.labels[i].clone()
        } else {
            format!("{}+0.1z", self.labels[i])
        }
    }
}

fn family_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            out.push((i, j));
        }
    }
    out
}

/// Run the selected checks and assemble the report. Work items execute in
/// parallel on the current rayon pool; entries are sorted by
/// (check, families, λ, t) before assembly, so the report is deterministic
/// for a fixed config regardless of thread count.
pub fn run(config: &RunConfig) -> Result<Report, ConfigError> {
    config.validate()?;
    let policy = config.grid.clone();
    let mut dens = Vec::new();
    let mut smoothed = Vec::new();
    let mut labels = Vec::new();
    for d in &config.distributions {
        let g = discretize(d, &policy).map_err(|e| ConfigError {
            field: "distributions".to_string(),
            message: e.to_string(),
        })?;
        let s = if g.is_smooth() {
            g.clone()
        } else {
            gaussian_smooth(&g, 0.01, &policy).map_err(|e| ConfigError {
                field: "distributions".to_string(),
                message: e.to_string(),
            })?
        };
        labels.push(d.label());
        dens.push(g);
        smoothed.push(s);
    }
    let ctx = Ctx { policy, labels, dens, smoothed };

    type Job = Box<dyn Fn(&Ctx) -> Vec<Entry> + Send + Sync>;
    let mut jobs: Vec<Job> = Vec::new();
    let ts = config.t_grid.values();
    let n = ctx.dens.len();
    let pairs = family_pairs(n);
    let derivative_ts: Vec<f64> = vec![0.1, 0.5, 1.0, 5.0];
    let vz_grid = [0.5, 1.0, 2.0];

    for check in config.selected() {
        let tol = config.tol(check);
        match check {
            "complementary" => {
                for i in 0..n {
                    jobs.push(Box::new(move |c| {
                        vec![EntryBuilder::new("complementary", &c.labels[i])
                            .residual(identities::complementary(&c.dens[i], &c.policy, tol))]
                    }));
                }
            }
            "complementary_general" => {
                for i in 0..n {
                    for vz in vz_grid {
                        jobs.push(Box::new(move |c| {
                            vec![EntryBuilder::new("complementary_general", &c.labels[i])
                                .t(vz)
                                .residual(identities::complementary_general(
                                    &c.dens[i], vz, &c.policy, tol,
                                ))]
                        }));
                    }
                }
            }
            "blachman" => {
                for i in 0..n {
                    jobs.push(Box::new(move |c| {
                        let (m, _) = c.dens[i].moments();
                        let probes = [m - 2.0, m - 1.0, m, m + 0.5, m + 1.0, m + 2.0];
                        vec![EntryBuilder::new("blachman", &c.labels[i])
                            .residual(identities::blachman(&c.dens[i], &probes, &c.policy, tol))]
                    }));
                }
            }
            "total_variance" => {
                for i in 0..n {
                    jobs.push(Box::new(move |c| {
                        vec![EntryBuilder::new("total_variance", &c.labels[i])
                            .residual(identities::total_variance_step(&c.dens[i], &c.policy, tol))]
                    }));
                }
            }
            "debruijn" => {
                for i in 0..n {
                    for &t in &derivative_ts {
                        for vz in [1.0, 2.0] {
                            jobs.push(Box::new(move |c| {
                                vec![EntryBuilder::new("debruijn", &c.labels[i])
                                    .lambda(vz)
                                    .t(t)
                                    .residual(identities::debruijn_direct(
                                        &c.dens[i], t, vz, &c.policy, tol,
                                    ))]
                            }));
                        }
                    }
                }
            }
            "i_mmse" => {
                for i in 0..n {
                    for &t in &derivative_ts {
                        jobs.push(Box::new(move |c| {
                            vec![EntryBuilder::new("i_mmse", &c.labels[i]).t(t).residual(
                                identities::i_mmse_identity(&c.dens[i], t, &c.policy, tol),
                            )]
                        }));
                    }
                }
            }
            "fi_representation" | "mmse_representation" => {
                let is_fi = check == "fi_representation";
                for i in 0..n {
                    for mult in [1.0, 2.0] {
                        jobs.push(Box::new(move |c| {
                            let var = c.dens[i].moments().1;
                            let sigma2 = mult * var;
                            let (name, t_max): (&'static str, f64) = if is_fi {
                                ("fi_representation", if mult == 1.0 { 100.0 } else { 400.0 })
                            } else {
                                ("mmse_representation", 1e4)
                            };
                            let outcome = if is_fi {
                                identities::fi_representation(&c.dens[i], sigma2, t_max, &c.policy, tol)
                            } else {
                                identities::mmse_representation(&c.dens[i], sigma2, t_max, &c.policy, tol)
                            };
                            vec![EntryBuilder::new(name, &c.labels[i]).lambda(mult).rep(outcome)]
                        }));
                    }
                }
            }
            "deficit_coincidence" => {
                for i in 0..n {
                    jobs.push(Box::new(move |c| {
                        vec![EntryBuilder::new("deficit_coincidence", &c.labels[i])
                            .residual(identities::deficit_coincidence(&c.dens[i], &c.policy, tol))]
                    }));
                }
            }
            "epi" => {
                for &(i, j) in &pairs {
                    jobs.push(Box::new(move |c| {
                        vec![EntryBuilder::new("epi", &c.labels[i])
                            .pair(&c.labels[j])
                            .slack(inequalities::epi_slack(&c.dens[i], &c.dens[j], &c.policy, tol))]
                    }));
                }
            }
            "epi_concave" => {
                for &(i, j) in &pairs {
                    for &l in &config.lambda_grid {
                        jobs.push(Box::new(move |c| {
                            vec![EntryBuilder::new("epi_concave", &c.labels[i])
                                .pair(&c.labels[j])
                                .slack(inequalities::epi_concave_slack(
                                    &c.dens[i], &c.dens[j], l, &c.policy, tol,
                                ))]
                        }));
                    }
                }
            }
            "mi_convexity" => {
                for &(i, j) in &pairs {
                    for &l in &config.lambda_grid {
                        jobs.push(Box::new(move |c| {
                            let ts = vec![0.0, 0.1, 1.0, 10.0];
                            ts.into_iter()
                                .map(|t| {
                                    let pt = ChannelPoint::new(l, t).expect("validated grid");
                                    EntryBuilder::new("mi_convexity", &c.labels[i])
                                        .pair(&c.labels[j])
                                        .slack(inequalities::mi_convexity_slack(
                                            &c.dens[i], &c.dens[j], pt, &c.policy, tol,
                                        ))
                                })
                                .collect()
                        }));
                    }
                }
            }
            "convexity_gap" => {
                let ts = ts.clone();
                for &(i, j) in &pairs {
                    for &l in &[0.3, 0.5, 0.7] {
                        let ts = ts.clone();
                        jobs.push(Box::new(move |c| {
                            match inequalities::convexity_gap(&c.dens[i], &c.dens[j], l, &ts, &c.policy)
                            {
                                Ok(rows) => {
                                    let mut entries = Vec::new();
                                    let mut prev = f64::INFINITY;
                                    for (t, f) in rows {
                                        let mut e = EntryBuilder::new("convexity_gap", &c.labels[i])
                                            .pair(&c.labels[j])
                                            .lambda(l)
                                            .t(t)
                                            .base();
                                        let monotone = f <= prev + tol;
                                        prev = f;
                                        e.status = if monotone { Status::Pass } else { Status::Fail };
                                        e.value = Some(f);
                                        e.tol = Some(tol);
                                        entries.push(e);
                                    }
                                    entries
                                }
                                Err(err) => {
                                    let mut e = EntryBuilder::new("convexity_gap", &c.labels[i])
                                        .pair(&c.labels[j])
                                        .lambda(l)
                                        .base();
                                    e.detail = Some(err.to_string());
                                    vec![e]
                                }
                            }
                        }));
                    }
                }
            }
            "fisher_info_ineq" => {
                for &(i, j) in &pairs {
                    jobs.push(Box::new(move |c| {
                        vec![EntryBuilder::new("fisher_info_ineq", &c.smoothed_label(i))
                            .pair(&c.smoothed_label(j))
                            .slack(inequalities::fisher_info_ineq_slack(
                                &c.smoothed[i], &c.smoothed[j], &c.policy, tol,
                            ))]
                    }));
                }
            }
            "fi_convexity" => {
                for &(i, j) in &pairs {
                    for &l in &config.lambda_grid {
                        jobs.push(Box::new(move |c| {
                            vec![EntryBuilder::new("fi_convexity", &c.smoothed_label(i))
                                .pair(&c.smoothed_label(j))
                                .slack(inequalities::fi_convexity_slack(
                                    &c.smoothed[i], &c.smoothed[j], l, &c.policy, tol,
                                ))]
                        }));
                    }
                }
            }
            "mmse_convexity" => {
                for &(i, j) in &pairs {
                    for &l in &config.lambda_grid {
                        jobs.push(Box::new(move |c| {
                            let ts = vec![0.0, 0.1, 1.0, 10.0];
                            ts.into_iter()
                                .map(|t| {
                                    let pt = ChannelPoint::new(l, t).expect("validated grid");
                                    EntryBuilder::new("mmse_convexity", &c.labels[i])
                                        .pair(&c.labels[j])
                                        .slack(inequalities::mmse_convexity_slack(
                                            &c.dens[i], &c.dens[j], pt, &c.policy, tol,
                                        ))
                                })
                                .collect()
                        }));
                    }
                }
            }
            "fi_convexity_smoothed" => {
                for &(i, j) in &pairs {
                    for &l in &config.lambda_grid {
                        jobs.push(Box::new(move |c| {
                            let ts = vec![0.1, 1.0, 10.0];
                            ts.into_iter()
                                .map(|t| {
                                    let pt = ChannelPoint::new(l, t).expect("validated grid");
                                    EntryBuilder::new("fi_convexity_smoothed", &c.labels[i])
                                        .pair(&c.labels[j])
                                        .slack(inequalities::fi_convexity_smoothed_slack(
                                            &c.dens[i], &c.dens[j], pt, &c.policy, tol,
                                        ))
                                })
                                .collect()
                        }));
                    }
                }
            }
            "discrete_epi" => {
                let seed = config.seed;
                jobs.push(Box::new(move |_| {
                    let mut entries = Vec::new();
                    // hand-derived example
                    let coin = DiscretePmf::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
                    entries.push(
                        EntryBuilder::new("discrete_epi", "coin")
                            .pair("coin")
                            .slack(inequalities::discrete_epi(&coin, &coin, 0.5, tol)),
                    );
                    // seeded random battery
                    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd15c_4e7e);
                    let lambdas = [0.25, 0.5, 0.75];
                    for k in 0..24 {
                        let x = random_pmf(&mut rng);
                        let y = random_pmf(&mut rng);
                        let l = lambdas[k % lambdas.len()];
                        entries.push(
                            EntryBuilder::new("discrete_epi", &format!("pmf{k:02}a"))
                                .pair(&format!("pmf{k:02}b"))
                                .slack(inequalities::discrete_epi(&x, &y, l, tol)),
                        );
                    }
                    entries
                }));
            }
            "epi_limit" => {
                let ts = ts.clone();
                for &(i, j) in &pairs {
                    let ts = ts.clone();
                    jobs.push(Box::new(move |c| {
                        let ls = inequalities::lambda_star(&c.dens[i], &c.dens[j]);
                        let positive: Vec<f64> = ts.iter().copied().filter(|&t| t > 0.0).collect();
                        match inequalities::epi_limit_recovery(
                            &c.dens[i], &c.dens[j], ls, &positive, &c.policy, tol,
                        ) {
                            Ok(rows) => rows
                                .into_iter()
                                .map(|(s, _)| {
                                    EntryBuilder::new("epi_limit", &c.labels[i])
                                        .pair(&c.labels[j])
                                        .slack(Ok(s))
                                })
                                .collect(),
                            Err(err) => {
                                let mut e = EntryBuilder::new("epi_limit", &c.labels[i])
                                    .pair(&c.labels[j])
                                    .base();
                                e.detail = Some(err.to_string());
                                vec![e]
                            }
                        }
                    }));
                }
            }
            "mc_entropy" => {
                let seed = config.seed;
                let samples = config.mc_samples;
                for (i, d) in config.distributions.iter().cloned().enumerate() {
                    jobs.push(Box::new(move |c| {
                        let (est, se) = crate::oracles::mc_entropy(&d, McConfig::new(samples, seed + i as u64));
                        let quad = crate::functionals::entropy_floored(&c.dens[i], c.policy.floor_eps);
                        let z = if se > 0.0 { (quad - est).abs() / se } else { (quad - est).abs() / 1e-9 };
                        let mut e = EntryBuilder::new("mc_entropy", &c.labels[i]).base();
                        e.status = if z <= tol { Status::Pass } else { Status::Fail };
                        e.value = Some(z);
                        e.tol = Some(tol);
                        e.lhs = Some(quad);
                        e.rhs = Some(est);
                        e.detail = Some(format!("z-score vs {samples}-sample band, se={se:.3e}"));
                        vec![e]
                    }));
                }
            }
            "mc_mmse" => {
                let seed = config.seed;
                let samples = config.mc_samples;
                for (i, d) in config.distributions.iter().cloned().enumerate() {
                    jobs.push(Box::new(move |c| {
                        let t = 1.0;
                        let mut e = EntryBuilder::new("mc_mmse", &c.labels[i]).t(t).base();
                        let quad = match crate::functionals::mmse_signal(&c.dens[i], t, &c.policy) {
                            Ok(v) => v,
                            Err(err) => {
                                e.detail = Some(err.to_string());
                                return vec![e];
                            }
                        };
                        match crate::oracles::mc_mmse(&d, t, McConfig::new(samples, seed + 100 + i as u64), &c.policy) {
                            Ok((est, se)) => {
                                let z = (quad - est).abs() / se;
                                e.status = if z <= tol { Status::Pass } else { Status::Fail };
                                e.value = Some(z);
                                e.tol = Some(tol);
                                e.lhs = Some(quad);
                                e.rhs = Some(est);
                                e.detail = Some(format!("z-score vs {samples}-sample band, se={se:.3e}"));
                            }
                            Err(err) => e.detail = Some(err.to_string()),
                        }
                        vec![e]
                    }));
                }
            }
            _ => unreachable!("selected() only yields known checks"),
        }
    }

    let entries_mutex: Mutex<Vec<Entry>> = Mutex::new(Vec::new());
    jobs.par_iter().for_each(|job| {
        let produced = job(&ctx);
        entries_mutex.lock().unwrap().extend(produced);
    });
    let mut entries = entries_mutex.into_inner().unwrap();
    entries.sort_by(|a, b| {
        (&a.check, &a.family_x, &a.family_y)
            .cmp(&(&b.check, &b.family_x, &b.family_y))
            .then(cmp_opt(a.lambda, b.lambda))
            .then(cmp_opt(a.t, b.t))
    });

    let summary = Summary {
        passed: entries.iter().filter(|e| e.status == Status::Pass).count(),
        failed: entries.iter().filter(|e| e.status == Status::Fail).count(),
        inconclusive: entries.iter().filter(|e| e.status == Status::Inconclusive).count(),
        errors: entries.iter().filter(|e| e.status == Status::Error).count(),
    };
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        entries,
        summary,
        meta: Meta { tool_version: env!("CARGO_PKG_VERSION").to_string(), elapsed_ms: None },
    })
}

fn cmp_opt(a: Option<f64>, b: Option<f64>) -> std::cmp::Ordering {
    match (a, b) {
        (None, None) => std::cmp::Ordering::Equal,
        (None, Some(_)) => std::cmp::Ordering::Less,
        (Some(_), None) => std::cmp::Ordering::Greater,
        (Some(x), Some(y)) => x.total_cmp(&y),
    }
}

fn random_pmf(rng: &mut ChaCha8Rng) -> DiscretePmf {
    let size = 2 + (rng.gen::<u64>() % 5) as usize;
    let mut values: Vec<f64> = Vec::with_capacity(size);
    while values.len() < size {
        let v = rng.gen::<f64>() * 6.0 - 3.0;
        if values.iter().all(|&u: &f64| (u - v).abs() > 1e-6) {
            values.push(v);
        }
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let raw: Vec<f64> = (0..size).map(|_| rng.gen::<f64>() + 0.05).collect();
    let sum: f64 = raw.iter().sum();
    let mut probs: Vec<f64> = raw.iter().map(|r| r / sum).collect();
    // force exact normalization within the 1e-12 invariant
    let drift: f64 = 1.0 - probs.iter().sum::<f64>();
    probs[0] += drift;
    DiscretePmf::new(values, probs).expect("constructed valid pmf")
}

/// CSV header, fixed by the interface contract.
pub const CSV_HEADER: &str = "check,family_x,family_y,lambda,t,value,tol,status";

/// Render report entries as CSV (one row per check × pair × λ × t).
pub fn sweep_csv(report: &Report) -> String {
    let mut out = String::with_capacity(64 * (report.entries.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for e in &report.entries {
        let fmt_opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            e.check,
            e.family_x,
            e.family_y,
            fmt_opt(e.lambda),
            fmt_opt(e.t),
            fmt_opt(e.value),
            fmt_opt(e.tol),
            e.status.as_str()
        ));
    }
    out
}
