//! Synthetic class → (image, text) generator for studying selection.
//!
//! Each class `y` draws an image vector `x ~ N(μ_y, I)` and a one-number
//! text `t = x[0] + N(0, text_noise_sd²)`. Class means sit on the vertices
//! of a regular simplex with edge `class_sep`: `μ_y = class_sep/√2 · e_y`.
//! Because `t` reads only `x[0]`, any rule that selects on `t` leaves the
//! other image dimensions untouched given the class, while rules that look
//! at `x` directly reshape them. [`bottleneck_gap`] measures both effects.

use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::stats;

const SHARD: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub n_classes: usize,
    pub x_dim: usize,
    pub text_noise_sd: f64,
    pub class_sep: f64,
    pub seed: u64,
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_classes == 0 {
            return Err(Error::Invalid("n_classes must be positive".into()));
        }
        if self.x_dim < 2 {
            return Err(Error::Invalid("x_dim must be at least 2".into()));
        }
        if self.n_classes > self.x_dim {
            return Err(Error::Invalid(format!(
                "{} classes need x_dim >= {} for simplex means",
                self.n_classes, self.n_classes
            )));
        }
        if !(self.text_noise_sd >= 0.0 && self.text_noise_sd.is_finite()) {
            return Err(Error::Invalid(
                "text_noise_sd must be finite and >= 0".into(),
            ));
        }
        if !(self.class_sep >= 0.0 && self.class_sep.is_finite()) {
            return Err(Error::Invalid("class_sep must be finite and >= 0".into()));
        }
        Ok(())
    }

    pub fn class_mean(&self, y: usize) -> Vec<f64> {
        let mut mu = vec![0.0; self.x_dim];
        mu[y] = self.class_sep / std::f64::consts::SQRT_2;
        mu
    }

    pub fn class_means(&self) -> Vec<Vec<f64>> {
        (0..self.n_classes).map(|y| self.class_mean(y)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub y: usize,
    pub x: Vec<f64>,
    pub t: f64,
}

/// Draws `n` samples. Shard `s` (samples `s*4096..`) uses its own stream,
/// so output is identical for any worker count.
pub fn generate(config: &GenConfig, n: usize) -> Result<Vec<Sample>> {
    config.validate()?;
    if n == 0 {
        return Err(Error::Invalid("sample count must be at least 1".into()));
    }
    let means = config.class_means();
    let shards = n.div_ceil(SHARD);
    let out: Vec<Vec<Sample>> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut r = rng::stream(config.seed, s as u64);
            let len = SHARD.min(n - s * SHARD);
            (0..len)
                .map(|_| {
                    let y = r.random_range(0..config.n_classes);
                    let x: Vec<f64> = means[y]
                        .iter()
                        .map(|m| m + r.sample::<f64, _>(StandardNormal))
                        .collect();
                    let noise: f64 = r.sample(StandardNormal);
                    let t = x[0] + config.text_noise_sd * noise;
                    Sample { y, x, t }
                })
                .collect()
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}

/// Which samples get selected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SelectionRule {
    /// Keeps `t > tau`. Reads the text only.
    TextThreshold { tau: f64 },
    /// Keeps `‖x − prototype‖ < radius`. `prototypes` holds one vector per
    /// class, or a single vector shared by all classes.
    ImageBall {
        radius: f64,
        prototypes: Vec<Vec<f64>>,
    },
    /// Keeps `(1 − text_weight)·mean(x) + text_weight·t > tau`.
    ImageThreshold { tau: f64, text_weight: f64 },
}

impl SelectionRule {
    pub fn name(&self) -> &'static str {
        match self {
            SelectionRule::TextThreshold { .. } => "text_threshold",
            SelectionRule::ImageBall { .. } => "image_ball",
            SelectionRule::ImageThreshold { .. } => "image_threshold",
        }
    }

    /// Ball of radius `r` around each class mean.
    pub fn ball_at_class_means(config: &GenConfig, radius: f64) -> Self {
        SelectionRule::ImageBall {
            radius,
            prototypes: config.class_means(),
        }
    }

    pub fn validate(&self, x_dim: usize) -> Result<()> {
        match self {
            SelectionRule::TextThreshold { tau } if tau.is_nan() => {
                Err(Error::Invalid("tau is NaN".into()))
            }
            SelectionRule::ImageBall { radius, prototypes } => {
                if !(*radius >= 0.0) {
                    return Err(Error::Invalid("ball radius must be >= 0".into()));
                }
                if prototypes.is_empty() || prototypes.iter().any(|p| p.len() != x_dim) {
                    return Err(Error::Invalid(format!(
                        "ball prototypes must be non-empty vectors of dim {x_dim}"
                    )));
                }
                Ok(())
            }
            SelectionRule::ImageThreshold { tau, text_weight } => {
                if tau.is_nan() || !(0.0..=1.0).contains(text_weight) {
                    return Err(Error::Invalid(
                        "image threshold needs finite tau and text_weight in [0, 1]".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn keeps(&self, s: &Sample) -> bool {
        match self {
            SelectionRule::TextThreshold { tau } => s.t > *tau,
            SelectionRule::ImageBall { radius, prototypes } => {
                let p = if prototypes.len() == 1 {
                    &prototypes[0]
                } else {
                    &prototypes[s.y]
                };
                let d2: f64 = s.x.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
                d2 < radius * radius
            }
            SelectionRule::ImageThreshold { tau, text_weight } => {
                let m = s.x.iter().sum::<f64>() / s.x.len() as f64;
                (1.0 - text_weight) * m + text_weight * s.t > *tau
            }
        }
    }
}

/// Selected samples in input order. An empty result is legal.
pub fn select(samples: &[Sample], rule: &SelectionRule) -> Result<Vec<Sample>> {
    if let Some(s) = samples.first() {
        rule.validate(s.x.len())?;
        if let SelectionRule::ImageBall { prototypes, .. } = rule {
            if prototypes.len() > 1 && samples.iter().any(|s| s.y >= prototypes.len()) {
                return Err(Error::Invalid(
                    "ball rule lacks a prototype for some class".into(),
                ));
            }
        }
    }
    Ok(samples.iter().filter(|s| rule.keeps(s)).cloned().collect())
}

/// Radius at which a ball around each sample's prototype keeps
/// `target_rate` of `samples`: midpoint between the two order statistics
/// that straddle the target count.
pub fn calibrate_ball_radius(
    samples: &[Sample],
    prototypes: &[Vec<f64>],
    target_rate: f64,
) -> Result<f64> {
    if samples.is_empty() || !(0.0..=1.0).contains(&target_rate) {
        return Err(Error::Invalid(
            "calibration needs samples and a rate in [0, 1]".into(),
        ));
    }
    let mut d: Vec<f64> = samples
        .iter()
        .map(|s| {
            let p = if prototypes.len() == 1 {
                &prototypes[0]
            } else {
                &prototypes[s.y]
            };
            s.x.iter()
                .zip(p)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    d.sort_by(f64::total_cmp);
    let k = (target_rate * d.len() as f64).round() as usize;
    Ok(match k {
        0 => 0.0,
        k if k >= d.len() => d[d.len() - 1] + 1.0,
        k => 0.5 * (d[k - 1] + d[k]),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapOptions {
    /// Width of the text bins used by the conditional-independence test.
    pub bin_width: f64,
    /// Family-wise level of the test (Bonferroni over all bin/dim/feature
    /// comparisons).
    pub alpha: f64,
    /// Minimum selected and unselected count for a bin to be tested.
    pub min_per_group: usize,
    pub min_survivors: usize,
}

impl Default for GapOptions {
    fn default() -> Self {
        GapOptions {
            bin_width: 0.05,
            alpha: 0.01,
            min_per_group: 20,
            min_survivors: 100,
        }
    }
}

/// Two-sample comparison of selected and unselected samples within narrow
/// text bins.
///
/// For every tested bin and every dimension `d >= 1`, the class-centred
/// residual `r = x[d] − mean_y[d]` is compared through two features, `r`
/// and `r²`, with Welch z statistics. Comparing `r²` as well as `r` catches
/// selections that shrink a dimension without shifting it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CondIndepTest {
    /// Largest |z| over all comparisons.
    pub stat: f64,
    pub n_tests: usize,
    pub bins_tested: usize,
    /// Bonferroni critical value for |z|.
    pub critical: f64,
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub baseline_var: Vec<f64>,
    pub per_dim_var_text: Vec<f64>,
    pub per_dim_var_image: Vec<f64>,
    pub acceptance_text: f64,
    pub acceptance_image: f64,
    pub cond_indep_text: CondIndepTest,
    pub cond_indep_image: CondIndepTest,
}

/// Per-dimension variance computed within each class, then averaged over
/// classes that have at least two members.
fn per_class_variance<'a>(
    samples: impl Iterator<Item = &'a Sample>,
    n_classes: usize,
    dim: usize,
) -> Vec<f64> {
    // Welford per class and dimension
    let mut count = vec![0usize; n_classes];
    let mut mean = vec![vec![0.0; dim]; n_classes];
    let mut m2 = vec![vec![0.0; dim]; n_classes];
    for s in samples {
        let c = &mut count[s.y];
        *c += 1;
        for d in 0..dim {
            let delta = s.x[d] - mean[s.y][d];
            mean[s.y][d] += delta / *c as f64;
            m2[s.y][d] += delta * (s.x[d] - mean[s.y][d]);
        }
    }
    let used: Vec<usize> = (0..n_classes).filter(|&y| count[y] >= 2).collect();
    (0..dim)
        .map(|d| {
            used.iter()
                .map(|&y| m2[y][d] / (count[y] - 1) as f64)
                .sum::<f64>()
                / used.len().max(1) as f64
        })
        .collect()
}

fn class_means_of(samples: &[Sample], n_classes: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut sum = vec![vec![0.0; dim]; n_classes];
    let mut count = vec![0usize; n_classes];
    for s in samples {
        count[s.y] += 1;
        for (acc, v) in sum[s.y].iter_mut().zip(&s.x) {
            *acc += v;
        }
    }
    for (y, row) in sum.iter_mut().enumerate() {
        let c = count[y].max(1) as f64;
        row.iter_mut().for_each(|v| *v /= c);
    }
    sum
}

fn welch_z(a: &[f64], b: &[f64]) -> f64 {
    let se2 = stats::variance(a) / a.len() as f64 + stats::variance(b) / b.len() as f64;
    if se2 == 0.0 {
        return 0.0;
    }
    (stats::mean(a) - stats::mean(b)) / se2.sqrt()
}

/// Bins are `[origin + k·w, origin + (k+1)·w)`. A threshold rule on `t`
/// only produces both groups in the bin containing its threshold, so
/// [`bottleneck_gap`] centres a bin on the text threshold.
pub fn cond_indep_test(
    samples: &[Sample],
    rule: &SelectionRule,
    opts: &GapOptions,
    origin: f64,
) -> Result<CondIndepTest> {
    if !(opts.bin_width > 0.0) || !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(Error::Invalid(
            "bin width must be > 0 and alpha in (0, 1)".into(),
        ));
    }
    let Some(first) = samples.first() else {
        return Err(Error::Empty("samples"));
    };
    let dim = first.x.len();
    let n_classes = samples.iter().map(|s| s.y).max().unwrap_or(0) + 1;
    let means = class_means_of(samples, n_classes, dim);

    let mut bins: std::collections::BTreeMap<i64, (Vec<usize>, Vec<usize>)> = Default::default();
    for (i, s) in samples.iter().enumerate() {
        let b = ((s.t - origin) / opts.bin_width).floor() as i64;
        let e = bins.entry(b).or_default();
        if rule.keeps(s) {
            e.0.push(i);
        } else {
            e.1.push(i);
        }
    }

    let mut stat: f64 = 0.0;
    let mut n_tests = 0;
    let mut bins_tested = 0;
    for (sel, unsel) in bins.values() {
        if sel.len() < opts.min_per_group || unsel.len() < opts.min_per_group {
            continue;
        }
        bins_tested += 1;
        for d in 1..dim {
            let resid = |idx: &[usize]| -> Vec<f64> {
                idx.iter()
                    .map(|&i| samples[i].x[d] - means[samples[i].y][d])
                    .collect()
            };
            let (ra, rb) = (resid(sel), resid(unsel));
            let sq = |v: &[f64]| -> Vec<f64> { v.iter().map(|r| r * r).collect() };
            for z in [welch_z(&ra, &rb), welch_z(&sq(&ra), &sq(&rb))] {
                stat = stat.max(z.abs());
                n_tests += 1;
            }
        }
    }
    let critical = if n_tests == 0 {
        f64::INFINITY
    } else {
        stats::normal_upper_quantile(opts.alpha / (2.0 * n_tests as f64))
    };
    Ok(CondIndepTest {
        stat,
        n_tests,
        bins_tested,
        critical,
        rejected: stat > critical,
    })
}

/// Compares how a text-only rule and an image-aware rule reshape the image
/// distribution relative to the unselected population.
pub fn bottleneck_gap(
    samples: &[Sample],
    text_rule: &SelectionRule,
    image_rule: &SelectionRule,
    opts: &GapOptions,
) -> Result<GapReport> {
    let Some(first) = samples.first() else {
        return Err(Error::Empty("samples"));
    };
    let dim = first.x.len();
    let n_classes = samples.iter().map(|s| s.y).max().unwrap_or(0) + 1;
    let text_sel = select(samples, text_rule)?;
    let image_sel = select(samples, image_rule)?;
    for (rule, sel) in [(text_rule, &text_sel), (image_rule, &image_sel)] {
        if sel.len() < opts.min_survivors {
            return Err(Error::InsufficientSurvivors {
                rule: rule.name(),
                kept: sel.len(),
                need: opts.min_survivors,
            });
        }
    }
    let n = samples.len() as f64;
    let origin = match text_rule {
        SelectionRule::TextThreshold { tau } => tau - 0.5 * opts.bin_width,
        _ => 0.0,
    };
    Ok(GapReport {
        baseline_var: per_class_variance(samples.iter(), n_classes, dim),
        per_dim_var_text: per_class_variance(text_sel.iter(), n_classes, dim),
        per_dim_var_image: per_class_variance(image_sel.iter(), n_classes, dim),
        acceptance_text: text_sel.len() as f64 / n,
        acceptance_image: image_sel.len() as f64 / n,
        cond_indep_text: cond_indep_test(samples, text_rule, opts, origin)?,
        cond_indep_image: cond_indep_test(samples, image_rule, opts, origin)?,
    })
}

/// The image-aware rule a simulation compares against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ImageRuleSpec {
    /// Ball around each class mean, radius calibrated so its acceptance
    /// rate equals the text rule's.
    BallMatched,
    Ball {
        radius: f64,
    },
    Threshold {
        tau: f64,
        #[serde(default)]
        text_weight: f64,
    },
}

fn default_text_threshold() -> f64 {
    1.0
}

fn default_image_rule() -> ImageRuleSpec {
    ImageRuleSpec::BallMatched
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub generator: GenConfig,
    pub n: usize,
    #[serde(default = "default_text_threshold")]
    pub text_threshold: f64,
    #[serde(default = "default_image_rule")]
    pub image_rule: ImageRuleSpec,
    #[serde(default)]
    pub gap: GapOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: SimulationConfig,
    pub text_rule: SelectionRule,
    pub image_rule: SelectionRule,
    pub gap: GapReport,
}

pub fn run_simulation(config: &SimulationConfig) -> Result<SimulationReport> {
    let samples = generate(&config.generator, config.n)?;
    let text_rule = SelectionRule::TextThreshold {
        tau: config.text_threshold,
    };
    let image_rule = match &config.image_rule {
        ImageRuleSpec::BallMatched => {
            let rate =
                samples.iter().filter(|s| text_rule.keeps(s)).count() as f64 / samples.len() as f64;
            let protos = config.generator.class_means();
            let r = calibrate_ball_radius(&samples, &protos, rate)?;
            SelectionRule::ImageBall {
                radius: r,
                prototypes: protos,
            }
        }
        ImageRuleSpec::Ball { radius } => {
            SelectionRule::ball_at_class_means(&config.generator, *radius)
        }
        ImageRuleSpec::Threshold { tau, text_weight } => SelectionRule::ImageThreshold {
            tau: *tau,
            text_weight: *text_weight,
        },
    };
    let gap = bottleneck_gap(&samples, &text_rule, &image_rule, &config.gap)?;
    Ok(SimulationReport {
        config: config.clone(),
        text_rule,
        image_rule,
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n_classes: usize, x_dim: usize, noise: f64, sep: f64) -> GenConfig {
        GenConfig {
            n_classes,
            x_dim,
            text_noise_sd: noise,
            class_sep: sep,
            seed: 11,
        }
    }

    #[test]
    fn config_validation() {
        assert!(cfg(1, 1, 0.0, 0.0).validate().is_err());
        assert!(cfg(3, 2, 0.0, 0.0).validate().is_err());
        assert!(cfg(2, 2, -1.0, 0.0).validate().is_err());
        assert!(cfg(2, 2, 0.0, f64::NAN).validate().is_err());
        assert!(cfg(2, 8, 0.5, 2.0).validate().is_ok());
    }

    #[test]
    fn noiseless_text_copies_first_dim() {
        let s = generate(&cfg(3, 4, 0.0, 2.0), 5000).unwrap();
        assert!(s.iter().all(|s| s.t == s.x[0]));
    }

    #[test]
    fn deterministic_and_sharded() {
        let c = cfg(2, 3, 0.3, 1.0);
        let a = generate(&c, 10_000).unwrap();
        let b = generate(&c, 10_000).unwrap();
        assert_eq!(a, b);
        // a prefix request reproduces the prefix
        let p = generate(&c, 5000).unwrap();
        assert_eq!(&a[..5000], &p[..]);
    }

    #[test]
    fn simplex_means_have_requested_separation() {
        let c = cfg(3, 5, 0.0, 2.0);
        let (a, b) = (c.class_mean(0), c.class_mean(2));
        let d: f64 = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rule_edges() {
        let c = cfg(1, 3, 0.0, 0.0);
        let s = generate(&c, 2000).unwrap();
        assert_eq!(
            select(&s, &SelectionRule::TextThreshold { tau: -1e9 })
                .unwrap()
                .len(),
            2000
        );
        assert!(select(&s, &SelectionRule::ball_at_class_means(&c, 0.0))
            .unwrap()
            .is_empty());
        let all = SelectionRule::ImageThreshold {
            tau: -1e9,
            text_weight: 0.3,
        };
        assert_eq!(select(&s, &all).unwrap().len(), 2000);
        let bad = SelectionRule::ImageBall {
            radius: 1.0,
            prototypes: vec![vec![0.0; 2]],
        };
        assert!(select(&s, &bad).is_err());
    }

    #[test]
    fn text_rule_tail_rate() {
        // P(Z > 1) = 0.158655
        let c = cfg(1, 2, 0.0, 0.0);
        let s = generate(&c, 100_000).unwrap();
        let rate = select(&s, &SelectionRule::TextThreshold { tau: 1.0 })
            .unwrap()
            .len() as f64
            / 1e5;
        assert!((rate - 0.158_655).abs() < 0.01, "{rate}");
    }

    #[test]
    fn calibrated_radius_hits_rate() {
        let c = cfg(2, 4, 0.0, 1.0);
        let s = generate(&c, 20_000).unwrap();
        let r = calibrate_ball_radius(&s, &c.class_means(), 0.25).unwrap();
        let kept = select(&s, &SelectionRule::ball_at_class_means(&c, r))
            .unwrap()
            .len();
        assert_eq!(kept, 5000);
    }

    #[test]
    fn insufficient_survivors() {
        let c = cfg(1, 3, 0.0, 0.0);
        let s = generate(&c, 1000).unwrap();
        let text = SelectionRule::TextThreshold { tau: 0.0 };
        let tiny = SelectionRule::ball_at_class_means(&c, 0.1);
        assert!(matches!(
            bottleneck_gap(&s, &text, &tiny, &GapOptions::default()),
            Err(Error::InsufficientSurvivors {
                rule: "image_ball",
                ..
            })
        ));
    }

    #[test]
    fn noiseless_text_rule_shrinks_only_dim_zero() {
        let c = cfg(1, 4, 0.0, 0.0);
        let s = generate(&c, 50_000).unwrap();
        let text = SelectionRule::TextThreshold { tau: 0.5 };
        let ball = SelectionRule::ball_at_class_means(&c, 2.0);
        let g = bottleneck_gap(&s, &text, &ball, &GapOptions::default()).unwrap();
        // Var(Z | Z > 0.5) ≈ 0.27
        assert!(g.per_dim_var_text[0] < 0.4);
        for d in 1..4 {
            assert!(
                (g.per_dim_var_text[d] - 1.0).abs() < 0.06,
                "{:?}",
                g.per_dim_var_text
            );
        }
    }

    fn moments(s: &[&Sample], d: usize) -> (f64, f64) {
        let v: Vec<f64> = s.iter().map(|s| s.x[d]).collect();
        (stats::mean(&v), stats::variance(&v))
    }

    #[test]
    fn zero_separation_classes_match() {
        let s = generate(&cfg(2, 3, 0.2, 0.0), 40_000).unwrap();
        let (a, b): (Vec<&Sample>, Vec<&Sample>) = s.iter().partition(|s| s.y == 0);
        for d in 0..3 {
            let ((ma, va), (mb, vb)) = (moments(&a, d), moments(&b, d));
            let se = (va / a.len() as f64 + vb / b.len() as f64).sqrt();
            assert!((ma - mb).abs() < 4.0 * se, "dim {d}");
            assert!((va - vb).abs() < 0.05, "dim {d}");
        }
    }

    #[test]
    fn class_means_recovered() {
        let c = cfg(3, 4, 0.5, 2.0);
        let s = generate(&c, 100_000).unwrap();
        for y in 0..3 {
            let members: Vec<&Sample> = s.iter().filter(|s| s.y == y).collect();
            let n = members.len() as f64;
            assert!((n / 1e5 - 1.0 / 3.0).abs() < 0.01);
            for (d, mu) in c.class_mean(y).iter().enumerate() {
                let (m, _) = moments(&members, d);
                assert!(
                    (m - mu).abs() < 3.0 / n.sqrt(),
                    "class {y} dim {d}: {m} vs {mu}"
                );
            }
        }
    }

    #[test]
    fn text_rule_test_sees_the_threshold_bin() {
        let c = cfg(2, 4, 0.5, 1.0);
        let s = generate(&c, 60_000).unwrap();
        let text = SelectionRule::TextThreshold { tau: 0.7 };
        let r = calibrate_ball_radius(&s, &c.class_means(), 0.3).unwrap();
        let ball = SelectionRule::ball_at_class_means(&c, r);
        let g = bottleneck_gap(&s, &text, &ball, &GapOptions::default()).unwrap();
        assert_eq!(g.cond_indep_text.bins_tested, 1);
        assert!(!g.cond_indep_text.rejected);
        assert!(g.cond_indep_image.rejected);
    }

    #[test]
    fn simulation_config_round_trips_json() {
        let json = r#"{"generator":{"n_classes":2,"x_dim":4,"text_noise_sd":0.5,"class_sep":1.0,"seed":3},"n":5000}"#;
        let c: SimulationConfig = serde_json::from_str(json).unwrap();
        assert_eq!(c.image_rule, ImageRuleSpec::BallMatched);
        assert_eq!(c.text_threshold, 1.0);
        let r = run_simulation(&c).unwrap();
        assert!((r.gap.acceptance_image - r.gap.acceptance_text).abs() < 1e-3);
    }
}
