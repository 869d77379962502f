//! Independent ground truth by adaptive quadrature.
//!
//! Every closed-form constant in [`crate::estimators`] — c₀, c₁, the
//! Brewster multipliers d(r̄, 0̄), the Bayes factor and the BAEE risk — is
//! a ratio of moments of an explicit density. This module evaluates those
//! moments numerically, with no shared code on the gamma-ratio fast path,
//! so a formula error and a quadrature error cannot cancel.
//!
//! Semi-infinite integrals are mapped onto (0, 1) by t = s/(1−s) and
//! handled by adaptive 15-point Gauss–Kronrod bisection, always
//! refining the segment with the largest error estimate.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::estimators::{BoxBound, IgPrior};
use crate::model::EntropicConfig;
use crate::special::ln_gamma;

/// Tolerances and subdivision budget for the adaptive integrator.
///
/// Defaults sit one order below the closed-form acceptance thresholds so
/// quadrature error never masks a formula error.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    fn validate(&self) -> Result<()> {
        if self.abs_tol <= 0.0 || self.rel_tol <= 0.0 {
            return Err(Error::Domain(
                "quadrature tolerances must be positive".into(),
            ));
        }
        Ok(())
    }
}

// 15-point Kronrod abscissae (positive half) and weights, with the
// embedded 7-point Gauss weights.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// One Gauss–Kronrod pass over [a, b]: returns (K15 value, |K15 − G7|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for (j, &wg) in WG.iter().take(3).enumerate() {
        let jtw = 2 * j + 1;
        let x = half * XGK[jtw];
        let fsum = f(center - x) + f(center + x);
        resg += wg * fsum;
        resk += WGK[jtw] * fsum;
    }
    for j in 0..4 {
        let jtwm1 = 2 * j;
        let x = half * XGK[jtwm1];
        let fsum = f(center - x) + f(center + x);
        resk += WGK[jtwm1] * fsum;
    }
    (resk * half, ((resk - resg) * half).abs())
}

#[derive(Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// ∫₀^∞ f(t) dt via the t = s/(1−s) transform and adaptive refinement.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    let g = |s: f64| {
        let one_minus = 1.0 - s;
        f(s / one_minus) / (one_minus * one_minus)
    };

    let mut heap = BinaryHeap::new();
    let mut total_value = 0.0;
    let mut total_error = 0.0;
    // Seed with a handful of segments so a narrow bump cannot hide
    // between the nodes of a single panel.
    let seeds = 8;
    for i in 0..seeds {
        let a = i as f64 / seeds as f64;
        let b = (i + 1) as f64 / seeds as f64;
        let (value, error) = gk15(&g, a, b);
        total_value += value;
        total_error += error;
        heap.push(Segment { a, b, value, error });
    }

    while total_error > spec.abs_tol.max(spec.rel_tol * total_value.abs()) {
        if heap.len() >= spec.max_subdivisions {
            return Err(Error::Convergence(format!(
                "quadrature needed more than {} subdivisions (error estimate {:.3e})",
                spec.max_subdivisions, total_error
            )));
        }
        let worst = heap.pop().expect("heap cannot be empty while error > 0");
        let mid = 0.5 * (worst.a + worst.b);
        let left = gk15(&g, worst.a, mid);
        let right = gk15(&g, mid, worst.b);
        total_value += left.0 + right.0 - worst.value;
        total_error += left.1 + right.1 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: left.0,
            error: left.1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: right.0,
            error: right.1,
        });
    }

    // Re-sum segment values in positional order; the incremental total
    // above only drives the refinement loop.
    let mut parts: Vec<(f64, f64)> = heap.iter().map(|s| (s.a, s.value)).collect();
    parts.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(parts.iter().map(|p| p.1).sum())
}

/// Γ(shape+a)/Γ(shape) as a quadrature over the Gamma(shape, 1) density.
fn gamma_moment(shape: f64, a: f64, spec: &QuadratureSpec) -> Result<f64> {
    if shape <= 0.0 {
        return Err(Error::Domain(format!(
            "shape must be positive, got {shape}"
        )));
    }
    if shape + a <= 0.0 {
        return Err(Error::Domain(format!(
            "moment order {a} diverges: shape + a = {} <= 0",
            shape + a
        )));
    }
    let ln_norm = ln_gamma(shape)?;
    integrate_semi_infinite(
        move |t| ((shape + a - 1.0) * t.ln() - t - ln_norm).exp(),
        spec,
    )
}

/// The moment E\[Tᵃ\] under the unit-scale density of T (Gamma with
/// shape k(n−1)).
pub fn moment_t(cfg: &EntropicConfig, a: f64, spec: &QuadratureSpec) -> Result<f64> {
    gamma_moment(cfg.shape(), a, spec)
}

/// c₀ as the moment ratio E[T^{k(1−q)}] / E[T^{2k(1−q)}].
pub fn c0_oracle(cfg: &EntropicConfig, spec: &QuadratureSpec) -> Result<f64> {
    let e = cfg.exponent();
    Ok(moment_t(cfg, e, spec)? / moment_t(cfg, 2.0 * e, spec)?)
}

/// c₁ as the same ratio for S ~ Gamma(kn, 1) (all locations known).
pub fn c1_oracle(cfg: &EntropicConfig, spec: &QuadratureSpec) -> Result<f64> {
    let e = cfg.exponent();
    let kn = (cfg.k() * cfg.n()) as f64;
    Ok(gamma_moment(kn, e, spec)? / gamma_moment(kn, 2.0 * e, spec)?)
}

/// Brewster multiplier as a ratio of conditional-moment quadratures:
/// the density of T given W̄ ∈ ×(0, rᵢ] at ū = 0̄ is proportional to
/// t^{k(n−1)−1} e^{−t} ∏ᵢ(1−e^{−n rᵢ t}).
pub fn d_r0_oracle(cfg: &EntropicConfig, r: &BoxBound, spec: &QuadratureSpec) -> Result<f64> {
    if r.r().len() != cfg.k() {
        return Err(Error::Domain(format!(
            "box bound has {} components, expected k = {}",
            r.r().len(),
            cfg.k()
        )));
    }
    let n = cfg.n() as f64;
    let shape = cfg.shape();
    let e = cfg.exponent();
    let bounds = r.r().to_vec();
    let conditional_moment = |order: f64| {
        let bounds = bounds.clone();
        integrate_semi_infinite(
            move |t| {
                let mut log_density = (shape + order - 1.0) * t.ln() - t;
                let mut box_factor = 1.0;
                for &ri in &bounds {
                    box_factor *= -(-n * ri * t).exp_m1();
                }
                log_density += box_factor.ln();
                log_density.exp()
            },
            spec,
        )
    };
    Ok(conditional_moment(e)? / conditional_moment(2.0 * e)?)
}

/// Bayes factor as the posterior-moment ratio E[Θ⁻¹|T]/E[Θ⁻²|T] with
/// Θ = σ^{k(1−q)}, integrated over the inverse-gamma posterior of σ.
pub fn bayes_factor_oracle(
    cfg: &EntropicConfig,
    prior: &IgPrior,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    let m = cfg.shape() + prior.beta;
    let scale = t + prior.alpha;
    let e = cfg.exponent();
    let posterior_moment = |power: f64| {
        // ∫ σ^{power} σ^{−(m+1)} e^{−scale/σ} dσ (unnormalized)
        integrate_semi_infinite(
            move |sigma| ((power - m - 1.0) * sigma.ln() - scale / sigma).exp(),
            spec,
        )
    };
    Ok(posterior_moment(-e)? / posterior_moment(-2.0 * e)?)
}

/// ∫ h(σ | t) dσ for the normalized inverse-gamma posterior; equals 1
/// up to quadrature error.
pub fn posterior_normalization_oracle(
    cfg: &EntropicConfig,
    prior: &IgPrior,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    let m = cfg.shape() + prior.beta;
    let scale = t + prior.alpha;
    let ln_norm = m * scale.ln() - ln_gamma(m)?;
    integrate_semi_infinite(
        move |sigma| (ln_norm - (m + 1.0) * sigma.ln() - scale / sigma).exp(),
        spec,
    )
}

/// Risk of the constant-multiplier estimator c·T^{k(1−q)} from the
/// moment quadratures: c²E[T^{2k(1−q)}] − 2cE[T^{k(1−q)}] + 1.
pub fn risk_of_constant_oracle(cfg: &EntropicConfig, c: f64, spec: &QuadratureSpec) -> Result<f64> {
    let e = cfg.exponent();
    let m1 = moment_t(cfg, e, spec)?;
    let m2 = moment_t(cfg, 2.0 * e, spec)?;
    Ok(c * c * m2 - 2.0 * c * m1 + 1.0)
}

/// BAEE risk: the quadratic above at its minimizing constant.
pub fn baee_risk_oracle(cfg: &EntropicConfig, spec: &QuadratureSpec) -> Result<f64> {
    let c0 = c0_oracle(cfg, spec)?;
    risk_of_constant_oracle(cfg, c0, spec)
}

/// One closed-form-versus-oracle comparison.
#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub quantity: String,
    pub k: usize,
    pub n: usize,
    pub q: f64,
    /// Extra inputs (box bounds, prior, t) in display form; empty if none.
    pub detail: String,
    pub closed_form: f64,
    pub oracle: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
    pub pass: bool,
}

/// The pre-registered verification grid: k ∈ {1,2,3}, n ∈ {2,4,8},
/// q ∈ {0.2, 0.5, 0.8, 1.2, 1.4}, filtered by config validity.
pub fn preregistered_configs() -> Vec<EntropicConfig> {
    let mut out = Vec::new();
    for &k in &[1usize, 2, 3] {
        for &n in &[2usize, 4, 8] {
            for &q in &[0.2, 0.5, 0.8, 1.2, 1.4] {
                if let Ok(cfg) = EntropicConfig::new(k, n, q) {
                    out.push(cfg);
                }
            }
        }
    }
    out
}

/// Runs every closed form against its oracle over the pre-registered
/// grid; a row passes when the relative gap is at most `rel_tol`.
pub fn comparison_table(rel_tol: f64, spec: &QuadratureSpec) -> Result<Vec<ComparisonRow>> {
    let mut rows = Vec::new();
    let mut push =
        |quantity: &str, cfg: &EntropicConfig, detail: String, closed_form: f64, oracle: f64| {
            let abs_gap = (closed_form - oracle).abs();
            let rel_gap = abs_gap / oracle.abs().max(f64::MIN_POSITIVE);
            rows.push(ComparisonRow {
                quantity: quantity.to_string(),
                k: cfg.k(),
                n: cfg.n(),
                q: cfg.q(),
                detail,
                closed_form,
                oracle,
                abs_gap,
                rel_gap,
                pass: rel_gap <= rel_tol,
            });
        };

    for cfg in preregistered_configs() {
        push(
            "c0",
            &cfg,
            String::new(),
            crate::estimators::c0(&cfg)?,
            c0_oracle(&cfg, spec)?,
        );
        push(
            "c1",
            &cfg,
            String::new(),
            crate::estimators::c1(&cfg)?,
            c1_oracle(&cfg, spec)?,
        );
        push(
            "baee_risk",
            &cfg,
            String::new(),
            crate::estimators::baee_risk_closed_form(&cfg)?,
            baee_risk_oracle(&cfg, spec)?,
        );

        // Box bounds: a symmetric grid plus one asymmetric vector.
        let mut bounds: Vec<Vec<f64>> = [0.5, 1.0, 2.0].iter().map(|&r| vec![r; cfg.k()]).collect();
        if cfg.k() > 1 {
            bounds.push((0..cfg.k()).map(|i| 0.5 * 2f64.powi(i as i32)).collect());
        }
        for r in bounds {
            let bound = BoxBound::new(r.clone())?;
            let detail = format!(
                "r={}",
                r.iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(";")
            );
            push(
                "d_r0",
                &cfg,
                detail,
                crate::estimators::d_r0(&cfg, &bound)?,
                d_r0_oracle(&cfg, &bound, spec)?,
            );
        }

        for (alpha, beta, t) in [(1.0, 1.0, 1.0), (0.5, 2.0, 2.5)] {
            let prior = IgPrior::new(alpha, beta)?;
            let stats = crate::model::SummaryStats::new(vec![0.1 * t; cfg.k()], t, cfg.n())?;
            push(
                "bayes",
                &cfg,
                format!("alpha={alpha};beta={beta};t={t}"),
                crate::estimators::bayes(&stats, &cfg, &prior)?.value,
                bayes_factor_oracle(&cfg, &prior, t, spec)?,
            );
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators;
    use crate::model::SummaryStats;

    fn cfg(k: usize, n: usize, q: f64) -> EntropicConfig {
        EntropicConfig::new(k, n, q).unwrap()
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn assert_rel(got: f64, want: f64, tol: f64, what: &str) {
        assert!(
            ((got - want) / want).abs() <= tol,
            "{what}: got {got}, want {want}"
        );
    }

    #[test]
    fn moment_t_examples() {
        assert_rel(
            moment_t(&cfg(1, 2, 0.5), 0.0, &spec()).unwrap(),
            1.0,
            1e-10,
            "normalization",
        );
        assert_rel(
            moment_t(&cfg(1, 2, 0.5), 1.0, &spec()).unwrap(),
            1.0,
            1e-10,
            "Gamma(1,1) mean",
        );
        assert_rel(
            moment_t(&cfg(1, 3, 0.5), 0.5, &spec()).unwrap(),
            1.329340388179137,
            1e-10,
            "Gamma(2.5)/Gamma(2)",
        );
        // Divergent order rejected.
        assert!(moment_t(&cfg(1, 2, 0.5), -1.0, &spec()).is_err());
    }

    #[test]
    fn c0_oracle_matches_closed_form() {
        for c in [cfg(1, 2, 0.5), cfg(2, 2, 0.5), cfg(1, 4, 1.3)] {
            assert_rel(
                c0_oracle(&c, &spec()).unwrap(),
                estimators::c0(&c).unwrap(),
                1e-9,
                &format!("c0 oracle k={}, n={}, q={}", c.k(), c.n(), c.q()),
            );
        }
        assert_rel(
            c0_oracle(&cfg(1, 2, 0.5), &spec()).unwrap(),
            0.886226925452758,
            1e-9,
            "c0(1,2,0.5)",
        );
        assert_rel(
            c0_oracle(&cfg(2, 2, 0.5), &spec()).unwrap(),
            1.0 / 3.0,
            1e-9,
            "c0(2,2,0.5)",
        );
    }

    #[test]
    fn d_r0_oracle_matches_closed_form() {
        let c = cfg(1, 2, 0.5);
        let r = BoxBound::new(vec![1.0]).unwrap();
        assert_rel(
            d_r0_oracle(&c, &r, &spec()).unwrap(),
            0.8051315333943862,
            1e-8,
            "d_r0(1,2,0.5,r=1)",
        );

        // The k = 2 case decides the two-population formula: the oracle
        // agrees with the inclusion–exclusion expansion.
        let c = cfg(2, 2, 0.5);
        let r = BoxBound::new(vec![1.0, 1.0]).unwrap();
        assert_rel(
            d_r0_oracle(&c, &r, &spec()).unwrap(),
            0.3186670980265286,
            1e-8,
            "d_r0(2,2,0.5,r=(1,1))",
        );
        assert_rel(
            d_r0_oracle(&c, &r, &spec()).unwrap(),
            estimators::d_r0(&c, &r).unwrap(),
            1e-8,
            "closed form vs oracle, k = 2",
        );

        // Large boxes recover c0.
        let c = cfg(1, 4, 0.5);
        let r = BoxBound::new(vec![1e6]).unwrap();
        assert_rel(
            d_r0_oracle(&c, &r, &spec()).unwrap(),
            c0_oracle(&c, &spec()).unwrap(),
            1e-4,
            "r -> infinity",
        );
    }

    #[test]
    fn bayes_oracle_matches_closed_form() {
        let c = cfg(1, 2, 0.5);
        let prior = IgPrior::new(1.0, 1.0).unwrap();
        assert_rel(
            bayes_factor_oracle(&c, &prior, 1.0, &spec()).unwrap(),
            0.9399856029866252,
            1e-8,
            "bayes(1,2,0.5,1,1,t=1)",
        );
        let stats = SummaryStats::new(vec![0.1], 1.0, 2).unwrap();
        assert_rel(
            bayes_factor_oracle(&c, &prior, 1.0, &spec()).unwrap(),
            estimators::bayes(&stats, &c, &prior).unwrap().value,
            1e-9,
            "oracle vs closed form",
        );

        // Flat prior: the factor collapses to c0 (at t = 1 the scaling
        // power is 1^e = 1).
        let flat = IgPrior::new(1e-10, 1e-10).unwrap();
        assert_rel(
            bayes_factor_oracle(&c, &flat, 1.0, &spec()).unwrap(),
            estimators::c0(&c).unwrap(),
            1e-6,
            "flat-prior limit",
        );
    }

    #[test]
    fn posterior_density_normalizes() {
        let c = cfg(2, 4, 0.8);
        let prior = IgPrior::new(0.7, 1.3).unwrap();
        let norm = posterior_normalization_oracle(&c, &prior, 2.0, &spec()).unwrap();
        assert!((norm - 1.0).abs() <= 1e-9, "normalization = {norm}");
    }

    #[test]
    fn risk_oracle_matches_closed_form() {
        let c = cfg(1, 2, 0.5);
        assert_rel(
            baee_risk_oracle(&c, &spec()).unwrap(),
            0.2146018366025517,
            1e-8,
            "risk(1,2,0.5) = 1 - pi/4",
        );
        assert_rel(
            baee_risk_oracle(&c, &spec()).unwrap(),
            estimators::baee_risk_closed_form(&c).unwrap(),
            1e-9,
            "oracle vs closed form",
        );

        // The quadratic is minimized at c0: perturbing the constant
        // strictly increases risk, and c = 0 gives risk exactly 1.
        let c0 = estimators::c0(&c).unwrap();
        let at_c0 = risk_of_constant_oracle(&c, c0, &spec()).unwrap();
        assert!(risk_of_constant_oracle(&c, 2.0 * c0, &spec()).unwrap() > at_c0);
        assert!(risk_of_constant_oracle(&c, 0.5 * c0, &spec()).unwrap() > at_c0);
        assert_rel(
            risk_of_constant_oracle(&c, 0.0, &spec()).unwrap(),
            1.0,
            1e-10,
            "c = 0",
        );
    }

    #[test]
    fn quadrature_self_consistent_under_tighter_tolerances() {
        let c = cfg(2, 4, 1.2);
        let loose = QuadratureSpec::default();
        let tight = QuadratureSpec {
            abs_tol: 0.5e-12,
            rel_tol: 0.5e-10,
            max_subdivisions: 4000,
        };
        let a = c0_oracle(&c, &loose).unwrap();
        let b = c0_oracle(&c, &tight).unwrap();
        assert!(
            ((a - b) / b).abs() <= loose.rel_tol,
            "tolerance halving moved the result: {a} vs {b}"
        );
    }

    #[test]
    fn integrands_are_nonnegative_at_sample_points() {
        // Spot-check the raw integrands through known-positive integrals.
        let c = cfg(3, 8, 1.4);
        assert!(moment_t(&c, c.exponent(), &spec()).unwrap() > 0.0);
        let r = BoxBound::new(vec![0.3, 1.0, 4.0]).unwrap();
        assert!(d_r0_oracle(&c, &r, &spec()).unwrap() > 0.0);
        let prior = IgPrior::new(2.0, 0.4).unwrap();
        assert!(bayes_factor_oracle(&c, &prior, 0.7, &spec()).unwrap() > 0.0);
    }

    #[test]
    fn integrator_handles_singular_endpoints() {
        // t^{-0.8} e^{-t}: integrable endpoint singularity, value Γ(0.2).
        let got = integrate_semi_infinite(|t| (-0.8 * t.ln() - t).exp(), &spec()).unwrap();
        assert_rel(got, 4.590843711998803, 1e-9, "Gamma(0.2)");
    }

    #[test]
    fn exhausted_subdivision_budget_is_a_convergence_error() {
        let starved = QuadratureSpec {
            abs_tol: 1e-14,
            rel_tol: 1e-14,
            max_subdivisions: 9,
        };
        let res = integrate_semi_infinite(|t| (-0.8 * t.ln() - t).exp(), &starved);
        assert!(matches!(res, Err(crate::error::Error::Convergence(_))));
    }

    #[test]
    fn comparison_table_covers_grid_and_passes() {
        // Smoke subset here; the acceptance suite runs the full grid.
        let rows = comparison_table(1e-8, &spec()).unwrap();
        assert!(
            rows.len() > 300,
            "expected a dense table, got {}",
            rows.len()
        );
        let failed: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
        assert!(failed.is_empty(), "failures: {failed:?}");
    }
}
