//! Monte Carlo experiments over an η grid and the statistics computed from
//! them: KS distances to the normal law, expectation and variance ratios,
//! the Rinott bound and transference diagnostics.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::process::{fit_b2, replicate, Budgets, Constants, ExperimentContext, ExperimentScales, ReplicationRecord};
use crate::polytope::{Polytope, PolytopeSpec};
use crate::{Error, Result};

/// Minimum replications for the expectation and variance checks.
pub const MIN_CHECK_REPLICATIONS: usize = 100;
/// Minimum A-true replications for transference diagnostics.
pub const MIN_CONDITIONED: usize = 100;
/// Kolmogorov 1% critical value: KS ≤ 1.63/√n with probability ≈ 0.99.
pub const KOLMOGOROV_99: f64 = 1.63;

/// Standard normal distribution function.
pub fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; 0 for fewer than two values.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// One-sample KS distance of the standardized values to Φ.
pub fn ks_normal(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InsufficientReplications { needed: 2, got: values.len() });
    }
    let m = mean(values);
    let sd = variance(values).sqrt();
    if !(sd > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let mut z: Vec<f64> = values.iter().map(|x| (x - m) / sd).collect();
    z.sort_by(f64::total_cmp);
    let n = z.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in z.iter().enumerate() {
        let f = phi(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// D·M/(√(2π)σ) + 16√|V|·D^(3/2)M²/σ² + 10|V|D²M³/σ³.
pub fn rinott_bound(v_count: usize, d: usize, m: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidSigma(sigma));
    }
    let (v, d) = (v_count as f64, d as f64);
    let r = m / sigma;
    Ok(d * r / (2.0 * std::f64::consts::PI).sqrt() + 16.0 * v.sqrt() * d.powf(1.5) * r * r + 10.0 * v * d * d * r * r * r)
}

fn theory_prefactor(d: usize, flags: f64) -> f64 {
    flags / ((d as f64 + 1.0).powi(d as i32 - 1) * crate::linalg::factorial(d - 1))
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ExpectationReport {
    pub eta: f64,
    /// mean(1 − V) over its asymptotic value F/((d+1)^(d−1)(d−1)!)·ln^(d−1)η/η.
    pub ratio_v: f64,
    /// mean(f_ℓ)/(F·ln^(d−1)η).
    pub ratio_f: Vec<f64>,
}

pub fn expectation_check(records: &[ReplicationRecord], p: &Polytope, eta: f64) -> Result<ExpectationReport> {
    if records.len() < MIN_CHECK_REPLICATIONS {
        return Err(Error::InsufficientReplications { needed: MIN_CHECK_REPLICATIONS, got: records.len() });
    }
    Ok(expectation_ratios(records, p, eta))
}

fn expectation_ratios(records: &[ReplicationRecord], p: &Polytope, eta: f64) -> ExpectationReport {
    let d = p.dim;
    let flags = p.flag_count() as f64;
    let l = eta.ln().powi(d as i32 - 1);
    let missed: Vec<f64> = records.iter().map(|r| p.volume - r.volume).collect();
    let ratio_v = mean(&missed) / (theory_prefactor(d, flags) * l / eta);
    let ratio_f = (0..d)
        .map(|ell| mean(&records.iter().map(|r| r.f[ell] as f64).collect::<Vec<_>>()) / (flags * l))
        .collect();
    ExpectationReport { eta, ratio_v, ratio_f }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct VarianceReport {
    pub eta: f64,
    /// Var(V)·η²/(F·ln^(d−1)η).
    pub var_ratio_v: f64,
    /// Var(f_ℓ)/(F·ln^(d−1)η).
    pub var_ratio_f: Vec<f64>,
    /// Fewer than 100 replications: the ratios are too noisy to assert on.
    pub wide_variance_warning: bool,
}

pub fn variance_check(records: &[ReplicationRecord], p: &Polytope, eta: f64) -> VarianceReport {
    let d = p.dim;
    let norm = p.flag_count() as f64 * eta.ln().powi(d as i32 - 1);
    let vs: Vec<f64> = records.iter().map(|r| r.volume).collect();
    VarianceReport {
        eta,
        var_ratio_v: variance(&vs) * eta * eta / norm,
        var_ratio_f: (0..d).map(|ell| variance(&records.iter().map(|r| r.f[ell] as f64).collect::<Vec<_>>()) / norm).collect(),
        wide_variance_warning: records.len() < MIN_CHECK_REPLICATIONS,
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CltReport {
    pub etas: Vec<f64>,
    pub ks_v: Vec<f64>,
    /// ks_f[ℓ][k]: f_ℓ at the k-th η.
    pub ks_f: Vec<Vec<f64>>,
    /// KS(V)·(ln η)^((d−1)/2).
    pub rate_v: Vec<f64>,
    /// 2·1.63/√R with the smallest R on the grid.
    pub noise_allowance: f64,
    /// KS nonincreasing within the allowance; None for a single η.
    pub trend_v: Option<bool>,
    pub trend_f: Vec<Option<bool>>,
    pub single_eta: bool,
}

fn nonincreasing(xs: &[f64], slack: f64) -> Option<bool> {
    (xs.len() >= 2).then(|| xs.windows(2).all(|w| w[1] <= w[0] + slack))
}

/// KS distances per η and their trend across the grid.
pub fn clt_check(per_eta: &[(f64, &[ReplicationRecord])], d: usize) -> Result<CltReport> {
    let mut ks_v = Vec::new();
    let mut ks_f = vec![Vec::new(); d];
    let mut rate_v = Vec::new();
    let mut r_min = usize::MAX;
    for &(eta, recs) in per_eta {
        r_min = r_min.min(recs.len());
        let k = ks_normal(&recs.iter().map(|r| r.volume).collect::<Vec<_>>())?;
        ks_v.push(k);
        rate_v.push(k * eta.ln().powf((d as f64 - 1.0) / 2.0));
        for (ell, out) in ks_f.iter_mut().enumerate() {
            out.push(ks_normal(&recs.iter().map(|r| r.f[ell] as f64).collect::<Vec<_>>())?);
        }
    }
    let noise_allowance = 2.0 * KOLMOGOROV_99 / (r_min as f64).sqrt();
    Ok(CltReport {
        etas: per_eta.iter().map(|x| x.0).collect(),
        trend_v: nonincreasing(&ks_v, noise_allowance),
        trend_f: ks_f.iter().map(|k| nonincreasing(k, noise_allowance)).collect(),
        single_eta: per_eta.len() < 2,
        ks_v,
        ks_f,
        rate_v,
        noise_allowance,
    })
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TransferenceStats {
    /// |mean(ζ|A) − mean(ζ)|/σ(ζ).
    pub mean_shift: f64,
    /// |Var(ζ|A) − Var(ζ)|/Var(ζ).
    pub var_shift: f64,
    /// Sup distance between the conditioned and unconditioned empirical CDFs.
    pub cdf_distance: f64,
    /// |E ζ − E(ζ|A)|.
    pub conditioning_gap: f64,
    /// (E(ζ|A) + E(ζ|Ā))·P(Ā).
    pub conditioning_bound: f64,
    pub conditioning_holds: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TransferenceReport {
    pub conditioned: usize,
    pub total: usize,
    /// ζ = V(P) − V(Π_η).
    pub volume: TransferenceStats,
    /// ζ = f_0(Π_η).
    pub f0: TransferenceStats,
}

fn ecdf_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

fn transference_stats(all: &[f64], mask: &[bool]) -> TransferenceStats {
    let cond: Vec<f64> = all.iter().zip(mask).filter(|x| *x.1).map(|x| *x.0).collect();
    let rest: Vec<f64> = all.iter().zip(mask).filter(|x| !*x.1).map(|x| *x.0).collect();
    let (m_all, m_cond) = (mean(all), mean(&cond));
    let (v_all, v_cond) = (variance(all), variance(&cond));
    let p_not = rest.len() as f64 / all.len() as f64;
    let m_rest = if rest.is_empty() { 0.0 } else { mean(&rest) };
    let conditioning_gap = (m_all - m_cond).abs();
    let conditioning_bound = (m_cond + m_rest) * p_not;
    TransferenceStats {
        mean_shift: if v_all > 0.0 { conditioning_gap / v_all.sqrt() } else { 0.0 },
        var_shift: if v_all > 0.0 { (v_cond - v_all).abs() / v_all } else { 0.0 },
        cdf_distance: ecdf_distance(&cond, all),
        conditioning_gap,
        conditioning_bound,
        // the identity is exact; the slack only absorbs rounding in the means
        conditioning_holds: conditioning_gap <= conditioning_bound + 1e-12 * (1.0 + conditioning_bound.abs()),
    }
}

pub fn transference_diagnostics(records: &[ReplicationRecord], mother_volume: f64) -> Result<TransferenceReport> {
    let mask: Vec<bool> = records.iter().map(|r| r.event_a).collect();
    let conditioned = mask.iter().filter(|&&a| a).count();
    if conditioned < MIN_CONDITIONED {
        return Err(Error::InsufficientConditioned { needed: MIN_CONDITIONED, got: conditioned });
    }
    let vol: Vec<f64> = records.iter().map(|r| mother_volume - r.volume).collect();
    let f0: Vec<f64> = records.iter().map(|r| r.f[0] as f64).collect();
    Ok(TransferenceReport {
        conditioned,
        total: records.len(),
        volume: transference_stats(&vol, &mask),
        f0: transference_stats(&f0, &mask),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    /// "desk" or "paper".
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default = "default_alpha")]
    pub alpha_desk: f64,
    #[serde(default = "default_beta")]
    pub beta_desk: f64,
}

fn default_mode() -> String {
    "desk".into()
}
fn default_alpha() -> f64 {
    crate::process::ALPHA_DESK
}
fn default_beta() -> f64 {
    crate::process::BETA_DESK
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        ConstantsConfig { mode: default_mode(), alpha_desk: default_alpha(), beta_desk: default_beta() }
    }
}

impl ConstantsConfig {
    pub fn resolve(&self, d: usize) -> Result<Constants> {
        match self.mode.as_str() {
            "desk" => Ok(Constants::desk(d, self.alpha_desk, self.beta_desk)),
            "paper" => Ok(Constants::paper(d)),
            other => Err(Error::Parse(format!("constants.mode: expected \"desk\" or \"paper\", got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub records_csv: Option<String>,
    pub summary_json: Option<String>,
    pub plot_tsv: Option<String>,
    pub manifest_json: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub polytope: String,
    pub etas: Vec<f64>,
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub constants: ConstantsConfig,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub outputs: OutputPaths,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(Error::Parse(format!("replications: need at least 2, got {}", self.replications)));
        }
        if self.etas.is_empty() {
            return Err(Error::Parse("etas: empty grid".into()));
        }
        if !self.etas.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Parse("etas: grid must be strictly increasing".into()));
        }
        PolytopeSpec::parse(&self.polytope)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct EtaDiagnostics {
    pub t: f64,
    pub t_star: f64,
    pub s: f64,
    pub u_star: f64,
    pub ks_v_rate: f64,
    pub p_sandwich_inner: f64,
    pub p_sandwich_outer: f64,
    /// Replications with A true but a sandwich flag false.
    pub sandwich_exceptions: usize,
    /// max over A-true replications of |P(v ≤ T*) ∩ X|/(F·ln^(d−1)η·lln η).
    pub event_a_wet_ratio: f64,
    /// Largest |Σζ_j − (V(P) − V(Π_η))| in volume mode.
    pub zeta_vol_max_residual: f64,
    /// Replications where Σζ_i = f_ℓ failed on a simplicial hull.
    pub zeta_face_failures: usize,
    pub non_simplicial: usize,
    /// D/(F⁶·(lln η)^(6(d−1))).
    pub degree_ratio: f64,
    pub degree_bound: usize,
    pub reflexive: bool,
    pub symmetric: bool,
    pub s_prime_bound: f64,
    pub b_count_bound: f64,
    pub transference: Option<TransferenceReport>,
}

/// Per-η summary. Field names are the stable JSON keys.
#[derive(Debug, Clone, Serialize, PartialEq)]
#[allow(non_snake_case)]
pub struct SummaryStats {
    pub eta: f64,
    pub R: usize,
    pub mean_V: f64,
    pub var_V: f64,
    pub mean_f: Vec<f64>,
    pub var_f: Vec<f64>,
    pub ks_V: Option<f64>,
    pub ks_f: Vec<Option<f64>>,
    pub p_A: f64,
    pub p_B: f64,
    pub p_sandwich: f64,
    pub ratio_V: f64,
    pub ratio_f: Vec<f64>,
    pub var_ratio_V: f64,
    pub var_ratio_f: Vec<f64>,
    pub rinott_V: Option<f64>,
    pub rinott_f: Option<f64>,
    pub D: usize,
    pub m: usize,
    pub M_vol: f64,
    pub M_face: f64,
    pub constants: Constants,
    pub seed: u64,
    pub diagnostics: EtaDiagnostics,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub polytope: String,
    pub dim: usize,
    pub flags: u64,
    pub b2: f64,
    pub per_eta: Vec<SummaryStats>,
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub records: Vec<ReplicationRecord>,
    pub summary: ExperimentSummary,
    /// Set when a stage failed; records and summary hold what finished.
    pub error: Option<Error>,
}

/// splitmix64 finalizer, for deriving independent seeds from a root seed.
pub fn derive_seed(root: u64, tag: u64) -> u64 {
    let mut z = root ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(0x6a09_e667_f3bc_c909);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn frac(records: &[ReplicationRecord], f: impl Fn(&ReplicationRecord) -> bool) -> f64 {
    records.iter().filter(|r| f(r)).count() as f64 / records.len() as f64
}

/// Per-η summary from the records of that η.
pub fn summarize(p: &Polytope, ctx: &ExperimentContext, records: &[ReplicationRecord], seed: u64) -> SummaryStats {
    let d = p.dim;
    let eta = ctx.scales.eta;
    let flags = p.flag_count() as f64;
    let vs: Vec<f64> = records.iter().map(|r| r.volume).collect();
    let fs: Vec<Vec<f64>> = (0..d).map(|ell| records.iter().map(|r| r.f[ell] as f64).collect()).collect();
    let exp = expectation_ratios(records, p, eta);
    let var = variance_check(records, p, eta);
    let ks_v = ks_normal(&vs).ok();
    let m_face = records.iter().map(|r| r.max_zeta_face).fold(0.0, f64::max);
    let g = &ctx.graph;
    let a_recs: Vec<&ReplicationRecord> = records.iter().filter(|r| r.event_a).collect();
    let wet_norm = flags * eta.ln().powi(d as i32 - 1) * ctx.scales.lln;
    SummaryStats {
        eta,
        R: records.len(),
        mean_V: mean(&vs),
        var_V: variance(&vs),
        mean_f: fs.iter().map(|f| mean(f)).collect(),
        var_f: fs.iter().map(|f| variance(f)).collect(),
        ks_V: ks_v,
        ks_f: fs.iter().map(|f| ks_normal(f).ok()).collect(),
        p_A: frac(records, |r| r.event_a),
        p_B: frac(records, |r| r.event_b),
        p_sandwich: frac(records, |r| r.sandwich_inner && r.sandwich_outer),
        ratio_V: exp.ratio_v,
        ratio_f: exp.ratio_f,
        var_ratio_V: var.var_ratio_v,
        var_ratio_f: var.var_ratio_f,
        rinott_V: rinott_bound(ctx.m(), g.max_degree, ctx.m_vol, variance(&vs).sqrt()).ok(),
        rinott_f: rinott_bound(ctx.m(), g.max_degree, m_face, variance(&fs[0]).sqrt()).ok(),
        D: g.max_degree,
        m: ctx.m(),
        M_vol: ctx.m_vol,
        M_face: m_face,
        constants: ctx.scales.constants,
        seed,
        diagnostics: EtaDiagnostics {
            t: ctx.scales.t,
            t_star: ctx.scales.t_star,
            s: ctx.scales.s,
            u_star: ctx.scales.u_star,
            ks_v_rate: ks_v.map_or(f64::NAN, |k| k * eta.ln().powf((d as f64 - 1.0) / 2.0)),
            p_sandwich_inner: frac(records, |r| r.sandwich_inner),
            p_sandwich_outer: frac(records, |r| r.sandwich_outer),
            sandwich_exceptions: a_recs.iter().filter(|r| !(r.sandwich_inner && r.sandwich_outer)).count(),
            event_a_wet_ratio: a_recs.iter().map(|r| r.wet_t_star as f64 / wet_norm).fold(0.0, f64::max),
            zeta_vol_max_residual: records.iter().map(|r| r.zeta_vol_residual).fold(0.0, f64::max),
            zeta_face_failures: records.iter().filter(|r| !r.zeta_face_exact).count(),
            non_simplicial: records.iter().filter(|r| r.non_simplicial).count(),
            degree_ratio: g.max_degree as f64 / (flags.powi(6) * ctx.scales.lln.powi(6 * (d as i32 - 1))),
            degree_bound: g.degree_bound(),
            reflexive: g.is_reflexive(),
            symmetric: g.is_symmetric(),
            s_prime_bound: ctx.scales.s_prime_bound(),
            b_count_bound: ctx.b_count_bound(),
            transference: transference_diagnostics(records, p.volume).ok(),
        },
    }
}

/// All replications over the grid. Replication i at the k-th η draws from
/// stream i under a seed derived from (root seed, k), so the output does not
/// depend on the number of worker threads.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let p = PolytopeSpec::parse(&config.polytope)?.build()?;
    let constants = config.constants.resolve(p.dim)?;
    let b2 = fit_b2(&p, &config.etas, constants, config.budgets.wet_samples, derive_seed(config.seed, u64::MAX))?;
    let mut out = ExperimentOutput {
        records: Vec::new(),
        summary: ExperimentSummary {
            polytope: config.polytope.clone(),
            dim: p.dim,
            flags: p.flag_count(),
            b2,
            per_eta: Vec::new(),
        },
        error: None,
    };
    for (k, &eta) in config.etas.iter().enumerate() {
        let seed = derive_seed(config.seed, k as u64);
        let ctx = match ExperimentScales::new(p.dim, eta, constants)
            .and_then(|sc| ExperimentContext::build(&p, sc, b2, &config.budgets, seed))
        {
            Ok(c) => c,
            Err(e) => {
                out.error = Some(e);
                return Ok(out);
            }
        };
        let recs: Vec<Result<ReplicationRecord>> = (0..config.replications as u64)
            .into_par_iter()
            .map(|i| replicate(&p, &ctx, seed, i, i))
            .collect();
        let mut done = Vec::with_capacity(recs.len());
        for r in recs {
            match r {
                Ok(r) => done.push(r),
                Err(e) => {
                    out.error = Some(e);
                    break;
                }
            }
        }
        if out.error.is_some() {
            out.records.extend(done);
            return Ok(out);
        }
        out.summary.per_eta.push(summarize(&p, &ctx, &done, seed));
        out.records.extend(done);
    }
    Ok(out)
}

pub fn write_records_csv(path: &Path, d: usize, records: &[ReplicationRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path).map_err(csv_err)?;
    w.write_record(crate::process::ReplicationRecord::header(d)).map_err(csv_err)?;
    for r in records {
        w.write_record(r.fields()).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn summary_json(summary: &ExperimentSummary) -> String {
    let mut s = serde_json::to_string_pretty(summary).expect("summary serializes");
    s.push('\n');
    s
}

/// Rows (η, ks_V, ks_f0, ratio_V) for plotting.
pub fn plot_tsv(summary: &ExperimentSummary) -> String {
    let mut s = String::from("eta\tks_V\tks_f0\tratio_V\n");
    let opt = |x: Option<f64>| x.map_or("nan".to_string(), |v| format!("{v}"));
    for e in &summary.per_eta {
        s.push_str(&format!("{}\t{}\t{}\t{}\n", e.eta, opt(e.ks_V), opt(e.ks_f.first().copied().flatten()), e.ratio_V));
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}
