//! Acceptance run. Every test prints one `PASS` or `FAIL` line for its
//! criterion and then fails when the criterion does.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;

use polylab::caps::level::{boundary_point_at_level, wet_part_volume};
use polylab::caps::minimal::{minimal_cap, CapSearch};
use polylab::caps::{dilate, gauge, macbeath, macbeath_regions_intersect, make_cap, v_at};
use polylab::covering::{cap_covering, saturate, verify_covering};
use polylab::polytope::halfspace_vertices;
use polylab::process::{fit_b2, Budgets, Constants, ExperimentContext, ExperimentScales};
use polylab::stats::rinott_bound;
use polylab::{builtin, stream_rng, Polytope, TAU_GEOM, TAU_LEVEL, TAU_VOL};
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde_json::Value;

const KS_NOISE: f64 = 1.63;
const VARIANCE_FLOOR: f64 = 0.01;
const DEGREE_RATIO_CEILING: f64 = 1e-3;

fn verdict(n: usize, name: &str, pass: bool, detail: String) {
    println!("{} criterion {n} ({name}): {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} ({name}) failed: {detail}");
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

struct Canonical {
    dir: tempfile::TempDir,
    summary: Value,
}

impl Canonical {
    fn per_eta(&self) -> &[Value] {
        self.summary["per_eta"].as_array().unwrap()
    }

    fn series(&self, f: impl Fn(&Value) -> f64) -> Vec<f64> {
        self.per_eta().iter().map(f).collect()
    }

    fn run_dir(&self, jobs: usize) -> PathBuf {
        self.dir.path().join(format!("jobs{jobs}"))
    }
}

/// The canonical configuration, run through the binary once on one worker
/// and once on four.
fn canonical() -> &'static Canonical {
    static RUN: OnceLock<Canonical> = OnceLock::new();
    RUN.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let config = root().join("configs/canonical_square.json");
        for jobs in [1, 4] {
            let out = dir.path().join(format!("jobs{jobs}"));
            let o = Command::new(env!("CARGO_BIN_EXE_polylab"))
                .args(["--jobs", &jobs.to_string(), "clt", "--config"])
                .arg(&config)
                .arg("--out-dir")
                .arg(&out)
                .output()
                .unwrap();
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        }
        let summary = serde_json::from_slice(&std::fs::read(dir.path().join("jobs1/summary.json")).unwrap()).unwrap();
        Canonical { dir, summary }
    })
}

fn fmt(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

#[test]
fn criterion_01_expectation_asymptotics() {
    let c = canonical();
    let r = c.series(|e| e["ratio_V"].as_f64().unwrap());
    let last = *r.last().unwrap();
    let in_band = (0.7..=1.3).contains(&last);
    let drift = (last - 1.0).abs() < (r[0] - 1.0).abs();
    verdict(
        1,
        "expectation asymptotics",
        in_band && drift,
        format!("ratio_V over η = 1e3, 1e4, 1e5: {}; in [0.7, 1.3]: {in_band}; |r(1e5) − 1| < |r(1e3) − 1|: {drift}", fmt(&r)),
    );
}

#[test]
fn criterion_02_clt_normality() {
    let c = canonical();
    let ks_v = c.series(|e| e["ks_V"].as_f64().unwrap());
    let ks_f = c.series(|e| e["ks_f"][0].as_f64().unwrap());
    let reps = c.per_eta()[0]["R"].as_f64().unwrap();
    let noise = 2.0 * KS_NOISE / reps.sqrt();
    let small = *ks_v.last().unwrap() < 0.05 && *ks_f.last().unwrap() < 0.05;
    let trend = |k: &[f64]| k.windows(2).all(|w| w[1] <= w[0] + noise);
    let rate = c.series(|e| e["diagnostics"]["ks_v_rate"].as_f64().unwrap());
    verdict(
        2,
        "CLT normality",
        small && trend(&ks_v) && trend(&ks_f),
        format!(
            "KS(V) {}, KS(f0) {}, both < 0.05 at 1e5: {small}; nonincreasing within {noise:.4}: {} / {}; KS(V)·(ln η)^(1/2) {}",
            fmt(&ks_v),
            fmt(&ks_f),
            trend(&ks_v),
            trend(&ks_f),
            fmt(&rate)
        ),
    );
}

#[test]
fn criterion_03_variance_lower_bounds() {
    let c = canonical();
    let v = c.series(|e| e["var_ratio_V"].as_f64().unwrap());
    let f = c.series(|e| e["var_ratio_f"][0].as_f64().unwrap());
    let ok = |xs: &[f64]| xs.iter().all(|&x| x >= VARIANCE_FLOOR) && xs.windows(2).all(|w| w[1] >= 0.5 * w[0]);
    verdict(
        3,
        "variance lower bounds",
        ok(&v) && ok(&f),
        format!("Var(V)·η²/(F ln η) {}, Var(f0)/(F ln η) {}; floor {VARIANCE_FLOOR}, no halving per decade", fmt(&v), fmt(&f)),
    );
}

#[test]
fn criterion_04_economic_cap_covering() {
    let mut pass = true;
    let mut detail = Vec::new();
    for d in [2, 3] {
        let p = builtin("cube", d).unwrap();
        for s in [1e-2, 1e-3] {
            let cov = cap_covering(&p, saturate(&p, s, 4, Budgets::default().patience).unwrap()).unwrap();
            let r = verify_covering(&p, &cov, 10_000, 2.0, 4);
            let vb = &r.volume_bound_pass;
            let ok = vb.outer_violations == 0
                && vb.inner_violations == 0
                && r.coverage_fraction == 1.0
                && r.inner_in_wet_fraction == 1.0
                && r.claim21_fraction == 1.0;
            pass &= ok;
            detail.push(format!(
                "cube:{d} s={s}: m={} bound violations {}/{}, coverage {}, K' in wet part {}, λ = 2 dilated coverage {}, small caps {}",
                r.m,
                vb.outer_violations,
                vb.inner_violations,
                r.coverage_fraction,
                r.inner_in_wet_fraction,
                r.claim21_fraction,
                r.small_cap_fraction
            ));
        }
    }
    verdict(4, "economic cap covering", pass, detail.join("; "));
}

fn unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    g.iter().map(|x| x / n).collect()
}

fn zoo() -> &'static [Polytope] {
    static ZOO: OnceLock<Vec<Polytope>> = OnceLock::new();
    ZOO.get_or_init(|| {
        let mut v: Vec<Polytope> = [("cube", 2), ("simplex", 2), ("cube", 3), ("simplex", 3), ("cross-polytope", 3)]
            .iter()
            .map(|&(n, d)| builtin(n, d).unwrap())
            .collect();
        for (seed, d, n) in [(1u64, 2, 9), (2, 2, 6), (3, 3, 14)] {
            let mut rng = stream_rng(seed, 77);
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let r = 0.6 + 0.4 * rng.random::<f64>();
                    unit_vector(d, &mut rng).iter().map(|x| x * r).collect()
                })
                .collect();
            v.push(Polytope::build_from_vertices(&pts).unwrap());
        }
        v
    })
}

fn le(a: f64, b: f64) -> bool {
    a <= b + TAU_VOL * a.abs().max(b.abs()) + 1e-15
}

/// Runs `check` on instances drawn from `seed` until `want` of them are
/// non-vacuous; returns (instances, violations).
fn suite(seed: u64, want: usize, mut check: impl FnMut(&Polytope, &mut dyn RngCore) -> Option<bool>) -> (usize, usize) {
    let mut rng = stream_rng(seed, 0);
    let (mut n, mut bad, mut tries) = (0, 0, 0);
    while n < want {
        tries += 1;
        assert!(tries < 50 * want, "suite {seed}: too many vacuous instances");
        let p = &zoo()[rng.random_range(0..zoo().len())];
        if let Some(ok) = check(p, &mut rng) {
            n += 1;
            bad += !ok as usize;
        }
    }
    (n, bad)
}

#[test]
fn criterion_05_volume_estimates_and_cap_lemmas() {
    let n = 1000;
    let mut rows: Vec<(&str, (usize, usize))> = Vec::new();

    rows.push((
        "trivial estimates, λ ≥ 1",
        suite(51, n, |p, rng| {
            let u = unit_vector(p.dim, rng);
            let w = p.width(&u);
            let frac = rng.random_range(0.001..0.999);
            let lambda = 1.0 + rng.random::<f64>() * (1.0 / frac - 1.0);
            let c = make_cap(p, &u, frac * w).ok()?;
            if lambda * c.depth >= w {
                return None;
            }
            let cl = dilate(p, &c, lambda).ok()?;
            Some(le(lambda / p.dim as f64 * c.volume, cl.volume) && le(cl.volume, lambda.powi(p.dim as i32) * c.volume))
        }),
    ));
    rows.push((
        "trivial estimates, μ < 1",
        suite(52, n, |p, rng| {
            let u = unit_vector(p.dim, rng);
            let c = make_cap(p, &u, rng.random_range(0.001..0.999) * p.width(&u)).ok()?;
            let mu: f64 = rng.random_range(0.001..1.0);
            let cm = dilate(p, &c, mu).ok()?;
            Some(le(mu.powi(p.dim as i32) * c.volume, cm.volume) && le(cm.volume, p.dim as f64 * mu * c.volume))
        }),
    ));
    rows.push((
        "half regions meeting nest in M(y, 5)",
        suite(53, n, |p, rng| {
            let x = p.sample_uniform(rng);
            let w = p.sample_uniform(rng);
            let r: f64 = rng.random();
            let y: Vec<f64> = x.iter().zip(&w).map(|(a, b)| a + r * r * (b - a)).collect();
            if p.slack(&x) <= TAU_GEOM || p.slack(&y) <= TAU_GEOM || !macbeath_regions_intersect(p, &x, 0.5, &y, 0.5) {
                return None;
            }
            let my5 = macbeath(p, &y, 5.0).ok()?;
            Some(macbeath(p, &x, 1.0).ok()?.vertices.iter().all(|v| my5.contains(v)))
        }),
    ));
    rows.push((
        "P ∩ M(z, λ) inside C^(λ+1)",
        suite(54, n, |p, rng| {
            let u = unit_vector(p.dim, rng);
            let c = make_cap(p, &u, rng.random_range(0.01..0.9) * p.width(&u)).ok()?;
            let z = c.slice(p).ok()?.sample_uniform(rng);
            let lambda = rng.random_range(0.05..4.0);
            if p.slack(&z) <= 1e-7 {
                return None;
            }
            let m = macbeath(p, &z, lambda).ok()?;
            let mut normals: Vec<Vec<f64>> = p.facets.iter().map(|f| f.normal.clone()).collect();
            let mut offsets: Vec<f64> = p.facets.iter().map(|f| f.offset).collect();
            normals.extend(m.normals.iter().cloned());
            offsets.extend(m.offsets.iter().copied());
            let verts = halfspace_vertices(&normals, &offsets, &z).ok()?;
            Some(verts.iter().all(|v| c.dilate_contains(v, lambda + 1.0)))
        }),
    ));
    // C ⊂ M(z, μ) with μ the least such factor; check C^λ ⊂ M(z, λμ)
    let mut worst: f64 = 0.0;
    rows.push((
        "C^λ inside M(z, λμ)",
        suite(55, n, |p, rng| {
            let u = unit_vector(p.dim, rng);
            let c = make_cap(p, &u, rng.random_range(0.01..0.9) * p.width(&u)).ok()?;
            let z = p.sample_uniform(rng);
            let lambda = rng.random_range(1.0..6.0);
            if p.slack(&z) <= 1e-7 {
                return None;
            }
            let mu = c.slice_vertices(p).iter().map(|v| gauge(p, &z, v)).fold(0.0, f64::max);
            let cl = dilate(p, &c, lambda).ok()?;
            let g = cl.slice_vertices(p).iter().map(|v| gauge(p, &z, v)).fold(0.0, f64::max);
            worst = worst.max(g / (lambda * mu));
            Some(g <= lambda * mu * (1.0 + TAU_GEOM) + TAU_GEOM)
        }),
    ));
    let planar: Vec<usize> = (0..zoo().len()).filter(|&k| zoo()[k].dim == 2).collect();
    let search2 = CapSearch::default_for(2);
    let mut rng = stream_rng(56, 0);
    let mut bad = 0;
    for i in 0..n {
        let p = &zoo()[planar[i % planar.len()]];
        let s = v_at(p, &p.centroid).unwrap() * 10f64.powf(-rng.random_range(0.05..3.0));
        let z = boundary_point_at_level(p, &unit_vector(2, &mut rng), s).unwrap();
        let mc = minimal_cap(p, &z, search2).unwrap();
        let c = make_cap(p, &mc.cap.direction, mc.cap.depth).unwrap();
        bad += !(c.volume >= s * (1.0 - TAU_LEVEL) && c.volume <= 2.0 * s * (1.0 + TAU_LEVEL)) as usize;
    }
    rows.push(("tangent caps between s and d·s", (n, bad)));

    let pass = rows.iter().all(|(_, (_, b))| *b == 0);
    let detail: Vec<String> = rows.iter().map(|(name, (k, b))| format!("{name}: {b} of {k} violated")).collect();
    verdict(
        5,
        "trivial volume estimates and cap lemmas",
        pass,
        format!("{}; largest gauge of C^λ over λμ: {worst:.3}", detail.join("; ")),
    );
}

#[test]
fn criterion_06_wet_part_asymptotics() {
    let p = builtin("cube", 2).unwrap();
    let mut ratios = Vec::new();
    let mut ses = Vec::new();
    for (k, (s, budget)) in [(1e-2f64, 60_000), (1e-3, 400_000), (1e-4, 2_500_000)].into_iter().enumerate() {
        let e = wet_part_volume(&p, s, budget, &mut stream_rng(61, k as u64)).unwrap();
        let norm = 2.0 * s * (1.0 / s).ln();
        ratios.push(e.value / norm);
        ses.push(e.se / norm);
    }
    let se_ok = ratios.iter().zip(&ses).all(|(r, se)| *se <= 0.02 * r);
    let band = ratios.iter().all(|r| (0.5..=1.5).contains(r));
    let dev: Vec<f64> = ratios.iter().map(|r| (r - 1.0).abs()).collect();
    let toward = dev[2] < dev[0] && (0..2).all(|k| dev[k + 1] <= dev[k] + 2.0 * (ses[k] * ses[k] + ses[k + 1] * ses[k + 1]).sqrt());
    verdict(
        6,
        "wet-part asymptotics",
        se_ok && band && toward,
        format!(
            "V(P(v ≤ s))/(2 s ln(1/s)) at s = 1e-2, 1e-3, 1e-4: {} (SE {}); in [0.5, 1.5]: {band}; toward 1: {toward}",
            fmt(&ratios),
            fmt(&ses)
        ),
    );
}

#[test]
fn criterion_07_sandwiching() {
    let c = canonical();
    let ps = c.series(|e| e["p_sandwich"].as_f64().unwrap());
    let exceptions: Vec<f64> = c.series(|e| e["diagnostics"]["sandwich_exceptions"].as_f64().unwrap());
    let pa = c.series(|e| e["p_A"].as_f64().unwrap());
    let pass = *ps.last().unwrap() >= 0.99 && ps.windows(2).all(|w| w[1] >= w[0]) && exceptions.iter().all(|&x| x == 0.0);
    verdict(
        7,
        "sandwiching",
        pass,
        format!("P(sandwich) {}, P(A) {}, event A without both flags {}", fmt(&ps), fmt(&pa), fmt(&exceptions)),
    );
}

#[test]
fn criterion_08_dependency_graph() {
    let c = canonical();
    let mut pass = true;
    let mut detail = Vec::new();
    for e in c.per_eta() {
        let dg = &e["diagnostics"];
        let (d, bound) = (e["D"].as_u64().unwrap(), dg["degree_bound"].as_u64().unwrap());
        let ratio = dg["degree_ratio"].as_f64().unwrap();
        let ok = dg["reflexive"] == true && dg["symmetric"] == true && d <= bound && ratio > 0.0 && ratio <= DEGREE_RATIO_CEILING;
        pass &= ok;
        detail.push(format!("square η={}: D={d} ≤ {bound}, ratio {ratio:.3e}", e["eta"]));
    }
    // the triangle as a second computed instance
    let p = builtin("simplex", 2).unwrap();
    let consts = Constants::desk_default(2);
    let etas = [1e3, 1e4];
    let b2 = fit_b2(&p, &etas, consts, 20_000, 81).unwrap();
    for eta in etas {
        let ctx = ExperimentContext::build(&p, ExperimentScales::new(2, eta, consts).unwrap(), b2, &Budgets::default(), 81).unwrap();
        let g = &ctx.graph;
        let ok = g.is_reflexive() && g.is_symmetric() && g.max_degree <= g.degree_bound();
        pass &= ok;
        detail.push(format!("triangle η={eta}: D={} ≤ {}", g.max_degree, g.degree_bound()));
    }
    verdict(8, "dependency-graph structure", pass, format!("{}; ceiling {DEGREE_RATIO_CEILING:e}", detail.join("; ")));
}

#[test]
fn criterion_09_rinott_bound() {
    let hand = rinott_bound(100, 4, 1.0, 10.0).unwrap();
    let exact = (hand - 28.95958).abs() <= 1e-5;
    let mut lattice = true;
    let vs = [1usize, 10, 100, 1000];
    let ds = [0usize, 1, 4, 16];
    let ms = [0.1, 1.0, 10.0];
    let sigmas = [0.5, 1.0, 10.0];
    for (i, &v) in vs.iter().enumerate() {
        for (j, &d) in ds.iter().enumerate() {
            for (k, &m) in ms.iter().enumerate() {
                for (l, &sigma) in sigmas.iter().enumerate() {
                    let b = rinott_bound(v, d, m, sigma).unwrap();
                    if i + 1 < vs.len() {
                        lattice &= rinott_bound(vs[i + 1], d, m, sigma).unwrap() >= b;
                    }
                    if j + 1 < ds.len() {
                        lattice &= rinott_bound(v, ds[j + 1], m, sigma).unwrap() >= b;
                    }
                    if k + 1 < ms.len() {
                        lattice &= rinott_bound(v, d, ms[k + 1], sigma).unwrap() >= b;
                    }
                    if l + 1 < sigmas.len() {
                        lattice &= rinott_bound(v, d, m, sigmas[l + 1]).unwrap() <= b;
                    }
                }
            }
        }
    }
    verdict(9, "Rinott bound", exact && lattice, format!("(100, 4, 1, 10) → {hand:.6}; monotone lattice: {lattice}"));
}

#[test]
fn criterion_10_bookkeeping() {
    let c = canonical();
    let resid = c.series(|e| e["diagnostics"]["zeta_vol_max_residual"].as_f64().unwrap());
    let face = c.series(|e| e["diagnostics"]["zeta_face_failures"].as_f64().unwrap());
    let conditioning: Vec<bool> = c
        .per_eta()
        .iter()
        .map(|e| {
            let t = &e["diagnostics"]["transference"];
            t["volume"]["conditioning_holds"] == true && t["f0"]["conditioning_holds"] == true
        })
        .collect();
    let pass = resid.iter().all(|&r| r <= TAU_VOL) && face.iter().all(|&f| f == 0.0) && conditioning.iter().all(|&b| b);
    verdict(
        10,
        "bookkeeping exactness",
        pass,
        format!("max |Σζ − (1 − V)| {resid:?}, face-sum failures {face:?}, conditioning inequality on the means {conditioning:?}"),
    );
}

#[test]
fn criterion_11_determinism() {
    let c = canonical();
    let mut same = Vec::new();
    for f in ["records.csv", "summary.json", "plot.tsv"] {
        let a = std::fs::read(c.run_dir(1).join(f)).unwrap();
        let b = std::fs::read(c.run_dir(4).join(f)).unwrap();
        same.push((f, !a.is_empty() && a == b));
    }
    let manifest = |jobs| -> Value { serde_json::from_slice(&std::fs::read(c.run_dir(jobs).join("manifest.json")).unwrap()).unwrap() };
    let (m1, m4) = (manifest(1), manifest(4));
    let hash_same = m1["config_hash"] == m4["config_hash"] && m1["config"] == m4["config"];
    verdict(
        11,
        "determinism",
        same.iter().all(|x| x.1) && hash_same,
        format!("byte-identical between 1 and 4 workers: {same:?}; manifest config and hash equal: {hash_same}"),
    );
}
