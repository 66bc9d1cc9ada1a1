//! The reproduction battery: ten numbered criteria, each run to a pinned
//! tolerance and reported as one pass/fail line. Shared by the `acceptance`
//! test target and `cubesec reproduce`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::planar::{claim_bounds, g, h, planar_area, q, PlanarAngles};
use crate::bounds::{ball_upper, balanced_partition, c_cube, extremal_frame, vaaler_lower};
use crate::conditions::{verify_section, ConditionsReport};
use crate::error::{Error, Result};
use crate::exact::{exact_extremal_frame, parallelotope_volume_squared};
use crate::frame::{
    cross_product_frame, det_rank_one, random_frame, random_tight_frame, sqrt_det_first_order,
    sqrt_det_slope, UpdateSign, CROSS_PRODUCT_CAP,
};
use crate::linalg::{dot, norm, SymMatrix};
use crate::optimizer::{maximize, OptimizeResult, OptimizerConfig};
use crate::polytope::{build_section, rotate_facet_predict, shift_facet_predict};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    PlanarOptimum,
    ExtremalExactness,
    BoundOrdering,
    LengthBounds,
    FirstOrderConditions,
    DeterminantCalculus,
    TransformationDerivatives,
    CrossProductFrame,
    PlanarClaims,
    ConjectureEvidence,
}

pub const ALL: [Criterion; 10] = [
    Criterion::PlanarOptimum,
    Criterion::ExtremalExactness,
    Criterion::BoundOrdering,
    Criterion::LengthBounds,
    Criterion::FirstOrderConditions,
    Criterion::DeterminantCalculus,
    Criterion::TransformationDerivatives,
    Criterion::CrossProductFrame,
    Criterion::PlanarClaims,
    Criterion::ConjectureEvidence,
];

impl Criterion {
    pub fn number(self) -> usize {
        ALL.iter().position(|&c| c == self).unwrap() + 1
    }

    pub fn id(self) -> &'static str {
        match self {
            Criterion::PlanarOptimum => "planar-optimum",
            Criterion::ExtremalExactness => "extremal-exactness",
            Criterion::BoundOrdering => "bound-ordering",
            Criterion::LengthBounds => "length-bounds",
            Criterion::FirstOrderConditions => "first-order-conditions",
            Criterion::DeterminantCalculus => "determinant-calculus",
            Criterion::TransformationDerivatives => "transformation-derivatives",
            Criterion::CrossProductFrame => "cross-product-frame",
            Criterion::PlanarClaims => "planar-claims",
            Criterion::ConjectureEvidence => "conjecture-evidence",
        }
    }

    /// Accepts the id or the criterion number.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Ok(i) = s.parse::<usize>() {
            return ALL.get(i.checked_sub(1)?).copied();
        }
        ALL.into_iter().find(|c| c.id() == s)
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AcceptanceConfig {
    pub seed: u64,
    /// Caps n in every grid; the stated grids apply when this is at least 12.
    pub n_max: usize,
    pub restarts: usize,
    /// Random frames per (n, k) cell for the bound-ordering sweep.
    pub samples: usize,
    pub tolerances: Tolerances,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_max: 12,
            restarts: 32,
            samples: 1000,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub number: usize,
    pub id: &'static str,
    pub passed: bool,
    pub summary: String,
    /// Loud findings that do not by themselves fail the criterion.
    pub flags: Vec<String>,
    pub seconds: f64,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:>2} {:<27} {} ({:.1}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.number,
            self.id,
            self.summary,
            self.seconds
        )?;
        for flag in &self.flags {
            write!(f, "\n     !! {flag}")?;
        }
        Ok(())
    }
}

struct Verdict {
    passed: bool,
    summary: String,
    flags: Vec<String>,
}

impl Verdict {
    fn new(passed: bool, summary: String) -> Self {
        Self {
            passed,
            summary,
            flags: Vec::new(),
        }
    }
}

const PLANAR_CELLS: std::ops::RangeInclusive<usize> = 3..=10;
const CONJECTURE_CELLS: [(usize, usize); 5] = [(4, 3), (5, 3), (7, 3), (5, 4), (7, 4)];
const CONDITION_TOL: f64 = 1e-5;

/// Runs criteria, caching optimizer results shared between them.
pub struct Battery {
    config: AcceptanceConfig,
    runs: Mutex<BTreeMap<(usize, usize), Arc<OptimizeResult>>>,
}

impl Battery {
    pub fn new(config: AcceptanceConfig) -> Self {
        Self {
            config,
            runs: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn config(&self) -> &AcceptanceConfig {
        &self.config
    }

    pub fn run(&self, c: Criterion) -> Outcome {
        let start = Instant::now();
        let verdict = match c {
            Criterion::PlanarOptimum => self.planar_optimum(),
            Criterion::ExtremalExactness => self.extremal_exactness(),
            Criterion::BoundOrdering => self.bound_ordering(),
            Criterion::LengthBounds => self.length_bounds(),
            Criterion::FirstOrderConditions => self.first_order_conditions(),
            Criterion::DeterminantCalculus => self.determinant_calculus(),
            Criterion::TransformationDerivatives => self.transformation_derivatives(),
            Criterion::CrossProductFrame => self.cross_product_frame(),
            Criterion::PlanarClaims => self.planar_claims(),
            Criterion::ConjectureEvidence => self.conjecture_evidence(),
        };
        let verdict = verdict.unwrap_or_else(|e| Verdict::new(false, format!("error: {e}")));
        Outcome {
            number: c.number(),
            id: c.id(),
            passed: verdict.passed,
            summary: verdict.summary,
            flags: verdict.flags,
            seconds: start.elapsed().as_secs_f64(),
        }
    }

    pub fn run_all(&self, criteria: &[Criterion]) -> Vec<Outcome> {
        criteria.iter().map(|&c| self.run(c)).collect()
    }

    fn optimum(&self, n: usize, k: usize) -> Result<Arc<OptimizeResult>> {
        if let Some(r) = self.runs.lock().unwrap().get(&(n, k)) {
            return Ok(r.clone());
        }
        let cfg = OptimizerConfig {
            restarts: self.config.restarts,
            seed: self.config.seed,
            tolerances: self.config.tolerances,
            ..OptimizerConfig::new(n, k)
        };
        let r = Arc::new(maximize(&cfg)?);
        self.runs.lock().unwrap().insert((n, k), r.clone());
        Ok(r)
    }

    fn planar_cells(&self) -> Vec<usize> {
        PLANAR_CELLS.filter(|&n| n <= self.config.n_max).collect()
    }

    fn conjecture_cells(&self) -> Vec<(usize, usize)> {
        CONJECTURE_CELLS
            .into_iter()
            .filter(|&(n, _)| n <= self.config.n_max)
            .collect()
    }

    /// Winners of every optimizer run the battery makes.
    fn winners(&self) -> Result<Vec<((usize, usize), Arc<OptimizeResult>)>> {
        let mut cells: Vec<(usize, usize)> = self.planar_cells().into_iter().map(|n| (n, 2)).collect();
        cells.extend(self.conjecture_cells());
        cells
            .into_iter()
            .map(|(n, k)| Ok(((n, k), self.optimum(n, k)?)))
            .collect()
    }

    fn winner_conditions(&self, r: &OptimizeResult) -> Result<ConditionsReport> {
        let tol = self.config.tolerances.with_condition_tol(CONDITION_TOL);
        let p = build_section(&r.best, &tol)?;
        Ok(verify_section(&r.best, &p, &tol))
    }

    fn planar_optimum(&self) -> Result<Verdict> {
        let start = Instant::now();
        let tol = &self.config.tolerances;
        let mut failures = Vec::new();
        let mut worst_rel: f64 = 0.0;
        let mut worst_side: f64 = 0.0;
        let mut cold_misses = Vec::new();
        for n in self.planar_cells() {
            let r = self.optimum(n, 2)?;
            let (hi, lo) = (n.div_ceil(2) as f64, (n / 2) as f64);
            let target = 4.0 * (hi * lo).sqrt();
            let rel = (r.best_volume - target).abs() / target;
            worst_rel = worst_rel.max(rel);
            if rel > 1e-6 {
                failures.push(format!("n={n}: volume {} vs {target}", r.best_volume));
            }
            let p = build_section(&r.best, tol)?;
            if p.facets().len() != 4 {
                failures.push(format!("n={n}: {} edges, not a rectangle", p.facets().len()));
                continue;
            }
            let mut sides: Vec<f64> = p.facets().iter().map(|f| f.measure).collect();
            sides.sort_by(f64::total_cmp);
            let expect = [2.0 * lo.sqrt(), 2.0 * lo.sqrt(), 2.0 * hi.sqrt(), 2.0 * hi.sqrt()];
            let dev = sides
                .iter()
                .zip(expect)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            worst_side = worst_side.max(dev);
            if dev > 1e-5 {
                failures.push(format!("n={n}: sides {sides:?}"));
            }
            if let Some(c) = r.cold_best() {
                if (c.volume - target).abs() / target > 1e-6 {
                    cold_misses.push(format!("{n}:{:.3e}", (target - c.volume) / target));
                }
            }
        }
        let elapsed = start.elapsed().as_secs_f64();
        if elapsed > 300.0 {
            failures.push(format!("runtime {elapsed:.0}s exceeds 5 min"));
        }
        let mut summary = format!(
            "n=3..={}: max rel. volume error {worst_rel:.1e}, max side error {worst_side:.1e}",
            self.config.n_max.min(10)
        );
        if !cold_misses.is_empty() {
            summary += &format!("; cold-start shortfall {}", cold_misses.join(" "));
        }
        if !failures.is_empty() {
            summary += &format!("; {}", failures.join("; "));
        }
        Ok(Verdict::new(failures.is_empty(), summary))
    }

    fn extremal_exactness(&self) -> Result<Verdict> {
        let tol = &self.config.tolerances;
        let mut failures = Vec::new();
        let mut worst: f64 = 0.0;
        let mut cells = 0;
        for n in 2..=self.config.n_max.min(12) {
            for k in 1..n.min(5) {
                cells += 1;
                let sizes: Vec<usize> = balanced_partition(n, k).iter().map(Vec::len).collect();
                let prod: usize = sizes.iter().product();
                let frame = extremal_frame(n, k, None, None, tol)?;
                let p = build_section(&frame, tol)?;
                let expect = 2f64.powi(k as i32) * (prod as f64).sqrt();
                let rel = (p.volume() - expect).abs() / expect;
                worst = worst.max(rel);
                if rel > 1e-10 {
                    failures.push(format!("({n},{k}) float rel. error {rel:.1e}"));
                }
                let exact = parallelotope_volume_squared(&exact_extremal_frame(n, k, None), &p)?;
                let want = BigRational::from_integer(BigInt::from(4u32).pow(k as u32) * BigInt::from(prod));
                if exact != want {
                    failures.push(format!("({n},{k}) exact vol² {exact} ≠ {want}"));
                }
            }
        }
        let mut summary = format!("{cells} cells exact in rational mode, float rel. error ≤ {worst:.1e}");
        if !failures.is_empty() {
            summary = failures.join("; ");
        }
        Ok(Verdict::new(failures.is_empty(), summary))
    }

    fn bound_ordering(&self) -> Result<Verdict> {
        let tol = self.config.tolerances;
        let samples = self.config.samples;
        let seed = self.config.seed;
        let cells: Vec<(usize, usize)> = (2..=self.config.n_max.min(12))
            .flat_map(|n| (1..n.min(5)).map(move |k| (n, k)))
            .collect();
        let mut violations = Vec::new();
        let mut errors = 0usize;
        let mut tightest_low = f64::INFINITY;
        let mut tightest_high = f64::INFINITY;
        for &(n, k) in &cells {
            let (lo, hi) = (vaaler_lower(k), ball_upper(n, k));
            let vols: Vec<Result<f64>> = (0..samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = cell_rng(seed, n, k, i);
                    let s = random_tight_frame(&mut rng, n, k);
                    Ok(build_section(&s, &tol)?.volume())
                })
                .collect();
            for v in vols {
                match v {
                    Ok(v) => {
                        tightest_low = tightest_low.min(v / lo - 1.0);
                        tightest_high = tightest_high.min(1.0 - v / hi);
                        if v < lo * (1.0 - 1e-9) || v > hi * (1.0 + 1e-9) {
                            violations.push(format!("({n},{k}) volume {v} outside [{lo}, {hi}]"));
                        }
                    }
                    Err(_) => errors += 1,
                }
            }
        }
        let passed = violations.is_empty() && errors == 0;
        let mut summary = format!(
            "{} cells × {samples} frames, {} violations, {errors} errors; min margins {tightest_low:.2e} above 2^k, {tightest_high:.2e} below Ball",
            cells.len(),
            violations.len()
        );
        if let Some(v) = violations.first() {
            summary += &format!("; first: {v}");
        }
        Ok(Verdict::new(passed, summary))
    }

    fn length_bounds(&self) -> Result<Verdict> {
        let mut failures = Vec::new();
        let mut worst: f64 = 0.0;
        let winners = self.winners()?;
        for ((n, k), r) in &winners {
            let report = self.winner_conditions(r)?;
            match &report.length_bounds {
                Some(c) => {
                    worst = worst.max(c.residual);
                    if c.residual > 1e-8 {
                        failures.push(format!("({n},{k}) violation {:.1e}", c.residual));
                    }
                }
                None => failures.push(format!("({n},{k}) no length interval")),
            }
            if (*n, *k) == (5, 2) {
                let lens = r.best.norms_sq();
                let min = lens.iter().copied().fold(f64::INFINITY, f64::min);
                let max = lens.iter().copied().fold(0.0, f64::max);
                if (min - 1.0 / 3.0).abs() > 1e-6 || (max - 0.5).abs() > 1e-6 {
                    failures.push(format!("(5,2) extreme lengths {min}, {max} miss 1/3, 1/2"));
                }
            }
        }
        let mut summary = format!("{} winners, max violation {worst:.1e}", winners.len());
        if self.config.n_max >= 5 && failures.is_empty() {
            summary += "; (5,2) attains 1/3 and 1/2";
        }
        if !failures.is_empty() {
            summary += &format!("; {}", failures.join("; "));
        }
        Ok(Verdict::new(failures.is_empty(), summary))
    }

    fn first_order_conditions(&self) -> Result<Verdict> {
        let mut failures = Vec::new();
        let winners = self.winners()?;
        let mut worst: BTreeMap<&'static str, f64> = BTreeMap::new();
        for ((n, k), r) in &winners {
            let report = self.winner_conditions(r)?;
            for (name, c) in report.checks().filter(|(name, _)| *name != "length_bounds") {
                let w = worst.entry(name).or_insert(0.0);
                *w = w.max(c.residual);
                if !c.passed {
                    failures.push(format!(
                        "({n},{k}) {name} residual {:.1e}{}",
                        c.residual,
                        c.note.as_deref().map(|s| format!(" ({s})")).unwrap_or_default()
                    ));
                }
            }
        }
        let residuals: Vec<String> = worst.iter().map(|(k, v)| format!("{k} {v:.1e}")).collect();
        let mut summary = format!("{} winners; max residuals: {}", winners.len(), residuals.join(", "));
        if !failures.is_empty() {
            summary += &format!("; {}", failures.join("; "));
        }
        Ok(Verdict::new(failures.is_empty(), summary))
    }

    fn determinant_calculus(&self) -> Result<Verdict> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(6);
        let mut worst: f64 = 0.0;
        let mut bad_updates = 0;
        for _ in 0..1000 {
            let k = rng.random_range(1..=5);
            let n = k + rng.random_range(1..=4);
            let a = random_frame(&mut rng, n, k).operator();
            let u: Vec<f64> = (0..k).map(|_| 0.7 * rng.sample::<f64, _>(StandardNormal)).collect();
            let sign = if rng.random::<bool>() { UpdateSign::Plus } else { UpdateSign::Minus };
            let got = det_rank_one(&a, &u, sign)?;
            let mut m = a.to_dmatrix();
            let s = if sign == UpdateSign::Plus { 1.0 } else { -1.0 };
            for i in 0..k {
                for j in 0..k {
                    m[(i, j)] += s * u[i] * u[j];
                }
            }
            let direct = m.determinant();
            let rel = (got - direct).abs() / direct.abs().max(a.det());
            worst = worst.max(rel);
            if rel > 1e-10 {
                bad_updates += 1;
            }
        }

        let mut orders = Vec::new();
        let mut bad_slopes = 0;
        for _ in 0..100 {
            let k = rng.random_range(2..=4);
            let n = k + rng.random_range(1..=5);
            let s = random_tight_frame(&mut rng, n, k);
            let x: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..k).map(|_| rng.sample(StandardNormal)).collect())
                .collect();
            let exact = sqrt_det_first_order(&s, &x)?;
            let mut errs = [0.0; 3];
            for (e, t) in errs.iter_mut().zip(STEPS) {
                *e = (sqrt_det_slope(&s, &x, t)? - exact).abs();
            }
            let (ok, order) = first_order(errs, exact.abs().max(1.0));
            orders.extend(order);
            if !ok {
                bad_slopes += 1;
            }
        }
        let passed = bad_updates == 0 && bad_slopes == 0;
        Ok(Verdict::new(
            passed,
            format!(
                "rank-one: 1000 cases, max rel. error {worst:.1e}, {bad_updates} failures; √det slope: 100 cases, {bad_slopes} not first order, median order {:.2}",
                median(&mut orders)
            ),
        ))
    }

    fn transformation_derivatives(&self) -> Result<Verdict> {
        let tol = self.config.tolerances;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(7);
        let (mut shift_bad, mut rot_bad) = (Vec::new(), Vec::new());
        let (mut shift_orders, mut rot_orders) = (Vec::new(), Vec::new());
        let instances = 120;
        for i in 0..instances {
            let k = 2 + i % 2;
            let n = k + rng.random_range(1..=4);
            let s = random_tight_frame(&mut rng, n, k);
            let p = build_section(&s, &tol)?;
            let poly = &p.polytope;
            let base = poly.volume();
            let mean = poly.facets.iter().map(|f| f.measure).sum::<f64>() / poly.facets.len() as f64;
            let candidates: Vec<usize> = (0..poly.facets.len())
                .filter(|&j| poly.facets[j].measure > 0.2 * mean)
                .collect();
            let fi = candidates[rng.random_range(0..candidates.len())];
            let facet = &poly.facets[fi];

            let slope = shift_facet_predict(facet, 1.0);
            let mut errs = [0.0; 3];
            for (e, t) in errs.iter_mut().zip(STEPS) {
                let moved = poly.with_shifted_facet(fi, t, &tol)?.volume();
                *e = ((moved - base) / t - slope).abs();
            }
            let (ok, order) = first_order(errs, base);
            shift_orders.extend(order);
            if !ok {
                shift_bad.push(format!("#{i} {:.1e} {:.1e} {:.1e}", errs[0], errs[1], errs[2]));
            }

            let u = random_orthogonal_unit(&mut rng, &facet.normal);
            let slope = rotate_facet_predict(facet, &u, 1.0)?;
            for (e, t) in errs.iter_mut().zip(STEPS) {
                let moved = poly.with_rotated_facet(fi, &u, t, &tol)?.volume();
                *e = ((moved - base) / t - slope).abs();
            }
            let (ok, order) = first_order(errs, base);
            rot_orders.extend(order);
            if !ok {
                rot_bad.push(format!("#{i} {:.1e} {:.1e} {:.1e}", errs[0], errs[1], errs[2]));
            }
        }
        let passed = shift_bad.is_empty() && rot_bad.is_empty();
        let mut summary = format!(
            "{instances} instances (k=2,3): shift median order {:.2}, {} failures; rotation median order {:.2}, {} failures",
            median(&mut shift_orders),
            shift_bad.len(),
            median(&mut rot_orders),
            rot_bad.len()
        );
        if let Some(b) = shift_bad.first().or(rot_bad.first()) {
            summary += &format!("; first failure {b}");
        }
        Ok(Verdict::new(passed, summary))
    }

    fn cross_product_frame(&self) -> Result<Verdict> {
        let tol = self.config.tolerances;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(8);
        let mut worst: f64 = 0.0;
        let mut cases = 0;
        let mut failures = 0;
        for k in 2..=4 {
            for n in k..=self.config.n_max.min(8) {
                for _ in 0..20 {
                    let s = random_tight_frame(&mut rng, n, k);
                    let cp = cross_product_frame(&s, CROSS_PRODUCT_CAP)?;
                    let dev = SymMatrix::sum_of_outer(k, cp.iter().map(Vec::as_slice)).identity_deviation();
                    worst = worst.max(dev);
                    cases += 1;
                    if !(dev <= tol.tight) {
                        failures += 1;
                    }
                }
            }
        }
        Ok(Verdict::new(
            failures == 0,
            format!(
                "{cases} frames, max |Σ c cᵀ − I| = {worst:.1e} (tolerance {:.0e}), {failures} failures",
                tol.tight
            ),
        ))
    }

    fn planar_claims(&self) -> Result<Verdict> {
        let mut failures = Vec::new();
        fn check(failures: &mut Vec<String>, name: &str, got: f64, want: f64) {
            if !((got - want).abs() <= 1e-12) {
                failures.push(format!("{name} = {got}, expected {want}"));
            }
        }
        let s3 = 3f64.sqrt();
        check(&mut failures, "g(3)", g(3.0), s3);
        check(&mut failures, "h(7)", h(7.0), s3);
        check(&mut failures, "g(4)", g(4.0), 4.0 * (2f64.sqrt() - 1.0));
        check(&mut failures, "g(5)", g(5.0), (5.0 * (5.0 - 2.0 * 5f64.sqrt())).sqrt());
        check(&mut failures, "h(5)", h(5.0), 2.0 * 6f64.sqrt() / 3.0);

        let g_dec = (2..64).all(|f| g(f as f64 + 1.0) < g(f as f64));
        let h_inc = (2..64).all(|n| h(n as f64 + 1.0) >= h(n as f64));
        if !g_dec || !h_inc {
            failures.push("g not strictly decreasing or h not increasing on [2, 64]".into());
        }

        for n in 8..=64 {
            if claim_bounds(n) != 2 {
                failures.push(format!("claim_bounds({n}) = {}", claim_bounds(n)));
            }
        }
        if claim_bounds(7) > 3 {
            failures.push(format!("claim_bounds(7) = {}", claim_bounds(7)));
        }
        if claim_bounds(5) > 4 {
            failures.push(format!("claim_bounds(5) = {}", claim_bounds(5)));
        }

        // n = 7 regular hexagon: |v|² = 2/7 and R² = 14/3.
        let r2: f64 = 14.0 / 3.0;
        let hexagon = planar_area(&PlanarAngles::regular(3, r2.sqrt())?);
        let shoelace = regular_polygon_area(6, r2.sqrt());
        let limit = 4.0 * c_cube(7, 2);
        if (hexagon - shoelace).abs() > 1e-12 * shoelace || !(hexagon < limit) {
            failures.push(format!("hexagon area {hexagon} (shoelace {shoelace}) vs 4·C(7,2) = {limit}"));
        }
        // Inradius check: the edge line ⟨x, v⟩ = 1 sits at distance 1/|v|.
        let inradius = r2.sqrt() * (PI / 6.0).cos();
        if (inradius - (7.0f64 / 2.0).sqrt()).abs() > 1e-12 {
            failures.push(format!("hexagon inradius {inradius} ≠ √(7/2)"));
        }

        let (lo, hi) = (PI / 10.0, PI / 4.0);
        let q_max = q(golden_max(q, lo, hi));
        let q_min = q(lo).min(q(hi));
        let grid_min = (0..=10_000)
            .map(|i| q(lo + (hi - lo) * i as f64 / 10_000.0))
            .fold(f64::INFINITY, f64::min);
        check(&mut failures, "max q", q_max, 3.0 * s3 / 8.0);
        check(&mut failures, "min q", q_min.min(grid_min), 0.5);
        let ratio = q_max / q_min;
        if !(ratio < 2.0) || (ratio - 3.0 * s3 / 4.0).abs() > 1e-12 {
            failures.push(format!("q ratio {ratio}"));
        }

        let summary = if failures.is_empty() {
            format!(
                "table values to 1e-12, claim bounds hold, hexagon {hexagon:.6} < {limit:.6}, q ratio {ratio:.6} < 2"
            )
        } else {
            failures.join("; ")
        };
        Ok(Verdict::new(failures.is_empty(), summary))
    }

    fn conjecture_evidence(&self) -> Result<Verdict> {
        let mut failures = Vec::new();
        let mut flags = Vec::new();
        let mut cells = Vec::new();
        for (n, k) in self.conjecture_cells() {
            let r = self.optimum(n, k)?;
            let target = vaaler_lower(k) * c_cube(n, k);
            let gap = r.best_volume - target;
            let cold = r.cold_best().map_or(f64::NAN, |c| c.volume);
            cells.push(format!("({n},{k}) {:.6} (cold {cold:.6}, 2^k·C {target:.6})", r.best_volume));
            if gap < -1e-6 {
                failures.push(format!("({n},{k}) best {} below {target}", r.best_volume));
            }
            if gap > 1e-4 {
                flags.push(format!(
                    "({n},{k}): volume {} exceeds the affine-cube value {target} by {gap:.3e} — counterexample candidate",
                    r.best_volume
                ));
            }
            let report = self.winner_conditions(&r)?;
            for (name, c) in report.checks().filter(|(name, _)| *name != "length_bounds") {
                if !c.passed {
                    failures.push(format!("({n},{k}) {name} residual {:.1e}", c.residual));
                }
            }
        }
        let mut summary = cells.join(", ");
        if !failures.is_empty() {
            summary += &format!("; {}", failures.join("; "));
        }
        Ok(Verdict {
            passed: failures.is_empty(),
            summary,
            flags,
        })
    }
}

const STEPS: [f64; 3] = [1e-3, 1e-4, 1e-5];

/// Forward-difference errors at t = 1e-3, 1e-4, 1e-5 must shrink at least
/// linearly in t (each decade by 2×, both together by 20×, which leaves room
/// for cancellation between higher-order terms), unless they are already at
/// round-off level. A wrong slope leaves a constant error and fails. Returns the verdict and the
/// observed order over the two decades, when measurable.
fn first_order(errs: [f64; 3], scale: f64) -> (bool, Option<f64>) {
    let floor = 1e-8 * scale;
    if errs[2] <= floor && errs[1] <= 10.0 * floor.max(errs[0] * 0.2) {
        let order = (errs[2] > 0.0 && errs[0] > 10.0 * floor).then(|| (errs[0] / errs[2]).log10() / 2.0);
        return (true, order);
    }
    let order = (errs[0] / errs[2]).log10() / 2.0;
    let ok = errs[1] <= 0.5 * errs[0] && errs[2] <= 0.5 * errs[1] && errs[2] <= 0.05 * errs[0];
    (ok, Some(order))
}

fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

fn cell_rng(seed: u64, n: usize, k: usize, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 40) | ((k as u64) << 32) | i as u64);
    rng
}

fn random_orthogonal_unit<R: Rng>(rng: &mut R, w: &[f64]) -> Vec<f64> {
    loop {
        let mut u: Vec<f64> = w.iter().map(|_| rng.sample(StandardNormal)).collect();
        let c = dot(&u, w) / dot(w, w);
        u.iter_mut().zip(w).for_each(|(x, y)| *x -= c * y);
        let len = norm(&u);
        if len > 1e-3 {
            u.iter_mut().for_each(|x| *x /= len);
            return u;
        }
    }
}

fn regular_polygon_area(f: usize, radius: f64) -> f64 {
    let pts: Vec<(f64, f64)> = (0..f)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / f as f64;
            (radius * a.cos(), radius * a.sin())
        })
        .collect();
    let twice: f64 = (0..f)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % f]);
            a.0 * b.1 - a.1 * b.0
        })
        .sum();
    twice / 2.0
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-12 {
        let (c, d) = (b - r * (b - a), a + r * (b - a));
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    (a + b) / 2.0
}

/// Every criterion, fails fast on configuration errors.
pub fn run(config: AcceptanceConfig, criteria: &[Criterion]) -> Result<Vec<Outcome>> {
    if config.restarts == 0 || config.samples == 0 {
        return Err(Error::Invalid("restarts and samples must be positive".into()));
    }
    Ok(Battery::new(config).run_all(criteria))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criterion_ids_round_trip() {
        for c in ALL {
            assert_eq!(Criterion::parse(c.id()), Some(c));
            assert_eq!(Criterion::parse(&c.number().to_string()), Some(c));
        }
        assert_eq!(Criterion::parse("11"), None);
        assert_eq!(Criterion::parse("0"), None);
        assert_eq!(Criterion::parse("nope"), None);
    }

    #[test]
    fn first_order_classifier() {
        assert!(first_order([1e-3, 1e-4, 1e-5], 1.0).0);
        assert!(!first_order([1e-3, 1e-3, 1e-3], 1.0).0);
        assert!(first_order([1e-12, 1e-11, 1e-10], 1.0).0);
        assert!(!first_order([1e-3, 3e-4, 1e-4], 1.0).0);
        assert!(first_order([8e-7, 2.8e-7, 2.9e-8], 1.0).0);
    }

    #[test]
    fn regular_hexagon_area() {
        assert!((regular_polygon_area(6, 1.0) - 1.5 * 3f64.sqrt()).abs() < 1e-14);
    }
}
