use std::collections::BTreeMap;
use std::fmt::Write as _;

use gst_core::expectations::{expectations, RestrictedMatch};
use gst_core::geometry::export::round_sig;
use gst_core::geometry::{
    build_path, count_components, min_opposite_sign_distance, opposite_sign_edges, sample_gst,
    validate_path, EpsilonGrid, GeometryError, PathConfig, PathError, PathTolerances,
    PathValidation, SampleCloud, SamplerConfig,
};
use gst_core::model::{
    independence_residual, ModelError, ResidualReport, DEFAULT_ENUMERATION_CAP,
};
use gst_core::spectral::{compare_b2, slice_type, B2Comparison};
use gst_core::{GamePoint, GstModel, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::CliError;

pub trait Report: Serialize {
    fn text(&self) -> String;
    fn csv(&self) -> String;
    fn passed(&self) -> bool {
        true
    }
}

/// A reference value, or `"n/a"` when the table has none for this `n`.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Comparison<T> {
    Available(T),
    NotAvailable(&'static str),
}

impl<T> Comparison<T> {
    fn from_option(v: Option<T>) -> Self {
        v.map_or(Comparison::NotAvailable("n/a"), Comparison::Available)
    }

    fn as_option(&self) -> Option<&T> {
        match self {
            Comparison::Available(v) => Some(v),
            Comparison::NotAvailable(_) => None,
        }
    }
}

pub fn model(n: usize) -> Result<GstModel, CliError> {
    if n < 3 {
        return Err(CliError::Usage(format!("n must be at least 3 (got {n})")));
    }
    GstModel::new(n).map_err(|e| CliError::Usage(e.to_string()))
}

fn r(v: f64) -> f64 {
    round_sig(v)
}

/// Plain notation for moderate magnitudes, exponent notation otherwise.
fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e6).contains(&a) || !a.is_finite() {
        r(v).to_string()
    } else {
        format!("{:.6e}", v)
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| num(*x)).collect();
    format!("({})", parts.join(", "))
}

#[derive(Debug, Clone, Serialize)]
pub struct FormReport {
    pub n: usize,
    /// Exact entries of Q_n as `p/q` strings.
    pub matrix: Vec<Vec<String>>,
    pub eigenvalues: Vec<f64>,
    pub inertia: [usize; 3],
    pub exact_inertia: [usize; 3],
    pub inertia_agrees: bool,
    pub slice_type: String,
    pub orthogonality_residual: f64,
    pub diagonalization_residual: f64,
    pub jacobi_sweeps: usize,
}

fn tuple(i: (usize, usize, usize)) -> [usize; 3] {
    [i.0, i.1, i.2]
}

pub fn form(n: usize) -> Result<FormReport, CliError> {
    let m = model(n)?;
    let q = m.form.matrix();
    let s = &m.spectrum;
    Ok(FormReport {
        n,
        matrix: (0..n)
            .map(|i| (0..n).map(|j| q[(i, j)].to_string()).collect())
            .collect(),
        eigenvalues: s.eigenvalues().to_vec(),
        inertia: tuple(s.inertia().as_tuple()),
        exact_inertia: tuple(m.form.inertia().as_tuple()),
        inertia_agrees: s.inertia() == m.form.inertia(),
        slice_type: slice_type(s).map(|t| t.to_string()).unwrap_or_default(),
        orthogonality_residual: s.orthogonality_residual(),
        diagonalization_residual: s.diagonalization_residual(),
        jacobi_sweeps: s.sweeps(),
    })
}

impl Report for FormReport {
    fn text(&self) -> String {
        let mut out = format!("Q_{} (exact):\n", self.n);
        let width = self.matrix.iter().flatten().map(String::len).max().unwrap_or(1);
        for row in &self.matrix {
            let cells: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
            let _ = writeln!(out, "  {}", cells.join("  "));
        }
        let _ = writeln!(out, "eigenvalues: {}", fmt_vec(&self.eigenvalues));
        let [p, z, q] = self.inertia;
        let _ = writeln!(out, "inertia (p, z, q): ({p}, {z}, {q})");
        let [p, z, q] = self.exact_inertia;
        let _ = writeln!(out, "exact inertia: ({p}, {z}, {q}), agrees: {}", self.inertia_agrees);
        let _ = writeln!(out, "slice type: {}", self.slice_type);
        let _ = writeln!(
            out,
            "residuals: |P^T P - I| = {:e}, |P^T Q P - D| = {:e}",
            self.orthogonality_residual, self.diagonalization_residual
        );
        out
    }

    fn csv(&self) -> String {
        let mut out = String::from("index,eigenvalue\n");
        for (i, v) in self.eigenvalues.iter().enumerate() {
            let _ = writeln!(out, "{},{}", i + 1, r(*v));
        }
        out
    }

    fn passed(&self) -> bool {
        self.inertia_agrees
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RestrictedReport {
    pub n: usize,
    pub m: usize,
    pub scale: String,
    pub polynomial: String,
    pub inertia: [usize; 3],
    /// Lifted kernel basis in x-space.
    pub kernel: Vec<Vec<String>>,
    pub kernel_dim: usize,
    pub perfect_square: Option<String>,
    pub b2: Option<Vec<f64>>,
    pub comparison: Comparison<RestrictedMatch>,
    pub b2_comparison: Comparison<B2Comparison>,
}

pub fn restricted(n: usize) -> Result<RestrictedReport, CliError> {
    let m = model(n)?;
    let table = expectations();
    let rf = &m.restricted;
    let b2_comparison = table.b2.get(&n).and_then(|reference| {
        m.collision
            .b2
            .as_ref()
            .map(|b2| compare_b2(&m.spectrum, b2, reference, table.b2_tolerance))
    });
    Ok(RestrictedReport {
        n,
        m: rf.m(),
        scale: rf.scale().to_string(),
        polynomial: rf.polynomial_string(),
        inertia: tuple(rf.inertia().as_tuple()),
        kernel: rf
            .lifted_kernel()
            .iter()
            .map(|v| v.iter().map(Rational::to_string).collect())
            .collect(),
        kernel_dim: m.collision.dim(),
        perfect_square: gst_core::quadratic::perfect_square_check(rf).map(|s| s.to_string()),
        b2: m.collision.b2.clone(),
        comparison: Comparison::from_option(table.restricted.get(&n).map(|e| e.compare(rf))),
        b2_comparison: Comparison::from_option(b2_comparison),
    })
}

impl Report for RestrictedReport {
    fn text(&self) -> String {
        let mut out = format!("{} * Psi on palindromes (n = {}):\n  {}\n", self.scale, self.n, self.polynomial);
        if let Some(sq) = &self.perfect_square {
            let _ = writeln!(out, "perfect square: {sq}");
        }
        let [p, z, q] = self.inertia;
        let _ = writeln!(out, "inertia (p, z, q): ({p}, {z}, {q})");
        let _ = writeln!(out, "kernel dim: {}", self.kernel_dim);
        for v in &self.kernel {
            let _ = writeln!(out, "  ({})", v.join(", "));
        }
        if let Some(b2) = &self.b2 {
            let _ = writeln!(out, "b2: {}", fmt_vec(b2));
        }
        match self.comparison.as_option() {
            Some(c) => {
                let _ = writeln!(
                    out,
                    "reference: polynomial {}, perfect square {}, kernel {}",
                    c.polynomial, c.perfect_square, c.kernel
                );
            }
            None => out.push_str("reference: n/a\n"),
        }
        match self.b2_comparison.as_option() {
            Some(c) => {
                let _ = writeln!(out, "b2 match={} (max diff {:e})", c.matches, c.max_abs_diff);
            }
            None => out.push_str("b2 match: n/a\n"),
        }
        out
    }

    fn csv(&self) -> String {
        let mut out = String::from("i,j,coefficient\n");
        for t in gst_core::quadratic::restrict_to_symmetric(&gst_core::build_form(self.n).expect("valid n"))
            .polynomial()
        {
            let _ = writeln!(out, "{},{},{}", t.i, t.j, t.coefficient);
        }
        out
    }

    fn passed(&self) -> bool {
        self.comparison.as_option().is_none_or(RestrictedMatch::all)
            && self.b2_comparison.as_option().is_none_or(|c| c.matches)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub n: usize,
    pub seed: u64,
    pub trials: usize,
    pub passed: usize,
    pub tally: String,
    pub failures: Vec<String>,
    /// Full enumeration for an injected vector.
    pub injected: Option<ResidualReport>,
}

/// Coordinates `a/d` with `1 <= d <= 16` and `0 <= a <= d`.
pub fn random_rational_vector<R: Rng>(rng: &mut R, n: usize) -> GamePoint {
    let coords: Vec<(i64, i64)> = (0..n)
        .map(|_| {
            let d = rng.random_range(1..=16);
            (rng.random_range(0..=d), d)
        })
        .collect();
    GamePoint::from_ratios(&coords).expect("coordinates lie in [0, 1]")
}

fn model_error(e: ModelError) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn oracle(
    n: Option<usize>,
    trials: usize,
    x: Option<&str>,
    seed: u64,
) -> Result<OracleReport, CliError> {
    let injected = x
        .map(|s| s.parse::<GamePoint>().map_err(model_error))
        .transpose()?;
    let n = match (n, &injected) {
        (Some(n), Some(x)) if x.n() != n => {
            return Err(CliError::Usage(format!("--x has {} coordinates but --n is {n}", x.n())))
        }
        (Some(n), _) => n,
        (None, Some(x)) => x.n(),
        (None, None) => return Err(CliError::Usage("oracle needs --n or --x".into())),
    };
    if n < 3 {
        return Err(CliError::Usage(format!("n must be at least 3 (got {n})")));
    }
    let vectors: Vec<GamePoint> = match &injected {
        Some(x) => vec![x.clone()],
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..trials).map(|_| random_rational_vector(&mut rng, n)).collect()
        }
    };
    let mut passed = 0;
    let mut failures = Vec::new();
    let mut last = None;
    for v in &vectors {
        let rep = independence_residual(v, DEFAULT_ENUMERATION_CAP).map_err(model_error)?;
        if rep.relation_ok {
            passed += 1;
        } else {
            failures.push(v.to_string());
        }
        last = Some(rep);
    }
    Ok(OracleReport {
        n,
        seed,
        trials: vectors.len(),
        passed,
        tally: format!("{passed}/{}", vectors.len()),
        failures,
        injected: injected.and(last),
    })
}

impl Report for OracleReport {
    fn text(&self) -> String {
        let mut out = format!(
            "n = {}: residual == -Psi for {} vectors (seed {})\n",
            self.n, self.tally, self.seed
        );
        if let Some(r) = &self.injected {
            let _ = writeln!(out, "x = {}", r.x);
            let _ = writeln!(out, "P(E_i) = {}, P(E_i E_j | C_k) = {}", r.marginal, r.joint);
            let _ = writeln!(out, "residual = {}, Psi = {}", r.residual, r.psi);
        }
        for f in &self.failures {
            let _ = writeln!(out, "mismatch at {f}");
        }
        out
    }

    fn csv(&self) -> String {
        format!("n,trials,passed\n{},{},{}\n", self.n, self.trials, self.passed)
    }

    fn passed(&self) -> bool {
        self.passed == self.trials
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Separation {
    /// `2√(t_min/λ₂)`: the gap between the two cylinders at the lowest sampled energy.
    pub analytic_gap: f64,
    pub min_opposite_distance: Option<f64>,
    pub opposite_edges_below_gap: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentsReport {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub t_max: f64,
    pub t_min: f64,
    pub grid: Vec<f64>,
    pub counts: Vec<usize>,
    pub stable_count: Option<usize>,
    pub plateau_eps: Option<f64>,
    pub y_space_agrees: bool,
    pub expected: Option<usize>,
    /// Present only when a check was requested.
    pub check: Option<bool>,
    pub warning: Option<String>,
    pub separation: Option<Separation>,
}

pub struct ComponentsRun {
    pub report: ComponentsReport,
    pub cloud: SampleCloud,
}

fn geometry_error(e: GeometryError) -> CliError {
    match e {
        GeometryError::InvalidGrid(_) | GeometryError::InvalidSlice { .. } => {
            CliError::Usage(e.to_string())
        }
        other => CliError::Failed(other.to_string()),
    }
}

pub fn separation(m: &GstModel, cloud: &SampleCloud) -> Option<Separation> {
    if m.spectrum.positive_indices().len() != 1 || cloud.is_empty() {
        return None;
    }
    let lambda2 = m.spectrum.eigenvalues()[m.spectrum.positive_indices().start];
    let gap = 2.0 * (cloud.t_min() / lambda2).sqrt();
    Some(Separation {
        analytic_gap: gap,
        min_opposite_distance: min_opposite_sign_distance(cloud),
        opposite_edges_below_gap: opposite_sign_edges(cloud, gap * (1.0 - 1e-9)),
    })
}

pub fn components(
    n: usize,
    samples: usize,
    seed: u64,
    eps: Option<(f64, f64, usize)>,
    check: bool,
) -> Result<ComponentsRun, CliError> {
    let m = model(n)?;
    if samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let grid = eps
        .map(|(lo, hi, steps)| EpsilonGrid::geometric(lo, hi, steps))
        .transpose()
        .map_err(geometry_error)?;
    let cloud = sample_gst(&m.spectrum, samples, seed, &SamplerConfig::default())
        .map_err(geometry_error)?;
    let expected = expectations().components.get(&n).copied();
    let (grid, counts, stable_count, plateau_eps, y_space_agrees, warning) =
        match count_components(&cloud, grid.as_ref()) {
            Ok(c) => (
                c.grid,
                c.counts,
                Some(c.stable_count),
                Some(c.plateau_eps),
                c.y_space_agrees,
                None,
            ),
            Err(GeometryError::NoStablePlateau { grid, counts, len }) => {
                let w = format!("no stable plateau: no {len} consecutive equal counts");
                (grid, counts, None, None, true, Some(w))
            }
            Err(e) => return Err(geometry_error(e)),
        };
    let separation = separation(&m, &cloud);
    let check = check.then(|| {
        stable_count.is_some()
            && stable_count == expected
            && y_space_agrees
            && separation.as_ref().is_none_or(|s| s.opposite_edges_below_gap == 0)
    });
    Ok(ComponentsRun {
        report: ComponentsReport {
            n,
            samples: cloud.len(),
            seed,
            t_max: cloud.t_max,
            t_min: cloud.t_min(),
            grid,
            counts,
            stable_count,
            plateau_eps,
            y_space_agrees,
            expected,
            check,
            warning,
            separation,
        },
        cloud,
    })
}

impl Report for ComponentsReport {
    fn text(&self) -> String {
        let mut out = format!(
            "n = {}: {} samples (seed {}), t in [{}, {}]\n",
            self.n,
            self.samples,
            self.seed,
            r(self.t_min),
            r(self.t_max)
        );
        out.push_str("        eps  components\n");
        for (e, c) in self.grid.iter().zip(&self.counts) {
            let _ = writeln!(out, "  {:>9.3e}  {c}", e);
        }
        match self.stable_count {
            Some(c) => {
                let _ = writeln!(out, "stable count: {c}");
            }
            None => out.push_str("stable count: none\n"),
        }
        if let Some(w) = &self.warning {
            let _ = writeln!(out, "warning: {w}");
        }
        if let Some(s) = &self.separation {
            let _ = writeln!(
                out,
                "cylinder gap {}: closest opposite pair {}, edges below gap {}",
                r(s.analytic_gap),
                s.min_opposite_distance.map_or("none".to_string(), |d| r(d).to_string()),
                s.opposite_edges_below_gap
            );
        }
        if let Some(ok) = self.check {
            let expected = self.expected.map_or("n/a".to_string(), |e| e.to_string());
            let _ = writeln!(out, "check (expected {expected}): {}", if ok { "pass" } else { "FAIL" });
        }
        out
    }

    fn csv(&self) -> String {
        let mut out = String::from("eps,count\n");
        for (e, c) in self.grid.iter().zip(&self.counts) {
            let _ = writeln!(out, "{},{c}", r(*e));
        }
        out
    }

    fn passed(&self) -> bool {
        self.check.unwrap_or(true)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PathReport {
    pub n: usize,
    pub seed: u64,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub t: f64,
    pub legs: Vec<String>,
    pub waypoints: usize,
    pub min_t_distance: f64,
    pub required_clearance: f64,
    pub validation: PathValidation,
    #[serde(skip)]
    pub points: Vec<Vec<f64>>,
}

pub enum Endpoints<'a> {
    Given(&'a str, &'a str),
    Random { opposite_cylinders: bool },
}

fn parse_point(s: &str, n: usize) -> Result<Vec<f64>, CliError> {
    let g: GamePoint = s.parse().map_err(model_error)?;
    if g.n() != n {
        return Err(CliError::Usage(format!("endpoint {s} has {} coordinates, expected {n}", g.n())));
    }
    Ok(g.to_f64())
}

fn random_endpoints(
    m: &GstModel,
    seed: u64,
    opposite: bool,
) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    if opposite && m.spectrum.positive_indices().len() != 1 {
        return Err(CliError::Usage(
            "--opposite-cylinders needs a one-dimensional positive block (n = 3 or 4)".into(),
        ));
    }
    let count = if opposite { 64 } else { 2 };
    let cloud = sample_gst(&m.spectrum, count, seed, &SamplerConfig::default())
        .map_err(geometry_error)?;
    let pts = &cloud.points;
    if !opposite {
        return Ok((pts[0].x.clone(), pts[1].x.clone()));
    }
    let a = &pts[0];
    let b = pts
        .iter()
        .find(|p| p.cylinder_sign != a.cylinder_sign)
        .ok_or_else(|| CliError::Failed("no opposite-cylinder sample found".into()))?;
    Ok((a.x.clone(), b.x.clone()))
}

pub fn path(n: usize, endpoints: Endpoints<'_>, step: f64, seed: u64) -> Result<PathReport, CliError> {
    let m = model(n)?;
    if !(step > 0.0) {
        return Err(CliError::Usage("--step must be positive".into()));
    }
    let (p, q) = match endpoints {
        Endpoints::Given(p, q) => (parse_point(p, n)?, parse_point(q, n)?),
        Endpoints::Random { opposite_cylinders } => random_endpoints(&m, seed, opposite_cylinders)?,
    };
    let config = PathConfig {
        step,
        tolerances: PathTolerances {
            max_step: step,
            ..PathTolerances::default()
        },
        ..PathConfig::default()
    };
    let base = |validation: PathValidation| PathReport {
        n,
        seed,
        p: p.clone(),
        q: q.clone(),
        t: 0.0,
        legs: vec![],
        waypoints: validation.waypoints,
        min_t_distance: f64::NAN,
        required_clearance: config.t_clearance,
        validation,
        points: vec![],
    };
    match build_path(&p, &q, &m.spectrum, &m.collision, &config) {
        Ok(w) => {
            let validation = validate_path(&w, &config.tolerances);
            Ok(PathReport {
                t: w.t,
                legs: w.legs.clone(),
                min_t_distance: w.min_t_distance,
                required_clearance: w.required_clearance,
                points: w.waypoints,
                ..base(validation)
            })
        }
        Err(PathError::DifferentComponents { block }) => Err(CliError::DifferentComponents(format!(
            "endpoints lie in different components ({block} block signs differ); no path exists"
        ))),
        Err(PathError::ValidationFailed(v)) => Ok(base(*v)),
        Err(e @ (PathError::InvalidEndpoint { .. } | PathError::DimensionMismatch { .. })) => {
            Err(CliError::Usage(e.to_string()))
        }
        Err(e) => Err(CliError::Failed(e.to_string())),
    }
}

pub fn waypoints_csv(points: &[Vec<f64>]) -> String {
    let n = points.first().map_or(0, Vec::len);
    let mut out = String::from("index");
    for i in 1..=n {
        let _ = write!(out, ",x{i}");
    }
    out.push('\n');
    for (k, x) in points.iter().enumerate() {
        let _ = write!(out, "{k}");
        for v in x {
            let _ = write!(out, ",{}", r(*v));
        }
        out.push('\n');
    }
    out
}

impl Report for PathReport {
    fn text(&self) -> String {
        let v = &self.validation;
        let mut out = format!("n = {}: p = {}\n        q = {}\n", self.n, fmt_vec(&self.p), fmt_vec(&self.q));
        if !self.legs.is_empty() {
            let _ = writeln!(out, "slice energy t = {}; legs: {}", r(self.t), self.legs.join(", "));
        }
        let _ = writeln!(out, "waypoints: {}", v.waypoints);
        let _ = writeln!(
            out,
            "max |Psi| = {:e}, min margin = {}, max step = {}, in cube: {}",
            v.max_abs_psi,
            r(v.min_margin),
            r(v.max_step),
            v.in_cube
        );
        let _ = writeln!(
            out,
            "distance to T: min {} (required {})",
            r(self.min_t_distance),
            r(self.required_clearance)
        );
        match &v.first_violation {
            None => out.push_str("validation: pass\n"),
            Some(f) => {
                let _ = writeln!(out, "validation: FAIL at waypoint {} ({:?} = {})", f.index, f.kind, f.value);
            }
        }
        out
    }

    fn csv(&self) -> String {
        waypoints_csv(&self.points)
    }

    fn passed(&self) -> bool {
        self.validation.ok
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralResiduals {
    pub orthogonality: f64,
    pub diagonalization: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RestrictedSummary {
    pub scale: String,
    pub polynomial: String,
    pub kernel_dim: usize,
    pub matches: Comparison<bool>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct PathStats {
    pub pairs: usize,
    pub witnesses: usize,
    pub refused: usize,
    pub failed: usize,
    pub max_abs_psi: f64,
    pub min_margin: f64,
    pub max_waypoints: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FullReport {
    pub seed: u64,
    pub nmax: usize,
    pub samples: usize,
    pub trials: usize,
    pub pairs: usize,
    pub inertia: BTreeMap<usize, [usize; 3]>,
    pub spectral_residuals: BTreeMap<usize, SpectralResiduals>,
    pub restricted: BTreeMap<usize, RestrictedSummary>,
    pub b2: BTreeMap<usize, B2Comparison>,
    pub oracle: BTreeMap<usize, String>,
    pub components: BTreeMap<usize, Option<usize>>,
    pub separation: BTreeMap<usize, Separation>,
    pub paths: BTreeMap<usize, PathStats>,
    pub checks: BTreeMap<String, bool>,
    pub passed: bool,
}

fn derived_seed(seed: u64, n: usize) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(n as u64)
}

fn path_stats(m: &GstModel, cloud: &SampleCloud, pairs: usize) -> PathStats {
    let mut s = PathStats {
        min_margin: f64::INFINITY,
        ..PathStats::default()
    };
    let config = PathConfig::default();
    for pair in cloud.points.chunks_exact(2).take(pairs) {
        s.pairs += 1;
        match build_path(&pair[0].x, &pair[1].x, &m.spectrum, &m.collision, &config) {
            Ok(w) => {
                let v = validate_path(&w, &config.tolerances);
                if v.ok {
                    s.witnesses += 1;
                } else {
                    s.failed += 1;
                }
                s.max_abs_psi = s.max_abs_psi.max(v.max_abs_psi);
                s.min_margin = s.min_margin.min(v.min_margin);
                s.max_waypoints = s.max_waypoints.max(v.waypoints);
            }
            Err(PathError::DifferentComponents { .. }) => s.refused += 1,
            Err(_) => s.failed += 1,
        }
    }
    s
}

pub fn full_report(
    nmax: usize,
    samples: usize,
    trials: usize,
    pairs: usize,
    seed: u64,
) -> Result<FullReport, CliError> {
    if !(3..=DEFAULT_ENUMERATION_CAP).contains(&nmax) {
        return Err(CliError::Usage(format!(
            "--nmax must lie in 3..={DEFAULT_ENUMERATION_CAP} (got {nmax})"
        )));
    }
    if samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    let table = expectations();
    let mut rep = FullReport {
        seed,
        nmax,
        samples,
        trials,
        pairs,
        inertia: BTreeMap::new(),
        spectral_residuals: BTreeMap::new(),
        restricted: BTreeMap::new(),
        b2: BTreeMap::new(),
        oracle: BTreeMap::new(),
        components: BTreeMap::new(),
        separation: BTreeMap::new(),
        paths: BTreeMap::new(),
        checks: BTreeMap::new(),
        passed: true,
    };
    let check = |rep: &mut FullReport, name: String, ok: bool| {
        rep.passed &= ok;
        rep.checks.insert(name, ok);
    };
    for n in 3..=nmax {
        let m = model(n)?;
        let s = &m.spectrum;

        rep.inertia.insert(n, tuple(s.inertia().as_tuple()));
        let mut inertia_ok = s.inertia() == m.form.inertia();
        if let Some(e) = table.inertia.get(&n) {
            inertia_ok &= *e == s.inertia();
        }
        check(&mut rep, format!("inertia.{n}"), inertia_ok);
        let res = SpectralResiduals {
            orthogonality: s.orthogonality_residual(),
            diagonalization: s.diagonalization_residual(),
        };
        check(
            &mut rep,
            format!("spectral.{n}"),
            res.orthogonality < 1e-10 && res.diagonalization < 1e-10,
        );
        rep.spectral_residuals.insert(n, res);

        let cmp = table.restricted.get(&n).map(|e| e.compare(&m.restricted).all());
        if let Some(ok) = cmp {
            check(&mut rep, format!("restricted.{n}"), ok);
        }
        rep.restricted.insert(
            n,
            RestrictedSummary {
                scale: m.restricted.scale().to_string(),
                polynomial: m.restricted.polynomial_string(),
                kernel_dim: m.collision.dim(),
                matches: Comparison::from_option(cmp),
            },
        );
        if let (Some(reference), Some(b2)) = (table.b2.get(&n), &m.collision.b2) {
            let c = compare_b2(s, b2, reference, table.b2_tolerance);
            check(&mut rep, format!("b2.{n}"), c.matches);
            rep.b2.insert(n, c);
        }

        let o = oracle(Some(n), trials, None, derived_seed(seed, n))?;
        check(&mut rep, format!("oracle.{n}"), o.passed == o.trials);
        rep.oracle.insert(n, o.tally);

        let run = components(n, samples, derived_seed(seed, n), None, true)?;
        check(&mut rep, format!("components.{n}"), run.report.check == Some(true));
        rep.components.insert(n, run.report.stable_count);
        if let Some(sep) = run.report.separation {
            rep.separation.insert(n, sep);
        }

        let stats = path_stats(&m, &run.cloud, pairs);
        // zero-sphere blocks make refusals legitimate for n = 3, 4
        let allow_refusals = s.positive_indices().len() == 1 || s.negative_indices().len() == 1;
        check(
            &mut rep,
            format!("paths.{n}"),
            stats.failed == 0 && (allow_refusals || stats.refused == 0),
        );
        rep.paths.insert(n, stats);
    }
    Ok(rep)
}

impl Report for FullReport {
    fn text(&self) -> String {
        let mut out = format!("report for n = 3..={} (seed {})\n", self.nmax, self.seed);
        for n in self.inertia.keys() {
            let [p, z, q] = self.inertia[n];
            let comps = self.components[n].map_or("none".to_string(), |c| c.to_string());
            let paths = &self.paths[n];
            let _ = writeln!(
                out,
                "  n = {n:>2}: inertia ({p}, {z}, {q}), oracle {}, components {comps}, paths {}/{} ({} refused)",
                self.oracle[n], paths.witnesses, paths.pairs, paths.refused
            );
        }
        let failed: Vec<&String> = self.checks.iter().filter(|(_, ok)| !**ok).map(|(k, _)| k).collect();
        if failed.is_empty() {
            let _ = writeln!(out, "all {} checks passed", self.checks.len());
        } else {
            let names: Vec<&str> = failed.iter().map(|s| s.as_str()).collect();
            let _ = writeln!(out, "FAILED checks: {}", names.join(", "));
        }
        out
    }

    fn csv(&self) -> String {
        let mut out = String::from("check,passed\n");
        for (k, ok) in &self.checks {
            let _ = writeln!(out, "{k},{ok}");
        }
        out
    }

    fn passed(&self) -> bool {
        self.passed
    }
}
