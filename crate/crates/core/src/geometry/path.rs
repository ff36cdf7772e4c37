//! Witness paths between two points of `GST_n`.
//!
//! Each endpoint is first moved in a straight line to the `y₁ = 0` slice of a
//! common energy `t`, by zeroing `y₁` and scaling both blocks by `√(t/M)`.
//! Both block energies stay equal along the way. Inside the slice, one block
//! moves at a time along great-circle arcs of its unit sphere. When the
//! collision space meets the slice (kernel dimension 2), a block is only
//! moved while the other block is held away from its forbidden values.

use serde::Serialize;

use super::{dist, distance_to_t, slice_fit_bound};
use crate::model::influence_margin_f64;
use crate::quadratic::psi_direct_f64;
use crate::spectral::{c_coefficient, CollisionSpace, SpectralError, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathTolerances {
    pub max_abs_psi: f64,
    /// Waypoints need an influence margin strictly above this.
    pub min_margin: f64,
    pub cube_slack: f64,
    pub max_step: f64,
}

impl Default for PathTolerances {
    fn default() -> Self {
        Self {
            max_abs_psi: 1e-8,
            min_margin: 0.0,
            cube_slack: 1e-12,
            max_step: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathConfig {
    pub step: f64,
    pub t_clearance: f64,
    /// Fraction of the largest `t` whose `y₁ = 0` slice fits in the cube.
    pub slice_fill: f64,
    pub tolerances: PathTolerances,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            step: 1e-2,
            t_clearance: 1e-3,
            slice_fill: 0.5,
            tolerances: PathTolerances::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PathWitness {
    pub n: usize,
    /// Energy of the common slice.
    pub t: f64,
    pub legs: Vec<String>,
    pub waypoints: Vec<Vec<f64>>,
    /// Smallest `distance_to_T` over interior waypoints (infinite if there are none).
    pub min_t_distance: f64,
    pub required_clearance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    NonFinite,
    Psi,
    Margin,
    Cube,
    Step,
    Clearance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathViolation {
    pub index: usize,
    pub kind: ViolationKind,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathValidation {
    pub ok: bool,
    pub waypoints: usize,
    pub max_abs_psi: f64,
    pub min_margin: f64,
    pub max_step: f64,
    pub in_cube: bool,
    pub first_violation: Option<PathViolation>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PathError {
    #[error("endpoint {which} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        which: char,
        expected: usize,
        got: usize,
    },
    #[error("endpoint {which} is not in GST: {kind:?} = {value}")]
    InvalidEndpoint {
        which: char,
        kind: ViolationKind,
        value: f64,
    },
    #[error("endpoints lie in different components: {block} block signs differ")]
    DifferentComponents { block: &'static str },
    #[error("witness failed validation: {0:?}")]
    ValidationFailed(Box<PathValidation>),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

fn check_point(x: &[f64], tol: &PathTolerances) -> Option<(ViolationKind, f64)> {
    if x.iter().any(|v| !v.is_finite()) {
        return Some((ViolationKind::NonFinite, f64::NAN));
    }
    let psi = psi_direct_f64(x).abs();
    if !(psi < tol.max_abs_psi) {
        return Some((ViolationKind::Psi, psi));
    }
    let margin = influence_margin_f64(x);
    if !(margin > tol.min_margin) {
        return Some((ViolationKind::Margin, margin));
    }
    let worst = x
        .iter()
        .map(|v| (-v).max(v - 1.0))
        .fold(f64::NEG_INFINITY, f64::max);
    if worst > tol.cube_slack {
        return Some((ViolationKind::Cube, worst));
    }
    None
}

/// Rechecks every waypoint and every step; reports the first offender.
pub fn validate_path(w: &PathWitness, tol: &PathTolerances) -> PathValidation {
    let mut v = PathValidation {
        ok: true,
        waypoints: w.waypoints.len(),
        max_abs_psi: 0.0,
        min_margin: f64::INFINITY,
        max_step: 0.0,
        in_cube: true,
        first_violation: None,
    };
    let flag = |v: &mut PathValidation, index, kind, value| {
        if v.first_violation.is_none() {
            v.first_violation = Some(PathViolation { index, kind, value });
        }
        v.ok = false;
    };
    if w.waypoints.is_empty() {
        flag(&mut v, 0, ViolationKind::NonFinite, f64::NAN);
        return v;
    }
    for (i, x) in w.waypoints.iter().enumerate() {
        v.max_abs_psi = v.max_abs_psi.max(psi_direct_f64(x).abs());
        v.min_margin = v.min_margin.min(influence_margin_f64(x));
        if x.iter().any(|c| *c < -tol.cube_slack || *c > 1.0 + tol.cube_slack) {
            v.in_cube = false;
        }
        if i > 0 {
            let s = dist(&w.waypoints[i - 1], x);
            v.max_step = v.max_step.max(s);
            if !(s <= tol.max_step * (1.0 + 1e-9)) {
                flag(&mut v, i, ViolationKind::Step, s);
            }
        }
        if let Some((kind, value)) = check_point(x, tol) {
            flag(&mut v, i, kind, value);
        }
    }
    v
}

/// Unit-sphere coordinates of one eigen-block: `u_i = z_i / r_i`.
struct Block {
    idx: std::ops::Range<usize>,
    radii: Vec<f64>,
}

impl Block {
    fn new(idx: std::ops::Range<usize>, ev: &[f64], t: f64) -> Self {
        let radii = idx.clone().map(|i| (t / ev[i].abs()).sqrt()).collect();
        Self { idx, radii }
    }

    fn unit(&self, y: &[f64]) -> Vec<f64> {
        let u: Vec<f64> = self.idx.clone().zip(&self.radii).map(|(i, r)| y[i] / r).collect();
        normalize(&u).unwrap_or(u)
    }

    fn place(&self, y: &mut [f64], u: &[f64]) {
        for ((i, r), ui) in self.idx.clone().zip(&self.radii).zip(u) {
            y[i] = r * ui;
        }
    }

    fn r_max(&self) -> f64 {
        self.radii.iter().cloned().fold(0.0, f64::max)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &[f64]) -> Option<Vec<f64>> {
    let n = dot(v, v).sqrt();
    (n > 1e-12).then(|| v.iter().map(|x| x / n).collect())
}

/// A unit vector orthogonal to every vector in `against` (assumed orthonormal).
fn perpendicular(against: &[&[f64]], dim: usize) -> Vec<f64> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for k in 0..dim {
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        for a in against {
            let d = dot(&e, a);
            e.iter_mut().zip(*a).for_each(|(x, y)| *x -= d * y);
        }
        let n = dot(&e, &e).sqrt();
        if best.as_ref().is_none_or(|b| n > b.0) {
            best = Some((n, e));
        }
    }
    let (_, e) = best.expect("dimension at least one");
    normalize(&e).expect("complement is nonempty")
}

/// Part of `u` orthogonal to `f`, normalized.
fn off_axis(u: &[f64], f: &[f64]) -> Vec<f64> {
    let d = dot(u, f);
    let w: Vec<f64> = u.iter().zip(f).map(|(a, b)| a - d * b).collect();
    normalize(&w).unwrap_or_else(|| perpendicular(&[f], u.len()))
}

/// Great-circle waypoints from `u` to `v`, excluding `u`.
fn arc(u: &[f64], v: &[f64], r_max: f64, step: f64) -> Vec<Vec<f64>> {
    let c = dot(u, v).clamp(-1.0, 1.0);
    if c < -0.99 {
        let hub = perpendicular(&[u], u.len());
        let mut out = arc(u, &hub, r_max, step);
        out.extend(arc(&hub, v, r_max, step));
        return out;
    }
    let theta = c.acos();
    let k = ((theta * r_max) / (0.95 * step)).ceil().max(1.0) as usize;
    (1..=k)
        .map(|j| {
            let s = j as f64 / k as f64;
            if theta < 1e-12 {
                return v.to_vec();
            }
            let (a, b) = (((1.0 - s) * theta).sin(), (s * theta).sin());
            let w: Vec<f64> = u
                .iter()
                .zip(v)
                .map(|(x, y)| (a * x + b * y) / theta.sin())
                .collect();
            normalize(&w).unwrap_or(w)
        })
        .collect()
}

fn segment(a: &[f64], b: &[f64], step: f64) -> Vec<Vec<f64>> {
    let len = dist(a, b);
    let k = (len / (0.95 * step)).ceil() as usize;
    (1..=k)
        .map(|j| {
            let s = j as f64 / k as f64;
            a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect()
        })
        .collect()
}

/// Slice point `(0, A, B)` in y-space.
fn slice_point(n: usize, pos: &Block, neg: &Block, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    pos.place(&mut y, a);
    neg.place(&mut y, b);
    y
}

fn scaled_to_slice(s: &Spectrum, y: &[f64], t: f64) -> Vec<f64> {
    let m = s.positive_energy(y);
    let c = (t / m).sqrt();
    let mut out: Vec<f64> = y.iter().map(|v| c * v).collect();
    out[0] = 0.0;
    out
}

/// Builds and validates a witness path from `p` to `q`.
///
/// Returns [`PathError::DifferentComponents`] when a one-dimensional block
/// (a zero-sphere) has opposite signs at the two endpoints: every path would
/// have to cross that block's zero, where the slice energy vanishes.
pub fn build_path(
    p: &[f64],
    q: &[f64],
    spectrum: &Spectrum,
    collision: &CollisionSpace,
    config: &PathConfig,
) -> Result<PathWitness, PathError> {
    let n = spectrum.n();
    for (which, x) in [('p', p), ('q', q)] {
        if x.len() != n {
            return Err(PathError::DimensionMismatch {
                which,
                expected: n,
                got: x.len(),
            });
        }
        if let Some((kind, value)) = check_point(x, &config.tolerances) {
            return Err(PathError::InvalidEndpoint { which, kind, value });
        }
    }
    if p == q {
        return Ok(PathWitness {
            n,
            t: 0.0,
            legs: vec![],
            waypoints: vec![p.to_vec()],
            min_t_distance: f64::INFINITY,
            required_clearance: 0.0,
        });
    }

    let ev = spectrum.eigenvalues();
    let t = config.slice_fill * slice_fit_bound(spectrum);
    let pos = Block::new(spectrum.positive_indices(), ev, t);
    let neg = Block::new(spectrum.negative_indices(), ev, t);

    let y_p = spectrum.to_y(p);
    let y_q = spectrum.to_y(q);
    let sp = scaled_to_slice(spectrum, &y_p, t);
    let sq = scaled_to_slice(spectrum, &y_q, t);
    let (a_p, b_p) = (pos.unit(&sp), neg.unit(&sp));
    let (a_q, b_q) = (pos.unit(&sq), neg.unit(&sq));

    for (block, a, b) in [("positive", &a_p, &a_q), ("negative", &b_p, &b_q)] {
        if a.len() == 1 && a[0].signum() != b[0].signum() {
            return Err(PathError::DifferentComponents { block });
        }
    }

    // forbidden slice points ±(a*, b*) when T meets the slice
    let forbidden = match (&collision.b2, collision.dim()) {
        (Some(b2), 2) => {
            let c = c_coefficient(spectrum, b2, t)?;
            let y: Vec<f64> = b2.iter().map(|v| c * v).collect();
            Some((pos.unit(&y), neg.unit(&y)))
        }
        _ => None,
    };

    let mut legs = Vec::new();
    let mut states: Vec<(Vec<f64>, Vec<f64>)> = vec![(a_p.clone(), b_p.clone())];
    match &forbidden {
        Some((fa, fb)) if a_p.len() > 1 && b_p.len() > 1 => {
            let gap = |u: &[f64], f: &[f64]| dist(u, f).min(u.iter().zip(f).map(|(x, y)| (x + y).powi(2)).sum::<f64>().sqrt());
            let hold_a_p = gap(&a_p, fa) >= gap(&b_p, fb);
            let hold_a_q = gap(&a_q, fa) >= gap(&b_q, fb);
            match (hold_a_p, hold_a_q) {
                (true, true) => {
                    let b_mid = off_axis(&b_p, fb);
                    states.push((a_p.clone(), b_mid.clone()));
                    states.push((a_q.clone(), b_mid));
                }
                (false, false) => {
                    let a_mid = off_axis(&a_p, fa);
                    states.push((a_mid.clone(), b_p.clone()));
                    states.push((a_mid, b_q.clone()));
                }
                (true, false) => {
                    let b_mid = off_axis(&b_p, fb);
                    let a_mid = off_axis(&a_q, fa);
                    states.push((a_p.clone(), b_mid.clone()));
                    states.push((a_mid.clone(), b_mid));
                    states.push((a_mid, b_q.clone()));
                }
                (false, true) => {
                    let a_mid = off_axis(&a_p, fa);
                    let b_mid = off_axis(&b_q, fb);
                    states.push((a_mid.clone(), b_p.clone()));
                    states.push((a_mid, b_mid.clone()));
                    states.push((a_q.clone(), b_mid));
                }
            }
        }
        _ => states.push((a_q.clone(), b_p.clone())),
    }
    states.push((a_q.clone(), b_q.clone()));

    let mut ys: Vec<Vec<f64>> = vec![y_p.clone()];
    legs.push("scale p onto slice".to_string());
    ys.extend(segment(&y_p, &sp, config.step));
    for w in states.windows(2) {
        let ((a0, b0), (a1, b1)) = (&w[0], &w[1]);
        if a0 != a1 {
            legs.push("move positive block".to_string());
            for u in arc(a0, a1, pos.r_max(), config.step) {
                ys.push(slice_point(n, &pos, &neg, &u, b0));
            }
        }
        if b0 != b1 {
            legs.push("move negative block".to_string());
            for u in arc(b0, b1, neg.r_max(), config.step) {
                ys.push(slice_point(n, &pos, &neg, a1, &u));
            }
        }
    }
    let last = ys.last().cloned().unwrap_or_default();
    legs.push("unscale onto q".to_string());
    ys.extend(segment(&last, &y_q, config.step));

    let required_clearance = config.t_clearance.min(
        0.5 * [&y_p, &y_q, &sp, &sq]
            .iter()
            .map(|y| distance_to_t(y, collision))
            .fold(f64::INFINITY, f64::min),
    );
    let min_t_distance = ys[1..ys.len() - 1]
        .iter()
        .map(|y| distance_to_t(y, collision))
        .fold(f64::INFINITY, f64::min);

    let mut waypoints: Vec<Vec<f64>> = ys.iter().map(|y| spectrum.to_x(y)).collect();
    // endpoints exactly as given
    waypoints[0] = p.to_vec();
    *waypoints.last_mut().expect("nonempty") = q.to_vec();

    let witness = PathWitness {
        n,
        t,
        legs,
        waypoints,
        min_t_distance,
        required_clearance,
    };
    let tol = PathTolerances {
        max_step: config.step,
        ..config.tolerances
    };
    let mut validation = validate_path(&witness, &tol);
    if validation.ok && min_t_distance < required_clearance {
        let index = 1 + ys[1..ys.len() - 1]
            .iter()
            .position(|y| distance_to_t(y, collision) < required_clearance)
            .unwrap_or(0);
        validation.ok = false;
        validation.first_violation = Some(PathViolation {
            index,
            kind: ViolationKind::Clearance,
            value: min_t_distance,
        });
    }
    if !validation.ok {
        return Err(PathError::ValidationFailed(Box::new(validation)));
    }
    Ok(witness)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_gst, SamplerConfig};
    use crate::GstModel;

    fn pairs(n: usize, count: usize, seed: u64) -> (GstModel, Vec<crate::geometry::CloudPoint>) {
        let m = GstModel::new(n).unwrap();
        let cloud = sample_gst(&m.spectrum, count, seed, &SamplerConfig::default()).unwrap();
        (m, cloud.points)
    }

    #[test]
    fn random_pairs_connect() {
        for n in [5, 6, 7] {
            let (m, pts) = pairs(n, 40, 21);
            for pair in pts.chunks(2) {
                let w = build_path(&pair[0].x, &pair[1].x, &m.spectrum, &m.collision, &PathConfig::default())
                    .unwrap_or_else(|e| panic!("n={n}: {e}"));
                let v = validate_path(&w, &PathTolerances::default());
                assert!(v.ok, "{v:?}");
                assert!(v.max_abs_psi < 1e-8 && v.min_margin > 0.0 && v.in_cube);
                assert!(w.min_t_distance >= w.required_clearance);
            }
        }
    }

    #[test]
    fn four_players_respect_cylinders() {
        let (m, pts) = pairs(4, 60, 5);
        let mut same = 0;
        let mut opposite = 0;
        for a in &pts[..10] {
            for b in &pts[10..20] {
                let r = build_path(&a.x, &b.x, &m.spectrum, &m.collision, &PathConfig::default());
                if a.cylinder_sign == b.cylinder_sign {
                    assert!(r.is_ok(), "{r:?}");
                    same += 1;
                } else {
                    assert_eq!(r.unwrap_err(), PathError::DifferentComponents { block: "positive" });
                    opposite += 1;
                }
            }
        }
        assert!(same > 0 && opposite > 0);
    }

    #[test]
    fn three_players_zero_spheres() {
        let (m, pts) = pairs(3, 30, 8);
        for a in &pts[..5] {
            for b in &pts[5..] {
                let r = build_path(&a.x, &b.x, &m.spectrum, &m.collision, &PathConfig::default());
                let ya = m.spectrum.to_y(&a.x);
                let yb = m.spectrum.to_y(&b.x);
                if ya[1].signum() == yb[1].signum() && ya[2].signum() == yb[2].signum() {
                    assert!(r.is_ok(), "{r:?}");
                } else {
                    assert!(matches!(r, Err(PathError::DifferentComponents { .. })));
                }
            }
        }
    }

    #[test]
    fn single_point_path() {
        let (m, pts) = pairs(5, 1, 3);
        let w = build_path(&pts[0].x, &pts[0].x, &m.spectrum, &m.collision, &PathConfig::default())
            .unwrap();
        assert_eq!(w.waypoints.len(), 1);
        assert!(validate_path(&w, &PathTolerances::default()).ok);
    }

    #[test]
    fn perturbed_waypoint_is_caught() {
        let (m, pts) = pairs(5, 2, 4);
        let mut w = build_path(&pts[0].x, &pts[1].x, &m.spectrum, &m.collision, &PathConfig::default())
            .unwrap();
        let k = w.waypoints.len() / 2;
        w.waypoints[k][0] += 1e-2;
        let v = validate_path(&w, &PathTolerances::default());
        assert!(!v.ok);
        assert_eq!(v.first_violation.unwrap().index, k);
    }

    #[test]
    fn rejects_non_gst_endpoint() {
        let m = GstModel::new(5).unwrap();
        let flat = vec![0.5; 5];
        let r = build_path(&flat, &flat, &m.spectrum, &m.collision, &PathConfig::default());
        assert!(matches!(r, Err(PathError::InvalidEndpoint { which: 'p', .. })));
        let r = build_path(&[0.5; 4], &flat, &m.spectrum, &m.collision, &PathConfig::default());
        assert!(matches!(r, Err(PathError::DimensionMismatch { .. })));
    }

    #[test]
    fn arcs_respect_step() {
        let u = vec![1.0, 0.0, 0.0];
        let v = vec![-1.0, 0.0, 0.0];
        let pts = arc(&u, &v, 2.0, 0.05);
        let mut prev = u.clone();
        for w in &pts {
            assert!((dot(w, w) - 1.0).abs() < 1e-12);
            assert!(2.0 * dist(&prev, w) <= 0.05);
            prev = w.clone();
        }
        assert!(dist(pts.last().unwrap(), &v) < 1e-12);
    }
}
