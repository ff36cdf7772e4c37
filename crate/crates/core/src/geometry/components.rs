use serde::Serialize;

use super::{dist, GeometryError, SampleCloud};

pub const DEFAULT_GRID_STEPS: usize = 20;
/// Pairwise-distance percentiles bounding the default grid.
pub const DEFAULT_GRID_PERCENTILES: (f64, f64) = (5.0, 95.0);
/// Percentiles are taken over all pairs among this many leading points.
pub const PERCENTILE_SUBSAMPLE: usize = 2000;
/// Consecutive equal counts needed for a stable reading.
pub const PLATEAU_LEN: usize = 3;
/// Smaller clouds never yield a stable reading.
pub const MIN_PLATEAU_SAMPLES: usize = 100;

#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
    sets: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
            sets: n,
        }
    }

    pub fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    /// Returns true if `a` and `b` were in different sets.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        self.sets -= 1;
        true
    }

    pub fn sets(&self) -> usize {
        self.sets
    }
}

/// Minimum spanning tree of the complete Euclidean graph.
///
/// The components of the ε-graph are exactly the components of the MST edges
/// of length `≤ ε`, so one tree answers every ε.
#[derive(Debug, Clone)]
pub struct SingleLinkage {
    points: usize,
    /// `(a, b, length)` sorted by length.
    edges: Vec<(usize, usize, f64)>,
}

impl SingleLinkage {
    /// Dense Prim, `O(N²)` time and `O(N)` extra memory.
    pub fn new(points: &[Vec<f64>]) -> Self {
        let n = points.len();
        let mut edges = Vec::with_capacity(n.saturating_sub(1));
        if n > 0 {
            let mut in_tree = vec![false; n];
            let mut best = vec![f64::INFINITY; n];
            let mut from = vec![0usize; n];
            let mut current = 0;
            in_tree[0] = true;
            for _ in 1..n {
                let cp = &points[current];
                let mut next = usize::MAX;
                let mut next_d = f64::INFINITY;
                for v in 0..n {
                    if in_tree[v] {
                        continue;
                    }
                    let d2: f64 = cp
                        .iter()
                        .zip(&points[v])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    if d2 < best[v] {
                        best[v] = d2;
                        from[v] = current;
                    }
                    if best[v] < next_d {
                        next_d = best[v];
                        next = v;
                    }
                }
                in_tree[next] = true;
                edges.push((from[next], next, next_d.sqrt()));
                current = next;
            }
        }
        edges.sort_by(|a, b| a.2.total_cmp(&b.2));
        Self { points: n, edges }
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn count_at(&self, eps: f64) -> usize {
        self.points - self.edges.partition_point(|e| e.2 <= eps)
    }

    pub fn labels_at(&self, eps: f64) -> Vec<usize> {
        let mut uf = UnionFind::new(self.points);
        for &(a, b, _) in self.edges.iter().take_while(|e| e.2 <= eps) {
            uf.union(a, b);
        }
        (0..self.points).map(|i| uf.find(i)).collect()
    }

    /// Every nearest-neighbour edge belongs to the MST, so the shortest
    /// incident tree edge of a vertex is its nearest-neighbour distance.
    pub fn nearest_neighbour_distances(&self) -> Vec<f64> {
        let mut nn = vec![f64::INFINITY; self.points];
        for &(a, b, d) in &self.edges {
            nn[a] = nn[a].min(d);
            nn[b] = nn[b].min(d);
        }
        nn
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonGrid {
    values: Vec<f64>,
}

impl EpsilonGrid {
    pub fn new(values: Vec<f64>) -> Result<Self, GeometryError> {
        if values.is_empty() {
            return Err(GeometryError::InvalidGrid("no grid points".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(GeometryError::InvalidGrid("grid points must be positive".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(GeometryError::InvalidGrid("grid must be increasing".into()));
        }
        Ok(Self { values })
    }

    /// `steps` points from `min` to `max` with a constant ratio.
    pub fn geometric(min: f64, max: f64, steps: usize) -> Result<Self, GeometryError> {
        if steps == 0 || !(min > 0.0) || !(max >= min) {
            return Err(GeometryError::InvalidGrid(format!(
                "need 0 < eps-min <= eps-max and steps >= 1 (got {min}, {max}, {steps})"
            )));
        }
        if steps == 1 {
            return Self::new(vec![min]);
        }
        let ratio = (max / min).powf(1.0 / (steps - 1) as f64);
        Self::new((0..steps).map(|i| min * ratio.powi(i as i32)).collect())
    }

    pub fn from_anchor(anchor: f64, ratio: f64, steps: usize) -> Result<Self, GeometryError> {
        if !(ratio > 1.0) || steps == 0 {
            return Err(GeometryError::InvalidGrid(format!(
                "need ratio > 1 and steps >= 1 (got {ratio}, {steps})"
            )));
        }
        Self::new((0..steps).map(|i| anchor * ratio.powi(i as i32)).collect())
    }

    /// Geometric grid from the 5th to the 95th percentile of pairwise distances.
    ///
    /// Cloud points are i.i.d., so the leading [`PERCENTILE_SUBSAMPLE`] points
    /// give an unbiased sample of pairs.
    pub fn for_points(points: &[Vec<f64>]) -> Result<Self, GeometryError> {
        let head = &points[..points.len().min(PERCENTILE_SUBSAMPLE)];
        let mut d: Vec<f64> = Vec::with_capacity(head.len() * head.len().saturating_sub(1) / 2);
        for i in 0..head.len() {
            for j in i + 1..head.len() {
                d.push(dist(&head[i], &head[j]));
            }
        }
        if d.is_empty() {
            return Err(GeometryError::InvalidGrid("need at least two points".into()));
        }
        d.sort_by(f64::total_cmp);
        let (lo, hi) = DEFAULT_GRID_PERCENTILES;
        let (lo, hi) = (percentile(&d, lo), percentile(&d, hi));
        if !(lo > 0.0) {
            return Err(GeometryError::InvalidGrid("repeated points".into()));
        }
        if hi <= lo {
            return Self::new(vec![lo]);
        }
        Self::geometric(lo, hi, DEFAULT_GRID_STEPS)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Nearest-rank percentile of sorted data.
fn percentile(sorted: &[f64], pct: f64) -> f64 {
    let rank = ((pct / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Start index of the first run of `len` equal counts.
pub fn find_plateau(counts: &[usize], len: usize) -> Option<usize> {
    if len == 0 {
        return None;
    }
    counts
        .windows(len)
        .position(|w| w.iter().all(|c| *c == w[0]))
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentReport {
    pub n: usize,
    pub samples: usize,
    pub grid: Vec<f64>,
    pub counts: Vec<usize>,
    /// Counts recomputed from y-space distances agree at every ε.
    pub y_space_agrees: bool,
    pub stable_count: usize,
    pub plateau_start: usize,
    pub plateau_eps: f64,
}

fn report(
    x_points: &[Vec<f64>],
    y_points: Option<&[Vec<f64>]>,
    grid: Option<&EpsilonGrid>,
) -> Result<ComponentReport, GeometryError> {
    if x_points.is_empty() {
        return Err(GeometryError::EmptyCloud);
    }
    let linkage = SingleLinkage::new(x_points);
    let default_grid;
    let grid = match grid {
        Some(g) => g,
        None if x_points.len() < 2 => {
            return Err(GeometryError::NoStablePlateau {
                len: PLATEAU_LEN,
                grid: vec![],
                counts: vec![1],
            })
        }
        None => {
            default_grid = EpsilonGrid::for_points(x_points)?;
            &default_grid
        }
    };
    let counts: Vec<usize> = grid.values().iter().map(|&e| linkage.count_at(e)).collect();
    let y_space_agrees = match y_points {
        Some(ys) => {
            let yl = SingleLinkage::new(ys);
            // grid values can coincide with edge lengths; allow rounding at the threshold
            grid.values().iter().zip(&counts).all(|(&e, &c)| {
                (yl.count_at(e * (1.0 + 1e-9))..=yl.count_at(e * (1.0 - 1e-9))).contains(&c)
            })
        }
        None => true,
    };
    let plateau = if x_points.len() < MIN_PLATEAU_SAMPLES {
        None
    } else {
        find_plateau(&counts, PLATEAU_LEN)
    };
    let start = plateau.ok_or_else(|| GeometryError::NoStablePlateau {
        len: PLATEAU_LEN,
        grid: grid.values().to_vec(),
        counts: counts.clone(),
    })?;
    Ok(ComponentReport {
        n: x_points[0].len(),
        samples: x_points.len(),
        grid: grid.values().to_vec(),
        stable_count: counts[start],
        plateau_start: start,
        plateau_eps: grid.values()[start],
        counts,
        y_space_agrees,
    })
}

/// Counts ε-graph components of the cloud in x-space, with a y-space cross-check.
/// Without an explicit grid, [`EpsilonGrid::for_points`] is used.
pub fn count_components(
    cloud: &SampleCloud,
    grid: Option<&EpsilonGrid>,
) -> Result<ComponentReport, GeometryError> {
    let xs: Vec<Vec<f64>> = cloud.points.iter().map(|p| p.x.clone()).collect();
    let ys: Vec<Vec<f64>> = cloud.points.iter().map(|p| p.y.clone()).collect();
    report(&xs, Some(&ys), grid)
}

pub fn count_components_in(
    points: &[Vec<f64>],
    grid: Option<&EpsilonGrid>,
) -> Result<ComponentReport, GeometryError> {
    report(points, None, grid)
}

/// All-pairs ε-graph with union-find; quadratic, kept as a reference.
pub fn epsilon_graph_components(points: &[Vec<f64>], eps: f64) -> usize {
    let mut uf = UnionFind::new(points.len());
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if dist(&points[i], &points[j]) <= eps {
                uf.union(i, j);
            }
        }
    }
    uf.sets()
}

fn opposite_pairs(cloud: &SampleCloud) -> impl Iterator<Item = f64> + '_ {
    let pts = &cloud.points;
    let pos: Vec<usize> = (0..pts.len()).filter(|&i| pts[i].cylinder_sign == Some(1)).collect();
    let neg: Vec<usize> = (0..pts.len()).filter(|&i| pts[i].cylinder_sign == Some(-1)).collect();
    pos.into_iter()
        .flat_map(move |i| neg.clone().into_iter().map(move |j| dist(&pts[i].x, &pts[j].x)))
}

/// Smallest x-distance between points with opposite cylinder signs.
pub fn min_opposite_sign_distance(cloud: &SampleCloud) -> Option<f64> {
    opposite_pairs(cloud).min_by(f64::total_cmp)
}

/// Number of ε-graph edges joining opposite cylinder signs.
pub fn opposite_sign_edges(cloud: &SampleCloud, eps: f64) -> usize {
    opposite_pairs(cloud).filter(|d| *d <= eps).count()
}
