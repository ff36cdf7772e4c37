use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::{GeometryError, SliceSpec};
use crate::model::influence_margin_f64;
use crate::spectral::Spectrum;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplerConfig {
    /// Starting upper bound for the slice energy; halved until acceptance is high enough.
    pub t_max_initial: f64,
    /// `t` is drawn from `[t_floor_ratio · t_max, t_max]`; `0` gives `(0, t_max]`.
    pub t_floor_ratio: f64,
    pub min_acceptance: f64,
    pub margin_floor: f64,
    pub tuning_batch: usize,
    pub max_halvings: usize,
    /// Per-shard attempt budget is `quota × attempts_per_sample`.
    pub attempts_per_sample: u64,
    pub shards: usize,
    /// Half-width of the free coordinate; `None` means `√n / 2`.
    pub half_width: Option<f64>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            t_max_initial: 0.25,
            t_floor_ratio: 0.25,
            min_acceptance: 0.1,
            margin_floor: 1e-9,
            tuning_batch: 2000,
            max_halvings: 60,
            attempts_per_sample: 1000,
            shards: 8,
            half_width: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloudPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
    pub influence_margin: f64,
    /// Sign of the single positive-block coordinate when that block is one-dimensional.
    pub cylinder_sign: Option<i8>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleCloud {
    pub n: usize,
    pub seed: u64,
    pub t_max: f64,
    pub tuning_acceptance: f64,
    pub config: SamplerConfig,
    pub points: Vec<CloudPoint>,
}

impl SampleCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn t_min(&self) -> f64 {
        self.points.iter().map(|p| p.t).fold(f64::INFINITY, f64::min)
    }
}

/// Uniform direction on `S^{k-1}`; `k = 1` gives `±1`.
fn unit_direction<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return g.into_iter().map(|v| v / norm).collect();
        }
    }
}

fn draw_slice_point<R: Rng>(rng: &mut R, s: &Spectrum, half_width: f64, t: f64) -> Vec<f64> {
    let n = s.n();
    let ev = s.eigenvalues();
    let mut y = vec![0.0; n];
    y[0] = rng.random_range(-half_width..half_width);
    for block in [s.positive_indices(), s.negative_indices()] {
        let dir = unit_direction(rng, block.len());
        for (u, i) in dir.into_iter().zip(block) {
            y[i] = u * (t / ev[i].abs()).sqrt();
        }
    }
    y
}

fn check_blocks(s: &Spectrum) -> Result<(), GeometryError> {
    let (p, q) = (s.positive_indices().len(), s.negative_indices().len());
    if p == 0 || q == 0 {
        return Err(GeometryError::EmptySlice {
            positive: p,
            negative: q,
        });
    }
    Ok(())
}

/// Samples `S_{s,t}`: `y₁` uniform on `(-s, s)`, each block a uniform unit
/// direction scaled per axis by `√(t/|λ_i|)`, so both block energies equal `t`.
pub fn sample_slice(
    spec: SliceSpec,
    spectrum: &Spectrum,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, GeometryError> {
    check_blocks(spectrum)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| draw_slice_point(&mut rng, spectrum, spec.s(), spec.t()))
        .collect())
}

struct Candidate<'a> {
    spectrum: &'a Spectrum,
    config: &'a SamplerConfig,
    half_width: f64,
    t_max: f64,
}

impl Candidate<'_> {
    fn draw<R: Rng>(&self, rng: &mut R) -> Option<CloudPoint> {
        let u: f64 = rng.random();
        let lo = self.config.t_floor_ratio * self.t_max;
        // (0, t_max] when the floor is zero
        let t = self.t_max - u * (self.t_max - lo);
        let y = draw_slice_point(rng, self.spectrum, self.half_width, t);
        let x = self.spectrum.to_x(&y);
        if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return None;
        }
        let margin = influence_margin_f64(&x);
        if margin <= self.config.margin_floor {
            return None;
        }
        let pos = self.spectrum.positive_indices();
        let cylinder_sign = (pos.len() == 1).then(|| if y[pos.start] >= 0.0 { 1 } else { -1 });
        Some(CloudPoint {
            x,
            y,
            t,
            influence_margin: margin,
            cylinder_sign,
        })
    }
}

/// Draws `count` points of `GST_n` through the slice parameterisation.
///
/// The energy ceiling starts at `t_max_initial` and halves until a tuning batch
/// is accepted at more than `min_acceptance`. Shard `i` uses seed `seed + i`
/// and shard results are concatenated in order, so the cloud does not depend
/// on thread scheduling.
pub fn sample_gst(
    spectrum: &Spectrum,
    count: usize,
    seed: u64,
    config: &SamplerConfig,
) -> Result<SampleCloud, GeometryError> {
    check_blocks(spectrum)?;
    let n = spectrum.n();
    let half_width = config.half_width.unwrap_or((n as f64).sqrt() / 2.0);

    let mut tuning_rng = ChaCha8Rng::seed_from_u64(seed);
    tuning_rng.set_stream(1);
    let mut t_max = config.t_max_initial;
    let mut halvings = 0;
    let tuning_acceptance = loop {
        let cand = Candidate {
            spectrum,
            config,
            half_width,
            t_max,
        };
        let accepted = (0..config.tuning_batch)
            .filter(|_| cand.draw(&mut tuning_rng).is_some())
            .count();
        let rate = accepted as f64 / config.tuning_batch.max(1) as f64;
        if rate > config.min_acceptance {
            break rate;
        }
        halvings += 1;
        if halvings > config.max_halvings {
            return Err(GeometryError::SamplingStalled {
                attempts: (halvings * config.tuning_batch) as u64,
                accepted,
            });
        }
        t_max /= 2.0;
    };

    let shards = config.shards.max(1);
    let quotas: Vec<usize> = (0..shards)
        .map(|i| count / shards + usize::from(i < count % shards))
        .collect();
    let cand = Candidate {
        spectrum,
        config,
        half_width,
        t_max,
    };
    let shard_points: Vec<Result<Vec<CloudPoint>, GeometryError>> = quotas
        .par_iter()
        .enumerate()
        .map(|(i, &quota)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let cap = quota as u64 * config.attempts_per_sample;
            let mut out = Vec::with_capacity(quota);
            let mut attempts = 0u64;
            while out.len() < quota {
                if attempts >= cap {
                    return Err(GeometryError::SamplingStalled {
                        attempts,
                        accepted: out.len(),
                    });
                }
                attempts += 1;
                if let Some(pt) = cand.draw(&mut rng) {
                    out.push(pt);
                }
            }
            Ok(out)
        })
        .collect();

    let mut points = Vec::with_capacity(count);
    for shard in shard_points {
        points.extend(shard?);
    }
    Ok(SampleCloud {
        n,
        seed,
        t_max,
        tuning_acceptance,
        config: config.clone(),
        points,
    })
}
