use rand::Rng as _;
use rayon::prelude::*;

use super::{MeasureEstimate, Method, TubeFamily, TubeIndex};
use crate::error::{argument, Result};
use crate::geometry::{Tube, MEMBERSHIP_TOL};
use crate::rng;

const BATCH: u64 = 1 << 16;

/// Tubes flattened for fast membership tests: per tube the center, the n
/// axes (core first) and the n half-extents.
#[derive(Debug, Clone)]
pub struct PackedTubes {
    n: usize,
    stride: usize,
    data: Vec<f64>,
}

impl PackedTubes {
    pub fn new(tubes: &[Tube]) -> Self {
        let n = tubes.first().map_or(2, |t| t.dim());
        let stride = n + n * n + n;
        let mut data = Vec::with_capacity(stride * tubes.len());
        for t in tubes {
            data.extend(t.core().center().iter());
            for a in t.axes() {
                data.extend(a.as_vector().iter());
            }
            data.extend(t.half_extents().iter().map(|h| h + MEMBERSHIP_TOL));
        }
        PackedTubes { n, stride, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.stride
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn contains(&self, i: usize, p: &[f64]) -> bool {
        let n = self.n;
        let rec = &self.data[i * self.stride..(i + 1) * self.stride];
        let (c, rest) = rec.split_at(n);
        let (axes, half) = rest.split_at(n * n);
        for k in 0..n {
            let a = &axes[k * n..(k + 1) * n];
            let mut s = 0.0;
            for m in 0..n {
                s += a[m] * (p[m] - c[m]);
            }
            if s.abs() > half[k] {
                return false;
            }
        }
        true
    }
}

/// Monte Carlo estimate of `|∪ T_i|` from `samples` uniform points in the
/// family's bounding box padded by the largest width.
///
/// Work is split into fixed batches, batch `b` drawing from stream `b` of
/// `seed`; the estimate is therefore identical for any thread count.
pub fn monte_carlo_union_volume(f: &TubeFamily, samples: u64, seed: u64) -> Result<MeasureEstimate> {
    if f.is_empty() {
        return Ok(MeasureEstimate { value: 0.0, stderr: 0.0, method: Method::Montecarlo, samples });
    }
    let pad = f.tubes().iter().map(|t| t.width()).fold(0.0, f64::max);
    let (mut lo, mut hi) = super::index::family_aabb(f.tubes());
    for k in 0..lo.len() {
        lo[k] -= pad;
        hi[k] += pad;
    }
    monte_carlo_union_volume_in(f, &lo, &hi, samples, seed)
}

/// As [`monte_carlo_union_volume`], sampling the given box instead.
pub fn monte_carlo_union_volume_in(
    f: &TubeFamily,
    lo: &[f64],
    hi: &[f64],
    samples: u64,
    seed: u64,
) -> Result<MeasureEstimate> {
    if samples < 10_000 {
        return Err(argument(format!("need at least 10^4 samples, got {samples}")));
    }
    let n = f.dim().unwrap_or(lo.len());
    if lo.len() != n || hi.len() != n {
        return Err(crate::error::Error::Dimension { expected: n, got: lo.len() });
    }
    let volume: f64 = lo.iter().zip(hi).map(|(a, b)| b - a).product();
    if f.is_empty() {
        return Ok(MeasureEstimate { value: 0.0, stderr: 0.0, method: Method::Montecarlo, samples });
    }
    let packed = PackedTubes::new(f.tubes());
    let index = TubeIndex::new(f.tubes(), lo, hi);
    let batches = samples.div_ceil(BATCH);
    let hits: u64 = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut r = rng::stream(seed, b);
            let count = BATCH.min(samples - b * BATCH);
            let mut p = vec![0.0; n];
            let mut hits = 0u64;
            for _ in 0..count {
                for k in 0..n {
                    p[k] = lo[k] + (hi[k] - lo[k]) * r.random::<f64>();
                }
                if index.candidates(&p).iter().any(|&i| packed.contains(i as usize, &p)) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let frac = hits as f64 / samples as f64;
    Ok(MeasureEstimate {
        value: frac * volume,
        stderr: volume * (frac * (1.0 - frac) / samples as f64).sqrt(),
        method: Method::Montecarlo,
        samples,
    })
}
