use crate::geometry::{Tube, MEMBERSHIP_TOL};

/// Target number of grid cells for a [`TubeIndex`].
const TARGET_CELLS: f64 = 262_144.0;

/// Axis-aligned box enclosing every tube.
pub(crate) fn family_aabb(tubes: &[Tube]) -> (Vec<f64>, Vec<f64>) {
    let n = tubes[0].dim();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for t in tubes {
        let (a, b) = t.aabb();
        for k in 0..n {
            lo[k] = lo[k].min(a[k]);
            hi[k] = hi[k].max(b[k]);
        }
    }
    (lo, hi)
}

/// Uniform grid over a box listing, per cell, the tubes that may meet it.
///
/// A tube is registered in every cell of its bounding box that passes the
/// separating-axis test against the tube's own axes. That test is exact in
/// the plane and conservative in higher dimension.
#[derive(Debug, Clone)]
pub struct TubeIndex {
    lo: Vec<f64>,
    h: f64,
    shape: Vec<usize>,
    start: Vec<u32>,
    items: Vec<u32>,
}

impl TubeIndex {
    pub fn new(tubes: &[Tube], lo: &[f64], hi: &[f64]) -> Self {
        let n = lo.len();
        let vol: f64 = lo.iter().zip(hi).map(|(a, b)| (b - a).max(1e-12)).product();
        let h = (vol / TARGET_CELLS).powf(1.0 / n as f64).max(1e-12);
        let shape: Vec<usize> = lo
            .iter()
            .zip(hi)
            .map(|(a, b)| (((b - a) / h).floor() as usize + 1).max(1))
            .collect();
        let total: usize = shape.iter().product();

        let mut pairs: Vec<(u32, u32)> = Vec::new();
        let mut kmin = vec![0usize; n];
        let mut kmax = vec![0usize; n];
        let mut cur = vec![0usize; n];
        let mut cell_center = vec![0.0; n];
        for (ti, t) in tubes.iter().enumerate() {
            let (a, b) = t.aabb();
            let mut outside = false;
            for k in 0..n {
                let lo_k = ((a[k] - MEMBERSHIP_TOL - lo[k]) / h).floor();
                let hi_k = ((b[k] + MEMBERSHIP_TOL - lo[k]) / h).floor();
                if hi_k < 0.0 || lo_k > (shape[k] - 1) as f64 {
                    outside = true;
                    break;
                }
                kmin[k] = lo_k.max(0.0) as usize;
                kmax[k] = (hi_k as usize).min(shape[k] - 1);
            }
            if outside {
                continue;
            }
            let c = t.core().center();
            let axes = t.axes();
            let half = t.half_extents();
            cur.copy_from_slice(&kmin);
            loop {
                for k in 0..n {
                    cell_center[k] = lo[k] + (cur[k] as f64 + 0.5) * h;
                }
                let meets = axes.iter().zip(&half).all(|(ax, hk)| {
                    let mut d = 0.0;
                    let mut r = 0.0;
                    for m in 0..n {
                        d += ax[m] * (cell_center[m] - c[m]);
                        r += ax[m].abs();
                    }
                    d.abs() <= hk + r * h / 2.0 + MEMBERSHIP_TOL
                });
                if meets {
                    let mut lin = 0usize;
                    for k in (0..n).rev() {
                        lin = lin * shape[k] + cur[k];
                    }
                    pairs.push((lin as u32, ti as u32));
                }
                // odometer over the cell range
                let mut k = 0;
                loop {
                    if k == n {
                        break;
                    }
                    if cur[k] < kmax[k] {
                        cur[k] += 1;
                        break;
                    }
                    cur[k] = kmin[k];
                    k += 1;
                }
                if k == n {
                    break;
                }
            }
        }
        pairs.sort_unstable();
        let mut start = vec![0u32; total + 1];
        for &(cell, _) in &pairs {
            start[cell as usize + 1] += 1;
        }
        for k in 1..start.len() {
            start[k] += start[k - 1];
        }
        let items = pairs.into_iter().map(|(_, t)| t).collect();
        TubeIndex { lo: lo.to_vec(), h, shape, start, items }
    }

    /// Tubes that may contain `p`; empty outside the indexed box.
    #[inline]
    pub fn candidates(&self, p: &[f64]) -> &[u32] {
        let mut lin = 0usize;
        for k in (0..self.lo.len()).rev() {
            let x = ((p[k] - self.lo[k]) / self.h).floor();
            if x < 0.0 || x >= self.shape[k] as f64 {
                return &[];
            }
            lin = lin * self.shape[k] + x as usize;
        }
        &self.items[self.start[lin] as usize..self.start[lin + 1] as usize]
    }
}
