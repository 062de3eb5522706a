use crate::error::Result;

use super::{Geometry, ParamSet, Similarity};

/// Finite sample cloud of a parameter set, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCloud {
    dim: usize,
    coords: Vec<f64>,
    /// Curve parameter `t` for curves, leaf position for self-similar sets.
    tags: Vec<f64>,
    /// Every point of the set lies within this sup-distance of a sample.
    pub resolution: f64,
    /// Address depth of the samples of a self-similar set (0 otherwise).
    pub(crate) leaf_depth: usize,
}

impl SampleCloud {
    pub(crate) fn new(dim: usize, resolution: f64) -> Self {
        SampleCloud {
            dim,
            coords: Vec::new(),
            tags: Vec::new(),
            resolution,
            leaf_depth: 0,
        }
    }

    pub(crate) fn push(&mut self, point: &[f64], tag: f64) {
        debug_assert_eq!(point.len(), self.dim);
        self.coords.extend_from_slice(point);
        self.tags.push(tag);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn tag(&self, i: usize) -> f64 {
        self.tags[i]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// Coordinate-wise bounds over the samples with the given indices.
    pub fn bounds_of(&self, indices: &[usize]) -> Option<(Vec<f64>, Vec<f64>)> {
        let mut it = indices.iter();
        let first = self.point(*it.next()?);
        let (mut lo, mut hi) = (first.to_vec(), first.to_vec());
        for &i in it {
            for (k, &x) in self.point(i).iter().enumerate() {
                lo[k] = lo[k].min(x);
                hi[k] = hi[k].max(x);
            }
        }
        Some((lo, hi))
    }

    pub fn bounds(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let all: Vec<usize> = (0..self.len()).collect();
        self.bounds_of(&all)
    }

    /// Sup-norm diameter of the cloud.
    pub fn diameter(&self) -> f64 {
        self.bounds().map_or(0.0, |(lo, hi)| sup_extent(&lo, &hi))
    }
}

pub(crate) fn sup_extent(lo: &[f64], hi: &[f64]) -> f64 {
    lo.iter().zip(hi).map(|(a, b)| b - a).fold(0.0, f64::max)
}

/// Samples per axis of a cube grid under a total budget.
pub(crate) fn grid_side(budget: usize, d: usize) -> usize {
    let mut g = 2usize;
    while (g + 1).checked_pow(d as u32).is_some_and(|n| n <= budget) {
        g += 1;
    }
    g
}

fn ifs_depth(r: usize, rho: f64, budget: usize) -> usize {
    let by_budget = ((budget as f64).ln() / (r as f64).ln()).floor().max(1.0) as usize;
    let needed = (0.25f64.ln() / rho.ln()).ceil() as usize;
    by_budget.max(needed)
}

/// Leaves `s_{k_1}∘⋯∘s_{k_L}(x_0)` in lexicographic address order, where
/// `x_0` is the fixed point of the first map.
pub(crate) fn ifs_leaves(maps: &[Similarity], depth: usize) -> Vec<Vec<f64>> {
    let s1 = &maps[0];
    let x0: Vec<f64> = s1.offset.iter().map(|t| t / (1.0 - s1.ratio)).collect();
    let mut level = vec![x0];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * maps.len());
        for s in maps {
            for p in &level {
                next.push(
                    p.iter()
                        .zip(&s.offset)
                        .map(|(x, t)| s.ratio * x + t)
                        .collect(),
                );
            }
        }
        level = next;
    }
    level
}

pub(crate) fn ifs_root_diameter(maps: &[Similarity], budget: usize) -> f64 {
    let rho = maps.iter().map(|s| s.ratio).fold(0.0, f64::max);
    let depth = ifs_depth(maps.len(), rho, budget);
    let leaves = ifs_leaves(maps, depth);
    let d = leaves[0].len();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in &leaves {
        for k in 0..d {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    sup_extent(&lo, &hi) / (1.0 - 2.0 * rho.powi(depth as i32))
}

/// Sample spacing of the comb set's teeth and base.
pub(crate) fn comb_spacing(budget: usize) -> f64 {
    let level = (((budget as f64).log2() / 2.0).floor() as i32).clamp(4, 12);
    2f64.powi(-level)
}

impl ParamSet {
    /// Deterministic sample cloud of the set.
    pub fn samples(&self) -> Result<SampleCloud> {
        Ok(match self.geometry()? {
            Geometry::Point(p) => {
                let mut cloud = SampleCloud::new(p.len(), 0.0);
                cloud.push(&p, 0.0);
                cloud
            }
            Geometry::Grid {
                root_corner,
                root_width,
                corner,
                width,
                comb: None,
            } => {
                let d = corner.len();
                let g = grid_side(self.sample_budget, d);
                let step = root_width / (g - 1) as f64;
                let tol = 1e-12 * root_width;
                let axes: Vec<Vec<f64>> = (0..d)
                    .map(|i| {
                        (0..g)
                            .map(|j| root_corner[i] + step * j as f64)
                            .filter(|&x| x >= corner[i] - tol && x <= corner[i] + width + tol)
                            .collect()
                    })
                    .collect();
                let mut cloud = SampleCloud::new(d, step);
                let total: usize = axes.iter().map(Vec::len).product();
                let mut point = vec![0.0; d];
                for mut idx in 0..total {
                    for i in 0..d {
                        point[i] = axes[i][idx % axes[i].len()];
                        idx /= axes[i].len();
                    }
                    cloud.push(&point, 0.0);
                }
                cloud
            }
            Geometry::Grid {
                corner,
                width,
                comb: Some(cap),
                ..
            } => {
                let h = comb_spacing(self.sample_budget);
                let mut cloud = SampleCloud::new(2, h);
                let tol = 1e-12;
                let inside = |x: f64, y: f64| {
                    x >= corner[0] - tol
                        && x <= corner[0] + width + tol
                        && y >= corner[1] - tol
                        && y <= corner[1] + width + tol
                };
                let base = (1.0 / h).round() as usize;
                for i in 0..=base {
                    let x = 1.0 + i as f64 * h;
                    if inside(x, 1.0) {
                        cloud.push(&[x, 1.0], 0.0);
                    }
                }
                for n in 1..=cap {
                    let height = 1.0 / n as f64;
                    let steps = (height / h).floor() as usize;
                    for k in (1..(1u64 << n)).step_by(2) {
                        let x = 1.0 + k as f64 / (1u64 << n) as f64;
                        if x < corner[0] - tol || x > corner[0] + width + tol {
                            continue;
                        }
                        for j in 1..=steps {
                            let y = 1.0 + j as f64 * h;
                            if inside(x, y) {
                                cloud.push(&[x, y], 0.0);
                            }
                        }
                        if steps as f64 * h < height && inside(x, 1.0 + height) {
                            cloud.push(&[x, 1.0 + height], 0.0);
                        }
                    }
                }
                cloud
            }
            Geometry::Curve {
                map,
                t0,
                t1,
                constant,
                beta,
            } => {
                let level = ((self.sample_budget - 1) as f64)
                    .log2()
                    .floor()
                    .clamp(1.0, 26.0) as u32;
                let count = 1usize << level;
                let dt = (t1 - t0) / count as f64;
                let mut cloud = SampleCloud::new(map.dim(), constant * dt.powf(beta));
                for i in 0..=count {
                    let t = if i == count { t1 } else { t0 + dt * i as f64 };
                    cloud.push(&map.eval(t), t);
                }
                cloud
            }
            Geometry::Ifs {
                maps,
                scale,
                shift,
                exact_diam,
            } => {
                let rho = maps.iter().map(|s| s.ratio).fold(0.0, f64::max);
                let depth = ifs_depth(maps.len(), rho, self.sample_budget);
                let root_diam =
                    exact_diam.unwrap_or_else(|| ifs_root_diameter(&maps, self.sample_budget));
                let mut cloud =
                    SampleCloud::new(shift.len(), scale * root_diam * rho.powi(depth as i32));
                cloud.leaf_depth = depth;
                let mut point = vec![0.0; shift.len()];
                for (i, p) in ifs_leaves(&maps, depth).into_iter().enumerate() {
                    for (k, x) in p.iter().enumerate() {
                        point[k] = scale * x + shift[k];
                    }
                    cloud.push(&point, i as f64);
                }
                cloud
            }
        })
    }
}
