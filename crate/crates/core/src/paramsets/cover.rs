use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::sampling::{sup_extent, SampleCloud};
use super::{digit_of_bits, gray_bits, CoverConstants, Geometry, ParamSet, MAX_CELLS};

/// Reference to a cell of a parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CellSpec {
    /// Cell of the canonical covering, addressed relative to the set.
    Address { digits: Vec<u32> },
    /// Image of the parameter interval `[t0, t1]` of a curve.
    Interval { t0: f64, t1: f64 },
}

/// One cell `Λ_k` of a covering.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub spec: CellSpec,
    /// Coordinate-wise supremum of the cell.
    pub anchor: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub diam_bound: f64,
    /// Indices of the cover's samples lying in the cell.
    pub samples: Vec<usize>,
}

/// Depth-`m` canonical covering `(Λ_k)_{k ∈ I_r^m}`, cells in lexicographic order.
#[derive(Debug, Clone)]
pub struct CoverFamily {
    pub r: usize,
    pub m: usize,
    pub constants: CoverConstants,
    pub cloud: SampleCloud,
    pub cells: Vec<Cell>,
}

/// All addresses of `I_r^depth` in lexicographic order.
pub(crate) fn addresses(r: usize, depth: usize) -> impl Iterator<Item = Vec<u32>> {
    let count = r.pow(depth as u32);
    (0..count).map(move |lin| address_of(lin, r, depth))
}

pub(crate) fn address_of(mut lin: usize, r: usize, depth: usize) -> Vec<u32> {
    let mut digits = vec![1u32; depth];
    for slot in digits.iter_mut().rev() {
        *slot = (lin % r) as u32 + 1;
        lin /= r;
    }
    digits
}

/// Dotted label `k1.k2…km` of the address with linear index `lin`.
pub fn address_label(lin: usize, r: usize, depth: usize) -> String {
    digits_label(&address_of(lin, r, depth))
}

pub(crate) fn digits_label(digits: &[u32]) -> String {
    digits
        .iter()
        .map(u32::to_string)
        .collect::<Vec<_>>()
        .join(".")
}

pub(crate) fn linear_of(digits: &[u32], r: usize) -> usize {
    digits.iter().fold(0, |acc, &k| acc * r + (k as usize - 1))
}

/// Dyadic indices (one or two, closed cells) of `u ∈ [0, 2^m]` at level `m`.
fn dyadic_candidates(u: f64, side: usize) -> (usize, Option<usize>) {
    let tol = 1e-9;
    let clamped = u.clamp(0.0, side as f64);
    let idx = (clamped.floor() as usize).min(side - 1);
    let nearest = clamped.round();
    if (clamped - nearest).abs() < tol {
        let b = nearest as usize;
        if b > 0 && b < side {
            return (b - 1, Some(b));
        }
    }
    (idx, None)
}

fn grid_digits(indices: &[usize], m: usize) -> Vec<u32> {
    (0..m)
        .map(|level| {
            let shift = m - 1 - level;
            let bits = indices.iter().enumerate().fold(0u32, |acc, (axis, &ix)| {
                acc | ((((ix >> shift) & 1) as u32) << axis)
            });
            digit_of_bits(bits)
        })
        .collect()
}

pub(crate) fn grid_box(corner: &[f64], width: f64, digits: &[u32]) -> (Vec<f64>, Vec<f64>) {
    let mut lo = corner.to_vec();
    let mut w = width;
    for &digit in digits {
        w /= 2.0;
        let bits = gray_bits(digit);
        for (i, c) in lo.iter_mut().enumerate() {
            *c += w * ((bits >> i) & 1) as f64;
        }
    }
    let hi = lo.iter().map(|x| x + w).collect();
    (lo, hi)
}

fn curve_interval(t0: f64, t1: f64, digits: &[u32]) -> (f64, f64) {
    let (mut a, mut len) = (t0, t1 - t0);
    for &digit in digits {
        len /= 2.0;
        a += len * (digit - 1) as f64;
    }
    (a, a + len)
}

fn in_box(p: &[f64], lo: &[f64], hi: &[f64], tol: f64) -> bool {
    p.iter()
        .zip(lo.iter().zip(hi))
        .all(|(x, (a, b))| *x >= a - tol && *x <= b + tol)
}

impl ParamSet {
    /// Sample cloud dense enough to give every depth-`m` cell samples.
    fn cloud_for_depth(&self, m: usize) -> Result<SampleCloud> {
        let r = self.branching();
        let needed = match &self.geometry()? {
            Geometry::Curve { .. } => (1usize << m.min(24)) * 4 + 1,
            Geometry::Ifs { .. } => r.saturating_pow(m as u32).saturating_mul(r),
            _ => 0,
        };
        if needed > self.sample_budget {
            self.clone().with_budget(needed.min(1 << 26)).samples()
        } else {
            self.samples()
        }
    }

    /// Whether sample `i` of `cloud` (a cloud of this set) lies in the cell.
    pub fn cell_contains(&self, spec: &CellSpec, cloud: &SampleCloud, i: usize) -> Result<bool> {
        let tol = 1e-9;
        Ok(match (self.geometry()?, spec) {
            (Geometry::Point(_), _) => true,
            (Geometry::Curve { .. }, CellSpec::Interval { t0, t1 }) => {
                let t = cloud.tag(i);
                t >= t0 - tol * (t1 - t0) && t <= t1 + tol * (t1 - t0)
            }
            (Geometry::Curve { t0, t1, .. }, CellSpec::Address { digits }) => {
                let (a, b) = curve_interval(t0, t1, digits);
                let t = cloud.tag(i);
                t >= a - tol * (b - a) && t <= b + tol * (b - a)
            }
            (Geometry::Grid { corner, width, .. }, CellSpec::Address { digits }) => {
                let (lo, hi) = grid_box(&corner, width, digits);
                in_box(cloud.point(i), &lo, &hi, tol * width)
            }
            (Geometry::Ifs { maps, .. }, CellSpec::Address { digits }) => {
                let r = maps.len();
                let leaf = cloud.tag(i) as usize;
                let depth = cloud.leaf_depth;
                if digits.len() <= depth {
                    leaf / r.pow((depth - digits.len()) as u32) == linear_of(digits, r)
                } else {
                    leaf * r.pow((digits.len() - depth) as u32) == linear_of(digits, r)
                }
            }
            (_, CellSpec::Interval { .. }) => {
                return Err(Error::invalid(
                    "cell",
                    "interval cells only exist on curves",
                ));
            }
        })
    }

    /// Test points inside a cell: about `density` per coordinate, always
    /// including the cell's extreme samples.
    pub fn cell_points(&self, spec: &CellSpec, density: usize) -> Result<Vec<Vec<f64>>> {
        let density = density.max(2);
        let geometry = self.geometry()?;
        let curve_points = |map: &super::CurveMap, a: f64, b: f64| {
            let mut ts: Vec<f64> = (0..density)
                .map(|i| a + (b - a) * i as f64 / (density - 1) as f64)
                .collect();
            ts.extend(map.vertices_between(a, b));
            ts.into_iter().map(|t| map.eval(t)).collect::<Vec<_>>()
        };
        Ok(match (&geometry, spec) {
            (Geometry::Point(p), _) => vec![p.clone()],
            (Geometry::Curve { map, .. }, CellSpec::Interval { t0, t1 }) => {
                curve_points(map, *t0, *t1)
            }
            (Geometry::Curve { map, t0, t1, .. }, CellSpec::Address { digits }) => {
                let (a, b) = curve_interval(*t0, *t1, digits);
                curve_points(map, a, b)
            }
            (
                Geometry::Grid {
                    corner,
                    width,
                    comb: None,
                    ..
                },
                CellSpec::Address { digits },
            ) => {
                let (lo, hi) = grid_box(corner, *width, digits);
                let d = lo.len();
                let total = density.pow(d as u32);
                (0..total)
                    .map(|mut idx| {
                        (0..d)
                            .map(|i| {
                                let j = idx % density;
                                idx /= density;
                                lo[i] + (hi[i] - lo[i]) * j as f64 / (density - 1) as f64
                            })
                            .collect()
                    })
                    .collect()
            }
            (Geometry::Grid { .. } | Geometry::Ifs { .. }, CellSpec::Address { digits }) => {
                let piece = self.restrict(digits);
                let cloud = piece
                    .clone()
                    .with_budget(density.pow(self.dim() as u32).max(16))
                    .samples()?;
                let all: Vec<usize> = (0..cloud.len()).collect();
                let mut pts: Vec<Vec<f64>> = cloud.points().map(<[f64]>::to_vec).collect();
                if let Some((_, hi)) = cloud.bounds_of(&all) {
                    pts.push(hi);
                }
                pts
            }
            (_, CellSpec::Interval { .. }) => {
                return Err(Error::invalid(
                    "cell",
                    "interval cells only exist on curves",
                ));
            }
        })
    }

    /// Coordinate-wise supremum of the set, for curves and sample-based kinds.
    pub(crate) fn cell_bounds(
        &self,
        spec: &CellSpec,
        density: usize,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        if let (
            Geometry::Grid {
                corner,
                width,
                comb: None,
                ..
            },
            CellSpec::Address { digits },
        ) = (self.geometry()?, spec)
        {
            return Ok(grid_box(&corner, width, digits));
        }
        let pts = self.cell_points(spec, density)?;
        let d = pts[0].len();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for p in &pts {
            for k in 0..d {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Ok((lo, hi))
    }
}

/// Canonical depth-`m` covering of `set`.
pub fn build_cover(set: &ParamSet, m: usize) -> Result<CoverFamily> {
    if m == 0 {
        return Err(Error::invalid("cover depth", "depth must be at least 1"));
    }
    let constants = set.cover_constants()?;
    let r = constants.r;
    let q = r
        .checked_pow(m as u32)
        .filter(|&q| q <= MAX_CELLS)
        .ok_or_else(|| {
            Error::capacity(
                "covering",
                format!("{r}^{m} cells exceed the cap {MAX_CELLS}"),
            )
        })?;
    let geometry = set.geometry()?;
    let cloud = set.cloud_for_depth(m)?;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); q];
    match &geometry {
        Geometry::Point(_) => members.iter_mut().for_each(|cell| cell.push(0)),
        Geometry::Grid { corner, width, .. } => {
            let side = 1usize << m;
            let d = corner.len();
            for i in 0..cloud.len() {
                let p = cloud.point(i);
                let cands: Vec<(usize, Option<usize>)> = (0..d)
                    .map(|k| dyadic_candidates((p[k] - corner[k]) / width * side as f64, side))
                    .collect();
                for combo in 0..(1usize << d) {
                    let mut idx = Vec::with_capacity(d);
                    let mut ok = true;
                    for (k, (a, b)) in cands.iter().enumerate() {
                        if (combo >> k) & 1 == 0 {
                            idx.push(*a);
                        } else if let Some(b) = b {
                            idx.push(*b);
                        } else {
                            ok = false;
                            break;
                        }
                    }
                    if ok {
                        members[linear_of(&grid_digits(&idx, m), r)].push(i);
                    }
                }
            }
        }
        Geometry::Curve { t0, t1, .. } => {
            let side = 1usize << m;
            for i in 0..cloud.len() {
                let (a, b) = dyadic_candidates((cloud.tag(i) - t0) / (t1 - t0) * side as f64, side);
                members[a].push(i);
                if let Some(b) = b {
                    members[b].push(i);
                }
            }
        }
        Geometry::Ifs { .. } => {
            let depth = cloud.leaf_depth;
            for i in 0..cloud.len() {
                let leaf = cloud.tag(i) as usize;
                let lin = if m <= depth {
                    leaf / r.pow((depth - m) as u32)
                } else {
                    leaf * r.pow((m - depth) as u32)
                };
                members[lin].push(i);
            }
        }
    }
    let ifs_ratios: Option<Vec<f64>> = match &geometry {
        Geometry::Ifs { maps, .. } => Some(maps.iter().map(|s| s.ratio).collect()),
        _ => None,
    };
    let c_piece = constants.c_lambda;
    let cells = members
        .into_iter()
        .enumerate()
        .map(|(lin, samples)| {
            let digits = address_of(lin, r, m);
            let (lo, hi, anchor, diam_bound) = match &geometry {
                Geometry::Grid {
                    corner,
                    width,
                    comb,
                    ..
                } => {
                    let (blo, bhi) = grid_box(corner, *width, &digits);
                    let diam = width / (1u64 << m) as f64;
                    match (comb, cloud.bounds_of(&samples)) {
                        (Some(_), Some((lo, hi))) => (lo, hi.clone(), hi, diam),
                        _ => (blo, bhi.clone(), bhi, diam),
                    }
                }
                _ => {
                    let (lo, hi) = cloud.bounds_of(&samples).unwrap_or_else(|| {
                        let p = cloud.point(0).to_vec();
                        (p.clone(), p)
                    });
                    let diam = match &ifs_ratios {
                        Some(ratios) => digits
                            .iter()
                            .fold(c_piece, |acc, &k| acc * ratios[k as usize - 1]),
                        None => c_piece * constants.rho.powi(m as i32),
                    };
                    (lo, hi.clone(), hi, diam)
                }
            };
            Cell {
                spec: CellSpec::Address { digits },
                anchor,
                lo,
                hi,
                diam_bound,
                samples,
            }
        })
        .collect();
    Ok(CoverFamily {
        r,
        m,
        constants,
        cloud,
        cells,
    })
}

/// Outcome of the covering invariants on the sample cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverCheck {
    /// Largest ratio of measured cell diameter to its bound.
    pub max_diam_ratio: f64,
    /// Largest ratio of measured cell diameter to `C(Λ)·ρ^m`.
    pub max_homogeneous_ratio: f64,
    pub uncovered_samples: usize,
    /// Child cells whose samples stray from the parent by more than the child's diameter bound.
    pub nesting_violations: usize,
}

impl CoverCheck {
    pub fn holds(&self) -> bool {
        self.max_diam_ratio <= 1.0 + 1e-9
            && self.max_homogeneous_ratio <= 1.0 + 1e-9
            && self.uncovered_samples == 0
            && self.nesting_violations == 0
    }
}

/// Checks diameter, coverage and (given the parent depth) nesting.
pub fn check_cover(cover: &CoverFamily, parent: Option<&CoverFamily>) -> CoverCheck {
    let mut covered = vec![false; cover.cloud.len()];
    let mut max_diam_ratio: f64 = 0.0;
    let mut max_homogeneous_ratio: f64 = 0.0;
    let homogeneous = cover.constants.c_lambda * cover.constants.rho.powi(cover.m as i32);
    for cell in &cover.cells {
        for &i in &cell.samples {
            covered[i] = true;
        }
        if let Some((lo, hi)) = cover.cloud.bounds_of(&cell.samples) {
            let diam = sup_extent(&lo, &hi);
            if diam > 0.0 {
                max_diam_ratio = max_diam_ratio.max(diam / cell.diam_bound);
                max_homogeneous_ratio = max_homogeneous_ratio.max(diam / homogeneous);
            }
        }
    }
    let uncovered_samples = covered.iter().filter(|c| !**c).count();
    let nesting_violations = parent.map_or(0, |p| {
        cover
            .cells
            .iter()
            .enumerate()
            .filter(|(lin, cell)| {
                let parent_cell = &p.cells[lin / cover.r];
                match p.cloud.bounds_of(&parent_cell.samples) {
                    Some((plo, phi)) => cell.samples.iter().any(|&i| {
                        !in_box(cover.cloud.point(i), &plo, &phi, cell.diam_bound + 1e-12)
                    }),
                    None => !cell.samples.is_empty(),
                }
            })
            .count()
    });
    CoverCheck {
        max_diam_ratio,
        max_homogeneous_ratio,
        uncovered_samples,
        nesting_violations,
    }
}

impl CoverFamily {
    /// CSV export: address, anchor coordinates, diameter bound.
    pub fn cells_csv(&self) -> String {
        let d = self.cloud.dim();
        let mut out = String::from("cell");
        for i in 1..=d {
            let _ = write!(out, ",anchor_{i}");
        }
        out.push_str(",diam_bound,samples\n");
        for cell in &self.cells {
            let CellSpec::Address { digits } = &cell.spec else {
                continue;
            };
            out.push_str(&digits_label(digits));
            for x in &cell.anchor {
                let _ = write!(out, ",{x}");
            }
            let _ = writeln!(out, ",{},{}", cell.diam_bound, cell.samples.len());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::super::{CurveMap, SetKind, Similarity};
    use super::*;

    #[test]
    fn unit_square_first_level() {
        let cover = build_cover(&ParamSet::cube(vec![0.0, 0.0], 1.0), 1).unwrap();
        assert_eq!(cover.cells.len(), 4);
        let anchors: Vec<Vec<f64>> = cover.cells.iter().map(|c| c.anchor.clone()).collect();
        assert_eq!(
            anchors,
            vec![
                vec![0.5, 0.5],
                vec![1.0, 0.5],
                vec![1.0, 1.0],
                vec![0.5, 1.0]
            ]
        );
        assert!(cover.cells.iter().all(|c| c.diam_bound == 0.5));
    }

    #[test]
    fn invariants_hold_for_every_kind() {
        let sets = vec![
            ParamSet::cube(vec![1.0, 1.0], 1.0),
            ParamSet::segment(vec![1.0, 2.0], vec![2.0, 1.0]),
            ParamSet::new(SetKind::HolderCurve {
                map: CurveMap::Takagi {
                    beta: 0.5,
                    terms: 24,
                    offset: vec![1.0, 1.0],
                },
                constant: None,
                exponent: 0.5,
            }),
            ParamSet::cantor(0.2),
            ParamSet::new(SetKind::SelfSimilar {
                maps: vec![
                    Similarity {
                        ratio: 0.3,
                        offset: vec![0.0, 0.0],
                    },
                    Similarity {
                        ratio: 0.3,
                        offset: vec![0.7, 0.0],
                    },
                    Similarity {
                        ratio: 0.3,
                        offset: vec![0.35, 0.6],
                    },
                ],
            }),
            ParamSet::comb(8),
        ];
        for set in &sets {
            let mut parent: Option<CoverFamily> = None;
            for m in 1..=6 {
                let cover = build_cover(set, m).unwrap();
                let check = check_cover(&cover, parent.as_ref());
                assert!(check.holds(), "{:?} at m={m}: {check:?}", set.kind);
                parent = Some(cover);
            }
        }
    }

    #[test]
    fn equal_ratio_self_similar_diameter_ratio() {
        let set = ParamSet::new(SetKind::SelfSimilar {
            maps: vec![
                Similarity {
                    ratio: 0.4,
                    offset: vec![0.0],
                },
                Similarity {
                    ratio: 0.4,
                    offset: vec![0.6],
                },
            ],
        });
        for m in 1..=6 {
            let cover = build_cover(&set, m).unwrap();
            assert!(check_cover(&cover, None).max_homogeneous_ratio <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn holder_cells_respect_bound() {
        let set = ParamSet::new(SetKind::HolderCurve {
            map: CurveMap::Takagi {
                beta: 0.6,
                terms: 30,
                offset: vec![0.0, 0.0],
            },
            constant: None,
            exponent: 0.6,
        });
        let c = set.cover_constants().unwrap().c_lambda;
        let cover = build_cover(&set, 5).unwrap();
        let bound = c * 2f64.powf(-0.6 * 5.0);
        assert!(cover
            .cells
            .iter()
            .all(|cell| (cell.diam_bound - bound).abs() < 1e-12));
        assert!(check_cover(&cover, None).holds());
    }

    #[test]
    fn membership_matches_cover_assignment() {
        let set = ParamSet::cantor(0.2);
        let cover = build_cover(&set, 3).unwrap();
        for cell in cover.cells.iter().step_by(7) {
            for &i in cell.samples.iter().step_by(13) {
                assert!(set.cell_contains(&cell.spec, &cover.cloud, i).unwrap());
            }
        }
        let seg = ParamSet::segment(vec![0.0], vec![1.0]);
        let cover = build_cover(&seg, 4).unwrap();
        let spec = &cover.cells[5].spec;
        let inside = (0..cover.cloud.len())
            .filter(|&i| seg.cell_contains(spec, &cover.cloud, i).unwrap())
            .count();
        assert_eq!(inside, cover.cells[5].samples.len());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let cover = build_cover(&ParamSet::cube(vec![0.0, 0.0], 1.0), 2).unwrap();
        let csv = cover.cells_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "cell,anchor_1,anchor_2,diam_bound,samples");
        assert_eq!(lines.len(), 17);
        assert!(lines[1].starts_with("1.1,0.25,0.25,0.25"));
    }

    #[test]
    fn address_helpers_round_trip() {
        for lin in 0..27 {
            assert_eq!(linear_of(&address_of(lin, 3, 3), 3), lin);
        }
        let all: Vec<Vec<u32>> = addresses(2, 2).collect();
        assert_eq!(all, vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]);
    }
}
