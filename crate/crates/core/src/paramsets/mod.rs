//! Compact parameter sets `Λ ⊂ ℝ^d`, their homogeneous coverings
//! `(Λ_k)_{k ∈ I_r^m}` and box-counting estimators. The metric is the sup norm.

mod boxcount;
mod cover;
mod curve;
mod sampling;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use boxcount::{box_count, box_dim_estimate, comb_box_count, BoxDimEstimate};
pub use cover::{address_label, build_cover, check_cover, Cell, CellSpec, CoverCheck, CoverFamily};
pub(crate) use cover::{addresses, grid_box};
pub use curve::CurveMap;
pub use sampling::SampleCloud;

/// Default sample budget: `2^14 + 1` points, i.e. resolution `2^{-14}·diam` on curves.
pub const DEFAULT_SAMPLE_BUDGET: usize = (1 << 14) + 1;
/// Default truncation depth of the comb set.
pub const DEFAULT_COMB_DEPTH: u32 = 12;
/// Largest number of cells any covering may have.
pub const MAX_CELLS: usize = 1 << 24;

/// Contracting similarity `x ↦ ratio·x + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Similarity {
    pub ratio: f64,
    pub offset: Vec<f64>,
}

/// Kind-specific data of a parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetKind {
    /// A single point.
    Point { coords: Vec<f64> },
    /// The cube `corner + [0, width]^d`.
    Cube { corner: Vec<f64>, width: f64 },
    /// Image of a Lipschitz map; the constant defaults to the map's own bound.
    LipschitzCurve {
        map: CurveMap,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lipschitz: Option<f64>,
    },
    /// Image of a β-Hölder map; the constant defaults to the map's own bound.
    HolderCurve {
        map: CurveMap,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        constant: Option<f64>,
        exponent: f64,
    },
    /// Attractor of a family of contracting similarities.
    SelfSimilar { maps: Vec<Similarity> },
    /// Homogeneous Cantor set in `corner + [0, width]^d` with `2^d` maps of ratio `ratio`.
    HomogeneousCantor {
        corner: Vec<f64>,
        width: f64,
        ratio: f64,
    },
    /// `[1,2]×{1}` together with the teeth `{1 + k/2^n} × [1, 1 + 1/n]`, `n ≤ depth_cap`.
    CombSet {
        #[serde(default = "default_comb_depth")]
        depth_cap: u32,
    },
}

fn default_comb_depth() -> u32 {
    DEFAULT_COMB_DEPTH
}

fn default_budget() -> usize {
    DEFAULT_SAMPLE_BUDGET
}

/// A compact parameter set, optionally restricted to one cell of its
/// canonical covering through an address `prefix`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSet {
    pub kind: SetKind,
    #[serde(default = "default_budget")]
    pub sample_budget: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub prefix: Vec<u32>,
    /// CSV file of curve vertices, resolved by the front end before use.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_file: Option<String>,
}

/// Constants of the canonical homogeneous covering:
/// `diam(Λ_k) ≤ c_lambda·rho^m` with `rho = r^{-1/γ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverConstants {
    pub r: usize,
    pub gamma: f64,
    pub c_lambda: f64,
    pub rho: f64,
}

/// Resolved geometry of a (possibly restricted) parameter set.
#[derive(Debug, Clone)]
pub(crate) enum Geometry {
    Point(Vec<f64>),
    Grid {
        root_corner: Vec<f64>,
        root_width: f64,
        corner: Vec<f64>,
        width: f64,
        comb: Option<u32>,
    },
    Curve {
        map: CurveMap,
        t0: f64,
        t1: f64,
        constant: f64,
        beta: f64,
    },
    Ifs {
        maps: Vec<Similarity>,
        scale: f64,
        shift: Vec<f64>,
        exact_diam: Option<f64>,
    },
}

/// Gray-code ordering of the `2^d` children of a dyadic cube: digit `k`
/// (1-based) maps to the corner bits `g(k−1)`, bit `i` for axis `i`.
pub(crate) fn gray_bits(digit: u32) -> u32 {
    let k = digit - 1;
    k ^ (k >> 1)
}

pub(crate) fn digit_of_bits(bits: u32) -> u32 {
    let mut k = bits;
    let mut shift = bits >> 1;
    while shift != 0 {
        k ^= shift;
        shift >>= 1;
    }
    k + 1
}

impl ParamSet {
    pub fn new(kind: SetKind) -> Self {
        ParamSet {
            kind,
            sample_budget: DEFAULT_SAMPLE_BUDGET,
            prefix: Vec::new(),
            sample_file: None,
        }
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.sample_budget = budget;
        self
    }

    pub fn cube(corner: Vec<f64>, width: f64) -> Self {
        ParamSet::new(SetKind::Cube { corner, width })
    }

    pub fn segment(start: Vec<f64>, end: Vec<f64>) -> Self {
        ParamSet::new(SetKind::LipschitzCurve {
            map: CurveMap::Segment { start, end },
            lipschitz: None,
        })
    }

    pub fn cantor(ratio: f64) -> Self {
        ParamSet::new(SetKind::HomogeneousCantor {
            corner: vec![0.0, 0.0],
            width: 1.0,
            ratio,
        })
    }

    pub fn comb(depth_cap: u32) -> Self {
        ParamSet::new(SetKind::CombSet { depth_cap })
    }

    /// Replaces a curve's map by the polyline through `points` and clears
    /// the sample file reference.
    pub fn with_curve_points(mut self, points: Vec<Vec<f64>>) -> Result<Self> {
        let poly = CurveMap::Polyline { points };
        poly.validate()?;
        match &mut self.kind {
            SetKind::LipschitzCurve { map, .. } | SetKind::HolderCurve { map, .. } => *map = poly,
            _ => {
                return Err(Error::invalid(
                    "sample file",
                    "only curve kinds accept sample files",
                ))
            }
        }
        self.sample_file = None;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            SetKind::Point { coords } => coords.len(),
            SetKind::Cube { corner, .. } | SetKind::HomogeneousCantor { corner, .. } => {
                corner.len()
            }
            SetKind::LipschitzCurve { map, .. } | SetKind::HolderCurve { map, .. } => map.dim(),
            SetKind::SelfSimilar { maps } => maps.first().map_or(0, |s| s.offset.len()),
            SetKind::CombSet { .. } => 2,
        }
    }

    /// Branching number `r` of the canonical covering.
    pub fn branching(&self) -> usize {
        match &self.kind {
            SetKind::Point { .. }
            | SetKind::LipschitzCurve { .. }
            | SetKind::HolderCurve { .. } => 2,
            SetKind::Cube { corner, .. } | SetKind::HomogeneousCantor { corner, .. } => {
                1 << corner.len()
            }
            SetKind::SelfSimilar { maps } => maps.len(),
            SetKind::CombSet { .. } => 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |d: String| Err(Error::invalid("parameter set", d));
        if self.sample_file.is_some() {
            return bad("sample file must be resolved before use".into());
        }
        if self.sample_budget < 2 {
            return bad("sample budget must be at least 2".into());
        }
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match &self.kind {
            SetKind::Point { coords } => {
                if coords.is_empty() || !finite(coords) {
                    return bad("point needs finite coordinates".into());
                }
            }
            SetKind::Cube { corner, width } => {
                if corner.is_empty()
                    || corner.len() > 8
                    || !finite(corner)
                    || !(*width > 0.0 && width.is_finite())
                {
                    return bad(
                        "cube needs 1..=8 finite corner coordinates and a positive width".into(),
                    );
                }
            }
            SetKind::LipschitzCurve { map, lipschitz } => {
                map.validate()?;
                if lipschitz.is_some_and(|c| !(c > 0.0 && c.is_finite())) {
                    return bad("Lipschitz constant must be positive".into());
                }
            }
            SetKind::HolderCurve {
                map,
                constant,
                exponent,
            } => {
                map.validate()?;
                if !(*exponent > 0.0 && *exponent <= 1.0) {
                    return bad(format!("Hölder exponent {exponent} not in (0, 1]"));
                }
                if *exponent > map.natural_exponent() + 1e-12 {
                    return bad(format!("map is only {}-Hölder", map.natural_exponent()));
                }
                if constant.is_some_and(|c| !(c > 0.0 && c.is_finite())) {
                    return bad("Hölder constant must be positive".into());
                }
            }
            SetKind::SelfSimilar { maps } => {
                if maps.len() < 2 {
                    return bad("self-similar set needs at least two similarities".into());
                }
                let d = maps[0].offset.len();
                for s in maps {
                    if !(s.ratio > 0.0 && s.ratio < 1.0) {
                        return bad(format!("similarity ratio {} not in (0, 1)", s.ratio));
                    }
                    if s.offset.len() != d || d == 0 || !finite(&s.offset) {
                        return bad(
                            "similarity offsets must be finite and of equal positive dimension"
                                .into(),
                        );
                    }
                }
            }
            SetKind::HomogeneousCantor {
                corner,
                width,
                ratio,
            } => {
                if corner.is_empty()
                    || corner.len() > 8
                    || !finite(corner)
                    || !(*width > 0.0 && width.is_finite())
                {
                    return bad(
                        "Cantor set needs 1..=8 finite corner coordinates and a positive width"
                            .into(),
                    );
                }
                if !(*ratio > 0.0 && *ratio < 0.5) {
                    return bad(format!("dissection ratio {ratio} not in (0, 1/2)"));
                }
            }
            SetKind::CombSet { depth_cap } => {
                if !(1..=30).contains(depth_cap) {
                    return bad("comb depth cap must lie in 1..=30".into());
                }
            }
        }
        let r = self.branching() as u32;
        if let Some(&k) = self.prefix.iter().find(|&&k| k == 0 || k > r) {
            return bad(format!("prefix digit {k} outside 1..={r}"));
        }
        Ok(())
    }

    pub(crate) fn geometry(&self) -> Result<Geometry> {
        self.validate()?;
        Ok(match &self.kind {
            SetKind::Point { coords } => Geometry::Point(coords.clone()),
            SetKind::Cube { corner, width } => self.grid_geometry(corner.clone(), *width, None),
            SetKind::CombSet { depth_cap } => {
                self.grid_geometry(vec![1.0, 1.0], 1.0, Some(*depth_cap))
            }
            SetKind::LipschitzCurve { map, lipschitz } => {
                self.curve_geometry(map, lipschitz.unwrap_or_else(|| map.holder_constant()), 1.0)
            }
            SetKind::HolderCurve {
                map,
                constant,
                exponent,
            } => self.curve_geometry(
                map,
                constant.unwrap_or_else(|| map.holder_constant()),
                *exponent,
            ),
            SetKind::SelfSimilar { maps } => self.ifs_geometry(maps.clone(), None),
            SetKind::HomogeneousCantor {
                corner,
                width,
                ratio,
            } => {
                let d = corner.len();
                let maps = (1..=(1u32 << d))
                    .map(|digit| {
                        let bits = gray_bits(digit);
                        let offset = (0..d)
                            .map(|i| {
                                corner[i] * (1.0 - ratio)
                                    + (1.0 - ratio) * width * ((bits >> i) & 1) as f64
                            })
                            .collect();
                        Similarity {
                            ratio: *ratio,
                            offset,
                        }
                    })
                    .collect();
                self.ifs_geometry(maps, Some(*width))
            }
        })
    }

    fn grid_geometry(&self, root_corner: Vec<f64>, root_width: f64, comb: Option<u32>) -> Geometry {
        let mut corner = root_corner.clone();
        let mut width = root_width;
        for &digit in &self.prefix {
            width /= 2.0;
            let bits = gray_bits(digit);
            for (i, c) in corner.iter_mut().enumerate() {
                *c += width * ((bits >> i) & 1) as f64;
            }
        }
        Geometry::Grid {
            root_corner,
            root_width,
            corner,
            width,
            comb,
        }
    }

    fn curve_geometry(&self, map: &CurveMap, constant: f64, beta: f64) -> Geometry {
        let (mut t0, mut len) = (0.0, 1.0);
        for &digit in &self.prefix {
            len /= 2.0;
            t0 += len * (digit - 1) as f64;
        }
        Geometry::Curve {
            map: map.clone(),
            t0,
            t1: t0 + len,
            constant,
            beta,
        }
    }

    fn ifs_geometry(&self, maps: Vec<Similarity>, exact_diam: Option<f64>) -> Geometry {
        let d = maps[0].offset.len();
        let (mut scale, mut shift) = (1.0, vec![0.0; d]);
        for &digit in self.prefix.iter().rev() {
            let s = &maps[digit as usize - 1];
            for (x, t) in shift.iter_mut().zip(&s.offset) {
                *x = s.ratio * *x + t;
            }
            scale *= s.ratio;
        }
        Geometry::Ifs {
            maps,
            scale,
            shift,
            exact_diam,
        }
    }

    /// Constants `(r, γ, C(Λ), ρ)` of the canonical covering of this set.
    pub fn cover_constants(&self) -> Result<CoverConstants> {
        let r = self.branching();
        Ok(match self.geometry()? {
            Geometry::Point(_) => CoverConstants {
                r,
                gamma: 1.0,
                c_lambda: 0.0,
                rho: 0.5,
            },
            Geometry::Grid { width, corner, .. } => {
                let d = corner.len() as f64;
                CoverConstants {
                    r,
                    gamma: d,
                    c_lambda: width,
                    rho: 0.5,
                }
            }
            Geometry::Curve {
                t0,
                t1,
                constant,
                beta,
                ..
            } => CoverConstants {
                r,
                gamma: 1.0 / beta,
                c_lambda: constant * (t1 - t0).powf(beta),
                rho: 2f64.powf(-beta),
            },
            Geometry::Ifs {
                ref maps,
                scale,
                exact_diam,
                ..
            } => {
                let rho = maps.iter().map(|s| s.ratio).fold(0.0, f64::max);
                let gamma = -(r as f64).ln() / rho.ln();
                let root_diam = match exact_diam {
                    Some(w) => w,
                    None => sampling::ifs_root_diameter(maps, self.sample_budget),
                };
                CoverConstants {
                    r,
                    gamma,
                    c_lambda: scale * root_diam,
                    rho,
                }
            }
        })
    }

    /// Restricts this set to the cell with the given relative address.
    pub fn restrict(&self, digits: &[u32]) -> ParamSet {
        let mut piece = self.clone();
        piece.prefix.extend_from_slice(digits);
        piece
    }

    /// Splits the set into the cells of its canonical covering at the
    /// smallest depth `m'` with `C(Λ)·ρ^{m'} ≤ target_c`.
    pub fn presubdivide(&self, target_c: f64) -> Result<(usize, Vec<ParamSet>)> {
        if !(target_c > 0.0) {
            return Err(Error::invalid(
                "presubdivision target",
                "target constant must be positive",
            ));
        }
        let k = self.cover_constants()?;
        if k.c_lambda <= target_c * (1.0 + 1e-12) {
            return Ok((0, vec![self.clone()]));
        }
        let depth = ((target_c / k.c_lambda).ln() / k.rho.ln() - 1e-9)
            .ceil()
            .max(1.0) as usize;
        let count = (k.r as f64).powi(depth as i32);
        if count > MAX_CELLS as f64 {
            return Err(Error::capacity(
                "presubdivision",
                format!("{} pieces at depth {depth}", count),
            ));
        }
        let pieces = cover::addresses(k.r, depth)
            .map(|digits| self.restrict(&digits))
            .collect();
        Ok((depth, pieces))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_digits_round_trip() {
        for digit in 1..=16 {
            assert_eq!(digit_of_bits(gray_bits(digit)), digit);
        }
        // U-shaped order of the four quadrants: (0,0), (1,0), (1,1), (0,1)
        let order: Vec<u32> = (1..=4).map(gray_bits).collect();
        assert_eq!(order, vec![0b00, 0b01, 0b11, 0b10]);
    }

    #[test]
    fn cover_constants_per_kind() {
        let c = ParamSet::cube(vec![0.0, 0.0], 1.0)
            .cover_constants()
            .unwrap();
        assert_eq!((c.r, c.gamma, c.c_lambda, c.rho), (4, 2.0, 1.0, 0.5));
        let cantor = ParamSet::cantor(0.2).cover_constants().unwrap();
        assert_eq!(cantor.r, 4);
        assert!((cantor.gamma - 4f64.ln() / 5f64.ln()).abs() < 1e-15);
        assert!((cantor.gamma - 0.8614).abs() < 1e-4);
        let holder = ParamSet::new(SetKind::HolderCurve {
            map: CurveMap::Segment {
                start: vec![0.0],
                end: vec![1.0],
            },
            constant: Some(1.0),
            exponent: 0.5,
        });
        let h = holder.cover_constants().unwrap();
        assert_eq!(h.gamma, 2.0);
        assert!((h.rho - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn presubdivide_examples() {
        let cube = ParamSet::cube(vec![0.0, 0.0], 1.0);
        let (depth, pieces) = cube.presubdivide(1.0 / 8.0).unwrap();
        assert_eq!((depth, pieces.len()), (3, 64));
        assert_eq!(pieces[0].cover_constants().unwrap().c_lambda, 0.125);
        let (depth, pieces) = cube.presubdivide(2.0).unwrap();
        assert_eq!((depth, pieces.len()), (0, 1));
        let holder = ParamSet::new(SetKind::HolderCurve {
            map: CurveMap::Segment {
                start: vec![0.0],
                end: vec![1.0],
            },
            constant: Some(1.0),
            exponent: 0.5,
        });
        let (depth, pieces) = holder.presubdivide(0.25).unwrap();
        assert_eq!((depth, pieces.len()), (4, 16));
    }

    #[test]
    fn invalid_descriptors() {
        let s = ParamSet::new(SetKind::SelfSimilar {
            maps: vec![
                Similarity {
                    ratio: 1.0,
                    offset: vec![0.0],
                },
                Similarity {
                    ratio: 0.5,
                    offset: vec![1.0],
                },
            ],
        });
        assert!(s.validate().is_err());
        assert!(ParamSet::cantor(0.6).validate().is_err());
        let mut c = ParamSet::cube(vec![0.0], 1.0);
        c.prefix = vec![3];
        assert!(c.validate().is_err());
        let json = r#"{"kind":{"kind":"cube","corner":[1,1],"width":1},"oops":1}"#;
        assert!(serde_json::from_str::<ParamSet>(json).is_err());
        let json = r#"{"kind":{"kind":"comb_set"}}"#;
        let comb: ParamSet = serde_json::from_str(json).unwrap();
        assert_eq!(
            comb.kind,
            SetKind::CombSet {
                depth_cap: DEFAULT_COMB_DEPTH
            }
        );
    }
}
