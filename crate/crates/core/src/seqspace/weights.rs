use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Above this many terms the `1 + a/n` family switches from direct summation
/// to log-gamma differences.
const DIRECT_SUM_LIMIT: usize = 4096;

/// Closed interval `[lo, hi]` of admissible weight parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, a: f64) -> bool {
        a >= self.lo && a <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Table of affine log-weights `log w_j(a) = a·slope[j-1] + offset[j-1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct LogWeightTable {
    slope: Vec<f64>,
    offset: Vec<f64>,
    slope_prefix: Vec<f64>,
    offset_prefix: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTable {
    slope: Vec<f64>,
    offset: Vec<f64>,
}

impl TryFrom<RawTable> for LogWeightTable {
    type Error = Error;
    fn try_from(raw: RawTable) -> Result<Self> {
        LogWeightTable::new(raw.slope, raw.offset)
    }
}

impl From<LogWeightTable> for RawTable {
    fn from(t: LogWeightTable) -> Self {
        RawTable {
            slope: t.slope,
            offset: t.offset,
        }
    }
}

impl LogWeightTable {
    pub fn new(slope: Vec<f64>, offset: Vec<f64>) -> Result<Self> {
        if slope.is_empty() || slope.len() != offset.len() {
            return Err(Error::invalid(
                "weight table",
                "slope and offset must be nonempty and of equal length",
            ));
        }
        if slope.iter().chain(&offset).any(|x| !x.is_finite()) {
            return Err(Error::invalid("weight table", "entries must be finite"));
        }
        let slope_prefix = prefix_sums(&slope);
        let offset_prefix = prefix_sums(&offset);
        Ok(LogWeightTable {
            slope,
            offset,
            slope_prefix,
            offset_prefix,
        })
    }

    pub fn len(&self) -> usize {
        self.slope.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slope.is_empty()
    }
}

fn prefix_sums(xs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len() + 1);
    let mut acc = NeumaierSum::default();
    out.push(0.0);
    for &x in xs {
        acc.add(x);
        out.push(acc.value());
    }
    out
}

/// Compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Closed-form kinds of parametrized weight sequences `w_n(a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightKind {
    /// `w_1(a)⋯w_n(a) = exp(a·n^α)`.
    ExpPower { alpha: f64 },
    /// `w_n(a) = 1 + a/n^{1-α}`.
    OnePlusPower { alpha: f64 },
    /// `w_n(a) = e^a`.
    Rolewicz,
    /// `w_1(a)⋯w_n(a) = base^{n^α}·n^a` (defaults: base 2, α = 1).
    PolyLog {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        base: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
    },
    /// `w_n(a) = 1 + a/n`.
    OnePlusOverN,
    /// `w_n(a) = (1 + 1/n)^a`.
    PowerBase,
    /// Affine log-weight table.
    Tabulated { table: LogWeightTable },
}

/// A weight family together with its parameter domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFamily")]
pub struct WeightFamily {
    pub kind: WeightKind,
    pub domain: Interval,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    kind: WeightKind,
    domain: Interval,
}

impl TryFrom<RawFamily> for WeightFamily {
    type Error = Error;
    fn try_from(raw: RawFamily) -> Result<Self> {
        WeightFamily::new(raw.kind, raw.domain)
    }
}

impl WeightFamily {
    pub fn new(kind: WeightKind, domain: Interval) -> Result<Self> {
        if !(domain.lo.is_finite() && domain.hi.is_finite() && domain.lo <= domain.hi) {
            return Err(Error::invalid(
                "weight domain",
                format!("[{}, {}] is not a finite interval", domain.lo, domain.hi),
            ));
        }
        let alpha_ok = |alpha: f64| alpha > 0.0 && alpha <= 1.0;
        match &kind {
            WeightKind::ExpPower { alpha } if !alpha_ok(*alpha) => {
                return Err(Error::invalid(
                    "weight family",
                    format!("exp-power exponent {alpha} not in (0, 1]"),
                ));
            }
            WeightKind::OnePlusPower { alpha } => {
                if !alpha_ok(*alpha) {
                    return Err(Error::invalid(
                        "weight family",
                        format!("one-plus-power exponent {alpha} not in (0, 1]"),
                    ));
                }
                if domain.lo <= -1.0 {
                    return Err(Error::invalid(
                        "weight domain",
                        "1 + a/n^(1-α) needs a > -1",
                    ));
                }
            }
            WeightKind::OnePlusOverN if domain.lo <= -1.0 => {
                return Err(Error::invalid("weight domain", "1 + a/n needs a > -1"));
            }
            WeightKind::PolyLog { base, alpha } => {
                if base.is_some_and(|b| !(b > 1.0 && b.is_finite())) {
                    return Err(Error::invalid(
                        "weight family",
                        "poly-log base must exceed 1",
                    ));
                }
                if alpha.is_some_and(|a| !alpha_ok(a)) {
                    return Err(Error::invalid(
                        "weight family",
                        "poly-log exponent must lie in (0, 1]",
                    ));
                }
            }
            _ => {}
        }
        Ok(WeightFamily { kind, domain })
    }

    pub fn rolewicz(lo: f64, hi: f64) -> Self {
        WeightFamily {
            kind: WeightKind::Rolewicz,
            domain: Interval::new(lo, hi),
        }
    }

    pub fn exp_power(alpha: f64, lo: f64, hi: f64) -> Result<Self> {
        WeightFamily::new(WeightKind::ExpPower { alpha }, Interval::new(lo, hi))
    }

    pub fn check_param(&self, a: f64) -> Result<()> {
        if a.is_finite() && self.domain.contains(a) {
            Ok(())
        } else {
            Err(Error::Domain {
                value: a,
                lo: self.domain.lo,
                hi: self.domain.hi,
            })
        }
    }

    /// Largest weight index available (only finite for tabulated families).
    pub fn max_index(&self) -> Option<usize> {
        match &self.kind {
            WeightKind::Tabulated { table } => Some(table.len()),
            _ => None,
        }
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        match self.max_index() {
            Some(len) if index > len => Err(Error::Range { index, len }),
            _ => Ok(()),
        }
    }

    /// `f_{l+n}(a) − f_l(a)`, checked against the domain and table range.
    pub fn log_product(&self, a: f64, l: usize, n: usize) -> Result<f64> {
        self.check_param(a)?;
        self.check_index(l + n)?;
        Ok(self.increment(a, l, n))
    }

    /// `f_n(a)`, checked.
    pub fn log_cumulative(&self, a: f64, n: usize) -> Result<f64> {
        self.log_product(a, 0, n)
    }

    /// `log w_j(a)` for `j ≥ 1`, unchecked.
    pub fn log_weight(&self, a: f64, j: usize) -> f64 {
        self.increment(a, j - 1, 1)
    }

    /// `f_{l+n}(a) − f_l(a)` without domain checks; callers validate first.
    pub fn increment(&self, a: f64, l: usize, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        if let Some((df, dh)) = self.affine_increment(l, n) {
            return a * df + dh;
        }
        match &self.kind {
            WeightKind::OnePlusOverN => one_plus_over_n(a, l, n),
            WeightKind::OnePlusPower { alpha } => {
                if *alpha == 1.0 {
                    n as f64 * a.ln_1p()
                } else {
                    let mut acc = NeumaierSum::default();
                    for j in l + 1..=l + n {
                        acc.add((a * (j as f64).powf(alpha - 1.0)).ln_1p());
                    }
                    acc.value()
                }
            }
            _ => unreachable!("affine kinds handled above"),
        }
    }

    /// For families with `f_n(a) = a·F(n) + H(n)`: the pair
    /// `(F(l+n) − F(l), H(l+n) − H(l))`.
    pub fn affine_increment(&self, l: usize, n: usize) -> Option<(f64, f64)> {
        let (lf, nf) = (l as f64, n as f64);
        match &self.kind {
            WeightKind::ExpPower { alpha } => Some((power_increment(lf, nf, *alpha), 0.0)),
            WeightKind::Rolewicz => Some((nf, 0.0)),
            WeightKind::PolyLog { base, alpha } => {
                let base = base.unwrap_or(2.0);
                let alpha = alpha.unwrap_or(1.0);
                let dlog = if l == 0 { nf.ln() } else { (nf / lf).ln_1p() };
                Some((dlog, power_increment(lf, nf, alpha) * base.ln()))
            }
            WeightKind::PowerBase => Some(((nf / (lf + 1.0)).ln_1p(), 0.0)),
            WeightKind::Tabulated { table } => Some((
                table.slope_prefix[l + n] - table.slope_prefix[l],
                table.offset_prefix[l + n] - table.offset_prefix[l],
            )),
            WeightKind::OnePlusOverN | WeightKind::OnePlusPower { .. } => None,
        }
    }

    pub fn is_affine(&self) -> bool {
        !matches!(
            self.kind,
            WeightKind::OnePlusOverN | WeightKind::OnePlusPower { .. }
        )
    }

    /// `log w_j(a)` when it does not depend on `j`.
    pub fn shift_invariant_rate(&self, a: f64) -> Option<f64> {
        match self.kind {
            WeightKind::Rolewicz => Some(a),
            WeightKind::OnePlusPower { alpha: 1.0 } => Some(a.ln_1p()),
            _ => None,
        }
    }

    /// Infimum and supremum over the domain of `∂f_n/∂a`.
    pub fn rate_bounds(&self, n: usize) -> (f64, f64) {
        if let Some((df, _)) = self.affine_increment(0, n) {
            return (df, df);
        }
        let rate_at = |a: f64| -> f64 {
            let mut acc = NeumaierSum::default();
            match self.kind {
                WeightKind::OnePlusOverN => {
                    for j in 1..=n {
                        acc.add(1.0 / (j as f64 + a));
                    }
                }
                WeightKind::OnePlusPower { alpha } => {
                    for j in 1..=n {
                        acc.add(1.0 / ((j as f64).powf(1.0 - alpha) + a));
                    }
                }
                _ => unreachable!(),
            }
            acc.value()
        };
        (rate_at(self.domain.hi), rate_at(self.domain.lo))
    }

    /// Tabulated copy of an affine family over `len` weights.
    pub fn tabulate(&self, len: usize) -> Result<WeightFamily> {
        if !self.is_affine() {
            return Err(Error::invalid(
                "tabulation",
                "family is not affine in the parameter",
            ));
        }
        let (slope, offset): (Vec<f64>, Vec<f64>) = (0..len)
            .map(|l| self.affine_increment(l, 1).expect("affine"))
            .unzip();
        let table = LogWeightTable::new(slope, offset)?;
        WeightFamily::new(WeightKind::Tabulated { table }, self.domain)
    }
}

/// `(l+n)^α − l^α` without cancellation.
fn power_increment(l: f64, n: f64, alpha: f64) -> f64 {
    if l == 0.0 {
        n.powf(alpha)
    } else {
        l.powf(alpha) * (alpha * (n / l).ln_1p()).exp_m1()
    }
}

fn one_plus_over_n(a: f64, l: usize, n: usize) -> f64 {
    if n <= DIRECT_SUM_LIMIT {
        let mut acc = NeumaierSum::default();
        for j in l + 1..=l + n {
            acc.add((a / j as f64).ln_1p());
        }
        acc.value()
    } else {
        // Σ_{j=l+1}^{l+n} log((j+a)/j) = lnΓ(l+n+1+a) − lnΓ(l+1+a) − lnΓ(l+n+1) + lnΓ(l+1)
        let (lf, nf) = (l as f64, n as f64);
        libm::lgamma(lf + nf + 1.0 + a) - libm::lgamma(lf + 1.0 + a) - libm::lgamma(lf + nf + 1.0)
            + libm::lgamma(lf + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn closed_form_examples() {
        let w = WeightFamily::exp_power(1.0, 0.0, 2.0).unwrap();
        let v = w.log_product(2f64.ln(), 0, 3).unwrap();
        assert!(rel(v, 3.0 * 2f64.ln()) < 1e-15);
        let w = WeightFamily::exp_power(0.5, 0.0, 2.0).unwrap();
        assert!(rel(w.log_product(1.0, 0, 4).unwrap(), 2.0) < 1e-15);
        let w = WeightFamily::new(WeightKind::OnePlusOverN, Interval::new(0.0, 2.0)).unwrap();
        let oracle = 2f64.ln() + 1.5f64.ln() + (4.0f64 / 3.0).ln();
        assert!(rel(w.log_product(1.0, 0, 3).unwrap(), oracle) < 1e-15);
        assert!(rel(oracle, 4f64.ln()) < 1e-15);
    }

    #[test]
    fn errors_outside_domain_and_table() {
        let w = WeightFamily::rolewicz(0.0, 1.0);
        assert!(matches!(
            w.log_product(1.5, 0, 1),
            Err(Error::Domain { .. })
        ));
        let t = w.tabulate(10).unwrap();
        assert!(t.log_product(0.5, 5, 5).is_ok());
        assert!(matches!(t.log_product(0.5, 5, 6), Err(Error::Range { .. })));
    }

    #[test]
    fn polylog_matches_definition() {
        let w = WeightFamily::new(
            WeightKind::PolyLog {
                base: None,
                alpha: None,
            },
            Interval::new(-1.0, 3.0),
        )
        .unwrap();
        for n in 1..50usize {
            let expected = n as f64 * 2f64.ln() + 1.3 * (n as f64).ln();
            assert!(rel(w.log_cumulative(1.3, n).unwrap(), expected) < 1e-13);
        }
        assert!(rel(w.log_weight(0.7, 1), 2f64.ln()) < 1e-15);
    }

    #[test]
    fn power_base_telescopes() {
        let w = WeightFamily::new(WeightKind::PowerBase, Interval::new(0.0, 3.0)).unwrap();
        let direct: f64 = (1..=100).map(|j| 2.0 * (1.0 + 1.0 / j as f64).ln()).sum();
        assert!(rel(w.log_cumulative(2.0, 100).unwrap(), direct) < 1e-12);
    }

    #[test]
    fn one_plus_over_n_switches_smoothly() {
        let w = WeightFamily::new(WeightKind::OnePlusOverN, Interval::new(0.0, 3.0)).unwrap();
        let direct: f64 = {
            let mut acc = NeumaierSum::default();
            for j in 1..=10_000 {
                acc.add((1.7 / j as f64).ln_1p());
            }
            acc.value()
        };
        assert!(rel(w.log_cumulative(1.7, 10_000).unwrap(), direct) < 1e-11);
    }

    #[test]
    fn one_plus_power_alpha_one_is_shift_invariant() {
        let w = WeightFamily::new(
            WeightKind::OnePlusPower { alpha: 1.0 },
            Interval::new(0.0, 2.0),
        )
        .unwrap();
        assert_eq!(w.shift_invariant_rate(1.0), Some(2f64.ln()));
        assert!(rel(w.log_product(1.0, 7, 5).unwrap(), 5.0 * 2f64.ln()) < 1e-15);
        let half = WeightFamily::new(
            WeightKind::OnePlusPower { alpha: 0.5 },
            Interval::new(0.0, 2.0),
        )
        .unwrap();
        let direct: f64 = (1..=20).map(|j| (1.0 + 1.0 / (j as f64).sqrt()).ln()).sum();
        assert!(rel(half.log_cumulative(1.0, 20).unwrap(), direct) < 1e-14);
    }

    #[test]
    fn rate_bounds_of_non_affine_family() {
        let w = WeightFamily::new(WeightKind::OnePlusOverN, Interval::new(1.0, 2.0)).unwrap();
        let (lo, hi) = w.rate_bounds(3);
        assert!(rel(lo, 1.0 / 3.0 + 1.0 / 4.0 + 1.0 / 5.0) < 1e-15);
        assert!(rel(hi, 1.0 / 2.0 + 1.0 / 3.0 + 1.0 / 4.0) < 1e-15);
    }

    #[test]
    fn descriptor_validation() {
        assert!(WeightFamily::exp_power(1.5, 0.0, 1.0).is_err());
        assert!(WeightFamily::new(WeightKind::OnePlusOverN, Interval::new(-1.0, 1.0)).is_err());
        assert!(WeightFamily::new(WeightKind::Rolewicz, Interval::new(2.0, 1.0)).is_err());
        let json = r#"{"kind":{"kind":"exp_power","alpha":0.5},"domain":{"lo":1.0,"hi":2.0}}"#;
        let w: WeightFamily = serde_json::from_str(json).unwrap();
        assert_eq!(w.kind, WeightKind::ExpPower { alpha: 0.5 });
        let bad =
            r#"{"kind":{"kind":"exp_power","alpha":0.5,"beta":1},"domain":{"lo":1.0,"hi":2.0}}"#;
        assert!(serde_json::from_str::<WeightFamily>(bad).is_err());
        let back: WeightFamily = serde_json::from_str(&serde_json::to_string(&w).unwrap()).unwrap();
        assert_eq!(back, w);
    }
}
