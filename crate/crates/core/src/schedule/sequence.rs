//! The lexicographic integer recursion and its growth constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest integer a schedule time may take (exactly representable in `f64`).
pub const MAX_TIME: u64 = 1 << 53;

/// Parameters of the lexicographic recursion over `I_r^m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecursionParams {
    pub alpha: f64,
    pub rho: f64,
    pub r: usize,
    pub m: usize,
    pub n1: u64,
    /// Integer gap added after every flooring step.
    pub gap: u64,
    /// Scale `B` of the contraction factor (1 for the plain recursion).
    #[serde(default = "unit")]
    pub scale: f64,
}

fn unit() -> f64 {
    1.0
}

/// `ρ^{1/α}·r`, the quantity that must stay below 1.
fn growth_ratio(alpha: f64, rho: f64, r: usize) -> f64 {
    rho.powf(1.0 / alpha) * r as f64
}

pub(crate) fn check_contraction(alpha: f64, rho: f64, r: usize) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(
            "recursion",
            format!("alpha must be positive, got {alpha}"),
        ));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::invalid(
            "recursion",
            format!("rho must lie in (0,1), got {rho}"),
        ));
    }
    if r < 2 {
        return Err(Error::invalid(
            "recursion",
            format!("branching r must be at least 2, got {r}"),
        ));
    }
    let ratio = growth_ratio(alpha, rho, r);
    if ratio >= 1.0 {
        return Err(Error::Divergence(format!(
            "precondition rho^(1/alpha)*r < 1 violated: {rho}^(1/{alpha})*{r} = {ratio}"
        )));
    }
    Ok(())
}

impl RecursionParams {
    pub fn new(alpha: f64, rho: f64, r: usize, m: usize, n1: u64, gap: u64) -> Self {
        RecursionParams {
            alpha,
            rho,
            r,
            m,
            n1,
            gap,
            scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_contraction(self.alpha, self.rho, self.r)?;
        if self.m == 0 || self.n1 == 0 || self.gap == 0 {
            return Err(Error::invalid(
                "recursion",
                "m, n1 and the gap must be at least 1",
            ));
        }
        if !(self.scale > 0.0)
            || self.scale.powf(1.0 / self.alpha) * self.rho.powf(1.0 / self.alpha) >= 1.0
        {
            return Err(Error::invalid(
                "recursion",
                format!("scale B = {} makes a factor non-contracting", self.scale),
            ));
        }
        Ok(())
    }

    /// `B^{1/α}·ρ^{p/α}` for rollover position `p`.
    fn contraction(&self, p: usize) -> f64 {
        ((self.scale.ln() + p as f64 * self.rho.ln()) / self.alpha).exp()
    }
}

/// The recursion in lexicographic order of `I_r^m` (linear index `Σ (k_i−1) r^{m−i}`).
///
/// Each step floors `n_prev / (1 − B^{1/α}ρ^{p/α})` and adds the gap, where `p`
/// is the position of the last digit that does not roll over.
pub fn build_sequence(params: &RecursionParams) -> Result<Vec<u64>> {
    params.validate()?;
    let (r, m) = (params.r, params.m);
    let q = r
        .checked_pow(m as u32)
        .filter(|&q| q <= crate::paramsets::MAX_CELLS)
        .ok_or_else(|| Error::capacity("sequence", format!("{r}^{m} terms exceed the cell cap")))?;
    let factors: Vec<f64> = (0..=m).map(|p| 1.0 - params.contraction(p)).collect();
    let mut out = Vec::with_capacity(q);
    out.push(params.n1);
    let mut prev = params.n1;
    for lin in 1..q {
        // trailing digits equal to r in the predecessor = trailing zeros of `lin` in base r
        let mut rolled = 0;
        let mut t = lin;
        while t % r == 0 {
            rolled += 1;
            t /= r;
        }
        let p = m - rolled;
        let next = (prev as f64 / factors[p]).floor() + params.gap as f64;
        if !(next <= MAX_TIME as f64) {
            let digits = crate::paramsets::address_label(lin, r, m);
            return Err(Error::capacity(
                "sequence",
                format!("term {digits} exceeds 2^53"),
            ));
        }
        prev = next as u64;
        out.push(prev);
    }
    Ok(out)
}

/// One row of the refined constants `C(m,B)`, `D(m,B)` with `n_{r..r} ≤ C·n1 + D·A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinedRow {
    pub m: usize,
    pub scale: f64,
    pub c: f64,
    pub d: f64,
}

/// Certified constants with `n_{r..r} ≤ c1·n1 + c2·r^m·A` for every depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecursionConstants {
    pub c1: f64,
    pub c2: f64,
    /// Number of exact product factors before the tail bound.
    pub terms: usize,
    /// Upper bound used for the log of the neglected tail.
    pub log_tail: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub refined: Vec<RefinedRow>,
}

/// `c1 = Π_{j≥1} (1 − x^j)^{−(r−1)r^{j−1}}` with `x = ρ^{1/α}`, and
/// `c2 = c1·r/(r−1)`, both rounded upward.
pub fn recursion_constants(alpha: f64, rho: f64, r: usize) -> Result<RecursionConstants> {
    check_contraction(alpha, rho, r)?;
    let x = rho.powf(1.0 / alpha);
    let rf = r as f64;
    let mut log_sum = 0.0;
    let mut weight = rf - 1.0;
    let mut xj = 1.0;
    let mut terms = 0;
    let mut log_tail;
    loop {
        terms += 1;
        xj *= x;
        log_sum += weight * -(-xj).ln_1p();
        weight *= rf;
        // Σ_{j>J} (r−1)r^{j−1}·(−log(1−x^j)) ≤ (r−1)/(1−x^{J+1}) · x^{J+1} r^J / (1 − r x)
        let x_next = xj * x;
        log_tail = (rf - 1.0) / (1.0 - x_next) * x_next * rf.powi(terms as i32) / (1.0 - rf * x);
        if log_tail <= 1e-16 * log_sum.max(1e-300) || terms >= 100_000 {
            break;
        }
    }
    let c1 = (log_sum + log_tail).exp() * (1.0 + 1e-12);
    let c2 = c1 * rf / (rf - 1.0) * (1.0 + 1e-12);
    Ok(RecursionConstants {
        c1,
        c2,
        terms,
        log_tail,
        refined: Vec::new(),
    })
}

/// Direct evaluation of `C(m,B)` and `D(m,B)` for `m = 1..=m_max`.
pub fn refined_constants(
    alpha: f64,
    rho: f64,
    r: usize,
    m_max: usize,
    scale: f64,
) -> Result<Vec<RefinedRow>> {
    check_contraction(alpha, rho, r)?;
    let rf = r as f64;
    let q = |b: f64| 1.0 / (1.0 - (b * rho).powf(1.0 / alpha));
    let mut rows = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        // unroll from C(1, Bρ^{m−1}) up to C(m, B); C(0,·) = 1, D(0,·) = 0
        let (mut c, mut d) = (1.0f64, 0.0f64);
        for level in 1..=m {
            let b = scale * rho.powi((m - level) as i32);
            let qb = q(b).powf(rf - 1.0);
            d = rf * qb * c.powf(rf - 1.0) * (1.0 + d);
            c = qb * c.powf(rf);
        }
        rows.push(RefinedRow { m, scale, c, d });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_evaluated_sequences() {
        let p = RecursionParams::new(0.5, 0.25, 2, 1, 100, 10);
        assert_eq!(build_sequence(&p).unwrap(), vec![100, 116]);
        let p = RecursionParams { m: 2, ..p };
        assert_eq!(build_sequence(&p).unwrap(), vec![100, 110, 127, 137]);
    }

    #[test]
    fn divergent_parameters_are_rejected() {
        let err = recursion_constants(0.5, 0.8, 2).unwrap_err();
        assert!(matches!(err, Error::Divergence(ref s) if s.contains("rho^(1/alpha)*r < 1")));
    }

    #[test]
    fn c1_matches_partial_product() {
        // x = 0.1, r = 2: (1/0.9)(1/0.99)^2(1/0.999)^4... ≈ 1.138
        let k = recursion_constants(1.0, 0.1, 2).unwrap();
        let partial = (1.0 / 0.9) * (1.0 / 0.99f64).powi(2) * (1.0 / 0.999f64).powi(4);
        assert!(k.c1 > partial && k.c1 - partial < 2e-3);
        // 40-digit evaluation of the full product
        let exact = 1.139_356_044_452_568;
        assert!(k.c1 >= exact && k.c1 - exact < 1e-11, "{}", k.c1);
        assert!((k.c2 - 2.0 * k.c1).abs() < 1e-9);
    }

    #[test]
    fn c1_tends_to_one() {
        let k = recursion_constants(1.0, 1e-9, 3).unwrap();
        assert!(k.c1 > 1.0 && k.c1 < 1.0 + 1e-8);
    }

    #[test]
    fn refined_constants_stay_below_limits() {
        let k = recursion_constants(0.5, 0.3, 3).unwrap();
        for row in refined_constants(0.5, 0.3, 3, 8, 1.0).unwrap() {
            assert!(row.c <= k.c1);
            assert!(row.d <= k.c2 * 3f64.powi(row.m as i32));
        }
    }

    #[test]
    fn overflow_names_the_term() {
        let p = RecursionParams::new(0.9, 0.2, 4, 10, 1 << 52, 1000);
        let err = build_sequence(&p).unwrap_err();
        assert!(
            matches!(err, Error::Capacity { ref detail, .. } if detail.contains("exceeds 2^53"))
        );
    }
}
