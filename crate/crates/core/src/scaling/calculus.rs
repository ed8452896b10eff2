//! Integer scaling-degree calculus on diagonals, with elliptic and parabolic weights.

use crate::error::{Error, Result};
use num::rational::Ratio;
use num::{Integer, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Add;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Elliptic,
    Parabolic,
}

/// How the dimension of a parabolic background is counted.
///
/// `Manifold` treats `ℝ^{1+d}` as a manifold of dimension `d + 1`; `Spatial`
/// counts time with weight two so each point carries weighted dimension `d + 2`.
/// The graph power counting always uses `Spatial`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Manifold,
    Spatial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalingContext {
    pub d: u32,
    pub mode: Mode,
    pub convention: Convention,
}

impl ScalingContext {
    pub fn elliptic(d: u32) -> Self {
        ScalingContext { d, mode: Mode::Elliptic, convention: Convention::Manifold }
    }

    pub fn parabolic(d: u32) -> Self {
        ScalingContext { d, mode: Mode::Parabolic, convention: Convention::Manifold }
    }

    pub fn parabolic_spatial(d: u32) -> Self {
        ScalingContext { d, mode: Mode::Parabolic, convention: Convention::Spatial }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidArgument("spatial dimension must be at least 1".into()));
        }
        Ok(())
    }

    /// Scaling weight of one point of the background.
    pub fn effective_dim(&self) -> i64 {
        let d = self.d as i64;
        match (self.mode, self.convention) {
            (Mode::Elliptic, _) => d,
            (Mode::Parabolic, Convention::Manifold) => d + 1,
            (Mode::Parabolic, Convention::Spatial) => d + 2,
        }
    }
}

/// A scaling degree: a rational value or `+∞`. Addition saturates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SdValue {
    Finite(Ratio<i64>),
    Infinite,
}

impl SdValue {
    pub fn int(v: i64) -> Self {
        SdValue::Finite(Ratio::from_integer(v))
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            SdValue::Finite(r) => *r.numer() as f64 / *r.denom() as f64,
            SdValue::Infinite => f64::INFINITY,
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        match self {
            SdValue::Finite(r) if r.is_integer() => Some(r.to_integer()),
            _ => None,
        }
    }

    pub fn max(self, other: SdValue) -> SdValue {
        if self >= other {
            self
        } else {
            other
        }
    }

    fn shift(self, by: i64) -> SdValue {
        match self {
            SdValue::Finite(r) => SdValue::Finite(r + by),
            SdValue::Infinite => SdValue::Infinite,
        }
    }
}

impl Add for SdValue {
    type Output = SdValue;
    fn add(self, rhs: SdValue) -> SdValue {
        match (self, rhs) {
            (SdValue::Finite(a), SdValue::Finite(b)) => SdValue::Finite(a + b),
            _ => SdValue::Infinite,
        }
    }
}

impl fmt::Display for SdValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SdValue::Finite(r) => write!(f, "{r}"),
            SdValue::Infinite => write!(f, "+inf"),
        }
    }
}

/// Scaling degree of `δ` on the total diagonal of `n` points.
pub fn sd_delta(n: u32, ctx: &ScalingContext) -> Result<SdValue> {
    if n < 2 {
        return Err(Error::InvalidArgument("the total diagonal needs n >= 2".into()));
    }
    Ok(SdValue::int((n as i64 - 1) * ctx.effective_dim()))
}

/// Scaling degree of the parametrix on the diagonal of two points.
pub fn sd_parametrix(ctx: &ScalingContext) -> SdValue {
    SdValue::int(ctx.effective_dim() - 2)
}

/// Bound `max{0, sd K + sd t − dim}` for the scaling degree of a convolution.
pub fn sd_convolution_bound(sd_k: SdValue, sd_t: SdValue, ctx: &ScalingContext) -> SdValue {
    (sd_k + sd_t).shift(-ctx.effective_dim()).max(SdValue::int(0))
}

/// Bound `p·d + (k − p)/2 · max{0, d − 4}` on the `p`-th functional derivative of
/// the contracted `k`-th power.
pub fn gamma_sd_bound(k: u32, p: u32, ctx: &ScalingContext) -> Result<SdValue> {
    if p < 1 || p > k {
        return Err(Error::InvalidArgument(format!("need 1 <= p <= k, got p={p}, k={k}")));
    }
    let d = ctx.d as i64;
    let tail = Ratio::new((k - p) as i64 * (d - 4).max(0), 2);
    Ok(SdValue::Finite(Ratio::from_integer(p as i64 * d) + tail))
}

/// Transverse directions of a diagonal: `time` directions of weight two
/// (parabolic mode) and `space` directions of weight one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Codim {
    pub time: u32,
    pub space: u32,
}

impl Codim {
    pub fn flat(n: u32) -> Self {
        Codim { time: 0, space: n }
    }

    /// Codimension of the total diagonal of `n` points in `ℝ^{1+d}`.
    pub fn diagonal(n: u32, d: u32) -> Self {
        let k = n.saturating_sub(1);
        Codim { time: k, space: k * d }
    }
}

fn choose(n: i64, k: i64) -> u64 {
    if k < 0 || n < k {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Multi-indices in `m` variables of total degree at most `r`.
fn count_up_to(m: u32, r: i64) -> u64 {
    if r < 0 {
        return 0;
    }
    choose(r + m as i64, m as i64)
}

/// Multi-indices in `m` variables of total degree exactly `r`.
fn count_exact(m: u32, r: i64) -> u64 {
    if r < 0 {
        return 0;
    }
    if m == 0 {
        return u64::from(r == 0);
    }
    choose(r + m as i64 - 1, m as i64 - 1)
}

/// Number of `δ`-derivatives `∂^α δ` of weight at most `rho`, i.e. the dimension
/// of the ambiguity of an extension with degree of divergence `rho`.
pub fn ambiguity_dimension(rho: i64, codim: Codim, mode: Mode) -> Result<u64> {
    if rho < 0 {
        return Err(Error::InvalidArgument(format!("rho must be non-negative, got {rho}")));
    }
    Ok(match mode {
        Mode::Elliptic => count_up_to(codim.time + codim.space, rho),
        Mode::Parabolic => (0..=Integer::div_floor(&rho, &2))
            .map(|j| count_exact(codim.time, j) * count_up_to(codim.space, rho - 2 * j))
            .sum(),
    })
}

/// Degree of divergence of a diagonal singularity: `sd − codim`, saturating.
pub fn divergence_degree(sd: SdValue, codim_weight: i64) -> SdValue {
    sd.shift(-codim_weight)
}

pub fn is_zero(sd: &SdValue) -> bool {
    matches!(sd, SdValue::Finite(r) if r.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn delta_and_parametrix() {
        assert_eq!(sd_delta(2, &ScalingContext::elliptic(3)).unwrap(), SdValue::int(3));
        assert_eq!(sd_delta(2, &ScalingContext::parabolic(3)).unwrap(), SdValue::int(4));
        assert!(sd_delta(1, &ScalingContext::elliptic(3)).is_err());
        assert_eq!(sd_parametrix(&ScalingContext::elliptic(4)), SdValue::int(2));
        for d in 1..6 {
            assert_eq!(sd_parametrix(&ScalingContext::parabolic(d)), SdValue::int(d as i64 - 1));
            assert_eq!(sd_parametrix(&ScalingContext::parabolic_spatial(d)), SdValue::int(d as i64));
        }
    }

    #[test]
    fn convolution_bound() {
        let ctx = ScalingContext::elliptic(4);
        assert_eq!(sd_convolution_bound(SdValue::int(2), SdValue::int(4), &ctx), SdValue::int(2));
        assert_eq!(sd_convolution_bound(SdValue::int(0), SdValue::int(0), &ctx), SdValue::int(0));
        assert_eq!(sd_convolution_bound(SdValue::Infinite, SdValue::int(0), &ctx), SdValue::Infinite);
    }

    #[test]
    fn gamma_bound() {
        for k in 1..6 {
            for p in 1..=k {
                assert_eq!(
                    gamma_sd_bound(k, p, &ScalingContext::elliptic(3)).unwrap(),
                    SdValue::int(3 * p as i64)
                );
            }
        }
        assert_eq!(gamma_sd_bound(4, 2, &ScalingContext::elliptic(6)).unwrap(), SdValue::int(14));
        assert_eq!(gamma_sd_bound(3, 3, &ScalingContext::elliptic(7)).unwrap(), SdValue::int(21));
        let half = gamma_sd_bound(2, 1, &ScalingContext::elliptic(5)).unwrap();
        assert_eq!(half, SdValue::Finite(Ratio::new(11, 2)));
    }

    #[test]
    fn ambiguity_examples() {
        assert_eq!(ambiguity_dimension(0, Codim::flat(3), Mode::Elliptic).unwrap(), 1);
        assert_eq!(ambiguity_dimension(2, Codim::flat(2), Mode::Elliptic).unwrap(), 6);
        let one_one = Codim { time: 1, space: 1 };
        assert_eq!(ambiguity_dimension(2, one_one, Mode::Parabolic).unwrap(), 4);
        assert!(ambiguity_dimension(-1, one_one, Mode::Parabolic).is_err());
    }

    fn brute_count(rho: i64, codim: Codim, mode: Mode) -> u64 {
        // Odometer over all multi-indices with entries bounded by rho.
        let m = (codim.time + codim.space) as usize;
        if m == 0 {
            return 1;
        }
        let mut alpha = vec![0i64; m];
        let mut count = 0;
        loop {
            let w: i64 = alpha
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let weight = if mode == Mode::Parabolic && i < codim.time as usize { 2 } else { 1 };
                    weight * a
                })
                .sum();
            if w <= rho {
                count += 1;
            }
            let mut i = 0;
            loop {
                if i == m {
                    return count;
                }
                alpha[i] += 1;
                if alpha[i] <= rho {
                    break;
                }
                alpha[i] = 0;
                i += 1;
            }
        }
    }

    proptest! {
        #[test]
        fn ambiguity_matches_brute_force(rho in 0i64..5, t in 0u32..3, s in 0u32..4, par in any::<bool>()) {
            let mode = if par { Mode::Parabolic } else { Mode::Elliptic };
            let c = Codim { time: t, space: s };
            prop_assert_eq!(ambiguity_dimension(rho, c, mode).unwrap(), brute_count(rho, c, mode));
        }

        #[test]
        fn ambiguity_monotone(rho in 0i64..6, t in 0u32..3, s in 0u32..5) {
            for mode in [Mode::Elliptic, Mode::Parabolic] {
                let at = |r: i64, time: u32, space: u32| ambiguity_dimension(r, Codim { time, space }, mode).unwrap();
                let base = at(rho, t, s);
                prop_assert!(at(rho + 1, t, s) >= base);
                prop_assert!(at(rho, t + 1, s) >= base);
                prop_assert!(at(rho, t, s + 1) >= base);
            }
        }
    }
}
