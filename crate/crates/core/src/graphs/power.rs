//! Power counting for admissible graphs.

use super::enumerate::{enumerate_filtered, DEFAULT_CAP};
use super::record::{GraphRecord, Profile};
use crate::error::{Error, Result};
use crate::rational::Rat;
use crate::scaling::{ambiguity_dimension, Codim, Mode};
use num::{BigInt, Integer};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub graph: GraphRecord,
    pub rho: i64,
    pub needs_renorm: bool,
    pub ambiguity_dim: u64,
}

/// `ρ = L·d − (N − 1)(d + 2)`.
pub fn rho(n: usize, l: usize, d: u32) -> i64 {
    l as i64 * d as i64 - (n as i64 - 1) * (d as i64 + 2)
}

pub fn degree_of_divergence(g: &GraphRecord, d: u32) -> Result<DivergenceReport> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    let r = rho(g.n, g.l(), d);
    let ambiguity_dim =
        if r >= 0 { ambiguity_dimension(r, Codim::diagonal(g.n as u32, d), Mode::Parabolic)? } else { 0 };
    Ok(DivergenceReport { graph: g.clone(), rho: r, needs_renorm: r >= 0, ambiguity_dim })
}

pub fn profile_satisfies_lemmas(p: &Profile) -> bool {
    p.n2 >= p.n.div_ceil(3) && p.n4 <= p.n / 2 && 12 * p.l <= 19 * p.n
}

/// Valency-2 count at least `⌈N/3⌉`, valency-4 count at most `⌊N/2⌋`, and
/// `L ≤ 19N/12`.
pub fn verify_valency_lemmas(g: &GraphRecord) -> bool {
    profile_satisfies_lemmas(&g.profile())
}

/// `r2(n) = (2ⁿ + 1)/(3·2ⁿ − 1)` and `r4(n) = (3ⁿ⁺¹ − 1)/(2·3ⁿ⁺¹ + 2)`.
pub fn ratio_sequences(n: u32) -> (Rat, Rat) {
    let two = BigInt::from(2).pow(n);
    let three = BigInt::from(3).pow(n + 1);
    (
        Rat::new(&two + 1, BigInt::from(3) * &two - 1),
        Rat::new(&three - 1, BigInt::from(2) * &three + 2),
    )
}

/// Upper bound `N(7d/12 − 2) + d + 2` on `ρ` implied by `L ≤ 19N/12`.
pub fn rho_bound(n: usize, d: u32) -> Rat {
    let d = Rat::from_integer(d.into());
    Rat::from_integer(n.into()) * (&d * Rat::new(7.into(), 12.into()) - Rat::from_integer(2.into()))
        + d
        + Rat::from_integer(2.into())
}

/// Smallest `N` at which the bound reaches zero; beyond it every graph
/// converges. `None` when the slope is non-negative.
pub fn threshold(d: u32) -> Option<usize> {
    // Slope (7d − 24)/12; bound ≤ 0 ⇔ N ≥ 12(d + 2)/(24 − 7d).
    let den = 24 - 7 * d as i64;
    if den <= 0 {
        return None;
    }
    Some(Integer::div_ceil(&(12 * (d as i64 + 2)), &den) as usize)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub d: u32,
    pub threshold: usize,
    pub divergent: Vec<DivergenceReport>,
}

/// `ρ` is a function of `(t, s)` alone, since `L = t − 1 + 2s` and
/// `N = t + s`, so restricting enumeration to the pairs with `ρ ≥ 0` yields
/// every divergent graph up to `n_max` without building the convergent ones.
pub fn divergent_graphs(d: u32, n_max: usize) -> Result<Vec<DivergenceReport>> {
    let keep = move |t: usize, s: usize| rho(t + s, t - 1 + 2 * s, d) >= 0;
    enumerate_filtered(n_max, keep, DEFAULT_CAP)?.iter().map(|g| degree_of_divergence(g, d)).collect()
}

pub fn finiteness_certificate(d: u32) -> Result<Certificate> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    let Some(threshold) = threshold(d) else {
        return Err(Error::NotSubcritical(d));
    };
    Ok(Certificate { d, threshold, divergent: divergent_graphs(d, threshold)? })
}

/// Every valency profile realised by an admissible graph with at most `n_max`
/// vertices. A `T` vertex is described by its tree degree `k` and its final
/// valency `g`; any multiset of tree degrees `k ≥ 1` summing to `2t − 2` is
/// the degree sequence of some tree, and leaf slots pair up freely, so the
/// counts of each `(k, g)` type determine exactly the realisable profiles.
pub fn realizable_profiles(n_max: usize) -> BTreeSet<Profile> {
    let types: Vec<(usize, usize)> =
        (1..=4).flat_map(|k| (k.max(2)..=4).map(move |g| (k, g))).collect();
    let mut out = BTreeSet::new();
    // Single tree vertex: the fish.
    if n_max >= 2 {
        out.insert(Profile { n: 2, l: 2, n2: 2, n3: 0, n4: 0 });
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        types: &[(usize, usize)],
        i: usize,
        t: usize,
        left: usize,
        deg_sum: usize,
        slots: usize,
        counts: &mut [usize; 5],
        has_root: bool,
        n_max: usize,
        out: &mut BTreeSet<Profile>,
    ) {
        if i == types.len() {
            if left != 0 || deg_sum != 2 * t - 2 || slots % 2 == 1 || !has_root {
                return;
            }
            let s = slots / 2;
            if t + s > n_max {
                return;
            }
            out.insert(Profile { n: t + s, l: t - 1 + 2 * s, n2: counts[2] + s, n3: counts[3], n4: counts[4] });
            return;
        }
        let (k, g) = types[i];
        for c in 0..=left {
            if deg_sum + c * k > 2 * t - 2 || (t + (slots + c * (g - k)) / 2) > n_max + 1 {
                break;
            }
            counts[g] += c;
            rec(types, i + 1, t, left - c, deg_sum + c * k, slots + c * (g - k), counts, has_root || (c > 0 && g <= 3), n_max, out);
            counts[g] -= c;
        }
    }
    for t in 2..n_max {
        rec(&types, 0, t, t, 0, 0, &mut [0; 5], false, n_max, &mut out);
    }
    out
}
