//! Wilcoxon rank-sum (Mann-Whitney U) test and Benjamini-Hochberg FDR
//! correction.
//!
//! The test switches regimes at a combined sample size of 20: at or below
//! that the full permutation distribution is enumerated exactly; above it a
//! normal approximation with continuity correction and the standard tie
//! variance adjustment is used. The two-sided p-value is defined as the
//! permutation probability of a U statistic at least as far from its mean
//! `n1*n2/2` as the observed one — with ties the U distribution need not be
//! symmetric, so the distance-from-mean form is the one that stays exact.

/// Largest combined sample size handled by exact enumeration.
pub const EXACT_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilcoxonResult {
    /// Mann-Whitney U statistic for the first sample.
    pub u: f64,
    /// Two-sided p-value.
    pub p: f64,
    /// True when every pooled value is identical; p is 1 by convention.
    pub degenerate: bool,
}

/// Midranks of the pooled sample, doubled so they stay integers.
/// Returns (2*rank per pooled element, tie-group sizes).
fn double_midranks(pooled: &[f64]) -> (Vec<u64>, Vec<usize>) {
    let n = pooled.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| pooled[a].partial_cmp(&pooled[b]).expect("finite values"));
    let mut rank2 = vec![0u64; n];
    let mut tie_sizes = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && pooled[order[j]] == pooled[order[i]] {
            j += 1;
        }
        // Positions i+1..=j share the midrank (i+1 + j)/2; doubled: i+j+1.
        let r2 = (i + j + 1) as u64;
        for k in i..j {
            rank2[order[k]] = r2;
        }
        tie_sizes.push(j - i);
        i = j;
    }
    (rank2, tie_sizes)
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut out = 1.0f64;
    for i in 0..k {
        out = out * (n - i) as f64 / (i + 1) as f64;
    }
    out
}

/// Exact two-sided p by enumerating every assignment of pooled values to
/// the first group (Gosper's hack over bitmasks; requires n1+n2 <= 64,
/// used here only up to [`EXACT_LIMIT`]).
fn exact_p(rank2: &[u64], n1: usize) -> f64 {
    let n = rank2.len();
    let n2 = n - n1;
    // Everything in doubled units: 2*U = 2*R1 - n1*(n1+1), 2*mu = n1*n2.
    let obs_r2: u64 = rank2[..n1].iter().sum();
    let base = (n1 * (n1 + 1)) as i64;
    let mu2 = (n1 * n2) as i64;
    let obs_dev = (obs_r2 as i64 - base - mu2).abs();

    let mut count: u64 = 0;
    let mut total: u64 = 0;
    let mut mask: u64 = (1u64 << n1) - 1;
    let end: u64 = 1u64 << n;
    while mask < end {
        let mut r2: u64 = 0;
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            r2 += rank2[i];
            m &= m - 1;
        }
        let dev = (r2 as i64 - base - mu2).abs();
        if dev >= obs_dev {
            count += 1;
        }
        total += 1;
        // Gosper's hack: next bitmask with the same popcount.
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        if r >= end || c == 0 {
            break;
        }
        mask = r | (((mask ^ r) / c) >> 2);
    }
    debug_assert_eq!(total as f64, binomial(n, n1));
    count as f64 / total as f64
}

/// Abramowitz & Stegun 7.1.26 complementary error function, abs error
/// below 1.5e-7.
fn erfc(x: f64) -> f64 {
    let sign_negative = x < 0.0;
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    let res = poly * (-x * x).exp();
    if sign_negative {
        2.0 - res
    } else {
        res
    }
}

fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Two-sided Wilcoxon rank-sum test. Panics if either sample is empty or
/// contains non-finite values.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64]) -> WilcoxonResult {
    assert!(!a.is_empty() && !b.is_empty(), "both samples must be non-empty");
    let n1 = a.len();
    let n2 = b.len();
    let n = n1 + n2;
    let mut pooled = Vec::with_capacity(n);
    pooled.extend_from_slice(a);
    pooled.extend_from_slice(b);
    assert!(
        pooled.iter().all(|v| v.is_finite()),
        "samples must be finite"
    );

    let (rank2, tie_sizes) = double_midranks(&pooled);
    let r1: f64 = rank2[..n1].iter().map(|&r| r as f64 / 2.0).sum();
    let u = r1 - (n1 * (n1 + 1)) as f64 / 2.0;

    if tie_sizes.len() == 1 {
        // Every pooled value identical: no ordering information.
        return WilcoxonResult {
            u,
            p: 1.0,
            degenerate: true,
        };
    }

    let p = if n <= EXACT_LIMIT {
        exact_p(&rank2, n1)
    } else {
        let mu = (n1 * n2) as f64 / 2.0;
        let tie_term: f64 = tie_sizes
            .iter()
            .map(|&t| (t * t * t - t) as f64)
            .sum();
        let nn = n as f64;
        let var = (n1 * n2) as f64 / 12.0 * ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
        if var <= 0.0 {
            return WilcoxonResult {
                u,
                p: 1.0,
                degenerate: true,
            };
        }
        let z = ((u - mu).abs() - 0.5).max(0.0) / var.sqrt();
        (2.0 * normal_sf(z)).min(1.0)
    };
    WilcoxonResult {
        u,
        p,
        degenerate: false,
    }
}

/// Benjamini-Hochberg step-up FDR correction.
///
/// Returns `(p_adjusted, significant)` in input order, where
/// `p_adjusted[(k)] = min over j >= k of (m/j) * p[(j)]` capped at 1 and
/// `significant` means `p_adjusted < alpha`.
pub fn bh_fdr(p_values: &[f64], alpha: f64) -> Vec<(f64, bool)> {
    let m = p_values.len();
    if m == 0 {
        return Vec::new();
    }
    assert!(
        p_values.iter().all(|p| (0.0..=1.0).contains(p)),
        "p-values must lie in [0,1]"
    );
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].partial_cmp(&p_values[b]).expect("finite p"));
    let mut adjusted_sorted = vec![0.0f64; m];
    let mut running_min = 1.0f64;
    for k in (0..m).rev() {
        let raw = p_values[order[k]] * m as f64 / (k + 1) as f64;
        running_min = running_min.min(raw);
        adjusted_sorted[k] = running_min.min(1.0);
    }
    let mut out = vec![(0.0, false); m];
    for (k, &idx) in order.iter().enumerate() {
        let adj = adjusted_sorted[k];
        out[idx] = (adj, adj < alpha);
    }
    out
}
