//! Windowed power sums for polynomial kernels.
//!
//! For a query position `s` computes `Σ ((i − s)/r)^p` and
//! `Σ y·((i − s)/r)^p` over `|i − s| ≤ r` for every `p ≤ deg`. Nearby queries
//! share running sums taken about a common anchor `c`; moments about `s` follow
//! by binomial recentring. Anchors stay within `3r` of every point, which
//! keeps cancellation modest.

pub(crate) const MAX_DEG: usize = 8;

/// Radii below this use direct summation.
const DIRECT_RADIUS: f64 = 16.0;
/// Queries sharing an anchor span at most this many radii.
const BLOCK_RADII: f64 = 4.0;

const BINOM: [[f64; MAX_DEG + 1]; MAX_DEG + 1] = binomials();

const fn binomials() -> [[f64; MAX_DEG + 1]; MAX_DEG + 1] {
    let mut c = [[0.0; MAX_DEG + 1]; MAX_DEG + 1];
    let mut p = 0;
    while p <= MAX_DEG {
        c[p][0] = 1.0;
        let mut q = 1;
        while q <= p {
            c[p][q] = c[p - 1][q - 1] + if q < p { c[p - 1][q] } else { 0.0 };
            q += 1;
        }
        p += 1;
    }
    c
}

#[inline]
fn accumulate<const N: usize>(out1: &mut [f64; N], outy: &mut [f64; N], u: f64, y: f64) {
    let mut pw = 1.0;
    for p in 0..N {
        out1[p] += pw;
        outy[p] += pw * y;
        pw *= u;
    }
}

/// Leave-fold-out power sums at every design point `j = 1..=n`.
///
/// The sums for `j` run over `|i − j| ≤ r` with `labels[i] ≠ labels[j]`,
/// i.e. over the training set of the fold containing `j`. Window sums for the
/// whole sample and for each fold slide along each block of queries; the
/// sums are rebuilt at every block so that rounding drift stays bounded.
///
/// `N` is the number of powers, `0..N`.
pub(crate) fn fold_out_power_sums<const N: usize>(
    ys: &[f64],
    labels: &[usize],
    folds: usize,
    r: f64,
) -> Vec<([f64; N], [f64; N])> {
    debug_assert!(N <= MAX_DEG + 1 && ys.len() == labels.len());
    let n = ys.len();
    let zero = [0.0; N];
    let mut out = vec![(zero, zero); n];
    if r < DIRECT_RADIUS {
        for j in 1..=n {
            let s = j as f64;
            let lo = (s - r).ceil().max(1.0) as usize;
            let hi = ((s + r).floor() as usize).min(n);
            let (o1, oy) = &mut out[j - 1];
            for i in lo..=hi {
                if labels[i - 1] != labels[j - 1] {
                    accumulate(o1, oy, (i as f64 - s) / r, ys[i - 1]);
                }
            }
        }
        return out;
    }

    let block = ((BLOCK_RADII * r) as usize).max(1);
    let zero = [0.0; N];
    // Running window sums: total and per fold, about the block anchor.
    let mut per_fold = vec![(zero, zero); folds];
    let mut q0 = 1;
    while q0 <= n {
        let q1 = (q0 + block - 1).min(n);
        let anchor = 0.5 * (q0 + q1) as f64;
        let bump = |tot: &mut ([f64; N], [f64; N]), per_fold: &mut [([f64; N], [f64; N])], i: usize, sign: f64| {
            let u = (i as f64 - anchor) / r;
            let y = ys[i - 1];
            let fold = &mut per_fold[labels[i - 1]];
            let mut pw = sign;
            for p in 0..N {
                tot.0[p] += pw;
                tot.1[p] += pw * y;
                fold.0[p] += pw;
                fold.1[p] += pw * y;
                pw *= u;
            }
        };
        let mut tot = (zero, zero);
        per_fold.iter_mut().for_each(|f| *f = (zero, zero));
        let mut lo = (q0 as f64 - r).ceil().max(1.0) as usize;
        let mut hi = lo - 1;

        for j in q0..=q1 {
            let s = j as f64;
            let new_lo = (s - r).ceil().max(1.0) as usize;
            let new_hi = ((s + r).floor() as usize).min(n);
            while hi < new_hi {
                hi += 1;
                bump(&mut tot, &mut per_fold, hi, 1.0);
            }
            while lo < new_lo {
                bump(&mut tot, &mut per_fold, lo, -1.0);
                lo += 1;
            }
            let own = &per_fold[labels[j - 1]];
            let mut n1 = zero;
            let mut ny = zero;
            for p in 0..N {
                n1[p] = tot.0[p] - own.0[p];
                ny[p] = tot.1[p] - own.1[p];
            }
            let delta = (anchor - s) / r;
            let mut dpow = [1.0; N];
            for p in 1..N {
                dpow[p] = dpow[p - 1] * delta;
            }
            let (o1, oy) = &mut out[j - 1];
            for p in 0..N {
                let (mut m1, mut my) = (0.0, 0.0);
                for k in 0..=p {
                    let c = BINOM[p][k] * dpow[p - k];
                    m1 += c * n1[k];
                    my += c * ny[k];
                }
                o1[p] = m1;
                oy[p] = my;
            }
        }
        q0 = q1 + 1;
    }
    out
}
