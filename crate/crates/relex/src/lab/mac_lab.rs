//! Two-user constant conditional-composition codes: sampling, the four
//! first-order and three second-order packing functions, and the partial
//! expurgation procedure (one codebook at a time).

use std::collections::HashMap;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::split_seed;
use crate::dist::xlog2x;
use crate::types::RationalType;
use crate::Error;

/// A two-user code: codewords of each user drawn from the conditional type
/// class given the shared time-sharing word `u`.
#[derive(Debug, Clone)]
pub struct MacCode {
    pub n: usize,
    pub nu: usize,
    pub nx: usize,
    pub ny: usize,
    pub u: Vec<u8>,
    pub code_x: Vec<Vec<u8>>,
    pub code_y: Vec<Vec<u8>>,
}

impl MacCode {
    /// Conditional composition counts of user X: counts[u][x].
    pub fn x_composition(&self) -> Vec<Vec<u64>> {
        let mut c = vec![vec![0u64; self.nx]; self.nu];
        if let Some(w) = self.code_x.first() {
            for (t, &s) in w.iter().enumerate() {
                c[self.u[t] as usize][s as usize] += 1;
            }
        }
        c
    }
}

/// Sample a two-user code: `u` is a fixed word of type `u_counts`; each
/// x-word permutes a fixed conditional multiset within every u-section,
/// independently per word (and likewise for y). Exact uniform draws from
/// the conditional type classes.
#[allow(clippy::too_many_arguments)]
pub fn sample_mac_code(
    nu: usize,
    nx: usize,
    ny: usize,
    u_counts: &[u64],
    x_cond: &[Vec<u64>],
    y_cond: &[Vec<u64>],
    mx: usize,
    my: usize,
    seed: u64,
) -> Result<MacCode, Error> {
    if u_counts.len() != nu || x_cond.len() != nu || y_cond.len() != nu {
        return Err(Error::Shape("conditional composition shape mismatch".into()));
    }
    for u in 0..nu {
        if x_cond[u].iter().sum::<u64>() != u_counts[u]
            || y_cond[u].iter().sum::<u64>() != u_counts[u]
        {
            return Err(Error::Invalid(format!(
                "conditional compositions at u = {u} do not sum to the section length"
            )));
        }
    }
    let u: Vec<u8> = u_counts
        .iter()
        .enumerate()
        .flat_map(|(s, &c)| std::iter::repeat(s as u8).take(c as usize))
        .collect();
    let n = u.len();
    let sections: Vec<Vec<usize>> = (0..nu)
        .map(|s| (0..n).filter(|&t| u[t] as usize == s).collect())
        .collect();
    let fill = |cond: &[Vec<u64>], word_seed: u64| -> Vec<u8> {
        let mut rng = ChaCha8Rng::seed_from_u64(word_seed);
        let mut w = vec![0u8; n];
        for (s, positions) in sections.iter().enumerate() {
            let mut sect: Vec<u8> = cond[s]
                .iter()
                .enumerate()
                .flat_map(|(sym, &c)| std::iter::repeat(sym as u8).take(c as usize))
                .collect();
            sect.shuffle(&mut rng);
            for (&pos, &sym) in positions.iter().zip(&sect) {
                w[pos] = sym;
            }
        }
        w
    };
    let code_x: Vec<Vec<u8>> = (0..mx)
        .map(|i| fill(x_cond, split_seed(seed, i as u64)))
        .collect();
    let code_y: Vec<Vec<u8>> = (0..my)
        .map(|j| fill(y_cond, split_seed(seed, 1_000_000 + j as u64)))
        .collect();
    Ok(MacCode { n, nu, nx, ny, u, code_x, code_y })
}

/// Which packing function: which tuple of words joins `u` in the type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacPacking {
    /// (u, x_i, y_j)
    U,
    /// (u, x_i, y_j, x_k), k ≠ i
    X,
    /// (u, x_i, y_j, y_l), l ≠ j
    Y,
    /// (u, x_i, y_j, x_k, y_l), k ≠ i, l ≠ j
    XY,
}

fn tuple_counts(seqs: &[&[u8]], sizes: &[usize]) -> Vec<u64> {
    RationalType::of_sequences(seqs, sizes).unwrap().counts
}

/// Census of realized tuple types for one packing function: counts vector
/// -> total count over the indicated index combinations.
pub fn mac_n_census(code: &MacCode, which: MacPacking) -> HashMap<Vec<u64>, u64> {
    let mut census: HashMap<Vec<u64>, u64> = HashMap::new();
    let u = &code.u[..];
    for (i, xw) in code.code_x.iter().enumerate() {
        for (j, yw) in code.code_y.iter().enumerate() {
            match which {
                MacPacking::U => {
                    let c = tuple_counts(&[u, xw, yw], &[code.nu, code.nx, code.ny]);
                    *census.entry(c).or_insert(0) += 1;
                }
                MacPacking::X => {
                    for (k, xk) in code.code_x.iter().enumerate() {
                        if k == i {
                            continue;
                        }
                        let c = tuple_counts(&[u, xw, yw, xk], &[code.nu, code.nx, code.ny, code.nx]);
                        *census.entry(c).or_insert(0) += 1;
                    }
                }
                MacPacking::Y => {
                    for (l, yl) in code.code_y.iter().enumerate() {
                        if l == j {
                            continue;
                        }
                        let c = tuple_counts(&[u, xw, yw, yl], &[code.nu, code.nx, code.ny, code.ny]);
                        *census.entry(c).or_insert(0) += 1;
                    }
                }
                MacPacking::XY => {
                    for (k, xk) in code.code_x.iter().enumerate() {
                        if k == i {
                            continue;
                        }
                        for (l, yl) in code.code_y.iter().enumerate() {
                            if l == j {
                                continue;
                            }
                            let c = tuple_counts(
                                &[u, xw, yw, xk, yl],
                                &[code.nu, code.nx, code.ny, code.nx, code.ny],
                            );
                            *census.entry(c).or_insert(0) += 1;
                        }
                    }
                }
            }
        }
    }
    census
}

/// First-order packing function N_which at one joint type (exact rational,
/// normalized by M_X · M_Y).
pub fn mac_packing_n(code: &MacCode, v: &RationalType, which: MacPacking) -> Result<Ratio<u64>, Error> {
    let expect: Vec<usize> = match which {
        MacPacking::U => vec![code.nu, code.nx, code.ny],
        MacPacking::X => vec![code.nu, code.nx, code.ny, code.nx],
        MacPacking::Y => vec![code.nu, code.nx, code.ny, code.ny],
        MacPacking::XY => vec![code.nu, code.nx, code.ny, code.nx, code.ny],
    };
    if v.sizes != expect || v.denom != code.n as u64 {
        return Err(Error::Shape("packing type shape/denominator mismatch".into()));
    }
    if code.code_x.is_empty() || code.code_y.is_empty() {
        return Err(Error::Invalid("packing function of an empty codebook".into()));
    }
    let census = mac_n_census(code, which);
    let count = census.get(&v.counts).copied().unwrap_or(0);
    Ok(Ratio::new(count, (code.code_x.len() * code.code_y.len()) as u64))
}

/// Second-order packing functions Λ_X, Λ_Y, Λ_XY.
pub fn mac_packing_lambda(
    code: &MacCode,
    v: &RationalType,
    which: MacPacking,
) -> Result<Ratio<u64>, Error> {
    let u = &code.u[..];
    let denom = (code.code_x.len() * code.code_y.len()) as u64;
    if denom == 0 {
        return Err(Error::Invalid("packing function of an empty codebook".into()));
    }
    let mut count = 0u64;
    match which {
        MacPacking::X => {
            if v.sizes != vec![code.nu, code.nx, code.ny, code.nx, code.nx] {
                return Err(Error::Shape("lambda_x type shape mismatch".into()));
            }
            for (i, xw) in code.code_x.iter().enumerate() {
                for yw in code.code_y.iter() {
                    for (k, xk) in code.code_x.iter().enumerate() {
                        if k == i {
                            continue;
                        }
                        for (k2, xk2) in code.code_x.iter().enumerate() {
                            if k2 == i || k2 == k {
                                continue;
                            }
                            let c = tuple_counts(
                                &[u, xw, yw, xk, xk2],
                                &[code.nu, code.nx, code.ny, code.nx, code.nx],
                            );
                            if c == v.counts {
                                count += 1;
                            }
                        }
                    }
                }
            }
        }
        MacPacking::Y => {
            if v.sizes != vec![code.nu, code.nx, code.ny, code.ny, code.ny] {
                return Err(Error::Shape("lambda_y type shape mismatch".into()));
            }
            for xw in code.code_x.iter() {
                for (j, yw) in code.code_y.iter().enumerate() {
                    for (l, yl) in code.code_y.iter().enumerate() {
                        if l == j {
                            continue;
                        }
                        for (l2, yl2) in code.code_y.iter().enumerate() {
                            if l2 == j || l2 == l {
                                continue;
                            }
                            let c = tuple_counts(
                                &[u, xw, yw, yl, yl2],
                                &[code.nu, code.nx, code.ny, code.ny, code.ny],
                            );
                            if c == v.counts {
                                count += 1;
                            }
                        }
                    }
                }
            }
        }
        MacPacking::XY => {
            if v.sizes
                != vec![code.nu, code.nx, code.ny, code.nx, code.ny, code.nx, code.ny]
            {
                return Err(Error::Shape("lambda_xy type shape mismatch".into()));
            }
            for (i, xw) in code.code_x.iter().enumerate() {
                for (j, yw) in code.code_y.iter().enumerate() {
                    for (k, xk) in code.code_x.iter().enumerate() {
                        if k == i {
                            continue;
                        }
                        for (l, yl) in code.code_y.iter().enumerate() {
                            if l == j {
                                continue;
                            }
                            for (k2, xk2) in code.code_x.iter().enumerate() {
                                if k2 == i || k2 == k {
                                    continue;
                                }
                                for (l2, yl2) in code.code_y.iter().enumerate() {
                                    if l2 == j || l2 == l {
                                        continue;
                                    }
                                    let c = tuple_counts(
                                        &[u, xw, yw, xk, yl, xk2, yl2],
                                        &[
                                            code.nu, code.nx, code.ny, code.nx, code.ny,
                                            code.nx, code.ny,
                                        ],
                                    );
                                    if c == v.counts {
                                        count += 1;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        MacPacking::U => {
            return Err(Error::Invalid("no second-order packing function for U".into()))
        }
    }
    Ok(Ratio::new(count, denom))
}

/// Conditional mutual information helpers on tuple-type counts.
fn cond_mi(counts: &[u64], sizes: &[usize], a: u32, b: u32, g: u32, n: u64) -> f64 {
    let h = |mask: u32| -> f64 {
        let mut strides = vec![1usize; sizes.len()];
        for i in (0..sizes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * sizes[i + 1];
        }
        let kept: Vec<usize> = (0..sizes.len()).filter(|i| mask & (1 << i) != 0).collect();
        let msize: usize = kept.iter().map(|&i| sizes[i]).product::<usize>().max(1);
        let mut marg = vec![0u64; msize];
        for (idx, &c) in counts.iter().enumerate() {
            let mut mi = 0usize;
            for &k in &kept {
                mi = mi * sizes[k] + (idx / strides[k]) % sizes[k];
            }
            marg[mi] += c;
        }
        -marg.iter().map(|&c| xlog2x(c as f64 / n as f64)).sum::<f64>()
    };
    (h(a | g) + h(b | g) - h(a | b | g) - if g != 0 { h(g) } else { 0.0 }).max(0.0)
}

/// F-values of a tuple type (u at bit 0, pair slots at bits 1,2, tilde
/// slots following), for the expurgation weights.
struct TupleF {
    f: f64,
}

fn f_of_tuple(counts: &[u64], sizes: &[usize], which: MacPacking, rx: f64, ry: f64, n: u64) -> TupleF {
    const U: u32 = 1;
    const X: u32 = 2;
    const Y: u32 = 4;
    const T1: u32 = 8;
    const T2: u32 = 16;
    let f = match which {
        MacPacking::U => cond_mi(counts, sizes, X, Y, U, n),
        MacPacking::X => {
            cond_mi(counts, sizes, X, Y, U, n) + cond_mi(counts, sizes, T1, X | Y, U, n) - rx
        }
        MacPacking::Y => {
            cond_mi(counts, sizes, X, Y, U, n) + cond_mi(counts, sizes, T1, X | Y, U, n) - ry
        }
        MacPacking::XY => {
            cond_mi(counts, sizes, X, Y, U, n)
                + cond_mi(counts, sizes, T1, T2, U, n)
                + cond_mi(counts, sizes, T1 | T2, X | Y, U, n)
                - rx
                - ry
        }
    };
    TupleF { f }
}

#[derive(Debug, Clone)]
pub struct MacExpurgationReport {
    pub g_scores: Vec<f64>,
    pub h_scores: Vec<f64>,
    pub kept_x: Vec<usize>,
    pub kept_y: Vec<usize>,
    /// Mean score Π over the input code (< 1/2 is the precondition for
    /// keeping at least half per codebook).
    pub mean_score: f64,
    /// Output re-check of the averaged packing caps N ≤ 2^{−n(F − 6δ)}.
    pub averaged_caps_ok: bool,
    /// Output re-check of the per-pair caps L ≤ 2^{−n(F − min(R) − 6δ)}.
    pub per_pair_caps_ok: bool,
    /// Worst slack (bits) across the re-checks; negative = pass.
    pub worst_margin: f64,
}

/// Partial expurgation: score x-codewords by G(i) and y-codewords by H(j)
/// over the original code, keep the words with score < 1, and re-check the
/// guaranteed caps on the output exhaustively.
pub fn mac_expurgate(
    code: &MacCode,
    rx: f64,
    ry: f64,
    delta: f64,
) -> (MacCode, MacExpurgationReport) {
    let n = code.n as u64;
    let nf = code.n as f64;
    let mx = code.code_x.len();
    let my = code.code_y.len();
    let weight = |counts: &[u64], sizes: &[usize], which: MacPacking| -> f64 {
        let f = f_of_tuple(counts, sizes, which, rx, ry, n).f;
        (nf * (f - 6.0 * delta)).exp2()
    };
    // per-(i,j) weighted neighborhood sums, reused for G and H
    let mut pair_term = vec![vec![0.0f64; my]; mx];
    let u = &code.u[..];
    for (i, xw) in code.code_x.iter().enumerate() {
        for (j, yw) in code.code_y.iter().enumerate() {
            let mut s = 0.0;
            let sizes_u = [code.nu, code.nx, code.ny];
            s += weight(&tuple_counts(&[u, xw, yw], &sizes_u), &sizes_u, MacPacking::U);
            let sizes_x = [code.nu, code.nx, code.ny, code.nx];
            for (k, xk) in code.code_x.iter().enumerate() {
                if k != i {
                    s += weight(
                        &tuple_counts(&[u, xw, yw, xk], &sizes_x),
                        &sizes_x,
                        MacPacking::X,
                    );
                }
            }
            let sizes_y = [code.nu, code.nx, code.ny, code.ny];
            for (l, yl) in code.code_y.iter().enumerate() {
                if l != j {
                    s += weight(
                        &tuple_counts(&[u, xw, yw, yl], &sizes_y),
                        &sizes_y,
                        MacPacking::Y,
                    );
                }
            }
            let sizes_xy = [code.nu, code.nx, code.ny, code.nx, code.ny];
            for (k, xk) in code.code_x.iter().enumerate() {
                if k == i {
                    continue;
                }
                for (l, yl) in code.code_y.iter().enumerate() {
                    if l != j {
                        s += weight(
                            &tuple_counts(&[u, xw, yw, xk, yl], &sizes_xy),
                            &sizes_xy,
                            MacPacking::XY,
                        );
                    }
                }
            }
            pair_term[i][j] = s;
        }
    }
    let g_scores: Vec<f64> = (0..mx)
        .map(|i| pair_term[i].iter().sum::<f64>() / my as f64)
        .collect();
    let h_scores: Vec<f64> = (0..my)
        .map(|j| (0..mx).map(|i| pair_term[i][j]).sum::<f64>() / mx as f64)
        .collect();
    let kept_x: Vec<usize> = (0..mx).filter(|&i| g_scores[i] < 1.0).collect();
    let kept_y: Vec<usize> = (0..my).filter(|&j| h_scores[j] < 1.0).collect();
    let out = MacCode {
        n: code.n,
        nu: code.nu,
        nx: code.nx,
        ny: code.ny,
        u: code.u.clone(),
        code_x: kept_x.iter().map(|&i| code.code_x[i].clone()).collect(),
        code_y: kept_y.iter().map(|&j| code.code_y[j].clone()).collect(),
    };
    let mean_score = g_scores.iter().sum::<f64>() / mx as f64;

    // exhaustive output re-checks over realized types
    let min_r = rx.min(ry);
    let mut worst_margin = f64::NEG_INFINITY;
    let mut averaged_caps_ok = true;
    let mut per_pair_caps_ok = true;
    if !out.code_x.is_empty() && !out.code_y.is_empty() {
        let pairs = (out.code_x.len() * out.code_y.len()) as f64;
        for which in [MacPacking::U, MacPacking::X, MacPacking::Y, MacPacking::XY] {
            let sizes: Vec<usize> = match which {
                MacPacking::U => vec![code.nu, code.nx, code.ny],
                MacPacking::X => vec![code.nu, code.nx, code.ny, code.nx],
                MacPacking::Y => vec![code.nu, code.nx, code.ny, code.ny],
                MacPacking::XY => vec![code.nu, code.nx, code.ny, code.nx, code.ny],
            };
            let census = mac_n_census(&out, which);
            for (counts, &cnt) in &census {
                let f = f_of_tuple(counts, &sizes, which, rx, ry, n).f;
                let margin = (cnt as f64 / pairs).log2() + nf * (f - 6.0 * delta);
                worst_margin = worst_margin.max(margin);
                if margin > 1e-9 {
                    averaged_caps_ok = false;
                }
            }
            // per-pair caps
            let uu = &out.u[..];
            for (i, xw) in out.code_x.iter().enumerate() {
                for (j, yw) in out.code_y.iter().enumerate() {
                    let mut local: HashMap<Vec<u64>, u64> = HashMap::new();
                    match which {
                        MacPacking::U => {
                            *local
                                .entry(tuple_counts(&[uu, xw, yw], &sizes))
                                .or_insert(0) += 1;
                        }
                        MacPacking::X => {
                            for (k, xk) in out.code_x.iter().enumerate() {
                                if k != i {
                                    *local
                                        .entry(tuple_counts(&[uu, xw, yw, xk], &sizes))
                                        .or_insert(0) += 1;
                                }
                            }
                        }
                        MacPacking::Y => {
                            for (l, yl) in out.code_y.iter().enumerate() {
                                if l != j {
                                    *local
                                        .entry(tuple_counts(&[uu, xw, yw, yl], &sizes))
                                        .or_insert(0) += 1;
                                }
                            }
                        }
                        MacPacking::XY => {
                            for (k, xk) in out.code_x.iter().enumerate() {
                                if k == i {
                                    continue;
                                }
                                for (l, yl) in out.code_y.iter().enumerate() {
                                    if l != j {
                                        *local
                                            .entry(tuple_counts(&[uu, xw, yw, xk, yl], &sizes))
                                            .or_insert(0) += 1;
                                    }
                                }
                            }
                        }
                    }
                    for (counts, &cnt) in &local {
                        let f = f_of_tuple(counts, &sizes, which, rx, ry, n).f;
                        let margin = (cnt as f64).log2() + nf * (f - min_r - 6.0 * delta);
                        worst_margin = worst_margin.max(margin);
                        if margin > 1e-9 {
                            per_pair_caps_ok = false;
                        }
                    }
                }
            }
        }
    }
    let report = MacExpurgationReport {
        g_scores,
        h_scores,
        kept_x,
        kept_y,
        mean_score,
        averaged_caps_ok,
        per_pair_caps_ok,
        worst_margin,
    };
    (out, report)
}
