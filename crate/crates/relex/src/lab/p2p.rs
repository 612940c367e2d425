//! Point-to-point constant-composition codes: sampling, the two packing
//! functions, constructive expurgation, and the exact error-probability
//! sandwich built from packing statistics.

use std::collections::HashMap;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::split_seed;
use crate::channel::Channel;
use crate::dist::xlog2x;
use crate::metric::DecodingMetric;
use crate::types::{conditional_shell_size, multinomial, RationalType};
use crate::Error;

/// A constant-composition code: every word has exactly the composition
/// counts. Repeated words are allowed (the ensemble draws i.i.d.).
#[derive(Debug, Clone)]
pub struct P2PCode {
    pub n: usize,
    pub nx: usize,
    /// Symbol counts of the shared composition; sums to `n`.
    pub composition: Vec<u64>,
    pub words: Vec<Vec<u8>>,
}

impl P2PCode {
    pub fn new(nx: usize, composition: Vec<u64>, words: Vec<Vec<u8>>) -> Result<Self, Error> {
        let n: u64 = composition.iter().sum();
        if composition.len() != nx {
            return Err(Error::Shape("composition length != alphabet size".into()));
        }
        for w in &words {
            if w.len() != n as usize {
                return Err(Error::Shape("word length != composition total".into()));
            }
            let mut c = vec![0u64; nx];
            for &s in w {
                c[s as usize] += 1;
            }
            if c != composition {
                return Err(Error::Invalid("word composition mismatch".into()));
            }
        }
        Ok(Self { n: n as usize, nx, composition, words })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Draw `m` words i.i.d. uniform on the type class of `composition` by
/// permuting the fixed symbol multiset. Deterministic given the seed.
pub fn sample_p2p_code(nx: usize, composition: &[u64], m: usize, seed: u64) -> P2PCode {
    let template: Vec<u8> = composition
        .iter()
        .enumerate()
        .flat_map(|(s, &c)| std::iter::repeat(s as u8).take(c as usize))
        .collect();
    let words: Vec<Vec<u8>> = (0..m)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, i as u64));
            let mut w = template.clone();
            w.shuffle(&mut rng);
            w
        })
        .collect();
    P2PCode { n: template.len(), nx, composition: composition.to_vec(), words }
}

fn pair_counts(a: &[u8], b: &[u8], nx: usize) -> Vec<u64> {
    let mut c = vec![0u64; nx * nx];
    for (&x, &xt) in a.iter().zip(b) {
        c[x as usize * nx + xt as usize] += 1;
    }
    c
}

fn triple_counts(a: &[u8], b: &[u8], c_: &[u8], nx: usize) -> Vec<u64> {
    let mut c = vec![0u64; nx * nx * nx];
    for t in 0..a.len() {
        c[(a[t] as usize * nx + b[t] as usize) * nx + c_[t] as usize] += 1;
    }
    c
}

/// Census of ordered-pair joint types: counts matrix -> number of ordered
/// pairs (i, j), j ≠ i, realizing it.
pub fn pair_type_census(code: &P2PCode) -> HashMap<Vec<u64>, u64> {
    let mut census: HashMap<Vec<u64>, u64> = HashMap::new();
    for (i, a) in code.words.iter().enumerate() {
        for (j, b) in code.words.iter().enumerate() {
            if i == j {
                continue;
            }
            *census.entry(pair_counts(a, b, code.nx)).or_insert(0) += 1;
        }
    }
    census
}

fn triple_type_census(code: &P2PCode) -> HashMap<Vec<u64>, u64> {
    let mut census: HashMap<Vec<u64>, u64> = HashMap::new();
    let m = code.len();
    for i in 0..m {
        for j in 0..m {
            if j == i {
                continue;
            }
            for k in 0..m {
                if k == i || k == j {
                    continue;
                }
                *census
                    .entry(triple_counts(&code.words[i], &code.words[j], &code.words[k], code.nx))
                    .or_insert(0) += 1;
            }
        }
    }
    census
}

/// First-order packing function: average number of ordered codeword pairs
/// sharing the joint type `v` (exact rational).
pub fn packing_pi(code: &P2PCode, v: &RationalType) -> Result<Ratio<u64>, Error> {
    if code.is_empty() {
        return Err(Error::Invalid("packing function of an empty code".into()));
    }
    if v.sizes != vec![code.nx, code.nx] || v.denom != code.n as u64 {
        return Err(Error::Shape("pair type shape/denominator mismatch".into()));
    }
    let mut count = 0u64;
    for (i, a) in code.words.iter().enumerate() {
        for (j, b) in code.words.iter().enumerate() {
            if i != j && pair_counts(a, b, code.nx) == v.counts {
                count += 1;
            }
        }
    }
    Ok(Ratio::new(count, code.len() as u64))
}

/// Second-order packing function: average number of ordered distinct
/// codeword triples sharing the joint type `v`.
pub fn packing_lambda(code: &P2PCode, v: &RationalType) -> Result<Ratio<u64>, Error> {
    if code.is_empty() {
        return Err(Error::Invalid("packing function of an empty code".into()));
    }
    if v.sizes != vec![code.nx, code.nx, code.nx] || v.denom != code.n as u64 {
        return Err(Error::Shape("triple type shape/denominator mismatch".into()));
    }
    let m = code.len();
    let mut count = 0u64;
    for i in 0..m {
        for j in 0..m {
            if j == i {
                continue;
            }
            for k in 0..m {
                if k == i || k == j {
                    continue;
                }
                if triple_counts(&code.words[i], &code.words[j], &code.words[k], code.nx)
                    == v.counts
                {
                    count += 1;
                }
            }
        }
    }
    Ok(Ratio::new(count, m as u64))
}

/// Mutual information in bits of a pair-type counts matrix.
pub fn pair_type_mi(counts: &[u64], nx: usize, n: u64) -> f64 {
    let nf = n as f64;
    let mut hx = vec![0u64; nx];
    let mut hxt = vec![0u64; nx];
    for x in 0..nx {
        for xt in 0..nx {
            hx[x] += counts[x * nx + xt];
            hxt[xt] += counts[x * nx + xt];
        }
    }
    let h = |c: &[u64]| -> f64 { -c.iter().map(|&v| xlog2x(v as f64 / nf)).sum::<f64>() };
    (h(&hx) + h(&hxt) - h(counts)).max(0.0)
}

#[derive(Debug, Clone)]
pub struct ExpurgationReport {
    pub scores: Vec<f64>,
    pub kept: Vec<usize>,
    /// Input satisfied the first-order packing cap π ≤ 2^{n(R−I+2δ)} for
    /// every realized pair type (the precondition for the ≥ M/2 guarantee).
    pub input_ok: bool,
    /// Mean score Π over the input code.
    pub mean_score: f64,
    /// Output re-check: per-codeword neighborhood caps
    /// |T_{V}(x_i) ∩ C| < 2^{n(R−I+3δ)} for every realized V.
    pub per_word_caps_ok: bool,
    /// Output re-check: first-order packing cap on the expurgated code.
    pub packing_caps_ok: bool,
    /// Worst slack (bits) across the output re-checks; negative = pass.
    pub worst_margin: f64,
}

/// Constructive expurgation: score each codeword by its weighted
/// neighborhood counts and keep the words with score < 1.
pub fn expurgate_p2p(code: &P2PCode, rate: f64, delta: f64) -> (P2PCode, ExpurgationReport) {
    let n = code.n as f64;
    let m = code.len();
    // per-pair exponents 2^{-n(R - I + 3δ)} from exact pair types
    let mut scores = vec![0.0f64; m];
    let mut type_of: Vec<Vec<Vec<u64>>> = vec![Vec::with_capacity(m); m];
    for i in 0..m {
        for j in 0..m {
            if j == i {
                type_of[i].push(Vec::new());
                continue;
            }
            let c = pair_counts(&code.words[i], &code.words[j], code.nx);
            let mi = pair_type_mi(&c, code.nx, code.n as u64);
            scores[i] += (-(n) * (rate - mi + 3.0 * delta)).exp2();
            type_of[i].push(c);
        }
    }
    let kept: Vec<usize> = (0..m).filter(|&i| scores[i] < 1.0).collect();
    let words: Vec<Vec<u8>> = kept.iter().map(|&i| code.words[i].clone()).collect();
    let out = P2PCode {
        n: code.n,
        nx: code.nx,
        composition: code.composition.clone(),
        words,
    };
    // input precondition: π(C,V) ≤ 2^{n(R−I+2δ)} for every realized V
    let census = pair_type_census(code);
    let mut input_ok = true;
    for (counts, &cnt) in &census {
        let mi = pair_type_mi(counts, code.nx, code.n as u64);
        let bound = (n * (rate - mi + 2.0 * delta)).exp2();
        if cnt as f64 / m as f64 > bound * (1.0 + 1e-12) {
            input_ok = false;
        }
    }
    // output re-checks (exhaustive over realized types)
    let mut per_word_caps_ok = true;
    let mut worst_margin = f64::NEG_INFINITY;
    for &i in &kept {
        let mut neigh: HashMap<&[u64], u64> = HashMap::new();
        for &j in &kept {
            if j == i {
                continue;
            }
            *neigh.entry(&type_of[i][j]).or_insert(0) += 1;
        }
        for (counts, &cnt) in &neigh {
            let mi = pair_type_mi(counts, code.nx, code.n as u64);
            let margin = (cnt as f64).log2() - n * (rate - mi + 3.0 * delta);
            worst_margin = worst_margin.max(margin);
            if margin >= 0.0 {
                per_word_caps_ok = false;
            }
        }
    }
    let out_census = pair_type_census(&out);
    let mut packing_caps_ok = true;
    for (counts, &cnt) in &out_census {
        if out.is_empty() {
            break;
        }
        let mi = pair_type_mi(counts, code.nx, code.n as u64);
        let margin = (cnt as f64 / out.len() as f64).log2() - n * (rate - mi + 3.0 * delta);
        worst_margin = worst_margin.max(margin);
        if margin > 0.0 {
            packing_caps_ok = false;
        }
    }
    let mean_score = scores.iter().sum::<f64>() / m as f64;
    let report = ExpurgationReport {
        scores,
        kept,
        input_ok,
        mean_score,
        per_word_caps_ok,
        packing_caps_ok,
        worst_margin,
    };
    (out, report)
}

/// One audit row of the sandwich computation: all terms sharing the same
/// (X, Y)-marginal type of the full joint.
#[derive(Debug, Clone)]
pub struct SandwichGroup {
    /// counts over (x, y) cells
    pub xy_counts: Vec<u64>,
    /// Σ over V in the group of w(V)·(1/M)Σ_i B_i(V): the first-order term.
    pub first_order: f64,
    /// Σ over extended types of w·(1/M)Σ_i C_i: the second-order correction.
    pub second_order: f64,
}

#[derive(Debug, Clone)]
pub struct SandwichReport {
    pub lower: f64,
    pub exact: f64,
    pub upper: f64,
    pub holds: bool,
    pub groups: Vec<SandwichGroup>,
}

/// Exact error-probability sandwich from the code's packing statistics:
///
///   lower = Σ_groups | Σ_V w(V)·π(V)·S(V_{Y|XX̃}) − Σ_{V''} w·λ·S(V''_{Y|XX̃X̂}) |^+
///   upper = Σ_V w(V)·min{ π(V)·S(V_{Y|XX̃}), S(V_{Y|X}) }
///
/// with exact shell sizes, V ranging over joint types whose competitor
/// side scores no worse than the true side, and the correction grouped by
/// the (X,Y)-marginal (terms with different marginals are disjoint error
/// slices, so the positive part clips per group).
pub fn sandwich_check_p2p(
    code: &P2PCode,
    channel: &Channel,
    metric: &DecodingMetric,
    output_cap: usize,
) -> Result<SandwichReport, Error> {
    let n = code.n;
    let nx = code.nx;
    let ny = channel.outputs;
    if ny.pow(n as u32) > output_cap {
        return Err(Error::CapExceeded(format!(
            "{ny}^{n} outputs exceed cap {output_cap}"
        )));
    }
    let exact = super::exact_error_probability(code, channel, metric, output_cap)?;
    let m = code.len() as f64;

    // α from an (x,y)-counts matrix, per symbol
    let alpha_of = |counts: &[u64]| -> Result<f64, Error> {
        let nf = n as f64;
        let mut p = vec![0.0; nx];
        let mut rows = vec![vec![0.0; ny]; nx];
        for x in 0..nx {
            let rowsum: u64 = (0..ny).map(|y| counts[x * ny + y]).sum();
            p[x] = rowsum as f64 / nf;
            if rowsum > 0 {
                for y in 0..ny {
                    rows[x][y] = counts[x * ny + y] as f64 / rowsum as f64;
                }
            } else {
                for y in 0..ny {
                    rows[x][y] = 1.0 / ny as f64;
                }
            }
        }
        crate::metric::evaluate_p2p(metric, &p, &rows)
    };

    // log2 of the per-sequence output probability for an (x,y)-counts
    // matrix: Σ counts · log2 W(y|x); −inf when off-support.
    let log_w = |xy: &[u64]| -> f64 {
        let mut s = 0.0;
        for x in 0..nx {
            for y in 0..ny {
                let c = xy[x * ny + y];
                if c > 0 {
                    let w = channel.w(y, x);
                    if w <= 0.0 {
                        return f64::NEG_INFINITY;
                    }
                    s += c as f64 * w.log2();
                }
            }
        }
        s
    };

    // enumerate y-splittings of a tuple-type: distribute each cell count
    // over the output alphabet
    fn splits(cells: &[u64], ny: usize) -> Vec<Vec<Vec<u64>>> {
        // per cell: all compositions of the count into ny parts
        let mut per_cell: Vec<Vec<Vec<u64>>> = Vec::with_capacity(cells.len());
        for &c in cells {
            let comps = crate::types::enumerate_types(&[ny], c, &[]);
            if c == 0 {
                per_cell.push(vec![vec![0; ny]]);
            } else {
                per_cell.push(comps.into_iter().map(|t| t.counts).collect());
            }
        }
        // cartesian product
        let mut acc: Vec<Vec<Vec<u64>>> = vec![Vec::new()];
        for options in per_cell {
            let mut next = Vec::with_capacity(acc.len() * options.len());
            for prefix in &acc {
                for opt in &options {
                    let mut row = prefix.clone();
                    row.push(opt.clone());
                    next.push(row);
                }
            }
            acc = next;
        }
        acc
    }

    // group accumulators keyed by the (x,y)-marginal counts
    let mut groups: HashMap<Vec<u64>, (f64, f64)> = HashMap::new();
    let mut upper = 0.0f64;

    // first-order terms: realized pair types × y-splits
    let pair_census = pair_type_census(code);
    for (pair, &cnt) in &pair_census {
        let pi = cnt as f64 / m;
        for split in splits(pair, ny) {
            // split[cell][y] where cell = x*nx + xt
            // α-condition on the (x̃, y) and (x, y) marginals
            let mut xy = vec![0u64; nx * ny];
            let mut xty = vec![0u64; nx * ny];
            for x in 0..nx {
                for xt in 0..nx {
                    for y in 0..ny {
                        let c = split[x * nx + xt][y];
                        xy[x * ny + y] += c;
                        xty[xt * ny + y] += c;
                    }
                }
            }
            let a_true = alpha_of(&xy)?;
            let a_comp = alpha_of(&xty)?;
            if !(a_comp <= a_true + 1e-12) {
                continue;
            }
            let lw = log_w(&xy);
            if lw == f64::NEG_INFINITY {
                continue;
            }
            let shell = conditional_shell_size(&split) as f64;
            let w = lw.exp2();
            let first = w * pi * shell;
            // exact per-x shell size for the min-cap: from the xy marginal
            let sx: f64 = (0..nx)
                .map(|x| {
                    let row: Vec<u64> = (0..ny).map(|y| xy[x * ny + y]).collect();
                    multinomial(&row) as f64
                })
                .product();
            upper += w * (pi * shell).min(sx);
            let e = groups.entry(xy).or_insert((0.0, 0.0));
            e.0 += first;
        }
    }

    // second-order corrections: realized ordered triple types × y-splits,
    // requiring both 3-axis marginals to satisfy the α-condition
    let triple_census = triple_type_census(code);
    for (triple, &cnt) in &triple_census {
        let lambda = cnt as f64 / m;
        for split in splits(triple, ny) {
            let mut xy = vec![0u64; nx * ny];
            let mut xty = vec![0u64; nx * ny];
            let mut xhy = vec![0u64; nx * ny];
            for x in 0..nx {
                for xt in 0..nx {
                    for xh in 0..nx {
                        for y in 0..ny {
                            let c = split[(x * nx + xt) * nx + xh][y];
                            xy[x * ny + y] += c;
                            xty[xt * ny + y] += c;
                            xhy[xh * ny + y] += c;
                        }
                    }
                }
            }
            let a_true = alpha_of(&xy)?;
            if !(alpha_of(&xty)? <= a_true + 1e-12) || !(alpha_of(&xhy)? <= a_true + 1e-12) {
                continue;
            }
            let lw = log_w(&xy);
            if lw == f64::NEG_INFINITY {
                continue;
            }
            let shell = conditional_shell_size(&split) as f64;
            let e = groups.entry(xy).or_insert((0.0, 0.0));
            e.1 += lw.exp2() * lambda * shell;
        }
    }

    let mut lower = 0.0;
    let mut group_rows: Vec<SandwichGroup> = groups
        .into_iter()
        .map(|(xy_counts, (first, second))| SandwichGroup { xy_counts, first_order: first, second_order: second })
        .collect();
    group_rows.sort_by(|a, b| a.xy_counts.cmp(&b.xy_counts));
    for g in &group_rows {
        lower += (g.first_order - g.second_order).max(0.0);
    }
    let tol = 1e-9 * (1.0 + exact.abs());
    let holds = lower <= exact + tol && exact <= upper + tol;
    Ok(SandwichReport { lower, exact, upper, holds, groups: group_rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_respects_composition_and_seed() {
        let code = sample_p2p_code(2, &[5, 3], 6, 42);
        assert_eq!(code.n, 8);
        for w in &code.words {
            assert_eq!(w.iter().filter(|&&s| s == 0).count(), 5);
        }
        let again = sample_p2p_code(2, &[5, 3], 6, 42);
        assert_eq!(code.words, again.words);
        let other = sample_p2p_code(2, &[5, 3], 6, 43);
        assert_ne!(code.words, other.words);
        // point-mass composition gives all-constant words
        let cst = sample_p2p_code(2, &[0, 4], 3, 1);
        assert!(cst.words.iter().all(|w| w.iter().all(|&s| s == 1)));
    }

    #[test]
    fn per_position_frequencies_match_composition() {
        // multinomial sampling check: empirical symbol-1 frequency per
        // position over many draws ≈ 3/8 within 3σ
        let draws = 4000;
        let code = sample_p2p_code(2, &[5, 3], draws, 9);
        let p = 3.0 / 8.0;
        let sigma = (p * (1.0 - p) / draws as f64).sqrt();
        for t in 0..8 {
            let freq =
                code.words.iter().filter(|w| w[t] == 1).count() as f64 / draws as f64;
            assert!((freq - p).abs() < 3.0 * sigma + 1e-12, "position {t}: {freq}");
        }
    }

    #[test]
    fn packing_pi_small_cases() {
        // M = 2 over a ternary alphabet with an asymmetric pair type:
        // exactly one ordered pair matches, so π = 1/2. (A binary pair with
        // equal marginals is always swap-symmetric and both ordered pairs
        // would match.)
        let words = vec![vec![0, 1, 2, 0, 1, 2], vec![1, 2, 0, 0, 1, 2]];
        let code = P2PCode::new(3, vec![2, 2, 2], words).unwrap();
        let v = RationalType::of_sequences(
            &[&code.words[0].clone(), &code.words[1].clone()],
            &[3, 3],
        )
        .unwrap();
        assert_ne!(v.counts, transpose3(&v.counts), "pair type must be asymmetric");
        let pi = packing_pi(&code, &v).unwrap();
        assert_eq!(pi, Ratio::new(1, 2));
        // the swap-symmetric binary case: both ordered pairs realize the type
        let wb = vec![vec![0, 0, 1, 1], vec![0, 1, 0, 1]];
        let cb = P2PCode::new(2, vec![2, 2], wb).unwrap();
        let vb = RationalType::of_sequences(
            &[&cb.words[0].clone(), &cb.words[1].clone()],
            &[2, 2],
        )
        .unwrap();
        assert_eq!(packing_pi(&cb, &vb).unwrap(), Ratio::new(2, 2));
        // type with wrong marginals never occurs
        let bad = RationalType::new(vec![2, 2], vec![4, 0, 0, 0], 4).unwrap();
        assert_eq!(packing_pi(&cb, &bad).unwrap(), Ratio::new(0, 1));
    }

    fn transpose3(c: &[u64]) -> Vec<u64> {
        let mut t = vec![0u64; 9];
        for a in 0..3 {
            for b in 0..3 {
                t[b * 3 + a] = c[a * 3 + b];
            }
        }
        t
    }

    #[test]
    fn packing_pi_sums_to_m_minus_one() {
        let code = sample_p2p_code(2, &[4, 4], 7, 5);
        let census = pair_type_census(&code);
        let total: u64 = census.values().sum();
        assert_eq!(total, 7 * 6);
        let sum_pi: Ratio<u64> = census
            .values()
            .map(|&c| Ratio::new(c, 7))
            .sum();
        assert_eq!(sum_pi, Ratio::new(6, 1));
    }

    #[test]
    fn packing_lambda_cases() {
        // M = 2: no distinct triple exists
        let code = P2PCode::new(2, vec![1, 1], vec![vec![0, 1], vec![1, 0]]).unwrap();
        let v = RationalType::new(vec![2, 2, 2], vec![1, 0, 0, 0, 0, 0, 0, 1], 2).unwrap();
        assert_eq!(packing_lambda(&code, &v).unwrap(), Ratio::new(0, 1));
        // planted triple: direct enumeration of the 6 ordered assignments
        let words = vec![vec![0, 0, 1, 1], vec![0, 1, 0, 1], vec![1, 0, 0, 1]];
        let code3 = P2PCode::new(2, vec![2, 2], words.clone()).unwrap();
        let t = RationalType::of_sequences(
            &[&words[0].clone(), &words[1].clone(), &words[2].clone()],
            &[2, 2, 2],
        )
        .unwrap();
        let lam = packing_lambda(&code3, &t).unwrap();
        // count matching ordered triples by brute force
        let mut cnt = 0u64;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    if i != j && k != i && k != j {
                        let tt = RationalType::of_sequences(
                            &[&words[i].clone(), &words[j].clone(), &words[k].clone()],
                            &[2, 2, 2],
                        )
                        .unwrap();
                        if tt.counts == t.counts {
                            cnt += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(lam, Ratio::new(cnt, 3));
    }

    #[test]
    fn permutation_invariance_of_packing() {
        let code = sample_p2p_code(2, &[4, 4], 5, 77);
        let mut permuted = code.clone();
        permuted.words.rotate_left(2);
        let census_a = pair_type_census(&code);
        let census_b = pair_type_census(&permuted);
        assert_eq!(census_a, census_b);
    }

    #[test]
    fn sandwich_holds_on_small_codes() {
        let ch = Channel::bsc(0.1);
        for seed in 0..8u64 {
            let code = sample_p2p_code(2, &[3, 3], 3, seed);
            for metric in [
                DecodingMetric::MaximumLikelihood(ch.clone()),
                DecodingMetric::MinimumEntropy,
            ] {
                let rep = sandwich_check_p2p(&code, &ch, &metric, 1 << 16).unwrap();
                assert!(
                    rep.holds,
                    "seed {seed}: lower {} exact {} upper {}",
                    rep.lower, rep.exact, rep.upper
                );
                assert!(rep.lower >= 0.0 && rep.upper >= rep.lower);
            }
        }
        // M = 1: all three quantities vanish
        let single = sample_p2p_code(2, &[3, 3], 1, 3);
        let m = DecodingMetric::MinimumEntropy;
        let rep = sandwich_check_p2p(&single, &ch, &m, 1 << 16).unwrap();
        assert_eq!(rep.exact, 0.0);
        assert_eq!(rep.upper, 0.0);
        assert_eq!(rep.lower, 0.0);
        // identical codewords: the upper expression dominates the certain error
        let w = sample_p2p_code(2, &[3, 3], 1, 9).words.remove(0);
        let dup = P2PCode::new(2, vec![3, 3], vec![w.clone(), w]).unwrap();
        let mlm = DecodingMetric::MaximumLikelihood(ch.clone());
        let rep2 = sandwich_check_p2p(&dup, &ch, &mlm, 1 << 16).unwrap();
        assert!((rep2.exact - 1.0).abs() < 1e-12);
        assert!(rep2.upper >= 1.0 - 1e-12);
        assert!(rep2.holds);
    }

    #[test]
    fn expurgation_keeps_good_codes_and_drops_duplicates() {
        // all-distinct spread-out code at generous delta: unchanged
        let code = sample_p2p_code(2, &[8, 8], 8, 12);
        let (out, report) = expurgate_p2p(&code, 0.25, 0.3);
        assert_eq!(out.len(), code.len());
        assert!(report.per_word_caps_ok);
        // duplicated codeword at small rate: the self-similar joint type
        // forces score ≥ 1 for both copies
        let w = sample_p2p_code(2, &[8, 8], 1, 3).words.remove(0);
        let dup = P2PCode::new(2, vec![8, 8], vec![w.clone(), w]).unwrap();
        let (out2, report2) = expurgate_p2p(&dup, 0.1, 0.05);
        assert!(out2.len() < 2, "scores {:?}", report2.scores);
    }
}
