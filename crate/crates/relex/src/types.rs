//! Rational types (empirical distributions with denominator n), exact
//! type-class counting, and enumeration of the constrained type lattice.

use crate::dist::{Axis, JointDist};
use crate::Error;

/// A joint type: nonnegative integer counts over a product alphabet,
/// summing to the denominator `n`. The induced real distribution is
/// exactly `counts / n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalType {
    pub sizes: Vec<usize>,
    pub counts: Vec<u64>,
    pub denom: u64,
}

impl RationalType {
    pub fn new(sizes: Vec<usize>, counts: Vec<u64>, denom: u64) -> Result<Self, Error> {
        let cells: usize = sizes.iter().product();
        if counts.len() != cells {
            return Err(Error::Shape(format!(
                "type has {} cells, sizes require {cells}",
                counts.len()
            )));
        }
        let total: u64 = counts.iter().sum();
        if total != denom {
            return Err(Error::Invalid(format!("counts sum to {total}, denominator is {denom}")));
        }
        if denom == 0 {
            return Err(Error::Invalid("denominator must be positive".into()));
        }
        Ok(Self { sizes, counts, denom })
    }

    /// Empirical joint type of parallel symbol sequences (one sequence per
    /// axis, all of equal length).
    pub fn of_sequences(seqs: &[&[u8]], sizes: &[usize]) -> Result<Self, Error> {
        if seqs.is_empty() || seqs.len() != sizes.len() {
            return Err(Error::Shape("of_sequences: one sequence per axis".into()));
        }
        let n = seqs[0].len();
        if seqs.iter().any(|s| s.len() != n) || n == 0 {
            return Err(Error::Shape("of_sequences: unequal or empty sequences".into()));
        }
        let cells: usize = sizes.iter().product();
        let mut counts = vec![0u64; cells];
        for t in 0..n {
            let mut idx = 0usize;
            for (s, &sz) in seqs.iter().zip(sizes) {
                let sym = s[t] as usize;
                debug_assert!(sym < sz);
                idx = idx * sz + sym;
            }
            counts[idx] += 1;
        }
        Self::new(sizes.to_vec(), counts, n as u64)
    }

    pub fn probs(&self) -> Vec<f64> {
        let n = self.denom as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// The induced real distribution with the given axis names.
    pub fn to_dist(&self, names: &[&str]) -> Result<JointDist, Error> {
        if names.len() != self.sizes.len() {
            return Err(Error::Axis("to_dist: one name per axis".into()));
        }
        let axes = names
            .iter()
            .zip(&self.sizes)
            .map(|(n, &s)| Axis::new(*n, s))
            .collect();
        JointDist::new(axes, self.probs())
    }

    /// Marginal counts over a subset of axes (bitmask over axis positions).
    pub fn marginal_counts(&self, mask: u32) -> (Vec<usize>, Vec<u64>) {
        let kept: Vec<usize> = (0..self.sizes.len()).filter(|i| mask & (1 << i) != 0).collect();
        let sizes: Vec<usize> = kept.iter().map(|&i| self.sizes[i]).collect();
        let msize: usize = sizes.iter().product::<usize>().max(1);
        let mut out = vec![0u64; msize];
        let mut strides = vec![1usize; self.sizes.len()];
        for i in (0..self.sizes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.sizes[i + 1];
        }
        for (idx, &c) in self.counts.iter().enumerate() {
            let mut mi = 0usize;
            for &k in &kept {
                mi = mi * self.sizes[k] + (idx / strides[k]) % self.sizes[k];
            }
            out[mi] += c;
        }
        (sizes, out)
    }
}

/// Exact multinomial coefficient n! / Π parts_i! as u128.
///
/// Computed as a product of binomials to stay in range for the desk-scale
/// blocklengths this crate targets (n ≤ ~60).
pub fn multinomial(parts: &[u64]) -> u128 {
    let mut total: u64 = 0;
    let mut acc: u128 = 1;
    for &p in parts {
        total += p;
        acc = acc.checked_mul(binomial(total, p)).expect("multinomial overflow");
    }
    acc
}

/// Exact binomial coefficient C(n, k) as u128.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128).expect("binomial overflow") / (i as u128 + 1);
    }
    acc
}

/// Size of the type class T_P for single-axis counts.
pub fn type_class_size(counts: &[u64]) -> u128 {
    multinomial(counts)
}

/// Size of a conditional type class: number of sequences whose joint counts
/// with a fixed conditioning tuple equal `joint_counts`, laid out as
/// `joint_counts[cond_cell][out_symbol]`.
pub fn conditional_shell_size(joint_counts: &[Vec<u64>]) -> u128 {
    joint_counts.iter().map(|row| multinomial(row)).product()
}

/// A marginal-equality constraint for type enumeration: the marginal over
/// `mask` must equal `counts` (same denominator as the enumeration).
#[derive(Debug, Clone)]
pub struct MarginalConstraint {
    pub mask: u32,
    pub counts: Vec<u64>,
}

/// Enumerate every joint type of denominator `n` over `sizes`, subject to
/// marginal-equality constraints, invoking `visit` once per lattice point
/// in lexicographic cell order. Infeasible constraints yield no visits.
pub fn visit_types<F: FnMut(&[u64])>(
    sizes: &[usize],
    n: u64,
    constraints: &[MarginalConstraint],
    mut visit: F,
) {
    let cells: usize = sizes.iter().product();
    if cells == 0 {
        return;
    }
    // Per-constraint: marginal cell of each joint cell, and the last joint
    // cell contributing to each marginal cell (for exact-fill pruning).
    let mut strides = vec![1usize; sizes.len()];
    for i in (0..sizes.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * sizes[i + 1];
    }
    struct ConsState {
        cell_to_marg: Vec<usize>,
        last_cell_of_marg: Vec<usize>,
        budget: Vec<i64>,
    }
    let mut cons: Vec<ConsState> = Vec::with_capacity(constraints.len());
    for c in constraints {
        let kept: Vec<usize> = (0..sizes.len()).filter(|i| c.mask & (1 << i) != 0).collect();
        let msize: usize = kept.iter().map(|&i| sizes[i]).product::<usize>().max(1);
        if c.counts.len() != msize || c.counts.iter().sum::<u64>() != n {
            return; // malformed constraint: nothing to enumerate
        }
        let mut cell_to_marg = vec![0usize; cells];
        let mut last_cell_of_marg = vec![0usize; msize];
        for idx in 0..cells {
            let mut mi = 0usize;
            for &k in &kept {
                mi = mi * sizes[k] + (idx / strides[k]) % sizes[k];
            }
            cell_to_marg[idx] = mi;
            last_cell_of_marg[mi] = idx;
        }
        cons.push(ConsState {
            cell_to_marg,
            last_cell_of_marg,
            budget: c.counts.iter().map(|&x| x as i64).collect(),
        });
    }

    let mut counts = vec![0u64; cells];
    // DFS over cells; at each cell choose a count within all budgets.
    fn rec<F: FnMut(&[u64])>(
        cell: usize,
        remaining: u64,
        cells: usize,
        counts: &mut [u64],
        cons: &mut [ConsState],
        visit: &mut F,
    ) {
        if cell == cells {
            if remaining == 0 {
                visit(counts);
            }
            return;
        }
        let mut hi = remaining;
        let mut lo = 0u64;
        if cell == cells - 1 {
            lo = remaining;
        }
        for cs in cons.iter() {
            let m = cs.cell_to_marg[cell];
            let b = cs.budget[m];
            debug_assert!(b >= 0);
            hi = hi.min(b as u64);
            if cs.last_cell_of_marg[m] == cell {
                lo = lo.max(b as u64);
            }
        }
        if lo > hi {
            return;
        }
        for v in lo..=hi {
            counts[cell] = v;
            for cs in cons.iter_mut() {
                cs.budget[cs.cell_to_marg[cell]] -= v as i64;
            }
            rec(cell + 1, remaining - v, cells, counts, cons, visit);
            for cs in cons.iter_mut() {
                cs.budget[cs.cell_to_marg[cell]] += v as i64;
            }
            counts[cell] = 0;
        }
    }
    rec(0, n, cells, &mut counts, &mut cons, &mut visit);
}

/// Collecting wrapper around [`visit_types`].
pub fn enumerate_types(
    sizes: &[usize],
    n: u64,
    constraints: &[MarginalConstraint],
) -> Vec<RationalType> {
    let mut out = Vec::new();
    visit_types(sizes, n, constraints, |counts| {
        out.push(RationalType {
            sizes: sizes.to_vec(),
            counts: counts.to_vec(),
            denom: n,
        });
    });
    out
}

/// Round a probability vector to the closest type of denominator `n`
/// (largest-remainder method). Deterministic.
pub fn round_to_type(p: &[f64], n: u64) -> Vec<u64> {
    let mut counts: Vec<u64> = p.iter().map(|&x| (x * n as f64).floor().max(0.0) as u64).collect();
    let mut total: u64 = counts.iter().sum();
    if total > n {
        // floor can only overshoot via fp noise; trim from the largest
        let mut order: Vec<usize> = (0..p.len()).collect();
        order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
        let mut i = 0;
        while total > n {
            if counts[order[i]] > 0 {
                counts[order[i]] -= 1;
                total -= 1;
            }
            i = (i + 1) % order.len();
        }
    }
    let mut rem: Vec<(f64, usize)> = p
        .iter()
        .enumerate()
        .map(|(i, &x)| (x * n as f64 - counts[i] as f64, i))
        .collect();
    rem.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut i = 0;
    while total < n {
        counts[rem[i].1] += 1;
        total += 1;
        i = (i + 1) % rem.len();
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unconstrained_counts_match_stars_and_bars() {
        // single binary axis, n = 2 -> 3 types
        assert_eq!(enumerate_types(&[2], 2, &[]).len(), 3);
        // ternary axis, n = 4 -> C(6,2) = 15
        assert_eq!(enumerate_types(&[3], 4, &[]).len(), 15);
        // product axis with k cells: C(n+k-1, k-1)
        let k = 4;
        let n = 5;
        let expect = binomial(n + k - 1, k - 1) as usize;
        assert_eq!(enumerate_types(&[2, 2], n, &[]).len(), expect);
    }

    #[test]
    fn pinned_binary_pair_marginals() {
        // both marginals (1,1)/2 on a binary pair, n = 2: diagonal and
        // anti-diagonal only
        let c = vec![
            MarginalConstraint { mask: 0b01, counts: vec![1, 1] },
            MarginalConstraint { mask: 0b10, counts: vec![1, 1] },
        ];
        let got = enumerate_types(&[2, 2], 2, &c);
        assert_eq!(got.len(), 2);
        let sets: Vec<Vec<u64>> = got.iter().map(|t| t.counts.clone()).collect();
        assert!(sets.contains(&vec![1, 0, 0, 1]));
        assert!(sets.contains(&vec![0, 1, 1, 0]));
    }

    #[test]
    fn infeasible_constraints_yield_empty_stream() {
        let c = vec![MarginalConstraint { mask: 0b01, counts: vec![3, 0] }];
        assert!(enumerate_types(&[2, 2], 2, &c).is_empty());
    }

    #[test]
    fn enumeration_is_deterministic_and_exact() {
        let c = vec![MarginalConstraint { mask: 0b01, counts: vec![2, 2] }];
        let a = enumerate_types(&[2, 3], 4, &c);
        let b = enumerate_types(&[2, 3], 4, &c);
        assert_eq!(a, b);
        // brute-force check against a filter of the unconstrained lattice
        let all = enumerate_types(&[2, 3], 4, &[]);
        let brute: Vec<_> = all
            .into_iter()
            .filter(|t| {
                let (_, m) = t.marginal_counts(0b01);
                m == vec![2, 2]
            })
            .collect();
        assert_eq!(a.len(), brute.len());
    }

    #[test]
    fn exact_counting_helpers() {
        assert_eq!(binomial(16, 8), 12870);
        assert_eq!(multinomial(&[2, 1, 1]), 12);
        assert_eq!(type_class_size(&[8, 8]), 12870);
        assert_eq!(conditional_shell_size(&[vec![2, 0], vec![1, 1]]), 2);
    }

    #[test]
    fn float_path_matches_exact_counts() {
        let t = RationalType::new(vec![2, 2], vec![3, 1, 2, 2], 8).unwrap();
        let d = t.to_dist(&["X", "Y"]).unwrap();
        let p = t.probs();
        let href = -(p.iter().map(|&x| crate::dist::xlog2x(x)).sum::<f64>());
        assert!((d.entropy() - href).abs() < 1e-9);
    }

    #[test]
    fn rounding_to_lattice() {
        assert_eq!(round_to_type(&[0.5, 0.5], 4), vec![2, 2]);
        assert_eq!(round_to_type(&[0.26, 0.74], 4), vec![1, 3]);
        let c = round_to_type(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 5);
        assert_eq!(c.iter().sum::<u64>(), 5);
    }

    #[test]
    fn joint_type_of_sequences() {
        let x: &[u8] = &[0, 0, 1, 1];
        let y: &[u8] = &[0, 1, 1, 1];
        let t = RationalType::of_sequences(&[x, y], &[2, 2]).unwrap();
        assert_eq!(t.counts, vec![1, 1, 0, 2]);
        let (_, mx) = t.marginal_counts(0b01);
        assert_eq!(mx, vec![2, 2]);
    }
}
