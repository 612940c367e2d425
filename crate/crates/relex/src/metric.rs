//! The α-decoding rule: a real-valued function of the joint type of
//! (candidate, received) selects the decoder. Maximum-likelihood and
//! minimum-entropy (point-to-point) and minimum-equivocation (MAC) are
//! the built-in instances; arbitrary metrics plug in as closures.
//!
//! Ties are resolved as decoding errors throughout: a codeword is accepted
//! only when it is the strict minimizer.

use std::fmt;
use std::sync::Arc;

use crate::channel::Channel;
use crate::dist::{entropy_of, JointDist};
use crate::Error;

/// Relative half-width of the tie window for float metric comparisons.
pub const TIE_TOL: f64 = 1e-12;

pub type MetricFn = Arc<dyn Fn(&[usize], &[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum DecodingMetric {
    /// α(P·V) = D(V‖W|P) + H(V|P); equivalently the per-symbol negative
    /// log-likelihood. Carries the channel it scores against.
    MaximumLikelihood(Channel),
    /// α(P·V) = H(V|P).
    MinimumEntropy,
    /// MAC only: α(V_UXYZ) = H_V(XY|ZU).
    MinimumEquivocation,
    /// Arbitrary evaluation on the joint distribution, given as
    /// (alphabet sizes, row-major probabilities).
    Custom(MetricFn),
}

impl fmt::Debug for DecodingMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MaximumLikelihood(_) => write!(f, "MaximumLikelihood"),
            Self::MinimumEntropy => write!(f, "MinimumEntropy"),
            Self::MinimumEquivocation => write!(f, "MinimumEquivocation"),
            Self::Custom(_) => write!(f, "Custom"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Index(usize),
    /// For MAC decoding: (sender-X index, sender-Y index).
    Pair(usize, usize),
    Error,
}

/// Evaluate a point-to-point metric at composition `p` (over X) and
/// conditional rows `v[x][y]`. Returns bits; `+inf` is allowed (ML with
/// off-support V).
pub fn evaluate_p2p(metric: &DecodingMetric, p: &[f64], v: &[Vec<f64>]) -> Result<f64, Error> {
    let nx = p.len();
    if v.len() != nx {
        return Err(Error::Shape("evaluate_p2p: one conditional row per input".into()));
    }
    let ny = v.first().map(Vec::len).unwrap_or(0);
    match metric {
        DecodingMetric::MaximumLikelihood(w) => {
            if w.inputs != vec![nx] || w.outputs != ny {
                return Err(Error::Shape("metric channel does not match V".into()));
            }
            let mut a = 0.0;
            for x in 0..nx {
                if p[x] <= 0.0 {
                    continue;
                }
                for y in 0..ny {
                    let m = p[x] * v[x][y];
                    if m <= 0.0 {
                        continue;
                    }
                    if w.w(y, x) <= 0.0 {
                        return Ok(f64::INFINITY);
                    }
                    a -= m * w.w(y, x).log2();
                }
            }
            Ok(a)
        }
        DecodingMetric::MinimumEntropy => {
            let mut a = 0.0;
            for x in 0..nx {
                if p[x] > 0.0 {
                    a += p[x] * entropy_of(&v[x]);
                }
            }
            Ok(a)
        }
        DecodingMetric::MinimumEquivocation => {
            Err(Error::Invalid("minimum-equivocation is a MAC metric".into()))
        }
        DecodingMetric::Custom(f) => {
            let mut joint = Vec::with_capacity(nx * ny);
            for x in 0..nx {
                for y in 0..ny {
                    joint.push(p[x] * v[x][y]);
                }
            }
            Ok(f(&[nx, ny], &joint))
        }
    }
}

/// Evaluate a MAC metric on a joint with axes named U, X, Y, Z.
pub fn evaluate_mac(metric: &DecodingMetric, v: &JointDist) -> Result<f64, Error> {
    let order = [
        v.axis_index("U")?,
        v.axis_index("X")?,
        v.axis_index("Y")?,
        v.axis_index("Z")?,
    ];
    let (sizes, probs) = v.marginal_ordered(&order);
    evaluate_mac_raw(metric, &sizes, &probs)
}

/// MAC metric on raw (|U|,|X|,|Y|,|Z|)-shaped probabilities.
pub fn evaluate_mac_raw(metric: &DecodingMetric, sizes: &[usize], probs: &[f64]) -> Result<f64, Error> {
    let [nu, nx, ny, nz] = [sizes[0], sizes[1], sizes[2], sizes[3]];
    match metric {
        DecodingMetric::MinimumEquivocation => {
            // H(XY|ZU) = H(UXYZ) - H(UZ)
            let mut uz = vec![0.0; nu * nz];
            for (idx, &m) in probs.iter().enumerate() {
                let z = idx % nz;
                let u = idx / (nx * ny * nz);
                uz[u * nz + z] += m;
            }
            Ok(entropy_of(probs) - entropy_of(&uz))
        }
        DecodingMetric::MaximumLikelihood(w) => {
            if w.inputs != vec![nx, ny] || w.outputs != nz {
                return Err(Error::Shape("metric channel does not match V".into()));
            }
            let mut a = 0.0;
            for (idx, &m) in probs.iter().enumerate() {
                if m <= 0.0 {
                    continue;
                }
                let z = idx % nz;
                let y = (idx / nz) % ny;
                let x = (idx / (nz * ny)) % nx;
                let p = w.w2(z, x, y);
                if p <= 0.0 {
                    return Ok(f64::INFINITY);
                }
                a -= m * p.log2();
            }
            Ok(a)
        }
        DecodingMetric::Custom(f) => Ok(f(sizes, probs)),
        DecodingMetric::MinimumEntropy => {
            Err(Error::Invalid("minimum-entropy is a point-to-point metric".into()))
        }
    }
}

fn p2p_metric_from_counts(
    metric: &DecodingMetric,
    counts: &[u64],
    nx: usize,
    ny: usize,
    n: usize,
) -> Result<f64, Error> {
    let nf = n as f64;
    match metric {
        DecodingMetric::MaximumLikelihood(w) => {
            let mut a = 0.0;
            for x in 0..nx {
                for y in 0..ny {
                    let c = counts[x * ny + y];
                    if c == 0 {
                        continue;
                    }
                    let p = w.w(y, x);
                    if p <= 0.0 {
                        return Ok(f64::INFINITY);
                    }
                    a -= c as f64 / nf * p.log2();
                }
            }
            Ok(a)
        }
        DecodingMetric::MinimumEntropy => {
            // H(Y|X) = H(XY) - H(X), from exact counts
            let joint: Vec<f64> = counts.iter().map(|&c| c as f64 / nf).collect();
            let mut px = vec![0.0; nx];
            for x in 0..nx {
                for y in 0..ny {
                    px[x] += joint[x * ny + y];
                }
            }
            Ok(entropy_of(&joint) - entropy_of(&px))
        }
        DecodingMetric::Custom(f) => {
            let joint: Vec<f64> = counts.iter().map(|&c| c as f64 / nf).collect();
            Ok(f(&[nx, ny], &joint))
        }
        DecodingMetric::MinimumEquivocation => {
            Err(Error::Invalid("minimum-equivocation is a MAC metric".into()))
        }
    }
}

/// Strict-minimizer selection with the tie window; `Error` on any tie.
fn strict_argmin(values: &[f64]) -> Decision {
    debug_assert!(!values.is_empty());
    if values.len() == 1 {
        return Decision::Index(0);
    }
    let mut best = 0usize;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    if !values[best].is_finite() {
        return Decision::Error;
    }
    let tol = TIE_TOL * values[best].abs().max(1.0);
    let ties = values
        .iter()
        .enumerate()
        .filter(|&(i, &v)| i != best && v <= values[best] + tol)
        .count();
    if ties > 0 {
        Decision::Error
    } else {
        Decision::Index(best)
    }
}

/// Decode a received word against a constant-composition code.
///
/// Returns the index of the unique strict metric minimizer, or
/// `Decision::Error` when two or more codewords tie at the minimum.
pub fn decode_p2p(
    metric: &DecodingMetric,
    nx: usize,
    ny: usize,
    code: &[Vec<u8>],
    y: &[u8],
) -> Result<Decision, Error> {
    if code.is_empty() {
        return Err(Error::Invalid("empty code".into()));
    }
    let n = y.len();
    if code.iter().any(|w| w.len() != n) {
        return Err(Error::Shape("codeword/received length mismatch".into()));
    }
    let mut values = Vec::with_capacity(code.len());
    let mut counts = vec![0u64; nx * ny];
    for word in code {
        counts.fill(0);
        for t in 0..n {
            counts[word[t] as usize * ny + y[t] as usize] += 1;
        }
        values.push(p2p_metric_from_counts(metric, &counts, nx, ny, n)?);
    }
    Ok(strict_argmin(&values))
}

/// Decode a received MAC word against a pair of codebooks sharing the
/// time-sharing word `u`. Returns the unique strict minimizer over all
/// (i, j) pairs, else `Decision::Error`.
pub fn decode_mac(
    metric: &DecodingMetric,
    nu: usize,
    nx: usize,
    ny: usize,
    nz: usize,
    u: &[u8],
    code_x: &[Vec<u8>],
    code_y: &[Vec<u8>],
    z: &[u8],
) -> Result<Decision, Error> {
    if code_x.is_empty() || code_y.is_empty() {
        return Err(Error::Invalid("empty codebook".into()));
    }
    let n = z.len();
    if u.len() != n
        || code_x.iter().any(|w| w.len() != n)
        || code_y.iter().any(|w| w.len() != n)
    {
        return Err(Error::Shape("word length mismatch".into()));
    }
    let nf = n as f64;
    let cell = |uu: usize, x: usize, yy: usize, zz: usize| ((uu * nx + x) * ny + yy) * nz + zz;
    let mut values = Vec::with_capacity(code_x.len() * code_y.len());
    let mut probs = vec![0.0f64; nu * nx * ny * nz];
    for xw in code_x {
        for yw in code_y {
            probs.fill(0.0);
            for t in 0..n {
                probs[cell(u[t] as usize, xw[t] as usize, yw[t] as usize, z[t] as usize)] +=
                    1.0 / nf;
            }
            values.push(evaluate_mac_raw(metric, &[nu, nx, ny, nz], &probs)?);
        }
    }
    match strict_argmin(&values) {
        Decision::Index(k) => Ok(Decision::Pair(k / code_y.len(), k % code_y.len())),
        other => Ok(other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Axis;

    #[test]
    fn ml_metric_reduces_to_conditional_entropy_at_v_eq_w() {
        let w = Channel::bsc(0.1);
        let p = [0.5, 0.5];
        let v = vec![vec![0.9, 0.1], vec![0.1, 0.9]];
        let m = DecodingMetric::MaximumLikelihood(w);
        let a = evaluate_p2p(&m, &p, &v).unwrap();
        // D vanishes, so α = H(W|P)
        let h = 0.5 * entropy_of(&[0.9, 0.1]) + 0.5 * entropy_of(&[0.1, 0.9]);
        assert!((a - h).abs() < 1e-12);
    }

    #[test]
    fn min_entropy_deterministic_v_is_zero() {
        let p = [0.25, 0.75];
        let v = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(evaluate_p2p(&DecodingMetric::MinimumEntropy, &p, &v).unwrap(), 0.0);
    }

    #[test]
    fn ml_off_support_is_infinite() {
        let w = Channel::dmc(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let p = [0.5, 0.5];
        let v = vec![vec![0.5, 0.5], vec![0.0, 1.0]];
        let a = evaluate_p2p(&DecodingMetric::MaximumLikelihood(w), &p, &v).unwrap();
        assert!(a.is_infinite());
    }

    #[test]
    fn equivocation_cases() {
        // (X,Y) a deterministic function of (Z,U) -> 0
        let axes = vec![
            Axis::new("U", 1),
            Axis::new("X", 2),
            Axis::new("Y", 2),
            Axis::new("Z", 2),
        ];
        // X = Y = Z, uniform: given (z,u), (x,y) is fixed.
        let mut mass = vec![0.0; 8];
        mass[0] = 0.5; // x=0,y=0,z=0
        mass[7] = 0.5; // x=1,y=1,z=1
        let d = JointDist::new(axes.clone(), mass).unwrap();
        let a = evaluate_mac(&DecodingMetric::MinimumEquivocation, &d).unwrap();
        assert!(a.abs() < 1e-12);

        // (X,Y) independent of (Z,U): equivocation equals H(XY)
        let mut mass2 = Vec::with_capacity(8);
        let pxy = [0.1, 0.2, 0.3, 0.4];
        for xy in 0..4 {
            for _z in 0..2 {
                mass2.push(pxy[xy] * 0.5);
            }
        }
        let d2 = JointDist::new(axes, mass2).unwrap();
        let a2 = evaluate_mac(&DecodingMetric::MinimumEquivocation, &d2).unwrap();
        assert!((a2 - entropy_of(&pxy)).abs() < 1e-12);
    }

    #[test]
    fn generic_equivocation_matches_chain_rule() {
        let axes = vec![
            Axis::new("U", 2),
            Axis::new("X", 2),
            Axis::new("Y", 2),
            Axis::new("Z", 2),
        ];
        let mut mass: Vec<f64> = (1..=16).map(|i| i as f64).collect();
        let s: f64 = mass.iter().sum();
        for m in &mut mass {
            *m /= s;
        }
        let d = JointDist::new(axes, mass).unwrap();
        let a = evaluate_mac(&DecodingMetric::MinimumEquivocation, &d).unwrap();
        let href = d.conditional_entropy(&["X", "Y"], &["Z", "U"]).unwrap();
        assert!((a - href).abs() < 1e-12);
    }

    #[test]
    fn decode_single_codeword_always_wins() {
        let m = DecodingMetric::MinimumEntropy;
        let code = vec![vec![0, 1, 0]];
        assert_eq!(decode_p2p(&m, 2, 2, &code, &[1, 1, 1]).unwrap(), Decision::Index(0));
    }

    #[test]
    fn identical_codewords_always_tie() {
        let m = DecodingMetric::MaximumLikelihood(Channel::bsc(0.1));
        let code = vec![vec![0, 1, 0], vec![0, 1, 0]];
        for y in [[0, 0, 0], [1, 1, 1], [0, 1, 0]] {
            assert_eq!(decode_p2p(&m, 2, 2, &code, &y).unwrap(), Decision::Error);
        }
    }

    #[test]
    fn bsc_ml_is_hamming_minimization() {
        // {000, 111} at y = 001 decodes to 000
        let m = DecodingMetric::MaximumLikelihood(Channel::bsc(0.1));
        let code = vec![vec![0, 0, 0], vec![1, 1, 1]];
        assert_eq!(decode_p2p(&m, 2, 2, &code, &[0, 0, 1]).unwrap(), Decision::Index(0));
        assert_eq!(decode_p2p(&m, 2, 2, &code, &[1, 0, 1]).unwrap(), Decision::Index(1));
    }

    #[test]
    fn ml_decoding_matches_exhaustive_likelihood() {
        // all words of composition (2,2) at n = 4, compare against direct
        // W^n(y|x) comparison on every y
        let ch = Channel::dmc(vec![vec![0.7, 0.3], vec![0.2, 0.8]]).unwrap();
        let m = DecodingMetric::MaximumLikelihood(ch.clone());
        let words: Vec<Vec<u8>> = (0..16u8)
            .map(|b| (0..4).map(|t| (b >> t) & 1).collect::<Vec<u8>>())
            .filter(|w| w.iter().filter(|&&s| s == 1).count() == 2)
            .collect();
        let code: Vec<Vec<u8>> = words.into_iter().take(4).collect();
        for yi in 0..16u8 {
            let y: Vec<u8> = (0..4).map(|t| (yi >> t) & 1).collect();
            let dec = decode_p2p(&m, 2, 2, &code, &y).unwrap();
            // exhaustive likelihoods
            let lik: Vec<f64> = code
                .iter()
                .map(|w| {
                    (0..4)
                        .map(|t| ch.w(y[t] as usize, w[t] as usize))
                        .product::<f64>()
                })
                .collect();
            let mut best = 0;
            for i in 1..lik.len() {
                if lik[i] > lik[best] {
                    best = i;
                }
            }
            let ties = lik
                .iter()
                .enumerate()
                .filter(|&(i, &v)| i != best && v >= lik[best] * (1.0 - 1e-9))
                .count();
            let expect = if ties > 0 { Decision::Error } else { Decision::Index(best) };
            assert_eq!(dec, expect, "y = {y:?}");
        }
    }

    #[test]
    fn metric_depends_only_on_joint_type() {
        // permuting symbol positions of all words and the received word
        // simultaneously leaves every decision unchanged
        let ch = Channel::dmc(vec![vec![0.8, 0.2], vec![0.3, 0.7]]).unwrap();
        let m = DecodingMetric::MaximumLikelihood(ch);
        let code = vec![vec![0, 0, 1, 1, 0], vec![0, 1, 0, 1, 0], vec![1, 1, 0, 0, 0]];
        let perm = [3usize, 0, 4, 1, 2];
        let apply = |w: &[u8]| -> Vec<u8> { perm.iter().map(|&t| w[t]).collect() };
        let permuted: Vec<Vec<u8>> = code.iter().map(|w| apply(w)).collect();
        for yi in 0..32u8 {
            let y: Vec<u8> = (0..5).map(|t| (yi >> t) & 1).collect();
            let a = decode_p2p(&m, 2, 2, &code, &y).unwrap();
            let b = decode_p2p(&m, 2, 2, &permuted, &apply(&y)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn custom_metric_shift_invariance() {
        let base: MetricFn = Arc::new(|_sizes: &[usize], p: &[f64]| {
            p.iter().enumerate().map(|(i, &v)| v * (i as f64 + 0.3)).sum()
        });
        let shifted: MetricFn = Arc::new(move |_sizes: &[usize], p: &[f64]| {
            7.5 + p.iter().enumerate().map(|(i, &v)| v * (i as f64 + 0.3)).sum::<f64>()
        });
        let m1 = DecodingMetric::Custom(base);
        let m2 = DecodingMetric::Custom(shifted);
        let code = vec![vec![0, 0, 1, 1], vec![0, 1, 0, 1], vec![1, 1, 0, 0]];
        for yi in 0..16u8 {
            let y: Vec<u8> = (0..4).map(|t| (yi >> t) & 1).collect();
            assert_eq!(
                decode_p2p(&m1, 2, 2, &code, &y).unwrap(),
                decode_p2p(&m2, 2, 2, &code, &y).unwrap()
            );
        }
    }

    #[test]
    fn mac_decode_smallest_cases() {
        let ch = Channel::mac(
            2,
            2,
            vec![
                vec![0.9, 0.1],
                vec![0.1, 0.9],
                vec![0.1, 0.9],
                vec![0.5, 0.5],
            ],
        )
        .unwrap();
        let m = DecodingMetric::MinimumEquivocation;
        let u = vec![0u8; 4];
        // single pair decodes to (0,0)
        let d = decode_mac(
            &m,
            1,
            2,
            2,
            2,
            &u,
            &[vec![0, 1, 0, 1]],
            &[vec![0, 0, 1, 1]],
            &[0, 1, 1, 0],
        )
        .unwrap();
        assert_eq!(d, Decision::Pair(0, 0));
        // duplicated x-codeword ties for every z
        let d2 = decode_mac(
            &m,
            1,
            2,
            2,
            2,
            &u,
            &[vec![0, 1, 0, 1], vec![0, 1, 0, 1]],
            &[vec![0, 0, 1, 1]],
            &[0, 1, 1, 0],
        )
        .unwrap();
        assert_eq!(d2, Decision::Error);
        let _ = ch;
    }

    #[test]
    fn mac_decode_two_by_two_exhaustive_reference() {
        // 2x2 code on a binary MAC: compare against a direct evaluation of
        // the four metric values
        let m = DecodingMetric::MinimumEquivocation;
        let u = vec![0u8, 0, 1, 1];
        let cx = vec![vec![0, 1, 0, 1], vec![1, 0, 0, 1]];
        let cy = vec![vec![0, 0, 1, 1], vec![1, 0, 1, 0]];
        let z = vec![0u8, 1, 0, 1];
        let got = decode_mac(&m, 2, 2, 2, 2, &u, &cx, &cy, &z).unwrap();
        let mut vals = Vec::new();
        for xw in &cx {
            for yw in &cy {
                let mut probs = vec![0.0; 16];
                for t in 0..4 {
                    let idx = ((u[t] as usize * 2 + xw[t] as usize) * 2 + yw[t] as usize) * 2
                        + z[t] as usize;
                    probs[idx] += 0.25;
                }
                vals.push(evaluate_mac_raw(&m, &[2, 2, 2, 2], &probs).unwrap());
            }
        }
        let mut best = 0;
        for i in 1..4 {
            if vals[i] < vals[best] {
                best = i;
            }
        }
        let ties = vals
            .iter()
            .enumerate()
            .filter(|&(i, &v)| i != best && v <= vals[best] + 1e-12)
            .count();
        let expect = if ties > 0 {
            Decision::Error
        } else {
            Decision::Pair(best / 2, best % 2)
        };
        assert_eq!(got, expect);
    }
}
