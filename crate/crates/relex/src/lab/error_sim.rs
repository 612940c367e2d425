//! Exact and Monte-Carlo error probabilities of explicit codes under
//! α-decoding (ties charged as errors), and the desk-scale empirical
//! exponent regression.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::mac_lab::MacCode;
use super::p2p::P2PCode;
use super::split_seed;
use crate::channel::Channel;
use crate::metric::{decode_mac, decode_p2p, Decision, DecodingMetric};
use crate::Error;

/// Exhaustive average error probability of a point-to-point code: sum over
/// every channel output of the transition probability times the error
/// indicator, averaged over messages. Refuses when |Y|^n exceeds the cap.
pub fn exact_error_probability(
    code: &P2PCode,
    channel: &Channel,
    metric: &DecodingMetric,
    output_cap: usize,
) -> Result<f64, Error> {
    let n = code.n;
    let ny = channel.outputs;
    let total = (ny as f64).powi(n as i32);
    if total > output_cap as f64 {
        return Err(Error::CapExceeded(format!(
            "{ny}^{n} outputs exceed cap {output_cap}; use the Monte-Carlo path"
        )));
    }
    let m = code.len();
    let mut y = vec![0u8; n];
    let mut err = 0.0f64;
    loop {
        let decision = decode_p2p(metric, code.nx, ny, &code.words, &y)?;
        for (i, word) in code.words.iter().enumerate() {
            if decision == Decision::Index(i) {
                continue;
            }
            let mut p = 1.0;
            for t in 0..n {
                p *= channel.w(y[t] as usize, word[t] as usize);
                if p == 0.0 {
                    break;
                }
            }
            err += p;
        }
        // odometer
        let mut t = n;
        loop {
            if t == 0 {
                return Ok(err / m as f64);
            }
            t -= 1;
            y[t] += 1;
            if (y[t] as usize) < ny {
                break;
            }
            y[t] = 0;
        }
    }
}

/// Exhaustive average error probability of a two-user code.
pub fn exact_error_probability_mac(
    code: &MacCode,
    channel: &Channel,
    metric: &DecodingMetric,
    output_cap: usize,
) -> Result<f64, Error> {
    let n = code.n;
    let nz = channel.outputs;
    let total = (nz as f64).powi(n as i32);
    if total > output_cap as f64 {
        return Err(Error::CapExceeded(format!(
            "{nz}^{n} outputs exceed cap {output_cap}; use the Monte-Carlo path"
        )));
    }
    let pairs = (code.code_x.len() * code.code_y.len()) as f64;
    let mut z = vec![0u8; n];
    let mut err = 0.0f64;
    loop {
        let decision = decode_mac(
            metric, code.nu, code.nx, code.ny, nz, &code.u, &code.code_x, &code.code_y, &z,
        )?;
        for (i, xw) in code.code_x.iter().enumerate() {
            for (j, yw) in code.code_y.iter().enumerate() {
                if decision == Decision::Pair(i, j) {
                    continue;
                }
                let mut p = 1.0;
                for t in 0..n {
                    p *= channel.w2(z[t] as usize, xw[t] as usize, yw[t] as usize);
                    if p == 0.0 {
                        break;
                    }
                }
                err += p;
            }
        }
        let mut t = n;
        loop {
            if t == 0 {
                return Ok(err / pairs);
            }
            t -= 1;
            z[t] += 1;
            if (z[t] as usize) < nz {
                break;
            }
            z[t] = 0;
        }
    }
}

/// Monte-Carlo estimate with a Wilson 95% interval.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub p_hat: f64,
    pub lo: f64,
    pub hi: f64,
    pub trials: u64,
    pub errors: u64,
}

fn wilson(errors: u64, trials: u64) -> (f64, f64) {
    let z = 1.959963984540054f64;
    let nf = trials as f64;
    let p = errors as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Unbiased Monte-Carlo estimate of the average error probability:
/// uniform message, channel draw, decode. Deterministic given the seed.
pub fn monte_carlo_error(
    code: &P2PCode,
    channel: &Channel,
    metric: &DecodingMetric,
    trials: u64,
    seed: u64,
) -> Result<McEstimate, Error> {
    if trials == 0 {
        return Err(Error::Invalid("trials must be >= 1".into()));
    }
    let n = code.n;
    let ny = channel.outputs;
    let chunk = 1024u64;
    let chunks: Vec<u64> = (0..trials.div_ceil(chunk)).collect();
    let errs: Vec<u64> = chunks
        .par_iter()
        .map(|&c| {
            let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, c));
            let lo = c * chunk;
            let hi = (lo + chunk).min(trials);
            let mut e = 0u64;
            let mut y = vec![0u8; n];
            for _ in lo..hi {
                let i = rng.gen_range(0..code.len());
                for t in 0..n {
                    let x = code.words[i][t] as usize;
                    let u: f64 = rng.gen();
                    let mut acc = 0.0;
                    let mut sym = ny - 1;
                    for yy in 0..ny {
                        acc += channel.w(yy, x);
                        if u < acc {
                            sym = yy;
                            break;
                        }
                    }
                    y[t] = sym as u8;
                }
                match decode_p2p(metric, code.nx, ny, &code.words, &y).unwrap() {
                    Decision::Index(k) if k == i => {}
                    _ => e += 1,
                }
            }
            e
        })
        .collect();
    let errors: u64 = errs.iter().sum();
    let p_hat = errors as f64 / trials as f64;
    let (lo, hi) = wilson(errors, trials);
    Ok(McEstimate { p_hat, lo, hi, trials, errors })
}

/// Monte-Carlo estimate for a two-user code.
pub fn monte_carlo_error_mac(
    code: &MacCode,
    channel: &Channel,
    metric: &DecodingMetric,
    trials: u64,
    seed: u64,
) -> Result<McEstimate, Error> {
    if trials == 0 {
        return Err(Error::Invalid("trials must be >= 1".into()));
    }
    let n = code.n;
    let nz = channel.outputs;
    let chunk = 512u64;
    let chunks: Vec<u64> = (0..trials.div_ceil(chunk)).collect();
    let errs: Vec<u64> = chunks
        .par_iter()
        .map(|&c| {
            let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, c));
            let lo = c * chunk;
            let hi = (lo + chunk).min(trials);
            let mut e = 0u64;
            let mut z = vec![0u8; n];
            for _ in lo..hi {
                let i = rng.gen_range(0..code.code_x.len());
                let j = rng.gen_range(0..code.code_y.len());
                for t in 0..n {
                    let x = code.code_x[i][t] as usize;
                    let y = code.code_y[j][t] as usize;
                    let u: f64 = rng.gen();
                    let mut acc = 0.0;
                    let mut sym = nz - 1;
                    for zz in 0..nz {
                        acc += channel.w2(zz, x, y);
                        if u < acc {
                            sym = zz;
                            break;
                        }
                    }
                    z[t] = sym as u8;
                }
                match decode_mac(
                    metric, code.nu, code.nx, code.ny, nz, &code.u, &code.code_x, &code.code_y,
                    &z,
                )
                .unwrap()
                {
                    Decision::Pair(a, b) if a == i && b == j => {}
                    _ => e += 1,
                }
            }
            e
        })
        .collect();
    let errors: u64 = errs.iter().sum();
    let p_hat = errors as f64 / trials as f64;
    let (lo, hi) = wilson(errors, trials);
    Ok(McEstimate { p_hat, lo, hi, trials, errors })
}

/// Error band used for the per-code typicality diagnostic:
/// [2^{−n(e_tl + 4δ)}, 2^{−n(e_t − 3δ)}].
#[derive(Debug, Clone, Copy)]
pub struct TypicalityBand {
    pub e_t: f64,
    pub e_tl: f64,
    pub delta: f64,
}

#[derive(Debug, Clone)]
pub struct EmpiricalReport {
    /// (n, mean error, codes, fraction of codes inside the typicality band)
    pub per_n: Vec<(usize, f64, usize, f64)>,
    /// least-squares slope of −log2(mean error) against n
    pub slope: f64,
    pub intercept: f64,
}

/// Sample `codes_per_n` constant-composition codes at each blocklength,
/// measure mean error (exhaustively below the cap, pooled Monte Carlo
/// above it), and regress −log2(mean error) on n. A zero measured error
/// yields an infinite slope sentinel.
#[allow(clippy::too_many_arguments)]
pub fn empirical_exponent(
    channel: &Channel,
    metric: &DecodingMetric,
    composition: &[f64],
    rate: f64,
    n_list: &[usize],
    codes_per_n: usize,
    seed: u64,
    mc_trials: u64,
    output_cap: usize,
    band: Option<TypicalityBand>,
) -> Result<EmpiricalReport, Error> {
    let nx = channel.inputs[0];
    let mut per_n = Vec::new();
    for (ni, &n) in n_list.iter().enumerate() {
        let m = ((n as f64 * rate).exp2().round() as usize).max(2);
        let comp = crate::types::round_to_type(composition, n as u64);
        let results: Vec<(f64, bool)> = (0..codes_per_n)
            .into_par_iter()
            .map(|c| {
                let code_seed = split_seed(seed, (ni * codes_per_n + c) as u64);
                let code = super::sample_p2p_code(nx, &comp, m, code_seed);
                let e = if (channel.outputs as f64).powi(n as i32) <= output_cap as f64 {
                    exact_error_probability(&code, channel, metric, output_cap).unwrap()
                } else {
                    monte_carlo_error(&code, channel, metric, mc_trials, split_seed(code_seed, 1))
                        .unwrap()
                        .p_hat
                };
                let inside = band
                    .map(|b| {
                        let lo = (-(n as f64) * (b.e_tl + 4.0 * b.delta)).exp2();
                        let hi = (-(n as f64) * (b.e_t - 3.0 * b.delta)).exp2();
                        e >= lo && e <= hi.min(1.0)
                    })
                    .unwrap_or(false);
                (e, inside)
            })
            .collect();
        let mean = results.iter().map(|(e, _)| e).sum::<f64>() / codes_per_n as f64;
        let frac = results.iter().filter(|(_, i)| *i).count() as f64 / codes_per_n as f64;
        per_n.push((n, mean, codes_per_n, frac));
    }
    if per_n.iter().any(|&(_, e, _, _)| e <= 0.0) {
        return Ok(EmpiricalReport { per_n, slope: f64::INFINITY, intercept: 0.0 });
    }
    // least squares of y = −log2(mean) on n
    let k = per_n.len() as f64;
    let sx: f64 = per_n.iter().map(|&(n, _, _, _)| n as f64).sum();
    let sy: f64 = per_n.iter().map(|&(_, e, _, _)| -e.log2()).sum();
    let sxx: f64 = per_n.iter().map(|&(n, _, _, _)| (n * n) as f64).sum();
    let sxy: f64 = per_n.iter().map(|&(n, e, _, _)| -(n as f64) * e.log2()).sum();
    let slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    let intercept = (sy - slope * sx) / k;
    Ok(EmpiricalReport { per_n, slope, intercept })
}
