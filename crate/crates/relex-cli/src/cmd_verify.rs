//! `relex verify`: ensemble checks of the packing, sandwich, expurgation
//! and typicality machinery. Emits one row per check with a pass/flag
//! verdict and the margin in bits; small-blocklength deviations from the
//! asymptotic bands flag rather than fail (exit 4 only under --strict).

use std::collections::BTreeMap;

use rayon::prelude::*;

use relex::dmc::{compute_dmc_families, DmcExponentRequest, Family};
use relex::lab::{
    self, mac_expurgate, sample_mac_code, sample_p2p_code, MacPacking, TypicalityBand,
};
use relex::types::{enumerate_types, MarginalConstraint, RationalType};
use relex::SolverConfig;

use crate::cmd_dmc::parse_metric;
use crate::manifest::{sig12, RunManifest};
use crate::{load_channel, CliError, CsvOut, VerifyArgs};

struct Emitter {
    out: CsvOut,
    what: String,
    digest: String,
    flags: usize,
}

impl Emitter {
    fn row(&mut self, quantity: &str, value: f64, bound: f64, direction: &str, pass: bool) {
        if !pass {
            self.flags += 1;
        }
        let margin = match direction {
            "<=" => bound - value,
            ">=" => value - bound,
            _ => f64::NAN,
        };
        let line = format!(
            "{},{},{},{},{},{},{},{}",
            self.what,
            quantity,
            sig12(value),
            sig12(bound),
            direction,
            if pass { "pass" } else { "flag" },
            sig12(margin),
            self.digest
        );
        self.out.push(line);
    }
}

fn key_str(counts: &[u64]) -> String {
    counts
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join("")
}

fn packing_p2p(args: &VerifyArgs, em: &mut Emitter) -> Result<(), CliError> {
    let n = args.n;
    let rate = args.rate;
    let delta = args.delta;
    let m = if args.m > 0 {
        args.m
    } else {
        ((n as f64 * rate).exp2().round() as usize).max(2)
    };
    let comp = relex::types::round_to_type(&[0.5, 0.5], n as u64);
    // aggregate ordered-pair and ordered-triple censuses over the samples
    let per_code: Vec<(BTreeMap<Vec<u64>, u64>, BTreeMap<Vec<u64>, u64>)> = (0..args.samples)
        .into_par_iter()
        .map(|s| {
            let code = sample_p2p_code(2, &comp, m, lab::split_seed(args.seed, s as u64));
            let pairs: BTreeMap<Vec<u64>, u64> =
                lab::pair_type_census(&code).into_iter().collect();
            let mut triples: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
            for i in 0..m {
                for j in 0..m {
                    if j == i {
                        continue;
                    }
                    for k in 0..m {
                        if k == i || k == j {
                            continue;
                        }
                        let t = RationalType::of_sequences(
                            &[&code.words[i], &code.words[j], &code.words[k]],
                            &[2, 2, 2],
                        )
                        .unwrap();
                        *triples.entry(t.counts).or_insert(0) += 1;
                    }
                }
            }
            (pairs, triples)
        })
        .collect();
    let mut pair_sum: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
    let mut triple_sum: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
    for (p, t) in per_code {
        for (k, v) in p {
            *pair_sum.entry(k).or_insert(0) += v;
        }
        for (k, v) in t {
            *triple_sum.entry(k).or_insert(0) += v;
        }
    }
    let norm = (args.samples * m) as f64;
    // every pair type with both marginals equal to the composition
    let constraints = vec![
        MarginalConstraint { mask: 0b01, counts: comp.clone() },
        MarginalConstraint { mask: 0b10, counts: comp.clone() },
    ];
    for v in enumerate_types(&[2, 2], n as u64, &constraints) {
        let mean = pair_sum.get(&v.counts).copied().unwrap_or(0) as f64 / norm;
        let i = lab::pair_type_mi(&v.counts, 2, n as u64);
        let lo = (n as f64 * (rate - i - delta)).exp2();
        let hi = (n as f64 * (rate - i + delta)).exp2();
        em.row(&format!("pi[{}]", key_str(&v.counts)), mean, lo, ">=", mean >= lo);
        em.row(&format!("pi[{}]", key_str(&v.counts)), mean, hi, "<=", mean <= hi);
    }
    // realized triple types against the second-order cap
    for (counts, &cnt) in &triple_sum {
        let mean = cnt as f64 / norm;
        let t = RationalType::new(vec![2, 2, 2], counts.clone(), n as u64).unwrap();
        let d = t.to_dist(&["X", "Xt", "Xh"]).unwrap();
        let i1 = d.mutual_information(&["X"], &["Xt"], &[]).unwrap();
        let i2 = d.mutual_information(&["Xh"], &["X", "Xt"], &[]).unwrap();
        let cap = (n as f64 * (2.0 * rate - i1 - i2 + 4.0 * delta)).exp2();
        em.row(
            &format!("lambda[{}]", key_str(counts)),
            mean,
            cap,
            "<=",
            mean <= cap,
        );
    }
    Ok(())
}

fn packing_mac(args: &VerifyArgs, em: &mut Emitter) -> Result<(), CliError> {
    let n = args.n;
    let nu = args.u_size;
    if n % nu != 0 {
        return Err(CliError::Input(format!("n = {n} must be divisible by u-size {nu}")));
    }
    let delta = args.delta;
    let rx = args.rx.unwrap_or((args.mx as f64).log2() / n as f64);
    let ry = args.ry.unwrap_or((args.my as f64).log2() / n as f64);
    let section = (n / nu) as u64;
    let u_counts = vec![section; nu];
    let x_cond: Vec<Vec<u64>> = (0..nu).map(|_| vec![section / 2, section - section / 2]).collect();
    let y_cond = x_cond.clone();
    // ensemble means of the four N's and three Λ's per realized type
    type Census = BTreeMap<Vec<u64>, u64>;
    let per_code: Vec<[Census; 4]> = (0..args.samples)
        .into_par_iter()
        .map(|s| {
            let code = sample_mac_code(
                nu,
                2,
                2,
                &u_counts,
                &x_cond,
                &y_cond,
                args.mx,
                args.my,
                lab::split_seed(args.seed ^ 0xabc, s as u64),
            )
            .unwrap();
            [
                lab::mac_n_census(&code, MacPacking::U).into_iter().collect(),
                lab::mac_n_census(&code, MacPacking::X).into_iter().collect(),
                lab::mac_n_census(&code, MacPacking::Y).into_iter().collect(),
                lab::mac_n_census(&code, MacPacking::XY).into_iter().collect(),
            ]
        })
        .collect();
    let classes = [MacPacking::U, MacPacking::X, MacPacking::Y, MacPacking::XY];
    let norm = (args.samples * args.mx * args.my) as f64;
    for (ci, class) in classes.iter().enumerate() {
        let mut sums: Census = BTreeMap::new();
        for cs in &per_code {
            for (k, v) in &cs[ci] {
                *sums.entry(k.clone()).or_insert(0) += v;
            }
        }
        let sizes: Vec<usize> = match class {
            MacPacking::U => vec![nu, 2, 2],
            MacPacking::X => vec![nu, 2, 2, 2],
            MacPacking::Y => vec![nu, 2, 2, 2],
            MacPacking::XY => vec![nu, 2, 2, 2, 2],
        };
        let names: Vec<&str> = match class {
            MacPacking::U => vec!["U", "X", "Y"],
            MacPacking::X => vec!["U", "X", "Y", "Xt"],
            MacPacking::Y => vec!["U", "X", "Y", "Yt"],
            MacPacking::XY => vec!["U", "X", "Y", "Xt", "Yt"],
        };
        let (lo_mult, hi_mult) = match class {
            MacPacking::U => (1.0, 2.0),
            MacPacking::X | MacPacking::Y => (3.0, 4.0),
            MacPacking::XY => (4.0, 4.0),
        };
        // worst margins over realized types, plus per-type flags
        let mut worst_low: Option<(String, f64, f64)> = None;
        let mut worst_high: Option<(String, f64, f64)> = None;
        let mut low_flags = 0usize;
        let mut high_flags = 0usize;
        let total = sums.len();
        for (counts, &cnt) in &sums {
            let mean = cnt as f64 / norm;
            let t = RationalType::new(sizes.clone(), counts.clone(), n as u64).unwrap();
            let dist = t.to_dist(&names).unwrap();
            let fv = relex::mac::f_functions(&dist, rx, ry);
            let f = match class {
                MacPacking::U => fv.f_u.unwrap(),
                MacPacking::X => fv.f_x.unwrap(),
                MacPacking::Y => {
                    // the tilde axis is named Yt here; F_Y applies
                    fv.f_y.unwrap()
                }
                MacPacking::XY => fv.f_xy.unwrap(),
            };
            let lo = (-(n as f64) * (f + lo_mult * delta)).exp2();
            let hi = (-(n as f64) * (f - hi_mult * delta)).exp2();
            if mean < lo {
                low_flags += 1;
            }
            if mean > hi {
                high_flags += 1;
            }
            let lm = mean.log2() - lo.log2();
            let hm = hi.log2() - mean.log2();
            if worst_low.as_ref().map(|(_, m, _)| lm < *m).unwrap_or(true) {
                worst_low = Some((key_str(counts), lm, lo));
            }
            if worst_high.as_ref().map(|(_, m, _)| hm < *m).unwrap_or(true) {
                worst_high = Some((key_str(counts), hm, hi));
            }
        }
        let cname = match class {
            MacPacking::U => "N_U",
            MacPacking::X => "N_X",
            MacPacking::Y => "N_Y",
            MacPacking::XY => "N_XY",
        };
        em.row(
            &format!("{cname}.realized-types-within-lower-band({total} types)"),
            (total - low_flags) as f64,
            total as f64,
            ">=",
            low_flags == 0,
        );
        em.row(
            &format!("{cname}.realized-types-within-upper-band({total} types)"),
            (total - high_flags) as f64,
            total as f64,
            ">=",
            high_flags == 0,
        );
    }
    // second-order caps: ensemble means of Λ_X, Λ_Y, Λ_XY per realized
    // type against 2^{−n(E_S − 4δ)} (X, Y) and 2^{−n(E_S − 6δ)} (XY)
    let lam_censuses: Vec<[Census; 3]> = (0..args.samples)
        .into_par_iter()
        .map(|s| {
            let code = sample_mac_code(
                nu,
                2,
                2,
                &u_counts,
                &x_cond,
                &y_cond,
                args.mx,
                args.my,
                lab::split_seed(args.seed ^ 0xabc, s as u64),
            )
            .unwrap();
            let u = &code.u[..];
            let mut cs: [Census; 3] = [BTreeMap::new(), BTreeMap::new(), BTreeMap::new()];
            for (i, xw) in code.code_x.iter().enumerate() {
                for (j, yw) in code.code_y.iter().enumerate() {
                    for (k, xk) in code.code_x.iter().enumerate() {
                        if k == i {
                            continue;
                        }
                        for (k2, xk2) in code.code_x.iter().enumerate() {
                            if k2 == i || k2 == k {
                                continue;
                            }
                            let t = RationalType::of_sequences(
                                &[u, xw, yw, xk, xk2],
                                &[nu, 2, 2, 2, 2],
                            )
                            .unwrap();
                            *cs[0].entry(t.counts).or_insert(0) += 1;
                        }
                    }
                    for (l, yl) in code.code_y.iter().enumerate() {
                        if l == j {
                            continue;
                        }
                        for (l2, yl2) in code.code_y.iter().enumerate() {
                            if l2 == j || l2 == l {
                                continue;
                            }
                            let t = RationalType::of_sequences(
                                &[u, xw, yw, yl, yl2],
                                &[nu, 2, 2, 2, 2],
                            )
                            .unwrap();
                            *cs[1].entry(t.counts).or_insert(0) += 1;
                        }
                    }
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
                                    let t = RationalType::of_sequences(
                                        &[u, xw, yw, xk, yl, xk2, yl2],
                                        &[nu, 2, 2, 2, 2, 2, 2],
                                    )
                                    .unwrap();
                                    *cs[2].entry(t.counts).or_insert(0) += 1;
                                }
                            }
                        }
                    }
                }
            }
            cs
        })
        .collect();
    let lam_names = ["Lambda_X", "Lambda_Y", "Lambda_XY"];
    let lam_axis_names: [Vec<&str>; 3] = [
        vec!["U", "X", "Y", "Xt", "Xh"],
        vec!["U", "X", "Y", "Yt", "Yh"],
        vec!["U", "X", "Y", "Xt", "Yt", "Xh", "Yh"],
    ];
    let lam_slack = [4.0, 4.0, 6.0];
    for idx in 0..3 {
        let mut sums: Census = BTreeMap::new();
        for cs in &lam_censuses {
            for (k, v) in &cs[idx] {
                *sums.entry(k.clone()).or_insert(0) += v;
            }
        }
        let sizes: Vec<usize> = lam_axis_names[idx].iter().map(|_| 2).collect();
        let sizes = {
            let mut s = sizes;
            s[0] = nu;
            s
        };
        let total = sums.len();
        let mut flags = 0usize;
        let mut worst = f64::NEG_INFINITY;
        for (counts, &cnt) in &sums {
            let mean = cnt as f64 / norm;
            let t = RationalType::new(sizes.clone(), counts.clone(), n as u64).unwrap();
            let dist = t.to_dist(&lam_axis_names[idx]).unwrap();
            let es = relex::mac::es_functions(&dist, rx, ry);
            let e_s = match idx {
                0 => es.es_x.unwrap(),
                1 => es.es_y.unwrap(),
                _ => es.es_xy.unwrap(),
            };
            let cap = (-(n as f64) * (e_s - lam_slack[idx] * delta)).exp2();
            let margin = mean.log2() - cap.log2();
            worst = worst.max(margin);
            if mean > cap {
                flags += 1;
            }
        }
        em.row(
            &format!("{}.realized-types-below-cap({total} types, worst margin {worst:.3})", lam_names[idx]),
            (total - flags) as f64,
            total as f64,
            ">=",
            flags == 0,
        );
    }
    Ok(())
}

fn sandwich(args: &VerifyArgs, em: &mut Emitter) -> Result<(), CliError> {
    let channel_path = args
        .channel
        .as_ref()
        .ok_or_else(|| CliError::Input("sandwich needs --channel".into()))?;
    let mut m_dummy = RunManifest::new("x", &[], 0);
    let channel = load_channel(channel_path, &mut m_dummy)?;
    let metric = parse_metric(&args.metric, &channel)?;
    let n = args.n;
    let m = if args.m > 0 { args.m } else { 3 };
    let comp = relex::types::round_to_type(&[0.5, 0.5], n as u64);
    let reports: Result<Vec<relex::lab::SandwichReport>, relex::Error> = (0..args.samples)
        .into_par_iter()
        .map(|s| {
            let code = sample_p2p_code(2, &comp, m, lab::split_seed(args.seed, s as u64));
            lab::sandwich_check_p2p(&code, &channel, &metric, 1 << 22)
        })
        .collect();
    let reports = reports.map_err(CliError::from)?;
    for (s, rep) in reports.iter().enumerate() {
        em.row(
            &format!("sandwich.lower[code{s}]"),
            rep.lower,
            rep.exact,
            "<=",
            rep.lower <= rep.exact + 1e-9,
        );
        em.row(
            &format!("sandwich.upper[code{s}]"),
            rep.exact,
            rep.upper,
            "<=",
            rep.exact <= rep.upper + 1e-9,
        );
    }
    Ok(())
}

fn expurgate_p2p_cmd(args: &VerifyArgs, em: &mut Emitter) -> Result<(), CliError> {
    let n = args.n;
    let m = if args.m > 0 {
        args.m
    } else {
        ((n as f64 * args.rate).exp2().round() as usize).max(2)
    };
    let comp = relex::types::round_to_type(&[0.5, 0.5], n as u64);
    for s in 0..args.samples {
        let code = sample_p2p_code(2, &comp, m, lab::split_seed(args.seed, s as u64));
        let (out, report) = lab::expurgate_p2p(&code, args.rate, args.delta);
        let kept_frac = out.len() as f64 / m as f64;
        em.row(
            &format!("expurgate-p2p.kept-fraction[code{s}]"),
            kept_frac,
            0.5,
            ">=",
            kept_frac >= 0.5 || !report.input_ok,
        );
        em.row(
            &format!("expurgate-p2p.caps[code{s}]"),
            report.worst_margin,
            0.0,
            "<=",
            report.per_word_caps_ok && report.packing_caps_ok,
        );
    }
    Ok(())
}

fn expurgate_mac_cmd(args: &VerifyArgs, em: &mut Emitter) -> Result<(), CliError> {
    let n = args.n;
    let nu = args.u_size;
    if n % nu != 0 {
        return Err(CliError::Input(format!("n = {n} must be divisible by u-size {nu}")));
    }
    let rx = args.rx.unwrap_or((args.mx as f64).log2() / n as f64);
    let ry = args.ry.unwrap_or((args.my as f64).log2() / n as f64);
    let section = (n / nu) as u64;
    let u_counts = vec![section; nu];
    let x_cond: Vec<Vec<u64>> = (0..nu).map(|_| vec![section / 2, section - section / 2]).collect();
    let y_cond = x_cond.clone();
    for s in 0..args.samples {
        let code = sample_mac_code(
            nu,
            2,
            2,
            &u_counts,
            &x_cond,
            &y_cond,
            args.mx,
            args.my,
            lab::split_seed(args.seed, s as u64),
        )
        .map_err(|e| CliError::Input(e.to_string()))?;
        let (out, report) = mac_expurgate(&code, rx, ry, args.delta);
        let fx = out.code_x.len() as f64 / args.mx as f64;
        let fy = out.code_y.len() as f64 / args.my as f64;
        em.row(
            &format!("expurgate-mac.kept-x[code{s}]"),
            fx,
            0.5,
            ">=",
            fx >= 0.5 || report.mean_score >= 0.5,
        );
        em.row(
            &format!("expurgate-mac.kept-y[code{s}]"),
            fy,
            0.5,
            ">=",
            fy >= 0.5 || report.mean_score >= 0.5,
        );
        em.row(
            &format!("expurgate-mac.caps[code{s}]"),
            report.worst_margin,
            0.0,
            "<=",
            report.averaged_caps_ok && report.per_pair_caps_ok,
        );
    }
    Ok(())
}

fn typicality(args: &VerifyArgs, em: &mut Emitter) -> Result<(), CliError> {
    let channel_path = args
        .channel
        .as_ref()
        .ok_or_else(|| CliError::Input("typicality needs --channel".into()))?;
    let mut m_dummy = RunManifest::new("x", &[], 0);
    let channel = load_channel(channel_path, &mut m_dummy)?;
    let metric = parse_metric(&args.metric, &channel)?;
    let n = args.n;
    let m = ((n as f64 * args.rate).exp2().round() as usize).max(2);
    let comp = relex::types::round_to_type(&[0.5, 0.5], n as u64);
    // exponent band from the solver
    let solver = SolverConfig { seed: args.seed, restarts: 6, ..SolverConfig::default() };
    let base = DmcExponentRequest {
        channel: channel.clone(),
        composition: vec![0.5, 0.5],
        rate: args.rate,
        metric: metric.clone(),
        family: Family::Typical,
        solver,
    };
    let fams = compute_dmc_families(&base, &[Family::Typical, Family::TypicalLinear])
        .map_err(CliError::from)?;
    let band = TypicalityBand {
        e_t: fams[&Family::Typical].value,
        e_tl: fams[&Family::TypicalLinear].value,
        delta: args.delta,
    };
    let lo = (-(n as f64) * (band.e_tl + 4.0 * band.delta)).exp2();
    let hi = (-(n as f64) * (band.e_t - 3.0 * band.delta)).exp2().min(1.0);
    let flags: Vec<(bool, bool)> = (0..args.samples)
        .into_par_iter()
        .map(|s| {
            let code = sample_p2p_code(2, &comp, m, lab::split_seed(args.seed, s as u64));
            let e = lab::exact_error_probability(&code, &channel, &metric, 1 << 22)
                .or_else(|_| {
                    lab::monte_carlo_error(&code, &channel, &metric, 4000, lab::split_seed(args.seed, 7 + s as u64))
                        .map(|r| r.p_hat)
                })
                .unwrap();
            let inside_err = e >= lo && e <= hi;
            // first-order packing band per code (the almost-every-code form
            // with 2δ slack), checked on realized pair types
            let census = lab::pair_type_census(&code);
            let mut inside_pi = true;
            for (counts, &cnt) in &census {
                let i = lab::pair_type_mi(counts, 2, n as u64);
                let v = cnt as f64 / m as f64;
                let cap = (n as f64 * (args.rate - i + 2.0 * args.delta)).exp2();
                if v > cap {
                    inside_pi = false;
                }
            }
            (inside_err, inside_pi)
        })
        .collect();
    let frac_err = flags.iter().filter(|(a, _)| *a).count() as f64 / args.samples as f64;
    let frac_pi = flags.iter().filter(|(_, b)| *b).count() as f64 / args.samples as f64;
    let threshold = 1.0 - 2.0 * (-(n as f64) * args.delta / 2.0).exp2();
    em.row("typicality.error-band-fraction", frac_err, threshold.max(0.0), ">=", frac_err >= threshold.max(0.0));
    em.row("typicality.packing-band-fraction", frac_pi, threshold.max(0.0), ">=", frac_pi >= threshold.max(0.0));
    Ok(())
}

fn empirical(args: &VerifyArgs, em: &mut Emitter) -> Result<(), CliError> {
    let channel_path = args
        .channel
        .as_ref()
        .ok_or_else(|| CliError::Input("empirical-exponent needs --channel".into()))?;
    let mut m_dummy = RunManifest::new("x", &[], 0);
    let channel = load_channel(channel_path, &mut m_dummy)?;
    let metric = parse_metric(&args.metric, &channel)?;
    let n_list: Vec<usize> = match &args.n_list {
        Some(s) => s
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::Input("bad --n-list".into()))?,
        None => vec![8, 12, 16, 20],
    };
    let solver = SolverConfig { seed: args.seed, restarts: 6, ..SolverConfig::default() };
    let base = DmcExponentRequest {
        channel: channel.clone(),
        composition: vec![0.5, 0.5],
        rate: args.rate,
        metric: metric.clone(),
        family: Family::Random,
        solver,
    };
    let fams = compute_dmc_families(
        &base,
        &[Family::Random, Family::Typical, Family::TypicalLinear],
    )
    .map_err(CliError::from)?;
    let e_r = fams[&Family::Random].value;
    let band = TypicalityBand {
        e_t: fams[&Family::Typical].value,
        e_tl: fams[&Family::TypicalLinear].value,
        delta: args.delta,
    };
    let report = lab::empirical_exponent(
        &channel,
        &metric,
        &[0.5, 0.5],
        args.rate,
        &n_list,
        args.samples,
        args.seed,
        6000,
        1 << 14,
        Some(band),
    )
    .map_err(CliError::from)?;
    for (n, mean, _, frac) in &report.per_n {
        em.row(&format!("empirical.mean-error[n={n}]"), *mean, 1.0, "<=", *mean <= 1.0);
        em.row(
            &format!("empirical.typicality-fraction[n={n}]"),
            *frac,
            0.0,
            ">=",
            true,
        );
    }
    em.row(
        "empirical.slope-vs-random-coding",
        report.slope,
        e_r,
        ">=",
        (report.slope - e_r).abs() <= args.slope_tol,
    );
    Ok(())
}

pub fn run(args: VerifyArgs, argv: &[String]) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("verify", argv, args.seed);
    if let Some(ch) = &args.channel {
        let bytes = std::fs::read(ch)?;
        manifest.add_input(&ch.display().to_string(), &bytes);
    }
    let digest = manifest.digest();
    let out = CsvOut::new(
        "what,quantity,value,bound,direction,pass,margin,manifest_digest",
        &manifest,
    );
    let mut em = Emitter { out, what: args.what.clone(), digest, flags: 0 };
    match args.what.as_str() {
        "packing-p2p" => packing_p2p(&args, &mut em)?,
        "packing-mac" => packing_mac(&args, &mut em)?,
        "sandwich" => sandwich(&args, &mut em)?,
        "expurgate-p2p" => expurgate_p2p_cmd(&args, &mut em)?,
        "expurgate-mac" => expurgate_mac_cmd(&args, &mut em)?,
        "typicality" => typicality(&args, &mut em)?,
        "empirical-exponent" => empirical(&args, &mut em)?,
        other => return Err(CliError::Input(format!("unknown verification {other}"))),
    }
    em.out.write(&args.output)?;
    if args.strict && em.flags > 0 {
        return Err(CliError::FlagsRaised(em.flags));
    }
    Ok(())
}
