//! `relex dmc-exponent`: family sweeps over a rate grid.

use rayon::prelude::*;

use relex::dmc::{
    self, aux_information, compute_dmc_families, DmcExponentRequest, ExponentResult, Family,
};
use relex::{DecodingMetric, SolverConfig};

use crate::manifest::{sha256_hex, sig12, RunManifest};
use crate::{load_channel, parse_grid, CliError, CsvOut, DmcArgs};

pub fn parse_metric(name: &str, channel: &relex::Channel) -> Result<DecodingMetric, CliError> {
    match name {
        "ml" => Ok(DecodingMetric::MaximumLikelihood(channel.clone())),
        "me" => Ok(DecodingMetric::MinimumEntropy),
        "eq" => Ok(DecodingMetric::MinimumEquivocation),
        other => Err(CliError::Input(format!("unknown metric {other}"))),
    }
}

pub fn parse_families(name: &str) -> Result<Vec<Family>, CliError> {
    if name == "all" {
        Ok(dmc::ALL_FAMILIES.to_vec())
    } else {
        Ok(vec![Family::parse(name).map_err(|e| CliError::Input(e.to_string()))?])
    }
}

fn argmin_digest(res: &ExponentResult) -> String {
    match &res.argmin {
        Some(a) => {
            let cells: Vec<String> = a.mass().iter().map(|&m| sig12(m)).collect();
            sha256_hex(cells.join(",").as_bytes())[..16].to_string()
        }
        None => "-".to_string(),
    }
}

fn winning_constraints(res: &ExponentResult, rate: f64) -> String {
    let mut labels: Vec<String> = res
        .active_constraints
        .iter()
        .filter(|(_, margin)| margin.abs() <= 1e-4)
        .map(|(l, _)| l.clone())
        .collect();
    if let Some(i) = aux_information(res) {
        if i >= rate - 1e-4 {
            labels.push("positive-part-active".to_string());
        }
    }
    if res.infeasible {
        labels.push("infeasible".to_string());
    }
    if labels.is_empty() {
        labels.push("none".to_string());
    }
    labels.join("|")
}

pub fn run(args: DmcArgs, argv: &[String]) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("dmc-exponent", argv, args.seed);
    let channel = load_channel(&args.channel, &mut manifest)?;
    if channel.kind != relex::ChannelKind::Dmc {
        return Err(CliError::Input("dmc-exponent needs a `dmc` channel file".into()));
    }
    let metric = parse_metric(&args.metric, &channel)?;
    if matches!(metric, DecodingMetric::MinimumEquivocation) {
        return Err(CliError::Input("metric eq is for MACs; use ml or me".into()));
    }
    let families = parse_families(&args.family)?;
    let rates: Vec<f64> = match (&args.rate, &args.rate_grid) {
        (Some(r), None) => vec![*r],
        (None, Some(g)) => parse_grid(g)?,
        (None, None) => return Err(CliError::Input("one of --rate / --rate-grid is required".into())),
        _ => unreachable!("clap conflicts"),
    };
    let solver = SolverConfig {
        grid_denominator: args.grid_denominator,
        restarts: args.restarts,
        refine_steps: args.refine_steps,
        seed: args.seed,
        ..SolverConfig::default()
    };

    // composition choice
    enum Comp {
        Fixed(Vec<f64>),
        Optimize,
    }
    let comp = match args.composition.as_str() {
        "uniform" => Comp::Fixed(vec![1.0 / channel.inputs[0] as f64; channel.inputs[0]]),
        "optimize" => Comp::Optimize,
        path => {
            let bytes = std::fs::read(path)?;
            manifest.add_input(path, &bytes);
            let text = String::from_utf8_lossy(&bytes);
            let p: Result<Vec<f64>, _> = text.split_whitespace().map(str::parse::<f64>).collect();
            Comp::Fixed(p.map_err(|_| CliError::Input(format!("bad composition file {path}")))?)
        }
    };

    let digest = manifest.digest();
    let mut out = CsvOut::new(
        "rate,family,value_bits,winning_constraints,argmin_digest,lattice_value,refined_value,restart_spread,composition,manifest_digest",
        &manifest,
    );

    type RateRows = Vec<String>;
    let rows: Result<Vec<RateRows>, relex::Error> = rates
        .par_iter()
        .map(|&rate| {
            let mut rows = Vec::new();
            let (composition, results) = match &comp {
                Comp::Fixed(p) => {
                    let base = DmcExponentRequest {
                        channel: channel.clone(),
                        composition: p.clone(),
                        rate,
                        metric: metric.clone(),
                        family: Family::Random,
                        solver: solver.clone(),
                    };
                    (p.clone(), compute_dmc_families(&base, &families)?)
                }
                Comp::Optimize => {
                    // optimize per family would mix compositions across rows;
                    // optimize on the first requested family and reuse
                    let (p_star, _) = dmc::maximize_over_composition(
                        &channel, rate, families[0], &metric, &solver,
                    )?;
                    let base = DmcExponentRequest {
                        channel: channel.clone(),
                        composition: p_star.clone(),
                        rate,
                        metric: metric.clone(),
                        family: Family::Random,
                        solver: solver.clone(),
                    };
                    (p_star, compute_dmc_families(&base, &families)?)
                }
            };
            let comp_str = composition
                .iter()
                .map(|&x| sig12(x))
                .collect::<Vec<_>>()
                .join(";");
            for family in &families {
                let res = &results[family];
                rows.push(format!(
                    "{},{},{},{},{},{},{},{},{},{}",
                    sig12(rate),
                    family.name(),
                    sig12(res.value),
                    winning_constraints(res, rate),
                    argmin_digest(res),
                    res.certificate
                        .lattice_value
                        .map(sig12)
                        .unwrap_or_else(|| "-".into()),
                    sig12(res.certificate.refined_value),
                    sig12(res.certificate.restart_spread),
                    comp_str,
                    digest,
                ));
            }
            Ok(rows)
        })
        .collect();
    for r in rows.map_err(CliError::from)? {
        for row in r {
            out.push(row);
        }
    }
    out.write(&args.output)?;
    Ok(())
}
