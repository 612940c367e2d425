//! `relex mac-exponent`: per-β family values over rate pairs and sampled
//! or file-given input distributions, optionally with the relaxed
//! reference exponent and gaps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use relex::dmc::Family;
use relex::mac::{compare_vs_liu, compute_mac_families, Beta, MacInput};
use relex::{Axis, DecodingMetric, JointDist, SolverConfig};

use crate::cmd_dmc::{parse_families, parse_metric};
use crate::manifest::{sig12, RunManifest};
use crate::{load_channel, parse_grid, CliError, CsvOut, MacArgs};

/// Sample P_U · P_{X|U} · P_{Y|U} with Dirichlet(1) factors.
pub fn sample_input_dist(
    u_size: usize,
    nx: usize,
    ny: usize,
    rng: &mut ChaCha8Rng,
) -> JointDist {
    let draw = |rng: &mut ChaCha8Rng, k: usize| -> Vec<f64> {
        let mut v: Vec<f64> = (0..k).map(|_| -(rng.gen::<f64>().max(1e-12)).ln()).collect();
        let s: f64 = v.iter().sum();
        for x in &mut v {
            *x /= s;
        }
        v
    };
    let pu = draw(rng, u_size);
    let mut mass = Vec::with_capacity(u_size * nx * ny);
    for u in 0..u_size {
        let px = draw(rng, nx);
        let py = draw(rng, ny);
        for x in 0..nx {
            for y in 0..ny {
                mass.push(pu[u] * px[x] * py[y]);
            }
        }
    }
    JointDist::new(
        vec![Axis::new("U", u_size), Axis::new("X", nx), Axis::new("Y", ny)],
        mass,
    )
    .expect("sampled distribution is valid")
}

fn parse_dist_file(text: &str) -> Result<JointDist, CliError> {
    let mut lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| CliError::Input("empty dist file".into()))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    let (nu, nx, ny) = match toks.as_slice() {
        ["macdist", u, x, y] => (
            u.parse::<usize>().map_err(|_| CliError::Input("bad |U|".into()))?,
            x.parse::<usize>().map_err(|_| CliError::Input("bad |X|".into()))?,
            y.parse::<usize>().map_err(|_| CliError::Input("bad |Y|".into()))?,
        ),
        _ => return Err(CliError::Input(format!("bad dist header: {header}"))),
    };
    let mut mass = vec![0.0; nu * nx * ny];
    let mut got = 0usize;
    for line in lines {
        let vals: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
        let vals = vals.map_err(|_| CliError::Input("bad probability in dist file".into()))?;
        if vals.len() != 1 + nx + ny {
            return Err(CliError::Input(format!(
                "dist row needs 1 + |X| + |Y| = {} values, got {}",
                1 + nx + ny,
                vals.len()
            )));
        }
        let pu = vals[0];
        let px = &vals[1..1 + nx];
        let py = &vals[1 + nx..];
        for x in 0..nx {
            for y in 0..ny {
                mass[(got * nx + x) * ny + y] = pu * px[x] * py[y];
            }
        }
        got += 1;
    }
    if got != nu {
        return Err(CliError::Input(format!("expected {nu} dist rows, got {got}")));
    }
    JointDist::new(
        vec![Axis::new("U", nu), Axis::new("X", nx), Axis::new("Y", ny)],
        mass,
    )
    .map_err(|e| CliError::Input(e.to_string()))
}

pub fn run(args: MacArgs, argv: &[String]) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("mac-exponent", argv, args.seed);
    let channel = load_channel(&args.channel, &mut manifest)?;
    if channel.kind != relex::ChannelKind::Mac {
        return Err(CliError::Input("mac-exponent needs a `mac` channel file".into()));
    }
    let metric = parse_metric(&args.metric, &channel)?;
    if matches!(metric, DecodingMetric::MinimumEntropy) {
        return Err(CliError::Input("metric me is for DMCs; use eq or ml".into()));
    }
    if args.compare_liu && !matches!(metric, DecodingMetric::MinimumEquivocation) {
        return Err(CliError::Input("--compare-liu requires --metric eq".into()));
    }
    let families = parse_families(&args.family)?;
    let rx_list: Vec<f64> = match (&args.rx, &args.rx_grid) {
        (Some(r), None) => vec![*r],
        (None, Some(g)) => parse_grid(g)?,
        _ => return Err(CliError::Input("one of --rx / --rx-grid is required".into())),
    };
    let ry_list: Vec<f64> = match (&args.ry, &args.ry_grid) {
        (Some(r), None) => vec![*r],
        (None, Some(g)) => parse_grid(g)?,
        _ => return Err(CliError::Input("one of --ry / --ry-grid is required".into())),
    };
    let solver = SolverConfig {
        grid_denominator: args.grid_denominator,
        restarts: args.restarts,
        refine_steps: args.refine_steps,
        seed: args.seed,
        ..SolverConfig::default()
    };
    let (nx, ny) = (channel.inputs[0], channel.inputs[1]);

    // input distributions
    let dists: Vec<JointDist> = if let Some(k) = args.dist.strip_prefix("sample:") {
        let k: usize = k
            .parse()
            .map_err(|_| CliError::Input(format!("bad sample count in {}", args.dist)))?;
        (0..k)
            .map(|i| {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(relex::lab::split_seed(args.seed, i as u64));
                sample_input_dist(args.u_size, nx, ny, &mut rng)
            })
            .collect()
    } else {
        let bytes = std::fs::read(&args.dist)?;
        manifest.add_input(&args.dist, &bytes);
        vec![parse_dist_file(&String::from_utf8_lossy(&bytes))?]
    };

    let digest = manifest.digest();
    let mut out = CsvOut::new(
        "sample,rx,ry,family,value_bits,winner_beta,beta_x,beta_y,beta_xy,liu_reference,gap,manifest_digest",
        &manifest,
    );

    struct Job {
        sample: usize,
        rx: f64,
        ry: f64,
        dist: JointDist,
    }
    let mut jobs = Vec::new();
    for (s, d) in dists.iter().enumerate() {
        for &rx in &rx_list {
            for &ry in &ry_list {
                jobs.push(Job { sample: s, rx, ry, dist: d.clone() });
            }
        }
    }
    let rows: Result<Vec<Vec<String>>, relex::Error> = jobs
        .par_iter()
        .map(|job| {
            let input = MacInput::new(
                channel.clone(),
                job.dist.clone(),
                job.rx,
                job.ry,
                metric.clone(),
                solver.clone(),
            )?;
            let mut rows = Vec::new();
            let mut emit = |family: Family,
                            res: &relex::mac::MacExponentResult,
                            liu: Option<f64>| {
                let b = |beta: Beta| sig12(res.branches[&beta].value);
                rows.push(format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{}",
                    job.sample,
                    sig12(job.rx),
                    sig12(job.ry),
                    family.name(),
                    sig12(res.value),
                    res.winner.name(),
                    b(Beta::X),
                    b(Beta::Y),
                    b(Beta::XY),
                    liu.map(sig12).unwrap_or_else(|| "-".into()),
                    liu.map(|l| sig12(res.value - l)).unwrap_or_else(|| "-".into()),
                    digest,
                ));
            };
            if args.compare_liu {
                let cmp = compare_vs_liu(&input)?;
                for family in [Family::Random, Family::Typical, Family::Expurgated] {
                    if families.contains(&family) || args.family == "all" {
                        emit(family, &cmp.families[&family], Some(cmp.liu_value));
                    }
                }
            } else {
                let results = compute_mac_families(&input, &families)?;
                for family in &families {
                    emit(*family, &results[family], None);
                }
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
