//! Exponent lower bounds for the two-user MAC: for each error class
//! β ∈ {X, Y, XY} a constrained minimization over joints on
//! (U, X, Y, β̃-axes, Z), combined by an outer minimum over β, for the
//! random-coding, typical and expurgated families, plus the relaxed
//! reference exponent used for comparison under minimum-equivocation
//! decoding.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::channel::{Channel, ChannelKind};
use crate::dist::{Axis, JointDist};
use crate::dmc::{Certificate, Family};
use crate::metric::DecodingMetric;
use crate::opt::{
    solve, Constraint, EntropyExpr, Objective, Pin, Problem, SolverConfig, Space,
};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Beta {
    X,
    Y,
    XY,
}

pub const ALL_BETAS: [Beta; 3] = [Beta::X, Beta::Y, Beta::XY];

impl Beta {
    pub fn name(&self) -> &'static str {
        match self {
            Beta::X => "X",
            Beta::Y => "Y",
            Beta::XY => "XY",
        }
    }
}

/// Problem input: time-sharing distribution, rates, channel, decoder.
#[derive(Debug, Clone)]
pub struct MacInput {
    pub channel: Channel,
    /// P_{UXY} with axes in (U, X, Y) order; must satisfy X−U−Y.
    pub p_uxy: JointDist,
    pub rx: f64,
    pub ry: f64,
    pub metric: DecodingMetric,
    pub solver: SolverConfig,
}

impl MacInput {
    pub fn new(
        channel: Channel,
        p_uxy: JointDist,
        rx: f64,
        ry: f64,
        metric: DecodingMetric,
        solver: SolverConfig,
    ) -> Result<Self, Error> {
        if channel.kind != ChannelKind::Mac {
            return Err(Error::Invalid("MAC exponent needs a MAC channel".into()));
        }
        if rx < 0.0 || ry < 0.0 {
            return Err(Error::Invalid("rates must be nonnegative".into()));
        }
        solver.validate()?;
        // canonical axis order (U, X, Y)
        let order = [
            p_uxy.axis_index("U")?,
            p_uxy.axis_index("X")?,
            p_uxy.axis_index("Y")?,
        ];
        let (sizes, mass) = p_uxy.marginal_ordered(&order);
        if sizes[1] != channel.inputs[0] || sizes[2] != channel.inputs[1] {
            return Err(Error::Shape("input distribution does not match channel alphabets".into()));
        }
        let p_uxy = JointDist::new(
            vec![
                Axis::new("U", sizes[0]),
                Axis::new("X", sizes[1]),
                Axis::new("Y", sizes[2]),
            ],
            mass,
        )?;
        let input = Self { channel, p_uxy, rx, ry, metric, solver };
        input.check_markov(1e-9)?;
        Ok(input)
    }

    /// X−U−Y: P_{XY|u} must factor for every u with positive mass.
    fn check_markov(&self, eps: f64) -> Result<(), Error> {
        let (nu, nx, ny) = self.dims();
        let m = self.p_uxy.mass();
        for u in 0..nu {
            let base = u * nx * ny;
            let pu: f64 = m[base..base + nx * ny].iter().sum();
            if pu <= 0.0 {
                continue;
            }
            let mut px = vec![0.0; nx];
            let mut py = vec![0.0; ny];
            for x in 0..nx {
                for y in 0..ny {
                    px[x] += m[base + x * ny + y];
                    py[y] += m[base + x * ny + y];
                }
            }
            for x in 0..nx {
                for y in 0..ny {
                    let want = px[x] * py[y] / pu;
                    if (m[base + x * ny + y] - want).abs() > eps * pu.max(1e-12) {
                        return Err(Error::Invalid(format!(
                            "X-U-Y fails at u = {u}: P(x,y|u) does not factor"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (
            self.p_uxy.axes()[0].size,
            self.p_uxy.axes()[1].size,
            self.p_uxy.axes()[2].size,
        )
    }

    fn p_ux(&self) -> Vec<f64> {
        self.p_uxy.marginal_mass(0b011)
    }

    fn p_uy(&self) -> Vec<f64> {
        self.p_uxy.marginal_mass(0b101)
    }
}

/// One β-branch outcome.
#[derive(Debug, Clone)]
pub struct BranchResult {
    pub value: f64,
    pub argmin: Option<JointDist>,
    pub active_constraints: Vec<(String, f64)>,
    pub certificate: Certificate,
    pub infeasible: bool,
}

#[derive(Debug, Clone)]
pub struct MacExponentResult {
    pub value: f64,
    pub winner: Beta,
    pub branches: BTreeMap<Beta, BranchResult>,
}

/// Axis bit assignments per β-branch working space.
struct BetaSpace {
    beta: Beta,
    sizes: Vec<usize>,
    u: u32,
    x: u32,
    y: u32,
    xt: u32,
    yt: u32,
    z: u32,
    names: Vec<&'static str>,
}

fn beta_space(beta: Beta, nu: usize, nx: usize, ny: usize, nz: usize) -> BetaSpace {
    match beta {
        Beta::X => BetaSpace {
            beta,
            sizes: vec![nu, nx, ny, nx, nz],
            u: 1,
            x: 2,
            y: 4,
            xt: 8,
            yt: 0,
            z: 16,
            names: vec!["U", "X", "Y", "Xt", "Z"],
        },
        Beta::Y => BetaSpace {
            beta,
            sizes: vec![nu, nx, ny, ny, nz],
            u: 1,
            x: 2,
            y: 4,
            xt: 0,
            yt: 8,
            z: 16,
            names: vec!["U", "X", "Y", "Yt", "Z"],
        },
        Beta::XY => BetaSpace {
            beta,
            sizes: vec![nu, nx, ny, nx, ny, nz],
            u: 1,
            x: 2,
            y: 4,
            xt: 8,
            yt: 16,
            z: 32,
            names: vec!["U", "X", "Y", "Xt", "Yt", "Z"],
        },
    }
}

/// Index of an axis bit inside the shape.
fn axis_pos(bit: u32) -> usize {
    bit.trailing_zeros() as usize
}

fn build_mac_problem(
    input: &MacInput,
    beta: Beta,
    family: Family,
) -> Result<(Problem, BetaSpace), Error> {
    let (nu, nx, ny) = input.dims();
    let nz = input.channel.outputs;
    let bs = beta_space(beta, nu, nx, ny, nz);
    let mut space = Space::new(bs.sizes.clone());
    let shape = space.shape.clone();

    // D(V_{Z|XYU} ‖ W | V_{XYU}) = −H(UXYZ) + H(UXY) − Σ V log2 W(z|x,y)
    let t_uxyz = space.table(bs.u | bs.x | bs.y | bs.z);
    let t_uxy = space.table(bs.u | bs.x | bs.y);
    let mut dlin = vec![0.0f64; shape.len];
    let mut support = vec![true; shape.len];
    let px_pos = axis_pos(bs.x);
    let py_pos = axis_pos(bs.y);
    let pz_pos = axis_pos(bs.z);
    for idx in 0..shape.len {
        let x = shape.coord(idx, px_pos);
        let y = shape.coord(idx, py_pos);
        let z = shape.coord(idx, pz_pos);
        let w = input.channel.w2(z, x, y);
        if w <= 0.0 {
            support[idx] = false;
            dlin[idx] = f64::INFINITY;
        } else {
            dlin[idx] = -w.log2();
        }
    }
    let d_expr = EntropyExpr::default()
        .h(t_uxyz, -1.0)
        .h(t_uxy, 1.0)
        .with_linear(dlin);
    let i_xy_u = EntropyExpr::default().mi(&mut space, bs.x, bs.y, bs.u, 1.0);

    // the positive-part information term per β
    let tilde_mask = bs.xt | bs.yt;
    let mut i_aux = EntropyExpr::default().mi(&mut space, tilde_mask, bs.x | bs.y | bs.z, bs.u, 1.0);
    let threshold = match beta {
        Beta::X => input.rx,
        Beta::Y => input.ry,
        Beta::XY => {
            // + I(X̃ ∧ Ỹ | U)
            i_aux = i_aux.mi(&mut space, bs.xt, bs.yt, bs.u, 1.0);
            input.rx + input.ry
        }
    };

    let mut constraints = Vec::new();

    // α: competitor side (tilde axes in the X/Y slots) ≤ true side
    match &input.metric {
        DecodingMetric::MinimumEquivocation => {
            // H(X̃Ỹ…|ZU) − H(XY|ZU) = H(U,tilde-slots,Z) − H(U,X,Y,Z)
            let comp_mask = bs.u
                | bs.z
                | if bs.xt != 0 { bs.xt } else { bs.x }
                | if bs.yt != 0 { bs.yt } else { bs.y };
            let t_comp = space.table(comp_mask);
            constraints.push(Constraint::expr(
                "alpha",
                EntropyExpr::default().h(t_comp, 1.0).h(t_uxyz, -1.0),
                0.0,
            ));
        }
        DecodingMetric::MaximumLikelihood(w) => {
            if w.rows != input.channel.rows {
                return Err(Error::Invalid(
                    "maximum-likelihood metric must score against the request channel".into(),
                ));
            }
            let mut lin = vec![0.0f64; shape.len];
            let cx_pos = if bs.xt != 0 { axis_pos(bs.xt) } else { px_pos };
            let cy_pos = if bs.yt != 0 { axis_pos(bs.yt) } else { py_pos };
            for idx in 0..shape.len {
                let x = shape.coord(idx, px_pos);
                let y = shape.coord(idx, py_pos);
                let cx = shape.coord(idx, cx_pos);
                let cy = shape.coord(idx, cy_pos);
                let z = shape.coord(idx, pz_pos);
                let wt = input.channel.w2(z, x, y);
                let wc = input.channel.w2(z, cx, cy);
                if wc <= 0.0 {
                    support[idx] = false;
                    lin[idx] = f64::INFINITY;
                } else if wt > 0.0 {
                    lin[idx] = wt.log2() - wc.log2();
                }
            }
            constraints.push(Constraint::expr(
                "alpha",
                EntropyExpr::default().with_linear(lin),
                0.0,
            ));
        }
        DecodingMetric::Custom(f) => {
            let f = f.clone();
            let px = px_pos;
            let py = py_pos;
            let pz = pz_pos;
            let cx = if bs.xt != 0 { axis_pos(bs.xt) } else { px_pos };
            let cy = if bs.yt != 0 { axis_pos(bs.yt) } else { py_pos };
            let pu = axis_pos(bs.u);
            let dims = (nu, nx, ny, nz);
            let func = move |space: &Space, v: &[f64]| -> f64 {
                let (_nu, nx, ny, nz) = dims;
                let side = |ax: usize, ay: usize| -> f64 {
                    let mut joint = vec![0.0f64; nu * nx * ny * nz];
                    for (idx, &m) in v.iter().enumerate() {
                        let u = space.shape.coord(idx, pu);
                        let x = space.shape.coord(idx, ax);
                        let y = space.shape.coord(idx, ay);
                        let z = space.shape.coord(idx, pz);
                        joint[((u * nx + x) * ny + y) * nz + z] += m;
                    }
                    f(&[nu, nx, ny, nz], &joint)
                };
                side(cx, cy) - side(px, py)
            };
            constraints.push(Constraint::closure("alpha", Arc::new(func), 0.0));
        }
        DecodingMetric::MinimumEntropy => {
            return Err(Error::Invalid("minimum-entropy is a point-to-point metric".into()))
        }
    }

    // family caps and floors
    let cap = match family {
        Family::Typical | Family::TypicalLinear => Some(input.rx + input.ry),
        Family::Expurgated => Some(input.rx.min(input.ry)),
        _ => None,
    };
    if let Some(cap) = cap {
        let mut push_f = |label: &str, e: EntropyExpr| {
            constraints.push(Constraint::expr(label, e, cap));
        };
        // F_U variants: I between the two pair slots given U
        push_f("F_U(xy)", EntropyExpr::default().mi(&mut space, bs.x, bs.y, bs.u, 1.0));
        match beta {
            Beta::X => {
                push_f("F_U(xty)", EntropyExpr::default().mi(&mut space, bs.xt, bs.y, bs.u, 1.0));
                push_f(
                    "F_X(xy,xt)",
                    EntropyExpr::default()
                        .mi(&mut space, bs.x, bs.y, bs.u, 1.0)
                        .mi(&mut space, bs.xt, bs.x | bs.y, bs.u, 1.0)
                        .with_constant(-input.rx),
                );
            }
            Beta::Y => {
                push_f("F_U(xyt)", EntropyExpr::default().mi(&mut space, bs.x, bs.yt, bs.u, 1.0));
                push_f(
                    "F_Y(xy,yt)",
                    EntropyExpr::default()
                        .mi(&mut space, bs.x, bs.y, bs.u, 1.0)
                        .mi(&mut space, bs.yt, bs.x | bs.y, bs.u, 1.0)
                        .with_constant(-input.ry),
                );
            }
            Beta::XY => {
                push_f("F_U(xty)", EntropyExpr::default().mi(&mut space, bs.xt, bs.y, bs.u, 1.0));
                push_f("F_U(xyt)", EntropyExpr::default().mi(&mut space, bs.x, bs.yt, bs.u, 1.0));
                push_f("F_U(xtyt)", EntropyExpr::default().mi(&mut space, bs.xt, bs.yt, bs.u, 1.0));
                push_f(
                    "F_X(xy,xt)",
                    EntropyExpr::default()
                        .mi(&mut space, bs.x, bs.y, bs.u, 1.0)
                        .mi(&mut space, bs.xt, bs.x | bs.y, bs.u, 1.0)
                        .with_constant(-input.rx),
                );
                push_f(
                    "F_X(xyt,xt)",
                    EntropyExpr::default()
                        .mi(&mut space, bs.x, bs.yt, bs.u, 1.0)
                        .mi(&mut space, bs.xt, bs.x | bs.yt, bs.u, 1.0)
                        .with_constant(-input.rx),
                );
                push_f(
                    "F_Y(xy,yt)",
                    EntropyExpr::default()
                        .mi(&mut space, bs.x, bs.y, bs.u, 1.0)
                        .mi(&mut space, bs.yt, bs.x | bs.y, bs.u, 1.0)
                        .with_constant(-input.ry),
                );
                push_f(
                    "F_Y(xty,yt)",
                    EntropyExpr::default()
                        .mi(&mut space, bs.xt, bs.y, bs.u, 1.0)
                        .mi(&mut space, bs.yt, bs.xt | bs.y, bs.u, 1.0)
                        .with_constant(-input.ry),
                );
                push_f(
                    "F_XY(xy,xtyt)",
                    EntropyExpr::default()
                        .mi(&mut space, bs.x, bs.y, bs.u, 1.0)
                        .mi(&mut space, bs.xt, bs.yt, bs.u, 1.0)
                        .mi(&mut space, bs.xt | bs.yt, bs.x | bs.y, bs.u, 1.0)
                        .with_constant(-input.rx - input.ry),
                );
                push_f(
                    "F_XY(xty,xyt)",
                    EntropyExpr::default()
                        .mi(&mut space, bs.xt, bs.y, bs.u, 1.0)
                        .mi(&mut space, bs.x, bs.yt, bs.u, 1.0)
                        .mi(&mut space, bs.x | bs.yt, bs.xt | bs.y, bs.u, 1.0)
                        .with_constant(-input.rx - input.ry),
                );
            }
        }
    }

    // objective
    let objective = if family.is_linear() {
        let mut base = d_expr;
        base.add_scaled(&i_xy_u, 1.0);
        base.add_scaled(&i_aux, 1.0);
        base.constant -= threshold;
        // information floor; for β = XY the floor adds the unconditional
        // I(X̃ ∧ Ỹ) term
        let mut floor = EntropyExpr::default().mi(&mut space, tilde_mask, bs.x | bs.y | bs.z, bs.u, 1.0);
        if beta == Beta::XY {
            floor = floor.mi(&mut space, bs.xt, bs.yt, 0, 1.0);
        }
        let mut neg = EntropyExpr::default();
        neg.add_scaled(&floor, -1.0);
        constraints.push(Constraint::expr("information-floor", neg, -threshold));
        Objective { base, plus_parts: vec![] }
    } else {
        let mut base = d_expr;
        base.add_scaled(&i_xy_u, 1.0);
        Objective { base, plus_parts: vec![(i_aux, threshold)] }
    };

    // pins
    let p_ux = input.p_ux();
    let p_uy = input.p_uy();
    let t_ux = space.table(bs.u | bs.x);
    let t_uy = space.table(bs.u | bs.y);
    let mut pins = vec![
        Pin { table: t_ux, target: p_ux.clone() },
        Pin { table: t_uy, target: p_uy.clone() },
    ];
    if bs.xt != 0 {
        let t = space.table(bs.u | bs.xt);
        pins.push(Pin { table: t, target: p_ux.clone() });
    }
    if bs.yt != 0 {
        let t = space.table(bs.u | bs.yt);
        pins.push(Pin { table: t, target: p_uy.clone() });
    }

    // structured seeds
    let seeds = mac_seeds(input, &bs, &shape);

    Ok((
        Problem { space, objective, constraints, pins, support, seeds },
        bs,
    ))
}

/// Diagonal (tilde = true word) and conditionally independent seeds.
fn mac_seeds(input: &MacInput, bs: &BetaSpace, shape: &crate::opt::Shape) -> Vec<Vec<f64>> {
    let (nu, nx, ny) = input.dims();
    let m = input.p_uxy.mass();
    // conditional input laws given u
    let mut px_u = vec![vec![0.0; nx]; nu];
    let mut py_u = vec![vec![0.0; ny]; nu];
    for u in 0..nu {
        let base = u * nx * ny;
        let pu: f64 = m[base..base + nx * ny].iter().sum();
        if pu <= 0.0 {
            continue;
        }
        for x in 0..nx {
            for y in 0..ny {
                px_u[u][x] += m[base + x * ny + y] / pu;
                py_u[u][y] += m[base + x * ny + y] / pu;
            }
        }
    }
    let pu_pos = axis_pos(bs.u);
    let px_pos = axis_pos(bs.x);
    let py_pos = axis_pos(bs.y);
    let pz_pos = axis_pos(bs.z);
    let mut diag = vec![0.0f64; shape.len];
    let mut indep = vec![0.0f64; shape.len];
    for idx in 0..shape.len {
        let u = shape.coord(idx, pu_pos);
        let x = shape.coord(idx, px_pos);
        let y = shape.coord(idx, py_pos);
        let z = shape.coord(idx, pz_pos);
        let basep = m[(u * nx + x) * ny + y] * input.channel.w2(z, x, y);
        if basep <= 0.0 {
            continue;
        }
        let mut dmatch = true;
        let mut ifac = 1.0;
        if bs.xt != 0 {
            let xt = shape.coord(idx, axis_pos(bs.xt));
            dmatch &= xt == x;
            ifac *= px_u[u][xt];
        }
        if bs.yt != 0 {
            let yt = shape.coord(idx, axis_pos(bs.yt));
            dmatch &= yt == y;
            ifac *= py_u[u][yt];
        }
        if dmatch {
            diag[idx] = basep;
        }
        indep[idx] = basep * ifac;
    }
    vec![diag, indep]
}

/// Lift a reference 4-axis argmin V_{UXYZ} into the β-branch space by the
/// conditional-copy coupling: tilde slots are a conditionally independent
/// redraw of the corresponding true slots given (U, rest, Z). The lifted
/// joint ties the α-inequality and pins every required marginal.
fn lift_reference_point(
    v4: &[f64],
    dims: (usize, usize, usize, usize),
    bs: &BetaSpace,
    shape: &crate::opt::Shape,
) -> Vec<f64> {
    let (_nu, nx, ny, nz) = dims;
    let idx4 = |u: usize, x: usize, y: usize, z: usize| ((u * nx + x) * ny + y) * nz + z;
    // conditional laws of the copied slots
    // β=X: K(x̃ | u, y, z); β=Y: K(ỹ | u, x, z); β=XY: K(x̃,ỹ | u, z)
    let mut out = vec![0.0f64; shape.len];
    let pu_pos = axis_pos(bs.u);
    let px_pos = axis_pos(bs.x);
    let py_pos = axis_pos(bs.y);
    let pz_pos = axis_pos(bs.z);
    for idx in 0..shape.len {
        let u = shape.coord(idx, pu_pos);
        let x = shape.coord(idx, px_pos);
        let y = shape.coord(idx, py_pos);
        let z = shape.coord(idx, pz_pos);
        let base = v4[idx4(u, x, y, z)];
        if base <= 0.0 {
            continue;
        }
        let k = match bs.beta {
            Beta::X => {
                let xt = shape.coord(idx, axis_pos(bs.xt));
                let denom: f64 = (0..nx).map(|xx| v4[idx4(u, xx, y, z)]).sum();
                if denom <= 0.0 {
                    0.0
                } else {
                    v4[idx4(u, xt, y, z)] / denom
                }
            }
            Beta::Y => {
                let yt = shape.coord(idx, axis_pos(bs.yt));
                let denom: f64 = (0..ny).map(|yy| v4[idx4(u, x, yy, z)]).sum();
                if denom <= 0.0 {
                    0.0
                } else {
                    v4[idx4(u, x, yt, z)] / denom
                }
            }
            Beta::XY => {
                let xt = shape.coord(idx, axis_pos(bs.xt));
                let yt = shape.coord(idx, axis_pos(bs.yt));
                let denom: f64 = (0..nx)
                    .flat_map(|xx| (0..ny).map(move |yy| (xx, yy)))
                    .map(|(xx, yy)| v4[idx4(u, xx, yy, z)])
                    .sum();
                if denom <= 0.0 {
                    0.0
                } else {
                    v4[idx4(u, xt, yt, z)] / denom
                }
            }
        };
        out[idx] = base * k;
    }
    out
}

fn branch_from_outcome(
    problem: &Problem,
    bs: &BetaSpace,
    outcome: crate::opt::SolveOutcome,
    lattice_exact: bool,
) -> BranchResult {
    let mut scratch = Vec::new();
    match &outcome.best {
        Some((refined, point)) => {
            let refined = refined.max(0.0);
            let value = match outcome.lattice_value {
                Some(l) if lattice_exact => l.min(refined).max(0.0),
                _ => refined,
            };
            let axes: Vec<Axis> = bs
                .names
                .iter()
                .zip(&bs.sizes)
                .map(|(n, &s)| Axis::new(*n, s))
                .collect();
            let total: f64 = point.iter().sum();
            let mass: Vec<f64> = point.iter().map(|&x| x / total).collect();
            let argmin = JointDist::new(axes, mass).ok();
            let active = problem
                .constraints
                .iter()
                .map(|c| (c.label.clone(), c.bound - c.eval(&problem.space, point, &mut scratch)))
                .collect();
            BranchResult {
                value,
                argmin,
                active_constraints: active,
                certificate: Certificate {
                    lattice_value: outcome.lattice_value,
                    refined_value: refined,
                    restart_spread: outcome.restart_spread(),
                },
                infeasible: false,
            }
        }
        None => BranchResult {
            value: f64::INFINITY,
            argmin: None,
            active_constraints: vec![],
            certificate: Certificate {
                lattice_value: outcome.lattice_value,
                refined_value: f64::INFINITY,
                restart_spread: 0.0,
            },
            infeasible: true,
        },
    }
}

/// Compute one family's MAC exponent: per-β constrained minima combined by
/// an outer minimum. The relaxed reference argmin is lifted into each
/// branch as an extra seed.
pub fn compute_mac_exponent(input: &MacInput, family: Family) -> Result<MacExponentResult, Error> {
    let mut results = compute_mac_families(input, &[family])?;
    Ok(results.remove(&family).unwrap())
}

/// Compute several families together, cross-feeding β-branch argmins
/// between families so the reported values respect the exact set nesting.
pub fn compute_mac_families(
    input: &MacInput,
    families: &[Family],
) -> Result<BTreeMap<Family, MacExponentResult>, Error> {
    let (nu, nx, ny) = input.dims();
    let nz = input.channel.outputs;
    let liu = liu_branches(input)?;

    // per (family, beta) raw solves plus candidate pools per beta
    let mut branch_results: BTreeMap<(Family, Beta), BranchResult> = BTreeMap::new();
    let mut candidates: BTreeMap<Beta, Vec<Vec<f64>>> = BTreeMap::new();
    for &beta in &ALL_BETAS {
        candidates.insert(beta, Vec::new());
    }
    for &family in families {
        for &beta in &ALL_BETAS {
            let (mut problem, bs) = build_mac_problem(input, beta, family)?;
            if let Some(l) = &liu[&beta].1 {
                problem.seeds.push(lift_reference_point(
                    l,
                    (nu, nx, ny, nz),
                    &bs,
                    &problem.space.shape.clone(),
                ));
            }
            for c in &candidates[&beta] {
                problem.seeds.push(c.clone());
            }
            let outcome = solve(&problem, &input.solver);
            let lattice_exact = outcome
                .lattice_denominator
                .map(|n| crate::opt::pins_lattice_exact(&problem.pins, n, input.solver.feas_tol))
                .unwrap_or(false);
            let br = branch_from_outcome(&problem, &bs, outcome, lattice_exact);
            if let Some(a) = &br.argmin {
                candidates.get_mut(&beta).unwrap().push(a.mass().to_vec());
            }
            branch_results.insert((family, beta), br);
        }
    }
    // cross-feed candidates: score every candidate against every family's
    // branch (objective + feasibility), keeping the minimum
    let mut out = BTreeMap::new();
    for &family in families {
        let mut branches = BTreeMap::new();
        for &beta in &ALL_BETAS {
            let mut br = branch_results[&(family, beta)].clone();
            let (problem, bs) = build_mac_problem(input, beta, family)?;
            let mut scratch = Vec::new();
            for cand in &candidates[&beta] {
                let feas_pin =
                    crate::opt::pin_deviation(&problem.space, &problem.pins, cand, &mut scratch)
                        <= input.solver.feas_tol;
                let feas_cons = problem
                    .constraints
                    .iter()
                    .all(|c| c.eval(&problem.space, cand, &mut scratch) <= c.bound + input.solver.feas_tol);
                if !(feas_pin && feas_cons) {
                    continue;
                }
                let val = problem.objective.eval(&problem.space, cand, &mut scratch);
                if val.is_finite() && val < br.value {
                    br.value = val;
                    br.certificate.refined_value = val;
                    br.infeasible = false;
                    let axes: Vec<Axis> = bs
                        .names
                        .iter()
                        .zip(&bs.sizes)
                        .map(|(n, &s)| Axis::new(*n, s))
                        .collect();
                    br.argmin = JointDist::new(axes, cand.clone()).ok();
                }
            }
            branches.insert(beta, br);
        }
        let (winner, value) = ALL_BETAS
            .iter()
            .map(|&b| (b, branches[&b].value))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        out.insert(family, MacExponentResult { value, winner, branches });
    }
    Ok(out)
}

/// The relaxed reference problem for one β: minimize over V_{UXYZ} with
/// pinned (U,X) and (U,Y) marginals, no α-constraint and no auxiliary
/// axes, with the information term replaced per the containment argument.
fn liu_problem(input: &MacInput, beta: Beta) -> Problem {
    let (nu, nx, ny) = input.dims();
    let nz = input.channel.outputs;
    let mut space = Space::new(vec![nu, nx, ny, nz]);
    const U: u32 = 1;
    const X: u32 = 2;
    const Y: u32 = 4;
    const Z: u32 = 8;
    let shape = space.shape.clone();
    let t_uxyz = space.table(U | X | Y | Z);
    let t_uxy = space.table(U | X | Y);
    let mut dlin = vec![0.0f64; shape.len];
    let mut support = vec![true; shape.len];
    for idx in 0..shape.len {
        let x = shape.coord(idx, 1);
        let y = shape.coord(idx, 2);
        let z = shape.coord(idx, 3);
        let w = input.channel.w2(z, x, y);
        if w <= 0.0 {
            support[idx] = false;
            dlin[idx] = f64::INFINITY;
        } else {
            dlin[idx] = -w.log2();
        }
    }
    let mut base = EntropyExpr::default()
        .h(t_uxyz, -1.0)
        .h(t_uxy, 1.0)
        .with_linear(dlin);
    let i_xy_u = EntropyExpr::default().mi(&mut space, X, Y, U, 1.0);
    base.add_scaled(&i_xy_u, 1.0);
    let (plus, thr) = match beta {
        Beta::X => (EntropyExpr::default().mi(&mut space, X, Y | Z, U, 1.0), input.rx),
        Beta::Y => (EntropyExpr::default().mi(&mut space, Y, X | Z, U, 1.0), input.ry),
        Beta::XY => (
            EntropyExpr::default()
                .mi(&mut space, X | Y, Z, U, 1.0)
                .mi(&mut space, X, Y, U, 1.0),
            input.rx + input.ry,
        ),
    };
    let t_ux = space.table(U | X);
    let t_uy = space.table(U | Y);
    let pins = vec![
        Pin { table: t_ux, target: input.p_ux() },
        Pin { table: t_uy, target: input.p_uy() },
    ];
    // canonical seed: the true-channel point P_UXY · W
    let m = input.p_uxy.mass();
    let mut seed = vec![0.0f64; shape.len];
    for idx in 0..shape.len {
        let u = shape.coord(idx, 0);
        let x = shape.coord(idx, 1);
        let y = shape.coord(idx, 2);
        let z = shape.coord(idx, 3);
        seed[idx] = m[(u * nx + x) * ny + y] * input.channel.w2(z, x, y);
    }
    Problem {
        space,
        objective: Objective { base, plus_parts: vec![(plus, thr)] },
        constraints: vec![],
        pins,
        support,
        seeds: vec![seed],
    }
}

type LiuBranches = BTreeMap<Beta, (f64, Option<Vec<f64>>)>;

fn liu_branches(input: &MacInput) -> Result<LiuBranches, Error> {
    let mut out = BTreeMap::new();
    for &beta in &ALL_BETAS {
        let p = liu_problem(input, beta);
        let outcome = solve(&p, &input.solver);
        let value = match (&outcome.best, outcome.lattice_value) {
            (Some((v, _)), Some(l)) => v.min(l),
            (Some((v, _)), None) => *v,
            (None, Some(l)) => l,
            (None, None) => f64::INFINITY,
        };
        out.insert(beta, (value, outcome.best.map(|(_, p)| p)));
    }
    Ok(out)
}

/// Reference exponent: the outer minimum over β of the relaxed problems.
/// `extra_candidates` (4-axis marginals of family argmins, which are
/// always feasible here) tighten the reported minimum.
pub fn liu_reference_exponent(
    input: &MacInput,
    extra_candidates: &[(Beta, Vec<f64>)],
) -> Result<(f64, BTreeMap<Beta, f64>), Error> {
    let branches = liu_branches(input)?;
    let mut per_beta: BTreeMap<Beta, f64> = branches.iter().map(|(b, (v, _))| (*b, *v)).collect();
    let mut scratch = Vec::new();
    for (beta, cand) in extra_candidates {
        let p = liu_problem(input, *beta);
        if crate::opt::pin_deviation(&p.space, &p.pins, cand, &mut scratch) > input.solver.feas_tol {
            continue;
        }
        let val = p.objective.eval(&p.space, cand, &mut scratch);
        let e = per_beta.get_mut(beta).unwrap();
        if val.is_finite() && val < *e {
            *e = val;
        }
    }
    let value = per_beta.values().cloned().fold(f64::INFINITY, f64::min);
    Ok((value, per_beta))
}

/// Comparison report: family exponents against the reference.
#[derive(Debug, Clone)]
pub struct LiuComparison {
    pub families: BTreeMap<Family, MacExponentResult>,
    pub liu_value: f64,
    pub liu_per_beta: BTreeMap<Beta, f64>,
    /// family value − reference value (≥ 0 up to solver noise)
    pub gaps: BTreeMap<Family, f64>,
}

/// Compute E_r, E_T, E_ex and the reference under minimum-equivocation
/// decoding, with the β-branch argmins fed back into the reference
/// minimization so reported gaps are conservative.
pub fn compare_vs_liu(input: &MacInput) -> Result<LiuComparison, Error> {
    if !matches!(input.metric, DecodingMetric::MinimumEquivocation) {
        return Err(Error::Invalid(
            "the reference comparison is stated for minimum-equivocation decoding".into(),
        ));
    }
    let fams = [Family::Random, Family::Typical, Family::Expurgated];
    let families = compute_mac_families(input, &fams)?;
    // feed family argmins (their UXYZ marginals) into the reference
    let mut extra: Vec<(Beta, Vec<f64>)> = Vec::new();
    for res in families.values() {
        for (&beta, br) in &res.branches {
            if let Some(a) = &br.argmin {
                let order = [
                    a.axis_index("U").unwrap(),
                    a.axis_index("X").unwrap(),
                    a.axis_index("Y").unwrap(),
                    a.axis_index("Z").unwrap(),
                ];
                let (_, probs) = a.marginal_ordered(&order);
                extra.push((beta, probs));
            }
        }
    }
    let (liu_value, liu_per_beta) = liu_reference_exponent(input, &extra)?;
    let gaps = fams
        .iter()
        .map(|&f| (f, families[&f].value - liu_value))
        .collect();
    Ok(LiuComparison { families, liu_value, liu_per_beta, gaps })
}

/// The concise information functions of the tilde-extended joint, given a
/// joint with named axes (subset of U, X, Y, Xt, Yt).
#[derive(Debug, Clone, Default)]
pub struct FValues {
    pub f_u: Option<f64>,
    pub f_x: Option<f64>,
    pub f_y: Option<f64>,
    pub f_xy: Option<f64>,
}

pub fn f_functions(v: &JointDist, rx: f64, ry: f64) -> FValues {
    let has = |n: &str| v.axis_index(n).is_ok();
    let mut out = FValues::default();
    if has("U") && has("X") && has("Y") {
        out.f_u = Some(v.mutual_information(&["X"], &["Y"], &["U"]).unwrap());
        if has("Xt") {
            out.f_x = Some(
                v.mutual_information(&["X"], &["Y"], &["U"]).unwrap()
                    + v.mutual_information(&["Xt"], &["X", "Y"], &["U"]).unwrap()
                    - rx,
            );
        }
        if has("Yt") {
            out.f_y = Some(
                v.mutual_information(&["X"], &["Y"], &["U"]).unwrap()
                    + v.mutual_information(&["Yt"], &["X", "Y"], &["U"]).unwrap()
                    - ry,
            );
        }
        if has("Xt") && has("Yt") {
            out.f_xy = Some(
                v.mutual_information(&["X"], &["Y"], &["U"]).unwrap()
                    + v.mutual_information(&["Xt"], &["Yt"], &["U"]).unwrap()
                    + v.mutual_information(&["Xt", "Yt"], &["X", "Y"], &["U"]).unwrap()
                    - rx
                    - ry,
            );
        }
    }
    out
}

/// Second-order information functions, for joints carrying hat axes.
#[derive(Debug, Clone, Default)]
pub struct EsValues {
    pub es_x: Option<f64>,
    pub es_y: Option<f64>,
    pub es_xy: Option<f64>,
}

pub fn es_functions(v: &JointDist, rx: f64, ry: f64) -> EsValues {
    let has = |n: &str| v.axis_index(n).is_ok();
    let mut out = EsValues::default();
    if has("Xh") && has("Xt") {
        out.es_x = Some(
            v.mutual_information(&["Xh"], &["X", "Y", "Xt"], &["U"]).unwrap()
                + v.mutual_information(&["Xt"], &["X", "Y"], &["U"]).unwrap()
                + v.mutual_information(&["X"], &["Y"], &["U"]).unwrap()
                - 2.0 * rx,
        );
    }
    if has("Yh") && has("Yt") {
        out.es_y = Some(
            v.mutual_information(&["Yh"], &["X", "Y", "Yt"], &["U"]).unwrap()
                + v.mutual_information(&["Yt"], &["X", "Y"], &["U"]).unwrap()
                + v.mutual_information(&["X"], &["Y"], &["U"]).unwrap()
                - 2.0 * ry,
        );
    }
    if has("Xh") && has("Yh") && has("Xt") && has("Yt") {
        out.es_xy = Some(
            v.mutual_information(&["Xh", "Yh"], &["X", "Y", "Xt", "Yt"], &["U"]).unwrap()
                + v.mutual_information(&["Xt", "Yt"], &["X", "Y"], &["U"]).unwrap()
                + v.mutual_information(&["X"], &["Y"], &["U"]).unwrap()
                + v.mutual_information(&["Xt"], &["Yt"], &["U"]).unwrap()
                + v.mutual_information(&["Xh"], &["Yh"], &["U"]).unwrap()
                - 2.0 * rx
                - 2.0 * ry,
        );
    }
    out
}

/// Objective of the β-branch at a named-axis joint (U, X, Y, tilde axes, Z).
pub fn mac_objective(
    v: &JointDist,
    beta: Beta,
    channel: &Channel,
    rx: f64,
    ry: f64,
    linear: bool,
) -> Result<f64, Error> {
    let d = mac_divergence_term(v, channel)?;
    let i_xy = v.mutual_information(&["X"], &["Y"], &["U"]).unwrap();
    let (aux, thr) = match beta {
        Beta::X => (v.mutual_information(&["Xt"], &["X", "Y", "Z"], &["U"]).unwrap(), rx),
        Beta::Y => (v.mutual_information(&["Yt"], &["X", "Y", "Z"], &["U"]).unwrap(), ry),
        Beta::XY => (
            v.mutual_information(&["Xt", "Yt"], &["X", "Y", "Z"], &["U"]).unwrap()
                + v.mutual_information(&["Xt"], &["Yt"], &["U"]).unwrap(),
            rx + ry,
        ),
    };
    Ok(if linear {
        d + i_xy + aux - thr
    } else {
        d + i_xy + (aux - thr).max(0.0)
    })
}

fn mac_divergence_term(v: &JointDist, channel: &Channel) -> Result<f64, Error> {
    let order = [
        v.axis_index("U")?,
        v.axis_index("X")?,
        v.axis_index("Y")?,
        v.axis_index("Z")?,
    ];
    let (sizes, m) = v.marginal_ordered(&order);
    let (nx, ny, nz) = (sizes[1], sizes[2], sizes[3]);
    let mut muxy = vec![0.0; sizes[0] * nx * ny];
    for (idx, &mm) in m.iter().enumerate() {
        muxy[idx / nz] += mm;
    }
    let mut d = 0.0;
    for (idx, &mm) in m.iter().enumerate() {
        if mm <= 0.0 {
            continue;
        }
        let z = idx % nz;
        let y = (idx / nz) % ny;
        let x = (idx / (nz * ny)) % nx;
        let w = channel.w2(z, x, y);
        if w <= 0.0 {
            return Ok(f64::INFINITY);
        }
        d += mm * (mm / (muxy[idx / nz] * w)).log2();
    }
    Ok(d.max(0.0))
}

/// Membership of a named-axis joint in a family's β-set; returns violated
/// constraint labels (empty = member).
pub fn mac_set_membership(
    v: &JointDist,
    beta: Beta,
    family: Family,
    input: &MacInput,
    eps: f64,
) -> Vec<String> {
    let (problem, bs) = match build_mac_problem(input, beta, family) {
        Ok(p) => p,
        Err(e) => return vec![format!("build: {e}")],
    };
    // reorder the joint to the canonical branch layout
    let order: Vec<usize> = bs
        .names
        .iter()
        .filter_map(|n| v.axis_index(n).ok())
        .collect();
    if order.len() != bs.names.len() {
        return vec!["axes".to_string()];
    }
    let (_, probs) = v.marginal_ordered(&order);
    crate::opt::violated_labels(&problem.space, &problem.constraints, &problem.pins, &probs, eps)
}
