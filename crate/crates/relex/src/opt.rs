//! Shared machinery for minimizing information-functional objectives over
//! joint-distribution polytopes with pinned marginals.
//!
//! Every objective and constraint this crate needs is a linear combination
//! of subset entropies of the working joint plus a linear term, so values
//! and gradients come from one marginal sweep. The solver runs two stages:
//! an exact minimum over the constrained type lattice (when the problem is
//! small enough), then multiplicative-gradient refinement from the best
//! lattice points and random restarts. Pinned marginals are restored after
//! every step by iterative proportional fitting; candidates that violate
//! the inequality constraints are steered back by a quadratic penalty but
//! only feasible iterates are ever reported.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dist::{entropy_of, INV_LN2};
use crate::types::{round_to_type, visit_types, MarginalConstraint};

/// Solver knobs shared by the DMC and MAC exponent computations.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Denominator of the exact type-lattice stage.
    pub grid_denominator: u64,
    /// Iteration budget per refinement start.
    pub refine_steps: usize,
    /// Number of random restarts (in addition to structured seeds).
    pub restarts: usize,
    pub seed: u64,
    /// Feasibility tolerance ε_c for marginal pinning and set membership.
    pub feas_tol: f64,
    /// Objective tolerance ε_o.
    pub obj_tol: f64,
    /// The lattice stage is skipped when the joint has more cells than
    /// this; within the cap the stage coarsens its denominator as needed
    /// to keep the enumeration in the millions.
    pub lattice_max_cells: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grid_denominator: 40,
            refine_steps: 700,
            restarts: 10,
            seed: 0,
            feas_tol: 1e-9,
            obj_tol: 1e-6,
            lattice_max_cells: 32,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), crate::Error> {
        if self.grid_denominator < 2 {
            return Err(crate::Error::Invalid("grid denominator must be >= 2".into()));
        }
        if self.feas_tol <= 0.0 || self.obj_tol <= 0.0 {
            return Err(crate::Error::Invalid("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Row-major shape of the working joint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shape {
    pub sizes: Vec<usize>,
    pub strides: Vec<usize>,
    pub len: usize,
}

impl Shape {
    pub fn new(sizes: Vec<usize>) -> Self {
        let mut strides = vec![1usize; sizes.len()];
        for i in (0..sizes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * sizes[i + 1];
        }
        let len = sizes.iter().product();
        Self { sizes, strides, len }
    }

    #[inline]
    pub fn coord(&self, idx: usize, axis: usize) -> usize {
        (idx / self.strides[axis]) % self.sizes[axis]
    }
}

/// Precomputed projection table: full cell index -> marginal cell index
/// for one axis subset.
#[derive(Debug, Clone)]
pub struct MargTable {
    pub mask: u32,
    pub size: usize,
    pub map: Vec<u32>,
}

/// The working space: a shape plus the marginal tables every expression in
/// the problem references.
#[derive(Debug, Clone)]
pub struct Space {
    pub shape: Shape,
    tables: Vec<MargTable>,
}

impl Space {
    pub fn new(sizes: Vec<usize>) -> Self {
        Self { shape: Shape::new(sizes), tables: Vec::new() }
    }

    /// Intern a marginal table for `mask`, returning its index.
    pub fn table(&mut self, mask: u32) -> usize {
        if let Some(i) = self.tables.iter().position(|t| t.mask == mask) {
            return i;
        }
        let kept: Vec<usize> = (0..self.shape.sizes.len())
            .filter(|i| mask & (1 << i) != 0)
            .collect();
        let size: usize = kept.iter().map(|&i| self.shape.sizes[i]).product::<usize>().max(1);
        let mut map = vec![0u32; self.shape.len];
        for (idx, slot) in map.iter_mut().enumerate() {
            let mut mi = 0usize;
            for &k in &kept {
                mi = mi * self.shape.sizes[k] + self.shape.coord(idx, k);
            }
            *slot = mi as u32;
        }
        self.tables.push(MargTable { mask, size, map });
        self.tables.len() - 1
    }

    pub fn tables(&self) -> &[MargTable] {
        &self.tables
    }

    /// Marginal mass for table `t`.
    pub fn marginal(&self, t: usize, v: &[f64], out: &mut Vec<f64>) {
        let tab = &self.tables[t];
        out.clear();
        out.resize(tab.size, 0.0);
        for (idx, &m) in v.iter().enumerate() {
            out[tab.map[idx] as usize] += m;
        }
    }
}

/// A linear combination of subset entropies plus a linear form:
/// `Σ coeff·H(marginal) + <linear, v> + constant`, all in bits.
#[derive(Debug, Clone, Default)]
pub struct EntropyExpr {
    pub hterms: Vec<(usize, f64)>,
    pub linear: Option<Vec<f64>>,
    pub constant: f64,
}

impl EntropyExpr {
    pub fn h(mut self, table: usize, coeff: f64) -> Self {
        self.hterms.push((table, coeff));
        self
    }

    /// Add I(a ∧ b | g) with coefficient `c`; masks must already be merged
    /// into tables by the caller.
    pub fn mi(
        mut self,
        space: &mut Space,
        a: u32,
        b: u32,
        g: u32,
        c: f64,
    ) -> Self {
        let t_ag = space.table(a | g);
        let t_bg = space.table(b | g);
        let t_abg = space.table(a | b | g);
        self.hterms.push((t_ag, c));
        self.hterms.push((t_bg, c));
        self.hterms.push((t_abg, -c));
        if g != 0 {
            let t_g = space.table(g);
            self.hterms.push((t_g, -c));
        }
        self
    }

    pub fn with_linear(mut self, linear: Vec<f64>) -> Self {
        self.linear = Some(linear);
        self
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.constant = c;
        self
    }

    /// Merge another expression into this one with a scale factor.
    pub fn add_scaled(&mut self, other: &EntropyExpr, scale: f64) {
        for &(t, c) in &other.hterms {
            self.hterms.push((t, c * scale));
        }
        if let Some(ol) = &other.linear {
            match &mut self.linear {
                Some(l) => {
                    for (a, b) in l.iter_mut().zip(ol) {
                        *a += b * scale;
                    }
                }
                None => self.linear = Some(ol.iter().map(|&x| x * scale).collect()),
            }
        }
        self.constant += other.constant * scale;
    }

    pub fn eval(&self, space: &Space, v: &[f64], scratch: &mut Vec<f64>) -> f64 {
        let mut val = self.constant;
        for &(t, c) in &self.hterms {
            space.marginal(t, v, scratch);
            val += c * entropy_of(scratch);
        }
        if let Some(lin) = &self.linear {
            for (idx, &m) in v.iter().enumerate() {
                if m > 0.0 {
                    let l = lin[idx];
                    if l.is_infinite() {
                        return f64::INFINITY;
                    }
                    val += l * m;
                }
            }
        }
        val
    }

    /// Accumulate `scale * ∂(self)/∂v` into `grad` and return the value.
    pub fn eval_grad(
        &self,
        space: &Space,
        v: &[f64],
        grad: &mut [f64],
        scale: f64,
        scratch: &mut Vec<f64>,
    ) -> f64 {
        let mut val = self.constant;
        for &(t, c) in &self.hterms {
            space.marginal(t, v, scratch);
            val += c * entropy_of(scratch);
            let tab = &space.tables[t];
            for (idx, g) in grad.iter_mut().enumerate() {
                let m = scratch[tab.map[idx] as usize];
                if m > 0.0 {
                    *g += scale * c * (-(m.log2()) - INV_LN2);
                }
            }
        }
        if let Some(lin) = &self.linear {
            for (idx, &m) in v.iter().enumerate() {
                let l = lin[idx];
                if l.is_infinite() {
                    if m > 0.0 {
                        return f64::INFINITY;
                    }
                    continue;
                }
                val += l * m;
                grad[idx] += scale * l;
            }
        }
        val
    }
}

/// Objective: a base expression plus optional positive-part terms
/// `|expr − threshold|^+`.
#[derive(Debug, Clone, Default)]
pub struct Objective {
    pub base: EntropyExpr,
    pub plus_parts: Vec<(EntropyExpr, f64)>,
}

impl Objective {
    pub fn eval(&self, space: &Space, v: &[f64], scratch: &mut Vec<f64>) -> f64 {
        let mut val = self.base.eval(space, v, scratch);
        for (e, thr) in &self.plus_parts {
            val += (e.eval(space, v, scratch) - thr).max(0.0);
        }
        val
    }

    pub fn eval_grad(
        &self,
        space: &Space,
        v: &[f64],
        grad: &mut [f64],
        scratch: &mut Vec<f64>,
    ) -> f64 {
        let mut val = self.base.eval_grad(space, v, grad, 1.0, scratch);
        for (e, thr) in &self.plus_parts {
            let ev = e.eval(space, v, scratch);
            if ev > *thr {
                val += e.eval_grad(space, v, grad, 1.0, scratch) - thr;
            }
        }
        val
    }
}

type ClosureConstraint = Arc<dyn Fn(&Space, &[f64]) -> f64 + Send + Sync>;

/// An inequality constraint `value ≤ bound (+ ε_c)`.
#[derive(Clone)]
pub struct Constraint {
    pub label: String,
    pub kind: ConstraintKind,
    pub bound: f64,
}

#[derive(Clone)]
pub enum ConstraintKind {
    Expr(EntropyExpr),
    /// No gradient available; participates only in feasibility filtering.
    Closure(ClosureConstraint),
}

impl Constraint {
    pub fn expr(label: impl Into<String>, e: EntropyExpr, bound: f64) -> Self {
        Self { label: label.into(), kind: ConstraintKind::Expr(e), bound }
    }

    pub fn closure(label: impl Into<String>, f: ClosureConstraint, bound: f64) -> Self {
        Self { label: label.into(), kind: ConstraintKind::Closure(f), bound }
    }

    pub fn eval(&self, space: &Space, v: &[f64], scratch: &mut Vec<f64>) -> f64 {
        match &self.kind {
            ConstraintKind::Expr(e) => e.eval(space, v, scratch),
            ConstraintKind::Closure(f) => f(space, v),
        }
    }
}

/// A marginal pinned to a fixed target distribution.
#[derive(Debug, Clone)]
pub struct Pin {
    pub table: usize,
    pub target: Vec<f64>,
}

/// The full minimization problem.
pub struct Problem {
    pub space: Space,
    pub objective: Objective,
    pub constraints: Vec<Constraint>,
    pub pins: Vec<Pin>,
    /// Cells allowed to carry mass (off-support cells of the channel are
    /// excluded so divergences stay finite).
    pub support: Vec<bool>,
    /// Structured starting points (diagonal couplings, lifted reference
    /// optima, ...); sanitized before use.
    pub seeds: Vec<Vec<f64>>,
}

/// Outcome of one solve.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    /// Best feasible (value, point), if any feasible point was found.
    pub best: Option<(f64, Vec<f64>)>,
    /// Exact minimum over the constrained type lattice, if that stage ran.
    pub lattice_value: Option<f64>,
    /// Denominator the lattice stage actually used (it coarsens the
    /// configured one when enumeration would explode).
    pub lattice_denominator: Option<u64>,
    /// Best value per refinement start (feasible starts only).
    pub start_values: Vec<f64>,
}

impl SolveOutcome {
    pub fn value(&self) -> f64 {
        self.best.as_ref().map(|(v, _)| *v).unwrap_or(f64::INFINITY)
    }

    /// Max-min spread of the per-start refined values.
    pub fn restart_spread(&self) -> f64 {
        let finite: Vec<f64> = self.start_values.iter().copied().filter(|v| v.is_finite()).collect();
        if finite.len() < 2 {
            return 0.0;
        }
        let mx = finite.iter().cloned().fold(f64::MIN, f64::max);
        let mn = finite.iter().cloned().fold(f64::MAX, f64::min);
        mx - mn
    }
}

/// Whether every pinned marginal is exactly representable on the type
/// lattice of denominator `n` (within `tol`); when it is not, the lattice
/// stage solves a rounded problem and its value is a trust anchor only.
pub fn pins_lattice_exact(pins: &[Pin], n: u64, tol: f64) -> bool {
    pins.iter().all(|pin| {
        round_to_type(&pin.target, n)
            .iter()
            .zip(&pin.target)
            .all(|(&c, &p)| (c as f64 / n as f64 - p).abs() <= tol)
    })
}

/// Iterative proportional fitting onto the pinned marginals. Returns the
/// max marginal deviation after fitting.
pub fn ipf(space: &Space, pins: &[Pin], v: &mut [f64], tol: f64, max_rounds: usize) -> f64 {
    let mut scratch = Vec::new();
    let mut dev = f64::MAX;
    for _ in 0..max_rounds {
        for pin in pins {
            space.marginal(pin.table, v, &mut scratch);
            let tab = &space.tables[pin.table];
            // scale factors per marginal cell
            for (idx, m) in v.iter_mut().enumerate() {
                let mi = tab.map[idx] as usize;
                let cur = scratch[mi];
                let tgt = pin.target[mi];
                if cur > 0.0 {
                    *m *= tgt / cur;
                } else if tgt > 0.0 {
                    // fiber died; nothing to scale, handled by caller checks
                } else {
                    *m = 0.0;
                }
            }
        }
        dev = pin_deviation(space, pins, v, &mut scratch);
        if dev < tol {
            break;
        }
    }
    dev
}

pub fn pin_deviation(space: &Space, pins: &[Pin], v: &[f64], scratch: &mut Vec<f64>) -> f64 {
    let mut dev: f64 = 0.0;
    for pin in pins {
        space.marginal(pin.table, v, scratch);
        for (a, b) in scratch.iter().zip(&pin.target) {
            dev = dev.max((a - b).abs());
        }
    }
    dev
}

fn feasible(
    space: &Space,
    constraints: &[Constraint],
    pins: &[Pin],
    v: &[f64],
    tol: f64,
    scratch: &mut Vec<f64>,
) -> bool {
    if pin_deviation(space, pins, v, scratch) > tol {
        return false;
    }
    constraints
        .iter()
        .all(|c| c.eval(space, v, scratch) <= c.bound + tol)
}

/// Names of constraints violated at `v`, for membership reporting.
pub fn violated_labels(
    space: &Space,
    constraints: &[Constraint],
    pins: &[Pin],
    v: &[f64],
    tol: f64,
) -> Vec<String> {
    let mut scratch = Vec::new();
    let mut out = Vec::new();
    if pin_deviation(space, pins, v, &mut scratch) > tol {
        out.push("marginal".to_string());
    }
    for c in constraints {
        if c.eval(space, v, &mut scratch) > c.bound + tol {
            out.push(c.label.clone());
        }
    }
    out
}

fn penalized_value(p: &Problem, v: &[f64], mu: f64, scratch: &mut Vec<f64>) -> f64 {
    let mut val = p.objective.eval(&p.space, v, scratch);
    for c in &p.constraints {
        let excess = c.eval(&p.space, v, scratch) - c.bound;
        if excess > 0.0 {
            val += mu * excess * excess;
        }
    }
    val
}

fn penalized_grad(p: &Problem, v: &[f64], mu: f64, grad: &mut [f64], scratch: &mut Vec<f64>) -> f64 {
    grad.fill(0.0);
    let mut val = p.objective.eval_grad(&p.space, v, grad, scratch);
    for c in &p.constraints {
        if let ConstraintKind::Expr(e) = &c.kind {
            let ev = e.eval(&p.space, v, scratch);
            let excess = ev - c.bound;
            if excess > 0.0 {
                e.eval_grad(&p.space, v, grad, 2.0 * mu * excess, scratch);
                val += mu * excess * excess;
            }
        } else {
            let excess = c.eval(&p.space, v, scratch) - c.bound;
            if excess > 0.0 {
                val += mu * excess * excess;
            }
        }
    }
    val
}

/// Zero forbidden cells, floor the rest, renormalize, and pin. Returns
/// `None` when the point cannot be made consistent with the support.
fn sanitize(p: &Problem, start: &[f64]) -> Option<Vec<f64>> {
    let mut v: Vec<f64> = start
        .iter()
        .zip(&p.support)
        .map(|(&m, &ok)| if ok { m.max(1e-14) } else { 0.0 })
        .collect();
    let total: f64 = v.iter().sum();
    if total <= 0.0 {
        return None;
    }
    for m in &mut v {
        *m /= total;
    }
    let dev = ipf(&p.space, &p.pins, &mut v, 1e-13, 300);
    if dev > 1e-8 {
        return None;
    }
    Some(v)
}

fn descend(p: &Problem, cfg: &SolverConfig, start: Vec<f64>) -> Option<(f64, Vec<f64>)> {
    let mut scratch = Vec::new();
    let mut v = start;
    let mut grad = vec![0.0; v.len()];
    let mut best: Option<(f64, Vec<f64>)> = None;
    let consider = |v: &[f64], best: &mut Option<(f64, Vec<f64>)>, scratch: &mut Vec<f64>| {
        if feasible(&p.space, &p.constraints, &p.pins, v, cfg.feas_tol, scratch) {
            let val = p.objective.eval(&p.space, v, scratch);
            if val.is_finite() && best.as_ref().map(|(b, _)| val < *b).unwrap_or(true) {
                *best = Some((val, v.to_vec()));
            }
        }
    };
    consider(&v, &mut best, &mut scratch);
    // penalty ladder: a soft phase to travel, stiff phases to land on
    // constraint boundaries
    let phases = [40.0, 4e3, 4e5];
    let steps = (cfg.refine_steps / phases.len()).max(40);
    let mut proposal = vec![0.0; v.len()];
    for &mu in &phases {
        let mut fcur = penalized_value(p, &v, mu, &mut scratch);
        if !fcur.is_finite() {
            break;
        }
        let mut eta = 0.4;
        // stop a phase once progress per check window drops below ε_o
        let window = 80usize;
        let mut window_ref = fcur;
        for it in 0..steps {
            if it % window == window - 1 {
                if window_ref - fcur < cfg.obj_tol * 0.01 {
                    break;
                }
                window_ref = fcur;
            }
            let _ = penalized_grad(p, &v, mu, &mut grad, &mut scratch);
            // center the gradient over the current point so the step is
            // invariant to constant shifts
            let mut mean = 0.0;
            for (idx, &m) in v.iter().enumerate() {
                mean += m * grad[idx];
            }
            let mut accepted = false;
            while eta >= 1e-9 {
                let mut total = 0.0;
                for idx in 0..v.len() {
                    if v[idx] > 0.0 {
                        let step = (-eta * (grad[idx] - mean)).clamp(-40.0, 40.0);
                        proposal[idx] = v[idx] * step.exp2();
                    } else {
                        proposal[idx] = 0.0;
                    }
                    total += proposal[idx];
                }
                if total <= 0.0 {
                    eta *= 0.5;
                    continue;
                }
                for m in proposal.iter_mut() {
                    *m /= total;
                }
                ipf(&p.space, &p.pins, &mut proposal, 1e-13, 80);
                let fnew = penalized_value(p, &proposal, mu, &mut scratch);
                if fnew.is_finite() && fnew < fcur - 1e-15 {
                    std::mem::swap(&mut v, &mut proposal);
                    fcur = fnew;
                    consider(&v, &mut best, &mut scratch);
                    eta = (eta * 1.25).min(8.0);
                    accepted = true;
                    break;
                }
                eta *= 0.5;
            }
            if !accepted {
                break;
            }
        }
    }
    // the stiff-penalty optimum may sit a hair outside the feasible set;
    // pull it back onto the boundary along the segment toward the best
    // feasible point found
    if let Some((_, anchor)) = best.clone() {
        if !feasible(&p.space, &p.constraints, &p.pins, &v, cfg.feas_tol, &mut scratch) {
            let mut lo = 0.0f64; // fraction of anchor mixed in; v side infeasible
            let mut hi = 1.0f64;
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                let mut cand: Vec<f64> = v
                    .iter()
                    .zip(&anchor)
                    .map(|(&a, &b)| (1.0 - mid) * a + mid * b)
                    .collect();
                ipf(&p.space, &p.pins, &mut cand, 1e-13, 80);
                if feasible(&p.space, &p.constraints, &p.pins, &cand, cfg.feas_tol, &mut scratch) {
                    consider(&cand, &mut best, &mut scratch);
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
        }
    }
    best
}

/// The exact lattice stage: enumerate all joint types of denominator
/// `cfg.grid_denominator` matching the pins (rounded to the lattice), keep
/// the feasible minimum of the true objective plus the best points as
/// refinement seeds. When the requested denominator would explode the
/// enumeration, the stage coarsens it (down to 4) before giving up, so
/// larger alphabets still get a lattice anchor.
fn lattice_stage(
    p: &Problem,
    cfg: &SolverConfig,
    keep: usize,
) -> (Option<f64>, Vec<Vec<f64>>, Option<u64>) {
    let cells = p.space.shape.len;
    if cells > cfg.lattice_max_cells {
        return (None, Vec::new(), None);
    }
    let indep: usize = p
        .pins
        .iter()
        .map(|pin| p.space.tables[pin.table].size.saturating_sub(1))
        .sum();
    let free = cells.saturating_sub(1).saturating_sub(indep);
    // stars-and-bars estimate of the unpruned lattice size
    let too_big = |n: u64| -> bool {
        crate::types::binomial(n + free as u64, free as u64) > 6_000_000
    };
    let mut n = cfg.grid_denominator;
    while n > 4 && too_big(n) {
        n = (n / 2).max(4);
    }
    if too_big(n) {
        return (None, Vec::new(), None);
    }
    let constraints: Vec<MarginalConstraint> = p
        .pins
        .iter()
        .map(|pin| MarginalConstraint {
            mask: p.space.tables[pin.table].mask,
            counts: round_to_type(&pin.target, n),
        })
        .collect();
    let mut scratch = Vec::new();
    let mut best_val = f64::INFINITY;
    let mut top: Vec<(f64, Vec<f64>)> = Vec::new();
    let nf = n as f64;
    let mut probs = vec![0.0f64; cells];
    visit_types(&p.space.shape.sizes, n, &constraints, |counts| {
        for (i, &c) in counts.iter().enumerate() {
            probs[i] = c as f64 / nf;
        }
        // support filter
        if probs
            .iter()
            .zip(&p.support)
            .any(|(&m, &ok)| m > 0.0 && !ok)
        {
            return;
        }
        let ok = p
            .constraints
            .iter()
            .all(|c| c.eval(&p.space, &probs, &mut scratch) <= c.bound + cfg.feas_tol);
        if !ok {
            return;
        }
        let val = p.objective.eval(&p.space, &probs, &mut scratch);
        if !val.is_finite() {
            return;
        }
        if val < best_val {
            best_val = val;
        }
        if top.len() < keep {
            top.push((val, probs.clone()));
            top.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        } else if val < top[keep - 1].0 {
            top[keep - 1] = (val, probs.clone());
            top.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        }
    });
    let seeds = top.into_iter().map(|(_, v)| v).collect();
    (
        if best_val.is_finite() { Some(best_val) } else { None },
        seeds,
        Some(n),
    )
}

/// Solve the problem: lattice stage plus refinement from structured seeds
/// and random restarts. Deterministic for a fixed config.
pub fn solve(p: &Problem, cfg: &SolverConfig) -> SolveOutcome {
    let (lattice_value, lattice_seeds, lattice_denominator) = lattice_stage(p, cfg, 6);
    let mut starts: Vec<Vec<f64>> = Vec::new();
    for s in &p.seeds {
        if let Some(v) = sanitize(p, s) {
            starts.push(v);
        }
    }
    for s in lattice_seeds {
        if let Some(v) = sanitize(p, &s) {
            starts.push(v);
        }
    }
    let cells = p.space.shape.len;
    for r in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(r as u64 + 1)));
        let raw: Vec<f64> = (0..cells)
            .map(|_| -(rng.gen::<f64>().max(1e-12)).ln())
            .collect();
        if let Some(v) = sanitize(p, &raw) {
            starts.push(v);
        }
    }
    let results: Vec<Option<(f64, Vec<f64>)>> = starts
        .into_par_iter()
        .map(|s| descend(p, cfg, s))
        .collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut start_values = Vec::new();
    for r in results.into_iter().flatten() {
        start_values.push(r.0);
        if best.as_ref().map(|(b, _)| r.0 < *b).unwrap_or(true) {
            best = Some(r);
        }
    }
    SolveOutcome { best, lattice_value, lattice_denominator, start_values }
}
