//! Finite-alphabet joint distributions and the information functionals
//! (entropy, mutual information, divergence) the rest of the crate is
//! built on.
//!
//! All information quantities are in bits. Divergences return
//! `f64::INFINITY` when absolute continuity fails; the sentinel is
//! absorbing under addition and loses every minimization, so off-support
//! points fall out of optimizations without special casing.

use crate::Error;

pub(crate) const INV_LN2: f64 = std::f64::consts::LOG2_E;

/// Tolerance for "masses sum to one" checks at construction.
pub const MASS_TOL: f64 = 1e-12;

/// A named finite alphabet: one axis of a joint distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Axis {
    pub name: String,
    pub size: usize,
}

impl Axis {
    pub fn new(name: impl Into<String>, size: usize) -> Self {
        let name = name.into();
        assert!(size >= 1, "axis {name} must have size >= 1");
        Self { name, size }
    }
}

/// `x log2 x` with the `0 log 0 = 0` convention.
#[inline]
pub fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Entropy in bits of a bare probability vector (need not be validated).
pub fn entropy_of(p: &[f64]) -> f64 {
    -p.iter().copied().map(xlog2x).sum::<f64>()
}

/// KL divergence D(p‖q) in bits; `+inf` when p ≪ q fails.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "kl_divergence: alphabet size mismatch");
    let mut d = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi <= 0.0 {
            continue;
        }
        if qi <= 0.0 {
            return f64::INFINITY;
        }
        d += pi * (pi / qi).log2();
    }
    d.max(0.0)
}

/// A joint probability distribution over an ordered list of named axes.
///
/// Cells are stored row-major (last axis fastest). Immutable after
/// construction; everything here is safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist {
    axes: Vec<Axis>,
    mass: Vec<f64>,
}

impl JointDist {
    pub fn new(axes: Vec<Axis>, mass: Vec<f64>) -> Result<Self, Error> {
        let len: usize = axes.iter().map(|a| a.size).product();
        if mass.len() != len {
            return Err(Error::Shape(format!(
                "mass has {} cells, axes require {len}",
                mass.len()
            )));
        }
        for i in 0..axes.len() {
            for j in i + 1..axes.len() {
                if axes[i].name == axes[j].name {
                    return Err(Error::Axis(format!("duplicate axis name {}", axes[i].name)));
                }
            }
        }
        if mass.iter().any(|&m| m < 0.0 || !m.is_finite()) {
            return Err(Error::Invalid("negative or non-finite mass".into()));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::Invalid(format!("masses sum to {total}, not 1")));
        }
        Ok(Self { axes, mass })
    }

    /// Uniform distribution over the product alphabet.
    pub fn uniform(axes: Vec<Axis>) -> Self {
        let len: usize = axes.iter().map(|a| a.size).product();
        Self {
            axes,
            mass: vec![1.0 / len as f64; len],
        }
    }

    /// Single-axis distribution from a probability vector.
    pub fn from_probs(name: &str, p: &[f64]) -> Result<Self, Error> {
        Self::new(vec![Axis::new(name, p.len())], p.to_vec())
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn num_cells(&self) -> usize {
        self.mass.len()
    }

    pub fn axis_index(&self, name: &str) -> Result<usize, Error> {
        self.axes
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::Axis(format!("no axis named {name}")))
    }

    /// Bitmask over axis positions for a list of axis names.
    pub fn mask_of(&self, names: &[&str]) -> Result<u32, Error> {
        let mut mask = 0u32;
        for n in names {
            let i = self.axis_index(n)?;
            if mask & (1 << i) != 0 {
                return Err(Error::Axis(format!("axis {n} listed twice")));
            }
            mask |= 1 << i;
        }
        Ok(mask)
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.axes.len()];
        for i in (0..self.axes.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.axes[i + 1].size;
        }
        s
    }

    /// Coordinates of a flat cell index.
    pub fn coords_of(&self, mut idx: usize) -> Vec<usize> {
        let mut c = vec![0usize; self.axes.len()];
        for i in (0..self.axes.len()).rev() {
            c[i] = idx % self.axes[i].size;
            idx /= self.axes[i].size;
        }
        c
    }

    /// Marginal mass vector over the axes in `mask`, in the order the axes
    /// appear in `self.axes`.
    pub fn marginal_mass(&self, mask: u32) -> Vec<f64> {
        let kept: Vec<usize> = (0..self.axes.len()).filter(|i| mask & (1 << i) != 0).collect();
        let msize: usize = kept.iter().map(|&i| self.axes[i].size).product();
        let mut out = vec![0.0; msize.max(1)];
        let strides = self.strides();
        for (idx, &m) in self.mass.iter().enumerate() {
            let mut mi = 0usize;
            for &k in &kept {
                let coord = (idx / strides[k]) % self.axes[k].size;
                mi = mi * self.axes[k].size + coord;
            }
            out[mi] += m;
        }
        out
    }

    /// Marginal as a distribution over the named axes (in their original order).
    pub fn marginal(&self, names: &[&str]) -> Result<JointDist, Error> {
        let mask = self.mask_of(names)?;
        let kept: Vec<usize> = (0..self.axes.len()).filter(|i| mask & (1 << i) != 0).collect();
        let axes: Vec<Axis> = kept.iter().map(|&i| self.axes[i].clone()).collect();
        let mass = self.marginal_mass(mask);
        Ok(JointDist { axes, mass })
    }

    /// Marginal over an explicit axis-index order; returns (sizes, mass)
    /// with cells laid out in the requested order. Used to hand reshaped
    /// views to decoding metrics.
    pub fn marginal_ordered(&self, order: &[usize]) -> (Vec<usize>, Vec<f64>) {
        let sizes: Vec<usize> = order.iter().map(|&i| self.axes[i].size).collect();
        let msize: usize = sizes.iter().product();
        let mut out = vec![0.0; msize.max(1)];
        let strides = self.strides();
        for (idx, &m) in self.mass.iter().enumerate() {
            let mut mi = 0usize;
            for (&k, &sz) in order.iter().zip(&sizes) {
                let coord = (idx / strides[k]) % self.axes[k].size;
                mi = mi * sz + coord;
            }
            out[mi] += m;
        }
        (sizes, out)
    }

    /// Entropy in bits of the marginal over `mask` (full joint if mask covers
    /// all axes; a point mass / scalar gives 0).
    pub fn entropy_mask(&self, mask: u32) -> f64 {
        entropy_of(&self.marginal_mass(mask))
    }

    /// Entropy of the whole joint, in bits.
    pub fn entropy(&self) -> f64 {
        entropy_of(&self.mass)
    }

    /// H(target | given) in bits.
    pub fn conditional_entropy(&self, target: &[&str], given: &[&str]) -> Result<f64, Error> {
        let t = self.mask_of(target)?;
        let g = self.mask_of(given)?;
        if t & g != 0 {
            return Err(Error::Axis("target and given axes overlap".into()));
        }
        Ok(self.entropy_mask(t | g) - self.entropy_mask(g))
    }

    /// I(a ∧ b | given) in bits; `given` may be empty.
    pub fn mutual_information(&self, a: &[&str], b: &[&str], given: &[&str]) -> Result<f64, Error> {
        let ma = self.mask_of(a)?;
        let mb = self.mask_of(b)?;
        let mg = self.mask_of(given)?;
        if ma & mb != 0 || ma & mg != 0 || mb & mg != 0 {
            return Err(Error::Axis("axis groups must be pairwise disjoint".into()));
        }
        Ok(mi_from_masks(self, ma, mb, mg))
    }

    /// Condition on `given` axes: one row per conditioning cell over the
    /// remaining axes. Zero-mass rows are set to uniform and flagged.
    pub fn condition(&self, given: &[&str]) -> Result<ConditionalDist, Error> {
        let g = self.mask_of(given)?;
        let kept_g: Vec<usize> = (0..self.axes.len()).filter(|i| g & (1 << i) != 0).collect();
        let kept_t: Vec<usize> = (0..self.axes.len()).filter(|i| g & (1 << i) == 0).collect();
        if kept_t.is_empty() {
            return Err(Error::Axis("conditioning on every axis".into()));
        }
        let from_axes: Vec<Axis> = kept_g.iter().map(|&i| self.axes[i].clone()).collect();
        let to_axes: Vec<Axis> = kept_t.iter().map(|&i| self.axes[i].clone()).collect();
        let nfrom: usize = from_axes.iter().map(|a| a.size).product::<usize>().max(1);
        let nto: usize = to_axes.iter().map(|a| a.size).product();
        let strides = self.strides();
        let mut rows = vec![vec![0.0; nto]; nfrom];
        for (idx, &m) in self.mass.iter().enumerate() {
            let mut gi = 0usize;
            for &k in &kept_g {
                gi = gi * self.axes[k].size + (idx / strides[k]) % self.axes[k].size;
            }
            let mut ti = 0usize;
            for &k in &kept_t {
                ti = ti * self.axes[k].size + (idx / strides[k]) % self.axes[k].size;
            }
            rows[gi][ti] += m;
        }
        let mut unsupported = vec![false; nfrom];
        for (r, row) in rows.iter_mut().enumerate() {
            let s: f64 = row.iter().sum();
            if s <= 0.0 {
                unsupported[r] = true;
                row.fill(1.0 / nto as f64);
            } else {
                for v in row.iter_mut() {
                    *v /= s;
                }
            }
        }
        Ok(ConditionalDist {
            from_axes,
            to_axes,
            rows,
            unsupported,
        })
    }
}

/// I(a ∧ b | g) from precomputed masks.
pub(crate) fn mi_from_masks(d: &JointDist, ma: u32, mb: u32, mg: u32) -> f64 {
    let v = d.entropy_mask(ma | mg) + d.entropy_mask(mb | mg)
        - d.entropy_mask(ma | mb | mg)
        - d.entropy_mask(mg);
    v.max(0.0)
}

/// A row-stochastic conditional distribution with named axes on both sides.
#[derive(Debug, Clone)]
pub struct ConditionalDist {
    pub from_axes: Vec<Axis>,
    pub to_axes: Vec<Axis>,
    /// One row per conditioning cell (row-major over `from_axes`).
    pub rows: Vec<Vec<f64>>,
    /// Rows that had zero conditioning mass; contents are a flagged
    /// uniform placeholder and carry no weight downstream.
    pub unsupported: Vec<bool>,
}

impl ConditionalDist {
    pub fn new(from_axes: Vec<Axis>, to_axes: Vec<Axis>, rows: Vec<Vec<f64>>) -> Result<Self, Error> {
        let nfrom: usize = from_axes.iter().map(|a| a.size).product::<usize>().max(1);
        let nto: usize = to_axes.iter().map(|a| a.size).product();
        if rows.len() != nfrom {
            return Err(Error::Shape(format!("expected {nfrom} rows, got {}", rows.len())));
        }
        for row in &rows {
            if row.len() != nto {
                return Err(Error::Shape("row length mismatch".into()));
            }
            if row.iter().any(|&p| p < 0.0) {
                return Err(Error::Invalid("negative conditional mass".into()));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > MASS_TOL {
                return Err(Error::Invalid(format!("conditional row sums to {s}")));
            }
        }
        let unsupported = vec![false; rows.len()];
        Ok(Self {
            from_axes,
            to_axes,
            rows,
            unsupported,
        })
    }

    /// Compose with a marginal on the conditioning axes: joint over
    /// (from_axes, to_axes).
    pub fn compose(&self, marginal: &JointDist) -> Result<JointDist, Error> {
        if marginal.axes() != self.from_axes.as_slice() {
            return Err(Error::Axis("compose: marginal axes do not match".into()));
        }
        let nto: usize = self.to_axes.iter().map(|a| a.size).product();
        let mut mass = Vec::with_capacity(marginal.num_cells() * nto);
        for (r, &pm) in marginal.mass().iter().enumerate() {
            for t in 0..nto {
                mass.push(pm * self.rows[r][t]);
            }
        }
        let mut axes = self.from_axes.clone();
        axes.extend(self.to_axes.iter().cloned());
        JointDist::new(axes, mass)
    }

    /// Conditional divergence D(self ‖ other | p) in bits, where `p` is a
    /// mass vector over the conditioning cells. Unsupported rows with zero
    /// weight are skipped.
    pub fn conditional_kl(&self, other: &ConditionalDist, p: &[f64]) -> Result<f64, Error> {
        if self.rows.len() != other.rows.len()
            || self.rows.first().map(Vec::len) != other.rows.first().map(Vec::len)
        {
            return Err(Error::Shape("conditional_kl: shape mismatch".into()));
        }
        if p.len() != self.rows.len() {
            return Err(Error::Shape("conditional_kl: conditioning mass mismatch".into()));
        }
        let mut d = 0.0;
        for (r, &w) in p.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            let term = kl_divergence(&self.rows[r], &other.rows[r]);
            if term.is_infinite() {
                return Ok(f64::INFINITY);
            }
            d += w * term;
        }
        Ok(d)
    }
}
