//! Non-smooth penalties `h(x) = lambda * Omega(x)`: evaluation, exact
//! proximal mappings and the linear map `A` with `h(x) = max_{v in Q} v^T A x`.
//!
//! Two penalties are supported: the l1 norm and the weighted group norm
//! `Omega(x) = sum_g w_g ||x_g||` over an arbitrary (possibly overlapping)
//! family of index groups.

use std::fmt::Write as _;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::vector::{norm_slice, DenseVector};

/// Deepest dyadic hierarchy [`GroupStructure::hierarchical`] will build.
pub const MAX_HIERARCHY_DEPTH: u32 = 20;

/// Convergence tolerance of the dual block-coordinate prox.
pub const DUAL_ASCENT_TOL: f64 = 1e-10;

/// A family of index groups over `0..p` with positive weights.
///
/// Indices are stored 0-based; the text format uses 1-based indices.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupStructure {
    p: usize,
    groups: Vec<Vec<usize>>,
    weights: Vec<f64>,
    offsets: Vec<usize>,
    laminar: bool,
    visit_order: Vec<usize>,
    sq_weight_sums: Vec<f64>,
}

impl GroupStructure {
    /// Builds a structure from 0-based groups. Indices inside a group are
    /// sorted; duplicates within one group and empty groups are rejected.
    pub fn new(p: usize, groups: Vec<Vec<usize>>, weights: Vec<f64>) -> Result<Self> {
        if p == 0 {
            return Err(Error::param("group structure needs p >= 1"));
        }
        if groups.is_empty() {
            return Err(Error::param("group structure needs at least one group"));
        }
        if groups.len() != weights.len() {
            return Err(Error::param(format!(
                "{} groups but {} weights",
                groups.len(),
                weights.len()
            )));
        }
        let mut groups = groups;
        for (k, (g, w)) in groups.iter_mut().zip(&weights).enumerate() {
            if !(w.is_finite() && *w > 0.0) {
                return Err(Error::param(format!("group {} has non-positive weight {w}", k + 1)));
            }
            if g.is_empty() {
                return Err(Error::param(format!("group {} is empty", k + 1)));
            }
            g.sort_unstable();
            if g.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::param(format!("group {} repeats an index", k + 1)));
            }
            if let Some(&bad) = g.iter().find(|&&i| i >= p) {
                return Err(Error::param(format!(
                    "group {} has index {} outside 1..={p}",
                    k + 1,
                    bad + 1
                )));
            }
        }

        let mut offsets = Vec::with_capacity(groups.len() + 1);
        let mut acc = 0usize;
        offsets.push(0);
        for g in &groups {
            acc += g.len();
            offsets.push(acc);
        }

        let mut visit_order: Vec<usize> = (0..groups.len()).collect();
        // Non-decreasing size, ties by smallest first index.
        visit_order.sort_by_key(|&k| (groups[k].len(), groups[k][0]));

        let laminar = is_laminar(p, &groups, &visit_order);

        let mut sq_weight_sums = vec![0.0; p];
        for (g, w) in groups.iter().zip(&weights) {
            for &i in g {
                sq_weight_sums[i] += w * w;
            }
        }

        Ok(GroupStructure {
            p,
            groups,
            weights,
            offsets,
            laminar,
            visit_order,
            sq_weight_sums,
        })
    }

    /// The dyadic tree over `p = 2^n` coordinates: for each level
    /// `i = 0..=n` the `2^(n-i)` consecutive blocks of length `2^i`, each
    /// weighted by `sqrt(|g|)`.
    pub fn hierarchical(n: u32) -> Result<Self> {
        if n > MAX_HIERARCHY_DEPTH {
            return Err(Error::Capacity(format!(
                "hierarchy depth {n} exceeds the supported maximum {MAX_HIERARCHY_DEPTH}"
            )));
        }
        let p = 1usize << n;
        let mut groups = Vec::with_capacity(2 * p - 1);
        let mut weights = Vec::with_capacity(2 * p - 1);
        for level in 0..=n {
            let size = 1usize << level;
            for j in 0..(p / size) {
                groups.push((j * size..(j + 1) * size).collect());
                weights.push((size as f64).sqrt());
            }
        }
        Self::new(p, groups, weights)
    }

    /// Singleton groups with unit weights; the group norm then equals l1.
    pub fn singletons(p: usize) -> Result<Self> {
        Self::new(p, (0..p).map(|i| vec![i]).collect(), vec![1.0; p])
    }

    /// Parses one group per line in the form `w_g: i1,i2,...,ik` with
    /// 1-based indices. Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str, p: usize) -> Result<Self> {
        let mut groups = Vec::new();
        let mut weights = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let line_no = lineno + 1;
            let parse_err = |message: String| Error::Parse { line: line_no, message };
            let (w, idx) = line
                .split_once(':')
                .ok_or_else(|| parse_err("expected `weight: i1,i2,...`".into()))?;
            let w: f64 = w
                .trim()
                .parse()
                .map_err(|_| parse_err(format!("bad weight `{}`", w.trim())))?;
            let mut g = Vec::new();
            for tok in idx.split(',') {
                let tok = tok.trim();
                let i: usize = tok
                    .parse()
                    .map_err(|_| parse_err(format!("bad index `{tok}`")))?;
                if i == 0 {
                    return Err(parse_err("indices are 1-based".into()));
                }
                g.push(i - 1);
            }
            groups.push(g);
            weights.push(w);
        }
        Self::new(p, groups, weights)
    }

    /// Inverse of [`GroupStructure::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (g, w) in self.groups.iter().zip(&self.weights) {
            let idx: Vec<String> = g.iter().map(|i| (i + 1).to_string()).collect();
            let _ = writeln!(out, "{w}: {}", idx.join(","));
        }
        out
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// True iff any two groups are disjoint or nested.
    pub fn is_laminar(&self) -> bool {
        self.laminar
    }

    /// Total number of `(i, g)` pairs, i.e. the row count of `A`.
    pub fn total_size(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    /// Slice of the flat dual layout holding group `k`.
    pub fn block(&self, k: usize) -> Range<usize> {
        self.offsets[k]..self.offsets[k + 1]
    }

    /// Group indices in prox visiting order.
    pub fn visit_order(&self) -> &[usize] {
        &self.visit_order
    }

    /// `sum_{g containing j} w_g^2` for each coordinate `j`.
    pub fn squared_weight_sums(&self) -> &[f64] {
        &self.sq_weight_sums
    }
}

/// Laminarity check in `O(sum |g|)`.
///
/// Groups are visited by non-decreasing size while every coordinate
/// remembers the largest group seen so far that contains it. In a laminar
/// family each new group must swallow every earlier "owner" it touches
/// completely.
fn is_laminar(p: usize, groups: &[Vec<usize>], order: &[usize]) -> bool {
    const NONE: usize = usize::MAX;
    let mut owner = vec![NONE; p];
    let mut owned = vec![0usize; groups.len()];
    let mut tally = vec![0usize; groups.len()];
    let mut touched = Vec::new();
    for &k in order {
        touched.clear();
        for &i in &groups[k] {
            let o = owner[i];
            if o != NONE {
                if tally[o] == 0 {
                    touched.push(o);
                }
                tally[o] += 1;
            }
        }
        let mut ok = true;
        for &o in &touched {
            if tally[o] != owned[o] {
                ok = false;
            }
            tally[o] = 0;
        }
        if !ok {
            return false;
        }
        for &o in &touched {
            owned[o] = 0;
        }
        for &i in &groups[k] {
            owner[i] = k;
        }
        owned[k] = groups[k].len();
    }
    true
}

#[derive(Debug, Clone, PartialEq)]
pub enum Penalty {
    L1,
    Group(GroupStructure),
}

/// `h(x) = lambda * Omega(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Regularizer {
    lambda: f64,
    penalty: Penalty,
}

impl Regularizer {
    pub fn l1(lambda: f64) -> Result<Self> {
        Self::new(lambda, Penalty::L1)
    }

    pub fn group(lambda: f64, structure: GroupStructure) -> Result<Self> {
        Self::new(lambda, Penalty::Group(structure))
    }

    /// `h = 0`.
    pub fn zero() -> Self {
        Regularizer {
            lambda: 0.0,
            penalty: Penalty::L1,
        }
    }

    pub fn new(lambda: f64, penalty: Penalty) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::param(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        Ok(Regularizer { lambda, penalty })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn penalty(&self) -> &Penalty {
        &self.penalty
    }

    pub fn structure(&self) -> Option<&GroupStructure> {
        match &self.penalty {
            Penalty::L1 => None,
            Penalty::Group(s) => Some(s),
        }
    }

    /// Checks that `x` has a length this regularizer accepts.
    pub fn check_dim(&self, len: usize) -> Result<()> {
        match &self.penalty {
            Penalty::Group(s) if s.p != len => Err(Error::Dimension {
                expected: s.p,
                found: len,
            }),
            _ => Ok(()),
        }
    }

    /// `lambda * Omega(beta)`.
    pub fn evaluate(&self, beta: &DenseVector) -> Result<f64> {
        self.check_dim(beta.len())?;
        Ok(self.evaluate_slice(beta.as_slice()))
    }

    pub(crate) fn evaluate_slice(&self, beta: &[f64]) -> f64 {
        if self.lambda == 0.0 {
            return 0.0;
        }
        let omega: f64 = match &self.penalty {
            Penalty::L1 => beta.iter().map(|v| v.abs()).sum(),
            Penalty::Group(s) => s
                .groups
                .iter()
                .zip(&s.weights)
                .map(|(g, w)| w * g.iter().map(|&i| beta[i] * beta[i]).sum::<f64>().sqrt())
                .sum(),
        };
        self.lambda * omega
    }

    /// Exact minimizer of `<x, g> + eta/2 ||x - z||^2 + h(x)`.
    ///
    /// l1 and laminar group structures are solved in closed form; other
    /// group families fall back to [`Regularizer::prox_dual_ascent`].
    pub fn prox(&self, g: &DenseVector, z: &DenseVector, eta: f64) -> Result<DenseVector> {
        check_eta(eta)?;
        g.check_len(z.len())?;
        self.check_dim(z.len())?;
        let mut u: Vec<f64> = z.iter().zip(g.iter()).map(|(zi, gi)| zi - gi / eta).collect();
        self.prox_shifted(&mut u, eta)?;
        finite(u, "prox")
    }

    /// Applies the prox to `u = z - g / eta` in place.
    pub(crate) fn prox_shifted(&self, u: &mut [f64], eta: f64) -> Result<()> {
        if self.lambda == 0.0 {
            return Ok(());
        }
        match &self.penalty {
            Penalty::L1 => {
                soft_threshold(u, self.lambda / eta);
                Ok(())
            }
            Penalty::Group(s) if s.laminar => {
                laminar_pass(s, self.lambda / eta, u);
                Ok(())
            }
            Penalty::Group(s) => {
                let max_sweeps = 10 * s.len() * s.p;
                dual_ascent(s, self.lambda / eta, u, DUAL_ASCENT_TOL, max_sweeps)
            }
        }
    }

    /// Group prox by block-coordinate ascent on the dual
    /// `max_{||xi_g|| <= lambda w_g / eta} -1/2 ||u - sum_g xi_g||^2`,
    /// sweeping groups in [`GroupStructure::visit_order`] until a whole
    /// sweep moves the primal point by less than `tol` (max-norm).
    ///
    /// Valid for any group family; l1 penalties are handled as singletons.
    pub fn prox_dual_ascent(
        &self,
        g: &DenseVector,
        z: &DenseVector,
        eta: f64,
        tol: f64,
        max_sweeps: usize,
    ) -> Result<DenseVector> {
        check_eta(eta)?;
        g.check_len(z.len())?;
        self.check_dim(z.len())?;
        let mut u: Vec<f64> = z.iter().zip(g.iter()).map(|(zi, gi)| zi - gi / eta).collect();
        if self.lambda > 0.0 {
            match &self.penalty {
                Penalty::L1 => {
                    let s = GroupStructure::singletons(u.len())?;
                    dual_ascent(&s, self.lambda / eta, &mut u, tol, max_sweeps)?;
                }
                Penalty::Group(s) => dual_ascent(s, self.lambda / eta, &mut u, tol, max_sweeps)?,
            }
        }
        finite(u, "prox_dual_ascent")
    }

    /// The linear map `A` of this regularizer on `R^p`.
    pub fn linear_map(&self, p: usize) -> Result<LinearMapA<'_>> {
        self.check_dim(p)?;
        Ok(LinearMapA {
            lambda: self.lambda,
            structure: self.structure(),
            p,
        })
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if eta.is_finite() && eta > 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!("prox weight eta must be positive, got {eta}")))
    }
}

fn finite(values: Vec<f64>, what: &'static str) -> Result<DenseVector> {
    DenseVector::from_vec(values).map_err(|_| Error::NonFinite(what))
}

/// Coordinate-wise `sign(u) * max(|u| - t, 0)`.
pub fn soft_threshold(u: &mut [f64], t: f64) {
    for v in u {
        let a = v.abs() - t;
        *v = if a > 0.0 { a.copysign(*v) } else { 0.0 };
    }
}

/// One leaf-to-root pass of group soft-thresholding with thresholds
/// `scale * w_g`. Exact for laminar families.
fn laminar_pass(s: &GroupStructure, scale: f64, u: &mut [f64]) {
    for &k in &s.visit_order {
        let g = &s.groups[k];
        let t = scale * s.weights[k];
        let norm = g.iter().map(|&i| u[i] * u[i]).sum::<f64>().sqrt();
        let factor = if norm > t { 1.0 - t / norm } else { 0.0 };
        for &i in g {
            u[i] *= factor;
        }
    }
}

fn dual_ascent(s: &GroupStructure, scale: f64, u: &mut [f64], tol: f64, max_sweeps: usize) -> Result<()> {
    // x = u - sum_g xi_g, kept in `u`.
    let mut xi = vec![0.0; s.total_size()];
    let mut r = Vec::new();
    for _ in 0..max_sweeps.max(1) {
        let mut moved = 0.0f64;
        for &k in &s.visit_order {
            let g = &s.groups[k];
            let block = &mut xi[s.block(k)];
            let t = scale * s.weights[k];
            r.clear();
            r.extend(g.iter().zip(block.iter()).map(|(&i, x)| u[i] + x));
            let norm = norm_slice(&r);
            let shrink = if norm > t { t / norm } else { 1.0 };
            for ((&i, b), ri) in g.iter().zip(block.iter_mut()).zip(&r) {
                let new_xi = ri * shrink;
                let new_x = ri - new_xi;
                moved = moved.max((new_x - u[i]).abs());
                u[i] = new_x;
                *b = new_xi;
            }
        }
        if moved < tol {
            return Ok(());
        }
    }
    Err(Error::Convergence {
        routine: "group prox dual ascent",
        iterations: max_sweeps,
        last: DenseVector::from_vec_unchecked(u.to_vec()),
    })
}

/// A dual vector in the row layout of [`LinearMapA`]: one contiguous block
/// per group (one entry per coordinate for l1).
#[derive(Debug, Clone, PartialEq)]
pub struct DualVector(Vec<f64>);

impl DualVector {
    pub fn new(values: Vec<f64>) -> Self {
        DualVector(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, other: &DualVector) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(crate::vector::dot_slices(&self.0, &other.0))
    }
}

/// The map `A` with `A_{(i,g),j} = lambda * w_g` if `i == j` and 0 otherwise.
/// For l1, `A = lambda * I`. Never materialized; applied from the structure.
#[derive(Debug, Clone, Copy)]
pub struct LinearMapA<'a> {
    lambda: f64,
    structure: Option<&'a GroupStructure>,
    p: usize,
}

impl LinearMapA<'_> {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn cols(&self) -> usize {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.structure.map_or(self.p, |s| s.total_size())
    }

    pub fn apply(&self, beta: &DenseVector) -> Result<DualVector> {
        beta.check_len(self.p)?;
        let b = beta.as_slice();
        let out = match self.structure {
            None => b.iter().map(|v| self.lambda * v).collect(),
            Some(s) => {
                let mut out = Vec::with_capacity(s.total_size());
                for (g, w) in s.groups.iter().zip(&s.weights) {
                    out.extend(g.iter().map(|&i| self.lambda * w * b[i]));
                }
                out
            }
        };
        Ok(DualVector(out))
    }

    pub fn adjoint(&self, v: &DualVector) -> Result<DenseVector> {
        if v.len() != self.rows() {
            return Err(Error::Dimension {
                expected: self.rows(),
                found: v.len(),
            });
        }
        let out = match self.structure {
            None => v.0.iter().map(|x| self.lambda * x).collect(),
            Some(s) => {
                let mut out = vec![0.0; self.p];
                for (k, (g, w)) in s.groups.iter().zip(&s.weights).enumerate() {
                    for (&i, x) in g.iter().zip(&v.0[s.block(k)]) {
                        out[i] += self.lambda * w * x;
                    }
                }
                out
            }
        };
        Ok(DenseVector::from_vec_unchecked(out))
    }

    /// Spectral norm `||A||`. `A^T A` is diagonal with entries
    /// `lambda^2 sum_{g containing j} w_g^2`, so this is the square root of the
    /// largest of them.
    pub fn operator_norm(&self) -> f64 {
        match self.structure {
            None => self.lambda,
            Some(s) => {
                let m = s.sq_weight_sums.iter().copied().fold(0.0, f64::max);
                self.lambda * m.sqrt()
            }
        }
    }
}
