//! Synthetic regression problems and their stochastic gradient oracles.
//!
//! Three families are provided:
//!
//! - linear regression on a finite data set, `f(b) = 1/(2K) ||X b - y||^2`,
//!   with minibatch gradients `1/|S| X_S^T (X_S b - y_S)`;
//! - linear regression under a continuous Gaussian model, where fresh samples
//!   are drawn on every call and `f` has a closed form;
//! - logistic regression on unit-norm predictors with `{0,1}` labels.
//!
//! Minibatches are drawn uniformly with replacement.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::trace::format_f64;
use crate::vector::{dot_slices, DenseVector};

/// Row norms of logistic predictors must equal 1 within this tolerance.
pub const UNIT_NORM_TOL: f64 = 1e-12;

const POWER_ITERATION_TOL: f64 = 1e-8;
const POWER_ITERATION_MAX: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Linear,
    Logistic,
}

/// `K` rows `x_i in R^p` (row-major) with responses `y_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    kind: DatasetKind,
    k: usize,
    p: usize,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Dataset {
    pub fn new(kind: DatasetKind, k: usize, p: usize, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if k == 0 || p == 0 {
            return Err(Error::Parameter(format!("dataset needs K >= 1 and p >= 1, got K={k}, p={p}")));
        }
        if x.len() != k * p {
            return Err(Error::Dimension {
                expected: k * p,
                found: x.len(),
            });
        }
        if y.len() != k {
            return Err(Error::Dimension {
                expected: k,
                found: y.len(),
            });
        }
        if !x.iter().chain(&y).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("Dataset::new"));
        }
        let d = Dataset { kind, k, p, x, y };
        if kind == DatasetKind::Logistic {
            for i in 0..k {
                let n = dot_slices(d.row(i), d.row(i)).sqrt();
                if (n - 1.0).abs() > UNIT_NORM_TOL {
                    return Err(Error::Parameter(format!(
                        "logistic row {} has norm {n}, expected 1",
                        i + 1
                    )));
                }
                if d.y[i] != 0.0 && d.y[i] != 1.0 {
                    return Err(Error::Parameter(format!(
                        "logistic label on row {} is {}, expected 0 or 1",
                        i + 1,
                        d.y[i]
                    )));
                }
            }
        }
        Ok(d)
    }

    pub fn kind(&self) -> DatasetKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// CSV with header `y,x1,...,xp` and 17-significant-digit values.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let mut header = vec!["y".to_string()];
        header.extend((1..=self.p).map(|j| format!("x{j}")));
        w.write_record(&header)?;
        for i in 0..self.k {
            let mut rec = vec![format_f64(self.y[i])];
            rec.extend(self.row(i).iter().map(|&v| format_f64(v)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format written by [`Dataset::write_csv`], re-validating
    /// the logistic invariants.
    pub fn read_csv<R: Read>(input: R, kind: DatasetKind) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header = r.headers()?.clone();
        let p = header.len().saturating_sub(1);
        let header_ok = header.get(0) == Some("y")
            && (1..=p).all(|j| header.get(j) == Some(format!("x{j}").as_str()));
        if !header_ok {
            return Err(Error::Parse {
                line: 1,
                message: "expected header `y,x1,...,xp`".into(),
            });
        }
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            if rec.len() != p + 1 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} fields, found {}", p + 1, rec.len()),
                });
            }
            for (j, field) in rec.iter().enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("bad number `{field}`"),
                })?;
                if j == 0 {
                    y.push(v);
                } else {
                    x.push(v);
                }
            }
        }
        Dataset::new(kind, y.len(), p, x, y)
    }
}

/// `[1, ..., 1, 0, ..., 0]` with the first `p/2` entries equal to one.
pub fn ground_truth_linear(p: usize) -> Result<DenseVector> {
    if p == 0 || p % 2 != 0 {
        return Err(Error::Parameter(format!("linear ground truth needs an even p >= 2, got {p}")));
    }
    Ok(DenseVector::from_vec_unchecked(
        (0..p).map(|j| if j < p / 2 { 1.0 } else { 0.0 }).collect(),
    ))
}

/// The all-ones vector.
pub fn ground_truth_logistic(p: usize) -> DenseVector {
    DenseVector::from_vec_unchecked(vec![1.0; p])
}

/// `x_ij ~ N(0,1)` and `y_i = beta_hat^T x_i + eps_i / 10` with
/// `eps_i ~ N(0,1)` and `beta_hat` from [`ground_truth_linear`].
pub fn gen_linear_dataset(k: usize, p: usize, rng: &mut RngStream) -> Result<Dataset> {
    let beta_hat = ground_truth_linear(p)?;
    if k == 0 {
        return Err(Error::Parameter("K must be >= 1".into()));
    }
    let mut x = vec![0.0; k * p];
    let mut y = vec![0.0; k];
    for i in 0..k {
        let row = &mut x[i * p..(i + 1) * p];
        rng.fill_gaussian(row);
        y[i] = dot_slices(row, beta_hat.as_slice()) + rng.gaussian() / 10.0;
    }
    Dataset::new(DatasetKind::Linear, k, p, x, y)
}

/// Logistic data with the all-ones ground truth.
pub fn gen_logistic_dataset(k: usize, p: usize, rng: &mut RngStream) -> Result<Dataset> {
    gen_logistic_dataset_with(k, &ground_truth_logistic(p), rng)
}

/// Rows are normalized Gaussian draws; labels are 1 with probability
/// `sigmoid(beta_hat^T x_i)`.
pub fn gen_logistic_dataset_with(k: usize, beta_hat: &DenseVector, rng: &mut RngStream) -> Result<Dataset> {
    let p = beta_hat.len();
    if k == 0 || p == 0 {
        return Err(Error::Parameter(format!("dataset needs K >= 1 and p >= 1, got K={k}, p={p}")));
    }
    let mut x = vec![0.0; k * p];
    let mut y = vec![0.0; k];
    for i in 0..k {
        let row = &mut x[i * p..(i + 1) * p];
        let norm = loop {
            rng.fill_gaussian(row);
            let n = dot_slices(row, row).sqrt();
            if n > 0.0 {
                break n;
            }
        };
        row.iter_mut().for_each(|v| *v /= norm);
        let prob = sigmoid(dot_slices(row, beta_hat.as_slice()));
        y[i] = if rng.bernoulli(prob) { 1.0 } else { 0.0 };
    }
    Dataset::new(DatasetKind::Logistic, k, p, x, y)
}

/// `e^s / (1 + e^s)`, branching on the sign of `s` so neither branch
/// overflows.
pub fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^s)` without overflow.
pub fn softplus(s: f64) -> f64 {
    s.max(0.0) + (-s.abs()).exp().ln_1p()
}

fn check_beta(d: &Dataset, beta: &DenseVector) -> Result<()> {
    beta.check_len(d.p)
}

/// `1/(2K) ||X beta - y||^2`.
pub fn exact_objective_linear(d: &Dataset, beta: &DenseVector) -> Result<f64> {
    check_beta(d, beta)?;
    Ok(linear_objective(d, beta.as_slice()))
}

fn linear_objective(d: &Dataset, beta: &[f64]) -> f64 {
    let sum: f64 = (0..d.k)
        .map(|i| {
            let r = dot_slices(d.row(i), beta) - d.y[i];
            r * r
        })
        .sum();
    sum / (2.0 * d.k as f64)
}

/// `1/K X^T (X beta - y)`.
pub fn exact_gradient_linear(d: &Dataset, beta: &DenseVector) -> Result<DenseVector> {
    check_beta(d, beta)?;
    let mut out = vec![0.0; d.p];
    linear_batch_gradient(d, beta.as_slice(), 0..d.k, d.k, &mut out);
    Ok(DenseVector::from_vec_unchecked(out))
}

/// `1/|S| X_S^T (X_S beta - y_S)`; `s` may repeat indices.
pub fn minibatch_gradient_linear(d: &Dataset, beta: &DenseVector, s: &[usize]) -> Result<DenseVector> {
    check_beta(d, beta)?;
    check_batch(d, s)?;
    let mut out = vec![0.0; d.p];
    linear_batch_gradient(d, beta.as_slice(), s.iter().copied(), s.len(), &mut out);
    Ok(DenseVector::from_vec_unchecked(out))
}

fn linear_batch_gradient(d: &Dataset, beta: &[f64], rows: impl Iterator<Item = usize>, n: usize, out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for i in rows {
        let row = d.row(i);
        let r = dot_slices(row, beta) - d.y[i];
        for (o, xi) in out.iter_mut().zip(row) {
            *o += r * xi;
        }
    }
    let inv = 1.0 / n as f64;
    out.iter_mut().for_each(|o| *o *= inv);
}

/// `1/K sum_i [log(1 + e^{beta^T x_i}) - y_i beta^T x_i]`.
pub fn exact_objective_logistic(d: &Dataset, beta: &DenseVector) -> Result<f64> {
    check_beta(d, beta)?;
    Ok(logistic_objective(d, beta.as_slice()))
}

fn logistic_objective(d: &Dataset, beta: &[f64]) -> f64 {
    let sum: f64 = (0..d.k)
        .map(|i| {
            let s = dot_slices(d.row(i), beta);
            softplus(s) - d.y[i] * s
        })
        .sum();
    sum / d.k as f64
}

pub fn exact_gradient_logistic(d: &Dataset, beta: &DenseVector) -> Result<DenseVector> {
    check_beta(d, beta)?;
    let mut out = vec![0.0; d.p];
    logistic_batch_gradient(d, beta.as_slice(), 0..d.k, d.k, &mut out);
    Ok(DenseVector::from_vec_unchecked(out))
}

/// `1/|S| sum_{i in S} (sigmoid(beta^T x_i) - y_i) x_i`.
pub fn minibatch_gradient_logistic(d: &Dataset, beta: &DenseVector, s: &[usize]) -> Result<DenseVector> {
    check_beta(d, beta)?;
    check_batch(d, s)?;
    let mut out = vec![0.0; d.p];
    logistic_batch_gradient(d, beta.as_slice(), s.iter().copied(), s.len(), &mut out);
    Ok(DenseVector::from_vec_unchecked(out))
}

fn logistic_batch_gradient(d: &Dataset, beta: &[f64], rows: impl Iterator<Item = usize>, n: usize, out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for i in rows {
        let row = d.row(i);
        let r = sigmoid(dot_slices(row, beta)) - d.y[i];
        for (o, xi) in out.iter_mut().zip(row) {
            *o += r * xi;
        }
    }
    let inv = 1.0 / n as f64;
    out.iter_mut().for_each(|o| *o *= inv);
}

fn check_batch(d: &Dataset, s: &[usize]) -> Result<()> {
    if s.is_empty() {
        return Err(Error::Parameter("minibatch must be nonempty".into()));
    }
    if let Some(&bad) = s.iter().find(|&&i| i >= d.k) {
        return Err(Error::Parameter(format!("minibatch index {bad} out of range 0..{}", d.k)));
    }
    Ok(())
}

/// `size` indices drawn uniformly with replacement from `0..k`.
pub fn sample_batch(rng: &mut RngStream, k: usize, size: usize) -> Vec<usize> {
    (0..size).map(|_| rng.index(k)).collect()
}

/// Closed-form loss of the continuous model `x ~ N(0, I)`,
/// `y = x^T beta_hat + eps`, `eps ~ N(0, 1)`:
/// `1/2 (beta^T beta - 2 beta^T beta_hat + beta_hat^T beta_hat + 1)`.
pub fn continuous_objective(beta_hat: &DenseVector, beta: &DenseVector) -> Result<f64> {
    beta.check_len(beta_hat.len())?;
    Ok(continuous_value(beta_hat.as_slice(), beta.as_slice()))
}

fn continuous_value(beta_hat: &[f64], beta: &[f64]) -> f64 {
    0.5 * (dot_slices(beta, beta) - 2.0 * dot_slices(beta, beta_hat) + dot_slices(beta_hat, beta_hat) + 1.0)
}

/// One stochastic gradient of the continuous model from a fresh minibatch
/// of `batch` samples.
pub fn continuous_oracle(
    beta_hat: &DenseVector,
    beta: &DenseVector,
    batch: usize,
    rng: &mut RngStream,
) -> Result<DenseVector> {
    beta.check_len(beta_hat.len())?;
    if batch == 0 {
        return Err(Error::Parameter("batch must be >= 1".into()));
    }
    let mut out = vec![0.0; beta.len()];
    let mut xbuf = vec![0.0; beta.len()];
    continuous_sample(beta_hat.as_slice(), beta.as_slice(), batch, rng, &mut xbuf, &mut out);
    Ok(DenseVector::from_vec_unchecked(out))
}

fn continuous_sample(beta_hat: &[f64], beta: &[f64], batch: usize, rng: &mut RngStream, xbuf: &mut [f64], out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for _ in 0..batch {
        rng.fill_gaussian(xbuf);
        let y = dot_slices(xbuf, beta_hat) + rng.gaussian();
        let r = dot_slices(xbuf, beta) - y;
        for (o, xi) in out.iter_mut().zip(xbuf.iter()) {
            *o += r * xi;
        }
    }
    let inv = 1.0 / batch as f64;
    out.iter_mut().for_each(|o| *o *= inv);
}

/// Which constant [`lipschitz_linear`] reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LipschitzConvention {
    /// `lambda_max(X^T X)`.
    Paper,
    /// `lambda_max(X^T X) / K`, the Lipschitz constant of the averaged
    /// gradient `1/K X^T (X b - y)`.
    #[default]
    Scaled,
}

/// Largest eigenvalue of `X^T X` by power iteration, optionally divided by
/// `K`.
pub fn lipschitz_linear(d: &Dataset, convention: LipschitzConvention) -> Result<f64> {
    let p = d.p;
    let mut v: Vec<f64> = (0..p).map(|j| 1.0 + 0.01 * j as f64 / p as f64).collect();
    normalize(&mut v);
    let mut xv = vec![0.0; d.k];
    let mut w = vec![0.0; p];
    let mut estimate = 0.0;
    for _ in 0..POWER_ITERATION_MAX {
        for (i, o) in xv.iter_mut().enumerate() {
            *o = dot_slices(d.row(i), &v);
        }
        w.iter_mut().for_each(|o| *o = 0.0);
        for (i, s) in xv.iter().enumerate() {
            for (o, xi) in w.iter_mut().zip(d.row(i)) {
                *o += s * xi;
            }
        }
        let rq = dot_slices(&v, &w);
        v.copy_from_slice(&w);
        if normalize(&mut v) == 0.0 {
            // X v = 0 for a unit vector reached from the start point; the
            // iteration cannot proceed, and X^T X is zero on its span.
            estimate = 0.0;
            break;
        }
        let converged = (rq - estimate).abs() <= POWER_ITERATION_TOL * rq.abs();
        estimate = rq;
        if converged {
            return Ok(match convention {
                LipschitzConvention::Paper => estimate,
                LipschitzConvention::Scaled => estimate / d.k as f64,
            });
        }
    }
    Err(Error::PowerIteration {
        iterations: POWER_ITERATION_MAX,
        estimate,
    })
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot_slices(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// A source of unbiased stochastic gradients of a smooth convex `f`,
/// together with exact evaluations of `f` and its gradient.
pub trait StochasticOracle {
    fn dim(&self) -> usize;

    /// Writes one draw of `G(x, xi)` into `out`.
    fn sample_into(&self, x: &[f64], rng: &mut RngStream, out: &mut [f64]);

    /// Exact `f(x)`.
    fn objective(&self, x: &[f64]) -> f64;

    /// Exact `grad f(x)`.
    fn gradient_into(&self, x: &[f64], out: &mut [f64]);

    fn sample(&self, x: &DenseVector, rng: &mut RngStream) -> Result<DenseVector> {
        x.check_len(self.dim())?;
        let mut out = vec![0.0; self.dim()];
        self.sample_into(x.as_slice(), rng, &mut out);
        Ok(DenseVector::from_vec_unchecked(out))
    }

    fn gradient(&self, x: &DenseVector) -> Result<DenseVector> {
        x.check_len(self.dim())?;
        let mut out = vec![0.0; self.dim()];
        self.gradient_into(x.as_slice(), &mut out);
        Ok(DenseVector::from_vec_unchecked(out))
    }
}

impl<O: StochasticOracle + ?Sized> StochasticOracle for &O {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn sample_into(&self, x: &[f64], rng: &mut RngStream, out: &mut [f64]) {
        (**self).sample_into(x, rng, out)
    }

    fn objective(&self, x: &[f64]) -> f64 {
        (**self).objective(x)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        (**self).gradient_into(x, out)
    }
}

/// Minibatch gradients of the finite-sample least-squares loss.
#[derive(Debug, Clone, Copy)]
pub struct MinibatchLinear<'a> {
    data: &'a Dataset,
    batch: usize,
}

impl<'a> MinibatchLinear<'a> {
    pub fn new(data: &'a Dataset, batch: usize) -> Result<Self> {
        if batch == 0 {
            return Err(Error::Parameter("batch size must be >= 1".into()));
        }
        Ok(MinibatchLinear { data, batch })
    }
}

impl StochasticOracle for MinibatchLinear<'_> {
    fn dim(&self) -> usize {
        self.data.p
    }

    fn sample_into(&self, x: &[f64], rng: &mut RngStream, out: &mut [f64]) {
        let (k, n) = (self.data.k, self.batch);
        linear_batch_gradient(self.data, x, (0..n).map(|_| rng.index(k)), n, out);
    }

    fn objective(&self, x: &[f64]) -> f64 {
        linear_objective(self.data, x)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        linear_batch_gradient(self.data, x, 0..self.data.k, self.data.k, out);
    }
}

/// Minibatch gradients of the logistic loss.
#[derive(Debug, Clone, Copy)]
pub struct MinibatchLogistic<'a> {
    data: &'a Dataset,
    batch: usize,
}

impl<'a> MinibatchLogistic<'a> {
    pub fn new(data: &'a Dataset, batch: usize) -> Result<Self> {
        if batch == 0 {
            return Err(Error::Parameter("batch size must be >= 1".into()));
        }
        if data.kind != DatasetKind::Logistic {
            return Err(Error::Parameter("logistic oracle needs a logistic dataset".into()));
        }
        Ok(MinibatchLogistic { data, batch })
    }
}

impl StochasticOracle for MinibatchLogistic<'_> {
    fn dim(&self) -> usize {
        self.data.p
    }

    fn sample_into(&self, x: &[f64], rng: &mut RngStream, out: &mut [f64]) {
        let (k, n) = (self.data.k, self.batch);
        logistic_batch_gradient(self.data, x, (0..n).map(|_| rng.index(k)), n, out);
    }

    fn objective(&self, x: &[f64]) -> f64 {
        logistic_objective(self.data, x)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        logistic_batch_gradient(self.data, x, 0..self.data.k, self.data.k, out);
    }
}

/// Least squares under the continuous Gaussian model; every draw uses a
/// fresh minibatch.
#[derive(Debug, Clone)]
pub struct ContinuousLinear {
    beta_hat: DenseVector,
    batch: usize,
}

impl ContinuousLinear {
    pub fn new(beta_hat: DenseVector, batch: usize) -> Result<Self> {
        if batch == 0 {
            return Err(Error::Parameter("batch size must be >= 1".into()));
        }
        Ok(ContinuousLinear { beta_hat, batch })
    }

    pub fn beta_hat(&self) -> &DenseVector {
        &self.beta_hat
    }
}

impl StochasticOracle for ContinuousLinear {
    fn dim(&self) -> usize {
        self.beta_hat.len()
    }

    fn sample_into(&self, x: &[f64], rng: &mut RngStream, out: &mut [f64]) {
        let mut xbuf = vec![0.0; x.len()];
        continuous_sample(self.beta_hat.as_slice(), x, self.batch, rng, &mut xbuf, out);
    }

    fn objective(&self, x: &[f64]) -> f64 {
        continuous_value(self.beta_hat.as_slice(), x)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        for ((o, b), bh) in out.iter_mut().zip(x).zip(self.beta_hat.iter()) {
            *o = b - bh;
        }
    }
}

/// `f(x) = 1/2 ||x - center||^2` observed through gradients perturbed by
/// Gaussian noise with `E||noise||^2 = noise_sigma_sq`.
#[derive(Debug, Clone)]
pub struct NoisyQuadratic {
    center: DenseVector,
    noise_sigma_sq: f64,
}

impl NoisyQuadratic {
    pub fn new(center: DenseVector, noise_sigma_sq: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::Parameter("quadratic needs dimension >= 1".into()));
        }
        if !(noise_sigma_sq.is_finite() && noise_sigma_sq >= 0.0) {
            return Err(Error::Parameter(format!("noise variance must be >= 0, got {noise_sigma_sq}")));
        }
        Ok(NoisyQuadratic { center, noise_sigma_sq })
    }

    pub fn center(&self) -> &DenseVector {
        &self.center
    }

    pub fn noise_sigma_sq(&self) -> f64 {
        self.noise_sigma_sq
    }
}

impl StochasticOracle for NoisyQuadratic {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn sample_into(&self, x: &[f64], rng: &mut RngStream, out: &mut [f64]) {
        self.gradient_into(x, out);
        if self.noise_sigma_sq > 0.0 {
            let sd = (self.noise_sigma_sq / self.dim() as f64).sqrt();
            for o in out.iter_mut() {
                *o += sd * rng.gaussian();
            }
        }
    }

    fn objective(&self, x: &[f64]) -> f64 {
        0.5 * x
            .iter()
            .zip(self.center.iter())
            .map(|(a, c)| (a - c) * (a - c))
            .sum::<f64>()
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        for ((o, a), c) in out.iter_mut().zip(x).zip(self.center.iter()) {
            *o = a - c;
        }
    }
}

/// Wraps an oracle so that every draw returns the exact gradient.
#[derive(Debug, Clone)]
pub struct Exact<O>(pub O);

impl<O: StochasticOracle> StochasticOracle for Exact<O> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn sample_into(&self, x: &[f64], _rng: &mut RngStream, out: &mut [f64]) {
        self.0.gradient_into(x, out)
    }

    fn objective(&self, x: &[f64]) -> f64 {
        self.0.objective(x)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        self.0.gradient_into(x, out)
    }
}
