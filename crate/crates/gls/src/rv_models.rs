//! Centered random variable models, reproducible sampling, and normalized
//! sums.
//!
//! Analytic kinds carry closed densities; discrete kinds support exact
//! convolution enumeration; empirical kinds are mean-centered at
//! construction. Sampling is pure in (model, count, seed) and partitioned
//! into deterministic blocks (see [`crate::rng`]), so results do not depend
//! on the worker count.

use crate::error::{Error, Result};
use crate::rng;
use crate::textio;
use rand_chacha::ChaCha8Rng;
use std::path::Path;

const MEAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    /// Density 0.5 |x| e^{-x^2/2}; |X| = sqrt(2 E) with E standard
    /// exponential, random sign.
    ExampleA,
    Gaussian { sigma: f64 },
    Rademacher,
    /// |X| ~ Weibull(shape m, scale), random sign, so P(|X| > u) =
    /// exp(-(u/scale)^m) exactly.
    WeibullSym { m: f64, scale: f64 },
    FiniteDiscrete { atoms: Vec<(f64, f64)> },
    /// Samples are centered (sample mean subtracted) at construction.
    Empirical { samples: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomVariableModel {
    kind: ModelKind,
    label: String,
    /// Cumulative probabilities, precomputed for discrete draws.
    cumulative: Vec<f64>,
}

impl RandomVariableModel {
    pub fn example_a() -> Self {
        Self::build(ModelKind::ExampleA, "exampleA".into())
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidModel(format!("gaussian sigma {sigma} not in (0, inf)")));
        }
        Ok(Self::build(
            ModelKind::Gaussian { sigma },
            format!("gaussian(sigma={})", textio::fmt_g17(sigma)),
        ))
    }

    pub fn rademacher() -> Self {
        Self::build(ModelKind::Rademacher, "rademacher".into())
    }

    pub fn weibull_sym(m: f64, scale: f64) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidModel(format!("weibull shape m {m} not in (0, inf)")));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidModel(format!("weibull scale {scale} not in (0, inf)")));
        }
        Ok(Self::build(
            ModelKind::WeibullSym { m, scale },
            format!(
                "weibullSym(m={},scale={})",
                textio::fmt_g17(m),
                textio::fmt_g17(scale)
            ),
        ))
    }

    pub fn finite_discrete(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidModel("finite discrete law needs atoms".into()));
        }
        let mut mass = 0.0;
        let mut mean = 0.0;
        for &(v, p) in &atoms {
            if !v.is_finite() || !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidModel(format!("bad atom ({v}, {p})")));
            }
            mass += p;
            mean += p * v;
        }
        if (mass - 1.0).abs() > MEAN_TOL {
            return Err(Error::InvalidModel(format!(
                "probabilities sum to {mass}, not 1 within {MEAN_TOL:e}"
            )));
        }
        if mean.abs() > MEAN_TOL {
            return Err(Error::InvalidModel(format!(
                "mean {mean} is not 0 within {MEAN_TOL:e}"
            )));
        }
        let label = format!("finiteDiscrete(k={})", atoms.len());
        Ok(Self::build(ModelKind::FiniteDiscrete { atoms }, label))
    }

    pub fn empirical(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidModel("empirical model needs samples".into()));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("empirical samples must be finite".into()));
        }
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let centered: Vec<f64> = samples.iter().map(|v| v - mean).collect();
        let label = format!("empirical(n={})", centered.len());
        Ok(Self::build(ModelKind::Empirical { samples: centered }, label))
    }

    /// Empirical model from the plain-text sample format.
    pub fn empirical_from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::empirical(textio::read_sample_text(&text)?)
    }

    fn build(kind: ModelKind, label: String) -> Self {
        let cumulative = match &kind {
            ModelKind::FiniteDiscrete { atoms } => {
                let mut acc = 0.0;
                atoms
                    .iter()
                    .map(|&(_, p)| {
                        acc += p;
                        acc
                    })
                    .collect()
            }
            _ => Vec::new(),
        };
        Self {
            kind,
            label,
            cumulative,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// True when the law is symmetric about zero.
    pub fn is_symmetric(&self) -> bool {
        match &self.kind {
            ModelKind::ExampleA
            | ModelKind::Gaussian { .. }
            | ModelKind::Rademacher
            | ModelKind::WeibullSym { .. } => true,
            ModelKind::FiniteDiscrete { atoms } => {
                atoms.iter().all(|&(v, p)| {
                    atoms
                        .iter()
                        .any(|&(w, q)| (w + v).abs() <= 1e-12 && (q - p).abs() <= 1e-12)
                })
            }
            ModelKind::Empirical { .. } => false,
        }
    }

    /// Radius of finiteness of the moment generating function.
    pub fn mgf_radius(&self) -> f64 {
        match &self.kind {
            ModelKind::WeibullSym { m, scale } => {
                if *m > 1.0 {
                    f64::INFINITY
                } else if *m == 1.0 {
                    1.0 / scale
                } else {
                    0.0
                }
            }
            _ => f64::INFINITY,
        }
    }

    /// Natural length scale, used to place quadrature nodes.
    pub(crate) fn quad_scale(&self) -> f64 {
        match &self.kind {
            ModelKind::Gaussian { sigma } => *sigma,
            ModelKind::WeibullSym { scale, .. } => *scale,
            _ => 1.0,
        }
    }

    pub(crate) fn has_density(&self) -> bool {
        matches!(
            self.kind,
            ModelKind::ExampleA | ModelKind::Gaussian { .. } | ModelKind::WeibullSym { .. }
        )
    }

    /// Probability density at `x` for the analytic continuous kinds.
    pub fn density(&self, x: f64) -> Result<f64> {
        match &self.kind {
            ModelKind::ExampleA => Ok(0.5 * x.abs() * (-0.5 * x * x).exp()),
            ModelKind::Gaussian { sigma } => {
                let z = x / sigma;
                Ok((-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt()))
            }
            ModelKind::WeibullSym { m, scale } => {
                let y = x.abs() / scale;
                Ok(0.5 * (m / scale) * y.powf(m - 1.0) * (-y.powf(*m)).exp())
            }
            _ => Err(Error::UnsupportedKind {
                op: "density",
                kind: self.label.clone(),
            }),
        }
    }

    /// ln density at x > 0 (continuous kinds only; all are symmetric).
    pub(crate) fn log_density_pos(&self, x: f64) -> f64 {
        debug_assert!(x > 0.0);
        match &self.kind {
            ModelKind::ExampleA => -std::f64::consts::LN_2 + x.ln() - 0.5 * x * x,
            ModelKind::Gaussian { sigma } => {
                let z = x / sigma;
                -sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * z * z
            }
            ModelKind::WeibullSym { m, scale } => {
                let y = x / scale;
                -std::f64::consts::LN_2 + (m / scale).ln() + (m - 1.0) * y.ln() - y.powf(*m)
            }
            _ => unreachable!("log_density_pos on non-density kind"),
        }
    }

    /// One draw; consumes generator state.
    pub(crate) fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match &self.kind {
            ModelKind::ExampleA => (2.0 * rng::exp1(rng)).sqrt() * rng::rademacher(rng),
            ModelKind::Gaussian { sigma } => sigma * rng::std_normal(rng),
            ModelKind::Rademacher => rng::rademacher(rng),
            ModelKind::WeibullSym { m, scale } => {
                scale * rng::exp1(rng).powf(1.0 / m) * rng::rademacher(rng)
            }
            ModelKind::FiniteDiscrete { atoms } => {
                let u = rng::uniform01(rng);
                let idx = self
                    .cumulative
                    .partition_point(|&c| c <= u)
                    .min(atoms.len() - 1);
                atoms[idx].0
            }
            ModelKind::Empirical { samples } => {
                let u = rng::uniform01(rng);
                samples[((u * samples.len() as f64) as usize).min(samples.len() - 1)]
            }
        }
    }

    /// `count` iid draws, deterministic in (model, count, seed).
    pub fn sample(&self, count: usize, seed: u64) -> Result<SampleSet> {
        if count == 0 {
            return Err(Error::InvalidInput("sample count must be >= 1".into()));
        }
        let values = rng::sample_blocks(count, seed, |rng| self.draw(rng));
        Ok(SampleSet {
            values,
            seed,
            model_label: self.label.clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    None,
    InvSqrtN,
}

/// Sum of `n` iid copies of `base`, optionally normalized by n^{-1/2}.
#[derive(Debug, Clone, PartialEq)]
pub struct SumModel {
    pub base: RandomVariableModel,
    pub n: u32,
    pub normalization: Normalization,
}

impl SumModel {
    pub fn new(base: RandomVariableModel, n: u32, normalization: Normalization) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidModel("sum needs n >= 1".into()));
        }
        Ok(Self {
            base,
            n,
            normalization,
        })
    }

    /// Multiplier applied to the raw sum.
    pub fn scale_factor(&self) -> f64 {
        match self.normalization {
            Normalization::None => 1.0,
            Normalization::InvSqrtN => 1.0 / (self.n as f64).sqrt(),
        }
    }

    pub fn label(&self) -> String {
        let norm = match self.normalization {
            Normalization::None => "sum",
            Normalization::InvSqrtN => "normsum",
        };
        format!("{}(n={},{})", norm, self.n, self.base.label())
    }

    /// One realization of the (normalized) sum.
    pub(crate) fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let mut s = 0.0;
        for _ in 0..self.n {
            s += self.base.draw(rng);
        }
        s * self.scale_factor()
    }

    /// `count` realizations; each consumes `n` fresh base draws.
    pub fn sample_sum(&self, count: usize, seed: u64) -> Result<SampleSet> {
        if count == 0 {
            return Err(Error::InvalidInput("sample count must be >= 1".into()));
        }
        let values = rng::sample_blocks(count, seed, |rng| self.draw(rng));
        Ok(SampleSet {
            values,
            seed,
            model_label: self.label(),
        })
    }
}

/// A reproducible batch of draws.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub values: Vec<f64>,
    pub seed: u64,
    pub model_label: String,
}

impl SampleSet {
    pub fn to_text(&self) -> String {
        textio::write_sample_text(
            &self.values,
            &[
                format!("model: {}", self.model_label),
                format!("seed: {}", self.seed),
                format!("count: {}", self.values.len()),
            ],
        )
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read_file(path: &Path) -> Result<Vec<f64>> {
        let text = std::fs::read_to_string(path)?;
        textio::read_sample_text(&text)
    }
}

/// Exact finite law; supports convolution powers for enumeration oracles.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDist {
    /// (value, probability), sorted by value.
    pub atoms: Vec<(f64, f64)>,
}

/// Joint-outcome budget for exact enumeration (2^20).
pub const ENUM_BUDGET: u64 = 1 << 20;

impl DiscreteDist {
    pub fn of_model(model: &RandomVariableModel) -> Option<Self> {
        match model.kind() {
            ModelKind::Rademacher => Some(Self {
                atoms: vec![(-1.0, 0.5), (1.0, 0.5)],
            }),
            ModelKind::FiniteDiscrete { atoms } => {
                let mut atoms = atoms.clone();
                atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
                Some(Self { atoms })
            }
            _ => None,
        }
    }

    pub fn convolve(&self, other: &Self) -> Self {
        let mut merged: std::collections::BTreeMap<u64, (f64, f64)> =
            std::collections::BTreeMap::new();
        for &(v, p) in &self.atoms {
            for &(w, q) in &other.atoms {
                let s = if v + w == 0.0 { 0.0 } else { v + w };
                let e = merged.entry(s.to_bits()).or_insert((s, 0.0));
                e.1 += p * q;
            }
        }
        let mut atoms: Vec<(f64, f64)> = merged.into_values().collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { atoms }
    }

    /// Law of the sum of `n` iid copies of `model`, if the joint outcome
    /// count |support|^n fits the enumeration budget.
    pub fn iid_sum(model: &RandomVariableModel, n: u32) -> Option<Self> {
        let base = Self::of_model(model)?;
        let k = base.atoms.len() as u64;
        let mut joint: u64 = 1;
        for _ in 0..n {
            joint = joint.checked_mul(k)?;
            if joint > ENUM_BUDGET {
                return None;
            }
        }
        let mut acc = base.clone();
        for _ in 1..n {
            acc = acc.convolve(&base);
        }
        Some(acc)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut atoms: Vec<(f64, f64)> = self.atoms.iter().map(|&(v, p)| (c * v, p)).collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { atoms }
    }

    /// E |V|^q.
    pub fn abs_moment(&self, q: f64) -> f64 {
        self.atoms
            .iter()
            .map(|&(v, p)| if p == 0.0 { 0.0 } else { p * v.abs().powf(q) })
            .sum()
    }

    /// (E |V|^q)^{1/q}.
    pub fn lp_norm(&self, q: f64) -> f64 {
        self.abs_moment(q).powf(1.0 / q)
    }

    /// P(V > u).
    pub fn tail_gt(&self, u: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|&&(v, _)| v > u)
            .map(|&(_, p)| p)
            .sum()
    }

    /// P(|V| > u).
    pub fn tail_abs_gt(&self, u: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|&&(v, _)| v.abs() > u)
            .map(|&(_, p)| p)
            .sum()
    }
}
