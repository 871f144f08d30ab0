//! Lp norms, moment profiles, moment generating functions, B(phi) norms and
//! Young-Fenchel conjugates.
//!
//! Closed forms are used where the model admits them, double-exponential
//! quadrature otherwise, and plug-in estimators (with delta-method standard
//! errors) for empirical data. Everything is a pure function of immutable
//! inputs; grid evaluations run in parallel and are assembled in grid order.

use crate::error::{Error, Result};
use crate::quad;
use crate::rv_models::{DiscreteDist, ModelKind, RandomVariableModel, SumModel};
use crate::special::{ln_cosh, ln_gamma, log_sum_exp};
use crate::textio::{fmt_g17, parse_f64};
use rayon::prelude::*;
use std::fmt::Write as _;

/// Where a moment profile's values came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Analytic,
    Quadrature,
    Empirical,
}

impl Provenance {
    fn as_str(self) -> &'static str {
        match self {
            Provenance::Analytic => "analytic",
            Provenance::Quadrature => "quadrature",
            Provenance::Empirical => "empirical",
        }
    }
}

/// Tabulation p -> |X|_p on an increasing grid.
///
/// `ci_halfwidths` are 3-sigma delta-method halfwidths (zero for analytic
/// and quadrature provenance). Values interpolate linearly in ln p.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentProfile {
    grid: Vec<f64>,
    values: Vec<f64>,
    ci_halfwidths: Vec<f64>,
    provenance: Provenance,
}

const LYAPUNOV_TOL: f64 = 1e-9;

impl MomentProfile {
    pub fn new(
        grid: Vec<f64>,
        values: Vec<f64>,
        ci_halfwidths: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        if grid.is_empty() || grid.len() != values.len() || grid.len() != ci_halfwidths.len() {
            return Err(Error::InvalidInput("profile arrays empty or mismatched".into()));
        }
        if grid[0] < 1.0 || grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "profile grid must be increasing with p >= 1".into(),
            ));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput("profile values must be finite and >= 0".into()));
        }
        // Lyapunov: p -> |X|_p is nondecreasing, up to tolerance or CI.
        for i in 1..values.len() {
            let slack = match provenance {
                Provenance::Empirical => LYAPUNOV_TOL + ci_halfwidths[i - 1] + ci_halfwidths[i],
                _ => LYAPUNOV_TOL,
            };
            if values[i] < values[i - 1] - slack {
                return Err(Error::InvalidInput(format!(
                    "profile violates Lyapunov monotonicity at p={}: {} -> {}",
                    grid[i],
                    values[i - 1],
                    values[i]
                )));
            }
        }
        Ok(Self {
            grid,
            values,
            ci_halfwidths,
            provenance,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ci_halfwidths(&self) -> &[f64] {
        &self.ci_halfwidths
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn min_p(&self) -> f64 {
        self.grid[0]
    }

    pub fn max_p(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    fn interp(&self, data: &[f64], p: f64) -> Option<f64> {
        if p < self.min_p() || p > self.max_p() {
            return None;
        }
        let i = match self.grid.binary_search_by(|g| g.total_cmp(&p)) {
            Ok(i) => return Some(data[i]),
            Err(i) => i,
        };
        let (p0, p1) = (self.grid[i - 1], self.grid[i]);
        let t = (p.ln() - p0.ln()) / (p1.ln() - p0.ln());
        Some(data[i - 1] + t * (data[i] - data[i - 1]))
    }

    /// |X|_p by log-p linear interpolation; None outside the grid range.
    pub fn value_at(&self, p: f64) -> Option<f64> {
        self.interp(&self.values, p)
    }

    /// Interpolated 3-sigma halfwidth at p.
    pub fn ci_at(&self, p: f64) -> f64 {
        self.interp(&self.ci_halfwidths, p).unwrap_or(0.0)
    }

    /// Profile of |c X| (homogeneity: values scale by |c|).
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c.abs()).collect(),
            ci_halfwidths: self.ci_halfwidths.iter().map(|v| v * c.abs()).collect(),
            provenance: self.provenance,
        }
    }

    /// CSV with header `p,value,ci_halfwidth,provenance`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,value,ci_halfwidth,provenance\n");
        for i in 0..self.grid.len() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_g17(self.grid[i]),
                fmt_g17(self.values[i]),
                fmt_g17(self.ci_halfwidths[i]),
                self.provenance.as_str()
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut grid = Vec::new();
        let mut values = Vec::new();
        let mut cis = Vec::new();
        let mut provenance = Provenance::Analytic;
        for (i, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') || t.starts_with("p,") {
                continue;
            }
            let cols: Vec<&str> = t.split(',').collect();
            if cols.len() != 4 {
                return Err(Error::Parse(format!("line {}: expected 4 columns", i + 1)));
            }
            grid.push(parse_f64(cols[0])?);
            values.push(parse_f64(cols[1])?);
            cis.push(parse_f64(cols[2])?);
            provenance = match cols[3] {
                "analytic" => Provenance::Analytic,
                "quadrature" => Provenance::Quadrature,
                "empirical" => Provenance::Empirical,
                other => return Err(Error::Parse(format!("unknown provenance {other:?}"))),
            };
        }
        Self::new(grid, values, cis, provenance)
    }
}

/// Geometric grid with `n` points from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let step = (hi.ln() - lo.ln()) / (n - 1) as f64;
    let mut g: Vec<f64> = (0..n).map(|i| (lo.ln() + step * i as f64).exp()).collect();
    g[0] = lo;
    g[n - 1] = hi;
    g
}

// ---------------------------------------------------------------------------
// Lp norms
// ---------------------------------------------------------------------------

/// (E |X|^p)^{1/p}. Analytic for ExampleA / Gaussian / Rademacher /
/// FiniteDiscrete, quadrature for other densities, plug-in for empirical.
pub fn lp_norm(model: &RandomVariableModel, p: f64) -> Result<f64> {
    check_p(p)?;
    match model.kind() {
        ModelKind::ExampleA => {
            // E |X|^p = 2^{p/2} Gamma(p/2 + 1)
            Ok(2.0f64.sqrt() * (ln_gamma(0.5 * p + 1.0) / p).exp())
        }
        ModelKind::Gaussian { sigma } => {
            // E |X|^p = sigma^p 2^{p/2} Gamma((p+1)/2) / Gamma(1/2)
            let ln_ratio = ln_gamma(0.5 * (p + 1.0)) - ln_gamma(0.5);
            Ok(sigma * 2.0f64.sqrt() * (ln_ratio / p).exp())
        }
        ModelKind::Rademacher => Ok(1.0),
        ModelKind::FiniteDiscrete { atoms } => {
            let terms: Vec<f64> = atoms
                .iter()
                .filter(|&&(v, prob)| v != 0.0 && prob > 0.0)
                .map(|&(v, prob)| prob.ln() + p * v.abs().ln())
                .collect();
            if terms.is_empty() {
                return Ok(0.0);
            }
            Ok((log_sum_exp(&terms) / p).exp())
        }
        ModelKind::WeibullSym { .. } => lp_norm_quadrature(model, p),
        ModelKind::Empirical { samples } => Ok(lp_norm_samples(samples, p)?.0),
    }
}

/// Density-backed quadrature route for any continuous kind. Exists as an
/// independent cross-check of the closed forms.
pub fn lp_norm_quadrature(model: &RandomVariableModel, p: f64) -> Result<f64> {
    check_p(p)?;
    if !model.has_density() {
        return Err(Error::UnsupportedKind {
            op: "lp_norm_quadrature",
            kind: model.label().to_string(),
        });
    }
    // E |X|^p = 2 int_0^inf x^p f(x) dx for the symmetric densities.
    let ln_moment = std::f64::consts::LN_2
        + quad::log_integrate_half_line(
            |x| p * x.ln() + model.log_density_pos(x),
            model.quad_scale(),
        )?;
    Ok((ln_moment / p).exp())
}

/// Plug-in Lp norm of a sample with its delta-method standard error.
///
/// Refuses p beyond log2(count): higher plug-in moments are noise-dominated.
pub fn lp_norm_samples(values: &[f64], p: f64) -> Result<(f64, f64)> {
    check_p(p)?;
    if values.is_empty() {
        return Err(Error::InvalidInput("empty sample".into()));
    }
    let n = values.len() as f64;
    let max_p = n.log2();
    if p > max_p {
        return Err(Error::UnreliableMoment { p, max_p });
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for v in values {
        let t = v.abs().powf(p);
        sum += t;
        sum_sq += t * t;
    }
    let m = sum / n;
    if m == 0.0 {
        return Ok((0.0, 0.0));
    }
    let var = (sum_sq / n - m * m).max(0.0) * n / (n - 1.0).max(1.0);
    let se_m = (var / n).sqrt();
    let value = m.powf(1.0 / p);
    let se = value / (p * m) * se_m;
    Ok((value, se))
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::OutOfDomain(format!("moment order p={p}, need p >= 1")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Moment profiles
// ---------------------------------------------------------------------------

/// The natural function p -> |X|_p of a model, tabulated on `grid`.
pub fn natural_function(model: &RandomVariableModel, grid: &[f64]) -> Result<MomentProfile> {
    validate_grid(grid)?;
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&p| lp_norm(model, p))
        .collect::<Result<_>>()?;
    let provenance = match model.kind() {
        ModelKind::WeibullSym { .. } => Provenance::Quadrature,
        ModelKind::Empirical { .. } => Provenance::Empirical,
        _ => Provenance::Analytic,
    };
    let cis = match model.kind() {
        ModelKind::Empirical { samples } => grid
            .iter()
            .map(|&p| lp_norm_samples(samples, p).map(|(_, se)| 3.0 * se))
            .collect::<Result<Vec<f64>>>()?,
        _ => vec![0.0; grid.len()],
    };
    MomentProfile::new(grid.to_vec(), values, cis, provenance)
}

/// Plug-in moment profile of a sample (e.g. draws of a sum).
pub fn empirical_profile(values: &[f64], grid: &[f64]) -> Result<MomentProfile> {
    validate_grid(grid)?;
    let stats: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&p| lp_norm_samples(values, p))
        .collect::<Result<_>>()?;
    MomentProfile::new(
        grid.to_vec(),
        stats.iter().map(|s| s.0).collect(),
        stats.iter().map(|s| 3.0 * s.1).collect(),
        Provenance::Empirical,
    )
}

/// Exact profile of a sum when the law is available in closed form:
/// Gaussian base (Gaussian stability) or a discrete base small enough to
/// enumerate. `None` when only sampling can reach the law.
pub fn sum_exact_profile(sum: &SumModel, grid: &[f64]) -> Result<Option<MomentProfile>> {
    validate_grid(grid)?;
    if let ModelKind::Gaussian { sigma } = sum.base.kind() {
        let s_eff = sigma * (sum.n as f64).sqrt() * sum.scale_factor();
        let g = RandomVariableModel::gaussian(s_eff)?;
        return Ok(Some(natural_function(&g, grid)?));
    }
    if let Some(dist) = DiscreteDist::iid_sum(&sum.base, sum.n) {
        let dist = dist.scaled(sum.scale_factor());
        let values: Vec<f64> = grid.iter().map(|&p| dist.lp_norm(p)).collect();
        return Ok(Some(MomentProfile::new(
            grid.to_vec(),
            values,
            vec![0.0; grid.len()],
            Provenance::Analytic,
        )?));
    }
    Ok(None)
}

/// Monte Carlo moment profile of a sum.
pub fn sum_empirical_profile(
    sum: &SumModel,
    grid: &[f64],
    count: usize,
    seed: u64,
) -> Result<MomentProfile> {
    let samples = sum.sample_sum(count, seed)?;
    empirical_profile(&samples.values, grid)
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty p-grid".into()));
    }
    if grid[0] < 1.0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("p-grid must be increasing with p >= 1".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Moment generating function
// ---------------------------------------------------------------------------

/// phi_X(lambda) = max over signs of ln E exp(+-lambda X); +inf outside the
/// finiteness domain.
pub fn mgf_log(model: &RandomVariableModel, lambda: f64) -> Result<f64> {
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let radius = model.mgf_radius();
    if lambda.abs() >= radius {
        return Ok(f64::INFINITY);
    }
    let a = lambda.abs();
    match model.kind() {
        ModelKind::Gaussian { sigma } => Ok(0.5 * (a * sigma) * (a * sigma)),
        ModelKind::Rademacher => Ok(ln_cosh(a)),
        ModelKind::FiniteDiscrete { atoms } => {
            let side = |s: f64| {
                let terms: Vec<f64> = atoms
                    .iter()
                    .filter(|&&(_, p)| p > 0.0)
                    .map(|&(v, p)| p.ln() + s * lambda * v)
                    .collect();
                log_sum_exp(&terms)
            };
            Ok(side(1.0).max(side(-1.0)))
        }
        ModelKind::Empirical { samples } => {
            let ln_w = -(samples.len() as f64).ln();
            let side = |s: f64| {
                let terms: Vec<f64> = samples.iter().map(|&v| ln_w + s * lambda * v).collect();
                log_sum_exp(&terms)
            };
            Ok(side(1.0).max(side(-1.0)))
        }
        ModelKind::ExampleA | ModelKind::WeibullSym { .. } => {
            // Symmetric density: E e^{lambda X} = 2 int_0^inf cosh(lambda x) f(x) dx.
            quad::log_integrate_half_line(
                |x| model.log_density_pos(x) + std::f64::consts::LN_2 + ln_cosh(a * x),
                model.quad_scale(),
            )
        }
    }
}

/// Exact composition for iid sums: phi_S(lambda) = n phi_X(c lambda) with
/// c the normalization factor.
pub fn mgf_log_sum(sum: &SumModel, lambda: f64) -> Result<f64> {
    Ok(sum.n as f64 * mgf_log(&sum.base, lambda * sum.scale_factor())?)
}

// ---------------------------------------------------------------------------
// Young-Orlicz functions and the Young-Fenchel transform
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum PhiForm {
    /// phi_2(lambda) = lambda^2 / 2 (the subgaussian case).
    Quadratic,
    /// ln cosh(lambda), the natural function of a Rademacher variable.
    LnCosh,
    /// coeff * |lambda|^exponent with exponent > 1.
    Power { coeff: f64, exponent: f64 },
    /// The natural function of a model, evaluated through its MGF.
    NaturalOf(Box<RandomVariableModel>),
    /// The natural function of an iid sum.
    NaturalOfSum(Box<SumModel>),
}

/// Young-Orlicz function with finiteness radius `lambda0` (domain
/// (-lambda0, lambda0); evaluation at the endpoints takes the closure
/// value so clamped suprema come out right).
#[derive(Debug, Clone, PartialEq)]
pub struct PhiFunction {
    pub form: PhiForm,
    pub lambda0: f64,
}

impl PhiFunction {
    pub fn quadratic() -> Self {
        Self {
            form: PhiForm::Quadratic,
            lambda0: f64::INFINITY,
        }
    }

    pub fn quadratic_clamped(lambda0: f64) -> Result<Self> {
        if !(lambda0 > 0.0) {
            return Err(Error::InvalidInput("lambda0 must be positive".into()));
        }
        Ok(Self {
            form: PhiForm::Quadratic,
            lambda0,
        })
    }

    pub fn ln_cosh() -> Self {
        Self {
            form: PhiForm::LnCosh,
            lambda0: f64::INFINITY,
        }
    }

    pub fn power(coeff: f64, exponent: f64) -> Result<Self> {
        if !(coeff > 0.0) || !(exponent > 1.0) {
            return Err(Error::InvalidInput(
                "power form needs coeff > 0 and exponent > 1".into(),
            ));
        }
        Ok(Self {
            form: PhiForm::Power { coeff, exponent },
            lambda0: f64::INFINITY,
        })
    }

    /// The natural function of `model`; requires a finite MGF neighborhood.
    pub fn natural_of(model: &RandomVariableModel) -> Result<Self> {
        let lambda0 = model.mgf_radius();
        if lambda0 <= 0.0 {
            return Err(Error::Infeasible(format!(
                "{} has no finite moment generating neighborhood",
                model.label()
            )));
        }
        Ok(Self {
            form: PhiForm::NaturalOf(Box::new(model.clone())),
            lambda0,
        })
    }

    pub fn natural_of_sum(sum: &SumModel) -> Result<Self> {
        let base_radius = sum.base.mgf_radius();
        if base_radius <= 0.0 {
            return Err(Error::Infeasible(format!(
                "{} has no finite moment generating neighborhood",
                sum.base.label()
            )));
        }
        let lambda0 = base_radius / sum.scale_factor();
        Ok(Self {
            form: PhiForm::NaturalOfSum(Box::new(sum.clone())),
            lambda0,
        })
    }

    /// phi(lambda); +inf beyond the radius.
    pub fn eval(&self, lambda: f64) -> Result<f64> {
        let a = lambda.abs();
        if a > self.lambda0 {
            return Ok(f64::INFINITY);
        }
        match &self.form {
            PhiForm::Quadratic => Ok(0.5 * a * a),
            PhiForm::LnCosh => Ok(ln_cosh(a)),
            PhiForm::Power { coeff, exponent } => Ok(coeff * a.powf(*exponent)),
            PhiForm::NaturalOf(model) => mgf_log(model, a),
            PhiForm::NaturalOfSum(sum) => mgf_log_sum(sum, a),
        }
    }
}

/// Search cap for the maximizer when the domain is unbounded.
pub const YF_LAMBDA_CAP: f64 = 100.0;
const YF_WIDTH: f64 = 1e-10;

/// Young-Fenchel transform nu(u) = sup over lambda in [0, lambda0] of
/// (lambda u - phi(lambda)), for u >= 0.
pub fn young_fenchel(phi: &PhiFunction, u: f64) -> Result<f64> {
    young_fenchel_fn(|l| phi.eval(l), phi.lambda0, u)
}

/// Same supremum for any convex `g` with g(0) = 0 (tabulated functions are
/// passed as interpolating closures). The objective is concave, so a
/// golden-section scan plus endpoint checks finds the supremum.
pub fn young_fenchel_fn<G: Fn(f64) -> Result<f64>>(g: G, lambda0: f64, u: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(Error::OutOfDomain(format!(
            "Young-Fenchel transform evaluated at u={u}, need u >= 0"
        )));
    }
    let hi = lambda0.min(YF_LAMBDA_CAP);
    let h = |l: f64| -> Result<f64> {
        let g_val = g(l)?;
        Ok(if g_val == f64::INFINITY {
            f64::NEG_INFINITY
        } else {
            l * u - g_val
        })
    };

    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut lo = 0.0;
    let mut hi_b = hi;
    let mut x1 = hi_b - inv_phi * (hi_b - lo);
    let mut x2 = lo + inv_phi * (hi_b - lo);
    let mut f1 = h(x1)?;
    let mut f2 = h(x2)?;
    while hi_b - lo > YF_WIDTH {
        // On -inf ties keep the left bracket: the finite region is an
        // interval anchored at 0.
        if f1 >= f2 {
            hi_b = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi_b - inv_phi * (hi_b - lo);
            f1 = h(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi_b - lo);
            f2 = h(x2)?;
        }
    }
    let mut best = f1.max(f2).max(0.0); // lambda = 0 gives 0
    let end = h(hi)?;
    if end > best {
        best = end;
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// B(phi) norm
// ---------------------------------------------------------------------------

/// Least tau with phi_X(lambda) <= phi(lambda tau) on the grid.
#[derive(Debug, Clone)]
pub struct BPhiNorm {
    pub value: f64,
    pub phi: PhiFunction,
    pub tolerance: f64,
}

const BPHI_TOL: f64 = 1e-8;
const BPHI_TAU_CAP: f64 = 1e3;

/// Geometric lambda grid with 200 points inside (0, lambda0).
pub fn default_lambda_grid(lambda0: f64) -> Vec<f64> {
    let hi = if lambda0.is_finite() {
        lambda0 * (1.0 - 1e-6)
    } else {
        30.0
    };
    geometric_grid(hi * 1e-4, hi, 200)
}

/// B(phi) norm of a model on the given lambda grid.
pub fn bphi_norm(
    model: &RandomVariableModel,
    phi: &PhiFunction,
    lambda_grid: &[f64],
) -> Result<BPhiNorm> {
    bphi_norm_core(|l| mgf_log(model, l), phi, lambda_grid)
}

/// B(phi) norm of an iid sum (exact MGF composition).
pub fn bphi_norm_sum(sum: &SumModel, phi: &PhiFunction, lambda_grid: &[f64]) -> Result<BPhiNorm> {
    bphi_norm_core(|l| mgf_log_sum(sum, l), phi, lambda_grid)
}

fn bphi_norm_core<M: Fn(f64) -> Result<f64>>(
    mgf: M,
    phi: &PhiFunction,
    lambda_grid: &[f64],
) -> Result<BPhiNorm> {
    if lambda_grid.is_empty() {
        return Err(Error::InvalidInput("empty lambda grid".into()));
    }
    if lambda_grid
        .iter()
        .any(|&l| !(l > 0.0) || l >= phi.lambda0 * (1.0 + 1e-12))
    {
        return Err(Error::InvalidInput(
            "lambda grid must lie inside (0, lambda0)".into(),
        ));
    }
    let mgf_vals: Vec<f64> = lambda_grid.iter().map(|&l| mgf(l)).collect::<Result<_>>()?;
    if let Some(i) = mgf_vals.iter().position(|v| !v.is_finite()) {
        return Err(Error::Infeasible(format!(
            "moment generating function infinite at lambda={}",
            lambda_grid[i]
        )));
    }

    let feasible = |tau: f64| -> Result<bool> {
        for (&l, &m) in lambda_grid.iter().zip(&mgf_vals) {
            if phi.eval(l * tau)? < m {
                return Ok(false);
            }
        }
        Ok(true)
    };

    if feasible(0.0)? {
        return Ok(BPhiNorm {
            value: 0.0,
            phi: phi.clone(),
            tolerance: BPHI_TOL,
        });
    }
    let mut hi = 1.0;
    while !feasible(hi)? {
        hi *= 2.0;
        if hi > BPHI_TAU_CAP {
            return Err(Error::Infeasible(format!(
                "no tau <= {BPHI_TAU_CAP} satisfies the B(phi) constraint"
            )));
        }
    }
    let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
    while hi - lo > BPHI_TOL {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(BPhiNorm {
        value: hi,
        phi: phi.clone(),
        tolerance: BPHI_TOL,
    })
}

/// Right-hand side of the subgaussian sum estimate:
/// ||sum xi_i||_Sub <= sqrt(sum ||xi_i||_Sub^2).
pub fn subgaussian_sum_norm_upper(norms: &[f64]) -> f64 {
    norms.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rv_models::Normalization;

    fn example_a() -> RandomVariableModel {
        RandomVariableModel::example_a()
    }

    #[test]
    fn lp_norm_example_a_closed_form() {
        // |X|_2 = sqrt(2) (Gamma(2) = 1).
        assert!((lp_norm(&example_a(), 2.0).unwrap() - 2.0f64.sqrt()).abs() < 1e-12);
        // |X|_p = 2^{1/2} Gamma(p/2 + 1)^{1/p} for p in {1, 4, 8}.
        for p in [1.0, 4.0, 8.0] {
            let want = 2.0f64.sqrt() * (ln_gamma(0.5 * p + 1.0) / p).exp();
            assert_eq!(lp_norm(&example_a(), p).unwrap(), want);
        }
        // Spot value: p = 4 gives sqrt(2) * 2^{1/4}.
        let p4 = lp_norm(&example_a(), 4.0).unwrap();
        assert!((p4 - 2.0f64.sqrt() * 2.0f64.powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn lp_norm_rademacher_is_one() {
        let r = RandomVariableModel::rademacher();
        for p in [1.0, 2.0, 7.5, 40.0] {
            assert_eq!(lp_norm(&r, p).unwrap(), 1.0);
        }
    }

    #[test]
    fn lp_norm_gaussian_variance() {
        let g = RandomVariableModel::gaussian(1.0).unwrap();
        assert!((lp_norm(&g, 2.0).unwrap() - 1.0).abs() < 1e-12);
        let g3 = RandomVariableModel::gaussian(3.0).unwrap();
        assert!((lp_norm(&g3, 2.0).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        let a = example_a();
        for p in [1.0, 2.0, 3.0, 5.0, 10.0, 20.0] {
            let closed = lp_norm(&a, p).unwrap();
            let quad = lp_norm_quadrature(&a, p).unwrap();
            assert!(
                (quad - closed).abs() < 1e-6 * closed,
                "p={p}: {quad} vs {closed}"
            );
        }
        // WeibullSym closed form |X|_p = scale * Gamma(p/m + 1)^{1/p} is the
        // oracle for the quadrature path used by lp_norm.
        for (m, scale) in [(1.0, 1.0), (2.0, 0.5), (4.0, 2.0)] {
            let w = RandomVariableModel::weibull_sym(m, scale).unwrap();
            for p in [1.0, 2.0, 6.0] {
                let got = lp_norm(&w, p).unwrap();
                let want = scale * (ln_gamma(p / m + 1.0) / p).exp();
                assert!(
                    (got - want).abs() < 1e-7 * want,
                    "m={m} scale={scale} p={p}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn empirical_moment_guard() {
        let vals = vec![1.0; 1024];
        assert!(lp_norm_samples(&vals, 10.0).is_ok());
        assert!(matches!(
            lp_norm_samples(&vals, 10.5),
            Err(Error::UnreliableMoment { .. })
        ));
    }

    #[test]
    fn natural_function_values() {
        let prof = natural_function(&example_a(), &[2.0]).unwrap();
        assert!((prof.values()[0] - 2.0f64.sqrt()).abs() < 1e-12);
        let g = RandomVariableModel::gaussian(1.0).unwrap();
        let prof = natural_function(&g, &[2.0]).unwrap();
        assert!((prof.values()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn natural_function_asymptotics() {
        // psi_X(p) ~ sqrt(p/e) for Example A.
        let p = 50.0;
        let v = lp_norm(&example_a(), p).unwrap();
        let ratio = v / (p / std::f64::consts::E).sqrt();
        assert!((0.9..=1.1).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn lyapunov_monotonicity_across_models() {
        let grid = geometric_grid(1.0, 40.0, 60);
        let models = [
            example_a(),
            RandomVariableModel::gaussian(0.5).unwrap(),
            RandomVariableModel::rademacher(),
            RandomVariableModel::weibull_sym(2.0, 1.0).unwrap(),
            RandomVariableModel::finite_discrete(vec![(-2.0, 0.25), (0.0, 0.5), (2.0, 0.25)])
                .unwrap(),
        ];
        for m in &models {
            // Construction itself enforces the Lyapunov check.
            let prof = natural_function(m, &grid).unwrap();
            assert_eq!(prof.grid().len(), 60);
        }
    }

    #[test]
    fn profile_csv_round_trip() {
        let prof = natural_function(&example_a(), &geometric_grid(1.0, 16.0, 9)).unwrap();
        let csv = prof.to_csv();
        let back = MomentProfile::from_csv(&csv).unwrap();
        assert_eq!(prof, back);
    }

    #[test]
    fn mgf_closed_forms() {
        let g = RandomVariableModel::gaussian(1.0).unwrap();
        for l in [0.0, 0.5, 2.0, -3.0] {
            assert!((mgf_log(&g, l).unwrap() - 0.5 * l * l).abs() < 1e-12);
        }
        let r = RandomVariableModel::rademacher();
        for l in [0.5, 1.5] {
            assert!((mgf_log(&r, l).unwrap() - l.cosh().ln()).abs() < 1e-12);
        }
        assert_eq!(mgf_log(&example_a(), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn mgf_example_a_quadrature_sane() {
        // E e^{lambda X} >= 1 + lambda^2 E X^2 / 2 = 1 + lambda^2 for the
        // symmetric law with variance 2; check close to the series at small
        // lambda. E X^4 = 2^2 Gamma(3) = 8, so the lambda^4 term is 8/24.
        let l = 0.1f64;
        let got = mgf_log(&example_a(), l).unwrap();
        let series = (1.0 + l * l + 8.0 * l.powi(4) / 24.0).ln();
        assert!((got - series).abs() < 1e-5, "{got} vs {series}");
    }

    #[test]
    fn mgf_infinite_outside_radius() {
        let w = RandomVariableModel::weibull_sym(1.0, 1.0).unwrap();
        assert_eq!(mgf_log(&w, 1.0).unwrap(), f64::INFINITY);
        assert!(mgf_log(&w, 0.5).unwrap().is_finite());
        let heavy = RandomVariableModel::weibull_sym(0.5, 1.0).unwrap();
        assert_eq!(heavy.mgf_radius(), 0.0);
        assert_eq!(mgf_log(&heavy, 0.1).unwrap(), f64::INFINITY);
    }

    #[test]
    fn mgf_midpoint_convexity() {
        let models = [
            example_a(),
            RandomVariableModel::gaussian(1.0).unwrap(),
            RandomVariableModel::rademacher(),
            RandomVariableModel::finite_discrete(vec![(-1.0, 0.5), (1.0, 0.5)]).unwrap(),
        ];
        let grid: Vec<f64> = (1..=20).map(|i| 0.15 * i as f64).collect();
        for m in &models {
            let vals: Vec<f64> = grid.iter().map(|&l| mgf_log(m, l).unwrap()).collect();
            for w in vals.windows(3) {
                assert!(
                    w[1] <= 0.5 * (w[0] + w[2]) + 1e-9,
                    "{}: convexity violated",
                    m.label()
                );
            }
        }
    }

    #[test]
    fn young_fenchel_quadratic_self_conjugate() {
        let phi = PhiFunction::quadratic();
        for u in [0.0, 1.0, 2.0] {
            let v = young_fenchel(&phi, u).unwrap();
            assert!((v - 0.5 * u * u).abs() < 1e-9, "u={u}: {v}");
        }
    }

    #[test]
    fn young_fenchel_clamped_matches_grid_oracle() {
        let phi = PhiFunction::quadratic_clamped(1.0).unwrap();
        let u = 2.0;
        let got = young_fenchel(&phi, u).unwrap();
        // Grid-search oracle over lambda in [0, 1].
        let oracle = (0..=100_000)
            .map(|i| {
                let l = i as f64 / 100_000.0;
                l * u - 0.5 * l * l
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((got - 1.5).abs() < 1e-8, "{got}");
        assert!((got - oracle).abs() < 1e-8);
    }

    #[test]
    fn young_fenchel_ln_cosh_at_zero() {
        let phi = PhiFunction::ln_cosh();
        assert!(young_fenchel(&phi, 0.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn young_fenchel_rejects_negative_u() {
        assert!(young_fenchel(&PhiFunction::quadratic(), -1.0).is_err());
    }

    #[test]
    fn fenchel_moreau_on_quadratic() {
        // Applying the transform twice to phi_2 returns phi_2.
        let phi = PhiFunction::quadratic();
        for x in [0.1, 0.5, 1.0, 2.5, 4.0] {
            let double = young_fenchel_fn(
                |l| young_fenchel(&phi, l),
                f64::INFINITY,
                x,
            )
            .unwrap();
            assert!((double - 0.5 * x * x).abs() < 1e-6, "x={x}: {double}");
        }
    }

    #[test]
    fn bphi_norm_gaussian_is_sigma() {
        let g = RandomVariableModel::gaussian(1.0).unwrap();
        let phi = PhiFunction::quadratic();
        let grid = default_lambda_grid(f64::INFINITY);
        let n = bphi_norm(&g, &phi, &grid).unwrap();
        assert!((n.value - 1.0).abs() < 1e-7, "{}", n.value);
        let g2 = RandomVariableModel::gaussian(2.5).unwrap();
        let n2 = bphi_norm(&g2, &phi, &grid).unwrap();
        assert!((n2.value - 2.5).abs() < 1e-7, "{}", n2.value);
    }

    #[test]
    fn bphi_norm_natural_is_one() {
        let grid = default_lambda_grid(f64::INFINITY);
        for model in [example_a(), RandomVariableModel::rademacher()] {
            let phi = PhiFunction::natural_of(&model).unwrap();
            let n = bphi_norm(&model, &phi, &grid).unwrap();
            assert!((n.value - 1.0).abs() < 1e-6, "{}: {}", model.label(), n.value);
        }
    }

    #[test]
    fn bphi_norm_rademacher_subgaussian() {
        // ln cosh(lambda) <= lambda^2/2 pointwise, so the norm is <= 1.
        let r = RandomVariableModel::rademacher();
        let grid = default_lambda_grid(f64::INFINITY);
        let n = bphi_norm(&r, &PhiFunction::quadratic(), &grid).unwrap();
        assert!(n.value <= 1.0 + 1e-8, "{}", n.value);
        assert!(n.value > 0.9);
    }

    #[test]
    fn bphi_infeasible_for_heavy_tail() {
        let heavy = RandomVariableModel::weibull_sym(0.5, 1.0).unwrap();
        let grid = default_lambda_grid(f64::INFINITY);
        assert!(matches!(
            bphi_norm(&heavy, &PhiFunction::quadratic(), &grid),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn sum_norm_upper_arithmetic() {
        assert!((subgaussian_sum_norm_upper(&[1.0, 1.0]) - 2.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(subgaussian_sum_norm_upper(&[0.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn normalized_gaussian_sums_have_constant_norm() {
        let grid = default_lambda_grid(f64::INFINITY);
        let phi = PhiFunction::quadratic();
        let base = RandomVariableModel::gaussian(1.0).unwrap();
        let single = bphi_norm(&base, &phi, &grid).unwrap().value;
        for n in [1u32, 4, 16] {
            let sum = SumModel::new(base.clone(), n, Normalization::InvSqrtN).unwrap();
            let v = bphi_norm_sum(&sum, &phi, &grid).unwrap().value;
            assert!((v - single).abs() < 1e-6, "n={n}: {v} vs {single}");
        }
    }

    #[test]
    fn sum_exact_profile_paths() {
        // Grid contains p = 2 so the checks hit exact values, not interpolants.
        let grid = vec![1.0, 2.0, 4.0, 8.0];
        let gauss_sum = SumModel::new(
            RandomVariableModel::gaussian(1.0).unwrap(),
            4,
            Normalization::InvSqrtN,
        )
        .unwrap();
        let p = sum_exact_profile(&gauss_sum, &grid).unwrap().unwrap();
        assert!((p.value_at(2.0).unwrap() - 1.0).abs() < 1e-10);

        let rad_sum = SumModel::new(RandomVariableModel::rademacher(), 4, Normalization::None)
            .unwrap();
        let p = sum_exact_profile(&rad_sum, &grid).unwrap().unwrap();
        assert!((p.value_at(2.0).unwrap() - 2.0).abs() < 1e-12);

        let a_sum = SumModel::new(example_a(), 4, Normalization::None).unwrap();
        assert!(sum_exact_profile(&a_sum, &grid).unwrap().is_none());
    }
}
