//! Two-sided tail envelopes for sums: Chernoff/Young-Fenchel upper bounds
//! and Paley-Zygmund moment lower bounds, fitted into the exponential forms
//! exp(-C u^e) with e = 2 (bilateral subgaussian) or e = min(m, 2).
//!
//! Tail convention: envelopes bound the one-sided tail P(S > u). The
//! Paley-Zygmund device bounds the two-sided tail P(|S| > u); for the
//! symmetric base laws required here the one-sided lower bound is half of
//! it.

use crate::error::{Error, Result};
use crate::moment_engine::{
    empirical_profile, geometric_grid, young_fenchel, MomentProfile, PhiFunction,
};
use crate::rv_models::SumModel;
use crate::textio::{fmt_g17, parse_f64};
use rayon::prelude::*;
use std::fmt::Write as _;

/// Chernoff bound P(X > u) <= exp(-nu(u / tau)) with the natural phi of the
/// model, for which tau = 1.
pub fn tail_upper_chernoff(model: &crate::rv_models::RandomVariableModel, u: f64) -> Result<f64> {
    check_u(u)?;
    let phi = PhiFunction::natural_of(model)?;
    Ok((-young_fenchel(&phi, u)?).exp())
}

/// Chernoff bound for an iid sum through the exact MGF composition.
pub fn tail_upper_chernoff_sum(sum: &SumModel, u: f64) -> Result<f64> {
    check_u(u)?;
    let phi = PhiFunction::natural_of_sum(sum)?;
    Ok((-young_fenchel(&phi, u)?).exp())
}

/// Chernoff bound against an explicit Young-Orlicz function: computes the
/// B(phi) norm on the lambda grid and returns exp(-nu(u / tau)).
pub fn tail_upper_chernoff_with(
    model: &crate::rv_models::RandomVariableModel,
    phi: &PhiFunction,
    lambda_grid: &[f64],
    u: f64,
) -> Result<f64> {
    check_u(u)?;
    let tau = crate::moment_engine::bphi_norm(model, phi, lambda_grid)?.value;
    if tau == 0.0 {
        return Ok(if u > 0.0 { 0.0 } else { 1.0 });
    }
    Ok((-young_fenchel(phi, u / tau)?).exp())
}

/// Upper bound for a normalized subgaussian sum composed through
/// ||sum xi_i||_Sub <= sqrt(sum ||xi_i||^2): exp(-(u/tau)^2 / 2) with tau
/// the composed norm of the (normalized) sum.
pub fn tail_upper_subgaussian_sum(sum: &SumModel, lambda_grid: &[f64], u: f64) -> Result<f64> {
    check_u(u)?;
    let phi2 = PhiFunction::quadratic();
    let tau_base = crate::moment_engine::bphi_norm(&sum.base, &phi2, lambda_grid)?.value;
    let norms = vec![tau_base; sum.n as usize];
    let tau = crate::moment_engine::subgaussian_sum_norm_upper(&norms) * sum.scale_factor();
    if tau == 0.0 {
        return Ok(if u > 0.0 { 0.0 } else { 1.0 });
    }
    let z = u / tau;
    Ok((-0.5 * z * z).exp())
}

fn check_u(u: f64) -> Result<()> {
    if !(u >= 0.0) {
        return Err(Error::OutOfDomain(format!("tail bound at u={u}, need u >= 0")));
    }
    Ok(())
}

/// Paley-Zygmund lower bound for P(|S| > u) from the moments of order p and
/// 2p: with t = u / |S|_p < 1,
///   P(|S| > u) >= (1 - t^p)^2 |S|_p^{2p} / |S|_{2p}^{2p}.
/// Returns 0 in the vacuous regime u >= |S|_p.
pub fn tail_lower_from_moments(profile: &MomentProfile, u: f64, p: f64) -> Result<f64> {
    check_u(u)?;
    let vp = profile.value_at(p).ok_or_else(|| {
        Error::OutOfDomain(format!("profile does not cover p={p}"))
    })?;
    let v2p = profile.value_at(2.0 * p).ok_or_else(|| {
        Error::OutOfDomain(format!("profile does not cover 2p={}", 2.0 * p))
    })?;
    if vp <= 0.0 || u >= vp {
        return Ok(0.0);
    }
    let t = u / vp;
    let tp = if t == 0.0 { 0.0 } else { (p * t.ln()).exp() };
    let ratio = (2.0 * p * (vp.ln() - v2p.ln())).exp();
    Ok((1.0 - tp) * (1.0 - tp) * ratio)
}

/// Best Paley-Zygmund bound over the profile grid points p with 2p still
/// covered. Returns (bound, argmax p); the bound is 0 when every p is
/// vacuous.
pub fn tail_lower_best(profile: &MomentProfile, u: f64) -> Result<(f64, Option<f64>)> {
    check_u(u)?;
    let max_p = profile.max_p();
    let candidates: Vec<f64> = profile
        .grid()
        .iter()
        .copied()
        .filter(|&p| 2.0 * p <= max_p)
        .collect();
    if candidates.is_empty() {
        return Err(Error::OutOfDomain(
            "profile must cover [p, 2p] for some grid p".into(),
        ));
    }
    let mut best = 0.0;
    let mut arg = None;
    for p in candidates {
        let b = tail_lower_from_moments(profile, u, p)?;
        if b > best {
            best = b;
            arg = Some(p);
        }
    }
    Ok((best, arg))
}

// ---------------------------------------------------------------------------
// Envelopes
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvelopeFamily {
    /// Bilateral subgaussian: exponent 2, constants C3 (lower), C4 (upper).
    Subgaussian,
    /// Weibull-type base tails exp(-C u^m): exponent min(m, 2), constants
    /// C9 (lower), C10 (upper).
    Weibull { m: f64 },
}

impl EnvelopeFamily {
    pub fn exponent(&self) -> f64 {
        match self {
            EnvelopeFamily::Subgaussian => 2.0,
            EnvelopeFamily::Weibull { m } => m.min(2.0),
        }
    }

    fn constant_keys(&self) -> (&'static str, &'static str) {
        match self {
            EnvelopeFamily::Subgaussian => ("C3", "C4"),
            EnvelopeFamily::Weibull { .. } => ("C9", "C10"),
        }
    }
}

/// Exponential envelope exp(-C_high u^e) <= P(S > u) <= exp(-C_low u^e).
#[derive(Debug, Clone, PartialEq)]
pub struct TailEnvelope {
    pub u_grid: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Named constants: the family's C pair plus "exponent".
    pub constants: Vec<(String, f64)>,
    /// Sub-range of u_grid on which the raw lower bound was nonvacuous.
    pub validity: (f64, f64),
}

impl TailEnvelope {
    fn constant(&self, names: &[&str]) -> f64 {
        self.constants
            .iter()
            .find(|(k, _)| names.contains(&k.as_str()))
            .map(|(_, v)| *v)
            .unwrap_or(f64::NAN)
    }

    pub fn exponent(&self) -> f64 {
        self.constant(&["exponent"])
    }

    /// Coefficient of the lower curve (C3 / C9; the larger one).
    pub fn c_lower_curve(&self) -> f64 {
        self.constant(&["C3", "C9", "C_lower"])
    }

    /// Coefficient of the upper curve (C4 / C10; the smaller one).
    pub fn c_upper_curve(&self) -> f64 {
        self.constant(&["C4", "C10", "C_upper"])
    }

    /// Checks the envelope invariants; used by tests and the verifier.
    pub fn validate(&self) -> Result<()> {
        let n = self.u_grid.len();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::InvalidInput("envelope arrays mismatched".into()));
        }
        for i in 0..n {
            if !(0.0 <= self.lower[i] && self.lower[i] <= self.upper[i] && self.upper[i] <= 1.0) {
                return Err(Error::InvalidInput(format!(
                    "envelope ordering violated at u={}",
                    self.u_grid[i]
                )));
            }
            if i > 0 && (self.lower[i] > self.lower[i - 1] || self.upper[i] > self.upper[i - 1]) {
                return Err(Error::InvalidInput(format!(
                    "envelope not nonincreasing at u={}",
                    self.u_grid[i]
                )));
            }
        }
        if self.c_upper_curve() > self.c_lower_curve() {
            return Err(Error::InvalidInput(
                "upper-curve coefficient exceeds lower-curve coefficient".into(),
            ));
        }
        Ok(())
    }
}

/// The exponential bounds are stated for u >= 1; desk-scale Monte Carlo
/// cannot resolve tails beyond u = 3.
pub fn default_u_grid() -> Vec<f64> {
    (0..9).map(|i| 1.0 + 0.25 * i as f64).collect()
}

#[derive(Debug, Clone)]
pub struct EnvelopeFitConfig {
    /// Draws used for the moment-based lower curve.
    pub count: usize,
    pub seed: u64,
    /// Allowed |slope - e| of the Chernoff curve on log-log axes. At desk
    /// scale the CLT pushes every slope toward 2, so the gate is loose; it
    /// still rejects declarations that are off by a whole exponent class.
    pub fit_tolerance: f64,
    /// Points in the moment-profile grid backing the Paley-Zygmund scan.
    pub profile_points: usize,
}

impl Default for EnvelopeFitConfig {
    fn default() -> Self {
        Self {
            count: 1_000_000,
            seed: 0x656e76,
            fit_tolerance: 1.05,
            profile_points: 48,
        }
    }
}

/// Fits the exponential envelope of a sum: Chernoff upper curve, Paley-
/// Zygmund lower curve, constants as the extreme of -ln(bound)/u^e so each
/// exponential form dominates/minorizes its computed curve.
pub fn fit_envelope(
    sum: &SumModel,
    family: EnvelopeFamily,
    u_grid: &[f64],
    cfg: &EnvelopeFitConfig,
) -> Result<TailEnvelope> {
    if u_grid.is_empty() || u_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("u-grid must be increasing".into()));
    }
    if u_grid[0] < 1.0 {
        return Err(Error::OutOfDomain(
            "envelope bounds are stated for u >= 1".into(),
        ));
    }
    if let EnvelopeFamily::Weibull { m } = family {
        if !(m > 0.0) {
            return Err(Error::InvalidInput(format!("weibull family needs m > 0, got {m}")));
        }
    }
    if !sum.base.is_symmetric() {
        return Err(Error::InvalidInput(
            "envelope fitting needs a symmetric base law (one-sided conversion)".into(),
        ));
    }
    let e = family.exponent();

    // Upper curve: exact Chernoff rate of the sum.
    let phi = PhiFunction::natural_of_sum(sum)?;
    let nus: Vec<f64> = u_grid
        .par_iter()
        .map(|&u| young_fenchel(&phi, u))
        .collect::<Result<_>>()?;
    if nus.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::Infeasible(
            "Chernoff rate not positive and finite on the u-grid".into(),
        ));
    }

    // Exponent sanity: log-log slope of the rate against the declared e.
    if u_grid.len() >= 2 {
        let slope = regress_slope(
            &u_grid.iter().map(|u| u.ln()).collect::<Vec<_>>(),
            &nus.iter().map(|v| v.ln()).collect::<Vec<_>>(),
        );
        if (slope - e).abs() > cfg.fit_tolerance {
            return Err(Error::FamilyMismatch {
                fitted: slope,
                declared: e,
                tolerance: cfg.fit_tolerance,
            });
        }
    }

    let c_upper = u_grid
        .iter()
        .zip(&nus)
        .map(|(&u, &nu)| nu / u.powf(e))
        .fold(f64::INFINITY, f64::min);

    // Lower curve: Paley-Zygmund from plug-in moments of the sampled sum,
    // halved for the one-sided tail of the symmetric law.
    let samples = sum.sample_sum(cfg.count, cfg.seed)?;
    let max_p = (cfg.count as f64).log2() * (1.0 - 1e-9);
    let profile = empirical_profile(
        &samples.values,
        &geometric_grid(1.0, max_p, cfg.profile_points),
    )?;
    let raw_lower: Vec<f64> = u_grid
        .iter()
        .map(|&u| tail_lower_best(&profile, u).map(|(b, _)| 0.5 * b))
        .collect::<Result<_>>()?;

    let mut c_lower = 0.0f64;
    let mut valid_hi = u_grid[0];
    for (&u, &raw) in u_grid.iter().zip(&raw_lower) {
        if raw > 0.0 {
            c_lower = c_lower.max(-raw.ln() / u.powf(e));
            valid_hi = u;
        } else {
            break;
        }
    }
    if raw_lower[0] == 0.0 {
        c_lower = f64::INFINITY;
    }

    let upper: Vec<f64> = u_grid.iter().map(|&u| (-c_upper * u.powf(e)).exp()).collect();
    let lower: Vec<f64> = u_grid.iter().map(|&u| (-c_lower * u.powf(e)).exp()).collect();
    let (lo_key, up_key) = family.constant_keys();
    Ok(TailEnvelope {
        u_grid: u_grid.to_vec(),
        lower,
        upper,
        constants: vec![
            (lo_key.to_string(), c_lower),
            (up_key.to_string(), c_upper),
            ("exponent".to_string(), e),
        ],
        validity: (u_grid[0], valid_hi),
    })
}

fn regress_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

// ---------------------------------------------------------------------------
// Empirical tails
// ---------------------------------------------------------------------------

/// Wilson score interval at z = 3 for k successes out of n: (center,
/// halfwidth). Correct coverage at small tail counts.
pub fn wilson3(k: u64, n: u64) -> (f64, f64) {
    let z = 3.0f64;
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    (center, half)
}

/// One-sided empirical tail of a sum on a u-grid, with Wilson 3-sigma
/// intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalTail {
    pub u_grid: Vec<f64>,
    pub p_hat: Vec<f64>,
    pub wilson_center: Vec<f64>,
    pub wilson_half: Vec<f64>,
    pub count: u64,
    pub seed: u64,
}

pub fn empirical_tail(sum: &SumModel, u_grid: &[f64], count: usize, seed: u64) -> Result<EmpiricalTail> {
    if u_grid.is_empty() {
        return Err(Error::InvalidInput("empty u-grid".into()));
    }
    let samples = sum.sample_sum(count, seed)?;
    let n = samples.values.len() as u64;
    let mut p_hat = Vec::with_capacity(u_grid.len());
    let mut centers = Vec::with_capacity(u_grid.len());
    let mut halves = Vec::with_capacity(u_grid.len());
    for &u in u_grid {
        let k = samples.values.iter().filter(|&&v| v > u).count() as u64;
        let (c, h) = wilson3(k, n);
        p_hat.push(k as f64 / n as f64);
        centers.push(c);
        halves.push(h);
    }
    Ok(EmpiricalTail {
        u_grid: u_grid.to_vec(),
        p_hat,
        wilson_center: centers,
        wilson_half: halves,
        count: n,
        seed,
    })
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Envelope CSV: `u,lower,upper,empirical,ci_halfwidth` with the constants
/// echoed as comment lines.
pub fn write_envelope_csv(env: &TailEnvelope, emp: Option<&EmpiricalTail>) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# C_upper={}, C_lower={}, exponent={}",
        fmt_g17(env.c_upper_curve()),
        fmt_g17(env.c_lower_curve()),
        fmt_g17(env.exponent())
    );
    let _ = writeln!(
        out,
        "# validity=[{},{}]",
        fmt_g17(env.validity.0),
        fmt_g17(env.validity.1)
    );
    out.push_str("u,lower,upper,empirical,ci_halfwidth\n");
    for (i, &u) in env.u_grid.iter().enumerate() {
        let (e_col, ci_col) = match emp {
            Some(t) => (fmt_g17(t.p_hat[i]), fmt_g17(t.wilson_half[i])),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_g17(u),
            fmt_g17(env.lower[i]),
            fmt_g17(env.upper[i]),
            e_col,
            ci_col
        );
    }
    out
}

/// Parses the envelope CSV back; returns the envelope (generic constant
/// names) and the empirical columns when present.
#[allow(clippy::type_complexity)]
pub fn read_envelope_csv(text: &str) -> Result<(TailEnvelope, Option<(Vec<f64>, Vec<f64>)>)> {
    let mut c_upper = f64::NAN;
    let mut c_lower = f64::NAN;
    let mut exponent = f64::NAN;
    let mut validity = (f64::NAN, f64::NAN);
    let mut u_grid = Vec::new();
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut emp = Vec::new();
    let mut ci = Vec::new();
    for line in text.lines() {
        let t = line.trim();
        if t.is_empty() || t.starts_with("u,") {
            continue;
        }
        if let Some(rest) = t.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("validity=[") {
                let v = v.trim_end_matches(']');
                let parts: Vec<&str> = v.split(',').collect();
                if parts.len() == 2 {
                    validity = (parse_f64(parts[0])?, parse_f64(parts[1])?);
                }
                continue;
            }
            for item in rest.split(',') {
                let item = item.trim();
                if let Some((k, v)) = item.split_once('=') {
                    match k.trim() {
                        "C_upper" => c_upper = parse_f64(v)?,
                        "C_lower" => c_lower = parse_f64(v)?,
                        "exponent" => exponent = parse_f64(v)?,
                        _ => {} // other comments (e.g. config echoes)
                    }
                }
            }
            continue;
        }
        let cols: Vec<&str> = t.split(',').collect();
        if cols.len() != 5 {
            return Err(Error::Parse(format!("envelope row needs 5 columns: {t:?}")));
        }
        u_grid.push(parse_f64(cols[0])?);
        lower.push(parse_f64(cols[1])?);
        upper.push(parse_f64(cols[2])?);
        if !cols[3].is_empty() {
            emp.push(parse_f64(cols[3])?);
            ci.push(parse_f64(cols[4])?);
        }
    }
    let env = TailEnvelope {
        u_grid,
        lower,
        upper,
        constants: vec![
            ("C_lower".to_string(), c_lower),
            ("C_upper".to_string(), c_upper),
            ("exponent".to_string(), exponent),
        ],
        validity,
    };
    let empirical = if emp.is_empty() { None } else { Some((emp, ci)) };
    Ok((env, empirical))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moment_engine::natural_function;
    use crate::rv_models::{DiscreteDist, Normalization, RandomVariableModel};
    use crate::special::gaussian_upper_tail;

    #[test]
    fn chernoff_gaussian_reference() {
        let g = RandomVariableModel::gaussian(1.0).unwrap();
        let b = tail_upper_chernoff(&g, 2.0).unwrap();
        assert!((b - (-2.0f64).exp()).abs() < 1e-9, "{b}");
        // True tail 0.0228 is below the bound.
        assert!(gaussian_upper_tail(2.0) <= b);
        assert_eq!(tail_upper_chernoff(&g, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn chernoff_infeasible_without_mgf() {
        let heavy = RandomVariableModel::weibull_sym(0.5, 1.0).unwrap();
        assert!(matches!(
            tail_upper_chernoff(&heavy, 1.0),
            Err(crate::error::Error::Infeasible(_))
        ));
    }

    #[test]
    fn chernoff_sum_independent_of_n() {
        let base = RandomVariableModel::gaussian(1.0).unwrap();
        for n in [1u32, 4, 16] {
            let sum = SumModel::new(base.clone(), n, Normalization::InvSqrtN).unwrap();
            let b = tail_upper_chernoff_sum(&sum, 2.0).unwrap();
            assert!((b - (-2.0f64).exp()).abs() < 1e-9, "n={n}: {b}");
        }
    }

    #[test]
    fn subgaussian_composition_route() {
        let base = RandomVariableModel::gaussian(1.0).unwrap();
        let grid = crate::moment_engine::default_lambda_grid(f64::INFINITY);
        let sum = SumModel::new(base, 9, Normalization::InvSqrtN).unwrap();
        let b = tail_upper_subgaussian_sum(&sum, &grid, 2.0).unwrap();
        assert!((b - (-2.0f64).exp()).abs() < 1e-6, "{b}");
    }

    #[test]
    fn pz_rademacher_pair_oracle() {
        // S = X1 + X2, unnormalized: P(|S| > 1.9) = 1/2 by enumeration.
        let dist = DiscreteDist::iid_sum(&RandomVariableModel::rademacher(), 2).unwrap();
        assert_eq!(dist.tail_abs_gt(1.9), 0.5);
        let grid = geometric_grid(1.0, 64.0, 128);
        let values: Vec<f64> = grid.iter().map(|&p| dist.lp_norm(p)).collect();
        let profile = MomentProfile::new(
            grid.clone(),
            values,
            vec![0.0; grid.len()],
            crate::moment_engine::Provenance::Analytic,
        )
        .unwrap();
        // Literal p = 2 is vacuous here (|S|_2 = sqrt(2) < 1.9)...
        assert_eq!(tail_lower_from_moments(&profile, 1.9, 2.0).unwrap(), 0.0);
        // ...but the grid-maximized bound is positive and below the truth.
        let (best, argp) = tail_lower_best(&profile, 1.9).unwrap();
        assert!(best > 0.0, "vacuous");
        assert!(best <= 0.5 + 1e-12, "{best}");
        assert!(argp.unwrap() > 10.0);
        // Fully vacuous regime returns 0.
        let (z, _) = tail_lower_best(&profile, 100.0).unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn pz_gaussian_below_true_tail() {
        let g = RandomVariableModel::gaussian(1.0).unwrap();
        let profile = natural_function(&g, &geometric_grid(1.0, 24.0, 64)).unwrap();
        let (best, _) = tail_lower_best(&profile, 1.0).unwrap();
        let truth = 2.0 * gaussian_upper_tail(1.0); // P(|X| > 1) = 0.3173
        assert!(best > 0.0);
        assert!(best <= truth, "{best} vs {truth}");
    }

    #[test]
    fn one_sided_lower_never_exceeds_chernoff() {
        let g = RandomVariableModel::gaussian(1.0).unwrap();
        let profile = natural_function(&g, &geometric_grid(1.0, 24.0, 64)).unwrap();
        for u in [0.5, 1.0, 1.5, 2.0, 3.0] {
            let lower = 0.5 * tail_lower_best(&profile, u).unwrap().0;
            let upper = tail_upper_chernoff(&g, u).unwrap();
            assert!(lower <= upper, "u={u}: {lower} > {upper}");
        }
    }

    #[test]
    fn envelope_example_a_subgaussian() {
        let sum = SumModel::new(RandomVariableModel::example_a(), 16, Normalization::InvSqrtN)
            .unwrap();
        let cfg = EnvelopeFitConfig {
            count: 200_000,
            ..Default::default()
        };
        let env = fit_envelope(&sum, EnvelopeFamily::Subgaussian, &default_u_grid(), &cfg)
            .unwrap();
        env.validate().unwrap();
        assert_eq!(env.exponent(), 2.0);
        let c3 = env.c_lower_curve();
        let c4 = env.c_upper_curve();
        assert!(c4 > 0.0 && c4 <= c3 && c3 < f64::INFINITY, "C4={c4}, C3={c3}");
    }

    #[test]
    fn envelope_weibull_exponents() {
        let cfg = EnvelopeFitConfig {
            count: 100_000,
            ..Default::default()
        };
        let grid = default_u_grid();
        for (m, want_e) in [(1.0, 1.0), (2.0, 2.0), (4.0, 2.0)] {
            let base = RandomVariableModel::weibull_sym(m, 1.0).unwrap();
            let sum = SumModel::new(base, 16, Normalization::InvSqrtN).unwrap();
            let env = fit_envelope(&sum, EnvelopeFamily::Weibull { m }, &grid, &cfg).unwrap();
            env.validate().unwrap();
            assert_eq!(env.exponent(), want_e, "m={m}");
        }
    }

    #[test]
    fn envelope_family_mismatch_detected() {
        // Exponent 0.2 declared for a Gaussian sum whose rate slope is ~2.
        let sum = SumModel::new(
            RandomVariableModel::gaussian(1.0).unwrap(),
            4,
            Normalization::InvSqrtN,
        )
        .unwrap();
        let cfg = EnvelopeFitConfig {
            count: 50_000,
            ..Default::default()
        };
        let err = fit_envelope(
            &sum,
            EnvelopeFamily::Weibull { m: 0.2 },
            &default_u_grid(),
            &cfg,
        );
        assert!(matches!(err, Err(Error::FamilyMismatch { .. })), "{err:?}");
    }

    #[test]
    fn envelope_rejects_u_below_one() {
        let sum = SumModel::new(
            RandomVariableModel::gaussian(1.0).unwrap(),
            2,
            Normalization::InvSqrtN,
        )
        .unwrap();
        let err = fit_envelope(
            &sum,
            EnvelopeFamily::Subgaussian,
            &[0.0, 1.0, 2.0],
            &EnvelopeFitConfig::default(),
        );
        assert!(matches!(err, Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn envelope_infeasible_for_heavy_tails() {
        let base = RandomVariableModel::weibull_sym(0.5, 1.0).unwrap();
        let sum = SumModel::new(base, 4, Normalization::InvSqrtN).unwrap();
        let err = fit_envelope(
            &sum,
            EnvelopeFamily::Weibull { m: 0.5 },
            &default_u_grid(),
            &EnvelopeFitConfig::default(),
        );
        assert!(matches!(err, Err(Error::Infeasible(_))));
    }

    #[test]
    fn wilson_interval_shape() {
        let (c, h) = wilson3(0, 1000);
        assert!(c > 0.0 && c - h <= 0.0, "zero-count interval covers 0");
        let (c, h) = wilson3(500, 1000);
        assert!((c - 0.5).abs() < 1e-3);
        assert!(h < 0.06);
    }

    #[test]
    fn envelope_csv_round_trip() {
        let sum = SumModel::new(RandomVariableModel::example_a(), 4, Normalization::InvSqrtN)
            .unwrap();
        let cfg = EnvelopeFitConfig {
            count: 50_000,
            ..Default::default()
        };
        let env = fit_envelope(&sum, EnvelopeFamily::Subgaussian, &default_u_grid(), &cfg)
            .unwrap();
        let emp = empirical_tail(&sum, &default_u_grid(), 10_000, 3).unwrap();
        let csv = write_envelope_csv(&env, Some(&emp));
        let (back, cols) = read_envelope_csv(&csv).unwrap();
        assert_eq!(back.u_grid, env.u_grid);
        assert_eq!(back.lower, env.lower);
        assert_eq!(back.upper, env.upper);
        assert_eq!(back.exponent(), env.exponent());
        assert_eq!(back.c_upper_curve(), env.c_upper_curve());
        assert_eq!(back.c_lower_curve(), env.c_lower_curve());
        assert_eq!(back.validity, env.validity);
        let (emp_col, ci_col) = cols.unwrap();
        assert_eq!(emp_col, emp.p_hat);
        assert_eq!(ci_col, emp.wilson_half);
    }
}
