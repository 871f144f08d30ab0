//! Generating functions, GLS norms (sup form), anti-norms (inf form), the
//! theta/kappa combinators and the lower bounds for sums.
//!
//! Points where psi = +inf belong to neither extremum: they contribute the
//! convention value C/inf = 0 to the sup and are excluded from the inf
//! (otherwise every generating function with an infinite point would force
//! the anti-norm to zero, contradicting the degenerate family reducing to
//! the Lebesgue-Riesz norm).

use crate::error::{Error, Result};
use crate::moment_engine::MomentProfile;
use crate::special::log_add_exp;
use crate::textio::fmt_g17;

#[derive(Debug, Clone, PartialEq)]
pub enum PsiFamily {
    /// psi_m(p) = p^{1/m}.
    Power { m: f64 },
    /// psi^{(b;beta)}(p) = (b - p)^{-beta}.
    Blowup { b: f64, beta: f64 },
    /// 1 at p = r, +inf elsewhere; the GLS collapses to L_r.
    Degenerate { r: f64 },
    /// Natural function of a variable, tabulated as a moment profile.
    Natural(MomentProfile),
    /// Arbitrary tabulation, interpolated monotonically in log p.
    Tabulated { grid: Vec<f64>, values: Vec<f64> },
}

/// Generating function psi on [1, b).
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingFunction {
    family: PsiFamily,
    b: f64,
}

impl GeneratingFunction {
    pub fn power(m: f64) -> Result<Self> {
        if !(m > 0.0) {
            return Err(Error::InvalidInput(format!("power family needs m > 0, got {m}")));
        }
        Ok(Self {
            family: PsiFamily::Power { m },
            b: f64::INFINITY,
        })
    }

    pub fn blowup(b: f64, beta: f64) -> Result<Self> {
        if !(b > 1.0) || !b.is_finite() {
            return Err(Error::InvalidInput(format!("blowup family needs finite b > 1, got {b}")));
        }
        if !(beta >= 0.0) {
            return Err(Error::InvalidInput(format!("blowup family needs beta >= 0, got {beta}")));
        }
        Ok(Self {
            family: PsiFamily::Blowup { b, beta },
            b,
        })
    }

    pub fn degenerate(r: f64) -> Result<Self> {
        if !(r >= 1.0) {
            return Err(Error::InvalidInput(format!("degenerate family needs r >= 1, got {r}")));
        }
        Ok(Self {
            family: PsiFamily::Degenerate { r },
            b: f64::INFINITY,
        })
    }

    /// Natural generating function; `b` defaults to +inf (the family view,
    /// e.g. for the kappa factor of Theorem 2.1) while evaluation stays on
    /// the tabulated grid.
    pub fn natural(profile: MomentProfile) -> Result<Self> {
        if profile.values().iter().any(|&v| v <= 0.0) {
            return Err(Error::InvalidInput(
                "natural psi needs strictly positive values (inf psi > 0)".into(),
            ));
        }
        Ok(Self {
            family: PsiFamily::Natural(profile),
            b: f64::INFINITY,
        })
    }

    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() || grid.len() < 2 {
            return Err(Error::InvalidInput("tabulated psi needs matching arrays, len >= 2".into()));
        }
        if grid[0] < 1.0 || grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("tabulated grid must be increasing with p >= 1".into()));
        }
        if values.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidInput(
                "tabulated psi needs strictly positive values (inf psi > 0)".into(),
            ));
        }
        Ok(Self {
            family: PsiFamily::Tabulated { grid, values },
            b: f64::INFINITY,
        })
    }

    /// Override the upper endpoint of the definition interval.
    pub fn with_b(mut self, b: f64) -> Result<Self> {
        if !(b > 1.0) {
            return Err(Error::InvalidInput(format!("b must be > 1, got {b}")));
        }
        self.b = b;
        Ok(self)
    }

    pub fn family(&self) -> &PsiFamily {
        &self.family
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn describe(&self) -> String {
        match &self.family {
            PsiFamily::Power { m } => format!("power(m={})", fmt_g17(*m)),
            PsiFamily::Blowup { b, beta } => {
                format!("blowup(b={},beta={})", fmt_g17(*b), fmt_g17(*beta))
            }
            PsiFamily::Degenerate { r } => format!("degenerate(r={})", fmt_g17(*r)),
            PsiFamily::Natural(p) => format!(
                "natural(grid=[{},{}],points={})",
                fmt_g17(p.min_p()),
                fmt_g17(p.max_p()),
                p.grid().len()
            ),
            PsiFamily::Tabulated { grid, .. } => format!(
                "tabulated(grid=[{},{}],points={})",
                fmt_g17(grid[0]),
                fmt_g17(*grid.last().unwrap()),
                grid.len()
            ),
        }
    }

    /// psi(p); Err outside [1, b), +inf at points where the family is
    /// infinite or untabulated.
    pub fn psi_eval(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) || p >= self.b {
            return Err(Error::OutOfDomain(format!(
                "psi evaluated at p={p}, domain [1, {})",
                self.b
            )));
        }
        Ok(match &self.family {
            PsiFamily::Power { m } => p.powf(1.0 / m),
            PsiFamily::Blowup { b, beta } => (b - p).powf(-beta),
            PsiFamily::Degenerate { r } => {
                if (p - r).abs() <= 1e-12 {
                    1.0
                } else {
                    f64::INFINITY
                }
            }
            PsiFamily::Natural(profile) => profile.value_at(p).unwrap_or(f64::INFINITY),
            PsiFamily::Tabulated { grid, values } => {
                interp_log(grid, values, p).unwrap_or(f64::INFINITY)
            }
        })
    }

    /// Finite psi(p) or None (outside the domain or infinite).
    fn eval_finite(&self, p: f64) -> Option<f64> {
        match self.psi_eval(p) {
            Ok(v) if v.is_finite() => Some(v),
            _ => None,
        }
    }
}

fn interp_log(grid: &[f64], values: &[f64], p: f64) -> Option<f64> {
    if p < grid[0] || p > *grid.last().unwrap() {
        return None;
    }
    let i = match grid.binary_search_by(|g| g.total_cmp(&p)) {
        Ok(i) => return Some(values[i]),
        Err(i) => i,
    };
    let t = (p.ln() - grid[i - 1].ln()) / (grid[i].ln() - grid[i - 1].ln());
    Some(values[i - 1] + t * (values[i] - values[i - 1]))
}

/// Result of an anti-norm computation: the infimum, where it was attained,
/// and the profile it was computed from.
#[derive(Debug, Clone)]
pub struct AntiNormResult {
    pub value: f64,
    pub argmin_p: f64,
    pub profile_used: MomentProfile,
}

const REFINE_ITERS: usize = 60;

fn golden_extremum<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, maximize: bool) -> (f64, f64) {
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let sign = if maximize { 1.0 } else { -1.0 };
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = sign * f(x1);
    let mut f2 = sign * f(x2);
    for _ in 0..REFINE_ITERS {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = sign * f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = sign * f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// ||f||_{G psi} = sup_p |f|_p / psi(p), over the profile grid with local
/// refinement near the arg-sup.
pub fn gls_norm(profile: &MomentProfile, gf: &GeneratingFunction) -> Result<f64> {
    if let PsiFamily::Degenerate { r } = gf.family() {
        // C / inf = 0 away from r: the norm is |f|_r.
        return profile
            .value_at(*r)
            .ok_or_else(|| Error::EmptyDomain(format!("profile does not cover p={r}")));
    }
    let ratio = |p: f64| -> f64 {
        match (profile.value_at(p), gf.eval_finite(p)) {
            (Some(v), Some(psi)) => v / psi,
            _ => 0.0, // excluded from the sup (C / inf = 0)
        }
    };
    let mut best: Option<(usize, f64)> = None;
    for (i, &p) in profile.grid().iter().enumerate() {
        if gf.eval_finite(p).is_some() {
            let r = ratio(p);
            if best.is_none_or(|(_, b)| r > b) {
                best = Some((i, r));
            }
        }
    }
    let (i, grid_best) =
        best.ok_or_else(|| Error::EmptyDomain("no grid point with finite psi".into()))?;
    let grid = profile.grid();
    let lo = grid[i.saturating_sub(1)];
    let hi = grid[(i + 1).min(grid.len() - 1)];
    let refined = if hi > lo {
        golden_extremum(&ratio, lo, hi, true).1
    } else {
        grid_best
    };
    Ok(grid_best.max(refined))
}

/// V(X) = inf_p |X|_p / psi(p) over `p_range` (a closed sub-interval of the
/// profile's coverage), with local refinement near the arg-inf.
pub fn anti_norm(
    profile: &MomentProfile,
    gf: &GeneratingFunction,
    p_range: (f64, f64),
) -> Result<AntiNormResult> {
    let lo = p_range.0.max(profile.min_p()).max(1.0);
    let mut hi = p_range.1.min(profile.max_p());
    if gf.b().is_finite() {
        hi = hi.min(gf.b() * (1.0 - 1e-12));
    }
    if !(lo <= hi) {
        return Err(Error::EmptyDomain(format!(
            "empty p-range [{}, {}] after intersection",
            p_range.0, p_range.1
        )));
    }

    if let PsiFamily::Degenerate { r } = gf.family() {
        if *r < lo || *r > hi {
            return Err(Error::EmptyDomain(format!(
                "degenerate point r={r} outside the p-range [{lo}, {hi}]"
            )));
        }
        let v = profile
            .value_at(*r)
            .ok_or_else(|| Error::EmptyDomain(format!("profile does not cover p={r}")))?;
        return Ok(AntiNormResult {
            value: v,
            argmin_p: *r,
            profile_used: profile.clone(),
        });
    }

    // Candidate points: interior grid points plus both closed endpoints.
    let mut candidates: Vec<f64> = vec![lo];
    candidates.extend(
        profile
            .grid()
            .iter()
            .copied()
            .filter(|&p| p > lo && p < hi),
    );
    if hi > lo {
        candidates.push(hi);
    }

    let ratio = |p: f64| -> f64 {
        match (profile.value_at(p), gf.eval_finite(p)) {
            (Some(v), Some(psi)) => v / psi,
            _ => f64::INFINITY, // excluded from the inf
        }
    };
    let mut best: Option<(usize, f64)> = None;
    for (i, &p) in candidates.iter().enumerate() {
        let r = ratio(p);
        if r.is_finite() && best.is_none_or(|(_, b)| r < b) {
            best = Some((i, r));
        }
    }
    let (i, grid_best) =
        best.ok_or_else(|| Error::EmptyDomain("no p-range point with finite psi".into()))?;
    let blo = candidates[i.saturating_sub(1)];
    let bhi = candidates[(i + 1).min(candidates.len() - 1)];
    let (mut argmin, mut value) = (candidates[i], grid_best);
    if bhi > blo {
        let (x, v) = golden_extremum(&ratio, blo, bhi, false);
        if v < value {
            argmin = x;
            value = v;
        }
    }
    Ok(AntiNormResult {
        value,
        argmin_p: argmin,
        profile_used: profile.clone(),
    })
}

/// theta(p, q) = min(1, 2^{1/q - 1/p}) (closed form).
pub fn theta_closed(p: f64, q: f64) -> f64 {
    assert!(p >= 1.0 && q >= 1.0, "theta needs p, q >= 1");
    1.0f64.min(2.0f64.powf(1.0 / q - 1.0 / p))
}

/// Default z-grid for the numerical theta: log-spaced over eighteen
/// decades. When q < p the infimum is only approached at the boundary with
/// error O(z^q), so the grid reaches 1e-9 to stay inside 1e-8 of the
/// closed form even at q = 1.
pub fn default_z_grid() -> Vec<f64> {
    let n = 721;
    (0..n)
        .map(|i| 10f64.powf(-9.0 + 18.0 * i as f64 / (n - 1) as f64))
        .collect()
}

/// Numerical theta: inf over z > 0 of (z^q + 1)^{1/q} / (z^p + 1)^{1/p},
/// minimized on the grid with golden refinement. Oracle for the closed form.
pub fn theta_numeric(p: f64, q: f64, z_grid: &[f64]) -> f64 {
    assert!(p >= 1.0 && q >= 1.0, "theta needs p, q >= 1");
    assert!(!z_grid.is_empty());
    let ratio = |z: f64| -> f64 {
        let ln_num = log_add_exp(q * z.ln(), 0.0) / q;
        let ln_den = log_add_exp(p * z.ln(), 0.0) / p;
        (ln_num - ln_den).exp()
    };
    let mut bi = 0;
    let mut best = f64::INFINITY;
    for (i, &z) in z_grid.iter().enumerate() {
        let r = ratio(z);
        if r < best {
            best = r;
            bi = i;
        }
    }
    let lo = z_grid[bi.saturating_sub(1)];
    let hi = z_grid[(bi + 1).min(z_grid.len() - 1)];
    if hi > lo {
        let (_, v) = golden_extremum(&ratio, lo, hi, false);
        best = best.min(v);
    }
    best
}

/// kappa_b(p) = min(1, 2^{1/b - 1/p}); b may be +inf (1/b = 0).
pub fn kappa(b: f64, p: f64) -> f64 {
    assert!(b > 1.0 && p >= 1.0, "kappa needs b > 1 and p >= 1");
    let inv_b = if b.is_finite() { 1.0 / b } else { 0.0 };
    1.0f64.min(2.0f64.powf(inv_b - 1.0 / p))
}

/// Lower bound of Theorem 2.1: V(sum X_i) >= kappa_b(p) (sum V^p(X_i))^{1/p}.
/// p = +inf is the max of the V's with factor min(1, 2^{1/b}).
pub fn sum_anti_norm_lower(v: &[f64], b: f64, p: f64) -> f64 {
    assert!(v.iter().all(|&x| x >= 0.0), "anti-norms are nonnegative");
    assert!(p >= 1.0, "need p >= 1");
    let vmax = v.iter().cloned().fold(0.0, f64::max);
    if vmax == 0.0 {
        return 0.0;
    }
    if p == f64::INFINITY {
        let inv_b = if b.is_finite() { 1.0 / b } else { 0.0 };
        return 1.0f64.min(2.0f64.powf(inv_b)) * vmax;
    }
    let sum: f64 = v.iter().map(|&x| (x / vmax).powf(p)).sum();
    kappa(b, p) * vmax * sum.powf(1.0 / p)
}

/// Right-hand side of the n-variable Naor-Oleszkiewicz inequality,
/// (sum |X_i|_q^q)^{1/q}; the hypothesis needs q in [2, inf].
pub fn naor_rhs(q: f64, norms: &[f64]) -> Result<f64> {
    if !(q >= 2.0) {
        return Err(Error::DomainError(format!(
            "Naor-Oleszkiewicz inequality is stated for q in [2, inf], got q={q}"
        )));
    }
    let vmax = norms.iter().cloned().fold(0.0, f64::max);
    if vmax == 0.0 {
        return Ok(0.0);
    }
    if q == f64::INFINITY {
        return Ok(vmax);
    }
    let sum: f64 = norms.iter().map(|&x| (x / vmax).powf(q)).sum();
    Ok(vmax * sum.powf(1.0 / q))
}

/// Power-level lower bound: |n^{-1/2} sum X_i|_q >= n^{1/q - 1/2} |X_1|_q.
pub fn power_level_lower(q: f64, n: u32, norm1: f64) -> Result<f64> {
    if !(q >= 2.0) {
        return Err(Error::DomainError(format!(
            "power-level bound is stated for q in [2, inf], got q={q}"
        )));
    }
    let inv_q = if q == f64::INFINITY { 0.0 } else { 1.0 / q };
    Ok((n as f64).powf(inv_q - 0.5) * norm1)
}
