//! Grand Lebesgue Space numerics: Lp moment profiles, GLS norms and
//! anti-norms, B(phi) norms with Young-Fenchel tail bounds, lower bounds
//! for sums of independent centered random variables, exponential tail
//! envelopes, and a Monte Carlo harness that verifies the inequalities at
//! desk scale.
//!
//! Reproducibility: every sampled quantity is a pure function of
//! (model, count, seed). Streams are ChaCha8, keyed per 4096-realization
//! block by SplitMix64 from (seed, block index) and merged in block order,
//! so outputs are byte-identical for any worker count.

// Guards of the form `!(x > 0.0)` are NaN-rejecting on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gls_calculus;
pub mod mc_verify;
pub mod moment_engine;
pub mod quad;
pub mod rng;
pub mod rv_models;
pub mod special;
pub mod tail_engine;
pub mod textio;

pub use error::{Error, Result};
pub use gls_calculus::{
    anti_norm, gls_norm, kappa, naor_rhs, power_level_lower, sum_anti_norm_lower, theta_closed,
    theta_numeric, AntiNormResult, GeneratingFunction, PsiFamily,
};
pub use mc_verify::{
    run_suite, suite_csv, suite_text, SuiteConfig, Verdict, VerificationReport,
};
pub use moment_engine::{
    bphi_norm, bphi_norm_sum, empirical_profile, geometric_grid, lp_norm, lp_norm_quadrature,
    lp_norm_samples, mgf_log, mgf_log_sum, natural_function, subgaussian_sum_norm_upper,
    sum_empirical_profile, sum_exact_profile, young_fenchel, young_fenchel_fn, BPhiNorm,
    MomentProfile, PhiForm, PhiFunction, Provenance,
};
pub use rv_models::{
    DiscreteDist, ModelKind, Normalization, RandomVariableModel, SampleSet, SumModel,
};
pub use tail_engine::{
    empirical_tail, fit_envelope, tail_lower_best, tail_lower_from_moments, tail_upper_chernoff,
    tail_upper_chernoff_sum, tail_upper_chernoff_with, tail_upper_subgaussian_sum,
    write_envelope_csv, EmpiricalTail, EnvelopeFamily, EnvelopeFitConfig, TailEnvelope,
};
