//! Certified remetrization of iterated function systems.
//!
//! Given a finite family `F` of continuous self-maps of a box and `ε > 0`,
//! [`remetric::remetric_distance`] brackets the distance
//!
//! ```text
//! d_ε(x, y) = d(x, y) + Σ_{n≥1} sup{ d(f(x), f(y)) : f ∈ F^n } / (1 + ε)^n
//! ```
//!
//! which is equivalent to `d` and makes every member of `F`
//! `(1 + ε)`-Lipschitz, even when the maps are not Lipschitz for `d`
//! (e.g. `√x` at 0). Supporting modules estimate Lipschitz constants and the
//! generalized joint spectral radius, probe equicontinuity, and iterate the
//! Hutchinson operator on finite point sets.

pub mod analysis;
pub mod document;
pub mod error;
pub mod hutchinson;
pub mod maps;
pub mod remetric;
pub mod space;

pub use analysis::{
    family_lipschitz_estimate, jsr_estimate, lipschitz_estimate, modulus_probe,
    uniform_modulus_probe, verify_power_bound, JsrEstimate, LipschitzEstimate, ModulusProbe,
    PairSampler,
};
pub use document::IfsDocument;
pub use error::{Error, Result};
pub use hutchinson::{attractor_iterate, hutchinson_apply, IterationLog, LoggedMetric};
pub use maps::{eval_word, level_image_pairs, level_sup, Ifs, MapSpec, Word, DEFAULT_BUDGET};
pub use remetric::{
    remetric_distance, single_map_distance, tail_bound, verify_lipschitz_bound, CertifiedDistance,
    LipschitzCertificate, RemetricParams, TruncatedRemetric,
};
pub use space::{
    hausdorff, hausdorff_with, BaseMetric, BoxDomain, Distance, FinitePointSet, MetricSpace, Point,
};
