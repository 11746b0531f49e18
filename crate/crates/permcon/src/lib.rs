//! Concentration bounds for suprema of empirical processes under sampling
//! without replacement and for Hoeffding statistics of random permutations,
//! together with the machinery to stress-test them empirically:
//!
//! - [`sampling`]: seeded, reproducible permutation / with-replacement /
//!   Rademacher draws on independent ChaCha streams;
//! - [`family`], [`stats`]: payoff families (explicit and structured) and
//!   exact evaluation of every per-realization statistic (`Z`, `Z'`, `Σ²`,
//!   `Σ̃²`, `f`, `S`, swap perturbations, truncations, centered matrices);
//! - [`bounds`]: closed-form Bennett/Bernstein-type tail bounds, Herbst
//!   converters and a numerical Chernoff optimizer;
//! - [`montecarlo`]: replication engine with exact-binomial confidence
//!   bands, bound-domination verdicts and convex-order checks;
//! - [`oracle`]: brute-force small-n ground truth (full `S_n` enumeration,
//!   exact fixed-point law, exact entropy-inequality check);
//! - [`scenarios`]: named instances, notably the adversarial capped-contrast
//!   family separating the two sampling schemes' centerings;
//! - [`report`]: reproducible CSV/JSON emission.

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod family;
pub mod montecarlo;
pub mod oracle;
pub mod report;
pub mod sampling;
pub mod scenarios;
pub mod stats;

pub use error::{Error, Result};
pub use family::{
    CenteredMatrix, ConvexTestFunction, Matrix, MatrixFamily, MatrixKind, MemberId,
    StatisticValue, VectorFamily, VectorKind,
};
pub use sampling::{
    draw_permutation, draw_rademacher, draw_with_replacement, PermutationSample,
    ReplacementSample, SeedSpec,
};
