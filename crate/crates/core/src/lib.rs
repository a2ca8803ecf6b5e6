//! Ontology-guided fairness certification.
//!
//! The crate compiles declared sensitive and proxy concepts into a bias
//! σ-algebra over the rows of a tabular dataset, builds representations of
//! the features that are independent of that σ-algebra, measures residual
//! dependence, and emits certificates that third parties can re-derive.
//!
//! The stages, in pipeline order:
//!
//! | module | role |
//! |--------|------|
//! | [`ontology`] | parse `.fto` ontologies, forward-chain entailments |
//! | [`sigma`] | bind CSV rows to individuals, build the mask matrix and its atoms |
//! | [`transport`] | Sinkhorn projection onto conditional means, exact 1-d quantile barycenters |
//! | [`audit`] | HSIC permutation tests and conditional-distribution gaps |
//! | [`certify`] | canonical JSON certificates and their verification |
//! | [`pipeline`] | file-level stages used by the `fairtransport` binary |

pub mod audit;
pub mod certify;
pub mod decimal;
pub mod ontology;
pub mod pipeline;
pub mod sigma;
pub mod synth;
pub mod transport;

pub use decimal::Decimal;
