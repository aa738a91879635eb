//! Social resilience analysis for large undirected networks.
//!
//! The crate is organised around an immutable compressed adjacency
//! structure ([`graph::Graph`]) and the analyses that run over it:
//!
//! * [`kcore`]: classic and generalized k-core decomposition, coreness
//!   CCDF resilience curves and coreness-by-degree spread.
//! * [`equilibrium`]: the stay/leave equilibrium under a cost/benefit
//!   environment, its stability check, and threshold unraveling over time.
//! * [`powerlaw`]: maximum-likelihood power-law fits with a KS statistic
//!   and a semiparametric bootstrap p-value.
//! * [`temporal`]: id-ordered slicing of the network (past/internal/future
//!   connectivity) and per-slice at-risk ratios.
//!
//! Data-parallel loops go through [`exec::Execution`]; with the default
//! `parallel` feature they run on rayon, otherwise sequentially.

pub mod equilibrium;
pub mod exec;
pub mod generators;
pub mod graph;
pub mod kcore;
pub mod powerlaw;
pub mod seed;
pub mod temporal;

pub use equilibrium::{Environment, EquilibriumResult, UnravelSchedule};
pub use exec::Execution;
pub use graph::{EdgeListFormat, ExternalId, Graph, GraphError};
pub use kcore::{CorenessCcdf, CorenessVector, PropertyFunction};
pub use powerlaw::{DegreeSample, PowerLawFit};
pub use temporal::{SliceSpec, SliceStats};
