//! Mutual information discriminant analysis (MIDA).
//!
//! MIDA builds Fisher-style scatter matrices from histogram mutual
//! information, solves a generalized symmetric eigenproblem for a linear
//! projection, and picks the redundancy offset `ct` that maximizes an
//! information criterion on the projected features. The crate also ships
//! PCA and LDA baselines and a stratified 1-NN cross-validation harness.

pub mod baselines;
pub mod data;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod geneig;
pub mod mi;
pub mod mida;
pub mod scatter;

pub use baselines::{fit_lda, fit_pca, ProjectionModel};
pub use dataset::Dataset;
pub use error::{MidaError, Result};
pub use eval::{run_cv, AccuracyTable, CvConfig, Method, Normalization};
pub use experiment::{run_experiment, ExperimentConfig, ReportFormat};
pub use geneig::{solve_fisher_rao, EigenSolution, ProjectionMatrix};
pub use mi::{HistogramSpec, JointCountTable};
pub use mida::{fit_mida, select_ct, MidaConfig, MidaModel};
pub use scatter::{build_scatter_pair, compute_mi_profile, MiProfile, ScatterPair};
